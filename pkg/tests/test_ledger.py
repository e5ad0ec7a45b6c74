"""Ledger tests: UTXO accounting, double-spend rejection, shielded spends,
block production, replay determinism and the chain store format."""

import pytest

from fogtrace.group import get_group
from fogtrace.ledger import (
    Block,
    ChainState,
    ForkMismatch,
    InsufficientFunds,
    MintTx,
    NotEnoughDecoys,
    NotOwner,
    ShieldedOutput,
    ShieldedTx,
    TransparentTx,
    TxOutput,
    apply_block,
    balance,
    build_shielded_spend,
    build_transparent_tx,
    load_chain,
    make_genesis,
    owned_shielded_outputs,
    produce_block,
    replay,
    save_chain,
    shielded_balance,
    transparent_keygen,
    validate_transaction,
)
from fogtrace.stealth import derive_onetime_output, stealth_keygen

BACKEND = "production-curve"
curve = get_group(BACKEND)


@pytest.fixture()
def alice():
    return transparent_keygen(BACKEND, b"alice")


@pytest.fixture()
def bob():
    return transparent_keygen(BACKEND, b"bob")


@pytest.fixture()
def carol():
    return transparent_keygen(BACKEND, b"carol")


def chain_with_genesis(grants, shielded_grants=None):
    genesis = make_genesis(grants, shielded_grants, BACKEND)
    state = apply_block(genesis, ChainState())
    return [genesis], state


def mine(blocks, state, mempool):
    block, rejected = produce_block(mempool, state)
    state = apply_block(block, state)
    blocks.append(block)
    return state, block, rejected


class TestTransparentFlow:
    def test_genesis_mint_and_simple_send(self, alice, bob):
        blocks, state = chain_with_genesis([(alice.address, 100)])
        tx = build_transparent_tx([alice], [(bob.address, 40)], 0, state)
        state, _, rejected = mine(blocks, state, [tx])
        assert not rejected
        assert balance(alice.address, state) == 60
        assert balance(bob.address, state) == 40

    def test_change_output_arithmetic(self, alice, bob):
        _, state = chain_with_genesis([(alice.address, 50)])
        tx = build_transparent_tx([alice], [(bob.address, 30)], 1, state)
        amounts = {o.address: o.amount for o in tx.outputs}
        assert amounts == {bob.address: 30, alice.address: 19}
        assert validate_transaction(tx, state)

    def test_insufficient_funds(self, alice, bob):
        _, state = chain_with_genesis([(alice.address, 10)])
        with pytest.raises(InsufficientFunds):
            build_transparent_tx([alice], [(bob.address, 30)], 0, state)

    def test_send_entire_balance_no_change(self, alice, bob):
        _, state = chain_with_genesis([(alice.address, 50)])
        tx = build_transparent_tx([alice], [(bob.address, 50)], 0, state)
        assert len(tx.outputs) == 1
        assert validate_transaction(tx, state)

    def test_multi_input_spend(self, alice, bob):
        _, state = chain_with_genesis([(alice.address, 30), (alice.address, 25)])
        tx = build_transparent_tx([alice], [(bob.address, 50)], 0, state)
        assert len(tx.inputs) == 2
        assert validate_transaction(tx, state)


class TestValidation:
    def test_double_spend_rejected_second_time(self, alice, bob, carol):
        blocks, state = chain_with_genesis([(alice.address, 100)])
        tx1 = build_transparent_tx([alice], [(bob.address, 60)], 0, state)
        tx2 = build_transparent_tx([alice], [(carol.address, 70)], 0, state)
        # both spend the same genesis output
        assert tx1.inputs[0].ref() == tx2.inputs[0].ref()
        state, block, rejected = mine(blocks, state, [tx1, tx2])
        assert [tx for tx, _ in rejected] == [tx2]
        assert rejected[0][1].reason == "AlreadySpent"
        assert list(block.transactions) == [tx1]

    def test_conservation_violation_detected(self, alice, bob):
        _, state = chain_with_genesis([(alice.address, 100)])
        tx = build_transparent_tx([alice], [(bob.address, 40)], 0, state)
        inflated = TransparentTx(
            tx.inputs, tx.outputs + (TxOutput(bob.address, 5),), tx.fee
        )
        verdict = validate_transaction(inflated, state)
        assert not verdict and verdict.reason in ("ConservationViolated", "BadSignature")

    def test_forged_signature_rejected(self, alice, bob, carol):
        _, state = chain_with_genesis([(alice.address, 100)])
        tx = build_transparent_tx([alice], [(bob.address, 40)], 0, state)
        # re-point the output at carol without re-signing
        forged = TransparentTx(
            tx.inputs,
            (TxOutput(carol.address, 40),) + tx.outputs[1:],
            tx.fee,
        )
        verdict = validate_transaction(forged, state)
        assert not verdict and verdict.reason == "BadSignature"

    def test_mint_outside_genesis_rejected(self, alice):
        _, state = chain_with_genesis([(alice.address, 100)])
        rogue = MintTx((TxOutput(alice.address, 7),), (), BACKEND)
        verdict = validate_transaction(rogue, state)
        assert not verdict and verdict.reason == "MintOutsideGenesis"


def shielded_setup(count=10, amount=100):
    """Genesis with `count` shielded grants across two recipients."""
    owner = stealth_keygen(curve, b"owner")
    other = stealth_keygen(curve, b"other")
    grants = []
    for i in range(count):
        keys = owner if i % 2 == 0 else other
        meta = derive_onetime_output(keys.address(), b"grant-%d" % i)
        grants.append((meta, amount))
    blocks, state = chain_with_genesis([], grants)
    return blocks, state, owner, other


class TestShieldedFlow:
    def test_scan_finds_owned_outputs(self):
        _, state, owner, other = shielded_setup(10)
        assert len(owned_shielded_outputs(owner, state)) == 5
        assert shielded_balance(owner, state) == 500
        assert shielded_balance(other, state) == 500

    def test_spend_with_decoys_validates_and_applies(self):
        blocks, state, owner, other = shielded_setup(10)
        ref = owned_shielded_outputs(owner, state)[0][0]
        tx = build_shielded_spend(owner, ref, [(other.address(), 30)], 0, 7, state, b"s1")
        assert len(tx.ring_member_refs) == 8
        assert len(set(tx.ring_member_refs)) == 8
        assert validate_transaction(tx, state)
        state, _, rejected = mine(blocks, state, [tx])
        assert not rejected
        # owner spent a 100 output: 30 out, 70 change back to owner
        assert shielded_balance(owner, state) == 400 + 70
        assert shielded_balance(other, state) == 500 + 30

    def test_ring_of_one_still_validates(self):
        blocks, state, owner, other = shielded_setup(4)
        ref = owned_shielded_outputs(owner, state)[0][0]
        tx = build_shielded_spend(owner, ref, [(other.address(), 100)], 0, 0, state, b"s2")
        assert len(tx.ring_member_refs) == 1
        assert validate_transaction(tx, state)

    def test_not_enough_decoys(self):
        _, state, owner, other = shielded_setup(4)
        ref = owned_shielded_outputs(owner, state)[0][0]
        with pytest.raises(NotEnoughDecoys):
            build_shielded_spend(owner, ref, [(other.address(), 10)], 0, 7, state, b"s3")

    def test_not_owner(self):
        _, state, owner, other = shielded_setup(4)
        foreign = stealth_keygen(curve, b"foreign")
        ref = owned_shielded_outputs(owner, state)[0][0]
        with pytest.raises(NotOwner):
            build_shielded_spend(foreign, ref, [(other.address(), 10)], 0, 0, state, b"s4")

    def test_key_image_reuse_rejected(self):
        blocks, state, owner, other = shielded_setup(10)
        ref = owned_shielded_outputs(owner, state)[0][0]
        tx1 = build_shielded_spend(owner, ref, [(other.address(), 30)], 0, 3, state, b"a")
        tx2 = build_shielded_spend(owner, ref, [(other.address(), 40)], 0, 3, state, b"b")
        state, block, rejected = mine(blocks, state, [tx1, tx2])
        assert list(block.transactions) == [tx1]
        assert rejected[0][1].reason == "KeyImageReused"

    def test_spent_output_disappears_from_wallet_view(self):
        blocks, state, owner, other = shielded_setup(10)
        ref = owned_shielded_outputs(owner, state)[0][0]
        tx = build_shielded_spend(owner, ref, [(other.address(), 30)], 0, 3, state, b"a")
        state, _, _ = mine(blocks, state, [tx])
        assert all(r != ref for r, _, _ in owned_shielded_outputs(owner, state))

    def test_inflationary_spend_rejected(self):
        _, state, owner, other = shielded_setup(10, amount=100)
        ref = owned_shielded_outputs(owner, state)[0][0]
        tx = build_shielded_spend(owner, ref, [(other.address(), 100)], 0, 3, state, b"a")
        bloated = ShieldedTx(
            tx.ring_member_refs,
            tx.lsag,
            tx.outputs + (ShieldedOutput(tx.outputs[0].meta, 50),),
            tx.fee,
        )
        verdict = validate_transaction(bloated, state)
        assert not verdict
        assert verdict.reason in ("ConservationViolated", "BadSignature")


class TestBlocksAndReplay:
    def test_empty_mempool_gives_empty_linked_block(self, alice):
        blocks, state = chain_with_genesis([(alice.address, 100)])
        state, block, rejected = mine(blocks, state, [])
        assert block.transactions == ()
        assert block.height == 1
        assert block.previous_block_hash == blocks[0].block_hash
        assert not rejected

    def test_block_hash_recomputes_from_canonical_bytes(self, alice):
        blocks, state = chain_with_genesis([(alice.address, 100)])
        block = blocks[0]
        assert Block.from_dict(block.to_dict()).block_hash == block.block_hash

    def test_fork_mismatch(self, alice):
        blocks, state = chain_with_genesis([(alice.address, 100)])
        orphan = Block(1, "ff" * 32, ())
        with pytest.raises(ForkMismatch):
            apply_block(orphan, state)

    def test_replay_reproduces_digest(self, alice, bob):
        blocks, state = chain_with_genesis([(alice.address, 100)])
        tx = build_transparent_tx([alice], [(bob.address, 40)], 2, state)
        state, _, _ = mine(blocks, state, [tx])
        assert replay(blocks).digest() == state.digest()

    def test_supply_is_conserved_with_fees(self, alice, bob):
        blocks, state = chain_with_genesis([(alice.address, 100)])
        tx = build_transparent_tx([alice], [(bob.address, 40)], 2, state)
        state, _, _ = mine(blocks, state, [tx])
        assert state.total_supply() == state.genesis_mint == 100
        assert state.collected_fees == 2

    def test_shielded_supply_conserved(self):
        blocks, state, owner, other = shielded_setup(10, amount=100)
        ref = owned_shielded_outputs(owner, state)[0][0]
        tx = build_shielded_spend(owner, ref, [(other.address(), 30)], 5, 3, state, b"a")
        state, _, _ = mine(blocks, state, [tx])
        assert state.total_supply() == state.genesis_mint == 1000
        assert state.collected_fees == 5


class TestChainStore:
    def test_save_load_replay_identical_digest(self, tmp_path, alice, bob):
        blocks, state = chain_with_genesis([(alice.address, 100)])
        tx = build_transparent_tx([alice], [(bob.address, 40)], 0, state)
        state, _, _ = mine(blocks, state, [tx])
        path = tmp_path / "chain.store"
        save_chain(blocks, path)
        reloaded = load_chain(path)
        assert replay(reloaded).digest() == state.digest()
        save_chain(reloaded, tmp_path / "again.store")
        assert (tmp_path / "again.store").read_bytes() == path.read_bytes()

    def test_shielded_txs_survive_the_store(self, tmp_path):
        blocks, state, owner, other = shielded_setup(6)
        ref = owned_shielded_outputs(owner, state)[0][0]
        tx = build_shielded_spend(owner, ref, [(other.address(), 25)], 0, 3, state, b"a")
        state, _, _ = mine(blocks, state, [tx])
        path = tmp_path / "chain.store"
        save_chain(blocks, path)
        assert replay(load_chain(path)).digest() == state.digest()
