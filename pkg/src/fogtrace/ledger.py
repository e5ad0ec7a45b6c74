"""Simulated UTXO blockchain with transparent and shielded transactions.

Transparent transactions are Bitcoin-style signed spends of unspent
outputs. Shielded transactions spend stealth outputs through linkable
ring signatures: the ring names a set of plausible inputs, the key image
stops double spends, and the true spender stays hidden.

Consensus is a single honest block producer; there is no proof of work
and no reorg beyond appending to the tip. Amounts are integer atomic
units and stay visible even on shielded transactions (hiding them would
need commitment arithmetic this lab deliberately leaves out).

Everything hashes over canonical JSON bytes, and the chain store is one
base64-encoded canonical block per line, so a fixed scenario seed yields
a byte-identical file.
"""

from __future__ import annotations

import base64
import json
from dataclasses import dataclass, field, replace
from hashlib import sha256
from pathlib import Path

from .address import derive_address
from .group import get_group, schnorr_sign, schnorr_verify
from .lsag import (
    LsagSignature,
    deserialize_lsag_signature,
    key_image,
    lsag_keypair_from_secret,
    lsag_sign,
    lsag_verify,
    serialize_lsag_signature,
)
from .rng import DeterministicRng
from .stealth import (
    StealthAddress,
    StealthOutputMeta,
    StealthRecipientKeys,
    derive_onetime_output,
    recover_onetime_secret,
    scan_output,
)

MAX_AMOUNT = 2**64 - 1
DEFAULT_GENESIS_SUPPLY = 10**9
GENESIS_PREV_HASH = "0" * 64
DEFAULT_BACKEND = "production-curve"


class InsufficientFunds(ValueError):
    """Wallet does not control enough unspent value."""


class NotEnoughDecoys(ValueError):
    """Fewer prior shielded outputs exist than the requested ring needs."""


class ForkMismatch(ValueError):
    """Block does not extend the current tip."""


class InvalidBlock(ValueError):
    """Block contains a transaction that fails validation."""


class NotOwner(ValueError):
    """Referenced shielded output does not belong to the given keys."""


def canonical_bytes(obj) -> bytes:
    return json.dumps(obj, sort_keys=True, separators=(",", ":")).encode()


def _hash_hex(data: bytes) -> str:
    return sha256(data).hexdigest()


# -- transaction records -------------------------------------------------------


@dataclass(frozen=True)
class TxOutput:
    address: str
    amount: int

    def to_dict(self) -> dict:
        return {"address": self.address, "amount": self.amount}

    @staticmethod
    def from_dict(d: dict) -> "TxOutput":
        return TxOutput(d["address"], d["amount"])


@dataclass(frozen=True)
class TxInput:
    txid: str
    vout: int
    public_key: str  # hex-encoded group point
    signature: str  # hex

    def ref(self) -> tuple[str, int]:
        return (self.txid, self.vout)

    def to_dict(self) -> dict:
        return {
            "txid": self.txid,
            "vout": self.vout,
            "public_key": self.public_key,
            "signature": self.signature,
        }

    @staticmethod
    def from_dict(d: dict) -> "TxInput":
        return TxInput(d["txid"], d["vout"], d["public_key"], d["signature"])


@dataclass(frozen=True)
class ShieldedOutput:
    meta: StealthOutputMeta
    amount: int

    def to_dict(self) -> dict:
        group = get_group(self.meta.backend)
        return {
            "r": group.encode_point(self.meta.tx_public).hex(),
            "p": group.encode_point(self.meta.onetime_public).hex(),
            "backend": self.meta.backend,
            "amount": self.amount,
        }

    @staticmethod
    def from_dict(d: dict) -> "ShieldedOutput":
        group = get_group(d["backend"])
        meta = StealthOutputMeta(
            backend=d["backend"],
            tx_public=group.decode_point(bytes.fromhex(d["r"])),
            onetime_public=group.decode_point(bytes.fromhex(d["p"])),
        )
        return ShieldedOutput(meta, d["amount"])


@dataclass(frozen=True)
class TransparentTx:
    inputs: tuple[TxInput, ...]
    outputs: tuple[TxOutput, ...]
    fee: int

    kind = "transparent"

    def body_dict(self) -> dict:
        # The signed skeleton: everything except signatures and keys.
        return {
            "kind": self.kind,
            "inputs": [[i.txid, i.vout] for i in self.inputs],
            "outputs": [o.to_dict() for o in self.outputs],
            "fee": self.fee,
        }

    def signing_bytes(self) -> bytes:
        return canonical_bytes(self.body_dict())

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "inputs": [i.to_dict() for i in self.inputs],
            "outputs": [o.to_dict() for o in self.outputs],
            "fee": self.fee,
        }

    @staticmethod
    def from_dict(d: dict) -> "TransparentTx":
        return TransparentTx(
            tuple(TxInput.from_dict(i) for i in d["inputs"]),
            tuple(TxOutput.from_dict(o) for o in d["outputs"]),
            d["fee"],
        )

    def txid(self) -> str:
        return _hash_hex(canonical_bytes(self.to_dict()))


@dataclass(frozen=True)
class ShieldedTx:
    ring_member_refs: tuple[int, ...]  # indices into the shielded registry
    lsag: LsagSignature
    outputs: tuple[ShieldedOutput, ...]
    fee: int

    kind = "shielded"

    def body_dict(self) -> dict:
        return {
            "kind": self.kind,
            "refs": list(self.ring_member_refs),
            "outputs": [o.to_dict() for o in self.outputs],
            "fee": self.fee,
        }

    def signing_bytes(self) -> bytes:
        return canonical_bytes(self.body_dict())

    def to_dict(self) -> dict:
        d = self.body_dict()
        d["lsag"] = serialize_lsag_signature(self.lsag).hex()
        return d

    @staticmethod
    def from_dict(d: dict) -> "ShieldedTx":
        return ShieldedTx(
            tuple(d["refs"]),
            deserialize_lsag_signature(bytes.fromhex(d["lsag"])),
            tuple(ShieldedOutput.from_dict(o) for o in d["outputs"]),
            d["fee"],
        )

    def txid(self) -> str:
        return _hash_hex(canonical_bytes(self.to_dict()))


@dataclass(frozen=True)
class MintTx:
    """Genesis-only issuance of the entire supply, transparent and shielded."""

    transparent_outputs: tuple[TxOutput, ...]
    shielded_outputs: tuple[ShieldedOutput, ...]
    backend: str

    kind = "mint"

    def total(self) -> int:
        return sum(o.amount for o in self.transparent_outputs) + sum(
            o.amount for o in self.shielded_outputs
        )

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "transparent": [o.to_dict() for o in self.transparent_outputs],
            "shielded": [o.to_dict() for o in self.shielded_outputs],
            "backend": self.backend,
        }

    @staticmethod
    def from_dict(d: dict) -> "MintTx":
        return MintTx(
            tuple(TxOutput.from_dict(o) for o in d["transparent"]),
            tuple(ShieldedOutput.from_dict(o) for o in d["shielded"]),
            d["backend"],
        )

    def txid(self) -> str:
        return _hash_hex(canonical_bytes(self.to_dict()))


def tx_from_dict(d: dict):
    kinds = {"transparent": TransparentTx, "shielded": ShieldedTx, "mint": MintTx}
    try:
        return kinds[d["kind"]].from_dict(d)
    except KeyError as exc:
        raise ValueError(f"unknown transaction kind: {d.get('kind')!r}") from exc


# -- blocks --------------------------------------------------------------------


@dataclass(frozen=True)
class Block:
    height: int
    previous_block_hash: str
    transactions: tuple

    def body_dict(self) -> dict:
        return {
            "height": self.height,
            "previous_block_hash": self.previous_block_hash,
            "transactions": [tx.to_dict() for tx in self.transactions],
        }

    @property
    def block_hash(self) -> str:
        return _hash_hex(canonical_bytes(self.body_dict()))

    def to_dict(self) -> dict:
        d = self.body_dict()
        d["block_hash"] = self.block_hash
        return d

    @staticmethod
    def from_dict(d: dict) -> "Block":
        block = Block(
            d["height"],
            d["previous_block_hash"],
            tuple(tx_from_dict(t) for t in d["transactions"]),
        )
        if d.get("block_hash") != block.block_hash:
            raise InvalidBlock("stored block hash does not recompute")
        return block


# -- chain state ---------------------------------------------------------------


@dataclass(frozen=True)
class RegistryEntry:
    """One shielded output as seen on-chain; the registry never forgets."""

    meta: StealthOutputMeta
    amount: int
    txid: str
    height: int


@dataclass
class ChainState:
    backend: str = DEFAULT_BACKEND
    utxos: dict = field(default_factory=dict)  # (txid, vout) -> TxOutput
    shielded_registry: list = field(default_factory=list)  # RegistryEntry
    key_images: set = field(default_factory=set)  # hex-encoded points
    tip_hash: str = GENESIS_PREV_HASH
    height: int = -1
    genesis_mint: int = 0
    collected_fees: int = 0
    shielded_pool: int = 0

    def copy(self) -> "ChainState":
        return ChainState(
            backend=self.backend,
            utxos=dict(self.utxos),
            shielded_registry=list(self.shielded_registry),
            key_images=set(self.key_images),
            tip_hash=self.tip_hash,
            height=self.height,
            genesis_mint=self.genesis_mint,
            collected_fees=self.collected_fees,
            shielded_pool=self.shielded_pool,
        )

    def transparent_pool(self) -> int:
        return sum(o.amount for o in self.utxos.values())

    def total_supply(self) -> int:
        return self.transparent_pool() + self.shielded_pool + self.collected_fees

    def to_dict(self) -> dict:
        return {
            "backend": self.backend,
            "utxos": [
                [txid, vout, out.address, out.amount]
                for (txid, vout), out in sorted(self.utxos.items())
            ],
            "registry": [
                ShieldedOutput(e.meta, e.amount).to_dict() | {"txid": e.txid, "height": e.height}
                for e in self.shielded_registry
            ],
            "key_images": sorted(self.key_images),
            "tip_hash": self.tip_hash,
            "height": self.height,
            "genesis_mint": self.genesis_mint,
            "collected_fees": self.collected_fees,
            "shielded_pool": self.shielded_pool,
        }

    def digest(self) -> str:
        return _hash_hex(canonical_bytes(self.to_dict()))


@dataclass(frozen=True)
class ValidationResult:
    ok: bool
    reason: str | None = None
    detail: str = ""

    def __bool__(self) -> bool:
        return self.ok


def _valid() -> ValidationResult:
    return ValidationResult(True)


def _invalid(reason: str, detail: str = "") -> ValidationResult:
    return ValidationResult(False, reason, detail)


def validate_transaction(tx, state: ChainState) -> ValidationResult:
    """Full validity check against the given state; never raises."""
    try:
        if isinstance(tx, MintTx):
            return _validate_mint(tx, state)
        if isinstance(tx, TransparentTx):
            return _validate_transparent(tx, state)
        if isinstance(tx, ShieldedTx):
            return _validate_shielded(tx, state)
    except Exception as exc:  # malformed fields land here, not in the caller
        return _invalid("Malformed", str(exc))
    return _invalid("Malformed", f"unknown transaction type {type(tx).__name__}")


def _check_amounts(amounts, fee: int) -> ValidationResult | None:
    for amount in amounts:
        if not isinstance(amount, int) or not 0 < amount <= MAX_AMOUNT:
            return _invalid("BadAmount", f"output amount {amount} out of range")
    if not isinstance(fee, int) or fee < 0:
        return _invalid("BadAmount", f"negative fee {fee}")
    return None


def _validate_mint(tx: MintTx, state: ChainState) -> ValidationResult:
    if state.height >= 0:
        return _invalid("MintOutsideGenesis", "mint allowed only in the genesis block")
    bad = _check_amounts(
        [o.amount for o in tx.transparent_outputs]
        + [o.amount for o in tx.shielded_outputs],
        0,
    )
    if bad:
        return bad
    for out in tx.shielded_outputs:
        if out.meta.backend != tx.backend:
            return _invalid("BackendMismatch", "shielded mint on a foreign backend")
    return _valid()


def _validate_transparent(tx: TransparentTx, state: ChainState) -> ValidationResult:
    if not tx.inputs:
        return _invalid("Malformed", "transparent tx needs at least one input")
    bad = _check_amounts([o.amount for o in tx.outputs], tx.fee)
    if bad:
        return bad
    seen_refs = set()
    total_in = 0
    group = get_group(state.backend)
    message = tx.signing_bytes()
    for tx_input in tx.inputs:
        ref = tx_input.ref()
        if ref in seen_refs:
            return _invalid("AlreadySpent", f"duplicate input {ref} within the tx")
        seen_refs.add(ref)
        utxo = state.utxos.get(ref)
        if utxo is None:
            return _invalid("AlreadySpent", f"input {ref} is unknown or already spent")
        public_key = bytes.fromhex(tx_input.public_key)
        if derive_address(public_key) != utxo.address:
            return _invalid("BadSignature", f"key does not own address {utxo.address}")
        try:
            point = group.decode_point(public_key)
        except ValueError as exc:
            return _invalid("BadSignature", str(exc))
        if not schnorr_verify(group, point, message, bytes.fromhex(tx_input.signature)):
            return _invalid("BadSignature", f"signature check failed for input {ref}")
        total_in += utxo.amount
    total_out = sum(o.amount for o in tx.outputs)
    if total_in != total_out + tx.fee:
        return _invalid(
            "ConservationViolated",
            f"inputs {total_in} != outputs {total_out} + fee {tx.fee}",
        )
    return _valid()


def _validate_shielded(tx: ShieldedTx, state: ChainState) -> ValidationResult:
    if not tx.ring_member_refs:
        return _invalid("Malformed", "empty ring")
    if not tx.outputs:
        return _invalid("Malformed", "shielded tx needs at least one output")
    bad = _check_amounts([o.amount for o in tx.outputs], tx.fee)
    if bad:
        return bad
    if len(set(tx.ring_member_refs)) != len(tx.ring_member_refs):
        return _invalid("BadRingRef", "duplicate ring member reference")
    entries = []
    for ref in tx.ring_member_refs:
        if not isinstance(ref, int) or not 0 <= ref < len(state.shielded_registry):
            return _invalid("BadRingRef", f"reference {ref} not in the registry")
        entries.append(state.shielded_registry[ref])
    if tx.lsag.backend != state.backend:
        return _invalid("BackendMismatch", "signature on a foreign backend")
    ring = tuple(e.meta.onetime_public for e in entries)
    if tx.lsag.ring != ring:
        return _invalid("RingMismatch", "signature ring differs from referenced outputs")
    for out in tx.outputs:
        if out.meta.backend != state.backend:
            return _invalid("BackendMismatch", "output on a foreign backend")
    image_hex = tx.lsag.key_image.encode().hex()
    if image_hex in state.key_images:
        return _invalid("KeyImageReused", "key image already seen on chain")
    total_out = sum(o.amount for o in tx.outputs) + tx.fee
    if all(e.amount != total_out for e in entries):
        # The true input must be one of the ring members; a spend whose
        # value matches none of them is provably inflationary. The check
        # cannot pinpoint the spender, only bound the total.
        return _invalid(
            "ConservationViolated",
            f"outputs + fee = {total_out} matches no ring member amount",
        )
    if not lsag_verify(tx.signing_bytes(), tx.lsag):
        return _invalid("BadSignature", "ring signature does not verify")
    return _valid()


# -- state transitions ----------------------------------------------------------


def _apply_tx(tx, state: ChainState, height: int) -> None:
    txid = tx.txid()
    if isinstance(tx, MintTx):
        for vout, out in enumerate(tx.transparent_outputs):
            state.utxos[(txid, vout)] = out
        for out in tx.shielded_outputs:
            state.shielded_registry.append(
                RegistryEntry(out.meta, out.amount, txid, height)
            )
            state.shielded_pool += out.amount
        state.genesis_mint += tx.total()
        state.backend = tx.backend
    elif isinstance(tx, TransparentTx):
        for tx_input in tx.inputs:
            del state.utxos[tx_input.ref()]
        for vout, out in enumerate(tx.outputs):
            state.utxos[(txid, vout)] = out
        state.collected_fees += tx.fee
    elif isinstance(tx, ShieldedTx):
        state.key_images.add(tx.lsag.key_image.encode().hex())
        for out in tx.outputs:
            state.shielded_registry.append(
                RegistryEntry(out.meta, out.amount, txid, height)
            )
        # The true member's amount (outputs + fee) leaves the pool and the
        # new outputs re-enter it, so the pool nets out paying only the fee.
        state.shielded_pool -= tx.fee
        state.collected_fees += tx.fee
    else:
        raise InvalidBlock(f"unknown transaction type {type(tx).__name__}")


def apply_block(block: Block, state: ChainState) -> ChainState:
    """Return the state after the block; the input state is untouched."""
    if block.previous_block_hash != state.tip_hash:
        raise ForkMismatch(
            f"block extends {block.previous_block_hash[:12]}.. "
            f"but tip is {state.tip_hash[:12]}.."
        )
    if block.height != state.height + 1:
        raise ForkMismatch(f"height {block.height} does not follow {state.height}")
    new_state = state.copy()
    for tx in block.transactions:
        verdict = validate_transaction(tx, new_state)
        if not verdict:
            raise InvalidBlock(f"{verdict.reason}: {verdict.detail}")
        _apply_tx(tx, new_state, block.height)
    new_state.tip_hash = block.block_hash
    new_state.height = block.height
    return new_state


def replay(blocks: list[Block]) -> ChainState:
    """Rebuild state from genesis; deterministic by construction."""
    state = ChainState()
    for block in blocks:
        state = apply_block(block, state)
    return state


def produce_block(mempool: list, state: ChainState) -> tuple[Block, list]:
    """Assemble the next block from the mempool in order.

    Transactions are validated sequentially against the evolving state;
    the ones that fail are reported with their reason and left out.
    """
    working = state.copy()
    height = state.height + 1
    included = []
    rejected = []
    for tx in mempool:
        verdict = validate_transaction(tx, working)
        if verdict:
            _apply_tx(tx, working, height)
            included.append(tx)
        else:
            rejected.append((tx, verdict))
    block = Block(height, state.tip_hash, tuple(included))
    return block, rejected


# -- wallet-side builders --------------------------------------------------------


@dataclass(frozen=True)
class TransparentKey:
    """One spend key of a transparent wallet."""

    backend: str
    secret: int
    public: object

    @property
    def public_bytes(self) -> bytes:
        return get_group(self.backend).encode_point(self.public)

    @property
    def address(self) -> str:
        return derive_address(self.public_bytes)


def transparent_keygen(backend: str, rng_seed: bytes | str | int) -> TransparentKey:
    group = get_group(backend)
    rng = DeterministicRng(rng_seed)
    secret = 0
    while secret == 0:
        secret = rng.randbelow(group.order)
    return TransparentKey(backend, secret, group.mul_gen(secret))


def balance(address: str, state: ChainState) -> int:
    return sum(o.amount for o in state.utxos.values() if o.address == address)


def build_transparent_tx(
    keys: list[TransparentKey],
    recipients: list[tuple[str, int]],
    fee: int,
    state: ChainState,
    change_address: str | None = None,
) -> TransparentTx:
    """Spend wallet UTXOs to cover the recipients plus fee, change to self."""
    if fee < 0:
        raise ValueError("fee must be non-negative")
    for _, amount in recipients:
        if amount <= 0:
            raise ValueError("recipient amounts must be positive")
    by_address = {k.address: k for k in keys}
    needed = sum(amount for _, amount in recipients) + fee
    picked = []
    total = 0
    for ref, out in state.utxos.items():
        if out.address in by_address:
            picked.append((ref, out))
            total += out.amount
            if total >= needed:
                break
    if total < needed:
        raise InsufficientFunds(f"need {needed}, control {balance_of_keys(keys, state)}")

    outputs = [TxOutput(addr, amount) for addr, amount in recipients]
    change = total - needed
    if change > 0:
        outputs.append(TxOutput(change_address or keys[0].address, change))

    skeleton = TransparentTx(
        tuple(
            TxInput(ref[0], ref[1], by_address[out.address].public_bytes.hex(), "")
            for ref, out in picked
        ),
        tuple(outputs),
        fee,
    )
    message = skeleton.signing_bytes()
    group = get_group(state.backend)
    signed_inputs = tuple(
        replace(
            tx_input,
            signature=schnorr_sign(
                group, by_address[out.address].secret, message
            ).hex(),
        )
        for tx_input, (_, out) in zip(skeleton.inputs, picked)
    )
    return TransparentTx(signed_inputs, skeleton.outputs, fee)


def balance_of_keys(keys: list[TransparentKey], state: ChainState) -> int:
    owned = {k.address for k in keys}
    return sum(o.amount for o in state.utxos.values() if o.address in owned)


def owned_shielded_outputs(
    keys: StealthRecipientKeys, state: ChainState
) -> list[tuple[int, RegistryEntry, int]]:
    """Scan the registry; return (ref, entry, onetime_secret) for unspent
    outputs belonging to these keys. Spent-ness is detected the way a real
    wallet does it: the output's own key image already appears on chain."""
    found = []
    for ref, entry in enumerate(state.shielded_registry):
        if not scan_output(entry.meta, keys):
            continue
        secret = recover_onetime_secret(entry.meta, keys)
        kp = lsag_keypair_from_secret(get_group(state.backend), secret)
        if key_image(kp).encode().hex() in state.key_images:
            continue
        found.append((ref, entry, secret))
    return found


def shielded_balance(keys: StealthRecipientKeys, state: ChainState) -> int:
    return sum(entry.amount for _, entry, _ in owned_shielded_outputs(keys, state))


def build_shielded_spend(
    owner_keys: StealthRecipientKeys,
    ref: int,
    recipients: list[tuple[StealthAddress, int]],
    fee: int,
    decoy_count: int,
    state: ChainState,
    rng_seed: bytes | str | int,
) -> ShieldedTx:
    """Spend one owned shielded output behind a ring of decoys.

    The ring is the owned output plus ``decoy_count`` distinct others
    drawn uniformly from the whole registry, in randomised order. Change
    returns to a fresh stealth output of the spender.
    """
    if not 0 <= ref < len(state.shielded_registry):
        raise ValueError(f"no shielded output at reference {ref}")
    entry = state.shielded_registry[ref]
    if not scan_output(entry.meta, owner_keys):
        raise NotOwner(f"output {ref} was not derived for these keys")
    onetime_secret = recover_onetime_secret(entry.meta, owner_keys)
    group = get_group(state.backend)
    kp = lsag_keypair_from_secret(group, onetime_secret)
    if key_image(kp).encode().hex() in state.key_images:
        raise InsufficientFunds(f"output {ref} is already spent")

    needed = sum(amount for _, amount in recipients) + fee
    if needed > entry.amount:
        raise InsufficientFunds(f"output holds {entry.amount}, need {needed}")

    candidates = [i for i in range(len(state.shielded_registry)) if i != ref]
    if len(candidates) < decoy_count:
        raise NotEnoughDecoys(
            f"{decoy_count} decoys requested, only {len(candidates)} outputs available"
        )
    rng = DeterministicRng(rng_seed)
    ring_refs = rng.sample(candidates, decoy_count) + [ref]
    rng.shuffle(ring_refs)
    signer_index = ring_refs.index(ref)

    outputs = []
    for recipient, amount in recipients:
        meta = derive_onetime_output(recipient, rng.take_bytes(32))
        outputs.append(ShieldedOutput(meta, amount))
    change = entry.amount - needed
    if change > 0:
        meta = derive_onetime_output(owner_keys.address(), rng.take_bytes(32))
        outputs.append(ShieldedOutput(meta, change))

    skeleton = ShieldedTx(tuple(ring_refs), None, tuple(outputs), fee)
    ring = [state.shielded_registry[i].meta.onetime_public for i in ring_refs]
    signature = lsag_sign(
        skeleton.signing_bytes(), ring, signer_index, kp, rng.take_bytes(32)
    )
    return ShieldedTx(tuple(ring_refs), signature, tuple(outputs), fee)


def make_genesis(
    transparent_grants: list[tuple[str, int]],
    shielded_grants: list[tuple[StealthOutputMeta, int]] | None = None,
    backend: str = DEFAULT_BACKEND,
) -> Block:
    mint = MintTx(
        tuple(TxOutput(addr, amount) for addr, amount in transparent_grants),
        tuple(ShieldedOutput(meta, amount) for meta, amount in (shielded_grants or [])),
        backend,
    )
    return Block(0, GENESIS_PREV_HASH, (mint,))


# -- chain store -----------------------------------------------------------------


def save_chain(blocks: list[Block], path: str | Path) -> None:
    lines = [
        base64.b64encode(canonical_bytes(block.to_dict())).decode() for block in blocks
    ]
    Path(path).write_text("\n".join(lines) + ("\n" if lines else ""))


def load_chain(path: str | Path) -> list[Block]:
    blocks = []
    for line in Path(path).read_text().splitlines():
        if not line.strip():
            continue
        blocks.append(Block.from_dict(json.loads(base64.b64decode(line))))
    return blocks
