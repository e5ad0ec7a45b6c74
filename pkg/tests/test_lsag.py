"""Linkable ring signature tests.

The toy backend makes discrete logs searchable, so a brute-force
verifier that works purely in exponent arithmetic cross-checks the
group-operation implementation.
"""

import pytest

from fogtrace.group import BackendMismatch, get_group, hash_point_of
from fogtrace.lsag import (
    KeyMismatch,
    LsagSignature,
    MalformedSignature,
    deserialize_lsag_signature,
    is_linked,
    key_image,
    lsag_keygen,
    lsag_keypair_from_secret,
    lsag_sign,
    lsag_verify,
    serialize_lsag_signature,
)
from fogtrace.rng import DeterministicRng

toy = get_group("toy-schnorr")
curve = get_group("production-curve")


def bruteforce_verify(message: bytes, sig: LsagSignature) -> bool:
    """Independent verifier: every point is reduced to its exponent by
    exhaustive discrete log, and the challenge chain is recomputed with
    plain modular exponentiation."""
    assert sig.backend == "toy-schnorr"
    g, p, q = toy.generator, toy.p, toy.order
    try:
        image_log = toy.discrete_log(sig.key_image.point)
        ring_logs = [toy.discrete_log(point) for point in sig.ring]
    except ValueError:
        return False
    c = sig.c0
    for public, x_log, response in zip(sig.ring, ring_logs, sig.responses):
        hp = hash_point_of(toy, public)
        hp_log = toy.discrete_log(hp)
        left = pow(g, (response + c * x_log) % q, p)
        right = pow(g, (response * hp_log + c * image_log) % q, p)
        c = toy.hash_to_scalar(message, toy.encode_point(left), toy.encode_point(right))
    return c == sig.c0


@pytest.fixture(scope="module", params=[toy, curve], ids=lambda g: g.tag)
def backend(request):
    return request.param


class TestKeygen:
    def test_public_matches_secret(self, backend):
        kp = lsag_keygen(backend, b"\x01")
        assert kp.secret != 0
        assert kp.public == backend.mul_gen(kp.secret)

    def test_deterministic(self, backend):
        assert lsag_keygen(backend, b"s") == lsag_keygen(backend, b"s")

    def test_distinct_seeds_distinct_secrets_in_toy_group(self):
        # Exhaustive: recover both secrets by discrete log and compare.
        # Frozen seeds: in a group of order 11 seed collisions do occur,
        # so the regression pair is one known to differ.
        a = lsag_keygen(toy, b"\x01")
        b = lsag_keygen(toy, b"\x03")
        assert toy.discrete_log(a.public) != toy.discrete_log(b.public)

    def test_zero_secret_rejected(self):
        with pytest.raises(ValueError):
            lsag_keypair_from_secret(toy, 0)


class TestKeyImage:
    def test_deterministic(self, backend):
        kp = lsag_keygen(backend, b"ki")
        assert key_image(kp) == key_image(kp)

    def test_all_toy_secrets_give_distinct_images(self):
        images = {key_image(lsag_keypair_from_secret(toy, s)).point for s in range(1, 11)}
        assert len(images) == 10

    def test_image_ignores_message_and_ring(self, backend):
        kps = [lsag_keygen(backend, bytes([i])) for i in range(1, 4)]
        ring_a = [k.public for k in kps]
        ring_b = list(reversed(ring_a))
        sig_a = lsag_sign(b"first", ring_a, 0, kps[0], b"na")
        sig_b = lsag_sign(b"second", ring_b, 2, kps[0], b"nb")
        assert is_linked(sig_a.key_image, sig_b.key_image)


class TestSignVerify:
    def test_roundtrip(self, backend):
        kps = [lsag_keygen(backend, bytes([i])) for i in range(1, 5)]
        ring = [k.public for k in kps]
        sig = lsag_sign(b"spend", ring, 1, kps[1], b"n")
        assert lsag_verify(b"spend", sig)

    def test_single_member_ring(self, backend):
        kp = lsag_keygen(backend, b"solo")
        sig = lsag_sign(b"m", [kp.public], 0, kp, b"n")
        assert lsag_verify(b"m", sig)

    def test_message_tamper_rejected(self, backend):
        kps = [lsag_keygen(backend, bytes([i])) for i in range(1, 5)]
        ring = [k.public for k in kps]
        sig = lsag_sign(b"spend", ring, 2, kps[2], b"n")
        assert not lsag_verify(b"spenD", sig)

    def test_altered_key_image_rejected(self, backend):
        kps = [lsag_keygen(backend, bytes([i])) for i in range(1, 5)]
        ring = [k.public for k in kps]
        sig = lsag_sign(b"spend", ring, 2, kps[2], b"n")
        wrong = key_image(lsag_keygen(backend, b"other"))
        forged = LsagSignature(sig.backend, sig.ring, sig.c0, sig.responses, wrong)
        assert not lsag_verify(b"spend", forged)

    def test_key_mismatch(self, backend):
        kps = [lsag_keypair_from_secret(backend, s) for s in (3, 5)]
        with pytest.raises(KeyMismatch):
            lsag_sign(b"m", [k.public for k in kps], 0, kps[1], b"n")

    def test_length_mismatch_is_malformed(self, backend):
        kps = [lsag_keygen(backend, bytes([i])) for i in range(1, 4)]
        ring = [k.public for k in kps]
        sig = lsag_sign(b"m", ring, 0, kps[0], b"n")
        bad = LsagSignature(sig.backend, sig.ring, sig.c0, sig.responses[:-1], sig.key_image)
        with pytest.raises(MalformedSignature):
            lsag_verify(b"m", bad)


class TestLinkability:
    def test_double_spend_detection(self, backend):
        kps = [lsag_keygen(backend, bytes([i])) for i in range(1, 5)]
        ring = [k.public for k in kps]
        first = lsag_sign(b"tx-one", ring, 3, kps[3], b"n1")
        second = lsag_sign(b"tx-two", ring, 3, kps[3], b"n2")
        assert is_linked(first.key_image, second.key_image)

    def test_distinct_keys_not_linked(self, backend):
        a = key_image(lsag_keygen(backend, b"a"))
        b = key_image(lsag_keygen(backend, b"b"))
        assert not is_linked(a, b)

    def test_reflexive(self, backend):
        image = key_image(lsag_keygen(backend, b"a"))
        assert is_linked(image, image)

    def test_backend_mismatch(self):
        a = key_image(lsag_keygen(toy, b"a"))
        b = key_image(lsag_keygen(curve, b"a"))
        with pytest.raises(BackendMismatch):
            is_linked(a, b)


class TestBruteForceOracle:
    def test_valid_signatures_accepted_by_oracle(self):
        kps = [lsag_keygen(toy, bytes([i])) for i in range(1, 5)]
        ring = [k.public for k in kps]
        for signer in range(4):
            sig = lsag_sign(b"oracle", ring, signer, kps[signer], bytes([signer]))
            assert bruteforce_verify(b"oracle", sig)
            assert lsag_verify(b"oracle", sig)

    def test_verdicts_match_on_100_fixed_seed_cases(self):
        rng = DeterministicRng(b"equivalence")
        agreements = 0
        for case in range(100):
            size = 1 + rng.randbelow(4)
            kps = [lsag_keygen(toy, b"case%d-%d" % (case, i)) for i in range(size)]
            ring = [k.public for k in kps]
            signer = rng.randbelow(size)
            message = b"m%d" % case
            sig = lsag_sign(message, ring, signer, kps[signer], b"n%d" % case)
            if rng.randbelow(2):
                # tamper with one response
                responses = list(sig.responses)
                idx = rng.randbelow(size)
                responses[idx] = (responses[idx] + 1 + rng.randbelow(toy.order - 1)) % toy.order
                sig = LsagSignature(sig.backend, sig.ring, sig.c0, tuple(responses), sig.key_image)
            assert lsag_verify(message, sig) == bruteforce_verify(message, sig)
            agreements += 1
        assert agreements == 100

    def test_only_consistent_vectors_verify(self):
        # Exhaust the full (c0, response) space of a 1-ring; acceptance
        # should be rare (about 1/q) and include the honest signature.
        kp = lsag_keypair_from_secret(toy, 4)
        honest = lsag_sign(b"exh", [kp.public], 0, kp, b"n")
        accepted = []
        for c0 in range(toy.order):
            for response in range(toy.order):
                candidate = LsagSignature(
                    "toy-schnorr", (kp.public,), c0, (response,), honest.key_image
                )
                if lsag_verify(b"exh", candidate):
                    accepted.append((c0, response))
        assert (honest.c0, honest.responses[0]) in accepted
        assert len(accepted) <= 2 * toy.order


class TestSerialization:
    def test_roundtrip(self, backend):
        kps = [lsag_keygen(backend, bytes([i])) for i in range(1, 4)]
        ring = [k.public for k in kps]
        sig = lsag_sign(b"wire", ring, 1, kps[1], b"n")
        blob = serialize_lsag_signature(sig)
        back = deserialize_lsag_signature(blob)
        assert back == sig
        assert lsag_verify(b"wire", back)

    def test_truncation_rejected(self, backend):
        kps = [lsag_keygen(backend, bytes([i])) for i in range(1, 4)]
        ring = [k.public for k in kps]
        sig = lsag_sign(b"wire", ring, 1, kps[1], b"n")
        with pytest.raises(MalformedSignature):
            deserialize_lsag_signature(serialize_lsag_signature(sig)[:-2])

    def test_no_signer_index_field(self):
        fields = set(LsagSignature.__dataclass_fields__)
        assert fields == {"backend", "ring", "c0", "responses", "key_image"}
