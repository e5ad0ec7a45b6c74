"""Linkable ring signatures with key images.

Hides which ring member signed while exposing a per-key tag (the key
image) that repeats if the same key ever signs twice. The ledger uses
the tag to reject double spends without learning the spender.
"""

from __future__ import annotations

from dataclasses import dataclass

from .group import BackendMismatch, GroupSpec, get_group, hash_point_of
from .rng import DeterministicRng


class IndexOutOfRange(IndexError):
    """Signer index outside the ring."""


class KeyMismatch(ValueError):
    """Signer's public key is not the ring entry at the claimed index."""


class MalformedSignature(ValueError):
    """Structurally invalid signature record."""


@dataclass(frozen=True)
class LsagKeyPair:
    backend: str
    secret: int
    public: object

    def group(self) -> GroupSpec:
        return get_group(self.backend)


@dataclass(frozen=True)
class KeyImage:
    backend: str
    point: object

    def encode(self) -> bytes:
        return get_group(self.backend).encode_point(self.point)


@dataclass(frozen=True)
class LsagSignature:
    """No signer index exists in this record; verification never needs one."""

    backend: str
    ring: tuple
    c0: int
    responses: tuple
    key_image: KeyImage


def lsag_keygen(spec: GroupSpec, rng_seed: bytes | str | int) -> LsagKeyPair:
    rng = DeterministicRng(rng_seed)
    secret = 0
    while secret == 0:
        secret = rng.randbelow(spec.order)
    return LsagKeyPair(spec.tag, secret, spec.mul_gen(secret))


def lsag_keypair_from_secret(spec: GroupSpec, secret: int) -> LsagKeyPair:
    secret %= spec.order
    if secret == 0:
        raise ValueError("zero secret")
    return LsagKeyPair(spec.tag, secret, spec.mul_gen(secret))


def key_image(kp: LsagKeyPair) -> KeyImage:
    """Deterministic linkability tag: secret * hash_to_point(public)."""
    group = kp.group()
    return KeyImage(kp.backend, group.mul(kp.secret, hash_point_of(group, kp.public)))


def _challenge(group: GroupSpec, message: bytes, left, right) -> int:
    return group.hash_to_scalar(
        message, group.encode_point(left), group.encode_point(right)
    )


def lsag_sign(
    message: bytes,
    ring: list,
    signer_index: int,
    kp: LsagKeyPair,
    rng_seed: bytes | str | int,
) -> LsagSignature:
    """Close a challenge chain around the ring through the signer's slot."""
    if not ring:
        raise ValueError("ring must contain at least one key")
    if not 0 <= signer_index < len(ring):
        raise IndexOutOfRange(f"signer index {signer_index} for ring of {len(ring)}")
    if ring[signer_index] != kp.public:
        raise KeyMismatch("signer's public key is not at the claimed ring position")

    group = kp.group()
    n = len(ring)
    s = signer_index
    image = key_image(kp)
    rng = DeterministicRng(rng_seed)

    alpha = 0
    while alpha == 0:
        alpha = rng.randbelow(group.order)

    challenges = [0] * n
    responses = [0] * n
    hp_signer = hash_point_of(group, ring[s])
    challenges[(s + 1) % n] = _challenge(
        group, message, group.mul_gen(alpha), group.mul(alpha, hp_signer)
    )
    for step in range(1, n):
        i = (s + step) % n
        responses[i] = rng.randbelow(group.order)
        hp = hash_point_of(group, ring[i])
        left = group.add(group.mul_gen(responses[i]), group.mul(challenges[i], ring[i]))
        right = group.add(
            group.mul(responses[i], hp), group.mul(challenges[i], image.point)
        )
        challenges[(i + 1) % n] = _challenge(group, message, left, right)
    responses[s] = (alpha - challenges[s] * kp.secret) % group.order

    return LsagSignature(
        backend=kp.backend,
        ring=tuple(ring),
        c0=challenges[0],
        responses=tuple(responses),
        key_image=image,
    )


def lsag_verify(message: bytes, sig: LsagSignature) -> bool:
    """Accept iff the challenge chain closes back onto c0."""
    group = get_group(sig.backend)
    _check_structure(group, sig)
    c = sig.c0
    for public, response in zip(sig.ring, sig.responses):
        hp = hash_point_of(group, public)
        left = group.add(group.mul_gen(response), group.mul(c, public))
        right = group.add(group.mul(response, hp), group.mul(c, sig.key_image.point))
        c = _challenge(group, message, left, right)
    return c == sig.c0


def _check_structure(group: GroupSpec, sig: LsagSignature) -> None:
    if len(sig.ring) < 1:
        raise MalformedSignature("empty ring")
    if len(sig.responses) != len(sig.ring):
        raise MalformedSignature("one response required per ring member")
    if not 0 <= sig.c0 < group.order:
        raise MalformedSignature("challenge out of scalar range")
    if any(not 0 <= r < group.order for r in sig.responses):
        raise MalformedSignature("response out of scalar range")
    if sig.key_image.backend != sig.backend:
        raise MalformedSignature("key image from a different backend")
    if group.is_identity(sig.key_image.point):
        raise MalformedSignature("identity key image")
    if any(group.is_identity(p) for p in sig.ring):
        raise MalformedSignature("identity point in ring")


def is_linked(a: KeyImage, b: KeyImage) -> bool:
    """True when two signatures were produced by the same key."""
    if a.backend != b.backend:
        raise BackendMismatch(f"cannot compare {a.backend} with {b.backend}")
    return a.point == b.point


# -- canonical wire format ----------------------------------------------------
# backend tag byte | ring length (2B BE) | ring points length-prefixed
# | c0 fixed-width | responses fixed-width | key image length-prefixed

_TAG_BYTES = {"toy-schnorr": 1, "production-curve": 2}
_TAG_NAMES = {v: k for k, v in _TAG_BYTES.items()}


def _lp(data: bytes) -> bytes:
    return len(data).to_bytes(2, "big") + data


def serialize_lsag_signature(sig: LsagSignature) -> bytes:
    group = get_group(sig.backend)
    out = [bytes([_TAG_BYTES[sig.backend]]), len(sig.ring).to_bytes(2, "big")]
    for point in sig.ring:
        out.append(_lp(group.encode_point(point)))
    out.append(group.scalar_bytes(sig.c0))
    for response in sig.responses:
        out.append(group.scalar_bytes(response))
    out.append(_lp(sig.key_image.encode()))
    return b"".join(out)


def deserialize_lsag_signature(data: bytes) -> LsagSignature:
    view = memoryview(data)

    def take(n: int) -> bytes:
        nonlocal view
        if len(view) < n:
            raise MalformedSignature("truncated signature")
        chunk, view = bytes(view[:n]), view[n:]
        return chunk

    def take_lp() -> bytes:
        return take(int.from_bytes(take(2), "big"))

    tag = take(1)[0]
    if tag not in _TAG_NAMES:
        raise MalformedSignature(f"unknown backend tag {tag}")
    group = get_group(_TAG_NAMES[tag])
    count = int.from_bytes(take(2), "big")
    if count < 1:
        raise MalformedSignature("empty ring")
    try:
        ring = tuple(group.decode_point(take_lp()) for _ in range(count))
        width = (group.order.bit_length() + 7) // 8
        c0 = int.from_bytes(take(width), "big")
        responses = tuple(int.from_bytes(take(width), "big") for _ in range(count))
        image_point = group.decode_point(take_lp())
    except ValueError as exc:
        raise MalformedSignature(str(exc)) from exc
    if len(view):
        raise MalformedSignature("trailing bytes after signature")
    sig = LsagSignature(
        backend=_TAG_NAMES[tag],
        ring=ring,
        c0=c0,
        responses=responses,
        key_image=KeyImage(_TAG_NAMES[tag], image_point),
    )
    _check_structure(group, sig)
    return sig
