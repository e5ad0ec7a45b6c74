"""Ring signatures over an RSA-style trapdoor permutation.

One group member signs so that verification only proves *some* member of
the declared key set signed. The construction: hash the message into a
symmetric key, push a chain of encrypt-and-XOR steps around the ring,
and use the signer's trapdoor to solve the one gap that closes the chain
back onto the random glue value.

All bit-string values are handled as Python ints; the canonical wire
format (``serialize_ring_signature``) pins down the byte layout.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field

from .rng import DeterministicRng

FEISTEL_ROUNDS = 4
DOMAIN_MARGIN_BITS = 16  # ring domain is max key width plus this margin
MIN_KEY_BITS = 16


class BitsTooSmall(ValueError):
    """Requested key size below the supported minimum."""


class DomainTooSmall(ValueError):
    """2**b does not cover the modulus, so the extension rule is undefined."""


class OddDomain(ValueError):
    """Feistel halves need an even bit width."""


class IndexOutOfRange(IndexError):
    """Signer index outside the ring."""


class KeyMismatch(ValueError):
    """Signer's public key is not the ring entry at the claimed index."""


class MalformedSignature(ValueError):
    """Structurally invalid signature record."""


class InvalidKeyPair(ValueError):
    """Keypair fails its arithmetic self-checks."""


@dataclass(frozen=True)
class RingPublicKey:
    modulus: int
    public_exponent: int

    def __post_init__(self):
        if self.modulus <= 1:
            raise InvalidKeyPair("modulus must exceed 1")
        if self.public_exponent <= 1:
            raise InvalidKeyPair("public exponent must exceed 1")


@dataclass(frozen=True)
class TrapdoorKeyPair:
    """RSA-style trapdoor permutation keypair.

    ``primes`` is retained at generation time purely so the product and
    totient invariants stay checkable; it never leaves the process.
    """

    modulus: int
    public_exponent: int
    secret_exponent: int
    key_bits: int
    primes: tuple[int, int] | None = field(default=None, repr=False, compare=False)

    def public_key(self) -> RingPublicKey:
        return RingPublicKey(self.modulus, self.public_exponent)


# Fixed witness set keeps primality testing deterministic; the first
# twelve bases are a proven deterministic test below 3.3e24.
_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71)


def is_probable_prime(n: int) -> bool:
    """Miller-Rabin against a fixed witness set."""
    if n < 2:
        return False
    for p in _MR_BASES:
        if n == p:
            return True
        if n % p == 0:
            return False
    d = n - 1
    r = 0
    while d % 2 == 0:
        d //= 2
        r += 1
    for a in _MR_BASES:
        x = pow(a, d, n)
        if x == 1 or x == n - 1:
            continue
        for _ in range(r - 1):
            x = (x * x) % n
            if x == n - 1:
                break
        else:
            return False
    return True


def _random_prime(bits: int, rng: DeterministicRng) -> int:
    # Top two bits set so the product of two such primes has exactly 2*bits bits.
    while True:
        candidate = (1 << (bits - 1)) | (1 << (bits - 2)) | rng.randbits(bits - 2) | 1
        if is_probable_prime(candidate):
            return candidate


def trapdoor_keygen(bits: int, rng_seed: bytes | str | int) -> TrapdoorKeyPair:
    """Generate a keypair with a modulus of exactly ``bits`` bits.

    Deterministic for a fixed seed.
    """
    if bits < MIN_KEY_BITS:
        raise BitsTooSmall(f"bits must be at least {MIN_KEY_BITS}, got {bits}")
    if bits % 2 != 0:
        raise ValueError("bits must be even")
    rng = DeterministicRng(rng_seed)
    half = bits // 2
    while True:
        p = _random_prime(half, rng)
        q = _random_prime(half, rng)
        if p == q:
            continue
        n = p * q
        phi = (p - 1) * (q - 1)
        e = _pick_public_exponent(phi)
        if e is None:
            continue
        d = pow(e, -1, phi)
        if n.bit_length() != bits:
            continue
        return TrapdoorKeyPair(n, e, d, bits, primes=(p, q))


def _pick_public_exponent(phi: int) -> int | None:
    for e in (65537, 257, 17, 5, 3):
        if e < phi and math.gcd(e, phi) == 1:
            return e
    for e in range(3, phi, 2):
        if math.gcd(e, phi) == 1:
            return e
    return None


def validate_keypair(kp: TrapdoorKeyPair) -> None:
    """Raise InvalidKeyPair unless the keypair's invariants hold.

    With retained primes the check is exact (product, distinctness,
    primality, e*d = 1 mod phi); without them the trapdoor roundtrip is
    sampled across the modulus.
    """
    n, e, d = kp.modulus, kp.public_exponent, kp.secret_exponent
    if kp.primes is not None:
        p, q = kp.primes
        if p * q != n:
            raise InvalidKeyPair("retained primes do not multiply to the modulus")
        if p == q:
            raise InvalidKeyPair("primes must be distinct")
        if p % 2 == 0 or q % 2 == 0:
            raise InvalidKeyPair("primes must be odd")
        if not (is_probable_prime(p) and is_probable_prime(q)):
            raise InvalidKeyPair("retained factor is not prime")
        phi = (p - 1) * (q - 1)
        if (e * d) % phi != 1:
            raise InvalidKeyPair("e*d is not 1 modulo phi(n)")
    for m in _roundtrip_samples(n):
        if pow(pow(m, e, n), d, n) != m:
            raise InvalidKeyPair(f"trapdoor roundtrip failed for m={m}")


def _roundtrip_samples(n: int):
    if n <= 64:
        return range(n)
    fixed = [2, 3, 5, 0, 1, n - 1, n // 2]
    rng = DeterministicRng(n)
    return fixed + [rng.randbelow(n) for _ in range(16)]


def extended_apply(pk: RingPublicKey, m: int, b: int) -> int:
    """Trapdoor permutation extended to a bijection on [0, 2**b).

    Values are split into quotient/remainder blocks of the modulus; any
    block that fits wholly below 2**b is permuted, the ragged top block
    is passed through unchanged.
    """
    n = pk.modulus
    if (1 << b) <= n:
        raise DomainTooSmall(f"2**{b} does not exceed modulus ({n.bit_length()} bits)")
    if not 0 <= m < (1 << b):
        raise ValueError("value outside the b-bit domain")
    q, r = divmod(m, n)
    if (q + 1) * n <= (1 << b):
        return q * n + pow(r, pk.public_exponent, n)
    return m


def extended_invert(kp: TrapdoorKeyPair, y: int, b: int) -> int:
    """Inverse of extended_apply, using the secret exponent."""
    n = kp.modulus
    if (1 << b) <= n:
        raise DomainTooSmall(f"2**{b} does not exceed modulus ({n.bit_length()} bits)")
    if not 0 <= y < (1 << b):
        raise ValueError("value outside the b-bit domain")
    q, r = divmod(y, n)
    if (q + 1) * n <= (1 << b):
        return q * n + pow(r, kp.secret_exponent, n)
    return y


def _round_output(key: bytes, round_index: int, right: int, half_bits: int) -> int:
    # SHA-256 in counter mode, truncated to half_bits, so any half width works.
    nbytes = (half_bits + 7) // 8
    right_bytes = right.to_bytes(nbytes, "big")
    stream = b""
    counter = 0
    while len(stream) < nbytes:
        stream += hashlib.sha256(
            key + bytes([round_index]) + counter.to_bytes(2, "big") + right_bytes
        ).digest()
        counter += 1
    return int.from_bytes(stream[:nbytes], "big") >> (8 * nbytes - half_bits)


def _check_prp_args(key: bytes, value: int, b: int) -> None:
    if b <= 0 or b % 2 != 0:
        raise OddDomain(f"domain width must be positive and even, got {b}")
    if not key:
        raise ValueError("empty symmetric key")
    if not 0 <= value < (1 << b):
        raise ValueError("block outside the b-bit domain")


def prp_encrypt(key: bytes, block: int, b: int) -> int:
    """Keyed bijection on [0, 2**b): a 4-round balanced Feistel network."""
    _check_prp_args(key, block, b)
    half = b // 2
    mask = (1 << half) - 1
    left, right = block >> half, block & mask
    for rnd in range(FEISTEL_ROUNDS):
        left, right = right, left ^ _round_output(key, rnd, right, half)
    return (left << half) | right


def prp_decrypt(key: bytes, block: int, b: int) -> int:
    """Exact inverse of prp_encrypt."""
    _check_prp_args(key, block, b)
    half = b // 2
    mask = (1 << half) - 1
    left, right = block >> half, block & mask
    for rnd in reversed(range(FEISTEL_ROUNDS)):
        left, right = right ^ _round_output(key, rnd, left, half), left
    return (left << half) | right


def message_key(message: bytes) -> bytes:
    """Symmetric ring key derived from the message."""
    return hashlib.sha256(message).digest()


def ring_equation(key: bytes, glue: int, ys: list[int], b: int) -> int:
    """Fold the chain c_i = E_k(c_{i-1} XOR y_i) starting from the glue.

    A valid signature makes the result return to the glue value.
    """
    c = glue
    for y in ys:
        c = prp_encrypt(key, c ^ y, b)
    return c


@dataclass(frozen=True)
class RingSignature:
    """Signature record; deliberately carries nothing that names the signer."""

    ring: tuple[RingPublicKey, ...]
    glue: int
    x_values: tuple[int, ...]
    domain_bits: int

    def __post_init__(self):
        if len(self.ring) < 1:
            raise MalformedSignature("empty ring")
        if len(self.x_values) != len(self.ring):
            raise MalformedSignature("one x value required per ring member")
        limit = 1 << self.domain_bits
        if not 0 <= self.glue < limit:
            raise MalformedSignature("glue outside the signature domain")
        if any(not 0 <= x < limit for x in self.x_values):
            raise MalformedSignature("x value outside the signature domain")
        widest = max(pk.modulus.bit_length() for pk in self.ring)
        if self.domain_bits < widest + DOMAIN_MARGIN_BITS:
            raise MalformedSignature(
                f"domain must be at least {widest + DOMAIN_MARGIN_BITS} bits"
            )


def ring_domain_bits(ring) -> int:
    return max(pk.modulus.bit_length() for pk in ring) + DOMAIN_MARGIN_BITS


def ring_sign(
    message: bytes,
    ring: list[RingPublicKey],
    signer_index: int,
    signer_secret: TrapdoorKeyPair,
    rng_seed: bytes | str | int,
) -> RingSignature:
    """Sign on behalf of the ring, revealing only membership.

    Non-signer x values are random; their images walk the chain forward
    from the glue and backward from it, meeting at the signer's slot.
    The gap value is then pulled back through the signer's trapdoor.
    """
    if not ring:
        raise ValueError("ring must contain at least one key")
    if not 0 <= signer_index < len(ring):
        raise IndexOutOfRange(f"signer index {signer_index} for ring of {len(ring)}")
    if signer_secret.public_key() != ring[signer_index]:
        raise KeyMismatch("signer's public key is not at the claimed ring position")

    b = ring_domain_bits(ring)
    key = message_key(message)
    rng = DeterministicRng(rng_seed)
    n = len(ring)
    s = signer_index

    glue = rng.randbits(b)
    xs: list[int | None] = [None] * n
    ys: list[int | None] = [None] * n
    for i in range(n):
        if i == s:
            continue
        xs[i] = rng.randbits(b)
        ys[i] = extended_apply(ring[i], xs[i], b)

    # Chain values c_0..c_n with c_0 = c_n = glue; solve the signer's slot.
    c_before = glue
    for i in range(s):
        c_before = prp_encrypt(key, c_before ^ ys[i], b)
    c_after = glue
    for i in range(n - 1, s, -1):
        c_after = prp_decrypt(key, c_after, b) ^ ys[i]
    ys[s] = prp_decrypt(key, c_after, b) ^ c_before
    xs[s] = extended_invert(signer_secret, ys[s], b)

    return RingSignature(
        ring=tuple(ring), glue=glue, x_values=tuple(xs), domain_bits=b
    )


def ring_verify(message: bytes, sig: RingSignature) -> bool:
    """Recompute the ring; accept only if it closes on the glue value."""
    key = message_key(message)
    b = sig.domain_bits
    try:
        ys = [extended_apply(pk, x, b) for pk, x in zip(sig.ring, sig.x_values)]
    except (DomainTooSmall, ValueError) as exc:
        raise MalformedSignature(str(exc)) from exc
    return ring_equation(key, sig.glue, ys, b) == sig.glue


# -- canonical wire format ----------------------------------------------------
#
# domain_bits (2B BE) | ring length (2B BE)
# per key: modulus, exponent as 2B-length-prefixed big-endian byte strings
# glue, then each x value, as fixed-width ceil(b/8)-byte strings


def _lp(value: int) -> bytes:
    raw = value.to_bytes((value.bit_length() + 7) // 8 or 1, "big")
    return len(raw).to_bytes(2, "big") + raw


def serialize_ring_signature(sig: RingSignature) -> bytes:
    width = (sig.domain_bits + 7) // 8
    out = [sig.domain_bits.to_bytes(2, "big"), len(sig.ring).to_bytes(2, "big")]
    for pk in sig.ring:
        out.append(_lp(pk.modulus))
        out.append(_lp(pk.public_exponent))
    out.append(sig.glue.to_bytes(width, "big"))
    for x in sig.x_values:
        out.append(x.to_bytes(width, "big"))
    return b"".join(out)


def deserialize_ring_signature(data: bytes) -> RingSignature:
    view = memoryview(data)

    def take(n: int) -> bytes:
        nonlocal view
        if len(view) < n:
            raise MalformedSignature("truncated signature")
        chunk, view = bytes(view[:n]), view[n:]
        return chunk

    def take_lp() -> int:
        length = int.from_bytes(take(2), "big")
        return int.from_bytes(take(length), "big")

    domain_bits = int.from_bytes(take(2), "big")
    count = int.from_bytes(take(2), "big")
    if count < 1:
        raise MalformedSignature("empty ring")
    ring = []
    for _ in range(count):
        modulus = take_lp()
        exponent = take_lp()
        try:
            ring.append(RingPublicKey(modulus, exponent))
        except InvalidKeyPair as exc:
            raise MalformedSignature(str(exc)) from exc
    width = (domain_bits + 7) // 8
    glue = int.from_bytes(take(width), "big")
    xs = tuple(int.from_bytes(take(width), "big") for _ in range(count))
    if len(view):
        raise MalformedSignature("trailing bytes after signature")
    return RingSignature(ring=tuple(ring), glue=glue, x_values=xs, domain_bits=domain_bits)
