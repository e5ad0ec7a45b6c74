"""Base58Check-style address encoding.

Layout: version byte || sha256(public key)[:20] || 4-byte checksum,
where the checksum is the first four bytes of the double SHA-256 of
everything before it. Stealth addresses pack both long-term public keys
under their own version byte.
"""

from hashlib import sha256

from .group import get_group
from .stealth import StealthAddress

ALPHABET = "123456789ABCDEFGHJKLMNPQRSTUVWXYZabcdefghijkmnopqrstuvwxyz"

TRANSPARENT_VERSION = 0x19
STEALTH_VERSION = 0x33
KEYHASH_LEN = 20


class BadChecksum(ValueError):
    """Encoded address fails its checksum."""


class BadAddress(ValueError):
    """String is not a well-formed address."""


def b58encode(raw: bytes) -> str:
    pad = len(raw) - len(raw.lstrip(b"\0"))
    acc = int.from_bytes(raw, "big")
    out = ""
    while acc > 0:
        acc, rem = divmod(acc, 58)
        out = ALPHABET[rem] + out
    return ALPHABET[0] * pad + out


def b58decode(text: str) -> bytes:
    acc = 0
    for ch in text:
        idx = ALPHABET.find(ch)
        if idx < 0:
            raise BadAddress(f"invalid base58 character {ch!r}")
        acc = acc * 58 + idx
    pad = len(text) - len(text.lstrip(ALPHABET[0]))
    body = acc.to_bytes((acc.bit_length() + 7) // 8, "big")
    return b"\0" * pad + body


def _checksum(payload: bytes) -> bytes:
    return sha256(sha256(payload).digest()).digest()[:4]


def b58check_encode(payload: bytes) -> str:
    return b58encode(payload + _checksum(payload))


def b58check_decode(text: str) -> bytes:
    raw = b58decode(text)
    if len(raw) < 5:
        raise BadAddress("too short to carry a checksum")
    payload, check = raw[:-4], raw[-4:]
    if check != _checksum(payload):
        raise BadChecksum(f"checksum mismatch in {text!r}")
    return payload


def derive_address(public_key_bytes: bytes) -> str:
    """Deterministic transparent address for a serialized public key."""
    if not public_key_bytes:
        raise BadAddress("empty public key")
    payload = bytes([TRANSPARENT_VERSION]) + sha256(public_key_bytes).digest()[:KEYHASH_LEN]
    return b58check_encode(payload)


def decode_address(text: str) -> bytes:
    """Validate and return the 20-byte key hash of a transparent address."""
    payload = b58check_decode(text)
    if payload[0] != TRANSPARENT_VERSION or len(payload) != 1 + KEYHASH_LEN:
        raise BadAddress("not a transparent address")
    return payload[1:]


def encode_stealth_address(addr: StealthAddress) -> str:
    group = get_group(addr.backend)
    from .lsag import _TAG_BYTES  # single source for backend tag bytes

    payload = (
        bytes([STEALTH_VERSION, _TAG_BYTES[addr.backend]])
        + _lp(group.encode_point(addr.scan_public))
        + _lp(group.encode_point(addr.spend_public))
    )
    return b58check_encode(payload)


def decode_stealth_address(text: str) -> StealthAddress:
    from .lsag import _TAG_NAMES

    payload = b58check_decode(text)
    if len(payload) < 2 or payload[0] != STEALTH_VERSION:
        raise BadAddress("not a stealth address")
    if payload[1] not in _TAG_NAMES:
        raise BadAddress("unknown group backend in stealth address")
    backend = _TAG_NAMES[payload[1]]
    group = get_group(backend)
    view = payload[2:]
    scan_raw, view = _take_lp(view)
    spend_raw, view = _take_lp(view)
    if view:
        raise BadAddress("trailing bytes in stealth address")
    return StealthAddress(
        backend=backend,
        scan_public=group.decode_point(scan_raw),
        spend_public=group.decode_point(spend_raw),
    )


def _lp(data: bytes) -> bytes:
    return len(data).to_bytes(1, "big") + data


def _take_lp(view: bytes):
    if not view:
        raise BadAddress("truncated stealth address")
    length = view[0]
    if len(view) < 1 + length:
        raise BadAddress("truncated stealth address")
    return view[1 : 1 + length], view[1 + length :]
