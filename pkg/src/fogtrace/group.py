"""Prime-order group backends shared by the linkable-ring and stealth layers.

Two interchangeable backends:

* ``toy-schnorr``: the order-11 subgroup of quadratic residues mod 23.
  Discrete logs are brute-forceable, which is the point; it exists so
  tests can check everything by exhaustive enumeration.
* ``production-curve``: secp256k1 with plain affine arithmetic. Slow by
  libsecp standards, entirely adequate for a desk-scale ledger.

Scalars are ints mod the group order. Points are backend-opaque values;
use the spec's encode/decode for anything that leaves the process.
"""

from __future__ import annotations

import hashlib
from functools import lru_cache


class BackendMismatch(ValueError):
    """Operation mixed values from different group backends."""


class IdentityPoint(ValueError):
    """The group identity appeared where a real point is required."""


def _h(data: bytes) -> int:
    return int.from_bytes(hashlib.sha256(data).digest(), "big")


class GroupSpec:
    """Common surface of a prime-order group backend."""

    tag: str
    order: int

    def add(self, a, b):
        raise NotImplementedError

    def mul(self, k: int, point):
        raise NotImplementedError

    @property
    def generator(self):
        raise NotImplementedError

    @property
    def identity(self):
        raise NotImplementedError

    def is_identity(self, point) -> bool:
        return point == self.identity

    def encode_point(self, point) -> bytes:
        raise NotImplementedError

    def decode_point(self, data: bytes):
        raise NotImplementedError

    def hash_to_scalar(self, *parts: bytes) -> int:
        return _h(b"".join(parts)) % self.order

    def hash_to_point(self, data: bytes):
        raise NotImplementedError

    def mul_gen(self, k: int):
        return self.mul(k, self.generator)

    def scalar_bytes(self, k: int) -> bytes:
        width = (self.order.bit_length() + 7) // 8
        return (k % self.order).to_bytes(width, "big")


class ToySchnorrGroup(GroupSpec):
    """Order-11 subgroup of Z_23^*: every secret is recoverable by search."""

    tag = "toy-schnorr"
    p = 23
    order = 11
    _gen = 2  # 2**11 = 2048 = 1 mod 23

    @property
    def generator(self):
        return self._gen

    @property
    def identity(self):
        return 1

    def add(self, a: int, b: int) -> int:
        return (a * b) % self.p

    def mul(self, k: int, point: int) -> int:
        return pow(point, k % self.order, self.p)

    def encode_point(self, point: int) -> bytes:
        return bytes([point])

    def decode_point(self, data: bytes) -> int:
        if len(data) != 1:
            raise ValueError("toy point encoding is a single byte")
        point = data[0]
        if not 1 <= point < self.p or pow(point, self.order, self.p) != 1:
            raise ValueError("byte does not encode a subgroup element")
        return point

    # Domain separation for hash_to_point. The value matters in a group
    # this small: it is chosen so the ten possible key images
    # (secret * hash_to_point(public)) are pairwise distinct, keeping
    # linkability collision-free at order 11.
    _HP_PREFIX = b"Hp" + (746).to_bytes(4, "big")

    def hash_to_point(self, data: bytes) -> int:
        # Squaring lands in the quadratic-residue subgroup, which has
        # exactly order q; resample the rare identity hit.
        counter = 0
        while True:
            raw = _h(self._HP_PREFIX + data + counter.to_bytes(2, "big")) % (self.p - 1) + 1
            candidate = (raw * raw) % self.p
            if candidate != 1:
                return candidate
            counter += 1

    def discrete_log(self, point: int) -> int:
        """Brute-force log base g; only possible in the toy group."""
        acc = 1
        for k in range(self.order):
            if acc == point:
                return k
            acc = (acc * self._gen) % self.p
        raise ValueError(f"{point} is not in the subgroup")


class Secp256k1Group(GroupSpec):
    """secp256k1 in affine coordinates; identity is represented as None."""

    tag = "production-curve"
    p = 0xFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFEFFFFFC2F
    order = 0xFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFEBAAEDCE6AF48A03BBFD25E8CD0364141
    _gx = 0x79BE667EF9DCBBAC55A06295CE870B07029BFCDB2DCE28D959F2815B16F81798
    _gy = 0x483ADA7726A3C4655DA4FBFC0E1108A8FD17B448A68554199C47D08FFB10D4B8

    @property
    def generator(self):
        return (self._gx, self._gy)

    @property
    def identity(self):
        return None

    def _on_curve(self, point) -> bool:
        if point is None:
            return True
        x, y = point
        return (y * y - (x * x * x + 7)) % self.p == 0

    def add(self, a, b):
        if a is None:
            return b
        if b is None:
            return a
        x1, y1 = a
        x2, y2 = b
        if x1 == x2:
            if (y1 + y2) % self.p == 0:
                return None
            # doubling
            lam = (3 * x1 * x1) * pow(2 * y1, -1, self.p) % self.p
        else:
            lam = (y2 - y1) * pow(x2 - x1, -1, self.p) % self.p
        x3 = (lam * lam - x1 - x2) % self.p
        y3 = (lam * (x1 - x3) - y1) % self.p
        return (x3, y3)

    def mul(self, k: int, point):
        # Jacobian double-and-add: one field inversion per multiply.
        k %= self.order
        if k == 0 or point is None:
            return None
        p = self.p
        rx, ry, rz = 0, 1, 0  # Jacobian infinity
        ax, ay = point
        for bit in bin(k)[2:]:
            rx, ry, rz = self._jac_double(rx, ry, rz, p)
            if bit == "1":
                rx, ry, rz = self._jac_add_affine(rx, ry, rz, ax, ay, p)
        if rz == 0:
            return None
        zi = pow(rz, -1, p)
        zi2 = zi * zi % p
        return (rx * zi2 % p, ry * zi2 * zi % p)

    @staticmethod
    def _jac_double(x1, y1, z1, p):
        if z1 == 0 or y1 == 0:
            return (0, 1, 0)
        a = x1 * x1 % p
        b = y1 * y1 % p
        c = b * b % p
        d = 2 * ((x1 + b) * (x1 + b) - a - c) % p
        e = 3 * a % p
        x3 = (e * e - 2 * d) % p
        y3 = (e * (d - x3) - 8 * c) % p
        z3 = 2 * y1 * z1 % p
        return (x3, y3, z3)

    @classmethod
    def _jac_add_affine(cls, x1, y1, z1, x2, y2, p):
        if z1 == 0:
            return (x2, y2, 1)
        z1z1 = z1 * z1 % p
        u2 = x2 * z1z1 % p
        s2 = y2 * z1 * z1z1 % p
        if u2 == x1:
            if s2 != y1:
                return (0, 1, 0)
            return cls._jac_double(x1, y1, z1, p)
        h = (u2 - x1) % p
        hh = h * h % p
        i = 4 * hh % p
        j = h * i % p
        rr = 2 * (s2 - y1) % p
        v = x1 * i % p
        x3 = (rr * rr - j - 2 * v) % p
        y3 = (rr * (v - x3) - 2 * y1 * j) % p
        z3 = ((z1 + h) * (z1 + h) - z1z1 - hh) % p
        return (x3, y3, z3)

    def encode_point(self, point) -> bytes:
        if point is None:
            return b"\x00"
        x, y = point
        prefix = 0x03 if y & 1 else 0x02
        return bytes([prefix]) + x.to_bytes(32, "big")

    def decode_point(self, data: bytes):
        if data == b"\x00":
            return None
        if len(data) != 33 or data[0] not in (2, 3):
            raise ValueError("expected 33-byte compressed point")
        x = int.from_bytes(data[1:], "big")
        if x >= self.p:
            raise ValueError("x coordinate out of field range")
        y_sq = (pow(x, 3, self.p) + 7) % self.p
        y = pow(y_sq, (self.p + 1) // 4, self.p)
        if (y * y) % self.p != y_sq:
            raise ValueError("x is not on the curve")
        if (y & 1) != (data[0] & 1):
            y = self.p - y
        return (x, y)

    def hash_to_point(self, data: bytes):
        # Try-and-increment on the x coordinate.
        counter = 0
        while True:
            x = _h(data + counter.to_bytes(4, "big")) % self.p
            y_sq = (pow(x, 3, self.p) + 7) % self.p
            y = pow(y_sq, (self.p + 1) // 4, self.p)
            if (y * y) % self.p == y_sq:
                return (x, y if y & 1 == 0 else self.p - y)
            counter += 1


_BACKENDS = {
    ToySchnorrGroup.tag: ToySchnorrGroup(),
    Secp256k1Group.tag: Secp256k1Group(),
}


def get_group(tag: str) -> GroupSpec:
    try:
        return _BACKENDS[tag]
    except KeyError:
        raise ValueError(f"unknown group backend: {tag!r}") from None


@lru_cache(maxsize=4096)
def _cached_hash_to_point(tag: str, data: bytes):
    return _BACKENDS[tag].hash_to_point(data)


def hash_point_of(group: GroupSpec, point) -> "object":
    """hash_to_point of an encoded point, memoised per backend."""
    return _cached_hash_to_point(group.tag, group.encode_point(point))


# -- plain Schnorr signatures --------------------------------------------------
# Used for transparent-ledger ownership and registry/warrant attestations.
# The nonce is derived from the secret and message, so signing is
# deterministic and chain stores replay byte-for-byte.


def schnorr_sign(group: GroupSpec, secret: int, message: bytes) -> bytes:
    public = group.mul_gen(secret)
    nonce = group.hash_to_scalar(b"nonce", group.scalar_bytes(secret), message)
    if nonce == 0:
        nonce = 1
    commit = group.mul_gen(nonce)
    challenge = group.hash_to_scalar(
        group.encode_point(commit), group.encode_point(public), message
    )
    s = (nonce + challenge * secret) % group.order
    return group.encode_point(commit) + group.scalar_bytes(s)


def schnorr_verify(group: GroupSpec, public, message: bytes, signature: bytes) -> bool:
    width = (group.order.bit_length() + 7) // 8
    point_len = len(signature) - width
    if point_len <= 0:
        return False
    try:
        commit = group.decode_point(signature[:point_len])
    except ValueError:
        return False
    s = int.from_bytes(signature[point_len:], "big")
    challenge = group.hash_to_scalar(
        signature[:point_len], group.encode_point(public), message
    )
    lhs = group.mul_gen(s)
    rhs = group.add(commit, group.mul(challenge, public))
    return lhs == rhs
