"""One-time recipient addresses.

A recipient publishes long-term scan/spend public keys. Each payment
derives a fresh one-time output key from an ephemeral Diffie-Hellman
exchange, so outputs to the same recipient are unlinkable on-chain and
only the recipient can detect and spend them. No message exchange is
needed; the ephemeral public key rides along with the output.
"""

from __future__ import annotations

from dataclasses import dataclass

from .group import GroupSpec, IdentityPoint, get_group
from .rng import DeterministicRng


class NotOwner(ValueError):
    """Output does not belong to these recipient keys."""


@dataclass(frozen=True)
class StealthAddress:
    """Shareable recipient material: the two long-term public keys."""

    backend: str
    scan_public: object
    spend_public: object


@dataclass(frozen=True)
class StealthRecipientKeys:
    backend: str
    scan_secret: int
    scan_public: object
    spend_secret: int
    spend_public: object

    def address(self) -> StealthAddress:
        return StealthAddress(self.backend, self.scan_public, self.spend_public)

    def group(self) -> GroupSpec:
        return get_group(self.backend)


@dataclass(frozen=True)
class StealthOutputMeta:
    """What a shielded output shows the world: R = r*G and the one-time key."""

    backend: str
    tx_public: object
    onetime_public: object


def stealth_keygen(spec: GroupSpec, rng_seed: bytes | str | int) -> StealthRecipientKeys:
    rng = DeterministicRng(rng_seed)
    scan = 0
    while scan == 0:
        scan = rng.randbelow(spec.order)
    spend = 0
    while spend == 0:
        spend = rng.randbelow(spec.order)
    return StealthRecipientKeys(
        backend=spec.tag,
        scan_secret=scan,
        scan_public=spec.mul_gen(scan),
        spend_secret=spend,
        spend_public=spec.mul_gen(spend),
    )


def _shared_scalar(group: GroupSpec, shared_point) -> int:
    return group.hash_to_scalar(b"stealth", group.encode_point(shared_point))


def derive_onetime_output(
    recipient: StealthAddress, rng_seed: bytes | str | int
) -> StealthOutputMeta:
    """Sender-side derivation; touches only the recipient's public keys."""
    group = get_group(recipient.backend)
    if group.is_identity(recipient.scan_public) or group.is_identity(recipient.spend_public):
        raise IdentityPoint("recipient key is the group identity")
    rng = DeterministicRng(rng_seed)
    r = 0
    while r == 0:
        r = rng.randbelow(group.order)
    shared = group.mul(r, recipient.scan_public)
    onetime = group.add(group.mul_gen(_shared_scalar(group, shared)), recipient.spend_public)
    return StealthOutputMeta(
        backend=recipient.backend,
        tx_public=group.mul_gen(r),
        onetime_public=onetime,
    )


def scan_output(meta: StealthOutputMeta, keys: StealthRecipientKeys) -> bool:
    """True when the output pays these keys (Diffie-Hellman a*R = r*A)."""
    group = keys.group()
    shared = group.mul(keys.scan_secret, meta.tx_public)
    expected = group.add(group.mul_gen(_shared_scalar(group, shared)), keys.spend_public)
    return expected == meta.onetime_public


def recover_onetime_secret(meta: StealthOutputMeta, keys: StealthRecipientKeys) -> int:
    """The private key matching the one-time output key; owner only."""
    if not scan_output(meta, keys):
        raise NotOwner("output was not derived for these recipient keys")
    group = keys.group()
    shared = group.mul(keys.scan_secret, meta.tx_public)
    x = (_shared_scalar(group, shared) + keys.spend_secret) % group.order
    assert group.mul_gen(x) == meta.onetime_public
    return x
