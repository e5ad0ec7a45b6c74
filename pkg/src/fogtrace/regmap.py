"""Regulatory mapping layer: real identities bound to on-chain ones.

The registry logs every identity-to-address mapping when wallets create
them, and reveals a mapping only under a warrant signed by a separate
authority key. Every register and reveal appends to a hash-chained
audit log, so after-the-fact tampering or deletion is detectable by
anyone holding an export of the log.

Stealth outputs are registered by their transaction public key (the R
point), which is visible on-chain but links to nothing without the
registry, so recipients stay hidden until a warranted reveal.
"""

from __future__ import annotations

from dataclasses import dataclass
from hashlib import sha256

from .group import get_group, schnorr_sign, schnorr_verify
from .ledger import canonical_bytes

LOG_SEED_HASH = "0" * 64


class RegistryError(ValueError):
    pass


class DuplicateAddress(RegistryError):
    """Address already carries a registered identity."""


class UnknownAddress(RegistryError):
    """No mapping registered for this address."""


class NoWarrant(RegistryError):
    """Missing warrant or one whose authority signature fails."""


class OutOfScope(RegistryError):
    """Warrant does not cover the requested address."""


class ExpiredWarrant(RegistryError):
    """Warrant validity height has passed."""


@dataclass(frozen=True)
class IdentityRecord:
    real_identity: str
    address: str
    attestation: str  # hex signature by the registry key
    registered_at: int  # block height

    def signing_bytes(self) -> bytes:
        return canonical_bytes(
            {
                "identity": self.real_identity,
                "address": self.address,
                "registered_at": self.registered_at,
            }
        )

    def to_dict(self) -> dict:
        return {
            "identity": self.real_identity,
            "address": self.address,
            "attestation": self.attestation,
            "registered_at": self.registered_at,
        }

    @staticmethod
    def from_dict(d: dict) -> "IdentityRecord":
        return IdentityRecord(d["identity"], d["address"], d["attestation"], d["registered_at"])


@dataclass(frozen=True)
class Warrant:
    authorizer_id: str
    scope: tuple[str, ...]
    expiry: int  # last block height at which the warrant is valid
    signature: str  # hex signature by the authority key

    def signing_bytes(self) -> bytes:
        return canonical_bytes(
            {
                "authorizer_id": self.authorizer_id,
                "scope": sorted(self.scope),
                "expiry": self.expiry,
            }
        )

    def to_dict(self) -> dict:
        return {
            "authorizer_id": self.authorizer_id,
            "scope": sorted(self.scope),
            "expiry": self.expiry,
            "signature": self.signature,
        }

    @staticmethod
    def from_dict(d: dict) -> "Warrant":
        return Warrant(d["authorizer_id"], tuple(d["scope"]), d["expiry"], d["signature"])


@dataclass(frozen=True)
class AuditEntry:
    sequence: int
    action: str  # "register" | "reveal"
    payload: dict
    payload_digest: str
    previous_hash: str
    entry_hash: str

    def to_dict(self) -> dict:
        return {
            "sequence": self.sequence,
            "action": self.action,
            "payload": self.payload,
            "payload_digest": self.payload_digest,
            "previous_hash": self.previous_hash,
            "entry_hash": self.entry_hash,
        }

    @staticmethod
    def from_dict(d: dict) -> "AuditEntry":
        return AuditEntry(
            d["sequence"],
            d["action"],
            d["payload"],
            d["payload_digest"],
            d["previous_hash"],
            d["entry_hash"],
        )


def _entry_hash(previous_hash: str, sequence: int, action: str, payload: dict) -> str:
    body = canonical_bytes({"sequence": sequence, "action": action, "payload": payload})
    return sha256(previous_hash.encode() + body).hexdigest()


def make_entry(previous_hash: str, sequence: int, action: str, payload: dict) -> AuditEntry:
    return AuditEntry(
        sequence=sequence,
        action=action,
        payload=payload,
        payload_digest=sha256(canonical_bytes(payload)).hexdigest(),
        previous_hash=previous_hash,
        entry_hash=_entry_hash(previous_hash, sequence, action, payload),
    )


@dataclass(frozen=True)
class AuditVerdict:
    intact: bool
    broken_at: int | None = None
    length_mismatch: bool = False

    def __bool__(self) -> bool:
        return self.intact and not self.length_mismatch


def verify_audit_chain(log: list[AuditEntry], declared_length: int | None = None) -> AuditVerdict:
    """Recompute every hash; report the first break, if any.

    With a declared length the verdict also flags truncation: a log that
    verifies as a prefix but is shorter than the registry claims.
    """
    previous = LOG_SEED_HASH
    for position, entry in enumerate(log):
        if (
            entry.sequence != position
            or entry.previous_hash != previous
            or entry.payload_digest != sha256(canonical_bytes(entry.payload)).hexdigest()
            or entry.entry_hash
            != _entry_hash(entry.previous_hash, entry.sequence, entry.action, entry.payload)
        ):
            return AuditVerdict(intact=False, broken_at=position)
        previous = entry.entry_hash
    mismatch = declared_length is not None and declared_length != len(log)
    return AuditVerdict(intact=True, length_mismatch=mismatch)


def issue_warrant(
    authority_secret: int,
    authorizer_id: str,
    scope: list[str],
    expiry: int,
    backend: str = "production-curve",
) -> Warrant:
    if not scope:
        raise RegistryError("warrant scope must not be empty")
    unsigned = Warrant(authorizer_id, tuple(sorted(scope)), expiry, "")
    signature = schnorr_sign(get_group(backend), authority_secret, unsigned.signing_bytes())
    return Warrant(unsigned.authorizer_id, unsigned.scope, expiry, signature.hex())


class MappingRegistry:
    """Single-writer registry with an append-only audit log.

    The public operation surface is register, reveal (warrant-gated),
    and verification; nothing else returns an identity.
    """

    def __init__(self, registry_secret: int, authority_public, backend: str = "production-curve"):
        self.backend = backend
        self._group = get_group(backend)
        self._secret = registry_secret
        self.registry_public = self._group.mul_gen(registry_secret)
        self.authority_public = authority_public
        self._records: dict[str, IdentityRecord] = {}
        self._log: list[AuditEntry] = []

    # -- queries that do not expose identities --

    @property
    def audit_log(self) -> tuple[AuditEntry, ...]:
        return tuple(self._log)

    def declared_length(self) -> int:
        return len(self._log)

    def is_registered(self, address: str) -> bool:
        return address in self._records

    def registered_addresses(self) -> list[str]:
        return sorted(self._records)

    def verify(self) -> AuditVerdict:
        return verify_audit_chain(self._log, self.declared_length())

    # -- operations --

    def _append(self, action: str, payload: dict) -> AuditEntry:
        previous = self._log[-1].entry_hash if self._log else LOG_SEED_HASH
        entry = make_entry(previous, len(self._log), action, payload)
        self._log.append(entry)
        return entry

    def register_mapping(
        self, real_identity: str, address: str, height: int = 0
    ) -> tuple[IdentityRecord, AuditEntry]:
        if address in self._records:
            raise DuplicateAddress(f"{address} already registered")
        unsigned = IdentityRecord(real_identity, address, "", height)
        attestation = schnorr_sign(self._group, self._secret, unsigned.signing_bytes())
        record = IdentityRecord(real_identity, address, attestation.hex(), height)
        entry = self._append(
            "register",
            {"address": address, "registered_at": height, "attestation": record.attestation},
        )
        self._records[address] = record
        return record, entry

    def reveal_mapping(
        self, address: str, warrant: Warrant | None, current_height: int
    ) -> tuple[str, AuditEntry]:
        if warrant is None:
            raise NoWarrant("no warrant presented")
        if not warrant.scope:
            raise NoWarrant("warrant carries an empty scope")
        if not schnorr_verify(
            self._group,
            self.authority_public,
            warrant.signing_bytes(),
            bytes.fromhex(warrant.signature),
        ):
            raise NoWarrant("authority signature does not verify")
        if current_height > warrant.expiry:
            raise ExpiredWarrant(
                f"warrant expired at height {warrant.expiry}, now at {current_height}"
            )
        if address not in warrant.scope:
            raise OutOfScope(f"{address} is outside the warrant scope")
        record = self._records.get(address)
        if record is None:
            raise UnknownAddress(f"no mapping registered for {address}")
        entry = self._append(
            "reveal",
            {
                "address": address,
                "identity": record.real_identity,
                "warrant": {
                    "authorizer_id": warrant.authorizer_id,
                    "expiry": warrant.expiry,
                    "signature": warrant.signature,
                },
                "at_height": current_height,
            },
        )
        return record.real_identity, entry

    def verify_record(self, record: IdentityRecord) -> bool:
        return schnorr_verify(
            self._group,
            self.registry_public,
            record.signing_bytes(),
            bytes.fromhex(record.attestation),
        )

    # -- persistence --

    def to_dict(self) -> dict:
        return {
            "backend": self.backend,
            "registry_public": self._group.encode_point(self.registry_public).hex(),
            "authority_public": self._group.encode_point(self.authority_public).hex(),
            "records": [self._records[a].to_dict() for a in sorted(self._records)],
            "log": [entry.to_dict() for entry in self._log],
        }

    @classmethod
    def from_dict(cls, d: dict, registry_secret: int) -> "MappingRegistry":
        group = get_group(d["backend"])
        registry = cls(
            registry_secret,
            group.decode_point(bytes.fromhex(d["authority_public"])),
            d["backend"],
        )
        stored_public = group.decode_point(bytes.fromhex(d["registry_public"]))
        if stored_public != registry.registry_public:
            raise RegistryError("registry secret does not match the stored public key")
        for record_dict in d["records"]:
            record = IdentityRecord.from_dict(record_dict)
            registry._records[record.address] = record
        registry._log = [AuditEntry.from_dict(e) for e in d["log"]]
        return registry


def reveals_from_log(log: list[AuditEntry]) -> dict[str, str]:
    """address -> identity for every reveal entry in a verified log."""
    return {
        entry.payload["address"]: entry.payload["identity"]
        for entry in log
        if entry.action == "reveal"
    }
