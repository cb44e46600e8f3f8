"""Core domain types: parties, data assets, terms, and policies.

All types are immutable values; construction enforces the structural
invariants that do not need the vocabulary registry (those live in
``policy.check_policy_consistency``).
"""

from __future__ import annotations

import uuid
from dataclasses import dataclass, field
from decimal import Decimal
from enum import Enum


def new_id() -> str:
    """Fresh 128-bit identifier, rendered as 32 lowercase hex digits."""
    return uuid.uuid4().hex


class TermKind(str, Enum):
    PERMISSION = "Permission"
    PROHIBITION = "Prohibition"
    OBLIGATION = "Obligation"


class PolicyCategory(str, Enum):
    DATA_ASSET = "DataAsset"
    CONTRACT = "Contract"
    RESPONSIBILITY = "Responsibility"
    RIGHTS_AND_USAGE = "RightsAndUsage"
    QUALITY = "Quality"
    PRIVACY_AND_PROTECTION = "PrivacyAndProtection"


class UsageAction(str, Enum):
    DERIVATION = "derivation"
    ATTRIBUTION = "attribution"
    REPRODUCTION = "reproduction"
    DISTRIBUTION = "distribution"
    RE_CONTEXT = "re-context"


class PartyRole(str, Enum):
    PROVIDER = "provider"
    CONSUMER = "consumer"
    BOTH = "both"


TermValue = bool | int | str | Decimal | tuple[int, int]


@dataclass(frozen=True)
class Party:
    party_id: str
    display_name: str
    role: PartyRole
    industry: str
    public_key: str = ""  # hex-encoded Ed25519 public key, set at registration


@dataclass(frozen=True)
class Term:
    """One atomic sharing rule: a kind + category + key + typed value."""

    category: PolicyCategory
    kind: TermKind
    key: str
    value: TermValue
    action: UsageAction | None = None

    def slot(self) -> tuple[PolicyCategory, str, UsageAction | None]:
        """Identity triple: at most one term may occupy a slot in a policy."""
        return (self.category, self.key, self.action)


@dataclass(frozen=True)
class DataAsset:
    asset_id: str
    description: str
    provider: str  # party_id
    encrypted_columns: tuple[str, ...] = ()
    unencrypted_columns: tuple[str, ...] = ()
    data_model_entities: tuple[str, ...] = ()
    creator: str = ""
    contributor: str = ""
    version: str = "1.0"
    created_date: int | None = None
    modified_date: int | None = None
    published_date: int | None = None

    def __post_init__(self):
        overlap = set(self.encrypted_columns) & set(self.unencrypted_columns)
        if overlap:
            raise ValueError(
                f"columns cannot be both encrypted and unencrypted: {sorted(overlap)}"
            )
        dates = (self.created_date, self.modified_date, self.published_date)
        if all(d is not None for d in dates):
            if not (dates[0] <= dates[1] <= dates[2]):  # type: ignore[operator]
                raise ValueError("expected created_date <= modified_date <= published_date")


@dataclass(frozen=True)
class VisibilityRule:
    """Requester attribute must take one of the allowed values (rules AND together)."""

    attribute: str
    allowed_values: tuple[str, ...]


@dataclass(frozen=True)
class Policy:
    policy_id: str
    asset_id: str
    terms: tuple[Term, ...]
    sensitivity_level: int
    price_listing: int
    visibility_rules: tuple[VisibilityRule, ...] = ()
    attached_at: int = 0

    def __post_init__(self):
        if not 0 <= self.sensitivity_level <= 3:
            raise ValueError("sensitivity_level must be in 0..3")
        if self.price_listing < 0:
            raise ValueError("price_listing must be non-negative")


@dataclass
class PartyDirectory:
    """Registered parties and their signing keys.

    Key custody is simulated: the directory holds private keys so the engine
    can sign on a party's behalf (contract signatures, payment proofs). State
    is rebuilt from the event store on replay.
    """

    _parties: dict[str, Party] = field(default_factory=dict)
    _private_keys: dict[str, str] = field(default_factory=dict)  # party_id -> hex

    def add(self, party: Party, private_key_hex: str) -> None:
        if party.party_id in self._parties:
            raise ValueError(f"party {party.party_id} already registered")
        self._parties[party.party_id] = party
        self._private_keys[party.party_id] = private_key_hex

    def get(self, party_id: str) -> Party | None:
        return self._parties.get(party_id)

    def require(self, party_id: str) -> Party:
        party = self._parties.get(party_id)
        if party is None:
            from .errors import UnknownParty

            raise UnknownParty(f"no registered party {party_id!r}")
        return party

    def private_key(self, party_id: str) -> str:
        self.require(party_id)
        return self._private_keys[party_id]

    def all(self) -> list[Party]:
        return sorted(self._parties.values(), key=lambda p: p.party_id)

    def find_by_name(self, display_name: str) -> Party | None:
        for party in self._parties.values():
            if party.display_name == display_name:
                return party
        return None
