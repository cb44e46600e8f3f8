"""Contract lifecycle and two-party negotiation.

Statuses move along a fixed graph:

    Draft -> Negotiating | Accepted | Rejected
    Negotiating -> Negotiating | Accepted | Rejected
    Accepted -> Active            (both signatures + settled escrow)
    Active -> Expired | Terminated

Rejected, Expired, and Terminated are terminal: nothing mutates a contract in
those statuses. Negotiation is strict turn-taking starting with the consumer;
every successful proposal bumps the version by exactly one and flips the turn.

Commands are split into ``prepare_*`` (validate and build the negotiation
event, capturing any fresh randomness) and ``apply_event`` (fold the event
into state). The broker persists the event between the two phases; replaying
a contract's event log therefore reproduces its state byte-for-byte.
"""

from __future__ import annotations

import secrets
import threading
from collections import defaultdict
from dataclasses import dataclass, replace
from enum import Enum
from typing import Callable, Protocol

from . import signing
from .canonical import canonicalize
from .errors import (
    BadSignature,
    MissingSignature,
    NonNegotiableKey,
    NotAParty,
    OutOfTurn,
    PaymentIncomplete,
    SelfDealing,
    TerminalStatus,
    TooEarly,
    UnknownAsset,
    UnknownContract,
    VersionConflict,
    VisibilityDenied,
    WrongParty,
    WrongState,
    WrongStatus,
)
from .model import PartyDirectory, Policy, PolicyCategory, Term, UsageAction, new_id
from .policy import (
    check_terms,
    evaluate_visibility,
    raise_for_violations,
    term_from_json,
    term_to_json,
    terms_document,
)
from .vocabulary import TermVocabulary


class ContractStatus(str, Enum):
    DRAFT = "Draft"
    NEGOTIATING = "Negotiating"
    ACCEPTED = "Accepted"
    REJECTED = "Rejected"
    ACTIVE = "Active"
    EXPIRED = "Expired"
    TERMINATED = "Terminated"


TERMINAL_STATUSES = frozenset(
    {ContractStatus.REJECTED, ContractStatus.EXPIRED, ContractStatus.TERMINATED}
)


class NegotiationAction(str, Enum):
    CREATE_DRAFT = "create_draft"
    PROPOSE = "propose"
    COUNTER_OFFER = "counter_offer"
    ACCEPT = "accept"
    REJECT = "reject"
    SIGN = "sign"
    ACTIVATE = "activate"
    TERMINATE = "terminate"
    EXPIRE = "expire"


# Status transitions that can succeed, and who may drive them. `turn_holder`
# means the party whose response is pending; `any_party` either contract
# party; `system` the expiry sweep. Every (status, action) pair absent from
# this table fails with TerminalStatus / WrongStatus / OutOfTurn as
# appropriate. The post-Accepted payment-timeout cancellation is a separate
# operation outside this table (it records a `reject` event).
TRANSITION_TABLE: dict[tuple[ContractStatus, NegotiationAction], str] = {
    (ContractStatus.DRAFT, NegotiationAction.PROPOSE): "turn_holder",
    (ContractStatus.DRAFT, NegotiationAction.ACCEPT): "turn_holder",
    (ContractStatus.DRAFT, NegotiationAction.REJECT): "turn_holder",
    (ContractStatus.NEGOTIATING, NegotiationAction.COUNTER_OFFER): "turn_holder",
    (ContractStatus.NEGOTIATING, NegotiationAction.ACCEPT): "turn_holder",
    (ContractStatus.NEGOTIATING, NegotiationAction.REJECT): "turn_holder",
    (ContractStatus.ACCEPTED, NegotiationAction.SIGN): "any_party",
    (ContractStatus.ACCEPTED, NegotiationAction.ACTIVATE): "any_party",
    (ContractStatus.ACTIVE, NegotiationAction.TERMINATE): "any_party",
    (ContractStatus.ACTIVE, NegotiationAction.EXPIRE): "system",
}

# Contract-category vocabulary keys that materialize into contract fields at
# draft time instead of travelling as terms.
_FIELD_BACKED_KEYS = {
    "temporal validity",
    "spatial validity & coverage",
    "liability",
    "termination clause",
    "validation date",
    "involved provider",
    "involved consumer",
}

SETTLED_ESCROW_STATES = ("Released", "BypassGranted")


@dataclass(frozen=True)
class Signature:
    party_id: str
    signature: str  # hex Ed25519 over the negotiated digest
    version: int  # contract version at signing time


@dataclass(frozen=True)
class NegotiationEvent:
    event_id: str
    contract_id: str
    actor: str  # party_id, "" for system-driven events
    action: NegotiationAction
    payload: dict
    at: int
    resulting_version: int

    def to_json(self) -> dict:
        return {
            "event_id": self.event_id,
            "contract_id": self.contract_id,
            "actor": self.actor,
            "action": self.action.value,
            "payload": self.payload,
            "at": self.at,
            "resulting_version": self.resulting_version,
        }

    @classmethod
    def from_json(cls, obj: dict) -> NegotiationEvent:
        return cls(
            event_id=obj["event_id"],
            contract_id=obj["contract_id"],
            actor=obj["actor"],
            action=NegotiationAction(obj["action"]),
            payload=obj["payload"],
            at=obj["at"],
            resulting_version=obj["resulting_version"],
        )


@dataclass(frozen=True)
class ProposalDiff:
    """Changes a proposal applies; only negotiable keys are allowed.

    Negotiable: price, temporal_validity, spatial_validity, and
    RightsAndUsage terms. Everything else is provider-locked.
    """

    price: int | None = None
    temporal_validity: tuple[int, int] | None = None
    spatial_validity: tuple[str, ...] | None = None
    set_terms: tuple[Term, ...] = ()
    remove_terms: tuple[tuple[PolicyCategory, str, UsageAction | None], ...] = ()

    def is_empty(self) -> bool:
        return (
            self.price is None
            and self.temporal_validity is None
            and self.spatial_validity is None
            and not self.set_terms
            and not self.remove_terms
        )

    def to_payload(self) -> dict:
        return {
            "price": self.price,
            "temporal_validity": (
                None
                if self.temporal_validity is None
                else {"start": self.temporal_validity[0], "end": self.temporal_validity[1]}
            ),
            "spatial_validity": (
                None if self.spatial_validity is None else list(self.spatial_validity)
            ),
            "set_terms": [term_to_json(t) for t in self.set_terms],
            "remove_terms": [
                {"category": c.value, "key": k, "action": a.value if a else None}
                for (c, k, a) in self.remove_terms
            ],
        }

    @classmethod
    def from_payload(cls, obj: dict, vocabulary: TermVocabulary) -> ProposalDiff:
        tv = obj.get("temporal_validity")
        sv = obj.get("spatial_validity")
        return cls(
            price=obj.get("price"),
            temporal_validity=None if tv is None else (tv["start"], tv["end"]),
            spatial_validity=None if sv is None else tuple(sv),
            set_terms=tuple(term_from_json(t, vocabulary) for t in obj.get("set_terms", [])),
            remove_terms=tuple(
                (
                    PolicyCategory(r["category"]),
                    r["key"],
                    UsageAction(r["action"]) if r.get("action") else None,
                )
                for r in obj.get("remove_terms", [])
            ),
        )


@dataclass(frozen=True)
class Contract:
    contract_id: str
    asset_id: str
    provider: str
    consumer: str
    terms: tuple[Term, ...]
    price: int
    temporal_validity: tuple[int, int]
    spatial_validity: tuple[str, ...]
    validation_date: int | None
    liability_text: str
    termination_clause: str
    status: ContractStatus
    version: int
    turn: str  # party whose proposal/response is pending
    signatures: tuple[Signature, ...]
    salt: str  # per-contract 128-bit hex salt for hashed anchor entries
    created_at: int
    accepted_at: int | None = None

    def parties(self) -> tuple[str, str]:
        return (self.provider, self.consumer)

    def counterparty(self, party_id: str) -> str:
        return self.consumer if party_id == self.provider else self.provider

    def signature_of(self, party_id: str) -> Signature | None:
        for sig in self.signatures:
            if sig.party_id == party_id:
                return sig
        return None

    def to_document(self) -> dict:
        """Full canonical document: contract content plus lifecycle status.

        Excludes signatures (they sign this document's negotiated core), the
        turn marker (protocol bookkeeping), and the off-ledger salt.
        """
        doc = self.negotiated_document()
        doc["status"] = self.status.value
        doc["validation_date"] = self.validation_date
        return doc

    def negotiated_document(self) -> dict:
        """The negotiated substance both parties sign, at this version."""
        return {
            "contract_id": self.contract_id,
            "asset_id": self.asset_id,
            "provider": self.provider,
            "consumer": self.consumer,
            "terms": terms_document(self.terms),
            "price": self.price,
            "temporal_validity": {
                "start": self.temporal_validity[0],
                "end": self.temporal_validity[1],
            },
            "spatial_validity": list(self.spatial_validity),
            "liability_text": self.liability_text,
            "termination_clause": self.termination_clause,
            "version": self.version,
        }

    def negotiated_digest(self) -> bytes:
        return canonicalize(self.negotiated_document()).digest

    def document_digest(self) -> bytes:
        return canonicalize(self.to_document()).digest


class CatalogView(Protocol):
    """What the engine needs from the catalog."""

    def get(self, asset_id: str) -> object | None: ...  # entry with .asset/.policy/.active


def _overlay_terms(base: tuple[Term, ...], overrides: tuple[Term, ...]) -> list[Term]:
    """Overrides replace base terms occupying the same slot.

    Every override survives into the result, so an internally contradictory
    override set (two terms on one slot) is caught by term validation rather
    than silently collapsed.
    """
    override_slots = {t.slot() for t in overrides}
    merged = [t for t in base if t.slot() not in override_slots]
    merged.extend(overrides)
    return merged


def _materialize_contract_fields(
    terms: list[Term],
) -> tuple[list[Term], dict[str, object]]:
    """Split field-backed Contract-category terms out of the term list."""
    fields: dict[str, object] = {}
    remaining: list[Term] = []
    for term in terms:
        if term.category is PolicyCategory.CONTRACT and term.key in _FIELD_BACKED_KEYS:
            if term.key == "temporal validity" and isinstance(term.value, tuple):
                fields["temporal_validity"] = term.value
            elif term.key == "spatial validity & coverage" and isinstance(term.value, str):
                fields["spatial_validity"] = tuple(
                    part.strip() for part in term.value.split(",") if part.strip()
                )
            elif term.key == "liability" and isinstance(term.value, str):
                fields["liability_text"] = term.value
            elif term.key == "termination clause" and isinstance(term.value, str):
                fields["termination_clause"] = term.value
            # validation date / involved provider / involved consumer are
            # derived fields; a policy cannot pre-set them
        else:
            remaining.append(term)
    return remaining, fields


def apply_negotiation_event(
    contract: Contract | None, event: NegotiationEvent, vocabulary: TermVocabulary
) -> Contract:
    """Pure fold step: event applied to prior state. No validation here."""
    action = event.action
    if action is NegotiationAction.CREATE_DRAFT:
        if contract is not None:
            raise ValueError("create_draft event on an existing contract")
        p = event.payload
        tv = p["temporal_validity"]
        return Contract(
            contract_id=event.contract_id,
            asset_id=p["asset_id"],
            provider=p["provider"],
            consumer=p["consumer"],
            terms=tuple(term_from_json(t, vocabulary) for t in p["terms"]),
            price=p["price"],
            temporal_validity=(tv["start"], tv["end"]),
            spatial_validity=tuple(p["spatial_validity"]),
            validation_date=None,
            liability_text=p["liability_text"],
            termination_clause=p["termination_clause"],
            status=ContractStatus.DRAFT,
            version=1,
            turn=p["consumer"],
            signatures=(),
            salt=p["salt"],
            created_at=event.at,
        )
    if contract is None:
        raise ValueError(f"{action.value} event without a contract")
    if action in (NegotiationAction.PROPOSE, NegotiationAction.COUNTER_OFFER):
        diff = ProposalDiff.from_payload(event.payload["diff"], vocabulary)
        terms = list(contract.terms)
        if diff.remove_terms:
            removed = set(diff.remove_terms)
            terms = [t for t in terms if t.slot() not in removed]
        if diff.set_terms:
            terms = _overlay_terms(tuple(terms), diff.set_terms)
        return replace(
            contract,
            price=contract.price if diff.price is None else diff.price,
            temporal_validity=(
                contract.temporal_validity
                if diff.temporal_validity is None
                else diff.temporal_validity
            ),
            spatial_validity=(
                contract.spatial_validity
                if diff.spatial_validity is None
                else diff.spatial_validity
            ),
            terms=tuple(terms),
            status=ContractStatus.NEGOTIATING,
            version=contract.version + 1,
            turn=contract.counterparty(event.actor),
        )
    if action is NegotiationAction.ACCEPT:
        return replace(contract, status=ContractStatus.ACCEPTED, accepted_at=event.at)
    if action is NegotiationAction.REJECT:
        return replace(contract, status=ContractStatus.REJECTED)
    if action is NegotiationAction.SIGN:
        signature = Signature(
            party_id=event.actor,
            signature=event.payload["signature"],
            version=event.payload["signed_version"],
        )
        return replace(contract, signatures=contract.signatures + (signature,))
    if action is NegotiationAction.ACTIVATE:
        return replace(contract, status=ContractStatus.ACTIVE, validation_date=event.at)
    if action is NegotiationAction.TERMINATE:
        return replace(contract, status=ContractStatus.TERMINATED)
    if action is NegotiationAction.EXPIRE:
        return replace(contract, status=ContractStatus.EXPIRED)
    raise ValueError(f"unhandled action {action!r}")


def replay_events(
    events: list[NegotiationEvent], vocabulary: TermVocabulary
) -> Contract:
    """Rebuild a contract purely from its event log."""
    if not events:
        raise ValueError("cannot replay an empty event log")
    contract: Contract | None = None
    for event in events:
        contract = apply_negotiation_event(contract, event, vocabulary)
    assert contract is not None
    return contract


@dataclass(frozen=True)
class ValidityReport:
    contract_id: str
    checked_at: int
    status: ContractStatus
    status_valid: bool  # contract currently Active
    window_valid: bool  # checked_at inside temporal validity
    signature_checks: tuple[tuple[str, bool], ...]  # (party_id, verifies)
    signatures_valid: bool
    anchored: bool
    ledger_consistent: str  # match | mismatch | not_anchored
    anchored_digest: str | None
    current_digest: str

    def to_document(self) -> dict:
        return {
            "contract_id": self.contract_id,
            "checked_at": self.checked_at,
            "status": self.status.value,
            "status_valid": self.status_valid,
            "window_valid": self.window_valid,
            "signature_checks": {party: ok for party, ok in self.signature_checks},
            "signatures_valid": self.signatures_valid,
            "anchored": self.anchored,
            "ledger_consistent": self.ledger_consistent,
            "anchored_digest": self.anchored_digest,
            "current_digest": self.current_digest,
        }


class ContractEngine:
    """Holds live contracts, validates commands, and folds events.

    Per-contract mutations are serialized via the per-contract lock;
    mutating commands may carry an expected version and fail with
    VersionConflict when another writer got there first.
    """

    def __init__(
        self,
        *,
        parties: PartyDirectory,
        vocabulary: TermVocabulary,
        lookup_entry: Callable[[str], object | None],
        escrow_state: Callable[[str], str | None] = lambda contract_id: None,
        payment_cancel_timeout: int = 7 * 86400,
    ):
        self._parties = parties
        self._vocabulary = vocabulary
        self._lookup_entry = lookup_entry
        self._escrow_state = escrow_state
        self._payment_cancel_timeout = payment_cancel_timeout
        self._contracts: dict[str, Contract] = {}
        self._events: dict[str, list[NegotiationEvent]] = defaultdict(list)
        self._locks: dict[str, threading.Lock] = defaultdict(threading.Lock)

    # --- queries ---

    def get(self, contract_id: str) -> Contract | None:
        return self._contracts.get(contract_id)

    def require(self, contract_id: str) -> Contract:
        contract = self._contracts.get(contract_id)
        if contract is None:
            raise UnknownContract(f"no contract {contract_id!r}")
        return contract

    def events_for(self, contract_id: str) -> list[NegotiationEvent]:
        return list(self._events.get(contract_id, []))

    def all_contracts(self) -> list[Contract]:
        return sorted(self._contracts.values(), key=lambda c: c.contract_id)

    def contract_lock(self, contract_id: str) -> threading.Lock:
        return self._locks[contract_id]

    # --- prepare phase: validation + event construction ---

    def prepare_draft(
        self,
        asset_id: str,
        provider_id: str,
        consumer_id: str,
        initial_terms: tuple[Term, ...] | list[Term] = (),
        price: int | None = None,
        *,
        purpose: str = "trade",
        temporal_validity: tuple[int, int] | None = None,
        spatial_validity: tuple[str, ...] | None = None,
        now: int,
        contract_id: str | None = None,
        salt: str | None = None,
    ) -> NegotiationEvent:
        entry = self._lookup_entry(asset_id)
        if entry is None or not getattr(entry, "active", True):
            raise UnknownAsset(f"no active asset {asset_id!r}")
        provider = self._parties.require(provider_id)
        consumer = self._parties.require(consumer_id)
        if provider_id == consumer_id:
            raise SelfDealing("provider and consumer must differ")
        asset = entry.asset
        policy: Policy = entry.policy
        if asset.provider != provider_id:
            raise WrongParty(f"{provider.display_name} does not own asset {asset_id}")
        if not evaluate_visibility(policy, consumer, purpose):
            raise VisibilityDenied(
                f"asset {asset_id} is not visible to {consumer.display_name}"
            )

        merged = _overlay_terms(policy.terms, tuple(initial_terms))
        terms, fields = _materialize_contract_fields(merged)
        violations = check_terms(terms, self._vocabulary)
        raise_for_violations(violations)

        if temporal_validity is None:
            temporal_validity = fields.get("temporal_validity", (now, now + 30 * 86400))
        if spatial_validity is None:
            spatial_validity = fields.get("spatial_validity", ())
        if price is None:
            price = policy.price_listing
        if price < 0:
            raise ValueError("price must be non-negative")
        if not temporal_validity[0] < temporal_validity[1]:
            raise ValueError("temporal validity start must precede end")

        payload = {
            "asset_id": asset_id,
            "provider": provider_id,
            "consumer": consumer_id,
            "price": price,
            "temporal_validity": {
                "start": temporal_validity[0],
                "end": temporal_validity[1],
            },
            "spatial_validity": list(spatial_validity),
            "liability_text": fields.get("liability_text", ""),
            "termination_clause": fields.get("termination_clause", ""),
            "terms": [term_to_json(t) for t in terms],
            "salt": salt or secrets.token_bytes(16).hex(),
            "purpose": purpose,
        }
        return NegotiationEvent(
            event_id=new_id(),
            contract_id=contract_id or new_id(),
            actor=provider_id,
            action=NegotiationAction.CREATE_DRAFT,
            payload=payload,
            at=now,
            resulting_version=1,
        )

    def _negotiation_preamble(
        self, contract_id: str, actor_id: str, *, expected_version: int | None
    ) -> Contract:
        contract = self.require(contract_id)
        self._check_version(contract, expected_version)
        if contract.status in TERMINAL_STATUSES:
            raise TerminalStatus(f"contract is {contract.status.value}")
        if contract.status not in (ContractStatus.DRAFT, ContractStatus.NEGOTIATING):
            raise WrongStatus(f"contract is {contract.status.value}, not negotiable")
        if actor_id not in contract.parties():
            raise NotAParty(f"{actor_id} is not a party to this contract")
        if actor_id != contract.turn:
            raise OutOfTurn(f"it is {contract.turn}'s turn to respond")
        return contract

    @staticmethod
    def _check_version(contract: Contract, expected_version: int | None) -> None:
        if expected_version is not None and expected_version != contract.version:
            raise VersionConflict(
                f"expected version {expected_version}, contract is at {contract.version}"
            )

    def prepare_propose(
        self,
        contract_id: str,
        actor_id: str,
        diff: ProposalDiff,
        *,
        now: int,
        expected_version: int | None = None,
    ) -> NegotiationEvent:
        contract = self._negotiation_preamble(
            contract_id, actor_id, expected_version=expected_version
        )
        if diff.is_empty():
            raise ValueError("a proposal must change at least one negotiable field")
        for term in diff.set_terms:
            if term.category is not PolicyCategory.RIGHTS_AND_USAGE:
                raise NonNegotiableKey(
                    f"{term.category.value}/{term.key} is provider-locked"
                )
        for category, key, _action in diff.remove_terms:
            if category is not PolicyCategory.RIGHTS_AND_USAGE:
                raise NonNegotiableKey(f"{category.value}/{key} is provider-locked")
        if diff.price is not None and diff.price < 0:
            raise ValueError("price must be non-negative")
        if diff.temporal_validity is not None and not (
            diff.temporal_validity[0] < diff.temporal_validity[1]
        ):
            raise ValueError("temporal validity start must precede end")

        action = (
            NegotiationAction.PROPOSE
            if contract.status is ContractStatus.DRAFT
            else NegotiationAction.COUNTER_OFFER
        )
        event = NegotiationEvent(
            event_id=new_id(),
            contract_id=contract_id,
            actor=actor_id,
            action=action,
            payload={"diff": diff.to_payload()},
            at=now,
            resulting_version=contract.version + 1,
        )
        # dry-run the fold so invalid resulting term sets are rejected up front
        candidate = apply_negotiation_event(contract, event, self._vocabulary)
        raise_for_violations(check_terms(candidate.terms, self._vocabulary))
        return event

    def prepare_respond(
        self,
        contract_id: str,
        actor_id: str,
        decision: str,
        *,
        now: int,
        expected_version: int | None = None,
    ) -> NegotiationEvent:
        contract = self._negotiation_preamble(
            contract_id, actor_id, expected_version=expected_version
        )
        if decision not in ("accept", "reject"):
            raise ValueError("decision must be accept or reject")
        action = (
            NegotiationAction.ACCEPT if decision == "accept" else NegotiationAction.REJECT
        )
        return NegotiationEvent(
            event_id=new_id(),
            contract_id=contract_id,
            actor=actor_id,
            action=action,
            payload={},
            at=now,
            resulting_version=contract.version,
        )

    def prepare_sign(
        self, contract_id: str, actor_id: str, signature_hex: str, *, now: int
    ) -> NegotiationEvent | None:
        """None means the actor already holds an identical valid signature."""
        contract = self.require(contract_id)
        if contract.status in TERMINAL_STATUSES:
            raise TerminalStatus(f"contract is {contract.status.value}")
        if contract.status is not ContractStatus.ACCEPTED:
            raise WrongStatus(f"contract is {contract.status.value}, signing needs Accepted")
        if actor_id not in contract.parties():
            raise NotAParty(f"{actor_id} is not a party to this contract")
        actor = self._parties.require(actor_id)
        message = contract.negotiated_digest()
        if not signing.verify(actor.public_key, signature_hex, message):
            raise BadSignature("signature does not verify against the current version digest")
        existing = contract.signature_of(actor_id)
        if existing is not None:
            return None  # idempotent re-sign
        return NegotiationEvent(
            event_id=new_id(),
            contract_id=contract_id,
            actor=actor_id,
            action=NegotiationAction.SIGN,
            payload={"signature": signature_hex, "signed_version": contract.version},
            at=now,
            resulting_version=contract.version,
        )

    def prepare_activate(
        self, contract_id: str, *, now: int, expected_version: int | None = None
    ) -> NegotiationEvent:
        contract = self.require(contract_id)
        self._check_version(contract, expected_version)
        if contract.status in TERMINAL_STATUSES:
            raise TerminalStatus(f"contract is {contract.status.value}")
        if contract.status is not ContractStatus.ACCEPTED:
            raise WrongStatus(f"contract is {contract.status.value}, activation needs Accepted")
        missing = [p for p in contract.parties() if contract.signature_of(p) is None]
        if missing:
            raise MissingSignature(f"missing signatures: {', '.join(missing)}")
        escrow = self._escrow_state(contract_id)
        if escrow not in SETTLED_ESCROW_STATES:
            raise PaymentIncomplete(
                f"escrow for this contract is {escrow or 'absent'}, not settled"
            )
        return NegotiationEvent(
            event_id=new_id(),
            contract_id=contract_id,
            actor="",
            action=NegotiationAction.ACTIVATE,
            payload={},
            at=now,
            resulting_version=contract.version,
        )

    def prepare_terminate(
        self,
        contract_id: str,
        actor_id: str,
        reason: str,
        *,
        now: int,
        expected_version: int | None = None,
    ) -> NegotiationEvent:
        contract = self.require(contract_id)
        self._check_version(contract, expected_version)
        if contract.status in TERMINAL_STATUSES:
            raise TerminalStatus(f"contract is {contract.status.value}")
        if contract.status is not ContractStatus.ACTIVE:
            raise WrongStatus(f"contract is {contract.status.value}, termination needs Active")
        if actor_id not in contract.parties():
            raise NotAParty(f"{actor_id} is not a party to this contract")
        return NegotiationEvent(
            event_id=new_id(),
            contract_id=contract_id,
            actor=actor_id,
            action=NegotiationAction.TERMINATE,
            payload={"reason": reason},
            at=now,
            resulting_version=contract.version,
        )

    def prepare_cancel_unpaid(
        self, contract_id: str, actor_id: str, *, now: int
    ) -> NegotiationEvent:
        """Back out of an Accepted contract whose payment never settled."""
        contract = self.require(contract_id)
        if contract.status in TERMINAL_STATUSES:
            raise TerminalStatus(f"contract is {contract.status.value}")
        if contract.status is not ContractStatus.ACCEPTED:
            raise WrongStatus(f"contract is {contract.status.value}, not Accepted")
        if actor_id not in contract.parties():
            raise NotAParty(f"{actor_id} is not a party to this contract")
        accepted_at = contract.accepted_at or contract.created_at
        if now - accepted_at < self._payment_cancel_timeout:
            raise TooEarly(
                f"cancellation allowed {self._payment_cancel_timeout}s after acceptance"
            )
        if self._escrow_state(contract_id) in SETTLED_ESCROW_STATES:
            raise WrongState("escrow already settled; contract can only move forward")
        return NegotiationEvent(
            event_id=new_id(),
            contract_id=contract_id,
            actor=actor_id,
            action=NegotiationAction.REJECT,
            payload={"reason": "payment timeout cancellation"},
            at=now,
            resulting_version=contract.version,
        )

    def prepare_expiry(self, now: int) -> list[NegotiationEvent]:
        events = []
        for contract in self.all_contracts():
            if contract.status is ContractStatus.ACTIVE and contract.temporal_validity[1] < now:
                events.append(
                    NegotiationEvent(
                        event_id=new_id(),
                        contract_id=contract.contract_id,
                        actor="",
                        action=NegotiationAction.EXPIRE,
                        payload={},
                        at=now,
                        resulting_version=contract.version,
                    )
                )
        return events

    # --- apply phase ---

    def apply_event(self, event: NegotiationEvent) -> Contract:
        contract = self._contracts.get(event.contract_id)
        updated = apply_negotiation_event(contract, event, self._vocabulary)
        self._contracts[event.contract_id] = updated
        self._events[event.contract_id].append(event)
        return updated

    # --- one-shot conveniences (prepare + apply) ---

    def draft_contract(self, *args, **kwargs) -> Contract:
        event = self.prepare_draft(*args, **kwargs)
        with self._locks[event.contract_id]:
            return self.apply_event(event)

    def submit_proposal(
        self,
        contract_id: str,
        actor_id: str,
        diff: ProposalDiff,
        *,
        now: int,
        expected_version: int | None = None,
    ) -> Contract:
        with self._locks[contract_id]:
            event = self.prepare_propose(
                contract_id, actor_id, diff, now=now, expected_version=expected_version
            )
            return self.apply_event(event)

    def respond(
        self,
        contract_id: str,
        actor_id: str,
        decision: str,
        *,
        now: int,
        expected_version: int | None = None,
    ) -> Contract:
        with self._locks[contract_id]:
            event = self.prepare_respond(
                contract_id, actor_id, decision, now=now, expected_version=expected_version
            )
            return self.apply_event(event)

    def sign(
        self, contract_id: str, actor_id: str, signature_hex: str, *, now: int
    ) -> Contract:
        with self._locks[contract_id]:
            event = self.prepare_sign(contract_id, actor_id, signature_hex, now=now)
            if event is None:
                return self.require(contract_id)
            return self.apply_event(event)

    def activate(
        self, contract_id: str, *, now: int, expected_version: int | None = None
    ) -> Contract:
        with self._locks[contract_id]:
            event = self.prepare_activate(
                contract_id, now=now, expected_version=expected_version
            )
            return self.apply_event(event)

    def terminate(
        self,
        contract_id: str,
        actor_id: str,
        reason: str,
        *,
        now: int,
        expected_version: int | None = None,
    ) -> Contract:
        with self._locks[contract_id]:
            event = self.prepare_terminate(
                contract_id, actor_id, reason, now=now, expected_version=expected_version
            )
            return self.apply_event(event)

    def cancel_unpaid(self, contract_id: str, actor_id: str, *, now: int) -> Contract:
        with self._locks[contract_id]:
            event = self.prepare_cancel_unpaid(contract_id, actor_id, now=now)
            return self.apply_event(event)

    def tick_expiry(self, now: int) -> list[Contract]:
        expired = []
        for event in self.prepare_expiry(now):
            with self._locks[event.contract_id]:
                expired.append(self.apply_event(event))
        return expired

    # --- reporting ---

    def validity_report(
        self, contract_id: str, now: int, latest_record: object | None
    ) -> ValidityReport:
        """latest_record: newest anchored status record, or None if unanchored."""
        contract = self.require(contract_id)
        start, end = contract.temporal_validity
        checks = []
        for party_id in contract.parties():
            sig = contract.signature_of(party_id)
            if sig is None:
                checks.append((party_id, False))
                continue
            party = self._parties.require(party_id)
            checks.append(
                (
                    party_id,
                    signing.verify(
                        party.public_key, sig.signature, contract.negotiated_digest()
                    ),
                )
            )
        current_digest = contract.document_digest().hex()
        if latest_record is None:
            anchored, verdict, anchored_digest = False, "not_anchored", None
        else:
            anchored_digest = latest_record.whole_document_digest
            anchored = True
            verdict = "match" if anchored_digest == current_digest else "mismatch"
        return ValidityReport(
            contract_id=contract_id,
            checked_at=now,
            status=contract.status,
            status_valid=contract.status is ContractStatus.ACTIVE,
            window_valid=start <= now <= end,
            signature_checks=tuple(checks),
            signatures_valid=all(ok for _, ok in checks),
            anchored=anchored,
            ledger_consistent=verdict,
            anchored_digest=anchored_digest,
            current_digest=current_digest,
        )
