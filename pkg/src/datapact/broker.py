"""Event-sourced brokerage facade.

Every mutating command runs in three steps:

1. prepare: the owning module validates against current state and builds a
   domain event carrying all fresh randomness (ids, salts, signatures, time);
2. persist: the event is framed into the append-only store;
3. apply: the event folds into in-memory state, including derived side
   effects (ledger anchoring, access tokens).

State is therefore a pure function of the event store: reopening a data
directory replays the log and reproduces the exact same state, and the
ledger file is reconciled against the replayed chain at startup.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass
from pathlib import Path

from .canonical import canonicalize
from .catalog import Catalog, CatalogEntry, SearchQuery
from .clock import Clock, SystemClock
from .contracts import (
    Contract,
    ContractEngine,
    ContractStatus,
    NegotiationAction,
    NegotiationEvent,
    ProposalDiff,
    ValidityReport,
)
from .disclosure import (
    Disclosure,
    AnchorEntry,
    DisclosureRules,
    build_anchor_payload,
    leaf_entries,
    load_disclosure_rules,
    render_leaf,
)
from .errors import UnknownAsset, UnknownToken, WrongParty
from .escrow import DisputeFlag, EscrowBank, EscrowEvent, EscrowHold, PaymentProof
from .events import EventEnvelope, EventStore, make_envelope
from .ledger import (
    ChainReport,
    ContractRecord,
    Ledger,
    RECORD_DISPUTE_FLAG,
    RECORD_STATUS_ANCHOR,
)
from .model import (
    DataAsset,
    Party,
    PartyDirectory,
    PartyRole,
    Policy,
    Term,
    VisibilityRule,
    new_id,
)
from .policy import asset_document, define_policy, policy_document, term_from_json
from . import signing
from .vocabulary import TermVocabulary, load_vocabulary

DEFAULT_BYPASS_TIMEOUT = 72 * 3600
DEFAULT_PAYMENT_CANCEL_TIMEOUT = 7 * 86400


@dataclass(frozen=True)
class AccessToken:
    token_id: str
    contract_id: str
    consumer: str
    expires_at: int  # contract temporal validity end
    revoked: bool = False

    def to_document(self) -> dict:
        return {
            "token_id": self.token_id,
            "contract_id": self.contract_id,
            "consumer": self.consumer,
            "expires_at": self.expires_at,
            "revoked": self.revoked,
        }


@dataclass(frozen=True)
class TokenStatus:
    token: AccessToken
    valid: bool
    reason: str  # "ok" | "revoked" | "expired" | "contract_not_active"

    def to_document(self) -> dict:
        return {"token": self.token.to_document(), "valid": self.valid, "reason": self.reason}


class Broker:
    def __init__(
        self,
        data_dir: str | Path,
        *,
        bypass_timeout: int = DEFAULT_BYPASS_TIMEOUT,
        payment_cancel_timeout: int = DEFAULT_PAYMENT_CANCEL_TIMEOUT,
        vocabulary_path: str | Path | None = None,
        disclosure_rules_path: str | Path | None = None,
        clock: Clock | None = None,
    ):
        self._data_dir = Path(data_dir)
        self._data_dir.mkdir(parents=True, exist_ok=True)
        self._clock: Clock = clock if clock is not None else SystemClock()
        self._vocabulary: TermVocabulary = load_vocabulary(vocabulary_path)
        self._rules: DisclosureRules = load_disclosure_rules(disclosure_rules_path)

        self._parties = PartyDirectory()
        self._api_keys: dict[str, str] = {}  # api_key -> party_id
        self._catalog = Catalog(self._parties, self._vocabulary)
        self._engine = ContractEngine(
            parties=self._parties,
            vocabulary=self._vocabulary,
            lookup_entry=self._catalog.get,
            escrow_state=lambda cid: self._escrow.state_for_contract(cid),
            payment_cancel_timeout=payment_cancel_timeout,
        )
        self._escrow = EscrowBank(
            parties=self._parties,
            lookup_contract=self._engine.get,
            bypass_timeout=bypass_timeout,
        )
        self._ledger = Ledger(path=None, digest_lookup=self._live_digest)
        self._tokens: dict[str, AccessToken] = {}
        self._token_by_contract: dict[str, str] = {}
        self._idempotency: dict[str, dict] = {}
        self._lock = threading.RLock()

        self._store = EventStore(self._data_dir / "events.log")
        for envelope in self._store.read_all():
            self._apply(envelope)
        self._ledger.sync_file(self._data_dir / "ledger.log")

    # --- plumbing ---

    @property
    def vocabulary(self) -> TermVocabulary:
        return self._vocabulary

    @property
    def clock(self) -> Clock:
        return self._clock

    @property
    def data_dir(self) -> Path:
        return self._data_dir

    def now(self) -> int:
        return self._clock.now()

    def _at(self, now: int | None) -> int:
        return self.now() if now is None else now

    def _live_digest(self, contract_id: str, version: int) -> str | None:
        contract = self._engine.get(contract_id)
        if contract is None:
            return None
        return contract.document_digest().hex()

    def _persist(
        self, stream: str, etype: str, data: dict, at: int, idempotency_key: str | None
    ) -> object:
        event: dict = {"type": etype, "data": data}
        if idempotency_key is not None:
            event["idempotency_key"] = idempotency_key
        envelope = make_envelope(self._store.next_sequence, stream, event, at)
        self._store.append(envelope)
        return self._apply(envelope)

    def _seen(self, idempotency_key: str | None) -> dict | None:
        if idempotency_key is None:
            return None
        return self._idempotency.get(idempotency_key)

    # --- event application (used live and on replay) ---

    def _apply(self, envelope: EventEnvelope) -> object:
        event = envelope.event()
        etype, data = event["type"], event["data"]
        result = self._dispatch(etype, data)
        key = event.get("idempotency_key")
        if key is not None:
            self._idempotency[key] = self._result_ref(etype, data)
        return result

    def _dispatch(self, etype: str, data: dict) -> object:
        if etype == "party_registered":
            party = Party(
                party_id=data["party_id"],
                display_name=data["display_name"],
                role=PartyRole(data["role"]),
                industry=data["industry"],
                public_key=data["public_key"],
            )
            self._parties.add(party, data["private_key"])
            self._api_keys[data["api_key"]] = party.party_id
            return party
        if etype == "asset_registered":
            asset = _asset_from_document(data["asset"])
            policy = _policy_from_document(data["policy"], self._vocabulary)
            return self._catalog.register_asset(asset, policy, now=data["listed_at"])
        if etype == "asset_deregistered":
            return self._catalog.deregister(data["asset_id"])
        if etype == "contract_event":
            return self._apply_contract_event(data)
        if etype in (
            "deposited",
            "hold_placed",
            "hold_confirmed",
            "hold_bypassed",
            "hold_refunded",
        ):
            result = self._escrow.apply_event(EscrowEvent(etype, data, data["at"]))
            if etype == "hold_bypassed":
                flag_doc = data["flag"]
                self._anchor_dispute(flag_doc, data["at"])
            return result
        raise ValueError(f"unhandled event type {etype!r}")

    def _apply_contract_event(self, data: dict) -> Contract:
        ev = NegotiationEvent.from_json(data["event"])
        contract = self._engine.apply_event(ev)
        action = ev.action
        if action is NegotiationAction.ACCEPT:
            self._anchor_status(contract, ev.at)
        elif action is NegotiationAction.ACTIVATE:
            token = AccessToken(
                token_id=data["token_id"],
                contract_id=contract.contract_id,
                consumer=contract.consumer,
                expires_at=contract.temporal_validity[1],
            )
            self._tokens[token.token_id] = token
            self._token_by_contract[contract.contract_id] = token.token_id
            self._anchor_status(contract, ev.at)
        elif action in (NegotiationAction.TERMINATE, NegotiationAction.EXPIRE):
            self._revoke_token(contract.contract_id)
            self._anchor_status(contract, ev.at)
        elif action is NegotiationAction.REJECT and data.get("anchored", False):
            # post-Accepted cancellation: the Accepted anchor exists, record
            # the reversal so the chain's last word matches reality
            self._anchor_status(contract, ev.at)
        return contract

    def _revoke_token(self, contract_id: str) -> None:
        token_id = self._token_by_contract.get(contract_id)
        if token_id is None:
            return
        token = self._tokens[token_id]
        self._tokens[token_id] = AccessToken(
            token_id=token.token_id,
            contract_id=token.contract_id,
            consumer=token.consumer,
            expires_at=token.expires_at,
            revoked=True,
        )

    def _anchor_status(self, contract: Contract, at: int) -> None:
        entry = self._catalog.get(contract.asset_id)
        assert entry is not None
        doc = contract.to_document()
        record = ContractRecord(
            contract_id=contract.contract_id,
            contract_version=contract.version,
            status_at_anchor=contract.status,
            whole_document_digest=canonicalize(doc).digest_hex,
            entries=tuple(
                build_anchor_payload(
                    doc,
                    entry.policy.sensitivity_level,
                    bytes.fromhex(contract.salt),
                    self._rules,
                )
            ),
            signatures=tuple(
                sorted((s.party_id, s.signature) for s in contract.signatures)
            ),
            anchored_at=at,
            record_kind=RECORD_STATUS_ANCHOR,
        )
        self._ledger.append_record(record, block_time=at)

    def _anchor_dispute(self, flag_doc: dict, at: int) -> None:
        contract = self._engine.require(flag_doc["contract_id"])
        entries = tuple(
            AnchorEntry(key=f"dispute_flag.{path}", disclosure=Disclosure.PLAIN,
                        value=render_leaf(leaf))
            for path, leaf in leaf_entries(flag_doc)
        )
        record = ContractRecord(
            contract_id=contract.contract_id,
            contract_version=contract.version,
            status_at_anchor=contract.status,
            whole_document_digest=contract.document_digest().hex(),
            entries=entries,
            signatures=tuple(
                sorted((s.party_id, s.signature) for s in contract.signatures)
            ),
            anchored_at=at,
            record_kind=RECORD_DISPUTE_FLAG,
        )
        self._ledger.append_record(record, block_time=at)

    def _result_ref(self, etype: str, data: dict) -> dict:
        if etype == "party_registered":
            return {"kind": "party", "id": data["party_id"]}
        if etype == "asset_registered":
            return {"kind": "asset", "id": data["asset"]["asset_id"]}
        if etype == "asset_deregistered":
            return {"kind": "asset", "id": data["asset_id"]}
        if etype == "contract_event":
            return {"kind": "contract", "id": data["event"]["contract_id"]}
        if etype == "deposited":
            return {"kind": "account", "id": data["party_id"]}
        return {"kind": "hold", "id": data["hold_id"]}

    # --- party commands ---

    def register_party(
        self,
        display_name: str,
        role: PartyRole | str,
        industry: str,
        *,
        seed: bytes | None = None,
        idempotency_key: str | None = None,
        now: int | None = None,
    ) -> tuple[Party, str]:
        """Returns the party and its API key (shown once)."""
        with self._lock:
            seen = self._seen(idempotency_key)
            if seen is not None:
                party = self._parties.require(seen["id"])
                return party, self.api_key_for(party.party_id)
            at = self._at(now)
            keys = signing.generate_keypair(seed)
            data = {
                "party_id": new_id(),
                "display_name": display_name,
                "role": PartyRole(role).value,
                "industry": industry,
                "public_key": keys.public_hex,
                "private_key": keys.private_hex,
                "api_key": new_id(),
                "at": at,
            }
            party = self._persist("party", "party_registered", data, at, idempotency_key)
            assert isinstance(party, Party)
            return party, data["api_key"]

    def api_key_for(self, party_id: str) -> str:
        for key, pid in self._api_keys.items():
            if pid == party_id:
                return key
        raise UnknownToken(f"no api key for party {party_id}")

    def party_for_api_key(self, api_key: str) -> Party | None:
        party_id = self._api_keys.get(api_key)
        return self._parties.get(party_id) if party_id else None

    def get_party(self, party_id: str) -> Party | None:
        return self._parties.get(party_id)

    def find_party(self, name_or_id: str) -> Party | None:
        return self._parties.get(name_or_id) or self._parties.find_by_name(name_or_id)

    def parties(self) -> list[Party]:
        return self._parties.all()

    # --- catalog commands ---

    def register_asset(
        self,
        provider_id: str,
        asset_fields: dict,
        policy_fields: dict,
        *,
        idempotency_key: str | None = None,
        now: int | None = None,
    ) -> CatalogEntry:
        """asset_fields/policy_fields are plain documents (see README formats)."""
        with self._lock:
            seen = self._seen(idempotency_key)
            if seen is not None:
                entry = self._catalog.get(seen["id"])
                assert entry is not None
                return entry
            at = self._at(now)
            self._parties.require(provider_id)
            asset = _asset_from_document(
                {**asset_fields, "provider": provider_id,
                 "asset_id": asset_fields.get("asset_id") or new_id()}
            )
            terms = [term_from_json(t, self._vocabulary) for t in policy_fields.get("terms", [])]
            rules = [
                VisibilityRule(r["attribute"], tuple(r["allowed_values"]))
                for r in policy_fields.get("visibility_rules", [])
            ]
            policy = define_policy(
                asset,
                terms,
                policy_fields.get("sensitivity_level", 0),
                policy_fields.get("price_listing", 0),
                rules,
                vocabulary=self._vocabulary,
                now=at,
            )
            self._catalog.validate_registration(asset, policy)
            data = {
                "asset": asset_document(asset),
                "policy": policy_document(policy),
                "listed_at": at,
            }
            entry = self._persist("asset", "asset_registered", data, at, idempotency_key)
            assert isinstance(entry, CatalogEntry)
            return entry

    def deregister_asset(
        self, provider_id: str, asset_id: str, *, now: int | None = None
    ) -> CatalogEntry:
        with self._lock:
            at = self._at(now)
            entry = self._catalog.get(asset_id)
            if entry is not None and entry.asset.provider != provider_id:
                raise WrongParty("only the listing provider can deregister an asset")
            if entry is None or not entry.active:
                raise UnknownAsset(f"no active asset {asset_id!r}")
            result = self._persist(
                "asset", "asset_deregistered", {"asset_id": asset_id, "at": at}, at, None
            )
            assert isinstance(result, CatalogEntry)
            return result

    def search(self, query: SearchQuery) -> list[CatalogEntry]:
        return self._catalog.search(query)

    def get_entry(self, asset_id: str) -> CatalogEntry | None:
        return self._catalog.get(asset_id)

    def catalog_entries(self) -> list[CatalogEntry]:
        return self._catalog.all_entries()

    # --- contract commands ---

    def _persist_contract_event(
        self,
        ev: NegotiationEvent,
        *,
        extra: dict | None = None,
        idempotency_key: str | None = None,
    ) -> Contract:
        data: dict = {"event": ev.to_json()}
        if extra:
            data.update(extra)
        contract = self._persist("contract", "contract_event", data, ev.at, idempotency_key)
        assert isinstance(contract, Contract)
        return contract

    def draft_contract(
        self,
        provider_id: str,
        asset_id: str,
        consumer_id: str,
        initial_terms: tuple[Term, ...] | list[Term] = (),
        price: int | None = None,
        *,
        purpose: str = "trade",
        temporal_validity: tuple[int, int] | None = None,
        spatial_validity: tuple[str, ...] | None = None,
        idempotency_key: str | None = None,
        now: int | None = None,
    ) -> Contract:
        with self._lock:
            seen = self._seen(idempotency_key)
            if seen is not None:
                return self._engine.require(seen["id"])
            ev = self._engine.prepare_draft(
                asset_id,
                provider_id,
                consumer_id,
                initial_terms,
                price,
                purpose=purpose,
                temporal_validity=temporal_validity,
                spatial_validity=spatial_validity,
                now=self._at(now),
            )
            return self._persist_contract_event(ev, idempotency_key=idempotency_key)

    def submit_proposal(
        self,
        contract_id: str,
        actor_id: str,
        diff: ProposalDiff,
        *,
        expected_version: int | None = None,
        idempotency_key: str | None = None,
        now: int | None = None,
    ) -> Contract:
        with self._lock:
            seen = self._seen(idempotency_key)
            if seen is not None:
                return self._engine.require(seen["id"])
            ev = self._engine.prepare_propose(
                contract_id,
                actor_id,
                diff,
                now=self._at(now),
                expected_version=expected_version,
            )
            return self._persist_contract_event(ev, idempotency_key=idempotency_key)

    def respond(
        self,
        contract_id: str,
        actor_id: str,
        decision: str,
        *,
        expected_version: int | None = None,
        idempotency_key: str | None = None,
        now: int | None = None,
    ) -> Contract:
        with self._lock:
            seen = self._seen(idempotency_key)
            if seen is not None:
                return self._engine.require(seen["id"])
            ev = self._engine.prepare_respond(
                contract_id,
                actor_id,
                decision,
                now=self._at(now),
                expected_version=expected_version,
            )
            return self._persist_contract_event(ev, idempotency_key=idempotency_key)

    def sign_contract(
        self,
        contract_id: str,
        actor_id: str,
        signature_hex: str | None = None,
        *,
        idempotency_key: str | None = None,
        now: int | None = None,
    ) -> Contract:
        """Signs with the actor's registered key when no signature is supplied."""
        with self._lock:
            seen = self._seen(idempotency_key)
            if seen is not None:
                return self._engine.require(seen["id"])
            if signature_hex is None:
                contract = self._engine.require(contract_id)
                signature_hex = signing.sign(
                    self._parties.private_key(actor_id), contract.negotiated_digest()
                )
            ev = self._engine.prepare_sign(
                contract_id, actor_id, signature_hex, now=self._at(now)
            )
            if ev is None:
                return self._engine.require(contract_id)
            return self._persist_contract_event(ev, idempotency_key=idempotency_key)

    def activate(
        self,
        contract_id: str,
        *,
        expected_version: int | None = None,
        idempotency_key: str | None = None,
        now: int | None = None,
    ) -> Contract:
        with self._lock:
            seen = self._seen(idempotency_key)
            if seen is not None:
                return self._engine.require(seen["id"])
            ev = self._engine.prepare_activate(
                contract_id, now=self._at(now), expected_version=expected_version
            )
            return self._persist_contract_event(
                ev, extra={"token_id": new_id()}, idempotency_key=idempotency_key
            )

    def terminate(
        self,
        contract_id: str,
        actor_id: str,
        reason: str,
        *,
        expected_version: int | None = None,
        idempotency_key: str | None = None,
        now: int | None = None,
    ) -> Contract:
        with self._lock:
            seen = self._seen(idempotency_key)
            if seen is not None:
                return self._engine.require(seen["id"])
            ev = self._engine.prepare_terminate(
                contract_id,
                actor_id,
                reason,
                now=self._at(now),
                expected_version=expected_version,
            )
            return self._persist_contract_event(ev, idempotency_key=idempotency_key)

    def cancel_unpaid(
        self, contract_id: str, actor_id: str, *, now: int | None = None
    ) -> Contract:
        with self._lock:
            at = self._at(now)
            ev = self._engine.prepare_cancel_unpaid(contract_id, actor_id, now=at)
            hold_state = self._escrow.state_for_contract(contract_id)
            contract = self._persist_contract_event(ev, extra={"anchored": True})
            if hold_state == "Held":
                # the consumer paid but the deal died: money goes back
                hold = self._escrow.holds_for_contract(contract_id)[-1]
                esc_ev = self._escrow.prepare_refund(hold.hold_id, now=at)
                self._persist("escrow", esc_ev.kind, {**esc_ev.data, "at": at}, at, None)
            return contract

    def tick_expiry(self, *, now: int | None = None) -> list[Contract]:
        with self._lock:
            at = self._at(now)
            expired = []
            for ev in self._engine.prepare_expiry(at):
                expired.append(self._persist_contract_event(ev))
            return expired

    def get_contract(self, contract_id: str) -> Contract:
        return self._engine.require(contract_id)

    def contracts_for_party(self, party_id: str) -> list[Contract]:
        return [
            c for c in self._engine.all_contracts() if party_id in c.parties()
        ]

    def negotiation_events(self, contract_id: str) -> list[NegotiationEvent]:
        return self._engine.events_for(contract_id)

    def validity_report(self, contract_id: str, *, now: int | None = None) -> ValidityReport:
        return self._engine.validity_report(
            contract_id,
            self._at(now),
            self._ledger.latest_status_record(contract_id),
        )

    # --- escrow commands ---

    def deposit(
        self,
        party_id: str,
        amount: int,
        *,
        idempotency_key: str | None = None,
        now: int | None = None,
    ) -> int:
        with self._lock:
            seen = self._seen(idempotency_key)
            if seen is not None:
                return self._escrow.balance(seen["id"])
            at = self._at(now)
            ev = self._escrow.prepare_deposit(party_id, amount, now=at)
            self._persist("escrow", ev.kind, {**ev.data, "at": at}, at, idempotency_key)
            return self._escrow.balance(party_id)

    def balance(self, party_id: str) -> int:
        return self._escrow.balance(party_id)

    def place_hold(
        self,
        contract_id: str,
        payer_id: str,
        *,
        idempotency_key: str | None = None,
        now: int | None = None,
    ) -> EscrowHold:
        with self._lock:
            seen = self._seen(idempotency_key)
            if seen is not None:
                return self._escrow.require_hold(seen["id"])
            at = self._at(now)
            ev = self._escrow.prepare_hold(contract_id, payer_id, now=at)
            hold = self._persist("escrow", ev.kind, {**ev.data, "at": at}, at, idempotency_key)
            assert isinstance(hold, EscrowHold)
            return hold

    def provider_confirm(
        self,
        hold_id: str,
        provider_id: str,
        *,
        idempotency_key: str | None = None,
        now: int | None = None,
    ) -> EscrowHold:
        with self._lock:
            seen = self._seen(idempotency_key)
            if seen is not None:
                return self._escrow.require_hold(seen["id"])
            at = self._at(now)
            ev = self._escrow.prepare_confirm(hold_id, provider_id, now=at)
            hold = self._persist("escrow", ev.kind, {**ev.data, "at": at}, at, idempotency_key)
            assert isinstance(hold, EscrowHold)
            return hold

    def claim_bypass(
        self,
        hold_id: str,
        consumer_id: str,
        *,
        proof_signature: str | None = None,
        idempotency_key: str | None = None,
        now: int | None = None,
    ) -> EscrowHold:
        """Presents the stored payment proof unless an explicit one is given."""
        with self._lock:
            seen = self._seen(idempotency_key)
            if seen is not None:
                return self._escrow.require_hold(seen["id"])
            at = self._at(now)
            stored = self._escrow.require_hold(hold_id)
            proof = PaymentProof(
                hold_id=hold_id,
                payer=consumer_id,
                signature=proof_signature or stored.proof.signature,
            )
            ev = self._escrow.prepare_bypass(hold_id, consumer_id, proof, now=at)
            hold = self._persist("escrow", ev.kind, {**ev.data, "at": at}, at, idempotency_key)
            assert isinstance(hold, EscrowHold)
            return hold

    def refund(
        self,
        hold_id: str,
        *,
        idempotency_key: str | None = None,
        now: int | None = None,
    ) -> EscrowHold:
        with self._lock:
            seen = self._seen(idempotency_key)
            if seen is not None:
                return self._escrow.require_hold(seen["id"])
            at = self._at(now)
            ev = self._escrow.prepare_refund(hold_id, now=at)
            hold = self._persist("escrow", ev.kind, {**ev.data, "at": at}, at, idempotency_key)
            assert isinstance(hold, EscrowHold)
            return hold

    def get_hold(self, hold_id: str) -> EscrowHold:
        return self._escrow.require_hold(hold_id)

    def holds_for_contract(self, contract_id: str) -> list[EscrowHold]:
        return self._escrow.holds_for_contract(contract_id)

    def escrow_state(self, contract_id: str) -> str | None:
        return self._escrow.state_for_contract(contract_id)

    def dispute_flags(self) -> list[DisputeFlag]:
        return self._escrow.flags()

    # --- ledger queries ---

    def ledger_verify(self) -> ChainReport:
        return self._ledger.verify_chain()

    def ledger_query(self, contract_id: str) -> list[ContractRecord]:
        return self._ledger.query_contract(contract_id)

    def ledger_height(self) -> int:
        return self._ledger.height

    # --- access tokens ---

    def token_for_contract(self, contract_id: str) -> AccessToken | None:
        token_id = self._token_by_contract.get(contract_id)
        return self._tokens.get(token_id) if token_id else None

    def check_token(self, token_id: str, *, now: int | None = None) -> TokenStatus:
        token = self._tokens.get(token_id)
        if token is None:
            raise UnknownToken(f"no access token {token_id!r}")
        at = self._at(now)
        contract = self._engine.get(token.contract_id)
        if token.revoked:
            reason = "revoked"
        elif at >= token.expires_at:
            reason = "expired"
        elif contract is None or contract.status is not ContractStatus.ACTIVE:
            reason = "contract_not_active"
        else:
            reason = "ok"
        return TokenStatus(token=token, valid=reason == "ok", reason=reason)

    # --- whole-state snapshot (replay determinism oracle surface) ---

    def state_document(self) -> dict:
        contracts = []
        for c in self._engine.all_contracts():
            contracts.append(
                {
                    "document": c.to_document(),
                    "turn": c.turn,
                    "salt": c.salt,
                    "created_at": c.created_at,
                    "accepted_at": c.accepted_at,
                    "signatures": {
                        s.party_id: {"signature": s.signature, "version": s.version}
                        for s in c.signatures
                    },
                }
            )
        return {
            "parties": [
                {
                    "party_id": p.party_id,
                    "display_name": p.display_name,
                    "role": p.role.value,
                    "industry": p.industry,
                    "public_key": p.public_key,
                }
                for p in self._parties.all()
            ],
            "catalog": [
                {
                    "asset": asset_document(e.asset),
                    "policy": policy_document(e.policy),
                    "listed_at": e.listed_at,
                    "active": e.active,
                }
                for e in self._catalog.all_entries()
            ],
            "contracts": contracts,
            "holds": [h.to_document() for h in self._escrow.holds()],
            "balances": dict(sorted(self._escrow.balances().items())),
            "total_deposited": self._escrow.total_deposited(),
            "dispute_flags": [f.to_document() for f in self._escrow.flags()],
            "tokens": [
                self._tokens[tid].to_document() for tid in sorted(self._tokens)
            ],
            "ledger_block_hashes": self._ledger.block_hashes(),
            "event_count": self._store.next_sequence,
        }

    def state_digest(self) -> str:
        return canonicalize(self.state_document()).digest_hex


def _asset_from_document(obj: dict) -> DataAsset:
    return DataAsset(
        asset_id=obj["asset_id"],
        description=obj.get("description", ""),
        provider=obj["provider"],
        encrypted_columns=tuple(obj.get("encrypted_columns", ())),
        unencrypted_columns=tuple(obj.get("unencrypted_columns", ())),
        data_model_entities=tuple(obj.get("data_model_entities", ())),
        creator=obj.get("creator", ""),
        contributor=obj.get("contributor", ""),
        version=obj.get("version", "1.0"),
        created_date=obj.get("created_date"),
        modified_date=obj.get("modified_date"),
        published_date=obj.get("published_date"),
    )


def _policy_from_document(obj: dict, vocabulary: TermVocabulary) -> Policy:
    terms = []
    for category_name, keys in obj["terms"].items():
        for key, actions in keys.items():
            for action_slot, body in actions.items():
                terms.append(
                    term_from_json(
                        {
                            "category": category_name,
                            "kind": body["kind"],
                            "key": key,
                            "action": None if action_slot == "-" else action_slot,
                            "value": body["value"],
                        },
                        vocabulary,
                    )
                )
    return Policy(
        policy_id=obj["policy_id"],
        asset_id=obj["asset_id"],
        terms=tuple(terms),
        sensitivity_level=obj["sensitivity_level"],
        price_listing=obj["price_listing"],
        visibility_rules=tuple(
            VisibilityRule(r["attribute"], tuple(r["allowed_values"]))
            for r in obj.get("visibility_rules", [])
        ),
        attached_at=obj.get("attached_at", 0),
    )
