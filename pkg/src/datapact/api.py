"""Network API over the broker.

Resource-oriented JSON endpoints; every request authenticates with an
``X-API-Key`` header bound to a party (or listed as an admin key in the
config). Mutating endpoints accept an ``Idempotency-Key`` header: retrying a
request with the same key never duplicates a state change. Domain errors map
to structured bodies ``{"error": {"code", "message"}}`` with stable codes.
"""

from __future__ import annotations

from dataclasses import dataclass

from fastapi import Depends, FastAPI, Header, Request
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from .broker import AccessToken, Broker, TokenStatus
from .catalog import CatalogEntry, SearchQuery
from .contracts import Contract, NegotiationEvent, ProposalDiff, ValidityReport
from .errors import (
    BadProof,
    BadSignature,
    BrokerError,
    ConflictingTerms,
    Forbidden,
    MissingPrivacyTerm,
    NonCanonicalizable,
    NonNegotiableKey,
    Unauthenticated,
    UnknownAsset,
    UnknownContract,
    UnknownHold,
    UnknownParty,
    UnknownToken,
    VocabularyViolation,
)
from .escrow import EscrowHold
from .ledger import ContractRecord
from .model import Party, PolicyCategory
from .policy import asset_document, policy_document, term_from_json

_NOT_FOUND = (UnknownParty, UnknownAsset, UnknownContract, UnknownHold, UnknownToken)
_UNPROCESSABLE = (
    VocabularyViolation,
    ConflictingTerms,
    MissingPrivacyTerm,
    NonNegotiableKey,
    NonCanonicalizable,
)


def _status_for(exc: BrokerError) -> int:
    if isinstance(exc, Unauthenticated):
        return 401
    if isinstance(exc, Forbidden):
        return 403
    if isinstance(exc, _NOT_FOUND):
        return 404
    if isinstance(exc, _UNPROCESSABLE):
        return 422
    if isinstance(exc, (BadSignature, BadProof)):
        return 400
    return 409


@dataclass(frozen=True)
class Identity:
    party: Party | None  # None for admin keys
    is_admin: bool

    @property
    def party_id(self) -> str:
        if self.party is None:
            raise Forbidden("this operation needs a party identity, not an admin key")
        return self.party.party_id


# --- request bodies ---


class RegisterPartyBody(BaseModel):
    display_name: str
    role: str
    industry: str


class RegisterAssetBody(BaseModel):
    asset: dict
    policy: dict


class SearchBody(BaseModel):
    text: str | None = None
    entity_tags: list[str] | None = None
    provider: str | None = None
    category_filters: list[list] | None = None  # [category, key, rendered-value]
    purpose: str = ""


class DraftBody(BaseModel):
    asset_id: str
    consumer: str
    price: int | None = None
    initial_terms: list[dict] = Field(default_factory=list)
    purpose: str = "trade"
    temporal_validity: dict | None = None  # {"start", "end"}
    spatial_validity: list[str] | None = None


class ProposalBody(BaseModel):
    price: int | None = None
    temporal_validity: dict | None = None
    spatial_validity: list[str] | None = None
    set_terms: list[dict] = Field(default_factory=list)
    remove_terms: list[dict] = Field(default_factory=list)
    expected_version: int | None = None


class ResponseBody(BaseModel):
    decision: str
    expected_version: int | None = None


class SignatureBody(BaseModel):
    signature: str | None = None


class TerminationBody(BaseModel):
    reason: str = ""


class DepositBody(BaseModel):
    party_id: str | None = None  # defaults to the acting party
    amount: int


class HoldBody(BaseModel):
    contract_id: str


class BypassBody(BaseModel):
    proof_signature: str | None = None


class TickBody(BaseModel):
    now: int | None = None


# --- views ---


def party_view(party: Party) -> dict:
    return {
        "party_id": party.party_id,
        "display_name": party.display_name,
        "role": party.role.value,
        "industry": party.industry,
        "public_key": party.public_key,
    }


def entry_view(entry: CatalogEntry) -> dict:
    return {
        "asset": asset_document(entry.asset),
        "policy": policy_document(entry.policy),
        "listed_at": entry.listed_at,
        "active": entry.active,
    }


def contract_view(contract: Contract, broker: Broker) -> dict:
    view = contract.to_document()
    view["turn"] = contract.turn
    view["created_at"] = contract.created_at
    view["accepted_at"] = contract.accepted_at
    view["salt"] = contract.salt
    view["signatures"] = {
        s.party_id: {"signature": s.signature, "version": s.version}
        for s in contract.signatures
    }
    view["escrow_state"] = broker.escrow_state(contract.contract_id)
    holds = broker.holds_for_contract(contract.contract_id)
    view["hold_id"] = holds[-1].hold_id if holds else None
    return view


def event_view(event: NegotiationEvent) -> dict:
    return event.to_json()


def hold_view(hold: EscrowHold) -> dict:
    return hold.to_document()


def record_view(record: ContractRecord) -> dict:
    return record.to_document()


def report_view(report: ValidityReport) -> dict:
    return report.to_document()


def token_view(status: TokenStatus) -> dict:
    return status.to_document()


def _term_tuples(broker: Broker, raw_terms: list[dict]):
    return tuple(term_from_json(t, broker.vocabulary) for t in raw_terms)


def _diff_from_body(broker: Broker, body: ProposalBody) -> ProposalDiff:
    from .model import UsageAction

    tv = body.temporal_validity
    return ProposalDiff(
        price=body.price,
        temporal_validity=None if tv is None else (tv["start"], tv["end"]),
        spatial_validity=None if body.spatial_validity is None else tuple(body.spatial_validity),
        set_terms=_term_tuples(broker, body.set_terms),
        remove_terms=tuple(
            (
                PolicyCategory(r["category"]),
                r["key"],
                UsageAction(r["action"]) if r.get("action") else None,
            )
            for r in body.remove_terms
        ),
    )


def create_app(broker: Broker, admin_api_keys: tuple[str, ...] = ()) -> FastAPI:
    app = FastAPI(title="datapact broker", version="0.1.0")
    admin_keys = set(admin_api_keys)

    def identity(x_api_key: str | None = Header(default=None)) -> Identity:
        if x_api_key is None:
            raise Unauthenticated("missing X-API-Key header")
        if x_api_key in admin_keys:
            return Identity(party=None, is_admin=True)
        party = broker.party_for_api_key(x_api_key)
        if party is None:
            raise Unauthenticated("unrecognized API key")
        return Identity(party=party, is_admin=False)

    def idempotency_key(idempotency_key: str | None = Header(default=None)) -> str | None:
        return idempotency_key

    @app.exception_handler(BrokerError)
    async def broker_error_handler(request: Request, exc: BrokerError):
        return JSONResponse(
            status_code=_status_for(exc),
            content={"error": {"code": exc.code, "message": exc.message}},
        )

    @app.exception_handler(ValueError)
    async def value_error_handler(request: Request, exc: ValueError):
        return JSONResponse(
            status_code=422,
            content={"error": {"code": "invalid_input", "message": str(exc)}},
        )

    def _require_party_of(contract: Contract, ident: Identity) -> None:
        if ident.is_admin:
            return
        if ident.party_id not in contract.parties():
            raise Forbidden("not a party to this contract")

    # --- parties ---

    @app.post("/parties", status_code=201)
    def register_party(
        body: RegisterPartyBody,
        ident: Identity = Depends(identity),
        idem: str | None = Depends(idempotency_key),
    ):
        if not ident.is_admin:
            raise Forbidden("party registration needs an admin key")
        party, api_key = broker.register_party(
            body.display_name, body.role, body.industry, idempotency_key=idem
        )
        return {"party": party_view(party), "api_key": api_key}

    @app.get("/parties")
    def list_parties(ident: Identity = Depends(identity)):
        return {"parties": [party_view(p) for p in broker.parties()]}

    @app.get("/whoami")
    def whoami(ident: Identity = Depends(identity)):
        if ident.is_admin:
            return {"admin": True, "party": None}
        return {"admin": False, "party": party_view(ident.party)}

    # --- assets & catalog ---

    @app.post("/assets", status_code=201)
    def register_asset(
        body: RegisterAssetBody,
        ident: Identity = Depends(identity),
        idem: str | None = Depends(idempotency_key),
    ):
        entry = broker.register_asset(
            ident.party_id, body.asset, body.policy, idempotency_key=idem
        )
        return entry_view(entry)

    @app.delete("/assets/{asset_id}")
    def deregister_asset(asset_id: str, ident: Identity = Depends(identity)):
        return entry_view(broker.deregister_asset(ident.party_id, asset_id))

    @app.post("/catalog/search")
    def search(body: SearchBody, ident: Identity = Depends(identity)):
        query = SearchQuery(
            requester=ident.party_id,
            purpose=body.purpose,
            text=body.text,
            entity_tags=None if body.entity_tags is None else tuple(body.entity_tags),
            provider=body.provider,
            category_filters=(
                None
                if body.category_filters is None
                else tuple(
                    (PolicyCategory(c), k, v) for c, k, v in body.category_filters
                )
            ),
        )
        return {"results": [entry_view(e) for e in broker.search(query)]}

    # --- contracts ---

    @app.post("/contracts", status_code=201)
    def draft_contract(
        body: DraftBody,
        ident: Identity = Depends(identity),
        idem: str | None = Depends(idempotency_key),
    ):
        tv = body.temporal_validity
        contract = broker.draft_contract(
            ident.party_id,
            body.asset_id,
            body.consumer,
            _term_tuples(broker, body.initial_terms),
            body.price,
            purpose=body.purpose,
            temporal_validity=None if tv is None else (tv["start"], tv["end"]),
            spatial_validity=(
                None if body.spatial_validity is None else tuple(body.spatial_validity)
            ),
            idempotency_key=idem,
        )
        return contract_view(contract, broker)

    @app.get("/contracts")
    def list_contracts(ident: Identity = Depends(identity)):
        contracts = broker.contracts_for_party(ident.party_id)
        return {"contracts": [contract_view(c, broker) for c in contracts]}

    @app.get("/contracts/{contract_id}")
    def get_contract(contract_id: str, ident: Identity = Depends(identity)):
        contract = broker.get_contract(contract_id)
        _require_party_of(contract, ident)
        return contract_view(contract, broker)

    @app.get("/contracts/{contract_id}/events")
    def get_contract_events(contract_id: str, ident: Identity = Depends(identity)):
        contract = broker.get_contract(contract_id)
        _require_party_of(contract, ident)
        return {"events": [event_view(e) for e in broker.negotiation_events(contract_id)]}

    @app.post("/contracts/{contract_id}/proposals")
    def submit_proposal(
        contract_id: str,
        body: ProposalBody,
        ident: Identity = Depends(identity),
        idem: str | None = Depends(idempotency_key),
    ):
        contract = broker.submit_proposal(
            contract_id,
            ident.party_id,
            _diff_from_body(broker, body),
            expected_version=body.expected_version,
            idempotency_key=idem,
        )
        return contract_view(contract, broker)

    @app.post("/contracts/{contract_id}/response")
    def respond(
        contract_id: str,
        body: ResponseBody,
        ident: Identity = Depends(identity),
        idem: str | None = Depends(idempotency_key),
    ):
        contract = broker.respond(
            contract_id,
            ident.party_id,
            body.decision,
            expected_version=body.expected_version,
            idempotency_key=idem,
        )
        return contract_view(contract, broker)

    @app.post("/contracts/{contract_id}/signature")
    def sign(
        contract_id: str,
        body: SignatureBody,
        ident: Identity = Depends(identity),
        idem: str | None = Depends(idempotency_key),
    ):
        contract = broker.sign_contract(
            contract_id, ident.party_id, body.signature, idempotency_key=idem
        )
        return contract_view(contract, broker)

    @app.post("/contracts/{contract_id}/activation")
    def activate(
        contract_id: str,
        ident: Identity = Depends(identity),
        idem: str | None = Depends(idempotency_key),
    ):
        _require_party_of(broker.get_contract(contract_id), ident)
        return contract_view(broker.activate(contract_id, idempotency_key=idem), broker)

    @app.post("/contracts/{contract_id}/termination")
    def terminate(
        contract_id: str,
        body: TerminationBody,
        ident: Identity = Depends(identity),
        idem: str | None = Depends(idempotency_key),
    ):
        contract = broker.terminate(
            contract_id, ident.party_id, body.reason, idempotency_key=idem
        )
        return contract_view(contract, broker)

    @app.post("/contracts/{contract_id}/cancellation")
    def cancel(contract_id: str, ident: Identity = Depends(identity)):
        return contract_view(
            broker.cancel_unpaid(contract_id, ident.party_id), broker
        )

    @app.get("/contracts/{contract_id}/validity")
    def validity(contract_id: str, ident: Identity = Depends(identity)):
        contract = broker.get_contract(contract_id)
        _require_party_of(contract, ident)
        return report_view(broker.validity_report(contract_id))

    # --- escrow ---

    @app.post("/escrow/deposits", status_code=201)
    def deposit(
        body: DepositBody,
        ident: Identity = Depends(identity),
        idem: str | None = Depends(idempotency_key),
    ):
        target = body.party_id
        if target is None:
            target = ident.party_id
        elif not ident.is_admin and target != ident.party_id:
            raise Forbidden("deposits go to your own account (admins excepted)")
        balance = broker.deposit(target, body.amount, idempotency_key=idem)
        return {"party_id": target, "balance": balance}

    @app.get("/escrow/accounts/{party_id}")
    def account(party_id: str, ident: Identity = Depends(identity)):
        if not ident.is_admin and party_id != ident.party_id:
            raise Forbidden("only your own balance is visible")
        return {"party_id": party_id, "balance": broker.balance(party_id)}

    @app.post("/escrow/holds", status_code=201)
    def place_hold(
        body: HoldBody,
        ident: Identity = Depends(identity),
        idem: str | None = Depends(idempotency_key),
    ):
        return hold_view(
            broker.place_hold(body.contract_id, ident.party_id, idempotency_key=idem)
        )

    @app.get("/escrow/holds/{hold_id}")
    def get_hold(hold_id: str, ident: Identity = Depends(identity)):
        hold = broker.get_hold(hold_id)
        if not ident.is_admin and ident.party_id not in (hold.payer, hold.payee):
            raise Forbidden("not a party to this hold")
        return hold_view(hold)

    @app.post("/escrow/holds/{hold_id}/confirmation")
    def confirm(
        hold_id: str,
        ident: Identity = Depends(identity),
        idem: str | None = Depends(idempotency_key),
    ):
        return hold_view(
            broker.provider_confirm(hold_id, ident.party_id, idempotency_key=idem)
        )

    @app.post("/escrow/holds/{hold_id}/bypass")
    def bypass(
        hold_id: str,
        body: BypassBody,
        ident: Identity = Depends(identity),
        idem: str | None = Depends(idempotency_key),
    ):
        return hold_view(
            broker.claim_bypass(
                hold_id,
                ident.party_id,
                proof_signature=body.proof_signature,
                idempotency_key=idem,
            )
        )

    @app.post("/escrow/holds/{hold_id}/refund")
    def refund(
        hold_id: str,
        ident: Identity = Depends(identity),
        idem: str | None = Depends(idempotency_key),
    ):
        hold = broker.get_hold(hold_id)
        if not ident.is_admin and ident.party_id not in (hold.payer, hold.payee):
            raise Forbidden("not a party to this hold")
        return hold_view(broker.refund(hold_id, idempotency_key=idem))

    # --- ledger & tokens & maintenance ---

    @app.get("/ledger/verify")
    def ledger_verify(ident: Identity = Depends(identity)):
        return broker.ledger_verify().to_document()

    @app.get("/ledger/contracts/{contract_id}")
    def ledger_query(contract_id: str, ident: Identity = Depends(identity)):
        return {"records": [record_view(r) for r in broker.ledger_query(contract_id)]}

    @app.get("/tokens/{token_id}")
    def check_token(token_id: str, ident: Identity = Depends(identity)):
        return token_view(broker.check_token(token_id))

    @app.post("/maintenance/expiry-ticks")
    def tick(body: TickBody, ident: Identity = Depends(identity)):
        if not ident.is_admin:
            raise Forbidden("expiry ticks need an admin key")
        expired = broker.tick_expiry(now=body.now)
        return {"expired": [c.contract_id for c in expired]}

    return app


def serve(config) -> None:
    """Build the broker from config and serve until interrupted.

    Refuses to start (raises) on ConfigInvalid, StoreCorrupt, or ChainCorrupt.
    """
    import uvicorn

    broker = Broker(
        config.data_dir,
        bypass_timeout=config.bypass_timeout,
        payment_cancel_timeout=config.payment_cancel_timeout,
        vocabulary_path=config.vocabulary_path,
        disclosure_rules_path=config.disclosure_rules_path,
    )
    app = create_app(broker, admin_api_keys=config.admin_api_keys)
    uvicorn.run(app, host=config.listen_host, port=config.listen_port, log_level="info")
