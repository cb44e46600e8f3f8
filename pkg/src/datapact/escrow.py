"""Simulated accounts and escrow gating contract activation.

Money is integer micro-credits. A hold moves the contract price out of the
consumer's account; it resolves exactly once:

    Held -> Released        provider confirms, payee credited
    Held -> BypassGranted   consumer proves payment after the timeout window;
                            payee still credited, dispute flagged
    Held -> Refunded        contract died first, payer restored

The sum of balances plus held amounts always equals total deposits.

Commands follow the same prepare/apply split as the contract engine so the
broker can persist events between validation and state change.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, replace
from enum import Enum
from typing import Callable

from . import signing
from .canonical import canonical_bytes
from .contracts import Contract, ContractStatus, TERMINAL_STATUSES
from .errors import (
    BadProof,
    InsufficientFunds,
    NotTheConsumer,
    TooEarly,
    UnknownContract,
    UnknownHold,
    WrongParty,
    WrongState,
    WrongStatus,
)
from .model import PartyDirectory, new_id


class HoldState(str, Enum):
    HELD = "Held"
    RELEASED = "Released"
    REFUNDED = "Refunded"
    BYPASS_GRANTED = "BypassGranted"


def proof_message(contract_id: str, amount: int, created_at: int) -> bytes:
    """The receipt preimage the payer signs when funds enter escrow."""
    return canonical_bytes(
        {"contract_id": contract_id, "amount": amount, "created_at": created_at}
    )


@dataclass(frozen=True)
class PaymentProof:
    hold_id: str
    payer: str
    signature: str  # hex, payer's key over proof_message(...)

    def to_document(self) -> dict:
        return {"hold_id": self.hold_id, "payer": self.payer, "signature": self.signature}


@dataclass(frozen=True)
class EscrowHold:
    hold_id: str
    contract_id: str
    payer: str
    payee: str
    amount: int
    state: HoldState
    created_at: int
    proof: PaymentProof
    resolved_at: int | None = None

    def to_document(self) -> dict:
        return {
            "hold_id": self.hold_id,
            "contract_id": self.contract_id,
            "payer": self.payer,
            "payee": self.payee,
            "amount": self.amount,
            "state": self.state.value,
            "created_at": self.created_at,
            "resolved_at": self.resolved_at,
            "proof": self.proof.to_document(),
        }


@dataclass(frozen=True)
class DisputeFlag:
    """Recorded against a provider who never confirmed a paid hold."""

    flag_id: str
    contract_id: str
    hold_id: str
    provider: str
    consumer: str
    claimed_at: int

    def to_document(self) -> dict:
        return {
            "flag_id": self.flag_id,
            "contract_id": self.contract_id,
            "hold_id": self.hold_id,
            "provider": self.provider,
            "consumer": self.consumer,
            "claimed_at": self.claimed_at,
        }


@dataclass(frozen=True)
class EscrowEvent:
    """Prepared escrow state change, persisted by the broker before applying."""

    kind: str  # deposited | hold_placed | hold_confirmed | hold_bypassed | hold_refunded
    data: dict
    at: int


class EscrowBank:
    def __init__(
        self,
        *,
        parties: PartyDirectory,
        lookup_contract: Callable[[str], Contract | None],
        bypass_timeout: int = 72 * 3600,
    ):
        self._parties = parties
        self._lookup_contract = lookup_contract
        self._bypass_timeout = bypass_timeout
        self._balances: dict[str, int] = {}
        self._holds: dict[str, EscrowHold] = {}
        self._flags: list[DisputeFlag] = []
        self._total_deposited = 0
        self._lock = threading.Lock()

    # --- queries ---

    def balance(self, party_id: str) -> int:
        return self._balances.get(party_id, 0)

    def balances(self) -> dict[str, int]:
        return dict(self._balances)

    def hold(self, hold_id: str) -> EscrowHold | None:
        return self._holds.get(hold_id)

    def require_hold(self, hold_id: str) -> EscrowHold:
        hold = self._holds.get(hold_id)
        if hold is None:
            raise UnknownHold(f"no escrow hold {hold_id!r}")
        return hold

    def holds(self) -> list[EscrowHold]:
        return sorted(self._holds.values(), key=lambda h: h.hold_id)

    def holds_for_contract(self, contract_id: str) -> list[EscrowHold]:
        return [h for h in self.holds() if h.contract_id == contract_id]

    def flags(self) -> list[DisputeFlag]:
        return list(self._flags)

    def state_for_contract(self, contract_id: str) -> str | None:
        """Latest non-refunded hold state, feeding the activation gate."""
        states = [h for h in self.holds_for_contract(contract_id)]
        if not states:
            return None
        for hold in states:
            if hold.state in (HoldState.RELEASED, HoldState.BYPASS_GRANTED):
                return hold.state.value
        live = [h for h in states if h.state is HoldState.HELD]
        if live:
            return HoldState.HELD.value
        return HoldState.REFUNDED.value

    def total_deposited(self) -> int:
        return self._total_deposited

    def conserved(self) -> bool:
        held = sum(h.amount for h in self._holds.values() if h.state is HoldState.HELD)
        return sum(self._balances.values()) + held == self._total_deposited

    # --- prepare phase ---

    def prepare_deposit(self, party_id: str, amount: int, *, now: int) -> EscrowEvent:
        self._parties.require(party_id)
        if amount <= 0:
            raise ValueError("deposit must be positive")
        return EscrowEvent("deposited", {"party_id": party_id, "amount": amount}, now)

    def prepare_hold(
        self, contract_id: str, payer_id: str, *, now: int, hold_id: str | None = None
    ) -> EscrowEvent:
        contract = self._lookup_contract(contract_id)
        if contract is None:
            raise UnknownContract(f"no contract {contract_id!r}")
        self._parties.require(payer_id)
        if contract.status is not ContractStatus.ACCEPTED:
            raise WrongStatus(
                f"contract is {contract.status.value}; escrow needs Accepted"
            )
        if payer_id != contract.consumer:
            raise NotTheConsumer("only the contract consumer can fund escrow")
        existing = self.state_for_contract(contract_id)
        if existing in ("Held", "Released", "BypassGranted"):
            raise WrongState(f"contract already has escrow in state {existing}")
        if self.balance(payer_id) < contract.price:
            raise InsufficientFunds(
                f"balance {self.balance(payer_id)} below price {contract.price}"
            )
        hid = hold_id or new_id()
        signature = signing.sign(
            self._parties.private_key(payer_id),
            proof_message(contract_id, contract.price, now),
        )
        return EscrowEvent(
            "hold_placed",
            {
                "hold_id": hid,
                "contract_id": contract_id,
                "payer": payer_id,
                "payee": contract.provider,
                "amount": contract.price,
                "proof_signature": signature,
            },
            now,
        )

    def prepare_confirm(self, hold_id: str, provider_id: str, *, now: int) -> EscrowEvent:
        hold = self.require_hold(hold_id)
        if provider_id != hold.payee:
            raise WrongParty("only the contract provider can confirm the hold")
        if hold.state is not HoldState.HELD:
            raise WrongState(f"hold is {hold.state.value}, not Held")
        return EscrowEvent("hold_confirmed", {"hold_id": hold_id}, now)

    def prepare_bypass(
        self, hold_id: str, consumer_id: str, proof: PaymentProof, *, now: int
    ) -> EscrowEvent:
        hold = self.require_hold(hold_id)
        if consumer_id != hold.payer:
            raise WrongParty("only the paying consumer can claim the bypass")
        if hold.state is not HoldState.HELD:
            raise WrongState(f"hold is {hold.state.value}, not Held")
        if now - hold.created_at < self._bypass_timeout:
            raise TooEarly(
                f"bypass opens {self._bypass_timeout}s after the hold was placed"
            )
        payer = self._parties.require(hold.payer)
        message = proof_message(hold.contract_id, hold.amount, hold.created_at)
        if proof.hold_id != hold_id or not signing.verify(
            payer.public_key, proof.signature, message
        ):
            raise BadProof("payment proof does not verify for this hold")
        flag = DisputeFlag(
            flag_id=new_id(),
            contract_id=hold.contract_id,
            hold_id=hold_id,
            provider=hold.payee,
            consumer=hold.payer,
            claimed_at=now,
        )
        return EscrowEvent(
            "hold_bypassed", {"hold_id": hold_id, "flag": flag.to_document()}, now
        )

    def prepare_refund(self, hold_id: str, *, now: int) -> EscrowEvent:
        hold = self.require_hold(hold_id)
        if hold.state is not HoldState.HELD:
            raise WrongState(f"hold is {hold.state.value}, not Held")
        contract = self._lookup_contract(hold.contract_id)
        if contract is not None and contract.status not in TERMINAL_STATUSES:
            raise WrongState(
                "refund needs the contract in a terminal status before release"
            )
        return EscrowEvent("hold_refunded", {"hold_id": hold_id}, now)

    # --- apply phase ---

    def apply_event(self, event: EscrowEvent) -> EscrowHold | DisputeFlag | None:
        with self._lock:
            data = event.data
            if event.kind == "deposited":
                party = data["party_id"]
                self._balances[party] = self.balance(party) + data["amount"]
                self._total_deposited += data["amount"]
                return None
            if event.kind == "hold_placed":
                payer, amount = data["payer"], data["amount"]
                self._balances[payer] = self.balance(payer) - amount
                proof = PaymentProof(
                    hold_id=data["hold_id"],
                    payer=payer,
                    signature=data["proof_signature"],
                )
                hold = EscrowHold(
                    hold_id=data["hold_id"],
                    contract_id=data["contract_id"],
                    payer=payer,
                    payee=data["payee"],
                    amount=amount,
                    state=HoldState.HELD,
                    created_at=event.at,
                    proof=proof,
                )
                self._holds[hold.hold_id] = hold
                return hold
            if event.kind == "hold_confirmed":
                hold = self._holds[data["hold_id"]]
                self._balances[hold.payee] = self.balance(hold.payee) + hold.amount
                hold = replace(hold, state=HoldState.RELEASED, resolved_at=event.at)
                self._holds[hold.hold_id] = hold
                return hold
            if event.kind == "hold_bypassed":
                hold = self._holds[data["hold_id"]]
                self._balances[hold.payee] = self.balance(hold.payee) + hold.amount
                hold = replace(hold, state=HoldState.BYPASS_GRANTED, resolved_at=event.at)
                self._holds[hold.hold_id] = hold
                flag_doc = data["flag"]
                self._flags.append(
                    DisputeFlag(
                        flag_id=flag_doc["flag_id"],
                        contract_id=flag_doc["contract_id"],
                        hold_id=flag_doc["hold_id"],
                        provider=flag_doc["provider"],
                        consumer=flag_doc["consumer"],
                        claimed_at=flag_doc["claimed_at"],
                    )
                )
                return hold
            if event.kind == "hold_refunded":
                hold = self._holds[data["hold_id"]]
                self._balances[hold.payer] = self.balance(hold.payer) + hold.amount
                hold = replace(hold, state=HoldState.REFUNDED, resolved_at=event.at)
                self._holds[hold.hold_id] = hold
                return hold
            raise ValueError(f"unhandled escrow event kind {event.kind!r}")

    # --- one-shot conveniences ---

    def deposit(self, party_id: str, amount: int, *, now: int) -> int:
        self.apply_event(self.prepare_deposit(party_id, amount, now=now))
        return self.balance(party_id)

    def place_hold(self, contract_id: str, payer_id: str, *, now: int) -> EscrowHold:
        result = self.apply_event(self.prepare_hold(contract_id, payer_id, now=now))
        assert isinstance(result, EscrowHold)
        return result

    def provider_confirm(self, hold_id: str, provider_id: str, *, now: int) -> EscrowHold:
        result = self.apply_event(self.prepare_confirm(hold_id, provider_id, now=now))
        assert isinstance(result, EscrowHold)
        return result

    def claim_bypass(
        self, hold_id: str, consumer_id: str, proof: PaymentProof, *, now: int
    ) -> EscrowHold:
        result = self.apply_event(self.prepare_bypass(hold_id, consumer_id, proof, now=now))
        assert isinstance(result, EscrowHold)
        return result

    def refund(self, hold_id: str, *, now: int) -> EscrowHold:
        result = self.apply_event(self.prepare_refund(hold_id, now=now))
        assert isinstance(result, EscrowHold)
        return result
