"""Scripted multi-party brokerage scenarios.

A scenario is a JSON document: a name, a clock start, and a list of steps.
Steps register parties and assets, move money, negotiate contracts, advance
the simulated clock, and assert expectations (statuses, balances, ledger
verdicts). Symbolic refs ("prov", "c1") bind generated identifiers so steps
can refer to earlier results. The runner executes against a fresh broker and
returns a printable transcript; any failed step or expectation fails the run.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from .broker import Broker
from .catalog import SearchQuery
from .clock import ManualClock
from .contracts import ProposalDiff
from .errors import BrokerError
from .ledger import RECORD_DISPUTE_FLAG
from .policy import term_from_json

BUILTIN_SCENARIOS = ("happy_path", "reject_path", "expiry_path", "bypass_dispute")

DEFAULT_CLOCK_START = 1_750_000_000


class ScenarioFailure(Exception):
    pass


@dataclass
class ScenarioRun:
    name: str
    transcript: list[str] = field(default_factory=list)
    ok: bool = True

    def line(self, text: str) -> None:
        self.transcript.append(text)


def load_scenario(name_or_path: str) -> dict:
    """Resolve a built-in scenario name or a path to a scenario file."""
    if name_or_path in BUILTIN_SCENARIOS:
        text = (
            resources.files("datapact.data.scenarios")
            .joinpath(f"{name_or_path}.json")
            .read_text("utf-8")
        )
        return json.loads(text)
    path = Path(name_or_path)
    if not path.exists():
        raise ScenarioFailure(
            f"unknown scenario {name_or_path!r} (built-ins: {', '.join(BUILTIN_SCENARIOS)})"
        )
    return json.loads(path.read_text("utf-8"))


class _Runner:
    def __init__(self, broker: Broker, clock: ManualClock, run: ScenarioRun):
        self.broker = broker
        self.clock = clock
        self.run = run
        self.refs: dict[str, str] = {}  # symbolic ref -> generated id

    def party(self, ref: str) -> str:
        return self.refs[f"party:{ref}"]

    def execute(self, index: int, step: dict) -> None:
        op = step["op"]
        handler = getattr(self, f"op_{op}", None)
        if handler is None:
            raise ScenarioFailure(f"step {index}: unknown op {op!r}")
        expect_error = step.get("expect_error")
        try:
            summary = handler(step)
        except BrokerError as exc:
            if expect_error and exc.code == expect_error:
                self.run.line(f"{index:3d} {op:<16} expected error: {exc.code}")
                return
            raise ScenarioFailure(f"step {index} ({op}): [{exc.code}] {exc.message}") from exc
        if expect_error:
            raise ScenarioFailure(
                f"step {index} ({op}): expected error {expect_error!r}, but it succeeded"
            )
        self.run.line(f"{index:3d} {op:<16} {summary}")

    # --- setup ops ---

    def op_register_party(self, step: dict) -> str:
        party, _ = self.broker.register_party(
            step["display_name"], step["role"], step["industry"]
        )
        self.refs[f"party:{step['ref']}"] = party.party_id
        return f"{step['display_name']} ({step['role']}, {step['industry']})"

    def op_register_asset(self, step: dict) -> str:
        entry = self.broker.register_asset(
            self.party(step["as"]), step["asset"], step["policy"]
        )
        self.refs[f"asset:{step['ref']}"] = entry.asset.asset_id
        return f"{step['asset'].get('description', '?')!r} listed at {entry.policy.price_listing}"

    def op_deposit(self, step: dict) -> str:
        balance = self.broker.deposit(self.party(step["party"]), step["amount"])
        return f"{step['party']} +{step['amount']} -> balance {balance}"

    def op_advance_clock(self, step: dict) -> str:
        self.clock.advance(step["seconds"])
        return f"+{step['seconds']}s -> t={self.clock.now()}"

    # --- brokerage ops ---

    def op_search(self, step: dict) -> str:
        results = self.broker.search(
            SearchQuery(
                requester=self.party(step["as"]),
                purpose=step.get("purpose", "trade"),
                text=step.get("text"),
            )
        )
        if "expect_count" in step and len(results) != step["expect_count"]:
            raise ScenarioFailure(
                f"search expected {step['expect_count']} results, got {len(results)}"
            )
        return f"{len(results)} result(s)"

    def op_draft(self, step: dict) -> str:
        validity = None
        if "validity_days" in step:
            start = self.clock.now()
            validity = (start, start + step["validity_days"] * 86_400)
        terms = tuple(
            term_from_json(t, self.broker.vocabulary) for t in step.get("terms", [])
        )
        contract = self.broker.draft_contract(
            self.party(step["as"]),
            self.refs[f"asset:{step['asset']}"],
            self.party(step["consumer"]),
            terms,
            step.get("price"),
            temporal_validity=validity,
        )
        self.refs[f"contract:{step['ref']}"] = contract.contract_id
        return f"contract {step['ref']} v{contract.version} at price {contract.price}"

    def _contract_id(self, step: dict) -> str:
        return self.refs[f"contract:{step['contract']}"]

    def op_propose(self, step: dict) -> str:
        diff = ProposalDiff(
            price=step.get("price"),
            spatial_validity=(
                tuple(step["spatial_validity"]) if "spatial_validity" in step else None
            ),
            set_terms=tuple(
                term_from_json(t, self.broker.vocabulary) for t in step.get("set_terms", [])
            ),
        )
        contract = self.broker.submit_proposal(
            self._contract_id(step), self.party(step["as"]), diff
        )
        return f"v{contract.version}, turn -> {contract.turn}"

    def op_respond(self, step: dict) -> str:
        contract = self.broker.respond(
            self._contract_id(step), self.party(step["as"]), step["decision"]
        )
        return f"{step['decision']} -> {contract.status.value}"

    def op_sign(self, step: dict) -> str:
        contract = self.broker.sign_contract(self._contract_id(step), self.party(step["as"]))
        return f"{len(contract.signatures)}/2 signatures"

    def op_hold(self, step: dict) -> str:
        hold = self.broker.place_hold(self._contract_id(step), self.party(step["as"]))
        self.refs[f"hold:{step['ref']}"] = hold.hold_id
        return f"hold {step['ref']} of {hold.amount} placed"

    def op_confirm(self, step: dict) -> str:
        hold = self.broker.provider_confirm(
            self.refs[f"hold:{step['hold']}"], self.party(step["as"])
        )
        return f"hold {step['hold']} -> {hold.state.value}"

    def op_bypass(self, step: dict) -> str:
        hold = self.broker.claim_bypass(
            self.refs[f"hold:{step['hold']}"], self.party(step["as"])
        )
        return f"hold {step['hold']} -> {hold.state.value}, dispute flagged"

    def op_refund(self, step: dict) -> str:
        hold = self.broker.refund(self.refs[f"hold:{step['hold']}"])
        return f"hold {step['hold']} -> {hold.state.value}"

    def op_activate(self, step: dict) -> str:
        contract = self.broker.activate(self._contract_id(step))
        return f"-> {contract.status.value}, token granted"

    def op_terminate(self, step: dict) -> str:
        contract = self.broker.terminate(
            self._contract_id(step), self.party(step["as"]), step.get("reason", "")
        )
        return f"-> {contract.status.value}"

    def op_cancel(self, step: dict) -> str:
        contract = self.broker.cancel_unpaid(self._contract_id(step), self.party(step["as"]))
        return f"-> {contract.status.value}"

    def op_tick(self, step: dict) -> str:
        expired = self.broker.tick_expiry()
        return f"{len(expired)} contract(s) expired"

    # --- expectation ops ---

    def op_expect_status(self, step: dict) -> str:
        contract = self.broker.get_contract(self._contract_id(step))
        if contract.status.value != step["status"]:
            raise ScenarioFailure(
                f"expected contract {step['contract']} to be {step['status']}, "
                f"is {contract.status.value}"
            )
        return f"contract {step['contract']} is {contract.status.value}"

    def op_expect_hold(self, step: dict) -> str:
        hold = self.broker.get_hold(self.refs[f"hold:{step['hold']}"])
        if hold.state.value != step["state"]:
            raise ScenarioFailure(
                f"expected hold {step['hold']} to be {step['state']}, is {hold.state.value}"
            )
        return f"hold {step['hold']} is {hold.state.value}"

    def op_expect_balance(self, step: dict) -> str:
        balance = self.broker.balance(self.party(step["party"]))
        if balance != step["amount"]:
            raise ScenarioFailure(
                f"expected {step['party']} balance {step['amount']}, got {balance}"
            )
        return f"{step['party']} balance {balance}"

    def op_expect_token_valid(self, step: dict) -> str:
        token = self.broker.token_for_contract(self._contract_id(step))
        if token is None:
            raise ScenarioFailure(f"no token for contract {step['contract']}")
        status = self.broker.check_token(token.token_id)
        if status.valid != step.get("valid", True):
            raise ScenarioFailure(
                f"token validity {status.valid} ({status.reason}), expected {step.get('valid')}"
            )
        return f"token valid={status.valid} ({status.reason})"

    def op_expect_flag_anchored(self, step: dict) -> str:
        records = self.broker.ledger_query(self._contract_id(step))
        flags = [r for r in records if r.record_kind == RECORD_DISPUTE_FLAG]
        if not flags:
            raise ScenarioFailure(f"no dispute flag anchored for {step['contract']}")
        return f"dispute flag anchored at height with {len(flags)} record(s)"

    def op_verify_ledger(self, step: dict) -> str:
        report = self.broker.ledger_verify()
        if not report.ok:
            raise ScenarioFailure(f"ledger corrupt at height {report.corrupt_height}")
        return f"ledger OK at height {report.height}"

    def op_validity(self, step: dict) -> str:
        report = self.broker.validity_report(self._contract_id(step))
        expected = step.get("expect_consistent")
        if expected and report.ledger_consistent != expected:
            raise ScenarioFailure(
                f"ledger consistency {report.ledger_consistent}, expected {expected}"
            )
        return (
            f"status_valid={report.status_valid} window_valid={report.window_valid} "
            f"signatures_valid={report.signatures_valid} ledger={report.ledger_consistent}"
        )


def run_scenario(spec: dict, data_dir: str | Path) -> ScenarioRun:
    name = spec.get("name", "unnamed")
    run = ScenarioRun(name=name)
    clock = ManualClock(spec.get("clock_start", DEFAULT_CLOCK_START))
    broker = Broker(Path(data_dir), clock=clock)
    runner = _Runner(broker, clock, run)
    run.line(f"scenario {name} (t0={clock.now()})")
    try:
        for index, step in enumerate(spec.get("steps", []), start=1):
            runner.execute(index, step)
    except ScenarioFailure as exc:
        run.ok = False
        run.line(f"FAIL {exc}")
        return run
    run.line(f"scenario {name}: all {len(spec.get('steps', []))} steps passed")
    return run
