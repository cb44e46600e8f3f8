"""Operator and scripting CLI.

Runs embedded against a data directory (the same state the service serves).
Every API operation has a subcommand; `scenario run` executes scripted
multi-party walkthroughs end to end and prints the transcript.

Exit codes: 0 success, 1 domain error, 2 usage error.
"""

from __future__ import annotations

import json
import sys
import tempfile
from pathlib import Path

import click

from .broker import Broker
from .catalog import SearchQuery
from .config import BrokerConfig, load_config
from .contracts import ProposalDiff
from .errors import BrokerError, UnknownParty
from .policy import term_from_json
from .scenarios import load_scenario, run_scenario


class CLIContext:
    def __init__(self, config_path: str | None, data_dir: str | None, acting_as: str | None, json_out: bool):
        self.config_path = config_path
        self.data_dir = data_dir
        self.acting_as = acting_as
        self.json_out = json_out
        self._broker: Broker | None = None
        self._config: BrokerConfig | None = None

    @property
    def config(self) -> BrokerConfig:
        if self._config is None:
            if self.config_path:
                self._config = load_config(self.config_path)
            else:
                self._config = BrokerConfig()
        return self._config

    @property
    def broker(self) -> Broker:
        if self._broker is None:
            data_dir = Path(self.data_dir) if self.data_dir else self.config.data_dir
            self._broker = Broker(
                data_dir,
                bypass_timeout=self.config.bypass_timeout,
                payment_cancel_timeout=self.config.payment_cancel_timeout,
                vocabulary_path=self.config.vocabulary_path,
                disclosure_rules_path=self.config.disclosure_rules_path,
            )
        return self._broker

    def actor(self) -> str:
        if not self.acting_as:
            raise click.UsageError("this command needs --as <party name or id>")
        party = self.broker.find_party(self.acting_as)
        if party is None:
            raise UnknownParty(f"no party named {self.acting_as!r}")
        return party.party_id

    def emit(self, payload: dict, human: str | None = None) -> None:
        if self.json_out:
            click.echo(json.dumps(payload, indent=2, sort_keys=True))
        else:
            click.echo(human if human is not None else json.dumps(payload, indent=2, sort_keys=True))


pass_ctx = click.make_pass_decorator(CLIContext)


def _wrap(fn):
    """Domain errors exit 1 with a machine-parsable line; usage errors stay click's."""
    import functools

    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except BrokerError as exc:
            click.echo(json.dumps({"error": {"code": exc.code, "message": exc.message}}))
            sys.exit(1)

    return wrapper


@click.group()
@click.option("--config", "config_path", type=click.Path(), default=None, help="TOML config file.")
@click.option("--data-dir", type=click.Path(), default=None, help="State directory (overrides config).")
@click.option("--as", "acting_as", default=None, help="Acting party (display name or id).")
@click.option("--json", "json_out", is_flag=True, default=False, help="Machine-readable output.")
@click.pass_context
def main(ctx, config_path, data_dir, acting_as, json_out):
    """datapact: trusted data-contract brokerage."""
    ctx.obj = CLIContext(config_path, data_dir, acting_as, json_out)


@main.command()
@pass_ctx
@_wrap
def serve(ctx: CLIContext):
    """Run the network API until interrupted."""
    from .api import serve as api_serve

    api_serve(ctx.config if ctx.data_dir is None else _override_dir(ctx))


def _override_dir(ctx: CLIContext) -> BrokerConfig:
    from dataclasses import replace

    return replace(ctx.config, data_dir=Path(ctx.data_dir))


# --- party ---


@main.group()
def party():
    """Register and list parties."""


@party.command("register")
@click.argument("display_name")
@click.option("--role", type=click.Choice(["provider", "consumer", "both"]), required=True)
@click.option("--industry", required=True)
@pass_ctx
@_wrap
def party_register(ctx: CLIContext, display_name, role, industry):
    registered, api_key = ctx.broker.register_party(display_name, role, industry)
    ctx.emit(
        {"party_id": registered.party_id, "api_key": api_key, "display_name": display_name},
        f"registered {display_name}: id={registered.party_id} api_key={api_key}",
    )


@party.command("list")
@pass_ctx
@_wrap
def party_list(ctx: CLIContext):
    parties = ctx.broker.parties()
    ctx.emit(
        {"parties": [
            {"party_id": p.party_id, "display_name": p.display_name,
             "role": p.role.value, "industry": p.industry}
            for p in parties
        ]},
        "\n".join(f"{p.party_id}  {p.role.value:<8}  {p.industry:<14}  {p.display_name}" for p in parties)
        or "(no parties)",
    )


# --- asset ---


@main.group()
def asset():
    """Register, list, and deregister data assets."""


@asset.command("register")
@click.argument("spec_file", type=click.Path(exists=True))
@pass_ctx
@_wrap
def asset_register(ctx: CLIContext, spec_file):
    """SPEC_FILE: JSON with {"asset": {...}, "policy": {...}}."""
    payload = json.loads(Path(spec_file).read_text("utf-8"))
    entry = ctx.broker.register_asset(ctx.actor(), payload["asset"], payload["policy"])
    ctx.emit(
        {"asset_id": entry.asset.asset_id, "policy_id": entry.policy.policy_id},
        f"listed asset {entry.asset.asset_id} (policy {entry.policy.policy_id})",
    )


@asset.command("list")
@pass_ctx
@_wrap
def asset_list(ctx: CLIContext):
    entries = ctx.broker.catalog_entries()
    ctx.emit(
        {"assets": [
            {"asset_id": e.asset.asset_id, "description": e.asset.description,
             "active": e.active, "price_listing": e.policy.price_listing}
            for e in entries
        ]},
        "\n".join(
            f"{e.asset.asset_id}  {'active' if e.active else 'inactive':<8}  "
            f"{e.policy.price_listing:>8}  {e.asset.description}"
            for e in entries
        )
        or "(no assets)",
    )


@asset.command("deregister")
@click.argument("asset_id")
@pass_ctx
@_wrap
def asset_deregister(ctx: CLIContext, asset_id):
    entry = ctx.broker.deregister_asset(ctx.actor(), asset_id)
    ctx.emit({"asset_id": entry.asset.asset_id, "active": entry.active},
             f"asset {asset_id} deregistered")


@main.command()
@click.option("--text", default=None)
@click.option("--purpose", default="trade")
@click.option("--provider", default=None)
@click.option("--tag", "tags", multiple=True)
@pass_ctx
@_wrap
def search(ctx: CLIContext, text, purpose, provider, tags):
    """Policy-respecting catalog search as the acting party."""
    results = ctx.broker.search(
        SearchQuery(
            requester=ctx.actor(),
            purpose=purpose,
            text=text,
            entity_tags=tuple(tags) or None,
            provider=provider,
        )
    )
    ctx.emit(
        {"results": [
            {"asset_id": e.asset.asset_id, "description": e.asset.description,
             "price_listing": e.policy.price_listing}
            for e in results
        ]},
        "\n".join(
            f"{e.asset.asset_id}  {e.policy.price_listing:>8}  {e.asset.description}"
            for e in results
        )
        or "(no matches)",
    )


# --- contract ---


@main.group()
def contract():
    """Draft, negotiate, sign, activate, and inspect contracts."""


def _emit_contract(ctx: CLIContext, c) -> None:
    ctx.emit(
        {**c.to_document(), "turn": c.turn},
        f"contract {c.contract_id}: {c.status.value} v{c.version} "
        f"price={c.price} turn={c.turn or '-'}",
    )


@contract.command("draft")
@click.option("--asset", "asset_id", required=True)
@click.option("--consumer", required=True, help="Consumer party (name or id).")
@click.option("--price", type=int, default=None, help="Defaults to the listed price.")
@click.option("--purpose", default="trade")
@click.option("--validity-days", type=int, default=None)
@click.option("--term", "terms", multiple=True, help="Term JSON, may repeat.")
@pass_ctx
@_wrap
def contract_draft(ctx: CLIContext, asset_id, consumer, price, purpose, validity_days, terms):
    broker = ctx.broker
    consumer_party = broker.find_party(consumer)
    if consumer_party is None:
        raise UnknownParty(f"no party named {consumer!r}")
    validity = None
    if validity_days is not None:
        start = broker.now()
        validity = (start, start + validity_days * 86_400)
    parsed_terms = tuple(term_from_json(json.loads(t), broker.vocabulary) for t in terms)
    c = broker.draft_contract(
        ctx.actor(), asset_id, consumer_party.party_id, parsed_terms, price,
        purpose=purpose, temporal_validity=validity,
    )
    _emit_contract(ctx, c)


@contract.command("show")
@click.argument("contract_id")
@pass_ctx
@_wrap
def contract_show(ctx: CLIContext, contract_id):
    _emit_contract(ctx, ctx.broker.get_contract(contract_id))


@contract.command("propose")
@click.argument("contract_id")
@click.option("--price", type=int, default=None)
@click.option("--region", "regions", multiple=True, help="Replacement spatial validity labels.")
@click.option("--set-term", "set_terms", multiple=True, help="Term JSON, may repeat.")
@click.option("--expected-version", type=int, default=None)
@pass_ctx
@_wrap
def contract_propose(ctx: CLIContext, contract_id, price, regions, set_terms, expected_version):
    broker = ctx.broker
    diff = ProposalDiff(
        price=price,
        spatial_validity=tuple(regions) if regions else None,
        set_terms=tuple(term_from_json(json.loads(t), broker.vocabulary) for t in set_terms),
    )
    c = broker.submit_proposal(
        contract_id, ctx.actor(), diff, expected_version=expected_version
    )
    _emit_contract(ctx, c)


@contract.command("respond")
@click.argument("contract_id")
@click.argument("decision", type=click.Choice(["accept", "reject"]))
@pass_ctx
@_wrap
def contract_respond(ctx: CLIContext, contract_id, decision):
    _emit_contract(ctx, ctx.broker.respond(contract_id, ctx.actor(), decision))


@contract.command("sign")
@click.argument("contract_id")
@pass_ctx
@_wrap
def contract_sign(ctx: CLIContext, contract_id):
    _emit_contract(ctx, ctx.broker.sign_contract(contract_id, ctx.actor()))


@contract.command("activate")
@click.argument("contract_id")
@pass_ctx
@_wrap
def contract_activate(ctx: CLIContext, contract_id):
    _emit_contract(ctx, ctx.broker.activate(contract_id))


@contract.command("terminate")
@click.argument("contract_id")
@click.option("--reason", default="")
@pass_ctx
@_wrap
def contract_terminate(ctx: CLIContext, contract_id, reason):
    _emit_contract(ctx, ctx.broker.terminate(contract_id, ctx.actor(), reason))


@contract.command("cancel")
@click.argument("contract_id")
@pass_ctx
@_wrap
def contract_cancel(ctx: CLIContext, contract_id):
    _emit_contract(ctx, ctx.broker.cancel_unpaid(contract_id, ctx.actor()))


@contract.command("events")
@click.argument("contract_id")
@pass_ctx
@_wrap
def contract_events(ctx: CLIContext, contract_id):
    events = ctx.broker.negotiation_events(contract_id)
    ctx.emit(
        {"events": [e.to_json() for e in events]},
        "\n".join(
            f"{e.at}  v{e.resulting_version}  {e.action.value:<14} {e.actor or '(system)'}"
            for e in events
        )
        or "(no events)",
    )


@contract.command("validity")
@click.argument("contract_id")
@pass_ctx
@_wrap
def contract_validity(ctx: CLIContext, contract_id):
    report = ctx.broker.validity_report(contract_id)
    doc = report.to_document()
    ctx.emit(
        doc,
        f"contract {contract_id}: status={report.status.value} "
        f"status_valid={report.status_valid} window_valid={report.window_valid} "
        f"signatures_valid={report.signatures_valid} ledger={report.ledger_consistent}",
    )


# --- escrow ---


@main.group()
def escrow():
    """Accounts and escrow holds."""


@escrow.command("deposit")
@click.argument("party_ref")
@click.argument("amount", type=int)
@pass_ctx
@_wrap
def escrow_deposit(ctx: CLIContext, party_ref, amount):
    target = ctx.broker.find_party(party_ref)
    if target is None:
        raise UnknownParty(f"no party named {party_ref!r}")
    balance = ctx.broker.deposit(target.party_id, amount)
    ctx.emit({"party_id": target.party_id, "balance": balance},
             f"{party_ref} balance: {balance}")


@escrow.command("balance")
@click.argument("party_ref")
@pass_ctx
@_wrap
def escrow_balance(ctx: CLIContext, party_ref):
    target = ctx.broker.find_party(party_ref)
    if target is None:
        raise UnknownParty(f"no party named {party_ref!r}")
    balance = ctx.broker.balance(target.party_id)
    ctx.emit({"party_id": target.party_id, "balance": balance},
             f"{party_ref} balance: {balance}")


@escrow.command("hold")
@click.argument("contract_id")
@pass_ctx
@_wrap
def escrow_hold(ctx: CLIContext, contract_id):
    hold = ctx.broker.place_hold(contract_id, ctx.actor())
    ctx.emit(hold.to_document(), f"hold {hold.hold_id}: {hold.state.value} amount={hold.amount}")


@escrow.command("confirm")
@click.argument("hold_id")
@pass_ctx
@_wrap
def escrow_confirm(ctx: CLIContext, hold_id):
    hold = ctx.broker.provider_confirm(hold_id, ctx.actor())
    ctx.emit(hold.to_document(), f"hold {hold_id}: {hold.state.value}")


@escrow.command("bypass")
@click.argument("hold_id")
@pass_ctx
@_wrap
def escrow_bypass(ctx: CLIContext, hold_id):
    hold = ctx.broker.claim_bypass(hold_id, ctx.actor())
    ctx.emit(hold.to_document(), f"hold {hold_id}: {hold.state.value} (dispute flagged)")


@escrow.command("refund")
@click.argument("hold_id")
@pass_ctx
@_wrap
def escrow_refund(ctx: CLIContext, hold_id):
    hold = ctx.broker.refund(hold_id)
    ctx.emit(hold.to_document(), f"hold {hold_id}: {hold.state.value}")


# --- ledger / token / maintenance ---


@main.group()
def ledger():
    """Inspect and verify the anchoring ledger."""


@ledger.command("verify")
@pass_ctx
@_wrap
def ledger_verify(ctx: CLIContext):
    report = ctx.broker.ledger_verify()
    ctx.emit(report.to_document(), "OK" if report.ok else f"CORRUPT at height {report.corrupt_height}")
    if not report.ok:
        sys.exit(1)


@ledger.command("query")
@click.argument("contract_id")
@pass_ctx
@_wrap
def ledger_query(ctx: CLIContext, contract_id):
    records = ctx.broker.ledger_query(contract_id)
    ctx.emit(
        {"records": [r.to_document() for r in records]},
        "\n".join(
            f"{r.anchored_at}  v{r.contract_version}  {r.status_at_anchor.value:<11} "
            f"{r.record_kind}  digest={r.whole_document_digest[:16]}..."
            for r in records
        )
        or "(no records)",
    )


@main.group()
def token():
    """Access-token checks."""


@token.command("check")
@click.argument("token_id")
@pass_ctx
@_wrap
def token_check(ctx: CLIContext, token_id):
    status = ctx.broker.check_token(token_id)
    ctx.emit(status.to_document(), f"token {token_id}: valid={status.valid} ({status.reason})")


@main.command()
@click.option("--now", "at", type=int, default=None, help="Override the sweep time.")
@pass_ctx
@_wrap
def tick(ctx: CLIContext, at):
    """Expire Active contracts whose validity window has passed."""
    expired = ctx.broker.tick_expiry(now=at)
    ctx.emit(
        {"expired": [c.contract_id for c in expired]},
        f"{len(expired)} contract(s) expired",
    )


# --- scenarios ---


@main.group()
def scenario():
    """Scripted end-to-end brokerage scenarios."""


@scenario.command("run")
@click.argument("name_or_file")
@pass_ctx
@_wrap
def scenario_run(ctx: CLIContext, name_or_file):
    """Run a built-in scenario (happy_path, reject_path, expiry_path,
    bypass_dispute) or a scenario JSON file."""
    from .scenarios import ScenarioFailure

    try:
        spec = load_scenario(name_or_file)
    except ScenarioFailure as exc:
        raise click.UsageError(str(exc)) from exc
    data_dir = ctx.data_dir or tempfile.mkdtemp(prefix="datapact-scenario-")
    run = run_scenario(spec, data_dir)
    if ctx.json_out:
        click.echo(json.dumps({"name": run.name, "ok": run.ok, "transcript": run.transcript}))
    else:
        for line in run.transcript:
            click.echo(line)
        click.echo(f"state dir: {data_dir}")
    sys.exit(0 if run.ok else 1)


if __name__ == "__main__":
    main()
