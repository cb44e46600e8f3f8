/**
 * Server-rendered views for the negotiation console. Pure functions from
 * API data to HTML strings, so rendering rules are unit-testable without a
 * browser: grouped term tables with lock markers, last-counterparty-proposal
 * highlights, status timeline, validity panel, and action buttons derived
 * from the shared transition table.
 */

import {
  CONTRACT_ACTIONS,
  isTermLocked,
  legalActions,
  moneyActions,
  TERMINAL_STATUSES,
} from "./transitions.js";
import type {
  CatalogEntryView,
  ContractView,
  NegotiationEventView,
  PartyView,
  ValidityReportView,
} from "./types.js";

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

const STYLE = `
:root { --ink:#1d2733; --line:#d7dee8; --accent:#0b5fa5; --ok:#1f7a37; --warn:#a33c3c; --lock:#8a93a0; }
* { box-sizing: border-box; }
body { font-family: "Segoe UI", system-ui, sans-serif; color: var(--ink); margin: 0; background:#f4f6f9; }
.wrap { max-width: 1020px; margin: 0 auto; padding: 18px 16px 48px; }
h1 { font-size: 1.35rem; margin: 0 0 2px; }
h2 { font-size: 1.05rem; margin: 22px 0 8px; }
.sub { color:#51606f; font-size:.85rem; margin-bottom: 16px; }
table { border-collapse: collapse; width: 100%; background:#fff; }
th, td { border: 1px solid var(--line); padding: 6px 9px; text-align: left; font-size: .88rem; }
th { background: #eef2f7; font-weight: 600; }
.card { background:#fff; border:1px solid var(--line); border-radius:6px; padding:12px 14px; margin-bottom:14px; }
.status { display:inline-block; padding:2px 8px; border-radius:10px; font-size:.78rem; background:#e4ecf5; }
.status.Active { background:#d9f2e0; } .status.Rejected, .status.Expired, .status.Terminated { background:#f4dede; }
.turn { color: var(--accent); font-weight: 600; }
.lock { color: var(--lock); font-size:.78rem; }
.diff { background: #fff4d6; }
.actions form { display:inline-block; margin: 0 6px 6px 0; }
button { background: var(--accent); color:#fff; border:0; border-radius:4px; padding:6px 12px; cursor:pointer; font-size:.85rem; }
button.quiet { background:#5e6b7a; }
.banner { padding:9px 12px; border-radius:5px; margin-bottom:12px; font-size:.88rem; }
.banner.error { background:#f8e1e1; border:1px solid #d89c9c; }
.banner.conflict { background:#fff1cc; border:1px solid #dcb75e; }
.banner.info { background:#def0e2; border:1px solid #9cc8a6; }
.green { color: var(--ok); font-weight:600; } .red { color: var(--warn); font-weight:600; }
.timeline { list-style:none; padding:0; margin:0; }
.timeline li { border-left: 3px solid var(--line); padding: 3px 0 3px 12px; margin-left: 6px; font-size:.85rem; }
.mono { font-family: ui-monospace, monospace; font-size:.8rem; }
input, select { padding:5px 7px; border:1px solid var(--line); border-radius:4px; font-size:.85rem; }
a { color: var(--accent); }
`;

export function page(title: string, body: string, pollSeconds: number | null): string {
  const refresh =
    pollSeconds === null
      ? ""
      : `<meta http-equiv="refresh" content="${pollSeconds}">`;
  return `<!doctype html>
<html lang="en">
<head>
<meta charset="utf-8">
${refresh}
<title>${escapeHtml(title)}</title>
<style>${STYLE}</style>
</head>
<body><div class="wrap">
${body}
</div></body>
</html>`;
}

export function banners(params: URLSearchParams): string {
  const out: string[] = [];
  const error = params.get("error");
  if (error) {
    out.push(
      `<div class="banner error">service refused: <b class="mono">${escapeHtml(error)}</b>` +
        ` — ${escapeHtml(params.get("message") ?? "")}</div>`,
    );
  }
  if (params.get("conflict")) {
    out.push(
      `<div class="banner conflict">contract changed — review the update before retrying</div>`,
    );
  }
  const note = params.get("note");
  if (note) {
    out.push(`<div class="banner info">${escapeHtml(note)}</div>`);
  }
  return out.join("\n");
}

function statusBadge(status: string): string {
  return `<span class="status ${escapeHtml(status)}">${escapeHtml(status)}</span>`;
}

function displayName(partyId: string, parties: PartyView[]): string {
  const hit = parties.find((p) => p.party_id === partyId);
  return hit ? hit.display_name : partyId;
}

function formatWindow(view: ContractView): string {
  const from = new Date(view.temporal_validity.start * 1000).toISOString().slice(0, 10);
  const to = new Date(view.temporal_validity.end * 1000).toISOString().slice(0, 10);
  return `${from} … ${to}`;
}

// --- session home ---

export function renderHome(
  me: PartyView,
  balance: number,
  contracts: ContractView[],
  catalog: CatalogEntryView[],
  parties: PartyView[],
  params: URLSearchParams,
  pollSeconds: number,
): string {
  const rows = contracts
    .map((c) => {
      const myTurn = c.turn === me.party_id && (c.status === "Draft" || c.status === "Negotiating");
      const turnCell = TERMINAL_STATUSES.has(c.status)
        ? "—"
        : myTurn
          ? '<span class="turn">your move</span>'
          : c.status === "Draft" || c.status === "Negotiating"
            ? `waiting for ${escapeHtml(displayName(c.turn, parties))}`
            : "—";
      return `<tr>
<td><a href="/contracts/${c.contract_id}">${c.contract_id.slice(0, 10)}…</a></td>
<td>${statusBadge(c.status)}</td>
<td>v${c.version}</td>
<td>${c.price}</td>
<td>${turnCell}</td>
<td><a href="/contracts/${c.contract_id}/validity">validity</a></td>
</tr>`;
    })
    .join("\n");

  const catalogRows = catalog
    .map(
      (e) => `<tr>
<td>${escapeHtml(e.asset.description)}</td>
<td>${e.policy.price_listing}</td>
<td>${escapeHtml(displayName(e.asset.provider, parties))}</td>
<td>${
        me.role !== "consumer" && e.asset.provider === me.party_id
          ? `<form method="post" action="/contracts/new">
<input type="hidden" name="asset_id" value="${e.asset.asset_id}">
<select name="consumer">${parties
              .filter((p) => p.party_id !== me.party_id)
              .map((p) => `<option value="${p.party_id}">${escapeHtml(p.display_name)}</option>`)
              .join("")}</select>
<input name="price" size="6" value="${e.policy.price_listing}">
<button>draft</button></form>`
          : ""
      }</td>
</tr>`,
    )
    .join("\n");

  return page(
    `console — ${me.display_name}`,
    `
<h1>Negotiation console</h1>
<div class="sub">acting as <b>${escapeHtml(me.display_name)}</b> (${escapeHtml(me.role)},
 ${escapeHtml(me.industry)}) · balance <b>${balance}</b> credits · refreshes every ${pollSeconds}s
 · <a href="/logout">switch party</a></div>
${banners(params)}
<div class="card">
<h2>Your contracts</h2>
<table><tr><th>contract</th><th>status</th><th>version</th><th>price</th><th>turn</th><th></th></tr>
${rows || "<tr><td colspan=6>(none yet)</td></tr>"}
</table>
</div>
<div class="card">
<h2>Catalog</h2>
<form method="get" action="/"><input name="q" placeholder="search descriptions"
 value="${escapeHtml(params.get("q") ?? "")}"> <button class="quiet">search</button></form>
<table><tr><th>asset</th><th>listed price</th><th>provider</th><th>draft a contract</th></tr>
${catalogRows || "<tr><td colspan=4>(nothing visible to you)</td></tr>"}
</table>
</div>
<div class="card">
<h2>Account</h2>
<form method="post" action="/deposit"><input name="amount" size="8" value="1000">
<button class="quiet">deposit</button></form>
</div>`,
    pollSeconds,
  );
}

// --- drafting page ---

function lastCounterpartyDiff(
  events: NegotiationEventView[],
  actorId: string,
): { fields: Set<string>; terms: Set<string>; by: string } | null {
  for (let i = events.length - 1; i >= 0; i--) {
    const event = events[i];
    if (
      (event.action === "propose" || event.action === "counter_offer") &&
      event.actor !== actorId
    ) {
      const diff = (event.payload as { diff?: Record<string, unknown> }).diff ?? {};
      const fields = new Set<string>();
      const terms = new Set<string>();
      if (diff["price"] !== null && diff["price"] !== undefined) fields.add("price");
      if (diff["temporal_validity"]) fields.add("temporal_validity");
      if (diff["spatial_validity"]) fields.add("spatial_validity");
      for (const t of (diff["set_terms"] as Array<Record<string, unknown>> | undefined) ?? []) {
        terms.add(`${t["category"]}/${t["key"]}/${t["action"] ?? "-"}`);
      }
      return { fields, terms, by: event.actor };
    }
  }
  return null;
}

export function renderDraftingPage(
  view: ContractView,
  events: NegotiationEventView[],
  me: PartyView,
  parties: PartyView[],
  params: URLSearchParams,
  pollSeconds: number,
): string {
  const legal = legalActions(view, me.party_id);
  const money = moneyActions(view, me.party_id);
  const diff = lastCounterpartyDiff(events, me.party_id);
  const highlight = (field: string) => (diff?.fields.has(field) ? ' class="diff"' : "");

  const termRows: string[] = [];
  for (const category of Object.keys(view.terms).sort()) {
    const keys = view.terms[category];
    const locked = isTermLocked(category);
    for (const key of Object.keys(keys).sort()) {
      for (const slot of Object.keys(keys[key]).sort()) {
        const node = keys[key][slot];
        const slotName = `${category}/${key}/${slot}`;
        const mark = diff?.terms.has(slotName) ? ' class="diff"' : "";
        termRows.push(`<tr${mark}>
<td>${escapeHtml(category)}</td>
<td>${escapeHtml(key)}${slot === "-" ? "" : ` <span class="mono">[${escapeHtml(slot)}]</span>`}</td>
<td>${escapeHtml(node.kind)}</td>
<td class="mono">${escapeHtml(JSON.stringify(node.value))}</td>
<td>${locked ? '<span class="lock">&#128274; provider-locked</span>' : "negotiable"}</td>
</tr>`);
      }
    }
  }

  const timeline = events
    .map(
      (e) => `<li><b>${escapeHtml(e.action)}</b> by ${escapeHtml(
        e.actor ? displayName(e.actor, parties) : "system",
      )} → v${e.resulting_version} <span class="mono">(${new Date(e.at * 1000)
        .toISOString()
        .replace("T", " ")
        .slice(0, 19)})</span></li>`,
    )
    .join("\n");

  const actionForms: string[] = [];
  if (legal.has("propose")) {
    actionForms.push(`<form method="post" action="/contracts/${view.contract_id}/propose">
<input type="hidden" name="expected_version" value="${view.version}">
price <input name="price" size="7" value="${view.price}">
<button>counter-offer</button></form>`);
  }
  if (legal.has("accept")) {
    actionForms.push(`<form method="post" action="/contracts/${view.contract_id}/respond">
<input type="hidden" name="decision" value="accept">
<input type="hidden" name="expected_version" value="${view.version}">
<button>accept</button></form>`);
  }
  if (legal.has("reject")) {
    actionForms.push(`<form method="post" action="/contracts/${view.contract_id}/respond">
<input type="hidden" name="decision" value="reject">
<input type="hidden" name="expected_version" value="${view.version}">
<button class="quiet">reject</button></form>`);
  }
  if (legal.has("sign")) {
    const already = Boolean(view.signatures[me.party_id]);
    actionForms.push(`<form method="post" action="/contracts/${view.contract_id}/sign">
<button${already ? ' class="quiet"' : ""}>${already ? "re-sign (no-op)" : "sign"}</button></form>`);
  }
  if (money.has("place_hold")) {
    actionForms.push(`<form method="post" action="/contracts/${view.contract_id}/pay">
<button>pay ${view.price} into escrow</button></form>`);
  }
  if (money.has("confirm_hold")) {
    actionForms.push(`<form method="post" action="/contracts/${view.contract_id}/confirm">
<button>confirm payment</button></form>`);
  }
  if (money.has("claim_bypass")) {
    actionForms.push(`<form method="post" action="/contracts/${view.contract_id}/bypass">
<button class="quiet">claim bypass (proof of payment)</button></form>`);
  }
  if (legal.has("activate")) {
    actionForms.push(`<form method="post" action="/contracts/${view.contract_id}/activate">
<button>activate</button></form>`);
  }
  if (legal.has("terminate")) {
    actionForms.push(`<form method="post" action="/contracts/${view.contract_id}/terminate">
<input name="reason" placeholder="reason" size="14">
<button class="quiet">terminate</button></form>`);
  }

  const terminalBanner = TERMINAL_STATUSES.has(view.status)
    ? `<div class="banner info">this contract is <b>${escapeHtml(view.status)}</b> — no further actions are possible</div>`
    : "";

  const signState = [view.provider, view.consumer]
    .map(
      (p) =>
        `${escapeHtml(displayName(p, parties))}: ${
          view.signatures[p] ? '<span class="green">signed</span>' : '<span class="red">unsigned</span>'
        }`,
    )
    .join(" · ");

  return page(
    `contract ${view.contract_id.slice(0, 10)}`,
    `
<h1>Contract ${view.contract_id.slice(0, 10)}… ${statusBadge(view.status)}</h1>
<div class="sub">provider ${escapeHtml(displayName(view.provider, parties))} ·
 consumer ${escapeHtml(displayName(view.consumer, parties))} · version ${view.version} ·
 ${
        TERMINAL_STATUSES.has(view.status)
          ? "closed"
          : view.status === "Draft" || view.status === "Negotiating"
            ? view.turn === me.party_id
              ? '<span class="turn">your move</span>'
              : `waiting for ${escapeHtml(displayName(view.turn, parties))}`
            : "negotiation settled"
      } · <a href="/">back</a> · <a href="/contracts/${view.contract_id}/validity">validity panel</a></div>
${banners(params)}
${terminalBanner}
${
        diff
          ? `<div class="banner conflict">highlighted rows changed in ${escapeHtml(
              displayName(diff.by, parties),
            )}'s last proposal</div>`
          : ""
      }
<div class="card">
<table>
<tr><th>field</th><th>value</th></tr>
<tr${highlight("price")}><td>price</td><td>${view.price} credits</td></tr>
<tr${highlight("temporal_validity")}><td>validity window</td><td>${formatWindow(view)}</td></tr>
<tr${highlight("spatial_validity")}><td>spatial validity</td><td>${
        view.spatial_validity.map(escapeHtml).join(", ") || "(unrestricted)"
      }</td></tr>
<tr><td>liability</td><td>${escapeHtml(view.liability_text) || "(none)"}</td></tr>
<tr><td>termination clause</td><td>${escapeHtml(view.termination_clause) || "(none)"}</td></tr>
<tr><td>escrow</td><td>${escapeHtml(view.escrow_state ?? "none")}</td></tr>
<tr><td>signatures</td><td>${signState}</td></tr>
</table>
</div>
<div class="card">
<h2>Terms</h2>
<table><tr><th>category</th><th>key</th><th>kind</th><th>value</th><th></th></tr>
${termRows.join("\n") || "<tr><td colspan=5>(no atomic terms)</td></tr>"}
</table>
</div>
<div class="card actions">
<h2>Actions</h2>
${actionForms.join("\n") || "<i>no actions available to you in this state</i>"}
</div>
<div class="card">
<h2>Timeline</h2>
<ul class="timeline">${timeline}</ul>
</div>`,
    pollSeconds,
  );
}

// --- validity panel ---

function verdict(flag: boolean, okText: string, badText: string): string {
  return flag ? `<span class="green">${okText}</span>` : `<span class="red">${badText}</span>`;
}

export function renderValidityPanel(
  report: ValidityReportView,
  parties: PartyView[],
  params: URLSearchParams,
  pollSeconds: number,
): string {
  const signatureRows = Object.entries(report.signature_checks)
    .map(
      ([party, ok]) =>
        `<tr><td>signature: ${escapeHtml(displayName(party, parties))}</td><td>${verdict(
          ok,
          "verifies",
          "missing or invalid",
        )}</td></tr>`,
    )
    .join("\n");
  const ledger =
    report.ledger_consistent === "match"
      ? '<span class="green">match</span>'
      : report.ledger_consistent === "mismatch"
        ? '<span class="red">mismatch — local copy differs from the anchored digest</span>'
        : '<span class="red">not anchored</span>';
  return page(
    `validity ${report.contract_id.slice(0, 10)}`,
    `
<h1>Validity report ${report.contract_id.slice(0, 10)}…</h1>
<div class="sub">checked at ${new Date(report.checked_at * 1000).toISOString()} ·
 <a href="/contracts/${report.contract_id}">back to contract</a></div>
${banners(params)}
<div class="card">
<table>
<tr><th>check</th><th>verdict</th></tr>
<tr><td>status (${escapeHtml(report.status)})</td><td>${verdict(
      report.status_valid,
      "Active",
      "not Active",
    )}</td></tr>
<tr><td>validity window</td><td>${verdict(report.window_valid, "inside window", "outside window")}</td></tr>
${signatureRows}
<tr><td>ledger consistency</td><td>${ledger}</td></tr>
<tr><td>anchored digest</td><td class="mono">${escapeHtml(report.anchored_digest ?? "—")}</td></tr>
<tr><td>current digest</td><td class="mono">${escapeHtml(report.current_digest)}</td></tr>
</table>
</div>`,
    pollSeconds,
  );
}

// --- login ---

export function renderLogin(params: URLSearchParams, baseUrl: string): string {
  return page(
    "sign in — negotiation console",
    `
<h1>Negotiation console</h1>
<div class="sub">broker at <span class="mono">${escapeHtml(baseUrl)}</span></div>
${banners(params)}
<div class="card">
<form method="post" action="/login">
<p>API key: <input name="api_key" size="40" autofocus></p>
<button>enter</button>
</form>
</div>`,
    null,
  );
}
