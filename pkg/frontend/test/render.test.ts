import { describe, expect, it } from "vitest";

import { renderDraftingPage, renderHome, renderValidityPanel } from "../src/render.js";
import type { ValidityReportView } from "../src/types.js";
import {
  CONSUMER,
  DRAFT_EVENT,
  OUTSIDER,
  PROVIDER,
  contractView,
  proposalEvent,
} from "./fixtures.js";

const PARTIES = [PROVIDER, CONSUMER, OUTSIDER];


function actionsIn(html: string): string[] {
  const verbs = ["propose", "respond", "sign", "activate", "terminate", "pay", "confirm", "bypass"];
  return verbs.filter((verb) => html.includes(`/${verb}"`));
}

describe("drafting page", () => {
  it("shows the counter-offer editor and accept/reject to the turn holder", () => {
    const html = renderDraftingPage(
      contractView(),
      [DRAFT_EVENT],
      CONSUMER,
      PARTIES,
      new URLSearchParams(),
      2,
    );
    expect(actionsIn(html)).toEqual(["propose", "respond"]);
    expect(html).toContain("your move");
    expect(html).toContain("counter-offer");
  });

  it("renders read-only for the party without the turn", () => {
    const html = renderDraftingPage(
      contractView(),
      [DRAFT_EVENT],
      PROVIDER,
      PARTIES,
      new URLSearchParams(),
      2,
    );
    expect(actionsIn(html)).toEqual([]);
    expect(html).toContain("no actions available");
    expect(html).toContain("waiting for Blue Swift Air");
  });

  it("groups terms by category and locks non-negotiable ones", () => {
    const html = renderDraftingPage(
      contractView(),
      [DRAFT_EVENT],
      CONSUMER,
      PARTIES,
      new URLSearchParams(),
      2,
    );
    expect(html).toContain("RightsAndUsage");
    expect(html).toContain("Quality");
    expect(html).toContain("provider-locked");
    expect(html).toContain("negotiable");
  });

  it("highlights the fields touched by the counterparty's last proposal", () => {
    const view = contractView({ status: "Negotiating", version: 2, turn: PROVIDER.party_id, price: 700 });
    const events = [DRAFT_EVENT, proposalEvent(CONSUMER.party_id, 1_750_000_100, 2, 700)];
    const forProvider = renderDraftingPage(
      view,
      events,
      PROVIDER,
      PARTIES,
      new URLSearchParams(),
      2,
    );
    expect(forProvider).toContain('class="diff"');
    expect(forProvider).toContain("last proposal");
    // the proposer sees no highlight of their own diff
    const forConsumer = renderDraftingPage(
      view,
      events,
      CONSUMER,
      PARTIES,
      new URLSearchParams(),
      2,
    );
    expect(forConsumer).not.toContain('<tr class="diff"><td>price</td>');
  });

  it("renders the negotiation timeline in order", () => {
    const events = [
      DRAFT_EVENT,
      proposalEvent(CONSUMER.party_id, 1_750_000_100, 2, 700),
    ];
    const html = renderDraftingPage(
      contractView({ status: "Negotiating", version: 2, turn: PROVIDER.party_id }),
      events,
      PROVIDER,
      PARTIES,
      new URLSearchParams(),
      2,
    );
    const timeline = html.slice(html.indexOf('<ul class="timeline">'));
    const creation = timeline.indexOf("<b>create_draft</b>");
    const proposal = timeline.indexOf("<b>propose</b>");
    expect(creation).toBeGreaterThan(-1);
    expect(proposal).toBeGreaterThan(creation);
  });

  it("shows a terminal banner and zero actions on a rejected contract", () => {
    const html = renderDraftingPage(
      contractView({ status: "Rejected" }),
      [DRAFT_EVENT],
      CONSUMER,
      PARTIES,
      new URLSearchParams(),
      2,
    );
    expect(html).toContain("no further actions are possible");
    expect(actionsIn(html)).toEqual([]);
  });

  it("offers escrow and activation buttons per role once accepted", () => {
    const signatures = {
      [PROVIDER.party_id]: { signature: "ff", version: 1 },
      [CONSUMER.party_id]: { signature: "ee", version: 1 },
    };
    const held = contractView({
      status: "Accepted",
      signatures,
      escrow_state: "Held",
      hold_id: "h1",
    });
    const consumerHtml = renderDraftingPage(
      held, [DRAFT_EVENT], CONSUMER, PARTIES, new URLSearchParams(), 2,
    );
    expect(actionsIn(consumerHtml)).toEqual(["sign", "bypass"]);
    const providerHtml = renderDraftingPage(
      held, [DRAFT_EVENT], PROVIDER, PARTIES, new URLSearchParams(), 2,
    );
    expect(actionsIn(providerHtml)).toEqual(["sign", "confirm"]);

    const settled = contractView({ status: "Accepted", signatures, escrow_state: "Released" });
    const readyHtml = renderDraftingPage(
      settled, [DRAFT_EVENT], CONSUMER, PARTIES, new URLSearchParams(), 2,
    );
    expect(actionsIn(readyHtml)).toEqual(["sign", "activate"]);
  });

  it("surfaces service errors verbatim and version conflicts as a review prompt", () => {
    const params = new URLSearchParams("error=out_of_turn&message=not+your+turn");
    const html = renderDraftingPage(
      contractView(), [DRAFT_EVENT], PROVIDER, PARTIES, params, 2,
    );
    expect(html).toContain("out_of_turn");
    const conflict = renderDraftingPage(
      contractView(),
      [DRAFT_EVENT],
      PROVIDER,
      PARTIES,
      new URLSearchParams("conflict=1"),
      2,
    );
    expect(conflict).toContain("contract changed — review the update");
  });

  it("polls at the configured interval", () => {
    const html = renderDraftingPage(
      contractView(), [DRAFT_EVENT], CONSUMER, PARTIES, new URLSearchParams(), 7,
    );
    expect(html).toContain('http-equiv="refresh" content="7"');
  });
});

describe("session home", () => {
  it("lists contracts with status badges and per-contract turn indicators", () => {
    const html = renderHome(
      CONSUMER,
      1200,
      [contractView(), contractView({ status: "Active", contract_id: "dd".repeat(16) })],
      [],
      PARTIES,
      new URLSearchParams(),
      2,
    );
    expect(html).toContain("your move");
    expect(html).toContain("Active");
    expect(html).toContain("balance <b>1200</b>");
  });
});

describe("validity panel", () => {
  const report: ValidityReportView = {
    contract_id: "c0ffee00c0ffee00c0ffee00c0ffee00",
    checked_at: 1_750_000_500,
    status: "Active",
    status_valid: true,
    window_valid: true,
    signature_checks: { [PROVIDER.party_id]: true, [CONSUMER.party_id]: true },
    signatures_valid: true,
    anchored: true,
    ledger_consistent: "match",
    anchored_digest: "ab".repeat(32),
    current_digest: "ab".repeat(32),
  };

  it("renders all-green for a valid anchored contract", () => {
    const html = renderValidityPanel(report, PARTIES, new URLSearchParams(), 2);
    expect(html.match(/class="green"/g)?.length).toBeGreaterThanOrEqual(4);
    expect(html).not.toContain('class="red"');
    expect(html).toContain("match");
  });

  it("flags tampering as a ledger mismatch", () => {
    const tampered = { ...report, ledger_consistent: "mismatch" as const, current_digest: "cd".repeat(32) };
    const html = renderValidityPanel(tampered, PARTIES, new URLSearchParams(), 2);
    expect(html).toContain("mismatch");
    expect(html).toContain('class="red"');
  });

  it("marks an expired contract's window and status invalid", () => {
    const expired = {
      ...report,
      status: "Expired" as const,
      status_valid: false,
      window_valid: false,
    };
    const html = renderValidityPanel(expired, PARTIES, new URLSearchParams(), 2);
    expect(html).toContain("not Active");
    expect(html).toContain("outside window");
  });
});
