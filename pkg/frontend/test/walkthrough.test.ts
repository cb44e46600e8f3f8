/**
 * Two-session negotiation walkthrough through the console itself.
 *
 * A provider session and a consumer session drive the whole flow — draft,
 * counter-offer, accept, sign, pay, confirm, activate — by submitting the
 * console's own forms, and the validity panel ends all green. Also checks
 * the optimistic-version conflict prompt and verbatim error surfacing.
 */

import { createServer } from "node:http";
import type { AddressInfo } from "node:net";

import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { createConsoleServer } from "../src/server.js";
import { registerParty, startBroker, type TestParty, type TestService } from "./service.js";

let service: TestService;
let provider: TestParty;
let consumer: TestParty;
let consoleUrl: string;
let consoleServer: ReturnType<typeof createServer>;

/** A cookie-holding "browser tab" driving the console over HTTP. */
class Session {
  private cookie = "";

  constructor(private readonly label: string) {}

  async login(apiKey: string): Promise<void> {
    const response = await fetch(`${consoleUrl}/login`, {
      method: "POST",
      headers: { "Content-Type": "application/x-www-form-urlencoded" },
      body: new URLSearchParams({ api_key: apiKey }),
      redirect: "manual",
    });
    const setCookie = response.headers.get("set-cookie");
    if (!setCookie) {
      throw new Error(`${this.label}: login set no cookie`);
    }
    this.cookie = setCookie.split(";")[0];
  }

  async page(path: string): Promise<string> {
    const response = await fetch(`${consoleUrl}${path}`, {
      headers: { Cookie: this.cookie },
    });
    expect(response.status).toBe(200);
    return response.text();
  }

  /** Submit a console form; returns the query string of the redirect. */
  async post(path: string, fields: Record<string, string>): Promise<string> {
    const response = await fetch(`${consoleUrl}${path}`, {
      method: "POST",
      headers: {
        Cookie: this.cookie,
        "Content-Type": "application/x-www-form-urlencoded",
      },
      body: new URLSearchParams(fields),
      redirect: "manual",
    });
    expect(response.status).toBe(303);
    const location = response.headers.get("location") ?? "";
    return location.includes("?") ? location.slice(location.indexOf("?") + 1) : "";
  }
}

beforeAll(async () => {
  service = await startBroker(8792);
  provider = await registerParty(service, "Walk Provider", "provider", "airport");
  consumer = await registerParty(service, "Walk Consumer", "consumer", "airline");
  await fetch(`${service.baseUrl}/assets`, {
    method: "POST",
    headers: { "X-API-Key": provider.apiKey, "Content-Type": "application/json" },
    body: JSON.stringify({
      asset: { description: "walkthrough turnaround dataset", version: "1.0" },
      policy: {
        sensitivity_level: 1,
        price_listing: 800,
        terms: [
          {
            category: "RightsAndUsage",
            kind: "Permission",
            key: "distribution",
            action: "distribution",
            value: true,
          },
        ],
      },
    }),
  });
  consoleServer = createConsoleServer({ brokerUrl: service.baseUrl, pollSeconds: 2 });
  await new Promise<void>((resolve) => consoleServer.listen(0, resolve));
  consoleUrl = `http://127.0.0.1:${(consoleServer.address() as AddressInfo).port}`;
}, 60_000);

afterAll(async () => {
  await new Promise((resolve) => consoleServer?.close(resolve));
  service?.stop();
});

describe("two-session walkthrough", () => {
  it("completes draft -> counter -> accept -> sign -> pay -> activate, all green", async () => {
    const providerTab = new Session("provider");
    const consumerTab = new Session("consumer");
    await providerTab.login(provider.apiKey);
    await consumerTab.login(consumer.apiKey);

    // provider sees the catalog and drafts toward the consumer
    const providerHome = await providerTab.page("/");
    expect(providerHome).toContain("walkthrough turnaround dataset");
    const assetId = /name="asset_id" value="([0-9a-f]+)"/.exec(providerHome)?.[1];
    expect(assetId).toBeTruthy();
    await providerTab.post("/contracts/new", {
      asset_id: assetId!,
      consumer: consumer.party.party_id,
      price: "800",
    });

    // the consumer's list shows the new draft as their move
    const consumerHome = await consumerTab.page("/");
    expect(consumerHome).toContain("your move");
    const contractId = /contracts\/([0-9a-f]{32})/.exec(consumerHome)?.[1];
    expect(contractId).toBeTruthy();
    const cid = contractId!;

    // consumer counter-offers from the drafting page
    const draftPage = await consumerTab.page(`/contracts/${cid}`);
    expect(draftPage).toContain("counter-offer");
    await consumerTab.post(`/contracts/${cid}/propose`, {
      price: "700",
      expected_version: "1",
    });

    // provider sees the diff highlight and accepts
    const providerView = await providerTab.page(`/contracts/${cid}`);
    expect(providerView).toContain('class="diff"');
    expect(providerView).toContain("your move");
    await providerTab.post(`/contracts/${cid}/respond`, {
      decision: "accept",
      expected_version: "2",
    });

    // both sign
    await providerTab.post(`/contracts/${cid}/sign`, {});
    await consumerTab.post(`/contracts/${cid}/sign`, {});

    // consumer funds escrow and pays
    await consumerTab.post("/deposit", { amount: "1000" });
    const paid = await consumerTab.post(`/contracts/${cid}/pay`, {});
    expect(paid).toContain("pay+applied");

    // premature activation refused; machine code surfaces verbatim
    const early = await consumerTab.post(`/contracts/${cid}/activate`, {});
    expect(early).toContain("error=payment_incomplete");
    const earlyPage = await consumerTab.page(`/contracts/${cid}?${early}`);
    expect(earlyPage).toContain("payment_incomplete");

    // provider confirms; consumer activates
    await providerTab.post(`/contracts/${cid}/confirm`, {});
    const activated = await consumerTab.post(`/contracts/${cid}/activate`, {});
    expect(activated).toContain("activate+applied");

    const finalPage = await consumerTab.page(`/contracts/${cid}`);
    expect(finalPage).toContain("Active");

    // validity panel ends all green in both sessions
    for (const tab of [providerTab, consumerTab]) {
      const panel = await tab.page(`/contracts/${cid}/validity`);
      expect(panel).toContain("match");
      expect(panel).not.toContain('class="red"');
      expect(panel).toContain("inside window");
      expect(panel.match(/verifies/g)?.length).toBe(2);
    }
  }, 60_000);

  it("surfaces optimistic-version conflicts as a review prompt", async () => {
    const providerTab = new Session("provider");
    const consumerTab = new Session("consumer");
    await providerTab.login(provider.apiKey);
    await consumerTab.login(consumer.apiKey);

    const providerHome = await providerTab.page("/");
    const assetId = /name="asset_id" value="([0-9a-f]+)"/.exec(providerHome)?.[1];
    await providerTab.post("/contracts/new", {
      asset_id: assetId!,
      consumer: consumer.party.party_id,
      price: "500",
    });
    const consumerHome = await consumerTab.page("/");
    const ids = [...consumerHome.matchAll(/contracts\/([0-9a-f]{32})/g)].map((m) => m[1]);
    const cid = ids[ids.length - 1];

    // consumer proposes v2 while the provider's form still says v1... then
    // the consumer's second form still carries the stale version
    await consumerTab.post(`/contracts/${cid}/propose`, {
      price: "450",
      expected_version: "1",
    });
    const stale = await providerTab.post(`/contracts/${cid}/propose`, {
      price: "480",
      expected_version: "1", // stale: the contract moved to v2
    });
    expect(stale).toContain("conflict=1");
    const prompt = await providerTab.page(`/contracts/${cid}?${stale}`);
    expect(prompt).toContain("contract changed — review the update");
  }, 60_000);

  it("keeps sessions stateless: a refresh reconciles with the service", async () => {
    const tab = new Session("provider");
    await tab.login(provider.apiKey);
    const first = await tab.page("/");
    const second = await tab.page("/");
    // same service state -> same rendered contract rows
    const rows = (html: string) =>
      [...html.matchAll(/contracts\/([0-9a-f]{32})/g)].map((m) => m[1]).sort();
    expect(rows(second)).toEqual(rows(first));
  });
});
