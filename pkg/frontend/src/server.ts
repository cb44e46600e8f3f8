/**
 * Negotiation console server.
 *
 * Serves server-rendered pages to any number of browser sessions; each tab
 * signs in with its broker API key (kept in a cookie), and every page
 * re-fetches live state from the broker — the console itself holds nothing
 * authoritative. Pages auto-refresh (default every 2 s). Form posts map
 * one-to-one onto broker API calls; domain refusals redirect back with the
 * machine code in the query string and render verbatim, and version
 * conflicts come back as a "contract changed" prompt rather than a retry.
 *
 * Config (env): BROKER_URL (default http://127.0.0.1:8700),
 * PORT (default 8780), POLL_SECONDS (default 2).
 */

import { createServer, type IncomingMessage, type ServerResponse } from "node:http";

import { BrokerClient } from "./client.js";
import { renderDraftingPage, renderHome, renderLogin, renderValidityPanel } from "./render.js";
import { BrokerApiError, type PartyView } from "./types.js";

export interface ConsoleConfig {
  brokerUrl: string;
  pollSeconds: number;
}

function readCookie(req: IncomingMessage, name: string): string | null {
  const header = req.headers.cookie ?? "";
  for (const part of header.split(";")) {
    const [key, ...rest] = part.trim().split("=");
    if (key === name) {
      return decodeURIComponent(rest.join("="));
    }
  }
  return null;
}

async function readForm(req: IncomingMessage): Promise<URLSearchParams> {
  const chunks: Buffer[] = [];
  for await (const chunk of req) {
    chunks.push(chunk as Buffer);
  }
  return new URLSearchParams(Buffer.concat(chunks).toString("utf-8"));
}

function redirect(res: ServerResponse, location: string, setCookie?: string): void {
  const headers: Record<string, string | string[]> = { Location: location };
  if (setCookie) {
    headers["Set-Cookie"] = setCookie;
  }
  res.writeHead(303, headers);
  res.end();
}

function sendHtml(res: ServerResponse, html: string, status = 200): void {
  res.writeHead(status, { "Content-Type": "text/html; charset=utf-8" });
  res.end(html);
}

function errorParams(error: unknown): string {
  if (error instanceof BrokerApiError) {
    if (error.code === "version_conflict") {
      return "conflict=1";
    }
    return `error=${encodeURIComponent(error.code)}&message=${encodeURIComponent(error.message)}`;
  }
  return `error=internal&message=${encodeURIComponent(String(error))}`;
}

export function createConsoleServer(config: ConsoleConfig) {
  const handle = async (req: IncomingMessage, res: ServerResponse): Promise<void> => {
    const url = new URL(req.url ?? "/", "http://console.local");
    const params = url.searchParams;

    if (url.pathname === "/login" && req.method === "GET") {
      sendHtml(res, renderLogin(params, config.brokerUrl));
      return;
    }
    if (url.pathname === "/login" && req.method === "POST") {
      const form = await readForm(req);
      const key = form.get("api_key") ?? "";
      redirect(res, "/", `dp_key=${encodeURIComponent(key)}; Path=/; HttpOnly`);
      return;
    }
    if (url.pathname === "/logout") {
      redirect(res, "/login", "dp_key=; Path=/; Max-Age=0");
      return;
    }

    const apiKey = readCookie(req, "dp_key");
    if (!apiKey) {
      redirect(res, "/login");
      return;
    }
    const client = new BrokerClient({ baseUrl: config.brokerUrl, apiKey });

    let me: PartyView;
    try {
      const who = await client.whoami();
      if (!who.party) {
        redirect(res, "/login?error=admin_key&message=use+a+party+API+key");
        return;
      }
      me = who.party;
    } catch {
      redirect(res, "/login?error=unauthenticated&message=key+rejected");
      return;
    }

    try {
      if (url.pathname === "/" && req.method === "GET") {
        const [contracts, catalog, parties, balance] = await Promise.all([
          client.contracts(),
          client.search({ text: params.get("q") ?? undefined, purpose: "trade" }),
          client.parties(),
          client.balance(me.party_id),
        ]);
        sendHtml(
          res,
          renderHome(
            me,
            balance.balance,
            contracts.contracts,
            catalog.results,
            parties.parties,
            params,
            config.pollSeconds,
          ),
        );
        return;
      }

      const contractPage = url.pathname.match(/^\/contracts\/([0-9a-f]+)$/);
      if (contractPage && req.method === "GET") {
        const contractId = contractPage[1];
        const [view, events, parties] = await Promise.all([
          client.contract(contractId),
          client.events(contractId),
          client.parties(),
        ]);
        sendHtml(
          res,
          renderDraftingPage(view, events.events, me, parties.parties, params, config.pollSeconds),
        );
        return;
      }

      const validityPage = url.pathname.match(/^\/contracts\/([0-9a-f]+)\/validity$/);
      if (validityPage && req.method === "GET") {
        const [report, parties] = await Promise.all([
          client.validity(validityPage[1]),
          client.parties(),
        ]);
        sendHtml(
          res,
          renderValidityPanel(report, parties.parties, params, config.pollSeconds),
        );
        return;
      }

      if (req.method === "POST") {
        await handleAction(url.pathname, req, res, client);
        return;
      }
    } catch (error) {
      if (error instanceof BrokerApiError) {
        // read-path failure (e.g. not a party to this contract)
        redirect(res, `/?${errorParams(error)}`);
        return;
      }
      sendHtml(res, `<pre>console error: ${String(error)}</pre>`, 500);
      return;
    }

    sendHtml(res, "<h1>404</h1>", 404);
  };

  return createServer((req, res) => {
    handle(req, res).catch((error) => {
      sendHtml(res, `<pre>console error: ${String(error)}</pre>`, 500);
    });
  });
}

async function handleAction(
  pathname: string,
  req: IncomingMessage,
  res: ServerResponse,
  client: BrokerClient,
): Promise<void> {
  const form = await readForm(req);
  const back = (contractId: string, suffix = "") =>
    `/contracts/${contractId}${suffix ? `?${suffix}` : ""}`;

  if (pathname === "/contracts/new") {
    const assetId = form.get("asset_id") ?? "";
    try {
      const view = await client.draft({
        asset_id: assetId,
        consumer: form.get("consumer") ?? "",
        price: form.get("price") ? Number(form.get("price")) : null,
      });
      redirect(res, back(view.contract_id, "note=draft+created"));
    } catch (error) {
      redirect(res, `/?${errorParams(error)}`);
    }
    return;
  }

  if (pathname === "/deposit") {
    try {
      await client.deposit(Number(form.get("amount") ?? "0"));
      redirect(res, "/?note=deposit+recorded");
    } catch (error) {
      redirect(res, `/?${errorParams(error)}`);
    }
    return;
  }

  const action = pathname.match(
    /^\/contracts\/([0-9a-f]+)\/(propose|respond|sign|activate|terminate|pay|confirm|bypass)$/,
  );
  if (!action) {
    sendHtml(res, "<h1>404</h1>", 404);
    return;
  }
  const [, contractId, verb] = action;
  const expected = form.get("expected_version");
  const expectedVersion = expected ? Number(expected) : undefined;

  try {
    if (verb === "propose") {
      await client.propose(contractId, {
        price: form.get("price") ? Number(form.get("price")) : null,
        expected_version: expectedVersion ?? null,
      });
    } else if (verb === "respond") {
      await client.respond(
        contractId,
        (form.get("decision") ?? "accept") as "accept" | "reject",
        expectedVersion,
      );
    } else if (verb === "sign") {
      await client.sign(contractId);
    } else if (verb === "activate") {
      await client.activate(contractId);
    } else if (verb === "terminate") {
      await client.terminate(contractId, form.get("reason") ?? "");
    } else if (verb === "pay") {
      await client.placeHold(contractId);
    } else if (verb === "confirm" || verb === "bypass") {
      const view = await client.contract(contractId);
      if (!view.hold_id) {
        redirect(res, back(contractId, "error=unknown_hold&message=no+escrow+hold"));
        return;
      }
      if (verb === "confirm") {
        await client.confirmHold(view.hold_id);
      } else {
        await client.claimBypass(view.hold_id);
      }
    }
    redirect(res, back(contractId, `note=${encodeURIComponent(verb)}+applied`));
  } catch (error) {
    redirect(res, back(contractId, errorParams(error)));
  }
}

const isMain = process.argv[1]?.endsWith("server.js");
if (isMain) {
  const config: ConsoleConfig = {
    brokerUrl: process.env.BROKER_URL ?? "http://127.0.0.1:8700",
    pollSeconds: Number(process.env.POLL_SECONDS ?? "2"),
  };
  const port = Number(process.env.PORT ?? "8780");
  createConsoleServer(config).listen(port, () => {
    console.log(`negotiation console on http://127.0.0.1:${port} -> broker ${config.brokerUrl}`);
  });
}
