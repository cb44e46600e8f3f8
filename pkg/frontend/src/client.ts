/** Thin fetch client for the broker API. Config: base address + API key. */

import {
  BrokerApiError,
  type CatalogEntryView,
  type ContractView,
  type NegotiationEventView,
  type PartyView,
  type ValidityReportView,
} from "./types.js";

export interface ClientConfig {
  baseUrl: string;
  apiKey: string;
}

async function parseError(response: Response): Promise<never> {
  let code = "http_error";
  let message = `${response.status} ${response.statusText}`;
  try {
    const body = (await response.json()) as { error?: { code: string; message: string } };
    if (body.error) {
      code = body.error.code;
      message = body.error.message;
    }
  } catch {
    /* non-JSON error body: keep the HTTP line */
  }
  throw new BrokerApiError(response.status, code, message);
}

export class BrokerClient {
  constructor(private readonly config: ClientConfig) {}

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const response = await fetch(`${this.config.baseUrl}${path}`, {
      method,
      headers: {
        "X-API-Key": this.config.apiKey,
        ...(body === undefined ? {} : { "Content-Type": "application/json" }),
      },
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    if (!response.ok) {
      await parseError(response);
    }
    return (await response.json()) as T;
  }

  whoami(): Promise<{ admin: boolean; party: PartyView | null }> {
    return this.request("GET", "/whoami");
  }

  parties(): Promise<{ parties: PartyView[] }> {
    return this.request("GET", "/parties");
  }

  search(query: { text?: string; purpose?: string }): Promise<{ results: CatalogEntryView[] }> {
    return this.request("POST", "/catalog/search", query);
  }

  contracts(): Promise<{ contracts: ContractView[] }> {
    return this.request("GET", "/contracts");
  }

  contract(contractId: string): Promise<ContractView> {
    return this.request("GET", `/contracts/${contractId}`);
  }

  events(contractId: string): Promise<{ events: NegotiationEventView[] }> {
    return this.request("GET", `/contracts/${contractId}/events`);
  }

  validity(contractId: string): Promise<ValidityReportView> {
    return this.request("GET", `/contracts/${contractId}/validity`);
  }

  draft(body: {
    asset_id: string;
    consumer: string;
    price?: number | null;
    temporal_validity?: { start: number; end: number };
  }): Promise<ContractView> {
    return this.request("POST", "/contracts", body);
  }

  propose(
    contractId: string,
    body: {
      price?: number | null;
      spatial_validity?: string[] | null;
      set_terms?: object[];
      expected_version?: number | null;
    },
  ): Promise<ContractView> {
    return this.request("POST", `/contracts/${contractId}/proposals`, body);
  }

  respond(
    contractId: string,
    decision: "accept" | "reject",
    expectedVersion?: number,
  ): Promise<ContractView> {
    return this.request("POST", `/contracts/${contractId}/response`, {
      decision,
      expected_version: expectedVersion ?? null,
    });
  }

  sign(contractId: string): Promise<ContractView> {
    return this.request("POST", `/contracts/${contractId}/signature`, {});
  }

  activate(contractId: string): Promise<ContractView> {
    return this.request("POST", `/contracts/${contractId}/activation`);
  }

  terminate(contractId: string, reason: string): Promise<ContractView> {
    return this.request("POST", `/contracts/${contractId}/termination`, { reason });
  }

  deposit(amount: number): Promise<{ party_id: string; balance: number }> {
    return this.request("POST", "/escrow/deposits", { amount });
  }

  balance(partyId: string): Promise<{ party_id: string; balance: number }> {
    return this.request("GET", `/escrow/accounts/${partyId}`);
  }

  placeHold(contractId: string): Promise<{ hold_id: string; state: string }> {
    return this.request("POST", "/escrow/holds", { contract_id: contractId });
  }

  confirmHold(holdId: string): Promise<{ hold_id: string; state: string }> {
    return this.request("POST", `/escrow/holds/${holdId}/confirmation`);
  }

  claimBypass(holdId: string): Promise<{ hold_id: string; state: string }> {
    return this.request("POST", `/escrow/holds/${holdId}/bypass`, {});
  }
}
