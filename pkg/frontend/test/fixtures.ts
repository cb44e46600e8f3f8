import type { ContractView, NegotiationEventView, PartyView } from "../src/types.js";

export const PROVIDER: PartyView = {
  party_id: "prov-1",
  display_name: "Gate Metrics Ltd",
  role: "provider",
  industry: "airport",
  public_key: "aa".repeat(32),
};

export const CONSUMER: PartyView = {
  party_id: "cons-1",
  display_name: "Blue Swift Air",
  role: "consumer",
  industry: "airline",
  public_key: "bb".repeat(32),
};

export const OUTSIDER: PartyView = {
  party_id: "out-1",
  display_name: "Bystander Board",
  role: "both",
  industry: "regulator",
  public_key: "cc".repeat(32),
};

export function contractView(overrides: Partial<ContractView> = {}): ContractView {
  return {
    contract_id: "c0ffee00c0ffee00c0ffee00c0ffee00",
    asset_id: "a55e700a55e700a55e700a55e700a55e",
    provider: PROVIDER.party_id,
    consumer: CONSUMER.party_id,
    status: "Draft",
    version: 1,
    turn: CONSUMER.party_id,
    price: 800,
    temporal_validity: { start: 1_750_000_000, end: 1_752_592_000 },
    spatial_validity: ["EU"],
    liability_text: "capped at fees",
    termination_clause: "30 days notice",
    validation_date: null,
    terms: {
      RightsAndUsage: {
        distribution: { distribution: { kind: "Permission", value: true } },
      },
      Quality: {
        accuracy: { "-": { kind: "Obligation", value: "0.97" } },
      },
    },
    signatures: {},
    escrow_state: null,
    hold_id: null,
    created_at: 1_750_000_000,
    accepted_at: null,
    salt: "00".repeat(16),
    ...overrides,
  };
}

export function proposalEvent(
  actor: string,
  at: number,
  resultingVersion: number,
  price: number | null,
): NegotiationEventView {
  return {
    event_id: `e${resultingVersion}`,
    contract_id: "c0ffee00c0ffee00c0ffee00c0ffee00",
    actor,
    action: resultingVersion === 2 ? "propose" : "counter_offer",
    payload: {
      diff: {
        price,
        temporal_validity: null,
        spatial_validity: null,
        set_terms: [],
        remove_terms: [],
      },
    },
    at,
    resulting_version: resultingVersion,
  };
}

export const DRAFT_EVENT: NegotiationEventView = {
  event_id: "e1",
  contract_id: "c0ffee00c0ffee00c0ffee00c0ffee00",
  actor: PROVIDER.party_id,
  action: "create_draft",
  payload: {},
  at: 1_750_000_000,
  resulting_version: 1,
};
