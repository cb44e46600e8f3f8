/** Wire types mirroring the broker API's JSON bodies. */

export type ContractStatus =
  | "Draft"
  | "Negotiating"
  | "Accepted"
  | "Rejected"
  | "Active"
  | "Expired"
  | "Terminated";

export type EscrowState = "Held" | "Released" | "Refunded" | "BypassGranted" | null;

export interface TermNode {
  kind: "Permission" | "Prohibition" | "Obligation";
  value: unknown;
}

/** terms come nested: category -> key -> action slot ("-" for none) -> node */
export type TermsTree = Record<string, Record<string, Record<string, TermNode>>>;

export interface ContractView {
  contract_id: string;
  asset_id: string;
  provider: string;
  consumer: string;
  status: ContractStatus;
  version: number;
  turn: string;
  price: number;
  temporal_validity: { start: number; end: number };
  spatial_validity: string[];
  liability_text: string;
  termination_clause: string;
  validation_date: number | null;
  terms: TermsTree;
  signatures: Record<string, { signature: string; version: number }>;
  escrow_state: EscrowState;
  hold_id: string | null;
  created_at: number;
  accepted_at: number | null;
  salt: string;
}

export interface NegotiationEventView {
  event_id: string;
  contract_id: string;
  actor: string;
  action: string;
  payload: Record<string, unknown>;
  at: number;
  resulting_version: number;
}

export interface ValidityReportView {
  contract_id: string;
  checked_at: number;
  status: ContractStatus;
  status_valid: boolean;
  window_valid: boolean;
  signature_checks: Record<string, boolean>;
  signatures_valid: boolean;
  anchored: boolean;
  ledger_consistent: "match" | "mismatch" | "not_anchored";
  anchored_digest: string | null;
  current_digest: string;
}

export interface PartyView {
  party_id: string;
  display_name: string;
  role: string;
  industry: string;
  public_key: string;
}

export interface CatalogEntryView {
  asset: { asset_id: string; description: string; provider: string; [k: string]: unknown };
  policy: { policy_id: string; price_listing: number; sensitivity_level: number; [k: string]: unknown };
  listed_at: number;
  active: boolean;
}

export interface ApiError {
  code: string;
  message: string;
}

export class BrokerApiError extends Error {
  constructor(
    public readonly status: number,
    public readonly code: string,
    message: string,
  ) {
    super(message);
  }
}
