/**
 * The contract transition table, restated client-side so action buttons are
 * derived from the same rules the service enforces. A button renders only if
 * the service would accept the operation for this (status, turn, actor).
 */

import type { ContractView } from "./types.js";

export type ContractAction =
  | "propose"
  | "accept"
  | "reject"
  | "sign"
  | "activate"
  | "terminate";

export type MoneyAction = "place_hold" | "confirm_hold" | "claim_bypass";

export const CONTRACT_ACTIONS: ContractAction[] = [
  "propose",
  "accept",
  "reject",
  "sign",
  "activate",
  "terminate",
];

const NEGOTIABLE_STATUSES = new Set(["Draft", "Negotiating"]);

function isParty(view: ContractView, actorId: string): boolean {
  return actorId === view.provider || actorId === view.consumer;
}

function bothSigned(view: ContractView): boolean {
  return Boolean(view.signatures[view.provider] && view.signatures[view.consumer]);
}

function escrowSettled(view: ContractView): boolean {
  return view.escrow_state === "Released" || view.escrow_state === "BypassGranted";
}

/**
 * Contract-lifecycle actions the service accepts for this actor right now.
 * Mirrors the engine: turn-taking while negotiable, signing while Accepted
 * (idempotent re-sign included), activation once both signatures and the
 * escrow settlement are in place, termination while Active.
 */
export function legalActions(view: ContractView, actorId: string): Set<ContractAction> {
  const legal = new Set<ContractAction>();
  if (!isParty(view, actorId)) {
    return legal;
  }
  if (NEGOTIABLE_STATUSES.has(view.status) && view.turn === actorId) {
    legal.add("propose");
    legal.add("accept");
    legal.add("reject");
  }
  if (view.status === "Accepted") {
    legal.add("sign");
    if (bothSigned(view) && escrowSettled(view)) {
      legal.add("activate");
    }
  }
  if (view.status === "Active") {
    legal.add("terminate");
  }
  return legal;
}

/**
 * Escrow buttons shown alongside. Funding needs an Accepted contract with no
 * live hold; confirmation belongs to the provider, the bypass to the paying
 * consumer (the service still applies its timeout, surfaced verbatim).
 */
export function moneyActions(view: ContractView, actorId: string): Set<MoneyAction> {
  const actions = new Set<MoneyAction>();
  if (view.status === "Accepted" && actorId === view.consumer) {
    if (view.escrow_state === null || view.escrow_state === "Refunded") {
      actions.add("place_hold");
    }
  }
  if (view.escrow_state === "Held") {
    if (actorId === view.provider) {
      actions.add("confirm_hold");
    }
    if (actorId === view.consumer) {
      actions.add("claim_bypass");
    }
  }
  return actions;
}

/** Categories whose terms a proposal may edit; everything else renders locked. */
export const NEGOTIABLE_CATEGORY = "RightsAndUsage";

export function isTermLocked(category: string): boolean {
  return category !== NEGOTIABLE_CATEGORY;
}

export const TERMINAL_STATUSES = new Set(["Rejected", "Expired", "Terminated"]);
