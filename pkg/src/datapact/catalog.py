"""Asset registry and policy-respecting, identity-aware search."""

from __future__ import annotations

import threading
from dataclasses import dataclass

from .errors import DuplicateAsset, InconsistentPolicy
from .model import DataAsset, PartyDirectory, Policy, PolicyCategory
from .policy import check_policy_consistency, evaluate_visibility, value_to_json
from .vocabulary import TermVocabulary


@dataclass(frozen=True)
class CatalogEntry:
    asset: DataAsset
    policy: Policy
    listed_at: int
    active: bool = True


@dataclass(frozen=True)
class SearchQuery:
    """All predicates AND together; requester identity always applies."""

    requester: str  # party_id
    purpose: str = ""
    text: str | None = None
    entity_tags: tuple[str, ...] | None = None
    provider: str | None = None
    category_filters: tuple[tuple[PolicyCategory, str, str], ...] | None = None


def _matches(entry: CatalogEntry, query: SearchQuery) -> bool:
    asset = entry.asset
    if query.text is not None and query.text.lower() not in asset.description.lower():
        return False
    if query.entity_tags is not None and not set(query.entity_tags) <= set(
        asset.data_model_entities
    ):
        return False
    if query.provider is not None and asset.provider != query.provider:
        return False
    if query.category_filters is not None:
        for category, key, rendered in query.category_filters:
            if not any(
                t.category is category
                and t.key == key
                and _render(t.value) == rendered
                for t in entry.policy.terms
            ):
                return False
    return True


def _render(value) -> str:
    encoded = value_to_json(value)
    if isinstance(encoded, bool):
        return "true" if encoded else "false"
    if isinstance(encoded, dict):
        return f"{encoded['start']}..{encoded['end']}"
    return str(encoded)


class Catalog:
    """Active listings, one per asset_id. Deregistration keeps the entry
    resolvable (contracts reference assets forever) but hides it from search
    and drafting."""

    def __init__(self, parties: PartyDirectory, vocabulary: TermVocabulary):
        self._parties = parties
        self._vocabulary = vocabulary
        self._entries: dict[str, CatalogEntry] = {}
        self._lock = threading.Lock()

    def validate_registration(self, asset: DataAsset, policy: Policy) -> None:
        if policy.asset_id != asset.asset_id:
            raise InconsistentPolicy("policy is attached to a different asset")
        existing = self._entries.get(asset.asset_id)
        if existing is not None and existing.active:
            raise DuplicateAsset(f"asset {asset.asset_id} is already listed")
        report = check_policy_consistency(policy, self._vocabulary)
        if not report.ok:
            raise InconsistentPolicy(
                "; ".join(v.message for v in report.violations)
            )

    def register_asset(self, asset: DataAsset, policy: Policy, *, now: int) -> CatalogEntry:
        with self._lock:
            self.validate_registration(asset, policy)
            entry = CatalogEntry(asset=asset, policy=policy, listed_at=now, active=True)
            self._entries[asset.asset_id] = entry
            return entry

    def deregister(self, asset_id: str) -> CatalogEntry:
        with self._lock:
            entry = self._entries.get(asset_id)
            if entry is None or not entry.active:
                raise DuplicateAsset(f"asset {asset_id} is not actively listed")
            inactive = CatalogEntry(
                asset=entry.asset, policy=entry.policy, listed_at=entry.listed_at, active=False
            )
            self._entries[asset_id] = inactive
            return inactive

    def get(self, asset_id: str) -> CatalogEntry | None:
        return self._entries.get(asset_id)

    def all_entries(self) -> list[CatalogEntry]:
        return sorted(self._entries.values(), key=lambda e: e.asset.asset_id)

    def search(self, query: SearchQuery) -> list[CatalogEntry]:
        """Active entries matching every predicate and visible to the requester,
        newest listing first, ties broken by asset_id."""
        requester = self._parties.require(query.requester)
        hits = [
            entry
            for entry in self._entries.values()
            if entry.active
            and _matches(entry, query)
            and evaluate_visibility(entry.policy, requester, query.purpose)
        ]
        hits.sort(key=lambda e: (-e.listed_at, e.asset.asset_id))
        return hits
