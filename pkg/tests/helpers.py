"""Shared generators for randomized tests.

Everything takes an explicit random.Random so failures reproduce from the
printed seed.
"""

from __future__ import annotations

import random
from decimal import Decimal

from datapact.model import (
    DataAsset,
    Party,
    PartyDirectory,
    PartyRole,
    PolicyCategory,
    Term,
    TermKind,
    UsageAction,
    VisibilityRule,
    new_id,
)
from datapact import signing
from datapact.vocabulary import TermVocabulary

INDUSTRIES = ("airline", "airport", "ground handler", "mro", "caterer", "regulator")
PURPOSES = ("trade", "research", "operations", "marketing")
WORDS = (
    "turnaround", "fuel", "delay", "baggage", "noise", "route", "slot",
    "boarding", "weather", "cargo", "maintenance", "gate",
)


def make_directory(n: int = 4) -> tuple[PartyDirectory, list[Party]]:
    directory = PartyDirectory()
    parties = []
    roles = (PartyRole.PROVIDER, PartyRole.CONSUMER, PartyRole.BOTH, PartyRole.BOTH)
    for i in range(n):
        keys = signing.generate_keypair(bytes([i + 1]) * 32)
        party = Party(
            party_id=f"party-{i:02d}",
            display_name=f"Party {i}",
            role=roles[i % len(roles)],
            industry=INDUSTRIES[i % len(INDUSTRIES)],
            public_key=keys.public_hex,
        )
        directory.add(party, keys.private_hex)
        parties.append(party)
    return directory, parties


def random_party(rng: random.Random, suffix: str = "") -> Party:
    keys = signing.generate_keypair(bytes([rng.randrange(1, 256)]) * 32)
    return Party(
        party_id=new_id() if not suffix else f"party-{suffix}",
        display_name=f"Org {rng.randrange(1000)}",
        role=rng.choice(list(PartyRole)),
        industry=rng.choice(INDUSTRIES),
        public_key=keys.public_hex,
    )


def random_value(rng: random.Random, value_type: str):
    if value_type == "boolean":
        return rng.random() < 0.5
    if value_type == "integer":
        return rng.randrange(-1000, 100000)
    if value_type == "decimal":
        return Decimal(rng.randrange(0, 100000)) / 100
    if value_type == "text":
        return " ".join(rng.choice(WORDS) for _ in range(rng.randrange(1, 5)))
    if value_type == "timestamp":
        return 1_700_000_000 + rng.randrange(0, 10_000_000)
    if value_type == "enumeration":
        return rng.choice(INDUSTRIES + PURPOSES)
    if value_type == "timespan":
        start = 1_700_000_000 + rng.randrange(0, 1_000_000)
        return (start, start + rng.randrange(3600, 10_000_000))
    raise AssertionError(value_type)


def random_term(
    rng: random.Random,
    vocabulary: TermVocabulary,
    category: PolicyCategory | None = None,
) -> Term:
    if category is None:
        category = rng.choice(list(PolicyCategory))
    key = rng.choice(vocabulary.keys_for(category))
    entry = vocabulary.entry_for(category, key)
    assert entry is not None
    kind = rng.choice(list(TermKind))
    action = None
    if entry.requires_action and kind in (TermKind.PERMISSION, TermKind.PROHIBITION):
        action = rng.choice(list(UsageAction))
    return Term(
        category=category,
        kind=kind,
        key=key,
        value=random_value(rng, entry.value_type),
        action=action,
    )


def random_valid_terms(
    rng: random.Random, vocabulary: TermVocabulary, n: int
) -> list[Term]:
    """Slot-unique, conflict-free term list (suitable for define_policy)."""
    terms: list[Term] = []
    used_slots = set()
    rule_kinds: dict[tuple, TermKind] = {}
    attempts = 0
    while len(terms) < n and attempts < n * 40:
        attempts += 1
        term = random_term(rng, vocabulary)
        if term.slot() in used_slots:
            continue
        rule = (term.key, term.action)
        prior = rule_kinds.get(rule)
        if prior is not None and {prior, term.kind} == {
            TermKind.PERMISSION,
            TermKind.PROHIBITION,
        }:
            continue
        used_slots.add(term.slot())
        if term.kind in (TermKind.PERMISSION, TermKind.PROHIBITION):
            rule_kinds[rule] = term.kind
        terms.append(term)
    assert terms, "generator failed to produce any term"
    return terms


def random_asset(rng: random.Random, provider: Party) -> DataAsset:
    columns = [f"col_{i}" for i in range(rng.randrange(2, 8))]
    split = rng.randrange(0, len(columns) + 1)
    created = 1_600_000_000 + rng.randrange(0, 1_000_000)
    return DataAsset(
        asset_id=new_id(),
        description=" ".join(rng.choice(WORDS) for _ in range(rng.randrange(2, 7))),
        provider=provider.party_id,
        encrypted_columns=tuple(columns[:split]),
        unencrypted_columns=tuple(columns[split:]),
        data_model_entities=tuple(
            sorted({rng.choice(WORDS) for _ in range(rng.randrange(0, 4))})
        ),
        creator=provider.display_name,
        contributor="",
        version=f"{rng.randrange(1, 4)}.{rng.randrange(0, 10)}",
        created_date=created,
        modified_date=created + rng.randrange(0, 10_000),
        published_date=created + 10_000 + rng.randrange(0, 10_000),
    )


def random_visibility_rules(rng: random.Random) -> list[VisibilityRule]:
    rules = []
    if rng.random() < 0.5:
        rules.append(
            VisibilityRule(
                "industry",
                tuple(sorted(rng.sample(INDUSTRIES, rng.randrange(1, 4)))),
            )
        )
    if rng.random() < 0.2:
        rules.append(
            VisibilityRule("role", tuple(sorted({rng.choice(["provider", "consumer", "both"])})))
        )
    return rules
