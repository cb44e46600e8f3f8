"""Policy validation, consistency reporting, and visibility evaluation.

Also home to the term value codecs: how a typed term value renders into a
document tree / event payload, and how it parses back under the vocabulary's
declared value type.
"""

from __future__ import annotations

from dataclasses import dataclass
from decimal import Decimal, InvalidOperation
from itertools import combinations

from .errors import ConflictingTerms, MissingPrivacyTerm, VocabularyViolation
from .model import (
    DataAsset,
    Party,
    Policy,
    PolicyCategory,
    Term,
    TermKind,
    TermValue,
    UsageAction,
    VisibilityRule,
    new_id,
)
from .vocabulary import TermVocabulary, _value_matches

_NO_ACTION = "-"  # action slot marker for terms without a usage action


@dataclass(frozen=True)
class Violation:
    kind: str  # unknown_key | value_type | action_required | action_forbidden
    #           | duplicate | conflict | missing_privacy_term
    message: str
    term_indices: tuple[int, ...] = ()


@dataclass(frozen=True)
class ConsistencyReport:
    violations: tuple[Violation, ...]

    @property
    def ok(self) -> bool:
        return not self.violations


def check_terms(terms: tuple[Term, ...] | list[Term], vocabulary: TermVocabulary) -> list[Violation]:
    """Vocabulary and pairwise structural violations for a term list."""
    violations: list[Violation] = []
    for i, term in enumerate(terms):
        entry = vocabulary.entry_for(term.category, term.key)
        if entry is None:
            violations.append(
                Violation(
                    "unknown_key",
                    f"unknown key {term.key!r} for category {term.category.value}",
                    (i,),
                )
            )
            continue
        if not _value_matches(entry.value_type, term.value):
            violations.append(
                Violation(
                    "value_type",
                    f"term {term.category.value}/{term.key} expects a "
                    f"{entry.value_type} value, got {term.value!r}",
                    (i,),
                )
            )
        needs_action = entry.requires_action and term.kind in (
            TermKind.PERMISSION,
            TermKind.PROHIBITION,
        )
        if needs_action and term.action is None:
            violations.append(
                Violation(
                    "action_required",
                    f"{term.kind.value} term {term.key!r} requires a usage action tag",
                    (i,),
                )
            )
        if term.action is not None and not entry.requires_action:
            violations.append(
                Violation(
                    "action_forbidden",
                    f"term {term.key!r} does not take a usage action tag",
                    (i,),
                )
            )

    by_slot: dict[tuple, list[int]] = {}
    for i, term in enumerate(terms):
        by_slot.setdefault(term.slot(), []).append(i)
    for slot, indices in sorted(by_slot.items(), key=lambda kv: kv[1]):
        for a, b in combinations(indices, 2):
            violations.append(
                Violation(
                    "duplicate",
                    f"terms {a} and {b} occupy the same slot "
                    f"({slot[0].value}, {slot[1]!r}, {slot[2].value if slot[2] else None})",
                    (a, b),
                )
            )

    by_rule: dict[tuple, dict[TermKind, list[int]]] = {}
    for i, term in enumerate(terms):
        by_rule.setdefault((term.key, term.action), {}).setdefault(term.kind, []).append(i)
    for (key, action), kinds in sorted(by_rule.items(), key=lambda kv: str(kv[0])):
        for a in kinds.get(TermKind.PERMISSION, []):
            for b in kinds.get(TermKind.PROHIBITION, []):
                pair = tuple(sorted((a, b)))
                violations.append(
                    Violation(
                        "conflict",
                        f"{key!r} (action {action.value if action else None}) is both "
                        f"permitted (term {pair[0]}) and prohibited (term {pair[1]})",
                        pair,
                    )
                )
    return violations


def check_policy_consistency(policy: Policy, vocabulary: TermVocabulary) -> ConsistencyReport:
    violations = check_terms(policy.terms, vocabulary)
    if policy.sensitivity_level == 3 and not any(
        t.category is PolicyCategory.PRIVACY_AND_PROTECTION for t in policy.terms
    ):
        violations.append(
            Violation(
                "missing_privacy_term",
                "sensitivity level 3 requires at least one PrivacyAndProtection term",
            )
        )
    return ConsistencyReport(tuple(violations))


_VOCAB_KINDS = ("unknown_key", "value_type", "action_required", "action_forbidden")
_CONFLICT_KINDS = ("duplicate", "conflict")


def raise_for_violations(violations: list[Violation] | tuple[Violation, ...]) -> None:
    """Map structured violations onto the typed policy errors."""
    vocab = [v for v in violations if v.kind in _VOCAB_KINDS]
    if vocab:
        raise VocabularyViolation("; ".join(v.message for v in vocab))
    conflicts = [v for v in violations if v.kind in _CONFLICT_KINDS]
    if conflicts:
        raise ConflictingTerms("; ".join(v.message for v in conflicts))
    privacy = [v for v in violations if v.kind == "missing_privacy_term"]
    if privacy:
        raise MissingPrivacyTerm(privacy[0].message)
    if violations:
        raise VocabularyViolation("; ".join(v.message for v in violations))


def define_policy(
    asset: DataAsset,
    terms: list[Term] | tuple[Term, ...],
    sensitivity_level: int,
    price_listing: int,
    visibility_rules: list[VisibilityRule] | tuple[VisibilityRule, ...] = (),
    *,
    vocabulary: TermVocabulary,
    now: int,
    policy_id: str | None = None,
) -> Policy:
    """Attach a validated policy to an asset. Never drops or reorders terms."""
    if not terms:
        raise VocabularyViolation("a policy needs at least one term")
    policy = Policy(
        policy_id=policy_id or new_id(),
        asset_id=asset.asset_id,
        terms=tuple(terms),
        sensitivity_level=sensitivity_level,
        price_listing=price_listing,
        visibility_rules=tuple(visibility_rules),
        attached_at=now,
    )
    report = check_policy_consistency(policy, vocabulary)
    raise_for_violations(report.violations)
    return policy


def _party_attribute(party: Party, attribute: str) -> str | None:
    if attribute == "industry":
        return party.industry
    if attribute == "role":
        return party.role.value
    if attribute == "party_id":
        return party.party_id
    if attribute == "display_name":
        return party.display_name
    return None


def evaluate_visibility(policy: Policy, requester: Party, purpose: str) -> bool:
    """Pure check: may this requester see the asset for this purpose?

    All visibility rules must match, and no Prohibition on target industry /
    target purpose may exclude the requester.
    """
    for rule in policy.visibility_rules:
        actual = _party_attribute(requester, rule.attribute)
        if actual is None or actual not in rule.allowed_values:
            return False
    for term in policy.terms:
        if term.kind is not TermKind.PROHIBITION:
            continue
        if term.category is not PolicyCategory.RIGHTS_AND_USAGE:
            continue
        if term.key == "target industry" and term.value == requester.industry:
            return False
        if term.key == "target purpose" and term.value == purpose:
            return False
    return True


# --- term value codecs and document building ---


def render_decimal(value: Decimal | int) -> str:
    """Canonical plain-notation rendering, no exponent, no trailing zeros."""
    d = value if isinstance(value, Decimal) else Decimal(value)
    return format(d.normalize(), "f")


def value_to_json(value: TermValue) -> object:
    """Term value as a document/payload scalar (decimals become strings)."""
    if isinstance(value, bool):
        return value
    if isinstance(value, int):
        return value
    if isinstance(value, Decimal):
        return render_decimal(value)
    if isinstance(value, str):
        return value
    if isinstance(value, tuple) and len(value) == 2:
        return {"start": value[0], "end": value[1]}
    raise VocabularyViolation(f"cannot encode term value {value!r}")


def value_from_json(value_type: str | None, raw: object) -> TermValue:
    """Parse a payload scalar under the registry's declared value type."""
    if value_type == "boolean":
        if isinstance(raw, bool):
            return raw
    elif value_type in ("integer", "timestamp"):
        if isinstance(raw, int) and not isinstance(raw, bool):
            return raw
    elif value_type == "decimal":
        if isinstance(raw, int) and not isinstance(raw, bool):
            return Decimal(raw)
        if isinstance(raw, str):
            try:
                return Decimal(raw)
            except InvalidOperation:
                raise VocabularyViolation(f"cannot parse decimal value {raw!r}") from None
    elif value_type in ("text", "enumeration"):
        if isinstance(raw, str):
            return raw
    elif value_type == "timespan":
        if isinstance(raw, dict) and set(raw) == {"start", "end"}:
            raw = [raw["start"], raw["end"]]
        if (
            isinstance(raw, (list, tuple))
            and len(raw) == 2
            and all(isinstance(v, int) and not isinstance(v, bool) for v in raw)
        ):
            return (raw[0], raw[1])
    elif value_type is None:
        # unknown key: keep the raw shape, validation will flag the key itself
        if isinstance(raw, (bool, int, str)):
            return raw
        if isinstance(raw, dict) and set(raw) == {"start", "end"}:
            return (raw["start"], raw["end"])
        if isinstance(raw, (list, tuple)) and len(raw) == 2:
            return (raw[0], raw[1])
        raise VocabularyViolation(f"cannot parse value {raw!r} for unknown key")
    if value_type not in (
        "boolean",
        "integer",
        "timestamp",
        "decimal",
        "text",
        "enumeration",
        "timespan",
        None,
    ):
        raise VocabularyViolation(f"unknown value type {value_type!r}")
    raise VocabularyViolation(f"value {raw!r} does not fit value type {value_type}")


def term_to_json(term: Term) -> dict:
    return {
        "category": term.category.value,
        "kind": term.kind.value,
        "key": term.key,
        "action": term.action.value if term.action else None,
        "value": value_to_json(term.value),
    }


def term_from_json(obj: dict, vocabulary: TermVocabulary) -> Term:
    try:
        category = PolicyCategory(obj["category"])
        kind = TermKind(obj["kind"])
        key = obj["key"]
        action = UsageAction(obj["action"]) if obj.get("action") else None
    except (KeyError, ValueError) as exc:
        raise VocabularyViolation(f"malformed term object: {exc}") from None
    entry = vocabulary.entry_for(category, key)
    value = value_from_json(entry.value_type if entry else None, obj.get("value"))
    return Term(category=category, kind=kind, key=key, value=value, action=action)


def terms_document(terms: tuple[Term, ...] | list[Term]) -> dict:
    """Terms nested by category -> key -> action slot -> {kind, value}."""
    tree: dict = {}
    for term in terms:
        slot = term.action.value if term.action else _NO_ACTION
        tree.setdefault(term.category.value, {}).setdefault(term.key, {})[slot] = {
            "kind": term.kind.value,
            "value": value_to_json(term.value),
        }
    return tree


def policy_document(policy: Policy) -> dict:
    return {
        "policy_id": policy.policy_id,
        "asset_id": policy.asset_id,
        "terms": terms_document(policy.terms),
        "sensitivity_level": policy.sensitivity_level,
        "price_listing": policy.price_listing,
        "visibility_rules": [
            {"attribute": r.attribute, "allowed_values": list(r.allowed_values)}
            for r in policy.visibility_rules
        ],
        "attached_at": policy.attached_at,
    }


def canonicalize_policy(policy: Policy):
    """Canonical byte form + digest of a policy (contracts carry their own)."""
    from .canonical import canonicalize

    return canonicalize(policy_document(policy))


def asset_document(asset: DataAsset) -> dict:
    return {
        "asset_id": asset.asset_id,
        "description": asset.description,
        "provider": asset.provider,
        "encrypted_columns": list(asset.encrypted_columns),
        "unencrypted_columns": list(asset.unencrypted_columns),
        "data_model_entities": list(asset.data_model_entities),
        "creator": asset.creator,
        "contributor": asset.contributor,
        "version": asset.version,
        "created_date": asset.created_date,
        "modified_date": asset.modified_date,
        "published_date": asset.published_date,
    }
