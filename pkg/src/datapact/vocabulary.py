"""Controlled term vocabulary.

The registry is a line-oriented UTF-8 file, one entry per line:

    category<TAB>key<TAB>value-type<TAB>requires-action(0|1)

The shipped default covers the six policy categories and their standard
terms; operators can extend a category by appending lines, no code change
required. Value types bound the scalar a term may carry; ``requires-action``
marks the rights-and-usage keys whose Permission/Prohibition terms must name
one of the usage actions.
"""

from __future__ import annotations

from dataclasses import dataclass
from decimal import Decimal
from importlib import resources
from pathlib import Path

from .errors import VocabularyViolation
from .model import PolicyCategory, Term, TermKind, UsageAction

VALUE_TYPES = frozenset(
    {"boolean", "integer", "decimal", "text", "timestamp", "enumeration", "timespan"}
)


@dataclass(frozen=True)
class VocabEntry:
    category: PolicyCategory
    key: str
    value_type: str
    requires_action: bool


class TermVocabulary:
    """Closed set of (category, key) pairs with their value typing rules."""

    def __init__(self, entries: list[VocabEntry]):
        self._entries: dict[tuple[PolicyCategory, str], VocabEntry] = {}
        for entry in entries:
            slot = (entry.category, entry.key)
            if slot in self._entries:
                raise VocabularyViolation(
                    f"duplicate registry entry for {entry.category.value}/{entry.key}"
                )
            self._entries[slot] = entry

    def entry_for(self, category: PolicyCategory, key: str) -> VocabEntry | None:
        return self._entries.get((category, key))

    def keys_for(self, category: PolicyCategory) -> list[str]:
        return sorted(key for (cat, key) in self._entries if cat is category)

    def term_problems(self, term: Term) -> list[str]:
        """All vocabulary rules the term violates, as human-readable strings."""
        entry = self.entry_for(term.category, term.key)
        if entry is None:
            return [f"unknown key {term.key!r} for category {term.category.value}"]
        problems = []
        if not _value_matches(entry.value_type, term.value):
            problems.append(
                f"term {term.category.value}/{term.key} expects a "
                f"{entry.value_type} value, got {term.value!r}"
            )
        wants_action = entry.requires_action and term.kind in (
            TermKind.PERMISSION,
            TermKind.PROHIBITION,
        )
        if wants_action and term.action is None:
            problems.append(
                f"{term.kind.value} term {term.key!r} requires a usage action tag"
            )
        if term.action is not None and not entry.requires_action:
            problems.append(f"term {term.key!r} does not take a usage action tag")
        return problems

    def validate_term(self, term: Term) -> None:
        problems = self.term_problems(term)
        if problems:
            raise VocabularyViolation("; ".join(problems))


def _value_matches(value_type: str, value: object) -> bool:
    if value_type == "boolean":
        return isinstance(value, bool)
    if value_type == "integer":
        return isinstance(value, int) and not isinstance(value, bool)
    if value_type == "decimal":
        return isinstance(value, Decimal) or (
            isinstance(value, int) and not isinstance(value, bool)
        )
    if value_type in ("text", "enumeration"):
        return isinstance(value, str)
    if value_type == "timestamp":
        return isinstance(value, int) and not isinstance(value, bool)
    if value_type == "timespan":
        return (
            isinstance(value, tuple)
            and len(value) == 2
            and all(isinstance(v, int) and not isinstance(v, bool) for v in value)
            and value[0] < value[1]
        )
    return False


def parse_vocabulary(text: str) -> TermVocabulary:
    entries = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip("\n")
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) != 4:
            raise VocabularyViolation(f"registry line {lineno}: expected 4 tab-separated fields")
        category_name, key, value_type, requires_action = (p.strip() for p in parts)
        try:
            category = PolicyCategory(category_name)
        except ValueError:
            raise VocabularyViolation(
                f"registry line {lineno}: unknown category {category_name!r}"
            ) from None
        if value_type not in VALUE_TYPES:
            raise VocabularyViolation(
                f"registry line {lineno}: unknown value type {value_type!r}"
            )
        if requires_action not in ("0", "1"):
            raise VocabularyViolation(
                f"registry line {lineno}: requires-action must be 0 or 1"
            )
        if not key:
            raise VocabularyViolation(f"registry line {lineno}: empty key")
        entries.append(VocabEntry(category, key, value_type, requires_action == "1"))
    return TermVocabulary(entries)


def load_vocabulary(path: str | Path | None = None) -> TermVocabulary:
    """Load a registry file, or the shipped default when no path is given."""
    if path is None:
        text = resources.files("datapact.data").joinpath("vocabulary.tsv").read_text("utf-8")
    else:
        text = Path(path).read_text("utf-8")
    return parse_vocabulary(text)


__all__ = [
    "TermVocabulary",
    "UsageAction",
    "VocabEntry",
    "VALUE_TYPES",
    "load_vocabulary",
    "parse_vocabulary",
]
