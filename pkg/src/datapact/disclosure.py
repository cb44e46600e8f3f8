"""Selective disclosure: per-field plaintext-or-salted-hash anchor payloads.

Every leaf of a contract's canonical document becomes one AnchorEntry keyed by
its dotted path. A configurable prefix-rule table decides Plain vs Hashed;
privacy terms, liability text, and price hash by default, identifiers /
status / parties / validity window stay plain even at the highest sensitivity
level, and sensitivity level 3 hashes everything else.

Hashed entries carry SHA-256(salt || rendered plaintext) where the salt is a
per-contract 128-bit secret kept off-ledger, so low-entropy fields (booleans,
small integers) cannot be recovered by dictionary probing.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from importlib import resources
from pathlib import Path

from .canonical import sha256
from .errors import ConfigInvalid, NonCanonicalizable


class Disclosure(str, Enum):
    PLAIN = "Plain"
    HASHED = "Hashed"


@dataclass(frozen=True)
class AnchorEntry:
    key: str  # dotted path, e.g. terms.RightsAndUsage.distribution.distribution.value
    disclosure: Disclosure
    value: str  # rendered plaintext, or hex SHA-256(salt || rendered plaintext)

    def to_document(self) -> dict:
        return {"key": self.key, "disclosure": self.disclosure.value, "value": self.value}

    @classmethod
    def from_document(cls, obj: dict) -> AnchorEntry:
        return cls(key=obj["key"], disclosure=Disclosure(obj["disclosure"]), value=obj["value"])


@dataclass(frozen=True)
class DisclosureRules:
    rules: tuple[tuple[str, Disclosure], ...]

    def classify(self, path: str, sensitivity_level: int) -> Disclosure:
        best: tuple[int, Disclosure] | None = None
        for prefix, disclosure in self.rules:
            if path == prefix or path.startswith(prefix + "."):
                if best is None or len(prefix) > best[0]:
                    best = (len(prefix), disclosure)
        if best is not None:
            return best[1]
        return Disclosure.HASHED if sensitivity_level == 3 else Disclosure.PLAIN


def parse_disclosure_rules(text: str) -> DisclosureRules:
    rules = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip("\n")
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) != 2:
            raise ConfigInvalid(f"disclosure rules line {lineno}: expected 2 fields")
        prefix, disclosure = parts[0].strip(), parts[1].strip()
        if disclosure not in ("Plain", "Hashed"):
            raise ConfigInvalid(f"disclosure rules line {lineno}: expected Plain or Hashed")
        if not prefix:
            raise ConfigInvalid(f"disclosure rules line {lineno}: empty path prefix")
        rules.append((prefix, Disclosure(disclosure)))
    return DisclosureRules(tuple(rules))


def load_disclosure_rules(path: str | Path | None = None) -> DisclosureRules:
    if path is None:
        text = resources.files("datapact.data").joinpath("disclosure_rules.tsv").read_text("utf-8")
    else:
        text = Path(path).read_text("utf-8")
    return parse_disclosure_rules(text)


def render_leaf(value: object) -> str:
    """Plaintext rendering of a document leaf, stable across anchor and verify."""
    if value is None:
        return "null"
    if value is True:
        return "true"
    if value is False:
        return "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, str):
        return value
    raise NonCanonicalizable(f"not a document leaf: {value!r}")


def leaf_entries(tree: object, prefix: str = "") -> list[tuple[str, object]]:
    """(dotted path, leaf scalar) pairs in document order; empty nodes yield none."""
    if isinstance(tree, dict):
        out = []
        for key in sorted(tree):
            path = f"{prefix}.{key}" if prefix else key
            out.extend(leaf_entries(tree[key], path))
        return out
    if isinstance(tree, (list, tuple)):
        out = []
        for i, item in enumerate(tree):
            path = f"{prefix}.{i}" if prefix else str(i)
            out.extend(leaf_entries(item, path))
        return out
    return [(prefix, tree)]


def hash_leaf(salt: bytes, rendered: str) -> str:
    return sha256(salt + rendered.encode("utf-8")).hex()


def build_anchor_payload(
    document_tree: dict,
    sensitivity_level: int,
    salt: bytes,
    rules: DisclosureRules,
) -> list[AnchorEntry]:
    """One AnchorEntry per leaf of the document tree."""
    entries = []
    for path, leaf in leaf_entries(document_tree):
        rendered = render_leaf(leaf)
        disclosure = rules.classify(path, sensitivity_level)
        if disclosure is Disclosure.PLAIN:
            entries.append(AnchorEntry(key=path, disclosure=disclosure, value=rendered))
        else:
            entries.append(
                AnchorEntry(key=path, disclosure=disclosure, value=hash_leaf(salt, rendered))
            )
    return entries


def verify_anchor_entry(entry: AnchorEntry, claimed_plaintext: object, salt: bytes) -> bool:
    """Does the claimed leaf value match the anchored entry?

    Accepts either the raw leaf scalar or its rendered string form.
    """
    rendered = (
        claimed_plaintext
        if isinstance(claimed_plaintext, str)
        else render_leaf(claimed_plaintext)
    )
    if entry.disclosure is Disclosure.PLAIN:
        return entry.value == rendered
    return entry.value == hash_leaf(salt, rendered)
