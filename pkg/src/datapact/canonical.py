"""Deterministic byte form and digests for machine-processable documents.

A document is a tree of ``None | bool | int | str | list | dict`` (dict keys
are strings). Canonical bytes are a JSON rendering with:

- keys sorted by codepoint after NFC normalization,
- no insignificant whitespace,
- all text NFC-normalized, UTF-8 encoded, not ASCII-escaped,
- integers in plain decimal (timestamps are integer epoch seconds),
- no floats (exact values only — decimals are rendered to strings by the
  document builders before they reach this layer).

Equal logical documents therefore canonicalize to identical bytes, and the
digest (SHA-256 over the bytes) is a stable content address.
"""

from __future__ import annotations

import hashlib
import json
import unicodedata
from dataclasses import dataclass

from .errors import NonCanonicalizable

_ESCAPES = {
    "\\": "\\\\",
    '"': '\\"',
    "\b": "\\b",
    "\f": "\\f",
    "\n": "\\n",
    "\r": "\\r",
    "\t": "\\t",
}


@dataclass(frozen=True)
class CanonicalDocument:
    bytes: bytes
    digest: bytes  # 32 raw bytes, SHA-256 of `bytes`

    @property
    def digest_hex(self) -> str:
        return self.digest.hex()


def sha256(data: bytes) -> bytes:
    return hashlib.sha256(data).digest()


def _escape(text: str) -> str:
    out = []
    for ch in text:
        mapped = _ESCAPES.get(ch)
        if mapped is not None:
            out.append(mapped)
        elif ch < "\x20":
            out.append(f"\\u{ord(ch):04x}")
        else:
            out.append(ch)
    return "".join(out)


def _write(node: object, out: list[str]) -> None:
    if node is None:
        out.append("null")
    elif node is True:
        out.append("true")
    elif node is False:
        out.append("false")
    elif isinstance(node, int):
        out.append(str(node))
    elif isinstance(node, str):
        out.append('"')
        out.append(_escape(unicodedata.normalize("NFC", node)))
        out.append('"')
    elif isinstance(node, (list, tuple)):
        out.append("[")
        for i, item in enumerate(node):
            if i:
                out.append(",")
            _write(item, out)
        out.append("]")
    elif isinstance(node, dict):
        keys = []
        for key in node:
            if not isinstance(key, str):
                raise NonCanonicalizable(f"document keys must be text, got {type(key).__name__}")
            keys.append(unicodedata.normalize("NFC", key))
        if len(set(keys)) != len(keys):
            raise NonCanonicalizable("document keys collide after normalization")
        out.append("{")
        for i, key in enumerate(sorted(keys)):
            if i:
                out.append(",")
            out.append('"')
            out.append(_escape(key))
            out.append('":')
            # normalized key may differ from the stored one; find the original
            _write(_lookup(node, key), out)
        out.append("}")
    else:
        raise NonCanonicalizable(
            f"unsupported value type {type(node).__name__}: {node!r}"
        )


def _lookup(node: dict, normalized_key: str) -> object:
    if normalized_key in node:
        return node[normalized_key]
    for key, value in node.items():
        if unicodedata.normalize("NFC", key) == normalized_key:
            return value
    raise NonCanonicalizable(f"key {normalized_key!r} vanished during canonicalization")


def canonical_bytes(tree: object) -> bytes:
    out: list[str] = []
    _write(tree, out)
    return "".join(out).encode("utf-8")


def canonicalize(document: object) -> CanonicalDocument:
    """Canonical bytes + digest for a document tree or an object with to_document()."""
    tree = document.to_document() if hasattr(document, "to_document") else document
    data = canonical_bytes(tree)
    return CanonicalDocument(bytes=data, digest=sha256(data))


def parse_canonical(data: bytes) -> object:
    """Inverse of canonical_bytes (any valid JSON is accepted on input)."""
    return json.loads(data.decode("utf-8"))
