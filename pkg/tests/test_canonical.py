from __future__ import annotations

import hashlib
import json
import random
import unicodedata

import pytest

from datapact.canonical import canonical_bytes, canonicalize, parse_canonical, sha256
from datapact.errors import NonCanonicalizable


# --- independent reference serializer (oracle) ---
#
# Deliberately a different construction from the production serializer: the
# tree is NFC-normalized up front, then handed to the stdlib json encoder
# with sorted keys and tight separators. The production code hand-rolls its
# byte writer; agreement between the two is the test.


def _nfc_tree(node):
    if isinstance(node, str):
        return unicodedata.normalize("NFC", node)
    if isinstance(node, dict):
        return {unicodedata.normalize("NFC", k): _nfc_tree(v) for k, v in node.items()}
    if isinstance(node, (list, tuple)):
        return [_nfc_tree(v) for v in node]
    return node


def reference_bytes(tree) -> bytes:
    return json.dumps(
        _nfc_tree(tree), sort_keys=True, separators=(",", ":"), ensure_ascii=False
    ).encode("utf-8")


def reference_digest(tree) -> str:
    return hashlib.sha256(reference_bytes(tree)).hexdigest()


def random_tree(rng: random.Random, depth: int = 0):
    roll = rng.random()
    if depth >= 3 or roll < 0.45:
        return rng.choice(
            [
                None,
                True,
                False,
                rng.randrange(-(10**9), 10**9),
                "".join(rng.choice("abc déÉ\n\t\"\\ xyz") for _ in range(rng.randrange(0, 12))),
            ]
        )
    if roll < 0.7:
        return [random_tree(rng, depth + 1) for _ in range(rng.randrange(0, 4))]
    return {
        "".join(rng.choice("abcdef") for _ in range(rng.randrange(1, 6))): random_tree(
            rng, depth + 1
        )
        for _ in range(rng.randrange(0, 5))
    }


def shuffled_copy(rng: random.Random, node):
    """Logically equal tree with dict insertion order permuted."""
    if isinstance(node, dict):
        keys = list(node)
        rng.shuffle(keys)
        return {k: shuffled_copy(rng, node[k]) for k in keys}
    if isinstance(node, list):
        return [shuffled_copy(rng, v) for v in node]
    return node


SAMPLE_CONTRACT_DOC = {
    "contract_id": "c0ffee00c0ffee00c0ffee00c0ffee00",
    "asset_id": "a55e700a55e700a55e700a55e700a55e",
    "provider": "party-00",
    "consumer": "party-01",
    "terms": {
        "RightsAndUsage": {
            "distribution": {"distribution": {"kind": "Permission", "value": True}},
            "target industry": {"-": {"kind": "Prohibition", "value": "airport"}},
        },
        "Quality": {"accuracy": {"-": {"kind": "Obligation", "value": "0.97"}}},
    },
    "price": 800,
    "temporal_validity": {"start": 1750000000, "end": 1752592000},
    "spatial_validity": ["EU", "UK"],
    "liability_text": "liability capped at fees paid",
    "termination_clause": "30 days notice",
    "version": 3,
    "status": "Accepted",
    "validation_date": None,
}

# frozen from reference_digest(SAMPLE_CONTRACT_DOC); independently computed
SAMPLE_DIGEST = "8a77ce697a796bf782a292ed7e2f576e90d2abc4d762b60f7697dee6a736d846"


def test_fixed_sample_digest_matches_reference():
    assert reference_digest(SAMPLE_CONTRACT_DOC) == SAMPLE_DIGEST
    assert canonicalize(SAMPLE_CONTRACT_DOC).digest_hex == SAMPLE_DIGEST


def test_matches_reference_serializer_on_random_trees(rng):
    for _ in range(300):
        tree = random_tree(rng)
        assert canonical_bytes(tree) == reference_bytes(tree)


def test_field_order_independence(rng):
    for _ in range(300):
        tree = random_tree(rng)
        permuted = shuffled_copy(rng, tree)
        assert canonical_bytes(tree) == canonical_bytes(permuted)


def test_round_trip_idempotence(rng):
    for _ in range(200):
        tree = random_tree(rng)
        data = canonical_bytes(tree)
        assert canonical_bytes(parse_canonical(data)) == data


def test_digest_is_sha256_of_bytes():
    doc = canonicalize(SAMPLE_CONTRACT_DOC)
    assert doc.digest == hashlib.sha256(doc.bytes).digest()
    assert len(doc.digest) == 32
    assert sha256(b"x") == hashlib.sha256(b"x").digest()


def _mutate(rng: random.Random, tree):
    """One structural or leaf mutation; returns None if nothing to mutate."""
    paths = []

    def walk(node, path):
        if isinstance(node, dict):
            for k, v in node.items():
                walk(v, path + [(node, k)])
        elif isinstance(node, list):
            for i, v in enumerate(node):
                walk(v, path + [(node, i)])
        else:
            paths.append(path)

    walk(tree, [])
    paths = [p for p in paths if p]  # scalar-at-root has no mutable container
    if not paths:
        return None
    target = rng.choice(paths)
    container, key = target[-1]
    old = container[key]
    if isinstance(old, bool):
        container[key] = not old
    elif isinstance(old, int):
        container[key] = old + 1
    elif isinstance(old, str):
        container[key] = old + "x"
    elif old is None:
        container[key] = 0
    return tree


def test_injectivity_under_mutation(rng):
    for _ in range(300):
        tree = random_tree(rng)
        original = canonical_bytes(tree)
        mutated = _mutate(rng, json.loads(json.dumps(tree)))
        if mutated is None:
            continue
        assert canonical_bytes(mutated) != original


def test_nfc_normalization_unifies_equal_text():
    composed = {"café": "résumé"}
    decomposed = {"café": "résumé"}
    assert canonical_bytes(composed) == canonical_bytes(decomposed)


def test_timestamps_and_integers_render_as_plain_decimal():
    assert canonical_bytes({"t": 1750000000}) == b'{"t":1750000000}'
    assert canonical_bytes(0) == b"0"
    assert canonical_bytes(-42) == b"-42"


@pytest.mark.parametrize("bad", [1.5, b"bytes", {1: "x"}, {"x": {2}}, object()])
def test_non_canonicalizable_inputs(bad):
    with pytest.raises(NonCanonicalizable):
        canonical_bytes(bad)


def test_canonicalize_accepts_document_objects():
    class Doc:
        def to_document(self):
            return {"a": 1}

    assert canonicalize(Doc()).bytes == b'{"a":1}'


def test_escaping_matches_json_module():
    tricky = {"q": '"quoted"', "b": "back\\slash", "nl": "a\nb", "ctl": "\x01\x02", "u": "ünïcødé"}
    assert canonical_bytes(tricky) == reference_bytes(tricky)
