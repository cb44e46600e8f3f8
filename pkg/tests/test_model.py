from __future__ import annotations

import random
from decimal import Decimal

import pytest

from datapact.canonical import canonicalize
from datapact.errors import UnknownParty
from datapact.model import DataAsset, PartyDirectory, PolicyCategory, Term, TermKind, new_id
from datapact.policy import canonicalize_policy, define_policy, policy_document

from helpers import make_directory, random_asset
from test_policy import _distribution_permission


def test_new_id_is_128_bit_hex():
    seen = {new_id() for _ in range(1000)}
    assert len(seen) == 1000
    assert all(len(i) == 32 and int(i, 16) >= 0 for i in seen)


def test_asset_columns_must_be_disjoint():
    with pytest.raises(ValueError):
        DataAsset(
            asset_id=new_id(),
            description="x",
            provider="p",
            encrypted_columns=("a", "b"),
            unencrypted_columns=("b", "c"),
        )


def test_asset_date_ordering_enforced_when_all_present():
    with pytest.raises(ValueError):
        DataAsset(
            asset_id=new_id(),
            description="x",
            provider="p",
            created_date=300,
            modified_date=200,
            published_date=400,
        )
    # partial dates skip the check
    DataAsset(asset_id=new_id(), description="x", provider="p", created_date=300)


def test_party_directory_rejects_duplicates_and_unknowns():
    directory, parties = make_directory(2)
    with pytest.raises(ValueError):
        directory.add(parties[0], "00" * 32)
    with pytest.raises(UnknownParty):
        directory.require("ghost")
    assert directory.find_by_name(parties[1].display_name) == parties[1]
    assert directory.find_by_name("nobody") is None


def test_policy_canonical_form_is_term_order_independent(vocabulary, rng):
    _, parties = make_directory(1)
    asset = random_asset(rng, parties[0])
    terms = [
        _distribution_permission(),
        Term(PolicyCategory.QUALITY, TermKind.OBLIGATION, "accuracy", Decimal("0.9")),
        Term(PolicyCategory.PRIVACY_AND_PROTECTION, TermKind.OBLIGATION, "applicable law", "EU"),
    ]
    a = define_policy(asset, terms, 1, 10, vocabulary=vocabulary, now=5, policy_id="p1")
    shuffled = list(terms)
    random.Random(7).shuffle(shuffled)
    b = define_policy(asset, shuffled, 1, 10, vocabulary=vocabulary, now=5, policy_id="p1")
    assert canonicalize_policy(a).bytes == canonicalize_policy(b).bytes
    assert canonicalize(policy_document(a)).digest == canonicalize_policy(a).digest


def test_contract_canonical_form_is_term_order_independent(vocabulary, rng):
    from dataclasses import replace

    from test_contracts import World, draft

    import test_contracts

    world_fixture = test_contracts.world.__wrapped__(vocabulary, rng)
    contract = draft(world_fixture)
    permuted = replace(contract, terms=tuple(reversed(contract.terms)))
    assert canonicalize(contract).bytes == canonicalize(permuted).bytes
    assert contract.document_digest() == permuted.document_digest()
