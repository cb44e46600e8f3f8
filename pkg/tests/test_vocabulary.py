from __future__ import annotations

from decimal import Decimal

import pytest

from datapact.errors import VocabularyViolation
from datapact.model import PolicyCategory, Term, TermKind, UsageAction
from datapact.vocabulary import load_vocabulary, parse_vocabulary


def test_default_registry_covers_all_six_categories(vocabulary):
    for category in PolicyCategory:
        assert vocabulary.keys_for(category), category


def test_default_registry_spot_checks(vocabulary):
    # rights-and-usage carries the usage actions, contract carries validity
    assert vocabulary.entry_for(PolicyCategory.RIGHTS_AND_USAGE, "distribution")
    assert vocabulary.entry_for(PolicyCategory.RIGHTS_AND_USAGE, "target industry")
    assert vocabulary.entry_for(PolicyCategory.CONTRACT, "temporal validity").value_type == "timespan"
    assert vocabulary.entry_for(PolicyCategory.QUALITY, "accuracy").value_type == "decimal"
    assert vocabulary.entry_for(
        PolicyCategory.PRIVACY_AND_PROTECTION, "privacy & sensitivity compliance"
    )
    # "liability" exists under both Contract and PrivacyAndProtection
    assert vocabulary.entry_for(PolicyCategory.CONTRACT, "liability")
    assert vocabulary.entry_for(PolicyCategory.PRIVACY_AND_PROTECTION, "liability")


def test_action_bearing_keys(vocabulary):
    bearing = {
        key
        for key in vocabulary.keys_for(PolicyCategory.RIGHTS_AND_USAGE)
        if vocabulary.entry_for(PolicyCategory.RIGHTS_AND_USAGE, key).requires_action
    }
    assert bearing == {
        "derivation",
        "attribution",
        "reproduction",
        "distribution",
        "re-context allowed",
    }
    for category in PolicyCategory:
        if category is PolicyCategory.RIGHTS_AND_USAGE:
            continue
        for key in vocabulary.keys_for(category):
            assert not vocabulary.entry_for(category, key).requires_action


def test_unknown_key_rejected(vocabulary):
    term = Term(PolicyCategory.QUALITY, TermKind.OBLIGATION, "freshness", Decimal("0.5"))
    problems = vocabulary.term_problems(term)
    assert len(problems) == 1 and "unknown key" in problems[0]


def test_value_type_enforced(vocabulary):
    bad = Term(PolicyCategory.QUALITY, TermKind.OBLIGATION, "accuracy", "high")
    assert any("decimal" in p for p in vocabulary.term_problems(bad))
    good = Term(PolicyCategory.QUALITY, TermKind.OBLIGATION, "accuracy", Decimal("0.97"))
    assert vocabulary.term_problems(good) == []


def test_bool_is_not_an_integer(vocabulary):
    term = Term(PolicyCategory.DATA_ASSET, TermKind.OBLIGATION, "created date", True)
    assert vocabulary.term_problems(term)


def test_action_required_and_forbidden(vocabulary):
    missing = Term(
        PolicyCategory.RIGHTS_AND_USAGE, TermKind.PERMISSION, "distribution", True
    )
    assert any("requires a usage action" in p for p in vocabulary.term_problems(missing))
    # obligations never need the tag, even on action-bearing keys
    obligation = Term(
        PolicyCategory.RIGHTS_AND_USAGE, TermKind.OBLIGATION, "distribution", True
    )
    assert vocabulary.term_problems(obligation) == []
    stray = Term(
        PolicyCategory.QUALITY,
        TermKind.OBLIGATION,
        "accuracy",
        Decimal("1"),
        action=UsageAction.DERIVATION,
    )
    assert any("does not take" in p for p in vocabulary.term_problems(stray))


def test_timespan_must_be_ordered(vocabulary):
    bad = Term(
        PolicyCategory.CONTRACT, TermKind.OBLIGATION, "temporal validity", (200, 100)
    )
    assert vocabulary.term_problems(bad)
    good = Term(
        PolicyCategory.CONTRACT, TermKind.OBLIGATION, "temporal validity", (100, 200)
    )
    assert vocabulary.term_problems(good) == []


def test_registry_extension_line():
    vocab = parse_vocabulary(
        "Quality\taccuracy\tdecimal\t0\nQuality\tfreshness\tdecimal\t0\n"
    )
    assert vocab.entry_for(PolicyCategory.QUALITY, "freshness")


@pytest.mark.parametrize(
    "line",
    [
        "NotACategory\tkey\ttext\t0",
        "Quality\taccuracy\tfloat\t0",
        "Quality\taccuracy\tdecimal\t2",
        "Quality\taccuracy\tdecimal",
        "Quality\t\tdecimal\t0",
    ],
)
def test_registry_parse_errors(line):
    with pytest.raises(VocabularyViolation):
        parse_vocabulary(line)


def test_duplicate_registry_entry_rejected():
    with pytest.raises(VocabularyViolation):
        parse_vocabulary("Quality\taccuracy\tdecimal\t0\nQuality\taccuracy\ttext\t0\n")


def test_comments_and_blank_lines_ignored():
    vocab = parse_vocabulary("# header\n\nQuality\taccuracy\tdecimal\t0\n")
    assert vocab.keys_for(PolicyCategory.QUALITY) == ["accuracy"]


def test_load_from_custom_path(tmp_path):
    path = tmp_path / "vocab.tsv"
    path.write_text("Contract\ttemporal validity\ttimespan\t0\n", encoding="utf-8")
    vocab = load_vocabulary(path)
    assert vocab.keys_for(PolicyCategory.CONTRACT) == ["temporal validity"]
