"""Bundled corpus integrity and golden outcome agreement."""

import pytest

from govshapes import corpus
from govshapes.errors import UnknownCaseError
from govshapes.rdf import EX, PROV, Literal, Triple


def first_float(graph, predicate):
    (triple,) = graph.match(EX.decision001, predicate)
    return float(triple.object.lexical)


def normalized_disparity(graph):
    # reference computation kept deliberately dumb: no engine code involved
    a = first_float(graph, EX.allocatedGPUHoursGroupA)
    b = first_float(graph, EX.allocatedGPUHoursGroupB)
    return abs(a - b) / max(a, b) if max(a, b) else 0.0


def test_case_id_partition():
    assert corpus.CASE_IDS == corpus.COMPILER_CASES + corpus.JURISDICTION_CASES
    assert len(set(corpus.CASE_IDS)) == 7


def test_unknown_case_is_rejected_with_the_menu():
    with pytest.raises(UnknownCaseError,
                       match="unknown case 'bogus' .have: conform"):
        corpus.case_source("bogus")


def test_build_case_attaches_golden_expectations(golden):
    case = corpus.build_case("missing_explanation")
    assert case.id == "missing_explanation"
    assert case.expected == {"Accountability": (True, 0), "Fairness": (False, 1),
                             "Combined": (False, 1)}
    assert "explanation" in case.description
    jur = corpus.build_case("exp1_violate")
    assert jur.expected["EU+Fairness"] == (False, 3)


def test_every_golden_outcome_reproduces(registry, expected):
    for case_id, row in expected.items():
        graph = corpus.build_case(case_id).graph
        for profile, (conforms, count) in row.items():
            report = registry.validate_profile(graph, profile, case_id).report
            assert report.conforms == conforms, (case_id, profile)
            assert len(report.violations) == count, (case_id, profile)


def test_goldens_expected_outcomes_agree_with_the_matrix(golden):
    for case_id, row in golden["expected_outcomes"].items():
        for profile, conforms in row.items():
            assert golden["compiler_matrix"][case_id][profile]["conforms"] \
                == conforms


def test_missing_explanation_is_conform_minus_one_link():
    conform = set(corpus.build_case("conform").graph)
    broken = set(corpus.build_case("missing_explanation").graph)
    assert broken < conform
    (removed,) = conform - broken
    assert removed == Triple(EX.decision001, EX.hasExplanation,
                             EX.explanation001)


def test_missing_model_artifact_unlinks_the_model_only():
    conform = set(corpus.build_case("conform").graph)
    broken = set(corpus.build_case("missing_model_artifact").graph)
    assert broken < conform
    (removed,) = conform - broken
    assert removed == Triple(EX.activity001, PROV.used, EX.model001)


def test_disparity_arithmetic_matches_the_intended_ratios():
    within = normalized_disparity(corpus.build_case("conform").graph)
    assert abs(within - 1 / 12) < 1e-12
    assert within < 0.20
    over = normalized_disparity(corpus.build_case("disparity_exceeds").graph)
    assert abs(over - 0.30) < 1e-12
    assert over > 0.20


@pytest.mark.parametrize("case_id, profile, shapes", [
    ("missing_explanation", "Combined", {EX.B1Shape}),
    ("missing_model_artifact", "Combined", {EX.A5Shape}),
    ("disparity_exceeds", "Fairness", {EX.B5Shape}),
    ("disparity_exceeds", "Accountability", set()),
    ("exp1_profile", "EU", {EX.B1Shape}),
    ("exp1_profile", "US", set()),
    ("exp1_violate", "EU", {EX.A2Shape, EX.B1Shape}),
    ("exp1_violate", "US", {EX.A2Shape}),
    ("exp1_violate", "China", {EX.A2Shape}),
    ("exp1_violate", "EU+Fairness", {EX.A2Shape, EX.B1Shape, EX.B5Shape}),
])
def test_violations_come_from_the_expected_shapes(registry, case_id,
                                                  profile, shapes):
    graph = corpus.build_case(case_id).graph
    report = registry.validate_profile(graph, profile, case_id).report
    assert {v.source_shape for v in report.violations} == shapes


def test_untyped_timestamp_trips_the_datatype_check(registry):
    graph = corpus.build_case("exp1_violate").graph
    report = registry.validate_profile(graph, "US").report
    (violation,) = report.violations
    assert violation.source_shape == EX.A2Shape
    assert violation.path == EX.timestamp
    assert violation.value == Literal("2025-11-03T14:21:07")


def test_shape_catalog_lists_all_ten_records():
    ids = [r.obligation_id for r in corpus.shape_catalog()]
    assert ids == ["A1", "A2", "A3", "A4", "A5", "B1", "B2", "B3", "B4", "B5"]


def test_block_sources_cover_the_published_names():
    assert len(corpus.BLOCK_NAMES) == 7
    assert "empty" in corpus.BLOCK_NAMES
    for name in corpus.BLOCK_NAMES:
        assert isinstance(corpus.block_source(name), str)


def test_default_registry_is_rebuilt_per_call(registry):
    fresh = corpus.default_registry()
    assert fresh is not registry
    assert fresh.block_names == registry.block_names
    assert fresh.profile_names == registry.profile_names


def test_corpora_preserve_case_order():
    assert [c for c, _ in corpus.compiler_corpus()] == list(corpus.COMPILER_CASES)
    assert [c for c, _ in corpus.full_corpus()] == list(corpus.CASE_IDS)


def test_clean_cases_pass_every_profile(registry):
    for case_id in ("conform", "exp1_conform"):
        graph = corpus.build_case(case_id).graph
        for profile in registry.profile_names:
            assert registry.validate_profile(graph, profile).report.conforms
