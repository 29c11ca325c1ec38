import math

import numpy as np
import pytest

from infoflow.channel import Channel, InputDistribution, Model
from infoflow.families import (
    PartitionFamily,
    all_subsets,
    classical_family,
    extension_family,
    reduction_family,
    trace_family,
)
from infoflow.measures import (
    LOG2,
    FlowReport,
    chain_decomposition,
    classical_cmi,
    conditional_entropy,
    entropy,
    flow_properties_audit,
    information_flow,
    mutual_information,
    verify_model,
)
from infoflow.partitions import FiniteSet, Partition, ProductSpace
from infoflow.sampling import random_model
from infoflow.scenarios import build_copy, build_sum, copy_closed_forms

from .oracles import oracle_cmi, oracle_conditional_entropy, oracle_flow, oracle_mi

SPIN = FiniteSet(("-1", "+1"))


# --- entropy -----------------------------------------------------------------


def test_entropy_examples():
    assert entropy([0.5, 0.5]) == pytest.approx(LOG2, abs=1e-15)
    assert entropy([1.0, 0.0]) == 0.0
    expected = 0.25 * math.log(4.0) + 0.75 * math.log(4.0 / 3.0)
    assert entropy([0.25, 0.75]) == pytest.approx(expected, abs=1e-15)


def test_entropy_rejects_bad_input():
    with pytest.raises(ValueError):
        entropy([0.5, 0.6])
    with pytest.raises(ValueError):
        entropy([1.5, -0.5])


# --- conditional entropy -------------------------------------------------------


def test_conditional_entropy_trivial_conditioning():
    model = build_copy(1.0)
    h = conditional_entropy(model, {0}, Partition.trivial(SPIN))
    assert h == pytest.approx(entropy([0.5, 0.5]), abs=1e-12)


def test_conditional_entropy_deterministic_given_atom():
    # the output copies input 2, so conditioning on it leaves no uncertainty
    model = build_copy(0.3)
    assert conditional_entropy(model, {1}, Partition.singletons(SPIN)) == pytest.approx(
        0.0, abs=1e-14
    )


def test_conditional_entropy_matches_oracle():
    rng = np.random.default_rng(9)
    for _ in range(10):
        model = random_model(rng)
        for M in all_subsets(model.space.n):
            ground = model.space.space_of(M)
            conditioning = Partition(ground, tuple(rng.integers(0, ground.size, ground.size)))
            assert conditional_entropy(model, M, conditioning) == pytest.approx(
                oracle_conditional_entropy(model, M, conditioning), abs=1e-10
            )


# --- mutual information --------------------------------------------------------


def test_mutual_information_copy_closed_form():
    model = build_copy(1.0)
    expected = LOG2 - math.log(1 + math.e**2) / (1 + math.e**2) - math.log(
        1 + math.e**-2
    ) / (1 + math.e**-2)
    assert mutual_information(model, {0}) == pytest.approx(expected, abs=1e-12)


def test_mutual_information_with_trace_conditioning_vanishes():
    model = build_copy(1.0)
    assert mutual_information(model, {0}, Partition.trivial(SPIN)) == 0.0


def test_mutual_information_uncoupled_inputs():
    assert mutual_information(build_copy(0.0), {0}) == pytest.approx(0.0, abs=1e-14)


def test_mutual_information_matches_oracle(corpus):
    for model in corpus[:8]:
        for M in all_subsets(model.space.n):
            assert mutual_information(model, M) == pytest.approx(
                oracle_mi(model, M), abs=1e-10
            )


# --- information flow ----------------------------------------------------------


def test_information_flow_copy_decomposition():
    model = build_copy(1.0)
    family = extension_family(model)
    assert information_flow(model, family, {0}) == pytest.approx(0.0, abs=1e-15)
    assert information_flow(model, family, {0, 1}, {0}) == pytest.approx(LOG2, abs=1e-12)


def test_flow_from_everything_equals_mutual_information(corpus):
    models = [build_copy(1.0), build_sum(3, 2)] + corpus[:6]
    for model in models:
        N = model.full_subset
        mi = mutual_information(model, N)
        for build in (extension_family, reduction_family, classical_family):
            family = build(model)
            assert information_flow(model, family, N) == pytest.approx(mi, abs=1e-10)


def test_information_flow_matches_definition_oracle():
    rng = np.random.default_rng(13)
    for _ in range(8):
        model = random_model(rng, n_inputs=2)
        for build in (extension_family, reduction_family):
            family = build(model)
            for M in all_subsets(2):
                for L in all_subsets(2):
                    if not L <= M:
                        continue
                    value = information_flow(model, family, M, L)
                    expected = oracle_flow(model, M, L, family[M], family[L])
                    assert value == pytest.approx(expected, abs=1e-10)


def test_information_flow_validates_nesting():
    model = build_copy(0.0)
    family = extension_family(model)
    with pytest.raises(ValueError):
        information_flow(model, family, {0}, {1})


def test_information_flow_warns_on_nonprojective_family():
    model = build_sum(3, 2)
    family = trace_family(model)
    with pytest.warns(UserWarning, match="not projective"):
        information_flow(model, family, {0, 1}, {0})


def _divergent_setup():
    space = ProductSpace((SPIN, SPIN))
    mu = InputDistribution(space, np.array([0.5, 0.0, 0.0, 0.5]))
    rows = np.array([[1.0, 0.0], [0.5, 0.5], [0.5, 0.5], [0.0, 1.0]])
    model = Model(mu, Channel(space, SPIN, rows))
    pair_ground = space.space_of({0, 1})
    parts = {
        frozenset(): Partition.trivial(space.space_of(frozenset())),
        frozenset({0}): Partition.singletons(SPIN),
        frozenset({1}): Partition.trivial(SPIN),
        frozenset({0, 1}): Partition(pair_ground, (0, 1, 1, 0)),
    }
    return model, parts


def test_flow_divergence_raises_for_certified_family():
    # a family falsely certified projective must trip the internal guard
    model, parts = _divergent_setup()
    family = PartitionFamily(model.space, parts, "forged", True, None)
    with pytest.raises(AssertionError, match="absolute continuity"):
        information_flow(model, family, {0, 1}, {0})


def test_flow_divergence_returns_inf_for_uncertified_family():
    model, parts = _divergent_setup()
    family = PartitionFamily(model.space, parts, "custom", False, None)
    with pytest.warns(UserWarning):
        value = information_flow(model, family, {0, 1}, {0})
    assert math.isinf(value)


# --- classical CMI ---------------------------------------------------------------


def test_classical_cmi_copy():
    strong = build_copy(20.0)
    assert classical_cmi(strong, {0, 1}, {0}) == pytest.approx(0.0, abs=1e-12)
    for beta in (-2.0, 0.0, 1.0, 3.0):
        model = build_copy(beta)
        assert classical_cmi(model, {0, 1}, {1}) == pytest.approx(0.0, abs=1e-13)
        total = classical_cmi(model, {0, 1}, frozenset())
        assert total == pytest.approx(LOG2, abs=1e-12)


def test_classical_cmi_matches_oracle(corpus):
    for model in corpus[:8]:
        N = model.full_subset
        for L in all_subsets(model.space.n):
            assert classical_cmi(model, N, L) == pytest.approx(
                oracle_cmi(model, N, L), abs=1e-10
            )


def test_classical_cmi_independent_inputs_factorizes():
    # independent inputs, channel reads only input 1: I(X2 ; Z | X1) = 0
    space = ProductSpace((SPIN, SPIN))
    mu = InputDistribution(space, np.outer([0.4, 0.6], [0.3, 0.7]).T.reshape(-1))
    rows = np.array([[0.9, 0.1], [0.2, 0.8], [0.9, 0.1], [0.2, 0.8]])
    model = Model(mu, Channel(space, SPIN, rows))
    assert classical_cmi(model, {0, 1}, {0}) == pytest.approx(0.0, abs=1e-14)
    assert classical_cmi(model, {0, 1}, {1}) == pytest.approx(
        mutual_information(model, {0}), abs=1e-12
    )


# --- chain decompositions ---------------------------------------------------------


def test_chain_decomposition_copy():
    model = build_copy(1.0)
    report = chain_decomposition(model, extension_family(model), [[0], [1]])
    assert report.terms[0] == pytest.approx(0.0, abs=1e-15)
    assert report.terms[1] == pytest.approx(LOG2, abs=1e-12)
    assert report.total == pytest.approx(LOG2, abs=1e-12)
    assert report.residual < 1e-9
    assert report.labels == ("X1 -> Z", "X2 -> Z | X1")


def test_chain_decomposition_single_group():
    model = build_copy(0.4)
    report = chain_decomposition(model, extension_family(model), [[0, 1]])
    assert len(report.terms) == 1
    assert report.terms[0] == pytest.approx(mutual_information(model, {0, 1}), abs=1e-12)


def test_chain_decomposition_ordering_consistency():
    import itertools

    rng = np.random.default_rng(21)
    for _ in range(5):
        model = random_model(rng, n_inputs=3)
        mi = mutual_information(model, model.full_subset)
        for build in (extension_family, reduction_family):
            family = build(model)
            totals = []
            for perm in itertools.permutations([[0], [1], [2]]):
                report = chain_decomposition(model, family, perm)
                assert report.residual < 1e-9
                assert min(report.terms) >= -1e-12
                totals.append(sum(report.terms))
            for total in totals:
                assert total == pytest.approx(mi, abs=1e-9)


def test_chain_decomposition_rejects_bad_orderings():
    model = build_copy(0.0)
    family = extension_family(model)
    with pytest.raises(ValueError, match="overlap"):
        chain_decomposition(model, family, [[0], [0, 1]])
    with pytest.raises(ValueError, match="nonempty"):
        chain_decomposition(model, family, [[0], []])
    with pytest.raises(ValueError, match="at least one"):
        chain_decomposition(model, family, [])


def test_classical_family_chain_reproduces_classical_decomposition():
    model = build_copy(1.0)
    report = chain_decomposition(model, classical_family(model), [[0], [1]])
    assert report.terms[0] == pytest.approx(mutual_information(model, {0}), abs=1e-14)
    assert report.terms[1] == pytest.approx(
        classical_cmi(model, {0, 1}, {0}), abs=1e-14
    )
    assert report.residual < 1e-12


def test_two_input_flow_inequalities(corpus):
    for model in corpus:
        if model.space.n != 2:
            continue
        family = extension_family(model)
        flow_first = information_flow(model, family, {0})
        assert flow_first <= mutual_information(model, {0}) + 1e-12
        flow_rest = information_flow(model, family, {0, 1}, {0})
        assert flow_rest >= classical_cmi(model, {0, 1}, {0}) - 1e-12


# --- audits -----------------------------------------------------------------------


def test_flow_properties_audit_copy():
    model = build_copy(1.0)
    report = flow_properties_audit(model, extension_family(model))
    assert report.passed
    assert [r.check_id for r in report.results] == ["(a)", "(b)", "(c)", "(d)", "(e)"]
    # (b) is strict here: association exceeds the causal part
    gap = mutual_information(model, {0}) - information_flow(model, extension_family(model), {0})
    assert gap > 0.01


def test_flow_properties_audit_sum_reduction():
    model = build_sum(3, 2)
    family = reduction_family(model)
    report = flow_properties_audit(model, family)
    assert report.passed
    for M in all_subsets(3):
        if M and M != frozenset({0, 1, 2}):
            assert information_flow(model, family, M) == pytest.approx(0.0, abs=1e-14)


def test_flow_properties_audit_random(corpus_families):
    for model, ext, red in corpus_families[:15]:
        assert flow_properties_audit(model, ext).passed
        assert flow_properties_audit(model, red).passed
        assert flow_properties_audit(model, classical_family(model)).passed


def test_verify_model_passes_for_projective_families():
    model = build_copy(1.0)
    report = verify_model(model, extension_family(model))
    assert report.passed
    ids = [r.check_id for r in report.results]
    assert ids == ["projectivity", "chain-rule", "nonnegativity", "(a)", "(b)", "(c)", "(d)", "(e)"]


def test_verify_model_flags_raw_traces():
    model = build_sum(3, 2)
    report = verify_model(model, trace_family(model))
    assert not report.passed
    failures = {r.check_id for r in report.failures()}
    assert "projectivity" in failures
    projectivity = next(r for r in report.results if r.check_id == "projectivity")
    assert "witness" in projectivity.message


def test_raw_traces_break_the_chain_rule_on_skewed_sum():
    # with a skewed input distribution the raw-trace decomposition no longer
    # telescopes; the audit flags the family and the residual is visible
    base = build_sum(3, 2)
    weights = np.arange(1.0, 9.0)
    model = Model(InputDistribution(base.space, weights / weights.sum()), base.nu)
    family = trace_family(model)
    assert not family.projective
    report = verify_model(model, family)
    failures = {r.check_id for r in report.failures()}
    assert "projectivity" in failures
    assert {"chain-rule", "nonnegativity"} & failures


# --- report serialization -----------------------------------------------------------


def test_flow_report_serialization():
    model = build_copy(1.0)
    report = chain_decomposition(model, extension_family(model), [[0], [1]])
    data = report.to_dict()
    assert data["family"] == "extension"
    assert data["unit"] == "nats"
    assert data["ordering"] == [[1], [2]]
    assert [t["label"] for t in data["terms"]] == ["X1 -> Z", "X2 -> Z | X1"]

    bits = report.to_dict(bits=True)
    assert bits["unit"] == "bits"
    assert bits["total"] == pytest.approx(1.0, abs=1e-12)

    rows = report.to_csv_rows()
    assert rows[0] == ["kind", "step", "label", "value"]
    assert rows[1][:3] == ["term", "1", "X1 -> Z"]
    assert rows[-1][0] == "residual"
    assert float(rows[-2][3]) == pytest.approx(LOG2, abs=1e-12)
