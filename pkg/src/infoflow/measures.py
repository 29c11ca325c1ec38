"""Information measures over channel models and partition families.

All quantities are reported in nats and evaluated at the resolution of the
model's output partition.  Flows compare the coarse marginal channels of two
nested input subsets under a partition family; with the singleton family
they reduce to the classical mutual-information quantities.  Contributions
from zero-probability cells follow the 0*log(0) = 0 convention, and inputs
of zero mass are skipped outright.
"""

from __future__ import annotations

import itertools
import math
import warnings
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .channel import Model, coarse_marginal, input_marginal
from .families import PartitionFamily, subset_name
from .partitions import Partition

__all__ = [
    "LOG2",
    "EQUALITY_TOL",
    "INEQUALITY_SLACK",
    "entropy",
    "conditional_entropy",
    "mutual_information",
    "information_flow",
    "classical_cmi",
    "FlowReport",
    "chain_decomposition",
    "CheckResult",
    "AuditReport",
    "flow_properties_audit",
    "verify_model",
]

LOG2 = math.log(2.0)
EQUALITY_TOL = 1e-9      # tolerance for equality assertions
INEQUALITY_SLACK = 1e-12  # slack for inequality assertions


def entropy(dist, tol: float = 1e-9) -> float:
    """Shannon entropy of a probability vector, in nats."""
    p = np.asarray(dist, dtype=np.float64)
    if p.size == 0 or p.min() < 0 or abs(p.sum() - 1.0) > tol:
        raise ValueError("input is not a probability vector")
    pos = p[p > 0]
    return float(-(pos * np.log(pos)).sum())


def _ratio_sum(weights: np.ndarray, numer: np.ndarray, denom: np.ndarray) -> float:
    """sum_i w_i * sum_c numer[i,c] * log(numer[i,c]/denom[i,c]), skipping
    cells with numer == 0."""
    pos = numer > 0
    safe_n = np.where(pos, numer, 1.0)
    safe_d = np.where(pos, denom, 1.0)
    terms = np.where(pos, numer * (np.log(safe_n) - np.log(safe_d)), 0.0)
    return float((weights[:, None] * terms).sum())


def conditional_entropy(model: Model, M: Iterable[int], conditioning: Partition) -> float:
    """Entropy of the output partition given a conditioning partition of X_M."""
    kernel = coarse_marginal(model, M, conditioning)
    mask = kernel.atom_mass > 0
    table = kernel.table[mask]
    pos = table > 0
    safe = np.where(pos, table, 1.0)
    inner = -(np.where(pos, table * np.log(safe), 0.0)).sum(axis=1)
    return float((kernel.atom_mass[mask] * inner).sum())


def mutual_information(model: Model, M: Iterable[int], conditioning: Partition | None = None) -> float:
    """Information between the output partition and a conditioning partition
    of X_M (default: full resolution, the classical mutual information)."""
    M = model.space.check_subset(M)
    if conditioning is None:
        conditioning = Partition.singletons(model.space.space_of(M))
    kernel = coarse_marginal(model, M, conditioning)
    mask = kernel.atom_mass > 0
    table = kernel.table[mask]
    denom = np.broadcast_to(model.gamma_pushforward, table.shape)
    return _ratio_sum(kernel.atom_mass[mask], table, denom)


def _flow_value(
    model: Model,
    M: frozenset[int],
    L: frozenset[int],
    part_M: Partition,
    part_L: Partition,
    projective: bool,
) -> float:
    space = model.space
    kernel_M = coarse_marginal(model, M, part_M)
    kernel_L = coarse_marginal(model, L, part_L)
    mu_M = input_marginal(model, M)
    support = np.nonzero(mu_M > 0)[0]
    atoms_M = np.asarray(part_M.block_of, dtype=np.int64)[support]
    pm = space.project_map(M, L)
    atoms_L = np.asarray(part_L.block_of, dtype=np.int64)[pm[support]]
    table_M = kernel_M.table[atoms_M]
    table_L = kernel_L.table[atoms_L]
    diverging = (table_M > 0) & (table_L == 0)
    if diverging.any():
        # The coarser marginal is an average over the finer one, so under a
        # projective family its support dominates; a violation is a bug.
        if projective:
            raise AssertionError("conditioned marginal lost absolute continuity")
        warnings.warn("flow diverges: coarser marginal vanishes where finer does not")
        return math.inf
    return _ratio_sum(mu_M[support], table_M, table_L)


def information_flow(
    model: Model, family: PartitionFamily, M: Iterable[int], L: Iterable[int] = ()
) -> float:
    """Flow of information to the output from the inputs in M beyond those
    in L (L a subset of M), under the family's conditioning partitions.

    Nonnegative and chain-rule additive whenever the family is projective;
    a non-projective family triggers a warning and voids both guarantees.
    """
    space = model.space
    M = space.check_subset(M)
    L = space.check_subset(L)
    if not L <= M:
        raise ValueError("L must be a subset of M")
    if not family.projective:
        warnings.warn(
            f"family '{family.kind}' is not projective; flow values lose their guarantees"
        )
    return _flow_value(model, M, L, family[M], family[L], family.projective)


def classical_cmi(model: Model, M: Iterable[int], L: Iterable[int] = ()) -> float:
    """Classical conditional mutual information between the inputs in
    M minus L and the output, given the inputs in L."""
    space = model.space
    M = space.check_subset(M)
    L = space.check_subset(L)
    if not L <= M:
        raise ValueError("L must be a subset of M")
    return _flow_value(
        model,
        M,
        L,
        Partition.singletons(space.space_of(M)),
        Partition.singletons(space.space_of(L)),
        projective=True,
    )


def _group_label(group: frozenset[int]) -> str:
    return ",".join(f"X{i + 1}" for i in sorted(group))


@dataclass(frozen=True)
class FlowReport:
    """An ordered chain-rule decomposition with per-step flows."""

    ordering: tuple[frozenset[int], ...]
    labels: tuple[str, ...]
    terms: tuple[float, ...]
    total: float
    residual: float
    family_kind: str
    unit: str = "nats"

    def _scale(self, bits: bool) -> float:
        return 1.0 / LOG2 if bits else 1.0

    def to_dict(self, bits: bool = False) -> dict:
        s = self._scale(bits)
        return {
            "family": self.family_kind,
            "unit": "bits" if bits else self.unit,
            "ordering": [sorted(i + 1 for i in group) for group in self.ordering],
            "terms": [
                {"label": lab, "value": val * s}
                for lab, val in zip(self.labels, self.terms)
            ],
            "total": self.total * s,
            "residual": self.residual * s,
        }

    def to_csv_rows(self, bits: bool = False) -> list[list[str]]:
        s = self._scale(bits)
        rows = [["kind", "step", "label", "value"]]
        for step, (lab, val) in enumerate(zip(self.labels, self.terms), start=1):
            rows.append(["term", str(step), lab, repr(val * s)])
        union = frozenset().union(*self.ordering)
        rows.append(["total", "", f"{_group_label(union)} -> Z", repr(self.total * s)])
        rows.append(["residual", "", "", repr(self.residual * s)])
        return rows


def chain_decomposition(
    model: Model, family: PartitionFamily, ordering: Iterable[Iterable[int]]
) -> FlowReport:
    """Decompose the flow from the union of the ordered groups into one
    flow term per group, each conditioned on the groups before it."""
    space = model.space
    groups = [space.check_subset(g) for g in ordering]
    if not groups:
        raise ValueError("ordering must contain at least one group")
    seen: set[int] = set()
    for g in groups:
        if not g:
            raise ValueError("ordering groups must be nonempty")
        if seen & g:
            raise ValueError("ordering groups overlap")
        seen |= g
    terms = []
    labels = []
    prefix: frozenset[int] = frozenset()
    for g in groups:
        current = prefix | g
        terms.append(information_flow(model, family, current, prefix))
        label = f"{_group_label(g)} -> Z"
        if prefix:
            label += f" | {_group_label(prefix)}"
        labels.append(label)
        prefix = current
    total = information_flow(model, family, prefix, frozenset())
    residual = abs(total - sum(terms))
    return FlowReport(
        tuple(groups), tuple(labels), tuple(terms), total, residual, family.kind
    )


@dataclass(frozen=True)
class CheckResult:
    check_id: str
    passed: bool
    message: str


@dataclass(frozen=True)
class AuditReport:
    results: tuple[CheckResult, ...]

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.results)

    def failures(self) -> tuple[CheckResult, ...]:
        return tuple(r for r in self.results if not r.passed)


def _aggregate(check_id: str, violations: list[str], ok_message: str) -> CheckResult:
    if violations:
        return CheckResult(check_id, False, "; ".join(violations))
    return CheckResult(check_id, True, ok_message)


def flow_properties_audit(
    model: Model,
    family: PartitionFamily,
    eq_tol: float = EQUALITY_TOL,
    slack: float = INEQUALITY_SLACK,
) -> AuditReport:
    """Audit the consistency checks (a)-(e) relating flows to the classical
    quantities:

    (a) flow from all inputs equals the full mutual information;
    (b) flow from M never exceeds the mutual information of M;
    (c) flow from M given the rest dominates the conditional MI;
    (d) vanishing flow given the rest forces vanishing conditional MI;
    (e) vanishing flow from M forces vanishing flow from subsets of M.
    """
    space = model.space
    N = space.full
    subs = family.subsets()
    mi = {M: mutual_information(model, M) for M in subs}
    flow0 = {M: information_flow(model, family, M, frozenset()) for M in subs}
    flow_given_rest = {M: information_flow(model, family, N, N - M) for M in subs}
    cmi_given_rest = {M: classical_cmi(model, N, N - M) for M in subs}

    results = []
    gap = abs(flow0[N] - mi[N])
    results.append(
        CheckResult(
            "(a)",
            gap <= eq_tol,
            f"flow {subset_name(N)} vs mutual information: gap {gap:.3e}",
        )
    )

    checks_b = [
        f"{subset_name(M)}: flow {flow0[M]!r} > MI {mi[M]!r}"
        for M in subs
        if flow0[M] > mi[M] + slack
    ]
    results.append(_aggregate("(b)", checks_b, "flow <= MI for every subset"))

    checks_c = [
        f"{subset_name(M)}: flow {flow_given_rest[M]!r} < CMI {cmi_given_rest[M]!r}"
        for M in subs
        if flow_given_rest[M] < cmi_given_rest[M] - slack
    ]
    results.append(_aggregate("(c)", checks_c, "flow given rest >= CMI for every subset"))

    checks_d = [
        f"{subset_name(M)}: flow 0 but CMI {cmi_given_rest[M]!r}"
        for M in subs
        if flow_given_rest[M] < slack and abs(cmi_given_rest[M]) > eq_tol
    ]
    results.append(_aggregate("(d)", checks_d, "zero flow given rest forces zero CMI"))

    checks_e = []
    for M in subs:
        if flow0[M] >= slack:
            continue
        for L in subs:
            if L <= M and flow0[L] > eq_tol:
                checks_e.append(
                    f"flow {subset_name(M)} = 0 but flow {subset_name(L)} = {flow0[L]!r}"
                )
    results.append(_aggregate("(e)", checks_e, "zero flow is inherited by subsets"))
    return AuditReport(tuple(results))


def _singleton_orderings(n: int, cap: int = 24) -> list[list[frozenset[int]]]:
    """Deterministic orderings of the single-coordinate groups; all n!
    permutations up to the cap, a fixed-size sample beyond."""
    singles = [frozenset({i}) for i in range(n)]
    perms = itertools.permutations(singles)
    return [list(p) for p in itertools.islice(perms, cap)]


def verify_model(
    model: Model,
    family: PartitionFamily,
    eq_tol: float = EQUALITY_TOL,
    slack: float = INEQUALITY_SLACK,
) -> AuditReport:
    """Full audit: projectivity, chain-rule residuals and nonnegative terms
    over orderings of the single-coordinate groups, and properties (a)-(e).

    The chain-rule diagnostics are still computed for a non-projective
    family (they are the informative failure mode), but (a)-(e) are skipped
    because the flows then lose their meaning.
    """
    results = []
    if family.projective:
        results.append(
            CheckResult("projectivity", True, f"family '{family.kind}' is projective")
        )
    else:
        L, M = family.witness
        results.append(
            CheckResult(
                "projectivity",
                False,
                f"family '{family.kind}' is not projective; "
                f"witness L={subset_name(L)}, M={subset_name(M)}",
            )
        )

    chain_bad = []
    nonneg_bad = []
    with warnings.catch_warnings():
        if not family.projective:
            warnings.simplefilter("ignore")
        for ordering in _singleton_orderings(model.space.n):
            report = chain_decomposition(model, family, ordering)
            order_name = ";".join(_group_label(g) for g in ordering)
            if not report.residual <= eq_tol:
                chain_bad.append(f"ordering {order_name}: residual {report.residual!r}")
            worst = min(report.terms)
            if not worst >= -slack:
                nonneg_bad.append(f"ordering {order_name}: term {worst!r}")
    results.append(_aggregate("chain-rule", chain_bad, "all orderings decompose exactly"))
    results.append(_aggregate("nonnegativity", nonneg_bad, "all flow terms nonnegative"))

    if family.projective:
        results.extend(flow_properties_audit(model, family, eq_tol, slack).results)
    return AuditReport(tuple(results))
