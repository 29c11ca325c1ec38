"""Channel-adapted partition families and projectivity repair.

For every subset M of input coordinates this module builds the partition of
X_M that the channel can actually resolve: first per fixed outside context
(two M-configurations are lumped when the constrained channel rows agree on
every output block within the model tolerance), then joined over all
contexts.  The resulting family of "trace" partitions is generally not
projective, i.e. coordinate projections need not be measurable between
family members, which breaks ordered decompositions.  Two repairs restore
projectivity:

* extension: the smallest refinement, joining the lifts of all lower traces;
* reduction: the largest coarsening, keeping only the input distinctions
  that survive as full cylinders of the channel partition.

Row comparison is greedy in index order, which is deterministic and exact
for rational-valued tables; near-ties beyond the tolerance may split
because tolerance-equality is not transitive.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .channel import Model
from .partitions import (
    FiniteSet,
    Partition,
    ProductSpace,
    hyperedge_components,
    join,
    lift,
    refines,
)

__all__ = [
    "MAX_INPUTS",
    "PartitionFamily",
    "all_subsets",
    "subsets_of",
    "subset_name",
    "channel_partition",
    "context_partition",
    "subset_trace",
    "trace_family",
    "extension_family",
    "reduction_family",
    "classical_family",
    "family_from_parts",
    "check_projectivity",
]

MAX_INPUTS = 12


def all_subsets(n: int) -> tuple[frozenset[int], ...]:
    """All subsets of {0..n-1}, ordered by size then lexicographically."""
    if n > MAX_INPUTS:
        raise ValueError(f"subset enumeration is capped at {MAX_INPUTS} inputs, got {n}")
    out = []
    for size in range(n + 1):
        for combo in itertools.combinations(range(n), size):
            out.append(frozenset(combo))
    return tuple(out)


def subsets_of(M: frozenset[int]) -> tuple[frozenset[int], ...]:
    """All subsets of M, ordered by size then lexicographically."""
    mm = sorted(M)
    out = []
    for size in range(len(mm) + 1):
        for combo in itertools.combinations(mm, size):
            out.append(frozenset(combo))
    return tuple(out)


def subset_name(M: Iterable[int]) -> str:
    """Human-readable name of an input subset, e.g. ``{X1,X3}``."""
    names = [f"X{i + 1}" for i in sorted(M)]
    return "{" + ",".join(names) + "}"


@dataclass(frozen=True, eq=False)
class PartitionFamily:
    """One partition of X_M per subset M, plus a projectivity certificate.

    ``projective`` is true when every coordinate projection between members
    is measurable, i.e. each family[M] refines the lift of each family[L]
    for L a subset of M; otherwise ``witness`` names a violating pair (L, M).
    """

    space: ProductSpace
    parts: dict[frozenset[int], Partition]
    kind: str
    projective: bool
    witness: tuple[frozenset[int], frozenset[int]] | None
    gamma_resolved: bool = False

    def __post_init__(self):
        expected = all_subsets(self.space.n)
        missing = [M for M in expected if M not in self.parts]
        if missing:
            raise ValueError(f"family is missing subsets: {missing}")
        for M, part in self.parts.items():
            if part.ground != self.space.space_of(M):
                raise ValueError(f"partition for {subset_name(M)} lives on the wrong space")

    def __getitem__(self, M: Iterable[int]) -> Partition:
        return self.parts[self.space.check_subset(M)]

    def subsets(self) -> tuple[frozenset[int], ...]:
        return all_subsets(self.space.n)

    def to_dict(self) -> dict:
        witness = None
        if self.witness is not None:
            witness = [sorted(f"X{i + 1}" for i in s) for s in self.witness]
        return {
            "kind": self.kind,
            "projective": self.projective,
            "witness": witness,
            "gamma_resolved": self.gamma_resolved,
            "subsets": [
                {
                    "subset": [f"X{i + 1}" for i in sorted(M)],
                    "blocks": [list(block) for block in self.parts[M].block_labels()],
                }
                for M in self.subsets()
            ],
        }


def _cluster_rows(rows: np.ndarray, tol: float) -> tuple[int, ...]:
    """Group rows whose entries agree within tol, greedily in index order."""
    reps: list[np.ndarray] = []
    out = []
    for row in rows:
        for bid, rep in enumerate(reps):
            if np.max(np.abs(row - rep)) <= tol:
                out.append(bid)
                break
        else:
            out.append(len(reps))
            reps.append(row)
    return tuple(out)


def channel_partition(model: Model) -> Partition:
    """Partition of the full input space lumping configurations whose
    channel rows agree on every output block."""
    space = model.space
    return Partition(
        space.space_of(space.full), _cluster_rows(model.gamma_rows, model.tol)
    )


def _context_table(model: Model, M: frozenset[int]) -> np.ndarray:
    """Array (|X_M|, |X_rest|) of full joint indices."""
    space = model.space
    rest = space.full - M
    pm = space.project_map(space.full, M)
    pr = space.project_map(space.full, rest)
    table = np.empty((space.size_of(M), space.size_of(rest)), dtype=np.int64)
    table[pm, pr] = np.arange(pm.shape[0])
    return table


def context_partition(model: Model, M: Iterable[int], context: int) -> Partition:
    """Distinguishability partition of X_M with the outside coordinates
    pinned to one configuration (indexed into X_{N minus M})."""
    space = model.space
    M = space.check_subset(M)
    table = _context_table(model, M)
    if not 0 <= context < table.shape[1]:
        raise ValueError(f"context index {context} out of range")
    rows = model.gamma_rows[table[:, context]]
    return Partition(space.space_of(M), _cluster_rows(rows, model.tol))


def subset_trace(model: Model, M: Iterable[int]) -> Partition:
    """Join of the context partitions of X_M over every outside
    configuration: the finest distinction the channel makes within M in
    at least one context."""
    space = model.space
    M = space.check_subset(M)
    table = _context_table(model, M)
    n_contexts = table.shape[1]
    sig = np.empty((table.shape[0], n_contexts), dtype=np.int64)
    for j in range(n_contexts):
        sig[:, j] = _cluster_rows(model.gamma_rows[table[:, j]], model.tol)
    return Partition(space.space_of(M), tuple(map(tuple, sig)))


def _certify(
    space: ProductSpace, parts: dict[frozenset[int], Partition]
) -> tuple[bool, tuple[frozenset[int], frozenset[int]] | None]:
    for M in all_subsets(space.n):
        for L in subsets_of(M):
            if L == M or not L:
                continue
            if not refines(parts[M], lift(space, parts[L], L, M)):
                return False, (L, M)
    return True, None


def check_projectivity(
    family: PartitionFamily,
) -> tuple[bool, tuple[frozenset[int], frozenset[int]] | None]:
    """Re-verify that coordinate projections are measurable between all
    family members; on failure return the first violating pair (L, M)."""
    return _certify(family.space, family.parts)


def family_from_parts(
    model: Model, parts: dict[frozenset[int], Partition], kind: str
) -> PartitionFamily:
    space = model.space
    projective, witness = _certify(space, parts)
    return PartitionFamily(
        space,
        dict(parts),
        kind,
        projective,
        witness,
        gamma_resolved=not model.gamma.is_singletons(),
    )


def trace_family(model: Model) -> PartitionFamily:
    """The raw per-subset traces; generally not projective."""
    parts = {M: subset_trace(model, M) for M in all_subsets(model.space.n)}
    return family_from_parts(model, parts, "raw_trace")


def extension_family(model: Model) -> PartitionFamily:
    """Smallest projective family containing every trace: family[M] is the
    join of the lifts of the traces of all subsets of M."""
    space = model.space
    subs = all_subsets(space.n)
    traces = {M: subset_trace(model, M) for M in subs}
    parts: dict[frozenset[int], Partition] = {}
    for M in subs:
        columns = []
        for L in subsets_of(M):
            if not L:
                continue
            pm = space.project_map(M, L)
            columns.append(np.asarray(traces[L].block_of, dtype=np.int64)[pm])
        if columns:
            sig = np.stack(columns, axis=1)
            parts[M] = Partition(space.space_of(M), tuple(map(tuple, sig)))
        else:
            parts[M] = Partition.trivial(space.space_of(M))
    return family_from_parts(model, parts, "extension")


def reduction_family(model: Model) -> PartitionFamily:
    """Largest projective family contained in the traces: family[M] keeps
    only the distinctions within X_M that are full cylinders of the channel
    partition, computed by chaining overlapping block projections."""
    space = model.space
    base = channel_partition(model)
    blocks = base.blocks()
    parts: dict[frozenset[int], Partition] = {}
    for M in all_subsets(space.n):
        pm = space.project_map(space.full, M)
        edges = [set(pm[list(block)]) for block in blocks]
        parts[M] = hyperedge_components(space.space_of(M), edges)
    return family_from_parts(model, parts, "reduction")


def classical_family(model: Model) -> PartitionFamily:
    """Singleton partitions everywhere: reproduces the classical
    (non-causal) mutual-information quantities."""
    space = model.space
    parts = {
        M: Partition.singletons(space.space_of(M)) for M in all_subsets(space.n)
    }
    return family_from_parts(model, parts, "classical")
