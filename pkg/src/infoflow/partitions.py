"""Partition algebra on finite sets and finite product spaces.

On a finite set, a sigma-algebra is exactly the collection of unions of
blocks of a unique partition, so partitions stand in for sigma-algebras
throughout the package.  All values are immutable and canonicalized: block
ids are assigned by first occurrence in element order, which makes equality
structural and results safe to cache and snapshot.

Product spaces use mixed-radix row-major indexing with factor 0 varying
fastest.  Subset spaces apply the same convention to the subset's
coordinates in ascending order, and the empty subset is materialized as a
genuine one-element space so it never needs special-casing downstream.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable

import numpy as np

__all__ = [
    "FiniteSet",
    "Partition",
    "ProductSpace",
    "join",
    "refines",
    "lift",
    "hyperedge_components",
]

EMPTY_PRODUCT_LABEL = "()"


@dataclass(frozen=True)
class FiniteSet:
    """An indexed finite set with one display label per element."""

    labels: tuple[str, ...]

    def __post_init__(self):
        labels = tuple(str(lab) for lab in self.labels)
        if len(labels) < 1:
            raise ValueError("a finite set needs at least one element")
        if len(set(labels)) != len(labels):
            raise ValueError("element labels must be distinct")
        object.__setattr__(self, "labels", labels)

    @classmethod
    def of_size(cls, size: int, prefix: str = "") -> "FiniteSet":
        if size < 1:
            raise ValueError("size must be positive")
        return cls(tuple(f"{prefix}{i}" for i in range(size)))

    @property
    def size(self) -> int:
        return len(self.labels)


def _canonical_assignment(assignment: Iterable) -> tuple[int, ...]:
    """Relabel block ids by first occurrence; accepts any hashable keys."""
    remap: dict = {}
    out = []
    for key in assignment:
        if key not in remap:
            remap[key] = len(remap)
        out.append(remap[key])
    return tuple(out)


@dataclass(frozen=True)
class Partition:
    """A partition of a FiniteSet, stored as element index -> block id.

    The assignment is canonicalized on construction (block ids by first
    occurrence in element order), so two partitions compare equal exactly
    when they induce the same grouping.
    """

    ground: FiniteSet
    block_of: tuple[int, ...]

    def __post_init__(self):
        if len(self.block_of) != self.ground.size:
            raise ValueError("assignment length does not match ground set size")
        object.__setattr__(self, "block_of", _canonical_assignment(self.block_of))

    @classmethod
    def singletons(cls, ground: FiniteSet) -> "Partition":
        return cls(ground, tuple(range(ground.size)))

    @classmethod
    def trivial(cls, ground: FiniteSet) -> "Partition":
        return cls(ground, (0,) * ground.size)

    @classmethod
    def from_blocks(cls, ground: FiniteSet, blocks: Iterable[Iterable[int]]) -> "Partition":
        assign = [-1] * ground.size
        for bid, block in enumerate(blocks):
            for el in block:
                el = int(el)
                if not 0 <= el < ground.size:
                    raise ValueError(f"element {el} out of range")
                if assign[el] != -1:
                    raise ValueError("blocks overlap")
                assign[el] = bid
        if -1 in assign:
            raise ValueError("blocks do not cover the ground set")
        return cls(ground, tuple(assign))

    @property
    def n_blocks(self) -> int:
        return max(self.block_of) + 1

    def blocks(self) -> tuple[tuple[int, ...], ...]:
        out: list[list[int]] = [[] for _ in range(self.n_blocks)]
        for el, bid in enumerate(self.block_of):
            out[bid].append(el)
        return tuple(tuple(b) for b in out)

    def block_labels(self) -> tuple[tuple[str, ...], ...]:
        return tuple(
            tuple(self.ground.labels[el] for el in block) for block in self.blocks()
        )

    def is_singletons(self) -> bool:
        return self.n_blocks == self.ground.size

    def is_trivial(self) -> bool:
        return self.n_blocks == 1


def _require_same_ground(p: Partition, q: Partition) -> None:
    if p.ground != q.ground:
        raise ValueError("partitions live on different ground sets")


def join(p: Partition, q: Partition) -> Partition:
    """Coarsest common refinement: blocks are the nonempty pairwise
    intersections of blocks of the two inputs."""
    _require_same_ground(p, q)
    return Partition(p.ground, _canonical_assignment(zip(p.block_of, q.block_of)))


def refines(p: Partition, q: Partition) -> bool:
    """True when every block of p lies inside a single block of q."""
    _require_same_ground(p, q)
    seen: dict[int, int] = {}
    for pb, qb in zip(p.block_of, q.block_of):
        if seen.setdefault(pb, qb) != qb:
            return False
    return True


def hyperedge_components(ground: FiniteSet, edges: Iterable[Iterable[int]]) -> Partition:
    """Merge elements transitively whenever they co-occur in an edge.

    Elements covered by no edge stay singletons.  The result is the finest
    partition in which every edge sits inside a single block.
    """
    parent = list(range(ground.size))

    def find(a: int) -> int:
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for edge in edges:
        edge = [int(el) for el in edge]
        if not edge:
            raise ValueError("edges must be nonempty")
        for el in edge:
            if not 0 <= el < ground.size:
                raise ValueError(f"element {el} out of range")
        root = find(edge[0])
        for el in edge[1:]:
            parent[find(el)] = root
    return Partition(ground, tuple(find(i) for i in range(ground.size)))


@dataclass(frozen=True)
class ProductSpace:
    """A finite product of factor sets with mixed-radix joint indexing.

    The joint index of (x_0, ..., x_{n-1}) is sum_i x_i * prod_{j<i} s_j,
    i.e. factor 0 varies fastest.  For a subset M of coordinates the same
    rule applies to the coordinates of M in ascending order.
    """

    factors: tuple[FiniteSet, ...]

    def __post_init__(self):
        factors = tuple(self.factors)
        if not factors:
            raise ValueError("a product space needs at least one factor")
        object.__setattr__(self, "factors", factors)

    @property
    def n(self) -> int:
        return len(self.factors)

    @property
    def factor_sizes(self) -> tuple[int, ...]:
        return tuple(f.size for f in self.factors)

    @property
    def full(self) -> frozenset[int]:
        return frozenset(range(self.n))

    def check_subset(self, M: Iterable[int]) -> frozenset[int]:
        M = frozenset(int(i) for i in M)
        if not M <= self.full:
            raise ValueError(f"subset {sorted(M)} out of range for {self.n} factors")
        return M

    def size_of(self, M: Iterable[int]) -> int:
        M = self.check_subset(M)
        size = 1
        for i in M:
            size *= self.factors[i].size
        return size

    def space_of(self, M: Iterable[int]) -> FiniteSet:
        """The FiniteSet of joint configurations of the coordinates in M."""
        return _space_of(self, tuple(sorted(self.check_subset(M))))

    def decode(self, M: Iterable[int], index: int) -> tuple[int, ...]:
        """Digits of a joint index, one per coordinate of M in ascending order."""
        M = self.check_subset(M)
        if not 0 <= index < self.size_of(M):
            raise ValueError("index out of range")
        digits = []
        for c in sorted(M):
            size = self.factors[c].size
            digits.append(index % size)
            index //= size
        return tuple(digits)

    def encode(self, M: Iterable[int], digits: Iterable[int]) -> int:
        M = sorted(self.check_subset(M))
        digits = list(digits)
        if len(digits) != len(M):
            raise ValueError("wrong number of digits")
        index = 0
        stride = 1
        for c, d in zip(M, digits):
            size = self.factors[c].size
            if not 0 <= d < size:
                raise ValueError("digit out of range")
            index += d * stride
            stride *= size
        return index

    def project_map(self, M: Iterable[int], L: Iterable[int]) -> np.ndarray:
        """Index map X_M -> X_L for L a subset of M; entry j is the L-index
        of the configuration with M-index j."""
        M = self.check_subset(M)
        L = self.check_subset(L)
        if not L <= M:
            raise ValueError("L must be a subset of M")
        return _project_map(self, tuple(sorted(M)), tuple(sorted(L)))


@lru_cache(maxsize=None)
def _space_of(space: ProductSpace, coords: tuple[int, ...]) -> FiniteSet:
    if not coords:
        return FiniteSet((EMPTY_PRODUCT_LABEL,))
    if len(coords) == 1:
        return space.factors[coords[0]]
    # itertools.product varies its last argument fastest, so feed the
    # coordinates in descending order and flip each tuple back.
    rev = [space.factors[c].labels for c in reversed(coords)]
    labels = tuple(
        "(" + ",".join(reversed(combo)) + ")" for combo in itertools.product(*rev)
    )
    return FiniteSet(labels)


@lru_cache(maxsize=None)
def _project_map(
    space: ProductSpace, mm: tuple[int, ...], ll: tuple[int, ...]
) -> np.ndarray:
    size_m = 1
    for c in mm:
        size_m *= space.factors[c].size
    idx = np.arange(size_m, dtype=np.int64)
    out = np.zeros(size_m, dtype=np.int64)
    stride_l: dict[int, int] = {}
    t = 1
    for c in ll:
        stride_l[c] = t
        t *= space.factors[c].size
    s = 1
    for c in mm:
        size = space.factors[c].size
        if c in stride_l:
            out += ((idx // s) % size) * stride_l[c]
        s *= size
    out.setflags(write=False)
    return out


def lift(space: ProductSpace, p: Partition, L: Iterable[int], M: Iterable[int]) -> Partition:
    """Pull a partition of X_L back along the coordinate projection
    X_M -> X_L (L a subset of M): two M-configurations share a block exactly
    when their L-coordinates do."""
    L = space.check_subset(L)
    M = space.check_subset(M)
    if not L <= M:
        raise ValueError("can only lift along L a subset of M")
    if p.ground != space.space_of(L):
        raise ValueError("partition does not live on X_L")
    pm = space.project_map(M, L)
    return Partition(space.space_of(M), tuple(p.block_of[j] for j in pm))
