"""Finite channel models: input distributions, channels, conditioned marginals.

A :class:`Model` bundles an input distribution over a product space, a
row-stochastic channel into a finite output set, and an output partition at
whose resolution all information quantities are evaluated (default: the
singleton partition, i.e. full output resolution).

The central operation is :func:`coarse_marginal`: the conditional output
distribution given the atom of a conditioning partition of a subset of the
input coordinates.  With the singleton conditioning it reduces to the usual
marginal channel, with the one-block conditioning to the output distribution
itself.  Atoms carrying no input mass are flagged and excluded from every
downstream functional, consistent with the 0*log(0) = 0 convention.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable

import numpy as np

from .partitions import FiniteSet, Partition, ProductSpace

__all__ = [
    "NORM_TOL",
    "ROW_TOL_DEFAULT",
    "ModelFormatError",
    "InputDistribution",
    "Channel",
    "Model",
    "CoarseKernel",
    "pushforward",
    "input_marginal",
    "coarse_marginal",
    "classical_marginal",
    "load_model",
    "save_model",
    "model_from_dict",
    "model_to_dict",
]

NORM_TOL = 1e-12        # normalization tolerance for constructed objects
LOAD_WARN_TOL = 1e-9    # loader renormalizes silently up to here
LOAD_REJECT_TOL = 1e-6  # loader rejects beyond here
ROW_TOL_DEFAULT = 1e-9  # channel row equality tolerance


class ModelFormatError(ValueError):
    """A model file violates the schema or its normalization bounds."""


def _as_readonly(arr: np.ndarray) -> np.ndarray:
    arr = np.array(arr, dtype=np.float64)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class InputDistribution:
    """A probability vector over the joint configurations of a product space."""

    space: ProductSpace
    prob: np.ndarray
    norm_tol: float = NORM_TOL

    def __post_init__(self):
        prob = _as_readonly(self.prob)
        if prob.shape != (self.space.size_of(self.space.full),):
            raise ValueError("distribution length does not match the space")
        if prob.min() < 0:
            raise ValueError("probabilities must be nonnegative")
        if abs(prob.sum() - 1.0) > self.norm_tol:
            raise ValueError(f"distribution sums to {prob.sum()!r}, not 1")
        object.__setattr__(self, "prob", prob)


@dataclass(frozen=True, eq=False)
class Channel:
    """A row-stochastic table: one output distribution per joint input."""

    space: ProductSpace
    out: FiniteSet
    rows: np.ndarray
    norm_tol: float = NORM_TOL

    def __post_init__(self):
        rows = _as_readonly(self.rows)
        expected = (self.space.size_of(self.space.full), self.out.size)
        if rows.shape != expected:
            raise ValueError(f"channel table must have shape {expected}")
        if rows.min() < 0:
            raise ValueError("channel entries must be nonnegative")
        dev = np.abs(rows.sum(axis=1) - 1.0).max()
        if dev > self.norm_tol:
            raise ValueError(f"channel rows deviate from 1 by {dev!r}")
        object.__setattr__(self, "rows", rows)


@dataclass(frozen=True, eq=False)
class Model:
    """Input distribution + channel + output partition + row tolerance."""

    mu: InputDistribution
    nu: Channel
    gamma: Partition | None = None
    tol: float = ROW_TOL_DEFAULT

    def __post_init__(self):
        if self.mu.space != self.nu.space:
            raise ValueError("input distribution and channel use different spaces")
        gamma = self.gamma
        if gamma is None:
            gamma = Partition.singletons(self.nu.out)
        elif gamma.ground != self.nu.out:
            raise ValueError("output partition does not live on the output set")
        if not self.tol > 0:
            raise ValueError("row tolerance must be positive")
        object.__setattr__(self, "gamma", gamma)

    @property
    def space(self) -> ProductSpace:
        return self.mu.space

    @property
    def n_inputs(self) -> int:
        return self.space.n

    @property
    def full_subset(self) -> frozenset[int]:
        return self.space.full

    @property
    def out(self) -> FiniteSet:
        return self.nu.out

    @cached_property
    def gamma_rows(self) -> np.ndarray:
        """Channel rows aggregated to output-partition blocks."""
        blocks = self.gamma.blocks()
        out = np.empty((self.nu.rows.shape[0], len(blocks)))
        for bid, cols in enumerate(blocks):
            out[:, bid] = self.nu.rows[:, list(cols)].sum(axis=1)
        out.setflags(write=False)
        return out

    @cached_property
    def weighted_gamma_rows(self) -> np.ndarray:
        out = self.mu.prob[:, None] * self.gamma_rows
        out.setflags(write=False)
        return out

    @cached_property
    def gamma_pushforward(self) -> np.ndarray:
        out = self.weighted_gamma_rows.sum(axis=0)
        out.setflags(write=False)
        return out


@dataclass(frozen=True, eq=False)
class CoarseKernel:
    """Conditional output distribution per atom of a conditioning partition.

    ``table`` rows are distributions over the blocks of the model's output
    partition; ``z_table`` rows resolve the full output alphabet.  Atoms with
    zero input mass are flagged through ``atom_mass`` and carry all-zero rows.
    """

    subset: frozenset[int]
    conditioning: Partition
    table: np.ndarray
    atom_mass: np.ndarray
    z_table: np.ndarray | None = None

    def __post_init__(self):
        table = _as_readonly(self.table)
        mass = _as_readonly(self.atom_mass)
        pos = mass > 0
        if pos.any():
            dev = np.abs(table[pos].sum(axis=1) - 1.0).max()
            assert dev <= 1e-10, f"kernel rows deviate from 1 by {dev!r}"
        object.__setattr__(self, "table", table)
        object.__setattr__(self, "atom_mass", mass)
        if self.z_table is not None:
            object.__setattr__(self, "z_table", _as_readonly(self.z_table))

    @property
    def zero_mass(self) -> np.ndarray:
        return self.atom_mass == 0


def pushforward(model: Model) -> np.ndarray:
    """Output distribution induced by pushing the input distribution
    through the channel."""
    return _as_readonly(model.mu.prob @ model.nu.rows)


def input_marginal(model: Model, M: Iterable[int]) -> np.ndarray:
    """Marginal of the input distribution on the coordinates in M."""
    space = model.space
    M = space.check_subset(M)
    pm = space.project_map(space.full, M)
    return _as_readonly(
        np.bincount(pm, weights=model.mu.prob, minlength=space.size_of(M))
    )


def coarse_marginal(model: Model, M: Iterable[int], conditioning: Partition) -> CoarseKernel:
    """Output distribution conditioned on the atoms of a partition of X_M.

    For each atom A with positive input mass this is the average of the
    channel over the inputs whose M-coordinates fall in A, i.e. the
    conditional expectation of the output indicator given the atom.
    """
    space = model.space
    M = space.check_subset(M)
    if conditioning.ground != space.space_of(M):
        raise ValueError("conditioning partition does not live on X_M")
    pm = space.project_map(space.full, M)
    atom_of = np.asarray(conditioning.block_of, dtype=np.int64)[pm]
    k = conditioning.n_blocks
    mass = np.bincount(atom_of, weights=model.mu.prob, minlength=k)

    def average(weighted: np.ndarray) -> np.ndarray:
        numer = np.zeros((k, weighted.shape[1]))
        np.add.at(numer, atom_of, weighted)
        return np.divide(
            numer, mass[:, None], out=np.zeros_like(numer), where=mass[:, None] > 0
        )

    table = average(model.weighted_gamma_rows)
    z_table = average(model.mu.prob[:, None] * model.nu.rows)
    return CoarseKernel(M, conditioning, table, mass, z_table)


def classical_marginal(model: Model, M: Iterable[int]) -> CoarseKernel:
    """Marginal channel at full resolution of X_M (singleton conditioning)."""
    M = model.space.check_subset(M)
    return coarse_marginal(model, M, Partition.singletons(model.space.space_of(M)))


# ---------------------------------------------------------------------------
# Model files
#
# JSON schema (UTF-8):
#   alphabets : list of lists of state labels, one list per input factor
#   mu        : flat probability array over joint inputs, row-major
#               mixed-radix with factor 1 varying fastest
#   nu        : one row per joint input (same index order), each a
#               distribution over the output labels
#   output    : list of output state labels
#   gamma     : optional list of label lists partitioning the output
#   tol       : optional row-equality tolerance
#
# Normalization is enforced on load: deviations up to 1e-9 are renormalized
# silently, up to 1e-6 renormalized with a warning, beyond that rejected.
# ---------------------------------------------------------------------------


def _normalize_loaded(values, what: str) -> np.ndarray:
    arr = np.asarray(values, dtype=np.float64)
    if arr.min() < -NORM_TOL:
        raise ModelFormatError(f"{what} has negative entries")
    arr = np.clip(arr, 0.0, None)
    total = arr.sum()
    dev = abs(total - 1.0)
    if dev > LOAD_REJECT_TOL:
        raise ModelFormatError(f"{what} sums to {total!r}; off by more than {LOAD_REJECT_TOL}")
    if dev > LOAD_WARN_TOL:
        warnings.warn(f"{what} renormalized (deviation {dev:.3g})")
    return arr / total


def model_from_dict(data: dict) -> Model:
    if not isinstance(data, dict):
        raise ModelFormatError("model file must contain a JSON object")
    for key in ("alphabets", "mu", "nu", "output"):
        if key not in data:
            raise ModelFormatError(f"missing required field '{key}'")

    alphabets = data["alphabets"]
    if not isinstance(alphabets, list) or not alphabets:
        raise ModelFormatError("'alphabets' must be a nonempty list of label lists")
    try:
        space = ProductSpace(tuple(FiniteSet(tuple(a)) for a in alphabets))
        out = FiniteSet(tuple(data["output"]))
    except (ValueError, TypeError) as exc:
        raise ModelFormatError(f"bad state labels: {exc}") from exc

    total = space.size_of(space.full)
    mu_raw = data["mu"]
    if len(mu_raw) != total:
        raise ModelFormatError(f"'mu' must have {total} entries, got {len(mu_raw)}")
    mu = InputDistribution(space, _normalize_loaded(mu_raw, "'mu'"))

    nu_raw = data["nu"]
    if len(nu_raw) != total:
        raise ModelFormatError(f"'nu' must have {total} rows, got {len(nu_raw)}")
    rows = np.empty((total, out.size))
    for i, row in enumerate(nu_raw):
        if len(row) != out.size:
            raise ModelFormatError(f"'nu' row {i} must have {out.size} entries")
        rows[i] = _normalize_loaded(row, f"'nu' row {i}")
    nu = Channel(space, out, rows)

    gamma = None
    if data.get("gamma") is not None:
        label_to_index = {lab: i for i, lab in enumerate(out.labels)}
        try:
            blocks = [[label_to_index[lab] for lab in block] for block in data["gamma"]]
            gamma = Partition.from_blocks(out, blocks)
        except (KeyError, ValueError, TypeError) as exc:
            raise ModelFormatError(f"'gamma' is not a partition of the output: {exc}") from exc

    tol = data.get("tol", ROW_TOL_DEFAULT)
    if not isinstance(tol, (int, float)) or not tol > 0:
        raise ModelFormatError("'tol' must be a positive number")
    return Model(mu, nu, gamma, float(tol))


def model_to_dict(model: Model) -> dict:
    data = {
        "alphabets": [list(f.labels) for f in model.space.factors],
        "mu": model.mu.prob.tolist(),
        "nu": model.nu.rows.tolist(),
        "output": list(model.out.labels),
    }
    if not model.gamma.is_singletons():
        data["gamma"] = [list(block) for block in model.gamma.block_labels()]
    if model.tol != ROW_TOL_DEFAULT:
        data["tol"] = model.tol
    return data


def load_model(path) -> Model:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ModelFormatError(f"not valid JSON: {exc}") from exc
    return model_from_dict(data)


def save_model(model: Model, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(model_to_dict(model), fh, indent=2)
        fh.write("\n")
