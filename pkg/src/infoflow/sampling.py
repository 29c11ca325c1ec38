"""Seeded random model generation for audits and tests.

Input distributions and channel rows are drawn uniformly from the
probability simplex (flat Dirichlet), so a fixed seed reproduces the exact
audit corpus.
"""

from __future__ import annotations

import numpy as np

from .channel import Channel, InputDistribution, Model
from .partitions import FiniteSet, ProductSpace

__all__ = ["random_model", "random_model_corpus"]


def random_model(
    rng: np.random.Generator,
    n_inputs: int | None = None,
    max_inputs: int = 3,
    max_alphabet: int = 3,
    max_output: int = 3,
) -> Model:
    """Draw a model with uniform-simplex input distribution and rows.

    The number of inputs is uniform on {2..max_inputs} unless pinned, the
    alphabet sizes uniform on {2..max_alphabet}, the output size uniform on
    {2..max_output}.
    """
    if n_inputs is None:
        n_inputs = int(rng.integers(2, max_inputs + 1))
    sizes = [int(s) for s in rng.integers(2, max_alphabet + 1, size=n_inputs)]
    out_size = int(rng.integers(2, max_output + 1))
    space = ProductSpace(tuple(FiniteSet.of_size(s) for s in sizes))
    total = space.size_of(space.full)
    prob = rng.dirichlet(np.ones(total))
    rows = rng.dirichlet(np.ones(out_size), size=total)
    mu = InputDistribution(space, prob / prob.sum())
    nu = Channel(space, FiniteSet.of_size(out_size), rows / rows.sum(axis=1, keepdims=True))
    return Model(mu, nu)


def random_model_corpus(seed: int, count: int, **kwargs) -> list[Model]:
    """A reproducible list of random models from one seeded generator."""
    rng = np.random.default_rng(seed)
    return [random_model(rng, **kwargs) for _ in range(count)]
