"""Builders for worked channel scenarios and parameter sweeps.

Three parametrized scenarios with known closed forms anchor the test suite:

* ``copy``: two coupled spin inputs, the output copies the second one;
* ``transfer``: one step of a two-track spin Markov chain at its stationary
  distribution, the output being the next state of the first track;
* ``sum``: n inputs over {0..k-1}, the output their deterministic sum.

The coupling strength beta controls the input correlation in the first two;
infinite-coupling limits are exercised at beta = 20, where every closed form
is within 1e-9 of its limit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .channel import Channel, InputDistribution, Model
from .families import extension_family
from .measures import LOG2, classical_cmi, information_flow, mutual_information
from .partitions import FiniteSet, ProductSpace

__all__ = [
    "SPIN",
    "build_copy",
    "CopyClosedForm",
    "copy_closed_forms",
    "TransferScenario",
    "transfer_scenario",
    "build_transfer",
    "TransferReport",
    "transfer_report",
    "build_sum",
    "SUM_STATE_CAP",
    "SweepSpec",
    "run_sweep",
    "scenario_model",
]

SPIN = FiniteSet(("-1", "+1"))
SPIN_VALUES = (-1.0, +1.0)
SUM_STATE_CAP = 4096


def _check_beta(beta: float) -> float:
    beta = float(beta)
    if not math.isfinite(beta):
        raise ValueError("beta must be finite")
    return beta


def build_copy(beta: float) -> Model:
    """Two coupled spin inputs; the output is a copy of the second input.

    The input weight of (x, y) is exp(beta*x*y), so beta couples the inputs
    without touching the channel mechanism.
    """
    beta = _check_beta(beta)
    space = ProductSpace((SPIN, SPIN))
    weights = np.array(
        [math.exp(beta * x * y) for y in SPIN_VALUES for x in SPIN_VALUES]
    )
    mu = InputDistribution(space, weights / weights.sum())
    rows = np.zeros((4, 2))
    for iy in range(2):
        for ix in range(2):
            rows[ix + 2 * iy, iy] = 1.0
    nu = Channel(space, SPIN, rows)
    return Model(mu, nu)


@dataclass(frozen=True)
class CopyClosedForm:
    """Closed-form values for the copy scenario at one coupling strength."""

    beta: float
    mi_x_z: float
    cmi_y_z_given_x: float
    flow_x_to_z: float = 0.0
    flow_y_to_z_given_x: float = LOG2
    mi_y_z: float = LOG2
    cmi_x_z_given_y: float = 0.0


def copy_closed_forms(beta: float) -> CopyClosedForm:
    beta = _check_beta(beta)
    ep = 1.0 + math.exp(2.0 * beta)
    em = 1.0 + math.exp(-2.0 * beta)
    mi = LOG2 - math.log(ep) / ep - math.log(em) / em
    return CopyClosedForm(beta=beta, mi_x_z=mi, cmi_y_z_given_x=LOG2 - mi)


@dataclass(frozen=True, eq=False)
class TransferScenario:
    """One Markov step of the two-track spin chain.

    Both transition factors depend only on the current second track y:
    the next first-track state x' has weight 1/(1 + exp(2*beta*x'*y)) and
    the next second-track state y' has weight 1/(1 + exp(2*beta*y'*y)).
    ``stationary`` is the invariant joint distribution of (x, y).
    """

    beta: float
    next_state_rows: np.ndarray  # p(x' | x, y), one row per (x, y)
    driver_rows: np.ndarray      # p(y' | x, y), one row per (x, y)
    stationary: np.ndarray       # invariant distribution over (x, y)

    @property
    def transition_matrix(self) -> np.ndarray:
        """Joint one-step matrix P[(x,y), (x',y')] with x' varying fastest."""
        n = self.stationary.shape[0]
        out = np.empty((n, n))
        for j_y in range(2):
            for j_x in range(2):
                out[:, j_x + 2 * j_y] = (
                    self.next_state_rows[:, j_x] * self.driver_rows[:, j_y]
                )
        return out


def transfer_scenario(beta: float) -> TransferScenario:
    beta = _check_beta(beta)
    a = 1.0 / (1.0 + math.exp(2.0 * beta))
    b = 1.0 / (1.0 + math.exp(-2.0 * beta))
    rows = np.empty((4, 2))
    for iy, y in enumerate(SPIN_VALUES):
        for ix in range(2):
            for ix_next, x_next in enumerate(SPIN_VALUES):
                rows[ix + 2 * iy, ix_next] = 1.0 / (1.0 + math.exp(2.0 * beta * x_next * y))
    ab = a * b
    stationary = np.array([0.5 - ab, ab, ab, 0.5 - ab])
    scenario = TransferScenario(beta, rows, rows.copy(), stationary)
    residual = np.abs(stationary @ scenario.transition_matrix - stationary).max()
    if residual > 1e-8:
        raise ValueError(f"stationarity residual {residual!r} exceeds 1e-8")
    return scenario


def build_transfer(beta: float) -> Model:
    """Inputs (x, y) = current pair under the stationary distribution;
    output = next state of the first track."""
    scenario = transfer_scenario(beta)
    space = ProductSpace((SPIN, SPIN))
    mu = InputDistribution(space, scenario.stationary)
    nu = Channel(space, SPIN, scenario.next_state_rows)
    return Model(mu, nu)


@dataclass(frozen=True)
class TransferReport:
    """Transfer-entropy-style quantities for one coupling strength."""

    beta: float
    classical_cmi: float   # I(Y ; X' | X)
    causal_flow: float     # flow from Y to X' given X, extension family
    mi_driver: float       # I(Y ; X')


def transfer_report(beta: float) -> TransferReport:
    model = build_transfer(beta)
    family = extension_family(model)
    both = frozenset({0, 1})
    first = frozenset({0})
    return TransferReport(
        beta=float(beta),
        classical_cmi=classical_cmi(model, both, first),
        causal_flow=information_flow(model, family, both, first),
        mi_driver=mutual_information(model, frozenset({1})),
    )


def build_sum(n: int, k: int, mu: np.ndarray | None = None) -> Model:
    """n inputs over {0..k-1}; the output is deterministically their sum.

    The input distribution defaults to uniform and can be overridden.
    """
    if n < 2 or k < 2:
        raise ValueError("need at least two inputs over at least two states")
    total = k**n
    if total > SUM_STATE_CAP:
        raise ValueError(f"joint state count {total} exceeds cap {SUM_STATE_CAP}")
    factor = FiniteSet.of_size(k)
    space = ProductSpace((factor,) * n)
    out = FiniteSet.of_size(n * (k - 1) + 1)
    rows = np.zeros((total, out.size))
    for idx in range(total):
        rows[idx, sum(space.decode(space.full, idx))] = 1.0
    if mu is None:
        mu = np.full(total, 1.0 / total)
    return Model(InputDistribution(space, mu), Channel(space, out, rows))


COPY_QUANTITIES = ("mi_x_z", "cmi_y_z_given_x", "flow_x_to_z", "flow_y_to_z_given_x")
TRANSFER_QUANTITIES = ("cmi_y_xnext_given_x", "flow_y_to_xnext_given_x", "mi_y_xnext")
SUM_QUANTITIES = ("mi_total",)

_DEFAULT_QUANTITIES = {
    "copy": COPY_QUANTITIES,
    "transfer": TRANSFER_QUANTITIES,
    "sum": SUM_QUANTITIES,
}


@dataclass(frozen=True)
class SweepSpec:
    """A grid of coupling strengths and the quantity ids to evaluate."""

    scenario: str
    betas: tuple[float, ...]
    quantities: tuple[str, ...] = ()
    n: int = 3
    k: int = 2

    def __post_init__(self):
        if self.scenario not in _DEFAULT_QUANTITIES:
            raise ValueError(f"unknown scenario '{self.scenario}'")
        betas = tuple(float(b) for b in self.betas)
        if not betas:
            raise ValueError("beta grid must be nonempty")
        for b in betas:
            if not math.isfinite(b):
                raise ValueError("beta grid must be finite")
        object.__setattr__(self, "betas", betas)
        quantities = tuple(self.quantities) or _DEFAULT_QUANTITIES[self.scenario]
        unknown = set(quantities) - set(_DEFAULT_QUANTITIES[self.scenario])
        if unknown:
            raise ValueError(f"unknown quantities for '{self.scenario}': {sorted(unknown)}")
        object.__setattr__(self, "quantities", quantities)


def _copy_point(beta: float) -> dict[str, float]:
    model = build_copy(beta)
    family = extension_family(model)
    both = frozenset({0, 1})
    first = frozenset({0})
    return {
        "mi_x_z": mutual_information(model, first),
        "cmi_y_z_given_x": classical_cmi(model, both, first),
        "flow_x_to_z": information_flow(model, family, first),
        "flow_y_to_z_given_x": information_flow(model, family, both, first),
    }


def _transfer_point(beta: float) -> dict[str, float]:
    report = transfer_report(beta)
    return {
        "cmi_y_xnext_given_x": report.classical_cmi,
        "flow_y_to_xnext_given_x": report.causal_flow,
        "mi_y_xnext": report.mi_driver,
    }


def _sum_point(beta: float, n: int, k: int) -> dict[str, float]:
    model = build_sum(n, k)
    return {"mi_total": mutual_information(model, model.full_subset)}


def run_sweep(spec: SweepSpec) -> list[tuple[float, str, float]]:
    """Evaluate the requested quantities over the beta grid; one output row
    per (beta, quantity)."""
    rows = []
    for beta in spec.betas:
        if spec.scenario == "copy":
            values = _copy_point(beta)
        elif spec.scenario == "transfer":
            values = _transfer_point(beta)
        else:
            values = _sum_point(beta, spec.n, spec.k)
        for quantity in spec.quantities:
            rows.append((beta, quantity, values[quantity]))
    return rows


def scenario_model(scenario: str, beta: float = 0.0, n: int = 3, k: int = 2) -> Model:
    """Build the model for a scenario id; shared by the CLI subcommands."""
    if scenario == "copy":
        return build_copy(beta)
    if scenario == "transfer":
        return build_transfer(beta)
    if scenario == "sum":
        return build_sum(n, k)
    raise ValueError(f"unknown scenario '{scenario}'")
