"""Coherent risk functionals on finite discrete distributions.

A distribution is a finite list of (value, probability) atoms.  The module
provides the left-side quantile, the tail-average risk (average value at
risk) through two independent routes (quantile integral and a greedy dual
density), the mean absolute-deviation risk (again primal and dual), and
evaluation of the maximum over a finite family of tail-average mixtures.
All functionals interpret larger values as worse outcomes (costs).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence, Tuple, Union

import numpy as np

__all__ = [
    "DiscreteDistribution",
    "DualDensity",
    "RiskSpec",
    "Expectation",
    "AVaR",
    "MeanDeviation",
    "KusuokaMixture",
    "value_at_risk",
    "avar_primal",
    "avar_dual",
    "mean_deviation_primal",
    "mean_deviation_dual",
    "kusuoka_evaluate",
    "evaluate",
    "density_cap",
]

#: probabilities must sum to one within this slack
PROB_TOL = 1e-12
#: dual densities must average to one within this slack
DENSITY_MASS_TOL = 1e-9


@dataclass(frozen=True)
class DiscreteDistribution:
    """Finitely supported distribution given by value and probability arrays.

    Atoms need not be sorted or distinct; every probability must be strictly
    positive and the probabilities must sum to one within ``PROB_TOL``.
    """

    values: np.ndarray
    probs: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        probs = np.asarray(self.probs, dtype=float)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "probs", probs)
        if values.ndim != 1 or probs.ndim != 1 or values.shape != probs.shape:
            raise ValueError("values and probs must be 1-d arrays of equal length")
        if len(values) == 0:
            raise ValueError("distribution needs at least one atom")
        if not np.all(np.isfinite(values)):
            raise ValueError("atom values must be finite")
        if not np.all(probs > 0.0):
            raise ValueError("atom probabilities must be strictly positive")
        total = float(probs.sum())
        if abs(total - 1.0) > PROB_TOL:
            raise ValueError(f"atom probabilities sum to {total!r}, not 1")

    @classmethod
    def from_atoms(cls, atoms: Iterable[Tuple[float, float]]) -> "DiscreteDistribution":
        """Build from an iterable of (value, probability) pairs."""
        pairs = list(atoms)
        if not pairs:
            raise ValueError("distribution needs at least one atom")
        values = np.array([v for v, _ in pairs], dtype=float)
        probs = np.array([p for _, p in pairs], dtype=float)
        return cls(values, probs)

    @property
    def atoms(self) -> list:
        """Atoms as a list of (value, probability) tuples."""
        return list(zip(self.values.tolist(), self.probs.tolist()))

    def __len__(self) -> int:
        return len(self.values)

    def mean(self) -> float:
        return float(self.values @ self.probs)


@dataclass(frozen=True)
class DualDensity:
    """Nonnegative reweighting of atoms certifying a dual representation.

    ``weights[i]`` multiplies the probability of atom ``i``; a valid density
    satisfies ``sum(weights * probs) == 1`` within ``DENSITY_MASS_TOL`` and
    is bounded by the cap of the risk functional that produced it.
    """

    weights: np.ndarray

    def __post_init__(self):
        weights = np.asarray(self.weights, dtype=float)
        object.__setattr__(self, "weights", weights)
        if weights.ndim != 1:
            raise ValueError("weights must be a 1-d array")
        if not np.all(np.isfinite(weights)):
            raise ValueError("weights must be finite")
        if np.any(weights < -1e-15):
            raise ValueError("weights must be nonnegative")

    def mass(self, dist: DiscreteDistribution) -> float:
        """Total reweighted probability mass against ``dist``."""
        return float(self.weights @ dist.probs)

    def expectation(self, dist: DiscreteDistribution) -> float:
        """Expectation of the atom values under the reweighted probabilities."""
        return float((self.weights * dist.probs) @ dist.values)


class RiskSpec:
    """Base class for one-step risk functional specifications."""

    __slots__ = ()


@dataclass(frozen=True)
class Expectation(RiskSpec):
    """Plain expectation (risk neutral)."""


@dataclass(frozen=True)
class AVaR(RiskSpec):
    """Tail-average risk at level ``alpha`` in [0, 1).

    Level 0 reduces to the expectation; levels near 1 approach the maximum.
    """

    alpha: float

    def __post_init__(self):
        if not (0.0 <= self.alpha < 1.0):
            raise ValueError(f"alpha must lie in [0, 1), got {self.alpha!r}")


@dataclass(frozen=True)
class MeanDeviation(RiskSpec):
    """Expectation plus ``kappa`` times mean absolute deviation.

    ``kappa`` must lie in [0, 1/2]; beyond 1/2 the functional loses
    monotonicity and is rejected.
    """

    kappa: float

    def __post_init__(self):
        if not (0.0 <= self.kappa <= 0.5):
            raise ValueError(f"kappa must lie in [0, 1/2], got {self.kappa!r}")


@dataclass(frozen=True)
class KusuokaMixture(RiskSpec):
    """Convex mixture of tail-average functionals.

    ``components`` is a sequence of (level, weight) pairs with levels in
    [0, 1), nonnegative weights, and weights summing to one within 1e-12.
    """

    components: Tuple[Tuple[float, float], ...]

    def __post_init__(self):
        components = tuple((float(a), float(w)) for a, w in self.components)
        object.__setattr__(self, "components", components)
        _check_mixture(components)


def _check_mixture(components: Sequence[Tuple[float, float]]):
    if len(components) == 0:
        raise ValueError("mixture needs at least one (level, weight) component")
    total = 0.0
    for a, w in components:
        if not (0.0 <= a < 1.0):
            raise ValueError(f"mixture level must lie in [0, 1), got {a!r}")
        if w < 0.0:
            raise ValueError(f"mixture weight must be nonnegative, got {w!r}")
        total += w
    if abs(total - 1.0) > PROB_TOL:
        raise ValueError(f"mixture weights sum to {total!r}, not 1")


def _check_level(alpha: float):
    if not (0.0 <= alpha < 1.0):
        raise ValueError(f"alpha must lie in [0, 1), got {alpha!r}")


def value_at_risk(p: float, dist: DiscreteDistribution) -> float:
    """Left-side quantile: the smallest value whose cumulative probability
    reaches ``p``.

    Cumulative probabilities are compared with a 1e-12 slack so that exact
    atom boundaries are not missed to rounding.  ``p`` must lie in (0, 1].
    """
    if not (0.0 < p <= 1.0):
        raise ValueError(f"p must lie in (0, 1], got {p!r}")
    order = np.argsort(dist.values, kind="stable")
    cum = np.cumsum(dist.probs[order])
    idx = int(np.searchsorted(cum, p - PROB_TOL, side="left"))
    idx = min(idx, len(cum) - 1)
    return float(dist.values[order][idx])


def _tail_take(alpha: float, sorted_probs: np.ndarray) -> np.ndarray:
    """Probability mass drawn from each atom (sorted worst first) when the
    worst ``1 - alpha`` tail is collected greedily."""
    t = 1.0 - alpha
    cum = np.cumsum(sorted_probs)
    return np.clip(t - (cum - sorted_probs), 0.0, sorted_probs)


def avar_primal(alpha: float, dist: DiscreteDistribution) -> float:
    """Tail-average risk via the quantile integral.

    Averages the left-side quantile over levels in (alpha, 1], which for a
    finite distribution is the exact stepwise integral: the worst outcomes
    are collected until ``1 - alpha`` probability is exhausted, splitting
    the boundary atom fractionally, and their probability-weighted average
    is returned.  At ``alpha == 0`` this is the expectation.
    """
    _check_level(alpha)
    if alpha == 0.0:
        return float(dist.values @ dist.probs)
    order = np.argsort(-dist.values, kind="stable")
    take = _tail_take(alpha, dist.probs[order])
    return float(dist.values[order] @ take) / (1.0 - alpha)


def avar_dual(alpha: float, dist: DiscreteDistribution) -> Tuple[float, DualDensity]:
    """Tail-average risk via its dual: maximize the reweighted expectation
    over densities bounded by ``1 / (1 - alpha)`` with unit total mass.

    The maximizer is greedy: atoms are scanned from worst value to best
    (ties in input order), each receiving the capped density until the unit
    mass budget is spent, with a fractional weight on the boundary atom.
    Returns the optimal value together with the maximizing density, whose
    weights are aligned with the atoms of ``dist``.
    """
    _check_level(alpha)
    cap = 1.0 / (1.0 - alpha)
    order = np.argsort(-dist.values, kind="stable")
    probs_sorted = dist.probs[order]
    capped = cap * probs_sorted
    cum = np.cumsum(capped)
    take = np.clip(1.0 - (cum - capped), 0.0, capped)
    weights = np.zeros(len(dist))
    weights[order] = take / probs_sorted
    value = float(dist.values[order] @ take)
    return value, DualDensity(weights)


def mean_deviation_primal(kappa: float, dist: DiscreteDistribution) -> float:
    """Expectation plus ``kappa`` times the mean absolute deviation.

    ``kappa`` must lie in [0, 1/2], the range on which the functional is
    monotone.
    """
    if not (0.0 <= kappa <= 0.5):
        raise ValueError(f"kappa must lie in [0, 1/2], got {kappa!r}")
    mean = float(dist.values @ dist.probs)
    dev = float(np.abs(dist.values - mean) @ dist.probs)
    return mean + kappa * dev


def mean_deviation_dual(kappa: float, dist: DiscreteDistribution) -> Tuple[float, DualDensity]:
    """Mean-deviation risk via its dual reweighting.

    The maximizing density is ``1 + h - sum(h * probs)`` where ``h`` is
    ``kappa`` times the sign of the deviation from the mean (zero on atoms
    equal to the mean).  Returns the value and the density, aligned with
    the atoms of ``dist``.
    """
    if not (0.0 <= kappa <= 0.5):
        raise ValueError(f"kappa must lie in [0, 1/2], got {kappa!r}")
    mean = float(dist.values @ dist.probs)
    h = kappa * np.sign(dist.values - mean)
    weights = 1.0 + h - float(h @ dist.probs)
    density = DualDensity(weights)
    return density.expectation(dist), density


MixtureLike = Sequence[Tuple[float, float]]


def kusuoka_evaluate(
    mixtures: Sequence[MixtureLike], dist: DiscreteDistribution
) -> float:
    """Maximum over a finite family of tail-average mixtures.

    Each mixture is a sequence of (level, weight) pairs with weights summing
    to one; its value is the weighted sum of ``avar_primal`` at each level.
    The maximum over the supplied family is returned.  An empty family is
    rejected.
    """
    if len(mixtures) == 0:
        raise ValueError("mixture family must be nonempty")
    best = -np.inf
    for mixture in mixtures:
        components = tuple((float(a), float(w)) for a, w in mixture)
        _check_mixture(components)
        value = sum(w * avar_primal(a, dist) for a, w in components)
        best = max(best, value)
    return float(best)


def evaluate(spec: RiskSpec, dist: DiscreteDistribution) -> float:
    """Evaluate a risk specification on a distribution.

    Dispatches to the primal evaluator of each kind; the expectation is the
    probability-weighted mean, the mixture kind evaluates its single mixture.
    """
    if isinstance(spec, Expectation):
        return float(dist.values @ dist.probs)
    if isinstance(spec, AVaR):
        return avar_primal(spec.alpha, dist)
    if isinstance(spec, MeanDeviation):
        return mean_deviation_primal(spec.kappa, dist)
    if isinstance(spec, KusuokaMixture):
        return kusuoka_evaluate([spec.components], dist)
    raise TypeError(f"unknown risk specification: {spec!r}")


def density_cap(spec: RiskSpec) -> float:
    """Upper bound on the dual density weights of a risk specification.

    Used for tail bounds: the value of the functional on a nonnegative
    outcome never exceeds ``density_cap(spec)`` times the expectation.
    """
    if isinstance(spec, Expectation):
        return 1.0
    if isinstance(spec, AVaR):
        return 1.0 / (1.0 - spec.alpha)
    if isinstance(spec, MeanDeviation):
        return 1.0 + 2.0 * spec.kappa
    if isinstance(spec, KusuokaMixture):
        return float(sum(w / (1.0 - a) for a, w in spec.components))
    raise TypeError(f"unknown risk specification: {spec!r}")
