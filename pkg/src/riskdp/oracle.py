"""Independent verification oracles for the solver and risk functionals.

Everything here re-derives values through a different route than the main
implementation: scenario trees materialize the nested recursion node by
node, the exhaustive search enumerates every stage-policy sequence, the
linear-programming oracle enumerates dual vertices instead of running the
greedy construction, and the risk-neutral dynamic program recomputes
expectations with its own interpolation.  Budgets are enforced loudly with
``BudgetExceededError``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np

from .model import MarkovModel, Tabular
from .risk import AVaR, DiscreteDistribution, Expectation, KusuokaMixture, MeanDeviation, RiskSpec, evaluate
from .solver import Policy

__all__ = [
    "BudgetExceededError",
    "TreeNode",
    "ScenarioTree",
    "build_scenario_tree",
    "scenario_tree_value",
    "exhaustive_policy_search",
    "avar_lp_oracle",
    "risk_neutral_dp",
    "MAX_TREE_NODES",
    "MAX_POLICY_SEQUENCES",
    "MAX_LP_ATOMS",
]

#: largest scenario tree materialized before giving up
MAX_TREE_NODES = 10 ** 6
#: largest number of stage-policy sequences enumerated exhaustively
MAX_POLICY_SEQUENCES = 10 ** 6
#: largest atom count accepted by the dual vertex enumeration
MAX_LP_ATOMS = 12


class BudgetExceededError(RuntimeError):
    """An oracle would exceed its node, sequence, or atom budget."""


@dataclass
class TreeNode:
    """One node of an unrolled scenario tree.

    ``children`` holds one entry per random outcome: the outcome probability
    together with a blend of successor nodes.  Tabular transitions blend a
    single node with weight one; dynamics blend the two grid nodes that
    bracket the clamped successor state, weighted by linear interpolation.
    Leaves (at the tree depth) have no children.
    """

    state_index: int
    state: float
    stage: int
    action_index: int
    children: Tuple[Tuple[float, Tuple[Tuple[float, "TreeNode"], ...]], ...]


@dataclass
class ScenarioTree:
    """Fully materialized policy tree of a fixed depth."""

    depth: int
    root: TreeNode
    n_nodes: int


def _bracket(points: np.ndarray, x: float) -> Tuple[Tuple[int, float], ...]:
    """Grid indices and interpolation weights representing position ``x``."""
    hi = int(np.searchsorted(points, x, side="right"))
    if hi <= 0:
        return ((0, 1.0),)
    if hi >= len(points):
        return ((len(points) - 1, 1.0),)
    lo = hi - 1
    if x == points[lo]:
        return ((lo, 1.0),)
    frac = (x - points[lo]) / (points[hi] - points[lo])
    return ((lo, 1.0 - frac), (hi, frac))


def build_scenario_tree(
    model: MarkovModel, policy: Policy, depth: int, root_index: int
) -> ScenarioTree:
    """Unroll the transitions reachable under ``policy`` from one root state.

    Raises ``BudgetExceededError`` beyond ``MAX_TREE_NODES`` nodes.
    """
    if depth < 0:
        raise ValueError(f"depth must be nonnegative, got {depth!r}")
    if not (0 <= root_index < model.n_states):
        raise ValueError(f"root index {root_index} out of range")
    points = model.grid.points
    counter = [0]

    def expand(state_index: int, stage: int) -> TreeNode:
        counter[0] += 1
        if counter[0] > MAX_TREE_NODES:
            raise BudgetExceededError(
                f"scenario tree exceeds {MAX_TREE_NODES} nodes"
            )
        a_idx = int(policy.rule(stage)[state_index])
        if a_idx not in model.actions.indices_for(state_index):
            raise ValueError(
                f"stage {stage} assigns inadmissible action index "
                f"{a_idx} at state {state_index}"
            )
        if stage == depth:
            return TreeNode(state_index, float(points[state_index]), stage, a_idx, ())
        children = []
        if isinstance(model.transition, Tabular):
            row = model.transition.kernel[state_index, a_idx]
            for j in np.flatnonzero(row > 0.0):
                child = expand(int(j), stage + 1)
                children.append((float(row[j]), ((1.0, child),)))
        else:
            x = float(points[state_index])
            a = float(model.actions.values[a_idx])
            noise = model.transition.noise.dist
            for xi, prob in zip(noise.values, noise.probs):
                succ = model.clamp(model.transition.next_state(x, a, float(xi)))
                blend = tuple(
                    (weight, expand(j, stage + 1))
                    for j, weight in _bracket(points, succ)
                )
                children.append((float(prob), blend))
        return TreeNode(state_index, float(points[state_index]), stage, a_idx, tuple(children))

    root = expand(root_index, 0)
    return ScenarioTree(depth=depth, root=root, n_nodes=counter[0])


def _node_value(model: MarkovModel, risk: RiskSpec, node: TreeNode) -> float:
    cost = model.cost_at(node.state_index, node.action_index)
    if not node.children:
        return cost
    values = np.empty(len(node.children))
    probs = np.empty(len(node.children))
    for k, (prob, blend) in enumerate(node.children):
        values[k] = sum(w * _node_value(model, risk, child) for w, child in blend)
        probs[k] = prob
    dist = DiscreteDistribution(values, probs)
    return cost + model.discount * evaluate(risk, dist)


def scenario_tree_value(
    model: MarkovModel, risk: RiskSpec, policy: Policy, depth: int, root_index: int
) -> float:
    """Nested value of ``policy`` from one root state, computed on an
    explicit scenario tree.

    Recursively, each node contributes its stage cost plus the discounted
    risk of the distribution of child values; leaves contribute only their
    stage cost.
    """
    tree = build_scenario_tree(model, policy, depth, root_index)
    return _node_value(model, risk, tree.root)


# ---------------------------------------------------------------------------
# exhaustive policy enumeration


def _batch_avar(alpha: float, probs: np.ndarray, outcomes: np.ndarray) -> np.ndarray:
    """Tail-average risk of each row of ``outcomes`` under shared atom
    probabilities, via direct tail-mass collection."""
    t = 1.0 - alpha
    order = np.argsort(-outcomes, axis=1, kind="stable")
    sorted_vals = np.take_along_axis(outcomes, order, axis=1)
    sorted_probs = np.take_along_axis(
        np.broadcast_to(probs, outcomes.shape), order, axis=1
    )
    cum = np.cumsum(sorted_probs, axis=1)
    take = np.clip(t - (cum - sorted_probs), 0.0, sorted_probs)
    return (sorted_vals * take).sum(axis=1) / t


def _batch_risk(risk: RiskSpec, probs: np.ndarray, outcomes: np.ndarray) -> np.ndarray:
    """Row-wise risk of an outcome matrix under shared atom probabilities."""
    if isinstance(risk, Expectation):
        return outcomes @ probs
    if isinstance(risk, AVaR):
        return _batch_avar(risk.alpha, probs, outcomes)
    if isinstance(risk, MeanDeviation):
        means = outcomes @ probs
        dev = np.abs(outcomes - means[:, None]) @ probs
        return means + risk.kappa * dev
    if isinstance(risk, KusuokaMixture):
        total = np.zeros(outcomes.shape[0])
        for alpha, weight in risk.components:
            total += weight * _batch_avar(alpha, probs, outcomes)
        return total
    raise TypeError(f"unknown risk specification: {risk!r}")


def _successor_structure(model: MarkovModel):
    """Per (state, action): atom probabilities plus a sparse linear map
    (two index/weight columns) from grid values to atom outcomes."""
    structure = {}
    points = model.grid.points
    for i in range(model.n_states):
        for a_idx in model.actions.indices_for(i):
            if isinstance(model.transition, Tabular):
                row = model.transition.kernel[i, a_idx]
                support = np.flatnonzero(row > 0.0)
                probs = row[support]
                idx = np.stack([support, np.zeros_like(support)], axis=1)
                wts = np.stack([np.ones(len(support)), np.zeros(len(support))], axis=1)
            else:
                x = float(points[i])
                a = float(model.actions.values[a_idx])
                noise = model.transition.noise.dist
                probs = noise.probs.copy()
                idx = np.zeros((len(noise.values), 2), dtype=int)
                wts = np.zeros((len(noise.values), 2))
                for k, xi in enumerate(noise.values):
                    succ = model.clamp(model.transition.next_state(x, a, float(xi)))
                    pairs = _bracket(points, succ)
                    for col, (j, w) in enumerate(pairs):
                        idx[k, col] = j
                        wts[k, col] = w
            structure[(i, a_idx)] = (probs, idx, wts)
    return structure


def exhaustive_policy_search(
    model: MarkovModel, risk: RiskSpec, depth: int, spot_check: bool = True
) -> Tuple[np.ndarray, List[Tuple[Tuple[int, ...], ...]]]:
    """Minimum nested value over every Markov stage-policy sequence.

    All ``R**(depth + 1)`` sequences (``R`` decision rules per stage) are
    evaluated by a backward recursion batched over policy tails, which
    computes exactly the per-policy nested value; the winning value per
    initial state is optionally re-derived through ``scenario_tree_value``
    as a cross-check.  Returns the pointwise-minimal values and, per initial
    state, the minimizing sequence of stage rules.
    """
    if depth < 0:
        raise ValueError(f"depth must be nonnegative, got {depth!r}")
    n = model.n_states
    rules = list(itertools.product(*[model.actions.indices_for(i) for i in range(n)]))
    n_rules = len(rules)
    total = n_rules ** (depth + 1)
    if total > MAX_POLICY_SEQUENCES:
        raise BudgetExceededError(
            f"{total} stage-policy sequences exceed the "
            f"{MAX_POLICY_SEQUENCES} budget"
        )
    structure = _successor_structure(model)
    beta = model.discount

    # tails[t] is the value vector of one policy-tail; peeling stages from
    # the last to the first multiplies the tail count by n_rules each time
    tails = np.zeros((1, n))
    for stage in range(depth, -1, -1):
        t_count = tails.shape[0]
        grown = np.empty((n_rules * t_count, n))
        for r, rule in enumerate(rules):
            block = grown[r * t_count : (r + 1) * t_count]
            for i in range(n):
                probs, idx, wts = structure[(i, rule[i])]
                outcomes = tails[:, idx[:, 0]] * wts[:, 0] + tails[:, idx[:, 1]] * wts[:, 1]
                block[:, i] = model.cost_at(i, rule[i]) + beta * _batch_risk(
                    risk, probs, outcomes
                )
        tails = grown

    best_values = tails.min(axis=0)
    best_rows = tails.argmin(axis=0)

    def decode(row: int) -> Tuple[Tuple[int, ...], ...]:
        digits = []
        for _ in range(depth + 1):
            row, digit = divmod(row, n_rules)
            digits.append(digit)
        # rows were built most-significant stage first
        digits.reverse()
        return tuple(rules[d] for d in digits)

    best_policies = [decode(int(row)) for row in best_rows]

    if spot_check:
        for i in range(n):
            policy = Policy(stages=tuple(np.array(rule) for rule in best_policies[i]))
            tree_value = scenario_tree_value(model, risk, policy, depth, i)
            if abs(tree_value - best_values[i]) > 1e-9:
                raise RuntimeError(
                    f"batched enumeration disagrees with the scenario tree at "
                    f"state {i}: {best_values[i]!r} vs {tree_value!r}"
                )
    return best_values, best_policies


# ---------------------------------------------------------------------------
# dual vertex enumeration


def avar_lp_oracle(alpha: float, dist: DiscreteDistribution, cap_scale: float = 1.0) -> float:
    """Tail-average risk by enumerating the vertices of its dual polytope.

    Maximizes the reweighted expectation over densities bounded by
    ``1 / (1 - alpha)`` with unit mass, checking every saturated subset with
    at most one fractional coordinate.  Limited to ``MAX_LP_ATOMS`` atoms.
    ``cap_scale`` deliberately mis-scales the density bound and exists only
    as a fault-injection hook for the verification harness.
    """
    if not (0.0 <= alpha < 1.0):
        raise ValueError(f"alpha must lie in [0, 1), got {alpha!r}")
    k = len(dist)
    if k > MAX_LP_ATOMS:
        raise BudgetExceededError(
            f"{k} atoms exceed the {MAX_LP_ATOMS}-atom vertex enumeration budget"
        )
    cap = cap_scale / (1.0 - alpha)
    probs = dist.probs
    values = dist.values
    weighted = probs * values
    masks = np.array(list(itertools.product((0.0, 1.0), repeat=k)))
    mass = cap * (masks @ probs)
    base = cap * (masks @ weighted)
    remainder = 1.0 - mass
    best = -np.inf
    exact = np.abs(remainder) <= 1e-12
    if np.any(exact):
        best = float(base[exact].max())
    for b in range(k):
        feasible = (
            (masks[:, b] == 0.0)
            & (remainder > 1e-12)
            & (remainder <= cap * probs[b] + 1e-12)
        )
        if np.any(feasible):
            candidate = float((base[feasible] + remainder[feasible] * values[b]).max())
            best = max(best, candidate)
    if not np.isfinite(best):
        raise RuntimeError("no feasible dual vertex found")
    return best


# ---------------------------------------------------------------------------
# risk-neutral reference recursion


def risk_neutral_dp(model: MarkovModel, horizon: int) -> np.ndarray:
    """Classical expected-cost backward induction over ``0..horizon``.

    Written independently of the risk functionals: expectations are plain
    probability-weighted sums and interpolation is ``np.interp``.
    """
    if horizon < 0:
        raise ValueError(f"horizon must be nonnegative, got {horizon!r}")
    n = model.n_states
    beta = model.discount
    points = model.grid.points
    w = np.zeros(n)
    for _ in range(horizon + 1):
        new = np.empty(n)
        for i in range(n):
            x = float(points[i])
            best = np.inf
            for a_idx in model.actions.indices_for(i):
                a = float(model.actions.values[a_idx])
                if isinstance(model.transition, Tabular):
                    expected = float(model.transition.kernel[i, a_idx] @ w)
                else:
                    noise = model.transition.noise.dist
                    succ = [
                        model.clamp(model.transition.next_state(x, a, float(xi)))
                        for xi in noise.values
                    ]
                    expected = float(np.interp(succ, points, w) @ noise.probs)
                best = min(best, float(model.cost(x, a)) + beta * expected)
            new[i] = best
        w = new
    return w
