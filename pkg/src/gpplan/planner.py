"""Receding-horizon planning by reduced value iteration.

A search tree over control sequences carries, at each node, the robot state
and the covariance the belief would have after measuring along that branch.
Covariance propagation needs no measured values, so whole subtrees stay
valid after execution and are reused. Each iteration deepens the tree by one
layer and prunes new leaves that are close in state space (delta) and whose
covariance is dominated by their neighbours' (epsilon-algebraic redundancy).
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Any, Callable

import numpy as np
from scipy.linalg import solve_triangular

from .gp import LOG_2PI_E
from .kernels import FullyIndependentConditional, SparseKernel
from .linalg import symmetrize
from .recursive import BeliefState, entropy_cost, predict, update

PSD_TOL = 1e-10


def la_solve_lower(lower: np.ndarray, b: np.ndarray) -> np.ndarray:
    return solve_triangular(lower, b, lower=True)


@dataclass(frozen=True)
class PrunerConfig:
    """delta: state-space merge radius; epsilon: covariance slack (inf allowed)."""

    delta: float
    epsilon: float
    controls: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "controls", np.asarray(self.controls, dtype=float))
        if self.controls.size == 0:
            raise ValueError("control sample set must be non-empty")
        if self.delta < 0 or self.epsilon < 0:
            raise ValueError("delta and epsilon must be non-negative")


class SearchNode:
    __slots__ = ("state", "sigma", "cost", "parent", "action", "depth", "aux", "order")

    def __init__(self, state, sigma, cost, parent, action, depth, aux, order):
        self.state = state
        self.sigma = sigma
        self.cost = cost
        self.parent = parent
        self.action = action
        self.depth = depth
        self.aux = aux
        self.order = order

    def sort_key(self):
        return (self.cost, tuple(self.state), self.order)


class SearchTree:
    """Root plus the current leaf layer; interior nodes live via parent links."""

    def __init__(self, root: SearchNode, horizon: int):
        self.root = root
        self.leaves: list[SearchNode] = [root]
        self.horizon = horizon
        self.nodes_expanded = 0
        self.nodes_pruned = 0
        self._counter = 1

    def next_order(self) -> int:
        self._counter += 1
        return self._counter

    def backtrace(self, leaf: SearchNode) -> list:
        """Root-to-leaf action sequence; raises on nodes outside the tree."""
        actions = []
        node = leaf
        while node.parent is not None:
            actions.append(node.action)
            node = node.parent
        if node is not self.root:
            raise ValueError("node is not attached to this tree")
        actions.reverse()
        return actions

    def path_child(self, leaf: SearchNode) -> SearchNode:
        """The root's child on the path to ``leaf`` (the node reached by the
        first action)."""
        node = leaf
        while node.parent is not None and node.parent is not self.root:
            node = node.parent
        if node.parent is not self.root:
            raise ValueError("node is not attached to this tree")
        return node

    def reroot(self, child: SearchNode) -> None:
        """Adopt ``child`` as the new root, keeping only its subtree."""
        if child.parent is not self.root:
            raise ValueError("can only reroot at a child of the current root")
        child.parent = None
        child.action = None
        self.root = child
        kept = []
        for leaf in self.leaves:
            node = leaf
            while node.parent is not None:
                node = node.parent
            if node is child:
                kept.append(leaf)
        self.leaves = kept


def new_tree(state, sigma, horizon: int, cost_model) -> SearchTree:
    aux = cost_model.initial_aux(np.asarray(state, dtype=float))
    cost = cost_model.cost(sigma, aux)
    root = SearchNode(
        np.asarray(state, dtype=float), np.asarray(sigma, dtype=float),
        cost, None, None, 0, aux, 0,
    )
    return SearchTree(root, horizon)


def is_eps_alg_redundant(sigma, others, epsilon: float) -> bool:
    """Whether sigma + eps*I dominates some convex combination of ``others``.

    Exact for a single neighbour; for several, checks the simplex vertices
    and centroid only, a sufficient condition that may under-prune but never
    over-prunes. ``epsilon = inf`` is always redundant against a non-empty set.
    """
    if len(others) == 0:
        return False
    if math.isinf(epsilon):
        return True
    sigma = np.asarray(sigma, dtype=float)
    slack = sigma + epsilon * np.eye(sigma.shape[0])
    tol = PSD_TOL * max(1.0, float(np.abs(sigma).max()))
    candidates = list(others)
    if len(others) > 1:
        candidates.append(sum(others) / len(others))
    for combo in candidates:
        if float(np.linalg.eigvalsh(symmetrize(slack - combo))[0]) >= -tol:
            return True
    return False


def _expand_states(dynamics, state: np.ndarray, controls: np.ndarray):
    """Apply the boundary policy: drop successors that exit the domain; if
    none survive, keep the single control whose successor is nearest to it,
    clamped onto the domain."""
    if hasattr(dynamics, "step_many"):
        raw = dynamics.step_many(state, controls)
    else:
        raw = np.asarray([dynamics.step(state, u) for u in controls])
    domain = getattr(dynamics, "domain", None)
    if domain is None:
        return controls, raw
    inside = domain.contains(raw)
    if np.any(inside):
        return controls[inside], raw[inside]
    dist = domain.exterior_distance(raw)
    best = int(np.argmin(dist))
    return controls[best : best + 1], domain.clamp(raw[best])[None, :]


def rvi_iterate(tree: SearchTree, dynamics, propagator, cost_model, pruner: PrunerConfig) -> SearchTree:
    """Deepen the tree by one layer and prune the new leaf set.

    Candidates are visited in ascending cost order (ties broken by state,
    then insertion); the running minimum always survives, and a candidate is
    pruned iff some kept leaf lies within delta of it and its covariance is
    epsilon-algebraically redundant against those neighbours.
    """
    candidates: list[SearchNode] = []
    for leaf in tree.leaves:
        controls, states = _expand_states(dynamics, leaf.state, pruner.controls)
        sigmas = propagator.propagate_many(leaf.sigma, states)
        if hasattr(cost_model, "propagate_aux_many"):
            auxes = cost_model.propagate_aux_many(leaf.aux, states)
        else:
            auxes = [cost_model.propagate_aux(leaf.aux, x) for x in states]
        costs = cost_model.cost_many(sigmas, auxes)
        for u, x, sig, aux, c in zip(controls, states, sigmas, auxes, costs):
            candidates.append(
                SearchNode(x, sig, float(c), leaf, u, leaf.depth + 1, aux, tree.next_order())
            )
    tree.nodes_expanded += len(candidates)
    candidates.sort(key=SearchNode.sort_key)

    dim = tree.root.state.shape[0]
    kept_states = np.empty((len(candidates), dim))
    kept: list[SearchNode] = []
    pruned = 0
    for node in candidates:
        if kept:
            diff = kept_states[: len(kept)] - node.state
            near = np.einsum("ij,ij->i", diff, diff) <= pruner.delta**2
            if np.any(near):
                neighbours = [kept[i].sigma for i in np.flatnonzero(near)]
                if is_eps_alg_redundant(node.sigma, neighbours, pruner.epsilon):
                    pruned += 1
                    continue
        kept_states[len(kept)] = node.state
        kept.append(node)
    tree.nodes_pruned += pruned
    tree.leaves = kept
    return tree


class GpBeliefPropagator:
    """Covariance half of the scalar Kalman update, batched over candidates."""

    def __init__(self, kernel: SparseKernel, noise_bound: float):
        self.kernel = kernel
        self.inducing = kernel.inducing
        self.noise_var = noise_bound**2
        self._fic = isinstance(kernel, FullyIndependentConditional)

    def _innovation(self, states: np.ndarray):
        """q(x) rows and the per-state prior surcharge, one kernel solve."""
        kz = self.inducing.cross(states)
        q = self.inducing.solve(kz.T).T
        if self._fic:
            resid = np.maximum(
                self.kernel.base.diag(states) - np.einsum("cm,cm->c", q, kz), 0.0
            )
        else:
            resid = np.zeros(states.shape[0])
        return q, resid

    def propagate(self, sigma: np.ndarray, x: np.ndarray) -> np.ndarray:
        q, resid = self._innovation(np.asarray(x, float)[None, :])
        cross = q[0] @ sigma
        var = float(cross @ q[0]) + float(resid[0]) + self.noise_var
        return symmetrize(sigma - np.outer(cross / var, cross))

    def propagate_many(self, sigma: np.ndarray, states: np.ndarray) -> np.ndarray:
        q, resid = self._innovation(states)
        cross = q @ sigma
        var = np.einsum("cm,cm->c", cross, q) + resid + self.noise_var
        out = sigma[None, :, :] - np.einsum("cm,cn->cmn", cross / var[:, None], cross)
        return 0.5 * (out + out.swapaxes(-1, -2))


class PosteriorEntropyCost:
    """Node cost c(Sigma) = 0.5 log det 2 pi e Sigma."""

    def initial_aux(self, state: np.ndarray) -> None:
        return None

    def propagate_aux(self, aux, x: np.ndarray) -> None:
        return None

    def cost(self, sigma: np.ndarray, aux) -> float:
        return entropy_cost(sigma)

    def cost_many(self, sigmas: np.ndarray, auxes) -> np.ndarray:
        m = sigmas.shape[-1]
        try:
            chol = np.linalg.cholesky(sigmas)
        except np.linalg.LinAlgError:
            return np.asarray([self.cost(s, a) for s, a in zip(sigmas, auxes)])
        logdets = 2.0 * np.sum(np.log(np.diagonal(chol, axis1=-2, axis2=-1)), axis=-1)
        return 0.5 * (m * LOG_2PI_E + logdets)


@dataclass(frozen=True)
class _GramChain:
    """One measurement site appended to a branch's Gram Cholesky factor.

    Nodes share ancestors' rows through the parent link, so the whole tree
    stores each factor row exactly once.
    """

    parent: "_GramChain | None"
    location: np.ndarray
    row: np.ndarray  # wholly determined by the ancestor chain
    diag: float
    logdet: float
    count: int


class MeasurementEntropyCost:
    """Baseline cost -log det(K_X + noise^2 I) over planned measurement sites.

    K_X is the exact-kernel Gram of every location measured along the branch;
    the noise term keeps revisited locations from making it singular. Each
    node extends its parent's Cholesky factor by one row, so the cost is
    incremental in the branch length.
    """

    def __init__(self, kernel, noise_bound: float):
        if noise_bound <= 0:
            raise ValueError("measurement-entropy cost requires positive noise")
        self.kernel = kernel.base if isinstance(kernel, SparseKernel) else kernel
        self.noise_var = noise_bound**2

    def initial_aux(self, state: np.ndarray) -> None:
        # No measurement is taken at the starting pose.
        return None

    def _locations(self, aux: _GramChain | None) -> np.ndarray:
        locs = []
        node = aux
        while node is not None:
            locs.append(node.location)
            node = node.parent
        locs.reverse()
        return np.asarray(locs)

    def _factor(self, aux: _GramChain | None) -> np.ndarray:
        rows = []
        node = aux
        while node is not None:
            rows.append((node.row, node.diag))
            node = node.parent
        rows.reverse()
        n = len(rows)
        lower = np.zeros((n, n))
        for i, (row, diag) in enumerate(rows):
            lower[i, :i] = row
            lower[i, i] = diag
        return lower

    def propagate_aux(self, aux: _GramChain | None, x: np.ndarray) -> _GramChain:
        x = np.asarray(x, dtype=float)
        if aux is None:
            d2 = self.kernel(x, x) + self.noise_var
            return _GramChain(None, x, np.zeros(0), math.sqrt(d2), math.log(d2), 1)
        lower = self._factor(aux)
        locs = self._locations(aux)
        kvec = self.kernel.pairwise(x[None, :], locs)[0]
        row = la_solve_lower(lower, kvec)
        d2 = self.kernel(x, x) + self.noise_var - float(row @ row)
        d2 = max(d2, 1e-12 * self.noise_var)
        return _GramChain(aux, x, row, math.sqrt(d2), aux.logdet + math.log(d2), aux.count + 1)

    def propagate_aux_many(self, aux: _GramChain | None, states: np.ndarray) -> list:
        if aux is None:
            return [self.propagate_aux(None, x) for x in states]
        lower = self._factor(aux)
        locs = self._locations(aux)
        kmat = self.kernel.pairwise(locs, states)
        rows = solve_triangular(lower, kmat, lower=True)
        out = []
        for i, x in enumerate(states):
            row = rows[:, i]
            d2 = self.kernel(x, x) + self.noise_var - float(row @ row)
            d2 = max(d2, 1e-12 * self.noise_var)
            out.append(
                _GramChain(aux, np.asarray(x, float), row, math.sqrt(d2),
                           aux.logdet + math.log(d2), aux.count + 1)
            )
        return out

    def cost(self, sigma: np.ndarray, aux: _GramChain | None) -> float:
        return 0.0 if aux is None else -aux.logdet

    def cost_many(self, sigmas: np.ndarray, auxes) -> np.ndarray:
        return np.asarray([self.cost(None, a) for a in auxes])


@dataclass
class PlannerSettings:
    horizon: int
    steps: int
    pruner: PrunerConfig

    def __post_init__(self):
        if self.horizon < 1:
            raise ValueError("horizon must be at least 1")
        if self.steps < 0:
            raise ValueError("steps must be non-negative")


@dataclass
class PlanningEnv:
    """Everything plan_and_execute needs: how the robot moves, how beliefs
    propagate, what a node costs, and how measurements are drawn."""

    dynamics: Any
    kernel: SparseKernel
    noise_bound: float
    cost_model: Any
    observe: Callable[[np.ndarray], float]


@dataclass
class StepRow:
    step: int
    state: np.ndarray
    action: float | None
    measurement: float | None
    entropy: float
    expanded: int
    pruned: int
    metrics: dict = field(default_factory=dict)


@dataclass
class TrialRecord:
    steps: list[StepRow]
    nodes_expanded: int
    nodes_pruned: int
    wall_time: float
    final_belief: BeliefState


def _argmin_leaf(leaves: list[SearchNode]) -> SearchNode:
    return min(leaves, key=SearchNode.sort_key)


def plan_and_execute(
    initial_state,
    initial_belief: BeliefState,
    env: PlanningEnv,
    settings: PlannerSettings,
    metrics: Callable[[BeliefState], dict] | None = None,
) -> TrialRecord:
    """Offline horizon-deep search, then execute/measure/update/replan."""
    t_start = time.perf_counter()
    propagator = GpBeliefPropagator(env.kernel, env.noise_bound)
    belief = initial_belief
    tree = new_tree(initial_state, belief.sigma, settings.horizon, env.cost_model)
    for _ in range(settings.horizon):
        rvi_iterate(tree, env.dynamics, propagator, env.cost_model, settings.pruner)

    def snapshot(step, action, measurement, expanded, pruned):
        row = StepRow(
            step=step,
            state=np.array(tree.root.state if step else initial_state, dtype=float),
            action=action,
            measurement=measurement,
            entropy=entropy_cost(belief.sigma),
            expanded=expanded,
            pruned=pruned,
        )
        if metrics is not None:
            row.metrics = metrics(belief)
        return row

    offline_expanded, offline_pruned = tree.nodes_expanded, tree.nodes_pruned
    rows = [snapshot(0, None, None, offline_expanded, offline_pruned)]
    for t in range(1, settings.steps + 1):
        best = _argmin_leaf(tree.leaves)
        action = tree.backtrace(best)[0]
        child = tree.path_child(best)
        x_new = child.state
        y = env.observe(x_new)
        belief = update(belief, predict(belief, x_new, env.kernel, env.noise_bound), y)
        if not np.allclose(belief.sigma, child.sigma, atol=1e-9):
            raise RuntimeError("planned covariance diverged from the filter update")
        before_e, before_p = tree.nodes_expanded, tree.nodes_pruned
        tree.reroot(child)
        rvi_iterate(tree, env.dynamics, propagator, env.cost_model, settings.pruner)
        rows.append(
            snapshot(t, action, y, tree.nodes_expanded - before_e, tree.nodes_pruned - before_p)
        )
    return TrialRecord(
        steps=rows,
        nodes_expanded=tree.nodes_expanded,
        nodes_pruned=tree.nodes_pruned,
        wall_time=time.perf_counter() - t_start,
        final_belief=belief,
    )
