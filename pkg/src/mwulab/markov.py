"""Exact dual-space Markov chain and primal transition kernel.

The stochastic dynamic, viewed through the cumulative payoff vectors,
is a Markov chain on a countable set of rational states once every payoff
vector is normalized so its first coordinate is zero.  This module
enumerates that chain layer by layer in exact Fraction arithmetic,
constructs the explicit return paths that certify irreducibility, and
provides the primal-space kernel whose only absorbing points are the
simplex vertices.

State identity is exact: two dual states are the same state iff their
Fractions are equal, which is why float games must be rationalized
explicitly (:func:`mwulab.games.rationalize_game`) before entering.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .games import (
    GameError,
    NetworkGame,
    is_fully_mixed,
    payoff_vector,
)
from .dynamics import mwu_update
from .nash import common_denominator
from .regularizers import make_regularizer

DualState = tuple  # per agent: tuple of Fractions, first coordinate 0


def normalize_dual(ys) -> DualState:
    """Subtract each agent's first coordinate; mirror maps are unchanged."""
    state = []
    for y in ys:
        vals = [v if isinstance(v, Fraction) else Fraction(v) for v in np.asarray(y).flat]
        first = vals[0]
        state.append(tuple(v - first for v in vals))
    return tuple(state)


def zero_dual_state(game: NetworkGame) -> DualState:
    return tuple(tuple(Fraction(0) for _ in range(c)) for c in game.strategy_counts)


def dual_step(game: NetworkGame, state: DualState, profile) -> DualState:
    """Apply one normalized update for a realized pure profile, exactly."""
    if not game.is_rational:
        raise GameError("the dual chain needs a rational game")
    nxt = []
    for i, y in enumerate(state):
        delta = payoff_vector(game, i, tuple(profile))
        raw = [a + b for a, b in zip(y, delta)]
        first = raw[0]
        nxt.append(tuple(v - first for v in raw))
    return tuple(nxt)


def _state_floats(state) -> list[np.ndarray]:
    return [np.asarray([float(v) for v in y]) for y in state]


@dataclass
class StateGraph:
    """Layered reachability graph of the normalized dual chain.

    ``layers[t]`` lists states first reached after t steps; ``edges`` holds
    every (state, profile, successor) discovered while expanding layers
    0..t_max-1.  ``predecessor`` records each non-origin state's first-reach
    edge.  ``truncated`` is set when the state cap stopped the enumeration
    before t_max layers were completed.
    """

    origin: DualState
    layers: list[list[DualState]]
    edges: list[tuple[DualState, tuple[int, ...], DualState]]
    first_reach: dict[DualState, int]
    predecessor: dict[DualState, tuple[DualState, tuple[int, ...]]]
    truncated: bool = False

    @property
    def states(self) -> list[DualState]:
        return [s for layer in self.layers for s in layer]

    @property
    def num_states(self) -> int:
        return len(self.first_reach)


def enumerate_states(
    game: NetworkGame,
    y0: DualState | None = None,
    t_max: int = 4,
    state_cap: int = 100_000,
) -> StateGraph:
    """Breadth-first enumeration of states reachable within t_max steps."""
    if not game.is_rational:
        raise GameError("state enumeration needs a rational game")
    if t_max < 0:
        raise GameError("t_max must be nonnegative")
    origin = zero_dual_state(game) if y0 is None else normalize_dual(y0)
    profiles = list(itertools.product(*(range(c) for c in game.strategy_counts)))

    layers = [[origin]]
    edges = []
    first_reach = {origin: 0}
    predecessor = {}
    truncated = False

    for t in range(1, t_max + 1):
        layer = []
        for state in layers[t - 1]:
            for profile in profiles:
                nxt = dual_step(game, state, profile)
                edges.append((state, profile, nxt))
                if nxt not in first_reach:
                    if len(first_reach) >= state_cap:
                        truncated = True
                        continue
                    first_reach[nxt] = t
                    predecessor[nxt] = (state, profile)
                    layer.append(nxt)
        if truncated:
            layers.append(layer)
            break
        layers.append(layer)
    return StateGraph(origin, layers, edges, first_reach, predecessor, truncated)


def dual_transition(game: NetworkGame, reg, etas, state: DualState):
    """Outgoing transitions (next state, probability) from a dual state.

    Next states are exact; probabilities are products of mirrored
    coordinates, aggregated over profiles leading to the same state.
    """
    reg = make_regularizer(reg) if isinstance(reg, str) else reg
    n = game.num_agents
    xs = [
        reg.mirror(y, eta)
        for y, eta in zip(_state_floats(state), _expand_etas(etas, n))
    ]
    out: dict[DualState, float] = {}
    for profile in itertools.product(*(range(c) for c in game.strategy_counts)):
        prob = 1.0
        for i, s in enumerate(profile):
            prob *= float(xs[i][s])
        nxt = dual_step(game, state, profile)
        out[nxt] = out.get(nxt, 0.0) + prob
    return list(out.items())


def _expand_etas(etas, n):
    if np.isscalar(etas):
        return [float(etas)] * n
    return [float(e) for e in etas]


# ---------------------------------------------------------------------------
# return paths and irreducibility

def return_path(game: NetworkGame, x_star, entry_profile) -> list[tuple[int, ...]]:
    """Profile sequence of length b-1 undoing one entry step, exactly.

    With x*_{is} = c_{is}/b fully mixed and the game normalized so that
    every payoff vector vanishes at x*, playing (entry, path) makes each
    agent realize strategy s exactly c_{is} times; the accumulated update
    is b times the (zero) payoff vector at x*, so any starting dual state
    returns to itself.  Equivalently: the path alone undoes the entry step.
    """
    if not game.is_rational:
        raise GameError("return paths need a rational game")
    if not is_fully_mixed(x_star):
        raise GameError("return paths need a fully mixed equilibrium")
    for i in range(game.num_agents):
        v = payoff_vector(game, i, x_star)
        if any(c != 0 for c in v):
            raise GameError(
                "game is not zero-normalized at x_star: "
                f"agent {i} payoff vector {list(v)}"
            )
    b, counts = common_denominator(x_star)
    sequences = []
    for i, s_entry in enumerate(entry_profile):
        seq = []
        for s, c in enumerate(counts[i]):
            reps = c - 1 if s == int(s_entry) else c
            seq.extend([s] * reps)
        sequences.append(seq)
    return [tuple(p) for p in zip(*sequences)]


@dataclass
class IrreducibilityReport:
    states_checked: int
    reach_failures: list = field(default_factory=list)
    return_failures: list = field(default_factory=list)
    truncated: bool = False
    common_denominator: int = 0
    max_return_steps: int = 0

    @property
    def irreducible_on_subgraph(self) -> bool:
        return not self.reach_failures and not self.return_failures

    def summary(self) -> str:
        scope = "enumerated subgraph only" if self.truncated else "enumerated subgraph"
        verdict = "irreducible" if self.irreducible_on_subgraph else "NOT verified"
        return (
            f"{verdict} on the {scope}: {self.states_checked} states, "
            f"b={self.common_denominator}, "
            f"longest certified return {self.max_return_steps} steps, "
            f"{len(self.reach_failures)} reach / {len(self.return_failures)} return failures"
        )


def check_irreducible(
    graph: StateGraph, game: NetworkGame, reg, etas, x_star
) -> IrreducibilityReport:
    """Certify that every enumerated state is reached from the origin and
    walks back to it through the constructive return paths.

    Reachability uses the recorded first-reach edges (their probability
    must be strictly positive under the mirror map); the return direction
    descends one layer per return path, verifying exact state equality at
    every hop.  The verdict only covers the enumerated subgraph.
    """
    reg = make_regularizer(reg) if isinstance(reg, str) else reg
    n = game.num_agents
    etas = _expand_etas(etas, n)
    b, _ = common_denominator(x_star)
    report = IrreducibilityReport(
        states_checked=graph.num_states,
        truncated=graph.truncated,
        common_denominator=b,
    )

    def step_probability(state, profile):
        xs = [reg.mirror(y, eta) for y, eta in zip(_state_floats(state), etas)]
        prob = 1.0
        for i, s in enumerate(profile):
            prob *= float(xs[i][s])
        return prob

    for state in graph.states:
        if state == graph.origin:
            continue
        pred = graph.predecessor.get(state)
        if pred is None:
            report.reach_failures.append((state, "no first-reach edge"))
            continue
        if step_probability(pred[0], pred[1]) <= 0.0:
            report.reach_failures.append((state, "first-reach edge has probability 0"))

    for state in graph.states:
        current = state
        steps = 0
        while current != graph.origin:
            pred_edge = graph.predecessor.get(current)
            if pred_edge is None:
                report.return_failures.append((state, "missing predecessor chain"))
                break
            pred, entry = pred_edge
            walker = current
            ok = True
            for profile in return_path(game, x_star, entry):
                if step_probability(walker, profile) <= 0.0:
                    report.return_failures.append((state, "zero-probability return step"))
                    ok = False
                    break
                walker = dual_step(game, walker, profile)
                steps += 1
            if not ok:
                break
            if walker != pred:
                report.return_failures.append((state, "return path missed the predecessor"))
                break
            current = pred
        else:
            report.max_return_steps = max(report.max_return_steps, steps)
    return report


# ---------------------------------------------------------------------------
# primal kernel

def primal_kernel(game: NetworkGame, xs, etas):
    """All one-step outcomes of the multiplicative update from profile xs.

    Enumerates the pure profiles with positive realization probability,
    applies the reweighting map to each, and aggregates duplicates.
    Returns a list of (next profile, probability); probabilities sum to 1.
    """
    n = game.num_agents
    etas = _expand_etas(etas, n)
    xs = [np.asarray(x, dtype=np.float64) for x in xs]
    out: dict[tuple, tuple] = {}
    for profile in itertools.product(*(range(c) for c in game.strategy_counts)):
        prob = 1.0
        for i, s in enumerate(profile):
            prob *= float(xs[i][s])
        if prob == 0.0:
            continue
        nxt = [
            mwu_update(xs[i], payoff_vector(game, i, profile), etas[i])
            for i in range(n)
        ]
        key = tuple(x.tobytes() for x in nxt)
        if key in out:
            point, acc = out[key]
            out[key] = (point, acc + prob)
        else:
            out[key] = (nxt, prob)
    return list(out.values())


@dataclass
class StationarityReport:
    results: list  # (profile embedding, bool)

    @property
    def all_stationary(self) -> bool:
        return all(ok for _, ok in self.results)


def pure_stationarity_check(game: NetworkGame, etas, pure_points) -> StationarityReport:
    """Verify the kernel fixes each given vertex with probability exactly 1.

    Any mixture supported on such vertices is then invariant.  Inputs must
    be pure profiles embedded as one-hot mixed profiles.
    """
    results = []
    for point in pure_points:
        point = [np.asarray(x, dtype=np.float64) for x in point]
        for x in point:
            if sorted(x.tolist()) != [0.0] * (x.size - 1) + [1.0]:
                raise GameError(f"{x} is not a one-hot vertex embedding")
        kernel = primal_kernel(game, point, etas)
        ok = (
            len(kernel) == 1
            and kernel[0][1] == 1.0
            and all(np.array_equal(a, b) for a, b in zip(kernel[0][0], point))
        )
        results.append((point, ok))
    return StationarityReport(results)


# ---------------------------------------------------------------------------
# occupation statistics

class InteriorBox:
    """Region {x : every coordinate of every agent >= delta}."""

    def __init__(self, delta: float):
        self.delta = float(delta)

    def mask(self, trajectory) -> np.ndarray:
        inside = np.ones(trajectory.num_steps + 1, dtype=bool)
        for x in trajectory.xs:
            inside &= x.min(axis=1) >= self.delta
        return inside

    def contains(self, profile) -> bool:
        return all(np.asarray(x, dtype=np.float64).min() >= self.delta for x in profile)


class Ball:
    """Region of profiles within ``radius`` of ``center`` in the combined
    Euclidean norm over all agents."""

    def __init__(self, center, radius: float):
        self.center = [np.asarray(c, dtype=np.float64) for c in center]
        self.radius = float(radius)

    def mask(self, trajectory) -> np.ndarray:
        sq = np.zeros(trajectory.num_steps + 1)
        for x, c in zip(trajectory.xs, self.center):
            sq += ((x - c) ** 2).sum(axis=1)
        return np.sqrt(sq) <= self.radius

    def contains(self, profile) -> bool:
        sq = sum(
            float(((np.asarray(x, dtype=np.float64) - c) ** 2).sum())
            for x, c in zip(profile, self.center)
        )
        return math.sqrt(sq) <= self.radius


@dataclass
class OccupationReport:
    fraction: float
    window: int
    window_starts: np.ndarray
    window_fractions: np.ndarray


def empirical_occupation(trajectory, region, window: int = 500) -> OccupationReport:
    """Fraction of recorded iterates inside the region, overall and per
    non-overlapping window (the trailing partial window counts too)."""
    mask = region.mask(trajectory)
    total = mask.size
    starts = np.arange(0, total, window)
    fractions = np.asarray([mask[s : s + window].mean() for s in starts])
    return OccupationReport(float(mask.mean()), window, starts, fractions)


@dataclass
class ReturnTimeReport:
    samples: list[int]
    censored: list[int]

    @property
    def mean_uncensored(self) -> float | None:
        return float(np.mean(self.samples)) if self.samples else None

    @property
    def censored_count(self) -> int:
        return len(self.censored)


def return_time_samples(trajectory, region) -> ReturnTimeReport:
    """Steps between each exit from the region and the next re-entry.

    An exit still outstanding at the horizon contributes a right-censored
    sample (time observed so far) instead of being extrapolated.
    """
    mask = region.mask(trajectory)
    samples, censored = [], []
    t = 0
    total = mask.size
    while t < total:
        if t > 0 and mask[t - 1] and not mask[t]:
            exit_at = t
            while t < total and not mask[t]:
                t += 1
            if t < total:
                samples.append(t - exit_at)
            else:
                censored.append(total - 1 - exit_at)
                break
        else:
            t += 1
    return ReturnTimeReport(samples, censored)


# ---------------------------------------------------------------------------
# exact one-step expectation

def expected_dual_increment(game: NetworkGame, xs):
    """Expected one-step change of each agent's raw payoff vector, by full
    outcome enumeration.

    Exact (Fraction) when the game and profile are rational; by linearity
    it must equal the deterministic increment ``payoff_vector(game, i, xs)``.
    """
    n = game.num_agents
    exact = game.is_rational
    if exact:
        totals = [np.full(c, Fraction(0), dtype=object) for c in game.strategy_counts]
    else:
        totals = [np.zeros(c) for c in game.strategy_counts]
    for profile in itertools.product(*(range(c) for c in game.strategy_counts)):
        prob = None
        for i, s in enumerate(profile):
            p = xs[i][s]
            prob = p if prob is None else prob * p
        for i in range(n):
            totals[i] = totals[i] + prob * payoff_vector(game, i, profile)
    return totals


def payoff_denominator(game: NetworkGame) -> int:
    """LCM of all payoff entry denominators: dual states live on the grid
    of integer multiples of 1/denominator around the origin."""
    if not game.is_rational:
        raise GameError("payoff_denominator needs a rational game")
    denoms = [v.denominator for a in game.payoffs.values() for v in a.flat]
    return math.lcm(*denoms) if denoms else 1


def lattice_check(graph: StateGraph, denominator: int) -> bool:
    """True iff every enumerated state sits on the 1/denominator grid
    relative to the origin, exactly."""
    for state in graph.states:
        for y, y0 in zip(state, graph.origin):
            for v, v0 in zip(y, y0):
                if ((v - v0) * denominator).denominator != 1:
                    return False
    return True
