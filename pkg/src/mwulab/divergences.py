"""Bregman divergence, KL divergence, and the Fenchel coupling.

All three measure how far a profile (or its dual payoff vector) is from a
reference equilibrium profile, under the embedded-learning-rate convention:
each agent's term carries a 1/eta_i factor so that the coupling in the dual
space matches the Bregman divergence of the mirrored profile.  The coupling
is invariant to shifting any y_i by a constant vector.

The one-step drift check enumerates every pure outcome exactly instead of
sampling: the claim being verified is a strict inequality.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .games import GameError, NetworkGame, payoff_vector
from .regularizers import Entropy, Regularizer, make_regularizer


@dataclass(frozen=True)
class DivergenceReport:
    per_agent: tuple[float, ...]

    @property
    def total(self) -> float:
        return float(sum(self.per_agent))


def _per_agent_regs(reg, n) -> list[Regularizer]:
    if isinstance(reg, (str, Regularizer)):
        return [make_regularizer(reg)] * n
    regs = [make_regularizer(r) for r in reg]
    if len(regs) != n:
        raise GameError(f"need {n} regularizers, got {len(regs)}")
    return regs


def _per_agent_etas(etas, n) -> list[float]:
    if etas is None:
        return [1.0] * n
    if np.isscalar(etas):
        return [float(etas)] * n
    etas = [float(e) for e in etas]
    if len(etas) != n:
        raise GameError(f"need {n} learning rates, got {len(etas)}")
    return etas


def bregman(reg, x_star, x, etas=None) -> DivergenceReport:
    """Per-agent h(x*) - h(x) - <grad h(x), x* - x>, scaled by 1/eta.

    Entropy requires an interior x (the gradient blows up on the boundary);
    squared Euclidean accepts any profile and reduces to ||x* - x||^2 / 2.
    """
    n = len(x_star)
    regs = _per_agent_regs(reg, n)
    etas = _per_agent_etas(etas, n)
    terms = []
    for r, eta, xs_i, x_i in zip(regs, etas, x_star, x):
        xs_i = np.asarray(xs_i, dtype=np.float64)
        x_i = np.asarray(x_i, dtype=np.float64)
        if isinstance(r, Entropy):
            if np.any(x_i <= 0.0):
                raise GameError("entropy Bregman divergence needs interior x")
            grad = 1.0 + np.log(x_i)
        else:
            grad = x_i
        term = r.value(xs_i) - r.value(x_i) - float(grad @ (xs_i - x_i))
        terms.append(term / eta)
    return DivergenceReport(tuple(terms))


def kl_divergence(x_star, x) -> DivergenceReport:
    """Sum over the support of x* of x* (ln x* - ln x), per agent.

    Support violations (x zero where x* is not) yield an explicit +inf
    term: trajectories approach the boundary and the diagnostic must stay
    total.
    """
    terms = []
    for xs_i, x_i in zip(x_star, x):
        xs_i = np.asarray(xs_i, dtype=np.float64)
        x_i = np.asarray(x_i, dtype=np.float64)
        support = xs_i > 0.0
        if np.any(support & (x_i <= 0.0)):
            terms.append(math.inf)
            continue
        p = xs_i[support]
        q = x_i[support]
        terms.append(float(np.sum(p * (np.log(p) - np.log(q)))))
    return DivergenceReport(tuple(terms))


def fenchel_coupling(reg, x_star, ys, etas=None) -> DivergenceReport:
    """Per-agent h(x*)/eta + h*(y) - <y, x*> in the payoff-vector space."""
    n = len(x_star)
    regs = _per_agent_regs(reg, n)
    etas = _per_agent_etas(etas, n)
    terms = []
    for r, eta, xs_i, y_i in zip(regs, etas, x_star, ys):
        xs_i = np.asarray(xs_i, dtype=np.float64)
        y_i = np.asarray(y_i, dtype=np.float64)
        terms.append(r.value(xs_i) / eta + r.conjugate(y_i, eta) - float(y_i @ xs_i))
    return DivergenceReport(tuple(terms))


@dataclass(frozen=True)
class DriftReport:
    current: float
    expected_next: float
    outcomes: list  # (profile, probability, coupling increase)
    increase_bound: float

    @property
    def drift(self) -> float:
        return self.expected_next - self.current

    @property
    def max_outcome_increase(self) -> float:
        return max((inc for _, _, inc in self.outcomes), default=0.0)


def one_step_expected_fenchel(
    game: NetworkGame, reg, etas, x_star, ys, outcome_cap: int = 10**6
) -> DriftReport:
    """Exact one-step expectation of the Fenchel coupling.

    Enumerates every pure profile reachable from the mirrored profile of
    ``ys``, weighting each outcome's coupling by its realization
    probability.  Also reports the uniform per-outcome increase bound
    b = sum_i max_s max-coordinate of agent i's payoff vector.
    """
    n = game.num_agents
    regs = _per_agent_regs(reg, n)
    etas = _per_agent_etas(etas, n)
    total_outcomes = 1
    for c in game.strategy_counts:
        total_outcomes *= c
    if total_outcomes > outcome_cap:
        raise GameError(
            f"{total_outcomes} outcomes exceed the cap {outcome_cap}"
        )

    ys = [np.asarray(y, dtype=np.float64) for y in ys]
    xs = [r.mirror(y, eta) for r, eta, y in zip(regs, etas, ys)]
    current = fenchel_coupling(regs, x_star, ys, etas).total

    outcomes = []
    drift = 0.0
    bound = np.zeros(n)
    for profile in itertools.product(*(range(c) for c in game.strategy_counts)):
        prob = 1.0
        for i, s in enumerate(profile):
            prob *= float(xs[i][s])
        increase = 0.0
        for i in range(n):
            delta = payoff_vector(game, i, profile)
            bound[i] = max(bound[i], float(np.max(delta)))
            # h(x*) cancels in the difference; computing increments directly
            # avoids cancellation between two large couplings
            increase += (
                regs[i].conjugate(ys[i] + delta, etas[i])
                - regs[i].conjugate(ys[i], etas[i])
                - float(np.asarray(delta, dtype=np.float64) @ np.asarray(x_star[i], dtype=np.float64))
            )
        outcomes.append((profile, prob, increase))
        drift += prob * increase
    return DriftReport(
        current=current,
        expected_next=current + drift,
        outcomes=outcomes,
        increase_bound=float(bound.sum()),
    )


def divergence_series(trajectory, x_star, reg=None, etas=None):
    """KL and Fenchel-coupling time series along a recorded trajectory.

    Returns a dict with keys t, kl, fenchel, kl_agents, fenchel_agents.
    Regularizers and rates default to the ones recorded on the trajectory.
    """
    if reg is None:
        reg = list(trajectory.regularizers)
    if etas is None:
        etas = trajectory.etas
    steps = trajectory.num_steps
    n = trajectory.num_agents
    kl = np.empty(steps + 1)
    fen = np.empty(steps + 1)
    kl_agents = np.empty((steps + 1, n))
    fen_agents = np.empty((steps + 1, n))
    for t in range(steps + 1):
        k = kl_divergence(x_star, trajectory.profile(t))
        f = fenchel_coupling(reg, x_star, trajectory.dual(t), etas)
        kl[t] = k.total
        fen[t] = f.total
        kl_agents[t] = k.per_agent
        fen_agents[t] = f.per_agent
    return {
        "t": np.arange(steps + 1),
        "kl": kl,
        "fenchel": fen,
        "kl_agents": kl_agents,
        "fenchel_agents": fen_agents,
    }
