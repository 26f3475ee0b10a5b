"""Deterministic and stochastic follow-the-regularized-leader dynamics.

All agents update simultaneously.  The dual state y accumulates raw payoff
vectors (the learning rate only enters through the mirror map), so one
stochastic step is

    sample s from the current mixed profile,
    y_i += sum_j A[(i, j)][:, s_j],
    x_i  = mirror(y_i, eta_i),

and the deterministic step replaces the sampled column by A @ x_j.  With the
entropy regularizer the same dynamic has two closed multiplicative forms
(:func:`stochastic_mwu_step` on x directly, :func:`stochastic_mwu2_step` on
the raw dual vector); all three produce identical trajectories under shared
realizations, which the test suite checks to 1e-12.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .games import GameError, NetworkGame, as_float, is_fully_mixed, payoff_vector, validate_mixed_profile
from .regularizers import Entropy, Regularizer, make_regularizer


@dataclass
class DynamicsConfig:
    """Run parameters: horizon, per-agent rates/regularizers, initial state.

    Exactly one of ``y0``/``x0`` may be given; omitting both starts from
    y = 0 (uniform mixed strategies).  With the entropy regularizer an
    initial profile must be fully mixed, since boundary points have no dual
    preimage.
    """

    horizon: int
    etas: float | Sequence[float] = 0.1
    regularizer: str | Regularizer | Sequence = "entropy"
    seed: int | None = None
    y0: Sequence[np.ndarray] | None = None
    x0: Sequence[np.ndarray] | None = None

    def resolve(self, game: NetworkGame):
        """Per-agent (regularizers, etas, initial dual vectors) for a game."""
        n = game.num_agents
        if self.horizon < 0:
            raise GameError("horizon must be nonnegative")
        if np.isscalar(self.etas):
            etas = [float(self.etas)] * n
        else:
            etas = [float(e) for e in self.etas]
        if len(etas) != n or any(e <= 0 for e in etas):
            raise GameError(f"need {n} positive learning rates, got {etas}")
        if isinstance(self.regularizer, (str, Regularizer)):
            regs = [make_regularizer(self.regularizer) for _ in range(n)]
        else:
            regs = [make_regularizer(r) for r in self.regularizer]
        if len(regs) != n:
            raise GameError(f"need {n} regularizers")
        if self.y0 is not None and self.x0 is not None:
            raise GameError("give y0 or x0, not both")
        if self.y0 is not None:
            ys = [np.asarray(y, dtype=np.float64).copy() for y in self.y0]
            if [y.shape for y in ys] != [(c,) for c in game.strategy_counts]:
                raise GameError("y0 shapes do not match the game")
        elif self.x0 is not None:
            validate_mixed_profile(game, self.x0)
            ys = []
            for reg, eta, x in zip(regs, etas, self.x0):
                x = np.asarray(x, dtype=np.float64)
                if isinstance(reg, Entropy):
                    ys.append(reg.inverse(x, eta))
                else:
                    # any dual preimage works; x/eta projects back to x
                    ys.append(x / eta)
        else:
            ys = [np.zeros(c) for c in game.strategy_counts]
        return regs, etas, ys


@dataclass
class Trajectory:
    """Recorded run: per-agent arrays of shape (T+1, S_i) for x and y, plus
    the (T, N) realized pure profiles for stochastic runs."""

    xs: list[np.ndarray]
    ys: list[np.ndarray]
    realized: np.ndarray | None
    etas: tuple[float, ...]
    regularizers: tuple[str, ...]
    seed: int | None
    mode: str

    @property
    def num_steps(self) -> int:
        return self.xs[0].shape[0] - 1

    @property
    def num_agents(self) -> int:
        return len(self.xs)

    def profile(self, t: int) -> list[np.ndarray]:
        return [x[t] for x in self.xs]

    def dual(self, t: int) -> list[np.ndarray]:
        return [y[t] for y in self.ys]

    def realized_at(self, t: int) -> tuple[int, ...]:
        if self.realized is None:
            raise GameError("deterministic trajectory has no realized profiles")
        return tuple(int(s) for s in self.realized[t])


def sample_profile(xs, rng) -> tuple[int, ...]:
    """One pure profile by independent inverse-CDF sampling per agent.

    Rounding residue at the top of the cumulative sums falls to the last
    strategy.
    """
    out = []
    for x in xs:
        x = np.asarray(x, dtype=np.float64)
        u = rng.random()
        k = int(np.searchsorted(np.cumsum(x), u, side="right"))
        out.append(min(k, x.size - 1))
    return tuple(out)


def mwu_update(x, v, eta: float) -> np.ndarray:
    """Multiplicative reweighting x * exp(eta v), renormalized.

    Zero weights stay exactly zero, and a unit weight maps to exactly 1.0,
    so simplex vertices are fixed points of the update (0/0 reads as 0).
    """
    x = np.asarray(x, dtype=np.float64)
    w = x * np.exp(eta * np.asarray(v, dtype=np.float64))
    return w / w.sum()


def deterministic_step(game, regs, etas, ys):
    """One simultaneous FTRL step against mixed opponents.

    Returns (ys_next, xs_next); all agents move from the same mirrored
    profile of ``ys``.
    """
    xs = [reg.mirror(y, eta) for reg, eta, y in zip(regs, etas, ys)]
    ys_next = [
        np.asarray(y, dtype=np.float64) + payoff_vector(game, i, xs)
        for i, y in enumerate(ys)
    ]
    xs_next = [reg.mirror(y, eta) for reg, eta, y in zip(regs, etas, ys_next)]
    return ys_next, xs_next


def deterministic_mwu_step(game, xs, etas):
    """Closed-form multiplicative step against mixed opponents."""
    if not is_fully_mixed(xs):
        raise GameError("deterministic MWU needs a fully mixed profile")
    return [
        mwu_update(x, payoff_vector(game, i, xs), eta)
        for i, (x, eta) in enumerate(zip(xs, etas))
    ]


def stochastic_step(game, regs, etas, ys, rng=None, realized=None):
    """One FTRL step against a single realized pure profile.

    The same realization feeds every agent's update.  Pass ``realized`` to
    replay a known profile instead of sampling.
    """
    xs = [reg.mirror(y, eta) for reg, eta, y in zip(regs, etas, ys)]
    if realized is None:
        realized = sample_profile(xs, rng)
    ys_next = [
        np.asarray(y, dtype=np.float64) + payoff_vector(game, i, realized)
        for i, y in enumerate(ys)
    ]
    xs_next = [reg.mirror(y, eta) for reg, eta, y in zip(regs, etas, ys_next)]
    return ys_next, xs_next, realized


def stochastic_mwu_step(game, xs, etas, rng=None, realized=None):
    """Multiplicative step on the profile itself; boundary points allowed."""
    if realized is None:
        realized = sample_profile(xs, rng)
    xs_next = [
        mwu_update(x, payoff_vector(game, i, realized), eta)
        for i, (x, eta) in enumerate(zip(xs, etas))
    ]
    return xs_next, realized


def _softmax_raw(z):
    w = np.exp(z)
    return w / w.sum()


def stochastic_mwu2_step(game, etas, ys, rng=None, realized=None):
    """Direct closed form x = exp(eta y) / sum(exp(eta y)) on the raw dual.

    Kept deliberately without max-subtraction as the literal third
    formulation; suited to moderate horizons where eta * y stays below the
    exp overflow threshold.
    """
    xs = [_softmax_raw(eta * np.asarray(y, dtype=np.float64)) for eta, y in zip(etas, ys)]
    if realized is None:
        realized = sample_profile(xs, rng)
    ys_next = [
        np.asarray(y, dtype=np.float64) + payoff_vector(game, i, realized)
        for i, y in enumerate(ys)
    ]
    xs_next = [_softmax_raw(eta * y) for eta, y in zip(etas, ys_next)]
    return ys_next, xs_next, realized


def run(game: NetworkGame, config: DynamicsConfig, mode: str = "stochastic") -> Trajectory:
    """Execute ``config.horizon`` steps and record the full trajectory.

    Identical game + config + mode reproduces the trajectory bit for bit.
    Rational games are demoted to float for simulation.
    """
    if mode not in ("deterministic", "stochastic"):
        raise GameError(f"unknown mode {mode!r}")
    game = as_float(game)
    regs, etas, ys = config.resolve(game)
    n = game.num_agents
    t_max = config.horizon
    rng = np.random.default_rng(config.seed)

    # per-agent neighbor lists keep the hot loop free of dict scans
    neighbors = [[] for _ in range(n)]
    for (i, j), a in game.payoffs.items():
        neighbors[i].append((j, a))

    xs_hist = [np.empty((t_max + 1, c)) for c in game.strategy_counts]
    ys_hist = [np.empty((t_max + 1, c)) for c in game.strategy_counts]
    realized = np.empty((t_max, n), dtype=np.int64) if mode == "stochastic" else None

    xs = [reg.mirror(y, eta) for reg, eta, y in zip(regs, etas, ys)]
    for i in range(n):
        xs_hist[i][0] = xs[i]
        ys_hist[i][0] = ys[i]

    for t in range(t_max):
        if mode == "stochastic":
            s = sample_profile(xs, rng)
            realized[t] = s
            for i in range(n):
                v = np.zeros(game.strategy_counts[i])
                for j, a in neighbors[i]:
                    v += a[:, s[j]]
                ys[i] = ys[i] + v
        else:
            xs_prev = xs
            for i in range(n):
                v = np.zeros(game.strategy_counts[i])
                for j, a in neighbors[i]:
                    v += a @ xs_prev[j]
                ys[i] = ys[i] + v
        xs = [reg.mirror(y, eta) for reg, eta, y in zip(regs, etas, ys)]
        for i in range(n):
            xs_hist[i][t + 1] = xs[i]
            ys_hist[i][t + 1] = ys[i]

    return Trajectory(
        xs=xs_hist,
        ys=ys_hist,
        realized=realized,
        etas=tuple(etas),
        regularizers=tuple(reg.kind for reg in regs),
        seed=config.seed,
        mode=mode,
    )
