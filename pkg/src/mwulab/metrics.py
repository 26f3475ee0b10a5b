"""Trajectory analytics: time averages, distance to vertices, regret,
power-law regression, occupancy histograms.

Regret is reconstructed from the recorded dual vectors: successive
differences of y are exactly the per-step payoff vectors the agent faced,
so no game object is needed here.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .games import GameError


class InsufficientDataError(ValueError):
    """Not enough usable points for a fit."""


def time_average(trajectory) -> list[np.ndarray]:
    """Running mean of the mixed strategies over steps 1..T, per agent.

    Row T-1 of each returned array is the time average after T steps; every
    row is itself a probability vector.
    """
    if trajectory.num_steps < 1:
        raise GameError("time_average needs a trajectory with at least one step")
    out = []
    steps = np.arange(1, trajectory.num_steps + 1)[:, None]
    for x in trajectory.xs:
        out.append(np.cumsum(x[1:], axis=0) / steps)
    return out


def distance_to_closest_pure(profile) -> float:
    """Combined Euclidean distance to the per-agent nearest vertex.

    The nearest vertex maximizes the coordinate (ties to the lowest
    strategy index); distances are combined over agents in the 2-norm.
    """
    total = 0.0
    for x in profile:
        x = np.asarray(x, dtype=np.float64)
        k = int(np.argmax(x))
        e = np.zeros_like(x)
        e[k] = 1.0
        total += float(((x - e) ** 2).sum())
    return float(np.sqrt(total))


def distance_series(trajectory) -> np.ndarray:
    """distance_to_closest_pure at every recorded step, vectorized."""
    sq = np.zeros(trajectory.num_steps + 1)
    for x in trajectory.xs:
        k = np.argmax(x, axis=1)
        picked = x[np.arange(x.shape[0]), k]
        sq += (x**2).sum(axis=1) - 2.0 * picked + 1.0
    return np.sqrt(np.maximum(sq, 0.0))


@dataclass
class RegretSeries:
    """External regret of one agent: R(t) for t = 1..T and its running max."""

    t: np.ndarray
    regret: np.ndarray
    running_max: np.ndarray = None
    agent: int = 0
    benchmark: str = "realized"

    def __post_init__(self):
        self.t = np.asarray(self.t)
        self.regret = np.asarray(self.regret, dtype=np.float64)
        if self.running_max is None:
            self.running_max = np.maximum.accumulate(self.regret)
        else:
            self.running_max = np.asarray(self.running_max, dtype=np.float64)


def external_regret(trajectory, agent: int) -> RegretSeries:
    """Best fixed action in hindsight minus the mixtures actually played.

    The benchmark accumulates the payoff vectors the agent observed
    (against realized opponent actions for stochastic runs; against mixed
    profiles for deterministic ones, flagged via ``benchmark``).
    """
    ys = trajectory.ys[agent]
    if ys.shape[0] < 2:
        raise GameError("external_regret needs at least one step")
    v = np.diff(ys, axis=0)  # (T, S): payoff vector faced at each step
    x = trajectory.xs[agent][:-1]
    mixture = np.cumsum((x * v).sum(axis=1))
    best_fixed = np.cumsum(v, axis=0).max(axis=1)
    regret = best_fixed - mixture
    return RegretSeries(
        t=np.arange(1, ys.shape[0]),
        regret=regret,
        agent=agent,
        benchmark="realized" if trajectory.realized is not None else "expected",
    )


@dataclass(frozen=True)
class RegressionFit:
    alpha: float
    beta: float
    r_squared: float
    points_used: int


def estimate_alpha(series: RegretSeries, burn_in: int = 10) -> RegressionFit:
    """OLS fit of log running-max regret against log t.

    Uses only points with t > burn_in and positive running max (the log is
    undefined elsewhere).  Recovers (alpha, beta) exactly on noiseless
    beta * t^alpha input.
    """
    mask = (series.t > burn_in) & (series.running_max > 0.0)
    if int(mask.sum()) < 2:
        raise InsufficientDataError(
            f"only {int(mask.sum())} usable points after burn-in {burn_in}"
        )
    lt = np.log(series.t[mask].astype(np.float64))
    lr = np.log(series.running_max[mask])
    alpha, intercept = np.polyfit(lt, lr, 1)
    residuals = lr - (alpha * lt + intercept)
    ss_res = float((residuals**2).sum())
    ss_tot = float(((lr - lr.mean()) ** 2).sum())
    if ss_tot > 0.0:
        r2 = 1.0 - ss_res / ss_tot
    else:
        r2 = 1.0 if ss_res < 1e-24 else 0.0
    return RegressionFit(
        alpha=float(alpha),
        beta=float(np.exp(intercept)),
        r_squared=float(min(max(r2, 0.0), 1.0)),
        points_used=int(mask.sum()),
    )


def occupancy_heatmap(trajectory, agents=(0, 1), coords=(0, 0), bins: int = 50) -> np.ndarray:
    """Visit counts over a bins x bins grid on [0,1]^2.

    Cell (r, c) counts iterates whose first selected agent's coordinate
    falls in row-bin r and the second agent's in column-bin c; counts sum
    to the number of recorded iterates.
    """
    i, j = agents
    ci, cj = coords
    if trajectory.xs[i].shape[1] < 2 or trajectory.xs[j].shape[1] < 2:
        raise GameError("heatmap agents need at least 2 strategies")
    h, _, _ = np.histogram2d(
        trajectory.xs[i][:, ci],
        trajectory.xs[j][:, cj],
        bins=bins,
        range=[[0.0, 1.0], [0.0, 1.0]],
    )
    return h.astype(np.int64)
