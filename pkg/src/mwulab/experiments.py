"""Seeded regret-growth experiment suite over random zero-sum games.

For each requested strategy count the suite generates fresh random games,
runs the stochastic multiplicative-weights dynamic for the full horizon,
fits the regret-growth exponent on the log-log scale, and reports per-run
rows plus per-size min/max bands.  Run seeds derive deterministically from
the base seed, so repetitions are independent and the whole report is
reproducible (and safe to parallelize externally if wanted).
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .dynamics import DynamicsConfig, run
from .games import GameError, random_zero_sum
from .metrics import estimate_alpha, external_regret


@dataclass
class ExperimentSpec:
    strategy_counts: list[int]
    repetitions: int = 30
    horizon: int = 20_000
    eta: float = 0.1
    seed: int = 0
    burn_in: int = 10

    def __post_init__(self):
        if self.repetitions < 1 or self.horizon < 1:
            raise GameError("repetitions and horizon must be positive")
        if self.eta <= 0:
            raise GameError("eta must be positive")


@dataclass(frozen=True)
class RunRow:
    n: int
    seed: int
    alpha: float
    beta: float
    r_squared: float


@dataclass(frozen=True)
class SummaryRow:
    n: int
    alpha_min: float
    alpha_max: float
    r2_min: float
    r2_max: float


@dataclass
class SuiteReport:
    rows: list[RunRow] = field(default_factory=list)
    summary: list[SummaryRow] = field(default_factory=list)


def run_single(n: int, seed: int, horizon: int, eta: float, burn_in: int = 10) -> RunRow:
    """One generate-simulate-fit pass; agent 0's regret is the target."""
    game = random_zero_sum(n, seed=seed)
    config = DynamicsConfig(horizon=horizon, etas=eta, regularizer="entropy", seed=seed)
    trajectory = run(game, config, mode="stochastic")
    fit = estimate_alpha(external_regret(trajectory, agent=0), burn_in=burn_in)
    return RunRow(n=n, seed=seed, alpha=fit.alpha, beta=fit.beta, r_squared=fit.r_squared)


def run_experiment_suite(spec: ExperimentSpec) -> SuiteReport:
    report = SuiteReport()
    run_index = 0
    for n in spec.strategy_counts:
        block = []
        for _ in range(spec.repetitions):
            row = run_single(
                n, spec.seed + run_index, spec.horizon, spec.eta, spec.burn_in
            )
            block.append(row)
            report.rows.append(row)
            run_index += 1
        report.summary.append(
            SummaryRow(
                n=n,
                alpha_min=min(r.alpha for r in block),
                alpha_max=max(r.alpha for r in block),
                r2_min=min(r.r_squared for r in block),
                r2_max=max(r.r_squared for r in block),
            )
        )
    return report
