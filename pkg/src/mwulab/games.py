"""Network zero-sum games: representation, payoff algebra, and Nash checks.

A network game couples agents pairwise through payoff matrices ``A[(i, j)]``
of shape ``(S_i, S_j)``; the zero-sum constraint is ``A[(i, j)] == -A[(j, i)].T``
for every stored pair.  Games come in two numeric backends:

* float64 arrays for simulation, and
* object arrays of :class:`fractions.Fraction` for the exact Markov-chain
  machinery and exact equilibrium solving.

Rational games may be demoted to float (:func:`as_float`); float games are
never silently promoted.  Building a nearby rational game from a float one
requires an explicit denominator (:func:`rationalize_game`).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

ZERO_SUM_TOL = 1e-12


class GameError(ValueError):
    """Structurally invalid game, profile, or unsupported operation."""


def _is_rational_matrix(a: np.ndarray) -> bool:
    return a.dtype == object and all(isinstance(v, Fraction) for v in a.flat)


def _coerce_matrix(m) -> np.ndarray:
    a = np.asarray(m)
    if a.dtype != object:
        return a.astype(np.float64)
    out = np.empty(a.shape, dtype=object)
    for idx, v in np.ndenumerate(a):
        if isinstance(v, float):
            raise GameError(
                "float entries in a rational matrix; rationalize explicitly"
            )
        out[idx] = Fraction(v)
    return out


@dataclass(frozen=True)
class NetworkGame:
    """Pairwise-coupled game over ``len(strategy_counts)`` agents.

    ``payoffs`` maps ordered agent pairs ``(i, j)`` to the matrix paying
    agent ``i`` against agent ``j`` (rows: i's strategies).  Absent pairs
    act as all-zero matrices.  Instances are treated as immutable.
    """

    strategy_counts: tuple[int, ...]
    payoffs: dict[tuple[int, int], np.ndarray]

    def __post_init__(self):
        counts = tuple(int(c) for c in self.strategy_counts)
        object.__setattr__(self, "strategy_counts", counts)
        if not counts or any(c < 1 for c in counts):
            raise GameError(f"strategy counts must be positive, got {counts}")
        coerced = {}
        rational_flags = set()
        for pair, m in self.payoffs.items():
            i, j = pair
            if i == j:
                raise GameError(f"self-edge ({i}, {j}) is not allowed")
            if not (0 <= i < len(counts)) or not (0 <= j < len(counts)):
                raise GameError(f"edge ({i}, {j}) references a missing agent")
            a = _coerce_matrix(m)
            if a.shape != (counts[i], counts[j]):
                raise GameError(
                    f"edge ({i}, {j}) has shape {a.shape}, "
                    f"expected {(counts[i], counts[j])}"
                )
            coerced[(int(i), int(j))] = a
            rational_flags.add(a.dtype == object)
        if len(rational_flags) > 1:
            raise GameError("cannot mix float and rational payoff matrices")
        object.__setattr__(self, "payoffs", coerced)

    @property
    def num_agents(self) -> int:
        return len(self.strategy_counts)

    @property
    def is_rational(self) -> bool:
        return any(a.dtype == object for a in self.payoffs.values())

    def matrix(self, i: int, j: int) -> np.ndarray:
        """Stored payoff matrix for the ordered pair, or zeros if absent."""
        if (i, j) in self.payoffs:
            return self.payoffs[(i, j)]
        shape = (self.strategy_counts[i], self.strategy_counts[j])
        if self.is_rational:
            return np.full(shape, Fraction(0), dtype=object)
        return np.zeros(shape)


def make_game(strategy_counts, edges) -> NetworkGame:
    """Build a game from one-directional edges, filling reverses as -A.T."""
    payoffs = {}
    for (i, j), m in edges.items():
        payoffs[(i, j)] = _coerce_matrix(m)
    for (i, j), a in list(payoffs.items()):
        if (j, i) not in payoffs:
            payoffs[(j, i)] = -a.T
    return NetworkGame(tuple(strategy_counts), payoffs)


def matching_pennies(rational: bool = False) -> NetworkGame:
    entry = Fraction if rational else float
    a = [[entry(1), entry(-1)], [entry(-1), entry(1)]]
    return make_game((2, 2), {(0, 1): a})


def rock_paper_scissors(rational: bool = False) -> NetworkGame:
    entry = Fraction if rational else float
    a = [
        [entry(0), entry(-1), entry(1)],
        [entry(1), entry(0), entry(-1)],
        [entry(-1), entry(1), entry(0)],
    ]
    return make_game((3, 3), {(0, 1): a})


# ---------------------------------------------------------------------------
# profiles

def is_pure_profile(profile) -> bool:
    """True for a per-agent sequence of strategy indices."""
    return all(isinstance(s, (int, np.integer)) for s in profile)


def pure_to_mixed(game: NetworkGame, profile) -> list[np.ndarray]:
    """Embed a pure profile as one-hot probability vectors."""
    xs = []
    for i, s in enumerate(profile):
        if not (0 <= s < game.strategy_counts[i]):
            raise GameError(f"agent {i} strategy {s} out of range")
        v = np.zeros(game.strategy_counts[i])
        v[s] = 1.0
        xs.append(v)
    return xs


def uniform_profile(game: NetworkGame) -> list[np.ndarray]:
    return [np.full(c, 1.0 / c) for c in game.strategy_counts]


def validate_mixed_profile(game: NetworkGame, xs, tol: float = 1e-12) -> None:
    """Raise GameError unless xs is a per-agent probability profile."""
    if len(xs) != game.num_agents:
        raise GameError(f"profile has {len(xs)} agents, game has {game.num_agents}")
    for i, x in enumerate(xs):
        x = np.asarray(x)
        if x.shape != (game.strategy_counts[i],):
            raise GameError(f"agent {i} vector has shape {x.shape}")
        if any(v < -tol for v in x.flat):
            raise GameError(f"agent {i} has a negative probability")
        if abs(float(sum(x.flat)) - 1.0) > tol:
            raise GameError(f"agent {i} probabilities sum to {sum(x.flat)}")


def is_fully_mixed(xs) -> bool:
    return all(all(v > 0 for v in np.asarray(x).flat) for x in xs)


def _is_rational_profile(xs) -> bool:
    return all(
        np.asarray(x).dtype == object
        and all(isinstance(v, Fraction) for v in np.asarray(x).flat)
        for x in xs
    )


# ---------------------------------------------------------------------------
# validation and payoff algebra

@dataclass(frozen=True)
class ZeroSumReport:
    valid: bool
    violations: list[tuple[int, int]]
    max_deviation: float


def validate_zero_sum(game: NetworkGame, tol: float = ZERO_SUM_TOL) -> ZeroSumReport:
    """Check A[(i,j)] == -A[(j,i)].T for every stored pair.

    Rational games are checked exactly; float games within ``tol``.  A pair
    stored in one direction only is compared against the implied zero
    matrix of the absent reverse edge.
    """
    violations = []
    max_dev = 0.0
    seen = set()
    for (i, j) in game.payoffs:
        key = (min(i, j), max(i, j))
        if key in seen:
            continue
        seen.add(key)
        a = game.matrix(key[0], key[1])
        b = game.matrix(key[1], key[0])
        dev = a + b.T
        worst = max((abs(float(v)) for v in dev.flat), default=0.0)
        limit = 0.0 if game.is_rational else tol
        if worst > limit:
            violations.append(key)
            max_dev = max(max_dev, worst)
    return ZeroSumReport(not violations, violations, max_dev)


def payoff_vector(game: NetworkGame, agent: int, opponents) -> np.ndarray:
    """Per-strategy payoff for ``agent``: sum over j of A[(agent, j)] acting
    on opponent j's mixed vector (or pure basis vector).

    Exact (Fraction) output when both the game and the opponents are
    rational; float64 otherwise.
    """
    n_i = game.strategy_counts[agent]
    pure = is_pure_profile(opponents)
    exact = game.is_rational and (pure or _is_rational_profile(opponents))
    if exact:
        total = np.full(n_i, Fraction(0), dtype=object)
    else:
        total = np.zeros(n_i)
    for (i, j), a in game.payoffs.items():
        if i != agent:
            continue
        if not exact and a.dtype == object:
            a = a.astype(np.float64)
        if pure:
            total = total + a[:, int(opponents[j])]
        else:
            xj = np.asarray(opponents[j])
            if not exact:
                xj = xj.astype(np.float64)
            total = total + a @ xj
    return total


def expected_payoff(game: NetworkGame, agent: int, profile):
    """Inner product of the agent's mixed vector with its payoff vector."""
    v = payoff_vector(game, agent, profile)
    x = np.asarray(profile[agent])
    if v.dtype == object and x.dtype == object:
        return sum(x * v, Fraction(0))
    return float(np.asarray(x, dtype=np.float64) @ np.asarray(v, dtype=np.float64))


@dataclass(frozen=True)
class NashReport:
    is_nash: bool
    max_violation: float
    agent: int | None
    strategy: int | None


def verify_nash(game: NetworkGame, candidate, tol: float = 1e-9) -> NashReport:
    """Check that no agent gains more than ``tol`` by a pure deviation."""
    validate_mixed_profile(game, candidate, tol=max(tol, 1e-9))
    worst = -np.inf
    arg = (None, None)
    for i in range(game.num_agents):
        v = np.asarray(payoff_vector(game, i, candidate), dtype=np.float64)
        base = float(np.asarray(candidate[i], dtype=np.float64) @ v)
        s = int(np.argmax(v))
        gain = v[s] - base
        if gain > worst:
            worst = gain
            arg = (i, s)
    return NashReport(bool(worst <= tol), float(worst), arg[0], arg[1])


def normalize_nash_value(game: NetworkGame, equilibrium, tol: float = 1e-9) -> NetworkGame:
    """Shift payoff matrices by constants so every agent's value at the
    equilibrium is zero.

    For each agent i < N-1 the pair (i, N-1) absorbs the shift: A[(i, N-1)]
    gains a constant c and A[(N-1, i)] loses it, preserving the zero-sum
    structure.  The last agent's value is then zero automatically.  Constant
    shifts leave best responses (and hence the equilibrium set) unchanged.
    """
    report = verify_nash(game, equilibrium, tol=tol)
    if not report.is_nash:
        raise GameError(
            f"candidate is not a Nash equilibrium (violation {report.max_violation:g})"
        )
    n = game.num_agents
    payoffs = dict(game.payoffs)
    last = n - 1
    for i in range(n - 1):
        current = _expected_with(payoffs, game, i, equilibrium)
        c = -current
        if c == 0:
            continue
        si, sj = game.strategy_counts[i], game.strategy_counts[last]
        fwd = payoffs.get((i, last))
        if fwd is None:
            if game.is_rational:
                fwd = np.full((si, sj), Fraction(0), dtype=object)
            else:
                fwd = np.zeros((si, sj))
        payoffs[(i, last)] = fwd + c
        payoffs[(last, i)] = -(fwd + c).T
    return NetworkGame(game.strategy_counts, payoffs)


def _expected_with(payoffs, game, agent, profile):
    tmp = NetworkGame(game.strategy_counts, dict(payoffs))
    return expected_payoff(tmp, agent, profile)


def random_zero_sum(n: int, seed: int, dist=None) -> NetworkGame:
    """2-agent zero-sum game with n strategies per agent and i.i.d. entries.

    ``dist(rng, size)`` defaults to uniform on [-1, 1].  Entries are
    resampled until all n*n are distinct, so every face of the strategy
    space induces a non-trivial game.  The same seed yields the same game.
    """
    if n < 2:
        raise GameError("need at least 2 strategies per agent")
    rng = np.random.default_rng(seed)
    if dist is None:
        dist = lambda r, size: r.uniform(-1.0, 1.0, size)
    while True:
        a = np.asarray(dist(rng, (n, n)), dtype=np.float64)
        if np.unique(a).size == n * n:
            break
    return make_game((n, n), {(0, 1): a})


def is_trivial(game: NetworkGame) -> bool:
    """True iff every agent's payoff vector is the same for all opponent
    pure profiles, i.e. every stored matrix has identical columns."""
    for a in game.payoffs.values():
        first = a[:, 0]
        for k in range(1, a.shape[1]):
            if not np.array_equal(a[:, k], first):
                return False
    return True


# ---------------------------------------------------------------------------
# backend conversions

def as_float(game: NetworkGame) -> NetworkGame:
    """Float64 copy of a game (exactness is lost; the reverse is forbidden)."""
    if not game.is_rational:
        return game
    payoffs = {p: a.astype(np.float64) for p, a in game.payoffs.items()}
    return NetworkGame(game.strategy_counts, payoffs)


def rationalize_game(game: NetworkGame, denominator: int) -> NetworkGame:
    """Nearest rational game with all entries on the grid 1/denominator.

    This constructs a *new* game (entries are rounded); it is the only
    supported route from a float game into the exact machinery.
    """
    if game.is_rational:
        return game
    if denominator < 1:
        raise GameError("denominator must be a positive integer")
    payoffs = {}
    for pair, a in game.payoffs.items():
        payoffs[pair] = np.asarray(
            [[Fraction(round(float(v) * denominator), denominator) for v in row] for row in a],
            dtype=object,
        )
    return NetworkGame(game.strategy_counts, payoffs)
