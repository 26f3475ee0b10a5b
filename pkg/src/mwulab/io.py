"""File formats: game JSON, trajectory CSV/JSON, analysis CSVs, state graphs.

Every writer here has a matching loader and the pair round-trips: floats
are emitted with ``repr`` (exact), rationals as "p/q" strings.  A game file
looks like::

    {
      "agents": 2,
      "strategy_counts": [2, 2],
      "edges": [{"i": 0, "j": 1, "matrix": [[1.0, -1.0], [-1.0, 1.0]]}],
      "equilibrium": [["1/2", "1/2"], ["1/2", "1/2"]]
    }

Agent indices are zero-based.  A file is rational iff any matrix entry is a
"p/q" string, in which case every entry must be a string or an integer.
Missing reverse edges are filled in as the negated transpose; files whose
stored pairs break the zero-sum constraint are rejected.
"""

from __future__ import annotations

import csv
import json
from fractions import Fraction
from pathlib import Path

import numpy as np

from .dynamics import Trajectory
from .experiments import RunRow, SummaryRow, SuiteReport
from .games import GameError, NetworkGame, make_game, validate_zero_sum
from .markov import OccupationReport, ReturnTimeReport, StateGraph
from .metrics import RegretSeries


class GameFormatError(GameError):
    """Malformed or inconsistent input file."""


# ---------------------------------------------------------------------------
# game files

def _encode_entry(v):
    if isinstance(v, Fraction):
        return str(v)
    return float(v)


def _matrix_is_rational(rows) -> bool:
    return any(isinstance(v, str) for row in rows for v in row)


def _decode_matrix(rows, rational: bool):
    if rational:
        out = []
        for row in rows:
            decoded = []
            for v in row:
                if isinstance(v, float):
                    raise GameFormatError(
                        f"float entry {v} in a rational game file; use \"p/q\" strings"
                    )
                try:
                    decoded.append(Fraction(v))
                except (ValueError, ZeroDivisionError) as exc:
                    raise GameFormatError(f"bad rational entry {v!r}") from exc
            out.append(decoded)
        return np.asarray(out, dtype=object)
    return np.asarray(rows, dtype=np.float64)


def save_game_file(path, game: NetworkGame, equilibrium=None) -> None:
    payload = {
        "agents": game.num_agents,
        "strategy_counts": list(game.strategy_counts),
        "edges": [
            {"i": i, "j": j, "matrix": [[_encode_entry(v) for v in row] for row in a]}
            for (i, j), a in sorted(game.payoffs.items())
        ],
    }
    if equilibrium is not None:
        payload["equilibrium"] = [
            [_encode_entry(v) for v in np.asarray(x).flat] for x in equilibrium
        ]
    Path(path).write_text(json.dumps(payload, indent=2))


def load_game_file(path):
    """Parse and validate a game file; returns (game, equilibrium or None)."""
    try:
        payload = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise GameFormatError(f"{path}: not valid JSON ({exc})") from exc
    try:
        counts = [int(c) for c in payload["strategy_counts"]]
        edge_specs = payload["edges"]
    except (KeyError, TypeError) as exc:
        raise GameFormatError(f"{path}: missing field {exc}") from exc
    if "agents" in payload and int(payload["agents"]) != len(counts):
        raise GameFormatError(f"{path}: agents field disagrees with strategy_counts")

    rational = any(_matrix_is_rational(e["matrix"]) for e in edge_specs)
    edges = {}
    for e in edge_specs:
        try:
            pair = (int(e["i"]), int(e["j"]))
            matrix = _decode_matrix(e["matrix"], rational)
        except (KeyError, TypeError) as exc:
            raise GameFormatError(f"{path}: malformed edge {e!r}") from exc
        if pair in edges:
            raise GameFormatError(f"{path}: duplicate edge {pair}")
        edges[pair] = matrix

    try:
        game = make_game(counts, edges)
    except GameError as exc:
        raise GameFormatError(f"{path}: {exc}") from exc
    report = validate_zero_sum(game)
    if not report.valid:
        raise GameFormatError(
            f"{path}: zero-sum constraint violated on pairs {report.violations} "
            f"(max deviation {report.max_deviation:g})"
        )

    equilibrium = None
    if "equilibrium" in payload:
        equilibrium = []
        for i, row in enumerate(payload["equilibrium"]):
            if len(row) != counts[i]:
                raise GameFormatError(f"{path}: equilibrium row {i} has wrong length")
            if any(isinstance(v, str) for v in row):
                equilibrium.append(np.asarray([Fraction(v) for v in row], dtype=object))
            else:
                equilibrium.append(np.asarray(row, dtype=np.float64))
    return game, equilibrium


def load_game(path) -> NetworkGame:
    return load_game_file(path)[0]


# ---------------------------------------------------------------------------
# trajectories

def save_trajectory_json(path, trajectory: Trajectory) -> None:
    payload = {
        "mode": trajectory.mode,
        "etas": list(trajectory.etas),
        "regularizers": list(trajectory.regularizers),
        "seed": trajectory.seed,
        "xs": [x.tolist() for x in trajectory.xs],
        "ys": [y.tolist() for y in trajectory.ys],
        "realized": None if trajectory.realized is None else trajectory.realized.tolist(),
    }
    Path(path).write_text(json.dumps(payload))


def load_trajectory_json(path) -> Trajectory:
    payload = json.loads(Path(path).read_text())
    num_agents = len(payload["xs"])
    return Trajectory(
        xs=[np.asarray(x, dtype=np.float64) for x in payload["xs"]],
        ys=[np.asarray(y, dtype=np.float64) for y in payload["ys"]],
        realized=None
        if payload["realized"] is None
        else np.asarray(payload["realized"], dtype=np.int64).reshape(-1, num_agents),
        etas=tuple(payload["etas"]),
        regularizers=tuple(payload["regularizers"]),
        seed=payload["seed"],
        mode=payload["mode"],
    )


def _meta_line(pairs) -> str:
    return "# " + " ".join(f"{k}={v}" for k, v in pairs)


def _parse_meta(line: str) -> dict:
    meta = {}
    for token in line.lstrip("# ").split():
        k, _, v = token.partition("=")
        meta[k] = v
    return meta


def save_trajectory_csv(path, trajectory: Trajectory) -> None:
    """Long-format CSV: one row per (t, agent, strategy).

    The realized column repeats the agent's sampled action at step t and is
    empty on the final state and in deterministic runs.
    """
    with open(path, "w", newline="") as fh:
        fh.write(
            _meta_line(
                [
                    ("mode", trajectory.mode),
                    ("seed", trajectory.seed),
                    ("etas", ",".join(repr(e) for e in trajectory.etas)),
                    ("regularizers", ",".join(trajectory.regularizers)),
                ]
            )
            + "\n"
        )
        writer = csv.writer(fh)
        writer.writerow(["t", "agent", "strategy", "x", "y", "realized"])
        for t in range(trajectory.num_steps + 1):
            for i in range(trajectory.num_agents):
                realized = ""
                if trajectory.realized is not None and t < trajectory.num_steps:
                    realized = int(trajectory.realized[t, i])
                for s in range(trajectory.xs[i].shape[1]):
                    writer.writerow(
                        [t, i, s, repr(float(trajectory.xs[i][t, s])),
                         repr(float(trajectory.ys[i][t, s])), realized]
                    )


def load_trajectory_csv(path) -> Trajectory:
    with open(path, newline="") as fh:
        first = fh.readline()
        meta = _parse_meta(first) if first.startswith("#") else {}
        if not first.startswith("#"):
            fh.seek(0)
        rows = list(csv.DictReader(fh))
    if not rows:
        raise GameFormatError(f"{path}: empty trajectory file")
    num_agents = max(int(r["agent"]) for r in rows) + 1
    num_records = max(int(r["t"]) for r in rows) + 1
    sizes = [0] * num_agents
    for r in rows:
        sizes[int(r["agent"])] = max(sizes[int(r["agent"])], int(r["strategy"]) + 1)
    xs = [np.empty((num_records, s)) for s in sizes]
    ys = [np.empty((num_records, s)) for s in sizes]
    mode = meta.get("mode", "stochastic")
    realized = None
    if mode == "stochastic":
        realized = np.zeros((num_records - 1, num_agents), dtype=np.int64)
    for r in rows:
        t, i, s = int(r["t"]), int(r["agent"]), int(r["strategy"])
        xs[i][t, s] = float(r["x"])
        ys[i][t, s] = float(r["y"])
        if realized is not None and r["realized"] != "" and t < num_records - 1:
            realized[t, i] = int(r["realized"])
    seed = meta.get("seed", "None")
    etas = meta.get("etas", "")
    regs = meta.get("regularizers", "")
    return Trajectory(
        xs=xs,
        ys=ys,
        realized=realized,
        etas=tuple(float(e) for e in etas.split(",")) if etas else (0.1,) * num_agents,
        regularizers=tuple(regs.split(",")) if regs else ("entropy",) * num_agents,
        seed=None if seed == "None" else int(seed),
        mode=mode,
    )


# ---------------------------------------------------------------------------
# analysis series

def save_divergence_csv(path, series) -> None:
    n = series["kl_agents"].shape[1]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["t", "kl", "fenchel"]
            + [f"kl_{i}" for i in range(n)]
            + [f"fenchel_{i}" for i in range(n)]
        )
        for k, t in enumerate(series["t"]):
            writer.writerow(
                [int(t), repr(float(series["kl"][k])), repr(float(series["fenchel"][k]))]
                + [repr(float(v)) for v in series["kl_agents"][k]]
                + [repr(float(v)) for v in series["fenchel_agents"][k]]
            )


def load_divergence_csv(path):
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    n = sum(1 for k in rows[0] if k.startswith("kl_"))
    return {
        "t": np.asarray([int(r["t"]) for r in rows]),
        "kl": np.asarray([float(r["kl"]) for r in rows]),
        "fenchel": np.asarray([float(r["fenchel"]) for r in rows]),
        "kl_agents": np.asarray([[float(r[f"kl_{i}"]) for i in range(n)] for r in rows]),
        "fenchel_agents": np.asarray(
            [[float(r[f"fenchel_{i}"]) for i in range(n)] for r in rows]
        ),
    }


def save_distance_csv(path, distances) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t", "distance"])
        for t, d in enumerate(np.asarray(distances)):
            writer.writerow([t, repr(float(d))])


def load_distance_csv(path) -> np.ndarray:
    with open(path, newline="") as fh:
        return np.asarray([float(r["distance"]) for r in csv.DictReader(fh)])


def save_regret_csv(path, series: RegretSeries) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(_meta_line([("agent", series.agent), ("benchmark", series.benchmark)]) + "\n")
        writer = csv.writer(fh)
        writer.writerow(["t", "regret", "running_max"])
        for t, r, rm in zip(series.t, series.regret, series.running_max):
            writer.writerow([int(t), repr(float(r)), repr(float(rm))])


def load_regret_csv(path) -> RegretSeries:
    with open(path, newline="") as fh:
        first = fh.readline()
        meta = _parse_meta(first) if first.startswith("#") else {}
        if not first.startswith("#"):
            fh.seek(0)
        rows = list(csv.DictReader(fh))
    return RegretSeries(
        t=np.asarray([int(r["t"]) for r in rows]),
        regret=np.asarray([float(r["regret"]) for r in rows]),
        running_max=np.asarray([float(r["running_max"]) for r in rows]),
        agent=int(meta.get("agent", 0)),
        benchmark=meta.get("benchmark", "realized"),
    )


def save_heatmap_csv(path, grid) -> None:
    np.savetxt(path, np.asarray(grid, dtype=np.int64), fmt="%d", delimiter=",")


def load_heatmap_csv(path) -> np.ndarray:
    return np.loadtxt(path, dtype=np.int64, delimiter=",", ndmin=2)


def save_occupation_csv(path, report: OccupationReport) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(
            _meta_line([("overall", repr(report.fraction)), ("window", report.window)]) + "\n"
        )
        writer = csv.writer(fh)
        writer.writerow(["window_start", "fraction"])
        for s, f in zip(report.window_starts, report.window_fractions):
            writer.writerow([int(s), repr(float(f))])


def load_occupation_csv(path) -> OccupationReport:
    with open(path, newline="") as fh:
        meta = _parse_meta(fh.readline())
        rows = list(csv.DictReader(fh))
    return OccupationReport(
        fraction=float(meta["overall"]),
        window=int(meta["window"]),
        window_starts=np.asarray([int(r["window_start"]) for r in rows]),
        window_fractions=np.asarray([float(r["fraction"]) for r in rows]),
    )


def save_return_times_csv(path, report: ReturnTimeReport) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["duration", "censored"])
        for d in report.samples:
            writer.writerow([int(d), 0])
        for d in report.censored:
            writer.writerow([int(d), 1])


def load_return_times_csv(path) -> ReturnTimeReport:
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    samples = [int(r["duration"]) for r in rows if r["censored"] == "0"]
    censored = [int(r["duration"]) for r in rows if r["censored"] != "0"]
    return ReturnTimeReport(samples, censored)


# ---------------------------------------------------------------------------
# experiment reports

def save_suite_csvs(out_dir, report: SuiteReport) -> tuple[Path, Path]:
    out_dir = Path(out_dir)
    runs_path = out_dir / "runs.csv"
    summary_path = out_dir / "summary.csv"
    with open(runs_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["n", "seed", "alpha", "beta", "r_squared"])
        for r in report.rows:
            writer.writerow(
                [r.n, r.seed, repr(r.alpha), repr(r.beta), repr(r.r_squared)]
            )
    with open(summary_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["n", "alpha_min", "alpha_max", "r2_min", "r2_max"])
        for s in report.summary:
            writer.writerow(
                [s.n, repr(s.alpha_min), repr(s.alpha_max), repr(s.r2_min), repr(s.r2_max)]
            )
    return runs_path, summary_path


def load_runs_csv(path) -> list[RunRow]:
    with open(path, newline="") as fh:
        return [
            RunRow(
                n=int(r["n"]),
                seed=int(r["seed"]),
                alpha=float(r["alpha"]),
                beta=float(r["beta"]),
                r_squared=float(r["r_squared"]),
            )
            for r in csv.DictReader(fh)
        ]


def load_summary_csv(path) -> list[SummaryRow]:
    with open(path, newline="") as fh:
        return [
            SummaryRow(
                n=int(r["n"]),
                alpha_min=float(r["alpha_min"]),
                alpha_max=float(r["alpha_max"]),
                r2_min=float(r["r2_min"]),
                r2_max=float(r["r2_max"]),
            )
            for r in csv.DictReader(fh)
        ]


# ---------------------------------------------------------------------------
# state graphs

def _encode_state(state) -> list:
    return [[str(v) for v in y] for y in state]


def _decode_state(encoded) -> tuple:
    return tuple(tuple(Fraction(v) for v in y) for y in encoded)


def save_state_graph_json(path, graph: StateGraph) -> None:
    states = graph.states
    index = {s: k for k, s in enumerate(states)}
    payload = {
        "states": [_encode_state(s) for s in states],
        "origin": index[graph.origin],
        "layers": [[index[s] for s in layer] for layer in graph.layers],
        "edges": [
            [index[a], list(profile), index[b]]
            for a, profile, b in graph.edges
            if b in index
        ],
        "predecessors": {
            str(index[s]): [index[p], list(profile)]
            for s, (p, profile) in graph.predecessor.items()
        },
        "truncated": graph.truncated,
    }
    Path(path).write_text(json.dumps(payload))


def load_state_graph_json(path) -> StateGraph:
    payload = json.loads(Path(path).read_text())
    states = [_decode_state(s) for s in payload["states"]]
    layers = [[states[k] for k in layer] for layer in payload["layers"]]
    first_reach = {}
    for t, layer in enumerate(layers):
        for s in layer:
            first_reach[s] = t
    return StateGraph(
        origin=states[payload["origin"]],
        layers=layers,
        edges=[
            (states[a], tuple(profile), states[b])
            for a, profile, b in payload["edges"]
        ],
        first_reach=first_reach,
        predecessor={
            states[int(k)]: (states[p], tuple(profile))
            for k, (p, profile) in payload["predecessors"].items()
        },
        truncated=payload["truncated"],
    )
