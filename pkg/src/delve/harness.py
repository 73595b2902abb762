"""Seeded batch experiments, metric aggregation, and parameter grids.

Seed scheme: a run's map seed and reveal seed derive from (base_seed,
run_index) only, never from the agent or parameter cell.  Run 17 is the
same dungeon with the same latent search luck for every agent and every
parameter combination, which makes pointwise comparisons (oracle vs
greedy vs occupancy-map, or sweep point vs sweep point) exact paired
experiments instead of noisy ones.

CSV rows use the fixed episode schema

    cell_id,run_id,seed,agent,total_rooms,rooms_visited,actions,exhaustive,
    secret_spots_total,secret_spots_found,secret_rooms_total,
    secret_rooms_found,<param columns...>

and grid-search summaries carry one row per parameter combination.
"""

from __future__ import annotations

import csv
import io
import itertools
import statistics
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields, replace

from .engine import SimConfig
from .episode import EpisodeResult
from .greedy import explore_greedy, explore_greedy_secret
from .level import LevelMap
from .mapgen import GenConfig, generate_cached
from .occmap import ExplorationParams, explore
from .oracle import optimal_actions
from .rng import STREAM_MAP, STREAM_REVEAL, derive_seed

EPISODE_COLUMNS = [
    "cell_id", "run_id", "seed", "agent", "total_rooms", "rooms_visited",
    "actions", "exhaustive", "secret_spots_total", "secret_spots_found",
    "secret_rooms_total", "secret_rooms_found",
]


@dataclass(frozen=True)
class AgentConfig:
    """An agent plus everything needed to rerun it."""

    name: str  # greedy | greedy-secret | occmap | oracle
    params: ExplorationParams = field(default_factory=ExplorationParams)
    searches_per_wall: int = 10
    p_reveal: float = 1 / 3

    def param_columns(self) -> dict[str, object]:
        if self.name == "occmap":
            out = {f.name: getattr(self.params, f.name) for f in fields(ExplorationParams)}
            out["p_reveal"] = self.p_reveal
            return out
        if self.name == "greedy-secret":
            return {"searches_per_wall": self.searches_per_wall, "p_reveal": self.p_reveal}
        return {}


@dataclass
class RunSummary:
    n_runs: int
    mean_actions: float
    std_actions: float
    mean_rooms_pct: float
    exhaustive_pct: float
    mean_secret_spots_pct: float
    mean_secret_rooms_pct: float


def run_episode(agent: AgentConfig, gen: GenConfig, base_seed: int,
                run_index: int) -> tuple[EpisodeResult, LevelMap]:
    """Generate the run's map and run one agent on it."""
    map_seed = derive_seed(base_seed, 0, run_index, STREAM_MAP)
    reveal_seed = derive_seed(base_seed, 0, run_index, STREAM_REVEAL)
    level = generate_cached(replace(gen, seed=map_seed))
    sim = SimConfig(p_reveal=agent.p_reveal, reveal_seed=reveal_seed)
    if agent.name == "greedy":
        result = explore_greedy(level)
    elif agent.name == "greedy-secret":
        result = explore_greedy_secret(level, agent.searches_per_wall, sim)
    elif agent.name == "occmap":
        result = explore(level, agent.params, sim)
    elif agent.name == "oracle":
        cost = optimal_actions(level)
        result = EpisodeResult(
            actions=cost, rooms_visited=len(level.rooms), total_rooms=len(level.rooms),
            secret_spots_found=0, total_secret_spots=len(level.hidden_positions),
            secret_rooms_found=len(level.secret_room_indices()),
            total_secret_rooms=len(level.secret_room_indices()),
            exhaustive=True, coverage=1.0,
        )
    else:
        raise ValueError(f"unknown agent {agent.name!r}")
    return result, level


def _episode_row(agent: AgentConfig, gen: GenConfig, base_seed: int,
                 cell_id: int, run_index: int) -> dict:
    result, _level = run_episode(agent, gen, base_seed, run_index)
    row = {
        "cell_id": cell_id,
        "run_id": run_index,
        "seed": derive_seed(base_seed, 0, run_index, STREAM_MAP),
        "agent": agent.name,
        "total_rooms": result.total_rooms,
        "rooms_visited": result.rooms_visited,
        "actions": result.actions,
        "exhaustive": int(result.exhaustive),
        "secret_spots_total": result.total_secret_spots,
        "secret_spots_found": result.secret_spots_found,
        "secret_rooms_total": result.total_secret_rooms,
        "secret_rooms_found": result.secret_rooms_found,
    }
    row.update(agent.param_columns())
    return row


def _episode_row_star(args):
    return _episode_row(*args)


def run_batch(agent: AgentConfig, gen: GenConfig, n: int, base_seed: int,
              cell_id: int = 0, workers: int = 1) -> tuple[RunSummary, list[dict]]:
    """n seeded episodes; summary plus one CSV row per episode."""
    if n < 1:
        raise ValueError("need at least one run")
    jobs = [(agent, gen, base_seed, cell_id, run) for run in range(n)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_episode_row_star, jobs, chunksize=8))
    else:
        rows = [_episode_row(*job) for job in jobs]
    rows.sort(key=lambda r: (r["cell_id"], r["run_id"]))
    return summarize(rows), rows


def summarize(rows: list[dict]) -> RunSummary:
    actions = [r["actions"] for r in rows]
    rooms_pct = [100.0 * r["rooms_visited"] / r["total_rooms"] for r in rows]
    spots_pct = [
        100.0 * r["secret_spots_found"] / r["secret_spots_total"]
        if r["secret_spots_total"] else 100.0
        for r in rows
    ]
    secret_rooms_pct = [
        100.0 * r["secret_rooms_found"] / r["secret_rooms_total"]
        if r["secret_rooms_total"] else 100.0
        for r in rows
    ]
    return RunSummary(
        n_runs=len(rows),
        mean_actions=statistics.fmean(actions),
        std_actions=statistics.pstdev(actions) if len(actions) > 1 else 0.0,
        mean_rooms_pct=statistics.fmean(rooms_pct),
        exhaustive_pct=100.0 * sum(
            1 for r in rows if r["rooms_visited"] == r["total_rooms"]) / len(rows),
        mean_secret_spots_pct=statistics.fmean(spots_pct),
        mean_secret_rooms_pct=statistics.fmean(secret_rooms_pct),
    )


def actions_by_room_count(rows: list[dict]) -> dict[int, tuple[int, float, float]]:
    """Group episode rows by total_rooms: count, mean and stdev of actions."""
    groups: dict[int, list[int]] = {}
    for r in rows:
        groups.setdefault(int(r["total_rooms"]), []).append(int(r["actions"]))
    out = {}
    for k in sorted(groups):
        xs = groups[k]
        out[k] = (len(xs), statistics.fmean(xs),
                  statistics.pstdev(xs) if len(xs) > 1 else 0.0)
    return out


def pareto_front(points: list[tuple[float, float]]) -> list[tuple[float, float]]:
    """Non-dominated subset: minimize x (actions), maximize y (exploration).

    A point is dominated when another has x' <= x and y' >= y with at
    least one strict inequality.  Returned sorted by x.
    """
    front = []
    for i, (x, y) in enumerate(points):
        dominated = False
        for j, (ox, oy) in enumerate(points):
            if j == i:
                continue
            if ox <= x and oy >= y and (ox < x or oy > y):
                dominated = True
                break
        if not dominated:
            front.append((x, y))
    return sorted(set(front))


GRID_SUMMARY_COLUMNS = [
    "cell_id", "agent", "n_runs", "mean_actions", "std_actions",
    "mean_rooms_pct", "exhaustive_pct", "mean_secret_spots_pct",
    "mean_secret_rooms_pct",
]


def grid_search(agent_name: str, base_params: ExplorationParams,
                grid: dict[str, list], runs_per_cell: int, base_seed: int,
                gen: GenConfig, workers: int = 1,
                searches_per_wall: int = 10) -> list[dict]:
    """Cartesian product over `grid`; one summary row per combination.

    Every cell runs against the same seeded maps (paired design), so cell
    differences are parameter effects, not map luck.
    """
    keys = sorted(grid)
    rows = []
    for cell_id, combo in enumerate(itertools.product(*(grid[k] for k in keys))):
        overrides = dict(zip(keys, combo))
        if agent_name == "occmap":
            params = replace(base_params, **overrides)
            agent = AgentConfig("occmap", params=params)
        elif agent_name == "greedy-secret":
            spw = int(overrides.pop("searches_per_wall", searches_per_wall))
            agent = AgentConfig("greedy-secret", searches_per_wall=spw)
        else:
            raise ValueError(f"grid search over {agent_name!r} is not supported")
        summary, _ = run_batch(agent, gen, runs_per_cell, base_seed,
                               cell_id=cell_id, workers=workers)
        row = {
            "cell_id": cell_id,
            "agent": agent_name,
            "n_runs": summary.n_runs,
            "mean_actions": round(summary.mean_actions, 4),
            "std_actions": round(summary.std_actions, 4),
            "mean_rooms_pct": round(summary.mean_rooms_pct, 4),
            "exhaustive_pct": round(summary.exhaustive_pct, 4),
            "mean_secret_spots_pct": round(summary.mean_secret_spots_pct, 4),
            "mean_secret_rooms_pct": round(summary.mean_secret_rooms_pct, 4),
        }
        row.update(agent.param_columns())
        rows.append(row)
    return rows


def rows_to_csv(rows: list[dict], columns: list[str] | None = None) -> str:
    """Deterministic CSV text for a list of uniform row dicts."""
    if not rows:
        return ""
    if columns is None:
        fixed = [c for c in EPISODE_COLUMNS if c in rows[0]]
        extra = sorted(k for k in rows[0] if k not in fixed)
        columns = fixed + extra
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=columns, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: _fmt(row.get(k)) for k in columns})
    return buf.getvalue()


def _fmt(value) -> str:
    if isinstance(value, bool):
        return str(int(value))
    if isinstance(value, float):
        return repr(value)
    return "" if value is None else str(value)
