"""Command-line entry point.

Subcommands: generate, run, replay, batch, grid-search, compare, oracle,
viz.  Every command is deterministic given explicit seeds.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace

import numpy as np

from . import occupancy as occ
from .components import corridor_end_room_component, decompose, find_frontiers
from .engine import DIRECTIONS, SimConfig, start_episode, step_move, step_search
from .episode import default_step_budget
from .greedy import explore_greedy, explore_greedy_secret
from .harness import (
    EPISODE_COLUMNS,
    GRID_SUMMARY_COLUMNS,
    AgentConfig,
    grid_search,
    run_batch,
    rows_to_csv,
)
from .level import LevelMap, TileKind
from .mapgen import GenConfig, MapGenError, generate
from .occmap import ExplorationParams, explore, params_from_file, params_to_text
from .oracle import optimal_route
from .rng import STREAM_REVEAL, derive_seed


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (MapGenError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="delve",
        description="Dungeon exploration workbench: generate maps, run agents, "
                    "reproduce the batch experiments.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="generate a map file")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--no-secrets", action="store_true")
    p.add_argument("--width", type=int, default=80)
    p.add_argument("--height", type=int, default=20)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("run", help="run one agent on a map")
    p.add_argument("--map", required=True)
    p.add_argument("--agent", default="occmap",
                   choices=["occmap", "greedy", "greedy-secret"])
    p.add_argument("--params", help="ExplorationParams file (key = value lines)")
    p.add_argument("--seed", type=int, default=0, help="search-reveal stream seed")
    p.add_argument("--searches-per-wall", type=int, default=10)
    p.add_argument("--p-reveal", type=float, default=1 / 3)
    p.add_argument("--secrets", action="store_true",
                   help="enable secret discovery for the occmap agent")
    p.add_argument("--render", action="store_true", help="print per-step frames")
    p.add_argument("--trace-out", help="write the action trace to a file")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("replay", help="re-render a recorded trace")
    p.add_argument("--map", required=True)
    p.add_argument("--trace", required=True)
    p.add_argument("--every", type=int, default=1, help="render every Nth step")
    p.set_defaults(func=cmd_replay)

    p = sub.add_parser("batch", help="run a seeded batch of episodes")
    p.add_argument("--agent", default="occmap",
                   choices=["occmap", "greedy", "greedy-secret", "oracle"])
    p.add_argument("--params")
    p.add_argument("--n", type=int, default=500)
    p.add_argument("--base-seed", type=int, default=0)
    p.add_argument("--searches-per-wall", type=int, default=10)
    p.add_argument("--no-secrets", action="store_true")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", help="episode CSV path (default stdout summary only)")
    p.set_defaults(func=cmd_batch)

    p = sub.add_parser("grid-search", help="sweep a parameter grid")
    p.add_argument("--grid", required=True,
                   help="JSON file: {param: [values...], ...}")
    p.add_argument("--agent", default="occmap", choices=["occmap", "greedy-secret"])
    p.add_argument("--params", help="base ExplorationParams file")
    p.add_argument("--runs-per-cell", type=int, default=200)
    p.add_argument("--base-seed", type=int, default=0)
    p.add_argument("--no-secrets", action="store_true")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_grid_search)

    p = sub.add_parser("compare", help="run several agents on identical maps")
    p.add_argument("--agents", default="oracle,greedy,occmap")
    p.add_argument("--n", type=int, default=500)
    p.add_argument("--base-seed", type=int, default=0)
    p.add_argument("--params")
    p.add_argument("--no-secrets", action="store_true")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", help="write combined episode CSV")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("oracle", help="optimal route cost for a map")
    p.add_argument("--map", required=True)
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("viz", help="dump the occupancy grid as a PGM image")
    p.add_argument("--map", required=True)
    p.add_argument("--params")
    p.add_argument("--at-step", type=int, default=0,
                   help="snapshot after this many actions")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_viz)

    p = sub.add_parser("params", help="write the default parameter file")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_params)

    return parser


def _load_level(path: str) -> LevelMap:
    with open(path, "r", encoding="utf-8") as fh:
        return LevelMap.parse(fh.read())


def _load_params(path: str | None, secrets: bool = False) -> ExplorationParams:
    params = params_from_file(path) if path else ExplorationParams()
    if secrets and not params.secrets_enabled:
        params = replace(params, secrets_enabled=True)
    return params


def cmd_generate(args) -> int:
    cfg = GenConfig(seed=args.seed, width=args.width, height=args.height,
                    secrets_enabled=not args.no_secrets)
    level = generate(cfg)
    with open(args.out, "w", encoding="utf-8") as fh:
        fh.write(level.serialize())
    print(f"wrote {args.out}: {len(level.rooms)} rooms, "
          f"{len(level.hidden_positions)} hidden spots")
    return 0


def render_frame(level: LevelMap, view, state, grid=None, frontiers=(),
                 components=()) -> str:
    """Textual frame: seen map with agent '@', frontiers '^', component
    cells ':' and their anchors '*'."""
    rows = []
    comp_cells = {c for comp in components for c in comp.cells}
    anchors = {comp.anchor_pos() for comp in components if comp.anchor_pos()}
    fronts = set(frontiers)
    for y in range(level.height):
        row = []
        for x in range(level.width):
            pos = (x, y)
            if pos == state.pos:
                row.append("@")
            elif pos in anchors:
                row.append("*")
            elif pos in fronts:
                row.append("^")
            elif pos in comp_cells:
                row.append(":")
            elif view.apparent[y, x] == 255:
                row.append(" ")
            else:
                kind = view.apparent[y, x]
                if kind == TileKind.WALL:
                    row.append(chr(level.disguise[y, x])
                               if level.kind[y, x] == TileKind.WALL else "-")
                else:
                    row.append({0: " ", 1: ".", 3: "+", 4: "#"}.get(int(kind), "?"))
        rows.append("".join(row).rstrip())
    return "\n".join(rows)


def cmd_run(args) -> int:
    level = _load_level(args.map)
    sim = SimConfig(p_reveal=args.p_reveal,
                    reveal_seed=derive_seed(args.seed, 0, 0, STREAM_REVEAL))
    if args.agent == "occmap":
        params = _load_params(args.params, secrets=args.secrets)
        result = explore(level, params, sim)
    elif args.agent == "greedy":
        result = explore_greedy(level)
    else:
        result = explore_greedy_secret(level, args.searches_per_wall, sim)
    if args.render:
        _render_trace(level, result.trace, every=1)
    if args.trace_out:
        with open(args.trace_out, "w", encoding="utf-8") as fh:
            fh.write("\n".join(result.trace) + "\n")
    print(f"agent={args.agent} actions={result.actions} "
          f"rooms={result.rooms_visited}/{result.total_rooms} "
          f"secret_spots={result.secret_spots_found}/{result.total_secret_spots} "
          f"secret_rooms={result.secret_rooms_found}/{result.total_secret_rooms} "
          f"exhaustive={result.exhaustive}")
    return 0


def _render_trace(level: LevelMap, trace: list[str], every: int = 1):
    """Re-simulate a trace, printing frames."""
    state, view = start_episode(level)
    print(render_frame(level, view, state))
    print()
    for i, line in enumerate(trace):
        _apply_trace_line(level, state, view, line)
        if (i + 1) % every == 0:
            print(line)
            print(render_frame(level, view, state))
            print()


def _apply_trace_line(level, state, view, line: str):
    body = line.split(": ", 1)[1]
    if body.startswith("move"):
        step_move(level, state, view, body.split()[1])
    elif body.startswith("search"):
        state.actions += 1
        x, y = state.pos
        view.search_count[y, x] += 1
        inner = body[body.index("[") + 1:body.rindex("]")]
        if inner.strip():
            for part in inner.split(";"):
                coords = part.strip().split()[0]
                rx, ry = (int(v) for v in coords.split(","))
                view.reveal((rx, ry))
    else:
        raise ValueError(f"bad trace line: {line!r}")


def cmd_replay(args) -> int:
    level = _load_level(args.map)
    with open(args.trace, "r", encoding="utf-8") as fh:
        trace = [line for line in fh.read().splitlines() if line.strip()]
    _render_trace(level, trace, every=args.every)
    print(f"replayed {len(trace)} actions")
    return 0


def _agent_from_args(args) -> AgentConfig:
    return AgentConfig(
        name=args.agent,
        params=_load_params(getattr(args, "params", None)),
        searches_per_wall=getattr(args, "searches_per_wall", 10),
    )


def cmd_batch(args) -> int:
    gen = GenConfig(secrets_enabled=not args.no_secrets)
    agent = _agent_from_args(args)
    summary, rows = run_batch(agent, gen, args.n, args.base_seed,
                              workers=args.workers)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(rows_to_csv(rows))
    print(f"{args.agent}: n={summary.n_runs} actions={summary.mean_actions:.1f}"
          f"+-{summary.std_actions:.1f} rooms%={summary.mean_rooms_pct:.1f} "
          f"exhaustive%={summary.exhaustive_pct:.1f} "
          f"secret_spots%={summary.mean_secret_spots_pct:.1f} "
          f"secret_rooms%={summary.mean_secret_rooms_pct:.1f}")
    return 0


def cmd_grid_search(args) -> int:
    with open(args.grid, "r", encoding="utf-8") as fh:
        grid = json.load(fh)
    base = _load_params(args.params)
    gen = GenConfig(secrets_enabled=not args.no_secrets)
    rows = grid_search(args.agent, base, grid, args.runs_per_cell,
                       args.base_seed, gen, workers=args.workers)
    extra = sorted(k for k in rows[0] if k not in GRID_SUMMARY_COLUMNS)
    csv_text = rows_to_csv(rows, GRID_SUMMARY_COLUMNS + extra)
    with open(args.out, "w", encoding="utf-8") as fh:
        fh.write(csv_text)
    print(f"wrote {args.out}: {len(rows)} cells x {args.runs_per_cell} runs")
    return 0


def cmd_compare(args) -> int:
    gen = GenConfig(secrets_enabled=not args.no_secrets)
    params = _load_params(args.params)
    all_rows = []
    summaries = {}
    for name in args.agents.split(","):
        name = name.strip()
        agent = AgentConfig(name=name, params=params)
        summary, rows = run_batch(agent, gen, args.n, args.base_seed,
                                  workers=args.workers)
        summaries[name] = summary
        all_rows.extend(rows)
    width = max(len(n) for n in summaries)
    for name, s in summaries.items():
        print(f"{name:<{width}}  actions {s.mean_actions:8.1f} +- {s.std_actions:6.1f}   "
              f"rooms% {s.mean_rooms_pct:6.2f}   exhaustive% {s.exhaustive_pct:6.2f}")
    if args.out:
        all_rows.sort(key=lambda r: (r["agent"], r["cell_id"], r["run_id"]))
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(rows_to_csv(all_rows, EPISODE_COLUMNS))
    return 0


def cmd_oracle(args) -> int:
    level = _load_level(args.map)
    cost, route = optimal_route(level)
    seq = " -> ".join(f"{x},{y}" for x, y in route)
    print(f"optimal actions: {cost}")
    print(f"route: {seq}")
    return 0


def cmd_viz(args) -> int:
    level = _load_level(args.map)
    params = _load_params(args.params)
    sim = SimConfig(reveal_seed=derive_seed(args.seed, 0, 0, STREAM_REVEAL))
    grid_snapshot = snapshot_grid(level, params, sim, args.at_step)
    write_pgm(grid_snapshot.prob, args.out)
    print(f"wrote {args.out}")
    return 0


def snapshot_grid(level: LevelMap, params: ExplorationParams, sim: SimConfig,
                  at_step: int):
    """Run the occmap agent, stopping once at_step actions are reached, and
    return the occupancy grid at that point."""
    # Small re-implementation of the explore loop that can stop mid-way.
    from .engine import distance_map, shortest_path, travel  # local alias

    state, view = start_episode(level)
    grid = occ.init(view, params.border_multiplier)
    seen_version = -1
    budget = default_step_budget(level)
    while state.actions < max(at_step, 0) or seen_version < 0:
        if view.version != seen_version:
            try:
                occ.update_observation(grid, view)
                occ.diffuse(grid, params.diffusion_factor, params.diffusion_passes)
            except occ.ExplorationComplete:
                break
            seen_version = view.version
        if state.actions >= max(at_step, 0):
            break
        pri = corridor_end_room_component(grid, view)
        if pri is not None:
            target = pri.frontier
        else:
            all_frontiers = find_frontiers(view)
            fthr = occ.effective_threshold(params.frontier_threshold, view,
                                           params.vary_threshold)
            fronts = [
                f for f in all_frontiers
                if not occ.frontier_is_low_utility(grid, view, f,
                                                   params.frontier_radius, fthr)
            ]
            comps = decompose(grid, view, fronts,
                              min_neighbors=params.component_min_neighbors,
                              component_threshold=params.component_threshold,
                              min_room_size=params.min_room_size,
                              min_secret_room_size=params.min_secret_room_size,
                              fallback_frontiers=all_frontiers)
            reachable = [c for c in comps if not c.hidden]
            if not reachable:
                break
            dmap = distance_map(view, state.pos)
            reachable.sort(key=lambda c: (int(dmap[c.frontier[1], c.frontier[0]])
                                          if dmap[c.frontier[1], c.frontier[0]] >= 0
                                          else 10 ** 9, c.frontier[1], c.frontier[0]))
            target = reachable[0].frontier
        path = shortest_path(view, state.pos, target)
        if path is None or len(path) < 2:
            break
        remaining = max(at_step, 0) - state.actions
        travel(level, state, view, path[:remaining + 1])
        if state.actions > budget:
            break
    return grid


def write_pgm(prob: np.ndarray, path: str):
    """Plain (P2) grayscale pixmap; probability 0 maps to black."""
    peak = float(prob.max())
    scale = 255.0 / peak if peak > 0 else 0.0
    img = np.round(prob * scale).astype(int)
    h, w = img.shape
    lines = [f"P2\n{w} {h}\n255"]
    for row in img:
        lines.append(" ".join(str(int(v)) for v in row))
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def cmd_params(args) -> int:
    with open(args.out, "w", encoding="utf-8") as fh:
        fh.write(params_to_text(ExplorationParams()))
    print(f"wrote {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
