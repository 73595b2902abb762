"""Per-episode outcome record shared by all agents."""

from __future__ import annotations

from dataclasses import dataclass, field

from .engine import AgentState, AgentView
from .level import LevelMap


@dataclass
class EpisodeResult:
    actions: int
    rooms_visited: int
    total_rooms: int
    secret_spots_found: int
    total_secret_spots: int
    secret_rooms_found: int
    total_secret_rooms: int
    exhaustive: bool
    coverage: float
    trace: list[str] = field(default_factory=list)
    failed: bool = False  # step budget exceeded (livelock guard)

    @property
    def rooms_pct(self) -> float:
        return 100.0 * self.rooms_visited / self.total_rooms

    @property
    def secret_spots_pct(self) -> float:
        """Secret spots found; 100 when the map has none."""
        if self.total_secret_spots == 0:
            return 100.0
        return 100.0 * self.secret_spots_found / self.total_secret_spots

    @property
    def secret_rooms_pct(self) -> float:
        """Secret rooms found; maps without secret rooms score full marks."""
        if self.total_secret_rooms == 0:
            return 100.0
        return 100.0 * self.secret_rooms_found / self.total_secret_rooms


def finish_episode(level: LevelMap, state: AgentState, view: AgentView,
                   failed: bool = False) -> EpisodeResult:
    secret_rooms = level.secret_room_indices()
    return EpisodeResult(
        actions=state.actions,
        rooms_visited=len(view.visited_rooms),
        total_rooms=len(level.rooms),
        secret_spots_found=len(view.revealed),
        total_secret_spots=len(level.hidden_positions),
        secret_rooms_found=len(secret_rooms & view.visited_rooms),
        total_secret_rooms=len(secret_rooms),
        exhaustive=len(view.visited_rooms) == len(level.rooms),
        coverage=view.coverage(),
        trace=state.trace,
        failed=failed,
    )


def default_step_budget(level: LevelMap) -> int:
    return 10 * level.width * level.height
