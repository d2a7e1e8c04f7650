"""Episode logs: in-memory records plus the versioned JSONL schema.

Each episode serializes as one metadata line, then one line per sample and
per decision cycle in chronological order, then one result line.  All fields
are deterministic for a given (config, seed) except the wall-clock
``latency_ms`` values, which comparisons mask out.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

SCHEMA_VERSION = 1

BLOCKING = "blocking_success"
OVERTAKING = "overtaking_success"


@dataclass
class SampleRow:
    k: int
    t: float
    ego: Tuple[float, ...]  # (x, y, theta, vx, vy, ax, ay)
    opp: Tuple[float, ...]
    ego_u: Tuple[float, float]
    opp_u: Tuple[float, float]
    ego_clamped: bool = False
    opp_clamped: bool = False
    ego_fallback: bool = False
    opp_fallback: bool = False

    def to_obj(self) -> Dict[str, Any]:
        return {
            "type": "sample",
            "k": self.k,
            "t": self.t,
            "ego": list(self.ego),
            "opp": list(self.opp),
            "ego_u": list(self.ego_u),
            "opp_u": list(self.opp_u),
            "ego_clamped": self.ego_clamped,
            "opp_clamped": self.opp_clamped,
            "ego_fallback": self.ego_fallback,
            "opp_fallback": self.opp_fallback,
        }


@dataclass
class DecisionRow:
    k: int
    t: float
    beliefs: Tuple[float, float, float]
    potential: float
    level_star: int
    level_fail: int
    ego_indices: Tuple[int, int, int, int]
    opp_indices: Tuple[int, int, int]
    best: list
    failsafe: list
    mixed: list
    ego_candidates: list
    opp_candidates: list
    opp_level_played: Optional[int]
    mix_degenerate: bool
    latency_ms: float

    def to_obj(self, mask_latency: bool = False) -> Dict[str, Any]:
        return {
            "type": "decision",
            "k": self.k,
            "t": self.t,
            "beliefs": list(self.beliefs),
            "potential": self.potential,
            "level_star": self.level_star,
            "level_fail": self.level_fail,
            "ego_indices": list(self.ego_indices),
            "opp_indices": list(self.opp_indices),
            "best": self.best,
            "failsafe": self.failsafe,
            "mixed": self.mixed,
            "ego_candidates": self.ego_candidates,
            "opp_candidates": self.opp_candidates,
            "opp_level_played": self.opp_level_played,
            "mix_degenerate": self.mix_degenerate,
            "latency_ms": 0.0 if mask_latency else self.latency_ms,
        }


@dataclass
class EpisodeRecord:
    """Full time-indexed log of one duel plus its outcome classification."""

    config: Dict[str, Any]
    controller: str
    opponent: str
    seed: int
    samples: List[SampleRow] = field(default_factory=list)
    decisions: List[DecisionRow] = field(default_factory=list)
    outcome: Optional[str] = None
    collision: bool = False
    aborted: bool = False
    abort_reason: Optional[str] = None
    end_time: float = 0.0
    clamp_events: int = 0

    def mean_latency_ms(self) -> float:
        if not self.decisions:
            return 0.0
        return sum(d.latency_ms for d in self.decisions) / len(self.decisions)

    def jsonl_lines(self, mask_latency: bool = False) -> List[str]:
        events: List[Tuple[int, int, Dict[str, Any]]] = []
        for row in self.samples:
            events.append((row.k, 0, row.to_obj()))
        for row in self.decisions:
            events.append((row.k, 1, row.to_obj(mask_latency=mask_latency)))
        events.sort(key=lambda e: (e[0], e[1]))
        meta = {
            "type": "meta",
            "version": SCHEMA_VERSION,
            "controller": self.controller,
            "opponent": self.opponent,
            "seed": self.seed,
            "config": self.config,
        }
        result = {
            "type": "result",
            "outcome": self.outcome,
            "collision": self.collision,
            "aborted": self.aborted,
            "abort_reason": self.abort_reason,
            "t_end": self.end_time,
            "clamp_events": self.clamp_events,
        }
        dump = lambda obj: json.dumps(obj, separators=(",", ":"))
        return [dump(meta)] + [dump(obj) for _, _, obj in events] + [dump(result)]

    def write(self, path: Path, mask_latency: bool = False) -> None:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text("\n".join(self.jsonl_lines(mask_latency=mask_latency)) + "\n")


@dataclass
class ParsedEpisode:
    """Loosely typed view of a written episode log, for reports and replay."""

    meta: Dict[str, Any]
    samples: List[Dict[str, Any]]
    decisions: List[Dict[str, Any]]
    result: Dict[str, Any]


def read_episode(path: Path) -> ParsedEpisode:
    meta: Dict[str, Any] = {}
    result: Dict[str, Any] = {}
    samples: List[Dict[str, Any]] = []
    decisions: List[Dict[str, Any]] = []
    for line in Path(path).read_text().splitlines():
        if not line.strip():
            continue
        obj = json.loads(line)
        kind = obj.get("type")
        if kind == "meta":
            meta = obj
        elif kind == "sample":
            samples.append(obj)
        elif kind == "decision":
            decisions.append(obj)
        elif kind == "result":
            result = obj
        else:
            raise ValueError(f"unknown record type {kind!r} in {path}")
    if not meta or not result:
        raise ValueError(f"incomplete episode log: {path}")
    return ParsedEpisode(meta=meta, samples=samples, decisions=decisions, result=result)


def external_inputs_from_record(parsed: ParsedEpisode) -> List[Tuple[float, float]]:
    """The opponent inputs applied per step, in step order, for replay."""
    rows = sorted(parsed.samples, key=lambda r: r["k"])
    return [(row["opp_u"][0], row["opp_u"][1]) for row in rows[1:]]


@dataclass(frozen=True)
class BatchRow:
    controller: str
    opponent: str
    runs: int
    blocks: int
    blocking_rate: float
    collisions: int
    aborts: int
    mean_decision_ms: float


@dataclass
class BatchSummary:
    rows: List[BatchRow]

    _COLUMNS = (
        "controller",
        "opponent",
        "runs",
        "blocks",
        "blocking_rate",
        "collisions",
        "aborts",
        "mean_decision_ms",
    )

    def csv_text(self, include_latency: bool = True) -> str:
        cols = self._COLUMNS if include_latency else self._COLUMNS[:-1]
        lines = [",".join(cols)]
        for row in self.rows:
            cells = [
                row.controller,
                row.opponent,
                str(row.runs),
                str(row.blocks),
                f"{row.blocking_rate:.4f}",
                str(row.collisions),
                str(row.aborts),
            ]
            if include_latency:
                cells.append(f"{row.mean_decision_ms:.3f}")
            lines.append(",".join(cells))
        return "\n".join(lines) + "\n"

    def write_csv(self, path: Path) -> None:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(self.csv_text())

    def format_table(self) -> str:
        header = f"{'controller':<14}{'opponent':<14}{'runs':>6}{'blocks':>8}{'rate':>8}{'coll':>6}{'abort':>6}{'ms':>9}"
        lines = [header, "-" * len(header)]
        for row in self.rows:
            lines.append(
                f"{row.controller:<14}{row.opponent:<14}{row.runs:>6}{row.blocks:>8}"
                f"{row.blocking_rate:>8.3f}{row.collisions:>6}{row.aborts:>6}{row.mean_decision_ms:>9.2f}"
            )
        return "\n".join(lines)
