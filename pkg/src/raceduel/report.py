"""Static plots from episode logs: belief and potential traces, x-y
trajectory overlays, and blocking-rate bars from a batch summary."""

from __future__ import annotations

from pathlib import Path
from typing import List

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from .records import ParsedEpisode, read_episode

LEVEL_COLORS = ("tab:blue", "tab:orange", "tab:green")


def plot_beliefs(episode: ParsedEpisode, out_path: Path) -> None:
    times = [d["t"] for d in episode.decisions]
    fig, ax = plt.subplots(figsize=(7, 3.5))
    for level in range(3):
        ax.plot(
            times,
            [d["beliefs"][level] for d in episode.decisions],
            label=f"level {level}",
            color=LEVEL_COLORS[level],
        )
    ax.set_xlabel("time [s]")
    ax.set_ylabel("belief")
    ax.set_ylim(-0.05, 1.05)
    ax.legend(loc="upper right")
    ax.set_title("estimated opponent level beliefs")
    fig.tight_layout()
    fig.savefig(out_path, dpi=110)
    plt.close(fig)


def plot_potential(episode: ParsedEpisode, out_path: Path) -> None:
    times = [d["t"] for d in episode.decisions]
    limit = episode.meta["config"].get("potential_limit", 0.2)
    fig, ax = plt.subplots(figsize=(7, 2.8))
    ax.step(times, [d["potential"] for d in episode.decisions], where="post", color="tab:red")
    ax.axhline(limit, linestyle="--", linewidth=0.8, color="gray")
    ax.set_xlabel("time [s]")
    ax.set_ylabel("level-change potential")
    ax.set_ylim(-0.01, limit * 1.2)
    fig.tight_layout()
    fig.savefig(out_path, dpi=110)
    plt.close(fig)


def plot_trajectories(episode: ParsedEpisode, out_path: Path) -> None:
    cfg = episode.meta["config"]
    lo, hi = cfg.get("y_track", (0.65, 2.35))
    fig, ax = plt.subplots(figsize=(9, 3.2))
    for d in episode.decisions:
        best = list(zip(*[(p[1], p[2]) for p in d["best"]]))
        mixed = list(zip(*[(p[1], p[2]) for p in d["mixed"]]))
        fail = list(zip(*[(p[1], p[2]) for p in d["failsafe"]]))
        ax.plot(best[0], best[1], color="red", linewidth=0.5, alpha=0.35)
        ax.plot(fail[0], fail[1], color="black", linewidth=0.5, alpha=0.35)
        ax.plot(mixed[0], mixed[1], color="blue", linewidth=0.5, alpha=0.35)
    ego_x = [s["ego"][0] for s in episode.samples]
    ego_y = [s["ego"][1] for s in episode.samples]
    opp_x = [s["opp"][0] for s in episode.samples]
    opp_y = [s["opp"][1] for s in episode.samples]
    ax.plot(ego_x, ego_y, color="blue", linewidth=1.8, label="ego")
    ax.plot(opp_x, opp_y, color="red", linewidth=1.8, label="opponent")
    ax.axhline(lo, color="gray", linewidth=1.2)
    ax.axhline(hi, color="gray", linewidth=1.2)
    ax.set_xlabel("x [m]")
    ax.set_ylabel("y [m]")
    outcome = episode.result.get("outcome")
    collision = " (collision)" if episode.result.get("collision") else ""
    ax.set_title(f"driven paths and planned lines: {outcome}{collision}")
    ax.legend(loc="upper left", fontsize=8)
    fig.tight_layout()
    fig.savefig(out_path, dpi=110)
    plt.close(fig)


def plot_rates(summary_csv: Path, out_path: Path) -> None:
    lines = Path(summary_csv).read_text().strip().splitlines()
    header = lines[0].split(",")
    rows = [dict(zip(header, line.split(","))) for line in lines[1:]]
    controllers = sorted({r["controller"] for r in rows})
    opponents = sorted({r["opponent"] for r in rows})
    width = 0.8 / max(len(controllers), 1)
    fig, ax = plt.subplots(figsize=(8, 3.5))
    for ci, controller in enumerate(controllers):
        xs, ys = [], []
        for oi, opponent in enumerate(opponents):
            row = next(
                (r for r in rows if r["controller"] == controller and r["opponent"] == opponent),
                None,
            )
            if row is None:
                continue
            xs.append(oi + ci * width)
            ys.append(float(row["blocking_rate"]))
        ax.bar(xs, ys, width=width, label=controller)
    ax.set_xticks([i + width * (len(controllers) - 1) / 2 for i in range(len(opponents))])
    ax.set_xticklabels(opponents, fontsize=8)
    ax.set_ylabel("blocking rate")
    ax.set_ylim(0, 1.05)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(out_path, dpi=110)
    plt.close(fig)


def generate_report(log_dir: Path, out_dir: Path) -> List[Path]:
    """Render plots for every episode log in a directory; returns the files."""
    log_dir = Path(log_dir)
    out_dir = Path(out_dir)
    episodes = sorted(log_dir.glob("*.jsonl"))
    summary = log_dir / "summary.csv"
    if not episodes and not summary.exists():
        raise FileNotFoundError(f"no episode logs found in {log_dir}")
    out_dir.mkdir(parents=True, exist_ok=True)
    written: List[Path] = []
    for path in episodes:
        episode = read_episode(path)
        stem = path.stem
        for suffix, fn in (
            ("beliefs", plot_beliefs),
            ("potential", plot_potential),
            ("trajectories", plot_trajectories),
        ):
            target = out_dir / f"{stem}_{suffix}.png"
            fn(episode, target)
            written.append(target)
    if summary.exists():
        target = out_dir / "rates.png"
        plot_rates(summary, target)
        written.append(target)
    return written
