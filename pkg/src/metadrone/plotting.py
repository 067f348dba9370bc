"""
Figures for campaign reports: flight paths over the world, the manoeuvre
count histogram across repeats, and per-drone mission durations.
"""

from __future__ import annotations

from pathlib import Path
from typing import Dict, List, Optional

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
from matplotlib.patches import Circle as CirclePatch, Polygon as PolygonPatch  # noqa: E402

from .campaign import CampaignReport  # noqa: E402
from .geometry import Circle, WorldModel  # noqa: E402

STYLE = {
    "font.size": 9,
    "axes.labelsize": 9,
    "axes.titlesize": 10,
    "legend.fontsize": 8,
    "xtick.labelsize": 8,
    "ytick.labelsize": 8,
    "figure.dpi": 100,
    "savefig.bbox": "tight",
}


def _figure(width=6.0, height=None):
    golden = (5 ** 0.5 - 1.0) / 2.0
    with plt.rc_context(STYLE):
        return plt.subplots(figsize=(width, height or width * golden))


def _save(fig, path: Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with plt.rc_context(STYLE):
        fig.savefig(path)
    plt.close(fig)
    return path


def draw_world(ax, world: WorldModel, altitude: Optional[float] = None) -> None:
    for o in world.obstacles:
        seen = altitude is None or o.spans(altitude)
        style = dict(facecolor="0.35" if seen else "none", edgecolor="0.2",
                     hatch=None if seen else "//", linewidth=0.8)
        fp = o.footprint
        if isinstance(fp, Circle):
            ax.add_patch(CirclePatch(fp.center, fp.radius, **style))
        else:
            ax.add_patch(PolygonPatch(fp.vertices, closed=True, **style))
    for pad in world.pads.values():
        ax.plot(*pad.position, marker="s", ms=7, color="tab:green" if pad.color == "green" else "tab:red")
        ax.annotate(pad.name, pad.position, xytext=(4, 4), textcoords="offset points")


def plot_group_paths(report: CampaignReport, repeat_index: int, path: Path) -> Path:
    """Flight paths of every run in one metamorphic group."""
    r = report.repeats[repeat_index]
    fig, ax = _figure(6.0, 4.5)
    src = r.group.inputs[0]
    draw_world(ax, src.world, src.plans[0].takeoff_altitude)
    for j, out in enumerate(r.group.outputs):
        by_drone: Dict[str, List] = {}
        for row in out.trace:
            by_drone.setdefault(row.drone_id, []).append((row.x, row.y))
        for d, pts in by_drone.items():
            xs, ys = zip(*pts)
            ax.plot(xs, ys, lw=1.0, ls="-" if j == 0 else "--",
                    label=f"{'source' if j == 0 else 'follow-up'} {d} ({out.telemetry[d].avoidance_count} manoeuvres)")
    ax.set_aspect("equal", adjustable="datalim")
    ax.set_xlabel("x [m]")
    ax.set_ylabel("y [m]")
    ax.set_title(f"{report.scenario_id}, repeat {r.repeat} (seed {r.seed}): {r.verdict.value}")
    ax.legend(loc="best")
    return _save(fig, path)


def plot_manoeuvre_histogram(report: CampaignReport, path: Path) -> Path:
    hist = report.manoeuvre_histogram()
    fig, ax = _figure()
    keys = list(hist)
    width = 0.8 / max(len(keys), 1)
    for i, key in enumerate(keys):
        xs = [a + (i - (len(keys) - 1) / 2) * width for a in hist[key]]
        ax.bar(xs, list(hist[key].values()), width=width, label=key)
    ax.set_xlabel("avoidance manoeuvres per mission")
    ax.set_ylabel("repeats")
    ax.set_title(f"{report.scenario_id}: manoeuvre counts over {len(report.repeats)} repeats")
    ax.legend()
    return _save(fig, path)


def plot_durations(report: CampaignReport, path: Path) -> Path:
    durations = report.durations()
    fig, ax = _figure()
    reps = [r.repeat for r in report.repeats]
    for key, ts in durations.items():
        ax.plot(reps, ts, marker="o", ms=3, lw=0.8, label=key)
    ax.set_xlabel("repeat")
    ax.set_ylabel("elapsed time [s]")
    ax.set_title(f"{report.scenario_id}: mission durations")
    ax.legend()
    return _save(fig, path)


def render_campaign_figures(report: CampaignReport, out_dir: Path) -> List[Path]:
    out_dir = Path(out_dir)
    stem = f"{report.scenario_id.replace('/', '_')}__{report.relation.id}"
    paths = [plot_group_paths(report, k, out_dir / f"{stem}__rep{r.repeat:03d}__paths.png")
             for k, r in enumerate(report.repeats)]
    paths.append(plot_manoeuvre_histogram(report, out_dir / f"{stem}__manoeuvres.png"))
    paths.append(plot_durations(report, out_dir / f"{stem}__durations.png"))
    return paths
