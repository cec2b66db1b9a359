import os
from typing import List, Optional, Sequence

import matplotlib
from matplotlib.figure import Figure

from marl_avoidance.errors import ConfigurationError, MarlError
from marl_avoidance.harness.metrics import read_metrics
from marl_avoidance.harness.run_config import RESOLVED_NAME, read_resolved
from marl_avoidance.logging import logger

CURVES_NAME = "curves.svg"

# fixed ids and no timestamp: identical inputs give identical bytes
_SVG_PARAMS = {"svg.hashsalt": "marl-avoidance", "svg.fonttype": "path"}


def curve_label(metrics_path: str) -> str:
    """Legend text from the run's config.resolved when present, else the file stem."""
    resolved = os.path.join(os.path.dirname(os.path.abspath(metrics_path)), RESOLVED_NAME)
    if os.path.isfile(resolved):
        try:
            cfg = read_resolved(resolved)
        except MarlError as e:
            logger.warning(f"Ignoring unreadable {resolved}: {e}")
        else:
            name = cfg.algo
            if cfg.algo == "facmac":
                name = f"{cfg.algo}-{cfg.mixer}/{cfg.sharing}"
                if cfg.staged_watershed is not None:
                    name += f"/staged@{cfg.staged_watershed}"
            return f"{name} ({cfg.scenario}, seed {cfg.seed})"
    return os.path.splitext(os.path.basename(metrics_path))[0]


def emit_plot(
    metrics_files: Sequence[str], out_path: str, labels: Optional[Sequence[str]] = None
) -> str:
    """One mean-return curve per metrics file, written as SVG."""
    if not metrics_files:
        raise ConfigurationError("at least one metrics file is required", key="metrics")
    if labels is not None and len(labels) != len(metrics_files):
        raise ConfigurationError("one label per metrics file", key="labels")

    series = [read_metrics(path) for path in metrics_files]
    names: List[str] = list(labels) if labels is not None else [curve_label(p) for p in metrics_files]

    with matplotlib.rc_context(_SVG_PARAMS):
        fig = Figure(figsize=(7, 4.5))
        ax = fig.add_subplot(1, 1, 1)
        for rows, name in zip(series, names):
            ax.plot(
                [row.timestep for row in rows],
                [row.mean_return for row in rows],
                marker="o" if len(rows) == 1 else None,
                label=name,
            )
        ax.set_xlabel("timestep")
        ax.set_ylabel("average return")
        ax.grid(True, alpha=0.3)
        ax.legend(loc="best")
        fig.tight_layout()
        directory = os.path.dirname(out_path)
        if directory:
            os.makedirs(directory, exist_ok=True)
        fig.savefig(out_path, format="svg", metadata={"Date": None})
    logger.info(f"Wrote {len(series)} curve(s) to {out_path}")
    return out_path
