"""
Independent runs fanned out over processes.

Runs share nothing but the filesystem: each writes to
``<out>/<algo>/seed-<seed>``. Results come back in grid order regardless of
completion order.
"""

import os
from concurrent.futures import ProcessPoolExecutor, as_completed
from typing import Any, Dict, List, Optional, Sequence, Tuple

from marl_avoidance.harness.plotting import CURVES_NAME, emit_plot
from marl_avoidance.harness.runner import train
from marl_avoidance.logging import logger
from marl_avoidance.models.run import RunArtifacts, RunConfig


def run_directory(root: str, algo: str, seed: int) -> str:
    return os.path.join(root, algo, f"seed-{seed}")


def sweep_grid(base: RunConfig, algos: Sequence[str], seeds: Sequence[int]) -> List[RunConfig]:
    """One validated config per (algo, seed), algos outermost."""
    grid = []
    for algo in algos:
        for seed in seeds:
            values: Dict[str, Any] = base.to_resolved()
            values.update({"algo": algo, "seed": seed, "out": run_directory(base.out, algo, seed)})
            grid.append(RunConfig.model_validate(values))
    return grid


def _train_resolved(values: Dict[str, Any]) -> RunArtifacts:
    return train(RunConfig.model_validate(values))


def sweep(
    base: RunConfig,
    algos: Sequence[str],
    seeds: Sequence[int],
    workers: Optional[int] = None,
    plot: bool = True,
) -> List[RunArtifacts]:
    grid = sweep_grid(base, algos, seeds)
    logger.info(f"Sweeping {len(grid)} runs over algos {list(algos)} and seeds {list(seeds)}")
    results: Dict[int, RunArtifacts] = {}
    with ProcessPoolExecutor(max_workers=workers) as executor:
        futures = {executor.submit(_train_resolved, config.to_resolved()): k for k, config in enumerate(grid)}
        for future in as_completed(futures):
            k = futures[future]
            results[k] = future.result()
            logger.info(f"Finished {grid[k].algo} seed {grid[k].seed} in {results[k].out_dir}")
    ordered = [results[k] for k in range(len(grid))]

    if plot:
        runs_with_rows: List[Tuple[str, RunArtifacts]] = [(a.metrics_path, a) for a in ordered if a.rows]
        if runs_with_rows:
            emit_plot([path for path, _ in runs_with_rows], os.path.join(base.out, CURVES_NAME))
        else:
            logger.warning("No evaluation rows were written; skipping the sweep plot")
    return ordered
