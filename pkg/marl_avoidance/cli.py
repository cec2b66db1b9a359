import argparse
import json
import os
import sys
from typing import Any, Dict, Optional, Sequence

from marl_avoidance.config import get_settings
from marl_avoidance.errors import MarlError
from marl_avoidance.harness.plotting import CURVES_NAME, emit_plot
from marl_avoidance.harness.run_config import load_config
from marl_avoidance.harness.runner import evaluate, train
from marl_avoidance.harness.sweep import sweep
from marl_avoidance.harness.verify import SUITES, run_suites
from marl_avoidance.logging import logger, setup_logging
from marl_avoidance.models.algo import ALGORITHMS
from marl_avoidance.nn.mixers import MIXER_KINDS
from marl_avoidance.scenarios import SCENARIO_IDS

# flag destination -> config-file key
_RUN_FLAGS = {
    "scenario": "scenario",
    "algo": "algo",
    "mixer": "mixer",
    "sharing": "sharing",
    "staged_watershed": "staged-watershed",
    "time_steps": "time-steps",
    "seed": "seed",
    "out": "out",
    "eval_every": "eval-every",
    "eval_episodes": "eval-episodes",
    "scale": "scale",
    "wall_clock": "wall-clock",
    "max_episode_len": "max-episode-len",
    "batch_size": "Batch-size",
    "seq_length": "seq-length",
    "lr_actor": "Lr-actor",
    "lr_critic": "Lr-critic",
    "epsilon": "Epsilon",
    "noise_rate": "Noise-rate",
    "gamma": "Gamma",
}


def _add_run_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", default=None, help="Flat YAML file keyed by hyperparameter names.")
    parser.add_argument("--scenario", choices=sorted(SCENARIO_IDS), default=None)
    parser.add_argument("--algo", choices=ALGORITHMS, default=None)
    parser.add_argument("--mixer", choices=MIXER_KINDS, default=None)
    parser.add_argument("--sharing", choices=["own-critics", "simulate-with-own"], default=None)
    parser.add_argument("--staged-watershed", type=int, default=None)
    parser.add_argument("--time-steps", type=int, default=None)
    parser.add_argument("--seed", type=int, default=None)
    parser.add_argument("--out", default=None)
    parser.add_argument("--eval-every", type=int, default=None)
    parser.add_argument("--eval-episodes", type=int, default=None)
    parser.add_argument("--scale", choices=["full", "desk"], default=None)
    parser.add_argument("--wall-clock", action="store_true", default=None, help="Record measured seconds per row.")
    hp = parser.add_argument_group("hyperparameters", "Override the preset and the config file.")
    hp.add_argument("--max-episode-len", type=int, default=None)
    hp.add_argument("--batch-size", type=int, default=None)
    hp.add_argument("--seq-length", type=int, default=None)
    hp.add_argument("--lr-actor", type=float, default=None)
    hp.add_argument("--lr-critic", type=float, default=None)
    hp.add_argument("--epsilon", type=float, default=None)
    hp.add_argument("--noise-rate", type=float, default=None)
    hp.add_argument("--gamma", type=float, default=None)


def run_overrides(args: argparse.Namespace) -> Dict[str, Any]:
    return {key: getattr(args, dest, None) for dest, key in _RUN_FLAGS.items()}


def _resolve(args: argparse.Namespace):
    overrides = run_overrides(args)
    if overrides["out"] is None and args.config is None:
        overrides["out"] = os.path.join(get_settings().runs_root, "default")
    return load_config(args.config, overrides)


def cmd_train(args: argparse.Namespace) -> int:
    artifacts = train(_resolve(args))
    print(json.dumps(artifacts.model_dump(exclude={"rows"}), indent=2))
    return 0


def cmd_eval(args: argparse.Namespace) -> int:
    result = evaluate(args.checkpoint, args.scenario, args.episodes, args.seed)
    print(json.dumps(result.model_dump(), indent=2))
    return 0


def cmd_plot(args: argparse.Namespace) -> int:
    print(emit_plot(args.metrics, args.out, labels=args.label or None))
    return 0


def cmd_verify(args: argparse.Namespace) -> int:
    reports = run_suites(args.suite, perturb=args.perturb_gradient)
    payload = json.dumps([report.model_dump() for report in reports], indent=2)
    if args.report:
        with open(args.report, "w") as f:
            f.write(payload + "\n")
    print(payload)
    failed = [report.suite for report in reports if not report.passed]
    if failed:
        logger.error(f"Verification failed: {failed}")
        return 1
    return 0


def cmd_sweep(args: argparse.Namespace) -> int:
    base = _resolve(args)
    algos = args.algos or [base.algo]
    results = sweep(base, algos, args.seeds, workers=args.workers)
    print(json.dumps([a.model_dump(exclude={"rows"}) for a in results], indent=2))
    return 0


def build_parser() -> argparse.ArgumentParser:
    settings = get_settings()
    parser = argparse.ArgumentParser(prog="marl-avoidance", description="Multi-agent obstacle-avoidance workbench")
    parser.add_argument("--verbose", action="store_true", default=settings.verbose)
    parser.add_argument("--verbose-level", default=settings.log_level)
    sub = parser.add_subparsers(dest="command", required=True)

    tr = sub.add_parser("train", help="Train one run and write metrics, config and checkpoint")
    _add_run_arguments(tr)
    tr.set_defaults(func=cmd_train)

    ev = sub.add_parser("eval", help="Evaluate a checkpoint with noise-free actors")
    ev.add_argument("--checkpoint", required=True)
    ev.add_argument("--scenario", choices=sorted(SCENARIO_IDS), required=True)
    ev.add_argument("--episodes", type=int, default=10)
    ev.add_argument("--seed", type=int, default=0)
    ev.set_defaults(func=cmd_eval)

    pl = sub.add_parser("plot", help="Render mean-return curves from metrics files")
    pl.add_argument("metrics", nargs="+")
    pl.add_argument("--out", default=CURVES_NAME)
    pl.add_argument("--label", action="append", default=None, help="Legend entry; repeat once per file.")
    pl.set_defaults(func=cmd_plot)

    ve = sub.add_parser("verify", help="Run verification suites; exit status 1 on failure")
    ve.add_argument("--suite", choices=list(SUITES) + ["all"], default="all")
    ve.add_argument(
        "--perturb-gradient",
        type=float,
        nargs="?",
        const=1e-2,
        default=0.0,
        help="Add this offset to analytic gradients (negative control).",
    )
    ve.add_argument("--report", default=None, help="Also write the JSON report here.")
    ve.set_defaults(func=cmd_verify)

    sw = sub.add_parser("sweep", help="Launch independent runs over algorithms and seeds")
    _add_run_arguments(sw)
    sw.add_argument("--algos", nargs="+", choices=ALGORITHMS, default=None)
    sw.add_argument("--seeds", nargs="+", type=int, default=[0])
    sw.add_argument("--workers", type=int, default=None)
    sw.set_defaults(func=cmd_sweep)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    setup_logging(args.verbose, args.verbose_level)
    try:
        return args.func(args)
    except MarlError as e:
        logger.error(f"{type(e).__name__}: {e}")
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
