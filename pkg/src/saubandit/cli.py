"""Command-line entry point: ``saubandit {run,compare,prop-check,reproduce}``.

Exit codes: 0 success, 1 runtime failure (or a failed check), 2 config error.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import logging
import os
import sys
from importlib import resources

import numpy as np

from saubandit import checks
from saubandit.config import PRESETS, ConfigError, RunConfig, load_config, parse_config, validate
from saubandit.harness import (
    aggregate,
    atomic_write,
    ranking,
    ranking_csv,
    run_policy,
    summary_csv,
    summary_json,
)
from saubandit.rng import RngStream

log = logging.getLogger("saubandit")

EXIT_OK, EXIT_RUNTIME, EXIT_CONFIG = 0, 1, 2


def preset_text(name: str) -> str:
    if name not in PRESETS:
        raise ConfigError(f"unknown preset; choose from {', '.join(PRESETS)}", "--preset")
    return resources.files("saubandit.presets").joinpath(f"{name}.ini").read_text(encoding="utf-8")


def load_preset(name: str) -> RunConfig:
    return parse_config(preset_text(name), base_dir=os.getcwd())


def _u64(text: str) -> int:
    value = int(text, 0)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return value


def _positive(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return value


def resolve_config(args) -> RunConfig:
    if args.config and args.preset:
        raise ConfigError("give either --config or --preset, not both", "--config")
    if args.config:
        cfg = load_config(args.config)
    elif args.preset:
        cfg = load_preset(args.preset)
    else:
        raise ConfigError("a --config or --preset is required", "--config")
    changes = {}
    if args.seed is not None:
        changes["seed"] = args.seed
    if getattr(args, "trials", None) is not None:
        changes["trials"] = args.trials
    if getattr(args, "horizon", None) is not None:
        changes["horizon"] = args.horizon
    if getattr(args, "data", None):
        if cfg.env.kind != "dataset":
            raise ConfigError("--data only applies to dataset environments", "--data")
        env = dataclasses.replace(cfg.env, params={**cfg.env.params, "source": os.path.abspath(args.data)})
        changes["env"] = env
    if changes:
        cfg = dataclasses.replace(cfg, **changes)
        validate(cfg)
    return cfg


def execute(cfg: RunConfig, out_dir: str, jobs: int = 1, policies=None, with_ranking: bool = False, progress=False):
    """Run the selected policies and write their artifacts; returns the summaries."""
    specs = cfg.policies if policies is None else policies
    echo = cfg.to_dict()
    summaries = []
    for spec in specs:
        log.info("running %s on %s (%d trials x %d steps)", spec.name, cfg.env.label, cfg.trials, cfg.horizon)
        trace = run_policy(cfg, spec, jobs=jobs, progress=progress)
        summary = aggregate([trace])
        stem = os.path.join(out_dir, f"{cfg.name}__{spec.name}")
        atomic_write(stem + ".csv", summary_csv(summary))
        atomic_write(stem + ".json", summary_json(summary, echo))
        summaries.append(summary)
    if with_ranking:
        rows = ranking(summaries)
        atomic_write(os.path.join(out_dir, f"{cfg.name}__ranking.csv"), ranking_csv(rows))
        for rank, name, mean, sem in rows:
            sem_text = "" if sem is None else f" +/- {sem:.4g}"
            print(f"{rank:>3}  {name:<24} {mean:.6g}{sem_text}")
    return summaries


def cmd_run(args) -> int:
    cfg = resolve_config(args)
    specs = cfg.policies
    if args.policy:
        specs = tuple(p for p in cfg.policies if p.name == args.policy)
        if not specs:
            raise ConfigError("no such policy section", f"policy.{args.policy}")
    elif len(specs) > 1:
        raise ConfigError("config lists several policies; pick one with --policy or use compare", "policy")
    out = args.out or cfg.output or "results"
    execute(cfg, out, args.jobs, specs, progress=args.verbose)
    return EXIT_OK


def cmd_compare(args) -> int:
    cfg = resolve_config(args)
    out = args.out or cfg.output or "results"
    execute(cfg, out, args.jobs, with_ranking=True, progress=args.verbose)
    return EXIT_OK


def cmd_reproduce(args) -> int:
    if args.preset is None and args.name is None:
        raise ConfigError(f"name a preset: {', '.join(PRESETS)}", "--preset")
    args.preset = args.preset or args.name
    args.config = None
    return cmd_compare(args)


def _read_curve(path: str) -> np.ndarray:
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.DictReader(fh))
    if not rows or "mean_cum_regret" not in rows[0]:
        raise ConfigError("curve file needs a mean_cum_regret column", "--curve")
    return np.array([float(r["mean_cum_regret"]) for r in rows])


def cmd_prop_check(args) -> int:
    seed = 0 if args.seed is None else args.seed
    which = args.which
    try:
        if which == "log-regret":
            if args.curve:
                curve = _read_curve(args.curve)
            else:
                args.preset = args.preset or "appendixA-bernoulli"
                cfg = resolve_config(args)
                spec = cfg.policies[0] if not args.policy else next(
                    (p for p in cfg.policies if p.name == args.policy), None
                )
                if spec is None:
                    raise ConfigError("no such policy section", f"policy.{args.policy}")
                curve = aggregate([run_policy(cfg, spec, jobs=args.jobs)]).mean
            report = checks.check_log_regret(curve, args.burn_in)
        else:
            kwargs = {"rng": RngStream(seed, 0, f"prop-check/{which}")}
            if which == "4":
                if args.design:
                    kwargs["design"] = np.loadtxt(args.design, delimiter=",", ndmin=2)
                for key in ("sigma2", "redraws", "n_a", "p"):
                    if getattr(args, key) is not None:
                        kwargs[key] = getattr(args, key)
            else:
                for key in ("n_a", "trials", "mu"):
                    if getattr(args, key) is not None:
                        kwargs[key] = getattr(args, key)
            report = checks.CHECKS[which](**kwargs)
    except (np.linalg.LinAlgError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        print(json.dumps({"check": which, "passed": False, "error": str(exc)}, indent=2))
        return EXIT_RUNTIME
    text = json.dumps(report.to_dict(), indent=2, sort_keys=True)
    print(text)
    if args.out:
        atomic_write(os.path.join(args.out, f"prop-check-{which}.json"), text + "\n")
    return EXIT_OK if report.passed else EXIT_RUNTIME


def _add_common(p: argparse.ArgumentParser, trials=True) -> None:
    p.add_argument("--config", help="INI run configuration")
    p.add_argument("--preset", choices=PRESETS, help="bundled configuration")
    p.add_argument("--seed", type=_u64, help="override the master seed")
    p.add_argument("--out", help="output directory (default: [run] output or ./results)")
    p.add_argument("--jobs", type=_positive, default=1, help="worker processes for trials")
    if trials:
        p.add_argument("--trials", type=_positive, help="override the trial count")
        p.add_argument("--horizon", type=_positive, help="override the horizon")
        p.add_argument("--data", help="local CSV for a dataset environment")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="saubandit", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true", help="step counter and progress on stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run one policy and write its regret curve")
    _add_common(p)
    p.add_argument("--policy", help="policy section to run when the config lists several")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("compare", help="run every policy in a config and rank them")
    _add_common(p)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("reproduce", help="run a bundled preset")
    p.add_argument("name", nargs="?", choices=PRESETS)
    _add_common(p)
    p.set_defaults(func=cmd_reproduce)

    p = sub.add_parser("prop-check", help="Monte-Carlo residual checks and the log-regret fit")
    p.add_argument("which", choices=("1", "2", "4", "tau-convergence", "tau-concentration", "log-regret"))
    _add_common(p)
    p.add_argument("--n-a", dest="n_a", type=_positive)
    p.add_argument("--mu", type=float)
    p.add_argument("--sigma2", type=float)
    p.add_argument("--p", type=_positive)
    p.add_argument("--redraws", type=_positive)
    p.add_argument("--design", help="CSV design matrix for check 4")
    p.add_argument("--curve", help="regret CSV for log-regret")
    p.add_argument("--burn-in", dest="burn_in", type=int)
    p.add_argument("--policy", help="policy to simulate for log-regret")
    p.set_defaults(func=cmd_prop_check)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    if args.command == "prop-check" and args.which == "tau-concentration" and args.n_a:
        parser.error("tau-concentration takes no --n-a")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:  # noqa: BLE001 - the CLI reports every runtime failure the same way
        log.debug("runtime failure", exc_info=True)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
