"""Command-line entry point.

Four commands: ``analyze`` runs every configured method and writes the JSON
report, plot data, and traces; ``oracle`` is the same pipeline with MCMC
forced off (conjugate results only, fast); ``simulate`` runs one of the
pitfall demonstrations; ``version`` prints the package version.

Exit codes: 0 on success, 1 on any handled error (bad config, unreadable
data, invalid values), 2 when MCMC ran but failed its convergence checks.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

from . import __version__
from .bayes import PRIOR_PRESETS
from .config import load_observations, parse_config_file
from .core import pooled_counts
from .errors import AssessmentError, ConfigError
from .fsio import atomic_write_text
from .reporting import run_analysis
from .simulations import (
    optional_stopping_fpr,
    prior_sensitivity_sweep,
    stopping_comparison,
)

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_NONCONVERGENCE = 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="paircompare",
        description="Assess whether one system really outperforms another "
                    "on shared items, with frequentist and Bayesian methods.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def with_config(p: argparse.ArgumentParser) -> None:
        p.add_argument("--config", required=True, metavar="FILE",
                       help="analysis config file")
        p.add_argument("--seed", type=int, default=None, metavar="N",
                       help="override analysis.seed")
        p.add_argument("--set", dest="overrides", action="append", default=[],
                       metavar="SECTION.KEY=VALUE",
                       help="override any config key (repeatable)")

    with_config(sub.add_parser(
        "analyze", help="run the configured methods and write the report"))
    with_config(sub.add_parser(
        "oracle", help="analyze with MCMC disabled: exact conjugate results only"))

    simulate = sub.add_parser("simulate", help="run a pitfall demonstration")
    sim_sub = simulate.add_subparsers(dest="simulation", required=True)
    with_config(sim_sub.add_parser(
        "stopping", help="same counts, two stopping intentions, two p-values"))
    with_config(sim_sub.add_parser(
        "optional-stopping", help="false-positive rate when testing at every look"))
    with_config(sim_sub.add_parser(
        "prior-sweep", help="Bayes factor and HDI under each prior preset"))

    sub.add_parser("version", help="print the package version")
    return parser


def _collect_overrides(args: argparse.Namespace) -> dict[str, str]:
    overrides: dict[str, str] = {}
    for item in args.overrides:
        key, sep, value = item.partition("=")
        key = key.strip()
        if not sep or "." not in key:
            raise ConfigError(f"--set expects SECTION.KEY=VALUE, got {item!r}")
        overrides[key] = value.strip()
    if args.seed is not None:
        overrides["analysis.seed"] = str(args.seed)
    return overrides


def _cmd_analyze(args: argparse.Namespace, conjugate_only: bool) -> int:
    config = parse_config_file(args.config, _collect_overrides(args))
    if conjugate_only:
        config = replace(config, mcmc=replace(config.mcmc, enabled=False))
    outcome = run_analysis(config)
    for name, decision in outcome.report.decisions.items():
        print(f"{name}: {decision['value']}")
    print(f"report written to {outcome.report_path}")
    trace = outcome.trace
    if trace is not None and not trace.converged:
        for warning in trace.warnings:
            print(f"warning: {warning}", file=sys.stderr)
        print("MCMC did not converge; treat the report's mcmc block as suspect",
              file=sys.stderr)
        return EXIT_NONCONVERGENCE
    return EXIT_OK


def _effective_counts(config):
    obs = load_observations(config)
    if len(obs.datasets) > 1:
        raise ConfigError(
            "several datasets need pool = true; analyze them separately otherwise",
            section="data", key="pool")
    return pooled_counts(obs)


def _cmd_simulate(args: argparse.Namespace) -> int:
    config = parse_config_file(args.config, _collect_overrides(args))
    sim = config.simulate
    seed = config.analysis.seed
    out_dir = Path(config.output.sim_dir)

    if args.simulation == "stopping":
        result = stopping_comparison(
            sim.stopping_successes, sim.stopping_trials, sim.stopping_null_rate)
        payload = {
            "simulation": "stopping",
            "successes": result.successes,
            "trials": result.trials,
            "null_rate": result.null_rate,
            "fixed_trials_pvalue": result.fixed_trials_pvalue,
            "fixed_successes_pvalue": result.fixed_successes_pvalue,
            "gap": result.gap,
        }
        path = _write_json(out_dir / "stopping.json", payload)
        print(f"fixed-trials intention: p = {result.fixed_trials_pvalue:.6f}")
        print(f"fixed-successes intention: p = {result.fixed_successes_pvalue:.6f}")
        print(f"same data, p-value gap = {result.gap:.6f}")

    elif args.simulation == "optional-stopping":
        looks = range(sim.looks_step, sim.looks_max + 1, sim.looks_step)
        report = optional_stopping_fpr(
            looks, sim.os_theta, sim.os_alpha, sim.os_trials, seed)
        payload = {
            "simulation": "optional_stopping",
            "looks": list(report.looks),
            "theta": report.theta,
            "nominal_alpha": report.nominal_alpha,
            "trials": report.trials,
            "false_positives": report.false_positives,
            "false_positive_rate": report.false_positive_rate,
            "first_rejection_counts": list(report.first_rejection_counts),
            "master_seed": report.master_seed,
        }
        path = _write_json(out_dir / "optional_stopping.json", payload)
        print(f"{len(report.looks)} looks up to n = {report.looks[-1]}: "
              f"false-positive rate {report.false_positive_rate:.4f} "
              f"at nominal alpha = {report.nominal_alpha:g}")

    else:
        counts = _effective_counts(config)
        rows = prior_sensitivity_sweep(
            counts, PRIOR_PRESETS, sim.sweep_epsilon, sim.sweep_n_mc, seed,
            config.analysis.hdi_mass)
        payload = {
            "simulation": "prior_sweep",
            "counts": [list(pair) for pair in counts],
            "epsilon": sim.sweep_epsilon,
            "n_mc": sim.sweep_n_mc,
            "master_seed": seed,
            "rows": [
                {
                    "label": row.label,
                    "prior": {"alpha": row.prior.alpha, "beta": row.prior.beta},
                    "bf01": row.bf01,
                    "hdi": {"lower": row.hdi.lower, "upper": row.hdi.upper,
                            "mass": row.hdi.mass, "width": row.hdi.width},
                    "posterior_mean_diff": row.posterior_mean_diff,
                }
                for row in rows
            ],
        }
        path = _write_json(out_dir / "prior_sweep.json", payload)
        for row in rows:
            print(f"{row.label}: bf01 = {row.bf01:.4f}, "
                  f"hdi = [{row.hdi.lower:.5f}, {row.hdi.upper:.5f}]")

    print(f"written to {path}")
    return EXIT_OK


def _write_json(path: Path, payload: dict) -> Path:
    return atomic_write_text(path, json.dumps(payload, indent=2, allow_nan=False) + "\n")


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "version":
            print(f"paircompare {__version__}")
            return EXIT_OK
        if args.command == "analyze":
            return _cmd_analyze(args, conjugate_only=False)
        if args.command == "oracle":
            return _cmd_analyze(args, conjugate_only=True)
        return _cmd_simulate(args)
    except AssessmentError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
