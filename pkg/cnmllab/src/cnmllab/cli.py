"""
cnml-lab <predict|lip|project|risk|verify|reproduce> [--config PATH] [--seed N] [--out DIR] [--only A,B] [--log-level L]

Exit codes: 0 success, 1 computational or verification failure, 2 usage or configuration error.
"""
from __future__ import annotations
import argparse
import logging
import os
import sys
from typing import Callable, Dict, List, Optional, Sequence

from dotenv import load_dotenv

# - own - #
from cnmllab.adapters.config import ExperimentConfig, load_config, reproduction_defaults
from cnmllab.adapters.writers import OutputDir
from cnmllab.checks.suite import run_suite
from cnmllab.domain.errors import CnmlError, ConfigError, ContractError, DomainError
from cnmllab.domain.tags import RegretFlavor
from cnmllab.experiments.reproduce import run_reproduction, write_reproduction
from cnmllab.measures.info_measures import risk_curve
from cnmllab.optim.simplex import bayes_project, fit_lip
from cnmllab.predictors.bayes import bayes_predictive
from cnmllab.predictors.cnml import cnml1, cnml2, cnml3, nml, regret_table

logger = logging.getLogger("cnmllab")

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_USAGE = 2

LOG_LEVEL_ENV = "CNMLLAB_LOG_LEVEL"
PROJECTION_TARGETS = {"cnml1": cnml1, "cnml2": cnml2, "cnml3": cnml3}


def _progress() -> bool:
    return sys.stderr.isatty()


def _config(args, required: bool = True) -> ExperimentConfig:
    if args.config is None:
        if required:
            raise ConfigError(f"'{args.command}' needs --config")
        cfg = reproduction_defaults()
    else:
        cfg = load_config(args.config)
    return cfg.with_seed(args.seed)


def _out(args, cfg: ExperimentConfig) -> OutputDir:
    return OutputDir(args.out or cfg.output_dir)


# ---------- commands ----------

def cmd_predict(args) -> int:
    cfg = _config(args)
    out = _out(args, cfg)
    grid = cfg.build_grid() if cfg.grid is not None else None
    model = cfg.build_model(grid)
    tables = [cnml1(model), cnml2(model), cnml3(model)]
    for flavor, table in zip(RegretFlavor, tables):
        out.write_table(table)
        out.write_regret(f"regret_{table.name}.csv", table, regret_table(flavor, model, table))
    out.write_table(nml(model.with_sizes(N=0)))

    if cfg.bayes_priors:
        if grid is None:
            raise ConfigError("bayes_priors need a 'grid'")
        for name, prior in cfg.build_priors(grid).items():
            out.write_table(bayes_predictive(prior, model, name=f"bayes_{name}"))
    return EXIT_OK


def _fit_outputs(out: OutputDir, stem: str, prior, report) -> int:
    out.write_prior(f"{stem}_prior.csv", prior)
    out.write_json(f"{stem}_report.json", report.to_json())
    if not report.converged:
        logger.error("%s did not converge: gap %.3e > %.1e", stem, report.gap_nats, report.tolerance)
        return EXIT_FAILED
    return EXIT_OK


def cmd_lip(args) -> int:
    cfg = _config(args)
    grid = cfg.build_grid()
    model = cfg.build_model(grid)
    prior, report = fit_lip(model, grid, cfg.optimizer.build())
    return _fit_outputs(_out(args, cfg), "lip", prior, report)


def cmd_project(args) -> int:
    cfg = _config(args)
    grid = cfg.build_grid()
    model = cfg.build_model(grid)
    q = PROJECTION_TARGETS[args.target](model)
    prior, report = bayes_project(q, model, grid, cfg.optimizer.build())
    return _fit_outputs(_out(args, cfg), f"project_{args.target}", prior, report)


def cmd_risk(args) -> int:
    cfg = _config(args)
    out = _out(args, cfg)
    grid = cfg.build_grid()
    model = cfg.build_model(grid)
    tables = [cnml1(model), cnml2(model), cnml3(model)]
    tables += [bayes_predictive(p, model, name=f"bayes_{n}") for n, p in cfg.build_priors(grid).items()]
    for table in tables:
        out.write_risk_curve(risk_curve(table, model, grid))
    return EXIT_OK


def cmd_verify(args) -> int:
    cfg = _config(args, required=False)
    out = _out(args, cfg)
    settings = cfg.suite_settings()
    reports = run_suite(settings, args.only, progress=_progress())
    passed = all(r.passed for r in reports)
    out.write_json("verify.json", {
        "seed": settings.seed,
        "samples": settings.samples,
        "passed": passed,
        "reports": [r.to_json() for r in reports],
    })
    for r in reports:
        if not r.passed:
            logger.error("FAILED %s: statistic %r, reference %r, tolerance %r (%s)",
                         r.name, r.statistic, r.reference, r.tolerance, r.detail)
    return EXIT_OK if passed else EXIT_FAILED


def cmd_reproduce(args) -> int:
    cfg = _config(args, required=False)
    out = _out(args, cfg)
    grid = cfg.build_grid()
    model = cfg.build_model(grid)
    runs = run_reproduction(model, grid, cfg.sizes(), cfg.optimizer.build(), progress=_progress())
    summary = write_reproduction(out, runs)
    if not summary["converged"]:
        logger.error("an optimizer did not converge; see reproduce_summary.json")
        return EXIT_FAILED
    return EXIT_OK


COMMANDS: Dict[str, Callable[[argparse.Namespace], int]] = {
    "predict": cmd_predict,
    "lip": cmd_lip,
    "project": cmd_project,
    "risk": cmd_risk,
    "verify": cmd_verify,
    "reproduce": cmd_reproduce,
}


# ---------- entry point ----------

def _names(text: str) -> List[str]:
    names = [t.strip() for t in text.split(",") if t.strip()]
    if not names:
        raise argparse.ArgumentTypeError("expected a comma-separated list of check names")
    return names


def _seed(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"seed must be an integer, got {text!r}") from None
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must lie in [0, 2^64)")
    return v


class _Parser(argparse.ArgumentParser):
    """Raises instead of exiting so main can map usage errors to its own exit code."""

    def error(self, message):
        raise ConfigError(message)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="experiment config (JSON)")
    common.add_argument("--seed", type=_seed, help="global seed, overrides the config")
    common.add_argument("--out", help="output directory, overrides the config")
    common.add_argument("--log-level", help=f"logging level; default from ${LOG_LEVEL_ENV} or WARNING")

    parser = _Parser(prog="cnml-lab", description="Conditional NML predictors, latent information priors and Bayes projections.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    sub.add_parser("predict", parents=[common], help="write CNML1/2/3, NML and Bayes tables")
    sub.add_parser("lip", parents=[common], help="fit the latent information prior")
    project = sub.add_parser("project", parents=[common], help="Bayes projection of a CNML table")
    project.add_argument("--target", choices=sorted(PROJECTION_TARGETS), default="cnml3")
    sub.add_parser("risk", parents=[common], help="KL risk curves over the grid")
    verify = sub.add_parser("verify", parents=[common], help="run the verification suite")
    verify.add_argument("--only", type=_names, help="comma-separated check families or names")
    sub.add_parser("reproduce", parents=[common], help="risk comparison of CNML3, BPCNML3 and BPDLIP over M")
    return parser


def _configure_logging(level: Optional[str]) -> None:
    name = (level or os.environ.get(LOG_LEVEL_ENV) or "WARNING").upper()
    numeric = logging.getLevelName(name)
    if not isinstance(numeric, int):
        raise ConfigError(f"unknown log level {name!r}")
    logging.basicConfig(
        level=numeric,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )


def main(argv: Optional[Sequence[str]] = None) -> int:
    load_dotenv()
    try:
        args = build_parser().parse_args(argv)
        _configure_logging(args.log_level)
        return COMMANDS[args.command](args)
    except (ConfigError, ContractError, DomainError, OSError) as e:
        logger.error("%s", e)
        return EXIT_USAGE
    except CnmlError as e:
        logger.error("%s: %s", type(e).__name__, e)
        return EXIT_FAILED


if __name__ == "__main__":
    sys.exit(main())
