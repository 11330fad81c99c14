"""Command-line interface.

Exit codes: 0 success, 1 verification failure, 2 usage or configuration
error, 3 numerical-accuracy failure (cutoff or quadrature too small).
"""

from __future__ import annotations

import argparse
import contextlib
import csv
import io
import json
import sys
from pathlib import Path

from . import analytics
from .config import CONFIG_ENV, ConfigError, RunConfig, load_config
from .curves import curve_to_csv, curve_to_json, curve_to_svg, fig1_curve
from .errors import CutoffTooSmall, DomainError, GridTooCoarse, NoRoot

EXIT_OK, EXIT_VERIFY, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2, 3

SIGMA_HELP = ("sigma is the noise VARIANCE <|z|^2> of the random displacement, with vacuum noise = 1/2 "
              "(not a standard deviation: F = 1/(1+sigma) holds only for the variance)")

DB_NOTE = ("dB = -10 log10(sigma_eta) with sigma_eta = exp(-2 atanh eta) = exp(-2r), i.e. 20 r / ln 10; "
           "sigma_eta is treated as the squeezed-quadrature noise ratio")


class UsageError(Exception):
    pass


def _dump_json(payload) -> str:
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def _emit(text: str, path: str | None):
    if path:
        Path(path).write_text(text)
    else:
        sys.stdout.write(text)


@contextlib.contextmanager
def _reduction_order(deterministic: bool):
    """Single-threaded BLAS so floating-point reductions run in a fixed order."""
    if not deterministic:
        yield
        return
    from threadpoolctl import threadpool_limits

    with threadpool_limits(limits=1):
        yield


def cmd_fig1(args, config: RunConfig) -> int:
    points = fig1_curve(args.alpha, args.sigma_max, args.steps, config)
    meta = {"alpha": args.alpha, "beta": -args.alpha, "sigma_max": args.sigma_max, "steps": args.steps,
            "cutoff_two_mode": config.cutoff_two_mode, "gh_order": config.gh_order,
            "sigma_convention": "variance, vacuum = 1/2"}
    if config.output_format == "json":
        text = curve_to_json(points, meta)
    else:
        text = curve_to_csv(points)
    _emit(text, config.output_path)
    if args.svg:
        Path(args.svg).write_text(curve_to_svg(points, title=f"alpha = {args.alpha:g}"))
    return EXIT_OK


def noise_budget_report(sigma_G: float, eta: float, nu: float, sigma_other: float) -> dict:
    budget = analytics.NoiseBudget.from_physical(sigma_G, eta, nu, sigma_other)
    total = budget.total()
    fidelity = analytics.coherent_entanglement_fidelity(total)
    notes = []
    if eta == 0:
        notes.append("no squeezing: sigma_eta = 1, two units of vacuum noise (quantum duty, 'quduty')")
    report = {
        "inputs": {"sigma_G": sigma_G, "eta": eta, "nu": nu, "sigma_other": sigma_other},
        "components": {"sigma_G": budget.sigma_G, "sigma_eta": budget.sigma_eta,
                       "sigma_nu": budget.sigma_nu, "sigma_other": budget.sigma_other},
        "total": total,
        "coherent_fidelity": fidelity,
        "thresholds": {
            "F>1/2": {"pass": analytics.passes_threshold(total, analytics.THRESHOLD_ENTANGLEMENT),
                      "requires": "sigma < 1"},
            "F>2/3": {"pass": analytics.passes_threshold(total, analytics.THRESHOLD_NO_CLONING),
                      "requires": "sigma < 1/2"},
        },
        "squeezing_db": analytics.squeezing_db(budget.sigma_eta),
        "db_convention": DB_NOTE,
        "notes": notes,
    }
    return report


def cmd_noise_budget(args, config: RunConfig) -> int:
    try:
        report = noise_budget_report(args.sigma_G, args.eta, args.nu, args.sigma_other)
    except DomainError as exc:
        raise UsageError(str(exc)) from None
    _emit(_dump_json(report), config.output_path)
    return EXIT_OK


def required_squeezing_report(alpha: float, target: float) -> dict:
    spec = analytics.ECSSpec.symmetric(alpha)
    sigma = analytics.required_sigma_for_ecs_fidelity(spec, target)
    report = {"alpha": alpha, "beta": -alpha, "target_fe": target, "sigma": sigma,
              "convention": DB_NOTE}
    if sigma <= 1.0:
        report["dB"] = analytics.squeezing_db(sigma)
        report["eta"] = analytics.eta_from_sigma(sigma)
    else:
        report["dB"] = None
        report["note"] = "sigma exceeds the unsqueezed value 1; no squeezing needed"
    if sigma < 1e-3:
        report["note"] = "very small sigma: the target is barely attainable"
    return report


def cmd_required_squeezing(args, config: RunConfig) -> int:
    try:
        report = required_squeezing_report(args.alpha, args.target_fe)
    except NoRoot as exc:
        _emit(_dump_json({"alpha": args.alpha, "target_fe": args.target_fe, "error": "NoRoot",
                          "message": str(exc)}), config.output_path)
        return EXIT_USAGE
    except DomainError as exc:
        raise UsageError(str(exc)) from None
    _emit(_dump_json(report), config.output_path)
    return EXIT_OK


def cmd_verify(args, config: RunConfig) -> int:
    from .verify import run_suite

    results = run_suite(config, args.check or None)
    failed = [r.name for r in results if not r.passed]
    if config.output_format == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        timed = not config.deterministic_reduction
        writer.writerow(["check", "passed", "detail"] + (["seconds"] if timed else []))
        for r in results:
            writer.writerow([r.name, str(r.passed).lower(), r.detail] + ([f"{r.seconds:.3f}"] if timed else []))
        text = buf.getvalue()
    else:
        payload = {"passed": not failed, "failed": failed, "checks": [r.as_dict() for r in results]}
        if config.deterministic_reduction:
            for check in payload["checks"]:
                check.pop("seconds")
        text = json.dumps(payload, indent=2, sort_keys=True, default=float) + "\n"
    _emit(text, config.output_path)
    for r in results:
        print(f"{'PASS' if r.passed else 'FAIL'} {r.name}: {r.detail}", file=sys.stderr)
    return EXIT_OK if not failed else EXIT_VERIFY


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", help="output file (default stdout)")
    common.add_argument("--format", choices=("csv", "json"), help="output format")
    common.add_argument("--config", help=f"key=value config file (default ${CONFIG_ENV})")
    common.add_argument("--deterministic", action="store_true",
                        help="single-threaded reductions for byte-identical output")
    common.add_argument("--cutoff", type=int, help="single-mode Fock cutoff")
    common.add_argument("--cutoff-two-mode", type=int, help="per-mode cutoff for two-mode brute force")
    common.add_argument("--gh-order", type=int, help="Gauss-Hermite points per axis")

    parser = argparse.ArgumentParser(
        prog="cvtelefid",
        description="Fidelities of noisy continuous-variable teleportation. " + SIGMA_HELP,
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fig1", parents=[common], help="fidelity curves for |alpha> and the ECS",
                       description="Entanglement fidelity versus noise for a coherent state and the ECS "
                                   "|Psi(alpha,-alpha)>. " + SIGMA_HELP)
    p.add_argument("--alpha", type=float, default=2.0)
    p.add_argument("--sigma-max", type=float, default=1.0)
    p.add_argument("--steps", type=int, default=101)
    p.add_argument("--svg", help="also write an SVG line chart here")
    p.set_defaults(func=cmd_fig1)

    p = sub.add_parser("noise-budget", parents=[common], help="sum the noise variances and test thresholds",
                       description="Total noise sigma = sigma_G + sigma_eta + sigma_nu + sigma_other. " + SIGMA_HELP)
    p.add_argument("--sigma-G", type=float, default=0.0, dest="sigma_G", help="amplification noise variance")
    p.add_argument("--eta", type=float, default=0.0, help="squeezing parameter in [0, 1)")
    p.add_argument("--nu", type=float, default=1.0, help="homodyne efficiency in (0, 1]")
    p.add_argument("--sigma-other", type=float, default=0.0, help="other Gaussian noise variance")
    p.set_defaults(func=cmd_noise_budget)

    p = sub.add_parser("verify", parents=[common], help="run the verification suite")
    p.add_argument("--check", action="append", help="run only this check (repeatable)")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("required-squeezing", parents=[common],
                       help="noise variance and squeezing keeping the ECS fidelity at a target")
    p.add_argument("--alpha", type=float, default=2.0)
    p.add_argument("--target-fe", type=float, default=0.5)
    p.set_defaults(func=cmd_required_squeezing)
    return parser


def resolve_config(args) -> RunConfig:
    config = load_config(args.config)
    fmt = args.format
    if fmt is None and args.command in ("noise-budget", "required-squeezing"):
        fmt = "json"
    return config.updated(
        output_format=fmt,
        output_path=args.out,
        cutoff=args.cutoff,
        cutoff_two_mode=args.cutoff_two_mode,
        gh_order=args.gh_order,
        deterministic_reduction=True if args.deterministic else None,
    )


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        config = resolve_config(args)
        with _reduction_order(config.deterministic_reduction):
            return args.func(args, config)
    except (ConfigError, UsageError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (CutoffTooSmall, GridTooCoarse) as exc:
        print(f"numerical accuracy failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
