"""Command-line surface: inspect, pmf, cumulants, limits, verify, sweep.

Batch-oriented: every command reads flags (optionally pre-filled from a
JSON config file), runs the library, and writes CSV or JSON with the
fully resolved configuration embedded, so identical inputs produce
bitwise-identical outputs.  Exit codes: 0 ok, 2 configuration error,
3 numerical failure, 4 invariant violation; failures also emit a
machine-readable JSON object on standard error.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from pathlib import Path

import mpmath as mp

from .cumulants import (
    calibrate_constants,
    cumulants_contour,
    report_records,
    resolve_contour_config,
    statulevicius_check,
)
from .errors import ConfigError, DiluteCWError
from .exact import (
    exact_cumulants,
    kolmogorov_distance,
    log_partition_exact,
    magnetization_pmf,
    pmf_records,
    resolve_dps,
)
from .limits import DEFAULT_N_SCHEDULE, diagnostics_records, limit_diagnostics
from .params import effective_params, validate_params
from .saddle import limit_pressure
from .verify import run_profile

CALIBRATION_PILOT_N = 100
MAX_SCHEDULE_GAMMA = 2.0 / 3.0


def _parse_schedule(text: str) -> list[int]:
    values = [piece for piece in text.split(",") if piece.strip()]
    if not values:
        raise ConfigError(f"empty N schedule {text!r}")
    try:
        sizes = [int(piece) for piece in values]
    except ValueError as exc:
        raise ConfigError(f"bad N schedule {text!r}: {exc}") from None
    return sorted(set(sizes))


def _parse_p_schedule(text: str):
    """'c,gamma' -> p(N) = c * N^(-gamma) with gamma < 2/3.

    The exponent cap keeps p^3 N^2 = c^3 N^(2-3*gamma) growing, which is
    the regime the asymptotics need.
    """
    pieces = text.split(",")
    if len(pieces) != 2:
        raise ConfigError(f"p schedule must be 'c,gamma', got {text!r}")
    try:
        c, gamma = float(pieces[0]), float(pieces[1])
    except ValueError as exc:
        raise ConfigError(f"bad p schedule {text!r}: {exc}") from None
    if not c > 0.0:
        raise ConfigError(f"p schedule coefficient c = {c} must be positive")
    if not 0.0 <= gamma < MAX_SCHEDULE_GAMMA:
        raise ConfigError(
            f"p schedule exponent gamma = {gamma} outside [0, 2/3)"
        )
    return c, gamma


def _apply_config_file(args: argparse.Namespace) -> None:
    """Fill unset flags from the JSON config file (flags win)."""
    if not getattr(args, "config", None):
        return
    try:
        loaded = json.loads(Path(args.config).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config file {args.config}: {exc}") from None
    if not isinstance(loaded, dict):
        raise ConfigError(f"config file {args.config} must hold a JSON object")
    for key, value in loaded.items():
        attr = key.replace("-", "_")
        if hasattr(args, attr) and getattr(args, attr) is None:
            setattr(args, attr, value)


def _resolved_config(args: argparse.Namespace, command: str, **extra) -> dict:
    cfg = {"command": command, "precision_digits": resolve_dps(args.precision_digits)}
    for key in ("N", "p", "beta", "h0", "J", "R", "K"):
        if hasattr(args, key) and getattr(args, key) is not None:
            cfg[key] = getattr(args, key)
    cfg.update(extra)
    return cfg


def _write_output(rows, fieldnames, config, out, fmt) -> None:
    if fmt == "json":
        text = json.dumps({"config": config, "rows": rows}, indent=2, sort_keys=True)
        text += "\n"
    else:
        buf = io.StringIO()
        buf.write("# config: " + json.dumps(config, sort_keys=True) + "\n")
        writer = csv.DictWriter(buf, fieldnames=fieldnames, lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow(
                {k: ("" if row.get(k) is None else row.get(k)) for k in fieldnames}
            )
        text = buf.getvalue()
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def cmd_inspect(args) -> int:
    params = validate_params(args.N, args.p, args.beta, args.h0 or 0.0)
    eff = effective_params(params)
    fields = {
        "N": params.N,
        "p": params.p,
        "beta": params.beta,
        "h0": params.h0,
        "diluteness": params.diluteness,
        "regime_warning": int(params.regime_warning),
        "log_a": eff.log_a,
        "b": eff.b,
        "beta_eff": eff.beta_eff,
        "alpha_N": eff.alpha_N,
        "delta_N": eff.delta_N,
        "strip_halfwidth": eff.strip_halfwidth,
    }
    if args.out:
        config = _resolved_config(args, "inspect")
        _write_output([fields], list(fields), config, args.out, args.format)
    else:
        for key, value in fields.items():
            print(f"{key} = {value}")
        if params.regime_warning:
            print(
                f"warning: p^3 N^2 = {params.diluteness:g} < 10 — asymptotics "
                f"degrade in this regime"
            )
    return 0


def cmd_pmf(args) -> int:
    params = validate_params(args.N, args.p, args.beta, args.h0)
    eff = effective_params(params)
    dist = magnetization_pmf(params, eff, args.h0, dps=args.precision_digits)
    with mp.workdps(dist.dps):
        log_norm = mp.nstr(dist.log_norm, dist.dps)
    config = _resolved_config(args, "pmf", log_norm=log_norm)
    rows = pmf_records(dist)
    _write_output(rows, ["k", "M", "log_weight", "pmf"], config, args.out, args.format)
    return 0


def cmd_cumulants(args) -> int:
    params = validate_params(args.N, args.p, args.beta, args.h0)
    eff = effective_params(params)
    cfg = resolve_contour_config(
        params, eff, args.h0, args.J, R=args.R, K=args.K,
        pressure_source=args.pressure_source,
    )
    reports = cumulants_contour(params, eff, cfg, args.J, dps=args.precision_digits)
    calib = None
    if args.J >= 3:
        calib = calibrate_constants(
            args.beta,
            args.p,
            args.h0,
            pilot_N=CALIBRATION_PILOT_N,
            dps=args.precision_digits,
        )
        summary = statulevicius_check(reports, calib.R, calib.C_tilde, params.N)
        reports = list(summary.reports)
    config = _resolved_config(
        args,
        "cumulants",
        R=cfg.R,
        K=cfg.K,
        pressure_source=cfg.pressure_source,
        calibration=(
            None
            if calib is None
            else {
                "C": calib.C,
                "C_tilde": calib.C_tilde,
                "C_cauchy": calib.C_cauchy,
                "R_cauchy": calib.R_cauchy,
                "pilot_N": calib.pilot_N,
            }
        ),
    )
    rows = report_records(reports)
    _write_output(
        rows,
        ["j", "kappa_raw", "kappa_std", "bound", "margin", "method"],
        config,
        args.out,
        args.format,
    )
    return 0


def cmd_limits(args) -> int:
    schedule = (
        _parse_schedule(args.N_schedule)
        if args.N_schedule
        else list(DEFAULT_N_SCHEDULE)
    )
    calib = calibrate_constants(
        args.beta,
        args.p,
        args.h0,
        pilot_N=CALIBRATION_PILOT_N,
        dps=args.precision_digits,
    )
    suite = limit_diagnostics(
        args.beta,
        args.p,
        args.h0,
        calib,
        n_schedule=schedule,
        dps=args.precision_digits,
    )
    summary = {
        "berry_constant": suite.berry.constant,
        "berry_trend_ok": suite.berry.trend_ok,
        "mdp_trend_ok": suite.mdp.trend_ok,
        "mod_gaussian_trend_ok": suite.mod_trend_ok,
        "cramer_max_over_min": suite.cramer_max_over_min,
        "c3": suite.c3,
    }
    config = _resolved_config(
        args,
        "limits",
        N_schedule=schedule,
        calibration={
            "C": calib.C,
            "C_tilde": calib.C_tilde,
            "C_cauchy": calib.C_cauchy,
            "R_cauchy": calib.R_cauchy,
            "R": calib.R,
            "pilot_N": calib.pilot_N,
        },
        summary=summary,
    )
    rows = diagnostics_records(suite)
    _write_output(rows, ["N", "metric", "value"], config, args.out, args.format)
    return 0


def cmd_verify(args) -> int:
    results = run_profile(args.profile)
    for res in results:
        status = "PASS" if res.passed else "FAIL"
        print(f"criterion {res.number} {res.name}: {status} ({res.detail})")
    failed = [res for res in results if not res.passed]
    if args.out:
        rows = [
            {
                "number": res.number,
                "name": res.name,
                "passed": int(res.passed),
                "detail": res.detail,
                "elapsed": res.elapsed,
            }
            for res in results
        ]
        config = _resolved_config(args, "verify", profile=args.profile)
        _write_output(
            rows,
            ["number", "name", "passed", "detail", "elapsed"],
            config,
            args.out,
            args.format,
        )
    if failed:
        print(f"{len(failed)} of {len(results)} criteria failed", file=sys.stderr)
        return 4
    return 0


def cmd_sweep(args) -> int:
    if not args.N_schedule:
        raise ConfigError("sweep requires --N-schedule")
    sizes = _parse_schedule(args.N_schedule)
    p_schedule = _parse_p_schedule(args.p_schedule) if args.p_schedule else None

    def p_of(n: int) -> float:
        if p_schedule is None:
            return args.p if args.p is not None else 1.0
        c, gamma = p_schedule
        return c * n**-gamma

    rows = []
    for n in sizes:
        p = p_of(n)
        params = validate_params(n, p, args.beta, args.h0)
        eff = effective_params(params)
        dist = magnetization_pmf(params, eff, args.h0, dps=args.precision_digits)
        ec = exact_cumulants(dist, 2)
        psi = float(
            log_partition_exact(params, eff, args.h0, dps=args.precision_digits)
        ) / n
        phi_limit = limit_pressure(args.beta, args.h0).real
        metrics = {
            "beta_eff": eff.beta_eff,
            "log_a": eff.log_a,
            "strip_halfwidth": eff.strip_halfwidth,
            "diluteness": params.diluteness,
            "regime_warning": int(params.regime_warning),
            "psi_N": psi,
            "pressure_gap_times_pN": abs(psi - phi_limit) * p * n,
            "kappa1_per_N": float(ec.kappa(1)) / n,
            "kappa2_per_N": float(ec.kappa(2)) / n,
            "ks_distance": kolmogorov_distance(dist),
        }
        for metric in sorted(metrics):
            rows.append({"N": n, "p": p, "metric": metric, "value": metrics[metric]})
    config = _resolved_config(
        args,
        "sweep",
        N_schedule=sizes,
        p_schedule=args.p_schedule,
    )
    _write_output(rows, ["N", "p", "metric", "value"], config, args.out, args.format)
    return 0


def _add_common(parser: argparse.ArgumentParser, model: bool = True) -> None:
    if model:
        parser.add_argument("--N", type=int, help="number of spins")
        parser.add_argument("--p", type=float, default=None, help="edge probability")
        parser.add_argument("--beta", type=float, default=None, help="inverse temperature")
        parser.add_argument("--h0", type=float, default=None, help="external field")
    parser.add_argument(
        "--precision-digits",
        type=int,
        default=None,
        dest="precision_digits",
        help="working significant digits (default: DILUTE_CW_PRECISION or 50)",
    )
    parser.add_argument("--config", help="JSON file pre-filling any unset flag")
    parser.add_argument("--out", help="output path (default: stdout)")
    parser.add_argument(
        "--format", choices=("csv", "json"), default="csv", help="output format"
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dilutecw",
        description=(
            "Annealed dilute Curie-Weiss model: exact magnetization laws, "
            "saddle-point pressure, contour cumulants, and limit-theorem "
            "diagnostics."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_inspect = sub.add_parser("inspect", help="effective parameters and strip geometry")
    _add_common(p_inspect)
    p_inspect.set_defaults(func=cmd_inspect)

    p_pmf = sub.add_parser("pmf", help="exact magnetization distribution")
    _add_common(p_pmf)
    p_pmf.set_defaults(func=cmd_pmf)

    p_cum = sub.add_parser("cumulants", help="contour cumulants with bound margins")
    _add_common(p_cum)
    p_cum.add_argument("--J", type=int, default=None, help="highest cumulant order")
    p_cum.add_argument("--R", type=float, default=None, help="contour radius")
    p_cum.add_argument("--K", type=int, default=None, help="contour node count")
    p_cum.add_argument(
        "--pressure-source",
        choices=("exact", "asymptotic"),
        default=None,
        dest="pressure_source",
        help="pressure evaluation on the contour (default by N)",
    )
    p_cum.set_defaults(func=cmd_cumulants)

    p_lim = sub.add_parser("limits", help="limit-theorem diagnostics over an N schedule")
    _add_common(p_lim)
    p_lim.add_argument(
        "--N-schedule",
        dest="N_schedule",
        help="comma-separated sizes (default 400,1600,6400)",
    )
    p_lim.set_defaults(func=cmd_limits)

    p_ver = sub.add_parser("verify", help="run the acceptance suite")
    _add_common(p_ver, model=False)
    p_ver.add_argument(
        "--profile", choices=("quick", "full"), default="quick", help="suite size"
    )
    p_ver.set_defaults(func=cmd_verify)

    p_sweep = sub.add_parser("sweep", help="metrics over N (and optional p) schedules")
    _add_common(p_sweep)
    p_sweep.add_argument(
        "--N-schedule", dest="N_schedule", help="comma-separated sizes (required)"
    )
    p_sweep.add_argument(
        "--p-schedule",
        dest="p_schedule",
        help="c,gamma for p(N) = c*N^(-gamma), gamma < 2/3",
    )
    p_sweep.set_defaults(func=cmd_sweep)
    return parser


def _fill_model_defaults(args: argparse.Namespace) -> None:
    if hasattr(args, "p") and args.p is None and not getattr(args, "p_schedule", None):
        args.p = 1.0
    if hasattr(args, "beta") and args.beta is None:
        args.beta = 0.5
    if hasattr(args, "h0") and args.h0 is None:
        args.h0 = 0.0
    if hasattr(args, "J") and args.J is None:
        args.J = 8
    if hasattr(args, "N") and args.N is None and args.command not in ("limits", "sweep"):
        raise ConfigError(f"--N is required for {args.command}")


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        _apply_config_file(args)
        _fill_model_defaults(args)
        return args.func(args)
    except DiluteCWError as exc:
        payload = {
            "error": type(exc).__name__,
            "message": str(exc),
            "exit_code": exc.exit_code,
        }
        print(json.dumps(payload, sort_keys=True), file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
