"""Command-line driver: ``twomode {fig3,fig4,point,validate,oracle-run}``.

Exit codes: 0 success, 1 invalid input, 2 physics-domain error (pole,
validity limit, oracle capacity), 3 validation failures.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__
from .errors import InvalidInputError, TwoModeError
from .params import DEFAULT_SETTINGS, ResolvedScenario, load_scenario, resolve_settings
from .perturbative import DEFAULT_WINDOW
from .results import SweepResult

EXIT_OK, EXIT_INPUT, EXIT_DOMAIN, EXIT_VALIDATION = 0, 1, 2, 3


def parse_overrides(items: list[str] | None) -> dict:
    out = {}
    for item in items or []:
        key, sep, value = item.partition("=")
        key = key.strip()
        if not sep or not key:
            raise InvalidInputError(f"--set expects key=value, got {item!r}")
        try:
            out[key] = float(value)
        except ValueError:
            raise InvalidInputError(f"--set {key}: {value!r} is not a number") from None
    return out


def _resolve(args) -> ResolvedScenario:
    overrides = parse_overrides(args.set)
    if getattr(args, "gamma2_frac", None) is not None:
        overrides["gamma2_frac"] = args.gamma2_frac
        overrides.pop("gamma2_per_s", None)
    if args.scenario:
        try:
            return load_scenario(args.scenario, overrides)
        except OSError as exc:
            raise InvalidInputError(f"cannot read scenario file: {exc}") from None
    return resolve_settings(overrides)


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_bytes(text.encode("utf-8"))
    else:
        sys.stdout.write(text)


def _csv(result: SweepResult, command: str, extra: dict | None = None) -> str:
    from .sweeps import to_csv
    return to_csv(result, command, extra)


def cmd_fig3(args) -> int:
    from .sweeps import fig3_sweep
    resolved = _resolve(args)
    result = fig3_sweep(resolved.scenario, args.delta_min, args.delta_max, args.n_points,
                        window=args.window, jobs=args.jobs, fingerprint=resolved.fingerprint)
    _emit(_csv(result, "fig3"), args.out)
    return EXIT_OK


def cmd_fig4(args) -> int:
    from .sweeps import fig4_sweep
    resolved = _resolve(args)
    result = fig4_sweep(resolved, args.rho_min, args.rho_max, args.points_per_decade,
                        window=args.window, jobs=args.jobs)
    _emit(_csv(result, "fig4", {"mode_volume_m3": resolved.mode_volume}), args.out)
    return EXIT_OK


def cmd_point(args) -> int:
    from .sweeps import point_rates
    overrides = parse_overrides(args.set)
    resolved = _resolve(args)
    values, warns = point_rates(resolved.scenario, args.window)
    meta = {"window": args.window}
    meta.update({f"set.{k}": v for k, v in overrides.items()})
    for key in ("dipole1_cm", "dipole2_cm", "vm_m3", "rho_cm3"):
        if key in resolved.inputs:
            meta[f"input.{key}"] = resolved.inputs[key]
    meta["m1_rad_s"] = resolved.scenario.m1
    meta["m2_rad_s"] = resolved.scenario.m2
    result = SweepResult(resolved.fingerprint, list(values), [tuple(values.values())], meta, warns)
    _emit(_csv(result, "point"), args.out)
    return EXIT_OK


def cmd_validate(args) -> int:
    from .validation import run_validation
    resolved = _resolve(args)
    checks = run_validation(resolved.scenario)
    report = {
        "tool": f"twomode {__version__}",
        "fingerprint": resolved.fingerprint,
        "passed": all(c.status != "fail" for c in checks),
        "checks": [c.as_dict() for c in checks],
    }
    _emit(json.dumps(report, indent=2, sort_keys=True) + "\n", args.out)
    return EXIT_OK if report["passed"] else EXIT_VALIDATION


def cmd_oracle_run(args) -> int:
    from .oracle import single_photon_oracle
    resolved = _resolve(args)
    s = resolved.scenario
    run = single_photon_oracle(s, n_modes=args.modes, n_atoms=args.atoms, coupling_scale=args.coupling_scale)
    meta = {
        "n_modes": args.modes,
        "n_atoms_oracle": args.atoms,
        "coupling_scale": args.coupling_scale,
        "dimension": run.dimension,
        "t_end_s": run.t_end,
        "fit_r_squared": run.fit.r_squared,
        "fit_stderr_s-1": run.fit.stderr,
    }
    columns = ["delta_frac", "oracle_rate_s-1", "mode_sum_golden_rule_s-1"]
    result = SweepResult(resolved.fingerprint, columns, [(s.delta_frac, run.rate, run.golden_rule)], meta)
    _emit(_csv(result, "oracle-run"), args.out)
    if args.trajectory:
        header = f"# twomode {__version__} oracle-run trajectory\n# fingerprint: {resolved.fingerprint}\n"
        Path(args.trajectory).write_bytes((header + run.trajectory.to_csv()).encode("utf-8"))
    return EXIT_OK


def _positive_int(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return v


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="twomode", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"twomode {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--scenario", help="flat TOML scenario file (SI keys)")
    common.add_argument("--out", help="output file (default stdout)")
    common.add_argument("--set", action="append", metavar="KEY=VALUE", help="override a scenario key (repeatable)")
    common.add_argument("--window", type=_positive_int, default=DEFAULT_WINDOW, help="mode window L for the full sum")
    common.add_argument("--gamma2-frac", type=float, help="override gamma2 as a fraction of omega0")
    common.add_argument("--jobs", type=_positive_int, default=1, help="worker processes for sweeps")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fig3", parents=[common], help="rates against photon detuning")
    p.add_argument("--delta-min", type=float, default=-0.3)
    p.add_argument("--delta-max", type=float, default=0.3)
    p.add_argument("--n-points", type=int, default=61)
    p.set_defaults(func=cmd_fig3)

    p = sub.add_parser("fig4", parents=[common], help="two-photon rate against atomic density")
    p.add_argument("--rho-min", type=float, default=1e12, help="atoms/cm^3")
    p.add_argument("--rho-max", type=float, default=1e19, help="atoms/cm^3")
    p.add_argument("--points-per-decade", type=int, default=4)
    p.set_defaults(func=cmd_fig4)

    p = sub.add_parser("point", parents=[common], help="all rates at one parameter point")
    p.set_defaults(func=cmd_point)

    p = sub.add_parser("validate", parents=[common], help="run the invariant suite, JSON report")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("oracle-run", parents=[common], help="single-photon loss from exact evolution")
    p.add_argument("--modes", type=_positive_int, default=11)
    p.add_argument("--atoms", type=_positive_int, default=1)
    p.add_argument("--coupling-scale", type=float, default=1e-2)
    p.add_argument("--trajectory", help="also write populations against time to this CSV")
    p.set_defaults(func=cmd_oracle_run)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InvalidInputError as exc:
        print(f"twomode: invalid input: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except TwoModeError as exc:
        print(f"twomode: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_DOMAIN


if __name__ == "__main__":
    sys.exit(main())
