"""Detuning and density sweeps (the fig3 and fig4 verbs) and deterministic CSV emission."""
from __future__ import annotations

import math
import warnings
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import __version__
from .dressed import log_log_slopes, saturation_curve, two_photon_rate_dressed
from .errors import InvalidInputError, PoleError
from .params import ResolvedScenario, Scenario
from .perturbative import (
    DEFAULT_WINDOW,
    POLE_GUARD,
    RegimeWarning,
    effective_matrix_element,
    single_photon_rate,
    two_photon_rate_full,
    two_photon_rate_two_path,
)
from .results import SweepResult

FIG3_COLUMNS = ["delta_frac", "delta_rad_s", "r1_s-1", "r2_two_path_s-1", "r2_full_s-1", "r1_norm", "r2_full_norm"]


def _fig3_row(args):
    s, window = args
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RegimeWarning)
        r1 = single_photon_rate(s)
    return (s.delta_frac, s.delta, r1, two_photon_rate_two_path(s), two_photon_rate_full(s, window).rate)


def _map(func, items, jobs):
    if jobs and jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(func, items))
    return [func(x) for x in items]


def check_delta_range(delta_min: float, delta_max: float, pole_guard: float = POLE_GUARD) -> None:
    """Fractions of omega0 must stay strictly inside the +-1/2 resonator poles."""
    limit = 0.5 - pole_guard
    if delta_min > delta_max:
        raise InvalidInputError("delta_min must not exceed delta_max")
    if not (-limit < delta_min and delta_max < limit):
        raise PoleError(
            f"delta range [{delta_min}, {delta_max}] (units of omega0) touches the resonator "
            f"poles; safe range is ({-limit}, {limit})",
            state="|l_R> or |m_R>",
        )


def fig3_sweep(s: Scenario, delta_min: float, delta_max: float, n_points: int, *,
               window: int = DEFAULT_WINDOW, jobs: int = 1, fingerprint: str | None = None) -> SweepResult:
    """R1 and R2 against delta/omega0 with peak-normalized copies for shape comparison."""
    if n_points < 2:
        raise InvalidInputError("n_points must be >= 2")
    check_delta_range(delta_min, delta_max)
    fracs = np.linspace(delta_min, delta_max, n_points)
    if n_points % 2 == 1 and math.isclose(delta_min, -delta_max):
        fracs[n_points // 2] = 0.0
    points = [(s.replace(delta=float(f) * s.omega0), window) for f in fracs]
    raw = _map(_fig3_row, points, jobs)
    r1_peak = max(r[2] for r in raw) or 1.0
    r2_peak = max(r[4] for r in raw) or 1.0
    rows = [r + (r[2] / r1_peak, r[4] / r2_peak) for r in raw]
    meta = {"window": window, "gamma2_over_omega0": s.gamma2 / s.omega0, "normalization": "columns *_norm divided by column maximum"}
    return SweepResult(fingerprint or s.fingerprint(), list(FIG3_COLUMNS), rows, meta)


def density_grid(rho_min: float, rho_max: float, points_per_decade: int) -> list[float]:
    if not 0 < rho_min < rho_max:
        raise InvalidInputError("need 0 < rho_min < rho_max")
    if points_per_decade < 1:
        raise InvalidInputError("points_per_decade must be >= 1")
    decades = math.log10(rho_max / rho_min)
    n = max(2, int(round(decades * points_per_decade)) + 1)
    exps = np.linspace(math.log10(rho_min), math.log10(rho_max), n)
    return [float(10.0**e) for e in exps]


def _fig4_chunk(args):
    s, rhos, mode_volume, window = args
    return saturation_curve(s, rhos, mode_volume, window=window).rows


def fig4_sweep(resolved: ResolvedScenario, rho_min: float, rho_max: float, points_per_decade: int, *,
               window: int = DEFAULT_WINDOW, jobs: int = 1) -> SweepResult:
    """R2 against atomic density with the local log-log slope of the dressed rate."""
    rhos = density_grid(rho_min, rho_max, points_per_decade)
    s, vm = resolved.scenario, resolved.mode_volume
    chunks = [(s, [r], vm, window) for r in rhos]
    rows = [row for part in _map(_fig4_chunk, chunks, jobs) for row in part]
    base = saturation_curve(s, rhos[:1], vm, window=window)
    slopes = log_log_slopes([r[0] for r in rows], [r[2] for r in rows])
    columns = ["rho_cm3", "n_atoms", "r2_dressed_s-1", "r2_full_s-1", "slope", "r2_mixing_s-1", "r2_resolvent_s-1"]
    out = [(r[0], r[1], r[2], r[3], sl, r[4], r[5]) for r, sl in zip(rows, slopes)]
    return SweepResult(resolved.fingerprint, columns, out, dict(base.metadata))


def point_rates(s: Scenario, window: int = DEFAULT_WINDOW) -> dict:
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", RegimeWarning)
        r1 = single_photon_rate(s)
    out = {
        "delta_frac": s.delta_frac,
        "n_atoms": s.n_atoms,
        "m_eff_rad_s": effective_matrix_element(s),
        "r1_s-1": r1,
    }
    try:
        out["r2_two_path_s-1"] = two_photon_rate_two_path(s)
        out["r2_full_s-1"] = two_photon_rate_full(s, window).rate
        out["r2_dressed_s-1"] = two_photon_rate_dressed(s, window=window)
    except PoleError:
        if s.delta1 != 0:
            raise
        out["r2_two_path_s-1"] = out["r2_full_s-1"] = out["r2_dressed_s-1"] = math.nan
    return out, [str(w.message) for w in caught]


# ---------------------------------------------------------------------------
# CSV


def format_value(v) -> str:
    if isinstance(v, bool):
        return str(v).lower()
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if math.isnan(v):
            return "nan"
        if v == 0.0:
            v = 0.0  # drop the sign of -0.0
        return f"{v:.11e}"
    return str(v)


def to_csv(result: SweepResult, command: str, extra_meta: dict | None = None) -> str:
    lines = [f"# twomode {__version__} {command}", f"# fingerprint: {result.fingerprint}"]
    meta = dict(result.metadata)
    if extra_meta:
        meta.update(extra_meta)
    for key in sorted(meta):
        lines.append(f"# {key}: {format_value(meta[key])}")
    for w in result.warnings:
        lines.append(f"# warning: {w}")
    lines.append(",".join(result.columns))
    for row in result.rows:
        lines.append(",".join(format_value(v) for v in row))
    return "\n".join(lines) + "\n"
