"""Closed-form perturbative rates for the two-mode transparency scheme.

Single-photon scattering goes through the two virtual resonator states that
bracket the probe; their amplitudes cancel exactly at delta = 0. Two-photon
absorption is fourth order: two photons enter the resonator, one is absorbed
on |0_A> -> |1_A>, the other on |1_A> -> |2_A>.

Energy denominators are ``E_initial - E_intermediate`` built from the bare
mode ladder. Level widths appear only in the final golden-rule Lorentzian.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError, PoleError
from .params import Scenario

SQRT2 = math.sqrt(2.0)
DEFAULT_WINDOW = 50
CONVERGENCE_TOL = 1e-6
POLE_GUARD = 1e-9  # relative to omega0
REGIME_RATIO = 0.1


class RegimeWarning(UserWarning):
    """Input lies outside the small-detuning regime the formulas assume."""


def _require_inside_poles(s: Scenario) -> None:
    if not abs(s.delta) < s.omega0 / 2:
        raise PoleError(
            f"|delta| = {abs(s.delta):.6g} rad/s reaches the resonator pole at "
            f"+-omega0/2 = {s.omega0 / 2:.6g} rad/s",
            state="|l_R> or |m_R>",
            denominator=abs(s.delta) - s.omega0 / 2,
        )


def _golden_rule(n_atoms: float, matrix_el: float, detuning: float, width: float) -> float:
    return 2.0 * n_atoms * matrix_el**2 * width / (detuning**2 + width**2)


def effective_matrix_element(s: Scenario) -> float:
    """Second-order waveguide -> |1_A> coupling via |l_R> and |m_R> (rad/s).

    Written as 2*delta/(delta^2 - omega0^2/4) so that delta = 0 gives an exact
    zero instead of a difference of two large terms.
    """
    _require_inside_poles(s)
    d = s.delta
    return s.m1 * s.mw * (2.0 * d) / (d * d - 0.25 * s.omega0**2)


def single_photon_rate(s: Scenario) -> float:
    """Scattering rate R1 in 1/s; the atomic Lorentzian uses Delta1 alone."""
    meff = effective_matrix_element(s)
    if abs(s.delta) > REGIME_RATIO * abs(s.delta1):
        warnings.warn(
            f"|delta| = {abs(s.delta):.3g} exceeds {REGIME_RATIO} |Delta1|; "
            "R1 assumes delta << Delta1",
            RegimeWarning,
            stacklevel=2,
        )
    return _golden_rule(s.n_atoms, meff, s.delta1, s.gamma1)


def _require_delta1(s: Scenario) -> None:
    if s.delta1 == 0:
        raise PoleError(
            "Delta1 = 0: the |m_R,1_A> intermediate state is resonant and the "
            "two-photon formulas divide by Delta1^2",
            state="|m_R,1_A>",
            denominator=0.0,
        )


def two_photon_amplitudes(s: Scenario) -> tuple[float, float]:
    """Amplitudes (A2, A2') through |2m_R> and |2l_R> (dimensionless)."""
    _require_inside_poles(s)
    _require_delta1(s)
    d, w0 = s.delta, s.omega0
    final = 2 * d - s.delta2
    if final == 0:
        raise PoleError("2*delta - Delta2 = 0: final state |2_A> is resonant", state="|2_A>", denominator=0.0)
    common = (s.m2 / final) * (SQRT2 * s.m1 / s.delta1)
    a2 = common * (SQRT2 * s.mw / (2 * d - w0)) * (s.mw / (d - w0 / 2))
    a2p = common * (SQRT2 * s.mw / (2 * d + w0)) * (s.mw / (d + w0 / 2))
    return a2, a2p


def two_photon_rate_two_path(s: Scenario) -> float:
    """R2 from the two dominant paths; finite at delta = 0 thanks to gamma2."""
    _require_inside_poles(s)
    _require_delta1(s)
    d, w0 = s.delta, s.omega0
    bracket = 1.0 / ((2 * d - w0) * (d - w0 / 2)) + 1.0 / ((2 * d + w0) * (d + w0 / 2))
    num = 8.0 * s.n_atoms * s.m1**2 * s.m2**2 * s.mw**4 * s.gamma2
    den = s.delta1**2 * ((2 * d - s.delta2) ** 2 + s.gamma2**2)
    return num / den * bracket**2


# ---------------------------------------------------------------------------
# full intermediate-state sum


@dataclass(frozen=True)
class PathAmplitude:
    """One fourth-order chain |2_w> -> |1_w,j> -> |j,k> -> |b,1_A> -> |2_A>.

    ``numerator`` is the product of the four couplings including Bose factors,
    ``denominators`` holds one energy denominator per intermediate state.
    ``value`` (rad/s) is the chain's contribution to the effective matrix
    element into |2_A>; dividing by the final detuning gives the amplitude.
    """

    state_chain: tuple[str, str, str]
    numerator: float
    denominators: tuple[float, float, float]
    value: float

    def recompute(self) -> float:
        return self.numerator / math.prod(self.denominators)

    def amplitude(self, final_detuning: float) -> float:
        return self.value / final_detuning


def mode_offsets(omega0: float, window: int) -> np.ndarray:
    """Mode energies relative to the midpoint: (n + 1/2)*omega0, n in [-L, L-1].

    n = 0 is m_R and n = -1 is l_R.
    """
    n = np.arange(-window, window)
    return (n + 0.5) * omega0


def _mode_label(n: int) -> str:
    return f"l[{n:+d}]"


def _atomic_denominator(s: Scenario, eps_b: float, exact: bool) -> float:
    # The closed forms use Delta1 for |b,1_A>; ``exact`` uses the bare diagonal.
    if exact:
        return 2 * s.delta - eps_b - s.delta1
    return s.delta1


def admissible_pairs(window: int) -> list[tuple[int, int]]:
    """Ordered (j, k) mode pairs kept in the sum.

    Pairs with j + k = -1 have total energy exactly 2*Ebar: they are the
    |l_R, m_R>-type resonator states into which the two photons can go
    without any atom; the two orderings cancel and the pair is left out.
    """
    ns = range(-window, window)
    return [(j, k) for j in ns for k in ns if j + k != -1]


def count_paths(window: int) -> int:
    """Closed-form number of chains for a window: 2L diagonal + 2*(2L)(2L-2)."""
    return 2 * window * (4 * window - 3)


def enumerate_paths(s: Scenario, window: int, *, exact_atomic: bool = False,
                    pole_guard: float = POLE_GUARD) -> list[PathAmplitude]:
    if window < 1:
        raise InvalidInputError(f"window must be >= 1, got {window}")
    _require_inside_poles(s)
    _require_delta1(s)
    d, w0 = s.delta, s.omega0
    guard = pole_guard * w0
    paths = []
    for j, k in admissible_pairs(window):
        ej, ek = (j + 0.5) * w0, (k + 0.5) * w0
        d1 = d - ej
        d2 = 2 * d - ej - ek
        if j == k:
            first = f"|1_w,{_mode_label(j)}>"
            second = f"|2{_mode_label(j)}>"
            options = [(j, ej, SQRT2 * s.mw, SQRT2 * s.m1)]
        else:
            first = f"|1_w,{_mode_label(j)}>"
            second = f"|{_mode_label(j)},{_mode_label(k)}>"
            # absorb j first (k remains) or k first (j remains)
            options = [(k, ek, s.mw, s.m1), (j, ej, s.mw, s.m1)]
        for b, eb, entry, absorb in options:
            d3 = _atomic_denominator(s, eb, exact_atomic)
            third = f"|{_mode_label(b)},1_A>"
            dens = (d1, d2, d3)
            for label, den in zip((first, second, third), dens):
                if abs(den) < guard:
                    raise PoleError(
                        f"intermediate state {label} is resonant (denominator {den:.3g} rad/s)",
                        state=label, denominator=den,
                    )
            numerator = s.mw * entry * absorb * s.m2
            paths.append(PathAmplitude((first, second, third), numerator, dens, numerator / math.prod(dens)))
    return paths


def _full_matrix_element(s: Scenario, window: int, exact_atomic: bool = False, chunk: int = 512) -> float:
    """Vectorized sum of all chain values; same set as ``enumerate_paths``."""
    d, w0 = s.delta, s.omega0
    n = np.arange(-window, window)
    eps = (n + 0.5) * w0
    d1 = d - eps
    if exact_atomic:
        d3 = 2 * d - eps - s.delta1
    else:
        d3 = np.full_like(eps, s.delta1)
    total = 0.0
    for start in range(0, n.size, chunk):
        sl = slice(start, start + chunk)
        nj = n[sl, None]
        d2 = 2 * d - eps[sl, None] - eps[None, :]
        diag = nj == n[None, :]
        resonant = (nj + n[None, :]) == -1
        # j == k: sqrt2 on entry and on absorption; j != k: two absorption orders
        weight = np.where(diag, 2.0 / d3[None, :], 1.0 / d3[None, :] + 1.0 / d3[sl, None])
        terms = weight / (d1[sl, None] * np.where(resonant, 1.0, d2))
        total += float(np.sum(np.where(resonant, 0.0, terms)))
    return s.mw**2 * s.m1 * s.m2 * total


@dataclass(frozen=True)
class FullRate:
    rate: float
    window: int
    n_paths: int
    rel_change: float  # relative to window - 1 (nan for window 1)


def two_photon_rate_full(s: Scenario, window: int = DEFAULT_WINDOW, *, exact_atomic: bool = False) -> FullRate:
    """Coherent sum over every admissible chain, closed with the gamma2 Lorentzian."""
    if window < 1:
        raise InvalidInputError(f"window must be >= 1, got {window}")
    _require_inside_poles(s)
    _require_delta1(s)

    def rate(L):
        m = _full_matrix_element(s, L, exact_atomic)
        return _golden_rule(s.n_atoms, m, 2 * s.delta - s.delta2, s.gamma2)

    r = rate(window)
    if window > 1:
        prev = rate(window - 1)
        rel = abs(r - prev) / abs(r) if r else 0.0
    else:
        rel = math.nan
    return FullRate(rate=r, window=window, n_paths=count_paths(window), rel_change=rel)


@dataclass(frozen=True)
class ConvergenceStudy:
    """Rates at doubling windows and their Richardson extrapolation.

    The truncation error of the mode sum falls off as a power series in 1/L,
    so the raw windows converge slowly while the extrapolated column does not.
    """

    windows: tuple[int, ...]
    raw: tuple[float, ...]
    extrapolated: tuple[float, ...]
    rate: float
    rel_change: float
    converged: bool


def converged_two_photon_rate(s: Scenario, *, start_window: int = DEFAULT_WINDOW,
                              tol: float = CONVERGENCE_TOL, max_window: int = 3200,
                              exact_atomic: bool = False) -> ConvergenceStudy:
    _require_inside_poles(s)
    _require_delta1(s)
    windows, raw, best = [], [], []
    table: list[list[float]] = []
    L = start_window
    rel = math.inf
    while L <= max_window:
        m = _full_matrix_element(s, L, exact_atomic)
        r = _golden_rule(s.n_atoms, m, 2 * s.delta - s.delta2, s.gamma2)
        windows.append(L)
        raw.append(r)
        row = [r]
        # error expansion in h = 1/L, halving h each step
        for p, prev in enumerate(table[-1] if table else [], start=1):
            row.append(row[p - 1] + (row[p - 1] - prev) / (2**p - 1))
        table.append(row)
        best.append(row[-1])
        if len(best) >= 3:
            scale = abs(best[-1]) or 1.0
            rel = abs(best[-1] - best[-2]) / scale
            if rel < tol:
                break
        L *= 2
    converged = rel < tol
    return ConvergenceStudy(tuple(windows), tuple(raw), tuple(best), best[-1], rel, converged)


def rate_point(s: Scenario, window: int = DEFAULT_WINDOW) -> "RatePoint":
    from .results import RatePoint

    full = two_photon_rate_full(s, window)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RegimeWarning)
        r1 = single_photon_rate(s)
    return RatePoint(delta=s.delta, r1=r1, r2_two_path=two_photon_rate_two_path(s),
                     r2_full=full.rate, n_paths=full.n_paths)
