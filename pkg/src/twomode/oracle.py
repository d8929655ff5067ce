"""Brute-force check: truncated Fock space of waveguide + ring modes + atoms.

The Hamiltonian is assembled directly from the bosonic ladder operators and
the atomic transition operators, with level widths entering as an
anti-Hermitian diagonal. Rates come from the slope of log(survival), so
nothing here shares code with the perturbative formulas.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
import scipy.linalg
import scipy.sparse as sp

from .errors import CapacityError, ExtractionError, InvalidInputError, RateBelowResolution, StepControlError
from .params import Scenario

MAX_DIMENSION = 2_000_000
DENSE_LIMIT = 2000  # below this a dense matvec beats CSR
LEVEL_WEIGHT = (0, 1, 2)


@dataclass(frozen=True)
class ModeSet:
    """Resonator mode numbers (frequency l*omega0) and the waveguide frequency."""

    mode_indices: tuple[int, ...]
    waveguide_freq: float

    def __post_init__(self):
        idx = tuple(int(i) for i in self.mode_indices)
        if not idx:
            raise InvalidInputError("at least one resonator mode is required")
        if any(b <= a for a, b in zip(idx, idx[1:])):
            raise InvalidInputError("mode indices must be strictly increasing")
        object.__setattr__(self, "mode_indices", idx)

    @classmethod
    def around_probe(cls, s: Scenario, n_modes: int = 11) -> "ModeSet":
        """``n_modes`` consecutive modes holding the pair that brackets the probe."""
        if n_modes < 1:
            raise InvalidInputError("n_modes must be >= 1")
        l_r = round(s.ebar / s.omega0 - 0.5)
        if n_modes == 1:
            first = l_r + 1
        else:
            first = l_r - (n_modes - 2 + 1) // 2
        return cls(tuple(range(first, first + n_modes)), s.ebar + s.delta)

    def offsets(self, s: Scenario) -> np.ndarray:
        """Mode energies relative to the midpoint Ebar."""
        return np.array([l * s.omega0 - s.ebar for l in self.mode_indices])


class BasisState(NamedTuple):
    n_w: int
    n_modes: tuple[int, ...]
    atom_levels: tuple[int, ...]

    def excitations(self) -> int:
        return self.n_w + sum(self.n_modes) + sum(LEVEL_WEIGHT[a] for a in self.atom_levels)

    def label(self, modes: ModeSet | None = None) -> str:
        parts = []
        if self.n_w:
            parts.append(f"{self.n_w}_w")
        for i, n in enumerate(self.n_modes):
            if n:
                name = f"l{modes.mode_indices[i]}" if modes else f"mode{i}"
                parts.append(f"{n}x{name}")
        for i, a in enumerate(self.atom_levels):
            if a:
                parts.append(f"{a}_A[{i}]")
        return "|" + ",".join(parts or ["vac"]) + ">"


def _poly_pow(base: list[int], power: int) -> list[int]:
    out = [1]
    for _ in range(power):
        out = list(np.convolve(out, base).astype(object))
    return out


def basis_dimension(n_modes: int, n_atoms: int, total_excitations: int, per_mode_cap: int) -> int:
    """Coefficient of x^K in (1+..+x^K)(1+..+x^cap)^modes (1+x+x^2)^atoms."""
    k = total_excitations
    poly = [1] * (k + 1)
    poly = np.convolve(poly, _poly_pow([1] * (per_mode_cap + 1), n_modes)).astype(object)
    poly = np.convolve(poly, _poly_pow([1, 1, 1], n_atoms)).astype(object)
    return int(poly[k]) if k < len(poly) else 0


def _compositions(total: int, parts: int, cap: int):
    if parts == 0:
        if total == 0:
            yield ()
        return
    for first in range(min(total, cap), -1, -1):
        for rest in _compositions(total - first, parts - 1, cap):
            yield (first,) + rest


def build_basis(modes: ModeSet, n_atoms: int, total_excitations: int, per_mode_cap: int | None = None,
                *, max_dimension: int = MAX_DIMENSION) -> list[BasisState]:
    """All states with the given excitation number, in ascending lexicographic order."""
    if total_excitations not in (1, 2):
        raise InvalidInputError("total_excitations must be 1 or 2")
    if n_atoms < 0:
        raise InvalidInputError("n_atoms must be >= 0")
    cap = total_excitations if per_mode_cap is None else per_mode_cap
    if cap < 0:
        raise InvalidInputError("per_mode_cap must be >= 0")
    n_modes = len(modes.mode_indices)
    dim = basis_dimension(n_modes, n_atoms, total_excitations, cap)
    if dim > max_dimension:
        raise CapacityError(f"basis dimension {dim} exceeds the guard {max_dimension}", dim)
    states = []
    for n_w in range(total_excitations + 1):
        for atoms in itertools.product(range(3), repeat=n_atoms):
            left = total_excitations - n_w - sum(LEVEL_WEIGHT[a] for a in atoms)
            if left < 0:
                continue
            for occ in _compositions(left, n_modes, cap):
                states.append(BasisState(n_w, occ, atoms))
    states.sort()
    return states


@dataclass(frozen=True)
class HamiltonianMatrix:
    """Coherent part (real symmetric, rotating frame) plus decay diagonal (<= 0)."""

    basis: tuple[BasisState, ...]
    coherent: sp.csr_matrix
    decay: np.ndarray
    labels: tuple[str, ...]

    @property
    def dimension(self) -> int:
        return len(self.basis)

    def effective(self) -> sp.csr_matrix:
        return (self.coherent + sp.diags(1j * self.decay)).tocsr()

    def index(self, state: BasisState) -> int:
        return self.basis.index(state)


def build_hamiltonian(s: Scenario, modes: ModeSet, basis) -> HamiltonianMatrix:
    """Assemble the waveguide/resonator/atom Hamiltonian on ``basis``.

    Energies are measured from K*Ebar in the K-excitation sector, which keeps
    the diagonal of order omega0 instead of optical frequencies.
    """
    basis = tuple(basis)
    if not basis:
        raise InvalidInputError("empty basis")
    n_modes = len(modes.mode_indices)
    for st in basis:
        if len(st.n_modes) != n_modes:
            raise InvalidInputError("basis does not match the mode set")
    index = {st: i for i, st in enumerate(basis)}
    eps = modes.offsets(s)
    w_off = modes.waveguide_freq - s.ebar
    atom_off = (0.0, s.delta1, s.delta2)
    atom_gamma = (0.0, s.gamma1, s.gamma2)

    diag = np.empty(len(basis))
    decay = np.empty(len(basis))
    rows, cols, vals = [], [], []

    def couple(i, new_state, amp):
        j = index.get(new_state)
        if j is None or amp == 0.0:
            return
        rows.extend((i, j))
        cols.extend((j, i))
        vals.extend((amp, amp))

    for i, st in enumerate(basis):
        diag[i] = st.n_w * w_off + float(np.dot(st.n_modes, eps)) + sum(atom_off[a] for a in st.atom_levels)
        decay[i] = -sum(atom_gamma[a] for a in st.atom_levels)
        occ = list(st.n_modes)
        # raising moves only; the transpose entry closes the hermitian pair
        for m in range(n_modes):
            if st.n_w > 0:
                new = occ.copy()
                new[m] += 1
                amp = s.mw * math.sqrt(st.n_w) * math.sqrt(occ[m] + 1)
                couple(i, BasisState(st.n_w - 1, tuple(new), st.atom_levels), amp)
            if occ[m] > 0:
                new = occ.copy()
                new[m] -= 1
                for a, level in enumerate(st.atom_levels):
                    if level == 2:
                        continue
                    g = s.m1 if level == 0 else s.m2
                    atoms = list(st.atom_levels)
                    atoms[a] = level + 1
                    couple(i, BasisState(st.n_w, tuple(new), tuple(atoms)), g * math.sqrt(occ[m]))
    n = len(basis)
    off = sp.coo_matrix((vals, (rows, cols)), shape=(n, n))
    coherent = (off + sp.diags(diag)).tocsr()
    coherent.sum_duplicates()
    labels = tuple(st.label(modes) for st in basis)
    return HamiltonianMatrix(basis, coherent, decay, labels)


@dataclass(frozen=True)
class Trajectory:
    times: np.ndarray
    amplitudes: np.ndarray  # (n_times, dim)
    labels: tuple[str, ...]
    steps: int = 0
    achieved_error: float = 0.0

    @property
    def populations(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    @property
    def survival(self) -> np.ndarray:
        return self.populations.sum(axis=1)

    def to_csv(self, track: list[str] | None = None) -> str:
        names = list(track) if track is not None else list(self.labels)
        cols = [self.labels.index(n) for n in names]
        pops = self.populations
        lines = ["time_s,survival," + ",".join(names)]
        for t, row, surv in zip(self.times, pops, self.survival):
            vals = [f"{t:.11e}", f"{surv:.11e}"] + [f"{row[c]:.11e}" for c in cols]
            lines.append(",".join(vals))
        return "\n".join(lines) + "\n"


def _rk4_run(h, psi0, dt, n_seg, steps_per_seg):
    psi = psi0.astype(complex)
    out = [psi.copy()]
    f = lambda y: -1j * (h @ y)  # noqa: E731
    for _ in range(n_seg):
        for _ in range(steps_per_seg):
            k1 = f(psi)
            k2 = f(psi + 0.5 * dt * k1)
            k3 = f(psi + 0.5 * dt * k2)
            k4 = f(psi + dt * k3)
            psi = psi + (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        out.append(psi.copy())
    return np.array(out)


def evolve(state0, H: HamiltonianMatrix, t_end: float, dt_hint: float, *, method: str = "rk4",
           n_out: int = 201, rtol: float = 1e-8, max_refinements: int = 14) -> Trajectory:
    """Integrate i d(psi)/dt = H_eff psi from t = 0 to ``t_end``.

    ``rk4``: fixed-step fourth-order Runge-Kutta; the step is halved until the
    final populations move by less than ``rtol`` (relative to their maximum).
    ``eig``: exact propagation through the eigen-decomposition of H_eff, for
    long weak-coupling runs where the decay is many orders slower than omega0.
    """
    psi0 = np.asarray(state0, dtype=complex)
    if psi0.shape != (H.dimension,):
        raise InvalidInputError("state vector does not match the Hamiltonian")
    norm = float(np.vdot(psi0, psi0).real)
    if abs(norm - 1.0) > 1e-12:
        raise InvalidInputError(f"initial state must be normalized (norm^2 = {norm})")
    if t_end <= 0 or n_out < 2:
        raise InvalidInputError("t_end must be > 0 and n_out >= 2")
    times = np.linspace(0.0, t_end, n_out)
    heff = H.effective()

    if method == "eig":
        lam, vecs = scipy.linalg.eig(heff.toarray())
        coeff = scipy.linalg.solve(vecs, psi0)
        amps = (np.exp(-1j * np.outer(times, lam)) * coeff) @ vecs.T
        return Trajectory(times, amps, H.labels)
    if method != "rk4":
        raise InvalidInputError(f"unknown method {method!r}")

    if H.dimension <= DENSE_LIMIT:
        heff = heff.toarray()
    n_seg = n_out - 1
    per_seg = max(1, math.ceil(t_end / (dt_hint * n_seg)))
    prev = _rk4_run(heff, psi0, t_end / (n_seg * per_seg), n_seg, per_seg)
    err = math.inf
    for _ in range(max_refinements):
        per_seg *= 2
        cur = _rk4_run(heff, psi0, t_end / (n_seg * per_seg), n_seg, per_seg)
        p_old, p_new = np.abs(prev[-1]) ** 2, np.abs(cur[-1]) ** 2
        # step-doubling estimate of the fine-run error for a fourth-order method
        err = float(np.max(np.abs(p_new - p_old)) / max(np.max(p_new), 1e-300)) / 15.0
        prev = cur
        if err < rtol:
            return Trajectory(times, cur, H.labels, steps=n_seg * per_seg, achieved_error=err)
    raise StepControlError(f"step control failed: achieved {err:.3g} > {rtol:.3g}", err)


@dataclass(frozen=True)
class RateFit:
    rate: float
    r_squared: float
    stderr: float


def extract_rate(traj: Trajectory, window: float = 0.5, *, resolution: float = 1e-6,
                 monotone_tol: float = 1e-3) -> RateFit:
    """Decay rate from a least-squares line through log(survival) over the last ``window`` of the run."""
    if not 0 < window <= 1:
        raise InvalidInputError("window must be in (0, 1]")
    t, surv = traj.times, traj.survival
    mask = t >= t[-1] * (1 - window)
    t, surv = t[mask], surv[mask]
    if t.size < 3:
        raise ExtractionError("fewer than three samples in the fit window")
    drop = surv[0] - surv[-1]
    if drop < resolution * surv[0]:
        raise RateBelowResolution(f"rate below resolution: survival changed by {drop / surv[0]:.2g} over the window")
    rises = np.diff(surv)
    if rises.max() > monotone_tol * drop:
        raise ExtractionError(
            "survival is not monotone over the window (oscillation dominated); "
            "use a longer t_end or weaker couplings"
        )
    y = np.log(surv)
    A = np.vstack([t, np.ones_like(t)]).T
    (slope, icpt), res, *_ = np.linalg.lstsq(A, y, rcond=None)
    fit = slope * t + icpt
    ss_res = float(np.sum((y - fit) ** 2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    dof = max(t.size - 2, 1)
    stderr = math.sqrt(ss_res / dof / float(np.sum((t - t.mean()) ** 2)))
    return RateFit(rate=-float(slope), r_squared=r2, stderr=stderr)


# ---------------------------------------------------------------------------
# recipes


def waveguide_state(H: HamiltonianMatrix, n_photons: int = 1) -> np.ndarray:
    n_modes = len(H.basis[0].n_modes)
    n_atoms = len(H.basis[0].atom_levels)
    target = BasisState(n_photons, (0,) * n_modes, (0,) * n_atoms)
    psi = np.zeros(H.dimension, complex)
    psi[H.index(target)] = 1.0
    return psi


def golden_rule_single_photon(s: Scenario, modes: ModeSet, n_atoms: int = 1) -> float:
    """Second-order rate summed over every mode in ``modes`` with the exact atomic detuning.

    Reference for the oracle beyond the two-mode, delta << Delta1 closed form.
    """
    eps = modes.offsets(s)
    w_off = modes.waveguide_freq - s.ebar
    meff = float(np.sum(s.m1 * s.mw / (w_off - eps)))
    det = w_off - s.delta1
    return 2.0 * n_atoms * meff**2 * s.gamma1 / (det**2 + s.gamma1**2)


@dataclass(frozen=True)
class OracleRun:
    rate: float
    fit: RateFit
    dimension: int
    t_end: float
    golden_rule: float
    trajectory: Trajectory


def single_photon_oracle(s: Scenario, *, n_modes: int = 11, n_atoms: int = 1, coupling_scale: float = 1.0,
                         decay_lengths: float = 2.0, window: float = 0.5, n_out: int = 401) -> OracleRun:
    """Loss rate of one waveguide photon from exact evolution (eigen-propagation)."""
    s = s.replace(m1=s.m1 * coupling_scale, mw=s.mw * coupling_scale, m2=s.m2 * coupling_scale)
    modes = ModeSet.around_probe(s, n_modes)
    basis = build_basis(modes, n_atoms, 1, 1)
    H = build_hamiltonian(s, modes, basis)
    estimate = golden_rule_single_photon(s, modes, n_atoms)
    if not estimate > 0:
        raise RateBelowResolution("no loss channel: golden-rule estimate is zero")
    t_end = decay_lengths / estimate
    traj = evolve(waveguide_state(H), H, t_end, t_end, method="eig", n_out=n_out)
    fit = extract_rate(traj, window)
    return OracleRun(fit.rate, fit, H.dimension, t_end, estimate, traj)
