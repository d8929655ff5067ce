"""Physical scenario, unit conversions and the rubidium/toroid default.

Every energy-like quantity is stored as an angular frequency (E/hbar, rad/s).
Conversions to ordinary frequency or wavelength happen only at I/O boundaries.
"""
from __future__ import annotations

import dataclasses
import hashlib
import math
import sys
import warnings
from dataclasses import dataclass
from pathlib import Path

from scipy.constants import c as SPEED_OF_LIGHT
from scipy.constants import epsilon_0, hbar

from .errors import InvalidInputError

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover
    import tomli as tomllib

TWO_PI = 2.0 * math.pi

# Literature estimates, not values from the toroid example.
# Rb D2 (5S1/2 -> 5P3/2) reduced dipole, 4.227 e*a0.
RB_DIPOLE_S_P = 3.584e-29
# Rb 5P3/2 -> 5D5/2 reduced dipole inferred from the ~240 ns 5D5/2 lifetime.
RB_DIPOLE_P_D = 1.0e-29

RB_TWO_PHOTON_WAVELENGTH = 778e-9
RB_DELTA1_WAVELENGTH = 2.1e-9
TOROID_MODE_SPACING_HZ = 1.8e12
TOROID_MODE_VOLUME = 7.6e-17
RB_WIDTH = math.pi * 1e8


@dataclass(frozen=True)
class Scenario:
    """Complete parameter set, angular-frequency units throughout.

    ``delta`` is the probe offset from the midpoint ``ebar`` of the bracketing
    mode pair; ``delta1``/``delta2`` are the atomic detunings from ``ebar`` and
    ``2*ebar``. ``m1``, ``m2``, ``mw`` are the couplings divided by hbar.
    """

    omega0: float
    delta: float
    ebar: float
    delta1: float
    delta2: float
    gamma1: float
    gamma2: float
    m1: float
    m2: float
    mw: float
    n_atoms: float

    def __post_init__(self):
        for f in dataclasses.fields(self):
            v = getattr(self, f.name)
            if isinstance(v, bool) or not isinstance(v, (int, float)):
                raise InvalidInputError(f"{f.name} must be a real number, got {v!r}")
            if not math.isfinite(v):
                raise InvalidInputError(f"{f.name} must be finite, got {v!r}")
        if self.omega0 <= 0:
            raise InvalidInputError(f"omega0 must be > 0, got {self.omega0}")
        if self.gamma1 <= 0:
            raise InvalidInputError(f"gamma1 must be > 0, got {self.gamma1}")
        if self.gamma2 <= 0:
            raise InvalidInputError(f"gamma2 must be > 0, got {self.gamma2}")
        if self.n_atoms < 0:
            raise InvalidInputError(f"n_atoms must be >= 0, got {self.n_atoms}")

    def replace(self, **changes) -> "Scenario":
        return dataclasses.replace(self, **changes)

    @property
    def delta_frac(self) -> float:
        return self.delta / self.omega0

    def scaled_couplings(self, factor: float) -> "Scenario":
        return self.replace(m1=self.m1 * factor, m2=self.m2 * factor, mw=self.mw * factor)

    def to_display(self) -> dict[str, float]:
        """SI display units: angular quantities as ordinary frequency (Hz)."""
        out = {}
        for name in _ANGULAR_FIELDS:
            out[f"{name}_hz"] = getattr(self, name) / TWO_PI
        out["gamma1_per_s"] = self.gamma1
        out["gamma2_per_s"] = self.gamma2
        out["n_atoms"] = self.n_atoms
        return out

    @classmethod
    def from_display(cls, values: dict[str, float]) -> "Scenario":
        kwargs = {name: values[f"{name}_hz"] * TWO_PI for name in _ANGULAR_FIELDS}
        return cls(
            gamma1=values["gamma1_per_s"],
            gamma2=values["gamma2_per_s"],
            n_atoms=values["n_atoms"],
            **kwargs,
        )

    def fingerprint(self) -> str:
        canon = ";".join(f"{f.name}={getattr(self, f.name)!r}" for f in dataclasses.fields(self))
        return hashlib.sha256(canon.encode("ascii")).hexdigest()[:16]


_ANGULAR_FIELDS = ("omega0", "delta", "ebar", "delta1", "delta2", "m1", "m2", "mw")


@dataclass(frozen=True)
class ResonatorGeometry:
    fiber_diameter: float
    ring_diameter: float
    mode_volume: float
    probe_wavelength: float

    def __post_init__(self):
        for f in dataclasses.fields(self):
            v = getattr(self, f.name)
            if not (isinstance(v, (int, float)) and math.isfinite(v) and v > 0):
                raise InvalidInputError(f"{f.name} must be positive, got {v!r}")
        if self.ring_diameter < 10 * self.fiber_diameter:
            warnings.warn(
                "ring diameter is not much larger than the fiber diameter; "
                "the straight-fiber field approximation is poor",
                stacklevel=2,
            )


TOROID_EXAMPLE = ResonatorGeometry(
    fiber_diameter=0.35e-6,
    ring_diameter=50e-6,
    mode_volume=TOROID_MODE_VOLUME,
    probe_wavelength=RB_TWO_PHOTON_WAVELENGTH,
)


def atoms_in_mode_volume(rho: float, v_m: float) -> float:
    """Number of atoms N_A = rho * V_m (rho in atoms/m^3)."""
    if rho < 0:
        raise InvalidInputError(f"density must be >= 0, got {rho}")
    if v_m <= 0:
        raise InvalidInputError(f"mode volume must be > 0, got {v_m}")
    return rho * v_m


def detuning_from_wavelengths(lambda_ref: float, delta_lambda: float) -> float:
    """Angular-frequency offset for a small wavelength offset, 2*pi*c*dl/l^2."""
    if lambda_ref <= 0:
        raise InvalidInputError(f"reference wavelength must be > 0, got {lambda_ref}")
    return TWO_PI * SPEED_OF_LIGHT * delta_lambda / lambda_ref**2


def vacuum_field_amplitude(omega: float, v_m: float) -> float:
    """Single-photon field sqrt(hbar*omega / (2*eps0*V)) in V/m.

    Stands in for the exact fiber-mode field integral; only an estimate.
    """
    if omega <= 0 or v_m <= 0:
        raise InvalidInputError("omega and v_m must be positive")
    return math.sqrt(hbar * omega / (2.0 * epsilon_0 * v_m))


def matrix_element(dipole: float, field: float) -> float:
    """Coupling d*E/hbar in rad/s."""
    if field < 0:
        raise InvalidInputError(f"field must be >= 0, got {field}")
    return dipole * field / hbar


def midpoint_for_wavelength(omega0: float, wavelength: float) -> float:
    """Midpoint (l + 1/2)*omega0 of the mode pair bracketing the probe."""
    omega = TWO_PI * SPEED_OF_LIGHT / wavelength
    l_r = round(omega / omega0 - 0.5)
    return (l_r + 0.5) * omega0


def rubidium_default_scenario(
    delta_frac: float = 0.0,
    rho_cm3: float = 1e15,
    dipole1: float = RB_DIPOLE_S_P,
    dipole2: float = RB_DIPOLE_P_D,
) -> Scenario:
    """The rubidium vapour / silica toroid example.

    Mode spacing, Mw = omega0/3, the widths, the 2.1 nm detuning at 778 nm and
    the mode volume come from the example; the dipole moments are estimates.
    """
    settings = {"delta_frac": delta_frac, "rho_cm3": rho_cm3, "dipole1_cm": dipole1, "dipole2_cm": dipole2}
    return resolve_settings(settings).scenario


# ---------------------------------------------------------------------------
# scenario files


@dataclass(frozen=True)
class ResolvedScenario:
    scenario: Scenario
    mode_volume: float | None
    rho_cm3: float | None
    inputs: dict

    @property
    def fingerprint(self) -> str:
        return self.scenario.fingerprint()


# key -> description; angular quantities accept _hz (x 2*pi) or _rad_s.
SCENARIO_KEYS = {
    "omega0_hz": "mode spacing omega0/2pi",
    "omega0_rad_s": "mode spacing omega0",
    "delta_frac": "probe offset delta/omega0",
    "delta_hz": "probe offset delta/2pi",
    "delta_rad_s": "probe offset delta",
    "wavelength_m": "probe wavelength, fixes the mode-pair midpoint",
    "ebar_hz": "mode-pair midpoint /2pi",
    "ebar_rad_s": "mode-pair midpoint",
    "delta1_lambda_m": "detuning of |1_A> as a wavelength offset at wavelength_m",
    "delta1_hz": "detuning of |1_A> /2pi",
    "delta1_rad_s": "detuning of |1_A>",
    "delta2_hz": "detuning of |2_A> /2pi",
    "delta2_rad_s": "detuning of |2_A>",
    "gamma1_per_s": "half-width of |1_A>",
    "gamma2_per_s": "width of |2_A>",
    "gamma2_frac": "width of |2_A> as a fraction of omega0",
    "mw_frac": "waveguide coupling Mw/(hbar omega0)",
    "mw_hz": "waveguide coupling /2pi",
    "mw_rad_s": "waveguide coupling",
    "dipole1_cm": "|0_A>-|1_A> dipole moment (C m), used with the vacuum field",
    "dipole2_cm": "|1_A>-|2_A> dipole moment (C m), used with the vacuum field",
    "m1_hz": "atomic coupling M1 /2pi (overrides dipole1_cm)",
    "m1_rad_s": "atomic coupling M1",
    "m2_hz": "atomic coupling M2 /2pi (overrides dipole2_cm)",
    "m2_rad_s": "atomic coupling M2",
    "vm_m3": "effective mode volume",
    "rho_cm3": "atomic density per cm^3",
    "n_atoms": "number of atoms (overrides rho_cm3)",
}

_ALTERNATIVES = [
    ("omega0_hz", "omega0_rad_s"),
    ("delta_frac", "delta_hz", "delta_rad_s"),
    ("wavelength_m", "ebar_hz", "ebar_rad_s"),
    ("delta1_lambda_m", "delta1_hz", "delta1_rad_s"),
    ("delta2_hz", "delta2_rad_s"),
    ("gamma2_per_s", "gamma2_frac"),
    ("mw_frac", "mw_hz", "mw_rad_s"),
    ("dipole1_cm", "m1_hz", "m1_rad_s"),
    ("dipole2_cm", "m2_hz", "m2_rad_s"),
    ("rho_cm3", "n_atoms"),
]

DEFAULT_SETTINGS = {
    "omega0_hz": TOROID_MODE_SPACING_HZ,
    "delta_frac": 0.0,
    "wavelength_m": RB_TWO_PHOTON_WAVELENGTH,
    "delta1_lambda_m": RB_DELTA1_WAVELENGTH,
    "delta2_hz": 0.0,
    "gamma1_per_s": RB_WIDTH,
    "gamma2_per_s": RB_WIDTH,
    "mw_frac": 1.0 / 3.0,
    "dipole1_cm": RB_DIPOLE_S_P,
    "dipole2_cm": RB_DIPOLE_P_D,
    "vm_m3": TOROID_MODE_VOLUME,
    "rho_cm3": 1e15,
}


def _angular(values, stem, omega0=None, frac_key=None):
    if f"{stem}_rad_s" in values:
        return float(values[f"{stem}_rad_s"])
    if f"{stem}_hz" in values:
        return TWO_PI * float(values[f"{stem}_hz"])
    if frac_key and frac_key in values:
        return float(values[frac_key]) * omega0
    return None


def check_keys(settings: dict) -> None:
    unknown = sorted(set(settings) - set(SCENARIO_KEYS))
    if unknown:
        raise InvalidInputError(f"unknown scenario key(s): {', '.join(unknown)}")
    for group in _ALTERNATIVES:
        given = [k for k in group if k in settings]
        if len(given) > 1:
            raise InvalidInputError(f"conflicting keys {given}: give only one of {list(group)}")
    for k, v in settings.items():
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise InvalidInputError(f"{k} must be a number, got {v!r}")


def merge_settings(base: dict, overrides: dict) -> dict:
    """Overlay ``overrides`` on ``base``; an override displaces its alternatives."""
    check_keys(overrides)
    merged = dict(base)
    for key in overrides:
        for group in _ALTERNATIVES:
            if key in group:
                for alt in group:
                    merged.pop(alt, None)
    merged.update(overrides)
    return merged


def resolve_settings(settings: dict) -> ResolvedScenario:
    """Turn SI key/value settings (missing keys defaulted) into a Scenario."""
    check_keys(settings)
    values = merge_settings(DEFAULT_SETTINGS, settings)

    omega0 = _angular(values, "omega0")
    delta = _angular(values, "delta", omega0, "delta_frac")
    wavelength = float(values.get("wavelength_m", RB_TWO_PHOTON_WAVELENGTH))
    ebar = _angular(values, "ebar")
    if ebar is None:
        if wavelength <= 0:
            raise InvalidInputError("wavelength_m must be > 0")
        ebar = midpoint_for_wavelength(omega0, wavelength)
    delta1 = _angular(values, "delta1")
    if delta1 is None:
        delta1 = detuning_from_wavelengths(wavelength, float(values["delta1_lambda_m"]))
    delta2 = _angular(values, "delta2")
    gamma1 = float(values["gamma1_per_s"])
    gamma2 = float(values["gamma2_per_s"]) if "gamma2_per_s" in values else float(values["gamma2_frac"]) * omega0
    mw = _angular(values, "mw", omega0, "mw_frac")

    v_m = float(values["vm_m3"])
    if v_m <= 0:
        raise InvalidInputError("vm_m3 must be > 0")
    field = None
    m1 = _angular(values, "m1")
    m2 = _angular(values, "m2")
    if m1 is None or m2 is None:
        field = vacuum_field_amplitude(ebar, v_m)
    if m1 is None:
        m1 = matrix_element(float(values["dipole1_cm"]), field)
    if m2 is None:
        m2 = matrix_element(float(values["dipole2_cm"]), field)

    rho_cm3 = None
    if "n_atoms" in values:
        n_atoms = float(values["n_atoms"])
    else:
        rho_cm3 = float(values["rho_cm3"])
        n_atoms = atoms_in_mode_volume(rho_cm3 * 1e6, v_m)

    scenario = Scenario(
        omega0=omega0, delta=delta, ebar=ebar, delta1=delta1, delta2=delta2,
        gamma1=gamma1, gamma2=gamma2, m1=m1, m2=m2, mw=mw, n_atoms=n_atoms,
    )
    inputs = dict(sorted(values.items()))
    if field is not None:
        inputs["vacuum_field_v_m"] = field
    return ResolvedScenario(scenario=scenario, mode_volume=v_m, rho_cm3=rho_cm3, inputs=inputs)


def parse_scenario_text(text: str) -> dict:
    """Parse flat ``key = value`` lines (``#`` comments) into a settings dict."""
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise InvalidInputError(f"malformed scenario file: {exc}") from None
    for k, v in data.items():
        if isinstance(v, dict):
            raise InvalidInputError(f"scenario files are flat; section [{k}] not allowed")
    check_keys(data)
    return {k: float(v) for k, v in data.items()}


def load_scenario(path, overrides: dict | None = None) -> ResolvedScenario:
    settings = parse_scenario_text(Path(path).read_text(encoding="utf-8"))
    if overrides:
        settings = merge_settings(settings, overrides)
    return resolve_settings(settings)


def format_scenario_file(settings: dict) -> str:
    lines = ["# twomode scenario (SI units, suffix names the unit)"]
    for k in sorted(settings):
        lines.append(f"{k} = {float(settings[k])!r}")
    return "\n".join(lines) + "\n"
