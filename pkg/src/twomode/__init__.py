"""Two-mode cavity transparency: interference-suppressed single-photon
scattering and enhanced two-photon absorption in a ring resonator."""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    CapacityError,
    ExtractionError,
    InvalidInputError,
    PoleError,
    RateBelowResolution,
    StepControlError,
    TwoModeError,
)
from .params import Scenario, rubidium_default_scenario  # noqa: E402
from .perturbative import (  # noqa: E402
    converged_two_photon_rate,
    effective_matrix_element,
    single_photon_rate,
    two_photon_amplitudes,
    two_photon_rate_full,
    two_photon_rate_two_path,
)
from .dressed import build_effective_two_level, two_photon_rate_dressed  # noqa: E402

__all__ = [
    "CapacityError", "ExtractionError", "InvalidInputError", "PoleError", "RateBelowResolution",
    "StepControlError", "TwoModeError", "Scenario", "rubidium_default_scenario",
    "converged_two_photon_rate", "effective_matrix_element", "single_photon_rate",
    "two_photon_amplitudes", "two_photon_rate_full", "two_photon_rate_two_path",
    "build_effective_two_level", "two_photon_rate_dressed",
]
