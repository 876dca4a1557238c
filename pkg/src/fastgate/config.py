"""Strict JSON configuration parsing for the command-line tools.

Unknown keys are rejected rather than ignored, so unit mistakes in key names
(everything unit-bearing carries its unit as a suffix) fail loudly. Trap
frequencies are given in ordinary Hz and converted to angular internally.
"""

from __future__ import annotations

import json
import math

from scipy.constants import atomic_mass

from .core import KickSequence, TrapIonConfig
from .exceptions import ConfigurationError
from .hardware import DispersionComponent, HardwareConstraints
from .optimizer import OptimizerConfig
from .rap import ChirpedPulse

TWO_PI = 2.0 * math.pi


def _check_keys(section, data, allowed):
    unknown = set(data) - set(allowed)
    if unknown:
        key = sorted(unknown)[0]
        raise ConfigurationError(f"unknown key '{section}.{key}'" if section
                                 else f"unknown key '{key}'")


def _number(section, data, key, default=None):
    if key not in data:
        if default is None:
            raise ConfigurationError(f"missing required key '{section}.{key}'")
        return default
    value = data[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigurationError(f"'{section}.{key}' must be a number, got {value!r}")
    return value


def load_document(path):
    try:
        with open(path, "r", encoding="utf-8") as handle:
            return json.load(handle)
    except FileNotFoundError:
        raise ConfigurationError(f"config file not found: {path}")
    except json.JSONDecodeError as err:
        raise ConfigurationError(f"config is not valid JSON: {err}")


def parse_trap_ion(doc) -> TrapIonConfig:
    """ion/trap/laser sections of a run document."""
    ion = doc.get("ion", {})
    trap = doc.get("trap", {})
    laser = doc.get("laser", {})
    _check_keys("ion", ion, {"mass_amu", "kick_wavelength_nm", "excited_state_lifetime_ns"})
    _check_keys("trap", trap, {"frequency_hz"})
    _check_keys("laser", laser, {"repetition_rate_hz", "momentum_factor"})
    return TrapIonConfig(
        ion_mass=_number("ion", ion, "mass_amu", 40.0) * atomic_mass,
        kick_wavelength=_number("ion", ion, "kick_wavelength_nm", 393.3) * 1e-9,
        excited_state_lifetime=_number("ion", ion, "excited_state_lifetime_ns", 6.9) * 1e-9,
        trap_frequency=TWO_PI * _number("trap", trap, "frequency_hz", 0.27e6),
        repetition_rate=_number("laser", laser, "repetition_rate_hz", 5e9),
    )


def parse_momentum_factor(doc) -> float:
    return _number("laser", doc.get("laser", {}), "momentum_factor", 2.0)


def parse_optimizer(doc, rng_seed) -> OptimizerConfig:
    section = doc.get("optimizer", {})
    _check_keys("optimizer", section, {
        "population_size", "generations", "mutation_rate", "max_kicks",
        "max_multiplicity", "duration_budget_trap_periods", "tolerance_eps",
        "tolerance_phi_rad", "phase_target_rad", "seed_kick_counts"})
    counts = section.get("seed_kick_counts", [4, 6])
    if not (isinstance(counts, list) and all(isinstance(c, int) and c >= 2 for c in counts)):
        raise ConfigurationError("'optimizer.seed_kick_counts' must be a list of integers >= 2")
    return OptimizerConfig(
        population_size=int(_number("optimizer", section, "population_size", 48)),
        generations=int(_number("optimizer", section, "generations", 40)),
        mutation_rate=_number("optimizer", section, "mutation_rate", 0.35),
        max_kicks=int(_number("optimizer", section, "max_kicks", 8)),
        max_multiplicity=int(_number("optimizer", section, "max_multiplicity", 8)),
        duration_budget=_number("optimizer", section, "duration_budget_trap_periods", 0.85),
        tolerance_eps=_number("optimizer", section, "tolerance_eps", 1e-3),
        tolerance_phi=_number("optimizer", section, "tolerance_phi_rad", 1e-3),
        phase_target=_number("optimizer", section, "phase_target_rad", math.pi / 4),
        rng_seed=rng_seed,
    ), counts


def parse_error_budget(doc):
    section = doc.get("error_budget", {})
    _check_keys("error_budget", section, {"t_wait_ps", "pulse_duration_ps"})
    return (_number("error_budget", section, "t_wait_ps", 1.0) * 1e-12,
            _number("error_budget", section, "pulse_duration_ps", 0.5) * 1e-12)


def parse_hardware(doc) -> HardwareConstraints:
    section = doc.get("hardware", {})
    _check_keys("hardware", section, {
        "slot_period_ps", "pockels_min_window_ns", "steady_state_budget_slots",
        "idle_decimation", "payload_energy_factor", "settle_time_us",
        "horizon_slots", "mode"})
    return HardwareConstraints(
        slot_period=_number("hardware", section, "slot_period_ps", 200.0) * 1e-12,
        pockels_min_window=_number("hardware", section, "pockels_min_window_ns", 35.0) * 1e-9,
        steady_state_budget_slots=int(_number("hardware", section,
                                              "steady_state_budget_slots", 750)),
        idle_decimation=int(_number("hardware", section, "idle_decimation", 4)),
        payload_energy_factor=_number("hardware", section, "payload_energy_factor", 4.0),
        settle_time=_number("hardware", section, "settle_time_us", 1.0) * 1e-6,
    )


def parse_pattern_options(doc):
    section = doc.get("hardware", {})
    horizon = int(_number("hardware", section, "horizon_slots", 5_000_000))
    mode = section.get("mode", "single")
    if mode not in ("single", "per-burst"):
        raise ConfigurationError("'hardware.mode' must be 'single' or 'per-burst'")
    return horizon, mode


def parse_sequence(doc, default_grid_period=2e-10) -> KickSequence:
    section = doc.get("sequence")
    if section is None:
        raise ConfigurationError("missing required section 'sequence'")
    _check_keys("sequence", section, {"slots", "multiplicities", "momentum_factor",
                                      "grid_period_ps"})
    slots = section.get("slots")
    if not isinstance(slots, list):
        raise ConfigurationError("'sequence.slots' must be a list of slot indices")
    mults = section.get("multiplicities", [1] * len(slots))
    return KickSequence.from_arrays(
        slots, mults,
        momentum_factor=_number("sequence", section, "momentum_factor", 2.0),
        grid_period=_number("sequence", section, "grid_period_ps",
                            default_grid_period * 1e12) * 1e-12,
    )


def parse_chirped_pulse(doc) -> ChirpedPulse:
    section = doc.get("pulse", {})
    _check_keys("pulse", section, {"fwhm_tl_ps", "gdd_ps2", "peak_rabi_rad_per_s",
                                   "detuning_offset_rad_per_s"})
    return ChirpedPulse(
        fwhm_tl=_number("pulse", section, "fwhm_tl_ps", 1.0) * 1e-12,
        gdd=_number("pulse", section, "gdd_ps2", 5.0) * 1e-24,
        peak_rabi=_number("pulse", section, "peak_rabi_rad_per_s", TWO_PI * 1e12),
        detuning_offset=_number("pulse", section, "detuning_offset_rad_per_s", 0.0),
    )


def parse_scan(doc):
    section = doc.get("scan", {})
    _check_keys("scan", section, {"energy_min", "energy_max", "points", "spacing"})
    lo = _number("scan", section, "energy_min", 0.01)
    hi = _number("scan", section, "energy_max", 10.0)
    points = int(_number("scan", section, "points", 50))
    spacing = section.get("spacing", "log")
    if spacing not in ("log", "linear"):
        raise ConfigurationError("'scan.spacing' must be 'log' or 'linear'")
    if lo <= 0 and spacing == "log":
        raise ConfigurationError("'scan.energy_min' must be positive for log spacing")
    if hi < lo or points < 1:
        raise ConfigurationError("scan range must satisfy energy_max >= energy_min, points >= 1")
    return lo, hi, points, spacing


def parse_solver_tolerance(doc):
    section = doc.get("solver", {})
    _check_keys("solver", section, {"tolerance"})
    return _number("solver", section, "tolerance", 1e-10)


def parse_components(doc):
    section = doc.get("components")
    if not isinstance(section, list) or not section:
        raise ConfigurationError("missing required list 'components'")
    components = []
    for index, item in enumerate(section):
        _check_keys(f"components[{index}]", item,
                    {"name", "dispersion_ps_nm", "tunable_range_ps_nm"})
        components.append(DispersionComponent(
            name=str(item.get("name", f"component_{index}")),
            dispersion=_number(f"components[{index}]", item, "dispersion_ps_nm"),
            tunable_range=_number(f"components[{index}]", item, "tunable_range_ps_nm", 0.0),
        ))
    stretcher = _number("", doc, "stretcher_coeff_ps_nm_per_m", -0.041)
    return components, stretcher
