"""Kick-sequence dynamics of a two-ion crystal driven by state-dependent momentum kicks.

A pulsed laser delivers momentum kicks on a fixed repetition-rate grid. Each kick
displaces the center-of-mass and stretch modes in phase space by an amount whose
sign depends on the internal (spin) state of each ion. This module evaluates the
mode closure sums, the accumulated two-qubit phase, the gate error, and the
phase-space trajectories of both modes for any kick sequence.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.constants import atomic_mass, hbar

from .exceptions import ConfigurationError, DomainError
from .infidelity import per_kick_error, sequence_infidelity

TWO_PI = 2.0 * math.pi
SQRT3 = math.sqrt(3.0)

# long-double 2*pi for angle reduction of large phases (omega*t can reach ~1e4 rad)
_TWO_PI_LD = 2.0 * np.arccos(np.longdouble(-1.0))


@dataclass(frozen=True)
class TrapIonConfig:
    """Physical configuration of the trapped-ion system and kick laser.

    Parameters
    ----------
    ion_mass : float
        Ion mass in kg. Default is a mass-40 ion.
    kick_wavelength : float
        Wavelength of the resonant kick transition in m.
    trap_frequency : float
        Angular trap frequency omega in rad/s (not Hz).
    repetition_rate : float
        Pulse repetition rate in Hz; the kick grid period is its inverse.
    excited_state_lifetime : float
        Lifetime of the excited state used for the kicks, in s.
    """

    ion_mass: float = 40.0 * atomic_mass
    kick_wavelength: float = 393.3e-9
    trap_frequency: float = TWO_PI * 0.27e6
    repetition_rate: float = 5e9
    excited_state_lifetime: float = 6.9e-9

    def __post_init__(self):
        for name in ("ion_mass", "kick_wavelength", "trap_frequency",
                     "repetition_rate", "excited_state_lifetime"):
            value = getattr(self, name)
            if not (isinstance(value, (int, float)) and math.isfinite(value) and value > 0):
                raise ConfigurationError(f"{name} must be a positive finite number, got {value!r}")

    @property
    def wavenumber(self):
        return TWO_PI / self.kick_wavelength

    @property
    def grid_period(self):
        return 1.0 / self.repetition_rate

    @property
    def trap_period(self):
        return TWO_PI / self.trap_frequency

    @property
    def decay_rate(self):
        return 1.0 / self.excited_state_lifetime


@dataclass(frozen=True)
class ModeParameters:
    """Derived kick-strength and mode-frequency parameters."""

    eta: float
    alpha_c: float
    alpha_s: float
    omega_c: float
    omega_s: float


def derive_parameters(config: TrapIonConfig) -> ModeParameters:
    """Derive the Lamb-Dicke parameter and per-mode kick strengths.

    eta = k * sqrt(hbar / (2 m omega)) with k the kick wavenumber. The
    center-of-mass mode sits at the trap frequency, the stretch mode at
    sqrt(3) times it; their kick strengths are alpha_c = eta / 2^(3/2) and
    alpha_s = alpha_c / 3^(1/4).
    """
    omega = config.trap_frequency
    eta = config.wavenumber * math.sqrt(hbar / (2.0 * config.ion_mass * omega))
    if not (math.isfinite(eta) and eta > 0):
        raise ConfigurationError(f"derived Lamb-Dicke parameter is not positive finite: {eta!r}")
    alpha_c = eta / 2.0 ** 1.5
    return ModeParameters(
        eta=eta,
        alpha_c=alpha_c,
        alpha_s=alpha_c / 3.0 ** 0.25,
        omega_c=omega,
        omega_s=SQRT3 * omega,
    )


@dataclass(frozen=True)
class SpinConfiguration:
    """Joint sigma_z eigenvalues (s1, s2) of the two ions, each +1 or -1."""

    s1: int
    s2: int

    def __post_init__(self):
        if self.s1 not in (-1, 1) or self.s2 not in (-1, 1):
            raise DomainError(f"spin eigenvalues must be +1 or -1, got ({self.s1}, {self.s2})")

    @property
    def sum_factor(self):
        """Center-of-mass coupling factor s1 + s2, in {-2, 0, +2}."""
        return self.s1 + self.s2

    @property
    def diff_factor(self):
        """Stretch-mode coupling factor s1 - s2, in {-2, 0, +2}."""
        return self.s1 - self.s2


SPIN_CONFIGURATIONS = (
    SpinConfiguration(+1, +1),
    SpinConfiguration(+1, -1),
    SpinConfiguration(-1, +1),
    SpinConfiguration(-1, -1),
)


@dataclass(frozen=True)
class KickSequence:
    """An ordered kick schedule on the repetition-rate grid.

    Each kick is a (slot_index, multiplicity) pair: multiplicity z counts how
    many consecutive comb pulses are bunched into the kick, all treated as
    arriving at the slot time (the slot period is tiny against the trap
    period). ``momentum_factor`` is the momentum per picked comb pulse in
    units of a single-pulse photon recoil; the default 2 describes a
    counter-propagating pulse pair.
    """

    kicks: tuple
    momentum_factor: float = 2.0
    grid_period: float = 2e-10

    def __post_init__(self):
        kicks = tuple((int(slot), int(z)) for slot, z in self.kicks)
        object.__setattr__(self, "kicks", kicks)
        previous = -1
        for slot, z in kicks:
            if slot < 0:
                raise DomainError(f"slot index must be >= 0, got {slot}")
            if slot <= previous:
                raise DomainError(f"slot indices must be strictly increasing, got {slot} after {previous}")
            if z < 1:
                raise DomainError(f"kick multiplicity must be >= 1, got {z}")
            previous = slot
        if not (self.grid_period > 0 and math.isfinite(self.grid_period)):
            raise DomainError(f"grid_period must be positive, got {self.grid_period!r}")
        if not (self.momentum_factor > 0 and math.isfinite(self.momentum_factor)):
            raise DomainError(f"momentum_factor must be positive, got {self.momentum_factor!r}")

    @classmethod
    def from_arrays(cls, slots, multiplicities=None, momentum_factor=2.0, grid_period=2e-10):
        if multiplicities is None:
            multiplicities = [1] * len(slots)
        if len(slots) != len(multiplicities):
            raise DomainError("slots and multiplicities must have equal length")
        return cls(tuple(zip(slots, multiplicities)), momentum_factor, grid_period)

    @property
    def slots(self):
        return tuple(slot for slot, _ in self.kicks)

    @property
    def multiplicities(self):
        return tuple(z for _, z in self.kicks)

    @property
    def times(self):
        """Kick arrival times in seconds, slot_index * grid_period."""
        return np.array([slot * self.grid_period for slot, _ in self.kicks])

    @property
    def duration(self):
        """Total span t_N - t_1 in seconds (0 for one kick or none)."""
        if len(self.kicks) < 2:
            return 0.0
        return (self.kicks[-1][0] - self.kicks[0][0]) * self.grid_period

    @property
    def pulse_count(self):
        """Total number of picked comb pulses, sum of multiplicities."""
        return sum(z for _, z in self.kicks)

    def __len__(self):
        return len(self.kicks)


def effective_alphas(seq: KickSequence, config: TrapIonConfig):
    """Per-mode kick strengths including the momentum factor."""
    params = derive_parameters(config)
    return seq.momentum_factor * params.alpha_c, seq.momentum_factor * params.alpha_s


def closure_sums(seq: KickSequence, config: TrapIonConfig):
    """Mode phasor sums (S_c, S_s) with S = sum_n z_n exp(-i omega_mode t_n).

    Both motional modes return to their initial phase-space point exactly when
    both sums vanish. The physical displacement of mode a_c is
    i (s1+s2) m_f alpha_c S_c and analogously for the stretch mode.
    """
    if len(seq) == 0:
        raise DomainError("closure_sums requires a non-empty kick sequence")
    params = derive_parameters(config)
    z = np.asarray(seq.multiplicities, dtype=np.longdouble)
    times = seq.times
    out = []
    for omega in (params.omega_c, params.omega_s):
        theta = np.mod(np.longdouble(omega) * np.asarray(times, dtype=np.longdouble), _TWO_PI_LD)
        re = float(np.sum(z * np.cos(theta)))
        im = float(-np.sum(z * np.sin(theta)))
        out.append(complex(re, im))
    return out[0], out[1]


def displacements(seq: KickSequence, config: TrapIonConfig, spin: SpinConfiguration):
    """Phase-space displacements (A_c, A_s) accumulated by a spin configuration."""
    s_c, s_s = closure_sums(seq, config)
    alpha_c_eff, alpha_s_eff = effective_alphas(seq, config)
    a_c = 1j * spin.sum_factor * alpha_c_eff * s_c
    a_s = 1j * spin.diff_factor * alpha_s_eff * s_s
    return a_c, a_s


def gate_error(seq: KickSequence, config: TrapIonConfig) -> float:
    """Worst-case residual displacement error eps = |A_c|^2 + |A_s|^2.

    Evaluated with both spin coupling factors at their maximum magnitude 2,
    an upper bound over the four spin configurations. Zero exactly when both
    closure sums vanish.
    """
    s_c, s_s = closure_sums(seq, config)
    alpha_c_eff, alpha_s_eff = effective_alphas(seq, config)
    return 4.0 * (alpha_c_eff ** 2 * abs(s_c) ** 2 + alpha_s_eff ** 2 * abs(s_s) ** 2)


def phase_kernel(x):
    """Pairwise phase kernel sin(sqrt(3) x)/sqrt(3) - sin(x).

    Vanishes as -x^3/3 for small x because the linear terms cancel.
    """
    x = np.asarray(x, dtype=float)
    return np.sin(SQRT3 * x) / SQRT3 - np.sin(x)


def closure_from_times(times, multiplicities, config: TrapIonConfig):
    """Closure sums (S_c, S_s) for arbitrary (ungridded) kick times in seconds."""
    times = np.asarray(times, dtype=float)
    if times.size == 0:
        raise DomainError("closure_from_times requires at least one kick")
    params = derive_parameters(config)
    z = np.asarray(multiplicities, dtype=np.longdouble)
    out = []
    for omega in (params.omega_c, params.omega_s):
        theta = np.mod(np.longdouble(omega) * times.astype(np.longdouble), _TWO_PI_LD)
        out.append(complex(float(np.sum(z * np.cos(theta))), float(-np.sum(z * np.sin(theta)))))
    return out[0], out[1]


def phase_from_times(times, multiplicities, config: TrapIonConfig, momentum_factor=2.0) -> float:
    """Pair-sum phase for kick times given in arrival (list) order.

    phi = (m_f alpha_c)^2 sum_{j>k} z_j z_k [sin(sqrt(3) w t_jk)/sqrt(3) - sin(w t_jk)]
    with t_jk = t_j - t_k and j > k by list position. Negating every time while
    keeping the order flips the sign of phi (the kernel is odd). Pair angles are
    reduced mod 2*pi in extended precision before the sine evaluations.
    """
    times = np.asarray(times, dtype=float)
    if times.size == 0:
        raise DomainError("phase_from_times requires at least one kick")
    if times.size == 1:
        return 0.0
    params = derive_parameters(config)
    alpha_eff = momentum_factor * params.alpha_c
    z = np.asarray(multiplicities, dtype=np.longdouble)
    omega = np.longdouble(params.omega_c)
    k, j = np.triu_indices(times.size, k=1)  # j is the later list position
    dt = times[j].astype(np.longdouble) - times[k].astype(np.longdouble)
    sign = np.sign(dt)
    x = sign * np.mod(omega * np.abs(dt), _TWO_PI_LD)
    x3 = sign * np.mod(np.longdouble(SQRT3) * omega * np.abs(dt), _TWO_PI_LD)
    terms = z[j] * z[k] * (np.sin(x3) / np.longdouble(SQRT3) - np.sin(x))
    return float(alpha_eff ** 2 * np.sum(terms))


def gate_phase(seq: KickSequence, config: TrapIonConfig) -> float:
    """Motional-state-independent phase accumulated by a closed kick sequence.

    Slot differences are formed exactly in integer arithmetic before the
    pair-sum kernel, so the result is translation invariant bit for bit.
    """
    if len(seq) == 0:
        raise DomainError("gate_phase requires a non-empty kick sequence")
    if len(seq) == 1:
        return 0.0
    params = derive_parameters(config)
    alpha_eff = seq.momentum_factor * params.alpha_c
    slots = np.asarray(seq.slots, dtype=np.int64)
    z = np.asarray(seq.multiplicities, dtype=np.longdouble)
    tau = np.longdouble(seq.grid_period)
    omega = np.longdouble(params.omega_c)

    j, k = np.triu_indices(len(slots), k=1)
    dt = (slots[k] - slots[j]).astype(np.longdouble) * tau  # later minus earlier, > 0
    x = np.mod(omega * dt, _TWO_PI_LD)
    x3 = np.mod(np.longdouble(SQRT3) * omega * dt, _TWO_PI_LD)
    terms = z[j] * z[k] * (np.sin(x3) / np.longdouble(SQRT3) - np.sin(x))
    return float(alpha_eff ** 2 * np.sum(terms))


@dataclass(frozen=True)
class PhaseSpaceTrajectory:
    """Rotating-frame phase-space polygon of both modes for one spin configuration.

    Vertices start at the origin; edge n has length |coupling| * alpha * z_n
    and the final vertex equals i * coupling * alpha * S_mode.
    """

    spin: SpinConfiguration
    com: np.ndarray
    stretch: np.ndarray

    def vertices(self, mode):
        if mode == "com":
            return self.com
        if mode == "stretch":
            return self.stretch
        raise DomainError(f"unknown mode {mode!r}, expected 'com' or 'stretch'")


def trajectory(seq: KickSequence, config: TrapIonConfig, spin: SpinConfiguration) -> PhaseSpaceTrajectory:
    """Accumulate per-kick displacement steps into phase-space polygons."""
    if len(seq) == 0:
        raise DomainError("trajectory requires a non-empty kick sequence")
    params = derive_parameters(config)
    alpha_c_eff, alpha_s_eff = effective_alphas(seq, config)
    z = np.asarray(seq.multiplicities, dtype=float)
    times = seq.times
    polygons = {}
    for mode, omega, alpha, coupling in (
        ("com", params.omega_c, alpha_c_eff, spin.sum_factor),
        ("stretch", params.omega_s, alpha_s_eff, spin.diff_factor),
    ):
        theta = np.mod(np.longdouble(omega) * np.asarray(times, dtype=np.longdouble), _TWO_PI_LD)
        scale = np.longdouble(coupling * alpha) * z.astype(np.longdouble)
        # step_n = i * coupling * alpha * z_n * exp(-i theta_n), accumulated in
        # extended precision so the final vertex tracks closure_sums
        step_re = scale * np.sin(theta)
        step_im = scale * np.cos(theta)
        vertices = np.zeros(len(z) + 1, dtype=complex)
        vertices[1:] = (np.cumsum(step_re).astype(np.float64)
                        + 1j * np.cumsum(step_im).astype(np.float64))
        polygons[mode] = vertices
    return PhaseSpaceTrajectory(spin=spin, com=polygons["com"], stretch=polygons["stretch"])


@dataclass(frozen=True)
class GateResult:
    """Summary of a kick sequence evaluated as a phase gate."""

    closure_c: complex
    closure_s: complex
    phase: float
    gate_error: float
    duration: float
    duration_periods: float
    infidelity_spontaneous: float


def evaluate_gate(seq: KickSequence, config: TrapIonConfig,
                  t_wait: float = 1e-12, pulse_duration: float = 1e-12) -> GateResult:
    """Evaluate closure, phase, error, duration, and spontaneous-emission infidelity.

    Every comb pulse in a multiplicity burst counts as an independent
    excitation cycle for the emission budget, so N is the total pulse count.
    """
    s_c, s_s = closure_sums(seq, config)
    eps1 = per_kick_error(t_wait, pulse_duration, config.decay_rate)
    return GateResult(
        closure_c=s_c,
        closure_s=s_s,
        phase=gate_phase(seq, config),
        gate_error=gate_error(seq, config),
        duration=seq.duration,
        duration_periods=seq.duration / config.trap_period,
        infidelity_spontaneous=sequence_infidelity(eps1, seq.pulse_count),
    )
