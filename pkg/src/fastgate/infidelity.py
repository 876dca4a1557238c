"""Spontaneous-emission error budget for resonant momentum kicks.

Each kick leaves the ion in the excited state for the delay between the two
counter-propagating pulses, plus roughly half the excitation pulse itself.
Decay during that exposure scrambles the internal state, so the per-kick
relaxation probability compounds over a sequence.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

from .exceptions import DomainError

# exposure model: full inter-pulse delay plus half the pulse duration
# (population averages ~1/2 while the excitation pulse is on)


def per_kick_error(t_wait: float, pulse_duration: float, decay_rate: float) -> float:
    """Probability that the ion emits a photon during one kick cycle.

    eps_1 = 1 - exp(-gamma * (t_wait + pulse_duration / 2)), which reduces to
    gamma * t_wait at leading order. Valid for gamma * (t_wait + pulse_duration)
    well below 1; a warning is emitted above 0.1.
    """
    if t_wait < 0 or pulse_duration < 0 or decay_rate < 0:
        raise DomainError("per_kick_error requires non-negative t_wait, pulse_duration, decay_rate")
    exposure_check = decay_rate * (t_wait + pulse_duration)
    if exposure_check > 0.1:
        warnings.warn(
            f"gamma*(t_wait + pulse_duration) = {exposure_check:.3g} is outside the "
            "short-exposure regime; the per-kick error model is unreliable here",
            stacklevel=2,
        )
    return -math.expm1(-decay_rate * (t_wait + 0.5 * pulse_duration))


def sequence_infidelity(eps_1: float, n_kicks: int) -> float:
    """Compound infidelity eps_N = 1 - (1 - eps_1)^N of an N-kick sequence."""
    if not 0.0 <= eps_1 <= 1.0:
        raise DomainError(f"per-kick error must lie in [0, 1], got {eps_1!r}")
    if n_kicks < 0:
        raise DomainError(f"kick count must be >= 0, got {n_kicks}")
    if eps_1 == 1.0:
        return 0.0 if n_kicks == 0 else 1.0
    return -math.expm1(n_kicks * math.log1p(-eps_1))


@dataclass(frozen=True)
class KickErrorBudget:
    """Spontaneous-emission budget of a full kick sequence."""

    t_wait: float
    pulse_duration: float
    decay_rate: float
    n_kicks: int
    per_kick: float
    total: float

    @classmethod
    def build(cls, t_wait, pulse_duration, decay_rate, n_kicks):
        eps_1 = per_kick_error(t_wait, pulse_duration, decay_rate)
        return cls(
            t_wait=t_wait,
            pulse_duration=pulse_duration,
            decay_rate=decay_rate,
            n_kicks=n_kicks,
            per_kick=eps_1,
            total=sequence_infidelity(eps_1, n_kicks),
        )
