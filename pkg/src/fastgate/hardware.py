"""Hardware pulse-pattern compilation and laser-chain dispersion budgeting.

The pulse picker transmits a continuous decimated idle train to keep the
amplifier chain in steady state, and swaps in an every-slot payload burst for
the gate itself. A slower Pockels cell gates the payload through; it cannot
switch faster than its minimum window. After a repetition-rate change the
amplifier holds its previous pulse energy for a limited number of slots, which
bounds how many payload slots may ride one steady-state window.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .core import KickSequence
from .exceptions import CapacityError, CollisionError, DomainError

BITSTREAM_MAGIC = "FGPAT1"


@dataclass(frozen=True)
class HardwareConstraints:
    """Timing and amplifier limits of the pulse-switching chain."""

    slot_period: float = 200e-12
    pockels_min_window: float = 35e-9
    steady_state_budget_slots: int = 750
    idle_decimation: int = 4
    payload_energy_factor: float = 4.0
    settle_time: float = 1e-6

    def __post_init__(self):
        positive = {
            "slot_period": self.slot_period,
            "pockels_min_window": self.pockels_min_window,
            "steady_state_budget_slots": self.steady_state_budget_slots,
            "idle_decimation": self.idle_decimation,
            "payload_energy_factor": self.payload_energy_factor,
            "settle_time": self.settle_time,
        }
        for name, value in positive.items():
            if not value > 0:
                raise DomainError(f"{name} must be positive, got {value!r}")
        if self.pockels_min_window < self.slot_period:
            raise DomainError("pockels_min_window must be at least one slot period")

    @property
    def pockels_min_slots(self):
        """Minimum Pockels window in whole slots (integer arithmetic downstream)."""
        return math.ceil(self.pockels_min_window / self.slot_period - 1e-9)

    @property
    def settle_slots(self):
        return math.ceil(self.settle_time / self.slot_period - 1e-9)


@dataclass(frozen=True)
class PulsePattern:
    """Slot-level emission schedule over a finite horizon.

    ``bits`` holds one byte per slot (1 = transmit, 0 = block). Pockels
    windows and payload windows are stored as slot indices; second-valued
    views are derived from the slot period.
    """

    bits: np.ndarray
    slot_period: float
    pockels_windows: tuple            # ((start_slot, end_slot_exclusive), ...)
    payload_windows: tuple            # ((start_slot, length_slots), ...)
    idle_decimation: int
    mode: str = "single"
    notes: tuple = ()

    def __post_init__(self):
        bits = np.ascontiguousarray(np.asarray(self.bits, dtype=np.uint8))
        object.__setattr__(self, "bits", bits)
        object.__setattr__(self, "pockels_windows",
                           tuple((int(a), int(b)) for a, b in self.pockels_windows))
        object.__setattr__(self, "payload_windows",
                           tuple((int(a), int(b)) for a, b in self.payload_windows))

    @property
    def horizon_slots(self):
        return int(self.bits.size)

    @property
    def pockels_windows_s(self):
        """Gate windows as (start, end) in seconds."""
        return tuple((a * self.slot_period, b * self.slot_period) for a, b in self.pockels_windows)

    def to_rle_json(self) -> str:
        """Run-length-encoded JSON document, bit-exact under round-trip.

        Slots outside Pockels windows follow the idle decimation rule, so only
        the in-window bits are run-length encoded; everything else is implied
        by the idle descriptor.
        """
        gate_runs = []
        for start, end in self.pockels_windows:
            window_bits = self.bits[start:end]
            runs = []
            if window_bits.size:
                change = np.flatnonzero(np.diff(window_bits)) + 1
                begins = np.concatenate([[0], change])
                stops = np.concatenate([change, [window_bits.size]])
                runs = [[int(window_bits[b]), int(e - b)] for b, e in zip(begins, stops)]
            gate_runs.append({"start_slot": start, "runs": runs})
        doc = {
            "format": "fastgate-pattern-rle-v1",
            "slot_period_s": self.slot_period,
            "horizon_slots": self.horizon_slots,
            "gate_runs": gate_runs,
            "pockels_windows_slots": [list(w) for w in self.pockels_windows],
            "pockels_windows_s": [[a * self.slot_period, b * self.slot_period]
                                  for a, b in self.pockels_windows],
            "payload_windows": [{"start_slot": a, "length": b} for a, b in self.payload_windows],
            "idle": {"decimation": self.idle_decimation, "phase_slot": 0},
            "mode": self.mode,
            "notes": list(self.notes),
        }
        return json.dumps(doc, indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_rle_json(cls, text: str) -> "PulsePattern":
        doc = json.loads(text)
        if doc.get("format") != "fastgate-pattern-rle-v1":
            raise DomainError(f"unrecognized pattern format {doc.get('format')!r}")
        horizon = doc["horizon_slots"]
        decimation = doc["idle"]["decimation"]
        bits = _idle_bits(horizon, decimation)
        for start, end in doc["pockels_windows_slots"]:
            bits[start:end] = 0
        for window in doc["gate_runs"]:
            pos = window["start_slot"]
            for value, count in window["runs"]:
                bits[pos:pos + count] = value
                pos += count
        return cls(
            bits=bits,
            slot_period=doc["slot_period_s"],
            pockels_windows=tuple(tuple(w) for w in doc["pockels_windows_slots"]),
            payload_windows=tuple((w["start_slot"], w["length"]) for w in doc["payload_windows"]),
            idle_decimation=decimation,
            mode=doc["mode"],
            notes=tuple(doc.get("notes", ())),
        )

    def to_bitstream(self) -> bytes:
        """Raw one-byte-per-slot stream: 0x01 transmit, 0x00 block, slot 0 first."""
        header = (f"{BITSTREAM_MAGIC} slots={self.horizon_slots} "
                  f"slot_period_ps={self.slot_period * 1e12:.6f} "
                  "order=slot0-first byte1=transmit byte0=block\n")
        return header.encode("ascii") + self.bits.tobytes()

    @classmethod
    def bits_from_bitstream(cls, blob: bytes) -> np.ndarray:
        newline = blob.index(b"\n")
        header = blob[:newline].decode("ascii")
        if not header.startswith(BITSTREAM_MAGIC):
            raise DomainError("missing bitstream magic")
        fields = dict(part.split("=", 1) for part in header.split()[1:])
        slots = int(fields["slots"])
        bits = np.frombuffer(blob[newline + 1:], dtype=np.uint8)
        if bits.size != slots:
            raise DomainError(f"bitstream advertises {slots} slots but carries {bits.size}")
        return bits


def _expand_bursts(seq: KickSequence):
    """Kick (slot, z) pairs as half-open burst intervals, collision-checked."""
    bursts = []
    colliding = []
    for index, (slot, z) in enumerate(seq.kicks):
        start, end = slot, slot + z
        if bursts and start < bursts[-1][1]:
            colliding.append(index)
        bursts.append((start, end))
    if colliding:
        raise CollisionError(
            f"multiplicity bursts overlap at kick indices {colliding}", kick_indices=colliding)
    return bursts


def _merge_windows(bursts, min_slots):
    """Cover bursts with the fewest gates, each >= min_slots, gaps >= min_slots."""
    windows = []
    for start, end in bursts:
        end = max(end, start + min_slots)
        if windows and start - windows[-1][1] < min_slots:
            windows[-1][1] = max(windows[-1][1], end)
        else:
            windows.append([start, end])
    return [tuple(w) for w in windows]


def compile_pattern(seq: KickSequence, hw: HardwareConstraints,
                    horizon_slots: int = 5_000_000, mode: str = "single") -> PulsePattern:
    """Compile a kick sequence into a slot schedule with Pockels gates.

    ``single`` mode places the whole payload at the start of one steady-state
    window and fails with CapacityError when it cannot fit. ``per-burst`` mode
    gives every kick burst its own payload window in a fresh steady-state
    epoch, separated by the amplifier settle time; relative kick timing is NOT
    preserved across windows, which the pattern notes record.
    """
    if mode not in ("single", "per-burst"):
        raise DomainError(f"mode must be 'single' or 'per-burst', got {mode!r}")
    if horizon_slots < 1:
        raise DomainError("horizon must be at least one slot")

    notes = []
    if len(seq) == 0:
        bits = _idle_bits(horizon_slots, hw.idle_decimation)
        return PulsePattern(bits=bits, slot_period=hw.slot_period, pockels_windows=(),
                            payload_windows=(), idle_decimation=hw.idle_decimation, mode=mode)

    origin = seq.slots[0]
    bursts = _expand_bursts(seq)
    bursts = [(a - origin, b - origin) for a, b in bursts]

    if mode == "single":
        span = bursts[-1][1] - bursts[0][0]
        if span > hw.steady_state_budget_slots:
            raise CapacityError(
                f"sequence needs {span} consecutive slots but one steady-state window "
                f"holds only {hw.steady_state_budget_slots}; recompile with mode='per-burst'")
        payload_windows = ((0, span),)
    else:
        placed = []
        pos = 0
        for start, end in bursts:
            length = end - start
            if length > hw.steady_state_budget_slots:
                raise CapacityError(
                    f"burst of {length} slots exceeds the steady-state budget "
                    f"{hw.steady_state_budget_slots}")
            placed.append((pos, pos + length))
            pos = max(pos + length, pos + hw.pockels_min_slots) + hw.settle_slots
        bursts = placed
        payload_windows = tuple((a, b - a) for a, b in bursts)
        notes.append("per-burst mode: relative kick timing is not preserved across "
                     "steady-state windows")

    windows = _merge_windows(bursts, hw.pockels_min_slots)
    if windows[-1][1] > horizon_slots:
        raise CapacityError(
            f"pattern needs {windows[-1][1]} slots but the horizon has {horizon_slots}")

    bits = _idle_bits(horizon_slots, hw.idle_decimation)
    for start, end in windows:
        bits[start:end] = 0
    for start, end in bursts:
        bits[start:end] = 1
    return PulsePattern(
        bits=bits,
        slot_period=hw.slot_period,
        pockels_windows=tuple(windows),
        payload_windows=payload_windows,
        idle_decimation=hw.idle_decimation,
        mode=mode,
        notes=tuple(notes),
    )


def _idle_bits(horizon_slots, decimation):
    bits = np.zeros(horizon_slots, dtype=np.uint8)
    bits[::decimation] = 1
    return bits


@dataclass(frozen=True)
class ValidationCheck:
    name: str
    passed: bool
    detail: str


@dataclass(frozen=True)
class ValidationReport:
    checks: tuple

    @property
    def passed(self):
        return all(check.passed for check in self.checks)

    def failures(self):
        return [check for check in self.checks if not check.passed]

    def to_json(self) -> str:
        return json.dumps(
            {"passed": self.passed,
             "checks": [{"name": c.name, "passed": c.passed, "detail": c.detail}
                        for c in self.checks]},
            indent=2, sort_keys=True) + "\n"


def validate_pattern(pattern: PulsePattern, hw: HardwareConstraints) -> ValidationReport:
    """Check every pattern invariant; violations are report entries, not errors."""
    checks = []
    bits = pattern.bits
    horizon = pattern.horizon_slots

    oversized = [w for w in pattern.payload_windows if w[1] > hw.steady_state_budget_slots]
    checks.append(ValidationCheck(
        "payload_within_steady_state_budget", not oversized,
        f"windows over budget: {oversized}" if oversized
        else f"all payload windows <= {hw.steady_state_budget_slots} slots"))

    min_slots = hw.pockels_min_slots
    short = [w for w in pattern.pockels_windows if w[1] - w[0] < min_slots]
    checks.append(ValidationCheck(
        "pockels_windows_meet_minimum", not short,
        f"windows under {min_slots} slots: {short}" if short
        else f"all gates >= {min_slots} slots ({hw.pockels_min_window * 1e9:.1f} ns)"))

    gaps = [
        (a, b) for (_, a), (b, _) in zip(pattern.pockels_windows, pattern.pockels_windows[1:])
        if b - a < min_slots
    ]
    checks.append(ValidationCheck(
        "pockels_switching_gaps_meet_minimum", not gaps,
        f"gaps shorter than {min_slots} slots: {gaps}" if gaps else "all gate gaps switchable"))

    in_bounds = all(0 <= a <= b <= horizon for a, b in pattern.pockels_windows)
    checks.append(ValidationCheck(
        "pockels_windows_inside_horizon", in_bounds,
        "ok" if in_bounds else f"windows exceed horizon {horizon}"))

    gate_mask = np.zeros(horizon, dtype=bool)
    for a, b in pattern.pockels_windows:
        gate_mask[max(a, 0):min(b, horizon)] = True

    # a transmitted slot that deviates from the idle decimation grid is payload
    expected_idle = _idle_bits(horizon, pattern.idle_decimation)
    stray = np.flatnonzero((bits == 1) & (expected_idle == 0) & ~gate_mask)
    checks.append(ValidationCheck(
        "payload_slots_inside_pockels_windows", stray.size == 0,
        f"{stray.size} transmitted payload slots outside gates (first: {stray[:5].tolist()})"
        if stray.size else "all transmitted payload slots gated"))

    idle_region = ~gate_mask
    mismatch = np.flatnonzero(idle_region & (bits != expected_idle))
    checks.append(ValidationCheck(
        "idle_follows_decimation_pattern", mismatch.size == 0,
        f"{mismatch.size} idle slots off the 1-in-{pattern.idle_decimation} grid "
        f"(first: {mismatch[:5].tolist()})" if mismatch.size else
        f"idle transmits every {pattern.idle_decimation}th slot"))

    return ValidationReport(checks=tuple(checks))


@dataclass(frozen=True)
class DispersionComponent:
    """One chain element with fixed dispersion and optional tuning range."""

    name: str
    dispersion: float          # ps/nm, signed
    tunable_range: float = 0.0  # +- ps/nm

    def __post_init__(self):
        if not math.isfinite(self.dispersion) or not math.isfinite(self.tunable_range):
            raise DomainError(f"dispersion values must be finite for {self.name!r}")
        if self.tunable_range < 0:
            raise DomainError(f"tunable_range must be >= 0 for {self.name!r}")


@dataclass(frozen=True)
class DispersionBudget:
    residual: float            # ps/nm
    tunable_margin: float      # ps/nm
    balanced: bool
    stretcher_delta_m: float   # meters of stretcher fiber to add (negative: shorten)
    note: str


def dispersion_budget(components, stretcher_coeff=-0.041) -> DispersionBudget:
    """Sum signed dispersions and report the stretcher-length correction.

    ``stretcher_coeff`` is the stretcher-fiber dispersion per meter (ps/nm/m).
    Adding ``stretcher_delta_m`` meters of that fiber zeroes the residual.
    The chain is balanced when the in-situ tuning ranges cover the residual.
    """
    components = list(components)
    if not components:
        raise DomainError("dispersion budget needs at least one component")
    if stretcher_coeff == 0:
        raise DomainError("stretcher_coeff must be nonzero")
    residual = math.fsum(c.dispersion for c in components)
    margin = math.fsum(c.tunable_range for c in components)
    balanced = abs(residual) <= margin
    if balanced:
        note = "residual within in-situ tuning range"
    else:
        note = ("residual attributed to unlisted chain components; "
                "correct via the stretcher-length change")
    return DispersionBudget(
        residual=residual,
        tunable_margin=margin,
        balanced=balanced,
        stretcher_delta_m=-residual / stretcher_coeff,
        note=note,
    )


GAUSSIAN_TBP_LIMIT = 2.0 * math.log(2.0) / math.pi  # ~0.441


@dataclass(frozen=True)
class TbpReport:
    tbp: float
    excess_over_gaussian: float


def tbp_check(fwhm: float, spectral_fwhm: float) -> TbpReport:
    """Time-bandwidth product and its excess over the Gaussian transform limit."""
    if fwhm <= 0 or spectral_fwhm <= 0:
        raise DomainError("fwhm and spectral_fwhm must be positive")
    tbp = fwhm * spectral_fwhm
    return TbpReport(tbp=tbp, excess_over_gaussian=tbp / GAUSSIAN_TBP_LIMIT)
