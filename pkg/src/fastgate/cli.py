"""Command-line entry point.

Every subcommand reads one strict JSON config, writes its artifacts into the
output directory, and stamps each file with the tool version and the config
hash so runs are reproducible byte for byte. Exit codes: 0 success, 2 domain
or configuration error, 3 no feasible result (best effort still written).
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__, config as cfgmod
from .core import SpinConfiguration, evaluate_gate, trajectory
from .exceptions import FastgateError
from .hardware import compile_pattern, dispersion_budget, tbp_check, validate_pattern
from .infidelity import KickErrorBudget
from .interferometry import PulsePairSamples, fit_ellipse, synthesize
from .optimizer import continuous_seed, evolve
from .rap import rap_scan
from .render import history_csv, trajectory_csv, trajectory_svg

EXIT_OK = 0
EXIT_DOMAIN_ERROR = 2
EXIT_INFEASIBLE = 3


class RunContext:
    """Output directory plus reproducibility metadata for one invocation."""

    def __init__(self, out_dir, formats, seed, config_path):
        self.out_dir = Path(out_dir)
        self.formats = formats
        self.seed = seed
        digest = hashlib.sha256(Path(config_path).read_bytes()).hexdigest()
        self.config_sha256 = digest
        self.meta = {"tool": "fastgate", "version": __version__,
                     "config_sha256": digest, "seed": seed}
        self.header = (f"fastgate {__version__} config_sha256={digest} seed={seed}",)

    def want(self, name):
        return name.rsplit(".", 1)[-1] in self.formats

    def write_text(self, name, text):
        if not self.want(name):
            return None
        self.out_dir.mkdir(parents=True, exist_ok=True)
        path = self.out_dir / name
        path.write_text(text, encoding="utf-8")
        return path

    def write_bytes(self, name, blob):
        if not self.want(name):
            return None
        self.out_dir.mkdir(parents=True, exist_ok=True)
        path = self.out_dir / name
        path.write_bytes(blob)
        return path

    def write_json(self, name, payload):
        document = {"_meta": self.meta}
        document.update(payload)
        return self.write_text(name, json.dumps(document, indent=2, sort_keys=True) + "\n")


def _sequence_payload(seq, trap):
    return {
        "slots": list(seq.slots),
        "multiplicities": list(seq.multiplicities),
        "momentum_factor": seq.momentum_factor,
        "grid_period_s": seq.grid_period,
        "duration_s": seq.duration,
        "duration_trap_periods": seq.duration / trap.trap_period,
        "pulse_count": seq.pulse_count,
    }


def _gate_payload(result, feasible):
    return {
        "gate_error": result.gate_error,
        "phase_rad": result.phase,
        "closure_com": [result.closure_c.real, result.closure_c.imag],
        "closure_stretch": [result.closure_s.real, result.closure_s.imag],
        "duration_s": result.duration,
        "duration_trap_periods": result.duration_periods,
        "infidelity_spontaneous": result.infidelity_spontaneous,
        "feasible": feasible,
    }


def _write_pattern_artifacts(ctx, seq, hw, horizon, mode):
    try:
        pattern = compile_pattern(seq, hw, horizon_slots=horizon, mode=mode)
    except FastgateError:
        if mode != "single":
            raise
        pattern = compile_pattern(seq, hw, horizon_slots=horizon, mode="per-burst")
    report = validate_pattern(pattern, hw)
    doc = json.loads(pattern.to_rle_json())
    ctx.write_json("pattern.json", doc)
    ctx.write_bytes("pattern.bin", pattern.to_bitstream())
    ctx.write_text("pattern_validation.json", report.to_json())
    return pattern, report


def cmd_design_gate(doc, ctx):
    cfgmod._check_keys("", doc, {"ion", "trap", "laser", "optimizer",
                                 "error_budget", "hardware"})
    trap = cfgmod.parse_trap_ion(doc)
    momentum_factor = cfgmod.parse_momentum_factor(doc)
    opt, seed_counts = cfgmod.parse_optimizer(doc, ctx.seed)
    t_wait, pulse_duration = cfgmod.parse_error_budget(doc)
    hw = cfgmod.parse_hardware(doc)
    horizon, mode = cfgmod.parse_pattern_options(doc)

    seeds = [continuous_seed(trap, n, momentum_factor) for n in seed_counts]
    result = evolve(seeds, opt, trap, momentum_factor=momentum_factor)
    seq = result.best.sequence
    gate = evaluate_gate(seq, trap, t_wait=t_wait, pulse_duration=pulse_duration)

    ctx.write_json("best_sequence.json", _sequence_payload(seq, trap))
    report = _gate_payload(gate, result.feasible)
    report["phase_target_rad"] = opt.phase_target
    report["fitness"] = result.best.fitness
    ctx.write_json("gate_report.json", report)
    ctx.write_text("ga_history.csv", history_csv(result.history, ctx.header))
    spins = (SpinConfiguration(1, 1), SpinConfiguration(1, -1))
    trajectories = [trajectory(seq, trap, spin) for spin in spins]
    ctx.write_text("trajectory.svg", trajectory_svg(trajectories, ctx.header))
    _write_pattern_artifacts(ctx, seq, hw, horizon, mode)

    print(f"design-gate: feasible={result.feasible} duration={gate.duration_periods:.4f} "
          f"trap periods, gate_error={gate.gate_error:.3e}, phase={gate.phase:+.6f}")
    return EXIT_OK if result.feasible else EXIT_INFEASIBLE


def cmd_simulate_trajectory(doc, ctx):
    cfgmod._check_keys("", doc, {"ion", "trap", "laser", "sequence", "spins"})
    trap = cfgmod.parse_trap_ion(doc)
    seq = cfgmod.parse_sequence(doc, default_grid_period=trap.grid_period)
    spins_raw = doc.get("spins", [[1, 1], [1, -1]])
    spins = [SpinConfiguration(int(s1), int(s2)) for s1, s2 in spins_raw]
    trajectories = [trajectory(seq, trap, spin) for spin in spins]
    gate = evaluate_gate(seq, trap)
    ctx.write_text("trajectory.csv", trajectory_csv(trajectories, ctx.header))
    ctx.write_text("trajectory.svg", trajectory_svg(trajectories, ctx.header))
    ctx.write_json("gate_report.json", _gate_payload(gate, None))
    print(f"simulate-trajectory: gate_error={gate.gate_error:.3e} phase={gate.phase:+.6f}")
    return EXIT_OK


def cmd_rap_scan(doc, ctx):
    cfgmod._check_keys("", doc, {"pulse", "scan", "solver"})
    pulse = cfgmod.parse_chirped_pulse(doc)
    lo, hi, points, spacing = cfgmod.parse_scan(doc)
    tol = cfgmod.parse_solver_tolerance(doc)
    grid = (np.geomspace(lo, hi, points) if spacing == "log"
            else np.linspace(lo, hi, points))
    result = rap_scan(pulse, grid, solver_tol=tol)
    header = "\n".join(f"# {line}" for line in ctx.header)
    ctx.write_text("rap_scan.csv", header + "\n" + result.to_csv())
    span = result.plateau_span()
    ctx.write_json("rap_report.json", {
        "plateau_span": list(span) if span else None,
        "plateau_ratio": (span[1] / span[0]) if span else None,
        "max_norm_error": result.max_norm_error,
        "solver_tolerance": result.solver_tol,
        "points": points,
    })
    ctx.write_text("rap_scan.svg", _curve_svg(result.energy_scales, result.probabilities,
                                              spacing == "log", ctx.header))
    print(f"rap-scan: {points} points, plateau span={span}")
    return EXIT_OK


def _curve_svg(x, y, log_x, header_lines, size=480, pad=40):
    x = np.asarray(x, dtype=float)
    if log_x:
        x = np.log10(x)
    y = np.asarray(y, dtype=float)
    x_lo, x_hi = float(x.min()), float(x.max())
    x_span = (x_hi - x_lo) or 1.0
    points = " ".join(
        f"{pad + (xi - x_lo) / x_span * (size - 2 * pad):.2f},"
        f"{size - pad - yi * (size - 2 * pad):.2f}"
        for xi, yi in zip(x, y))
    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {size} {size}">']
    parts += [f"<!-- {line} -->" for line in header_lines]
    parts.append(f'<rect x="{pad}" y="{pad}" width="{size - 2 * pad}" '
                 f'height="{size - 2 * pad}" style="fill:none;stroke:#999"/>')
    parts.append(f'<polyline points="{points}" '
                 'style="fill:none;stroke:#1f6fb2;stroke-width:1.5"/>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def cmd_fit_ellipse(doc, ctx):
    cfgmod._check_keys("", doc, {"input_csv", "synthesize"})
    if ("input_csv" in doc) == ("synthesize" in doc):
        raise FastgateError("provide exactly one of 'input_csv' or 'synthesize'")
    if "input_csv" in doc:
        path = Path(doc["input_csv"])
        if not path.exists():
            raise FastgateError(f"samples file not found: {path}")
        samples = PulsePairSamples.from_csv(path.read_text(encoding="utf-8"))
    else:
        synth = doc["synthesize"]
        cfgmod._check_keys("synthesize", synth, {
            "amp_u", "amp_v", "offset_u", "offset_v", "delta_phi_rad",
            "points", "noise", "rng_seed"})
        samples = synthesize(
            synth.get("amp_u", 1.0), synth.get("amp_v", 1.0),
            synth.get("offset_u", 0.0), synth.get("offset_v", 0.0),
            synth["delta_phi_rad"], int(synth.get("points", 100)),
            noise=synth.get("noise", 0.0), rng_seed=int(synth.get("rng_seed", ctx.seed)))
        header = "\n".join(f"# {line}" for line in ctx.header)
        ctx.write_text("samples.csv", header + "\n" + samples.to_csv())
    fit = fit_ellipse(samples)
    ctx.write_json("ellipse_fit.json", {
        "coefficients": list(fit.coefficients),
        "relative_phase_rad": fit.relative_phase,
        "degenerate": fit.degenerate,
        "residual_rms": fit.residual_rms,
        "n_points": len(samples),
    })
    print(f"fit-ellipse: phase={fit.relative_phase:.6f} rad degenerate={fit.degenerate}")
    return EXIT_OK


def cmd_dispersion(doc, ctx):
    cfgmod._check_keys("", doc, {"components", "stretcher_coeff_ps_nm_per_m",
                                 "tbp_fwhm_s", "tbp_spectral_fwhm_hz"})
    components, stretcher_coeff = cfgmod.parse_components(doc)
    budget = dispersion_budget(components, stretcher_coeff)
    payload = {
        "residual_ps_nm": budget.residual,
        "tunable_margin_ps_nm": budget.tunable_margin,
        "balanced": budget.balanced,
        "stretcher_delta_m": budget.stretcher_delta_m,
        "stretcher_coeff_ps_nm_per_m": stretcher_coeff,
        "note": budget.note,
        "components": [{"name": c.name, "dispersion_ps_nm": c.dispersion,
                        "tunable_range_ps_nm": c.tunable_range} for c in components],
    }
    if "tbp_fwhm_s" in doc and "tbp_spectral_fwhm_hz" in doc:
        report = tbp_check(doc["tbp_fwhm_s"], doc["tbp_spectral_fwhm_hz"])
        payload["tbp"] = report.tbp
        payload["tbp_excess_over_gaussian"] = report.excess_over_gaussian
    ctx.write_json("dispersion.json", payload)
    print(f"dispersion: residual={budget.residual:+.3f} ps/nm balanced={budget.balanced} "
          f"stretcher_delta={budget.stretcher_delta_m:+.2f} m")
    return EXIT_OK


def cmd_pattern(doc, ctx):
    cfgmod._check_keys("", doc, {"sequence", "hardware"})
    hw = cfgmod.parse_hardware(doc)
    horizon, mode = cfgmod.parse_pattern_options(doc)
    seq = cfgmod.parse_sequence(doc, default_grid_period=hw.slot_period)
    pattern, report = _write_pattern_artifacts(ctx, seq, hw, horizon, mode)
    print(f"pattern: {pattern.horizon_slots} slots, {len(pattern.pockels_windows)} gates, "
          f"valid={report.passed}")
    return EXIT_OK


def cmd_error_budget(doc, ctx):
    cfgmod._check_keys("", doc, {"t_wait_ps", "pulse_duration_ps", "lifetime_ns", "kicks"})
    budget = KickErrorBudget.build(
        doc.get("t_wait_ps", 1.0) * 1e-12,
        doc.get("pulse_duration_ps", 0.5) * 1e-12,
        1.0 / (doc.get("lifetime_ns", 6.9) * 1e-9),
        int(doc.get("kicks", 4)))
    payload = {"per_kick_error": budget.per_kick, "total_infidelity": budget.total,
               "kicks": budget.n_kicks, "t_wait_s": budget.t_wait,
               "pulse_duration_s": budget.pulse_duration, "decay_rate_per_s": budget.decay_rate}
    ctx.write_json("error_budget.json", payload)
    print(json.dumps(payload, sort_keys=True))
    return EXIT_OK


COMMANDS = {
    "design-gate": cmd_design_gate,
    "simulate-trajectory": cmd_simulate_trajectory,
    "rap-scan": cmd_rap_scan,
    "fit-ellipse": cmd_fit_ellipse,
    "dispersion": cmd_dispersion,
    "pattern": cmd_pattern,
    "error-budget": cmd_error_budget,
}


def build_parser():
    parser = argparse.ArgumentParser(
        prog="fastgate",
        description="Design and simulation tools for momentum-kick entangling gates.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        cmd = sub.add_parser(name)
        cmd.add_argument("--config", required=True, help="path to the JSON run config")
        cmd.add_argument("--out", default=None,
                         help="output directory (default: $FASTGATE_OUT or '.')")
        cmd.add_argument("--seed", type=int, default=1, help="RNG seed")
        cmd.add_argument("--format", default="csv,json,svg,bin",
                         help="comma-separated output kinds to write")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    out_dir = args.out or os.environ.get("FASTGATE_OUT", ".")
    formats = {kind.strip() for kind in args.format.split(",") if kind.strip()}
    try:
        doc = cfgmod.load_document(args.config)
        ctx = RunContext(out_dir, formats, args.seed, args.config)
        return COMMANDS[args.command](doc, ctx)
    except FastgateError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_DOMAIN_ERROR


if __name__ == "__main__":
    sys.exit(main())
