"""Command-line interface.

Verbs: run, simulate, grape-synth, pps, hhl, spectra, serve.
Global flags: --profile (molecule JSON), --seed, --out.
Exit codes: 0 success, 1 usage error, 2 execution failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path



class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"error: {message}", file=sys.stderr)
        raise SystemExit(1)


def _load_profile(args):
    from .spincore import MoleculeSpec
    if args.profile:
        return MoleculeSpec.from_file(args.profile)
    return MoleculeSpec()


def _write_out(args, text: str):
    if args.out:
        Path(args.out).write_text(text)
    else:
        print(text)


def _data_dir(args) -> Path:
    if getattr(args, "data_dir", None):
        return Path(args.data_dir)
    return Path(os.environ.get("TRISPIN_DATA_DIR", Path.home() / ".trispin"))


def _library(args, spec):
    from .library import build_library
    cache = _data_dir(args) / "pulse_library"
    return build_library(spec, cache_dir=cache, seed=args.seed,
                         progress=lambda key, fid, cached: print(
                             f"  {key}: fidelity {fid:.6f}"
                             f"{' (cached)' if cached else ''}", file=sys.stderr))


def cmd_simulate(args) -> int:
    from .circuits import Circuit
    from .engine import Job, SystemProfile, run_job
    from .pulses import NoiseConfig

    circuit = Circuit.from_json(Path(args.circuit).read_text())
    profile = SystemProfile(spec=_load_profile(args))
    job = Job(circuit=circuit, mode="simulate", noise=NoiseConfig.ideal())
    run_job(job, profile)
    if job.status == "failed":
        print(f"error: {job.error}", file=sys.stderr)
        return 2
    _write_out(args, json.dumps(job.result, indent=2))
    return 0


def cmd_run(args) -> int:
    from .circuits import Circuit
    from .engine import Job, SystemProfile, run_job
    from .pulses import NoiseConfig

    circuit = Circuit.from_json(Path(args.circuit).read_text())
    spec = _load_profile(args)
    noise = NoiseConfig(relaxation_enabled=not args.no_relaxation,
                        drift_hz_per_s=args.drift)
    if args.mode == "emulate":
        profile = SystemProfile(spec=spec, library=_library(args, spec), noise=noise)
    else:
        profile = SystemProfile(spec=spec, noise=noise)
    job = Job(circuit=circuit, mode=args.mode, noise=noise)
    run_job(job, profile)
    if job.status == "failed":
        print(f"error: {job.error}", file=sys.stderr)
        return 2
    _write_out(args, json.dumps(job.result, indent=2))
    return 0


def cmd_grape_synth(args) -> int:
    from .library import synthesis_config, synthesize_gate

    spec = _load_profile(args)
    config = synthesis_config(spec, args.gate)
    result = synthesize_gate(spec, args.gate, seed=args.seed, config=config)
    out = Path(args.out) if args.out else Path(f"{args.gate}.json")
    out.write_text(result.waveform.to_json())
    sidecar = out.with_suffix(".meta.json")
    sidecar.write_text(json.dumps({
        "gate": args.gate,
        "fidelity": result.fidelity,
        "iterations": result.iterations,
        "seed": result.seed,
    }, indent=2))
    print(f"{args.gate}: fidelity {result.fidelity:.6f} "
          f"({result.iterations} iterations) -> {out}", file=sys.stderr)
    return 0 if result.fidelity >= 0.99 else 2


def cmd_pps(args) -> int:
    from .pps import PpsConfig, default_pps_config, prepare_pps
    from .pulses import NoiseConfig

    spec = _load_profile(args)
    noise = NoiseConfig()
    if args.cycles and args.delay:
        config = PpsConfig(cycles=args.cycles, delay_s=args.delay)
    else:
        config = default_pps_config(spec, noise)
    report = prepare_pps(spec, config, noise)
    _write_out(args, json.dumps(report.to_dict(), indent=2))
    return 0


def cmd_hhl(args) -> int:
    from .circuits import (HhlProblem, extract_solution, hhl_circuit,
                           hhl_reference, simulate_ideal)

    spec = _load_profile(args)
    if args.problem:
        problem = HhlProblem.from_json(Path(args.problem).read_text())
    else:
        problem = HhlProblem.demo_instance()
    x_ref, p_ref = hhl_reference(problem)
    out = {"reference": {"x": list(x_ref), "success_probability": p_ref}}

    if args.mode == "simulate":
        probs = simulate_ideal(hhl_circuit(problem))
        sol = extract_solution(probs, sign=+1 if x_ref[0] * x_ref[1] >= 0 else -1,
                               problem=problem)
        out["runs"] = [sol.to_dict()]
        out["mean"] = sol.to_dict()
    else:
        from .engine import SystemProfile
        from .hhl_emulation import run_emulated_hhl
        from .pulses import NoiseConfig

        profile = SystemProfile(spec=spec, library=_library(args, spec),
                                noise=NoiseConfig())
        runs, mean = run_emulated_hhl(problem, profile, repetitions=args.reps)
        out["runs"] = [r.to_dict() for r in runs]
        out["mean"] = mean.to_dict()
    _write_out(args, json.dumps(out, indent=2))
    return 0


def cmd_spectra(args) -> int:
    from .circuits import Circuit
    from .engine import Job, SystemProfile, run_job
    from .pulses import NoiseConfig

    circuit = Circuit.from_json(Path(args.circuit).read_text())
    spec = _load_profile(args)
    noise = NoiseConfig()
    profile = SystemProfile(spec=spec, library=_library(args, spec), noise=noise)
    job = Job(circuit=circuit, mode="emulate", noise=noise)
    run_job(job, profile)
    if job.status == "failed":
        print(f"error: {job.error}", file=sys.stderr)
        return 2
    outdir = Path(args.out or "spectra")
    outdir.mkdir(parents=True, exist_ok=True)
    for entry in job.spectra or []:
        path = outdir / f"qubit{entry['qubit']}.csv"
        lines = ["frequency_hz,real,imag"]
        for f, re, im in zip(entry["frequencies_hz"], entry["real"], entry["imag"]):
            lines.append(f"{f:.6f},{re:.9e},{im:.9e}")
        path.write_text("\n".join(lines) + "\n")
        print(f"wrote {path}", file=sys.stderr)
    return 0


def cmd_serve(args) -> int:
    from .engine import SystemProfile
    from .pulses import NoiseConfig
    from .service import serve

    spec = _load_profile(args)
    library = _library(args, spec) if not args.no_library else None
    profile = SystemProfile(spec=spec, library=library, noise=NoiseConfig())
    serve(profile, data_dir=_data_dir(args), host=args.host, port=args.port,
          frontend_dir=args.frontend)
    return 0


def build_parser() -> _Parser:
    p = _Parser(prog="trispin",
                description="three-qubit NMR quantum computer emulator")
    p.add_argument("--profile", help="molecule spec JSON file")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="output file (default: stdout)")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", help="ideal statevector run of a circuit")
    s.add_argument("circuit", help="circuit JSON file")
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("run", help="run a circuit (simulate or emulate)")
    s.add_argument("circuit")
    s.add_argument("--mode", choices=["simulate", "emulate"], default="emulate")
    s.add_argument("--no-relaxation", action="store_true")
    s.add_argument("--drift", type=float, default=0.0, help="carrier drift Hz/s")
    s.add_argument("--data-dir")
    s.set_defaults(func=cmd_run)

    s = sub.add_parser("grape-synth", help="synthesize one named gate pulse")
    s.add_argument("gate", help="library key, e.g. CNOT12, X1, PERMUTE")
    s.set_defaults(func=cmd_grape_synth)

    s = sub.add_parser("pps", help="prepare the pseudo-pure state")
    s.add_argument("--cycles", type=int)
    s.add_argument("--delay", type=float, help="inter-cycle delay, seconds")
    s.set_defaults(func=cmd_pps)

    s = sub.add_parser("hhl", help="solve the demo linear system")
    s.add_argument("--problem", help="problem JSON {a, b, c, t0}")
    s.add_argument("--mode", choices=["simulate", "emulate"], default="simulate")
    s.add_argument("--reps", type=int, default=5)
    s.add_argument("--data-dir")
    s.set_defaults(func=cmd_hhl)

    s = sub.add_parser("spectra", help="emulate a circuit and export spectra CSV")
    s.add_argument("circuit")
    s.add_argument("--data-dir")
    s.set_defaults(func=cmd_spectra)

    s = sub.add_parser("serve", help="start the HTTP job service")
    s.add_argument("--host", default="127.0.0.1")
    s.add_argument("--port", type=int, default=8000)
    s.add_argument("--data-dir")
    s.add_argument("--frontend", help="directory of built UI assets")
    s.add_argument("--no-library", action="store_true",
                   help="skip pulse synthesis (simulate-only service)")
    s.set_defaults(func=cmd_serve)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except KeyboardInterrupt:
        return 2
    except Exception as exc:  # surfaced as exit code 2 per contract
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
