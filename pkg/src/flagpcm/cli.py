"""Command-line front end: experiments, witness runs, schedule compilation and timing."""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import os
import sys
import time
from datetime import datetime, timezone
from pathlib import Path
from typing import Sequence

from . import __version__
from .circuits import (
    ALL_INPUTS,
    ExperimentConfig,
    binomial_stderr,
    build_circuit,
    derive_seed,
    flag_gain,
    flag_postselect,
    input_parity,
    parity_fidelity,
    run_experiment,
)
from .frame import InjectionSite, predict_readout_effect, propagate_to_end
from .noise import paper_default_params, resolve_noise
from .pauli import PauliString
from .sim import QUBIT_INDEX, QUBIT_NAMES, S
from .witness import default_shots, generator_set, witness_settings, witness_value

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_INFEASIBLE = 3
EXIT_INVALID = 4

# experimental reference values, reported next to simulated ones (not targets)
REFERENCE = {
    "parity_fidelity": "0.923(2)",
    "parity_fidelity_flag_conditioned": "0.932(2)",
    "flag_kept_fraction": "0.937(2)",
    "inject_Y_flag_rate": "0.906(6)",
    "inject_Y_parity_fidelity": "0.883(7)",
    "inject_X_flag_rate": "0.897(6)",
    "inject_X_parity_fidelity": "0.147(7)",
    "witness_4_branch_plus": "-0.14(1)",
    "witness_4_branch_minus": "-0.11(1)",
    "witness_6": "-0.031(8)",
    "gate_sequence_share_of_cycle": "about 0.23",
    "laser_share_of_gate_sequence": "about 0.05",
}


class ConfigError(Exception):
    pass


def _timestamp() -> str:
    epoch = os.environ.get("SOURCE_DATE_EPOCH")
    moment = datetime.fromtimestamp(int(epoch), timezone.utc) if epoch else datetime.now(timezone.utc)
    return moment.strftime("%Y-%m-%dT%H:%M:%SZ")


def manifest(argv: Sequence[str], config: dict, seed: int | None) -> dict:
    blob = json.dumps(config, sort_keys=True, separators=(",", ":"), default=str)
    return {
        "command": list(argv),
        "config_hash": hashlib.sha256(blob.encode()).hexdigest(),
        "seed": seed,
        "timestamp": _timestamp(),
        "version": __version__,
    }


def _write_json(path: Path, payload: dict) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, indent=2, sort_keys=False) + "\n", encoding="utf-8")


def _write_csv(path: Path, header: Sequence[str], rows: Sequence[Sequence], man: dict) -> None:
    buf = io.StringIO()
    buf.write("# manifest: " + json.dumps(man, separators=(",", ":")) + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(buf.getvalue(), encoding="utf-8")


def _fmt(x: float) -> str:
    return f"{x:.6f}"


def _inputs(spec: str) -> list[str]:
    if spec == "all":
        return list(ALL_INPUTS)
    bits = [b.strip() for b in spec.split(",") if b.strip()]
    for b in bits:
        if len(b) != 4 or set(b) - {"0", "1"}:
            raise ConfigError(f"malformed input bitstring {b!r}; expected 4 characters of 0/1")
    if not bits:
        raise ConfigError("no inputs given")
    return bits


def _noise(spec: str, sequence: str):
    try:
        return resolve_noise(spec, sequence)
    except FileNotFoundError:
        raise ConfigError(f"noise config {spec!r} not found") from None
    except (ValueError, TypeError, json.JSONDecodeError) as e:
        raise ConfigError(f"bad noise config {spec!r}: {e}") from None


def _rate_row(bits: str, tallies) -> tuple[list, dict]:
    n = tallies.shots
    p = tallies.rate(S, -1)
    kept_frac, kept = flag_postselect(tallies)
    row = [bits, input_parity(bits), n, _fmt(p), _fmt(binomial_stderr(p, n)), _fmt(kept_frac), _fmt(binomial_stderr(kept_frac, n))]
    if kept.shots:
        pk = kept.rate(S, -1)
        row += [kept.shots, _fmt(pk), _fmt(binomial_stderr(pk, kept.shots))]
    else:
        row += [0, "", ""]
    return row, {"kept": kept, "kept_fraction": kept_frac}


RATE_HEADER = [
    "input",
    "parity",
    "shots",
    "p_syndrome_minus",
    "p_syndrome_minus_stderr",
    "flag_kept_fraction",
    "flag_kept_fraction_stderr",
    "kept_shots",
    "p_syndrome_minus_postselected",
    "p_syndrome_minus_postselected_stderr",
]


def _fidelity_block(tallies: dict, kept: dict) -> dict:
    out = {}
    try:
        p = parity_fidelity(tallies)
        out["parity_fidelity"] = {"value": p.value, "stderr": p.stderr}
    except ValueError as e:
        out["parity_fidelity"] = {"error": str(e)}
    try:
        pk = parity_fidelity(kept)
        out["parity_fidelity_flag_conditioned"] = {"value": pk.value, "stderr": pk.stderr}
    except ValueError as e:
        out["parity_fidelity_flag_conditioned"] = {"error": str(e)}
    try:
        g = flag_gain(tallies)
        out["flag_conditioning_gain"] = {"value": g.value, "stderr": g.stderr}
    except ValueError as e:
        out["flag_conditioning_gain"] = {"error": str(e)}
    total = sum(t.shots for t in tallies.values())
    frac = sum(t.shots for t in kept.values()) / total
    out["flag_kept_fraction"] = {"value": frac, "stderr": binomial_stderr(frac, total)}
    return out


def cmd_run_pcm(args, argv) -> int:
    inputs = _inputs(args.inputs)
    noise = _noise(args.noise, "pcm")
    config = {"command": "run-pcm", "inputs": inputs, "shots": args.shots, "noise": noise.to_dict(),
              "seed": args.seed, "gate_mode": args.gate_mode}
    man = manifest(argv, config, args.seed)
    tallies, kept, rows = {}, {}, []
    for bits in inputs:
        cfg = ExperimentConfig("pcm_logical", data_input=bits, shots=args.shots, gate_mode=args.gate_mode,
                               seed=derive_seed(args.seed, "pcm", bits))
        t = run_experiment(cfg, noise)
        row, extra = _rate_row(bits, t)
        tallies[bits], kept[bits] = t, extra["kept"]
        rows.append(row)
    out = Path(args.out)
    _write_csv(out / "pcm_rates.csv", RATE_HEADER, rows, man)
    summary = {"manifest": man, **_fidelity_block(tallies, kept), "experimental_reference": {
        k: REFERENCE[k] for k in ("parity_fidelity", "parity_fidelity_flag_conditioned", "flag_kept_fraction")}}
    _write_json(out / "pcm_summary.json", summary)
    _report(summary)
    return EXIT_OK


def cmd_inject_error(args, argv) -> int:
    inputs = _inputs(args.inputs)
    noise = _noise(args.noise, "pcm")
    if args.qubit not in QUBIT_INDEX:
        raise ConfigError(f"unknown qubit {args.qubit!r}")
    if not 0 <= args.site <= 6:
        raise ConfigError(f"injection site {args.site} out of range 0..6")
    error = PauliString.single(6, QUBIT_INDEX[args.qubit], args.pauli)
    site = InjectionSite(args.site, error)
    config = {"command": "inject-error", "pauli": args.pauli, "qubit": args.qubit, "site": args.site, "inputs": inputs,
              "shots": args.shots, "noise": noise.to_dict(), "seed": args.seed, "gate_mode": args.gate_mode}
    man = manifest(argv, config, args.seed)
    tallies, kept, rows = {}, {}, []
    for bits in inputs:
        cfg = ExperimentConfig("pcm_inject", data_input=bits, injection=site, shots=args.shots,
                               gate_mode=args.gate_mode, seed=derive_seed(args.seed, "inject", bits))
        t = run_experiment(cfg, noise)
        flag_rate = t.rate(5, 1)
        row, extra = _rate_row(bits, t)
        row.insert(5, _fmt(flag_rate))
        row.insert(6, _fmt(binomial_stderr(flag_rate, t.shots)))
        tallies[bits], kept[bits] = t, extra["kept"]
        rows.append(row)
    circuit = build_circuit(ExperimentConfig("pcm_inject", data_input="0000", injection=site, gate_mode=args.gate_mode))
    final = propagate_to_end(circuit, site)
    effect = predict_readout_effect(final)
    header = RATE_HEADER[:5] + ["flag_detection_rate", "flag_detection_rate_stderr"] + RATE_HEADER[5:]
    out = Path(args.out)
    _write_csv(out / "inject_rates.csv", header, rows, man)
    total = sum(t.shots for t in tallies.values())
    detect = sum(t.shots - kept[b].shots for b, t in tallies.items()) / total
    summary = {
        "manifest": man,
        "frame_prediction": {
            "injected": error.label(QUBIT_NAMES),
            "propagated": final.label(QUBIT_NAMES),
            "syndrome_flip": effect.syndrome_flip,
            "flag_flip": effect.flag_flip,
            "data_z_weight": effect.data_z_weight,
        },
        "flag_detection_rate": {"value": detect, "stderr": binomial_stderr(detect, total)},
        **_fidelity_block(tallies, kept),
    }
    ref = {"Y": ("inject_Y_flag_rate", "inject_Y_parity_fidelity"), "X": ("inject_X_flag_rate", "inject_X_parity_fidelity")}
    if args.qubit == "s" and args.site == 3 and args.pauli in ref:
        summary["experimental_reference"] = {k: REFERENCE[k] for k in ref[args.pauli]}
    _write_json(out / "inject_summary.json", summary)
    _report(summary)
    return EXIT_OK


def cmd_gme(args, argv) -> int:
    gset = generator_set(args.n)
    variant = f"gme{args.n}"
    noise = _noise(args.noise, "gme")
    settings = witness_settings(gset)
    shots = {b: args.shots_per_setting or default_shots(gset, b) for b in settings}
    config = {"command": "gme", "n": args.n, "shots": {"".join(b): s for b, s in shots.items()},
              "noise": noise.to_dict(), "seed": args.seed, "gate_mode": args.gate_mode, "k_sigma": args.k_sigma}
    man = manifest(argv, config, args.seed)
    tallies = {}
    for b in settings:
        cfg = ExperimentConfig(variant, shots=shots[b], gate_mode=args.gate_mode, bases=b,
                               seed=derive_seed(args.seed, variant, "".join(b)))
        tallies[b] = run_experiment(cfg, noise)
    out = Path(args.out)
    reports = {}
    if args.n == 4:
        for m, name in ((1, "branch_plus"), (-1, "branch_minus")):
            reports[name] = witness_value(tallies, gset, condition=(S, m), k_sigma=args.k_sigma)
        annotation = {"branch_plus": REFERENCE["witness_4_branch_plus"], "branch_minus": REFERENCE["witness_4_branch_minus"]}
    else:
        reports["all"] = witness_value(tallies, gset, k_sigma=args.k_sigma)
        annotation = {"all": REFERENCE["witness_6"]}
    payload = {"manifest": man, "reports": {k: r.to_dict() for k, r in reports.items()},
               "experimental_reference": annotation}
    _write_json(out / f"witness{args.n}.json", payload)
    for name, r in reports.items():
        rows = [[g.label, _fmt(g.value), _fmt(g.stderr), g.shots] for g in r.generators]
        rows.append(["W", _fmt(r.value), _fmt(r.stderr), ""])
        _write_csv(out / f"witness{args.n}_{name}.csv", ["generator", "expectation", "stderr", "shots"], rows, man)
    for name, r in reports.items():
        verdict = "certified" if r.certified else "not certified"
        print(f"W{args.n} [{name}] = {r.value:+.4f} +- {r.stderr:.4f} ({verdict} at {args.k_sigma} sigma)")
    return EXIT_OK


def _load_trap(args):
    from .shuttle import DurationTable, TrapSpec
    from .shuttle.trap import load_json_config

    try:
        spec = load_json_config(args.trap_config, TrapSpec) if args.trap_config else TrapSpec()
        durations = load_json_config(args.durations, DurationTable) if args.durations else DurationTable()
    except FileNotFoundError as e:
        raise ConfigError(f"config file not found: {e.filename}") from None
    except (ValueError, TypeError, json.JSONDecodeError) as e:
        raise ConfigError(f"bad trap or duration config: {e}") from None
    if getattr(args, "sequential", False):
        from dataclasses import replace

        spec = replace(spec, parallel_moves=False)
    return spec, durations


def _load_gates(path: str | None):
    from .shuttle import FT_PCM_GATES

    if path is None:
        return list(FT_PCM_GATES)
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise ConfigError(f"gates file {path!r} not found") from None
    except json.JSONDecodeError as e:
        raise ConfigError(f"gates file is not JSON: {e}") from None
    gates = data.get("gates") if isinstance(data, dict) else data
    if not isinstance(gates, list) or not all(isinstance(g, list) and all(isinstance(q, str) for q in g) for g in gates):
        raise ConfigError("gates file must hold a list of qubit-name lists")
    return [tuple(g) for g in gates]


def cmd_compile(args, argv) -> int:
    from .shuttle import CompileError, compile_gates, full_sequence, initial_layout, render_timeline, timing_budget, validate

    spec, durations = _load_trap(args)
    gates = _load_gates(args.gates)
    try:
        if args.full:
            schedule = full_sequence(gates, spec, durations, lookahead=args.lookahead)
        else:
            schedule = compile_gates(gates, initial_layout(spec), spec, durations, lookahead=args.lookahead)
    except CompileError as e:
        print(f"infeasible: {e}", file=sys.stderr)
        return EXIT_INFEASIBLE
    violations = validate(schedule, spec=spec, durations=durations)
    budget = timing_budget(schedule, durations)
    config = {"command": "compile", "gates": gates, "trap": spec.to_dict(), "durations": durations.to_dict(),
              "lookahead": args.lookahead, "full": args.full}
    man = manifest(argv, config, None)
    out = Path(args.out)
    _write_json(out / "schedule.json", {"manifest": man, **schedule.to_dict()})
    _write_json(out / "validation.json", {
        "manifest": man,
        "valid": not violations,
        "violations": [v.to_dict() for v in violations],
        "max_extent_segments": schedule.max_extent(spec),
        "shuttle_primitives": schedule.shuttle_count(),
        "entangle_order": _gate_names(schedule.entangle_order(), gates),
    })
    _write_json(out / "timing.json", {"manifest": man, **budget.to_dict(),
                                      "experimental_reference": _timing_reference()})
    (out / "timeline.txt").write_text(render_timeline(schedule, spec) + "\n", encoding="utf-8")
    print(f"steps={len(schedule.steps)} primitives={schedule.shuttle_count()} extent={schedule.max_extent(spec)}"
          f" violations={len(violations)}")
    print(budget.table())
    return EXIT_INVALID if violations else EXIT_OK


def _gate_names(order, requested) -> list[str]:
    """Name executed gates as requested; ion order inside a well is physical."""
    names = {frozenset(g): "".join(g) for g in requested}
    return [names.get(frozenset(t), "".join(sorted(t))) for t in order]


def _timing_reference() -> dict:
    return {k: REFERENCE[k] for k in ("gate_sequence_share_of_cycle", "laser_share_of_gate_sequence")}


def cmd_timing(args, argv) -> int:
    from .shuttle import Schedule, timing_budget, validate

    spec, durations = _load_trap(args)
    try:
        doc = json.loads(Path(args.schedule).read_text(encoding="utf-8"))
        schedule = Schedule.from_dict(doc)
        budget = timing_budget(schedule, durations, parallel=spec.parallel_moves)
    except FileNotFoundError:
        raise ConfigError(f"schedule file {args.schedule!r} not found") from None
    except (ValueError, KeyError, TypeError, json.JSONDecodeError) as e:
        print(f"invalid schedule file: {e}", file=sys.stderr)
        return EXIT_INVALID
    man = manifest(argv, {"command": "timing", "schedule": doc, "durations": durations.to_dict()}, None)
    payload = {"manifest": man, **budget.to_dict(), "experimental_reference": _timing_reference()}
    if args.out:
        _write_json(Path(args.out) / "timing.json", payload)
    print(budget.table())
    violations = validate(schedule, spec=spec, durations=durations) if schedule.initial is not None else []
    return EXIT_INVALID if violations else EXIT_OK


def cmd_paper_defaults(args, argv) -> int:
    params = paper_default_params(args.sequence)
    text = json.dumps(params.to_dict(), indent=2) + "\n"
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _report(summary: dict) -> None:
    keys = ("parity_fidelity", "parity_fidelity_flag_conditioned", "flag_conditioning_gain", "flag_kept_fraction",
            "flag_detection_rate")
    for key in keys:
        if key in summary:
            v = summary[key]
            if "value" in v:
                print(f"{key:34s} {v['value']:.4f} +- {v['stderr']:.4f}")
            else:
                print(f"{key:34s} n/a ({v['error']})")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="flagpcm", description=__doc__)
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, shots, noise_default="none"):
        sp.add_argument("--shots", type=int, default=shots)
        sp.add_argument("--noise", default=noise_default, help="'none', 'paper-defaults' or a JSON file")
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--gate-mode", choices=("ideal", "hardware"), default="ideal")
        sp.add_argument("--out", default="out")

    sp = sub.add_parser("run-pcm", help="parity readout over logical inputs")
    sp.add_argument("--inputs", default="all", help="'all' or comma-separated 4-bit strings (d1 first)")
    common(sp, 960)
    sp.set_defaults(func=cmd_run_pcm)

    sp = sub.add_parser("inject-error", help="parity readout with one injected Pauli")
    sp.add_argument("--pauli", choices=("X", "Y", "Z"), required=True)
    sp.add_argument("--qubit", default="s")
    sp.add_argument("--site", type=int, default=3, help="number of composite gates before the error (0..6)")
    sp.add_argument("--inputs", default="all")
    common(sp, 140)
    sp.set_defaults(func=cmd_inject_error)

    sp = sub.add_parser("gme", help="GME witness for the 4- or 6-qubit state")
    sp.add_argument("--n", type=int, choices=(4, 6), required=True)
    sp.add_argument("--shots-per-setting", type=int, default=None)
    sp.add_argument("--noise", default="none")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--gate-mode", choices=("ideal", "hardware"), default="ideal")
    sp.add_argument("--k-sigma", type=float, default=3.0)
    sp.add_argument("--out", default="out")
    sp.set_defaults(func=cmd_gme)

    def trap_opts(sp):
        sp.add_argument("--trap-config", default=None, help="JSON TrapSpec overrides")
        sp.add_argument("--durations", default=None, help="JSON DurationTable overrides")
        sp.add_argument("--sequential", action="store_true", help="one well moves at a time")

    sp = sub.add_parser("compile", help="compile and validate a shuttling schedule")
    sp.add_argument("--gates", default=None, help="JSON list of qubit pairs; defaults to the FT PCM sequence")
    sp.add_argument("--full", action="store_true", help="include preparation and readout phases")
    sp.add_argument("--lookahead", type=int, default=2)
    sp.add_argument("--out", default="out")
    trap_opts(sp)
    sp.set_defaults(func=cmd_compile)

    sp = sub.add_parser("timing", help="timing budget of a schedule file")
    sp.add_argument("--schedule", required=True)
    sp.add_argument("--out", default=None)
    trap_opts(sp)
    sp.set_defaults(func=cmd_timing)

    sp = sub.add_parser("paper-defaults", help="print the calibrated noise parameters as JSON")
    sp.add_argument("--sequence", choices=("pcm", "gme"), default="pcm")
    sp.add_argument("--out", default=None)
    sp.set_defaults(func=cmd_paper_defaults)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    if getattr(args, "shots", 1) is not None and getattr(args, "shots", 1) < 1:
        print("error: --shots must be positive", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return args.func(args, ["flagpcm", *argv])
    except ConfigError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
