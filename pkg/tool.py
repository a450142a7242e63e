#!/usr/bin/env python3
"""
QFT-QKD Detection Analysis Tool

Command line front end for the QFT-based quantum key distribution simulator.
It computes eavesdropper detection probabilities for verification schemes,
runs the two-pass, three-pass and BB84 protocols end to end, reproduces the
many-copies attack, emits detection curves, and cross-checks the analytic
engine against simulation.

Key Features:
- Analytic detection probabilities (recursion and exact joint models)
- Seeded Monte Carlo protocol runs with optional transcript dumps
- Many-copies attack against BB84 and the two-pass QFT protocol
- Detection curves for the pair/triple, compartment/flat schemes
- Cross-validation of analytic values against simulation
- Project settings via config.yaml, seed fallback via QFTQKD_SEED

Output:
Result rows go to stdout (or --out) as CSV, or JSON with --format json.
Status messages and logs go to stderr. Every row echoes the seed, so reruns
with identical flags produce byte-identical files.

Exit codes:
  0 success, 1 unexpected error, 2 usage or configuration error,
  3 capacity limit exceeded, 4 cross-validation disagreement

Dependencies:
- numpy and scipy for the simulator and statistics
- PyYAML for configuration file parsing
"""

import argparse
import json
import sys
from pathlib import Path
from typing import Any, Dict, List

import numpy as np
import yaml

from lib.adversary import many_copies_attack, parse_eve_descriptor, resolve_touch_set
from lib.config_manager import ProjectConfig, load_config, resolve_seed, setup_logging
from lib.detection_engine import aggregate_detection, bb84_detection_probability
from lib.errors import EXIT_DISAGREEMENT, EXIT_OK, EXIT_USAGE, QKDError
from lib.montecarlo_engine import crossvalidate, estimate_detection, trial_rng
from lib.protocol_manager import (
    Protocol,
    ProtocolParams,
    guess_accuracy,
    transcript_to_dict,
)
from lib.report_writer import (
    ATTACK_COLUMNS,
    CROSSVALIDATE_COLUMNS,
    CURVE_COLUMNS,
    FORMATS,
    write_json_lines,
    write_report,
)
from lib.scheme_manager import (
    SchemeKind,
    VerificationScheme,
    build_scheme,
    dump_scheme,
    load_scheme,
    scheme_to_dict,
)

FIGURE_SCHEMES = (
    SchemeKind.PAIR_COMPARTMENT.value,
    SchemeKind.PAIR_FLAT.value,
    SchemeKind.TRIPLE_COMPARTMENT.value,
    SchemeKind.TRIPLE_FLAT.value,
)
FIGURE_METHODS = ("analytic", "montecarlo")


class UsageError(QKDError):
    """Invalid flag combination"""

    exit_code = EXIT_USAGE


def status(message: str) -> None:
    """Status lines go to stderr so stdout carries only result rows"""
    print(message, file=sys.stderr)


def _setup(args) -> ProjectConfig:
    config = load_config(args.config)
    setup_logging("DEBUG" if args.verbose else config.level)
    return config


def _or_config(value, default):
    """Flag value unless it was left out; an explicit 0 is kept"""
    return default if value is None else value


def _seed(args, config: ProjectConfig) -> int:
    seed, origin = resolve_seed(args.seed, config)
    if seed < 0:
        raise UsageError(f"Seed must be >= 0, got {seed} (from {origin})")
    status(f"🎲 Seed: {seed} (from {origin})")
    return seed


def _resolve_scheme(args, config: ProjectConfig, seed: int) -> VerificationScheme:
    """Exactly one of --builtin / --scheme-file"""
    if bool(args.builtin) == bool(args.scheme_file):
        raise UsageError("Give exactly one of --builtin or --scheme-file")
    if args.scheme_file:
        return load_scheme(Path(args.scheme_file))
    key_qubits = _or_config(args.key_qubits, config.max_key_qubits)
    return build_scheme(args.builtin, key_qubits, np.random.default_rng(seed))


def _trials(args, config: ProjectConfig) -> int:
    trials = _or_config(args.trials, config.trials)
    if trials < 1:
        raise UsageError(f"--trials must be >= 1, got {trials}")
    return trials


def _mismatch_limit(args, config: ProjectConfig) -> int:
    return _or_config(args.mismatch_limit, config.mismatch_limit)


def _emit(args, config: ProjectConfig, rows: List[Dict[str, Any]], columns) -> None:
    fmt = args.format or config.format
    out = Path(args.out) if args.out else None
    text = write_report(rows, columns, fmt, out)
    if out is None:
        sys.stdout.write(text)
    else:
        status(f"✅ Wrote {len(rows)} rows to {out}")


def _curve_row(scheme: VerificationScheme, statistic: str, method: str, seed: int, **values):
    row = {
        "scheme": scheme.name,
        "key_qubits": scheme.num_key_qubits,
        "statistic": statistic,
        "method": method,
        "trials": 0,
        "stderr": 0.0,
        "seed": seed,
    }
    row.update(values)
    return row


def cmd_analyze(args):
    """Handle analyze subcommand - analytic detection probability"""
    config = _setup(args)
    seed = _seed(args, config)
    scheme = _resolve_scheme(args, config, seed)
    eve = resolve_touch_set(scheme, args.eve or config.eve)
    statistic = args.stat or config.statistic
    mismatch_limit = _mismatch_limit(args, config)

    if scheme.kind == SchemeKind.BB84_RANDOM.value:
        probability = bb84_detection_probability(
            scheme.verification_positions, eve, mismatch_limit
        )
        row = _curve_row(scheme, statistic, "analytic", seed, probability=probability)
    else:
        if mismatch_limit != 0:
            raise UsageError(
                f"Analytic QFT detection assumes mismatch limit 0, got {mismatch_limit}; "
                "use simulate for a tolerant verifier"
            )
        b_mode = "exhaustive" if args.samples is None else "sampled"
        if args.samples is not None and args.samples < 1:
            raise UsageError(f"--samples must be >= 1, got {args.samples}")
        report = aggregate_detection(
            scheme,
            eve,
            statistic,
            b_mode=b_mode,
            samples=_or_config(args.samples, 0),
            seed=seed,
            model=args.model or config.model,
            max_b_space_bits=config.max_b_space_bits,
            cap=config.max_compartment_enumeration,
            confidence=config.confidence,
        )
        row = _curve_row(
            scheme,
            statistic,
            "analytic",
            seed,
            probability=report.probability,
            trials=report.trials,
            stderr=report.confidence_halfwidth,
        )
        if report.argmin_key is not None:
            status(f"📋 Minimum attained at key bits {list(report.argmin_key)}")

    _emit(args, config, [row], CURVE_COLUMNS)
    return EXIT_OK


def cmd_simulate(args):
    """Handle simulate subcommand - Monte Carlo protocol runs"""
    config = _setup(args)
    seed = _seed(args, config)
    scheme = _resolve_scheme(args, config, seed)
    passes = [int(p) for p in args.eve_passes.split(",")] if args.eve_passes else (2,)
    eve = parse_eve_descriptor(args.eve or "none", passes)
    params = ProtocolParams(
        scheme, _mismatch_limit(args, config), seed, config.max_qubits, config.norm_tolerance
    )
    trials = _trials(args, config)

    transcripts = []
    status(f"🔄 Running {trials} {args.protocol} trials on {scheme.name}")
    estimate = estimate_detection(
        args.protocol,
        params,
        eve,
        "random",
        trials,
        seed,
        on_transcript=lambda trial, transcript: transcripts.append(transcript),
    )

    accuracy = guess_accuracy(transcripts)
    if accuracy is not None:
        status(f"📋 Eve's key-bit guesses were correct {accuracy:.4f} of the time")

    if args.dump_transcripts:
        path = (
            Path(args.out).with_suffix(".transcripts.jsonl")
            if args.out
            else Path("transcripts.jsonl")
        )
        count = write_json_lines((transcript_to_dict(t) for t in transcripts), path)
        status(f"✅ Wrote {count} transcripts to {path}")

    row = _curve_row(
        scheme,
        "mean",
        "montecarlo",
        seed,
        probability=estimate.mean,
        trials=estimate.trials,
        stderr=estimate.standard_error,
    )
    _emit(args, config, [row], CURVE_COLUMNS)
    return EXIT_OK


def cmd_attack(args):
    """Handle attack subcommand - many-copies attack"""
    config = _setup(args)
    seed = _seed(args, config)
    scheme = _resolve_scheme(args, config, seed)
    params = ProtocolParams(
        scheme, _mismatch_limit(args, config), seed, config.max_qubits, config.norm_tolerance
    )
    trials = _trials(args, config)

    counts = {"detected": 0, "inferred_correct": 0, "inferred_wrong": 0, "unknown": 0}
    for trial in range(trials):
        result = many_copies_attack(
            args.protocol, args.target_wire, args.copies, trial_rng(seed, trial), params
        )
        counts["detected"] += int(result.detected)
        if result.inferred_bit is None:
            counts["unknown"] += 1
        elif result.succeeded:
            counts["inferred_correct"] += 1
        else:
            counts["inferred_wrong"] += 1

    status(
        f"📋 {args.protocol}: detected in {counts['detected']}/{trials} trials, "
        f"secret bit recovered in {counts['inferred_correct']}/{trials}"
    )
    row = {
        "protocol": args.protocol,
        "scheme": scheme.name,
        "target_wire": args.target_wire,
        "copies": args.copies,
        "trials": trials,
        "seed": seed,
        **counts,
    }
    _emit(args, config, [row], ATTACK_COLUMNS)
    return EXIT_OK


def cmd_figures(args):
    """Handle figures subcommand - detection curves for the pair/triple schemes"""
    config = _setup(args)
    seed = _seed(args, config)
    methods = [m.strip() for m in args.methods.split(",") if m.strip()]
    unknown = [m for m in methods if m not in FIGURE_METHODS]
    if unknown or not methods:
        raise UsageError(f"--methods takes {', '.join(FIGURE_METHODS)}, got {args.methods!r}")
    max_key_qubits = _or_config(args.max_key_qubits, config.max_key_qubits)
    if max_key_qubits < 1:
        raise UsageError(f"--max-key-qubits must be >= 1, got {max_key_qubits}")
    model = args.model or config.model
    trials = _trials(args, config)

    rows = []
    for kind in FIGURE_SCHEMES:
        for k in range(1, max_key_qubits + 1):
            scheme = build_scheme(kind, k)
            eve = resolve_touch_set(scheme, args.eve or config.eve)
            status(f"🔄 {kind} with {k} key qubits")
            for statistic in ("mean", "min"):
                report = aggregate_detection(
                    scheme,
                    eve,
                    statistic,
                    model=model,
                    max_b_space_bits=config.max_b_space_bits,
                    cap=config.max_compartment_enumeration,
                )
                if "analytic" in methods:
                    rows.append(
                        _curve_row(scheme, statistic, "analytic", seed, probability=report.probability)
                    )
                if "montecarlo" in methods:
                    params = ProtocolParams(
                        scheme, 0, seed, config.max_qubits, config.norm_tolerance
                    )
                    b_policy = report.argmin_key if statistic == "min" else "random"
                    estimate = estimate_detection(
                        Protocol.TWO_PASS.value,
                        params,
                        parse_eve_descriptor(args.eve or config.eve),
                        b_policy,
                        trials,
                        seed,
                    )
                    rows.append(
                        _curve_row(
                            scheme,
                            statistic,
                            "montecarlo",
                            seed,
                            probability=estimate.mean,
                            trials=estimate.trials,
                            stderr=estimate.standard_error,
                        )
                    )

    _emit(args, config, rows, CURVE_COLUMNS)
    return EXIT_OK


def cmd_crossvalidate(args):
    """Handle crossvalidate subcommand - analytic vs simulated detection"""
    config = _setup(args)
    seed = _seed(args, config)
    scheme = _resolve_scheme(args, config, seed)
    eve = resolve_touch_set(scheme, args.eve or config.eve)
    statistic = args.stat or config.statistic
    trials = _trials(args, config)

    result = crossvalidate(
        scheme,
        eve,
        statistic,
        trials,
        seed,
        model=args.model or "exact",
        protocol=args.protocol,
        mismatch_limit=_mismatch_limit(args, config),
        norm_tolerance=config.norm_tolerance,
        sigma=config.sigma,
        floor=config.agreement_floor,
        max_qubits=config.max_qubits,
        max_b_space_bits=config.max_b_space_bits,
        cap=config.max_compartment_enumeration,
    )
    row = {
        "scheme": scheme.name,
        "key_qubits": scheme.num_key_qubits,
        "statistic": statistic,
        "model": result.analytic.model,
        "analytic": result.analytic.probability,
        "empirical": result.empirical.mean,
        "stderr": result.empirical.standard_error,
        "tolerance": result.tolerance,
        "trials": result.empirical.trials,
        "seed": seed,
        "agree": result.agree,
    }
    _emit(args, config, [row], CROSSVALIDATE_COLUMNS)

    if not result.agree:
        status(
            f"❌ Analytic {result.analytic.probability:.6f} and empirical "
            f"{result.empirical.mean:.6f} differ by more than {result.tolerance:.6f}"
        )
        return EXIT_DISAGREEMENT
    status("✅ Analytic and empirical detection agree")
    return EXIT_OK


def cmd_show_config(args):
    """Handle show-config subcommand"""
    config = _setup(args)
    seed, origin = resolve_seed(args.seed, config)

    print("📋 Current Configuration:")
    print(f"  Config File: {config.source or 'built-in defaults'}")
    print(f"  Effective Seed: {seed} (from {origin})")
    print()
    print(yaml.safe_dump(config.to_dict(), sort_keys=False), end="")
    return EXIT_OK


def cmd_export_scheme(args):
    """Handle export-scheme subcommand - write a built-in scheme as JSON"""
    config = _setup(args)
    seed = _seed(args, config)
    key_qubits = _or_config(args.key_qubits, config.max_key_qubits)
    scheme = build_scheme(args.builtin, key_qubits, np.random.default_rng(seed))
    if args.out:
        dump_scheme(scheme, Path(args.out))
        status(f"✅ Wrote {scheme.name} scheme to {args.out}")
    else:
        print(json.dumps(scheme_to_dict(scheme), indent=2))
    return EXIT_OK


def _add_common_args(parser, scheme: bool = True, eve: bool = True):
    parser.add_argument("--seed", type=int, help="RNG seed (default: $QFTQKD_SEED, then config.yaml)")
    parser.add_argument("--format", choices=FORMATS, help="Output format (default: config.yaml)")
    parser.add_argument("--out", metavar="PATH", help="Write results to PATH instead of stdout")
    parser.add_argument("--trials", type=int, help="Number of Monte Carlo trials")
    if scheme:
        source = parser.add_mutually_exclusive_group()
        source.add_argument(
            "--builtin",
            choices=[k.value for k in SchemeKind],
            help="Built-in verification scheme",
        )
        source.add_argument("--scheme-file", metavar="PATH", help="Scheme JSON document")
        parser.add_argument("--key-qubits", type=int, help="Key length for --builtin schemes")
        parser.add_argument(
            "--mismatch-limit", type=int, help="Tolerated verification mismatches"
        )
    if eve:
        parser.add_argument(
            "--eve",
            metavar="DESCRIPTOR",
            help="Eavesdropper: none, full, keys or subset=i,j,... (default: config.yaml)",
        )


def main(argv=None):
    """Main CLI entry point"""
    parser = argparse.ArgumentParser(
        description="QFT-QKD Detection Analysis Tool",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  %(prog)s show-config
  %(prog)s analyze --builtin pair_compartment --key-qubits 3 --eve keys --stat min
  %(prog)s analyze --builtin pair_flat --key-qubits 4 --model exact
  %(prog)s analyze --scheme-file my_scheme.json --eve subset=0,2
  %(prog)s simulate --builtin qft_random --key-qubits 4 --eve full --trials 10000
  %(prog)s simulate --builtin bb84_random --key-qubits 4 --protocol bb84 --eve none
  %(prog)s simulate --builtin pair_flat --key-qubits 2 --eve keys --dump-transcripts --out run.csv
  %(prog)s attack --builtin pair_compartment --key-qubits 1 --protocol bb84 --copies 4
  %(prog)s figures --max-key-qubits 4 --seed 7
  %(prog)s figures --methods analytic,montecarlo --trials 2000 --out curves.csv
  %(prog)s crossvalidate --builtin triple_flat --key-qubits 2 --eve keys --stat min
  %(prog)s export-scheme --builtin triple_compartment --key-qubits 3 --out scheme.json

Note: This tool can be run from anywhere within the project directory tree.
      It will automatically find config.yaml in the project root.
      Result rows go to stdout; status messages and logs go to stderr.
        """,
    )

    parser.add_argument(
        "--verbose", "-v", action="store_true", help="Enable verbose logging"
    )
    parser.add_argument(
        "--config", metavar="PATH", help="Configuration file (default: search for config.yaml)"
    )

    # Create subparsers for different commands
    subparsers = parser.add_subparsers(
        dest="command", help="Available commands", required=True
    )

    # show-config subcommand
    config_parser = subparsers.add_parser(
        "show-config", help="Display the effective configuration"
    )
    config_parser.add_argument("--seed", type=int, help="Seed override to resolve")
    config_parser.set_defaults(func=cmd_show_config)

    # analyze subcommand
    analyze_parser = subparsers.add_parser(
        "analyze", help="Analytic detection probability for a scheme"
    )
    _add_common_args(analyze_parser)
    analyze_parser.add_argument("--stat", choices=("mean", "min"), help="Aggregation over key bits")
    analyze_parser.add_argument(
        "--model", choices=("recursion", "exact"), help="Detection model (default: config.yaml)"
    )
    analyze_parser.add_argument(
        "--samples",
        type=int,
        help="Sample this many key assignments instead of enumerating all of them",
    )
    analyze_parser.set_defaults(func=cmd_analyze)

    # simulate subcommand
    simulate_parser = subparsers.add_parser(
        "simulate", help="Monte Carlo detection estimate from protocol runs"
    )
    _add_common_args(simulate_parser)
    simulate_parser.add_argument(
        "--protocol",
        choices=[p.value for p in Protocol],
        default=Protocol.TWO_PASS.value,
        help="Protocol to run (default: two_pass)",
    )
    simulate_parser.add_argument(
        "--eve-passes",
        metavar="N,N",
        help="Channel passes Eve taps (default: 2)",
    )
    simulate_parser.add_argument(
        "--dump-transcripts",
        action="store_true",
        help="Write every run's transcript as JSON lines next to --out",
    )
    simulate_parser.set_defaults(func=cmd_simulate)

    # attack subcommand
    attack_parser = subparsers.add_parser(
        "attack", help="Many-copies attack on one wire"
    )
    _add_common_args(attack_parser, eve=False)
    attack_parser.add_argument(
        "--protocol",
        choices=(Protocol.BB84.value, Protocol.TWO_PASS.value),
        default=Protocol.BB84.value,
        help="Protocol under attack (default: bb84)",
    )
    attack_parser.add_argument(
        "--copies", type=int, default=4, help="Identical messages Eve sees (default: 4)"
    )
    attack_parser.add_argument(
        "--target-wire", type=int, default=0, help="Wire Eve measures (default: 0)"
    )
    attack_parser.set_defaults(func=cmd_attack)

    # figures subcommand
    figures_parser = subparsers.add_parser(
        "figures", help="Detection curves for the pair and triple schemes"
    )
    _add_common_args(figures_parser, scheme=False)
    figures_parser.add_argument(
        "--max-key-qubits", type=int, help="Largest key length (default: config.yaml)"
    )
    figures_parser.add_argument(
        "--methods",
        default="analytic",
        help="Comma separated: analytic, montecarlo (default: analytic; montecarlo "
        "simulates every point and takes hours for the 24-qubit schemes at k=8)",
    )
    figures_parser.add_argument(
        "--model", choices=("recursion", "exact"), help="Detection model (default: config.yaml)"
    )
    figures_parser.set_defaults(func=cmd_figures)

    # crossvalidate subcommand
    crossvalidate_parser = subparsers.add_parser(
        "crossvalidate", help="Compare analytic detection with simulation"
    )
    _add_common_args(crossvalidate_parser)
    crossvalidate_parser.add_argument("--stat", choices=("mean", "min"), help="Aggregation over key bits")
    crossvalidate_parser.add_argument(
        "--model", choices=("recursion", "exact"), help="Detection model (default: exact)"
    )
    crossvalidate_parser.add_argument(
        "--protocol",
        choices=[p.value for p in Protocol],
        default=Protocol.TWO_PASS.value,
        help="Protocol to simulate (default: two_pass)",
    )
    crossvalidate_parser.set_defaults(func=cmd_crossvalidate)

    # export-scheme subcommand
    export_parser = subparsers.add_parser(
        "export-scheme", help="Write a built-in scheme as a JSON document"
    )
    export_parser.add_argument(
        "--builtin", required=True, choices=[k.value for k in SchemeKind], help="Built-in scheme"
    )
    export_parser.add_argument("--key-qubits", type=int, help="Key length")
    export_parser.add_argument("--seed", type=int, help="Seed for the random layouts")
    export_parser.add_argument("--out", metavar="PATH", help="Output path (default: stdout)")
    export_parser.set_defaults(func=cmd_export_scheme)

    args = parser.parse_args(argv)

    try:
        return args.func(args)
    except KeyboardInterrupt:
        status("\n❌ Operation cancelled by user")
        return 1
    except QKDError as e:
        status(f"❌ {e}")
        if args.verbose:
            import traceback

            traceback.print_exc()
        return e.exit_code
    except Exception as e:
        status(f"❌ Unexpected error: {e}")
        if args.verbose:
            import traceback

            traceback.print_exc()
        return 1


if __name__ == "__main__":
    sys.exit(main())
