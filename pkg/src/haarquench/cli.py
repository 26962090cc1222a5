"""Command-line front end: preset experiment runs, convergence checks, and
the acceptance suite, emitting histogram CSVs and a summary JSON.

Each preset names a complete experiment and expands to one or more curves
(configs differing only in disorder family, strength, targets, or noise).  Outputs are deterministic for a fixed seed: no timestamps, sorted
JSON keys, and 17-significant-digit CSV floats.

Exit codes: 0 success, 1 configuration error, 2 numerical failure (the
witness-program dump path is printed to stderr), 3 convergence check failed,
4 acceptance criteria failed.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from .acceptance import format_report, run_all
from .distributions import Family
from .experiment import (
    SEED_SCHEDULE_VERSION,
    ExperimentConfig,
    config_from_dict,
    config_to_dict,
    convergence_check,
    run_clean,
    run_quenched,
    write_histogram_csv,
)
from .gme import SolverFailureError
from .sdp import InfeasibleError

__all__ = ["main", "parse_config_file", "preset_curves", "PRESET_NAMES"]

DEFAULT_SEED = 42

# assumption markers copied into each curve's summary entry
_FLAG_3Q_COUNTS = "three_qubit_counts_reduced_to_desk_scale"
_FLAG_NOISY_SIQR = "noisy_quenched_siqr_assumed_0.5"
_FLAG_NOISY_3Q_COUNTS = "noisy_three_qubit_counts_reused_from_pure_preset"

_N2, _K2 = 1_000_000, 50
_N3_CLEAN, _N3_QUENCHED, _K3 = 2_000, 500, 10


class ConfigError(ValueError):
    """Bad preset name, config file, or command-line usage."""


def _clean2(noise=None):
    return dict(n_qubits=2, n_states=_N2, noise_p=noise)


def _quenched2(family, targets=(0,), siqr=0.5, noise=None):
    return dict(n_qubits=2, n_states=_N2, n_disorder_configs=_K2,
                disorder_family=family, siqr=siqr, targets=targets,
                noise_p=noise)


def _clean3(noise=None):
    return dict(n_qubits=3, n_states=_N3_CLEAN, noise_p=noise)


def _quenched3(family, noise=None):
    return dict(n_qubits=3, n_states=_N3_QUENCHED, n_disorder_configs=_K3,
                disorder_family=family, siqr=0.5, targets=(0, 2, 4, 6),
                noise_p=noise)


def _families2(targets):
    return [(family.value, _quenched2(family, targets), ())
            for family in Family]


_PRESETS = {
    "fig1": [("clean", _clean2(), ())] + _families2((0,)),
    "fig2_noisy2q": [
        ("p09_clean", _clean2(noise=0.9), ()),
        ("p09_cauchy_lorentz",
         _quenched2(Family.CAUCHY_LORENTZ, noise=0.9), (_FLAG_NOISY_SIQR,)),
        ("p08_clean", _clean2(noise=0.8), ()),
        ("p08_cauchy_lorentz",
         _quenched2(Family.CAUCHY_LORENTZ, noise=0.8), (_FLAG_NOISY_SIQR,)),
    ],
    "fig3_twoparam": [("clean", _clean2(), ())] + _families2((0, 2)),
    "fig4_fourparam": [("clean", _clean2(), ())] + _families2((0, 2, 4, 6)),
    "fig5_gamma_sweep": [("clean", _clean2(), ())] + [
        (f"gamma_{g:g}", _quenched2(Family.GAUSSIAN, siqr=g), ())
        for g in (0.3, 0.4, 0.5, 0.6, 0.7)],
    "fig6_3q_pure": [("clean", _clean3(), (_FLAG_3Q_COUNTS,))] + [
        (family.value, _quenched3(family), (_FLAG_3Q_COUNTS,))
        for family in Family],
    "fig7_3q_noisy": [
        ("p09_clean", _clean3(noise=0.9),
         (_FLAG_3Q_COUNTS, _FLAG_NOISY_3Q_COUNTS)),
        ("p09_cauchy_lorentz", _quenched3(Family.CAUCHY_LORENTZ, noise=0.9),
         (_FLAG_3Q_COUNTS, _FLAG_NOISY_3Q_COUNTS, _FLAG_NOISY_SIQR)),
        ("p08_clean", _clean3(noise=0.8),
         (_FLAG_3Q_COUNTS, _FLAG_NOISY_3Q_COUNTS)),
        ("p08_cauchy_lorentz", _quenched3(Family.CAUCHY_LORENTZ, noise=0.8),
         (_FLAG_3Q_COUNTS, _FLAG_NOISY_3Q_COUNTS, _FLAG_NOISY_SIQR)),
    ],
}

PRESET_NAMES = tuple(_PRESETS)


def _scaled(value: int, scale: float) -> int:
    return max(1, int(value * scale))


def preset_curves(name: str, seed: int, scale: float):
    """Expand a preset into (curve_id, config, assumption_flags) triples."""
    if name not in _PRESETS:
        raise ConfigError(
            f"unknown preset {name!r}; choose from {', '.join(PRESET_NAMES)}")
    curves = []
    for curve_id, kwargs, flags in _PRESETS[name]:
        kwargs = dict(kwargs)
        kwargs["n_states"] = _scaled(kwargs["n_states"], scale)
        if kwargs.get("n_disorder_configs"):
            kwargs["n_disorder_configs"] = _scaled(
                kwargs["n_disorder_configs"], scale)
        curves.append((curve_id,
                       ExperimentConfig(master_seed=seed, **kwargs), flags))
    return curves


# ---------------------------------------------------------------------------
# config files


_CONFIG_PARSERS = {
    "n_qubits": int,
    "n_states": int,
    "n_disorder_configs": int,
    "disorder_family": lambda v: None if v == "none" else Family(v),
    "siqr": float,
    "targets": lambda v: tuple(int(t) for t in v.split(",") if t.strip()),
    "noise_p": lambda v: None if v == "none" else float(v),
    "bin_width": float,
    "master_seed": int,
}


def parse_config_file(path) -> dict:
    """Flat key=value file with the ExperimentConfig field names as keys.

    Unknown keys are errors: a typo silently ignored would corrupt a run.
    Returns the parsed field dict; master_seed may be absent (the caller
    supplies the seed resolution order).
    """
    fields = {}
    for number, line in enumerate(Path(path).read_text().splitlines(), 1):
        text = line.strip()
        if not text or text.startswith("#"):
            continue
        key, sep, value = text.partition("=")
        key, value = key.strip(), value.strip()
        if not sep or not key:
            raise ConfigError(f"{path}:{number}: expected key=value")
        if key not in _CONFIG_PARSERS:
            raise ConfigError(f"{path}:{number}: unknown key {key!r}")
        if key in fields:
            raise ConfigError(f"{path}:{number}: duplicate key {key!r}")
        try:
            fields[key] = _CONFIG_PARSERS[key](value)
        except ValueError as exc:
            raise ConfigError(f"{path}:{number}: bad value for {key}: {exc}")
    for required in ("n_qubits", "n_states"):
        if required not in fields:
            raise ConfigError(f"{path}: missing required key {required!r}")
    return fields


# ---------------------------------------------------------------------------
# command implementations


def _resolve_seed(args) -> int:
    if args.seed is not None:
        return args.seed
    env = os.environ.get("HAARQUENCH_SEED")
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise ConfigError(f"HAARQUENCH_SEED={env!r} is not an integer")
    return DEFAULT_SEED


def _target_curves(args, seed):
    """A preset name, or a config-file path for a single custom curve."""
    if args.target in _PRESETS:
        return args.target, preset_curves(args.target, seed, args.scale)
    path = Path(args.target)
    if not path.is_file():
        raise ConfigError(
            f"{args.target!r} is neither a preset "
            f"({', '.join(PRESET_NAMES)}) nor a config file")
    fields = parse_config_file(path)
    fields.setdefault("master_seed", seed)
    fields["n_states"] = _scaled(fields["n_states"], args.scale)
    if fields.get("n_disorder_configs"):
        fields["n_disorder_configs"] = _scaled(
            fields["n_disorder_configs"], args.scale)
    if args.seed is not None:
        fields["master_seed"] = args.seed
    return path.stem, [("custom", ExperimentConfig(**fields), ())]


def _cmd_run(args) -> int:
    seed = _resolve_seed(args)
    name, curves = _target_curves(args, seed)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    entries = []
    for curve_id, config, flags in curves:
        if config.n_disorder_configs >= 1:
            hist = run_quenched(config, n_workers=args.workers).histogram
        else:
            hist = run_clean(config, n_workers=args.workers)
        csv_name = f"{name}_{curve_id}.csv"
        write_histogram_csv(hist, out / csv_name)
        entries.append({
            "curve": curve_id,
            "csv": csv_name,
            "config": config_to_dict(config),
            "assumption_flags": list(flags),
            "mean": hist.mean,
            "std": hist.std,
            "n_samples": hist.n_samples,
            "zero_percentage": hist.zero_percentage,
        })
        print(f"{name}/{curve_id}: mean {hist.mean:.6f} std {hist.std:.6f} "
              f"({hist.n_samples} samples)")
    summary = {
        "name": name,
        "master_seed": seed,
        "scale": args.scale,
        "seed_schedule_version": SEED_SCHEDULE_VERSION,
        "curves": entries,
    }
    summary_path = out / f"{name}_summary.json"
    summary_path.write_text(json.dumps(summary, indent=2, sort_keys=True)
                            + "\n")
    print(f"summary: {summary_path}")
    return 0


def _cmd_check(args) -> int:
    seed = _resolve_seed(args)
    if args.target not in _PRESETS:
        raise ConfigError(
            f"unknown preset {args.target!r}; "
            f"choose from {', '.join(PRESET_NAMES)}")
    curves = preset_curves(args.target, seed, args.scale)
    all_ok = True
    print(f"{'curve':<24} {'mean delta':>12} {'tol':>9} "
          f"{'std delta':>12} {'tol':>9}  verdict")
    for curve_id, config, _ in curves:
        report = convergence_check(config, n_workers=args.workers)
        verdict = "converged" if report.converged else "NOT CONVERGED"
        all_ok = all_ok and report.converged
        print(f"{curve_id:<24} {report.mean_delta:>12.2e} "
              f"{report.mean_tolerance:>9.0e} {report.std_delta:>12.2e} "
              f"{report.std_tolerance:>9.0e}  {verdict}")
    print(f"{args.target}: "
          + ("converged at target precision" if all_ok
             else "convergence check failed"))
    return 0 if all_ok else 3


def _cmd_acceptance(args) -> int:
    seed = _resolve_seed(args)
    results = run_all(master_seed=seed, scale=args.scale,
                      n_workers=args.workers, progress=print)
    report = format_report(results, seed, args.scale)
    print(report, end="")
    if args.out:
        out = Path(args.out)
        if out.parent != Path(""):
            out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(report)
        print(f"report: {out}")
    return 0 if all(r.passed for r in results) else 4


# ---------------------------------------------------------------------------
# argument parsing


class _Parser(argparse.ArgumentParser):
    # argparse exits with status 2 on usage errors, which this tool
    # reserves for numerical failures; route usage errors to exit 1
    def error(self, message):
        raise ConfigError(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="haarquench",
                     description="Disorder-vs-entanglement Monte Carlo runs")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, with_out=None):
        p.add_argument("--seed", type=int, default=None,
                       help="master seed (default: HAARQUENCH_SEED env var, "
                            f"then {DEFAULT_SEED})")
        p.add_argument("--workers", type=int,
                       default=os.cpu_count() or 1,
                       help="worker processes (default: logical cores)")
        p.add_argument("--scale", type=float, default=1.0,
                       help="multiply ensemble sizes (floored, min 1)")
        if with_out:
            p.add_argument("--out", default=with_out[0], help=with_out[1])

    run = sub.add_parser("run", help="run a preset or config file")
    run.add_argument("target", help="preset name or config-file path")
    common(run, with_out=(".", "output directory for CSV/JSON artifacts"))

    check = sub.add_parser("check", help="convergence check a preset")
    check.add_argument("target", help="preset name")
    common(check)

    acceptance = sub.add_parser("acceptance", help="run acceptance criteria")
    common(acceptance, with_out=("acceptance_report.txt",
                                 "path for the pass/fail report"))
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "check":
            return _cmd_check(args)
        return _cmd_acceptance(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 1
    except (SolverFailureError, InfeasibleError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
