"""Two-step Monte Carlo driver: clean Haar pass, quenched-disorder pass,
histogramming, and convergence reporting.

The first step draws n_states Haar-uniform states and computes the
entanglement measure of each (concurrence for two qubits, the witness-based
monotone for three).  The second step revisits each state's raw coefficient
tuple, redraws the target entries n_disorder_configs times, normalizes each
realization separately, computes the measure per realization, and averages
the MEASURE values; states are never averaged.

Reproducibility rests on a fixed stream schedule over the counter-based
generator: state i draws its raw tuple from stream i, and disorder
configuration j of state i draws from stream n_states + i*n_disorder_configs
+ j.  Results are therefore independent of chunking and of how many worker
processes participate.
"""

from __future__ import annotations

import csv
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from typing import Iterator

import numpy as np

from .concurrence import concurrence_pure_batch, white_noise_concurrence
from .distributions import Family, NonPositiveError
from .gme import gme_monotone, gme_monotone_pure
from .states import (
    NoiseSpec,
    PureState,
    ZeroVectorError,
    disorder_target_values,
    haar_amplitudes_batch,
    normalized_amplitudes_batch,
    with_white_noise,
)

__all__ = [
    "SEED_SCHEDULE_VERSION",
    "ExperimentConfig",
    "EntanglementHistogram",
    "QuenchedRecord",
    "QuenchedResult",
    "ConvergenceReport",
    "MeasureError",
    "OutOfRangeError",
    "histogram",
    "run_clean",
    "run_quenched",
    "run_gamma_sweep",
    "convergence_check",
    "write_histogram_csv",
    "config_to_dict",
    "config_from_dict",
]

# version of the stream-assignment rule above; bump on any change that
# alters which counter positions feed which state or configuration
SEED_SCHEDULE_VERSION = 1

_RANGE_SLACK = 1e-9
_BIN_COUNT_TOL = 1e-9
# the half-size convergence rerun is decorrelated from the main run by
# offsetting the master seed with the 64-bit golden-ratio constant
_RERUN_SEED_OFFSET = 0x9E3779B97F4A7C15
# chunk sizing: two-qubit work is vectorized (bounded by memory per chunk),
# three-qubit work is one witness program per realization
_CLEAN_CHUNK_2Q = 100_000
_QUENCHED_REALIZATIONS_2Q = 200_000
_CHUNK_3Q = 25


class MeasureError(RuntimeError):
    """An entanglement measure failed; the message carries the state
    provenance (master seed, state index, disorder configuration)."""


class OutOfRangeError(ValueError):
    """A sample lies outside the histogram range by more than round-off."""


@dataclass(frozen=True)
class ExperimentConfig:
    """One experiment: ensemble sizes, disorder description, noise, bins.

    n_disorder_configs = 0 describes a clean run; positive values require a
    disorder family and at least one target index into the raw tuple.
    """

    n_qubits: int
    n_states: int
    n_disorder_configs: int = 0
    disorder_family: Family | None = None
    siqr: float = 0.5
    targets: tuple[int, ...] = ()
    noise_p: float | None = None
    bin_width: float = 0.02
    master_seed: int = 0

    def __post_init__(self):
        if self.n_qubits not in (2, 3):
            raise ValueError(f"n_qubits must be 2 or 3, got {self.n_qubits}")
        if int(self.n_states) < 1:
            raise ValueError(f"n_states must be positive, got {self.n_states}")
        if int(self.n_disorder_configs) < 0:
            raise ValueError("n_disorder_configs must be non-negative")
        object.__setattr__(self, "targets",
                           tuple(int(t) for t in self.targets))
        if self.n_disorder_configs > 0:
            if not isinstance(self.disorder_family, Family):
                raise ValueError("disordered runs need a disorder_family")
            if not self.siqr > 0.0:
                raise NonPositiveError(f"siqr must be > 0, got {self.siqr}")
            n_reals = 2 ** (self.n_qubits + 1)
            if len(self.targets) == 0:
                raise ValueError("disordered runs need at least one target")
            if len(set(self.targets)) != len(self.targets):
                raise ValueError(f"duplicate targets in {self.targets}")
            if min(self.targets) < 0 or max(self.targets) >= n_reals:
                raise ValueError(
                    f"targets {self.targets} outside [0, {n_reals})")
        if self.noise_p is not None:
            NoiseSpec(self.noise_p)
        if not self.bin_width > 0.0:
            raise ValueError(f"bin_width must be > 0, got {self.bin_width}")
        top = self.measure_range()[1]
        n_bins = top / self.bin_width
        if abs(n_bins - round(n_bins)) > _BIN_COUNT_TOL:
            raise ValueError(
                f"bin_width {self.bin_width} does not evenly divide "
                f"the measure range [0, {top}]")
        if not 0 <= int(self.master_seed) < 2 ** 64:
            raise ValueError("master_seed must fit in 64 bits")

    def measure_range(self) -> tuple[float, float]:
        return (0.0, 1.0) if self.n_qubits == 2 else (0.0, 0.5)

    def n_bins(self) -> int:
        return round(self.measure_range()[1] / self.bin_width)


@dataclass(frozen=True)
class EntanglementHistogram:
    """Binned relative frequencies plus the raw-sample moments.

    mean/std/zero_percentage come from the samples themselves, not from the
    binned counts, so they are exact at float precision.  zero_percentage is
    the share of samples at exactly zero entanglement (the measure's floor),
    which the noisy ensembles populate with finite weight.
    """

    bin_edges: np.ndarray
    percentages: np.ndarray
    mean: float
    std: float
    n_samples: int
    zero_percentage: float

    def __post_init__(self):
        edges = np.asarray(self.bin_edges, dtype=np.float64)
        pct = np.asarray(self.percentages, dtype=np.float64)
        if edges.ndim != 1 or pct.ndim != 1 or edges.size != pct.size + 1:
            raise ValueError("bin_edges must have one more entry than "
                             "percentages")
        if self.n_samples < 1:
            raise ValueError("histogram needs at least one sample")
        if pct.min() < 0.0 or abs(pct.sum() - 100.0) > 1e-9:
            raise ValueError("percentages must be non-negative and sum to 100")
        object.__setattr__(self, "bin_edges", edges)
        object.__setattr__(self, "percentages", pct)


@dataclass(frozen=True)
class QuenchedRecord:
    """Per-state pairing of the clean measure value with the mean of the
    measure over that state's disorder realizations."""

    state_index: int
    clean_entanglement: float
    quenched_avg_entanglement: float

    def __post_init__(self):
        for v in (self.clean_entanglement, self.quenched_avg_entanglement):
            if not -_RANGE_SLACK <= v <= 1.0 + _RANGE_SLACK:
                raise ValueError(f"entanglement {v} outside measure range")


@dataclass(frozen=True)
class QuenchedResult:
    """Histogram of the quenched averages plus the per-state value arrays
    (clean_values[i] and quenched_values[i] belong to state i)."""

    histogram: EntanglementHistogram
    clean_values: np.ndarray
    quenched_values: np.ndarray

    def records(self) -> Iterator[QuenchedRecord]:
        for i in range(self.clean_values.size):
            yield QuenchedRecord(i, float(self.clean_values[i]),
                                 float(self.quenched_values[i]))


@dataclass(frozen=True)
class ConvergenceReport:
    """Full run versus a half-size rerun on a decorrelated seed.

    A moment counts as converged when the two runs agree to within one unit
    in the last of significant_figures significant places.
    """

    significant_figures: int
    full_mean: float
    full_std: float
    half_mean: float
    half_std: float
    mean_delta: float
    std_delta: float
    mean_tolerance: float
    std_tolerance: float
    mean_converged: bool
    std_converged: bool
    converged: bool


# ---------------------------------------------------------------------------
# histogramming


def histogram(samples, value_range, bin_width: float) -> EntanglementHistogram:
    """Bin samples into left-closed right-open windows (the last window is
    closed) and attach the raw-sample mean and standard deviation."""
    x = np.asarray(samples, dtype=np.float64).ravel()
    if x.size == 0:
        raise ValueError("histogram needs at least one sample")
    lo, hi = float(value_range[0]), float(value_range[1])
    if not bin_width > 0.0:
        raise ValueError(f"bin_width must be > 0, got {bin_width}")
    n_bins_f = (hi - lo) / bin_width
    n_bins = round(n_bins_f)
    if n_bins < 1 or abs(n_bins_f - n_bins) > _BIN_COUNT_TOL:
        raise ValueError(
            f"bin_width {bin_width} does not evenly divide [{lo}, {hi}]")
    if x.min() < lo - _RANGE_SLACK or x.max() > hi + _RANGE_SLACK:
        offender = x[np.argmax(np.maximum(lo - x, x - hi))]
        raise OutOfRangeError(f"sample {offender} outside [{lo}, {hi}]")
    clamped = np.clip(x, lo, hi)
    idx = np.floor((clamped - lo) / bin_width).astype(np.intp)
    counts = np.bincount(np.minimum(idx, n_bins - 1), minlength=n_bins)
    edges = lo + bin_width * np.arange(n_bins + 1)
    edges[-1] = hi
    return EntanglementHistogram(
        bin_edges=edges,
        percentages=counts * (100.0 / x.size),
        mean=float(clamped.mean()),
        std=float(clamped.std()),
        n_samples=int(x.size),
        zero_percentage=100.0 * np.count_nonzero(clamped == lo) / x.size,
    )


# ---------------------------------------------------------------------------
# measure kernels (module level so worker processes can unpickle them)


def _disorder_streams(n_states: int, n_configs: int, lo: int, hi: int):
    base = (np.uint64(n_states)
            + np.arange(lo, hi, dtype=np.uint64) * np.uint64(n_configs))
    return (base[:, None] + np.arange(n_configs, dtype=np.uint64)).ravel()


def _measure_batch_2q(amps: np.ndarray, noise_p) -> np.ndarray:
    values = concurrence_pure_batch(amps)
    if noise_p is not None:
        values = white_noise_concurrence(values, noise_p)
    return values


def _measure_one_3q(row: np.ndarray, noise_p) -> float:
    psi = PureState(3, row)
    if noise_p is None:
        return gme_monotone_pure(psi).value
    return gme_monotone(with_white_noise(psi, NoiseSpec(noise_p))).value


def _measure_batch_3q(amps: np.ndarray, config: ExperimentConfig,
                      state_of_row) -> np.ndarray:
    out = np.empty(amps.shape[0])
    for r in range(amps.shape[0]):
        try:
            out[r] = _measure_one_3q(amps[r], config.noise_p)
        except Exception as exc:
            raise MeasureError(
                f"measure failed at state {state_of_row(r)} "
                f"(master_seed {config.master_seed}): {exc}") from exc
    return out


def _clean_chunk(config: ExperimentConfig, lo: int, hi: int) -> np.ndarray:
    streams = np.arange(lo, hi, dtype=np.uint64)
    _, amps = haar_amplitudes_batch(config.n_qubits, config.master_seed,
                                    streams)
    if config.n_qubits == 2:
        return _measure_batch_2q(amps, config.noise_p)
    return _measure_batch_3q(amps, config, lambda r: lo + r)


def _quenched_chunk(config: ExperimentConfig, lo: int, hi: int):
    k = config.n_disorder_configs
    streams = np.arange(lo, hi, dtype=np.uint64)
    raw, amps = haar_amplitudes_batch(config.n_qubits, config.master_seed,
                                      streams)
    targets = np.asarray(config.targets, dtype=np.intp)
    centers = np.repeat(raw[:, targets], k, axis=0)
    draws = disorder_target_values(
        config.disorder_family, centers, config.siqr, config.master_seed,
        _disorder_streams(config.n_states, k, lo, hi))
    disordered = np.repeat(raw, k, axis=0)
    disordered[:, targets] = draws
    try:
        d_amps = normalized_amplitudes_batch(disordered)
    except ZeroVectorError as exc:
        raise ZeroVectorError(
            f"disordered vector collapsed within states [{lo}, {hi}) "
            f"(master_seed {config.master_seed}): {exc}") from exc
    if config.n_qubits == 2:
        clean = _measure_batch_2q(amps, config.noise_p)
        per_real = _measure_batch_2q(d_amps, config.noise_p)
    else:
        clean = _measure_batch_3q(amps, config, lambda r: lo + r)
        per_real = _measure_batch_3q(
            d_amps, config,
            lambda r: f"{lo + r // k} config {r % k}")
    return clean, per_real.reshape(hi - lo, k).mean(axis=1)


def _default_chunk(config: ExperimentConfig, quenched: bool) -> int:
    if config.n_qubits == 3:
        return _CHUNK_3Q
    if not quenched:
        return _CLEAN_CHUNK_2Q
    return max(1, _QUENCHED_REALIZATIONS_2Q // config.n_disorder_configs)


def _run_chunked(fn, config: ExperimentConfig, quenched: bool,
                 n_workers: int, chunk_states) -> list:
    chunk = int(chunk_states or _default_chunk(config, quenched))
    ranges = [(lo, min(lo + chunk, config.n_states))
              for lo in range(0, config.n_states, chunk)]
    if n_workers <= 1 or len(ranges) == 1:
        return [fn(config, lo, hi) for lo, hi in ranges]
    with ProcessPoolExecutor(max_workers=min(n_workers, len(ranges))) as pool:
        futures = [pool.submit(fn, config, lo, hi) for lo, hi in ranges]
        # collect in submission order: the reduction is keyed by chunk
        # index, so worker scheduling cannot affect the result
        return [f.result() for f in futures]


# ---------------------------------------------------------------------------
# experiment passes


def run_clean(config: ExperimentConfig, n_workers: int = 1,
              chunk_states: int | None = None) -> EntanglementHistogram:
    """First step: measure n_states Haar states (noise_p applied if set)."""
    parts = _run_chunked(_clean_chunk, config, False, n_workers, chunk_states)
    values = np.concatenate(parts)
    return histogram(values, config.measure_range(), config.bin_width)


def run_quenched(config: ExperimentConfig, n_workers: int = 1,
                 chunk_states: int | None = None) -> QuenchedResult:
    """Second step: per state, redraw the target coefficients
    n_disorder_configs times, measure each realization, and average the
    measure values."""
    if config.n_disorder_configs < 1:
        raise ValueError("run_quenched needs n_disorder_configs >= 1")
    parts = _run_chunked(_quenched_chunk, config, True, n_workers,
                         chunk_states)
    clean = np.concatenate([p[0] for p in parts])
    quenched = np.concatenate([p[1] for p in parts])
    hist = histogram(quenched, config.measure_range(), config.bin_width)
    return QuenchedResult(histogram=hist, clean_values=clean,
                          quenched_values=quenched)


def run_gamma_sweep(config: ExperimentConfig, gammas, n_workers: int = 1,
                    chunk_states: int | None = None
                    ) -> list[EntanglementHistogram]:
    """Quenched runs over a ladder of disorder strengths, one histogram per
    entry of `gammas`, in input order.  Restricted to Gaussian disorder on a
    single coefficient, matching the strength-variation study."""
    if config.disorder_family is not Family.GAUSSIAN:
        raise ValueError("the strength sweep is defined for Gaussian disorder")
    if len(config.targets) != 1:
        raise ValueError("the strength sweep disorders a single coefficient")
    return [run_quenched(replace(config, siqr=float(g)), n_workers,
                         chunk_states).histogram
            for g in gammas]


# ---------------------------------------------------------------------------
# convergence


def _moments(config: ExperimentConfig, n_workers: int, chunk_states):
    if config.n_disorder_configs >= 1:
        hist = run_quenched(config, n_workers, chunk_states).histogram
    else:
        hist = run_clean(config, n_workers, chunk_states)
    return hist.mean, hist.std


def _sig_fig_tolerance(a: float, b: float, figures: int) -> float:
    scale = max(abs(a), abs(b))
    if scale == 0.0:
        return 0.0
    return 10.0 ** (math.floor(math.log10(scale)) - figures + 1)


def convergence_check(config: ExperimentConfig, n_workers: int = 1,
                      chunk_states: int | None = None) -> ConvergenceReport:
    """Compare the configured run against one with half the states and half
    the disorder configurations on a decorrelated seed.

    Two-qubit statistics are held to three significant figures, three-qubit
    statistics to two.
    """
    half = replace(
        config,
        n_states=max(1, config.n_states // 2),
        n_disorder_configs=(max(1, config.n_disorder_configs // 2)
                            if config.n_disorder_configs else 0),
        master_seed=(config.master_seed + _RERUN_SEED_OFFSET) % 2 ** 64,
    )
    full_mean, full_std = _moments(config, n_workers, chunk_states)
    half_mean, half_std = _moments(half, n_workers, chunk_states)
    figures = 3 if config.n_qubits == 2 else 2
    mean_tol = _sig_fig_tolerance(full_mean, half_mean, figures)
    std_tol = _sig_fig_tolerance(full_std, half_std, figures)
    mean_delta = abs(full_mean - half_mean)
    std_delta = abs(full_std - half_std)
    mean_ok = mean_delta <= mean_tol
    std_ok = std_delta <= std_tol
    return ConvergenceReport(
        significant_figures=figures,
        full_mean=full_mean, full_std=full_std,
        half_mean=half_mean, half_std=half_std,
        mean_delta=mean_delta, std_delta=std_delta,
        mean_tolerance=mean_tol, std_tolerance=std_tol,
        mean_converged=mean_ok, std_converged=std_ok,
        converged=mean_ok and std_ok,
    )


# ---------------------------------------------------------------------------
# artifacts


def write_histogram_csv(hist: EntanglementHistogram, path) -> None:
    """One row per bin: bin_lower,bin_upper,percentage (17 significant
    digits, so values round-trip exactly)."""
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["bin_lower", "bin_upper", "percentage"])
        for i, pct in enumerate(hist.percentages):
            writer.writerow([f"{hist.bin_edges[i]:.17g}",
                             f"{hist.bin_edges[i + 1]:.17g}",
                             f"{pct:.17g}"])


def config_to_dict(config: ExperimentConfig) -> dict:
    """JSON-ready echo of a config; config_from_dict inverts it."""
    return {
        "n_qubits": config.n_qubits,
        "n_states": config.n_states,
        "n_disorder_configs": config.n_disorder_configs,
        "disorder_family": (config.disorder_family.value
                            if config.disorder_family else None),
        "siqr": config.siqr,
        "targets": list(config.targets),
        "noise_p": config.noise_p,
        "bin_width": config.bin_width,
        "master_seed": config.master_seed,
    }


def config_from_dict(data: dict) -> ExperimentConfig:
    family = data.get("disorder_family")
    return ExperimentConfig(
        n_qubits=int(data["n_qubits"]),
        n_states=int(data["n_states"]),
        n_disorder_configs=int(data.get("n_disorder_configs", 0)),
        disorder_family=Family(family) if family else None,
        siqr=float(data.get("siqr", 0.5)),
        targets=tuple(int(t) for t in data.get("targets", ())),
        noise_p=(None if data.get("noise_p") is None
                 else float(data["noise_p"])),
        bin_width=float(data.get("bin_width", 0.02)),
        master_seed=int(data["master_seed"]),
    )
