"""Haar-uniform pure states, coefficient disorder, and white-noise mixing.

A state is born as a flat tuple of 2^(n+1) real numbers, two per complex
amplitude, drawn i.i.d. standard normal; normalizing that vector samples the
Haar-uniform distribution on pure states.  Disorder replaces chosen entries
of the raw tuple BEFORE normalization with draws centered on the original
value, and each disorder realization is normalized separately.

Scalar operations take an RngStream; the *_batch helpers generate the same
numbers for whole index ranges at once and agree with the scalar route bit
for bit, because both consume identical (stream, counter) positions.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .distributions import (
    DistributionSpec,
    Family,
    RngStream,
    sample,
    sample_batch,
    standard_normals,
)

__all__ = [
    "RawCoefficients",
    "PureState",
    "DensityMatrix",
    "NoiseSpec",
    "ZeroVectorError",
    "InvalidTargetError",
    "haar_raw",
    "normalize",
    "inject_disorder",
    "with_white_noise",
    "haar_raw_batch",
    "haar_amplitudes_batch",
    "amplitudes_from_reals",
    "normalized_amplitudes_batch",
    "disorder_target_values",
    "coefficient_labels",
    "dump_raw_csv",
]

_NORM_TOL = 1e-12


class ZeroVectorError(ValueError):
    """Raw coefficient vector too close to zero to normalize."""


class InvalidTargetError(ValueError):
    """Disorder target indices are empty, repeated, or out of range."""


def _check_n_qubits(n_qubits: int) -> None:
    if n_qubits not in (2, 3):
        raise ValueError(f"n_qubits must be 2 or 3, got {n_qubits}")


@dataclass(frozen=True)
class RawCoefficients:
    """Unnormalized coefficient tuple; reals[2k], reals[2k+1] are the real
    and imaginary parts of amplitude k."""

    n_qubits: int
    reals: np.ndarray

    def __post_init__(self):
        _check_n_qubits(self.n_qubits)
        r = np.asarray(self.reals, dtype=np.float64)
        if r.shape != (2 ** (self.n_qubits + 1),):
            raise ValueError(
                f"expected {2 ** (self.n_qubits + 1)} reals, got shape {r.shape}")
        if not np.all(np.isfinite(r)):
            raise ValueError("raw coefficients must be finite")
        object.__setattr__(self, "reals", r)


@dataclass(frozen=True)
class PureState:
    n_qubits: int
    amplitudes: np.ndarray

    def __post_init__(self):
        _check_n_qubits(self.n_qubits)
        a = np.asarray(self.amplitudes, dtype=np.complex128)
        if a.shape != (2 ** self.n_qubits,):
            raise ValueError(
                f"expected {2 ** self.n_qubits} amplitudes, got shape {a.shape}")
        norm = np.linalg.norm(a)
        if abs(norm - 1.0) > 1e-12:
            raise ValueError(f"state norm {norm} deviates from 1")
        object.__setattr__(self, "amplitudes", a)

    def projector(self) -> np.ndarray:
        return np.outer(self.amplitudes, self.amplitudes.conj())


@dataclass(frozen=True)
class DensityMatrix:
    """Hermitian, unit-trace matrix.  Positivity is guaranteed by the
    factories in this package (projectors and white-noise mixtures) and
    checked spectrally in the test suite rather than on every construction."""

    n_qubits: int
    matrix: np.ndarray

    def __post_init__(self):
        _check_n_qubits(self.n_qubits)
        m = np.asarray(self.matrix, dtype=np.complex128)
        dim = 2 ** self.n_qubits
        if m.shape != (dim, dim):
            raise ValueError(f"expected {dim}x{dim} matrix, got {m.shape}")
        if np.abs(m - m.conj().T).max() > 1e-10:
            raise ValueError("density matrix must be Hermitian")
        if abs(np.trace(m).real - 1.0) > 1e-10:
            raise ValueError(f"trace {np.trace(m)} deviates from 1")
        object.__setattr__(self, "matrix", m)


@dataclass(frozen=True)
class NoiseSpec:
    """White-noise admixture weight: p = 1 keeps the pure state, p = 0 is
    the maximally mixed state."""

    p: float

    def __post_init__(self):
        if not 0.0 <= self.p <= 1.0:
            raise ValueError(f"noise weight p must be in [0,1], got {self.p}")


def haar_raw(n_qubits: int, rng: RngStream) -> RawCoefficients:
    """Draw the 2^(n+1) raw reals i.i.d. standard normal (not normalized)."""
    _check_n_qubits(n_qubits)
    count = 2 ** (n_qubits + 1)
    u = rng.uniforms(2 * count)
    u1 = np.maximum(u[0::2], 2.0 ** -53)
    z = np.sqrt(-2.0 * np.log(u1)) * np.cos(2.0 * np.pi * u[1::2])
    return RawCoefficients(n_qubits, z)


def amplitudes_from_reals(reals: np.ndarray) -> np.ndarray:
    """Pair consecutive reals into complex amplitudes (no normalization).
    Works on a single vector or a batch with one row per state."""
    r = np.asarray(reals, dtype=np.float64)
    return r[..., 0::2] + 1j * r[..., 1::2]


def _norms(amps: np.ndarray, axis=None) -> np.ndarray:
    # one shared expression so the scalar and batch routes round identically
    return np.sqrt((amps.conj() * amps).real.sum(axis=axis))


def normalize(raw: RawCoefficients) -> PureState:
    """Normalize a raw coefficient vector into a pure state."""
    amps = amplitudes_from_reals(raw.reals)
    norm = _norms(amps)
    if norm < _NORM_TOL:
        raise ZeroVectorError(f"norm {norm} below {_NORM_TOL}")
    return PureState(raw.n_qubits, amps / norm)


def normalized_amplitudes_batch(raws: np.ndarray) -> np.ndarray:
    """Pair and normalize rows of raw reals, bit-identical to the scalar
    normalize on each row."""
    amps = amplitudes_from_reals(np.atleast_2d(raws))
    norms = _norms(amps, axis=-1)
    if norms.min() < _NORM_TOL:
        row = int(np.argmin(norms))
        raise ZeroVectorError(f"row {row} norm {norms[row]} below {_NORM_TOL}")
    return amps / norms[..., None]


def _check_targets(targets, n_reals: int) -> np.ndarray:
    idx = np.asarray(sorted(set(int(t) for t in targets)), dtype=np.intp)
    if idx.size == 0:
        raise InvalidTargetError("targets must be non-empty")
    if len(idx) != len(list(targets)):
        raise InvalidTargetError(f"duplicate target indices in {targets}")
    if idx.min() < 0 or idx.max() >= n_reals:
        raise InvalidTargetError(
            f"targets {targets} outside valid range [0, {n_reals})")
    return idx


def inject_disorder(raw: RawCoefficients, targets, family: Family,
                    siqr: float, rng: RngStream) -> RawCoefficients:
    """Replace each target entry with a draw centered on its current value.

    Targets are processed in ascending index order; draws for target t come
    from the distribution (family, center=raw.reals[t], siqr).  Non-target
    entries pass through bitwise unchanged.
    """
    idx = _check_targets(targets, raw.reals.size)
    new = raw.reals.copy()
    for t in idx:
        spec = DistributionSpec(family, center=float(new[t]), siqr=siqr)
        new[t] = sample(spec, rng)
    return RawCoefficients(raw.n_qubits, new)


def disorder_target_values(family: Family, centers: np.ndarray, siqr: float,
                           master_seed: int, stream_indices) -> np.ndarray:
    """Batch disorder draws: row i gives the replacement values for the
    targets of stream i, centered on `centers[i]` (shape (n, n_targets))."""
    centers = np.asarray(centers, dtype=np.float64)
    return sample_batch(family, centers, siqr, master_seed, stream_indices,
                        0, centers.shape[1])


def with_white_noise(psi: PureState, noise: NoiseSpec) -> DensityMatrix:
    """Mix the projector with white noise: p|psi><psi| + (1-p) I/2^n."""
    dim = 2 ** psi.n_qubits
    m = noise.p * psi.projector() + (1.0 - noise.p) * np.eye(dim) / dim
    return DensityMatrix(psi.n_qubits, m)


def haar_raw_batch(n_qubits: int, master_seed: int, stream_indices) -> np.ndarray:
    """Raw coefficient vectors for many states: row i comes from stream
    stream_indices[i], identical to haar_raw on that stream."""
    _check_n_qubits(n_qubits)
    count = 2 ** (n_qubits + 1)
    return standard_normals(master_seed, stream_indices, 0, count)


def haar_amplitudes_batch(n_qubits: int, master_seed: int, stream_indices):
    """Normalized Haar amplitudes for many states: (raw reals, amplitudes).

    Rows whose raw vector falls below the normalization threshold are
    resampled from the next counter positions of their own stream, matching
    the scalar haar_raw/normalize retry loop.
    """
    s = np.atleast_1d(np.asarray(stream_indices, dtype=np.uint64))
    count = 2 ** (n_qubits + 1)
    raw = haar_raw_batch(n_qubits, master_seed, s)
    amps = amplitudes_from_reals(raw)
    norms = _norms(amps, axis=1)
    offset = count
    while True:
        bad = norms < _NORM_TOL
        if not bad.any():
            break
        redraw = standard_normals(master_seed, s[bad], offset, count)
        raw[bad] = redraw
        amps[bad] = amplitudes_from_reals(redraw)
        norms[bad] = _norms(amps[bad], axis=1)
        offset += count
    return raw, amps / norms[:, None]


# ---------------------------------------------------------------------------
# state dump

_GREEK = ["alpha", "beta", "gamma", "delta"]
_LATIN = ["a", "b", "c", "d", "e", "f", "g", "h"]


def coefficient_labels(n_qubits: int) -> list[str]:
    """Column labels for the raw tuple: alpha1,alpha2,... (n=2) or
    a1,a2,...,h2 (n=3), matching the amplitude order of the basis."""
    _check_n_qubits(n_qubits)
    names = _GREEK if n_qubits == 2 else _LATIN
    return [f"{name}{part}" for name in names for part in (1, 2)]


def dump_raw_csv(raws: np.ndarray, n_qubits: int, path) -> None:
    """Write one CSV row of 2^(n+1) raw reals per state."""
    r = np.atleast_2d(np.asarray(raws, dtype=np.float64))
    header = ",".join(coefficient_labels(n_qubits))
    np.savetxt(path, r, delimiter=",", header=header, comments="", fmt="%.17g")
