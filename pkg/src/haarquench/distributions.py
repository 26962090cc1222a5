"""Counter-based random number generation and disorder distributions.

Every draw in this package is a pure function of (master_seed, stream_index,
counter), so any slice of work can be recomputed independently of execution
order or worker count.  The generator is Philox 4x32 with 10 rounds; the
64-bit stream index occupies the upper half of the 128-bit counter and the
64-bit master seed is the key, so distinct streams can never overlap.

The three disorder families (Gaussian, uniform, Cauchy-Lorentz) are location
families parameterized by their semi-interquartile range (SIQR), which is the
only spread measure that stays finite and comparable across all three.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

__all__ = [
    "Family",
    "DistributionSpec",
    "RngStream",
    "NonPositiveError",
    "TooFewSamplesError",
    "PROBIT_75",
    "siqr_to_std_gaussian",
    "sample",
    "sample_batch",
    "uniform_doubles",
    "standard_normals",
    "cauchy_lorentz_quantile",
    "empirical_siqr",
]

# Third quartile of the standard normal distribution, Phi^{-1}(3/4).
PROBIT_75 = 0.6744897501960817

# Philox 4x32 round multipliers and Weyl key increments.
_M0 = np.uint64(0xD2511F53)
_M1 = np.uint64(0xCD9E8D57)
_W0 = np.uint64(0x9E3779B9)
_W1 = np.uint64(0xBB67AE85)
_MASK32 = np.uint64(0xFFFFFFFF)
_INV53 = 1.0 / 9007199254740992.0  # 2**-53
_TINY = _INV53  # uniform clamp for logs and tangents


class NonPositiveError(ValueError):
    """A scale parameter that must be strictly positive was not."""


class TooFewSamplesError(ValueError):
    """Not enough samples for the requested empirical statistic."""


class Family(Enum):
    GAUSSIAN = "gaussian"
    UNIFORM = "uniform"
    CAUCHY_LORENTZ = "cauchy_lorentz"


@dataclass(frozen=True)
class DistributionSpec:
    """A disorder distribution: family, center location and SIQR spread."""

    family: Family
    center: float
    siqr: float

    def __post_init__(self):
        if not self.siqr > 0.0:
            raise NonPositiveError(f"siqr must be > 0, got {self.siqr}")
        if not np.isfinite(self.center):
            raise ValueError(f"center must be finite, got {self.center}")


def siqr_to_std_gaussian(siqr: float) -> float:
    """Standard deviation of the Gaussian whose SIQR is `siqr`."""
    if not siqr > 0.0:
        raise NonPositiveError(f"siqr must be > 0, got {siqr}")
    return siqr / PROBIT_75


def _philox_4x32_10(c0, c1, c2, c3, k0, k1):
    """One Philox 4x32 block per element; all args uint64 arrays holding
    32-bit values.  Returns the four 32-bit output words."""
    for _ in range(10):
        p0 = _M0 * c0
        p1 = _M1 * c2
        hi0 = p0 >> np.uint64(32)
        lo0 = p0 & _MASK32
        hi1 = p1 >> np.uint64(32)
        lo1 = p1 & _MASK32
        c0, c1, c2, c3 = hi1 ^ c1 ^ k0, lo1, hi0 ^ c3 ^ k1, lo0
        k0 = (k0 + _W0) & _MASK32
        k1 = (k1 + _W1) & _MASK32
    return c0, c1, c2, c3


def _philox_doubles(master_seed: int, stream_indices, block_indices):
    """Philox blocks -> two 53-bit uniform doubles per block.

    `stream_indices` and `block_indices` broadcast against each other; the
    output has shape broadcast_shape + (2,).
    """
    seed = np.uint64(master_seed)
    s = np.asarray(stream_indices, dtype=np.uint64)
    b = np.asarray(block_indices, dtype=np.uint64)
    s, b = np.broadcast_arrays(s, b)
    c0 = b & _MASK32
    c1 = b >> np.uint64(32)
    c2 = s & _MASK32
    c3 = s >> np.uint64(32)
    k0 = np.broadcast_to(seed & _MASK32, b.shape)
    k1 = np.broadcast_to(seed >> np.uint64(32), b.shape)
    o0, o1, o2, o3 = _philox_4x32_10(c0, c1, c2, c3, k0, k1)
    hi = (o0 << np.uint64(32)) | o1
    lo = (o2 << np.uint64(32)) | o3
    out = np.empty(b.shape + (2,), dtype=np.float64)
    out[..., 0] = (hi >> np.uint64(11)).astype(np.float64) * _INV53
    out[..., 1] = (lo >> np.uint64(11)).astype(np.float64) * _INV53
    return out


def philox_words(master_seed: int, stream_index: int, block_index: int):
    """Raw 4x32-bit output of one Philox block (for known-answer checks)."""
    seed = np.uint64(master_seed)
    b = np.uint64(block_index)
    s = np.uint64(stream_index)
    o = _philox_4x32_10(
        b & _MASK32,
        b >> np.uint64(32),
        s & _MASK32,
        s >> np.uint64(32),
        seed & _MASK32,
        seed >> np.uint64(32),
    )
    return tuple(int(w) for w in o)


def uniform_doubles(master_seed: int, stream_indices, offset: int, count: int):
    """Uniform [0,1) doubles for many streams at once.

    Returns shape (n_streams, count); row i holds draws offset..offset+count-1
    of stream `stream_indices[i]`.  Draw j of a stream comes from lane j % 2
    of block j // 2, so the result is independent of how the draws are
    chunked across calls.
    """
    s = np.atleast_1d(np.asarray(stream_indices, dtype=np.uint64))
    first_block = offset // 2
    last_block = (offset + count - 1) // 2 if count > 0 else first_block
    n_blocks = max(last_block - first_block + 1, 1)
    blocks = first_block + np.arange(n_blocks, dtype=np.uint64)
    d = _philox_doubles(master_seed, s[:, None], blocks[None, :])
    flat = d.reshape(s.shape[0], 2 * n_blocks)
    lo = offset - 2 * first_block
    return flat[:, lo:lo + count]


def standard_normals(master_seed: int, stream_indices, offset: int, count: int):
    """Standard normal draws via Box-Muller on counter-based uniforms.

    Each normal consumes exactly two uniforms (only the cosine branch is
    kept), so the counter advance per draw is fixed and batch generation is
    bit-identical to one-at-a-time generation.  `offset` is in units of
    normal draws.
    """
    u = uniform_doubles(master_seed, stream_indices, 2 * offset, 2 * count)
    u1 = np.maximum(u[:, 0::2], _TINY)
    u2 = u[:, 1::2]
    return np.sqrt(-2.0 * np.log(u1)) * np.cos(2.0 * np.pi * u2)


def cauchy_lorentz_quantile(f, center: float, siqr: float):
    """Quantile function of the Cauchy-Lorentz distribution.

    The mean and variance of this family are undefined, so it is specified by
    its median (`center`) and SIQR (`siqr`, the half width at half maximum).
    """
    if not siqr > 0.0:
        raise NonPositiveError(f"siqr must be > 0, got {siqr}")
    return center + siqr * np.tan(np.pi * (np.asarray(f, dtype=np.float64) - 0.5))


@dataclass
class RngStream:
    """One independent draw sequence, identified by (master_seed, stream_index).

    The cursor counts uniforms consumed so far; it is the only mutable state,
    and restarting a stream with the same identifiers replays the identical
    sequence on any platform.
    """

    master_seed: int
    stream_index: int
    cursor: int = 0

    def uniforms(self, count: int) -> np.ndarray:
        out = uniform_doubles(self.master_seed, [self.stream_index],
                              self.cursor, count)[0]
        self.cursor += count
        return out

    def uniform(self) -> float:
        return float(self.uniforms(1)[0])


def _uniforms_per_draw(family: Family) -> int:
    return 2 if family is Family.GAUSSIAN else 1


def sample(spec: DistributionSpec, rng: RngStream) -> float:
    """Draw one value from the disorder distribution `spec` using `rng`."""
    if spec.family is Family.GAUSSIAN:
        u = rng.uniforms(2)
        z = np.sqrt(-2.0 * np.log(max(u[0], _TINY))) * np.cos(2.0 * np.pi * u[1])
        return spec.center + siqr_to_std_gaussian(spec.siqr) * float(z)
    if spec.family is Family.UNIFORM:
        # Support [center - 2*siqr, center + 2*siqr]: SIQR of a uniform
        # distribution is a quarter of its support width.
        return spec.center + 4.0 * spec.siqr * (rng.uniform() - 0.5)
    # Cauchy-Lorentz by inverse transform.  The uniform is clamped away from
    # {0, 1} so the tangent stays finite; redraw on the (unreachable in
    # practice) non-finite branch keeps the contract airtight.
    while True:
        f = min(max(rng.uniform(), _TINY), 1.0 - _TINY)
        x = spec.center + spec.siqr * np.tan(np.pi * (f - 0.5))
        if np.isfinite(x):
            return float(x)


def sample_batch(family: Family, centers, siqr: float, master_seed: int,
                 stream_indices, offset: int = 0, draws_per_stream: int = 1):
    """Vectorized `sample` over many streams.

    Returns shape (n_streams, draws_per_stream).  `centers` broadcasts
    against that shape.  Draw t of stream i consumes the same counter values
    the scalar path would, so both routes agree bit for bit.
    """
    if not siqr > 0.0:
        raise NonPositiveError(f"siqr must be > 0, got {siqr}")
    s = np.atleast_1d(np.asarray(stream_indices, dtype=np.uint64))
    n, t = s.shape[0], draws_per_stream
    if family is Family.GAUSSIAN:
        z = standard_normals(master_seed, s, offset, t)
        vals = siqr_to_std_gaussian(siqr) * z
    elif family is Family.UNIFORM:
        u = uniform_doubles(master_seed, s, offset, t)
        vals = 4.0 * siqr * (u - 0.5)
    else:
        u = uniform_doubles(master_seed, s, offset, t)
        f = np.clip(u, _TINY, 1.0 - _TINY)
        vals = siqr * np.tan(np.pi * (f - 0.5))
        cursors = np.full(n, offset + t, dtype=np.int64)
        while True:
            bad = ~np.all(np.isfinite(vals), axis=1)
            if not bad.any():
                break
            for i in np.nonzero(bad)[0]:
                j = np.nonzero(~np.isfinite(vals[i]))[0][0]
                u1 = uniform_doubles(master_seed, s[i:i + 1],
                                     int(cursors[i]), 1)[0, 0]
                cursors[i] += 1
                f1 = min(max(u1, _TINY), 1.0 - _TINY)
                vals[i, j] = siqr * np.tan(np.pi * (f1 - 0.5))
    return np.asarray(centers, dtype=np.float64) + vals


def empirical_siqr(samples) -> float:
    """Half the interquartile range, with linear-interpolation quantiles."""
    x = np.asarray(samples, dtype=np.float64).ravel()
    if x.size < 2:
        raise TooFewSamplesError(
            f"need at least 2 samples for quartiles, got {x.size}")
    q1, q3 = np.quantile(x, [0.25, 0.75], method="linear")
    return float((q3 - q1) / 2.0)
