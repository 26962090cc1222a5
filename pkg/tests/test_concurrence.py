"""Tests for the concurrence measure, pure and mixed routes."""

import numpy as np
import pytest
from scipy import stats

from haarquench.concurrence import (
    concurrence_mixed,
    concurrence_pure,
    concurrence_pure_batch,
    spin_flip,
    white_noise_concurrence,
)
from haarquench.distributions import RngStream
from haarquench.states import (
    DensityMatrix,
    NoiseSpec,
    RawCoefficients,
    haar_amplitudes_batch,
    haar_raw,
    normalize,
    with_white_noise,
)


def bell_state():
    return normalize(RawCoefficients(2, [1, 0, 0, 0, 0, 0, 1, 0]))


def haar_state(seed, stream):
    return normalize(haar_raw(2, RngStream(seed, stream)))


def test_spin_flip_bell_invariant():
    rho = DensityMatrix(2, bell_state().projector())
    assert np.allclose(spin_flip(rho), rho.matrix, atol=1e-14)


def test_spin_flip_maps_00_to_11():
    rho = DensityMatrix(2, np.diag([1.0, 0, 0, 0]).astype(complex))
    assert np.allclose(spin_flip(rho), np.diag([0, 0, 0, 1.0]), atol=1e-15)


def test_spin_flip_preserves_trace():
    rho = with_white_noise(haar_state(1, 0), NoiseSpec(0.7))
    assert np.trace(spin_flip(rho)).real == pytest.approx(1.0, abs=1e-12)


def test_concurrence_bell_and_mixed_limits():
    assert concurrence_pure(bell_state()) == pytest.approx(1.0, abs=1e-12)
    assert concurrence_mixed(DensityMatrix(2, bell_state().projector())) \
        == pytest.approx(1.0, abs=1e-10)
    assert concurrence_mixed(DensityMatrix(2, np.eye(4) / 4)) \
        == pytest.approx(0.0, abs=1e-10)


def test_concurrence_product_state():
    psi = normalize(RawCoefficients(2, [0, 0, 1, 0, 0, 0, 0, 0]))  # |01>
    assert concurrence_pure(psi) == 0.0


def test_werner_closed_form_grid():
    bell = bell_state()
    for p in np.linspace(0.0, 1.0, 11):
        rho = with_white_noise(bell, NoiseSpec(p))
        expected = max(0.0, (3.0 * p - 1.0) / 2.0)
        assert concurrence_mixed(rho) == pytest.approx(expected, abs=1e-9), p


def test_pure_matches_mixed_on_projectors():
    for stream in range(200):
        psi = haar_state(40, stream)
        c_pure = concurrence_pure(psi)
        c_mixed = concurrence_mixed(DensityMatrix(2, psi.projector()))
        assert abs(c_pure - c_mixed) < 1e-8


def test_local_unitary_invariance():
    u = stats.unitary_group.rvs(2, random_state=1)
    v = stats.unitary_group.rvs(2, random_state=2)
    uv = np.kron(u, v)
    for stream in range(20):
        psi = haar_state(41, stream)
        rho = with_white_noise(psi, NoiseSpec(0.85))
        rotated = DensityMatrix(2, uv @ rho.matrix @ uv.conj().T)
        assert concurrence_mixed(rotated) == pytest.approx(
            concurrence_mixed(rho), abs=1e-9)


def test_white_noise_closed_form_matches_mixed_route():
    for stream in range(25):
        psi = haar_state(42, stream)
        c = concurrence_pure(psi)
        for p in (0.0, 0.3, 0.62, 0.8, 0.9, 1.0):
            rho = with_white_noise(psi, NoiseSpec(p))
            assert concurrence_mixed(rho) == pytest.approx(
                float(white_noise_concurrence(c, p)), abs=1e-9), (stream, p)


def test_noise_monotonicity_in_p():
    psi = haar_state(43, 0)
    grid = np.linspace(0.0, 1.0, 11)
    values = [concurrence_mixed(with_white_noise(psi, NoiseSpec(p))) for p in grid]
    assert np.all(np.diff(values) >= -1e-12)


def test_batch_matches_scalar():
    _, amps = haar_amplitudes_batch(2, 44, np.arange(50))
    batch = concurrence_pure_batch(amps)
    for i in range(50):
        psi_scalar = concurrence_pure(
            normalize(RawCoefficients(2, np.column_stack(
                [amps[i].real, amps[i].imag]).ravel())))
        assert batch[i] == pytest.approx(psi_scalar, abs=1e-12)


def test_haar_moment_pilot():
    # small-sample version of the ensemble moments; the acceptance suite
    # runs the full 10^6
    _, amps = haar_amplitudes_batch(2, 45, np.arange(100_000))
    c = concurrence_pure_batch(amps)
    assert c.mean() == pytest.approx(3.0 * np.pi / 16.0, abs=0.005)
    assert c.std() == pytest.approx(0.2302, abs=0.005)
