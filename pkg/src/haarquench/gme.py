"""Genuine multipartite entanglement through fully decomposable witnesses.

The monotone is the optimal value of

    maximize  -Tr(W rho)   over witnesses W admitting, for every
    bipartition M of the parties, a decomposition W = P_M + Q_M^{T_M}
    with 0 <= P_M <= 1 and 0 <= Q_M <= 1,

clamped at zero.  Such witnesses are non-negative on every PPT mixture,
so a positive value certifies genuine multipartite entanglement; for a
single bipartition the optimum equals the negativity across that cut.

The witness program becomes a block SDP by eliminating W through the
first bipartition's decomposition and keeping one PSD block for each
P_M and Q_M plus one slack block per upper bound (I - P_M and I - Q_M).
Matrix equalities are expanded on an orthonormal Hermitian operator
basis.  The constraint structure is independent of the state, so one
prepared problem per party count is cached and every call only swaps
the objective.

Every solve is followed by a certificate check on the returned witness
decomposition that does not rely on any solver internals.
"""

from __future__ import annotations

import os
import tempfile
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import sdp
from .linalg import DimMismatchError, hermitian_eigen, partial_transpose
from .states import DensityMatrix

_WITNESS_MISMATCH_TOL = 1e-6
_EIGENVALUE_SLACK = 1e-7
_LOOSE_ACCEPT_TOL = 1e-7

_BIPARTITION_MASKS = {2: (0b01,), 3: (0b001, 0b010, 0b100)}


class SolverFailureError(Exception):
    """The witness program did not reach an acceptable solution, or its
    certificate failed the post-check; the message names a problem dump
    written for post-mortem analysis when one could be produced."""


@dataclass(frozen=True)
class WitnessDecomposition:
    """A witness with its per-bipartition decompositions.

    p and q map a bipartition mask to the matrices of W = P_M + Q_M^{T_M};
    n_qubits fixes the meaning of the masks."""

    n_qubits: int
    w: np.ndarray
    p: dict
    q: dict


@dataclass(frozen=True)
class GmeValue:
    value: float
    witness: WitnessDecomposition
    raw_objective: float
    relative_gap: float
    loose: bool


def _hermitian_basis(dim):
    """Orthonormal basis of the real space of dim x dim Hermitian matrices:
    unit diagonals, then symmetric and antisymmetric pair combinations."""
    basis = []
    for k in range(dim):
        mat = np.zeros((dim, dim), dtype=complex)
        mat[k, k] = 1.0
        basis.append(mat)
    root_half = 1.0 / np.sqrt(2.0)
    for k in range(dim):
        for l in range(k + 1, dim):
            mat = np.zeros((dim, dim), dtype=complex)
            mat[k, l] = mat[l, k] = root_half
            basis.append(mat)
            mat = np.zeros((dim, dim), dtype=complex)
            mat[k, l] = -1j * root_half
            mat[l, k] = 1j * root_half
            basis.append(mat)
    return basis


@lru_cache(maxsize=None)
def _witness_template(n_qubits):
    """Prepared constraint structure of the witness program.

    Blocks: P_M and Q_M pairs for each bipartition mask, then the slack
    pairs I - P_M and I - Q_M in the same order.  Rows tie every later
    decomposition to the first one (the eliminated witness) and link each
    slack to its variable, expanded on the Hermitian basis."""
    masks = _BIPARTITION_MASKS[n_qubits]
    dim = 2 ** n_qubits
    n_cuts = len(masks)
    basis = _hermitian_basis(dim)
    rows = []
    for k in range(1, n_cuts):
        for b in basis:
            rows.append((
                {0: b,
                 1: partial_transpose(b, n_qubits, masks[0]),
                 2 * k: -b,
                 2 * k + 1: -partial_transpose(b, n_qubits, masks[k])},
                0.0,
            ))
    for k in range(2 * n_cuts):
        for b in basis:
            rows.append((
                {k: b, 2 * n_cuts + k: b},
                float(np.trace(b).real),
            ))
    zero = np.zeros((dim, dim), dtype=complex)
    problem = sdp.SdpProblem(
        block_dims=(dim,) * (4 * n_cuts),
        objective=(zero,) * (4 * n_cuts),
        constraints=tuple(rows),
    )
    return sdp.prepare(problem), problem


def _eigenvalues_within_unit_interval(mat):
    """Fast positive-definiteness probes for the bounds [-slack, 1+slack];
    an exact eigenvalue check arbitrates when a probe fails."""
    dim = mat.shape[0]
    eye = np.eye(dim)
    for shifted in (mat + _EIGENVALUE_SLACK * eye,
                    (1.0 + _EIGENVALUE_SLACK) * eye - mat):
        try:
            np.linalg.cholesky(shifted)
        except np.linalg.LinAlgError:
            hermitian = (shifted + shifted.conj().T) / 2.0
            if hermitian_eigen(hermitian).eigenvalues[-1] < 0.0:
                return False
    return True


def check_decomposition(decomposition):
    """Certificate post-check: every bipartition reconstructs the witness
    and every P_M, Q_M has spectrum inside [-1e-7, 1 + 1e-7]."""
    n_qubits = decomposition.n_qubits
    for mask in decomposition.p:
        recomposed = decomposition.p[mask] + partial_transpose(
            decomposition.q[mask], n_qubits, mask)
        mismatch = np.linalg.norm(decomposition.w - recomposed)
        if mismatch > _WITNESS_MISMATCH_TOL:
            raise SolverFailureError(
                f"witness decomposition for mask {mask:#05b} misses the "
                f"witness by Frobenius norm {mismatch:.3e}")
        for label, mat in (("P", decomposition.p[mask]),
                           ("Q", decomposition.q[mask])):
            if not _eigenvalues_within_unit_interval(mat):
                raise SolverFailureError(
                    f"{label} block for mask {mask:#05b} has spectrum "
                    "outside the unit interval")


def _dump_for_post_mortem(problem, costs):
    dumped = sdp.SdpProblem(block_dims=problem.block_dims,
                            objective=costs,
                            constraints=problem.constraints)
    handle, path = tempfile.mkstemp(prefix="witness-failure-", suffix=".sdp")
    os.close(handle)
    sdp.dump_problem(dumped, path)
    return path


def _solve_witness(rho, n_qubits):
    prepared, problem = _witness_template(n_qubits)
    masks = _BIPARTITION_MASKS[n_qubits]
    n_cuts = len(masks)
    dim = 2 ** n_qubits
    zero = np.zeros((dim, dim), dtype=complex)
    costs = [zero] * (4 * n_cuts)
    costs[0] = rho
    costs[1] = partial_transpose(rho, n_qubits, masks[0])
    costs = tuple(costs)

    try:
        solution = sdp.solve_prepared(prepared, costs)
    except sdp.InfeasibleError as exc:
        path = _dump_for_post_mortem(problem, costs)
        raise SolverFailureError(
            f"witness program reported infeasible ({exc}); "
            f"problem dumped to {path}") from exc

    loose = False
    if solution.status is not sdp.SdpStatus.OPTIMAL:
        worst = max(solution.relative_gap, solution.primal_residual,
                    solution.dual_residual)
        if worst <= _LOOSE_ACCEPT_TOL:
            loose = True
        else:
            path = _dump_for_post_mortem(problem, costs)
            raise SolverFailureError(
                f"witness program ended with status {solution.status.value} "
                f"(worst merit {worst:.3e}); problem dumped to {path}")

    decomposition = WitnessDecomposition(
        n_qubits=n_qubits,
        w=solution.x_blocks[0]
        + partial_transpose(solution.x_blocks[1], n_qubits, masks[0]),
        p={masks[k]: solution.x_blocks[2 * k] for k in range(n_cuts)},
        q={masks[k]: solution.x_blocks[2 * k + 1] for k in range(n_cuts)},
    )
    check_decomposition(decomposition)
    raw = solution.objective_value
    return GmeValue(value=max(0.0, -raw), witness=decomposition,
                    raw_objective=raw, relative_gap=solution.relative_gap,
                    loose=loose)


def gme_monotone(rho):
    """Witness optimum over the three bipartitions of a three-qubit state."""
    if rho.n_qubits != 3:
        raise DimMismatchError("gme_monotone expects a three-qubit state")
    return _solve_witness(rho.matrix, 3)


def gme_monotone_pure(psi):
    """gme_monotone of the projector onto a three-qubit pure state."""
    projector = DensityMatrix(n_qubits=psi.n_qubits, matrix=psi.projector())
    return gme_monotone(projector)


def gme_bipartite(rho):
    """Single-bipartition witness optimum for a two-qubit state; equals
    the negativity across that cut."""
    if rho.n_qubits != 2:
        raise DimMismatchError("gme_bipartite expects a two-qubit state")
    return _solve_witness(rho.matrix, 2)


def negativity(rho, mask):
    """Sum of the absolute values of the negative eigenvalues of the
    partial transpose across the masked subsystems."""
    transposed = partial_transpose(rho.matrix, rho.n_qubits, mask)
    eigenvalues = hermitian_eigen(transposed).eigenvalues
    return float(-eigenvalues[eigenvalues < 0.0].sum())
