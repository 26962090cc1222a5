"""Dense semidefinite programming over Hermitian positive semidefinite blocks.

Problems take the standard primal form

    minimize    sum_b <C_b, X_b>
    subject to  sum_b <A_ib, X_b> = b_i    for each constraint row i,
                X_b  positive semidefinite for every block b,

with <., .> the Frobenius inner product and every C_b and A_ib Hermitian.
The dual is  max b.y  subject to  S_b = C_b - sum_i y_i A_ib >= 0.

The solver is an infeasible-start primal-dual path-following iteration
with Nesterov-Todd scaling and a Mehrotra predictor-corrector step.  Both
Newton solves of an iteration reuse one dense Cholesky factorization of
the Schur complement M_ij = sum_b <A_ib, W_b A_jb W_b>, which is real
symmetric positive definite for Hermitian data, so the linear system is
real even though the blocks stay complex throughout.  Nothing in the
iteration is randomized; identical problems produce identical iterate
sequences.

Constraint rows store only the blocks they actually touch, and the Schur
complement is assembled per block over those rows, so block-sparse rows
cost what they touch rather than the full dense cross product.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.linalg import cho_solve

from .linalg import NotHermitianError

_HERMITICITY_TOL = 1e-12
_RANK_TOL = 1e-10
_GAP_TOL = 1e-8
_RESIDUAL_TOL = 1e-8
_STEP_FRACTION = 0.98
_MAX_ITERATIONS = 200
_DIVERGENCE_LIMIT = 1e10


class InfeasibleError(Exception):
    """No positive semidefinite point satisfies the equality constraints
    (detected through divergence of the dual objective), or the problem is
    unbounded below (divergence of the primal iterates)."""


class DependentConstraintsError(ValueError):
    """Constraint rows are linearly dependent."""


class SdpStatus(Enum):
    OPTIMAL = "optimal"
    MAX_ITERATIONS = "max_iterations"
    NUMERICAL_FAILURE = "numerical_failure"


def _check_hermitian(m, label):
    scale = max(1.0, np.abs(m).max())
    if np.abs(m - m.conj().T).max() > _HERMITICITY_TOL * scale:
        raise NotHermitianError(f"{label} is not Hermitian")


@dataclass(frozen=True)
class SdpProblem:
    """Block-diagonal SDP data.

    block_dims: dimension of each Hermitian PSD block (each at most 16).
    objective: one Hermitian cost matrix per block.
    constraints: rows (coeffs, rhs) where coeffs maps a block index to the
    Hermitian coefficient matrix of that block; absent blocks contribute
    nothing to the row.
    """

    block_dims: tuple
    objective: tuple
    constraints: tuple

    def __post_init__(self):
        dims = tuple(int(d) for d in self.block_dims)
        if not dims:
            raise ValueError("at least one block is required")
        for d in dims:
            if d < 1 or d > 16:
                raise ValueError(f"block dimension {d} outside [1, 16]")
        if len(self.objective) != len(dims):
            raise ValueError("one cost matrix per block is required")
        costs = []
        for b, c in enumerate(self.objective):
            c = np.asarray(c, dtype=complex)
            if c.shape != (dims[b], dims[b]):
                raise ValueError(f"cost {b} has shape {c.shape}, "
                                 f"expected {(dims[b], dims[b])}")
            _check_hermitian(c, f"cost matrix {b}")
            costs.append(c)
        rows = []
        for i, (coeffs, rhs) in enumerate(self.constraints):
            clean = {}
            for b, mat in coeffs.items():
                b = int(b)
                if b < 0 or b >= len(dims):
                    raise ValueError(f"constraint {i} references block {b}")
                mat = np.asarray(mat, dtype=complex)
                if mat.shape != (dims[b], dims[b]):
                    raise ValueError(f"constraint {i} block {b} has shape "
                                     f"{mat.shape}")
                _check_hermitian(mat, f"constraint {i} block {b}")
                clean[b] = mat
            if not clean:
                raise ValueError(f"constraint {i} touches no block")
            rows.append((clean, float(rhs)))
        object.__setattr__(self, "block_dims", dims)
        object.__setattr__(self, "objective", tuple(costs))
        object.__setattr__(self, "constraints", tuple(rows))


@dataclass(frozen=True)
class SdpSolution:
    x_blocks: tuple
    y: np.ndarray
    s_blocks: tuple
    objective_value: float
    status: SdpStatus
    iterations: int
    relative_gap: float
    primal_residual: float
    dual_residual: float


class PreparedProblem:
    """Constraint structure shared by repeated solves.

    Preparing once caches, per block, the indices of the rows that touch
    the block and their coefficient matrices as one dense stack, plus the
    right-hand side and the norm scales used for termination tests.  Only
    the objective changes between reuses."""

    def __init__(self, problem):
        dims = problem.block_dims
        m = len(problem.constraints)
        self.block_dims = dims
        self.n_rows = m
        self.rhs = np.array([rhs for _, rhs in problem.constraints])
        self.row_indices = []
        self.row_mats = []
        for b, d in enumerate(dims):
            idx = [i for i, (coeffs, _) in enumerate(problem.constraints)
                   if b in coeffs]
            mats = np.array([problem.constraints[i][0][b] for i in idx],
                            dtype=complex).reshape(len(idx), d, d)
            self.row_indices.append(np.array(idx, dtype=np.intp))
            self.row_mats.append(mats)
        self.total_dim = sum(dims)
        self.rhs_scale = 1.0 + (np.abs(self.rhs).max() if m else 0.0)
        self.coeff_scale = max((np.abs(mats).max() if mats.size else 0.0)
                               for mats in self.row_mats)

    def apply(self, x_blocks):
        """A(X): evaluate every constraint row at the block point."""
        out = np.zeros(self.n_rows)
        for idx, mats, x in zip(self.row_indices, self.row_mats, x_blocks):
            if idx.size:
                out[idx] += np.tensordot(mats, x, axes=([1, 2], [1, 0])).real
        return out

    def apply_adjoint(self, y):
        """A*(y): per-block sum of y_i A_ib."""
        out = []
        for idx, mats, d in zip(self.row_indices, self.row_mats,
                                self.block_dims):
            if idx.size:
                out.append(np.tensordot(y[idx], mats, axes=(0, 0)))
            else:
                out.append(np.zeros((d, d), dtype=complex))
        return out

    def schur(self, scaled_mats):
        """Gram matrix M_ij = sum_b Tr(U_ib U_jb) for per-block row stacks
        U_b (the rows already congruence-transformed by the scaling)."""
        m = np.zeros((self.n_rows, self.n_rows))
        for idx, u in zip(self.row_indices, scaled_mats):
            if not idx.size:
                continue
            flat = u.reshape(idx.size, -1)
            m[np.ix_(idx, idx)] += (flat @ flat.conj().T).real
        return m


def prepare(problem, validate=True):
    """Cache the constraint structure of a problem for repeated solving.

    With validate on, also checks linear independence of the rows through
    the rank of their Gram matrix."""
    prepared = PreparedProblem(problem)
    if validate:
        gram = prepared.schur(prepared.row_mats)
        eigenvalues = np.linalg.eigvalsh(gram)
        if eigenvalues[0] <= _RANK_TOL * max(eigenvalues[-1], 1.0):
            raise DependentConstraintsError(
                "constraint rows are linearly dependent "
                f"(Gram eigenvalue ratio {eigenvalues[0] / eigenvalues[-1]:.2e})")
    return prepared


def _hermitian_part(m):
    return (m + m.conj().T) / 2.0


def _nt_factors(x, s):
    """Nesterov-Todd scaling of a primal-dual block pair.

    Returns (r, r_inv, lam) with W = r r^H satisfying W S W = X, and
    r^H S r = r^{-1} X r^{-H} = diag(lam)."""
    l1 = np.linalg.cholesky(x)
    l2 = np.linalg.cholesky(s)
    u, sig, vh = np.linalg.svd(l2.conj().T @ l1)
    inv_sqrt = 1.0 / np.sqrt(sig)
    r = (l1 @ vh.conj().T) * inv_sqrt
    r_inv = (u.conj().T @ l2.conj().T) * inv_sqrt[:, None]
    return r, r_inv, sig


def _lam_product_solve(lam, target):
    """Solve (diag(lam) o D) = target for D, entrywise."""
    return 2.0 * target / (lam[:, None] + lam[None, :])


def _max_step(lam, direction_scaled):
    """Largest alpha keeping diag(lam) + alpha*direction positive definite."""
    denom = np.sqrt(np.outer(lam, lam))
    w_min = np.linalg.eigvalsh(direction_scaled / denom).min()
    if w_min >= -1e-16:
        return np.inf
    return -1.0 / w_min


def _cholesky_with_retry(m):
    try:
        return np.linalg.cholesky(m)
    except np.linalg.LinAlgError:
        bump = 1e-12 * max(1.0, m.diagonal().max())
        return np.linalg.cholesky(m + bump * np.eye(m.shape[0]))


def _solve_cholesky(chol, rhs):
    return cho_solve((chol, True), rhs, check_finite=False)


def solve_prepared(prepared, objective, trace=None,
                   max_iterations=_MAX_ITERATIONS):
    """Solve with a prepared constraint structure and a fresh objective.

    trace, when given a list, receives one record per iteration with the
    primal/dual objectives, residuals, and the barrier parameter."""
    dims = prepared.block_dims
    n_blocks = len(dims)
    costs = []
    for b, c in enumerate(objective):
        c = np.asarray(c, dtype=complex)
        _check_hermitian(c, f"cost matrix {b}")
        costs.append(c)
    if len(costs) != n_blocks:
        raise ValueError("one cost matrix per block is required")

    cost_scale = max(max((np.abs(c).max() for c in costs), default=0.0),
                     prepared.coeff_scale)
    tau = 1.0 + max(cost_scale, prepared.rhs_scale - 1.0)
    x = [tau * np.eye(d, dtype=complex) for d in dims]
    s = [tau * np.eye(d, dtype=complex) for d in dims]
    y = np.zeros(prepared.n_rows)
    total_dim = prepared.total_dim

    status = SdpStatus.MAX_ITERATIONS
    iteration = 0
    gap_rel = np.inf
    pres_rel = np.inf
    dres_rel = np.inf
    cost_norm = 1.0 + max((np.abs(c).max() for c in costs), default=0.0)

    for iteration in range(1, max_iterations + 1):
        try:
            factors = [_nt_factors(x[b], s[b]) for b in range(n_blocks)]
        except np.linalg.LinAlgError:
            status = SdpStatus.NUMERICAL_FAILURE
            break
        rs = [f[0] for f in factors]
        r_invs = [f[1] for f in factors]
        lams = [f[2] for f in factors]
        ws = [r @ r.conj().T for r in rs]
        mu = sum(float(lam @ lam) for lam in lams) / total_dim

        residual_p = prepared.rhs - prepared.apply(x)
        adjoint_y = prepared.apply_adjoint(y)
        residual_d = [costs[b] - s[b] - adjoint_y[b] for b in range(n_blocks)]

        scaled_rows = [rs[b].conj().T[None] @ (prepared.row_mats[b] @ rs[b])
                       if prepared.row_indices[b].size else
                       prepared.row_mats[b]
                       for b in range(n_blocks)]
        schur = prepared.schur(scaled_rows)
        try:
            chol = _cholesky_with_retry(schur)
        except np.linalg.LinAlgError:
            status = SdpStatus.NUMERICAL_FAILURE
            break

        def newton_step(targets):
            gmats = [rs[b] @ _lam_product_solve(lams[b], targets[b])
                     @ rs[b].conj().T for b in range(n_blocks)]
            terms = [gmats[b] - ws[b] @ residual_d[b] @ ws[b]
                     for b in range(n_blocks)]
            rhs_vec = residual_p - prepared.apply(terms)
            dy = _solve_cholesky(chol, rhs_vec)
            adjoint_dy = prepared.apply_adjoint(dy)
            ds = [_hermitian_part(residual_d[b] - adjoint_dy[b])
                  for b in range(n_blocks)]
            dx = [_hermitian_part(terms[b] + ws[b] @ adjoint_dy[b] @ ws[b])
                  for b in range(n_blocks)]
            return dx, dy, ds

        affine_targets = [np.diag(-lam * lam).astype(complex) for lam in lams]
        dx_a, dy_a, ds_a = newton_step(affine_targets)

        dx_a_scaled = [r_invs[b] @ dx_a[b] @ r_invs[b].conj().T
                       for b in range(n_blocks)]
        ds_a_scaled = [rs[b].conj().T @ ds_a[b] @ rs[b]
                       for b in range(n_blocks)]
        alpha_p_aff = min(1.0, min(_max_step(lams[b], dx_a_scaled[b])
                                   for b in range(n_blocks)))
        alpha_d_aff = min(1.0, min(_max_step(lams[b], ds_a_scaled[b])
                                   for b in range(n_blocks)))
        mu_affine = sum(
            float(np.trace(
                (np.diag(lams[b]) + alpha_p_aff * dx_a_scaled[b])
                @ (np.diag(lams[b]) + alpha_d_aff * ds_a_scaled[b])).real)
            for b in range(n_blocks)) / total_dim
        sigma = min(1.0, max(0.0, (max(mu_affine, 0.0) / mu) ** 3))

        combined_targets = [
            sigma * mu * np.eye(dims[b], dtype=complex)
            + affine_targets[b]
            - _hermitian_part(dx_a_scaled[b] @ ds_a_scaled[b])
            for b in range(n_blocks)]
        dx, dy, ds = newton_step(combined_targets)

        dx_scaled = [r_invs[b] @ dx[b] @ r_invs[b].conj().T
                     for b in range(n_blocks)]
        ds_scaled = [rs[b].conj().T @ ds[b] @ rs[b] for b in range(n_blocks)]
        alpha_p = min(1.0, _STEP_FRACTION * min(
            _max_step(lams[b], dx_scaled[b]) for b in range(n_blocks)))
        alpha_d = min(1.0, _STEP_FRACTION * min(
            _max_step(lams[b], ds_scaled[b]) for b in range(n_blocks)))

        x = [_hermitian_part(x[b] + alpha_p * dx[b]) for b in range(n_blocks)]
        s = [_hermitian_part(s[b] + alpha_d * ds[b]) for b in range(n_blocks)]
        y = y + alpha_d * dy

        primal_objective = sum(float(np.trace(costs[b] @ x[b]).real)
                               for b in range(n_blocks))
        dual_objective = float(prepared.rhs @ y)
        residual_p = prepared.rhs - prepared.apply(x)
        adjoint_y = prepared.apply_adjoint(y)
        pres_rel = (np.abs(residual_p).max() / prepared.rhs_scale
                    if prepared.n_rows else 0.0)
        dres_rel = max(np.abs(costs[b] - s[b] - adjoint_y[b]).max()
                       for b in range(n_blocks)) / cost_norm
        gap_rel = (abs(primal_objective - dual_objective)
                   / (1.0 + max(abs(primal_objective), abs(dual_objective))))
        if trace is not None:
            trace.append({
                "iteration": iteration,
                "primal_objective": primal_objective,
                "dual_objective": dual_objective,
                "primal_residual": pres_rel,
                "dual_residual": dres_rel,
                "mu": mu,
            })

        if not (np.isfinite(primal_objective) and np.isfinite(dual_objective)):
            status = SdpStatus.NUMERICAL_FAILURE
            break
        if (abs(dual_objective) > _DIVERGENCE_LIMIT * (1.0 + abs(primal_objective))
                and pres_rel > 1e-7):
            raise InfeasibleError(
                "dual objective diverging while the primal residual stays "
                f"at {pres_rel:.2e}: equality constraints admit no positive "
                "semidefinite point")
        if (abs(primal_objective) > _DIVERGENCE_LIMIT * (1.0 + abs(dual_objective))
                and dres_rel > 1e-7):
            raise InfeasibleError(
                "primal objective diverging while the dual residual stays "
                f"at {dres_rel:.2e}: the problem is unbounded below")
        if gap_rel <= _GAP_TOL and pres_rel <= _RESIDUAL_TOL \
                and dres_rel <= _RESIDUAL_TOL:
            status = SdpStatus.OPTIMAL
            break

    primal_objective = sum(float(np.trace(costs[b] @ x[b]).real)
                           for b in range(n_blocks))
    return SdpSolution(
        x_blocks=tuple(x),
        y=y,
        s_blocks=tuple(s),
        objective_value=primal_objective,
        status=status,
        iterations=iteration,
        relative_gap=float(gap_rel),
        primal_residual=float(pres_rel),
        dual_residual=float(dres_rel),
    )


def solve(problem, trace=None, max_iterations=_MAX_ITERATIONS):
    """Solve an SdpProblem; see solve_prepared for the iteration details."""
    prepared = prepare(problem)
    return solve_prepared(prepared, problem.objective, trace=trace,
                          max_iterations=max_iterations)


# ---------------------------------------------------------------------------
# plain-text problem serialization


def dump_problem(problem, path):
    """Write a problem as plain text for cross-checks with other solvers.

    Format (all floats %.17g, complex entries as "re im" pairs):
        line 1: the literal header "sdp-problem 1"
        line 2: "blocks" then the block dimensions
        per block: d lines of 2*d floats (cost matrix, row-major)
        next: "rows" then the row count
        per row: "row" rhs n_touched, then per touched block:
            "block" index, then d lines of 2*d floats
    """
    lines = ["sdp-problem 1",
             "blocks " + " ".join(str(d) for d in problem.block_dims)]

    def matrix_lines(mat):
        return [" ".join("%.17g %.17g" % (entry.real, entry.imag)
                         for entry in row) for row in mat]

    for cost in problem.objective:
        lines.extend(matrix_lines(cost))
    lines.append("rows %d" % len(problem.constraints))
    for coeffs, rhs in problem.constraints:
        lines.append("row %.17g %d" % (rhs, len(coeffs)))
        for b in sorted(coeffs):
            lines.append("block %d" % b)
            lines.extend(matrix_lines(coeffs[b]))
    with open(path, "w", encoding="ascii") as handle:
        handle.write("\n".join(lines) + "\n")


def load_problem(path):
    """Read a problem written by dump_problem."""
    with open(path, "r", encoding="ascii") as handle:
        lines = [line.strip() for line in handle if line.strip()]
    if lines[0] != "sdp-problem 1":
        raise ValueError(f"unrecognized header {lines[0]!r}")
    cursor = 1
    parts = lines[cursor].split()
    if parts[0] != "blocks":
        raise ValueError("missing blocks line")
    dims = tuple(int(p) for p in parts[1:])
    cursor += 1

    def read_matrix(d):
        nonlocal cursor
        mat = np.empty((d, d), dtype=complex)
        for r in range(d):
            vals = [float(v) for v in lines[cursor].split()]
            if len(vals) != 2 * d:
                raise ValueError(f"matrix row {r} has {len(vals)} values")
            mat[r] = np.array(vals[0::2]) + 1j * np.array(vals[1::2])
            cursor += 1
        return mat

    objective = tuple(read_matrix(d) for d in dims)
    parts = lines[cursor].split()
    if parts[0] != "rows":
        raise ValueError("missing rows line")
    n_rows = int(parts[1])
    cursor += 1
    constraints = []
    for _ in range(n_rows):
        parts = lines[cursor].split()
        if parts[0] != "row":
            raise ValueError(f"expected row line, got {lines[cursor]!r}")
        rhs = float(parts[1])
        n_touched = int(parts[2])
        cursor += 1
        coeffs = {}
        for _ in range(n_touched):
            parts = lines[cursor].split()
            if parts[0] != "block":
                raise ValueError(f"expected block line, got {lines[cursor]!r}")
            b = int(parts[1])
            cursor += 1
            coeffs[b] = read_matrix(dims[b])
        constraints.append((coeffs, rhs))
    return SdpProblem(block_dims=dims, objective=objective,
                      constraints=tuple(constraints))
