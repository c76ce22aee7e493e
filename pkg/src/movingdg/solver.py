"""Regularized Gauss-Newton iteration over the state, auxiliary flux and geometry.

Each iteration solves (J^T J + R) delta = -J^T r, where R is a positive
definite regularization: lambda_y / lambda_sigma / lambda_u on the diagonal
blocks of the respective unknowns, optionally a discrete Laplacian penalty
on the geometry increment, and optionally a per-cell inverse-volume scaling
of lambda_u.  Steps are backtracked until the geometry stays valid, the
state stays admissible and the objective strictly decreases; rejected steps
inflate lambda_u (trust-region flavored), accepted steps relax it.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
import scipy.sparse as sp
from scipy.sparse.csgraph import reverse_cuthill_mckee

from .assembly import Discretization, FieldState
from .basis import gauss_rule
from .errors import AdmissibilityError, GeometryError, SolveFailure
from .mesh import GeometryField, cell_volumes, check_validity, project_boundary, validity_tolerance

log = logging.getLogger(__name__)


@dataclass
class SolverConfig:
    lambda_y: float = 0.0
    lambda_sigma: float = 0.0
    lambda_u: float = 1e-2
    lambda_laplace: float = 0.0
    inverse_volume_scaling: bool = False
    adapt_lambda_u: bool = True
    lambda_u_floor: float = 1e-12
    lambda_u_grow: float = 10.0
    lambda_u_shrink: float = 0.5
    max_iters: int = 500
    abs_tol: float = 1e-12          # on ||J^T r||
    rel_tol: float = 1e-14          # on the relative objective decrease
    step_tol: float = 1e-14         # on ||delta|| / (1 + ||z||)
    backtrack_factor: float = 0.5
    max_halvings: int = 30
    max_consecutive_rejections: int = 8
    stall_grad_tol: float = 1e-6


@dataclass
class SolveReport:
    iterations: int = 0
    objective: float = np.inf
    grad_norm: float = np.inf
    history: list = field(default_factory=list)      # accepted objective values
    rejections: int = 0
    min_jacobian: float = np.nan                     # final mesh validity margin
    converged: bool = False
    stalled: bool = False
    iteration_rows: list = field(default_factory=list)  # (iter, objective, grad_norm, lambda_u, step_scale, min_jacobian)


ITERATION_LOG_COLUMNS = ("iter", "objective", "grad_norm", "lambda_u", "step_scale", "min_jacobian")


def solve_linear_spd(A, b: np.ndarray) -> np.ndarray:
    """Solve A x = b for symmetric positive definite A via banded Cholesky.

    A bandwidth-reducing reordering (reverse Cuthill-McKee) is applied
    first, then the matrix is factored in banded storage.  One step of
    iterative refinement keeps the residual below ~1e-10 relative.
    """
    A = sp.csr_matrix(A)
    n = A.shape[0]
    scale = abs(A).max() if A.nnz else 0.0
    if scale > 0:
        asym = abs(A - A.T).max()
        if asym > 1e-12 * scale:
            raise SolveFailure(f"matrix is not symmetric (relative asymmetry {asym / scale:.2e})")
    A = (A + A.T) * 0.5

    perm = reverse_cuthill_mckee(A, symmetric_mode=True)
    inv_perm = np.empty_like(perm)
    inv_perm[perm] = np.arange(n)
    Ap = A[perm][:, perm].tocoo()
    if Ap.nnz == 0:
        raise SolveFailure("matrix is identically zero")
    bw = int(np.abs(Ap.row - Ap.col).max())
    band = np.zeros((bw + 1, n))
    mask = Ap.row <= Ap.col
    band[bw + Ap.row[mask] - Ap.col[mask], Ap.col[mask]] = Ap.data[mask]
    try:
        factor = scipy.linalg.cholesky_banded(band, lower=False)
    except scipy.linalg.LinAlgError as exc:
        raise SolveFailure(f"banded Cholesky failed: {exc}") from exc

    bp = b[perm]
    xp = scipy.linalg.cho_solve_banded((factor, False), bp)
    Apc = Ap.tocsr()
    xp += scipy.linalg.cho_solve_banded((factor, False), bp - Apc @ xp)
    return xp[inv_perm]


def damp_step(z: np.ndarray, delta: np.ndarray, f0: float, objective_fn, factor: float = 0.5, max_halvings: int = 30):
    """Largest step z + alpha * delta, alpha in {1, 1/2, ...}, that keeps the
    trial admissible/valid and strictly decreases the objective.

    objective_fn raises GeometryError/AdmissibilityError for unusable
    trials.  Returns (alpha, z_trial, f_trial) or None on rejection.
    """
    alpha = 1.0
    for _ in range(max_halvings + 1):
        trial = z + alpha * delta
        try:
            f = objective_fn(trial)
        except (GeometryError, AdmissibilityError):
            f = None
        if f is not None and f < f0:
            return alpha, trial, f
        alpha *= factor
    return None


def geometry_stiffness(n_cells: int, degree: int) -> sp.csr_matrix:
    """Reference-space stiffness matrix of the continuous geometry dofs."""
    from .basis import NodalBasis

    basis = NodalBasis(degree)
    quad = gauss_rule(max(degree, 1))
    _, D = basis.eval(quad.points)
    local = np.einsum("q,qi,qj->ij", quad.weights, D, D)
    n_dofs = n_cells * degree + 1
    K = sp.lil_matrix((n_dofs, n_dofs))
    for c in range(n_cells):
        idx = slice(c * degree, c * degree + degree + 1)
        K[idx, idx] += local
    return K.tocsr()


def _regularization(disc: Discretization, geometry: GeometryField, lam_u: float, cfg: SolverConfig) -> sp.csr_matrix:
    diag = np.zeros(disc.n_unknowns)
    diag[: disc.n_y] = cfg.lambda_y
    diag[disc.n_y : disc.n_y + disc.n_sigma] = cfg.lambda_sigma
    if disc.moving:
        u0 = disc.offsets["u"]
        if cfg.inverse_volume_scaling:
            vols = cell_volumes(geometry, disc.quad)
            pu = disc.degree_geometry
            weights = np.zeros(disc.n_u)
            counts = np.zeros(disc.n_u)
            for c in range(disc.n_cells):
                idx = slice(c * pu, c * pu + pu + 1)
                weights[idx] += 1.0 / max(vols[c], 1e-300)
                counts[idx] += 1.0
            diag[u0:] = lam_u * weights / counts
        else:
            diag[u0:] = lam_u
    R = sp.diags(diag).tocsr()
    if disc.moving and cfg.lambda_laplace > 0.0:
        K = geometry_stiffness(disc.n_cells, disc.degree_geometry).tolil()
        K[0, :] = 0.0
        K[:, 0] = 0.0
        K[-1, :] = 0.0
        K[:, -1] = 0.0
        u0 = disc.offsets["u"]
        full = sp.lil_matrix((disc.n_unknowns, disc.n_unknowns))
        full[u0:, u0:] = cfg.lambda_laplace * K
        R = (R + full.tocsr()).tocsr()
    return R


def gauss_newton_solve(
    disc: Discretization,
    state0: FieldState,
    geometry0: GeometryField,
    cfg: SolverConfig | None = None,
) -> tuple[FieldState, GeometryField, SolveReport]:
    """Minimize the least-squares residual from the given initialization."""
    cfg = cfg if cfg is not None else SolverConfig()
    geometry0 = project_boundary(geometry0)
    delta_valid = validity_tolerance(geometry0)
    z = disc.pack(state0, geometry0)
    lam_u = cfg.lambda_u
    report = SolveReport()

    def objective_of(zv: np.ndarray) -> float:
        state, geom = disc.unpack(zv, geometry0)
        if disc.moving and check_validity(geom, disc.quad) <= delta_valid:
            raise GeometryError("trial step drives the mapping Jacobian below tolerance")
        r = disc.residual(state, geom)
        return 0.5 * float(np.dot(r, r))

    f = objective_of(z)
    report.history.append(f)
    consecutive_rejections = 0
    best = (f, z.copy())

    for it in range(cfg.max_iters):
        rs = disc.assemble_z(z, geometry0)
        grad = rs.jac.T @ rs.r
        gnorm = float(np.linalg.norm(grad))
        _, geom_now = disc.unpack(z, geometry0)
        min_jac = check_validity(geom_now, disc.quad)
        report.iterations = it
        report.objective = f
        report.grad_norm = gnorm
        report.min_jacobian = min_jac
        if gnorm <= cfg.abs_tol:
            report.converged = True
            break

        N = (rs.jac.T @ rs.jac).tocsr() + _regularization(disc, geom_now, lam_u, cfg)
        delta = solve_linear_spd(N, -grad)
        if np.linalg.norm(delta) <= cfg.step_tol * (1.0 + np.linalg.norm(z)):
            report.converged = True
            break

        result = damp_step(z, delta, f, objective_of, cfg.backtrack_factor, cfg.max_halvings)
        if result is None:
            report.rejections += 1
            consecutive_rejections += 1
            report.iteration_rows.append((it, f, gnorm, lam_u, 0.0, min_jac))
            log.debug("iter %d rejected: f=%.6e grad=%.3e lambda_u=%.2e", it, f, gnorm, lam_u)
            if disc.moving and cfg.adapt_lambda_u:
                lam_u *= cfg.lambda_u_grow
            if consecutive_rejections >= cfg.max_consecutive_rejections:
                report.stalled = gnorm > cfg.stall_grad_tol
                report.converged = not report.stalled
                break
            continue

        alpha, z_new, f_new = result
        consecutive_rejections = 0
        decrease = f - f_new
        z = z_new
        if f_new < best[0]:
            best = (f_new, z.copy())
        f = f_new
        report.history.append(f)
        report.iteration_rows.append((it, f, gnorm, lam_u, alpha, min_jac))
        log.debug("iter %d: f=%.6e grad=%.3e lambda_u=%.2e alpha=%g", it, f, gnorm, lam_u, alpha)
        if disc.moving and cfg.adapt_lambda_u:
            lam_u = max(lam_u * cfg.lambda_u_shrink, cfg.lambda_u_floor)
        if decrease <= cfg.rel_tol * max(f, 1e-300):
            report.converged = True
            break
    else:
        # max_iters exhausted: keep the best iterate, flag per gradient size
        report.stalled = report.grad_norm > cfg.stall_grad_tol

    if best[0] < f:
        z = best[1]
    state, geometry = disc.unpack(z, geometry0)
    rs = disc.assemble_z(z, geometry0)
    report.objective = 0.5 * float(np.dot(rs.r, rs.r))
    report.grad_norm = float(np.linalg.norm(rs.jac.T @ rs.r))
    report.min_jacobian = check_validity(geometry, disc.quad)
    report.iterations += 1
    return state, geometry, report
