"""Quadrature-sampled least-squares residual and its exact Jacobian.

The unknowns are the discontinuous modal coefficients of the state y and
auxiliary flux sigma, plus (when the grid moves) the continuous nodal dofs
of the geometry map u.  The residual vector stacks, in reference space,

  (a) cell conservation samples    sqrt(w_q) * [d/dxi F(y, sigma) - u' f],
  (b) cell constitutive samples    sqrt(w_q) * [u' sigma - G(y) dy/dxi],
  (c) interface flux jumps         [[s . F(y, sigma)]],
  (d) interface state continuity   {G} [[y s]],

so that r^T r is the quadrature approximation of the squared L2 norm of
the strong residual.  The columns of the Jacobian are then exactly the
optimal test functions of the trial-to-test operator, and the least-squares
normal equations J^T r = 0 are the weak formulation.  In one dimension the
cofactor factor is identically 1 and the scaled interface normal is the
orientation sign, so interface rows carry no geometry dependence.

Geometry columns are pre-composed with the derivative of the boundary
projection (boundary dof columns are zero).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
import scipy.sparse as sp

from .basis import ModalBasis, QuadratureRule, default_rule
from .errors import AdmissibilityError, ConfigError, GeometryError
from .mesh import GeometryField, ReferenceMesh, project_boundary
from .physics import AdvectionDiffusionModel, FluxModel


@dataclass(frozen=True)
class BoundaryCondition:
    """Boundary closure: prescribed-state (Dirichlet/inflow) or pass-through outflow."""

    kind: str
    state: np.ndarray | None = None


def dirichlet(state) -> BoundaryCondition:
    """Prescribed boundary state: convective flux from the data, viscous flux
    from the interior, plus a state-continuity row against the data."""
    return BoundaryCondition(kind="dirichlet", state=np.atleast_1d(np.asarray(state, dtype=float)))


def outflow() -> BoundaryCondition:
    """Pass-through closure: interior convective flux with sigma_out = 0; the
    state-continuity rows are identically zero."""
    return BoundaryCondition(kind="outflow")


@dataclass
class SourceTerm:
    """State-independent source data f(x) with its spatial derivative."""

    value: Callable[[np.ndarray], np.ndarray]
    derivative: Callable[[np.ndarray], np.ndarray]


def constant_source(f) -> SourceTerm:
    f = np.atleast_1d(np.asarray(f, dtype=float))
    return SourceTerm(
        value=lambda x: np.broadcast_to(f, np.shape(x) + f.shape).copy(),
        derivative=lambda x: np.zeros(np.shape(x) + f.shape),
    )


@dataclass
class FieldState:
    """Per-cell modal coefficients of y and sigma (no dofs shared across cells)."""

    y_coeffs: np.ndarray                 # (n_cells, m, p_y + 1)
    sigma_coeffs: np.ndarray | None = None  # (n_cells, m, p_sigma + 1)

    def copy(self) -> "FieldState":
        return FieldState(
            y_coeffs=self.y_coeffs.copy(),
            sigma_coeffs=None if self.sigma_coeffs is None else self.sigma_coeffs.copy(),
        )


@dataclass
class ResidualSystem:
    """Residual vector with its Jacobian in all active unknowns."""

    r: np.ndarray
    jac: sp.csr_matrix
    offsets: dict


def objective(rs: ResidualSystem) -> float:
    """Least-squares objective 0.5 * r^T r."""
    return 0.5 * float(np.dot(rs.r, rs.r))


def evaluate_field(coeffs: np.ndarray, basis: ModalBasis, xi) -> tuple[np.ndarray, np.ndarray]:
    """Values and xi-derivatives of a cellwise modal field at points xi.

    Returns arrays of shape (n_cells, len(xi), m).
    """
    vals, derivs = basis.eval(np.atleast_1d(np.asarray(xi, dtype=float)))
    return np.einsum("cmj,qj->cqm", coeffs, vals), np.einsum("cmj,qj->cqm", coeffs, derivs)


class Discretization:
    """Fixed discretization data: model, bases, quadrature, boundary closures.

    The geometry and field coefficients vary during a solve and are passed
    to the assembly methods; everything else is immutable here.
    """

    def __init__(
        self,
        model: FluxModel,
        mesh: ReferenceMesh,
        degree_y: int,
        degree_sigma: int | None = None,
        degree_geometry: int | None = None,
        quad: QuadratureRule | None = None,
        bc_left: BoundaryCondition | None = None,
        bc_right: BoundaryCondition | None = None,
        source: SourceTerm | None = None,
        moving: bool = False,
    ):
        if degree_y < 1:
            raise ConfigError(f"state degree must be >= 1, got {degree_y}")
        self.model = model
        self.mesh = mesh
        self.n_cells = mesh.cell_count
        self.m = model.m
        self.viscous = model.viscous
        self.moving = moving
        self.degree_y = degree_y
        self.degree_sigma = degree_y if degree_sigma is None else degree_sigma
        self.degree_geometry = degree_y if degree_geometry is None else degree_geometry
        p_max = max(degree_y, self.degree_sigma if self.viscous else 0)
        self.quad = quad if quad is not None else default_rule(p_max, self.degree_geometry)
        self.bc_left = bc_left if bc_left is not None else outflow()
        self.bc_right = bc_right if bc_right is not None else outflow()
        self.source = source

        self.basis_y = ModalBasis(degree_y)
        self.basis_sigma = ModalBasis(self.degree_sigma)

        # quadrature tabulations
        q = self.quad.points
        self.Vy, self.Dy = self.basis_y.eval(q)
        self.Vs, self.Ds = self.basis_sigma.eval(q)
        self.sqrt_w = np.sqrt(self.quad.weights)
        # trace tabulations at the reference endpoints
        ends = np.array([0.0, 1.0])
        self.Vy_end, _ = self.basis_y.eval(ends)
        self.Vs_end, _ = self.basis_sigma.eval(ends)

        # unknown layout
        ny = degree_y + 1
        ns = self.degree_sigma + 1
        self.n_y = self.n_cells * self.m * ny
        self.n_sigma = self.n_cells * self.m * ns if self.viscous else 0
        self.n_u = self.n_cells * self.degree_geometry + 1 if moving else 0
        self.n_unknowns = self.n_y + self.n_sigma + self.n_u

        # residual layout
        nq = self.quad.n
        self.rows_conservation = self.n_cells * nq * self.m
        self.rows_constitutive = self.n_cells * nq * self.m if self.viscous else 0
        self.rows_flux_jump = self.mesh.interface_count * self.m
        self.rows_state_jump = self.mesh.interface_count * self.m if self.viscous else 0
        self.n_rows = (
            self.rows_conservation + self.rows_constitutive + self.rows_flux_jump + self.rows_state_jump
        )
        self.offsets = {
            "conservation": 0,
            "constitutive": self.rows_conservation,
            "flux_jump": self.rows_conservation + self.rows_constitutive,
            "state_jump": self.rows_conservation + self.rows_constitutive + self.rows_flux_jump,
            "y": 0,
            "sigma": self.n_y,
            "u": self.n_y + self.n_sigma,
        }

    # ------------------------------------------------------------------
    # packing
    # ------------------------------------------------------------------
    def zero_state(self) -> FieldState:
        ny = self.degree_y + 1
        ns = self.degree_sigma + 1
        return FieldState(
            y_coeffs=np.zeros((self.n_cells, self.m, ny)),
            sigma_coeffs=np.zeros((self.n_cells, self.m, ns)) if self.viscous else None,
        )

    def pack(self, state: FieldState, geometry: GeometryField) -> np.ndarray:
        parts = [state.y_coeffs.ravel()]
        if self.viscous:
            parts.append(state.sigma_coeffs.ravel())
        if self.moving:
            parts.append(geometry.dofs)
        return np.concatenate(parts)

    def unpack(self, z: np.ndarray, base_geometry: GeometryField) -> tuple[FieldState, GeometryField]:
        ny = self.degree_y + 1
        ns = self.degree_sigma + 1
        y = z[: self.n_y].reshape(self.n_cells, self.m, ny).copy()
        sigma = None
        if self.viscous:
            sigma = z[self.n_y : self.n_y + self.n_sigma].reshape(self.n_cells, self.m, ns).copy()
        geometry = base_geometry
        if self.moving:
            geometry = project_boundary(base_geometry.with_dofs(z[self.n_y + self.n_sigma :]))
        return FieldState(y_coeffs=y, sigma_coeffs=sigma), geometry

    # ------------------------------------------------------------------
    # pointwise data shared by residual and Jacobian
    # ------------------------------------------------------------------
    def _geometry_tables(self, geometry: GeometryField):
        if geometry.cell_count != self.n_cells:
            raise ConfigError("geometry and discretization cell counts differ")
        Vu, Du = geometry.basis.eval(self.quad.points)
        cell_dofs = np.stack([geometry.cell_dofs(c) for c in range(self.n_cells)])
        x_q = cell_dofs @ Vu.T
        du_q = cell_dofs @ Du.T
        return Vu, Du, x_q, du_q

    def _field_tables(self, state: FieldState):
        y_q = np.einsum("cmj,qj->cqm", state.y_coeffs, self.Vy)
        dy_q = np.einsum("cmj,qj->cqm", state.y_coeffs, self.Dy)
        y_tr = np.einsum("cmj,ej->cem", state.y_coeffs, self.Vy_end)  # e=0: xi=0, e=1: xi=1
        if self.viscous:
            s_q = np.einsum("cmj,qj->cqm", state.sigma_coeffs, self.Vs)
            ds_q = np.einsum("cmj,qj->cqm", state.sigma_coeffs, self.Ds)
            s_tr = np.einsum("cmj,ej->cem", state.sigma_coeffs, self.Vs_end)
        else:
            s_q = np.zeros_like(y_q)
            ds_q = np.zeros_like(dy_q)
            s_tr = np.zeros_like(y_tr)
        return y_q, dy_q, s_q, ds_q, y_tr, s_tr

    def _interface_traces(self, y_tr, s_tr, k):
        """One-sided traces at interface k: (y_minus, s_minus, y_plus, s_plus).

        minus = left cell at xi=1 (outward sign +1), plus = right cell at
        xi=0 (outward sign -1); boundary interfaces have a single side.
        """
        left = (y_tr[k - 1, 1], s_tr[k - 1, 1]) if k > 0 else (None, None)
        right = (y_tr[k, 0], s_tr[k, 0]) if k < self.n_cells else (None, None)
        return left + right

    # ------------------------------------------------------------------
    # residual
    # ------------------------------------------------------------------
    def residual(self, state: FieldState, geometry: GeometryField) -> np.ndarray:
        model = self.model
        _, _, x_q, du_q = self._geometry_tables(geometry)
        if du_q.min() <= 0.0:
            raise GeometryError(f"non-positive mapping Jacobian (min u' = {du_q.min():.3e})")
        y_q, dy_q, s_q, ds_q, y_tr, s_tr = self._field_tables(state)
        model.require_admissible(y_q, "quadrature points")
        model.require_admissible(y_tr, "interface traces")

        r = np.zeros(self.n_rows)
        f_y, f_s = model.flux_jacobians(y_q, s_q)
        dflux = np.einsum("cqik,cqk->cqi", f_y, dy_q) + np.einsum("cqik,cqk->cqi", f_s, ds_q)
        f_q = self.source.value(x_q) if self.source is not None else np.zeros_like(y_q)
        cons = self.sqrt_w[None, :, None] * (dflux - du_q[..., None] * f_q)
        r[: self.rows_conservation] = cons.ravel()

        if self.viscous:
            g_dy = np.einsum("cqik,cqk->cqi", model.constitutive_matrix(y_q), dy_q)
            const = self.sqrt_w[None, :, None] * (du_q[..., None] * s_q - g_dy)
            r[self.offsets["constitutive"] : self.offsets["flux_jump"]] = const.ravel()

        for k in range(self.mesh.interface_count):
            rf, rs_row = self._interface_residual(y_tr, s_tr, k)
            o = self.offsets["flux_jump"] + k * self.m
            r[o : o + self.m] = rf
            if self.viscous:
                o = self.offsets["state_jump"] + k * self.m
                r[o : o + self.m] = rs_row
        return r

    def _interface_residual(self, y_tr, s_tr, k):
        model = self.model
        yL, sL, yR, sR = self._interface_traces(y_tr, s_tr, k)
        zeros = np.zeros(self.m)
        if 0 < k < self.n_cells:
            rf = model.flux(yL, sL) - model.flux(yR, sR)
            if not self.viscous:
                return rf, zeros
            jump = yL - yR
            avg_g = 0.5 * (model.constitutive_matrix(yL) + model.constitutive_matrix(yR))
            return rf, avg_g @ jump
        # boundary interface: single interior side with outward sign
        bc = self.bc_left if k == 0 else self.bc_right
        sign = -1.0 if k == 0 else 1.0
        y_in, s_in = (yR, sR) if k == 0 else (yL, sL)
        if bc.kind == "outflow":
            if not self.viscous:
                return zeros, zeros
            rf = -sign * model.modified_viscous_flux(y_in, s_in)
            return rf, zeros
        y_d = bc.state
        if not self.viscous:
            rf = sign * (model.convective_flux(y_in) - model.convective_flux(y_d))
            return rf, zeros
        rf = sign * (
            model.flux(y_in, s_in)
            - model.convective_flux(y_d)
            + model.modified_viscous_flux(y_d, s_in)
        )
        rs_row = sign * (model.constitutive_matrix(y_d) @ (y_in - y_d))
        return rf, rs_row

    # ------------------------------------------------------------------
    # residual + Jacobian
    # ------------------------------------------------------------------
    def assemble(self, state: FieldState, geometry: GeometryField) -> ResidualSystem:
        model = self.model
        m, nq, C = self.m, self.quad.n, self.n_cells
        ny = self.degree_y + 1
        ns = self.degree_sigma + 1
        Vu, Du, x_q, du_q = self._geometry_tables(geometry)
        if du_q.min() <= 0.0:
            raise GeometryError(f"non-positive mapping Jacobian (min u' = {du_q.min():.3e})")
        y_q, dy_q, s_q, ds_q, y_tr, s_tr = self._field_tables(state)
        model.require_admissible(y_q, "quadrature points")
        model.require_admissible(y_tr, "interface traces")

        r = np.zeros(self.n_rows)
        trips_r: list[np.ndarray] = []
        trips_c: list[np.ndarray] = []
        trips_v: list[np.ndarray] = []

        def scatter(rows, cols, vals):
            rows, cols = np.broadcast_arrays(rows, cols)
            trips_r.append(rows.ravel())
            trips_c.append(cols.ravel())
            trips_v.append(np.broadcast_to(vals, rows.shape).ravel())

        sw = self.sqrt_w
        cells = np.arange(C)
        # row ids (c, q, i); column ids (c, k, j)
        rows_cell = (cells[:, None, None] * nq + np.arange(nq)[None, :, None]) * m + np.arange(m)[None, None, :]
        cols_y = self.offsets["y"] + (cells[:, None, None] * m + np.arange(m)[None, :, None]) * ny + np.arange(ny)[None, None, :]
        if self.viscous:
            cols_s = self.offsets["sigma"] + (cells[:, None, None] * m + np.arange(m)[None, :, None]) * ns + np.arange(ns)[None, None, :]
        pu = self.degree_geometry
        cols_u = self.offsets["u"] + cells[:, None] * pu + np.arange(pu + 1)[None, :]

        # --- conservation rows -----------------------------------------
        f_y, f_s = model.flux_jacobians(y_q, s_q)
        df_y, df_s = model.flux_jacobians_dxi(y_q, s_q, dy_q, ds_q)
        dflux = np.einsum("cqik,cqk->cqi", f_y, dy_q) + np.einsum("cqik,cqk->cqi", f_s, ds_q)
        if self.source is not None:
            f_q = self.source.value(x_q)
            dfdx_q = self.source.derivative(x_q)
        else:
            f_q = np.zeros_like(y_q)
            dfdx_q = np.zeros_like(y_q)
        r[: self.rows_conservation] = (sw[None, :, None] * (dflux - du_q[..., None] * f_q)).ravel()

        E = sw[None, :, None, None, None] * (
            df_y[..., None] * self.Vy[None, :, None, None, :] + f_y[..., None] * self.Dy[None, :, None, None, :]
        )
        scatter(rows_cell[..., None, None], cols_y[:, None, None, :, :], E)
        if self.viscous:
            E = sw[None, :, None, None, None] * (
                df_s[..., None] * self.Vs[None, :, None, None, :] + f_s[..., None] * self.Ds[None, :, None, None, :]
            )
            scatter(rows_cell[..., None, None], cols_s[:, None, None, :, :], E)
        if self.moving:
            E = sw[None, :, None, None] * (
                -f_q[..., None] * Du[None, :, None, :] - (du_q[..., None] * dfdx_q)[..., None] * Vu[None, :, None, :]
            )
            scatter(rows_cell[..., None], cols_u[:, None, None, :], E)

        # --- constitutive rows ------------------------------------------
        if self.viscous:
            off = self.offsets["constitutive"]
            g_mat = model.constitutive_matrix(y_q)
            g_state = model.constitutive_state_jacobian(y_q, dy_q)
            g_dy = np.einsum("cqik,cqk->cqi", g_mat, dy_q)
            r[off : off + self.rows_constitutive] = (
                sw[None, :, None] * (du_q[..., None] * s_q - g_dy)
            ).ravel()

            E = sw[None, :, None, None, None] * (
                -g_state[..., None] * self.Vy[None, :, None, None, :]
                - g_mat[..., None] * self.Dy[None, :, None, None, :]
            )
            scatter(off + rows_cell[..., None, None], cols_y[:, None, None, :, :], E)
            eye = np.eye(m)
            E = (
                sw[None, :, None, None, None]
                * du_q[:, :, None, None, None]
                * eye[None, None, :, :, None]
                * self.Vs[None, :, None, None, :]
            )
            scatter(off + rows_cell[..., None, None], cols_s[:, None, None, :, :], E)
            if self.moving:
                E = sw[None, :, None, None] * s_q[..., None] * Du[None, :, None, :]
                scatter(off + rows_cell[..., None], cols_u[:, None, None, :], E)

        # --- interface rows ----------------------------------------------
        for k in range(self.mesh.interface_count):
            self._interface_block(k, y_tr, s_tr, r, scatter, cols_y, cols_s if self.viscous else None)

        jac = sp.coo_matrix(
            (np.concatenate(trips_v), (np.concatenate(trips_r), np.concatenate(trips_c))),
            shape=(self.n_rows, self.n_unknowns),
        ).tocsr()
        if self.moving:
            # compose geometry columns with the boundary projection derivative
            mask = np.ones(self.n_unknowns)
            mask[self.offsets["u"]] = 0.0
            mask[self.offsets["u"] + self.n_u - 1] = 0.0
            jac = jac @ sp.diags(mask)
        return ResidualSystem(r=r, jac=jac, offsets=dict(self.offsets))

    def _interface_block(self, k, y_tr, s_tr, r, scatter, cols_y, cols_s):
        """Residual entries and Jacobian blocks for interface k."""
        model = self.model
        m = self.m
        rf_off = self.offsets["flux_jump"] + k * self.m
        rows_f = rf_off + np.arange(m)
        yL, sL, yR, sR = self._interface_traces(y_tr, s_tr, k)
        # trace extraction rows: value of each coefficient at the endpoint
        VyL, VyR = self.Vy_end[1], self.Vy_end[0]
        VsL, VsR = self.Vs_end[1], self.Vs_end[0]

        def scatter_trace(rows, mat, cell, V, cols):
            # mat: (m, m) block acting on the trace value; expand over modes
            block = mat[:, :, None] * V[None, None, :]
            scatter(rows[:, None, None], cols[cell][None, :, :], block)  # (m, m, n_modes)

        rf, rs_row = self._interface_residual(y_tr, s_tr, k)
        r[rf_off : rf_off + m] = rf
        if self.viscous:
            rs_off = self.offsets["state_jump"] + k * self.m
            r[rs_off : rs_off + m] = rs_row
            rows_s = rs_off + np.arange(m)

        if 0 < k < self.n_cells:
            fyL, fsL = model.flux_jacobians(yL, sL)
            fyR, fsR = model.flux_jacobians(yR, sR)
            scatter_trace(rows_f, fyL, k - 1, VyL, cols_y)
            scatter_trace(rows_f, -fyR, k, VyR, cols_y)
            if self.viscous:
                scatter_trace(rows_f, fsL, k - 1, VsL, cols_s)
                scatter_trace(rows_f, -fsR, k, VsR, cols_s)
                jump = yL - yR
                gL, gR = model.constitutive_matrix(yL), model.constitutive_matrix(yR)
                avg_g = 0.5 * (gL + gR)
                mL = avg_g + 0.5 * model.constitutive_state_jacobian(yL, jump)
                mR = -avg_g + 0.5 * model.constitutive_state_jacobian(yR, jump)
                scatter_trace(rows_s, mL, k - 1, VyL, cols_y)
                scatter_trace(rows_s, mR, k, VyR, cols_y)
            return

        bc = self.bc_left if k == 0 else self.bc_right
        sign = -1.0 if k == 0 else 1.0
        cell = 0 if k == 0 else self.n_cells - 1
        Vy_in = VyR if k == 0 else VyL
        Vs_in = VsR if k == 0 else VsL
        y_in, s_in = (yR, sR) if k == 0 else (yL, sL)

        if bc.kind == "outflow":
            if not self.viscous:
                return
            dvy = model.viscous_state_jacobian(y_in, s_in)
            dvs = model.viscous_sigma_jacobian(y_in, s_in)
            scatter_trace(rows_f, -sign * dvy, cell, Vy_in, cols_y)
            scatter_trace(rows_f, -sign * dvs, cell, Vs_in, cols_s)
            return

        y_d = bc.state
        if not self.viscous:
            scatter_trace(rows_f, sign * model.convective_jacobian(y_in), cell, Vy_in, cols_y)
            return
        fy_in, fs_in = model.flux_jacobians(y_in, s_in)
        scatter_trace(rows_f, sign * fy_in, cell, Vy_in, cols_y)
        dvs_d = model.viscous_sigma_jacobian(y_d, s_in)
        scatter_trace(rows_f, sign * (fs_in + dvs_d), cell, Vs_in, cols_s)
        scatter_trace(rows_s, sign * model.constitutive_matrix(y_d), cell, Vy_in, cols_y)

    # ------------------------------------------------------------------
    # packed-vector interface (geometry routed through the boundary projection)
    # ------------------------------------------------------------------
    def residual_z(self, z: np.ndarray, base_geometry: GeometryField) -> np.ndarray:
        state, geometry = self.unpack(z, base_geometry)
        return self.residual(state, geometry)

    def assemble_z(self, z: np.ndarray, base_geometry: GeometryField) -> ResidualSystem:
        state, geometry = self.unpack(z, base_geometry)
        return self.assemble(state, geometry)


def assemble(
    model: FluxModel,
    mesh: ReferenceMesh,
    geometry: GeometryField,
    state: FieldState,
    quad: QuadratureRule,
    moving: bool = False,
    bc_left: BoundaryCondition | None = None,
    bc_right: BoundaryCondition | None = None,
    source: SourceTerm | None = None,
    degree_sigma: int | None = None,
) -> ResidualSystem:
    """One-shot assembly of the residual system (see Discretization.assemble)."""
    degree_y = state.y_coeffs.shape[2] - 1
    if degree_sigma is None and state.sigma_coeffs is not None:
        degree_sigma = state.sigma_coeffs.shape[2] - 1
    disc = Discretization(
        model,
        mesh,
        degree_y=degree_y,
        degree_sigma=degree_sigma,
        degree_geometry=geometry.degree,
        quad=quad,
        bc_left=bc_left,
        bc_right=bc_right,
        source=source,
        moving=moving,
    )
    return disc.assemble(state, geometry)


def jacobian_check(disc: Discretization, state: FieldState, geometry: GeometryField, step: float = 1e-6) -> float:
    """Max discrepancy between the assembled Jacobian and central differences.

    Differences are taken through the packed unknown vector, with the
    geometry routed through the boundary projection exactly as the solver
    applies it; the result is normalized by the largest Jacobian entry.
    """
    z0 = disc.pack(state, geometry)
    rs = disc.assemble_z(z0, geometry)
    dense = rs.jac.toarray()
    fd = np.zeros_like(dense)
    for j in range(disc.n_unknowns):
        h = step * max(1.0, abs(z0[j]))
        zp = z0.copy()
        zp[j] += h
        zm = z0.copy()
        zm[j] -= h
        fd[:, j] = (disc.residual_z(zp, geometry) - disc.residual_z(zm, geometry)) / (2.0 * h)
    scale = max(1.0, np.abs(dense).max())
    return float(np.abs(dense - fd).max() / scale)


def assemble_dls(
    model: FluxModel,
    mesh: ReferenceMesh,
    geometry: GeometryField,
    quad: QuadratureRule,
    degree_y: int,
    test_degree: int,
    y_in: float,
    source: SourceTerm | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Project the strong advection residual onto an a-priori polynomial test basis.

    Returns (B, ell) with the rows of B c - ell being, per cell, the inner
    products of the reference-space residual against a standard nodal
    finite-element test basis of the given degree, plus one scalar row per
    interior interface and one for the inflow value.  With test_degree = p
    this is the rectangular equal-order formulation (sub-optimal under
    refinement); with test_degree = p - 1 the square system whose solution
    coincides with the least-squares minimizer.
    """
    if not isinstance(model, AdvectionDiffusionModel) or model.viscous:
        raise ConfigError("assemble_dls supports the linear pure-advection model only")
    from .basis import NodalBasis

    v = model.velocity
    C = mesh.cell_count
    ny = degree_y + 1
    basis_y = ModalBasis(degree_y)
    basis_t = ModalBasis(0) if test_degree == 0 else NodalBasis(test_degree)
    Vy, Dy = basis_y.eval(quad.points)
    Vt, _ = basis_t.eval(quad.points)
    Vy_end, _ = basis_y.eval(np.array([0.0, 1.0]))
    Vu, Du = geometry.basis.eval(quad.points)

    nt = test_degree + 1
    n_rows = C * nt + (C - 1) + 1
    B = np.zeros((n_rows, C * ny))
    ell = np.zeros(n_rows)
    w = quad.weights

    for c in range(C):
        cd = geometry.cell_dofs(c)
        x_q = Vu @ cd
        du_q = Du @ cd
        rows = slice(c * nt, (c + 1) * nt)
        cols = slice(c * ny, (c + 1) * ny)
        B[rows, cols] = np.einsum("q,qt,qj->tj", w, Vt, v * Dy)
        if source is not None:
            f_q = source.value(x_q)[:, 0]
            ell[c * nt : (c + 1) * nt] = np.einsum("q,qt,q->t", w, Vt, du_q * f_q)

    off = C * nt
    for k in range(1, C):
        B[off + k - 1, (k - 1) * ny : k * ny] = v * Vy_end[1]
        B[off + k - 1, k * ny : (k + 1) * ny] = -v * Vy_end[0]
    B[off + C - 1, 0:ny] = v * Vy_end[0]
    ell[off + C - 1] = v * y_in
    return B, ell
