"""Experiment drivers: boundary layer, Burgers shock, Navier-Stokes shock.

Each driver builds the discretization, the initialization prescribed for
the experiment, runs the solve and returns plain records; the CLI and the
demo scripts format them.  Initializations: the boundary layer starts from
the linear interpolant of its boundary data on a uniform grid, the two
shock problems start from piecewise-constant left/right states split at
the cell centroid, and the auxiliary flux always starts at zero.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .assembly import Discretization, FieldState, dirichlet
from .basis import gauss_rule
from .errors import SolveFailure
from .mesh import GeometryField, ReferenceMesh, uniform_geometry
from .oracles import (
    ShockProfile,
    boundary_layer_exact,
    burgers_exact,
    convergence_rate,
    l2_error,
    l2_project,
    ns_shock_ode_oracle,
)
from .physics import AdvectionDiffusionModel, BurgersModel, NavierStokes1DModel, normal_shock_states
from .solver import SolveReport, SolverConfig, gauss_newton_solve

log = logging.getLogger(__name__)

ERROR_QUAD = gauss_rule(24)


@dataclass
class RunResult:
    state: FieldState
    geometry: GeometryField
    report: SolveReport
    disc: Discretization


def _check_report(report: SolveReport, what: str) -> None:
    if report.stalled:
        raise SolveFailure(f"{what}: solver stalled (objective {report.objective:.3e}, grad {report.grad_norm:.3e})")


def sample_solution(state: FieldState, geometry: GeometryField, points_per_cell: int = 20):
    """Pointwise (x, y) samples on every cell, including both one-sided traces."""
    from .assembly import evaluate_field
    from .basis import ModalBasis

    xi = np.linspace(0.0, 1.0, points_per_cell)
    degree = state.y_coeffs.shape[2] - 1
    y_vals, _ = evaluate_field(state.y_coeffs, ModalBasis(degree), xi)
    Vu, _ = geometry.basis.eval(xi)
    xs, ys = [], []
    for c in range(geometry.cell_count):
        xs.append(Vu @ geometry.cell_dofs(c))
        ys.append(y_vals[c])
    return np.concatenate(xs), np.concatenate(ys, axis=0)


# ---------------------------------------------------------------------------
# boundary layer (linear advection-diffusion)
# ---------------------------------------------------------------------------


def boundary_layer_discretization(
    pe: float,
    n_cells: int,
    degree: int,
    moving: bool,
    degree_geometry: int | None = None,
) -> tuple[Discretization, GeometryField]:
    model = AdvectionDiffusionModel(velocity=1.0, diffusivity=1.0 / pe)
    mesh = ReferenceMesh(n_cells)
    disc = Discretization(
        model,
        mesh,
        degree_y=degree,
        degree_geometry=degree_geometry if moving else 1,
        bc_left=dirichlet([0.0]),
        bc_right=dirichlet([1.0]),
        moving=moving,
    )
    geometry = uniform_geometry(n_cells, (0.0, 1.0), degree=disc.degree_geometry)
    return disc, geometry


def linear_profile_state(disc: Discretization, geometry: GeometryField, y_left: float, y_right: float) -> FieldState:
    x0, x1 = geometry.domain_bounds
    slope = (y_right - y_left) / (x1 - x0)
    y = l2_project(lambda x: y_left + slope * (x - x0), geometry, disc.degree_y, disc.quad, m=1)
    state = disc.zero_state()
    state.y_coeffs[:] = y
    return state


def solve_boundary_layer(
    pe: float,
    n_cells: int,
    degree: int,
    moving: bool,
    cfg: SolverConfig | None = None,
    init: tuple[FieldState, GeometryField] | None = None,
) -> RunResult:
    disc, geometry = boundary_layer_discretization(pe, n_cells, degree, moving)
    if init is not None:
        state, geometry = init
        state = state.copy()
    else:
        state = linear_profile_state(disc, geometry, 0.0, 1.0)
    if cfg is None:
        cfg = SolverConfig(max_iters=800) if moving else SolverConfig(max_iters=10)
    state, geometry, report = gauss_newton_solve(disc, state, geometry, cfg)
    _check_report(report, f"boundary layer Pe={pe} p={degree} cells={n_cells} moving={moving}")
    return RunResult(state=state, geometry=geometry, report=report, disc=disc)


def boundary_layer_convergence(
    pe: float,
    degrees,
    cells_list,
    moving: bool,
    cfg: SolverConfig | None = None,
) -> list[dict]:
    """Error/rate table under grid refinement, one case per degree."""
    rows = []
    for degree in degrees:
        errors = []
        for n_cells in cells_list:
            result = solve_boundary_layer(pe, n_cells, degree, moving, cfg)
            err = l2_error(result.state.y_coeffs, result.geometry, lambda x: boundary_layer_exact(pe, x), ERROR_QUAD)
            errors.append((1.0 / n_cells, err))
            log.info("boundary layer Pe=%g p=%d cells=%d moving=%s: error %.3e", pe, degree, n_cells, moving, err)
        rates = [np.nan] + convergence_rate(errors)
        case = f"moving_p{degree}" if moving else f"static_p{degree}"
        for (h, err), rate, n_cells in zip(errors, rates, cells_list):
            rows.append({"case": case, "p": degree, "cells": n_cells, "h": h, "l2_error": err, "rate": rate})
    return rows


def boundary_layer_two_cell(pe_values, degrees, cfg: SolverConfig | None = None) -> list[dict]:
    """Interior-interface positions of two-cell moving solves (thickness table).

    Solves are continued in Peclet number: each degree's sequence reuses
    the previous solution as the next initialization, which keeps the
    large-Pe solves on the same solution branch as the small-Pe ones.
    """
    rows = []
    for degree in degrees:
        init = None
        for pe in sorted(pe_values):
            result = solve_boundary_layer(pe, 2, degree, moving=True, cfg=cfg, init=init)
            init = (result.state, result.geometry)
            x_eps = float(result.geometry.vertices()[1])
            rows.append({"Pe": pe, "p": degree, "x_eps": x_eps})
            log.info("two-cell boundary layer Pe=%g p=%d: x_eps=%.17g", pe, degree, x_eps)
    return rows


# ---------------------------------------------------------------------------
# Burgers steady viscous shock
# ---------------------------------------------------------------------------


def burgers_discretization(eps: float, n_cells: int, degree: int, y_left: float = 1.0) -> tuple[Discretization, GeometryField]:
    model = BurgersModel(viscosity=eps)
    mesh = ReferenceMesh(n_cells)
    bounds = (-0.5, 0.5)
    disc = Discretization(
        model,
        mesh,
        degree_y=degree,
        degree_geometry=degree,
        bc_left=dirichlet([float(burgers_exact(eps, y_left, bounds[0]))]),
        bc_right=dirichlet([float(burgers_exact(eps, y_left, bounds[1]))]),
        moving=True,
    )
    return disc, uniform_geometry(n_cells, bounds, degree=degree)


def piecewise_constant_state(disc: Discretization, geometry: GeometryField, left_state, right_state, split: float = 0.0) -> FieldState:
    """Cellwise constant initialization chosen by the sign of the cell centroid."""
    left_state = np.atleast_1d(np.asarray(left_state, dtype=float))
    right_state = np.atleast_1d(np.asarray(right_state, dtype=float))
    state = disc.zero_state()
    vertices = geometry.vertices()
    centroids = 0.5 * (vertices[:-1] + vertices[1:])
    for c, xc in enumerate(centroids):
        state.y_coeffs[c, :, 0] = left_state if xc <= split else right_state
    return state


def solve_burgers(eps: float, n_cells: int, degree: int, cfg: SolverConfig | None = None, y_left: float = 1.0) -> RunResult:
    disc, geometry = burgers_discretization(eps, n_cells, degree, y_left)
    y_l = float(burgers_exact(eps, y_left, geometry.domain_bounds[0]))
    y_r = float(burgers_exact(eps, y_left, geometry.domain_bounds[1]))
    state = piecewise_constant_state(disc, geometry, [y_l], [y_r])
    if cfg is None:
        cfg = SolverConfig(max_iters=800)
    state, geometry, report = gauss_newton_solve(disc, state, geometry, cfg)
    _check_report(report, f"burgers eps={eps} p={degree} cells={n_cells}")
    return RunResult(state=state, geometry=geometry, report=report, disc=disc)


def burgers_convergence(eps: float, degree: int, cells_list, cfg: SolverConfig | None = None, y_left: float = 1.0) -> list[dict]:
    """Moving-grid solve errors plus uniform-grid L2 projection errors."""
    rows = []
    solve_errors = []
    project_errors = []
    exact = lambda x: burgers_exact(eps, y_left, x)  # noqa: E731
    for n_cells in cells_list:
        result = solve_burgers(eps, n_cells, degree, cfg, y_left)
        err = l2_error(result.state.y_coeffs, result.geometry, exact, ERROR_QUAD)
        solve_errors.append((1.0 / n_cells, err))
        uniform = uniform_geometry(n_cells, (-0.5, 0.5), degree=1)
        proj = l2_project(exact, uniform, degree, ERROR_QUAD)
        perr = l2_error(proj, uniform, exact, ERROR_QUAD)
        project_errors.append((1.0 / n_cells, perr))
        log.info("burgers eps=%g p=%d cells=%d: solve %.3e projection %.3e", eps, degree, n_cells, err, perr)
    for case, errors in (("moving", solve_errors), ("projection", project_errors)):
        rates = [np.nan] + convergence_rate(errors)
        for (h, err), rate, n_cells in zip(errors, rates, cells_list):
            rows.append({"case": case, "p": degree, "cells": n_cells, "h": h, "l2_error": err, "rate": rate})
    return rows


# ---------------------------------------------------------------------------
# Navier-Stokes viscous shock
# ---------------------------------------------------------------------------


def ns_shock_discretization(
    mach: float, reynolds: float, prandtl: float, n_cells: int, degree: int
) -> tuple[Discretization, GeometryField, NavierStokes1DModel]:
    model = NavierStokes1DModel(mach=mach, reynolds=reynolds, prandtl=prandtl)
    left, right = normal_shock_states(model)
    mesh = ReferenceMesh(n_cells)
    disc = Discretization(
        model,
        mesh,
        degree_y=degree,
        degree_geometry=degree,
        bc_left=dirichlet(model.primitive_to_conservative(*left)),
        bc_right=dirichlet(model.primitive_to_conservative(*right)),
        moving=True,
    )
    return disc, uniform_geometry(n_cells, (-1.0, 1.0), degree=degree), model


def solve_ns_shock(
    mach: float = 3.5,
    reynolds: float = 25.0,
    prandtl: float = 0.72,
    n_cells: int = 16,
    degree: int = 2,
    cfg: SolverConfig | None = None,
) -> RunResult:
    disc, geometry, model = ns_shock_discretization(mach, reynolds, prandtl, n_cells, degree)
    left, right = normal_shock_states(model)
    state = piecewise_constant_state(
        disc,
        geometry,
        model.primitive_to_conservative(*left),
        model.primitive_to_conservative(*right),
    )
    if cfg is None:
        cfg = SolverConfig(max_iters=1200)
    state, geometry, report = gauss_newton_solve(disc, state, geometry, cfg)
    _check_report(report, f"ns shock M={mach} Re={reynolds} p={degree} cells={n_cells}")
    return RunResult(state=state, geometry=geometry, report=report, disc=disc)


def shift_aligned_density_error(
    result: RunResult, profile: ShockProfile, points_per_cell: int = 40
) -> tuple[float, float]:
    """Minimum over shifts of the Linf density mismatch against the oracle,
    normalized by the density jump.  Returns (relative_error, shift)."""
    xs, ys = sample_solution(result.state, result.geometry, points_per_cell)
    rho_h = ys[:, 0]
    jump = abs(profile.downstream[0] - profile.upstream[0])

    def err(shift: float) -> float:
        return float(np.max(np.abs(rho_h - profile.sample(xs - shift)[:, 0])))

    coarse = np.linspace(-1.0, 1.0, 801)
    vals = [err(s) for s in coarse]
    best = coarse[int(np.argmin(vals))]
    fine = np.linspace(best - 0.005, best + 0.005, 401)
    vals = [err(s) for s in fine]
    best = fine[int(np.argmin(vals))]
    return err(best) / jump, float(best)


def ns_shock_oracle(mach: float = 3.5, reynolds: float = 25.0, prandtl: float = 0.72, step: float = 1e-4) -> ShockProfile:
    return ns_shock_ode_oracle(mach=mach, reynolds=reynolds, prandtl=prandtl, step=step)
