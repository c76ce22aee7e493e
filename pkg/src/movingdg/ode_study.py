"""Static-grid ODE integration study comparing three weak formulations.

The problem is y' = f on (0, 1) with f = y_exact' for a fixed degree-6
polynomial and the inflow value y(0) prescribed.  Three routes to a
discrete solution are compared on uniform grids:

  equal_order   -- strong residual tested against polynomials of the trial
                   degree p plus interface scalars; rectangular, solved in
                   the discrete least-squares sense,
  reduced_order -- tested against degree p-1 plus interface scalars; square,
  trial_to_test -- the least-squares normal equations with test functions
                   generated by the trial-to-test operator.

The reduced-order and trial-to-test solutions coincide and converge at
order p+1; the equal-order discrete least-squares route converges
sub-optimally.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .assembly import Discretization, SourceTerm, assemble_dls, dirichlet, outflow
from .basis import gauss_rule
from .errors import ConfigError, SolveFailure
from .mesh import ReferenceMesh, uniform_geometry
from .oracles import convergence_rate, l2_error, ode_polynomial
from .physics import AdvectionDiffusionModel
from .solver import solve_linear_spd

FORMULATIONS = ("equal_order", "reduced_order", "trial_to_test")


@dataclass
class OdeStudyConfig:
    degree: int = 2
    cells: tuple = (2, 4, 8, 16, 32, 64, 128, 256, 512)
    formulations: tuple = FORMULATIONS
    quad_points: int = 8  # over-integrated so the degree-6 data is exact

    def __post_init__(self):
        if self.degree < 1:
            raise ConfigError(f"trial degree must be >= 1, got {self.degree}")
        if any(c < 2 for c in self.cells):
            raise ConfigError("refinement levels need at least 2 cells")
        unknown = set(self.formulations) - set(FORMULATIONS)
        if unknown:
            raise ConfigError(f"unknown formulations: {sorted(unknown)}")


def _polynomial_source() -> tuple[SourceTerm, float]:
    poly, dpoly = ode_polynomial()
    d2poly = dpoly.deriv()
    source = SourceTerm(
        value=lambda x: dpoly(np.asarray(x, dtype=float))[..., None],
        derivative=lambda x: d2poly(np.asarray(x, dtype=float))[..., None],
    )
    return source, float(poly(0.0))


def solve_ode_formulation(formulation: str, n_cells: int, degree: int, quad_points: int = 8) -> np.ndarray:
    """Discrete solution coefficients (n_cells, 1, degree+1) for one route."""
    mesh = ReferenceMesh(n_cells)
    geometry = uniform_geometry(n_cells, (0.0, 1.0), degree=1)
    quad = gauss_rule(quad_points)
    model = AdvectionDiffusionModel(velocity=1.0, diffusivity=0.0)
    source, y_in = _polynomial_source()

    if formulation == "trial_to_test":
        disc = Discretization(
            model,
            mesh,
            degree_y=degree,
            degree_geometry=1,
            quad=quad,
            bc_left=dirichlet([y_in]),
            bc_right=outflow(),
            source=source,
            moving=False,
        )
        state = disc.zero_state()
        rs = disc.assemble(state, geometry)
        # linear residual: one exact Gauss-Newton step is the minimizer
        delta = solve_linear_spd((rs.jac.T @ rs.jac).tocsr(), -(rs.jac.T @ rs.r))
        return delta.reshape(n_cells, 1, degree + 1)

    test_degree = degree if formulation == "equal_order" else degree - 1
    B, ell = assemble_dls(model, mesh, geometry, quad, degree, test_degree, y_in, source)
    if formulation == "reduced_order":
        try:
            coeffs = scipy.linalg.solve(B, ell)
        except (scipy.linalg.LinAlgError, ValueError) as exc:
            raise SolveFailure(f"square optimal-test system is singular: {exc}") from exc
        return coeffs.reshape(n_cells, 1, degree + 1)

    # equal order: normal equations with column scaling for conditioning
    gram = B.T @ B
    col_scale = 1.0 / np.sqrt(np.diag(gram))
    scaled = gram * col_scale[:, None] * col_scale[None, :]
    rhs = col_scale * (B.T @ ell)
    coeffs = col_scale * solve_linear_spd(scaled, rhs)
    return coeffs.reshape(n_cells, 1, degree + 1)


def run_ode_study(cfg: OdeStudyConfig | None = None) -> list[dict]:
    """Error/rate table per formulation and refinement level."""
    cfg = cfg if cfg is not None else OdeStudyConfig()
    poly, _ = ode_polynomial()
    error_quad = gauss_rule(cfg.quad_points + 4)
    rows = []
    for formulation in cfg.formulations:
        errors = []
        for n_cells in cfg.cells:
            coeffs = solve_ode_formulation(formulation, n_cells, cfg.degree, cfg.quad_points)
            geometry = uniform_geometry(n_cells, (0.0, 1.0), degree=1)
            err = l2_error(coeffs, geometry, lambda x: poly(x), error_quad)
            errors.append((1.0 / n_cells, err))
        rates = [np.nan] + convergence_rate(errors)
        for (h, err), rate, n_cells in zip(errors, rates, cfg.cells):
            rows.append(
                {
                    "formulation": formulation,
                    "cells": n_cells,
                    "h": h,
                    "error": err,
                    "rate": rate,
                }
            )
    return rows


def asymptotic_rate(rows: list[dict], formulation: str, last: int = 3) -> float:
    """Mean of the last pairwise rates for one formulation."""
    rates = [row["rate"] for row in rows if row["formulation"] == formulation and np.isfinite(row["rate"])]
    if len(rates) < last:
        raise ConfigError(f"not enough levels to average {last} rates")
    return float(np.mean(rates[-last:]))
