"""Exact and reference solutions, L2 projection, error norms and rates.

The viscous-shock reference profile integrates the steady 1D compressible
Navier-Stokes equations reduced to two first-order ODEs: with constant mass
flux rho v = mflux, integrating the momentum and energy equations once in x
gives

    (4/3) mu v' = mflux v + mflux R T / v - Pi,
    k T'        = mflux (cp T + v^2 / 2) - (4/3) mu v v' - mflux H0,

where Pi and H0 are the upstream momentum and stagnation-enthalpy fluxes.
Mass, momentum and total-enthalpy flux constancy are then built into the
reduction and double as implementation checks.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .basis import ModalBasis, QuadratureRule
from .errors import ConfigError, OracleError
from .mesh import GeometryField
from .physics import NavierStokes1DModel, normal_shock_states

OVERFLOW_SAFE_PECLET = 30.0


def boundary_layer_exact(pe: float, x) -> np.ndarray:
    """Steady convection-diffusion boundary-layer profile on (0, 1).

    y(x) = (1 - exp(x Pe)) / (1 - exp(Pe)); for large Pe the equivalent
    rescaled form (exp((x-1) Pe) - exp(-Pe)) / (1 - exp(-Pe)) avoids the
    overflow that makes the naive form numerically unstable.
    """
    x = np.asarray(x, dtype=float)
    if pe <= OVERFLOW_SAFE_PECLET:
        return (1.0 - np.exp(x * pe)) / (1.0 - np.exp(pe))
    return (np.exp((x - 1.0) * pe) - np.exp(-pe)) / (1.0 - np.exp(-pe))


def boundary_layer_derivative(pe: float, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if pe <= OVERFLOW_SAFE_PECLET:
        return -pe * np.exp(x * pe) / (1.0 - np.exp(pe))
    return pe * np.exp((x - 1.0) * pe) / (1.0 - np.exp(-pe))


def burgers_exact(eps: float, y_left: float, x) -> np.ndarray:
    """Stationary viscous-shock profile of Burgers flow (y_right = -y_left)."""
    x = np.asarray(x, dtype=float)
    y_right = -y_left
    return y_right + 0.5 * (y_left - y_right) * (1.0 - np.tanh((y_left - y_right) * x / (4.0 * eps)))


def ode_polynomial() -> tuple[np.polynomial.Polynomial, np.polynomial.Polynomial]:
    """Degree-6 product polynomial used by the static ODE integration study."""
    poly = np.polynomial.Polynomial.fromroots([0.1, 0.2, 0.3, 0.4, 0.5, 0.9])
    return poly, poly.deriv()


# ---------------------------------------------------------------------------
# Navier-Stokes viscous shock profile
# ---------------------------------------------------------------------------


@dataclass
class ShockProfile:
    """Tabulated (rho, v, T)(x), anchored so v equals the mean of the
    asymptotic velocities at x = 0; constant extension outside the window."""

    x: np.ndarray
    rho: np.ndarray
    v: np.ndarray
    T: np.ndarray
    upstream: np.ndarray    # primitive (rho, v, T)
    downstream: np.ndarray

    def sample(self, x_query) -> np.ndarray:
        """Primitive states (..., 3) at the query points (edges held constant)."""
        x_query = np.asarray(x_query, dtype=float)
        rho = np.interp(x_query, self.x, self.rho, left=self.rho[0], right=self.rho[-1])
        v = np.interp(x_query, self.x, self.v, left=self.v[0], right=self.v[-1])
        T = np.interp(x_query, self.x, self.T, left=self.T[0], right=self.T[-1])
        return np.stack([rho, v, T], axis=-1)

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["x", "rho", "v", "T"])
            for row in zip(self.x, self.rho, self.v, self.T):
                writer.writerow([f"{val:.17g}" for val in row])


def ns_shock_ode_oracle(
    mach: float,
    reynolds: float,
    prandtl: float = 0.72,
    step: float = 1e-4,
    gamma: float = 1.4,
    span_limit: float = 50.0,
) -> ShockProfile:
    """Fourth-order (RK4) integration of the steady viscous-shock ODE system."""
    if step <= 0:
        raise ConfigError(f"ODE step must be positive, got {step}")
    model = NavierStokes1DModel(mach=mach, reynolds=reynolds, prandtl=prandtl, gamma=gamma)
    left, right = normal_shock_states(model)
    rho_l, v_l, T_l = left
    _, v_r, T_r = right
    R = model.gas_constant
    mu, k = model.mu, model.conductivity
    cp = gamma * R / (gamma - 1.0)
    mflux = rho_l * v_l
    Pi = mflux * v_l + R * rho_l * T_l
    H0 = cp * T_l + 0.5 * v_l**2

    def rhs(state):
        v, T = state
        dv = (mflux * v + mflux * R * T / v - Pi) * 3.0 / (4.0 * mu)
        dT = (mflux * (cp * T + 0.5 * v * v) - (4.0 / 3.0) * mu * v * dv - mflux * H0) / k
        return np.array([dv, dT])

    # leave the upstream equilibrium along the slow unstable eigendirection
    eps_fd = 1e-7
    jac = np.empty((2, 2))
    base = np.array([v_l, T_l])
    for j in range(2):
        dp = base.copy()
        dp[j] += eps_fd
        dm = base.copy()
        dm[j] -= eps_fd
        jac[:, j] = (rhs(dp) - rhs(dm)) / (2 * eps_fd)
    eigvals, eigvecs = np.linalg.eig(jac)
    order = np.argsort(eigvals.real)
    if eigvals.real[order[0]] <= 0:
        raise OracleError("upstream state is not an unstable equilibrium")
    direction = eigvecs[:, order[0]].real
    if direction[0] > 0:
        direction = -direction
    state = base + 1e-8 * max(abs(v_l - v_r), 1.0) * direction / np.linalg.norm(direction)

    states = [state]
    n_max = int(span_limit / step)
    arrival_tol = 1e-9 * abs(v_r)
    for _ in range(n_max):
        k1 = rhs(state)
        k2 = rhs(state + 0.5 * step * k1)
        k3 = rhs(state + 0.5 * step * k2)
        k4 = rhs(state + step * k3)
        state = state + (step / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        states.append(state)
        if state[0] - v_r <= arrival_tol or state[0] > v_l or state[0] < v_r - arrival_tol:
            break
    states = np.array(states)
    v = states[:, 0]
    T = states[:, 1]
    if abs(v[-1] - v_r) > 1e-6 * abs(v_r):
        raise OracleError(
            f"shock profile failed to connect the asymptotic states (final v = {v[-1]:.12g}, target {v_r:.12g})"
        )
    x = step * np.arange(len(v))
    v_mid = 0.5 * (v_l + v_r)
    idx = int(np.searchsorted(-v, -v_mid))  # v is decreasing
    idx = min(max(idx, 1), len(v) - 1)
    frac = (v[idx - 1] - v_mid) / (v[idx - 1] - v[idx])
    x0 = x[idx - 1] + frac * step
    return ShockProfile(
        x=x - x0,
        rho=mflux / v,
        v=v,
        T=T,
        upstream=np.array([rho_l, v_l, T_l]),
        downstream=np.array(right),
    )


def shock_profile_fluxes(profile: ShockProfile, model: NavierStokes1DModel) -> dict:
    """Mass and total-enthalpy flux along the profile (constancy checks)."""
    R = model.gas_constant
    gamma = model.gamma
    mu, k = model.mu, model.conductivity
    cp = gamma * R / (gamma - 1.0)
    rho, v, T = profile.rho, profile.v, profile.T
    mflux = rho * v
    Pi = mflux * v + R * rho * T
    dv = (mflux * v + mflux * R * T / v - (mflux[0] * v[0] + R * rho[0] * T[0])) * 3.0 / (4.0 * mu)
    dT = (mflux * (cp * T + 0.5 * v * v) - (4.0 / 3.0) * mu * v * dv - mflux * (cp * T[0] + 0.5 * v[0] ** 2)) / k
    energy_flux = mflux * (cp * T + 0.5 * v * v) - (4.0 / 3.0) * mu * v * dv - k * dT
    return {"mass": mflux, "momentum": Pi - (4.0 / 3.0) * mu * dv, "energy": energy_flux}


# ---------------------------------------------------------------------------
# projection, error norms, rates
# ---------------------------------------------------------------------------


def _normalize_exact(exact, x: np.ndarray, m: int) -> np.ndarray:
    out = np.asarray(exact(x), dtype=float)
    if out.shape == x.shape:
        out = out[..., None]
    if out.shape != x.shape + (m,):
        raise ConfigError(f"exact solution returned shape {out.shape}, expected {x.shape + (m,)}")
    return out


def l2_error(y_coeffs: np.ndarray, geometry: GeometryField, exact, quad: QuadratureRule) -> float:
    """Physical-space L2 error via the mapped quadrature:
    sqrt(sum_c sum_q w_q u'(xi_q) |y_h(xi_q) - y(u(xi_q))|^2)."""
    n_cells, m, ny = y_coeffs.shape
    basis = ModalBasis(ny - 1)
    V, _ = basis.eval(quad.points)
    Vu, Du = geometry.basis.eval(quad.points)
    total = 0.0
    for c in range(n_cells):
        cd = geometry.cell_dofs(c)
        x_q = Vu @ cd
        du_q = Du @ cd
        y_h = y_coeffs[c] @ V.T  # (m, n_q)
        diff = y_h.T - _normalize_exact(exact, x_q, m)
        total += float(np.dot(quad.weights * du_q, np.sum(diff * diff, axis=-1)))
    return float(np.sqrt(total))


def l2_project(exact, geometry: GeometryField, degree: int, quad: QuadratureRule, m: int = 1) -> np.ndarray:
    """Cellwise orthogonal projection in the mapped inner product; returns
    modal coefficients of shape (n_cells, m, degree + 1)."""
    basis = ModalBasis(degree)
    V, _ = basis.eval(quad.points)
    Vu, Du = geometry.basis.eval(quad.points)
    coeffs = np.empty((geometry.cell_count, m, degree + 1))
    for c in range(geometry.cell_count):
        cd = geometry.cell_dofs(c)
        x_q = Vu @ cd
        du_q = Du @ cd
        w = quad.weights * du_q
        M = np.einsum("q,qi,qj->ij", w, V, V)
        target = _normalize_exact(exact, x_q, m)
        b = np.einsum("q,qi,qm->mi", w, V, target)
        coeffs[c] = np.linalg.solve(M, b.T).T
    return coeffs


def convergence_rate(errors) -> list[float]:
    """Pairwise observed orders log(e_i / e_{i+1}) / log(h_i / h_{i+1})."""
    errors = list(errors)
    if len(errors) < 2:
        raise ConfigError("need at least two (h, error) entries")
    rates = []
    for (h0, e0), (h1, e1) in zip(errors[:-1], errors[1:]):
        if min(h0, h1, e0, e1) <= 0:
            raise ConfigError("mesh sizes and errors must be positive")
        rates.append(float(np.log(e0 / e1) / np.log(h0 / h1)))
    return rates
