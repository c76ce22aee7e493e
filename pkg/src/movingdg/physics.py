"""Flux models: linear advection-diffusion, viscous Burgers, 1D compressible Navier-Stokes.

Each model supplies the convective flux F^c(y), a modified viscous flux
Fv(y, sigma) expressed in the auxiliary variable, the constitutive map
G(y) g taking a spatial-gradient sample g to the auxiliary-variable target,
and the exact derivatives of all three needed by the Gauss-Newton
linearization.  The total flux is F(y, sigma) = F^c(y) - Fv(y, sigma).

State arrays carry the component axis last, shape (..., m), so every method
works on batches of samples (all quadrature points of all cells at once).

For the scalar models the constitutive map is plain diffusion,
G(y) g = eps * g, and Fv(y, sigma) = sigma.  For Navier-Stokes the
auxiliary variable bundles the (scaled) viscous stress and heat flux:
G(y) grad(y) = mu_inf^(-1/2) * (0, tau, -q) with tau = (4/3) mu dv/dx and
q = -k dT/dx in one dimension, and the viscous flux is recovered as
Fv(y, sigma) = mu_inf^(1/2) * (sigma_1, sigma_2, sigma_2 v + sigma_3).
"""

from __future__ import annotations

import abc
from dataclasses import dataclass

import numpy as np

from .errors import AdmissibilityError, ConfigError

ADMISSIBILITY_FLOOR = 1e-12


class FluxModel(abc.ABC):
    """Common contract for the pluggable physics definitions."""

    m: int
    viscous: bool

    # -- fluxes ---------------------------------------------------------
    @abc.abstractmethod
    def convective_flux(self, y: np.ndarray) -> np.ndarray:
        """F^c(y), shape (..., m)."""

    @abc.abstractmethod
    def convective_jacobian(self, y: np.ndarray) -> np.ndarray:
        """dF^c/dy, shape (..., m, m)."""

    @abc.abstractmethod
    def modified_viscous_flux(self, y: np.ndarray, sigma: np.ndarray) -> np.ndarray:
        """Fv(y, sigma), shape (..., m)."""

    @abc.abstractmethod
    def viscous_state_jacobian(self, y: np.ndarray, sigma: np.ndarray) -> np.ndarray:
        """dFv/dy, shape (..., m, m)."""

    @abc.abstractmethod
    def viscous_sigma_jacobian(self, y: np.ndarray, sigma: np.ndarray) -> np.ndarray:
        """dFv/dsigma, shape (..., m, m)."""

    # -- constitutive map -----------------------------------------------
    @abc.abstractmethod
    def constitutive_matrix(self, y: np.ndarray) -> np.ndarray:
        """G(y) as a matrix acting on gradient samples, shape (..., m, m)."""

    @abc.abstractmethod
    def constitutive_state_jacobian(self, y: np.ndarray, g: np.ndarray) -> np.ndarray:
        """M with M[i, k] = d(G(y) g)_i / dy_k at fixed g, shape (..., m, m)."""

    @abc.abstractmethod
    def primal_viscous_flux(self, y: np.ndarray, grad_y: np.ndarray) -> np.ndarray:
        """F^v(y, grad y) of the primal formulation, for consistency checks."""

    # -- admissibility ---------------------------------------------------
    def admissible(self, y: np.ndarray) -> np.ndarray:
        """Boolean mask of admissible samples (True where usable)."""
        return np.ones(np.asarray(y).shape[:-1], dtype=bool)

    def require_admissible(self, y: np.ndarray, where: str = "") -> None:
        ok = self.admissible(y)
        if not np.all(ok):
            raise AdmissibilityError(f"inadmissible state{' at ' + where if where else ''}")

    # -- derived conveniences ---------------------------------------------
    def flux(self, y: np.ndarray, sigma: np.ndarray) -> np.ndarray:
        """Total flux F(y, sigma) = F^c(y) - Fv(y, sigma)."""
        return self.convective_flux(y) - self.modified_viscous_flux(y, sigma)

    def flux_jacobians(self, y: np.ndarray, sigma: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """(dF/dy, dF/dsigma) of the total flux."""
        fy = self.convective_jacobian(y) - self.viscous_state_jacobian(y, sigma)
        fs = -self.viscous_sigma_jacobian(y, sigma)
        return fy, fs

    def flux_jacobians_dxi(
        self, y: np.ndarray, sigma: np.ndarray, dy: np.ndarray, dsigma: np.ndarray
    ) -> tuple[np.ndarray, np.ndarray]:
        """Total xi-derivatives of (dF/dy, dF/dsigma) along a solution curve.

        These are exactly the state/auxiliary second-derivative contractions
        that appear in the linearized conservation residual: by symmetry of
        second derivatives, d(F_y y' + F_sigma sigma')/dy = d/dxi [F_y] and
        likewise for sigma.
        """
        raise NotImplementedError

    def constitutive_apply(self, y: np.ndarray, g: np.ndarray) -> np.ndarray:
        """G(y) g, shape (..., m)."""
        return np.einsum("...ik,...k->...i", self.constitutive_matrix(y), g)

    def constitutive_state_derivative(self, y: np.ndarray, g: np.ndarray, dy: np.ndarray) -> np.ndarray:
        """(G'(y) dy) g, the directional state derivative of the constitutive map."""
        return np.einsum("...ik,...k->...i", self.constitutive_state_jacobian(y, g), dy)


def rankine_hugoniot_defect(model: FluxModel, y_left: np.ndarray, y_right: np.ndarray) -> np.ndarray:
    """Normal-flux jump F^c(y_left) - F^c(y_right) for a steady inviscid interface."""
    model.require_admissible(np.asarray(y_left, dtype=float))
    model.require_admissible(np.asarray(y_right, dtype=float))
    return model.convective_flux(np.asarray(y_left, dtype=float)) - model.convective_flux(
        np.asarray(y_right, dtype=float)
    )


@dataclass(frozen=True)
class FluxDerivatives:
    """Linearizations of one (y, sigma) sample, as the spec's derivative bundle."""

    convective: np.ndarray          # dF^c/dy
    viscous_state: np.ndarray       # dFv/dy
    viscous_sigma: np.ndarray       # dFv/dsigma
    constitutive_state: np.ndarray  # callable-free: d(G(y) g)/dy needs g; see apply_g


def derivatives(model: FluxModel, y: np.ndarray, sigma: np.ndarray, g: np.ndarray | None = None) -> FluxDerivatives:
    """Bundle all model linearizations at one state.

    The constitutive state derivative depends on the gradient sample g it
    acts on; when g is omitted the zero sample is used.
    """
    y = np.asarray(y, dtype=float)
    sigma = np.asarray(sigma, dtype=float)
    model.require_admissible(y)
    if g is None:
        g = np.zeros_like(y)
    return FluxDerivatives(
        convective=model.convective_jacobian(y),
        viscous_state=model.viscous_state_jacobian(y, sigma),
        viscous_sigma=model.viscous_sigma_jacobian(y, sigma),
        constitutive_state=model.constitutive_state_jacobian(y, np.asarray(g, dtype=float)),
    )


# ---------------------------------------------------------------------------
# scalar models
# ---------------------------------------------------------------------------


class AdvectionDiffusionModel(FluxModel):
    """Single-component linear advection with mass diffusivity eps = 1/Pe.

    With eps = 0 the model is pure advection and the auxiliary variable is
    dropped entirely by the assembly.
    """

    m = 1

    def __init__(self, velocity: float = 1.0, diffusivity: float = 0.1):
        if diffusivity < 0:
            raise ConfigError(f"diffusivity must be nonnegative, got {diffusivity}")
        self.velocity = float(velocity)
        self.diffusivity = float(diffusivity)
        self.viscous = diffusivity > 0

    def convective_flux(self, y):
        return self.velocity * np.asarray(y, dtype=float)

    def convective_jacobian(self, y):
        y = np.asarray(y, dtype=float)
        return np.broadcast_to(self.velocity, y.shape[:-1] + (1, 1)).copy()

    def modified_viscous_flux(self, y, sigma):
        return np.asarray(sigma, dtype=float).copy()

    def viscous_state_jacobian(self, y, sigma):
        return np.zeros(np.asarray(y).shape[:-1] + (1, 1))

    def viscous_sigma_jacobian(self, y, sigma):
        out = np.zeros(np.asarray(y).shape[:-1] + (1, 1))
        out[..., 0, 0] = 1.0
        return out

    def flux_jacobians_dxi(self, y, sigma, dy, dsigma):
        z = np.zeros(np.asarray(y).shape[:-1] + (1, 1))
        return z, z.copy()

    def constitutive_matrix(self, y):
        out = np.zeros(np.asarray(y).shape[:-1] + (1, 1))
        out[..., 0, 0] = self.diffusivity
        return out

    def constitutive_state_jacobian(self, y, g):
        return np.zeros(np.asarray(y).shape[:-1] + (1, 1))

    def primal_viscous_flux(self, y, grad_y):
        return self.diffusivity * np.asarray(grad_y, dtype=float)


class BurgersModel(FluxModel):
    """Viscous Burgers flow: F^c(y) = y^2 / 2 with linear viscosity eps."""

    m = 1
    viscous = True

    def __init__(self, viscosity: float):
        if viscosity <= 0:
            raise ConfigError(f"Burgers viscosity must be positive, got {viscosity}")
        self.viscosity = float(viscosity)

    def convective_flux(self, y):
        y = np.asarray(y, dtype=float)
        return 0.5 * y * y

    def convective_jacobian(self, y):
        return np.asarray(y, dtype=float)[..., None]

    def modified_viscous_flux(self, y, sigma):
        return np.asarray(sigma, dtype=float).copy()

    def viscous_state_jacobian(self, y, sigma):
        return np.zeros(np.asarray(y).shape[:-1] + (1, 1))

    def viscous_sigma_jacobian(self, y, sigma):
        out = np.zeros(np.asarray(y).shape[:-1] + (1, 1))
        out[..., 0, 0] = 1.0
        return out

    def flux_jacobians_dxi(self, y, sigma, dy, dsigma):
        dfy = np.asarray(dy, dtype=float)[..., None].copy()
        return dfy, np.zeros_like(dfy)

    def constitutive_matrix(self, y):
        out = np.zeros(np.asarray(y).shape[:-1] + (1, 1))
        out[..., 0, 0] = self.viscosity
        return out

    def constitutive_state_jacobian(self, y, g):
        return np.zeros(np.asarray(y).shape[:-1] + (1, 1))

    def primal_viscous_flux(self, y, grad_y):
        return self.viscosity * np.asarray(grad_y, dtype=float)


# ---------------------------------------------------------------------------
# compressible Navier-Stokes in one dimension
# ---------------------------------------------------------------------------


class NavierStokes1DModel(FluxModel):
    """1D compressible Navier-Stokes, nondimensionalized by freestream quantities.

    Freestream density, temperature and sound speed are all one, so the
    velocity equals the Mach number, the pressure is p_inf = 1/gamma and the
    gas constant is R = 1/gamma.  The dynamic viscosity is the constant
    mu = v_inf / Re (unit reference length, unit freestream density) and the
    thermal conductivity follows from the Prandtl number,
    k = gamma R mu / ((gamma - 1) Pr).
    """

    m = 3
    viscous = True

    def __init__(self, mach: float, reynolds: float, prandtl: float = 0.72, gamma: float = 1.4):
        if mach <= 0 or reynolds <= 0 or prandtl <= 0:
            raise ConfigError("Mach, Reynolds and Prandtl numbers must be positive")
        self.mach = float(mach)
        self.reynolds = float(reynolds)
        self.prandtl = float(prandtl)
        self.gamma = float(gamma)
        self.gas_constant = 1.0 / gamma
        self.mu = mach / reynolds
        self.mu_inf = self.mu
        self.conductivity = self.gamma * self.gas_constant * self.mu / ((gamma - 1.0) * prandtl)

    # -- primitive quantities -------------------------------------------
    def velocity(self, y):
        return y[..., 1] / y[..., 0]

    def pressure(self, y):
        return (self.gamma - 1.0) * (y[..., 2] - 0.5 * y[..., 1] ** 2 / y[..., 0])

    def temperature(self, y):
        return self.pressure(y) / (self.gas_constant * y[..., 0])

    def stagnation_enthalpy(self, y):
        return (y[..., 2] + self.pressure(y)) / y[..., 0]

    def primitive_to_conservative(self, rho: float, v: float, T: float) -> np.ndarray:
        p = self.gas_constant * rho * T
        return np.array([rho, rho * v, p / (self.gamma - 1.0) + 0.5 * rho * v * v])

    def conservative_to_primitive(self, y) -> np.ndarray:
        y = np.asarray(y, dtype=float)
        return np.stack([y[..., 0], self.velocity(y), self.temperature(y)], axis=-1)

    def admissible(self, y):
        y = np.asarray(y, dtype=float)
        return (y[..., 0] > ADMISSIBILITY_FLOOR) & (self.pressure(y) > ADMISSIBILITY_FLOOR)

    # -- fluxes ----------------------------------------------------------
    def convective_flux(self, y):
        y = np.asarray(y, dtype=float)
        v = self.velocity(y)
        p = self.pressure(y)
        return np.stack([y[..., 1], y[..., 1] * v + p, (y[..., 2] + p) * v], axis=-1)

    def convective_jacobian(self, y):
        y = np.asarray(y, dtype=float)
        v = self.velocity(y)
        H = self.stagnation_enthalpy(y)
        gm = self.gamma
        out = np.zeros(y.shape[:-1] + (3, 3))
        out[..., 0, 1] = 1.0
        out[..., 1, 0] = 0.5 * (gm - 3.0) * v * v
        out[..., 1, 1] = (3.0 - gm) * v
        out[..., 1, 2] = gm - 1.0
        out[..., 2, 0] = 0.5 * (gm - 1.0) * v**3 - v * H
        out[..., 2, 1] = H - (gm - 1.0) * v * v
        out[..., 2, 2] = gm * v
        return out

    def modified_viscous_flux(self, y, sigma):
        y = np.asarray(y, dtype=float)
        sigma = np.asarray(sigma, dtype=float)
        v = self.velocity(y)
        root_mu = np.sqrt(self.mu_inf)
        return root_mu * np.stack(
            [sigma[..., 0], sigma[..., 1], sigma[..., 1] * v + sigma[..., 2]], axis=-1
        )

    def viscous_state_jacobian(self, y, sigma):
        y = np.asarray(y, dtype=float)
        sigma = np.asarray(sigma, dtype=float)
        rho = y[..., 0]
        v = self.velocity(y)
        root_mu = np.sqrt(self.mu_inf)
        out = np.zeros(y.shape[:-1] + (3, 3))
        out[..., 2, 0] = root_mu * sigma[..., 1] * (-v / rho)
        out[..., 2, 1] = root_mu * sigma[..., 1] / rho
        return out

    def viscous_sigma_jacobian(self, y, sigma):
        y = np.asarray(y, dtype=float)
        v = self.velocity(y)
        root_mu = np.sqrt(self.mu_inf)
        out = np.zeros(y.shape[:-1] + (3, 3))
        out[..., 0, 0] = root_mu
        out[..., 1, 1] = root_mu
        out[..., 2, 1] = root_mu * v
        out[..., 2, 2] = root_mu
        return out

    def flux_jacobians_dxi(self, y, sigma, dy, dsigma):
        y = np.asarray(y, dtype=float)
        dy = np.asarray(dy, dtype=float)
        dsigma = np.asarray(dsigma, dtype=float)
        rho = y[..., 0]
        v = self.velocity(y)
        E = y[..., 2] / rho
        H = self.stagnation_enthalpy(y)
        drho = dy[..., 0]
        dv = (dy[..., 1] - v * drho) / rho
        dE = (dy[..., 2] - E * drho) / rho
        dH = self.gamma * dE - (self.gamma - 1.0) * v * dv
        gm = self.gamma
        root_mu = np.sqrt(self.mu_inf)

        dfy = np.zeros(y.shape[:-1] + (3, 3))
        dfy[..., 1, 0] = (gm - 3.0) * v * dv
        dfy[..., 1, 1] = (3.0 - gm) * dv
        dfy[..., 2, 0] = 1.5 * (gm - 1.0) * v * v * dv - dv * H - v * dH
        dfy[..., 2, 1] = dH - 2.0 * (gm - 1.0) * v * dv
        dfy[..., 2, 2] = gm * dv
        # minus the xi-derivative of the viscous state Jacobian
        dfy[..., 2, 0] -= root_mu * (dsigma[..., 1] * (-v / rho) + sigma[..., 1] * (v * drho - dv * rho) / rho**2)
        dfy[..., 2, 1] -= root_mu * (dsigma[..., 1] / rho - sigma[..., 1] * drho / rho**2)

        dfs = np.zeros(y.shape[:-1] + (3, 3))
        dfs[..., 2, 1] = -root_mu * dv
        return dfy, dfs

    # -- constitutive map -------------------------------------------------
    def constitutive_matrix(self, y):
        y = np.asarray(y, dtype=float)
        rho = y[..., 0]
        v = self.velocity(y)
        E = y[..., 2] / rho
        inv_root_mu = 1.0 / np.sqrt(self.mu_inf)
        c_tau = inv_root_mu * (4.0 / 3.0) * self.mu / rho
        c_T = inv_root_mu * self.conductivity * (self.gamma - 1.0) / (self.gas_constant * rho)
        out = np.zeros(y.shape[:-1] + (3, 3))
        out[..., 1, 0] = -c_tau * v
        out[..., 1, 1] = c_tau
        out[..., 2, 0] = c_T * (v * v - E)
        out[..., 2, 1] = -c_T * v
        out[..., 2, 2] = c_T
        return out

    def constitutive_state_jacobian(self, y, g):
        y = np.asarray(y, dtype=float)
        g = np.asarray(g, dtype=float)
        rho = y[..., 0]
        v = self.velocity(y)
        E = y[..., 2] / rho
        cT = (self.gamma - 1.0) / self.gas_constant
        Dv = (g[..., 1] - v * g[..., 0]) / rho
        DT = cT / rho * (g[..., 2] - v * g[..., 1] + (v * v - E) * g[..., 0])
        inv_root_mu = 1.0 / np.sqrt(self.mu_inf)

        # columns: state perturbation e_k expressed through (dv, dE, drho)
        dv_k = np.stack([-v / rho, 1.0 / rho, np.zeros_like(rho)], axis=-1)
        dE_k = np.stack([-E / rho, np.zeros_like(rho), 1.0 / rho], axis=-1)
        one_k = np.zeros(y.shape[:-1] + (3,))
        one_k[..., 0] = 1.0

        dDv = -(g[..., 0:1] * dv_k) / rho[..., None] - (Dv / rho)[..., None] * one_k
        dDT = (cT / rho)[..., None] * (
            -dv_k * g[..., 1:2] + (2.0 * v[..., None] * dv_k - dE_k) * g[..., 0:1]
        ) - (DT / rho)[..., None] * one_k

        out = np.zeros(y.shape[:-1] + (3, 3))
        out[..., 1, :] = inv_root_mu * (4.0 / 3.0) * self.mu * dDv
        out[..., 2, :] = inv_root_mu * self.conductivity * dDT
        return out

    def primal_viscous_flux(self, y, grad_y):
        y = np.asarray(y, dtype=float)
        g = np.asarray(grad_y, dtype=float)
        rho = y[..., 0]
        v = self.velocity(y)
        E = y[..., 2] / rho
        dv = (g[..., 1] - v * g[..., 0]) / rho
        dT = (self.gamma - 1.0) / self.gas_constant / rho * (
            g[..., 2] - v * g[..., 1] + (v * v - E) * g[..., 0]
        )
        tau = (4.0 / 3.0) * self.mu * dv
        q = -self.conductivity * dT
        return np.stack([np.zeros_like(tau), tau, tau * v - q], axis=-1)


def normal_shock_states(model: NavierStokes1DModel) -> tuple[np.ndarray, np.ndarray]:
    """Upstream/downstream primitive states (rho, v, T) of a steady normal shock."""
    gm = model.gamma
    M2 = model.mach**2
    rho_ratio = (gm + 1.0) * M2 / ((gm - 1.0) * M2 + 2.0)
    p_ratio = (2.0 * gm * M2 - (gm - 1.0)) / (gm + 1.0)
    left = np.array([1.0, model.mach, 1.0])
    right = np.array([rho_ratio, model.mach / rho_ratio, p_ratio / rho_ratio])
    return left, right
