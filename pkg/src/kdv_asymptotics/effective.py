"""Derived constants of the slow dynamics and the solvability certificates.

On the equilibrium manifold the two strings move together as one effective
string with squared speed

    c^2 = (b k1 + a k2) / (a + b),

the weighted mean that makes b(c^2 - k1) + a(c^2 - k2) = 0 exactly.  A burst
riding a pseudo-characteristic x -+ c t additionally feels

    dispersion   K       = (c^2 - k1)(c^2 - k2) / (2 c (a + b))   (K <= 0)
    flux scaling gamma_h = (c^2 - k2) / (2 c (a + b))

with the nonlinear flux h(S) = gamma_h * f(S, (a/b) S).  These constants are
not taken on faith: `verify_order2_cancellation` substitutes the closures back
into the second-order solvability condition with spectral derivatives and
requires the residual to vanish to discretization accuracy.  Perturbing K or
gamma_h by 1%, or flipping gamma_h's sign, makes that residual many orders of
magnitude larger, so the oracle pins both constants including signs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial import Polynomial

from .core import Grid1D, NonlinearitySpec, PhysParams, Profile, evaluate_nonlinearity
from .errors import DerivationMismatch, SolvabilityBroken
from .spectral import spectral_derivative

#: |b(c^2-k1) + a(c^2-k2)| must stay below this times (a+b)*max(k1,k2).
SOLVABILITY_RTOL = 1e-12

#: Order-eps^2 residual must stay below this times the largest term.
ORDER2_RTOL = 1e-6


def effective_speed_squared(params: PhysParams) -> float:
    """c^2 = (b k1 + a k2)/(a + b); lies strictly between k1 and k2 unless equal."""
    return (params.b * params.k1 + params.a * params.k2) / (params.a + params.b)


def check_solvability(params: PhysParams) -> float:
    """Return |b(c^2-k1) + a(c^2-k2)| and fail if it is not numerically zero.

    The identity is exact algebra, so a violation signals an implementation
    bug rather than a modelling problem.
    """
    c2 = effective_speed_squared(params)
    residual = abs(params.b * (c2 - params.k1) + params.a * (c2 - params.k2))
    threshold = SOLVABILITY_RTOL * (params.a + params.b) * max(params.k1, params.k2)
    if residual >= threshold:
        raise SolvabilityBroken(
            f"cancellation residual {residual:.3e} exceeds {threshold:.3e}"
        )
    return residual


def dispersion_coefficient(params: PhysParams) -> float:
    """K = (c^2 - k1)(c^2 - k2) / (2 c (a + b)); zero iff k1 == k2, else negative."""
    c2 = effective_speed_squared(params)
    c = math.sqrt(c2)
    return (c2 - params.k1) * (c2 - params.k2) / (2.0 * c * (params.a + params.b))


def flux_scaling(params: PhysParams) -> float:
    """gamma_h = (c^2 - k2) / (2 c (a + b)), the scalar in h(S) = gamma_h f(S, aS/b)."""
    c2 = effective_speed_squared(params)
    c = math.sqrt(c2)
    return (c2 - params.k2) / (2.0 * c * (params.a + params.b))


@dataclass(frozen=True)
class EffectiveParams:
    """Derived constants: effective squared speed, dispersion, flux scaling."""

    c2: float
    c: float
    K: float
    gamma_h: float

    @classmethod
    def from_params(cls, params: PhysParams) -> "EffectiveParams":
        check_solvability(params)
        c2 = effective_speed_squared(params)
        return cls(
            c2=c2,
            c=math.sqrt(c2),
            K=dispersion_coefficient(params),
            gamma_h=flux_scaling(params),
        )


def nonlinear_flux(params: PhysParams, f: NonlinearitySpec) -> Polynomial:
    """The univariate flux h(S) = gamma_h * f(S, (a/b) S) as a polynomial in S."""
    gamma = flux_scaling(params)
    ratio = params.a / params.b
    degree = max((i + j for i, j, _ in f.terms), default=0)
    coeffs = np.zeros(degree + 1)
    for i, j, coeff in f.terms:
        coeffs[i + j] += gamma * coeff * ratio**j
    return Polynomial(coeffs)


def _default_oracle_grid() -> tuple[Grid1D, Profile]:
    # box and width sized so fourth spectral derivatives of the profile stay
    # far above the kappa^4-amplified roundoff floor
    return Grid1D(half_length=16.0, n=256), Profile(amplitude=1.0, width=2.0)


def order2_residual(
    params: PhysParams,
    f: NonlinearitySpec,
    profile: Profile | None = None,
    grid: Grid1D | None = None,
    K: float | None = None,
    gamma_h: float | None = None,
) -> tuple[float, float]:
    """Spectral residual of the order-eps^2 solvability condition.

    Builds the first-order closure S1v = ((c^2-k1) S0'' - f(S0, aS0/b))/b with
    S1u := 0, replaces dS0/dt by K S0''' - d/dz[gamma_h f(S0, aS0/b)], and
    evaluates

        (c^2-k1) S1u_zz - 2c S0u_zt + (c^2-k2) S1v_zz - 2c S0v_zt

    on the grid.  Returns (Linf residual, scale), where scale is the largest
    individual term.  K and gamma_h may be overridden to probe wrong constants.
    """
    if grid is None or profile is None:
        default_grid, default_profile = _default_oracle_grid()
        grid = grid or default_grid
        profile = profile or default_profile

    c2 = effective_speed_squared(params)
    c = math.sqrt(c2)
    if K is None:
        K = dispersion_coefficient(params)
    if gamma_h is None:
        gamma_h = flux_scaling(params)

    s0 = np.asarray(profile(grid.nodes), dtype=float)
    fval = evaluate_nonlinearity(f, s0, (params.a / params.b) * s0)
    fval = np.asarray(fval, dtype=float)

    s1v = ((c2 - params.k1) * spectral_derivative(s0, grid, 2) - fval) / params.b
    s0_t = K * spectral_derivative(s0, grid, 3) - spectral_derivative(
        gamma_h * fval, grid, 1
    )
    s0u_zt = spectral_derivative(s0_t, grid, 1)
    s0v_zt = (params.a / params.b) * s0u_zt

    terms = [
        -2.0 * c * s0u_zt,
        (c2 - params.k2) * spectral_derivative(s1v, grid, 2),
        -2.0 * c * s0v_zt,
    ]
    residual = np.abs(sum(terms)).max()
    scale = max(np.abs(t).max() for t in terms)
    return float(residual), float(scale)


def verify_order2_cancellation(
    params: PhysParams,
    f: NonlinearitySpec,
    profile: Profile | None = None,
    grid: Grid1D | None = None,
    K: float | None = None,
    gamma_h: float | None = None,
) -> float:
    """Run the order-eps^2 oracle and fail loudly on a wrong (K, gamma_h).

    Returns the residual normalized by the term scale; raises
    DerivationMismatch when it exceeds ORDER2_RTOL.
    """
    residual, scale = order2_residual(
        params, f, profile=profile, grid=grid, K=K, gamma_h=gamma_h
    )
    if scale == 0.0:
        return 0.0
    relative = residual / scale
    if relative > ORDER2_RTOL:
        raise DerivationMismatch(
            f"order-2 solvability residual {relative:.3e} of scale exceeds "
            f"{ORDER2_RTOL:.0e}; dispersion/flux constants are inconsistent"
        )
    return relative
