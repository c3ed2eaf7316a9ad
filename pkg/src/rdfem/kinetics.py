"""Schnakenberg reaction kinetics and linear (Turing) stability analysis.

Reaction terms f(u,v) = a - u + u^2 v and g(u,v) = b - u^2 v, their
unique positive equilibrium, the linearization there, the band of
diffusion-driven unstable squared wavenumbers, and the dispersion growth
rate used to validate simulations against theory.

On the unit square the Laplacian eigenmodes are cos(n pi x) cos(m pi y)
with eigenvalue pi^2 (n^2 + m^2); mode bookkeeping uses that scaling.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "SchnakenbergParams",
    "EquilibriumState",
    "TuringReport",
    "equilibrium",
    "reaction_eval",
    "dispersion_growth_rate",
    "dispersion_determinant",
    "turing_analysis",
]


@dataclass(frozen=True)
class SchnakenbergParams:
    """Constants of the two-species system: sources a, b, diffusivity ratio d,
    reaction strength gamma."""

    a: float
    b: float
    d: float
    gamma: float

    def __post_init__(self):
        if self.a < 0 or self.b < 0 or self.a + self.b <= 0:
            raise ValueError("need a, b >= 0 with a + b > 0")
        if self.d <= 0:
            raise ValueError("d must be positive")
        if self.gamma < 0:  # gamma = 0 turns the reaction off (linear probes)
            raise ValueError("gamma must be >= 0")


def reaction_eval(p: SchnakenbergParams, u, v):
    """Unscaled reaction terms (f, g); callers apply the gamma factor."""
    u2v = u * u * v
    return p.a - u + u2v, p.b - u2v


@dataclass(frozen=True)
class EquilibriumState:
    u_eq: float
    v_eq: float
    jac: np.ndarray  # rows (f_u, f_v), (g_u, g_v) at the equilibrium


def equilibrium(p: SchnakenbergParams) -> EquilibriumState:
    """Spatially homogeneous steady state (a+b, b/(a+b)^2) and its Jacobian."""
    u = p.a + p.b
    v = p.b / u**2
    jac = np.array(
        [
            [-1.0 + 2.0 * u * v, u * u],
            [-2.0 * u * v, -u * u],
        ]
    )
    jac.setflags(write=False)
    return EquilibriumState(u_eq=u, v_eq=v, jac=jac)


def dispersion_growth_rate(p: SchnakenbergParams, k2: float) -> float:
    """Largest real part of the eigenvalues of gamma*J - k^2*diag(1, d)."""
    jac = equilibrium(p).jac
    m = p.gamma * jac - k2 * np.diag([1.0, p.d])
    tr = m[0, 0] + m[1, 1]
    det = m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]
    disc = tr * tr - 4.0 * det
    if disc >= 0.0:
        return 0.5 * (tr + math.sqrt(disc))
    return 0.5 * tr


def dispersion_determinant(p: SchnakenbergParams, k2: float) -> float:
    """h(k^2) = d k^4 - gamma (d f_u + g_v) k^2 + gamma^2 det J; its roots
    are the band endpoints."""
    jac = equilibrium(p).jac
    fu, gv = jac[0, 0], jac[1, 1]
    det = jac[0, 0] * jac[1, 1] - jac[0, 1] * jac[1, 0]
    return p.d * k2 * k2 - p.gamma * (p.d * fu + gv) * k2 + p.gamma**2 * det


@dataclass
class TuringReport:
    """Outcome of the linear stability analysis for one parameter set.

    unstable_modes are the unit-square modes (n, m) whose squared
    wavenumber pi^2 (n^2+m^2) lies strictly inside the band; modes whose
    wavenumber sits within edge_rtol (relative) of a band endpoint are
    listed in near_edge_modes regardless of which side they fall on.
    """

    stable_without_diffusion: bool
    diffusion_driven_unstable: bool
    k2_minus: float
    k2_plus: float
    unstable_modes: list
    near_edge_modes: list
    mode_growth_rates: dict
    edge_rtol: float
    params: SchnakenbergParams = field(repr=False, default=None)

    def growth_rate_of(self, k2: float) -> float:
        return dispersion_growth_rate(self.params, k2)

    def fastest_mode(self):
        if not self.unstable_modes:
            return None
        return max(self.unstable_modes, key=lambda nm: self.mode_growth_rates[nm])

    def to_json_dict(self) -> dict:
        fastest = self.fastest_mode()
        return {
            "stable_without_diffusion": bool(self.stable_without_diffusion),
            "diffusion_driven_unstable": bool(self.diffusion_driven_unstable),
            "k2_minus": float(self.k2_minus) if math.isfinite(self.k2_minus) else None,
            "k2_plus": float(self.k2_plus) if math.isfinite(self.k2_plus) else None,
            "unstable_modes": [[int(n), int(m)] for n, m in self.unstable_modes],
            "near_edge_modes": [[int(n), int(m)] for n, m in self.near_edge_modes],
            "growth_rate": (
                float(self.mode_growth_rates[fastest]) if fastest is not None else None
            ),
        }


def turing_analysis(
    p: SchnakenbergParams, mode_cap: int = 8, edge_rtol: float = 5e-3
) -> TuringReport:
    """Diffusion-driven instability check and unstable-mode enumeration.

    The band endpoints are
    k^2_{+-} = gamma (d f_u + g_v +- sqrt((d f_u + g_v)^2 - 4 d det J)) / (2 d);
    a negative discriminant means no band (reported, not an error).
    """
    jac = equilibrium(p).jac
    fu, gv = jac[0, 0], jac[1, 1]
    tr = fu + gv
    det = jac[0, 0] * jac[1, 1] - jac[0, 1] * jac[1, 0]
    stable = tr < 0.0 and det > 0.0

    q = p.d * fu + gv
    disc = q * q - 4.0 * p.d * det
    band = q > 0.0 and disc > 0.0
    if band:
        root = math.sqrt(disc)
        k2_minus = p.gamma * (q - root) / (2.0 * p.d)
        k2_plus = p.gamma * (q + root) / (2.0 * p.d)
    else:
        k2_minus = k2_plus = math.nan

    unstable = []
    near_edge = []
    rates = {}
    if band:
        for n in range(mode_cap + 1):
            for m in range(mode_cap + 1):
                if n == 0 and m == 0:
                    continue
                k2 = math.pi**2 * (n * n + m * m)
                if k2_minus < k2 < k2_plus:
                    unstable.append((n, m))
                    rates[(n, m)] = dispersion_growth_rate(p, k2)
                gap = min(abs(k2 - k2_minus) / k2_minus, abs(k2 - k2_plus) / k2_plus)
                if gap <= edge_rtol:
                    near_edge.append((n, m))

    return TuringReport(
        stable_without_diffusion=stable,
        diffusion_driven_unstable=stable and band,
        k2_minus=k2_minus,
        k2_plus=k2_plus,
        unstable_modes=unstable,
        near_edge_modes=near_edge,
        mode_growth_rates=rates,
        edge_rtol=edge_rtol,
        params=p,
    )
