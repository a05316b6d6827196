"""Discrete double-phase energy on the Grushin-type split gradient.

For a nodal field ``u`` (zero on the boundary) the energy is::

    E(u) = int (|D_x u|^G + |x|^gamma |D_y u|^G) / G
         + int A (|u|^(G+1)/(G+1) + |u|^(G-1)/(G-1))
         - (lam/s) int |u|^s

with ``A = |D_x G| + |x|^gamma |D_y G|``. Everything is a quadrature
composition of nodal quantities, and :func:`energy_gradient` is the exact
derivative of that discrete composition.
"""

from __future__ import annotations

from dataclasses import dataclass, asdict

import numpy as np

from .grid import Grid, grad_split, partial_transpose
from .varexp import ExponentField, luxemburg_norm, validate_admissibility

__all__ = [
    "ProblemParams", "EnergyBreakdown", "WNormBreakdown", "weight_A",
    "w_norm", "energy", "energy_gradient", "weak_pairing", "S_value",
    "T_value", "S_gradient", "T_gradient", "residual_norm", "l2_pairing",
]


@dataclass(frozen=True)
class ProblemParams:
    gamma: float
    s: float
    lam: float

    def validate(self, G: ExponentField, context: str = "eigen"):
        return validate_admissibility(G, self.s, self.gamma, G.N, context)


@dataclass(frozen=True)
class EnergyBreakdown:
    gradient_term: float
    a_plus_term: float
    a_minus_term: float
    reaction_term: float

    @property
    def total(self) -> float:
        return (self.gradient_term + self.a_plus_term + self.a_minus_term
                - self.reaction_term)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["total"] = self.total
        return d


@dataclass(frozen=True)
class WNormBreakdown:
    grad_x: float
    grad_y: float
    a_plus: float
    a_minus: float

    @property
    def components(self) -> tuple[float, float, float, float]:
        return self.grad_x, self.grad_y, self.a_plus, self.a_minus

    @property
    def sum(self) -> float:
        return self.grad_x + self.grad_y + self.a_plus + self.a_minus


def weight_A(G: ExponentField, gamma: float, grid: Grid) -> np.ndarray:
    """Nodal ``A = |grad_x G| + |x|^gamma |grad_y G|``."""
    return G.abs_grad_x() + grid.x_weight(gamma) * G.abs_grad_y()


def _signed_pow(u, p):
    # sign(u)|u|^p, zero at u = 0 (p > 0)
    return np.sign(u) * np.power(np.abs(u), p)


def w_norm(u, G: ExponentField, gamma: float, grid: Grid) -> WNormBreakdown:
    """The four Luxemburg components of the energy-space norm of ``u``."""
    g = grad_split(u, grid)
    A = weight_A(G, gamma, grid)
    Gv = G.values
    absu = np.abs(u)
    c1 = luxemburg_norm(g.abs_x(), Gv, 1.0, grid)
    c2 = luxemburg_norm(np.power(grid.abs_x(), gamma / Gv) * g.abs_y(), Gv, 1.0, grid)
    c3 = luxemburg_norm(absu * np.power(A, 1.0 / (Gv + 1.0)), Gv + 1.0, 1.0, grid)
    c4 = luxemburg_norm(absu * np.power(A, 1.0 / (Gv - 1.0)), Gv - 1.0, 1.0, grid)
    return WNormBreakdown(c1, c2, c3, c4)


def _parts(u, params: ProblemParams, G: ExponentField, grid: Grid):
    u = np.asarray(u, dtype=float)
    g = grad_split(u, grid)
    xw = grid.x_weight(params.gamma)
    A = G.abs_grad_x() + xw * G.abs_grad_y()
    return u, g, xw, A


def energy(u, params: ProblemParams, G: ExponentField, grid: Grid) -> EnergyBreakdown:
    u, g, xw, A = _parts(u, params, G, grid)
    Gv = G.values
    q = grid.weights
    absu = np.abs(u)
    grad = np.sum(q * (np.power(g.abs_x(), Gv) + xw * np.power(g.abs_y(), Gv)) / Gv)
    a_plus = np.sum(q * A * np.power(absu, Gv + 1.0) / (Gv + 1.0))
    a_minus = np.sum(q * A * np.power(absu, Gv - 1.0) / (Gv - 1.0))
    reaction = params.lam / params.s * np.sum(q * np.power(absu, params.s))
    return EnergyBreakdown(float(grad), float(a_plus), float(a_minus), float(reaction))


def _fluxes(g, xw, Gv):
    # |D_x u|^(G-2) D_x u and |x|^gamma |D_y u|^(G-2) D_y u, zero where the block vanishes
    fx = np.power(g.abs_x(), Gv - 2.0) * g.gx
    fy = xw * np.power(g.abs_y(), Gv - 2.0) * g.gy
    return fx, fy


def _S_euclid(u, params, G, grid):
    u, g, xw, A = _parts(u, params, G, grid)
    Gv = G.values
    q = grid.weights
    fx, fy = _fluxes(g, xw, Gv)
    out = q * A * np.sign(u) * (np.power(np.abs(u), Gv) + np.power(np.abs(u), Gv - 2.0))
    for k in range(grid.n):
        out += partial_transpose(q * fx[k], grid, k)
    for j in range(grid.m):
        out += partial_transpose(q * fy[j], grid, grid.n + j)
    return out


def _T_euclid(u, params, grid):
    return grid.weights * _signed_pow(np.asarray(u, dtype=float), params.s - 1.0)


def _riesz(euclid, grid):
    # representer in the quadrature-weighted inner product, Dirichlet rows dropped
    out = euclid / grid.weights
    out[grid.boundary] = 0.0
    return out


def energy_gradient(u, params: ProblemParams, G: ExponentField, grid: Grid) -> np.ndarray:
    """Nodal gradient ``g`` with ``sum(q * g * v) = dE(u)[v]`` for Dirichlet ``v``.

    ``q`` are the quadrature weights; boundary entries are zero.
    """
    euclid = _S_euclid(u, params, G, grid) - params.lam * _T_euclid(u, params, grid)
    return _riesz(euclid, grid)


def S_gradient(u, params, G, grid) -> np.ndarray:
    return _riesz(_S_euclid(u, params, G, grid), grid)


def T_gradient(u, params, G, grid) -> np.ndarray:
    return _riesz(_T_euclid(u, params, grid), grid)


def l2_pairing(a, b, grid: Grid) -> float:
    """Quadrature-weighted inner product ``sum(q * a * b)``."""
    return float(np.sum(grid.weights * a * b))


def residual_norm(grad: np.ndarray, grid: Grid) -> float:
    """Discrete L2 dual proxy ``sqrt(sum(q g^2))`` of a nodal gradient."""
    return float(np.sqrt(np.sum(grid.weights * grad * grad)))


def weak_pairing(u, v, params: ProblemParams, G: ExponentField, grid: Grid) -> float:
    """Weak form of the boundary value problem tested against ``v``."""
    u, g, xw, A = _parts(u, params, G, grid)
    gv = grad_split(v, grid)
    Gv = G.values
    q = grid.weights
    fx, fy = _fluxes(g, xw, Gv)
    absu = np.abs(u)
    integrand = np.sum(fx * gv.gx, axis=0) + np.sum(fy * gv.gy, axis=0)
    integrand += A * np.sign(u) * (np.power(absu, Gv) + np.power(absu, Gv - 2.0)) * v
    integrand -= params.lam * _signed_pow(u, params.s - 1.0) * v
    return float(np.sum(q * integrand))


def S_value(u, params: ProblemParams, G: ExponentField, grid: Grid) -> float:
    e = energy(u, params, G, grid)
    return e.gradient_term + e.a_plus_term + e.a_minus_term


def T_value(u, params: ProblemParams, G: ExponentField, grid: Grid) -> float:
    """``(1/s) int |u|^s``, so that ``E = S - lam T``."""
    return float(np.sum(grid.weights * np.power(np.abs(u), params.s)) / params.s)
