"""Variable-exponent Lebesgue machinery on a grid.

Modulars ``rho(f) = int w |f|^p(z)``, Luxemburg norms, exponent-field
bounds and the admissibility checks tying the exponent ``G``, the reaction
exponent ``s`` and the degeneracy exponent ``gamma`` to the dimension ``N``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .grid import Grid, grad_split

__all__ = [
    "AdmissibilityError", "ExponentField", "Check", "AdmissibilityReport",
    "CONTEXTS", "exponent_bounds", "validate_admissibility", "modular",
    "luxemburg_norm", "lebesgue_norm_const",
]

CONTEXTS = ("ckn", "embedding", "eigen")

# names used in reports and error messages
BAND = "exponent band 2 < G(x,y) < N"
EMBED_S = "embedding range 1 < s < G-"
EMBED_GAMMA = "embedding bound 0 < gamma < N(G- - s)/s"
EIGEN_S = "eigenvalue range 1 < s < G- - 1"


class AdmissibilityError(ValueError):
    """A hypothesis on (G, s, gamma, N) fails; ``report`` lists every check."""

    def __init__(self, report: "AdmissibilityReport"):
        self.report = report
        super().__init__("; ".join(c.describe() for c in report.failures))


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    detail: str

    def describe(self) -> str:
        state = "ok" if self.passed else "violated"
        return f"{self.name}: {state} ({self.detail})"


@dataclass(frozen=True)
class AdmissibilityReport:
    context: str
    checks: tuple[Check, ...]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def failures(self) -> tuple[Check, ...]:
        return tuple(c for c in self.checks if not c.passed)

    def raise_if_failed(self) -> None:
        if not self.passed:
            raise AdmissibilityError(self)

    def to_dict(self) -> dict:
        return {"context": self.context, "passed": self.passed,
                "checks": [{"name": c.name, "passed": c.passed, "detail": c.detail}
                           for c in self.checks]}


def _band_check(gmin: float, gmax: float, N: int) -> Check:
    ok = 2.0 < gmin and gmax < N
    return Check(BAND, ok, f"G- = {gmin!r}, G+ = {gmax!r}, N = {N}")


def validate_admissibility(G, s: float | None, gamma: float | None, N: int,
                           context: str) -> AdmissibilityReport:
    """Check the hypotheses that apply in ``context``.

    ``ckn`` needs only the exponent band; ``embedding`` adds ``1 < s < G-``
    and ``0 < gamma < N(G- - s)/s``; ``eigen`` replaces the s-range by
    ``1 < s < G- - 1``. Comparisons are exact (no slack). Failures are
    returned as data; call :meth:`AdmissibilityReport.raise_if_failed` to
    turn them into an :class:`AdmissibilityError`.

    ``G`` may be an :class:`ExponentField`, an array of nodal values, or a
    ``(G-, G+)`` pair.
    """
    if context not in CONTEXTS:
        raise ValueError(f"unknown context {context!r}; expected one of {CONTEXTS}")
    if isinstance(G, ExponentField):
        gmin, gmax = G.gmin, G.gmax
    elif isinstance(G, tuple) and len(G) == 2:
        gmin, gmax = float(G[0]), float(G[1])
    else:
        gmin, gmax = exponent_bounds(G)
    checks = []
    if N < 3:
        checks.append(Check(BAND, False, f"N = {N} < 3 leaves the band (2, N) empty"))
    else:
        checks.append(_band_check(gmin, gmax, N))
    if context in ("embedding", "eigen"):
        if s is None:
            checks.append(Check(EMBED_S, False, "s is required"))
        elif context == "embedding":
            checks.append(Check(EMBED_S, 1.0 < s < gmin, f"s = {s!r}, G- = {gmin!r}"))
        else:
            checks.append(Check(EIGEN_S, 1.0 < s < gmin - 1.0,
                                f"s = {s!r}, G- - 1 = {gmin - 1.0!r}"))
        if gamma is None or s is None:
            checks.append(Check(EMBED_GAMMA, False, "gamma and s are required"))
        else:
            bound = N * (gmin - s) / s
            checks.append(Check(EMBED_GAMMA, 0.0 < gamma < bound,
                                f"gamma = {gamma!r}, N(G- - s)/s = {bound!r}"))
    return AdmissibilityReport(context, tuple(checks))


@dataclass(frozen=True, eq=False)
class ExponentField:
    """Nodal exponent ``G`` with its split finite-difference gradient.

    Construction enforces ``2 < G < N`` at every node.
    """
    values: np.ndarray
    grad_x: np.ndarray
    grad_y: np.ndarray
    gmin: float
    gmax: float
    N: int = field(default=0)

    @classmethod
    def from_values(cls, values, grid: Grid) -> "ExponentField":
        values = np.array(np.broadcast_to(values, grid.shape), dtype=float)
        if not np.all(np.isfinite(values)):
            raise ValueError("exponent field has non-finite values")
        gmin, gmax = exponent_bounds(values)
        validate_admissibility((gmin, gmax), None, None, grid.N, "ckn").raise_if_failed()
        g = grad_split(values, grid)
        for a in (values, g.gx, g.gy):
            a.setflags(write=False)
        return cls(values, g.gx, g.gy, gmin, gmax, grid.N)

    @property
    def bounds(self) -> tuple[float, float]:
        return self.gmin, self.gmax

    def shifted(self, k: float) -> np.ndarray:
        """Nodal values of ``G + k`` (e.g. the G+1 and G-1 exponents)."""
        return self.values + k

    def abs_grad_x(self) -> np.ndarray:
        return np.sqrt(np.sum(self.grad_x ** 2, axis=0))

    def abs_grad_y(self) -> np.ndarray:
        return np.sqrt(np.sum(self.grad_y ** 2, axis=0))


def exponent_bounds(G) -> tuple[float, float]:
    """Exact nodal ``(min, max)`` of an exponent field."""
    vals = G.values if isinstance(G, ExponentField) else np.asarray(G, dtype=float)
    if vals.size == 0:
        raise ValueError("empty exponent field")
    return float(vals.min()), float(vals.max())


def _exponent_values(p) -> np.ndarray:
    return np.asarray(p.values if isinstance(p, ExponentField) else p, dtype=float)


def modular(f, p, w, grid: Grid) -> float:
    """Quadrature of ``int w |f|^p``; ``p`` and ``w`` are nodal arrays or scalars."""
    p = _exponent_values(p)
    return float(np.sum(grid.weights * w * np.power(np.abs(f), p)))


def _modular_fn(f, p, w, grid: Grid):
    # restrict to nodes that contribute; keeps repeated evaluation cheap
    p = np.broadcast_to(_exponent_values(p), grid.shape)
    c = np.broadcast_to(grid.weights * w, grid.shape)
    a = np.abs(np.broadcast_to(f, grid.shape))
    mask = (a > 0) & (c > 0)
    a, p, c = a[mask], p[mask], c[mask]
    if a.size == 0:
        return None
    logc, loga = np.log(c), np.log(a)

    def rho_log(log_eta: float) -> float:
        # log of the modular at f/eta, evaluated stably
        e = logc + p * (loga - log_eta)
        top = e.max()
        return float(top + np.log(np.sum(np.exp(e - top))))

    return rho_log, p


def luxemburg_norm(f, p, w, grid: Grid, rtol: float = 1e-13) -> float:
    """Luxemburg norm ``inf{eta > 0 : modular(f / eta) <= 1}``.

    The bracket starts from the constant-exponent estimate with exponent
    ``min p`` and is expanded by factors of two until the modular straddles
    one; the root of ``log modular(f / eta) = 0`` is then located in
    ``log eta`` to relative tolerance ``rtol``.
    """
    fn = _modular_fn(f, p, w, grid)
    if fn is None:
        return 0.0
    rho_log, pv = fn
    pmin = float(pv.min())
    if pmin <= 1.0:
        raise ValueError("Luxemburg norm needs exponents > 1")
    eta0 = rho_log(0.0) / pmin  # log of (rho(f))^(1/p-)
    lo = hi = eta0
    step = math.log(2.0)
    while rho_log(hi) > 0.0:
        hi += step
    while rho_log(lo) < 0.0:
        lo -= step
    if lo == hi:
        return math.exp(lo)
    # absolute tolerance in log(eta) is a relative tolerance in eta
    log_eta = brentq(rho_log, lo, hi, xtol=rtol, rtol=4 * np.finfo(float).eps,
                     maxiter=500)
    return math.exp(log_eta)


def lebesgue_norm_const(f, s: float, grid: Grid) -> float:
    """``(int |f|^s)^(1/s)`` by quadrature, for a constant exponent ``s > 1``."""
    if s <= 1.0:
        raise ValueError("need s > 1")
    return float(np.sum(grid.weights * np.abs(f) ** s) ** (1.0 / s))
