"""Numerical checks of the weighted Caffarelli-Kohn-Nirenberg inequality,
the divergence identities behind it, and the embedding constant of the
energy space into L^s.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize_scalar

from .energy import weight_A, w_norm
from .grid import BumpSpec, DomainSpec, Grid, build_grid, grad_split, make_bump, partial
from .varexp import ExponentField, lebesgue_norm_const, validate_admissibility

__all__ = [
    "MU", "BetaConstants", "CknMember", "CknReport", "EmbeddingReport",
    "ckn_sides", "beta_formula", "scan_epsilon", "verify_ckn",
    "divergence_identity_residual", "flux_divergence_integrals",
    "embedding_ratio", "estimate_embedding", "embedding_drift",
]

# sup_{t>0} t|ln t|/(t^2+1): smallest mu with t^G |ln t| <= mu t^(G-1) (t^2+1).
# Attained at t ~ 0.3012910192 (and 1/t by the t -> 1/t symmetry).
MU = 0.33137170967459079


@dataclass(frozen=True)
class BetaConstants:
    w1_sup: float  # sup |x| over the nodes
    w2_sup: float  # sup |y| over the nodes
    mu: float
    eps: float
    gmin: float
    gmax: float
    beta: float

    @property
    def eps_bound(self) -> float:
        return 2.0 / (self.gmax * (self.w1_sup + self.w2_sup))

    def to_dict(self) -> dict:
        d = dict(self.__dict__)
        d["eps_bound"] = self.eps_bound
        return d


def _beta(eps, w, gmin, gmax, mu):
    denom = 2.0 - eps * gmax * w
    if not denom > 0:
        raise ValueError(f"eps = {eps} gives a non-positive denominator {denom}")
    return w * max(mu, gmax / eps ** (gmin - 1.0)) / denom


def beta_formula(G: ExponentField, gamma: float, grid: Grid, eps: float | None = None,
                 mu: float = MU) -> BetaConstants:
    """Closed-form constant of the weighted inequality.

    ``beta = (|W1| + |W2|) max(mu, G+/eps^(G- - 1)) / (2 - eps G+ (|W1| + |W2|))``
    with ``|W1| = sup|x|``, ``|W2| = sup|y|``. By default ``eps`` is half
    its admissible supremum ``2 / (G+ (|W1| + |W2|))``.
    """
    del gamma  # the constant does not depend on the degeneracy exponent
    w1 = float(grid.abs_x().max())
    w2 = float(grid.abs_y().max()) if grid.m else 0.0
    w = w1 + w2
    gmin, gmax = G.bounds
    if eps is None:
        eps = 1.0 / (gmax * w)
    return BetaConstants(w1, w2, mu, float(eps), gmin, gmax, _beta(eps, w, gmin, gmax, mu))


def scan_epsilon(G: ExponentField, gamma: float, grid: Grid, mu: float = MU) -> BetaConstants:
    """``beta_formula`` at the eps in ``(0, eps_bound)`` minimising beta."""
    ref = beta_formula(G, gamma, grid, mu=mu)
    w = ref.w1_sup + ref.w2_sup
    hi = ref.eps_bound
    res = minimize_scalar(lambda e: np.log(_beta(e, w, ref.gmin, ref.gmax, mu)),
                          bounds=(1e-8 * hi, hi * (1 - 1e-9)), method="bounded",
                          options={"xatol": 1e-12 * hi})
    return beta_formula(G, gamma, grid, eps=float(res.x), mu=mu)


def ckn_sides(u, G: ExponentField, gamma: float, grid: Grid) -> tuple[float, float, float]:
    """``(LHS, RHS1, RHS2)`` of the weighted inequality for the field ``u``.

    LHS  = int (1 + |x|^gamma) |u|^G
    RHS1 = int |grad_x u|^G + |x|^gamma |grad_y u|^G
    RHS2 = int |u|^(G-1) (1 + u^2) A
    """
    u = np.asarray(u, dtype=float)
    q = grid.weights
    Gv = G.values
    xw = grid.x_weight(gamma)
    g = grad_split(u, grid)
    absu = np.abs(u)
    lhs = np.sum(q * (1.0 + xw) * np.power(absu, Gv))
    rhs1 = np.sum(q * (np.power(g.abs_x(), Gv) + xw * np.power(g.abs_y(), Gv)))
    rhs2 = np.sum(q * np.power(absu, Gv - 1.0) * (1.0 + u * u) * weight_A(G, gamma, grid))
    return float(lhs), float(rhs1), float(rhs2)


@dataclass(frozen=True)
class CknMember:
    lhs: float
    rhs1: float
    rhs2: float

    @property
    def ratio(self) -> float | None:
        total = self.rhs1 + self.rhs2
        return self.lhs / total if total > 0 else None


@dataclass
class CknReport:
    members: list[CknMember]
    constants: BetaConstants
    slack: float
    violations: list[int] = field(default_factory=list)

    @property
    def beta_formula(self) -> float:
        return self.constants.beta

    @property
    def beta_empirical(self) -> float:
        ratios = [m.ratio for m in self.members if m.ratio is not None]
        return max(ratios) if ratios else 0.0

    @property
    def passed(self) -> bool:
        return not self.violations and self.beta_empirical <= self.beta_formula * (1 + self.slack)

    def to_dict(self) -> dict:
        return {"beta_formula": self.beta_formula, "beta_empirical": self.beta_empirical,
                "slack": self.slack, "violations": list(self.violations),
                "violation_count": len(self.violations), "passed": self.passed,
                "constants": self.constants.to_dict(), "members": len(self.members)}

    def member_rows(self) -> list[list[float]]:
        return [[i, m.lhs, m.rhs1, m.rhs2, np.nan if m.ratio is None else m.ratio]
                for i, m in enumerate(self.members)]


def verify_ckn(bumps: list[BumpSpec], G: ExponentField, gamma: float, grid: Grid,
               eps: float | None = None, slack: float = 0.02) -> CknReport:
    """Evaluate the inequality on every bump; a violation is
    ``LHS > beta (RHS1 + RHS2) (1 + slack)``."""
    validate_admissibility(G, None, gamma, grid.N, "ckn").raise_if_failed()
    consts = beta_formula(G, gamma, grid, eps)
    members, bad = [], []
    for i, b in enumerate(bumps):
        m = CknMember(*ckn_sides(make_bump(grid, b.center, b.radii, b.amplitude),
                                 G, gamma, grid))
        if m.lhs > consts.beta * (m.rhs1 + m.rhs2) * (1 + slack):
            bad.append(i)
        members.append(m)
    return CknReport(members, consts, slack, bad)


def _divergence(components, grid: Grid, axes) -> np.ndarray:
    return sum(partial(c, grid, k) for c, k in zip(components, axes))


def divergence_identity_residual(u, G: ExponentField, gamma: float, grid: Grid,
                                 threshold: float = 0.01) -> tuple[float, float]:
    """Max nodal mismatch of the two product-rule identities.

    Identity 1: ``div(x |u|^G) = n |u|^G + G |u|^(G-2) u grad_x u.x
    + |u|^G log|u| grad_x G.x`` (vector field in the x-directions).
    Identity 2: the same in the y-directions with ``|x|^gamma`` in front and
    ``m`` in place of ``n``. Divergences are finite differences of the
    nodal vector fields; the right-hand sides use the nodal split
    gradients. Only interior nodes with ``|u| > threshold max|u|`` count,
    since ``log|u|`` is singular where ``u`` vanishes.
    """
    u = np.asarray(u, dtype=float)
    absu = np.abs(u)
    Gv = G.values
    n, m = grid.n, grid.m
    mask = (~grid.boundary) & (absu > threshold * absu.max())
    if not mask.any():
        raise ValueError("no interior node passes the |u| threshold")
    pw = np.power(absu, Gv)
    logu = np.log(np.where(absu > 0, absu, 1.0))
    g = grad_split(u, grid)
    core = Gv * np.power(absu, Gv - 2.0) * u
    xs, ys = grid.x, grid.y

    lhs1 = _divergence([x * pw for x in xs], grid, range(n))
    rhs1 = (n * pw + core * sum(g.gx[i] * xs[i] for i in range(n))
            + pw * logu * sum(G.grad_x[i] * xs[i] for i in range(n)))
    res1 = float(np.max(np.abs(lhs1 - rhs1)[mask]))

    xw = grid.x_weight(gamma)
    if m:
        lhs2 = _divergence([xw * pw * y for y in ys], grid, range(n, n + m))
        rhs2 = xw * (m * pw + core * sum(g.gy[j] * ys[j] for j in range(m))
                     + pw * logu * sum(G.grad_y[j] * ys[j] for j in range(m)))
        res2 = float(np.max(np.abs(lhs2 - rhs2)[mask]))
    else:
        res2 = 0.0
    return res1, res2


def flux_divergence_integrals(u, G: ExponentField, gamma: float, grid: Grid) -> tuple[float, float]:
    """Quadrature of ``div(x |u|^G)`` and ``div(|x|^gamma y |u|^G)``; both vanish
    for compactly supported ``u``."""
    pw = np.power(np.abs(u), G.values)
    xw = grid.x_weight(gamma)
    n, m = grid.n, grid.m
    d1 = _divergence([x * pw for x in grid.x], grid, range(n))
    d2 = _divergence([xw * pw * y for y in grid.y], grid, range(n, n + m)) if m else 0.0
    q = grid.weights
    return float(np.sum(q * d1)), float(np.sum(q * d2))


def embedding_ratio(u, G: ExponentField, gamma: float, s: float, grid: Grid) -> float | None:
    """``|u|_s / ||u||``; ``None`` for the zero field."""
    denom = w_norm(u, G, gamma, grid).sum
    if denom == 0:
        return None
    return lebesgue_norm_const(u, s, grid) / denom


@dataclass
class EmbeddingReport:
    ratios: list[float]
    skipped: int
    s: float
    gamma: float

    @property
    def sup(self) -> float:
        return max(self.ratios) if self.ratios else float("nan")

    @property
    def mean(self) -> float:
        return float(np.mean(self.ratios)) if self.ratios else float("nan")

    def to_dict(self) -> dict:
        return {"sup": self.sup, "mean": self.mean, "count": len(self.ratios),
                "skipped": self.skipped, "s": self.s, "gamma": self.gamma}


def estimate_embedding(fields, G: ExponentField, gamma: float, s: float,
                       grid: Grid) -> EmbeddingReport:
    """Embedding ratios over an ensemble of nodal fields (zero fields are skipped)."""
    validate_admissibility(G, s, gamma, grid.N, "embedding").raise_if_failed()
    ratios, skipped = [], 0
    for u in fields:
        r = embedding_ratio(u, G, gamma, s, grid)
        if r is None:
            skipped += 1
        else:
            ratios.append(r)
    return EmbeddingReport(ratios, skipped, s, gamma)


def embedding_drift(bumps: list[BumpSpec], exponent, gamma: float, s: float,
                    spec: DomainSpec, resolutions=(17, 33)) -> dict:
    """Sup embedding ratio of one bump ensemble at several resolutions.

    ``exponent`` maps a grid to its nodal G values. Returns the per-resolution
    reports and the relative drift of the sup between the first and last.
    """
    reports = {}
    for k in resolutions:
        grid = build_grid(DomainSpec(spec.n, spec.m, spec.bounds, (k,) * spec.N))
        G = ExponentField.from_values(exponent(grid), grid)
        fields = (make_bump(grid, b.center, b.radii, b.amplitude) for b in bumps)
        reports[k] = estimate_embedding(fields, G, gamma, s, grid)
    a, b = reports[resolutions[0]].sup, reports[resolutions[-1]].sup
    return {"reports": reports, "drift": abs(b - a) / abs(b)}
