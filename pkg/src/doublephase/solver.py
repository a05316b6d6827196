"""Energy landscape probes and the ball-constrained eigenpair solver.

For ``lam > 0`` the energy is negative along small multiples of a
nonnegative bump (valley) and positive on large spheres of the energy-space
norm (mountain). Its infimum over a ball is therefore negative, and a
monotone projected-descent sequence inside the ball plays the role of the
almost-critical sequence whose limit is a nontrivial weak solution.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace

import numpy as np

from .energy import (ProblemParams, S_gradient, T_gradient, energy, energy_gradient,
                     l2_pairing, residual_norm, w_norm, weak_pairing)
from .grid import Grid, make_bump, random_bumps
from .varexp import ExponentField

__all__ = [
    "SolveConfig", "ValleyReport", "MountainReport", "GeometryReport",
    "SolveReport", "Certificate", "default_seed_bump", "probe_valley",
    "probe_mountain", "minimize_in_ball", "solve_eigen", "sweep_lambda",
    "make_rng", "certify",
]

log = logging.getLogger(__name__)


def make_rng(seed: int) -> np.random.Generator:
    """Counter-based generator (Philox) so runs reproduce bit for bit."""
    return np.random.Generator(np.random.Philox(int(seed)))


@dataclass(frozen=True)
class SolveConfig:
    rho: float = 8.0
    max_iter: int = 20000
    rtol: float = 1e-4  # residual target relative to the initial residual
    atol: float = 0.0
    c1: float = 1e-4
    backtrack: float = 0.5
    initial_step: float = 1e-2
    min_step: float = 1e-14
    max_step: float = 1e4
    seed: int = 42
    floor: float = 1e-3  # nontriviality floor for the energy-space norm
    certificate_count: int = 50
    certificate_tol: float = 1e-4  # relative to the initial residual

    def __post_init__(self):
        if not self.rho > 1.0:
            raise ValueError("ball radius rho must exceed 1")
        if not (0.0 < self.c1 < 1.0 and 0.0 < self.backtrack < 1.0):
            raise ValueError("Armijo parameters must lie in (0, 1)")
        if self.rtol < 0 or self.atol < 0 or (self.rtol == 0 and self.atol == 0):
            raise ValueError("tolerances must be nonnegative and not both zero")


def default_seed_bump(grid: Grid, G: ExponentField, gamma: float,
                      target_norm: float = 0.5, shrink: float = 0.9) -> np.ndarray:
    """Nonnegative bump centred in the box, rescaled to the given norm (< 1)."""
    center = [0.5 * (a + b) for a, b in grid.spec.bounds]
    radii = [shrink * 0.5 * (b - a) for a, b in grid.spec.bounds]
    phi = make_bump(grid, center, radii)
    return phi * (target_norm / w_norm(phi, G, gamma, grid).sum)


@dataclass
class ValleyReport:
    t: np.ndarray
    energies: np.ndarray
    negative_prefix_end: float | None  # largest t of the leading run with E < 0
    t_best: float | None  # grid t with the most negative E
    slope: float | None  # small-t log-log slope of -E

    @property
    def exists(self) -> bool:
        return self.negative_prefix_end is not None

    def to_dict(self) -> dict:
        return {"t": self.t.tolist(), "energy": self.energies.tolist(),
                "negative_prefix_end": self.negative_prefix_end,
                "t_best": self.t_best, "slope": self.slope, "exists": self.exists}


@dataclass
class MountainReport:
    rho: np.ndarray
    minima: np.ndarray
    samples: int
    max_norm_error: float

    @property
    def first_positive_rho(self) -> float | None:
        pos = np.flatnonzero(self.minima > 0)
        return float(self.rho[pos[0]]) if pos.size else None

    def to_dict(self) -> dict:
        return {"rho": self.rho.tolist(), "sphere_min": self.minima.tolist(),
                "samples": self.samples, "max_norm_error": self.max_norm_error,
                "first_positive_rho": self.first_positive_rho}


@dataclass
class GeometryReport:
    valley: ValleyReport
    mountain: MountainReport | None = None

    def to_dict(self) -> dict:
        return {"valley": self.valley.to_dict(),
                "mountain": None if self.mountain is None else self.mountain.to_dict()}


def probe_valley(phi, params: ProblemParams, G: ExponentField, grid: Grid,
                 t_grid=None, check_norm: bool = True) -> ValleyReport:
    """Evaluate ``t -> E(t phi)`` on an increasing ``t_grid``.

    ``phi`` must be nonnegative, nonzero and of norm below one. The slope is
    the least-squares log-log slope of ``-E`` over the three smallest ``t``
    (expected to approach ``s``); it is ``None`` unless those three values
    are negative.
    """
    phi = np.asarray(phi, dtype=float)
    if np.any(phi < 0) or not np.any(phi > 0):
        raise ValueError("phi must be nonnegative and not identically zero")
    if check_norm:
        nrm = w_norm(phi, G, params.gamma, grid).sum
        if not nrm < 1.0:
            raise ValueError(f"phi must have norm < 1, got {nrm}")
    t = np.logspace(-16, 0, 65) if t_grid is None else np.sort(np.asarray(t_grid, float))
    E = np.array([energy(ti * phi, params, G, grid).total for ti in t])
    neg = E < 0
    prefix_end = None
    if neg[0]:
        k = int(np.argmin(neg)) if not neg.all() else len(t)
        prefix_end = float(t[k - 1])
    t_best = float(t[int(np.argmin(E))]) if neg.any() else None
    slope = None
    if len(t) >= 3 and np.all(neg[:3]):
        slope = float(np.polyfit(np.log(t[:3]), np.log(-E[:3]), 1)[0])
    return ValleyReport(t, E, prefix_end, t_best, slope)


def probe_mountain(params: ProblemParams, G: ExponentField, grid: Grid,
                   rho_list, k: int = 200, seed: int = 42,
                   radius_range=(0.2, 0.9)) -> MountainReport:
    """Sampled minimum of ``E`` on spheres ``||u|| = rho`` built from seeded bumps."""
    if k < 1:
        raise ValueError("need at least one sample")
    rho_arr = np.asarray(list(rho_list), dtype=float)
    rng = make_rng(seed)
    bumps = random_bumps(rng, k, grid.spec, radius_range=radius_range)
    base = []
    for b in bumps:
        u = make_bump(grid, b.center, b.radii, b.amplitude)
        base.append((u, w_norm(u, G, params.gamma, grid).sum))
    minima = np.empty(len(rho_arr))
    err = 0.0
    for i, rho in enumerate(rho_arr):
        vals = []
        for u, nrm in base:
            ur = u * (rho / nrm)
            err = max(err, abs(w_norm(ur, G, params.gamma, grid).sum - rho) / rho)
            vals.append(energy(ur, params, G, grid).total)
        minima[i] = min(vals)
    return MountainReport(rho_arr, minima, k, err)


@dataclass
class Certificate:
    count: int
    tol: float
    worst_ratio: float  # max |<E'(u), v>| / ||v||
    worst_index: int | None
    max_pairing_gap: float  # weak form vs gradient pairing
    max_st_gap: float  # |<S'(u),v> - lam <T'(u),v>| vs the weak form
    passed: bool

    def to_dict(self) -> dict:
        return self.__dict__.copy()


@dataclass
class SolveReport:
    lam: float
    u: np.ndarray
    energies: list = field(default_factory=list)
    residuals: list = field(default_factory=list)
    norms: list = field(default_factory=list)
    steps: list = field(default_factory=list)
    converged: bool = False
    reason: str = ""
    initial_residual: float = 0.0
    final_norm: float = 0.0
    trivial: bool = False
    rho: float = 0.0
    certificate: Certificate | None = None

    @property
    def m_inf(self) -> float:
        return self.energies[-1]

    @property
    def residual(self) -> float:
        return self.residuals[-1]

    @property
    def iterations(self) -> int:
        return len(self.energies) - 1

    @property
    def nontrivial(self) -> bool:
        return not self.trivial

    @property
    def certified(self) -> bool:
        return (self.converged and self.nontrivial and self.m_inf < 0
                and self.certificate is not None and self.certificate.passed)

    def summary(self) -> dict:
        return {
            "lambda": self.lam, "m_inf": self.m_inf, "norm": self.final_norm,
            "residual": self.residual, "initial_residual": self.initial_residual,
            "iterations": self.iterations, "converged": self.converged,
            "reason": self.reason, "trivial": self.trivial, "rho": self.rho,
            "certified": self.certified,
        }

    def to_dict(self) -> dict:
        d = self.summary()
        d["history"] = {"energy": list(self.energies), "residual": list(self.residuals),
                        "norm": list(self.norms), "step": list(self.steps)}
        d["certificate"] = None if self.certificate is None else self.certificate.to_dict()
        return d


def minimize_in_ball(init, params: ProblemParams, G: ExponentField, grid: Grid,
                     cfg: SolveConfig = SolveConfig()) -> SolveReport:
    """Projected steepest descent on ``E`` over ``{||u|| <= rho}``.

    Each step moves along ``-energy_gradient`` (quadrature-weighted
    representer), is projected radially back into the ball if it leaves
    it, and is accepted under the Armijo condition
    ``E(u+) <= E(u) + c1 <g, u+ - u>``. Trial steps use the
    Barzilai-Borwein length of the previous step, capped to
    ``[min_step, max_step]`` and shrunk by ``backtrack`` until accepted.
    Stops when the residual drops to ``max(atol, rtol * r0)``.
    """
    gamma = params.gamma
    rho = cfg.rho
    u = grid.dirichlet(init)
    nrm = w_norm(u, G, gamma, grid).sum
    if nrm > rho * (1 + 1e-12):
        raise ValueError(f"initial guess has norm {nrm} > rho = {rho}")
    E = energy(u, params, G, grid).total
    g = energy_gradient(u, params, G, grid)
    r = residual_norm(g, grid)
    rep = SolveReport(params.lam, u, [E], [r], [nrm], [0.0], initial_residual=r,
                      rho=rho)
    tol = max(cfg.atol, cfg.rtol * r)
    step = cfg.initial_step
    it = 0
    while True:
        if r <= tol:
            rep.converged, rep.reason = True, "residual below tolerance"
            break
        if it >= cfg.max_iter:
            rep.reason = "max_iter reached"
            break
        alpha = min(max(step, cfg.min_step), cfg.max_step)
        while True:
            trial = u - alpha * g
            tn = w_norm(trial, G, gamma, grid).sum
            if tn > rho:
                trial = trial * (rho / tn)
                tn = rho
            Et = energy(trial, params, G, grid).total
            if Et <= E + cfg.c1 * l2_pairing(g, trial - u, grid):
                break
            alpha *= cfg.backtrack
            if alpha < cfg.min_step:
                trial = None
                break
        if trial is None:
            if nrm >= rho * (1 - 1e-9):
                rep.reason = "ball constraint active"
            elif E >= 0:
                rep.reason = "line search stalled (trivial basin)"
            else:
                rep.reason = "line search stalled"
            break
        g_new = energy_gradient(trial, params, G, grid)
        s_vec = trial - u
        y_vec = g_new - g
        sy = l2_pairing(s_vec, y_vec, grid)
        if sy > 0:
            step = l2_pairing(s_vec, s_vec, grid) / sy
        else:
            step = alpha / cfg.backtrack
        u, E, g, nrm = trial, Et, g_new, tn
        r = residual_norm(g, grid)
        it += 1
        rep.energies.append(E)
        rep.residuals.append(r)
        rep.norms.append(nrm)
        rep.steps.append(alpha)
    rep.u = u
    rep.final_norm = nrm
    rep.trivial = nrm < cfg.floor
    return rep


def certify(u, params: ProblemParams, G: ExponentField, grid: Grid, tol: float,
            count: int = 50, seed: int = 42) -> Certificate:
    """Test the weak form at ``u`` against ``count`` seeded random bumps.

    Passes when ``|<E'(u), v>| <= tol * ||v||`` for every test bump ``v``.
    Also records how far the weak-form pairing is from the gradient
    pairing and from ``<S'(u), v> - lam <T'(u), v>``.
    """
    rng = make_rng(seed)
    g = energy_gradient(u, params, G, grid)
    gS = S_gradient(u, params, G, grid)
    gT = T_gradient(u, params, G, grid)
    worst, worst_i, gap, st_gap = 0.0, None, 0.0, 0.0
    for i, b in enumerate(random_bumps(rng, count, grid.spec)):
        v = make_bump(grid, b.center, b.radii, b.amplitude)
        wp = weak_pairing(u, v, params, G, grid)
        gp = l2_pairing(g, v, grid)
        st = l2_pairing(gS, v, grid) - params.lam * l2_pairing(gT, v, grid)
        scale = max(abs(wp), abs(gp), 1e-300)
        gap = max(gap, abs(wp - gp) / scale)
        st_gap = max(st_gap, abs(wp - st) / scale)
        ratio = abs(wp) / w_norm(v, G, params.gamma, grid).sum
        if worst_i is None or ratio > worst:
            worst, worst_i = ratio, i
    return Certificate(count, tol, worst, worst_i, gap, st_gap, worst <= tol)


def _concat(first: SolveReport, nxt: SolveReport) -> SolveReport:
    nxt.energies = first.energies + nxt.energies[1:]
    nxt.residuals = first.residuals + nxt.residuals[1:]
    nxt.norms = first.norms + nxt.norms[1:]
    nxt.steps = first.steps + nxt.steps[1:]
    nxt.initial_residual = first.initial_residual
    return nxt


def solve_eigen(lam: float, gamma: float, s: float, G: ExponentField, grid: Grid,
                cfg: SolveConfig = SolveConfig(), phi=None, t_grid=None,
                max_rho: float = 64.0) -> SolveReport:
    """Nontrivial weak-solution candidate for eigenvalue parameter ``lam``.

    Validates the hypotheses on ``(G, s, gamma)`` first, starts from the
    most negative point of the valley probe, minimises over the ball of
    radius ``cfg.rho`` and doubles the radius (up to ``max_rho``) while the
    ball constraint is what stops the descent. ``lam = 0`` is accepted as a
    control: there is no valley and the zero field is returned.

    Raises
    ------
    AdmissibilityError
        Before any iteration when a hypothesis fails.
    """
    params = ProblemParams(gamma, s, lam)
    params.validate(G, "eigen").raise_if_failed()
    if lam < 0:
        raise ValueError("lambda must be nonnegative")
    if phi is None:
        phi = default_seed_bump(grid, G, gamma)
    valley = probe_valley(phi, params, G, grid, t_grid)
    init = grid.zeros() if valley.t_best is None else valley.t_best * phi
    rep = minimize_in_ball(init, params, G, grid, cfg)
    rho = cfg.rho
    while (not rep.converged and rep.reason == "ball constraint active"
           and 2 * rho <= max_rho):
        rho *= 2
        log.info("lambda=%g: ball constraint active, retrying with rho=%g", lam, rho)
        nxt = minimize_in_ball(rep.u, params, G, grid,
                               replace(cfg, rho=rho, rtol=0.0,
                                       atol=max(cfg.atol, cfg.rtol * rep.initial_residual)))
        rep = _concat(rep, nxt)
    tol = cfg.certificate_tol * rep.initial_residual
    if rep.initial_residual > 0:
        rep.certificate = certify(rep.u, params, G, grid, tol, cfg.certificate_count, cfg.seed)
    return rep


def sweep_lambda(lams, gamma: float, s: float, G: ExponentField, grid: Grid,
                 cfg: SolveConfig = SolveConfig(), **kwargs) -> list[dict]:
    """One summary row per ``lam``; a failing row is recorded, never raised."""
    rows = []
    for lam in lams:
        try:
            rep = solve_eigen(lam, gamma, s, G, grid, cfg, **kwargs)
            row = rep.summary()
            cert = rep.certificate
            row["certificate_passed"] = None if cert is None else cert.passed
            row["certificate_worst"] = None if cert is None else cert.worst_ratio
        except Exception as exc:  # noqa: BLE001 - rows carry the failure
            row = {"lambda": lam, "error": f"{type(exc).__name__}: {exc}"}
        rows.append(row)
    return rows
