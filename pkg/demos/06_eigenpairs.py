"""Valley and mountain geometry, then eigenpair candidates for several lambda."""
import numpy as np

from doublephase.energy import ProblemParams
from doublephase.exprparse import eval_on_grid, parse_expr
from doublephase.grid import DomainSpec, build_grid
from doublephase.solver import (default_seed_bump, probe_mountain, probe_valley, solve_eigen,
                                sweep_lambda)
from doublephase.varexp import ExponentField

grid = build_grid(DomainSpec.box(1, 2, resolution=17))
G = ExponentField.from_values(
    eval_on_grid(parse_expr("2.5+0.2*sin(3*x1)*cos(2*y1)", 1, 2), grid), grid)
gamma, s = 0.5, 1.2

phi = default_seed_bump(grid, G, gamma)
valley = probe_valley(phi, ProblemParams(gamma, s, 1.0), G, grid)
print(f"valley: E(t phi) < 0 up to t={valley.negative_prefix_end}, "
      f"small-t slope {valley.slope:.4f} (s = {s})")
mountain = probe_mountain(ProblemParams(gamma, s, 1.0), G, grid, 2.0 ** np.arange(1, 7))
print("sphere minima:", dict(zip(mountain.rho.tolist(), np.round(mountain.minima, 4).tolist())))

rep = solve_eigen(1.0, gamma, s, G, grid)
print({k: v for k, v in rep.summary().items() if k != "reason"}, rep.reason)

for row in sweep_lambda([0.0, 0.5, 1.0, 5.0], gamma, s, G, grid):
    print(f"lambda={row['lambda']:<4} m_inf={row['m_inf']:+.6f} "
          f"norm={row['norm']:.4f} certified={row['certified']}")
