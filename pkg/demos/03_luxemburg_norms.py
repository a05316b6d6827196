"""Modulars and Luxemburg norms with a variable exponent."""
import numpy as np

from doublephase.exprparse import eval_on_grid, parse_expr
from doublephase.grid import DomainSpec, build_grid, make_bump
from doublephase.varexp import ExponentField, luxemburg_norm, modular, validate_admissibility

grid = build_grid(DomainSpec.box(1, 2, resolution=17))
G = ExponentField.from_values(
    eval_on_grid(parse_expr("2.5+0.2*sin(3*x1)*cos(2*y1)", 1, 2), grid), grid)
print("G bounds:", G.bounds)

f = make_bump(grid, (0.1, 0.0, -0.2), (0.7, 0.6, 0.5), 3.0)
nf = luxemburg_norm(f, G, 1.0, grid)
print(f"norm {nf:.10f}, modular at f/norm {modular(f / nf, G, 1.0, grid):.12f}")

# with a constant exponent the norm is the ordinary L^p norm
p0 = 2.5
print("constant exponent:", luxemburg_norm(f, p0, 1.0, grid),
      np.sum(grid.weights * f ** p0) ** (1 / p0))

# hypotheses are checked exactly and reported by name
for s, gamma in [(1.2, 0.5), (1.2, 2.8), (G.gmin - 1.0, 0.5)]:
    rep = validate_admissibility(G, s, gamma, grid.N, "eigen")
    print(f"s={s:.4f} gamma={gamma}: passed={rep.passed}",
          [c.name for c in rep.failures])
