"""The weighted inequality, its divergence identities and the embedding constant."""
from doublephase.analysis import (beta_formula, divergence_identity_residual, embedding_drift,
                                  scan_epsilon, verify_ckn)
from doublephase.exprparse import eval_on_grid, parse_expr
from doublephase.grid import DomainSpec, build_grid, make_bump, random_bumps
from doublephase.solver import make_rng
from doublephase.varexp import ExponentField

TEXT = "2.5+0.2*sin(3*x1)*cos(2*y1)"


def exponent_values(grid):
    return eval_on_grid(parse_expr(TEXT, grid.n, grid.m), grid)


grid = build_grid(DomainSpec.box(1, 2, resolution=17))
G = ExponentField.from_values(exponent_values(grid), grid)

print("beta at the default eps:", beta_formula(G, 0.5, grid).beta)
print("beta at the best eps:   ", scan_epsilon(G, 0.5, grid).beta)

ensemble = random_bumps(make_rng(42), 500, grid.spec)
rep = verify_ckn(ensemble, G, 0.5, grid)
print(f"500 bumps: beta_empirical={rep.beta_empirical:.4f}, "
      f"violations={len(rep.violations)}")

# product-rule identities converge at second order on a smooth bump
prev = None
for k in (17, 33):
    g = build_grid(DomainSpec.box(1, 2, resolution=k))
    r = divergence_identity_residual(make_bump(g, (0, 0, 0), (0.9, 0.9, 0.9), 1.3),
                                     ExponentField.from_values(exponent_values(g), g), 0.5, g)
    print(f"{k} nodes/axis: residuals {r[0]:.3e} {r[1]:.3e}"
          + ("" if prev is None else f"  ratios {prev[0] / r[0]:.2f} {prev[1] / r[1]:.2f}"))
    prev = r

out = embedding_drift(random_bumps(make_rng(7), 200, grid.spec), exponent_values,
                      0.5, 1.2, grid.spec)
print({k: round(v.sup, 5) for k, v in out["reports"].items()}, "drift", round(out["drift"], 4))
