"""The discrete energy, its exact gradient and the weak form."""
import numpy as np

from doublephase.energy import (ProblemParams, energy, energy_gradient, l2_pairing,
                                w_norm, weak_pairing)
from doublephase.exprparse import eval_on_grid, parse_expr
from doublephase.grid import DomainSpec, build_grid, make_bump
from doublephase.varexp import ExponentField

grid = build_grid(DomainSpec.box(1, 2, resolution=17))
G = ExponentField.from_values(
    eval_on_grid(parse_expr("2.5+0.2*sin(3*x1)*cos(2*y1)", 1, 2), grid), grid)
params = ProblemParams(gamma=0.5, s=1.2, lam=1.0)

u = make_bump(grid, (0.0, 0.1, 0.0), (0.8, 0.7, 0.8), 0.6)
v = make_bump(grid, (0.1, 0.0, 0.1), (0.3, 0.3, 0.3), 1.0)
print("energy parts:", energy(u, params, G, grid).to_dict())
print("norm components:", w_norm(u, G, params.gamma, grid).components)

# the gradient is the derivative of the discrete energy itself
d = l2_pairing(energy_gradient(u, params, G, grid), v, grid)
h = 1e-5
fd = (energy(u + h * v, params, G, grid).total
      - energy(u - h * v, params, G, grid).total) / (2 * h)
print(f"<E'(u), v> = {d:.12f}, central difference {fd:.12f}")
print(f"weak form  = {weak_pairing(u, v, params, G, grid):.12f}")
