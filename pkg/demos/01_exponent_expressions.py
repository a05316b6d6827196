"""Exponent fields from text.

Exponents are written as small arithmetic expressions over the coordinates
x1..xn, y1..ym and evaluated node by node on a grid.
"""
from doublephase.exprparse import ExprSyntaxError, eval_on_grid, parse_expr, to_string
from doublephase.grid import DomainSpec, build_grid

grid = build_grid(DomainSpec.box(1, 2, resolution=17))

# parse once, evaluate anywhere; ^ binds tighter than unary minus
e = parse_expr("2.5+0.2*sin(3*x1)*cos(2*y1)", grid.n, grid.m)
print("parsed:", to_string(e))
G = eval_on_grid(e, grid)
print(f"nodal range: [{G.min():.6f}, {G.max():.6f}]")

# errors carry the character offset
try:
    parse_expr("sin(", 1, 2)
except ExprSyntaxError as exc:
    print("syntax error:", exc)
