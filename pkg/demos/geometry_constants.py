"""Geometry constants of the supported polytopes.

Prints zeta, phi, omega and the diameter for a few small instances, then
shows how the theoretical batch growth rate depends on omega.

    python3 demos/geometry_constants.py
"""

from stochfw import L1Ball, OrderedBox, Simplex, generate_synthetic, omega_constant
from stochfw.algorithms import theoretical_rho

polys = {
    "ordered box p=2": OrderedBox(-1.0, 1.0, 2),
    "ordered box p=6": OrderedBox(-1.0, 1.0, 6),
    "simplex p=2": Simplex(2),
    "simplex p=6": Simplex(6),
    "l1 ball a=1 p=2": L1Ball(1.0, 2),
    "l1 ball a=2 p=6": L1Ball(2.0, 6),
}

print(f"{'polytope':<18}{'|V|':>5}{'zeta':>9}{'phi':>9}{'omega':>9}{'D':>9}")
for name, poly in polys.items():
    c = omega_constant(poly)
    print(f"{name:<18}{c.num_vertices:>5}{c.zeta:>9.4f}{c.phi:>9.4f}{c.omega:>9.4f}{c.diameter:>9.4f}")

# rho shrinks quickly as the problem gets harder
obj, poly = generate_synthetic(2000, 6, seed=0)
c = omega_constant(poly)
for N in (1, 10, 100):
    print(f"N={N:<4} rho={theoretical_rho(obj, c, N):.3e}")
