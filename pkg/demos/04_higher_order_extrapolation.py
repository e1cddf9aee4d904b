# Higher-order spaces: with piecewise linears (r = 2) on a linear
# Green's-kernel problem the iterated solution reaches order 4 at the
# partition points, and Richardson extrapolation order 6.  The scaled error
# zeta = (phi - x_s)/h^(2r) stabilizing across levels is the observable
# footprint of the h^(2r) error expansion that makes extrapolation work.

import numpy as np

import urysohn as u

prob = u.get_problem("linear-green")  # kernel linear in u, exact solution e^s
phi = prob.exact
rule = u.gauss_rule(10)

pvs = {}
for n in (8, 16, 32):
    sol = u.solve_galerkin(prob, u.make_mesh(n), 2, u.SolveOptions(tol=1e-13))
    pvs[n] = u.iterated_at_partition(prob, sol, rule)

pts = u.make_mesh(8).points
e1 = {n: np.abs(phi(pts) - pvs[n].values[:: n // 8])[1:-1] for n in pvs}
print("interior partition-point errors (max over points):")
for n in (8, 16, 32):
    print(f"  n={n:2d}: {e1[n].max():.3e}")
print(f"orders: {np.log2(e1[8].max() / e1[16].max()):.2f}, "
      f"{np.log2(e1[16].max() / e1[32].max()):.2f}  (2r = 4)")

ex8 = u.richardson(pvs[8], pvs[16], 2)
ex16 = u.richardson(pvs[16], pvs[32], 2)
e2_8 = np.abs(phi(pts) - ex8.values)[1:-1]
e2_16 = np.abs(phi(pts) - ex16.values[::2])[1:-1]
print(f"\nafter one extrapolation step: {e2_8.max():.3e} -> {e2_16.max():.3e}, "
      f"order {np.log2(e2_8.max() / e2_16.max()):.2f}  (2r + 2 = 6)")

signed = [(phi(pts) - pvs[n].values[:: n // 8])[1:-1] for n in (8, 16, 32)]
zetas, metrics = u.zeta_estimate(signed, [1 / 8, 1 / 16, 1 / 32], r=2)
print("\nscaled error coefficients zeta = (phi - x_s)/h^4 per level:")
for n, z in zip((8, 16, 32), zetas):
    print(f"  n={n:2d}: {np.array2string(z, precision=4)}")
print(f"stabilization metrics between levels: {[f'{m:.3f}' for m in metrics]}")
