# Meshes, orthonormal cell bases, and the L2 projection onto piecewise
# polynomials.  The projection is the building block everything else rests
# on: its coefficients come from one quadrature pass because the cell basis
# is orthonormal.

import numpy as np

import urysohn as u

mesh = u.make_mesh(4)
print("mesh with 4 cells:", mesh.points)

# The local basis is orthonormal on [0, 1]: the Gram matrix is the identity.
rule = u.gauss_rule(6)
table = u.basis_table(3, rule.nodes)
gram = (table * rule.weights[:, None]).T @ table
print("\nbasis Gram matrix (should be identity):")
print(np.round(gram, 14))

# Project a smooth function and look at the sup-norm error as the mesh is
# refined: degree r-1 polynomials per cell give order h^r.
f = lambda t: np.sin(np.pi * t)
grid = np.linspace(0, 1, 2001)
print("\nprojection error, f(t) = sin(pi t):")
print("   n   r=1          r=2          r=3")
for n in (8, 16, 32, 64):
    errs = [np.max(np.abs(f(grid) - u.project(f, u.make_mesh(n), r)(grid))) for r in (1, 2, 3)]
    print(f"  {n:3d}  {errs[0]:.4e}   {errs[1]:.4e}   {errs[2]:.4e}")
print("each column shrinks by about 2^r per doubling")

# Members of the space are discontinuous at partition points; both one-sided
# values are available, and plain evaluation takes the left limit.
p = u.project(lambda t: np.where(t < 0.5, 1.0, 2.0), u.make_mesh(2), 1)
print(f"\nstep function projected on 2 cells: left limit at 0.5 = {p.eval_left(0.5):.1f}, "
      f"right limit = {p.eval_right(0.5):.1f}")
