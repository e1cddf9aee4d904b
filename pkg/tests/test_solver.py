import numpy as np
import pytest
from scipy.integrate import quad
from scipy.optimize import fsolve

import urysohn as u
from urysohn.errors import DivergenceError, MeshMismatchError, SingularLinearizationError

GAMMA = np.sqrt(12.0)


def iterated_on_grid(prob, sol, grid, rule):
    return np.array([u.iterated_eval(prob, sol, float(s), rule) for s in grid])


# --- basic solves -------------------------------------------------------------


def test_zero_kernel_fixed_point_in_one_iteration(zero_kernel):
    mesh = u.make_mesh(6)
    sol = u.solve_galerkin(zero_kernel, mesh, 2)
    assert sol.iterations == 1
    pf = u.project(zero_kernel.f, mesh, 2)
    assert np.max(np.abs(sol.x_g.coeffs - pf.coeffs)) < 1e-14
    assert sol.final_residual < 1e-13


def test_picard_newton_and_direct_solve_agree(linear_green):
    mesh = u.make_mesh(6)
    r = 2
    picard = u.solve_galerkin(linear_green, mesh, r, u.SolveOptions(method="picard", tol=1e-13))
    newton = u.solve_galerkin(linear_green, mesh, r, u.SolveOptions(method="newton", tol=1e-13))
    assert np.max(np.abs(picard.x_g.coeffs - newton.x_g.coeffs)) < 1e-10
    # the problem is linear: (I - A) c = P f solves the system directly
    rule = u.gauss_rule(10)
    a_mat = u.assemble_linearized(linear_green, picard.x_g, mesh, r, rule)
    b = u.project(linear_green.f, mesh, r).coeffs.ravel()
    direct = np.linalg.solve(np.eye(mesh.n * r) - a_mat, b).reshape(mesh.n, r)
    assert np.max(np.abs(picard.x_g.coeffs - direct)) < 1e-10


@pytest.mark.parametrize("problem_id", ["paper-hammerstein", "linear-green", "zero-kernel"])
def test_picard_and_newton_agree_on_every_builtin(problem_id):
    prob = u.get_problem(problem_id)
    mesh = u.make_mesh(8)
    tol = 1e-12
    picard = u.solve_galerkin(prob, mesh, 1, u.SolveOptions(method="picard", tol=tol))
    newton = u.solve_galerkin(prob, mesh, 1, u.SolveOptions(method="newton", tol=tol))
    assert np.max(np.abs(picard.x_g.coeffs - newton.x_g.coeffs)) < 100 * tol


def test_galerkin_solution_against_brute_force(hammerstein):
    """Full independent route: adaptive quadrature for every inner product and
    a dense nonlinear solve, versus the Gauss-panel Picard iteration."""
    n, r = 4, 1
    mesh = u.make_mesh(n)
    h = mesh.h
    kern = hammerstein.kernel
    f = hammerstein.f

    def op_value(x_cells, s):
        total = 0.0
        for j in range(n):
            a, b = mesh.points[j], mesh.points[j + 1]
            segs = [(a, b)] if not (a < s < b) else [(a, s), (s, b)]
            for lo, hi in segs:
                piece = kern.kappa1 if hi <= s else kern.kappa2
                total += quad(lambda t: piece(s, t, x_cells[j]), lo, hi,
                              epsabs=1e-14, epsrel=1e-14)[0]
        return total

    def system(coeffs):
        x_cells = coeffs / np.sqrt(h)
        out = np.empty(n)
        for j in range(n):
            a, b = mesh.points[j], mesh.points[j + 1]
            val = quad(lambda s: (op_value(x_cells, s) + f(s)) / np.sqrt(h), a, b,
                       epsabs=1e-13, epsrel=1e-13, limit=200)[0]
            out[j] = coeffs[j] - val
        return out

    start = u.project(f, mesh, r).coeffs.ravel()
    oracle = fsolve(system, start, xtol=1e-13)
    sol = u.solve_galerkin(hammerstein, mesh, r, u.SolveOptions(tol=1e-13))
    assert np.max(np.abs(oracle - sol.x_g.coeffs.ravel())) < 1e-10


# --- linearization assembly -----------------------------------------------------


def test_assembled_matrix_zero_for_zero_kernel(zero_kernel):
    mesh = u.make_mesh(3)
    x = u.project(zero_kernel.f, mesh, 2)
    mat = u.assemble_linearized(zero_kernel, x, mesh, 2, u.gauss_rule(6))
    assert np.max(np.abs(mat)) == 0.0


def test_assembled_matrix_against_double_quadrature(linear_green):
    n, r = 2, 1
    mesh = u.make_mesh(n)
    h = mesh.h
    kern = linear_green.kernel
    x = u.project(linear_green.f, mesh, r)
    mat = u.assemble_linearized(linear_green, x, mesh, r, u.gauss_rule(10))
    assert mat.shape == (2, 2)

    def entry(j, k):
        def inner(s):
            a, b = mesh.points[k], mesh.points[k + 1]
            segs = [(a, b)] if not (a < s < b) else [(a, s), (s, b)]
            total = 0.0
            for lo, hi in segs:
                piece = kern.du_kappa1 if hi <= s else kern.du_kappa2
                total += quad(lambda t: piece(s, t, x(t)) / np.sqrt(h), lo, hi,
                              epsabs=1e-13, epsrel=1e-13)[0]
            return total

        a, b = mesh.points[j], mesh.points[j + 1]
        return quad(lambda s: inner(s) / np.sqrt(h), a, b, epsabs=1e-12, epsrel=1e-12,
                    limit=200)[0]

    oracle = np.array([[entry(j, k) for k in range(n)] for j in range(n)])
    assert np.max(np.abs(mat - oracle)) < 1e-10


def test_assembled_matrix_symmetric_for_constant_state(hammerstein):
    # d kappa/du at constant x is symmetric in (s, t), so the matrix is too
    mesh = u.make_mesh(5)
    x = u.PiecewisePoly(mesh, 1, np.full((5, 1), 0.8 * np.sqrt(mesh.h)))
    mat = u.assemble_linearized(hammerstein, x, mesh, 1, u.gauss_rule(10))
    assert np.max(np.abs(mat - mat.T)) < 1e-10


# --- iterated solution -----------------------------------------------------------


def test_iterated_equals_f_for_zero_kernel(zero_kernel, rule10):
    mesh = u.make_mesh(5)
    sol = u.solve_galerkin(zero_kernel, mesh, 1)
    pv = u.iterated_at_partition(zero_kernel, sol, rule10)
    np.testing.assert_allclose(pv.values, zero_kernel.f(mesh.points), atol=1e-14)
    assert u.iterated_eval(zero_kernel, sol, 0.37, rule10) == pytest.approx(
        zero_kernel.f(0.37), abs=1e-14
    )


def test_projection_of_iterated_recovers_galerkin(hammerstein, rule16):
    mesh = u.make_mesh(10)
    tol = 1e-12
    sol = u.solve_galerkin(hammerstein, mesh, 1, u.SolveOptions(tol=tol))

    def x_s(t):
        arr = np.asarray(t, dtype=float)
        vals = iterated_on_grid(hammerstein, sol, arr.ravel(), rule16)
        return vals.reshape(arr.shape)

    projected = u.project(x_s, mesh, 1)
    assert np.max(np.abs(projected.coeffs - sol.x_g.coeffs)) < 10 * tol


def test_galerkin_orthogonality(hammerstein, rule16):
    mesh = u.make_mesh(10)
    tol = 1e-12
    sol = u.solve_galerkin(hammerstein, mesh, 1, u.SolveOptions(tol=tol))

    def resid(t):
        arr = np.asarray(t, dtype=float)
        vals = np.array([
            u.residual(hammerstein, sol.x_g, float(s), rule16, mesh) for s in arr.ravel()
        ])
        return vals.reshape(arr.shape)

    coeffs = u.project(resid, mesh, 1).coeffs
    assert np.max(np.abs(coeffs)) < 10 * tol


def test_iterated_matches_f_at_interval_ends(hammerstein, rule10):
    # the Green's kernel vanishes at s in {0, 1}, so the operator adds nothing
    for n in (4, 9):
        sol = u.solve_galerkin(hammerstein, u.make_mesh(n), 1, u.SolveOptions(tol=1e-12))
        pv = u.iterated_at_partition(hammerstein, sol, rule10)
        assert pv.values[0] == pytest.approx(hammerstein.f(0.0), abs=1e-12)
        assert pv.values[-1] == pytest.approx(hammerstein.f(1.0), abs=1e-12)


# --- Richardson extrapolation ------------------------------------------------------


def test_richardson_fixed_point_when_levels_agree():
    coarse_mesh, fine_mesh = u.make_mesh(4), u.make_mesh(8)
    vals = np.sin(coarse_mesh.points)
    coarse = u.PartitionValues(coarse_mesh, vals)
    fine = u.PartitionValues(fine_mesh, np.sin(fine_mesh.points))
    out = u.richardson(coarse, fine, 2)
    np.testing.assert_allclose(out.values, vals, atol=1e-15)


def test_richardson_weights_for_piecewise_constants():
    coarse_mesh, fine_mesh = u.make_mesh(2), u.make_mesh(4)
    coarse = u.PartitionValues(coarse_mesh, np.array([1.0, 2.0, 3.0]))
    fine = u.PartitionValues(fine_mesh, np.array([1.5, 0.0, 2.5, 0.0, 3.5]))
    out = u.richardson(coarse, fine, 1)
    np.testing.assert_allclose(out.values, (4 * np.array([1.5, 2.5, 3.5]) - coarse.values) / 3)


def test_richardson_cancels_leading_term_exactly():
    # v_n = 1 + h^2 + h^4 at a fixed point: the h^2 term cancels identically
    for n in (5, 10):
        h = 1.0 / n
        coarse_mesh, fine_mesh = u.make_mesh(n), u.make_mesh(2 * n)
        v_c = 1.0 + h ** 2 + h ** 4
        v_f = 1.0 + (h / 2) ** 2 + (h / 2) ** 4
        coarse = u.PartitionValues(coarse_mesh, np.full(n + 1, v_c))
        fine = u.PartitionValues(fine_mesh, np.full(2 * n + 1, v_f))
        out = u.richardson(coarse, fine, 1)
        expected = 1.0 - h ** 4 / 4.0
        assert np.max(np.abs(out.values - expected)) < 1e-15


def test_richardson_rejects_non_nested_meshes():
    coarse = u.PartitionValues(u.make_mesh(4), np.zeros(5))
    fine = u.PartitionValues(u.make_mesh(6), np.zeros(7))
    with pytest.raises(MeshMismatchError):
        u.richardson(coarse, fine, 1)


# --- failure modes -----------------------------------------------------------------


def test_divergence_error_carries_last_iterate():
    prob = u.get_problem("linear-green", {"scale": 30.0})  # operator norm > 1
    with pytest.raises(DivergenceError) as info:
        u.solve_galerkin(prob, u.make_mesh(6), 1, u.SolveOptions(max_iter=25))
    err = info.value
    assert isinstance(err.last_iterate, u.PiecewisePoly)
    assert err.update_norm > 1.0


def test_singular_linearization_detected():
    # kappa(s,t,u) = u gives K'v = integral of v: eigenvalue 1 on constants
    kern = u.GreenKernel(
        kappa1=lambda s, t, uu: uu,
        kappa2=lambda s, t, uu: uu,
        du_kappa1=lambda s, t, uu: np.ones_like(uu),
        du_kappa2=lambda s, t, uu: np.ones_like(uu),
    )
    prob = u.UrysohnProblem(kern, f=lambda s: np.sin(np.pi * s))
    with pytest.raises(SingularLinearizationError):
        u.solve_galerkin(prob, u.make_mesh(4), 1, u.SolveOptions(method="newton", max_iter=10))
    with pytest.raises(DivergenceError):
        u.solve_galerkin(prob, u.make_mesh(4), 1, u.SolveOptions(method="picard", max_iter=30))


def test_solve_options_validation():
    with pytest.raises(ValueError):
        u.SolveOptions(method="bisection")
    with pytest.raises(ValueError):
        u.SolveOptions(tol=0.0)
    with pytest.raises(ValueError):
        u.SolveOptions(max_iter=0)
    with pytest.raises(ValueError):
        u.SolveOptions(quad_points=1)
    with pytest.raises(ValueError):
        u.SolveOptions(relax=0.0)
    with pytest.raises(ValueError):
        u.SolveOptions(initial_guess="guess")


def test_relaxed_picard_converges_to_same_solution(hammerstein):
    mesh = u.make_mesh(6)
    plain = u.solve_galerkin(hammerstein, mesh, 1, u.SolveOptions(tol=1e-12))
    damped = u.solve_galerkin(hammerstein, mesh, 1, u.SolveOptions(tol=1e-12, relax=0.7))
    assert np.max(np.abs(plain.x_g.coeffs - damped.x_g.coeffs)) < 1e-10
    assert damped.iterations > plain.iterations


def test_supplied_initial_guess(hammerstein):
    mesh = u.make_mesh(6)
    first = u.solve_galerkin(hammerstein, mesh, 1, u.SolveOptions(tol=1e-12))
    warm = u.solve_galerkin(
        hammerstein, mesh, 1, u.SolveOptions(tol=1e-12, initial_guess=first.x_g)
    )
    assert warm.iterations <= 2
    with pytest.raises(ValueError):
        u.solve_galerkin(
            hammerstein, mesh, 2, u.SolveOptions(initial_guess=first.x_g)
        )


# --- midpoint compatibility scheme ----------------------------------------------


def test_paper_discrete_readout_is_adjacent_cell_average(hammerstein, rule10):
    mesh = u.make_mesh(10)
    sol = u.solve_paper_discrete(hammerstein, mesh, u.SolveOptions(tol=1e-12))
    assert sol.scheme == "paper-discrete"
    pv = u.iterated_at_partition(hammerstein, sol, rule10)
    mids = mesh.points[:-1] + mesh.h / 2
    cells = sol.x_g(mids)
    np.testing.assert_allclose(pv.values[1:-1], 0.5 * (cells[:-1] + cells[1:]), atol=1e-14)
    np.testing.assert_allclose(pv.values[[0, -1]], cells[[0, -1]], atol=1e-14)


def test_paper_discrete_matches_reference_magnitude(hammerstein, rule10):
    # the classical table value at t = 0.5, n = 20 is 4.68e-3; the
    # reconstructed scheme must land within a factor of two
    sol = u.solve_paper_discrete(hammerstein, u.make_mesh(20), u.SolveOptions(tol=1e-12))
    pv = u.iterated_at_partition(hammerstein, sol, rule10)
    err = abs(hammerstein.exact(0.5) - pv.values[10])
    assert 4.68e-3 / 2 < err < 4.68e-3 * 2


def test_paper_discrete_newton_agrees_with_picard(hammerstein):
    mesh = u.make_mesh(12)
    p = u.solve_paper_discrete(hammerstein, mesh, u.SolveOptions(method="picard", tol=1e-13))
    nw = u.solve_paper_discrete(hammerstein, mesh, u.SolveOptions(method="newton", tol=1e-13))
    assert np.max(np.abs(p.x_g.coeffs - nw.x_g.coeffs)) < 1e-10
