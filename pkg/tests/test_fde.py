import math

import numpy as np
import pytest

from frackit.errors import BlowUpError, DomainError
from frackit.expr import FuncSpec
from frackit.fde import FdeProblem, residual, solve, volterra_rhs
from frackit.mesh import Domain
from frackit.operators import OrderParams
from oracles import convergence_orders, ml_half, ml_mp

DOM = Domain(1.0, 2.0)


def problem(alpha, rho, f, init):
    return FdeProblem(OrderParams(alpha, rho), DOM, FuncSpec.from_expr(f), tuple(init))


def test_problem_validation():
    with pytest.raises(DomainError):
        problem(1.5, 1.0, "x", [1.0])
    with pytest.raises(DomainError):
        FdeProblem(OrderParams(0.5, 1.0, "right"), DOM, FuncSpec.from_expr("x"), (1.0,))


def test_volterra_rhs_examples():
    pr = problem(0.5, 1.0, "1", [0.0])
    sol = solve(pr, 64)
    assert volterra_rhs(pr, sol.grid, sol.values, 64) == pytest.approx(1.1283791671, rel=1e-10)
    assert volterra_rhs(pr, sol.grid, sol.values, 0) == 0.0
    pr = problem(1.5, 2.0, "0", [0.7, -0.4])
    sol = solve(pr, 32)
    s = sol.grid.w_nodes - 1.0
    np.testing.assert_allclose(sol.values, 0.7 - 0.4 / 2.0 * s, rtol=1e-14, atol=1e-15)
    assert sol.residual_norm <= 1e-12


def test_ml_eigen_solution_example():
    sol = solve(problem(0.5, 1.0, "x", [1.0]), 4096)
    assert sol.values[-1] == pytest.approx(ml_half(1.0), abs=1e-3)
    assert sol.residual_norm <= 1e-3


def test_manufactured_power_solution_example():
    rho, alpha, v = 2.0, 0.5, 2.0
    c = rho**alpha * math.gamma(v + 1) / math.gamma(v - alpha + 1)
    sol = solve(problem(alpha, rho, f"{c!r}*(t^2 - 1)^1.5", [0.0]), 2048)
    np.testing.assert_allclose(sol.values, (sol.grid.t_nodes**2 - 1) ** 2, atol=1e-4)


@pytest.mark.parametrize("alpha, rho", [(0.3, 0.5), (0.7, 2.0), (1.4, 1.0)])
def test_order_on_manufactured_solution(alpha, rho):
    # v = n + 1 keeps the forcing s**(v - alpha) smoother than the kernel
    v = math.ceil(alpha) + 1.0
    c = rho**alpha * math.gamma(v + 1) / math.gamma(v - alpha + 1)
    pr = problem(alpha, rho, f"{c!r}*(t^{rho!r} - 1)^{v - alpha!r}", [0.0] * math.ceil(alpha))
    errs, res = [], []
    for N in (256, 512, 1024, 2048):
        sol = solve(pr, N)
        errs.append(np.max(np.abs(sol.values - (sol.grid.w_nodes - 1.0) ** v)))
        res.append(sol.residual_norm)
    assert min(convergence_orders(errs)) >= min(2, 1 + alpha) - 0.3
    # with f independent of x the corrector reproduces the discrete Volterra
    # sum exactly unless a starting correction is active
    assert all(b < a or a <= 1e-12 for a, b in zip(res, res[1:]))


@pytest.mark.parametrize("alpha, rho", [(0.3, 2.0), (0.5, 1.0), (0.8, 0.5)])
def test_residual_decreases_on_state_dependent_problem(alpha, rho):
    pr = problem(alpha, rho, f"{-0.8 * rho ** alpha!r}*x", [1.0])
    res = [solve(pr, N).residual_norm for N in (256, 512, 1024)]
    assert all(b < a for a, b in zip(res, res[1:]))


def test_order_with_state_dependence():
    # f also depends on x; early grids converge faster than the asymptotic rate
    alpha, rho, v = 0.3, 0.5, 2.5
    c = rho**alpha * math.gamma(v + 1) / math.gamma(v - alpha + 1)
    pr = problem(alpha, rho, f"{c!r}*(t^0.5 - 1)^{v - alpha!r} + x - (t^0.5 - 1)^{v!r}", [0.0])
    errs = []
    for N in (128, 4096):
        sol = solve(pr, N)
        errs.append(np.max(np.abs(sol.values - (sol.grid.w_nodes - 1.0) ** v)))
    assert math.log2(errs[0] / errs[1]) / 5 >= 1 + alpha - 0.3


def test_rho_invariance():
    alpha, rho, N = 0.6, 2.0, 256
    sol = solve(problem(alpha, rho, "-x + sin(t)", [0.5]), N)
    # the same problem written in w = t**rho with rho = 1
    wdom = Domain(1.0, 4.0)
    f = f"{rho ** -alpha!r}*(-x + sin(t^0.5))"
    ref = solve(FdeProblem(OrderParams(alpha, 1.0), wdom, FuncSpec.from_expr(f), (0.5,)), N)
    np.testing.assert_allclose(sol.values, ref.values, rtol=1e-12, atol=1e-14)


def test_second_order_initial_data_are_modified_derivatives():
    # x = E_1.5(lam s^1.5) has x(a) = 1 and x_(1)(a) = 0
    alpha, rho, lam = 1.5, 2.0, -0.5
    sol = solve(problem(alpha, rho, f"{lam * rho ** alpha!r}*x", [1.0, 0.0]), 1024)
    s = sol.grid.w_nodes - 1.0
    exact = np.array([ml_mp(alpha, lam * si**alpha) for si in s[::64]])
    np.testing.assert_allclose(sol.values[::64], exact, atol=1e-5)


def test_blow_up_is_reported():
    with pytest.raises(BlowUpError) as info:
        solve(problem(0.5, 1.0, "x^3", [5.0]), 512)
    assert info.value.step > 0
