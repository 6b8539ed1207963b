import numpy as np
import pytest

from avcstein.lp import solve_lp

scipy_opt = pytest.importorskip("scipy.optimize")

# ---------------------------------------------------------------------------
# cross checks against scipy's interior-point/HiGHS solver
# ---------------------------------------------------------------------------


def random_standard_form(rng, m, n):
    # build a feasible program by construction: pick x0 >= 0, set b = A x0
    A = rng.normal(size=(m, n))
    x0 = rng.uniform(0.2, 1.0, size=n)
    b = A @ x0
    c = rng.normal(size=n)
    return c, A, b


def test_matches_scipy_on_seeded_programs():
    rng = np.random.default_rng(99)
    solved = 0
    for _ in range(40):
        m = int(rng.integers(2, 5))
        n = int(rng.integers(m + 1, m + 6))
        c, A, b = random_standard_form(rng, m, n)
        ours = solve_lp(c, A, b)
        ref = scipy_opt.linprog(c, A_eq=A, b_eq=b, bounds=(0, None), method="highs")
        if ref.status == 3:
            assert ours.status == "unbounded"
            continue
        assert ref.status == 0
        assert ours.status == "optimal"
        assert ours.value == pytest.approx(ref.fun, abs=1e-7)
        assert np.allclose(A @ ours.x, b, atol=1e-8)
        assert np.all(ours.x >= -1e-10)
        solved += 1
    assert solved > 20


def test_reports_infeasible():
    # x1 + x2 = 1 and x1 + x2 = 2 cannot both hold
    A = np.array([[1.0, 1.0], [1.0, 1.0]])
    b = np.array([1.0, 2.0])
    res = solve_lp(np.array([1.0, 0.0]), A, b)
    assert res.status == "infeasible"


def test_reports_unbounded():
    # minimize -x1 with only x1 - x2 = 0: x1 can grow without bound
    A = np.array([[1.0, -1.0]])
    b = np.array([0.0])
    res = solve_lp(np.array([-1.0, 0.0]), A, b)
    assert res.status == "unbounded"


def test_handles_redundant_rows():
    A = np.array([[1.0, 1.0], [2.0, 2.0]])
    b = np.array([1.0, 2.0])
    res = solve_lp(np.array([1.0, 2.0]), A, b)
    assert res.status == "optimal"
    assert res.value == pytest.approx(1.0, abs=1e-9)


def test_degenerate_vertex():
    # classic degeneracy: multiple bases describe the same optimum
    c = np.array([-1.0, -1.0, 0.0, 0.0])
    A = np.array([[1.0, 0.0, 1.0, 0.0], [0.0, 1.0, 0.0, 1.0], [1.0, 1.0, 0.0, 0.0]])
    b = np.array([1.0, 1.0, 2.0])
    res = solve_lp(c, A, b)
    assert res.status == "optimal"
    assert res.value == pytest.approx(-2.0, abs=1e-9)
