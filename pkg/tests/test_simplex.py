"""The in-repo LP kernel, float and exact-rational modes."""

from fractions import Fraction

import numpy as np
import pytest

from credalnet import simplex


class TestBasics:
    def test_bounded_minimum(self):
        res = simplex.solve([-1.0, -1.0],
                            A_ub=[[-1.0, -1.0], [1.0, 0.0], [0.0, 1.0]],
                            b_ub=[-1.0, 0.0, 0.0])
        assert res.status == "optimal"
        assert res.objective == pytest.approx(-1.0)

    def test_equality_with_free_variables(self):
        res = simplex.solve([1.0, 0.0], A_eq=[[1.0, 1.0]], b_eq=[1.0],
                            A_ub=[[1.0, 0.0]], b_ub=[0.3])
        assert res.status == "optimal"
        assert res.objective == pytest.approx(0.3)
        assert res.x[0] + res.x[1] == pytest.approx(1.0)

    def test_infeasible(self):
        res = simplex.solve([1.0], A_ub=[[1.0], [-1.0]], b_ub=[1.0, 0.0],
                            nonneg=True)
        assert res.status == "infeasible"

    def test_unbounded(self):
        res = simplex.solve([-1.0], A_ub=[[1.0]], b_ub=[0.0], nonneg=True)
        assert res.status == "unbounded"

    def test_degenerate_cycling_guard(self):
        # classic cycling instance for naive most-negative pivoting
        res = simplex.solve(
            [-0.75, 150.0, -0.02, 6.0],
            A_ub=[[-0.25, 60.0, 0.04, -9.0],
                  [-0.5, 90.0, 0.02, -3.0],
                  [0.0, 0.0, -1.0, 0.0]],
            b_ub=[0.0, 0.0, -1.0], nonneg=True)
        assert res.status == "optimal"
        assert res.objective == pytest.approx(-0.05)

    def test_redundant_rows(self):
        res = simplex.solve([1.0, 1.0],
                            A_eq=[[1.0, 1.0], [2.0, 2.0]], b_eq=[1.0, 2.0],
                            nonneg=True)
        assert res.status == "optimal"
        assert res.objective == pytest.approx(1.0)


class TestAgainstEnumeration:
    def test_random_simplex_objectives(self, rng):
        # minimise over the probability simplex: the optimum is the
        # smallest coefficient
        for _ in range(25):
            n = int(rng.integers(2, 7))
            c = rng.normal(size=n)
            res = simplex.solve(c, A_eq=np.ones((1, n)), b_eq=[1.0],
                                A_ub=np.eye(n), b_ub=np.zeros(n))
            assert res.status == "optimal"
            assert res.objective == pytest.approx(c.min(), abs=1e-9)

    def test_random_box_constraints(self, rng):
        # free variables in [lo, hi] boxes: optimum picks interval ends
        for _ in range(25):
            n = int(rng.integers(1, 5))
            lo = rng.uniform(-2, 0, size=n)
            hi = lo + rng.uniform(0.1, 2, size=n)
            c = rng.normal(size=n)
            A = np.vstack([np.eye(n), -np.eye(n)])
            b = np.concatenate([lo, -hi])
            res = simplex.solve(c, A_ub=A, b_ub=b)
            expect = float(np.where(c >= 0, c * lo, c * hi).sum())
            assert res.objective == pytest.approx(expect, abs=1e-9)


class TestExactMode:
    def test_rational_optimum(self):
        res = simplex.solve(
            [Fraction(1), Fraction(0)],
            A_eq=[[1, 1]], b_eq=[1],
            A_ub=[[1, 0], [0, 1]], b_ub=[Fraction(1, 4), Fraction(0)],
            exact=True)
        assert res.status == "optimal"
        assert res.objective == Fraction(1, 4)

    def test_exact_matches_float(self, rng):
        for _ in range(10):
            n = 4
            c = [Fraction(int(x), 16) for x in rng.integers(-16, 16, size=n)]
            res_f = simplex.solve([float(v) for v in c],
                                  A_eq=np.ones((1, n)), b_eq=[1.0],
                                  A_ub=np.eye(n), b_ub=np.zeros(n))
            res_q = simplex.solve(c, A_eq=[[1] * n], b_eq=[1],
                                  A_ub=np.eye(n), b_ub=[0] * n, exact=True)
            assert res_q.status == "optimal"
            assert float(res_q.objective) == pytest.approx(res_f.objective,
                                                           abs=1e-12)
