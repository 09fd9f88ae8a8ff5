import math
from fractions import Fraction
from itertools import permutations

import pytest

from mastlab.bounds import (
    LAMBDA_THRESHOLD,
    BoundsError,
    InducedMarginal,
    birthday_bound,
    bound_report,
    check_exchangeable,
    check_prop42,
    double_factorial,
    exact_mast_distribution,
    exact_mast_mean,
    exact_sweep,
    exhaustive_mast_tail,
    induced_marginal,
    marginal_from_trees,
    mast_lower_bound,
    mast_upper_bound,
    min_s_for_tail,
    phi,
    psi,
    sweep_models,
)
from mastlab.mast import mast_bruteforce
from mastlab.random_trees import SameShape, Uniform, Yule
from mastlab.tree_core import enumerate_trees, parse_newick, relabel, restrict

BALANCED_4 = parse_newick("((1,2),(3,4))")
CATERPILLAR_5 = parse_newick("((((1,2),3),4),5)")


class TestArithmetic:
    @pytest.mark.parametrize("m, value", [(-1, 1), (0, 1), (1, 1), (7, 105), (9, 945)])
    def test_double_factorial(self, m, value):
        assert double_factorial(m) == value

    def test_double_factorial_domain(self):
        with pytest.raises(BoundsError):
            double_factorial(-2)

    def test_phi(self):
        assert phi(9, 1) == 9
        assert phi(4, 4) == Fraction(1, 3)
        assert phi(16, 4) == Fraction(1820 * 8, 24)
        assert float(phi(16, 4)) == pytest.approx(606.67, abs=0.01)
        with pytest.raises(BoundsError):
            phi(4, 5)

    def test_min_s_for_tail(self):
        assert float(phi(16, 11)) == pytest.approx(0.112, abs=5e-4)
        assert float(phi(16, 12)) == pytest.approx(0.0078, abs=5e-5)
        assert min_s_for_tail(16, 0.01) == 12
        assert min_s_for_tail(5, 6) == 1
        assert min_s_for_tail(3, 1e-9) is None
        results = [min_s_for_tail(40, eps) for eps in (10, 1, 0.1, 1e-3, 1e-6)]
        assert results == sorted(results)

    def test_lower_bound(self):
        assert mast_lower_bound(100) == pytest.approx(1.5803, abs=1e-4)
        assert mast_lower_bound(64) == pytest.approx(1.2643, abs=1e-4)
        assert mast_lower_bound(1) == pytest.approx(0.1580, abs=1e-4)

    def test_upper_bound(self):
        assert mast_upper_bound(1024, 4) == 128
        assert mast_upper_bound(256, 4) == 64
        assert LAMBDA_THRESHOLD < math.e * math.sqrt(2) + 1e-6
        with pytest.raises(BoundsError):
            mast_upper_bound(10, 3.8)
        with pytest.raises(BoundsError):
            mast_upper_bound(10, LAMBDA_THRESHOLD)

    def test_birthday(self):
        assert birthday_bound(4, 2, 2)[0] == Fraction(1, 6)
        disjoint, floor = birthday_bound(9, 3, 3)
        assert disjoint == Fraction(5, 21)
        assert 1 - disjoint >= floor
        assert floor == pytest.approx(0.6321, abs=1e-4)
        assert birthday_bound(5, 3, 3)[0] == 0
        with pytest.raises(BoundsError):
            birthday_bound(5, 6, 1)

    def test_birthday_product_form(self):
        # disjointness as a product of per-draw avoidance factors
        for n in (16, 25, 49):
            r = math.isqrt(n)
            product = Fraction(1)
            for i in range(1, r + 1):
                product *= 1 - Fraction(r, n - i + 1)
            assert birthday_bound(n, r, r)[0] == product


class TestInducedMarginal:
    def test_uniform_four(self):
        m = induced_marginal(Uniform(4), 3)
        assert len(m.probabilities) == 3
        assert set(m.probabilities.values()) == {Fraction(1, 3)}

    def test_same_shape_balanced(self):
        m = induced_marginal(SameShape(BALANCED_4), 3)
        assert set(m.probabilities.values()) == {Fraction(1, 3)} and len(m.probabilities) == 3

    def test_single_leaf(self):
        for model in (Uniform(5), Yule(4), SameShape(CATERPILLAR_5)):
            m = induced_marginal(model, 1)
            assert m.probabilities == {"1;": 1}

    def test_matches_direct_permutation_sum(self):
        # independent route: permute the base labels directly, no model code
        base = parse_newick("(((1,2),3),(4,(5,6)))")
        counts = {}
        for perm in permutations(range(1, 7)):
            t = relabel(base, dict(zip(range(1, 7), perm)))
            key = restrict(t, {1, 2, 3, 4}).newick
            counts[key] = counts.get(key, 0) + Fraction(1, 720)
        assert induced_marginal(SameShape(base), 4).probabilities == counts

    def test_limits(self):
        with pytest.raises(BoundsError):
            induced_marginal(Uniform(4), 4)
        with pytest.raises(BoundsError):
            induced_marginal(Uniform(9), 3)


class TestExchangeability:
    def test_uniform_five(self):
        assert check_exchangeable(induced_marginal(Uniform(5), 3))

    @pytest.mark.parametrize("s", [2, 3, 4, 5])
    def test_same_shape_six(self, s):
        for model in sweep_models(6)[2:]:
            m = induced_marginal(model, s)
            assert check_exchangeable(m)
            assert check_prop42(m)

    def test_point_mass_not_exchangeable(self):
        m = marginal_from_trees(3, {"((1,2),3)": 1})
        assert not check_exchangeable(m)
        with pytest.raises(BoundsError):
            check_prop42(m)


class TestPsi:
    def test_uniform_four(self):
        assert psi(4, induced_marginal(Uniform(4), 3)) == Fraction(4, 3)

    def test_point_mass(self):
        assert psi(4, marginal_from_trees(3, {"((1,2),3)": 1})) == 4

    def test_uniform_closed_form(self):
        # uniform on RB(s): psi = C(n, s) / (2s - 3)!!
        m = InducedMarginal(4, {t.newick: Fraction(1, 15) for t in enumerate_trees(4)})
        assert psi(6, m) == 1
        assert bound_report(6, 4, psi_model="uniform").psi == 1

    def test_prop42_uniform(self):
        m4 = InducedMarginal(4, {t.newick: Fraction(1, 15) for t in enumerate_trees(4)})
        assert m4.sum_of_squares() == Fraction(1, 15) and check_prop42(m4)
        m2 = InducedMarginal(2, {"(1,2);": Fraction(1)})
        assert check_prop42(m2)  # 1 <= 2/2, tight

    def test_size_error(self):
        with pytest.raises(BoundsError):
            psi(2, induced_marginal(Uniform(4), 3))


class TestMastTail:
    def test_caterpillar_full_agreement(self):
        # two automorphisms out of 5! relabelings
        assert exhaustive_mast_tail(SameShape(CATERPILLAR_5), 5) == Fraction(2, 120)

    def test_two_always(self):
        for model in (Uniform(5), Yule(5), SameShape(CATERPILLAR_5)):
            assert exhaustive_mast_tail(model, 2) == 1

    def test_balanced_tail_bound(self):
        for s in range(1, 4):
            tail = exhaustive_mast_tail(SameShape(BALANCED_4), s)
            assert tail <= psi(4, induced_marginal(SameShape(BALANCED_4), s))

    def test_distribution_against_all_pairs(self):
        # independent route: every ordered pair, brute-force MAST
        trees = list(enumerate_trees(4))
        law = {}
        for a in trees:
            for b in trees:
                size = mast_bruteforce(a, b).size
                law[size] = law.get(size, 0) + Fraction(1, len(trees) ** 2)
        assert exact_mast_distribution(Uniform(4)) == law

    def test_same_shape_against_all_pairs(self):
        base = parse_newick("((1,2),((3,4),5))")
        perms = list(permutations(range(1, 6)))
        orbit = [relabel(base, dict(zip(range(1, 6), p))) for p in perms]
        total = Fraction(0)
        for a in orbit[::7]:
            for b in orbit:
                total += mast_bruteforce(a, b).size
        mean = total / (len(orbit[::7]) * len(orbit))
        assert exact_mast_mean(SameShape(base)) == mean


def test_exact_sweep_small():
    checks, violations = exact_sweep(5)
    assert checks > 0 and violations == []


def test_report_row():
    report = bound_report(100, 10, 4.0)
    assert report.psi is None
    assert report.row()[0:2] == ["100", "10"]
    assert report.upper_lambda == 40.0
