"""Series-core arithmetic: examples, ring laws, truncation discipline."""

import random
from fractions import Fraction as F

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gevreylab import SeriesMatrix, SeriesVector, TruncatedSeries, parse_series
from helpers import random_series, s


class TestAdd:
    def test_cancellation(self):
        assert s("x1 + x2", 2, 5) + s("-x1", 2, 5) == s("x2", 2, 5)

    def test_identity(self):
        g = s("1 + 2 x1 x2", 2, 5)
        assert TruncatedSeries.zero(2, 5) + g == g

    def test_trunc_min_rule(self):
        out = s("x1", 1, 5) + s("x1^2", 1, 3)
        assert out.trunc == 3

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError, match="dimension"):
            s("x1", 1, 5) + s("x1", 2, 5)


class TestMul:
    def test_difference_of_squares(self):
        assert s("1 + x1", 1, 5) * s("1 - x1", 1, 5) == s("1 - x1^2", 1, 5)

    def test_monomials(self):
        assert s("x1 x2", 2, 6) * s("x1 x2", 2, 6) == s("x1^2 x2^2", 2, 6)

    def test_commutativity_against_double_loop(self):
        rng = random.Random(7)
        for _ in range(50):
            f = random_series(rng, 2, 8)
            g = random_series(rng, 2, 8)
            # oracle: plain double loop, no bucketing
            expected = {}
            for ea, ca in f.terms.items():
                for eb, cb in g.terms.items():
                    key = tuple(x + y for x, y in zip(ea, eb))
                    if sum(key) <= 8:
                        expected[key] = expected.get(key, F(0)) + ca * cb
            expected = {e: c for e, c in expected.items() if c}
            assert (f * g).terms == expected
            assert f * g == g * f

    def test_scalar(self):
        assert s("x1", 1, 4) * F(3, 2) == s("3/2 x1", 1, 4)
        assert 2 * s("x1", 1, 4) == s("2 x1", 1, 4)


class TestOrder:
    def test_mixed(self):
        assert s("x1^2 x2 + x1^4", 2, 6).order() == 3

    def test_unit(self):
        assert s("1 + x1", 1, 4).order() == 0

    def test_zero_series_marker(self):
        assert TruncatedSeries.zero(2, 4).order() is None

    def test_integral_domain(self):
        rng = random.Random(11)
        for _ in range(30):
            f = random_series(rng, 2, 10, zero_constant=False)
            g = random_series(rng, 2, 10)
            if f.is_zero or g.is_zero:
                continue
            prod = f * g
            if f.order() + g.order() <= prod.trunc:
                assert prod.order() == f.order() + g.order()


class TestPartial:
    def test_basic(self):
        assert s("x1^2 x2", 2, 5).partial(0) == s("2 x1 x2", 2, 4)

    def test_annihilates(self):
        assert s("x1^3", 2, 5).partial(1).is_zero

    def test_mixed_partials_commute(self):
        rng = random.Random(3)
        for _ in range(25):
            f = random_series(rng, 3, 9)
            if f.trunc < 2:
                continue
            assert f.partial(0).partial(1) == f.partial(1).partial(0)

    def test_trunc_zero_error(self):
        with pytest.raises(ValueError):
            TruncatedSeries.one(1, 0).partial(0)


class TestSubstitute:
    def test_blowup_style(self):
        f = s("x1 x2", 2, 6)
        sigma = [s("x1", 2, 6), s("x1 x2", 2, 6)]
        assert f.substitute(sigma) == s("x1^2 x2", 2, 6)

    def test_identity(self):
        f = s("1 + 3 x1 - x2^2", 2, 7)
        sigma = [s("x1", 2, 7), s("x2", 2, 7)]
        assert f.substitute(sigma) == f

    def test_geometric(self):
        f = parse_series("1/(1-x1)", 2, 9)
        out = f.substitute([s("x1^2", 2, 9), s("x2", 2, 9)])
        expect = TruncatedSeries(2, 9, {(2 * n, 0): 1 for n in range(5)})
        assert out == expect

    def test_composition_associative(self):
        rng = random.Random(19)
        for _ in range(15):
            f = random_series(rng, 2, 8)
            sigma = [random_series(rng, 2, 8, zero_constant=True) for _ in range(2)]
            tau = [random_series(rng, 2, 8, zero_constant=True) for _ in range(2)]
            left = f.substitute(sigma)
            left = left.substitute(tau)
            composed = [t.substitute(tau) for t in sigma]
            right = f.substitute(composed)
            upto = min(left.trunc, right.trunc)
            assert left.agrees_up_to(right, upto)

    def test_nonzero_constant_rejected(self):
        with pytest.raises(ValueError, match="constant"):
            s("x1", 1, 4).substitute([s("1 + x1", 1, 4)])


class TestHomogeneous:
    def test_pick_degree(self):
        f = s("1 + x1 + x1 x2", 2, 5)
        assert f.homogeneous_component(2) == s("x1 x2", 2, 5)

    def test_constant(self):
        f = s("4 + x1", 2, 5)
        assert f.homogeneous_component(0) == s("4", 2, 5)

    def test_reassembly(self):
        rng = random.Random(23)
        for _ in range(20):
            f = random_series(rng, 2, 8)
            total = TruncatedSeries.zero(2, f.trunc)
            for n in range(f.trunc + 1):
                total = total + f.homogeneous_component(n)
            assert total == f

    def test_beyond_trunc_error(self):
        with pytest.raises(ValueError):
            s("x1", 1, 3).homogeneous_component(4)


coeffs = st.fractions(
    min_value=-4, max_value=4, max_denominator=3
)


@st.composite
def small_series(draw, dim=2, trunc=6):
    n_terms = draw(st.integers(0, 4))
    terms = {}
    for _ in range(n_terms):
        exps = tuple(draw(st.integers(0, 3)) for _ in range(dim))
        if sum(exps) <= trunc:
            c = draw(coeffs)
            if c:
                terms[exps] = c
    return TruncatedSeries(dim, trunc, terms)


class TestRingLaws:
    @settings(max_examples=60, deadline=None)
    @given(small_series(), small_series(), small_series())
    def test_associativity_and_distributivity(self, f, g, h):
        assert (f * g) * h == f * (g * h)
        assert f * (g + h) == f * g + f * h

    @settings(max_examples=60, deadline=None)
    @given(small_series(), small_series())
    def test_commutativity(self, f, g):
        assert f * g == g * f
        assert f + g == g + f


class TestTruncationMonotonicity:
    def test_recompute_higher_then_cut(self):
        rng = random.Random(31)
        for _ in range(20):
            lo, hi = 6, 12
            f_hi = random_series(rng, 2, hi)
            g_hi = random_series(rng, 2, hi)
            f_lo, g_lo = f_hi.truncate(lo), g_hi.truncate(lo)
            assert (f_hi * g_hi).truncate(lo) == f_lo * g_lo
            assert (f_hi + g_hi).truncate(lo) == f_lo + g_lo
            if not f_hi.is_zero:
                assert f_hi.partial(0).truncate(lo - 1) == f_lo.partial(0)

    def test_cannot_widen(self):
        with pytest.raises(ValueError):
            s("x1", 1, 3).truncate(5)


class TestImmutability:
    def test_no_attribute_assignment(self):
        f = s("x1", 1, 3)
        with pytest.raises(AttributeError):
            f.trunc = 10

    def test_constructor_rejects_overflow_exponent(self):
        with pytest.raises(ValueError):
            TruncatedSeries(1, 2, {(3,): 1})


class TestContainers:
    def test_vector_uniform_trunc(self):
        v = SeriesVector([s("x1", 1, 5), s("1", 1, 3)])
        assert v.trunc == 3
        assert all(entry.trunc == 3 for entry in v)

    def test_matrix_constant(self):
        m = SeriesMatrix.from_constant([[F(1), F(2)], [F(0), F(1)]], 2, 4)
        assert m.constant() == [[F(1), F(2)], [F(0), F(1)]]

    def test_matrix_vector_product(self):
        m = SeriesMatrix.from_constant([[F(0), F(1)], [F(-1), F(0)]], 1, 4)
        v = SeriesVector([s("x1", 1, 4), s("1", 1, 4)])
        out = m.mul_vector(v)
        assert out[0] == s("1", 1, 4)
        assert out[1] == s("-x1", 1, 4)

    def test_monomial_power(self):
        v = SeriesVector([s("x1", 1, 6), s("1 + x1", 1, 6)])
        assert v.monomial_power((2, 1)) == s("x1^2 (1 + x1)", 1, 6)
