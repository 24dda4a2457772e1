"""Scalar q-series primitives against independent oracles.

Frozen reference values were computed with mpmath at 30 significant digits;
the live mpmath cross-checks keep to a handful of points so the suite stays
fast.
"""

import mpmath as mp
import numpy as np
import pytest

from qfrac.context import QContext
from qfrac.errors import DivisionNearZero, NonConvergent, SingularLowerParameter
from qfrac.qcore import (
    bhs_terminating,
    euler_product,
    h_product,
    h_product_z,
    jtp_theta_logq_derivative_series,
    jtp_theta_series,
    qpoch_finite,
    qpoch_infinite,
    qpoch_infinite_tail_bound,
    qpoch_real_index,
)


class TestQpochFinite:
    def test_empty_product(self, ctx05):
        assert qpoch_finite(0.37 + 0.2j, 0, ctx05) == 1.0

    def test_single_factor(self, ctx05):
        assert qpoch_finite(0.5, 1, ctx05) == pytest.approx(0.5)

    def test_zero_factor(self, ctx05):
        # (2; q)_2 contains 1 - 2q = 0 at q = 1/2
        assert qpoch_finite(2.0, 2, ctx05) == pytest.approx(0.0, abs=1e-15)

    def test_splitting_law(self, ctx_all, rng):
        # (a;q)_{m+n} = (a;q)_m (a q^m; q)_n
        q = ctx_all.q
        for _ in range(40):
            a = complex(rng.uniform(-1, 1), rng.uniform(-1, 1)) * 0.7
            m, n = (int(v) for v in rng.integers(0, 11, 2))
            lhs = qpoch_finite(a, m + n, ctx_all)
            rhs = qpoch_finite(a, m, ctx_all) * qpoch_finite(a * q**m, n, ctx_all)
            assert lhs == pytest.approx(rhs, rel=1e-13, abs=1e-15)


class TestQpochInfinite:
    def test_zero_argument(self, ctx05):
        assert qpoch_infinite(0.0, ctx05) == 1.0

    def test_euler_value(self, ctx05):
        # (1/2; 1/2)_oo, mpmath 30 digits
        assert euler_product(ctx05) == pytest.approx(0.28878809508660242128, rel=5e-15)

    def test_one_gives_zero(self, ctx05):
        assert qpoch_infinite(1.0, ctx05) == pytest.approx(0.0, abs=1e-15)

    def test_complex_against_mpmath(self, ctx07):
        got = qpoch_infinite(0.5 + 0.25j, ctx07)
        want = 0.056683496464347830952 - 0.14849872293997705693j
        assert got == pytest.approx(want, rel=5e-14)

    def test_limit_consistency(self, ctx_all, rng):
        # (a;q)_oo == (a;q)_N (a q^N; q)_oo
        for _ in range(25):
            a = complex(rng.uniform(-0.9, 0.9), rng.uniform(-0.9, 0.9))
            n = int(rng.integers(0, 21))
            lhs = qpoch_infinite(a, ctx_all)
            rhs = qpoch_finite(a, n, ctx_all) * qpoch_infinite(a * ctx_all.q**n, ctx_all)
            assert lhs == pytest.approx(rhs, rel=1e-12, abs=1e-14)

    def test_tail_bound_honored(self, ctx05):
        # truncation tail bound plus an allowance for ~N rounding steps
        mp.mp.dps = 30
        rounding = 60 * np.finfo(float).eps
        for a in (0.5, -0.8, 0.9):
            got = qpoch_infinite(a, ctx05)
            ref = complex(mp.qp(mp.mpf(a), mp.mpf("0.5")))
            assert abs(got - ref) / abs(ref) <= qpoch_infinite_tail_bound(a, ctx05) + rounding

    def test_nonconvergent(self):
        ctx = QContext(q=0.99, max_terms=16)
        with pytest.raises(NonConvergent):
            qpoch_infinite(0.5, ctx)

    def test_array_input(self, ctx05):
        a = np.array([0.0, 0.5, -0.3])
        out = qpoch_infinite(a, ctx05)
        assert out.shape == (3,)
        assert out[0] == 1.0


class TestQpochRealIndex:
    def test_beta_zero(self, ctx05):
        assert qpoch_real_index(0.4, 0.0, ctx05) == pytest.approx(1.0, rel=1e-14)

    def test_integer_index_matches_finite(self, ctx_all):
        for a in (0.3, -0.55, 0.2 + 0.4j):
            for n in (1, 2, 7):
                got = qpoch_real_index(a, n, ctx_all)
                want = qpoch_finite(a, n, ctx_all)
                assert got == pytest.approx(want, rel=1e-12)

    def test_half_index_frozen(self, ctx05):
        # (0.3; 0.5)_{1/2}, mpmath ratio of products at 30 digits
        assert qpoch_real_index(0.3, 0.5, ctx05) == pytest.approx(
            0.80689204052469218351, rel=1e-13)

    def test_division_near_zero(self, ctx05):
        # denominator (a q^beta; q)_oo = 0 exactly when a q^beta = 1
        with pytest.raises(DivisionNearZero):
            qpoch_real_index(2.0, 1.0, ctx05)


class TestHProduct:
    def test_empty_params(self, ctx05):
        assert h_product(1.0, [], ctx05) == 1.0

    def test_real_params_give_real_value(self, ctx05, rng):
        for _ in range(10):
            params = list(rng.uniform(-0.9, 0.9, 3))
            th = rng.uniform(0.0, np.pi)
            val = h_product(th, params, ctx05)
            assert abs(val.imag) < 1e-13 * max(abs(val), 1e-30)

    def test_factorwise_frozen(self, ctx05):
        # h(cos(pi/3); -1/c, -c q), c = 1.4: per-factor mpmath at 30 digits
        got = h_product(np.pi / 3, [-1 / 1.4, -1.4 * 0.5], ctx05)
        assert got.real == pytest.approx(22.344255188949905733, rel=1e-13)

    def test_positivity(self, ctx05, rng):
        for _ in range(20):
            params = list(rng.uniform(-0.95, 0.95, 4))
            th = rng.uniform(0.01, np.pi - 0.01)
            assert h_product(th, params, ctx05).real > 0.0

    def test_z_form_symmetry(self, ctx05):
        z = 0.8 * np.exp(0.7j)
        a = h_product_z(z, [0.3, -0.5], ctx05)
        b = h_product_z(1.0 / z, [0.3, -0.5], ctx05)
        assert a == pytest.approx(b, rel=1e-13)


class TestJacobiTripleProduct:
    def test_z_one(self, ctx05):
        lhs = jtp_theta_series(1.0, ctx05)
        rhs = (qpoch_infinite(0.5, ctx05) * qpoch_infinite(-1.0, ctx05)
               * qpoch_infinite(-0.5, ctx05))
        assert lhs == pytest.approx(rhs, rel=1e-13)

    def test_theta_zero(self, ctx05):
        # z = -1 makes the product side contain (1 - 1) = 0
        assert abs(jtp_theta_series(-1.0, ctx05)) < 1e-13

    def test_complex_frozen(self, ctx03):
        got = jtp_theta_series(0.7 + 0.2j, ctx03)
        assert got == pytest.approx(2.2828414605927828984 + 0.15036648641410691315j,
                                    rel=1e-13)

    @pytest.mark.parametrize("mod", [0.5, 1.0, 2.0])
    @pytest.mark.parametrize("phase", [0.0, 0.9, 2.4])
    def test_product_identity_ring(self, ctx_all, mod, phase):
        z = mod * np.exp(1j * phase)
        lhs = jtp_theta_series(z, ctx_all)
        rhs = (qpoch_infinite(ctx_all.q, ctx_all) * qpoch_infinite(-z, ctx_all)
               * qpoch_infinite(-ctx_all.q / z, ctx_all))
        assert abs(lhs - rhs) <= 1e-11 * abs(rhs)


class TestThetaLogqDerivative:
    def test_finite_difference_oracle(self, ctx05):
        # series == (log q / 2) d/ds theta(z e^s)|_0 / (q;q)_oo
        import math

        for z in (1.0, 0.8 + 0.3j, 1.6):
            d = 1e-6
            fd = (jtp_theta_series(z * math.e**d, ctx05)
                  - jtp_theta_series(z * math.e**(-d), ctx05)) / (2 * d)
            want = fd * math.log(ctx05.q) / 2.0 / euler_product(ctx05)
            got = jtp_theta_logq_derivative_series(z, ctx05)
            assert got == pytest.approx(want, rel=1e-8)

    def test_conjugation_symmetry(self, ctx05):
        z = 0.9 + 0.4j
        a = jtp_theta_logq_derivative_series(z, ctx05)
        b = jtp_theta_logq_derivative_series(np.conj(z), ctx05)
        assert a == pytest.approx(np.conj(b), rel=1e-13)

    def test_window_doubling_stable(self):
        a = jtp_theta_logq_derivative_series(1.0, QContext(q=0.5, eps_trunc=1e-15))
        b = jtp_theta_logq_derivative_series(1.0, QContext(q=0.5, eps_trunc=1e-18))
        assert a == pytest.approx(b, rel=1e-13)


class TestBhsTerminating:
    def test_single_term(self, ctx05):
        assert bhs_terminating([1.0], [0.3], 0.5, 0, ctx05) == 1.0

    def test_two_term_hand_expansion(self, ctx05):
        # n = 1: 1 + (1-u1)(1-u2) arg / [(1-l1)(1-q)]
        q = 0.5
        u = [q ** (-1), 0.3]
        low = [0.8]
        got = bhs_terminating(u, low, 0.7, 1, ctx05)
        want = 1.0 + (1 - q**-1) * (1 - 0.3) * 0.7 / ((1 - 0.8) * (1 - q))
        assert got == pytest.approx(want, rel=1e-14)

    def test_three_term_brute_force(self, ctx05):
        q = 0.5
        upper = [q**-2, 0.4, -0.2]
        lower = [0.3, 0.1]
        got = bhs_terminating(upper, lower, 0.9, 2, ctx05)
        want = 0.0
        for k in range(3):
            num, den = 1.0, 1.0
            for u in upper:
                for j in range(k):
                    num *= 1 - u * q**j
            for l in lower + [q]:
                for j in range(k):
                    den *= 1 - l * q**j
            want += num / den * 0.9**k
        assert got == pytest.approx(want, rel=1e-13)

    def test_no_termination_parameter_rejected(self, ctx05):
        with pytest.raises(ValueError):
            bhs_terminating([0.4], [0.3], 0.5, 2, ctx05)

    def test_singular_lower(self, ctx05):
        with pytest.raises(SingularLowerParameter):
            bhs_terminating([0.5**-2, 0.1], [0.5**-1], 0.5, 2, ctx05)

    def test_extended_precision_cancellation(self, ctx03):
        # q^{-n} columns cancel catastrophically in double; compare the
        # accumulation against mpmath at 40 digits for n = 6, q = 0.3
        mp.mp.dps = 40
        q = mp.mpf("0.3")
        n = 6
        upper = [0.3 ** (-n), 0.25, -0.15]
        lower = [0.45, -0.2]
        got = bhs_terminating(upper, lower, 0.3, n, ctx03)
        tot = mp.mpf(0)
        for k in range(n + 1):
            term = mp.qp(q**-n, q, k) * mp.qp(mp.mpf("0.25"), q, k) * mp.qp(mp.mpf("-0.15"), q, k)
            term /= mp.qp(mp.mpf("0.45"), q, k) * mp.qp(mp.mpf("-0.2"), q, k) * mp.qp(q, q, k)
            tot += term * q**k
        # ~10 digits cancel; the 80-bit accumulation keeps the result ~1e-8
        # (double alone would sit near 1e-5)
        assert got == pytest.approx(float(tot), rel=1e-7)
