"""Adaptive quadrature engine: exactness, error control, determinism."""

import numpy as np
import pytest

from qfrac.context import QContext
from qfrac.qcore import h_product_z, qpoch_infinite
from qfrac.qfunctions import weight_wH_sin
from qfrac.quadrature import integrate_theta, integrate_theta_2d


class TestIntegrateTheta:
    def test_sin(self, ctx05):
        r = integrate_theta(np.sin, ctx05)
        assert complex(r.value) == pytest.approx(2.0, abs=1e-14)
        assert r.converged

    def test_weight_normalization(self, ctx_all):
        r = integrate_theta(lambda t: weight_wH_sin(t, ctx_all), ctx_all)
        assert complex(r.value).real == pytest.approx(1.0, abs=1e-10)

    def test_askey_wilson_closed_form(self, ctx05):
        quad = (0.6, -0.4, 0.3, -0.05)

        def igr(phis):
            return weight_wH_sin(phis, ctx05) / np.asarray(
                h_product_z(np.exp(1j * phis), list(quad), ctx05))

        got = complex(integrate_theta(igr, ctx05).value)
        want = complex(qpoch_infinite(np.prod(quad), ctx05))
        for j in range(4):
            for k in range(j + 1, 4):
                want /= complex(qpoch_infinite(quad[j] * quad[k], ctx05))
        assert got == pytest.approx(want, rel=1e-11)

    def test_polynomial_in_cos_machine_accurate(self, ctx05):
        coeffs = np.array([3.0, -2.0, 1.0, 0.5, -1.5, 2.5, 0.25, 1.0, -0.5,
                           0.1, 0.7, -0.3, 0.2, 1.1])  # degree 13

        def igr(phis):
            return np.polyval(coeffs, np.cos(phis))

        got = complex(integrate_theta(igr, ctx05).value)
        nodes, wts = np.polynomial.legendre.leggauss(60)
        phis = 0.5 * np.pi * (nodes + 1.0)
        want = float(np.sum(wts * np.polyval(coeffs, np.cos(phis))) * 0.5 * np.pi)
        assert got == pytest.approx(want, rel=1e-13)

    def test_near_zero_integral_terminates(self, ctx05):
        # antisymmetric-about-pi/2 integrand: value ~ 0, mass ~ 1
        r = integrate_theta(lambda t: np.cos(t) * np.sin(t) ** 2, ctx05)
        assert abs(complex(r.value)) < 1e-12
        assert r.evals < 10000

    def test_peaked_integrand(self, ctx05):
        # Lorentzian spike; reference from a tighter run
        def igr(phis):
            return 1.0 / (1e-4 + (phis - 1.234567) ** 2)

        got = complex(integrate_theta(igr, ctx05).value)
        tight = QContext(q=0.5, quad_rel_tol=1e-13)
        want = complex(integrate_theta(igr, tight).value)
        assert got == pytest.approx(want, rel=1e-9)

    def test_determinism_bitwise(self, ctx05):
        def igr(phis):
            return np.sin(3 * phis) * np.exp(np.cos(phis))

        a = integrate_theta(igr, ctx05)
        b = integrate_theta(igr, ctx05)
        assert complex(a.value) == complex(b.value)
        assert a.err_est == b.err_est and a.evals == b.evals

    def test_vector_valued_heterogeneous_scales(self, ctx05):
        # components of wildly different magnitude must each converge
        # relative to their own size
        def igr(phis):
            return np.stack([np.sin(phis), 1e6 * np.sin(phis) ** 3,
                             1e-5 * np.cos(4 * phis) ** 2], axis=1)

        r = integrate_theta(igr, ctx05)
        v = np.asarray(r.value)
        assert v[0] == pytest.approx(2.0, rel=1e-12)
        assert v[1] == pytest.approx(1e6 * 4.0 / 3.0, rel=1e-12)
        assert v[2] == pytest.approx(1e-5 * np.pi / 2.0, rel=1e-10)

    def test_max_depth_reports_not_converged(self):
        ctx = QContext(q=0.5, quad_max_depth=2, quad_rel_tol=1e-14)

        def igr(phis):
            return 1.0 / (1e-6 + (phis - 1.0) ** 2)

        r = integrate_theta(igr, ctx)
        assert not r.converged

    def test_refinement_monotonicity(self):
        def igr(phis):
            return 1.0 / (0.002 + (phis - 1.1) ** 2)

        vals = []
        for tol in (1e-5, 1e-7, 1e-9, 1e-12):
            ctx = QContext(q=0.5, quad_rel_tol=tol)
            vals.append(complex(integrate_theta(igr, ctx).value).real)
        ref = vals[-1]
        diffs = [abs(v - ref) for v in vals[:-1]]
        assert all(d1 >= d2 or d1 < 1e-12 for d1, d2 in zip(diffs, diffs[1:]))


class TestIntegrateTheta2d:
    def test_separable(self, ctx05):
        r = integrate_theta_2d(lambda p, psis: np.sin(p) * np.sin(psis), ctx05)
        assert complex(r.value) == pytest.approx(4.0, rel=1e-11)

    def test_constant(self, ctx05):
        r = integrate_theta_2d(lambda p, psis: np.ones_like(psis), ctx05)
        assert complex(r.value) == pytest.approx(np.pi**2, rel=1e-12)

    def test_poisson_reproducing_collapse(self, ctx05):
        # double integral of the two coupled Poisson denominators against a
        # test function collapses to the single integral with merged order
        q, a, b = 0.5, 0.8, 0.6
        psi0 = 1.1  # outer evaluation angle
        ctx = ctx05

        def g(phis):
            return np.cos(phis) ** 2

        qa = complex(qpoch_infinite(q**a, ctx))
        qb = complex(qpoch_infinite(q**b, ctx))
        qab = complex(qpoch_infinite(q ** (a + b), ctx))

        def h_pair(phis, s, center):
            z = np.exp(1j * center)
            zeta = np.exp(1j * phis)
            return np.asarray(qpoch_infinite(np.multiply.outer(zeta, s * z), ctx)).reshape(phis.shape) \
                * np.asarray(qpoch_infinite(np.multiply.outer(1 / zeta, s * z), ctx)).reshape(phis.shape) \
                * np.asarray(qpoch_infinite(np.multiply.outer(zeta, s / z), ctx)).reshape(phis.shape) \
                * np.asarray(qpoch_infinite(np.multiply.outer(1 / zeta, s / z), ctx)).reshape(phis.shape)

        def f2(phi, psis):
            inner = (weight_wH_sin(psis, ctx) * g(psis)
                     / h_pair(psis, q ** (b / 2.0), phi))
            outer = weight_wH_sin(np.array([phi]), ctx)[0] / h_pair(
                np.array([phi]), q ** (a / 2.0), psi0)[0]
            return qa * qb * outer * inner

        lhs = complex(integrate_theta_2d(f2, ctx05).value)

        def f1(psis):
            return qab * weight_wH_sin(psis, ctx) * g(psis) / h_pair(
                psis, q ** ((a + b) / 2.0), psi0)

        rhs = complex(integrate_theta(f1, ctx05).value)
        assert lhs == pytest.approx(rhs, rel=1e-9)
