"""Identity registry plumbing: completeness, rejection, determinism, variants."""

import numpy as np
import pytest

from qfrac.context import QContext
from qfrac.errors import CaseInvalid, ParamDomain
from qfrac import identities as idn
from qfrac.identities import IdentityCase, run_identity, run_suite
from qfrac import operators as op
from qfrac.qfunctions import AWParams, aw_weight


ALL_IDS = ["I0a", "I0b", "I0c", "I0d"] + [f"I{k}" for k in range(1, 24)]


class TestRegistry:
    def test_completeness(self):
        assert idn.registry_ids() == ALL_IDS

    def test_default_grid_covers_every_id(self):
        seen = {c.id for c in idn.default_cases()}
        assert seen == set(ALL_IDS)

    def test_default_grid_is_deterministic(self):
        a = [c.key() for c in idn.default_cases()]
        b = [c.key() for c in idn.default_cases()]
        assert a == b

    def test_variant_ids_enumerate_both(self):
        cases = idn.default_cases()
        for vid, variants in (("I8", ("half", "full")), ("I11", ("q2", "q")),
                              ("I12", ("q2", "q")), ("I4", ("half", "full"))):
            seen = {c.variant for c in cases if c.id == vid}
            assert seen == set(variants)


class TestRunIdentity:
    def test_unknown_id(self):
        with pytest.raises(CaseInvalid):
            run_identity(IdentityCase("I99", {"q": 0.5}))

    def test_missing_params(self):
        with pytest.raises(CaseInvalid, match="missing"):
            run_identity(IdentityCase("I5", {"q": 0.5, "a": 1.0}))

    def test_bad_variant(self):
        with pytest.raises(CaseInvalid):
            run_identity(IdentityCase("I8", {"q": 0.5, "a": 0.4, "c": 1.2, "n": 2},
                                      variant="nope"))

    def test_window_violation_raises(self):
        with pytest.raises(ParamDomain, match=r"c outside \(1, 1/q\)"):
            run_identity(IdentityCase("I5", {"q": 0.5, "a": 1.2, "c": 0.5, "n": 2}))

    def test_q_out_of_range(self):
        with pytest.raises(CaseInvalid):
            run_identity(IdentityCase("I0d", {"q": 1.5}))

    def test_residual_determinism(self):
        case = IdentityCase("I0d", {"q": 0.5})
        a = run_identity(case)
        b = run_identity(case)
        assert (a.max_abs, a.max_rel) == (b.max_abs, b.max_rel)

    def test_grid_reversal_invariance(self):
        # same case evaluated with the grid reversed: quadrature reductions
        # must not depend on component order
        base = IdentityCase("I5", {"q": 0.5, "a": 1.0, "c": 1.2, "n": 3})
        r1 = run_identity(base)
        thetas = list(np.linspace(0.3, 2.8, 7))

        grid = np.asarray(thetas)
        ctxq = QContext(q=0.5)
        p = op.KParams(1.0, 1.2)
        f = op.eigen_k_basis(1.2, 3, ctxq)
        fwd = op.apply_K(p, f, ctxq).on_theta(grid)
        rev = op.apply_K(p, f, ctxq).on_theta(grid[::-1])
        scale = np.max(np.abs(fwd))
        assert np.max(np.abs(fwd - rev[::-1])) < 1e-12 * scale
        assert r1.max_rel < 1e-7


class TestBilinearKernels:
    def test_kernel6_symmetry(self, ctx05):
        p = op.KParams(0.8, 1.3)
        a = idn.bilinear_kernel_6(1.0, 1.8, p, 0.2, 0.1, ctx05)
        b = idn.bilinear_kernel_6(1.8, 1.0, p, 0.2, 0.1, ctx05)
        # the theta integral is phi1 <-> phi2 symmetric; the kernel itself
        # carries the asymmetric 1/w(phi2) factor
        t_base = AWParams(-1 / 1.3, -1.3 * 0.5, 0.2, 0.1)
        assert a / aw_weight(1.0, t_base, ctx05) == pytest.approx(
            b / aw_weight(1.8, t_base, ctx05), rel=1e-9)

    def test_kernel6_series_match(self, ctx05):
        p = op.KParams(0.8, 1.3)
        kv = idn.bilinear_kernel_6(1.0, 1.8, p, 0.2, 0.1, ctx05)
        t_base = AWParams(-1 / 1.3, -1.3 * 0.5, 0.2, 0.1)
        sv, nterms = idn.bilinear_series_6(1.0, 1.8, p, 0.2, 0.1, ctx05)
        assert kv / aw_weight(1.0, t_base, ctx05) == pytest.approx(sv, rel=1e-8)
        assert nterms < 120

    def test_kernel7_series_match(self, ctx05):
        p = op.TParams(0.4, 0.3, 0.5)
        t = AWParams(0.4, 0.3, 0.2, 0.1)
        kv = idn.bilinear_kernel_7(0.7, 2.2, p, t, ctx05)
        sv, _ = idn.bilinear_series_7(0.7, 2.2, p, t, ctx05)
        assert kv / aw_weight(0.7, t, ctx05) == pytest.approx(sv, rel=1e-8)

    def test_kernel7_symmetry(self, ctx05):
        p = op.TParams(0.4, 0.3, 0.5)
        t = AWParams(0.4, 0.3, 0.2, 0.1)
        a = idn.bilinear_kernel_7(1.0, 1.8, p, t, ctx05)
        b = idn.bilinear_kernel_7(1.8, 1.0, p, t, ctx05)
        assert a / aw_weight(1.0, t, ctx05) == pytest.approx(
            b / aw_weight(1.8, t, ctx05), rel=1e-9)

    def test_section6_cn_is_one_at_a_zero(self, ctx05):
        for n in (0, 2, 5):
            _, _, cn = idn.section6_constants(n, 0.0, 1.3, 0.2, 0.1, ctx05)
            assert cn == pytest.approx(1.0, rel=1e-13)

    def test_kernel7_pole_rejected(self, ctx05):
        p = op.TParams(0.4, 0.3, 0.1)
        t = AWParams(0.4, 0.3, 0.2, 0.1)  # t3/r = 2 on the contour
        with pytest.raises(ParamDomain):
            idn.bilinear_kernel_7(1.0, 1.5, p, t, ctx05)

    def test_kernel6_weight_pole_rejected(self):
        ctx = QContext(q=0.3)
        p = op.KParams(1.9, 1.2)  # q^{-a/2} a3 > 1
        with pytest.raises(ParamDomain):
            idn.bilinear_kernel_6(1.0, 1.5, p, 0.5, 0.1, ctx)


class TestSuite:
    def test_empty_grid(self):
        assert run_suite("empty") == []

    def test_unknown_grid(self):
        with pytest.raises(CaseInvalid):
            run_suite("nope")

    def test_skip_records_carry_reason(self):
        rep = idn._run_case(
            IdentityCase("I5", {"q": 0.5, "a": 1.0, "c": 2.5, "n": 2}), None)
        assert rep.status == "skip"
        assert "c outside" in rep.skip_reason

    def test_variant_group_verdict(self):
        reports = [
            idn._run_case(IdentityCase("I11", {"q": 0.5, "a": 0.8, "c": 1.2,
                                               "tval": 0.25}, variant=v), None)
            for v in ("q2", "q")
        ]
        ok, resolved = idn.variant_groups_ok(reports)
        assert ok
        assert resolved == {"I11[a=0.8,c=1.2,q=0.5,tval=0.25]": "q2"}

    def test_threaded_matches_serial(self):
        import os

        serial = run_suite("empty")
        os.environ["QFRAC_THREADS"] = "2"
        try:
            cases = [IdentityCase("I0d", {"q": 0.5}), IdentityCase("I0a", {"q": 0.5, "n": 4})]
            a = [idn._run_case(c, None) for c in cases]
            from concurrent.futures import ThreadPoolExecutor

            with ThreadPoolExecutor(max_workers=2) as pool:
                b = list(pool.map(lambda c: idn._run_case(c, None), cases))
            for ra, rb in zip(a, b):
                assert ra.residual.max_rel == rb.residual.max_rel
        finally:
            os.environ.pop("QFRAC_THREADS", None)
        assert serial == []
