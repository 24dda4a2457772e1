"""Polynomial families, weights and q-exponentials.

Continuous q-Hermite polynomials H_n(x|q) and their weight, the Poisson
kernel in both series and product form, the four-parameter Askey-Wilson
polynomials p_n(x; t1,t2,t3,t4) with weight and normalization constants,
the three q-monomial bases, and the q-exponential.

All grids are theta-grids on [0, pi]; integrals always fold the sin(theta)
Jacobian into the integrand before quadrature so no endpoint singularity
survives.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .context import QContext
from .errors import DomainError, DivisionNearZero, PoleOnContour, SingularLowerParameter
from .qcore import (
    bhs_terminating,
    euler_product,
    h_product_z,
    qpoch_finite,
    qpoch_infinite,
)

__all__ = [
    "ThetaPoint",
    "AWParams",
    "theta_grid",
    "hermite_cq",
    "hermite_cq_all",
    "weight_wH",
    "weight_wH_sin",
    "poisson_kernel",
    "aw_polynomial",
    "aw_polynomial_x",
    "aw_polynomial_series",
    "aw_weight",
    "aw_norm_Mn",
    "basis_phi_quarter",
    "basis_rho",
    "basis_phi_a",
    "q_exponential",
    "q_exponential_x",
    "q_exponential_direct",
]


@dataclass(frozen=True)
class ThetaPoint:
    """A point on the orthogonality interval parameterized by theta."""

    theta: float

    def __post_init__(self):
        if not (0.0 <= self.theta <= math.pi):
            raise DomainError("theta must lie in [0, pi]")

    @property
    def x(self) -> float:
        return math.cos(self.theta)

    @property
    def z(self) -> complex:
        return complex(math.cos(self.theta), math.sin(self.theta))


@dataclass(frozen=True)
class AWParams:
    """Askey-Wilson parameter quadruple (t1, t2, t3, t4)."""

    t1: complex
    t2: complex
    t3: complex
    t4: complex

    def as_tuple(self):
        return (self.t1, self.t2, self.t3, self.t4)

    def validate(self, ctx: QContext, n_max: int = 64) -> None:
        """Reject quadruples whose pairwise products hit q^{-m} (these are
        zeros of the normalization denominators)."""
        ts = self.as_tuple()
        for j in range(4):
            for k in range(j + 1, 4):
                p = complex(ts[j] * ts[k])
                for m in range(n_max):
                    if abs(p * ctx.q**m - 1.0) < 1e-10:
                        raise PoleOnContour(
                            f"t{j+1}*t{k+1} = q^-{m} vanishes a normalization factor"
                        )
                    if abs(p) * ctx.q**m < 0.5:
                        break


def theta_grid(n: int = 17) -> np.ndarray:
    """n Chebyshev-spaced points in the open interval (0, pi)."""
    j = np.arange(n)
    return (2 * j + 1) * np.pi / (2 * n)


def hermite_cq_all(n: int, x, ctx: QContext) -> np.ndarray:
    """H_0..H_n at x in one recurrence pass; shape (n+1,) + shape(x).

    H_0 = 1, H_1 = 2x, 2x H_k = H_{k+1} + (1 - q^k) H_{k-1}.
    """
    xv = np.asarray(x, dtype=np.complex128)
    out = np.empty((n + 1,) + xv.shape, dtype=np.complex128)
    out[0] = 1.0
    if n >= 1:
        out[1] = 2.0 * xv
    qk = 1.0
    for k in range(1, n):
        qk *= ctx.q
        out[k + 1] = 2.0 * xv * out[k] - (1.0 - qk) * out[k - 1]
    return out


def hermite_cq(n: int, x, ctx: QContext):
    """Continuous q-Hermite polynomial H_n(x|q) by the three-term recurrence."""
    val = hermite_cq_all(n, x, ctx)[n]
    return complex(val) if np.ndim(x) == 0 else val


def weight_wH_sin(theta, ctx: QContext):
    """w_H(cos t|q) sin t = (q; q)_oo (e^{2it}; q)_oo (e^{-2it}; q)_oo / (2 pi).

    This is the form every integrand uses: the sin(theta) Jacobian of
    x = cos(theta) cancels the 1/sqrt(1-x^2) of the weight, and the
    (e^{+-2it}; q)_oo pair vanishes like sin^2 at the endpoints, so the
    product extends continuously by 0 to theta in {0, pi}.
    """
    tv = np.asarray(theta, dtype=np.float64)
    z2 = np.exp(2j * tv)
    prod = np.asarray(qpoch_infinite(z2, ctx)) * np.asarray(qpoch_infinite(1.0 / z2, ctx))
    out = euler_product(ctx) * np.real(prod) / (2.0 * np.pi)
    return float(out) if np.ndim(theta) == 0 else out


def weight_wH(theta, ctx: QContext):
    """Normalized q-Hermite weight w_H(cos t|q); positive on (0, pi).

    Raises DomainError at the endpoints, where only the sin-folded form
    weight_wH_sin is finite.
    """
    tv = np.asarray(theta, dtype=np.float64)
    if np.any(tv <= 0.0) or np.any(tv >= np.pi):
        raise DomainError("w_H is singular at theta in {0, pi}; use weight_wH_sin")
    out = weight_wH_sin(tv, ctx) / np.sin(tv)
    return float(out) if np.ndim(theta) == 0 else out


def poisson_kernel(theta, phi, t, ctx: QContext, form: str = "product"):
    """Poisson kernel of the continuous q-Hermite polynomials.

    form="series":  sum_n H_n(cos theta) H_n(cos phi) t^n / (q; q)_n
    form="product": (t^2; q)_oo / prod (t e^{+-i(theta +- phi)}; q)_oo

    Requires |t| < 1; positive for real angles and 0 < t < 1.
    """
    if abs(t) >= 1.0:
        raise DomainError("poisson_kernel needs |t| < 1")
    if form == "product":
        num = qpoch_infinite(t * t, ctx)
        den = 1.0 + 0j
        for s in (theta + phi, theta - phi):
            den *= qpoch_infinite(t * np.exp(1j * s), ctx)
            den *= qpoch_infinite(t * np.exp(-1j * s), ctx)
        return num / den
    if form != "series":
        raise ValueError("form must be 'series' or 'product'")
    total = 0j
    h_prev2, h_prev = None, None
    coeff = 1.0 + 0j
    qk = 1.0
    xt, xp = math.cos(theta), math.cos(phi)
    run_max = 1.0
    small = 0  # consecutive small terms (a single one may be a zero of H_n)
    for n in range(ctx.max_terms):
        if n == 0:
            hn_t, hn_p = 1.0, 1.0
        elif n == 1:
            hn_t, hn_p = 2 * xt, 2 * xp
        else:
            hn_t = 2 * xt * h_prev[0] - (1 - qk) * h_prev2[0]
            hn_p = 2 * xp * h_prev[1] - (1 - qk) * h_prev2[1]
        if n >= 1:
            qk *= ctx.q  # after: qk = q^n
            coeff *= t / (1.0 - qk)
        term = coeff * hn_t * hn_p
        total += term
        run_max = max(run_max, abs(total))
        h_prev2, h_prev = h_prev, (hn_t, hn_p)
        small = small + 1 if abs(term) < ctx.eps_trunc * run_max else 0
        if n > 4 and small >= 3:
            return total
    raise DomainError("poisson series did not settle within max_terms")


def _aw_recurrence_coeffs(n: int, t: AWParams, ctx: QContext):
    a, b, c, d = t.as_tuple()
    q = ctx.q
    T = a * b * c * d
    qn = q**n
    An = ((1 - a * b * qn) * (1 - a * c * qn) * (1 - a * d * qn)
          * (1 - T * qn / q)) / (a * (1 - T * qn * qn / q) * (1 - T * qn * qn))
    Cn = (a * (1 - qn) * (1 - b * c * qn / q) * (1 - b * d * qn / q)
          * (1 - c * d * qn / q)) / ((1 - T * qn * qn / (q * q)) * (1 - T * qn * qn / q))
    return An, Cn


def aw_polynomial_x(n: int, x, t: AWParams, ctx: QContext):
    """p_n at arbitrary (possibly complex) x via the three-term recurrence."""
    a = complex(t.t1)
    if a == 0:
        raise DomainError("aw_polynomial needs t1 != 0")
    xv = np.asarray(x, dtype=np.complex128)
    p_prev = np.zeros_like(xv)
    p_cur = np.ones_like(xv)
    for m in range(n):
        Am, Cm = _aw_recurrence_coeffs(m, t, ctx)
        p_next = ((2 * xv - a - 1 / a + Am + Cm) * p_cur - Cm * p_prev) / Am
        p_prev, p_cur = p_cur, p_next
    scale = (qpoch_finite(t.t1 * t.t2, n, ctx) * qpoch_finite(t.t1 * t.t3, n, ctx)
             * qpoch_finite(t.t1 * t.t4, n, ctx)) * a ** (-n)
    out = scale * p_cur
    return complex(out) if np.ndim(x) == 0 else out


def aw_polynomial(n: int, theta, t: AWParams, ctx: QContext):
    """Askey-Wilson polynomial p_n(cos theta; t1, t2, t3, t4).

    Normalization: p_n = (t1 t2, t1 t3, t1 t4; q)_n t1^{-n} * 4phi3(q,q),
    evaluated through the stable three-term recurrence (the terminating
    series form is kept in aw_polynomial_series as the cross-check route).
    Real for real theta and real parameters; degree n in x.
    """
    out = aw_polynomial_x(n, np.cos(np.asarray(theta, dtype=np.float64)), t, ctx)
    return complex(out) if np.ndim(theta) == 0 else out


def aw_polynomial_series(n: int, theta, t: AWParams, ctx: QContext):
    """p_n via the terminating 4phi3 sum (reference route for small n)."""
    a = complex(t.t1)
    if a == 0:
        raise DomainError("aw_polynomial needs t1 != 0")
    lowers = [a * t.t2, a * t.t3, a * t.t4]
    for l in lowers:
        for k in range(n):
            if abs(complex(l) - ctx.q ** (-k)) < 1e-12:
                raise SingularLowerParameter(f"t1*t_j = q^-{k}")
    z = np.exp(1j * np.asarray(theta, dtype=np.float64))
    T = a * t.t2 * t.t3 * t.t4
    uppers = [ctx.q ** (-n), T * ctx.q ** (n - 1), a * z, a / z]
    series = bhs_terminating(uppers, lowers, ctx.q, n, ctx)
    scale = (qpoch_finite(lowers[0], n, ctx) * qpoch_finite(lowers[1], n, ctx)
             * qpoch_finite(lowers[2], n, ctx)) * a ** (-n)
    out = scale * np.asarray(series)
    return complex(out) if np.ndim(theta) == 0 else out


def aw_weight(theta, t: AWParams, ctx: QContext):
    """Askey-Wilson weight w(cos t; t1..t4) =
    (e^{2it}, e^{-2it}; q)_oo / prod_j (t_j e^{it}, t_j e^{-it}; q)_oo.

    Nonnegative on (0, pi) for real parameters with all |t_j| < 1; raises
    PoleOnContour otherwise.  Orthogonality holds in d(theta) directly (no
    Jacobian: the numerator already vanishes at the endpoints).
    """
    for j, tj in enumerate(t.as_tuple()):
        if abs(tj) >= 1.0:
            raise PoleOnContour(f"|t{j+1}| >= 1 puts a pole on the contour")
    tv = np.asarray(theta, dtype=np.float64)
    z = np.exp(1j * tv)
    num = np.asarray(qpoch_infinite(z * z, ctx)) * np.asarray(qpoch_infinite(1.0 / (z * z), ctx))
    den = h_product_z(z, t.as_tuple(), ctx)
    out = np.real(num / den)
    return float(out) if np.ndim(theta) == 0 else out


def aw_norm_Mn(n: int, t: AWParams, ctx: QContext):
    """Closed-form L2 norm M_n of p_n against aw_weight:

        M_n = 2 pi (T q^{2n}; q)_oo (T q^{n-1}; q)_n
              / [ (q^{n+1}; q)_oo  prod_{j<k} (t_j t_k q^n; q)_oo ],
        T = t1 t2 t3 t4.
    """
    ts = t.as_tuple()
    T = ts[0] * ts[1] * ts[2] * ts[3]
    qn = ctx.q**n
    num = 2.0 * np.pi * qpoch_infinite(T * qn * qn, ctx) * qpoch_finite(T * qn / ctx.q, n, ctx)
    den = qpoch_infinite(ctx.q * qn, ctx)
    for j in range(4):
        for k in range(j + 1, 4):
            den *= qpoch_infinite(ts[j] * ts[k] * qn, ctx)
    if abs(den) < ctx.eps_trunc:
        raise DivisionNearZero("vanishing normalization denominator in M_n")
    val = complex(num / den)
    return val.real if abs(val.imag) < 1e-10 * max(abs(val), 1.0) else val


def basis_phi_quarter(n: int, theta, ctx: QContext):
    """phi_n(x) = (q^{1/4} e^{it}, q^{1/4} e^{-it}; q^{1/2})_n
               = prod_{k<n} [1 - 2 x q^{1/4 + k/2} + q^{1/2 + k}]."""
    x = np.cos(np.asarray(theta, dtype=np.float64))
    out = np.ones_like(x, dtype=np.complex128)
    rq = math.sqrt(ctx.q)
    base = ctx.q**0.25
    for k in range(n):
        out = out * (1.0 - 2.0 * x * base + base * base)
        base *= rq
    out = np.real(out)
    return float(out) if np.ndim(theta) == 0 else out


def basis_rho(n: int, theta, ctx: QContext):
    """rho_n(x) = (1 + e^{2it}) e^{-int} (-q^{2-n} e^{2it}; q^2)_{n-1} for n > 0,
    rho_0 = 1.  Real-valued trigonometric polynomial of degree n in x."""
    tv = np.asarray(theta, dtype=np.float64)
    if n == 0:
        out = np.ones_like(tv)
        return float(out) if np.ndim(theta) == 0 else out
    z2 = np.exp(2j * tv)
    out = (1.0 + z2) * np.exp(-1j * n * tv)
    arg = ctx.q ** (2 - n)
    for _ in range(n - 1):
        out = out * (1.0 + arg * z2)
        arg *= ctx.q * ctx.q
    out = np.real(out)
    return float(out) if np.ndim(theta) == 0 else out


def basis_phi_a(a, nu, theta, ctx: QContext):
    """phi_nu(x; a) = (a e^{it}; q)_nu (a e^{-it}; q)_nu.

    Integer nu uses the finite product prod_{k<nu} [1 - 2 a x q^k + a^2 q^{2k}];
    real nu uses the real-index extension h(x; a) / h(x; a q^nu), which needs
    |a| < 1 and |a q^nu| < 1.
    """
    tv = np.asarray(theta, dtype=np.float64)
    z = np.exp(1j * tv)
    if float(nu) == int(nu) and nu >= 0:
        k = int(nu)
        out = np.asarray(qpoch_finite(a * z, k, ctx)) * np.asarray(qpoch_finite(a / z, k, ctx))
        return complex(out) if np.ndim(theta) == 0 else out
    if abs(a) >= 1.0 or abs(a) * ctx.q ** float(nu) >= 1.0:
        raise DomainError("real-index basis_phi_a needs |a| < 1 and |a q^nu| < 1")
    num = h_product_z(z, [a], ctx)
    den = h_product_z(z, [a * ctx.q ** float(nu)], ctx)
    den_abs = np.min(np.abs(np.asarray(den)))
    if den_abs < ctx.eps_trunc:
        raise DivisionNearZero("h(x; a q^nu) vanishes within eps_trunc")
    out = np.asarray(num) / np.asarray(den)
    return complex(out) if np.ndim(theta) == 0 else out


def q_exponential(theta, tval, ctx: QContext):
    """q-exponential E_q(cos t; tval) via its q-Hermite expansion

        E_q(x; t) = [ sum_n q^{n^2/4} t^n H_n(x|q) / (q; q)_n ] / (q t^2; q^2)_oo.

    The double-product definition is kept in q_exponential_direct as the
    cross-check route.  Needs |tval| < 1.
    """
    out = q_exponential_x(np.cos(np.asarray(theta, dtype=np.float64)), tval, ctx)
    return complex(out) if np.ndim(theta) == 0 else out


def q_exponential_x(x, tval, ctx: QContext):
    """E_q as an entire function of (possibly complex) x."""
    if abs(tval) >= 1.0:
        raise DomainError("q_exponential needs |tval| < 1")
    x = np.asarray(x, dtype=np.complex128)
    total = np.ones_like(x, dtype=np.complex128)
    h_prev = np.ones_like(x, dtype=np.complex128)
    h_cur = 2.0 * x
    qk = 1.0
    coeff = 1.0 + 0j
    run_max = 1.0
    small = 0
    for n in range(1, ctx.max_terms):
        qk *= ctx.q
        coeff *= tval / (1.0 - qk)
        term = coeff * ctx.q ** (n * n / 4.0) * h_cur
        total = total + term
        run_max = max(run_max, float(np.max(np.abs(total))))
        small = small + 1 if float(np.max(np.abs(term))) < ctx.eps_trunc * run_max else 0
        if n > 4 and small >= 3:
            break
        h_prev, h_cur = h_cur, 2.0 * x * h_cur - (1.0 - qk) * h_prev
    else:
        raise DomainError("q-exponential series did not settle")
    ctx2 = ctx.with_q(ctx.q * ctx.q)
    out = total / qpoch_infinite(ctx.q * tval * tval, ctx2)
    return out if out.ndim else complex(out)


def q_exponential_direct(theta, tval, ctx: QContext):
    """E_q by its double-Pochhammer definition:

        E_q(cos t; a) = (a^2; q^2)_oo / (q a^2; q^2)_oo *
            sum_n (-i e^{it} q^{(1-n)/2}, -i e^{-it} q^{(1-n)/2}; q)_n
                  (-i a)^n q^{n^2/4} / (q; q)_n.

    Finite products are rescaled on the fly (factors reach q^{-n/2} sizes)."""
    if abs(tval) >= 1.0:
        raise DomainError("q_exponential needs |tval| < 1")
    z = complex(np.exp(1j * theta))
    total = 1.0 + 0j
    qn_fact = 1.0
    run_max = 1.0
    small = 0
    for n in range(1, ctx.max_terms):
        qn_fact *= 1.0 - ctx.q**n
        prod = 1.0 + 0j
        logscale = 0.0
        base = ctx.q ** ((1 - n) / 2.0)
        for _ in range(n):
            prod *= (1.0 + 1j * z * base) * (1.0 + 1j * base / z)
            base *= ctx.q
            m = abs(prod)
            if m > 1e100 or (0 < m < 1e-100):
                logscale += math.log(m)
                prod /= m
        amp = logscale + (n * n / 4.0) * math.log(ctx.q) + n * math.log(abs(tval)) if tval != 0 else -math.inf
        if tval == 0:
            break
        phase = (-1j * tval / abs(tval)) ** n
        term = prod * phase * math.exp(amp) / qn_fact
        total += term
        run_max = max(run_max, abs(total))
        small = small + 1 if abs(term) < ctx.eps_trunc * run_max else 0
        if n > 4 and small >= 3:
            break
    else:
        raise DomainError("direct q-exponential series did not settle")
    ctx2 = ctx.with_q(ctx.q * ctx.q)
    pref = qpoch_infinite(tval * tval, ctx2) / qpoch_infinite(ctx.q * tval * tval, ctx2)
    return pref * total
