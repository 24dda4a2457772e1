"""Adaptive quadrature on [0, pi] with embedded-rule error estimates.

A 15-point Kronrod rule with the embedded 7-point Gauss rule is applied per
panel; panels whose |K15 - G7| exceeds their share of the error budget are
bisected, leftmost-first, so the panel ordering (and therefore the floating
point result) is identical on every run with the same context.

Integrands may be vector valued: f(nodes) may return shape (m,) or (m, B)
for B simultaneous integrals (one adaptive refinement driven by the worst
component).  That is how operator applications evaluate a whole theta-grid
with a single quadrature.
"""

from __future__ import annotations

import heapq
import threading
from dataclasses import dataclass

import numpy as np

from .context import QContext

__all__ = ["QuadResult", "integrate_theta", "integrate_theta_2d", "eval_counter"]

# QUADPACK dqk15 abscissae/weights (Kronrod 15 with embedded Gauss 7).
_XGK = np.array([
    0.9914553711208126, 0.9491079123427585, 0.8648644233597691,
    0.7415311855993944, 0.5860872354676911, 0.4058451513773972,
    0.2077849550078985, 0.0,
])
_WGK = np.array([
    0.02293532201052922, 0.06309209262997855, 0.1047900103222502,
    0.1406532597155259, 0.1690047266392679, 0.1903505780647854,
    0.2044329400752989, 0.2094821410847278,
])
_WG = np.array([
    0.1294849661688697, 0.2797053914892767,
    0.3818300505051189, 0.4179591836734694,
])

# full 15-node layout: +-xgk[0..6], 0; Gauss nodes are the odd Kronrod indices
_NODES = np.concatenate([-_XGK[:7], [0.0], _XGK[6::-1]])
_WK = np.concatenate([_WGK[:7], [_WGK[7]], _WGK[6::-1]])
_WGFULL = np.zeros(15)
_WGFULL[1:7:2] = _WG[:3]
_WGFULL[7] = _WG[3]
_WGFULL[9:15:2] = _WG[2::-1]

_FLOOR_SCALE = 1e-300


class _EvalCounter(threading.local):
    def __init__(self):
        self.n = 0


eval_counter = _EvalCounter()
"""Thread-local integrand evaluation counter (identity reports read it)."""


@dataclass
class QuadResult:
    """Outcome of one adaptive integration.

    converged implies err_est <= quad_rel_tol * max(|value|, 1e-300).
    value is complex for scalar integrands, an ndarray for vector ones.
    """

    value: object
    err_est: float
    evals: int
    converged: bool


def _panel(f, lo, hi):
    """One GK15 application; returns (kronrod_vec, |K-G| per component,
    L1 magnitude per component, nodes used).  The L1 magnitude sets the
    rounding floor below which an error estimate is pure noise."""
    half = 0.5 * (hi - lo)
    mid = 0.5 * (hi + lo)
    x = mid + half * _NODES
    fx = np.asarray(f(x), dtype=np.complex128)
    eval_counter.n += x.size
    if fx.ndim == 1:
        k15 = half * (_WK @ fx)
        g7 = half * (_WGFULL @ fx)
        l1 = half * (_WK @ np.abs(fx))
    else:
        k15 = half * np.tensordot(_WK, fx, axes=(0, 0))
        g7 = half * np.tensordot(_WGFULL, fx, axes=(0, 0))
        l1 = half * np.tensordot(_WK, np.abs(fx), axes=(0, 0))
    err = np.abs(np.atleast_1d(k15 - g7))
    return k15, err, np.atleast_1d(l1), x.size


_MAX_PANELS = 20000


def _quad_vec(f, lo, hi, ctx: QContext, n_initial=4):
    """Global adaptive refinement: always bisect the panel with the largest
    |K15 - G7| relative to its component's scale, until every component's
    accumulated estimate meets its own tolerance.  Components are budgeted
    individually (their magnitudes can differ by many orders inside one
    batch).  The pop order is a deterministic function of the computed
    errors, and the final accumulation runs over panels sorted by position,
    so results are bit-stable and independent of how callers batch their
    components."""
    width = hi - lo
    edges = lo + width * np.arange(n_initial + 1) / n_initial
    alive = {}  # lo -> (hi, value, err_vec, depth)
    coarse = None
    mass = None  # per-component L1 magnitude; budgets are honest against it
    evals = 0
    panels0 = []
    for i in range(n_initial):
        val, err, l1, n = _panel(f, edges[i], edges[i + 1])
        evals += n
        coarse = val if coarse is None else coarse + val
        mass = l1 if mass is None else mass + l1
        alive[float(edges[i])] = (float(edges[i + 1]), val, err, 0)
        panels0.append(float(edges[i]))

    scale = np.maximum(np.maximum(np.abs(np.atleast_1d(coarse)), mass), _FLOOR_SCALE)
    tol_vec = 0.5 * ctx.quad_rel_tol * scale
    # below ~100 eps relative to the integrand's own mass an |K-G| estimate
    # is rounding noise; such panels cannot be improved by splitting
    noise_floor = 100.0 * np.finfo(float).eps * scale
    err_total = np.zeros_like(scale)
    for rec in alive.values():
        err_total = err_total + rec[2]

    def priority(err_vec):
        return float(np.max(err_vec / scale))

    heap = []
    for plo in panels0:
        heapq.heappush(heap, (-priority(alive[plo][2]), plo))

    frozen_bad = False
    while heap and bool(np.any(err_total > tol_vec)) and len(alive) < _MAX_PANELS:
        neg_pri, plo = heapq.heappop(heap)
        rec = alive.get(plo)
        if rec is None or priority(rec[2]) != -neg_pri:
            continue  # stale heap entry
        phi, val, err, depth = rec
        if depth >= ctx.quad_max_depth:
            frozen_bad = True  # cannot be improved further
            continue
        if bool(np.all(err <= noise_floor)):
            continue  # estimate is rounding-level; splitting cannot help
        mid = 0.5 * (plo + phi)
        lv, lerr, _, n1 = _panel(f, plo, mid)
        rv, rerr, _, n2 = _panel(f, mid, phi)
        evals += n1 + n2
        err_total = err_total + lerr + rerr - err
        alive[plo] = (mid, lv, lerr, depth + 1)
        alive[mid] = (phi, rv, rerr, depth + 1)
        heapq.heappush(heap, (-priority(lerr), plo))
        heapq.heappush(heap, (-priority(rerr), mid))

    total = np.zeros_like(np.atleast_1d(coarse))
    err_total = np.zeros_like(scale)
    for plo in sorted(alive):
        _, val, err, _ = alive[plo]
        total = total + np.atleast_1d(val)
        err_total = err_total + err

    value = total if total.size > 1 else total[0]
    err_est = float(np.max(err_total))
    vscale = max(float(np.max(np.abs(total))), _FLOOR_SCALE)
    comp_ok = bool(np.all(err_total <= ctx.quad_rel_tol * np.maximum(
        np.abs(total), np.maximum(mass, _FLOOR_SCALE))))
    converged = (not frozen_bad) and comp_ok and err_est <= ctx.quad_rel_tol * vscale
    return QuadResult(value, err_est, evals, converged)


def integrate_theta(f, ctx: QContext, lo: float = 0.0, hi: float = np.pi) -> QuadResult:
    """Adaptive integral of f over [lo, hi] (default [0, pi]).

    f receives a numpy array of nodes and must return an array of matching
    leading dimension; a trailing dimension of size B makes the quadrature
    vector valued.  MaxDepth exhaustion is reported via converged=False on
    the best available value, never as an exception.
    """
    return _quad_vec(f, lo, hi, ctx)


def integrate_theta_2d(f, ctx: QContext, lo: float = 0.0, hi: float = np.pi) -> QuadResult:
    """Tensor-product integral of f(phi, psi) over [lo, hi]^2.

    The outer adaptive pass integrates g(phi) = integral over psi, with f
    called as f(phi_scalar, psi_array).  The error estimate combines the
    outer estimate with the worst inner estimate scaled by the interval.
    """
    inner_err = 0.0
    inner_evals = 0
    inner_ok = True

    def outer_integrand(phis):
        nonlocal inner_err, inner_evals, inner_ok
        out = np.empty(phis.shape, dtype=np.complex128)
        for i, p in enumerate(phis):
            r = _quad_vec(lambda psis: f(float(p), psis), lo, hi, ctx)
            out[i] = r.value
            inner_err = max(inner_err, r.err_est)
            inner_evals += r.evals
            inner_ok = inner_ok and r.converged
        return out

    outer = _quad_vec(outer_integrand, lo, hi, ctx)
    err = outer.err_est + inner_err * (hi - lo)
    vscale = max(float(np.max(np.abs(np.atleast_1d(outer.value)))), _FLOOR_SCALE)
    converged = outer.converged and inner_ok and err <= 10 * ctx.quad_rel_tol * vscale
    return QuadResult(outer.value, err, outer.evals + inner_evals, converged)
