"""Concave conjugate of a cell complexity function.

For a convex nonincreasing g on (0, inf) with g(inf) = 0, define

    gbar(a) = inf_{eta > 0} [ a * eta + g(eta) ],   a >= 0.

gbar is concave, nondecreasing, gbar(0) = 0, and gbar(a) -> sup phi as
a -> inf.  By the envelope theorem the one-sided derivatives are the extreme
minimizers:

    gbar'_plus(a)  = smallest minimizer eta_-(a)
    gbar'_minus(a) = largest minimizer  eta_+(a)

and eta_-(a) = inf{ b > 0 : -g'(b) <= a }, which is also the right-continuous
inverse of the slope map eta -> -g'(eta) (``inverse_neg_slope``).

When g exposes an exact -g' the minimizers come from closed forms (power
structure) or log-space bisection on the slope predicate (exp and tabulated
families); flat slope segments resolve to their left/right edges by predicate
choice.  Otherwise a golden-section minimum is refined by sublevel-set
expansion so flat stretches of the objective still yield correct one-sided
values.

Everything is available with logarithmic arguments (``*_logarg`` take
log(a); ``log_derivative_logarg`` and ``log_value`` also return logs), so
profiles stay meaningful where a = kappa/h(x) overflows float64.
"""
from __future__ import annotations

import math

import numpy as np

_ETA_MIN = 1e-300
_ETA_MAX = 1e300
_LOG_ETA_MIN = -745.0
_LOG_ETA_MAX = 705.0
_LOG_TOL = 1e-13
_FLAT_REL = 1e-12
_LOG8 = math.log(8.0)


def _bisect_first_true(pred, lo, hi, tol):
    """Smallest point in [lo, hi] with pred true, given pred(lo) = False,
    pred(hi) = True and pred monotone."""
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if pred(mid):
            hi = mid
        else:
            lo = mid
    return hi


class ConcaveConjugate:
    """gbar(a) = inf_eta [a eta + g(eta)] with one-sided derivatives."""

    def __init__(self, g):
        self.g = g
        self._exact = g.exact_neg_derivative
        self._power = getattr(g, "_as_power_law", None)

    # -- exact-slope minimizers, in log space --------------------------------

    def _log_eta_edge(self, log_a, side):
        """log of the smallest ("plus") or largest ("minus") minimizer."""
        if log_a == math.inf:
            return -math.inf
        if self._power is not None:
            c, q = self._power
            return (math.log(c * q) - log_a) / (q + 1.0)
        slope = self.g.log_neg_derivative_from_log
        if side == "plus":
            pred = lambda lb: slope(lb) <= log_a
        else:
            pred = lambda lb: slope(lb) < log_a
        lb = 0.0
        if pred(lb):
            hi = lb
            while True:
                lb -= _LOG8
                if lb < _LOG_ETA_MIN:
                    return -math.inf
                if not pred(lb):
                    break
                hi = lb
            lo = lb
        else:
            lo = lb
            while True:
                lb += _LOG8
                if lb > _LOG_ETA_MAX:
                    return math.inf
                if pred(lb):
                    break
                lo = lb
            hi = lb
        return _bisect_first_true(pred, lo, hi, _LOG_TOL)

    # -- generic (quadrature-backed) path ------------------------------------

    def _objective(self, a, eta):
        return a * eta + self.g.value(eta)

    def _golden_minimum(self, a):
        ks = np.arange(-80, 81)
        etas = np.exp2(ks.astype(float))
        vals = np.array([self._objective(a, e) for e in etas])
        k = int(np.argmin(vals))
        lo = etas[max(k - 1, 0)]
        hi = etas[min(k + 1, len(etas) - 1)]
        invphi = (math.sqrt(5.0) - 1.0) / 2.0
        x1 = hi - invphi * (hi - lo)
        x2 = lo + invphi * (hi - lo)
        f1, f2 = self._objective(a, x1), self._objective(a, x2)
        for _ in range(300):
            if hi - lo <= 1e-14 * max(1.0, hi):
                break
            if f1 <= f2:
                hi, x2, f2 = x2, x1, f1
                x1 = hi - invphi * (hi - lo)
                f1 = self._objective(a, x1)
            else:
                lo, x1, f1 = x1, x2, f2
                x2 = lo + invphi * (hi - lo)
                f2 = self._objective(a, x2)
        eta0 = 0.5 * (lo + hi)
        return eta0, self._objective(a, eta0)

    def _flat_edge(self, a, eta0, f0, direction):
        """Edge of the sublevel set {F <= f0 (1 + flat tolerance)}."""
        cap = f0 + _FLAT_REL * max(1.0, abs(f0))
        inside = lambda b: self._objective(a, b) <= cap
        if direction < 0:
            lo = eta0
            while inside(lo) and lo > _ETA_MIN:
                lo /= 2.0
            if lo <= _ETA_MIN:
                return 0.0
            return _bisect_first_true(inside, lo, eta0, 0.0)
        hi = eta0
        while inside(hi) and hi < _ETA_MAX:
            hi *= 2.0
        if hi >= _ETA_MAX:
            return math.inf
        first_out = _bisect_first_true(lambda b: not inside(b), eta0, hi, 0.0)
        return float(np.nextafter(first_out, 0.0))

    # -- public API ----------------------------------------------------------

    def derivative(self, a, side="plus"):
        """One-sided derivative of gbar at a > 0: the smallest ("plus") or
        largest ("minus") minimizer of eta -> a eta + g(eta).  At a = 0 the
        minimizers run off to infinity and +inf is returned."""
        if a < 0:
            raise ValueError("a must be >= 0")
        if a == 0.0:
            return math.inf
        return self.derivative_logarg(math.log(a), side=side)

    def derivative_logarg(self, log_a, side="plus"):
        """derivative() with the argument given as log(a)."""
        if side not in ("plus", "minus"):
            raise ValueError("side must be 'plus' or 'minus'")
        if self._exact:
            le = self._log_eta_edge(log_a, side)
            if le == -math.inf:
                return 0.0
            return math.exp(le) if le < 709.0 else math.inf
        a = math.exp(min(log_a, 709.0))
        eta0, f0 = self._golden_minimum(a)
        return self._flat_edge(a, eta0, f0, -1 if side == "plus" else +1)

    def log_derivative_logarg(self, log_a, side="plus"):
        """log of the one-sided derivative, from log(a): stays finite where
        the minimizer itself underflows float64."""
        if self._exact:
            return self._log_eta_edge(log_a, side)
        v = self.derivative_logarg(log_a, side)
        return math.log(v) if v > 0 else -math.inf

    def inverse_neg_slope(self, t):
        """inf{ b > 0 : -g'(b) <= t }: right-continuous inverse of the slope
        map; coincides with gbar'_plus(t).  Returns +inf at t = 0."""
        return self.derivative(t, side="plus")

    def inverse_neg_slope_logarg(self, log_t):
        return self.derivative_logarg(log_t, side="plus")

    def value(self, a):
        """gbar(a); gbar(0) = 0, and for bounded losses gbar saturates at
        sup phi once a exceeds -g'(0+)."""
        if a < 0:
            raise ValueError("a must be >= 0")
        if a == 0.0:
            return 0.0
        if self._exact:
            lv = self.log_value(math.log(a))
            if lv == -math.inf:
                return 0.0
            return math.exp(lv) if lv < 709.0 else math.inf
        eta0, f0 = self._golden_minimum(a)
        sup = self.g.phi_sup
        return min(f0, sup) if math.isfinite(sup) else f0

    def log_value(self, log_a):
        """log gbar(exp(log_a)): both the argument and the result are logs,
        finite across the whole float range of log_a."""
        if self._exact:
            le = self._log_eta_edge(log_a, "plus")
            if le == -math.inf:
                sup = self.g.phi_sup
                return math.log(sup) if sup > 0 else -math.inf
            if le == math.inf:
                return -math.inf
            # log(a eta + g(eta)) = log_a + logaddexp(log eta, log g - log_a)
            return log_a + float(np.logaddexp(
                le, self.g.log_value_from_log(le) - log_a))
        v = self.value(math.exp(min(log_a, 709.0)))
        return math.log(v) if v > 0 else -math.inf

    def __repr__(self):
        return f"ConcaveConjugate({self.g!r})"
