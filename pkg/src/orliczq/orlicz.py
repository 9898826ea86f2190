"""Orlicz loss functions, norm geometry, and the sample Orlicz norm.

A loss function phi: [0, inf) -> [0, inf] is nondecreasing and left-continuous
with lim_{t -> 0+} phi(t) = 0 and phi not identically zero.  The (Luxemburg
style) Orlicz norm of a finite sample of distances d_1, ..., d_n is

    ||d||_phi = inf { t > 0 : (1/n) sum_i phi(d_i / t) <= 1 },

computed by bisection on the nonincreasing map t -> mean phi(d/t).  When phi is
bounded and the feasible set is all of (0, inf), the infimum is 0.
"""
from __future__ import annotations

import bisect
import math

import numpy as np

# Arguments above this threshold make exp(t) - 1 overflow float64; the loss is
# treated as +inf there so monotone bisection still works.
EXP_OVERFLOW = 700.0


class PhiFunction:
    """A nondecreasing loss on [0, inf) with phi(0+) = 0.

    Instances are callable on scalars or arrays.  Variants:

    - ``power(p)``:          t^p with p > 0 (unbounded)
    - ``exp_minus_one()``:   e^t - 1 (unbounded; +inf above the overflow cap)
    - ``scaled(base, delta)``: base(t) / delta with delta > 0
    - ``tabulated(knots)``:  piecewise-linear through (t_k, v_k), constant
      beyond the last knot (bounded, sup = v_last)
    """

    def __init__(self, kind, **params):
        self.kind = kind
        self.params = params

    # -- constructors ------------------------------------------------------

    @classmethod
    def power(cls, p):
        if not (p > 0):
            raise ValueError("power loss needs exponent p > 0 so that phi(0+) = 0")
        return cls("power", p=float(p))

    @classmethod
    def exp_minus_one(cls):
        return cls("exp_minus_one")

    @classmethod
    def scaled(cls, base, delta):
        if not (delta > 0):
            raise ValueError("scale delta must be positive")
        if not isinstance(base, PhiFunction):
            raise TypeError("base must be a PhiFunction")
        return cls("scaled", base=base, delta=float(delta))

    @classmethod
    def tabulated(cls, knots):
        pts = np.asarray(knots, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != 2 or pts.shape[0] < 1:
            raise ValueError("knots must be a nonempty list of (t, value) pairs")
        t, v = pts[:, 0], pts[:, 1]
        if t[0] < 0:
            raise ValueError("knot abscissae must be >= 0")
        if np.any(np.diff(t) <= 0):
            raise ValueError("knot abscissae must be strictly increasing")
        if np.any(v < 0) or np.any(np.diff(v) < 0):
            raise ValueError("knot values must be nonnegative and nondecreasing")
        if t[0] > 0:
            # anchor at the origin so that phi(0) = 0
            t = np.concatenate(([0.0], t))
            v = np.concatenate(([0.0], v))
        elif v[0] != 0.0:
            raise ValueError("a knot at t = 0 must carry value 0")
        if v[-1] == 0.0:
            raise ValueError("loss must not be identically zero")
        obj = cls("tabulated")
        obj._t = t
        obj._v = v
        # cumulative integral of phi at the knots (phi linear per segment)
        seg = 0.5 * (v[1:] + v[:-1]) * np.diff(t)
        obj._cum = np.concatenate(([0.0], np.cumsum(seg)))
        obj._t_list = t.tolist()
        obj._v_list = v.tolist()
        obj._cum_list = obj._cum.tolist()
        return obj

    # -- evaluation --------------------------------------------------------

    def __call__(self, t):
        arr = np.asarray(t, dtype=float)
        if np.any(arr < 0):
            raise ValueError("loss arguments must be >= 0")
        out = self._eval(arr)
        return float(out) if np.isscalar(t) or arr.ndim == 0 else out

    def _eval(self, t):
        if self.kind == "power":
            return t ** self.params["p"]
        if self.kind == "exp_minus_one":
            safe = np.where(t > EXP_OVERFLOW, 0.0, t)
            return np.where(t > EXP_OVERFLOW, np.inf, np.expm1(safe))
        if self.kind == "scaled":
            return self.params["base"]._eval(t) / self.params["delta"]
        if self.kind == "tabulated":
            return np.interp(t, self._t, self._v)
        raise AssertionError(self.kind)

    def log_value(self, t):
        """log phi(t) for a scalar t > 0, stable for very large arguments."""
        if self.kind == "exp_minus_one":
            if t > 36.0:  # log(e^t - 1) = t + log(1 - e^-t)
                return t + math.log1p(-math.exp(-t)) if t < EXP_OVERFLOW else t
            v = math.expm1(t)
            return math.log(v) if v > 0 else -math.inf
        if self.kind == "power":
            return self.params["p"] * math.log(t) if t > 0 else -math.inf
        if self.kind == "scaled":
            return self.params["base"].log_value(t) - math.log(self.params["delta"])
        v = float(self(t))
        return math.log(v) if v > 0 else -math.inf

    def antiderivative(self, s):
        """Phi(s) = int_0^s phi(u) du, exact per variant (used by cell costs)."""
        arr = np.asarray(s, dtype=float)
        if np.any(arr < 0):
            raise ValueError("antiderivative argument must be >= 0")
        out = self._antideriv(arr)
        return float(out) if np.isscalar(s) or arr.ndim == 0 else out

    def _antideriv(self, s):
        if self.kind == "power":
            p = self.params["p"]
            return s ** (p + 1.0) / (p + 1.0)
        if self.kind == "exp_minus_one":
            safe = np.where(s > EXP_OVERFLOW, 0.0, s)
            return np.where(s > EXP_OVERFLOW, np.inf, np.expm1(safe) - safe)
        if self.kind == "scaled":
            return self.params["base"]._antideriv(s) / self.params["delta"]
        if self.kind == "tabulated":
            t, v, cum = self._t, self._v, self._cum
            idx = np.clip(np.searchsorted(t, s, side="right") - 1, 0, len(t) - 1)
            base = cum[idx]
            inside = idx < len(t) - 1
            # slope of phi on the active segment; constant sup beyond the end
            nxt = np.minimum(idx + 1, len(t) - 1)
            width = np.where(inside, t[nxt] - t[idx], 1.0)
            slope = np.where(inside, (v[nxt] - v[idx]) / width, 0.0)
            ds = s - t[idx]
            return base + v[idx] * ds + 0.5 * slope * ds * ds
        raise AssertionError(self.kind)

    def scalar_value(self, t):
        """phi(t) for a python float, bypassing array dispatch (hot loops)."""
        if self.kind == "power":
            return t ** self.params["p"]
        if self.kind == "exp_minus_one":
            return math.expm1(t) if t <= EXP_OVERFLOW else math.inf
        if self.kind == "scaled":
            return self.params["base"].scalar_value(t) / self.params["delta"]
        tl, vl = self._t_list, self._v_list
        if t >= tl[-1]:
            return vl[-1]
        i = bisect.bisect_right(tl, t) - 1
        t0, t1 = tl[i], tl[i + 1]
        return vl[i] + (vl[i + 1] - vl[i]) * (t - t0) / (t1 - t0)

    def scalar_antiderivative(self, s):
        """Phi(s) for a python float, bypassing array dispatch (hot loops)."""
        if self.kind == "power":
            p = self.params["p"]
            return s ** (p + 1.0) / (p + 1.0)
        if self.kind == "exp_minus_one":
            return math.expm1(s) - s if s <= EXP_OVERFLOW else math.inf
        if self.kind == "scaled":
            return self.params["base"].scalar_antiderivative(s) / self.params["delta"]
        tl, vl, cl = self._t_list, self._v_list, self._cum_list
        if s >= tl[-1]:
            return cl[-1] + vl[-1] * (s - tl[-1])
        i = bisect.bisect_right(tl, s) - 1
        ds = s - tl[i]
        slope = (vl[i + 1] - vl[i]) / (tl[i + 1] - tl[i])
        return cl[i] + (vl[i] + 0.5 * slope * ds) * ds

    @property
    def sup_value(self):
        if self.kind in ("power", "exp_minus_one"):
            return math.inf
        if self.kind == "scaled":
            return self.params["base"].sup_value / self.params["delta"]
        if self.kind == "tabulated":
            return float(self._v[-1])
        raise AssertionError(self.kind)

    @property
    def is_bounded(self):
        return math.isfinite(self.sup_value)

    def __repr__(self):
        if self.kind == "power":
            return f"PhiFunction.power({self.params['p']})"
        if self.kind == "exp_minus_one":
            return "PhiFunction.exp_minus_one()"
        if self.kind == "scaled":
            return f"PhiFunction.scaled({self.params['base']!r}, {self.params['delta']})"
        return f"PhiFunction.tabulated(<{len(self._t)} knots>)"


class NormSpace:
    """Finite-dimensional norm geometry: |.| (d=1), sup-norm, or Euclidean."""

    KINDS = ("abs", "sup", "euclidean")

    def __init__(self, dimension, kind):
        if kind not in self.KINDS:
            raise ValueError(f"unknown norm kind {kind!r}")
        if dimension < 1:
            raise ValueError("dimension must be >= 1")
        if kind == "abs" and dimension != 1:
            raise ValueError("abs norm is one-dimensional")
        self.dimension = int(dimension)
        self.kind = kind

    def norm(self, x):
        """Norm of a point (d,) or rowwise norms of points (n, d).

        In dimension 1 plain scalars and flat arrays are accepted as well.
        """
        arr = np.asarray(x, dtype=float)
        if self.dimension == 1:
            out = np.abs(arr if arr.ndim <= 1 else arr[:, 0])
            return float(out) if arr.ndim == 0 else out
        if arr.ndim == 1:
            if arr.shape[0] != self.dimension:
                raise ValueError("point has wrong dimension")
            arr = arr[None, :]
            single = True
        else:
            single = False
        if self.kind == "sup":
            out = np.max(np.abs(arr), axis=1)
        else:
            out = np.sqrt(np.sum(arr * arr, axis=1))
        return float(out[0]) if single else out

    @property
    def covering_constant(self):
        """c_E with: a cubic grid of k^d points covers the centered ball of
        radius r within norm distance c_E * r / k."""
        if self.kind == "euclidean":
            return math.sqrt(self.dimension)
        return 1.0

    @property
    def sup_equivalence(self):
        """(lo, hi) with lo * sup_norm <= norm <= hi * sup_norm."""
        if self.kind == "euclidean":
            return 1.0, math.sqrt(self.dimension)
        return 1.0, 1.0

    def __repr__(self):
        return f"NormSpace({self.dimension}, {self.kind!r})"


def orlicz_norm(phi, samples, rel_tol=1e-10, max_iter=300):
    """Orlicz norm of a nonnegative sample under the loss phi.

    Returns t* with mean phi(d / t*) = 1 within rel_tol, or 0.0 when the
    feasibility constraint holds for every t (all-zero sample, or bounded phi
    whose limiting mean sup never exceeds 1).
    """
    d = np.asarray(samples, dtype=float).ravel()
    if d.size == 0:
        raise ValueError("empty sample")
    if np.any(d < 0) or not np.all(np.isfinite(d)):
        raise ValueError("sample entries must be finite and >= 0")
    dmax = float(np.max(d))
    if dmax == 0.0:
        return 0.0

    pos = d[d > 0]
    frac_pos = pos.size / d.size
    if frac_pos * phi.sup_value <= 1.0:
        # mean phi(d/t) <= 1 for every t > 0, so the infimum is 0
        return 0.0

    def mean_at(t):
        vals = phi._eval(pos / t)
        if np.any(np.isinf(vals)):
            return math.inf
        return float(np.sum(vals)) / d.size

    # bracket: mean_at is nonincreasing in t; find lo with mean > 1 >= hi
    lo = hi = dmax
    m = mean_at(lo)
    if m > 1.0:
        for _ in range(200):
            hi *= 2.0
            if mean_at(hi) <= 1.0:
                break
        else:
            raise RuntimeError("no finite Orlicz norm bracket found")
    else:
        for _ in range(1200):
            lo *= 0.5
            if mean_at(lo) > 1.0:
                break
        else:
            return 0.0  # feasible all the way down to subnormals

    for _ in range(max_iter):
        t = 0.5 * (lo + hi)
        m = mean_at(t)
        if abs(m - 1.0) <= rel_tol:
            return t
        if m > 1.0:
            lo = t
        else:
            hi = t
        if hi - lo <= 1e-16 * hi:
            break
    return hi  # feasible endpoint of the collapsed bracket
