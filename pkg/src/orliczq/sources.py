"""Source distributions, tail weights, and the tail growth-condition check.

Continuous sources expose a common duck-typed interface:

- ``dimension``
- ``density(x)`` / ``log_density(x)`` (vectorized; scalar in, float out)
- ``cdf(x)`` and ``core_interval`` for one-dimensional sources
- ``sample(n, rng)`` with a caller-supplied numpy Generator
- ``integrate(f)`` -> (value, error_bound): adaptive quadrature of
  f(x) * (nothing; f already carries any density factors it wants) over the
  support, with infinite tails integrated as separate improper pieces so that
  slowly decaying integrands (~1/x^2) are captured to full precision.

``check_growth_condition`` decides summability of the series

    sum_n  phi(c_E * alpha_n^{-1/d} * r_{n+1}) / Psi(r_n)

entirely in log space, so terms as large as exp(1e5) are handled exactly.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad
from scipy.special import logsumexp

_LOG_2PI = math.log(2.0 * math.pi)
_QUAD_KW = dict(epsabs=1e-12, epsrel=1e-10, limit=200)


def _scalar_out(x, out):
    return float(out) if np.isscalar(x) or np.asarray(x).ndim == 0 else out


def _gauss_cdf(z):
    return 0.5 * (1.0 + math.erf(z / math.sqrt(2.0)))


class Gaussian1D:
    """N(mu, sigma^2) on the line."""

    def __init__(self, mu=0.0, sigma=1.0):
        if not (sigma > 0):
            raise ValueError("sigma must be > 0")
        self.mu = float(mu)
        self.sigma = float(sigma)
        self.dimension = 1

    def log_density(self, x):
        z = (np.asarray(x, dtype=float) - self.mu) / self.sigma
        out = -0.5 * z * z - math.log(self.sigma) - 0.5 * _LOG_2PI
        return _scalar_out(x, out)

    def density(self, x):
        return _scalar_out(x, np.exp(self.log_density(np.asarray(x, dtype=float))))

    def cdf(self, x):
        return _gauss_cdf((x - self.mu) / self.sigma)

    @property
    def core_interval(self):
        return self.mu - 8.0 * self.sigma, self.mu + 8.0 * self.sigma

    def sample(self, n, rng):
        return rng.normal(self.mu, self.sigma, size=n)

    def integrate(self, f):
        lo, hi = self.core_interval
        total, err = 0.0, 0.0
        for piece in ((-np.inf, lo), (lo, hi), (hi, np.inf)):
            pts = [self.mu] if np.isfinite(piece[0]) and np.isfinite(piece[1]) else None
            v, e = quad(f, *piece, points=pts, **_QUAD_KW)
            total += v
            err += e
        return total, err

    def __repr__(self):
        return f"Gaussian1D(mu={self.mu}, sigma={self.sigma})"


class GaussianMixture1D:
    """Finite Gaussian mixture sum_k w_k N(mu_k, sigma_k^2)."""

    def __init__(self, weights, means, sigmas):
        w = np.asarray(weights, dtype=float)
        m = np.asarray(means, dtype=float)
        s = np.asarray(sigmas, dtype=float)
        if not (w.ndim == m.ndim == s.ndim == 1 and len(w) == len(m) == len(s) >= 1):
            raise ValueError("weights, means, sigmas must be equal-length 1-d")
        if np.any(w <= 0) or not math.isclose(float(w.sum()), 1.0, rel_tol=1e-12):
            raise ValueError("weights must be positive and sum to 1")
        if np.any(s <= 0):
            raise ValueError("sigmas must be > 0")
        self.weights, self.means, self.sigmas = w, m, s
        self.dimension = 1

    def log_density(self, x):
        x = np.asarray(x, dtype=float)
        z = (x[..., None] - self.means) / self.sigmas
        comp = (-0.5 * z * z - np.log(self.sigmas) - 0.5 * _LOG_2PI
                + np.log(self.weights))
        out = logsumexp(comp, axis=-1)
        return _scalar_out(x, out)

    def density(self, x):
        return _scalar_out(x, np.exp(self.log_density(x)))

    def cdf(self, x):
        return float(sum(w * _gauss_cdf((x - m) / s) for w, m, s in
                         zip(self.weights, self.means, self.sigmas)))

    @property
    def core_interval(self):
        return (float(np.min(self.means - 8.0 * self.sigmas)),
                float(np.max(self.means + 8.0 * self.sigmas)))

    def sample(self, n, rng):
        comp = rng.choice(len(self.weights), size=n, p=self.weights)
        return rng.normal(self.means[comp], self.sigmas[comp])

    def integrate(self, f):
        lo, hi = self.core_interval
        total, err = 0.0, 0.0
        inner_pts = sorted(float(m) for m in self.means)
        for piece, pts in (((-np.inf, lo), None), ((lo, hi), inner_pts),
                           ((hi, np.inf), None)):
            v, e = quad(f, *piece, points=pts, **_QUAD_KW)
            total += v
            err += e
        return total, err

    def __repr__(self):
        return (f"GaussianMixture1D({self.weights.tolist()}, "
                f"{self.means.tolist()}, {self.sigmas.tolist()})")


class UniformBox:
    """Uniform distribution on a box prod_i [lo_i, hi_i] (d = 1 allows scalars)."""

    def __init__(self, lo, hi):
        lo_arr = np.atleast_1d(np.asarray(lo, dtype=float))
        hi_arr = np.atleast_1d(np.asarray(hi, dtype=float))
        if lo_arr.shape != hi_arr.shape or lo_arr.ndim != 1:
            raise ValueError("lo and hi must be scalars or equal-length vectors")
        if np.any(hi_arr <= lo_arr):
            raise ValueError("need hi > lo in every coordinate")
        self.lo, self.hi = lo_arr, hi_arr
        self.dimension = len(lo_arr)
        self.volume = float(np.prod(hi_arr - lo_arr))

    def density(self, x):
        x = np.asarray(x, dtype=float)
        if self.dimension == 1:
            inside = (x >= self.lo[0]) & (x <= self.hi[0])
            return _scalar_out(x, np.where(inside, 1.0 / self.volume, 0.0))
        pts = np.atleast_2d(x)
        inside = np.all((pts >= self.lo) & (pts <= self.hi), axis=1)
        out = np.where(inside, 1.0 / self.volume, 0.0)
        return float(out[0]) if x.ndim == 1 else out

    def log_density(self, x):
        d = self.density(x)
        with np.errstate(divide="ignore"):
            out = np.log(d)
        return _scalar_out(d, out)

    def cdf(self, x):
        if self.dimension != 1:
            raise ValueError("cdf is defined for 1-d boxes only")
        return float(np.clip((x - self.lo[0]) / (self.hi[0] - self.lo[0]), 0.0, 1.0))

    @property
    def core_interval(self):
        if self.dimension != 1:
            raise ValueError("core_interval is defined for 1-d boxes only")
        return float(self.lo[0]), float(self.hi[0])

    def sample(self, n, rng):
        out = rng.uniform(self.lo, self.hi, size=(n, self.dimension))
        return out[:, 0] if self.dimension == 1 else out

    def integrate(self, f):
        if self.dimension != 1:
            raise ValueError("integrate supports 1-d boxes only")
        return quad(f, self.lo[0], self.hi[0], **_QUAD_KW)

    def __repr__(self):
        return f"UniformBox({self.lo.tolist()}, {self.hi.tolist()})"


class GridDensity:
    """1-d density given by values on a uniform grid, linearly interpolated.

    Values are renormalized so the trapezoid integral over [lo, hi] is 1; the
    density is 0 outside.  Sampling inverts the piecewise-quadratic cdf.
    """

    def __init__(self, values, lo, hi):
        v = np.asarray(values, dtype=float)
        if v.ndim != 1 or len(v) < 2:
            raise ValueError("values must be a 1-d array with >= 2 entries")
        if np.any(v < 0) or not np.any(v > 0):
            raise ValueError("values must be >= 0 and not identically zero")
        if not hi > lo:
            raise ValueError("need hi > lo")
        self.lo, self.hi = float(lo), float(hi)
        self.x = np.linspace(self.lo, self.hi, len(v))
        mass = float(np.trapezoid(v, self.x))
        self.v = v / mass
        self._cum = np.concatenate([[0.0], np.cumsum(
            0.5 * (self.v[1:] + self.v[:-1]) * np.diff(self.x))])
        self.dimension = 1

    def density(self, x):
        x_arr = np.asarray(x, dtype=float)
        out = np.where((x_arr >= self.lo) & (x_arr <= self.hi),
                       np.interp(x_arr, self.x, self.v), 0.0)
        return _scalar_out(x, out)

    def log_density(self, x):
        d = self.density(x)
        with np.errstate(divide="ignore"):
            out = np.log(d)
        return _scalar_out(d, out)

    def cdf(self, x):
        if x <= self.lo:
            return 0.0
        if x >= self.hi:
            return 1.0
        i = int(np.searchsorted(self.x, x, side="right") - 1)
        i = min(i, len(self.x) - 2)
        dx = x - self.x[i]
        slope = (self.v[i + 1] - self.v[i]) / (self.x[i + 1] - self.x[i])
        return float(self._cum[i] + self.v[i] * dx + 0.5 * slope * dx * dx)

    @property
    def core_interval(self):
        return self.lo, self.hi

    def sample(self, n, rng):
        u = rng.uniform(0.0, 1.0, size=n)
        idx = np.clip(np.searchsorted(self._cum, u, side="right") - 1, 0,
                      len(self.x) - 2)
        out = np.empty(n)
        for j, (ui, i) in enumerate(zip(u, idx)):
            a, b = self.x[i], self.x[i + 1]
            va, vb = self.v[i], self.v[i + 1]
            rem = ui - self._cum[i]
            slope = (vb - va) / (b - a)
            if abs(slope) < 1e-300:
                out[j] = a + (rem / va if va > 0 else 0.0)
            else:
                # solve 0.5 s t^2 + va t = rem for t in [0, b - a]
                disc = va * va + 2.0 * slope * rem
                out[j] = a + (math.sqrt(max(disc, 0.0)) - va) / slope
        return np.clip(out, self.lo, self.hi)

    def integrate(self, f):
        return quad(f, self.lo, self.hi, points=list(self.x[1:-1:max(1, len(self.x)//40)]),
                    **_QUAD_KW)

    def __repr__(self):
        return f"GridDensity(<{len(self.v)} values>, {self.lo}, {self.hi})"


# -- tail weights and the growth condition ----------------------------------

class TailWeight:
    """Normalizing weight Psi for tail budgets.

    - ``power_log(p, beta)``: Psi(r) = r^p (log r)^beta (0 at r <= 1 when
      beta > 0)
    - ``exp_power(q)``:       Psi(r) = exp(r^q) - 1
    """

    def __init__(self, kind, **params):
        self.kind = kind
        self.params = params

    @classmethod
    def power_log(cls, p, beta=0.0):
        if p <= 0 or beta < 0:
            raise ValueError("power_log needs p > 0 and beta >= 0")
        return cls("power_log", p=float(p), beta=float(beta))

    @classmethod
    def exp_power(cls, q):
        if q <= 0:
            raise ValueError("exp_power needs q > 0")
        return cls("exp_power", q=float(q))

    def log_value(self, r):
        """log Psi(r); -inf where Psi vanishes."""
        if r <= 0:
            return -math.inf
        if self.kind == "power_log":
            p, beta = self.params["p"], self.params["beta"]
            lr = math.log(r)
            if beta == 0.0:
                return p * lr
            if lr <= 0:
                return -math.inf
            return p * lr + beta * math.log(lr)
        q = self.params["q"]
        rq = r ** q
        if rq > 36.0:
            return rq
        v = math.expm1(rq)
        return math.log(v) if v > 0 else -math.inf

    def value(self, r):
        lv = self.log_value(r)
        return math.exp(lv) if lv < 709.0 else math.inf

    def __repr__(self):
        return f"TailWeight({self.kind!r}, {self.params})"


@dataclass
class TailSpec:
    """Shell radii and per-shell point budgets for tail constructions.

    radii:   r_n = radius_scale * radius_rate^n      (kind "geometric")
             r_n = radius_scale * (n + 1)^radius_rate (kind "power")
    budgets: alpha_n = (n + 2)^(-budget_gamma)
    """
    radius_kind: str = "geometric"
    radius_scale: float = 1.0
    radius_rate: float = 2.0
    budget_gamma: float = 3.0

    def __post_init__(self):
        if self.radius_kind not in ("geometric", "power"):
            raise ValueError("radius_kind must be 'geometric' or 'power'")
        if self.radius_scale <= 0 or self.radius_rate <= 1 or self.budget_gamma <= 1:
            raise ValueError("need radius_scale > 0, radius_rate > 1, "
                             "budget_gamma > 1")

    def radius(self, n):
        if self.radius_kind == "geometric":
            return self.radius_scale * self.radius_rate ** n
        return self.radius_scale * (n + 1.0) ** self.radius_rate

    def budget(self, n):
        return (n + 2.0) ** (-self.budget_gamma)


@dataclass
class GrowthReport:
    """Outcome of the tail growth-condition check."""
    converged: bool
    log_sum: float
    log_remainder: float
    n_terms: int
    skipped_head: int
    peak_index: int
    tail_ratio: float
    message: str
    log_terms: list = field(repr=False, default_factory=list)

    @property
    def verdict(self):
        """Three-way summary: converged / inconclusive / diverging.

        ``inconclusive`` marks a decaying tail whose remainder bound has
        not yet met the tolerance at n_max; rerun with a larger n_max.
        """
        if self.converged:
            return "converged"
        if self.message == "tail decaying but remainder bound above tolerance":
            return "inconclusive"
        return "diverging"


def check_growth_condition(phi, psi, space, tail, n_max=200, rel_tol=1e-9,
                           ratio_window=10):
    """Decide convergence of sum_n phi(c alpha_n^{-1/d} r_{n+1}) / Psi(r_n).

    c is the covering constant of ``space``.  Terms are formed in log space;
    leading +inf terms (where Psi(r_n) = 0) are skipped and counted.  The
    verdict is ``converged`` when the last ``ratio_window`` term ratios are
    all below 1 and the implied geometric remainder is below ``rel_tol``
    relative to the partial sum.
    """
    c = space.covering_constant
    d = space.dimension
    logs = []
    skipped = 0
    for n in range(n_max):
        r_next = tail.radius(n + 1)
        alpha = tail.budget(n)
        arg = c * alpha ** (-1.0 / d) * r_next
        log_term = phi.log_value(arg) - psi.log_value(tail.radius(n))
        if math.isinf(log_term) and log_term > 0:
            if not logs:
                skipped += 1
                continue
            return GrowthReport(False, math.inf, math.inf, n, skipped, n, math.inf,
                                "infinite term after finite head", logs)
        logs.append(log_term)
    if not logs:
        return GrowthReport(False, -math.inf, math.inf, 0, skipped, 0, math.inf,
                            "no finite terms", logs)
    arr = np.asarray(logs)
    log_sum = float(logsumexp(arr))
    peak = int(np.argmax(arr))
    window = arr[-(ratio_window + 1):]
    ratios = np.diff(window)
    if len(ratios) == 0 or np.any(ratios >= 0.0):
        worst = float(np.max(ratios)) if len(ratios) else math.inf
        ratio = math.exp(worst) if worst < 709.0 else math.inf
        return GrowthReport(False, log_sum, math.inf, len(logs), skipped, peak,
                            ratio, "terms not decaying at n_max", logs)
    log_rho = float(np.max(ratios))
    rho = math.exp(log_rho)
    # remainder <= t_last * rho / (1 - rho)
    log_rem = float(arr[-1]) + log_rho - math.log1p(-rho)
    converged = log_rem <= math.log(rel_tol) + log_sum
    msg = ("geometric tail bound met" if converged
           else "tail decaying but remainder bound above tolerance")
    return GrowthReport(converged, log_sum, log_rem, len(logs), skipped, peak,
                        rho, msg, logs)
