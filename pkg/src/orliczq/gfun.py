"""Cell complexity functions g and the brute-force uniform quantizer search.

g(eta) measures the distortion of quantizing one unit of mass with point
density 1/eta at resolution scale 1: it is nonincreasing and convex on
(0, inf), with g(0+) = sup phi and g(eta) -> 0 as eta -> inf.  Variants:

- ``one_dim_abs(phi)``: d=1, |.| cells:  g(eta) = 2 Int_0^{1/2} phi(t/eta) dt.
  Substituting tau = t/eta gives the exact form g(eta) = 2 eta Phi(1/(2 eta))
  with Phi the loss antiderivative, and
  -g'(eta) = phi(1/(2 eta))/eta - 2 Phi(1/(2 eta)).
- ``sup_cube(phi, d)``: cubic cells under the sup-norm:
  g(eta) = Int_0^{1/2} phi(eta^{-1/d} u) d 2^d u^{d-1} du  (d=1 reduces to
  one_dim_abs and shares its exact path).
- ``hexagon(phi)``: d=2 Euclidean, U uniform on the unit-area regular hexagon:
  g(eta) = E phi(eta^{-1/2} ||U||_2).
- ``power_law(c, p, d)``: g(eta) = c eta^{-p/d} (the classical p-th power
  scaling; one_dim_abs with phi = t^p equals power_law((1/2)^p/(p+1), p, 1)).

Power-structure losses reduce every variant to an exact power law, and the
one-dimensional variants have closed value and slope forms for every loss
family, including log-argument versions (``*_from_log``) that stay finite
when eta underflows float64.  Evaluations above the float overflow threshold
return +inf as a divergence sentinel.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from .orlicz import EXP_OVERFLOW, PhiFunction

# apothem and circumradius of the unit-area regular hexagon
HEX_APOTHEM = (2.0 * math.sqrt(3.0)) ** -0.5
HEX_CIRCUMRADIUS = (2.0 / (3.0 * math.sqrt(3.0))) ** 0.5

_SERIES_Z = 0.25  # below this, the slope of the exp family is summed as a series

_hex_moment_cache: dict[float, float] = {}


def _phi_structure(phi):
    """Reduce a loss to (family, scale, param): ("power", s, p), ("exp", s,
    None) or ("tabulated", s, base)."""
    if phi.kind == "power":
        return "power", 1.0, phi.params["p"]
    if phi.kind == "exp_minus_one":
        return "exp", 1.0, None
    if phi.kind == "tabulated":
        return "tabulated", 1.0, phi
    if phi.kind == "scaled":
        fam, s, param = _phi_structure(phi.params["base"])
        return fam, s / phi.params["delta"], param
    raise AssertionError(phi.kind)


def _hex_radial_moment(p):
    """E ||U||^p over the unit-area regular hexagon (cached).

    Polar form with 12-fold symmetry: 12 Int_0^{pi/6} R(th)^{p+2}/(p+2) dth,
    R(th) = apothem / cos(th).  For p = 2 this equals 5/(18 sqrt 3).
    """
    if p not in _hex_moment_cache:
        val, _ = quad(
            lambda th: (HEX_APOTHEM / math.cos(th)) ** (p + 2.0) / (p + 2.0),
            0.0, math.pi / 6.0, epsrel=1e-13,
        )
        _hex_moment_cache[p] = 12.0 * val
    return _hex_moment_cache[p]


def _exp_slope_series(z):
    """-g'/scale for the exp family at z = 1/(2 eta):
    sum_{k>=2} 2 (k-1)/k! z^k, accurate for z < 1."""
    term = z * z  # k = 2 term
    total = term
    k = 2
    while True:
        k += 1
        term *= z * (k - 1.0) / (k * (k - 2.0))
        total += term
        if term < 1e-18 * total or k > 60:
            return total


class ComplexityFunction:
    """Nonincreasing convex cell complexity g on (0, inf)."""

    def __init__(self, variant, phi=None, dimension=1, c=None, p=None,
                 quadrature_points=192):
        self.variant = variant
        self.phi = phi
        self.dimension = int(dimension)
        self.c = c
        self.p = p
        self.quadrature_points = int(quadrature_points)
        if phi is not None:
            self._family, self._scale, _ = _phi_structure(phi)
        else:
            self._family, self._scale = None, None
        self._as_power_law = self._reduce_power_law()
        self._one_dim = (variant in ("one_dim_abs", "sup_cube")
                         and self.dimension == 1)
        if self._one_dim and self._family == "tabulated":
            # -g' is constant below this scale: phi saturated over the cell
            self._tab_eta_flat = 0.5 / float(self._tab_base()._t[-1])
        else:
            self._tab_eta_flat = 0.0

    def _tab_base(self):
        base = self.phi
        while base.kind == "scaled":
            base = base.params["base"]
        return base

    # -- constructors ------------------------------------------------------

    @classmethod
    def one_dim_abs(cls, phi):
        return cls("one_dim_abs", phi=phi, dimension=1)

    @classmethod
    def sup_cube(cls, phi, dimension):
        if dimension < 1:
            raise ValueError("dimension must be >= 1")
        return cls("sup_cube", phi=phi, dimension=dimension)

    @classmethod
    def hexagon(cls, phi):
        return cls("hexagon", phi=phi, dimension=2)

    @classmethod
    def power_law(cls, c, p, dimension):
        if not (c > 0 and p > 0):
            raise ValueError("power_law needs c > 0 and p > 0")
        return cls("power_law", dimension=int(dimension), c=float(c), p=float(p))

    # -- structure ---------------------------------------------------------

    def _reduce_power_law(self):
        """(c, q) with g(eta) = c eta^{-q} when the loss has power structure."""
        if self.variant == "power_law":
            return self.c, self.p / self.dimension
        if self._family != "power":
            return None
        _, s, p = _phi_structure(self.phi)
        d = self.dimension
        if self.variant in ("one_dim_abs", "sup_cube"):
            c = s * d * 2.0 ** d * 0.5 ** (p + d) / (p + d)
            return c, p / d
        if self.variant == "hexagon":
            return s * _hex_radial_moment(p), p / 2.0
        return None

    @property
    def phi_sup(self):
        """g(0+) = sup phi (+inf for unbounded losses and power laws)."""
        if self.variant == "power_law":
            return math.inf
        return self.phi.sup_value

    @property
    def exact_neg_derivative(self):
        """True when -g' is available in closed form (no finite differences)."""
        return self._as_power_law is not None or self._one_dim

    # -- evaluation --------------------------------------------------------

    def value(self, eta):
        """g(eta); eta = 0 returns sup phi, divergent quadrature returns +inf."""
        if eta < 0:
            raise ValueError("eta must be >= 0")
        if eta == 0.0:
            return self.phi_sup
        if self._as_power_law is not None:
            c, q = self._as_power_law
            return c * eta ** -q
        if self._one_dim:
            if self._family == "exp":
                z = 0.5 / eta
                if z > EXP_OVERFLOW:
                    return math.inf
                return self._scale * (2.0 * eta * math.expm1(z) - 1.0)
            zeta = 0.5 / eta
            return 2.0 * eta * self.phi.scalar_antiderivative(zeta)
        if self.variant == "sup_cube":
            return self._sup_cube_quad(eta)
        if self.variant == "hexagon":
            return self._hexagon_quad(eta)
        raise AssertionError(self.variant)

    __call__ = value

    def log_value(self, eta):
        """log g(eta), finite even where g overflows float64 (exp losses)."""
        if eta <= 0:
            raise ValueError("eta must be > 0")
        return self.log_value_from_log(math.log(eta))

    def log_value_from_log(self, log_eta):
        """log g(exp(log_eta)); the argument may lie beyond float64 range."""
        if self._as_power_law is not None:
            c, q = self._as_power_law
            return math.log(c) - q * log_eta
        if self._one_dim and self._family == "exp":
            if log_eta < -700.0:
                # g ~ 2 s eta e^z with z = 1/(2 eta)
                if -log_eta - math.log(2.0) > 709.0:
                    return math.inf
                z = 0.5 * math.exp(-log_eta)
                return math.log(2.0 * self._scale) + log_eta + z
            eta = math.exp(log_eta)
            z = 0.5 / eta
            if z > 500.0:
                # log g stays finite long after g overflows float64
                return (math.log(self._scale) + math.log(2.0 * eta) + z
                        + math.log1p(-(2.0 * eta + 1.0) * math.exp(-z)
                                     / (2.0 * eta)))
            v = self.value(eta)
            return math.log(v) if v > 0 else -math.inf
        if self._one_dim and self._family == "tabulated":
            # g = sup - 2 B eta below the saturation scale; -> log sup
            if self._tab_eta_flat > 0 and log_eta < math.log(self._tab_eta_flat) - 40:
                return math.log(self.phi_sup)
            v = self.value(math.exp(log_eta))
            return math.log(v) if v > 0 else -math.inf
        eta = math.exp(min(log_eta, 709.0)) if log_eta > -745 else 5e-324
        v = self.value(eta)
        if v > 0:
            return math.log(v) if math.isfinite(v) else math.inf
        return -math.inf

    def neg_derivative(self, eta):
        """-g'(eta) >= 0, exact for variants with closed derivative forms."""
        if eta <= 0:
            raise ValueError("eta must be > 0")
        if self._as_power_law is not None:
            c, q = self._as_power_law
            return c * q * eta ** (-q - 1.0)
        if self._one_dim:
            if self._family == "exp":
                z = 0.5 / eta
                if z < _SERIES_Z:
                    return self._scale * _exp_slope_series(z)
                if z > EXP_OVERFLOW:
                    return math.inf
                return self._scale * (2.0 + math.exp(z) * (1.0 / eta - 2.0))
            zeta = 0.5 / eta
            return (self.phi.scalar_value(zeta) / eta
                    - 2.0 * self.phi.scalar_antiderivative(zeta))
        raise ValueError("no exact derivative for this variant; use derivative()")

    def log_neg_derivative(self, eta):
        """log(-g'(eta)), stable for exp losses far into the steep region."""
        if eta <= 0:
            raise ValueError("eta must be > 0")
        return self.log_neg_derivative_from_log(math.log(eta))

    def log_neg_derivative_from_log(self, log_eta):
        """log(-g'(exp(log_eta))); finite for log_eta far below float range."""
        if self._as_power_law is not None:
            c, q = self._as_power_law
            return math.log(c * q) - (q + 1.0) * log_eta
        if not self._one_dim:
            raise ValueError("no exact derivative for this variant")
        if self._family == "exp":
            if -log_eta > 709.0 - math.log(2.0):
                return math.inf  # z = 1/(2 eta) beyond float range
            z = 0.5 * math.exp(-log_eta)
            if z == 0.0:
                return -math.inf
            if z < _SERIES_Z:
                return math.log(self._scale) + math.log(_exp_slope_series(z))
            if z <= 500.0:
                return math.log(self.neg_derivative(math.exp(log_eta)))
            # -g' = s e^z / eta (1 - 2 eta (1 - e^{-z})), z = 1/(2 eta)
            return (math.log(self._scale) + z - log_eta
                    + math.log1p(-2.0 * math.exp(log_eta)
                                 * (1.0 - math.exp(-z))))
        # tabulated: -g' is constant below the saturation scale
        if self._tab_eta_flat > 0 and log_eta < math.log(self._tab_eta_flat):
            eta = self._tab_eta_flat
        else:
            eta = math.exp(log_eta)
        v = self.neg_derivative(eta)
        return math.log(v) if v > 0 else -math.inf

    def derivative(self, eta):
        """g'(eta) <= 0: closed form where available, else a central finite
        difference with step eta * 1e-6."""
        if eta <= 0:
            raise ValueError("eta must be > 0")
        if self.exact_neg_derivative:
            return -self.neg_derivative(eta)
        h = eta * 1e-6
        return (self.value(eta + h) - self.value(eta - h)) / (2.0 * h)

    # -- numeric backends ---------------------------------------------------

    def _sup_cube_quad(self, eta):
        d = self.dimension
        b = eta ** (1.0 / d)
        probe = float(self.phi(0.5 / b)) if 0.5 / b < EXP_OVERFLOW else math.inf
        if math.isinf(probe):
            return math.inf

        def f(u):
            return float(self.phi(u / b)) * d * 2.0 ** d * u ** (d - 1.0)

        pts = None
        if self._family == "tabulated":
            knots = self._tab_base()._t * b
            pts = [t for t in knots if 0.0 < t < 0.5] or None
        val, _ = quad(f, 0.0, 0.5, epsrel=1e-11, limit=200, points=pts)
        return val

    def _hexagon_quad(self, eta):
        b = math.sqrt(eta)
        if HEX_CIRCUMRADIUS / b > EXP_OVERFLOW:
            return math.inf
        # 12 Int_0^{pi/6} Int_0^1 phi(u R(th)/b) R(th)^2 u du dth via tensor
        # Gauss-Legendre with order doubling until 1e-9 relative agreement
        prev = None
        order = self.quadrature_points // 4
        for _ in range(4):
            xs, ws = np.polynomial.legendre.leggauss(order)
            th = (xs + 1.0) * (math.pi / 12.0)
            wth = ws * (math.pi / 12.0)
            us = (xs + 1.0) * 0.5
            wu = ws * 0.5
            R = HEX_APOTHEM / np.cos(th)
            args = np.outer(us, R) / b
            vals = self.phi(args) * (us[:, None] * wu[:, None]) * (R * R * wth)[None, :]
            if np.any(np.isinf(vals)):
                return math.inf
            cur = 12.0 * float(np.sum(vals))
            if prev is not None and abs(cur - prev) <= 1e-9 * max(abs(cur), 1e-300):
                return cur
            prev = cur
            order *= 2
        return prev

    def __repr__(self):
        if self.variant == "power_law":
            return f"ComplexityFunction.power_law({self.c}, {self.p}, {self.dimension})"
        return f"ComplexityFunction({self.variant!r}, {self.phi!r}, d={self.dimension})"


# -- brute-force uniform quantizer search -----------------------------------

@dataclass
class UniformQuantizerResult:
    """Best codebook found for the uniform source on [0, 1)."""
    n: int
    eta: float
    value: float
    points: np.ndarray


def _golden(f, a, b, tol=1e-11, max_iter=200):
    """Golden-section minimum of a unimodal f on [a, b]."""
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    x1 = b - invphi * (b - a)
    x2 = a + invphi * (b - a)
    f1, f2 = f(x1), f(x2)
    for _ in range(max_iter):
        if b - a <= tol * max(1.0, abs(a) + abs(b)):
            break
        if f1 <= f2:
            b, x2, f2 = x2, x1, f1
            x1 = b - invphi * (b - a)
            f1 = f(x1)
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + invphi * (b - a)
            f2 = f(x2)
    return 0.5 * (a + b)


def uniform_codebook_search(phi, n, eta, restarts=4, seed=0, max_sweeps=500,
                            move_tol=1e-12):
    """Minimize E phi((n/eta) |X - nearest point|), X uniform on [0, 1).

    Alternating descent: Voronoi boundaries at neighbor midpoints, then each
    cell's point re-optimized by golden section.  Multistart over the exact
    midpoint grid plus ``restarts`` jittered grids; the best run wins.  For
    convex phi the optimum is the midpoint grid and the value equals g(eta)
    of the one_dim_abs variant, independent of n.
    """
    if not (1 <= n <= 256):
        raise ValueError("n must be between 1 and 256")
    if not (eta > 0):
        raise ValueError("eta must be > 0")
    lam = n / eta

    def cell_cost(a, b, c):
        return (phi.scalar_antiderivative(lam * (c - a))
                + phi.scalar_antiderivative(lam * (b - c))) / lam

    def total_cost(pts):
        bounds = np.empty(n + 1)
        bounds[0], bounds[-1] = 0.0, 1.0
        bounds[1:-1] = 0.5 * (pts[1:] + pts[:-1])
        return float(sum(cell_cost(bounds[i], bounds[i + 1], pts[i]) for i in range(n)))

    def descend(pts):
        pts = np.sort(pts.copy())
        for _ in range(max_sweeps):
            bounds = np.empty(n + 1)
            bounds[0], bounds[-1] = 0.0, 1.0
            bounds[1:-1] = 0.5 * (pts[1:] + pts[:-1])
            new = np.empty_like(pts)
            for i in range(n):
                a, b = bounds[i], bounds[i + 1]
                new[i] = _golden(lambda c: cell_cost(a, b, c), a, b)
            moved = float(np.max(np.abs(new - pts)))
            pts = np.sort(new)
            if moved < move_tol:
                break
        return pts, total_cost(pts)

    grid = (2.0 * np.arange(n) + 1.0) / (2.0 * n)
    starts = [grid]
    rng = np.random.Generator(np.random.Philox(key=seed))
    for _ in range(restarts):
        jitter = rng.uniform(-0.3, 0.3, size=n) / n
        starts.append(np.clip(grid + jitter, 0.0, 1.0))

    best_pts, best_val = None, math.inf
    for s in starts:
        pts, val = descend(s)
        if val < best_val:
            best_pts, best_val = pts, val
    return UniformQuantizerResult(n=n, eta=eta, value=best_val, points=best_pts)
