"""Optimal point-density allocation under a unit distortion budget.

Given a cell complexity g (through its concave conjugate) and a source
density h, the limiting quantizer point profile solves

    minimize  I(xi) = Int xi(x) dx
    s.t.      C(xi) = Int g(xi(x)) h(x) dx <= budget  (= 1 by default).

Lagrangian duality gives xi^kappa(x) = gbar'(kappa / h(x)) and a scalar
multiplier kappa0 fixed by C(xi^kappa0) = budget; the optimal mass is

    I = Int xi^kappa0 dx  =  (1/kappa0) (Int gbar(kappa0/h) h dx - budget).

All integrands are assembled in log space (exp(log g(xi) + log h) and
exp(log gbar + log h)), so nothing degrades where h underflows float64: the
products stay polynomially decaying even when kappa/h alone overflows.

Two non-smooth regimes are handled explicitly:

- degenerate budget: when sup phi <= budget the zero profile is feasible and
  I = 0 with kappa0 = 0;
- constraint jumps: when -g' has a flat segment (affine pieces of g from
  flat stretches of phi), C(.) jumps across some kappa0 and no multiplier
  attains the budget.  The solver then evaluates the two edge profiles at
  kappa0 (1 -+ delta) and mixes them with the unique alpha restoring
  C = budget; on the affine segment the mixture is exact.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

from .conjugate import ConcaveConjugate

_JUMP_DELTA = 1e-9       # relative kappa offset for jump edge profiles
_JUMP_GAP = 1e-7         # constraint gap that declares a jump
_BUDGET_RTOL = 1e-11     # early-exit tolerance on |C - budget|
_LOG_BRACKET = math.log(1e120)


@dataclass
class AllocationSolution:
    """Solved allocation: multiplier, mass, profile, and consistency data."""
    kappa0: float
    point_mass: float
    constraint_value: float
    dual_value: float
    degenerate: bool
    jump: bool
    alpha_mix: Optional[float]
    xi: Callable[[float], float]
    xi_minus: Callable[[float], float]
    xi_plus: Callable[[float], float]
    diagnostics: dict = field(default_factory=dict)


def xi_profile(conj, source, kappa, side="plus"):
    """x -> gbar'(kappa / h(x)) with the chosen one-sided derivative; 0 where
    h vanishes."""
    log_kappa = math.log(kappa)

    def xi(x):
        log_h = source.log_density(x)
        if log_h == -math.inf:
            return 0.0
        return conj.derivative_logarg(log_kappa - log_h, side=side)

    return xi


def constraint_integral(conj, source, kappa, side="plus"):
    """C(kappa) = Int g(xi^kappa(x)) h(x) dx and its quadrature error bound."""
    g = conj.g
    log_kappa = math.log(kappa)
    log_sup = math.log(g.phi_sup) if math.isfinite(g.phi_sup) else math.inf

    def integrand(x):
        log_h = source.log_density(x)
        if log_h == -math.inf:
            return 0.0
        log_xi = conj.log_derivative_logarg(log_kappa - log_h, side=side)
        if log_xi == -math.inf:
            return math.exp(log_sup + log_h)
        return math.exp(g.log_value_from_log(log_xi) + log_h)

    return source.integrate(integrand)


def constraint_mixture(conj, source, xi_minus, xi_plus, alpha):
    """C of the profile (1 - alpha) xi_minus + alpha xi_plus."""
    g = conj.g
    log_sup = math.log(g.phi_sup) if math.isfinite(g.phi_sup) else math.inf

    def integrand(x):
        log_h = source.log_density(x)
        if log_h == -math.inf:
            return 0.0
        xi = (1.0 - alpha) * xi_minus(x) + alpha * xi_plus(x)
        if xi == 0.0:
            return math.exp(log_sup + log_h)
        return math.exp(g.log_value(xi) + log_h)

    return source.integrate(integrand)


def point_mass_integral(source, xi):
    """I = Int xi(x) dx (Lebesgue), via the source's quadrature layout."""
    return source.integrate(xi)


def dual_integral(conj, source, kappa):
    """Int gbar(kappa / h(x)) h(x) dx, assembled from log gbar."""
    log_kappa = math.log(kappa)

    def integrand(x):
        log_h = source.log_density(x)
        if log_h == -math.inf:
            return 0.0
        return math.exp(conj.log_value(log_kappa - log_h) + log_h)

    return source.integrate(integrand)


def dual_value(conj, source, kappa, budget=1.0):
    """(1/kappa) (Int gbar(kappa/h) dmu - budget): equals I at kappa0."""
    v, _ = dual_integral(conj, source, kappa)
    return (v - budget) / kappa


def membership_check(g, source, xi, budget=1.0, tol=1e-8):
    """Evaluate C(xi) for an arbitrary profile and test C <= budget + tol."""
    log_sup = math.log(g.phi_sup) if math.isfinite(g.phi_sup) else math.inf

    def integrand(x):
        log_h = source.log_density(x)
        if log_h == -math.inf:
            return 0.0
        v = xi(x)
        if v == 0.0:
            return math.exp(log_sup + log_h)
        return math.exp(g.log_value(v) + log_h)

    value, err = source.integrate(integrand)
    return value, value <= budget + tol + err


def solve(g_or_conj, source, budget=1.0, max_iter=200):
    """Solve the allocation problem; returns an AllocationSolution.

    Accepts either a ComplexityFunction or a prebuilt ConcaveConjugate.
    """
    if budget <= 0:
        raise ValueError("budget must be > 0")
    conj = g_or_conj if isinstance(g_or_conj, ConcaveConjugate) \
        else ConcaveConjugate(g_or_conj)
    g = conj.g
    diagnostics = {}

    # feasible at zero cost: every profile including xi = 0 meets the budget
    if g.phi_sup <= budget:
        zero = lambda x: 0.0
        return AllocationSolution(
            kappa0=0.0, point_mass=0.0, constraint_value=g.phi_sup,
            dual_value=0.0, degenerate=True, jump=False, alpha_mix=None,
            xi=zero, xi_minus=zero, xi_plus=zero,
            diagnostics={"reason": "sup phi <= budget"})

    def C(kappa):
        v, e = constraint_integral(conj, source, kappa)
        return v, e

    # bracket the multiplier in log space: C is nondecreasing in kappa
    log_lo = log_hi = 0.0
    c_mid, _ = C(1.0)
    if c_mid < budget:
        while True:
            log_hi += math.log(8.0)
            v, _ = C(math.exp(log_hi))
            if v >= budget:
                break
            if log_hi > _LOG_BRACKET:
                raise RuntimeError("constraint never reaches the budget")
    else:
        while True:
            log_lo -= math.log(8.0)
            v, _ = C(math.exp(log_lo))
            if v < budget:
                break
            if log_lo < -_LOG_BRACKET:
                raise RuntimeError("constraint exceeds the budget at kappa -> 0")

    kappa0 = None
    iters = 0
    for iters in range(max_iter):
        log_mid = 0.5 * (log_lo + log_hi)
        v, _ = C(math.exp(log_mid))
        if abs(v - budget) <= _BUDGET_RTOL * budget:
            kappa0 = math.exp(log_mid)
            break
        if v >= budget:
            log_hi = log_mid
        else:
            log_lo = log_mid
        if log_hi - log_lo <= 1e-15:
            break
    if kappa0 is None:
        kappa0 = math.exp(0.5 * (log_lo + log_hi))
    diagnostics["bisection_iterations"] = iters + 1

    # detect a constraint jump by stepping just off the multiplier
    k_minus = kappa0 * (1.0 - _JUMP_DELTA)
    k_plus = kappa0 * (1.0 + _JUMP_DELTA)
    c_minus, e_minus = C(k_minus)
    c_plus, e_plus = C(k_plus)
    diagnostics["constraint_minus"] = c_minus
    diagnostics["constraint_plus"] = c_plus

    if c_plus - c_minus > _JUMP_GAP * max(1.0, budget):
        xi_minus = xi_profile(conj, source, k_minus, side="plus")
        xi_plus = xi_profile(conj, source, k_plus, side="plus")
        lo_a, hi_a = 0.0, 1.0
        alpha = 0.5
        c_mix = None
        for _ in range(100):
            alpha = 0.5 * (lo_a + hi_a)
            c_mix, _ = constraint_mixture(conj, source, xi_minus, xi_plus, alpha)
            if abs(c_mix - budget) <= _BUDGET_RTOL * budget:
                break
            if c_mix >= budget:
                hi_a = alpha
            else:
                lo_a = alpha

        def xi(x, _a=alpha, _m=xi_minus, _p=xi_plus):
            return (1.0 - _a) * _m(x) + _a * _p(x)

        mass, mass_err = point_mass_integral(source, xi)
        dval = dual_value(conj, source, kappa0, budget)
        diagnostics.update(point_mass_error=mass_err, jump_delta=_JUMP_DELTA)
        return AllocationSolution(
            kappa0=kappa0, point_mass=mass, constraint_value=c_mix,
            dual_value=dval, degenerate=False, jump=True, alpha_mix=alpha,
            xi=xi, xi_minus=xi_minus, xi_plus=xi_plus, diagnostics=diagnostics)

    xi = xi_profile(conj, source, kappa0, side="plus")
    c_val, c_err = C(kappa0)
    mass, mass_err = point_mass_integral(source, xi)
    dval = dual_value(conj, source, kappa0, budget)
    diagnostics.update(constraint_error=c_err, point_mass_error=mass_err)
    return AllocationSolution(
        kappa0=kappa0, point_mass=mass, constraint_value=c_val,
        dual_value=dval, degenerate=False, jump=False, alpha_mix=None,
        xi=xi, xi_minus=xi, xi_plus=xi, diagnostics=diagnostics)
