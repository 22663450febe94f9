"""Closed-form evaluation of mass profiles and derived quantities.

Every derivative and antiderivative here is analytic.  Finite differences
are never used for the mass itself; they would contaminate the residual
budgets of the operator checks downstream.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .domain import (
    AlgebraicMass,
    ConstantMass,
    HyperbolicMass,
    MassProfile,
    OrderingParams,
    SIParams,
)

_LN2 = float(np.log(2.0))


def _log_cosh(x: np.ndarray) -> np.ndarray:
    # log(cosh x) without overflow for large |x|.
    ax = np.abs(x)
    return ax + np.log1p(np.exp(-2.0 * ax)) - _LN2


@dataclass(frozen=True, eq=False)
class MassEval:
    """Mass profile and its analytic derivatives at a set of points.

    ``int_sqrt_m`` is the antiderivative of ``sqrt(m)`` anchored at x = 0.
    """

    m: np.ndarray
    dm: np.ndarray
    d2m: np.ndarray
    sqrt_m: np.ndarray
    int_sqrt_m: np.ndarray


def evaluate(profile: MassProfile, x: np.ndarray) -> MassEval:
    """Evaluate a mass profile at ``x``.

    Parameters
    ----------
    profile : MassProfile
        Any of the supported profiles.  Values outside the admissible
        parameter ranges produce mathematically consistent garbage; run
        :func:`ssusy_em.domain.validate` first.
    x : array_like
        Points at which to evaluate.

    Returns
    -------
    MassEval
        Arrays of the same shape as ``x``.
    """
    x = np.asarray(x, dtype=float)
    if isinstance(profile, ConstantMass):
        root = np.sqrt(profile.m0)
        zeros = np.zeros_like(x)
        return MassEval(
            m=np.full_like(x, profile.m0),
            dm=zeros,
            d2m=zeros.copy(),
            sqrt_m=np.full_like(x, root),
            int_sqrt_m=root * x,
        )
    if isinstance(profile, HyperbolicMass):
        a, b = profile.alpha, profile.beta
        t = np.tanh(x)
        s2 = 1.0 - t * t
        u = a + b * t
        return MassEval(
            m=u * u,
            dm=2.0 * u * b * s2,
            d2m=2.0 * b * b * s2 * s2 - 4.0 * b * u * s2 * t,
            sqrt_m=u,
            int_sqrt_m=a * x + b * _log_cosh(x),
        )
    if isinstance(profile, AlgebraicMass):
        a = profile.alpha
        q = 1.0 + x * x
        u = 1.0 + (a - 1.0) / q
        du = 2.0 * x * (1.0 - a) / (q * q)
        d2u = 2.0 * (1.0 - a) * (1.0 - 3.0 * x * x) / (q * q * q)
        return MassEval(
            m=u * u,
            dm=2.0 * u * du,
            d2m=2.0 * (du * du + u * d2u),
            sqrt_m=u,
            int_sqrt_m=x + (a - 1.0) * np.arctan(x),
        )
    raise TypeError(f"unknown mass profile {type(profile).__name__}")


def inv_sqrt_m_d1(ev: MassEval) -> np.ndarray:
    """First derivative of 1/sqrt(m)."""
    return -ev.dm / (2.0 * ev.m * ev.sqrt_m)


def inv_sqrt_m_d2(ev: MassEval) -> np.ndarray:
    """Second derivative of 1/sqrt(m)."""
    return (3.0 * ev.dm * ev.dm - 2.0 * ev.m * ev.d2m) / (4.0 * ev.m * ev.m * ev.sqrt_m)


def g_function(profile: MassProfile, params: SIParams, x: np.ndarray) -> np.ndarray:
    """Strictly increasing phase ``gamma + lam * int_sqrt_m``."""
    ev = evaluate(profile, np.asarray(x, dtype=float))
    return params.gamma + params.lam * ev.int_sqrt_m


def find_g_node(
    profile: MassProfile,
    params: SIParams,
    search_half_width: float = 20.0,
) -> float | None:
    """Locate the unique zero of the phase on [-w, w], if any.

    The phase is strictly increasing, so plain bisection is exact up to
    roundoff and needs no derivative information.
    """
    return find_g_node_in(profile, params, -search_half_width, search_half_width)


def find_g_node_in(
    profile: MassProfile,
    params: SIParams,
    a: float,
    b: float,
) -> float | None:
    """Zero of the phase inside [a, b], or None when the sign is constant."""

    def g(pt: float) -> float:
        return float(g_function(profile, params, np.asarray(pt, dtype=float)))

    lo, hi = float(a), float(b)
    glo, ghi = g(lo), g(hi)
    if glo == 0.0:
        return lo
    if ghi == 0.0:
        return hi
    if glo > 0.0 or ghi < 0.0:
        return None
    tol = 1e-12 * (1.0 + abs(params.lam))
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        gm = g(mid)
        if abs(gm) <= tol or (hi - lo) <= 1e-15 * (1.0 + abs(mid)):
            return mid
        if gm < 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def pseudo_potential(
    profile: MassProfile,
    ordering: OrderingParams,
    x: np.ndarray,
) -> np.ndarray:
    """Ordering-dependent correction added to the potential.

    Vanishes identically for the kinetic-symmetric ordering (a=0, b=-1)
    and for constant mass.
    """
    ev = evaluate(profile, np.asarray(x, dtype=float))
    m = ev.m
    return (
        0.5 * (1.0 + ordering.b) * ev.d2m / (m * m)
        - ordering.eta * ev.dm * ev.dm / (m * m * m)
    )
