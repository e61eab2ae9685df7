# hardylab/closed_form.py
"""
Closed-form optimal constants and the one-dimensional optimisations behind them.

Constants are built as `Fraction`s from integer inputs and converted to float
only when the ConstantResult is made, so golden values compare exactly.
"""
import logging
import math
from fractions import Fraction
from typing import List, Literal, Tuple

from hardylab.errors import DimensionTooSmall, TooFewPoles
from hardylab.models import AlphaOptimum, ConstantResult, EpsilonTradeoff

logger = logging.getLogger("hardylab.closed_form")

Placement = Literal["interior", "boundary"]
QuadraticVariant = Literal["interior", "half_space"]

INTERIOR: Placement = "interior"
BOUNDARY: Placement = "boundary"


def _require_dim(d: int, least: int, what: str) -> None:
    if d < least:
        raise DimensionTooSmall(f"{what} needs d >= {least}, got d={d}")


def _result(setting, d, value: Fraction, claim, n=None) -> ConstantResult:
    return ConstantResult(
        setting=setting,
        d=d,
        n=n,
        value=float(value),
        exact=str(value),
        attained_claim=claim,
    )


# ---------------------------------------------------------------------------
# exact constants
# ---------------------------------------------------------------------------
def hardy_interior_fraction(d: int) -> Fraction:
    _require_dim(d, 3, "interior Hardy constant")
    return Fraction((d - 2) ** 2, 4)


def hardy_interior_constant(d: int) -> ConstantResult:
    return _result("hardy_interior", d, hardy_interior_fraction(d), "NotAttained")


def hardy_boundary_constant(d: int) -> ConstantResult:
    # domains contained in a half-space with the pole on the boundary
    _require_dim(d, 2, "boundary Hardy constant")
    return _result("hardy_boundary", d, Fraction(d * d, 4), "NotAttained")


def multipolar_fraction(d: int, n: int, placement: Placement) -> Fraction:
    if n < 2:
        raise TooFewPoles(f"multipolar constants need n >= 2 poles, got {n}")
    if placement == INTERIOR:
        _require_dim(d, 3, "interior multipolar constant")
        return Fraction((d - 2) ** 2, n * n)
    if placement == BOUNDARY:
        _require_dim(d, 2, "boundary multipolar constant")
        return Fraction(d * d, n * n)
    raise ValueError(f"unknown placement {placement!r}")


def multipolar_constant(d: int, n: int, placement: Placement) -> ConstantResult:
    value = multipolar_fraction(d, n, placement)
    if placement == INTERIOR:
        claim = "NotAttained" if n == 2 else "Unknown"
        return _result("multipolar_interior", d, value, claim, n=n)
    # ball with all poles on the sphere: the explicit minimizer exists iff n >= 3
    claim = "Attained" if n >= 3 else "NotAttained"
    return _result("multipolar_boundary", d, value, claim, n=n)


def multipolar_bounds(d: int, n: int, placement: Placement) -> Tuple[float, float]:
    """
    (strict lower, non-strict upper) bounds on the multipolar constant for a
    general pole configuration.
    """
    if placement == INTERIOR:
        if n < 3:
            raise TooFewPoles("interior bounds need n >= 3 (n = 2 is exact)")
        _require_dim(d, 3, "interior multipolar bounds")
        lo, hi = Fraction((d - 2) ** 2, n * n), Fraction((d - 2) ** 2, 4 * n - 4)
    elif placement == BOUNDARY:
        if n < 2:
            raise TooFewPoles("boundary bounds need n >= 2")
        _require_dim(d, 2, "boundary multipolar bounds")
        lo, hi = Fraction((d - 2) ** 2, n * n), Fraction(d * d, 4 * n - 4)
    else:
        raise ValueError(f"unknown placement {placement!r}")
    return float(lo), float(hi)


def multipolar_pushu_constant(d: int, n: int) -> Tuple[float, float]:
    """
    Constants of the expanded-square multipolar inequality:
    (coefficient of the pair potential, coefficient of each 1/|x-a_i|^2).
    """
    if n < 2:
        raise TooFewPoles("needs at least two poles")
    _require_dim(d, 3, "multipolar inequality")
    return float(Fraction((d - 2) ** 2, 4 * n * n)), float(Fraction((d - 2) ** 2, 4 * n))


def rellich_fraction(d: int) -> Fraction:
    _require_dim(d, 5, "Rellich constant")
    return Fraction(d * d * (d - 4) ** 2, 16)


def rellich_constant(d: int) -> ConstantResult:
    return _result("rellich", d, rellich_fraction(d), "Unknown")


def hardy_rellich_fraction(d: int) -> Fraction:
    _require_dim(d, 3, "Hardy-Rellich constant")
    if d == 3:
        return Fraction(25, 36)
    if d == 4:
        return Fraction(3)
    return Fraction(d * d, 4)


def hardy_rellich_constant(d: int) -> ConstantResult:
    return _result("hardy_rellich", d, hardy_rellich_fraction(d), "NotAttained")


def first_hardy_rellich_constant(d: int) -> float:
    """((d-2)/2)^2: Hardy applied to each partial derivative; not optimal."""
    _require_dim(d, 3, "component-wise Hardy-Rellich constant")
    return float(Fraction((d - 2) ** 2, 4))


# ---------------------------------------------------------------------------
# one-dimensional optimisations
# ---------------------------------------------------------------------------
def maximize_hardy_quadratic(d: int, variant: QuadraticVariant = "interior") -> AlphaOptimum:
    # -alpha (alpha + d - 2) for phi = |x|^alpha; -alpha (alpha + d) for phi = x_d |x|^alpha
    if variant == "interior":
        _require_dim(d, 3, "interior quadratic")
        shift = d - 2
    elif variant == "half_space":
        _require_dim(d, 2, "half-space quadratic")
        shift = d
    else:
        raise ValueError(f"unknown variant {variant!r}")
    argmax = Fraction(-shift, 2)
    value = -argmax * (argmax + shift)
    return AlphaOptimum(argmax=float(argmax), max_value=float(value), feasible_interval=(None, None))


def rellich_quartic(d: int, alpha: float) -> float:
    """f(alpha) = alpha (alpha-2) (d-2+alpha) (d-4+alpha)."""
    return alpha * (alpha - 2) * (d - 2 + alpha) * (d - 4 + alpha)


def rellich_quartic_derivative(d: int, alpha: float) -> float:
    # f = (t^2 - a^2)(t^2 - b^2), t = alpha + (d-4)/2
    a2 = ((d - 4) / 2) ** 2
    b2 = (d / 2) ** 2
    t = alpha + (d - 4) / 2
    return 2 * t * (t * t - b2) + 2 * t * (t * t - a2)


def rellich_critical_points(d: int) -> Tuple[float, float, float]:
    _require_dim(d, 5, "Rellich quartic")
    root = math.sqrt(d * d - 4 * d + 8)
    mid = -(d - 4) / 2
    return ((-(d - 4) - root) / 2, mid, (-(d - 4) + root) / 2)


def maximize_rellich_quartic(d: int) -> AlphaOptimum:
    """
    Maximise f over the admissible interval [-(d-2), 0] (where -Delta phi >= 0)
    by comparing interior critical points with the endpoints.
    """
    _require_dim(d, 5, "Rellich quartic")
    lo, hi = float(-(d - 2)), 0.0
    candidates = [lo, hi] + [c for c in rellich_critical_points(d) if lo <= c <= hi]
    best = max(candidates, key=lambda a: rellich_quartic(d, a))
    value = rellich_quartic(d, best)
    if best == -(d - 4) / 2:
        value = float(rellich_fraction(d))
    logger.debug("rellich quartic d=%d: candidates=%s best=%s", d, candidates, best)
    return AlphaOptimum(argmax=best, max_value=value, feasible_interval=(lo, hi))


def coulomb_lower_bound(d: int, Z: float) -> float:
    """inf_{r>0} mu/r^2 - Z/r = -Z^2 / (4 mu), mu the interior Hardy constant."""
    mu = hardy_interior_fraction(d)
    if Z <= 0:
        raise ValueError("Z must be positive")
    return -(Z * Z) / (4 * float(mu))


def hardy_rellich_epsilon_objective(d: int, eps: float) -> float:
    if not 0 < eps <= 0.25:
        raise ValueError("eps must lie in (0, 1/4]")
    return (1.0 / eps - 4.0) * 4.0 / (d * d) + eps


def hardy_rellich_epsilon_tradeoff(d: int) -> EpsilonTradeoff:
    """
    Minimiser of (1/eps - 4) 4/d^2 + eps on (0, 1/4]. The constant the argument
    proves is (d-4)/min, which equals d^2/4.
    """
    _require_dim(d, 8, "epsilon tradeoff")
    argmin = Fraction(2, d)
    value = (1 / argmin - 4) * Fraction(4, d * d) + argmin
    return EpsilonTradeoff(
        argmin=float(argmin),
        min_value=float(value),
        implied_constant=float((d - 4) / value),
        reciprocal=float(1 / value),
    )


# ---------------------------------------------------------------------------
# catalogue for the `constants` command
# ---------------------------------------------------------------------------
def hardy_constant_catalogue(d_min: int, d_max: int, n_max: int = 4) -> List[ConstantResult]:
    if d_max < d_min:
        raise ValueError("d_max must be >= d_min")
    rows: List[ConstantResult] = []
    for d in range(max(d_min, 2), d_max + 1):
        if d >= 3:
            rows.append(hardy_interior_constant(d))
        rows.append(hardy_boundary_constant(d))
        if d >= 5:
            rows.append(rellich_constant(d))
        if d >= 3:
            rows.append(hardy_rellich_constant(d))
        for n in range(2, n_max + 1):
            if d >= 3:
                rows.append(multipolar_constant(d, n, INTERIOR))
            rows.append(multipolar_constant(d, n, BOUNDARY))
    logger.info("constant catalogue d=%d..%d n<=%d: %d rows", d_min, d_max, n_max, len(rows))
    return rows
