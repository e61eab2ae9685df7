# hardylab/models.py
"""
Value types shared by every module.

All models are frozen; union members carry a `kind` tag so that job files
and results round-trip through JSON unchanged.
"""
import math
from typing import Annotated, Dict, List, Literal, Optional, Tuple, Union

from pydantic import AfterValidator, BaseModel, ConfigDict, Field, field_validator, model_validator


class Frozen(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")


def _finite_point(p: Tuple[float, ...]) -> Tuple[float, ...]:
    if len(p) == 0:
        raise ValueError("point must have at least one coordinate")
    if not all(math.isfinite(c) for c in p):
        raise ValueError("point coordinates must be finite")
    return tuple(float(c) for c in p)


Point = Annotated[Tuple[float, ...], AfterValidator(_finite_point)]


def _same_dimension(points: List[Point]) -> None:
    dims = {len(p) for p in points}
    if len(dims) > 1:
        raise ValueError(f"points have mixed dimensions {sorted(dims)}")


# ---------------------------------------------------------------------------
# Domains
# ---------------------------------------------------------------------------
class WholeSpace(Frozen):
    kind: Literal["whole_space"] = "whole_space"
    d: int = Field(ge=1)

    @property
    def dim(self) -> int:
        return self.d


class HalfSpace(Frozen):
    """{x : x_d > 0}."""
    kind: Literal["half_space"] = "half_space"
    d: int = Field(ge=1)

    @property
    def dim(self) -> int:
        return self.d


class Ball(Frozen):
    kind: Literal["ball"] = "ball"
    center: Point
    radius: float = Field(gt=0)

    @property
    def dim(self) -> int:
        return len(self.center)


class ExteriorBall(Frozen):
    kind: Literal["exterior_ball"] = "exterior_ball"
    center: Point
    radius: float = Field(gt=0)

    @property
    def dim(self) -> int:
        return len(self.center)


class BallIntersection(Frozen):
    """Inner domain intersected with the open ball B_radius(0)."""
    kind: Literal["ball_intersection"] = "ball_intersection"
    inner: "DomainSpec"
    radius: float = Field(gt=0)

    @property
    def dim(self) -> int:
        return self.inner.dim


DomainSpec = Annotated[
    Union[WholeSpace, HalfSpace, Ball, ExteriorBall, BallIntersection],
    Field(discriminator="kind"),
]
BallIntersection.model_rebuild()


# ---------------------------------------------------------------------------
# Poles and potentials
# ---------------------------------------------------------------------------
class PoleSet(Frozen):
    points: List[Point] = Field(min_length=1)

    @field_validator("points")
    @classmethod
    def _distinct(cls, v: List[Point]) -> List[Point]:
        v = [_finite_point(p) for p in v]
        _same_dimension(v)
        if len(set(v)) != len(v):
            raise ValueError("poles must be pairwise distinct")
        return v

    @property
    def n(self) -> int:
        return len(self.points)

    @property
    def dim(self) -> int:
        return len(self.points[0])


class InverseSquare(Frozen):
    """scale / |x - pole|^2"""
    kind: Literal["inverse_square"] = "inverse_square"
    pole: Point
    scale: float = Field(gt=0)

    @property
    def dim(self) -> int:
        return len(self.pole)


class Multipolar(Frozen):
    """scale * sum_{i<j} |a_i - a_j|^2 / (|x - a_i|^2 |x - a_j|^2)"""
    kind: Literal["multipolar"] = "multipolar"
    poles: PoleSet
    scale: float = Field(gt=0)

    @field_validator("poles")
    @classmethod
    def _at_least_two(cls, v: PoleSet) -> PoleSet:
        if v.n < 2:
            raise ValueError("multipolar potential needs at least 2 poles")
        return v

    @property
    def dim(self) -> int:
        return self.poles.dim


class MultipolarSum(Frozen):
    """scale * sum_i 1 / |x - a_i|^2"""
    kind: Literal["multipolar_sum"] = "multipolar_sum"
    poles: PoleSet
    scale: float = Field(gt=0)

    @property
    def dim(self) -> int:
        return self.poles.dim


class InverseQuartic(Frozen):
    kind: Literal["inverse_quartic"] = "inverse_quartic"
    pole: Point
    scale: float = Field(gt=0)

    @property
    def dim(self) -> int:
        return len(self.pole)


PotentialSpec = Annotated[
    Union[InverseSquare, Multipolar, MultipolarSum, InverseQuartic],
    Field(discriminator="kind"),
]


# ---------------------------------------------------------------------------
# Supersolution ansatz
# ---------------------------------------------------------------------------
class OnePrefactor(Frozen):
    kind: Literal["one"] = "one"


class LastCoord(Frozen):
    kind: Literal["last_coord"] = "last_coord"


class BallWeight(Frozen):
    """radius^2 - |x - center|^2"""
    kind: Literal["ball_weight"] = "ball_weight"
    center: Point
    radius: float = Field(gt=0)


class PoleProduct(Frozen):
    """prod_i |x - a_i|^{beta_i}"""
    kind: Literal["pole_product"] = "pole_product"
    poles: PoleSet
    exponents: List[float]

    @model_validator(mode="after")
    def _lengths(self) -> "PoleProduct":
        if len(self.exponents) != self.poles.n:
            raise ValueError("one exponent per pole is required")
        return self


class FallLocal(Frozen):
    """Distance to the boundary of an exterior ball."""
    kind: Literal["fall_local"] = "fall_local"
    domain: ExteriorBall


Prefactor = Annotated[
    Union[OnePrefactor, LastCoord, BallWeight, PoleProduct, FallLocal],
    Field(discriminator="kind"),
]


class SupersolutionAnsatz(Frozen):
    """
    phi(x) = prod(prefactors) * |x|^power * [log(1/|x|)^(1/2)] * [exp(exp_rho_coeff * rho)]

    rho is the FallLocal prefactor's distance, so `exp_rho_coeff` requires one.
    """
    prefactors: List[Prefactor] = Field(default_factory=lambda: [OnePrefactor()])
    power: float = 0.0
    log_half_power: bool = False
    exp_rho_coeff: Optional[float] = None

    @model_validator(mode="after")
    def _exp_needs_rho(self) -> "SupersolutionAnsatz":
        if self.exp_rho_coeff is not None and self.fall_local is None:
            raise ValueError("exp_rho_coeff requires a fall_local prefactor")
        return self

    @property
    def fall_local(self) -> Optional[FallLocal]:
        for p in self.prefactors:
            if isinstance(p, FallLocal):
                return p
        return None

    @property
    def nontrivial_prefactors(self) -> List[Prefactor]:
        return [p for p in self.prefactors if not isinstance(p, OnePrefactor)]

    @property
    def origin_singular(self) -> bool:
        return self.power != 0.0 or self.log_half_power

    def pole_points(self) -> List[Point]:
        pts: List[Point] = []
        for p in self.prefactors:
            if isinstance(p, PoleProduct):
                pts.extend(p.poles.points)
        return pts


# ---------------------------------------------------------------------------
# Sampling grids and certificates
# ---------------------------------------------------------------------------
class RadialShells(Frozen):
    lo: float = Field(gt=0)
    hi: float = Field(gt=0)
    shells: int = Field(default=64, ge=2)
    spacing: Literal["log", "linear"] = "log"

    @model_validator(mode="after")
    def _ordered(self) -> "RadialShells":
        if self.hi < self.lo:
            raise ValueError("radial hi must be >= lo")
        return self


class AngularSampling(Frozen):
    directions: int = Field(default=128, ge=1)
    seed: int = 0


class GridSpec(Frozen):
    radial: RadialShells
    angular: AngularSampling = Field(default_factory=AngularSampling)
    center: Optional[Point] = None

    def describe(self) -> str:
        r = self.radial
        return (
            f"{r.spacing} shells [{r.lo:.3g}, {r.hi:.3g}] x {r.shells}; "
            f"{self.angular.directions} sobol directions (seed {self.angular.seed})"
        )


Verdict = Literal["CertifiedNonnegative", "Violated", "Inconclusive"]


class ConditionSummary(Frozen):
    min_residual: float
    max_residual: float


class Certificate(Frozen):
    min_residual: float
    max_residual: float
    samples_checked: int = Field(ge=0)
    grid_descriptor: str
    verdict: Verdict
    tolerance: float = Field(ge=0)
    evidence: Literal["sampled"] = "sampled"
    conditions: Dict[str, ConditionSummary] = Field(default_factory=dict)


# ---------------------------------------------------------------------------
# Quadrature / Rayleigh results
# ---------------------------------------------------------------------------
class Exclusion(Frozen):
    """A ball removed from an n-D integration box; `exponent` is the local power law."""
    center: Point
    radius: float = Field(ge=0)
    exponent: Optional[float] = None


class IntegralResult(Frozen):
    value: float
    error_estimate: float = Field(ge=0)
    evaluations: int = Field(ge=0)
    excluded_mass: float = 0.0


class QuotientReport(Frozen):
    epsilon: Optional[float] = None
    numerator: float
    denominator: float
    quotient: float
    numerator_err: float = 0.0
    denominator_err: float = 0.0

    @property
    def quotient_err(self) -> float:
        # first order propagation
        q = self.quotient
        return abs(q) * (
            self.numerator_err / max(abs(self.numerator), 1e-300)
            + self.denominator_err / max(abs(self.denominator), 1e-300)
        )


class SweepResult(Frozen):
    reports: List[QuotientReport]
    limit: float
    monotone: bool
    model: Literal["power", "log_affine", "last_value"]
    order: Optional[float] = None


class SmoothBump(Frozen):
    """theta = 1 on [0, R], 0 beyond 2R, C-infinity in between."""
    kind: Literal["smooth_bump"] = "smooth_bump"
    R: float = Field(default=1.0, gt=0)


class PolySmoothstep(Frozen):
    """Polynomial smoothstep of class C^order between R and 2R."""
    kind: Literal["poly_smoothstep"] = "poly_smoothstep"
    R: float = Field(default=1.0, gt=0)
    order: int = Field(default=3, ge=1)


CutoffSpec = Annotated[Union[SmoothBump, PolySmoothstep], Field(discriminator="kind")]


class SphericalHarmonicDeg1(Frozen):
    """N * (direction . x) / |x| with N^2 = d / |S^{d-1}|."""
    d: int = Field(ge=2)
    direction: int = Field(default=-1)


MinimizingFamilyKind = Literal["hardy_interior", "half_space", "hardy_rellich", "multipolar_ball"]


class MinimizingFamily(Frozen):
    family: MinimizingFamilyKind
    d: int = Field(ge=2)
    cutoff: CutoffSpec = Field(default_factory=SmoothBump)
    harmonic: Optional[bool] = None


# ---------------------------------------------------------------------------
# Closed-form and spectral results
# ---------------------------------------------------------------------------
AttainedClaim = Literal["Attained", "NotAttained", "Unknown"]

Setting = Literal[
    "hardy_interior",
    "hardy_boundary",
    "rellich",
    "hardy_rellich",
    "multipolar_interior",
    "multipolar_boundary",
]


class ConstantResult(Frozen):
    setting: Setting
    d: int
    n: Optional[int] = None
    value: float
    exact: str
    attained_claim: AttainedClaim


class AlphaOptimum(Frozen):
    argmax: float
    max_value: float
    feasible_interval: Tuple[Optional[float], Optional[float]]


class EigEstimate(Frozen):
    value: float
    iterations: int
    residual_norm: float
    mesh: Optional[str] = None


class RadialMesh(Frozen):
    nodes: Tuple[float, ...]

    @field_validator("nodes")
    @classmethod
    def _increasing(cls, v: Tuple[float, ...]) -> Tuple[float, ...]:
        if len(v) < 2:
            raise ValueError("a mesh needs at least 2 nodes")
        if v[0] <= 0:
            raise ValueError("first mesh node must be positive")
        if any(b <= a for a, b in zip(v, v[1:])):
            raise ValueError("mesh nodes must be strictly increasing")
        return tuple(float(x) for x in v)

    @property
    def delta(self) -> float:
        return self.nodes[0]

    @property
    def R(self) -> float:
        return self.nodes[-1]

    def describe(self) -> str:
        return f"{len(self.nodes)} nodes on [{self.delta:.3g}, {self.R:.3g}]"


# ---------------------------------------------------------------------------
# Identity and inequality checks
# ---------------------------------------------------------------------------
class IdentityCheck(Frozen):
    name: str
    index: int = 0
    lhs: float
    rhs: float
    gap: float
    scale: float
    tolerance: float
    passed: bool


class InequalityCheck(Frozen):
    name: str
    index: int = 0
    lhs: float
    rhs: float
    constant: float
    margin: float
    tolerance: float
    passed: bool


class EpsilonTradeoff(Frozen):
    argmin: float
    min_value: float
    implied_constant: float
    reciprocal: float


class TestFunction(Frozen):
    """
    u(x) = p(x) * (1 - |x - center|^2 / scale^2)^3 on the ball B_scale(center),
    p(x) = c0 + g.x + x.Q.x. A C^2 polynomial bump; u = 0 outside the ball.
    """
    __test__ = False

    center: Point
    scale: float = Field(gt=0)
    c0: float
    g: Point
    Q: Tuple[Tuple[float, ...], ...]
    index: int = 0

    @model_validator(mode="after")
    def _shapes(self) -> "TestFunction":
        d = len(self.center)
        if len(self.g) != d or len(self.Q) != d or any(len(row) != d for row in self.Q):
            raise ValueError("g and Q must match the dimension of center")
        return self

    @property
    def dim(self) -> int:
        return len(self.center)

    @property
    def is_radial(self) -> bool:
        if any(c != 0.0 for c in self.center) or any(c != 0.0 for c in self.g):
            return False
        d = self.dim
        q = self.Q[0][0]
        return all(self.Q[i][j] == (q if i == j else 0.0) for i in range(d) for j in range(d))

    def scaled(self, lam: float) -> "TestFunction":
        return self.model_copy(
            update={
                "c0": lam * self.c0,
                "g": tuple(lam * c for c in self.g),
                "Q": tuple(tuple(lam * c for c in row) for row in self.Q),
            }
        )
