# hardylab/job_models.py
from typing import Annotated, Any, Dict, List, Literal, Optional, Union

from pydantic import Discriminator, Field, Tag, TypeAdapter, ValidationError, field_validator, model_validator

from hardylab import config
from hardylab.errors import SchemaError
from hardylab.models import (
    CutoffSpec,
    DomainSpec,
    Frozen,
    GridSpec,
    Point,
    PotentialSpec,
    SmoothBump,
    SupersolutionAnsatz,
    Verdict,
)
from hardylab.supersolution import DEFAULT_FALL_RADIUS


# ---------- per-command parameters ----------
class ConstantsParams(Frozen):
    d_min: int = Field(default=3, ge=2)
    d_max: int = Field(default=10, ge=2)
    n_max: int = Field(default=4, ge=2)

    @model_validator(mode="after")
    def _range(self) -> "ConstantsParams":
        if self.d_max < self.d_min:
            raise ValueError("d_max must be >= d_min")
        return self


class _CertifyParams(Frozen):
    expect: Verdict = "CertifiedNonnegative"


class HardyCertifyParams(_CertifyParams):
    mode: Literal["hardy"] = "hardy"
    potential: PotentialSpec
    ansatz: SupersolutionAnsatz
    grid: GridSpec
    domain: Optional[DomainSpec] = None


class RellichCertifyParams(_CertifyParams):
    mode: Literal["rellich"]
    potential: PotentialSpec
    ansatz: SupersolutionAnsatz
    grid: GridSpec


class FallLocalCertifyParams(_CertifyParams):
    mode: Literal["fall_local"]
    d: int = Field(ge=2)
    r: float = Field(default=DEFAULT_FALL_RADIUS, gt=0, lt=1)
    grid: Optional[GridSpec] = None


CERTIFY_MODES = ("hardy", "rellich", "fall_local")


def _certify_mode(v: Any) -> Optional[str]:
    # mode may be omitted; hardy is the default
    mode = v.get("mode", "hardy") if isinstance(v, dict) else getattr(v, "mode", "hardy")
    return mode if isinstance(mode, str) else None


CertifyParams = Annotated[
    Union[
        Annotated[HardyCertifyParams, Tag("hardy")],
        Annotated[RellichCertifyParams, Tag("rellich")],
        Annotated[FallLocalCertifyParams, Tag("fall_local")],
    ],
    Discriminator(_certify_mode),
]


class SweepParams(Frozen):
    family: Literal["hardy_interior", "half_space", "hardy_rellich"]
    d: int = Field(ge=2)
    eps: List[float] = Field(min_length=1)
    cutoff: CutoffSpec = Field(default_factory=SmoothBump)
    harmonic: Optional[bool] = None

    @field_validator("eps")
    @classmethod
    def _decreasing(cls, v: List[float]) -> List[float]:
        if any(e <= 0 for e in v):
            raise ValueError("sweep epsilons must be positive")
        if any(b >= a for a, b in zip(v, v[1:])):
            raise ValueError("sweep epsilons must be strictly decreasing")
        return v


class EigParams(Frozen):
    d: int = Field(ge=3)
    nodes: int = Field(default=2048, ge=2)
    delta: float = Field(default=1e-6, gt=0)
    R: float = Field(default=1.0, gt=0)
    tol: float = Field(default=1e-10, gt=0)

    @model_validator(mode="after")
    def _interval(self) -> "EigParams":
        if not self.delta < self.R:
            raise ValueError("delta must be smaller than R")
        return self


class IdentityParams(Frozen):
    which: Literal[
        "expansion_square", "geni", "second_derivative_sum", "ident_ip2",
        "hardy", "rellich", "hardy_rellich", "weaker", "pushu", "first_hr",
    ]
    d: int = Field(ge=2)
    count: int = Field(default=50, ge=1)
    seed: Optional[int] = None
    poles: Optional[List[Point]] = None
    half_space: bool = False


# ---------- jobs ----------
class _Job(Frozen):
    output: Optional[str] = None
    seed: int = Field(default_factory=lambda: config.DEFAULT_SEED)


class ConstantsJob(_Job):
    command: Literal["constants"]
    parameters: ConstantsParams = Field(default_factory=ConstantsParams)


class CertifyJob(_Job):
    command: Literal["certify"]
    parameters: CertifyParams


class SweepJob(_Job):
    command: Literal["rayleigh-sweep"]
    parameters: SweepParams


class EigJob(_Job):
    command: Literal["eig-estimate"]
    parameters: EigParams


class IdentityJob(_Job):
    command: Literal["check-identities"]
    parameters: IdentityParams


JobConfig = Annotated[
    Union[ConstantsJob, CertifyJob, SweepJob, EigJob, IdentityJob],
    Field(discriminator="command"),
]
JOB_ADAPTER = TypeAdapter(JobConfig)
COMMANDS = ("constants", "certify", "rayleigh-sweep", "eig-estimate", "check-identities")


def _error_path(err: Dict[str, Any]) -> str:
    loc = list(err.get("loc", ()))
    if loc and loc[0] in COMMANDS:
        loc = loc[1:]
    # the certify mode tag shows up as a segment after "parameters"
    if len(loc) > 1 and loc[0] == "parameters" and loc[1] in CERTIFY_MODES:
        loc = [loc[0]] + loc[2:]
    if err.get("type") in ("union_tag_not_found", "union_tag_invalid"):
        if not loc:
            return "command"
        loc.append("mode" if loc == ["parameters"] else "kind")
    return ".".join(str(p) for p in loc) or "$"


def validation_details(exc: ValidationError) -> List[Dict[str, str]]:
    return [{"path": _error_path(e), "message": e["msg"]} for e in exc.errors()]


def schema_validate(raw: Any):
    """Validate a decoded job object; every violation is reported with its path."""
    if not isinstance(raw, dict):
        raise SchemaError("job must be a JSON object", [{"path": "$", "message": "expected an object"}])
    try:
        return JOB_ADAPTER.validate_python(raw)
    except ValidationError as exc:
        details = validation_details(exc)
        summary = "; ".join(f"{d['path']}: {d['message']}" for d in details)
        raise SchemaError(f"invalid job ({len(details)} error(s)): {summary}", details) from exc
