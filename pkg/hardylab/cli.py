# hardylab/cli.py
import argparse
import json
import logging
import os
import sys
from logging.handlers import RotatingFileHandler
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

from pydantic import ValidationError

from hardylab import closed_form, config, identities, rayleigh, spectrum, supersolution
from hardylab.errors import HardyLabError, SchemaError
from hardylab.job_models import (
    CertifyJob,
    ConstantsJob,
    EigJob,
    IdentityJob,
    SweepJob,
    schema_validate,
    validation_details,
)
from hardylab.models import IdentityCheck, MinimizingFamily
from hardylab.utils.csv_tools import records_to_csv
from hardylab.utils.file_tools import atomic_write_text, dump_json, parse_job_text, read_job_text

logger = logging.getLogger("hardylab.cli")

EXIT_OK = 0
EXIT_VERDICT = 1
EXIT_INPUT = 2

_logging_ready = False


# ---------- Logging ----------
def configure_logging() -> None:
    """Console at LOG_LEVEL plus a rotating INFO log file under LOG_DIR."""
    global _logging_ready
    if _logging_ready:
        return
    logging.basicConfig(level=getattr(logging, config.LOG_LEVEL, logging.WARNING))

    log_path = os.path.join(config.LOG_DIR, config.LOG_FILE)
    try:
        file_handler = RotatingFileHandler(
            log_path,
            maxBytes=5 * 1024 * 1024,  # 5 MB
            backupCount=3,
            encoding="utf-8",
        )
    except OSError as e:
        logger.warning(f"File logging disabled ({log_path}): {e}")
    else:
        file_handler.setLevel(logging.INFO)
        file_handler.setFormatter(logging.Formatter("%(asctime)s | %(levelname)s | %(name)s | %(message)s"))
        root = logging.getLogger()
        root.addHandler(file_handler)
        # file handler sees INFO even when the console is quieter
        root.setLevel(min(root.level, logging.INFO))
        for handler in root.handlers:
            if handler is not file_handler and handler.level == logging.NOTSET:
                handler.setLevel(getattr(logging, config.LOG_LEVEL, logging.WARNING))
    _logging_ready = True


# ---------- Command runners: each returns (text, exit status) ----------
def _run_constants(job: ConstantsJob) -> Tuple[str, int]:
    p = job.parameters
    rows = closed_form.hardy_constant_catalogue(p.d_min, p.d_max, p.n_max)
    records = [r.model_dump(include={"setting", "d", "n", "value", "attained_claim"}) for r in rows]
    return records_to_csv(records, ["setting", "d", "n", "value", "attained_claim"]), EXIT_OK


def _run_certify(job: CertifyJob) -> Tuple[str, int]:
    p = job.parameters
    if p.mode == "fall_local":
        grid = p.grid or supersolution.default_fall_grid(p.r, seed=job.seed)
        cert = supersolution.certify_fall_local(p.d, r=p.r, grid=grid)
    elif p.mode == "rellich":
        cert = supersolution.certify_rellich(p.potential, p.ansatz, p.grid)
    else:
        cert = supersolution.certify_hardy(p.potential, p.ansatz, p.grid, domain=p.domain)
    status = EXIT_OK if cert.verdict == p.expect else EXIT_VERDICT
    if status:
        logger.warning(f"certificate verdict {cert.verdict}, expected {p.expect}")
    return dump_json(cert.model_dump(mode="json")), status


def _run_sweep(job: SweepJob) -> Tuple[str, int]:
    p = job.parameters
    family = MinimizingFamily(family=p.family, d=p.d, cutoff=p.cutoff, harmonic=p.harmonic)
    result = rayleigh.sweep(family, p.eps)
    mu = rayleigh.family_constant(family)
    records = [
        {
            "eps": r.epsilon,
            "numerator": r.numerator,
            "denominator": r.denominator,
            "quotient": r.quotient,
            "err": r.quotient_err,
        }
        for r in result.reports
    ]
    below = [r.epsilon for r in result.reports if r.quotient < mu - r.quotient_err - 1e-9 * mu]
    logger.info(f"sweep limit {result.limit:.10g} ({result.model}); sharp constant {mu:.10g}")
    status = EXIT_OK
    if below:
        logger.warning(f"quotients below the sharp constant at eps={below}")
        status = EXIT_VERDICT
    if not result.monotone:
        logger.warning("quotients do not decrease along the sweep")
        status = EXIT_VERDICT
    return records_to_csv(records, ["eps", "numerator", "denominator", "quotient", "err"]), status


def _run_eig(job: EigJob) -> Tuple[str, int]:
    p = job.parameters
    mesh = spectrum.log_mesh(p.nodes, p.delta, p.R)
    est = spectrum.hardy_constant_estimate(p.d, mesh, tol=p.tol)
    record = {
        "d": p.d,
        "nodes": p.nodes,
        "delta": p.delta,
        "estimate": est.value,
        "residual": est.residual_norm,
    }
    status = EXIT_OK
    if est.value < closed_form.hardy_interior_constant(p.d).value - 1e-6:
        status = EXIT_VERDICT
    return records_to_csv([record], ["d", "nodes", "delta", "estimate", "residual"]), status


def _run_identities(job: IdentityJob) -> Tuple[str, int]:
    p = job.parameters
    checks = identities.run_identity_batch(
        p.which, p.d, count=p.count, seed=job.seed if p.seed is None else p.seed,
        poles=[list(a) for a in p.poles] if p.poles else None,
        half_space=p.half_space,
    )
    records = []
    for c in checks:
        records.append({
            "identity": c.name,
            "seed_index": c.index,
            "lhs": c.lhs,
            "rhs": c.rhs,
            "gap_or_margin": c.gap if isinstance(c, IdentityCheck) else c.margin,
            "tolerance": c.tolerance,
            "pass": c.passed,
        })
    status = EXIT_OK if all(c.passed for c in checks) else EXIT_VERDICT
    columns = ["identity", "seed_index", "lhs", "rhs", "gap_or_margin", "tolerance", "pass"]
    return records_to_csv(records, columns), status


RUNNERS = {
    "constants": _run_constants,
    "certify": _run_certify,
    "rayleigh-sweep": _run_sweep,
    "eig-estimate": _run_eig,
    "check-identities": _run_identities,
}


def run(job) -> int:
    """Execute a validated job, write its output, and return the exit status."""
    logger.info(f"running {job.command}")
    text, status = RUNNERS[job.command](job)
    if job.output and job.output != "-":
        atomic_write_text(job.output, text)
    else:
        sys.stdout.write(text)
        sys.stdout.flush()
    return status


# ---------- Argument parsing ----------
def _eps_list(raw: Optional[str]) -> Optional[List[str]]:
    if raw is None:
        return None
    return [part.strip() for part in raw.split(",") if part.strip()]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hardylab", description="Sharp Hardy/Rellich inequality lab")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--job", help="JSON (or YAML) job file; flags given on the command line override it")
        p.add_argument("--output", help="output path (default: stdout)")
        return p

    p = common(sub.add_parser("constants", help="table of closed-form constants"))
    p.add_argument("--d-min", type=int)
    p.add_argument("--d-max", type=int)
    p.add_argument("--n-max", type=int)

    p = common(sub.add_parser("certify", help="super-solution certificate"))
    p.add_argument("--mode", choices=["hardy", "rellich", "fall_local"])
    p.add_argument("--d", type=int)
    p.add_argument("--r", type=float)

    p = common(sub.add_parser("rayleigh-sweep", help="Rayleigh quotients along a minimizing family"))
    p.add_argument("--family", choices=["hardy_interior", "half_space", "hardy_rellich"])
    p.add_argument("--d", type=int)
    p.add_argument("--eps", help="comma-separated, strictly decreasing")
    p.add_argument("--cutoff-R", dest="cutoff_R", type=float)
    p.add_argument("--harmonic", action="store_true", default=None)

    p = common(sub.add_parser("eig-estimate", help="discrete radial Hardy eigenvalue"))
    p.add_argument("--d", type=int)
    p.add_argument("--nodes", type=int)
    p.add_argument("--delta", type=float)
    p.add_argument("--R", type=float)
    p.add_argument("--tol", type=float)

    p = common(sub.add_parser("check-identities", help="randomized identity / inequality checks"))
    p.add_argument("--which")
    p.add_argument("--d", type=int)
    p.add_argument("--count", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--half-space", dest="half_space", action="store_true", default=None)

    p = sub.add_parser("run", help="run any job file")
    p.add_argument("--job", required=True)
    p.add_argument("--output")
    return parser


_FLAG_PARAMS = {
    "constants": ("d_min", "d_max", "n_max"),
    "certify": ("mode", "d", "r"),
    "rayleigh-sweep": ("family", "d", "eps", "harmonic"),
    "eig-estimate": ("d", "nodes", "delta", "R", "tol"),
    "check-identities": ("which", "d", "count", "seed", "half_space"),
}


def _load_job_file(path: str) -> Dict[str, Any]:
    try:
        text = read_job_text(path)
    except OSError as e:
        raise SchemaError(f"cannot read job file {path}: {e}", [{"path": "$", "message": str(e)}])
    try:
        raw = parse_job_text(text, Path(path).suffix.lower())
    except Exception as e:
        # json.JSONDecodeError or yaml.YAMLError
        raise SchemaError(f"job file {path} is not valid: {e}", [{"path": "$", "message": str(e)}])
    if not isinstance(raw, dict):
        raise SchemaError("job must be an object", [{"path": "$", "message": "expected an object"}])
    return raw


def job_from_args(args: argparse.Namespace):
    raw: Dict[str, Any] = _load_job_file(args.job) if getattr(args, "job", None) else {}
    if args.command != "run":
        if raw.get("command", args.command) != args.command:
            raise SchemaError(
                f"job file is for {raw['command']!r}, not {args.command!r}",
                [{"path": "command", "message": "does not match the subcommand"}],
            )
        raw["command"] = args.command
        params = dict(raw.get("parameters") or {})
        for name in _FLAG_PARAMS[args.command]:
            value = getattr(args, name, None)
            if name == "eps":
                value = _eps_list(value)
            if value is not None:
                params[name] = value
        if args.command == "rayleigh-sweep" and args.cutoff_R is not None:
            cutoff = dict(params.get("cutoff") or {"kind": "smooth_bump"})
            cutoff["R"] = args.cutoff_R
            params["cutoff"] = cutoff
        raw["parameters"] = params
    if getattr(args, "output", None):
        raw["output"] = args.output
    return schema_validate(raw)


def _report_error(payload: Dict[str, Any]) -> None:
    sys.stderr.write(json.dumps(payload, sort_keys=True) + "\n")
    sys.stderr.flush()


def main(argv: Optional[List[str]] = None) -> int:
    configure_logging()
    args = build_parser().parse_args(argv)
    try:
        job = job_from_args(args)
        return run(job)
    except HardyLabError as e:
        logger.error(f"{e.code}: {e.message}")
        _report_error(e.to_dict())
        return EXIT_INPUT
    except ValidationError as e:
        err = SchemaError("invalid value", validation_details(e))
        _report_error(err.to_dict())
        return EXIT_INPUT
    except ValueError as e:
        logger.error(f"ValueError: {e}")
        _report_error({"error": "ValueError", "message": str(e)})
        return EXIT_INPUT
    except Exception as e:
        logger.exception(f"{args.command} failed")
        _report_error({"error": type(e).__name__, "message": str(e)})
        return EXIT_INPUT
