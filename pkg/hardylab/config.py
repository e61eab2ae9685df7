# hardylab/config.py
import os
from pathlib import Path
from dotenv import load_dotenv


# Always load .env from project root; explicit environment wins
env_path = Path(__file__).resolve().parents[1] / ".env"
load_dotenv(dotenv_path=env_path, override=False)


def _int_env(name: str, default: int) -> int:
    raw = os.getenv(name)
    if raw is None or not raw.strip():
        return default
    return int(raw)


def _float_env(name: str, default: float) -> float:
    raw = os.getenv(name)
    if raw is None or not raw.strip():
        return default
    return float(raw)


HF_THREADS = max(1, _int_env("HF_THREADS", 1))

LOG_DIR = os.getenv("LOG_DIR", ".")
LOG_LEVEL = os.getenv("LOG_LEVEL", "WARNING").upper()
LOG_FILE = os.getenv("HARDYLAB_LOG_FILE", "hardylab.log")

# PoleHit radius in domain units
POLE_EXCLUSION = _float_env("HARDYLAB_POLE_EXCLUSION", 1e-9)

# n-D exclusion radius, relative to the integration box diameter
ND_EXCLUSION = _float_env("HARDYLAB_ND_EXCLUSION", 1e-4)

DEFAULT_SEED = _int_env("HARDYLAB_SEED", 0)
