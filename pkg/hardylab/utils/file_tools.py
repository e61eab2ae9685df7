# hardylab/utils/file_tools.py
import json
import logging
import os
import tempfile
from pathlib import Path
from typing import Any, Dict, Optional, Union

import yaml

logger = logging.getLogger("hardylab.file_tools")

SCHEMA_VERSION = 1


def atomic_write_text(path: Union[str, Path], text: str) -> Path:
    """Write via a temp file in the target directory, then rename over the target."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", suffix=".tmp", dir=str(path.parent))
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
            fh.flush()
            os.fsync(fh.fileno())
        os.replace(tmp, path)
    except BaseException:
        # never leave a partial file behind
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    logger.info("wrote %s (%d bytes)", path, len(text.encode("utf-8")))
    return path


def dump_json(payload: Dict[str, Any]) -> str:
    """Deterministic JSON: sorted keys, schema version stamped, trailing newline."""
    body = dict(payload)
    body.setdefault("schema_version", SCHEMA_VERSION)
    return json.dumps(body, sort_keys=True, indent=2, allow_nan=False) + "\n"


def read_job_text(path: Union[str, Path]) -> str:
    return Path(path).read_text(encoding="utf-8")


def parse_job_text(text: str, suffix: Optional[str] = None) -> Any:
    """JSON by default; YAML when the file suffix says so."""
    if suffix in (".yaml", ".yml"):
        return yaml.safe_load(text)
    return json.loads(text)
