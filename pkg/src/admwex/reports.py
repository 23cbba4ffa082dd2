"""
Schema-versioned JSON reports and CSV curves.

Rationals are written as "p/q" strings so that exact results survive the
round trip through JSON.
"""

import csv
import hashlib
import json
import logging
import math
from dataclasses import is_dataclass
from enum import Enum
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

import numpy as np
from pydantic import BaseModel, ConfigDict

from . import __version__
from .jobs import JobConfig

logger = logging.getLogger(__name__)

REPORT_SCHEMA_VERSION = 1


def to_jsonable(value: Any) -> Any:
    """Recursively convert results into JSON-compatible values."""
    if isinstance(value, bool) or value is None or isinstance(value, str):
        return value
    if isinstance(value, Fraction):
        return str(value)
    if isinstance(value, Enum):
        return value.value
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return value if math.isfinite(value) else str(value)
    if isinstance(value, Path):
        return str(value)
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple, np.ndarray)):
        return [to_jsonable(v) for v in value]
    if hasattr(value, "to_dict"):
        return to_jsonable(value.to_dict())
    if is_dataclass(value):
        return to_jsonable(value.__dict__)
    raise TypeError(f"Cannot serialize {type(value).__name__} into a report")


class Report(BaseModel):
    model_config = ConfigDict(extra="forbid")

    schema_version: int = REPORT_SCHEMA_VERSION
    tool: str = "admwex"
    version: str = __version__
    command: str
    report_id: str
    config_hash: str
    inputs: Dict[str, Any]
    payload: Dict[str, Any]
    provenance: Dict[str, Any]

    def to_json(self) -> str:
        return json.dumps(self.model_dump(mode="json"), sort_keys=True, indent=2) + "\n"


def report_id(command: str, config_hash: str) -> str:
    return hashlib.sha256(f"{command}:{config_hash}".encode("utf-8")).hexdigest()[:16]


def build_report(command: str, job: JobConfig, payload: Dict[str, Any],
                 runtime_seconds: Optional[float] = None) -> Report:
    """
    Assemble a report; runtimes are only recorded when given, so that reports
    stay byte-identical across runs.
    """
    config_hash = job.config_hash()
    provenance: Dict[str, Any] = {
        "mode": job.mode.value,
        "tolerance": job.tolerance,
        "seed": job.seed,
    }
    if runtime_seconds is not None:
        provenance["runtime_seconds"] = round(runtime_seconds, 6)
    return Report(
        command=command,
        report_id=report_id(command, config_hash),
        config_hash=config_hash,
        inputs=job.model_dump(mode="json"),
        payload=to_jsonable(payload),
        provenance=provenance,
    )


def write_report(report: Report, out_dir: Optional[Path]) -> Optional[Path]:
    """Write ``<report_id>.json`` into out_dir, or print to stdout when out_dir is None."""
    text = report.to_json()
    if out_dir is None:
        print(text, end="")
        return None
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / f"{report.command}-{report.report_id}.json"
    path.write_text(text, encoding="utf-8")
    logger.info(f"✅ Report written to {path}")
    return path


def write_curve(report: Report, name: str, header: Sequence[str], rows: List[Sequence[Any]],
                out_dir: Path) -> Path:
    """Write one CSV curve named after the report id."""
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / f"{report.command}-{report.report_id}-{name}.csv"
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f)
        writer.writerow(header)
        for row in rows:
            writer.writerow([_csv_cell(v) for v in row])
    logger.info(f"Curve {name} ({len(rows)} rows) written to {path}")
    return path


def _csv_cell(value: Any) -> Any:
    if isinstance(value, Fraction):
        return str(value)
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return value
