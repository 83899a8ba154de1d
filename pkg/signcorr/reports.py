"""
Report models and the JSON / CSV writers.

Everything run-dependent (timestamp, runtime) sits in `meta`; the rest of a
report is a pure function of its configuration.
"""

import csv
import hashlib
import io
import json
import logging
from datetime import datetime, timezone
from enum import Enum
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple

from pydantic import BaseModel, Field, PrivateAttr

from . import __version__

logger = logging.getLogger(__name__)

CSV_HEADER = ("n", "agree", "estimate", "remainder")

SeriesRow = Tuple[int, int, float, Optional[float]]


class OutputFormat(str, Enum):
    JSON = "json"
    CSV = "csv"
    BOTH = "both"


class ReportMeta(BaseModel):
    timestamp: str
    version: str = __version__
    config_hash: str
    runtime_seconds: float = 0.0


def config_hash(payload: Dict[str, Any]) -> str:
    """SHA-256 of the canonical JSON form of a configuration."""
    canonical = json.dumps(payload, sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def make_meta(payload: Dict[str, Any], runtime_seconds: float = 0.0) -> ReportMeta:
    return ReportMeta(
        timestamp=datetime.now(timezone.utc).isoformat(),
        config_hash=config_hash(payload),
        runtime_seconds=round(runtime_seconds, 6),
    )


class CheckpointRow(BaseModel):
    n: int
    agree: int
    estimate: float


class ExperimentReport(BaseModel):
    """Measured estimate next to its predicted limit."""

    family: str
    method: Optional[str] = None
    params: Dict[str, Any] = Field(default_factory=dict)
    n: int
    agree: int
    zero_hits: int
    estimate: float
    prediction: Optional[float] = None
    gap: Optional[float] = None
    max_abs_remainder: Optional[float] = None
    checkpoints: List[CheckpointRow] = Field(default_factory=list)
    diagnostics: Dict[str, Any] = Field(default_factory=dict)
    meta: ReportMeta

    _rows: List[SeriesRow] = PrivateAttr(default_factory=list)

    def attach_rows(self, rows: Iterable[SeriesRow]) -> "ExperimentReport":
        self._rows = list(rows)
        return self

    @property
    def rows(self) -> List[SeriesRow]:
        return self._rows

    def deterministic_json(self) -> str:
        """JSON without the run-dependent metadata."""
        return self.model_dump_json(exclude={"meta"})


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def series_csv(rows: Sequence[SeriesRow]) -> str:
    """CSV text with header n,agree,estimate,remainder and LF line endings."""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for row in rows:
        writer.writerow([_cell(v) for v in row])
    return buffer.getvalue()


def write_outputs(
    report: BaseModel,
    rows: Sequence[SeriesRow],
    output_dir: Path,
    stem: str,
    fmt: OutputFormat = OutputFormat.BOTH,
) -> List[Path]:
    """Write <stem>.json and/or <stem>.csv under output_dir; returns the paths written."""
    fmt = OutputFormat(fmt)
    output_dir = Path(output_dir)
    output_dir.mkdir(parents=True, exist_ok=True)
    written = []
    if fmt in (OutputFormat.JSON, OutputFormat.BOTH):
        path = output_dir / f"{stem}.json"
        path.write_text(report.model_dump_json(indent=2, by_alias=True) + "\n", encoding="utf-8")
        written.append(path)
    if fmt in (OutputFormat.CSV, OutputFormat.BOTH):
        path = output_dir / f"{stem}.csv"
        with open(path, "w", encoding="utf-8", newline="") as f:
            f.write(series_csv(rows))
        written.append(path)
    for path in written:
        logger.info(f"Wrote {path}")
    return written
