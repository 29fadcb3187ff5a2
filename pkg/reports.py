"""
Verification reports and tabular output.

A Report carries run metadata and one record per check. Every record states
the claim, the raw observed value, a nonnegative discrepancy and the
tolerance it is held to; a check passes when discrepancy <= tolerance.
"""

import json
import logging
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Union

import numpy as np
import pandas as pd

from kernel_errors import FieldIOError

logger = logging.getLogger(__name__)

CODE_VERSION = "1.0.0"
OUTPUT_FORMATS = ("csv", "json")


@dataclass
class ReportRecord:
    name: str
    group: str
    claim: str
    value: float
    measured: float
    tolerance: float
    runtime_s: float = 0.0
    detail: str = ""

    @property
    def passed(self) -> bool:
        return bool(math.isfinite(self.measured) and self.measured <= self.tolerance)


@dataclass
class Report:
    """Metadata (config echo, version, wall time) plus per-check records."""

    metadata: Dict = field(default_factory=dict)
    records: List[ReportRecord] = field(default_factory=list)

    def add(self, record: ReportRecord):
        if any(existing.name == record.name for existing in self.records):
            raise ValueError(f"duplicate report record {record.name!r}")
        self.records.append(record)
        logger.info("%s %s: measured %.3g, tolerance %.3g", "PASS" if record.passed else "FAIL",
                    record.name, record.measured, record.tolerance)

    @property
    def passed(self) -> bool:
        return all(record.passed for record in self.records)

    @property
    def failures(self) -> List[ReportRecord]:
        return [record for record in self.records if not record.passed]

    def to_frame(self) -> pd.DataFrame:
        rows = []
        for record in self.records:
            row = asdict(record)
            row["pass"] = record.passed
            rows.append(row)
        columns = ["name", "group", "claim", "value", "measured", "tolerance", "pass", "runtime_s", "detail"]
        return pd.DataFrame(rows, columns=columns)

    def to_dict(self) -> Dict:
        return {
            "metadata": _jsonable(self.metadata),
            "records": _jsonable(self.to_frame().to_dict(orient="records")),
            "passed": self.passed,
        }

    def write(self, out_dir: Union[str, Path], fmt: str = "csv", stem: str = "report") -> List[Path]:
        return write_table(self.to_frame(), out_dir, stem, fmt, metadata=self.to_dict()["metadata"],
                           extra={"passed": self.passed})

    def render_text(self) -> str:
        """Human-readable summary in the banner layout of the other text reports."""
        report = []
        report.append("=" * 70)
        report.append("TIME-PERIODIC KERNEL VERIFICATION REPORT")
        report.append("=" * 70)
        for key in ("version", "started", "wall_time_s"):
            if key in self.metadata:
                report.append(f"{key}: {self.metadata[key]}")

        groups: Dict[str, List[ReportRecord]] = {}
        for record in self.records:
            groups.setdefault(record.group, []).append(record)
        for group, records in groups.items():
            report.append(f"\n{group.upper()}")
            report.append("-" * 50)
            for record in records:
                mark = "✅" if record.passed else "❌"
                report.append(f"{mark} {record.name}: {record.claim}")
                report.append(f"   observed {record.value:.6g}, discrepancy {record.measured:.3g}"
                              f" (tolerance {record.tolerance:.3g})")
                if record.detail:
                    report.append(f"   {record.detail}")

        failed = len(self.failures)
        report.append("\n" + "=" * 70)
        if failed:
            report.append(f"❌ {failed} of {len(self.records)} checks failed")
        else:
            report.append(f"✅ all {len(self.records)} checks passed")
        report.append("=" * 70)
        return "\n".join(report)


def _jsonable(value):
    if isinstance(value, dict):
        return {str(key): _jsonable(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(item) for item in value]
    if isinstance(value, np.ndarray):
        return _jsonable(value.tolist())
    if isinstance(value, (np.bool_,)):
        return bool(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return value if math.isfinite(value) else str(value)
    if isinstance(value, complex):
        return {"re": value.real, "im": value.imag}
    return value


def write_table(frame: pd.DataFrame, out_dir: Union[str, Path], stem: str, fmt: str = "csv",
                metadata: Optional[Dict] = None, extra: Optional[Dict] = None) -> List[Path]:
    """
    Write rows as CSV (plus a metadata sidecar) or as one JSON document.

    Returns the paths written.
    """
    if fmt not in OUTPUT_FORMATS:
        raise ValueError(f"unknown output format {fmt!r}")
    out_dir = Path(out_dir)
    written = []
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        if fmt == "csv":
            path = out_dir / f"{stem}.csv"
            frame.to_csv(path, index=False)
            written.append(path)
            if metadata is not None:
                sidecar = out_dir / f"{stem}_metadata.json"
                sidecar.write_text(json.dumps(_jsonable({**metadata, **(extra or {})}), indent=2))
                written.append(sidecar)
        else:
            path = out_dir / f"{stem}.json"
            document = {"metadata": _jsonable(metadata or {}),
                        "records": _jsonable(frame.to_dict(orient="records"))}
            document.update(_jsonable(extra or {}))
            path.write_text(json.dumps(document, indent=2))
            written.append(path)
    except OSError as exc:
        raise FieldIOError(f"cannot write {stem} output to {out_dir}: {exc}") from exc
    for path in written:
        logger.debug("wrote %s", path)
    return written
