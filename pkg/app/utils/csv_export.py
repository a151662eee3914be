import pandas as pd
import numpy as np
import logging
from pathlib import Path
from typing import Dict, List, Sequence

logger = logging.getLogger(__name__)

LOG2 = float(np.log(2.0))
FLOAT_FORMAT = "%.12g"


def to_units(value_nats, units: str):
    """Convert nats to the requested output unit (nats or bits)"""
    if units == "bits":
        return value_nats / LOG2
    return value_nats


def from_bits(value_bits: float) -> float:
    return float(value_bits) * LOG2


def unit_column(name: str, units: str) -> str:
    return f"{name}_{units}"


def rows_to_frame(rows: List[Dict[str, object]], columns: Sequence[str]) -> pd.DataFrame:
    """Frame with a fixed column order; an empty row list gives a header-only table"""
    return pd.DataFrame(rows, columns=list(columns))


def export_table_to_csv(frame: pd.DataFrame, path: Path) -> Path:
    """Write a result table deterministically (fixed float format, LF line endings)"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    logger.info(f"Wrote {len(frame)} rows to {path}")
    return path


def export_gnuplot_series(frame: pd.DataFrame, x: str, curves: Sequence[str], directory: Path, stem: str) -> List[Path]:
    """One two-column .dat file per curve, '#'-prefixed header"""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    written = []
    for curve in curves:
        path = directory / f"{stem}_{curve}.dat"
        series = frame[[x, curve]].dropna()
        with open(path, "w", newline="\n") as handle:
            handle.write(f"# {x} {curve}\n")
            series.to_csv(handle, sep=" ", header=False, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
        written.append(path)
    logger.info(f"Wrote {len(written)} gnuplot series for {stem} to {directory}")
    return written
