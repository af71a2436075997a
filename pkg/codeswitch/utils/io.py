# codeswitch/utils/io.py
from __future__ import annotations

import json
import math
from pathlib import Path
from typing import Any

import numpy as np
import pandas as pd


def open_text(path: str | Path, mode: str = "r"):
    """UTF-8 text handle; reading accepts LF, CRLF and a leading BOM, writing emits LF without BOM."""
    if "r" in mode:
        return open(path, mode, encoding="utf-8-sig", newline=None)
    return open(path, mode, encoding="utf-8", newline="\n")


def to_jsonable(obj: Any) -> Any:
    """
    Convert numpy scalars/arrays and nested containers to plain JSON types.
    Non-finite floats become None (JSON has no NaN/Infinity).
    """
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        f = float(obj)
        return f if math.isfinite(f) else None
    return obj


def write_json(path: str | Path, payload: Any) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open_text(path, "w") as f:
        json.dump(to_jsonable(payload), f, indent=2, ensure_ascii=False)
        f.write("\n")
    return path


def read_json(path: str | Path) -> Any:
    with open_text(path) as f:
        return json.load(f)


def write_tsv(path: str | Path, frame: pd.DataFrame) -> Path:
    """Header row, tab separated, full float precision."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(path, sep="\t", index=False, lineterminator="\n", float_format="%.17g")
    return path


def read_tsv(path: str | Path) -> pd.DataFrame:
    """Inverse of write_tsv; floats parse back to the exact values written."""
    return pd.read_csv(path, sep="\t", keep_default_na=False, float_precision="round_trip")
