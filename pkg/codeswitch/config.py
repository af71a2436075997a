# codeswitch/config.py
from __future__ import annotations

import os
import sys
from pathlib import Path


# ============================== Path helpers ==============================

def _candidate_base_dirs() -> list[Path]:
    """
    Ordered candidates for the project base directory:
      1) Dev repo root (folder that contains /codeswitch)  ← preferred
      2) Current working directory                          ← last resort
    """
    here = Path(__file__).resolve()           # .../codeswitch/config.py
    dev_root = here.parent.parent             # .../project-root
    cands: list[Path] = [dev_root, Path.cwd()]

    # de-dup while preserving order
    out, seen = [], set()
    for p in cands:
        s = str(p)
        if s not in seen:
            out.append(p)
            seen.add(s)
    return out


def _env_bool(name: str, default: bool) -> bool:
    v = os.environ.get(name)
    if v is None:
        return default
    v = v.strip().lower()
    return v in ("1", "true", "yes", "y", "on")


def _env_float(name: str, default: float) -> float:
    try:
        return float(os.environ.get(name, default))
    except Exception:
        return float(default)


def _env_int(name: str, default: int) -> int:
    return int(_env_float(name, default))


def _env_str(name: str, default: str) -> str:
    v = os.environ.get(name)
    return v.strip() if v and v.strip() else default


# ================================ Config =================================

class Config:
    """
    Centralized, environment-overridable configuration.

    Import everywhere as:
        from codeswitch.config import Config
    """

    # ---------------- Paths ----------------
    _ENV_BASE = os.environ.get("APP_BASE_DIR")
    BASE_DIR: Path = Path(_ENV_BASE).resolve() if _ENV_BASE else _candidate_base_dirs()[0]

    DOCS_DIR: Path = (BASE_DIR / "docs").resolve()

    # Writable output root; run folders are created lazily (see ensure_run_dir)
    _ENV_DATA = os.environ.get("DATA_DIR")
    DATA_DIR: Path = Path(_ENV_DATA).resolve() if _ENV_DATA else (BASE_DIR / "data").resolve()

    # ---------------- Token-level language identification ----------------
    LID_NGRAM_MIN: int = _env_int("LID_NGRAM_MIN", 1)
    LID_NGRAM_MAX: int = _env_int("LID_NGRAM_MAX", 4)
    LID_MIN_NGRAM_COUNT: int = _env_int("LID_MIN_NGRAM_COUNT", 2)
    LID_L2_PENALTY: float = _env_float("LID_L2_PENALTY", 1e-4)
    LID_LEARNING_RATE: float = _env_float("LID_LEARNING_RATE", 0.5)
    LID_EPOCHS: int = _env_int("LID_EPOCHS", 200)
    LID_SEED: int = _env_int("LID_SEED", 13)

    # 80/20 train/validation split of the annotated CoNLL corpus
    SPLIT_FRACTION: float = _env_float("SPLIT_FRACTION", 0.2)
    SPLIT_SEED: int = _env_int("SPLIT_SEED", 13)

    # ---------------- Code-switch metrics ----------------
    # strict | collapse
    SWITCH_MODE: str = _env_str("SWITCH_MODE", "strict")
    # macro | micro
    AGGREGATION: str = _env_str("AGGREGATION", "macro")

    # ---------------- Statistics ----------------
    # |R_jj| below OLS_RANK_TOL * max|R_ii| marks column j as dependent
    OLS_RANK_TOL: float = _env_float("OLS_RANK_TOL", 1e-10)
    # rss <= OLS_RSS_ZERO_TOL * max(tss, 1) counts as a perfect fit
    OLS_RSS_ZERO_TOL: float = _env_float("OLS_RSS_ZERO_TOL", 1e-20)
    BETA_CF_TOL: float = _env_float("BETA_CF_TOL", 1e-12)
    BETA_CF_MAX_ITER: int = _env_int("BETA_CF_MAX_ITER", 300)

    # ---------------- Runtime ----------------
    LOG_LEVEL: str = _env_str("LOG_LEVEL", "INFO")
    PROGRESS: bool = _env_bool("PROGRESS", True)
    # process pool size for corpus tagging (1 = serial)
    WORKERS: int = max(1, _env_int("WORKERS", 1))

    # ---------------- Helpers ----------------
    @staticmethod
    def ensure_run_dir() -> Path:
        """
        Create and return a timestamped run directory under DATA/.
        Used when the CLI is not given --out.
        """
        from datetime import datetime
        ts = datetime.now().strftime("%Y%m%d_%H%M%S")
        rdir = (Config.DATA_DIR / ts).resolve()
        rdir.mkdir(parents=True, exist_ok=True)
        return rdir

    @staticmethod
    def schema_dir() -> Path:
        """Folder holding the JSON schemas of every emitted report."""
        return (Config.DOCS_DIR / "schemas").resolve()
