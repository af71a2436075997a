# codeswitch/utils/log.py
from __future__ import annotations

import logging
import sys

from codeswitch.config import Config

_ROOT = "codeswitch"
_FORMAT = "[%(tag)s] %(message)s"


class _TagFilter(logging.Filter):
    """Expose the short module tag ('lid', 'stats', ...) as %(tag)s."""

    def filter(self, record: logging.LogRecord) -> bool:
        record.tag = record.name.rsplit(".", 1)[-1]
        return True


def get_logger(tag: str) -> logging.Logger:
    """Library loggers live under the `codeswitch.` namespace; no handlers here."""
    return logging.getLogger(f"{_ROOT}.{tag}")


def configure_logging(level: str | int | None = None) -> None:
    """Attach one stderr handler to the package logger (idempotent)."""
    root = logging.getLogger(_ROOT)
    lvl = level if level is not None else Config.LOG_LEVEL
    if isinstance(lvl, str):
        lvl = logging.getLevelName(lvl.upper())
        if not isinstance(lvl, int):
            lvl = logging.INFO
    root.setLevel(lvl)
    if not any(getattr(h, "_codeswitch", False) for h in root.handlers):
        handler = logging.StreamHandler(sys.stderr)
        handler.setFormatter(logging.Formatter(_FORMAT))
        handler.addFilter(_TagFilter())
        handler._codeswitch = True  # type: ignore[attr-defined]
        root.addHandler(handler)


def progress_enabled() -> bool:
    """tqdm bars only when enabled in Config and stderr is a terminal."""
    try:
        return bool(Config.PROGRESS) and sys.stderr.isatty()
    except Exception:
        return False
