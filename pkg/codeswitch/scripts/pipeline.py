# codeswitch/scripts/pipeline.py
from __future__ import annotations

# ── allow running as:
#    python -m codeswitch.scripts.pipeline
#    python codeswitch/scripts/pipeline.py
import sys
from pathlib import Path

if __package__ in (None, ""):
    THIS_FILE = Path(__file__).resolve()
    PROJECT_ROOT = THIS_FILE.parents[2]  # .../<project-root>
    if str(PROJECT_ROOT) not in sys.path:
        sys.path.insert(0, str(PROJECT_ROOT))
# ─────────────────────────────────────────────────────────────

import argparse
from typing import Optional, Sequence

from codeswitch.config import Config
from codeswitch.errors import CodeSwitchError
from codeswitch.main import AnalysisBundle, cmd_analyze, cmd_filter, cmd_tag, cmd_train
from codeswitch.utils.log import configure_logging, get_logger

log = get_logger("cli")


def run_pipeline(
    dataset: str | Path,
    gold: str | Path,
    out: Optional[str | Path] = None,
    *,
    split: float = Config.SPLIT_FRACTION,
    seed: int = Config.SPLIT_SEED,
    subset: str = "romanized",
    switch_mode: str = Config.SWITCH_MODE,
    aggregation: str = Config.AGGREGATION,
    rounded: bool = False,
    workers: Optional[int] = None,
) -> AnalysisBundle:
    """
    filter -> train -> tag -> analyze, one subfolder per stage:
        <out>/filter  <out>/train  <out>/tag  <out>/analyze
    """
    root = Path(out) if out is not None else Config.ensure_run_dir()
    cmd_filter(dataset, root / "filter")
    cmd_train(gold, root / "train", split, seed)
    cmd_tag(dataset, root / "tag", model_path=root / "train" / "model.json",
            subset=subset, workers=workers)
    return cmd_analyze(root / "tag" / "tagged.conll", root / "analyze",
                       input_path=dataset, switch_mode=switch_mode,
                       aggregation=aggregation, rounded=rounded)


def main(argv: Optional[Sequence[str]] = None) -> int:
    ap = argparse.ArgumentParser(description="Run the full filter/train/tag/analyze pipeline.")
    ap.add_argument("--input", required=True, help="sentiment TSV")
    ap.add_argument("--gold", required=True, help="annotated token-tag CoNLL")
    ap.add_argument("--out", default=None)
    ap.add_argument("--split", type=float, default=Config.SPLIT_FRACTION)
    ap.add_argument("--seed", type=int, default=Config.SPLIT_SEED)
    ap.add_argument("--subset", choices=("romanized", "analysis"), default="romanized")
    ap.add_argument("--switch-mode", choices=("strict", "collapse"), default=Config.SWITCH_MODE)
    ap.add_argument("--aggregation", choices=("macro", "micro"), default=Config.AGGREGATION)
    ap.add_argument("--paper-rounding", dest="rounded", action="store_true")
    ap.add_argument("--workers", type=int, default=Config.WORKERS)
    args = ap.parse_args(argv)

    configure_logging()
    try:
        bundle = run_pipeline(
            args.input, args.gold, args.out,
            split=args.split, seed=args.seed, subset=args.subset,
            switch_mode=args.switch_mode, aggregation=args.aggregation,
            rounded=args.rounded, workers=args.workers,
        )
    except CodeSwitchError as e:
        log.error("%s", e)
        return e.exit_code
    except (ValueError, OSError) as e:
        log.error("%s", e)
        return 2
    log.info("pipeline done -> %s", bundle.out_dir)
    return 0


if __name__ == "__main__":
    sys.exit(main())
