# codeswitch/main.py
"""
Command-line entry point.

    python -m codeswitch.main filter  --input dataset.tsv --out runs/filter
    python -m codeswitch.main train   --gold annotated.conll --out runs/train
    python -m codeswitch.main tag     --input dataset.tsv --model runs/train/model.json --out runs/tag
    python -m codeswitch.main analyze --tags runs/tag/tagged.conll --out runs/analyze

Exit codes: 0 ok, 2 input format, 3 statistical degeneracy, 4 alignment.
"""
from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

# ------------------------------------------------------------------------------
# Import handling: allow running both `python -m codeswitch.main` and
# `python codeswitch/main.py`
# ------------------------------------------------------------------------------
if __package__ is None or __package__ == "":
    PROJECT_ROOT = Path(__file__).resolve().parents[1]
    if str(PROJECT_ROOT) not in sys.path:
        sys.path.insert(0, str(PROJECT_ROOT))

from codeswitch.config import Config
from codeswitch.core.corpus_io import (
    ANALYSIS_LABELS,
    TaggedCorpus,
    Utterance,
    parse_conll,
    parse_dataset,
    split_train_validation,
    write_conll,
    write_dataset,
)
from codeswitch.core.cs_metrics import (
    Aggregation,
    GroupSummary,
    SwitchMode,
    UtteranceMetrics,
    boxplot_payload,
    group_summary,
    metrics_frame,
    overall_summary,
    records_from_frame,
    table1_frame,
)
from codeswitch.core.script_filter import FilterReport, filter_corpus
from codeswitch.core.stats_engine import (
    MODEL_PAIRS,
    MODELS,
    AnovaResult,
    FitResult,
    anova_compare,
    fit_model,
    qq_data,
)
from codeswitch.core.token_lid import (
    EvalReport,
    LidConfig,
    LidModel,
    evaluate,
    import_tags,
    load_model,
    predict,
    predict_corpus,
    save_model,
    train,
)
from codeswitch.errors import AlignmentError, CodeSwitchError, InputFormatError
from codeswitch.utils.io import open_text, write_json, write_tsv
from codeswitch.utils.log import configure_logging, get_logger

log = get_logger("cli")


@dataclass
class AnalysisBundle:
    metrics: list[UtteranceMetrics]
    summaries: list[GroupSummary]
    overall: GroupSummary
    fits: dict[str, FitResult] = field(default_factory=dict)
    anovas: dict[str, AnovaResult] = field(default_factory=dict)
    out_dir: Optional[Path] = None


def _out_dir(out: Optional[str | Path]) -> Path:
    if out is None:
        return Config.ensure_run_dir()
    p = Path(out)
    p.mkdir(parents=True, exist_ok=True)
    return p


def _read_dataset(path: str | Path) -> list[Utterance]:
    with open_text(path) as f:
        try:
            return parse_dataset(f)
        except InputFormatError as e:
            raise InputFormatError(f"{path}: {e}") from None


def _read_conll(path: str | Path) -> TaggedCorpus:
    with open_text(path) as f:
        try:
            return parse_conll(f)
        except InputFormatError as e:
            raise InputFormatError(f"{path}: {e}") from None


# ---------------------------------- filter ----------------------------------

def cmd_filter(input_path: str | Path, out: Optional[str | Path] = None) -> FilterReport:
    out_dir = _out_dir(out)
    romanized, tamil, _, report = filter_corpus(_read_dataset(input_path))
    write_json(out_dir / "filter_report.json", report.to_dict())
    with open_text(out_dir / "romanized.tsv", "w") as f:
        write_dataset(romanized, f)
    with open_text(out_dir / "tamil_script.tsv", "w") as f:
        write_dataset(tamil, f)
    log.info("wrote filter report to %s", out_dir)
    return report


# ---------------------------------- train ----------------------------------

def cmd_train(
    gold_path: str | Path,
    out: Optional[str | Path] = None,
    split: Optional[float] = None,
    seed: Optional[int] = None,
    config: Optional[LidConfig] = None,
) -> tuple[LidModel, EvalReport]:
    """Train on the train part of the gold split, evaluate on the validation part."""
    out_dir = _out_dir(out)
    split = Config.SPLIT_FRACTION if split is None else split
    seed = Config.SPLIT_SEED if seed is None else seed
    gold = _read_conll(gold_path)
    train_part, val_part = split_train_validation(gold, split, seed)
    if len(val_part) == 0:
        raise InputFormatError(f"validation split is empty ({len(gold)} utterances at fraction {split})")

    model = train(train_part, config)
    predicted = TaggedCorpus(tuple(predict(model, " ".join(u.tokens)) for u in val_part))
    report = evaluate(predicted, val_part)

    save_model(model, out_dir / "model.json")
    write_json(out_dir / "eval_report.json", report.to_dict())
    log.info("validation accuracy %.4f, macro F1 %.4f over %d tokens",
             report.accuracy, report.macro_f1, report.n_tokens)
    return model, report


# ----------------------------------- tag -----------------------------------

def cmd_tag(
    input_path: str | Path,
    out: Optional[str | Path] = None,
    *,
    model_path: Optional[str | Path] = None,
    tags_path: Optional[str | Path] = None,
    gold_path: Optional[str | Path] = None,
    subset: str = "romanized",
    split: Optional[float] = None,
    seed: Optional[int] = None,
    workers: Optional[int] = None,
) -> TaggedCorpus:
    sources = [s for s in (model_path, tags_path, gold_path) if s is not None]
    if len(sources) != 1:
        raise ValueError("exactly one of --model, --tags, --gold is required")
    if subset not in ("romanized", "analysis"):
        raise ValueError(f"unknown subset {subset!r} (romanized | analysis)")

    out_dir = _out_dir(out)
    romanized, _, analysis, _ = filter_corpus(_read_dataset(input_path))
    target = romanized if subset == "romanized" else analysis

    if tags_path is not None:
        tagged = import_tags(target, _read_conll(tags_path))
    else:
        if model_path is not None:
            model = load_model(model_path)
        else:
            model, _ = cmd_train(gold_path, out_dir, split, seed)  # type: ignore[arg-type]
        tagged = predict_corpus(model, target, workers)

    with open_text(out_dir / "tagged.conll", "w") as f:
        write_conll(tagged, f)
    log.info("tagged %d utterances (%d tokens, %s) -> %s",
             len(tagged), tagged.n_tokens, tagged.tag_counts(), out_dir / "tagged.conll")
    return tagged


# --------------------------------- analyze ---------------------------------

def _attach_sentiments(tagged: TaggedCorpus, input_path: str | Path) -> TaggedCorpus:
    """Align tags with either the romanized set or the three-class subset of the dataset."""
    romanized, _, analysis, _ = filter_corpus(_read_dataset(input_path))
    if len(tagged) == len(romanized):
        return import_tags(romanized, tagged)
    if len(tagged) == len(analysis):
        return import_tags(analysis, tagged)
    raise AlignmentError(
        f"{len(tagged)} tagged utterances match neither the {len(romanized)} romanized "
        f"nor the {len(analysis)} analysis-subset utterances"
    )


def cmd_analyze(
    tags_path: str | Path,
    out: Optional[str | Path] = None,
    *,
    input_path: Optional[str | Path] = None,
    switch_mode: str | SwitchMode = Config.SWITCH_MODE,
    aggregation: str | Aggregation = Config.AGGREGATION,
    rounded: bool = False,
) -> AnalysisBundle:
    mode = SwitchMode.parse(switch_mode)
    agg = Aggregation.parse(aggregation)
    out_dir = _out_dir(out)

    tagged = _read_conll(tags_path)
    if input_path is not None:
        tagged = _attach_sentiments(tagged, input_path)
    for i, u in enumerate(tagged):
        if u.sentiment is None:
            raise InputFormatError(f"utterance {i} has no sentiment label (add metadata or pass --input)")
    subset = TaggedCorpus(tuple(u for u in tagged if u.sentiment in ANALYSIS_LABELS))
    if len(subset) < len(tagged):
        log.info("%d utterances outside the three analysis classes left out", len(tagged) - len(subset))
    if len(subset) == 0:
        raise InputFormatError("empty analysis subset")

    frame = metrics_frame(subset)
    write_tsv(out_dir / "metrics.tsv", frame)
    metrics = records_from_frame(frame, mode)

    summaries = group_summary(metrics)
    overall = overall_summary(metrics)
    write_json(out_dir / "table1.json", {
        "switch_mode": mode.value,
        "aggregation": agg.value,
        "groups": [g.to_dict() for g in summaries],
        "overall": overall.to_dict(),
    })
    write_tsv(out_dir / "table1.tsv", table1_frame([*summaries, overall], agg, rounded))
    write_json(out_dir / "boxplot_en.json", boxplot_payload(summaries, "en_prop"))
    write_json(out_dir / "boxplot_switches.json", boxplot_payload(summaries, "switch_count"))

    bundle = AnalysisBundle(metrics=metrics, summaries=summaries, overall=overall, out_dir=out_dir)
    for spec in MODELS:
        fit = fit_model(metrics, spec)
        bundle.fits[spec.name] = fit
        write_json(out_dir / f"{spec.name}.json", fit.to_dict())
        write_tsv(out_dir / f"qq_{spec.name}.tsv", qq_data(fit).to_frame())
    for name, reduced, full in MODEL_PAIRS:
        result = anova_compare(bundle.fits[reduced.name], bundle.fits[full.name])
        bundle.anovas[name] = result
        write_json(out_dir / f"{name}.json", result.to_dict())
        log.info("%s: F(%d, %d)=%.4g p=%.4g", name, result.df_numerator,
                 result.df_denominator, result.f_statistic, result.p_value)

    for g in summaries:
        en, ta, _ = g.proportions(agg)
        log.info("%-15s n=%-6d EN %.1f%%  TA %.1f%%  switches %.2f",
                 g.label, g.n, 100 * en, 100 * ta, g.mean_switches)
    return bundle


# ----------------------------------- CLI -----------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="codeswitch",
        description="Code-switching and sentiment analysis of romanized English-Tamil comments.",
    )
    ap.add_argument("--log-level", default=None, help=f"logging level (default {Config.LOG_LEVEL})")
    sub = ap.add_subparsers(dest="command", required=True)

    def out_flag(p: argparse.ArgumentParser) -> None:
        p.add_argument("--out", default=None, help="output directory (default: timestamped run under DATA_DIR)")

    p = sub.add_parser("filter", help="partition by script, report counts")
    p.add_argument("--input", required=True, help="sentiment TSV (text<TAB>label)")
    out_flag(p)

    p = sub.add_parser("train", help="train and validate the token language tagger")
    p.add_argument("--gold", required=True, help="annotated token-tag CoNLL")
    p.add_argument("--split", type=float, default=Config.SPLIT_FRACTION, help="validation fraction")
    p.add_argument("--seed", type=int, default=Config.SPLIT_SEED)
    out_flag(p)

    p = sub.add_parser("tag", help="tag romanized utterances")
    p.add_argument("--input", required=True, help="sentiment TSV")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--model", help="trained model.json")
    src.add_argument("--tags", help="externally produced token-tag CoNLL")
    src.add_argument("--gold", help="annotated CoNLL; train first, then tag")
    p.add_argument("--subset", choices=("romanized", "analysis"), default="romanized")
    p.add_argument("--split", type=float, default=Config.SPLIT_FRACTION)
    p.add_argument("--seed", type=int, default=Config.SPLIT_SEED)
    p.add_argument("--workers", type=int, default=Config.WORKERS, help="tagging processes")
    out_flag(p)

    p = sub.add_parser("analyze", help="metrics, sentiment summary table, regressions, ANOVA, Q-Q data")
    p.add_argument("--tags", required=True, help="tagged CoNLL")
    p.add_argument("--input", default=None, help="sentiment TSV providing labels for the tagged utterances")
    p.add_argument("--switch-mode", choices=[m.value for m in SwitchMode], default=Config.SWITCH_MODE)
    p.add_argument("--aggregation", choices=[a.value for a in Aggregation], default=Config.AGGREGATION)
    p.add_argument("--paper-rounding", dest="rounded", action="store_true",
                   help="one-decimal percentages in table1.tsv")
    out_flag(p)
    return ap


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    configure_logging(args.log_level)
    try:
        if args.command == "filter":
            cmd_filter(args.input, args.out)
        elif args.command == "train":
            cmd_train(args.gold, args.out, args.split, args.seed)
        elif args.command == "tag":
            cmd_tag(args.input, args.out, model_path=args.model, tags_path=args.tags,
                    gold_path=args.gold, subset=args.subset, split=args.split,
                    seed=args.seed, workers=args.workers)
        else:
            cmd_analyze(args.tags, args.out, input_path=args.input,
                        switch_mode=args.switch_mode, aggregation=args.aggregation,
                        rounded=args.rounded)
    except CodeSwitchError as e:
        log.error("%s", e)
        return e.exit_code
    except (ValueError, OSError) as e:
        log.error("%s", e)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
