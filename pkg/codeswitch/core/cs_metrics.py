# codeswitch/core/cs_metrics.py
"""
Per-utterance code-switching measurements and per-sentiment summaries.

Proportions use every token (na included) as the denominator. Switches are
counted at word boundaries in one of two modes:
  strict    adjacent tags differ and neither is na
  collapse  drop na tokens first, then count adjacent differing tags
"""
from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Optional, Sequence

import numpy as np
import pandas as pd

from codeswitch.core.corpus_io import (
    ANALYSIS_LABELS,
    LangTag,
    SentimentLabel,
    TaggedUtterance,
)
from codeswitch.errors import InputFormatError
from codeswitch.utils.log import get_logger

log = get_logger("metrics")

_PROP_SUM_TOL = 1e-12

METRICS_COLUMNS = (
    "id", "sentiment", "token_count",
    "en_prop", "ta_prop", "na_prop",
    "switches_strict", "switches_collapse",
)


class SwitchMode(str, Enum):
    STRICT = "strict"
    COLLAPSE = "collapse"

    @classmethod
    def parse(cls, s: "str | SwitchMode") -> "SwitchMode":
        if isinstance(s, SwitchMode):
            return s
        key = s.strip().lower()
        aliases = {"strict_boundary": "strict", "collapse_na": "collapse"}
        try:
            return cls(aliases.get(key, key))
        except ValueError:
            raise ValueError(f"unknown switch mode {s!r} (strict | collapse)") from None

    @property
    def column(self) -> str:
        return f"switches_{self.value}"


class Aggregation(str, Enum):
    MACRO = "macro"   # mean of per-utterance proportions
    MICRO = "micro"   # token-pooled proportions

    @classmethod
    def parse(cls, s: "str | Aggregation") -> "Aggregation":
        if isinstance(s, Aggregation):
            return s
        try:
            return cls(s.strip().lower())
        except ValueError:
            raise ValueError(f"unknown aggregation {s!r} (macro | micro)") from None


# --------------------------------- records ---------------------------------

@dataclass(frozen=True)
class UtteranceMetrics:
    id: Optional[int]
    sentiment: Optional[SentimentLabel]
    token_count: int
    en_prop: float
    ta_prop: float
    na_prop: float
    switch_count: int

    def __post_init__(self) -> None:
        if self.token_count < 1:
            raise ValueError(f"token_count must be positive, got {self.token_count}")
        if not 0 <= self.switch_count <= self.token_count - 1:
            raise ValueError(
                f"switch_count {self.switch_count} outside [0, {self.token_count - 1}]"
            )
        for name in ("en_prop", "ta_prop", "na_prop"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} {v} outside [0, 1]")
        if abs(self.en_prop + self.ta_prop + self.na_prop - 1.0) > _PROP_SUM_TOL:
            raise ValueError("language proportions do not sum to 1")

    def tag_count(self, tag: LangTag) -> int:
        prop = {LangTag.EN: self.en_prop, LangTag.TA: self.ta_prop, LangTag.NA: self.na_prop}[tag]
        return int(round(prop * self.token_count))


@dataclass(frozen=True)
class BoxStats:
    min: float
    q1: float
    median: float
    q3: float
    max: float
    mean: float

    @classmethod
    def from_values(cls, values: Sequence[float]) -> "BoxStats":
        """Linear-interpolation quartiles; the mean is the boxplot's diamond marker."""
        v = np.sort(np.asarray(values, dtype=np.float64))
        if v.size == 0:
            raise ValueError("boxplot statistics need at least one value")
        q1, med, q3 = np.quantile(v, [0.25, 0.5, 0.75], method="linear")
        return cls(
            min=float(v[0]), q1=float(q1), median=float(med), q3=float(q3),
            max=float(v[-1]), mean=math.fsum(v) / v.size,
        )

    def to_dict(self) -> dict[str, float]:
        return {
            "min": self.min, "q1": self.q1, "median": self.median,
            "q3": self.q3, "max": self.max, "mean": self.mean,
        }


@dataclass(frozen=True)
class GroupSummary:
    sentiment: Optional[SentimentLabel]   # None = pooled over every sentiment
    n: int
    mean_en_prop: float
    mean_ta_prop: float
    mean_na_prop: float
    mean_switches: float
    sd_en_prop: float
    sd_ta_prop: float
    sd_switches: float
    sd_defined: bool                      # False when n == 1 (sds reported as 0)
    micro_en_prop: float
    micro_ta_prop: float
    micro_na_prop: float
    en_prop_box: BoxStats
    switches_box: BoxStats
    pure_ta_share: float
    pure_en_share: float
    code_switched_share: float

    @property
    def label(self) -> str:
        return self.sentiment.value if self.sentiment is not None else "All"

    def proportions(self, aggregation: Aggregation = Aggregation.MACRO) -> tuple[float, float, float]:
        """(en, ta, na) under the requested aggregation."""
        if Aggregation.parse(aggregation) is Aggregation.MICRO:
            return self.micro_en_prop, self.micro_ta_prop, self.micro_na_prop
        return self.mean_en_prop, self.mean_ta_prop, self.mean_na_prop

    def to_dict(self) -> dict:
        return {
            "sentiment": self.label,
            "n": self.n,
            "mean_en_prop": self.mean_en_prop,
            "mean_ta_prop": self.mean_ta_prop,
            "mean_na_prop": self.mean_na_prop,
            "mean_switches": self.mean_switches,
            "sd_en_prop": self.sd_en_prop,
            "sd_ta_prop": self.sd_ta_prop,
            "sd_switches": self.sd_switches,
            "sd_defined": self.sd_defined,
            "micro_en_prop": self.micro_en_prop,
            "micro_ta_prop": self.micro_ta_prop,
            "micro_na_prop": self.micro_na_prop,
            "en_prop_box": self.en_prop_box.to_dict(),
            "switches_box": self.switches_box.to_dict(),
            "pure_ta_share": self.pure_ta_share,
            "pure_en_share": self.pure_en_share,
            "code_switched_share": self.code_switched_share,
        }


# ------------------------------ measurements ------------------------------

def language_proportions(tagged: TaggedUtterance) -> tuple[float, float, float]:
    n = len(tagged)
    if n == 0:
        raise InputFormatError("empty utterance")
    c = Counter(tagged.tags)
    return c[LangTag.EN] / n, c[LangTag.TA] / n, c[LangTag.NA] / n


def count_switches(tags: Sequence[LangTag], mode: SwitchMode = SwitchMode.STRICT) -> int:
    mode = SwitchMode.parse(mode)
    if mode is SwitchMode.COLLAPSE:
        tags = [t for t in tags if t is not LangTag.NA]
        return sum(1 for a, b in zip(tags, tags[1:]) if a is not b)
    return sum(
        1 for a, b in zip(tags, tags[1:])
        if a is not b and a is not LangTag.NA and b is not LangTag.NA
    )


def switch_count(tagged: TaggedUtterance, mode: SwitchMode = SwitchMode.STRICT) -> int:
    return count_switches(tagged.tags, mode)


def utterance_metrics(tagged: TaggedUtterance, mode: SwitchMode = SwitchMode.STRICT) -> UtteranceMetrics:
    en, ta, na = language_proportions(tagged)
    return UtteranceMetrics(
        id=tagged.id,
        sentiment=tagged.sentiment,
        token_count=len(tagged),
        en_prop=en,
        ta_prop=ta,
        na_prop=na,
        switch_count=switch_count(tagged, mode),
    )


def corpus_metrics(
    corpus: Iterable[TaggedUtterance],
    mode: SwitchMode = SwitchMode.STRICT,
) -> list[UtteranceMetrics]:
    """utterance_metrics over a corpus; empty utterances are skipped and logged."""
    out: list[UtteranceMetrics] = []
    for i, u in enumerate(corpus):
        if len(u) == 0:
            log.warning("skipping empty utterance %d (id=%s)", i, u.id)
            continue
        out.append(utterance_metrics(u, mode))
    return out


# ------------------------------- tables -------------------------------

def metrics_frame(corpus: Iterable[TaggedUtterance]) -> pd.DataFrame:
    """Metrics table with both switch columns, one row per non-empty utterance."""
    rows = []
    for u in corpus:
        if len(u) == 0:
            continue
        en, ta, na = language_proportions(u)
        rows.append({
            "id": u.id if u.id is not None else "",
            "sentiment": u.sentiment.value if u.sentiment is not None else "",
            "token_count": len(u),
            "en_prop": en,
            "ta_prop": ta,
            "na_prop": na,
            "switches_strict": count_switches(u.tags, SwitchMode.STRICT),
            "switches_collapse": count_switches(u.tags, SwitchMode.COLLAPSE),
        })
    return pd.DataFrame(rows, columns=list(METRICS_COLUMNS))


def records_from_frame(frame: pd.DataFrame, mode: SwitchMode = SwitchMode.STRICT) -> list[UtteranceMetrics]:
    """Rebuild UtteranceMetrics from a metrics table (e.g. a re-read metrics.tsv)."""
    mode = SwitchMode.parse(mode)
    missing = [c for c in METRICS_COLUMNS if c not in frame.columns]
    if missing:
        raise InputFormatError(f"metrics table lacks columns {missing}")
    out: list[UtteranceMetrics] = []
    for row in frame.itertuples(index=False):
        rid = getattr(row, "id")
        sent = getattr(row, "sentiment")
        out.append(UtteranceMetrics(
            id=int(rid) if str(rid) != "" else None,
            sentiment=SentimentLabel.parse(str(sent)) if str(sent) != "" else None,
            token_count=int(getattr(row, "token_count")),
            en_prop=float(getattr(row, "en_prop")),
            ta_prop=float(getattr(row, "ta_prop")),
            na_prop=float(getattr(row, "na_prop")),
            switch_count=int(getattr(row, mode.column)),
        ))
    return out


# ------------------------------ summaries ------------------------------

def _sd(values: np.ndarray) -> float:
    return float(np.std(values, ddof=1)) if values.size > 1 else 0.0


def _summarize(sentiment: Optional[SentimentLabel], items: Sequence[UtteranceMetrics]) -> GroupSummary:
    # sorted copies keep every reduction independent of input order
    en = np.sort([m.en_prop for m in items])
    ta = np.sort([m.ta_prop for m in items])
    na = np.sort([m.na_prop for m in items])
    sw = np.sort(np.asarray([m.switch_count for m in items], dtype=np.float64))
    n = len(items)

    tokens = sum(m.token_count for m in items)
    en_tok = sum(m.tag_count(LangTag.EN) for m in items)
    ta_tok = sum(m.tag_count(LangTag.TA) for m in items)
    na_tok = sum(m.tag_count(LangTag.NA) for m in items)

    pure_ta = sum(1 for m in items if m.en_prop == 0.0 and m.ta_prop > 0.0)
    pure_en = sum(1 for m in items if m.ta_prop == 0.0 and m.en_prop > 0.0)
    mixed = sum(1 for m in items if m.en_prop > 0.0 and m.ta_prop > 0.0)

    return GroupSummary(
        sentiment=sentiment,
        n=n,
        mean_en_prop=math.fsum(en) / n,
        mean_ta_prop=math.fsum(ta) / n,
        mean_na_prop=math.fsum(na) / n,
        mean_switches=math.fsum(sw) / n,
        sd_en_prop=_sd(en),
        sd_ta_prop=_sd(ta),
        sd_switches=_sd(sw),
        sd_defined=n > 1,
        micro_en_prop=en_tok / tokens,
        micro_ta_prop=ta_tok / tokens,
        micro_na_prop=na_tok / tokens,
        en_prop_box=BoxStats.from_values(en),
        switches_box=BoxStats.from_values(sw),
        pure_ta_share=pure_ta / n,
        pure_en_share=pure_en / n,
        code_switched_share=mixed / n,
    )


def _group_order(s: SentimentLabel) -> int:
    order = list(ANALYSIS_LABELS) + [x for x in SentimentLabel if x not in ANALYSIS_LABELS]
    return order.index(s)


def group_summary(metrics: Sequence[UtteranceMetrics]) -> list[GroupSummary]:
    """One row per sentiment present: Positive, Mixed_feelings, Negative, then any others."""
    groups: dict[SentimentLabel, list[UtteranceMetrics]] = {}
    unlabeled = 0
    for m in metrics:
        if m.sentiment is None:
            unlabeled += 1
            continue
        groups.setdefault(m.sentiment, []).append(m)
    if unlabeled:
        log.warning("%d utterances without a sentiment label left out of the group summary", unlabeled)
    return [_summarize(s, groups[s]) for s in sorted(groups, key=_group_order)]


def overall_summary(metrics: Sequence[UtteranceMetrics]) -> GroupSummary:
    if not metrics:
        raise InputFormatError("no utterances to summarize")
    return _summarize(None, metrics)


def table1_frame(
    summaries: Sequence[GroupSummary],
    aggregation: Aggregation = Aggregation.MACRO,
    rounded: bool = False,
) -> pd.DataFrame:
    """Presentation table: percentages (x100), optionally rounded to one decimal (switches to two)."""
    rows = []
    for g in summaries:
        en, ta, na = (100.0 * p for p in g.proportions(aggregation))
        sw = g.mean_switches
        if rounded:
            en, ta, na, sw = round(en, 1), round(ta, 1), round(na, 1), round(sw, 2)
        rows.append({"sentiment": g.label, "n": g.n, "en_pct": en, "ta_pct": ta, "na_pct": na, "switches": sw})
    return pd.DataFrame(rows, columns=["sentiment", "n", "en_pct", "ta_pct", "na_pct", "switches"])


def boxplot_payload(summaries: Sequence[GroupSummary], variable: str) -> dict:
    """Figure data: per group min/q1/median/q3/max/mean for `en_prop` or `switch_count`."""
    if variable not in ("en_prop", "switch_count"):
        raise ValueError(f"unknown boxplot variable {variable!r}")
    groups = []
    for g in summaries:
        box = g.en_prop_box if variable == "en_prop" else g.switches_box
        groups.append({"sentiment": g.label, "n": g.n, **box.to_dict()})
    return {"variable": variable, "groups": groups}
