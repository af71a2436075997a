# codeswitch/core/script_filter.py
"""Script partition (Tamil block vs. romanized) and the three-class analysis subset."""
from __future__ import annotations

import re
from dataclasses import asdict, dataclass
from typing import Sequence

from codeswitch.core.corpus_io import ANALYSIS_LABELS, SentimentLabel, Utterance
from codeswitch.utils.log import get_logger

log = get_logger("filter")

# Unicode Tamil block
_TAMIL = re.compile(r"[\u0B80-\u0BFF]")


@dataclass(frozen=True)
class FilterReport:
    total: int = 0
    tamil_script: int = 0
    romanized: int = 0
    excluded_unknown_state: int = 0
    excluded_not_tamil: int = 0
    analysis_subset: int = 0

    @property
    def tamil_script_share(self) -> float:
        return self.tamil_script / self.total if self.total else 0.0

    @property
    def romanized_share(self) -> float:
        return self.romanized / self.total if self.total else 0.0

    def to_dict(self) -> dict[str, float | int]:
        d: dict[str, float | int] = asdict(self)
        d["tamil_script_share"] = self.tamil_script_share
        d["romanized_share"] = self.romanized_share
        return d


def contains_tamil_script(text: str) -> bool:
    return _TAMIL.search(text) is not None


def partition_by_script(utterances: Sequence[Utterance]) -> tuple[list[Utterance], list[Utterance]]:
    """(romanized, tamil_script); one Tamil code point anywhere puts the utterance in the second list."""
    romanized: list[Utterance] = []
    tamil: list[Utterance] = []
    for u in utterances:
        (tamil if contains_tamil_script(u.text) else romanized).append(u)
    return romanized, tamil


def select_analysis_subset(utterances: Sequence[Utterance]) -> list[Utterance]:
    return [u for u in utterances if u.sentiment in ANALYSIS_LABELS]


def filter_report(utterances: Sequence[Utterance]) -> FilterReport:
    total = tamil = unknown = not_tamil = 0
    for u in utterances:
        total += 1
        if contains_tamil_script(u.text):
            tamil += 1
        elif u.sentiment is SentimentLabel.UNKNOWN_STATE:
            unknown += 1
        elif u.sentiment is SentimentLabel.NOT_TAMIL:
            not_tamil += 1
    romanized = total - tamil
    return FilterReport(
        total=total,
        tamil_script=tamil,
        romanized=romanized,
        excluded_unknown_state=unknown,
        excluded_not_tamil=not_tamil,
        analysis_subset=romanized - unknown - not_tamil,
    )


def filter_corpus(
    utterances: Sequence[Utterance],
) -> tuple[list[Utterance], list[Utterance], list[Utterance], FilterReport]:
    """Partition, subset and report in one call: (romanized, tamil_script, analysis, report)."""
    romanized, tamil = partition_by_script(utterances)
    analysis = select_analysis_subset(romanized)
    report = filter_report(utterances)
    log.info(
        "%d utterances: %d Tamil-script (%.1f%%), %d romanized -> %d in analysis subset",
        report.total, report.tamil_script, 100.0 * report.tamil_script_share,
        report.romanized, report.analysis_subset,
    )
    return romanized, tamil, analysis, report
