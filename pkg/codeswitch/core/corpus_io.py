# codeswitch/core/corpus_io.py
"""
Corpus file formats.

- Sentiment TSV: `text<TAB>label` per line, optional `text<TAB>category` header.
- Token-tag CoNLL: `token<TAB>tag` per line, one blank line between utterances.
  Optional `# id = N` / `# sentiment = Label` lines may precede an utterance.
"""
from __future__ import annotations

import re
from collections import Counter
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Iterator, Optional, TextIO

import numpy as np

from codeswitch.errors import InputFormatError
from codeswitch.utils.log import get_logger

log = get_logger("corpus")

_WS = re.compile(r"\s")
_META = re.compile(r"^#\s*(\w+)\s*=\s*(.*?)\s*$")


# ------------------------------- label domains -------------------------------

class SentimentLabel(str, Enum):
    POSITIVE = "Positive"
    NEGATIVE = "Negative"
    MIXED_FEELINGS = "Mixed_feelings"
    UNKNOWN_STATE = "unknown_state"
    NOT_TAMIL = "not-Tamil"

    @classmethod
    def parse(cls, s: str) -> "SentimentLabel":
        try:
            return cls(s)
        except ValueError:
            raise ValueError(f"unknown sentiment label {s!r}") from None

    def __str__(self) -> str:
        return self.value


# The three clearly delineated classes, in report order.
ANALYSIS_LABELS: tuple[SentimentLabel, ...] = (
    SentimentLabel.POSITIVE,
    SentimentLabel.MIXED_FEELINGS,
    SentimentLabel.NEGATIVE,
)


class LangTag(str, Enum):
    EN = "en"
    TA = "ta"
    NA = "na"

    @classmethod
    def parse(cls, s: str) -> "LangTag":
        try:
            return cls(s)
        except ValueError:
            raise ValueError(f"unknown tag {s!r}") from None

    def __str__(self) -> str:
        return self.value


# fixed class order; also the prediction tie-break order
LANG_TAGS: tuple[LangTag, ...] = (LangTag.EN, LangTag.TA, LangTag.NA)


# --------------------------------- records ----------------------------------

@dataclass(frozen=True)
class Utterance:
    id: int
    text: str
    sentiment: SentimentLabel

    def __post_init__(self) -> None:
        if not self.text.strip():
            raise InputFormatError(f"utterance {self.id} has empty text")


@dataclass(frozen=True)
class TaggedUtterance:
    tokens: tuple[str, ...]
    tags: tuple[LangTag, ...]
    sentiment: Optional[SentimentLabel] = None
    id: Optional[int] = None

    def __post_init__(self) -> None:
        # accept lists from callers, store tuples
        object.__setattr__(self, "tokens", tuple(self.tokens))
        object.__setattr__(self, "tags", tuple(LangTag(t) for t in self.tags))
        if len(self.tokens) != len(self.tags):
            raise InputFormatError(
                f"{len(self.tokens)} tokens but {len(self.tags)} tags"
            )
        for tok in self.tokens:
            if not tok or _WS.search(tok):
                raise InputFormatError(f"invalid token {tok!r}: empty or contains whitespace")

    def __len__(self) -> int:
        return len(self.tokens)


@dataclass(frozen=True)
class TaggedCorpus:
    utterances: tuple[TaggedUtterance, ...] = field(default_factory=tuple)

    def __post_init__(self) -> None:
        object.__setattr__(self, "utterances", tuple(self.utterances))
        for i, u in enumerate(self.utterances):
            if len(u) == 0:
                raise InputFormatError(f"utterance {i} has no tokens")

    def __len__(self) -> int:
        return len(self.utterances)

    def __iter__(self) -> Iterator[TaggedUtterance]:
        return iter(self.utterances)

    def __getitem__(self, i: int) -> TaggedUtterance:
        return self.utterances[i]

    @property
    def n_tokens(self) -> int:
        return sum(len(u) for u in self.utterances)

    def tag_counts(self) -> dict[str, int]:
        c = Counter(t.value for u in self.utterances for t in u.tags)
        return {t.value: c.get(t.value, 0) for t in LANG_TAGS}


# ------------------------------ sentiment TSV ------------------------------

def _lines(stream: TextIO) -> Iterator[tuple[int, str]]:
    """(1-based line number, line without its LF/CRLF terminator)."""
    for lineno, raw in enumerate(stream, start=1):
        yield lineno, raw.rstrip("\r\n")


def parse_dataset(stream: TextIO) -> list[Utterance]:
    """
    Read `text<TAB>label` lines into Utterances with ids 0..n-1 in file order.
    Blank lines are skipped; a first data line equal to `text<TAB>category`
    is treated as the header.
    """
    out: list[Utterance] = []
    seen_content = False
    for lineno, line in _lines(stream):
        if not line.strip():
            continue
        fields = line.split("\t")
        if not seen_content:
            seen_content = True
            if [f.strip().lower() for f in fields] == ["text", "category"]:
                continue
        if len(fields) != 2:
            raise InputFormatError(
                f"expected 2 tab-separated fields, got {len(fields)} at line {lineno}"
            )
        text, label = fields[0], fields[1].strip()
        try:
            sentiment = SentimentLabel.parse(label)
        except ValueError:
            raise InputFormatError(f"unknown sentiment label {label!r} at line {lineno}") from None
        if not text.strip():
            raise InputFormatError(f"empty text at line {lineno}")
        out.append(Utterance(id=len(out), text=text, sentiment=sentiment))
    log.debug("parsed %d utterances", len(out))
    return out


def write_dataset(utterances: Iterable[Utterance], sink: TextIO) -> None:
    """Write the TSV layout parse_dataset reads, header included."""
    sink.write("text\tcategory\n")
    for u in utterances:
        sink.write(f"{u.text}\t{u.sentiment.value}\n")


# --------------------------------- CoNLL ---------------------------------

def parse_conll(stream: TextIO) -> TaggedCorpus:
    utterances: list[TaggedUtterance] = []
    tokens: list[str] = []
    tags: list[LangTag] = []
    meta: dict[str, object] = {}

    def flush() -> None:
        nonlocal tokens, tags, meta
        if tokens:
            utterances.append(TaggedUtterance(
                tokens=tuple(tokens), tags=tuple(tags),
                sentiment=meta.get("sentiment"),  # type: ignore[arg-type]
                id=meta.get("id"),  # type: ignore[arg-type]
            ))
        # zero-token blocks (two consecutive blank lines, stray metadata) are dropped
        tokens, tags, meta = [], [], {}

    for lineno, line in _lines(stream):
        if not line.strip():
            flush()
            continue
        if "\t" not in line:
            if line.lstrip().startswith("#"):
                if tokens:
                    raise InputFormatError(f"comment line inside utterance at line {lineno}")
                _read_meta(line, lineno, meta)
                continue
            raise InputFormatError(f"missing tab separator at line {lineno}")
        token, tag = line.split("\t", 1)
        tag = tag.strip()
        if not token or _WS.search(token):
            raise InputFormatError(f"token {token!r} is empty or contains whitespace at line {lineno}")
        try:
            tags.append(LangTag.parse(tag))
        except ValueError:
            raise InputFormatError(f"unknown tag {tag!r} at line {lineno}") from None
        tokens.append(token)
    flush()
    log.debug("parsed %d tagged utterances", len(utterances))
    return TaggedCorpus(tuple(utterances))


def _read_meta(line: str, lineno: int, meta: dict[str, object]) -> None:
    m = _META.match(line.strip())
    if not m:
        return  # plain comment
    key, value = m.group(1).lower(), m.group(2)
    if key == "id":
        try:
            meta["id"] = int(value)
        except ValueError:
            raise InputFormatError(f"non-integer id {value!r} at line {lineno}") from None
    elif key == "sentiment":
        try:
            meta["sentiment"] = SentimentLabel.parse(value)
        except ValueError:
            raise InputFormatError(f"unknown sentiment label {value!r} at line {lineno}") from None


def write_conll(corpus: TaggedCorpus, sink: TextIO) -> None:
    for u in corpus:
        if u.id is not None:
            sink.write(f"# id = {u.id}\n")
        if u.sentiment is not None:
            sink.write(f"# sentiment = {u.sentiment.value}\n")
        for tok, tag in zip(u.tokens, u.tags):
            sink.write(f"{tok}\t{tag.value}\n")
        sink.write("\n")


# --------------------------------- split ---------------------------------

def split_train_validation(
    corpus: TaggedCorpus,
    validation_fraction: float,
    seed: int,
) -> tuple[TaggedCorpus, TaggedCorpus]:
    """
    Utterance-level split: seeded permutation, validation = its suffix of
    round(fraction * n) items. Each part keeps source order.
    """
    if not (0.0 < float(validation_fraction) < 1.0):
        raise ValueError(f"validation fraction must lie in (0, 1), got {validation_fraction}")
    n = len(corpus)
    if n == 0:
        raise InputFormatError("cannot split an empty corpus")
    n_val = int(np.floor(validation_fraction * n + 0.5))
    perm = np.random.default_rng(seed).permutation(n)
    val_idx = np.sort(perm[n - n_val:])
    train_idx = np.sort(perm[: n - n_val])
    train = TaggedCorpus(tuple(corpus[int(i)] for i in train_idx))
    val = TaggedCorpus(tuple(corpus[int(i)] for i in val_idx))
    log.info("split %d utterances -> %d train / %d validation (seed=%d)", n, len(train), len(val), seed)
    return train, val
