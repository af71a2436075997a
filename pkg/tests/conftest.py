# tests/conftest.py
from __future__ import annotations

import sys
from pathlib import Path

PROJECT_ROOT = Path(__file__).resolve().parents[1]
if str(PROJECT_ROOT) not in sys.path:
    sys.path.insert(0, str(PROJECT_ROOT))

import os
from typing import Callable

import pytest

from codeswitch.config import Config
from codeswitch.core.corpus_io import LangTag, SentimentLabel, TaggedCorpus, TaggedUtterance

EN, TA, NA = LangTag.EN, LangTag.TA, LangTag.NA
POS, MIX, NEG = SentimentLabel.POSITIVE, SentimentLabel.MIXED_FEELINGS, SentimentLabel.NEGATIVE

ENGLISH_WORDS = ["the", "movie", "super", "very", "good", "trailer", "waiting", "this", "mass", "love"]
TAMIL_WORDS = ["padam", "semma", "thalaivar", "vera", "level", "oru", "nalla", "irukku", "paaru", "enna"]


@pytest.fixture(autouse=True)
def _quiet_progress(monkeypatch):
    # no tqdm bars inside pytest output
    monkeypatch.setattr(Config, "PROGRESS", False)


@pytest.fixture
def tmp_out(tmp_path) -> Path:
    out = tmp_path / "out"
    out.mkdir()
    return out


@pytest.fixture
def write_file(tmp_path) -> Callable[[str, str], Path]:
    def _write(name: str, text: str) -> Path:
        p = tmp_path / name
        p.write_text(text, encoding="utf-8", newline="")
        return p
    return _write


def toy_corpus(n: int = 40) -> TaggedCorpus:
    """
    Separable annotated corpus: disjoint English and Tamil vocabularies, each
    cycled through in order, plus symbol-only na tokens.
    """
    utterances = []
    e = t = 0
    for i in range(n):
        tokens, tags = [], []
        for k in range(3 + i % 4):
            if (i + k) % 5 == 4:
                tokens.append("!!" if k % 2 else "2")
                tags.append(NA)
            elif (i + 2 * k) % 3 == 0:
                tokens.append(ENGLISH_WORDS[e % len(ENGLISH_WORDS)])
                tags.append(EN)
                e += 1
            else:
                tokens.append(TAMIL_WORDS[t % len(TAMIL_WORDS)])
                tags.append(TA)
                t += 1
        utterances.append(TaggedUtterance(tuple(tokens), tuple(tags)))
    return TaggedCorpus(tuple(utterances))


@pytest.fixture
def toy_gold() -> TaggedCorpus:
    return toy_corpus()


@pytest.fixture
def toy_gold_conll(toy_gold, tmp_path) -> Path:
    from codeswitch.core.corpus_io import write_conll
    p = tmp_path / "gold.conll"
    with open(p, "w", encoding="utf-8", newline="\n") as f:
        write_conll(toy_gold, f)
    return p


DATASET_ROWS = [
    ("the padam semma mass", "Positive"),
    ("vera level trailer 2", "Positive"),
    ("oru nalla movie", "Positive"),
    ("super love this", "Positive"),
    ("thalaivar padam irukku", "Positive"),
    ("enna paaru very good", "Mixed_feelings"),
    ("the movie oru", "Mixed_feelings"),
    ("semma waiting !! vera level", "Mixed_feelings"),
    ("padam nalla irukku", "Negative"),
    ("waiting enna paaru", "Negative"),
    ("this oru padam", "Negative"),
    ("trailer semma", "Negative"),
    ("சூப்பர் padam", "Positive"),
    ("நல்ல படம்", "Negative"),
    ("who is this hero", "not-Tamil"),
    ("enna idhu", "unknown_state"),
]


@pytest.fixture
def dataset_tsv(write_file) -> Path:
    body = "text\tcategory\n" + "".join(f"{t}\t{s}\n" for t, s in DATASET_ROWS)
    return write_file("dataset.tsv", body)


@pytest.fixture
def corpus_tsv() -> Path:
    """The real sentiment corpus, when provided through CS_CORPUS_TSV."""
    p = os.environ.get("CS_CORPUS_TSV")
    if not p or not Path(p).is_file():
        pytest.skip("CS_CORPUS_TSV not set")
    return Path(p)
