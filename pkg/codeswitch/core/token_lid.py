# codeswitch/core/token_lid.py
"""
Token-level language identification for romanized English-Tamil text.

Three layers:
  - rule_tag: tokens without letters (numerals, punctuation, symbols) are `na`
  - a character n-gram multinomial logistic classifier for everything else
  - import_tags: attach externally produced tags (e.g. a fine-tuned
    transformer's output) to the source utterances

Classifier inputs are the kept n-gram counts scaled to unit L2 norm plus a
constant bias feature. Under that scaling the objective's gradient is
Lipschitz with constant <= 1 + l2_penalty, so full-batch gradient descent
is monotone for learning_rate < 2 / (1 + l2_penalty).
"""
from __future__ import annotations

import math
from collections import Counter
from dataclasses import asdict, dataclass, field, replace
from functools import partial
from multiprocessing import Pool
from pathlib import Path
from typing import Optional, Sequence

import numpy as np
import scipy.sparse as sp
from tqdm import tqdm

from codeswitch.config import Config
from codeswitch.core.corpus_io import (
    LANG_TAGS,
    LangTag,
    TaggedCorpus,
    TaggedUtterance,
    Utterance,
)
from codeswitch.errors import AlignmentError, ConvergenceError, DegenerateModelError
from codeswitch.utils.io import read_json, write_json
from codeswitch.utils.log import get_logger, progress_enabled

log = get_logger("lid")

# n-gram boundary markers (control characters, absent from real text)
BOUNDARY_START = "\x02"
BOUNDARY_END = "\x03"

# classes the classifier must see at least once (na is mostly rule-resolved)
REQUIRED_TRAINING_CLASSES: tuple[LangTag, ...] = (LangTag.EN, LangTag.TA)


def max_stable_learning_rate(l2_penalty: float) -> float:
    """Gradient descent on the scaled objective is monotone below this rate."""
    return 2.0 / (1.0 + float(l2_penalty))


# --------------------------------- types ---------------------------------

@dataclass(frozen=True)
class Token:
    surface: str
    position: int

    def __post_init__(self) -> None:
        if not self.surface:
            raise ValueError("token surface must be non-empty")


@dataclass(frozen=True)
class LidConfig:
    ngram_min: int = Config.LID_NGRAM_MIN
    ngram_max: int = Config.LID_NGRAM_MAX
    min_ngram_count: int = Config.LID_MIN_NGRAM_COUNT
    l2_penalty: float = Config.LID_L2_PENALTY
    learning_rate: float = Config.LID_LEARNING_RATE
    epochs: int = Config.LID_EPOCHS
    seed: int = Config.LID_SEED           # reserved: kept for provenance, training draws no random numbers

    def __post_init__(self) -> None:
        if self.ngram_min < 1:
            raise ValueError(f"ngram_min must be >= 1, got {self.ngram_min}")
        if self.ngram_max < self.ngram_min:
            raise ValueError(f"ngram_max ({self.ngram_max}) < ngram_min ({self.ngram_min})")
        if self.min_ngram_count < 1:
            raise ValueError(f"min_ngram_count must be >= 1, got {self.min_ngram_count}")
        if not (self.l2_penalty >= 0.0 and math.isfinite(self.l2_penalty)):
            raise ValueError(f"l2_penalty must be a non-negative number, got {self.l2_penalty}")
        if not (self.learning_rate > 0.0 and math.isfinite(self.learning_rate)):
            raise ValueError(f"learning_rate must be positive, got {self.learning_rate}")
        if self.epochs < 1:
            raise ValueError(f"epochs must be positive, got {self.epochs}")

    @classmethod
    def from_config(cls) -> "LidConfig":
        """Snapshot of the current Config attributes."""
        return cls(
            ngram_min=Config.LID_NGRAM_MIN,
            ngram_max=Config.LID_NGRAM_MAX,
            min_ngram_count=Config.LID_MIN_NGRAM_COUNT,
            l2_penalty=Config.LID_L2_PENALTY,
            learning_rate=Config.LID_LEARNING_RATE,
            epochs=Config.LID_EPOCHS,
            seed=Config.LID_SEED,
        )

    def to_dict(self) -> dict[str, float | int]:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "LidConfig":
        return cls(
            ngram_min=int(d["ngram_min"]),
            ngram_max=int(d["ngram_max"]),
            min_ngram_count=int(d["min_ngram_count"]),
            l2_penalty=float(d["l2_penalty"]),
            learning_rate=float(d["learning_rate"]),
            epochs=int(d["epochs"]),
            seed=int(d["seed"]),
        )


@dataclass(frozen=True, eq=False)
class LidModel:
    feature_index: dict[str, int]
    weights: np.ndarray                  # |classes| x (|features| + 1), bias last
    classes: tuple[LangTag, ...] = LANG_TAGS
    config: LidConfig = field(default_factory=LidConfig)
    loss_history: tuple[float, ...] = field(default=(), repr=False)

    def __post_init__(self) -> None:
        w = np.array(self.weights, dtype=np.float64)
        n_feat = len(self.feature_index)
        if w.shape != (len(self.classes), n_feat + 1):
            raise ValueError(f"weights shape {w.shape} != ({len(self.classes)}, {n_feat + 1})")
        if not np.all(np.isfinite(w)):
            raise ValueError("model weights must be finite")
        if sorted(self.feature_index.values()) != list(range(n_feat)):
            raise ValueError("feature ids must be dense 0..|features|-1")
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "classes", tuple(LangTag(c) for c in self.classes))

    @property
    def n_features(self) -> int:
        return len(self.feature_index)

    def vectorize(self, tokens: Sequence[Token]) -> sp.csr_matrix:
        return _design([extract_features(t, self.config) for t in tokens], self.feature_index)

    def class_scores(self, tokens: Sequence[Token]) -> np.ndarray:
        """Linear class scores, one row per token, columns in `classes` order."""
        if not tokens:
            return np.zeros((0, len(self.classes)))
        return np.asarray(self.vectorize(tokens) @ self.weights.T)

    # ---------- serialization ----------

    def to_dict(self) -> dict:
        return {
            "classes": [c.value for c in self.classes],
            "feature_index": dict(self.feature_index),
            "weights": self.weights.tolist(),
            "config": self.config.to_dict(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "LidModel":
        return cls(
            feature_index={str(k): int(v) for k, v in d["feature_index"].items()},
            weights=np.asarray(d["weights"], dtype=np.float64),
            classes=tuple(LangTag.parse(c) for c in d["classes"]),
            config=LidConfig.from_dict(d["config"]),
        )


@dataclass(frozen=True, eq=False)
class EvalReport:
    confusion: np.ndarray                 # (gold, predicted), LANG_TAGS order
    per_class_precision: dict[str, float]
    per_class_recall: dict[str, float]
    per_class_f1: dict[str, float]
    support: dict[str, int]
    macro_f1: float
    accuracy: float
    labels: tuple[str, ...] = tuple(t.value for t in LANG_TAGS)

    @classmethod
    def from_confusion(cls, confusion: np.ndarray) -> "EvalReport":
        m = np.array(confusion, dtype=np.int64)
        if m.shape != (len(LANG_TAGS), len(LANG_TAGS)):
            raise ValueError(f"confusion matrix must be {len(LANG_TAGS)}x{len(LANG_TAGS)}")
        labels = tuple(t.value for t in LANG_TAGS)
        tp = np.diag(m).astype(float)
        fp = m.sum(axis=0) - tp
        fn = m.sum(axis=1) - tp
        prec, rec, f1 = {}, {}, {}
        for i, lab in enumerate(labels):
            p = tp[i] / (tp[i] + fp[i]) if tp[i] + fp[i] > 0 else 0.0
            r = tp[i] / (tp[i] + fn[i]) if tp[i] + fn[i] > 0 else 0.0
            prec[lab], rec[lab] = float(p), float(r)
            f1[lab] = float(2.0 * p * r / (p + r)) if p + r > 0 else 0.0
        total = int(m.sum())
        m.setflags(write=False)
        return cls(
            confusion=m,
            per_class_precision=prec,
            per_class_recall=rec,
            per_class_f1=f1,
            support={lab: int(m[i].sum()) for i, lab in enumerate(labels)},
            macro_f1=float(np.mean([f1[lab] for lab in labels])),
            accuracy=float(np.trace(m) / total) if total else 0.0,
            labels=labels,
        )

    @property
    def n_tokens(self) -> int:
        return int(self.confusion.sum())

    def to_dict(self) -> dict:
        return {
            "labels": list(self.labels),
            "per_class": {
                lab: {
                    "precision": self.per_class_precision[lab],
                    "recall": self.per_class_recall[lab],
                    "f1": self.per_class_f1[lab],
                    "support": self.support[lab],
                }
                for lab in self.labels
            },
            "macro_f1": self.macro_f1,
            "accuracy": self.accuracy,
            "n_tokens": self.n_tokens,
            "confusion": self.confusion.tolist(),
        }


# ------------------------------ tokens & rules ------------------------------

def tokenize(text: str) -> list[Token]:
    """Split on runs of Unicode whitespace; no case or punctuation normalization."""
    return [Token(s, i) for i, s in enumerate(text.split())]


def rule_tag(token: Token) -> Optional[LangTag]:
    """`na` for surfaces with no letters at all; None defers to the classifier."""
    if any(ch.isalpha() for ch in token.surface):
        return None
    return LangTag.NA


def extract_features(token: Token, config: LidConfig) -> dict[str, int]:
    padded = BOUNDARY_START + token.surface.lower() + BOUNDARY_END
    counts: Counter[str] = Counter()
    for n in range(config.ngram_min, config.ngram_max + 1):
        for i in range(len(padded) - n + 1):
            counts[padded[i:i + n]] += 1
    return dict(counts)


def _design(features: Sequence[dict[str, int]], feature_index: dict[str, int]) -> sp.csr_matrix:
    """Rows: unit-norm kept n-gram counts, then a constant bias column."""
    n_feat = len(feature_index)
    rows: list[int] = []
    cols: list[int] = []
    vals: list[float] = []
    for r, feats in enumerate(features):
        kept = [(feature_index[g], float(c)) for g, c in feats.items() if g in feature_index]
        norm = math.sqrt(sum(c * c for _, c in kept))
        for j, c in kept:
            rows.append(r)
            cols.append(j)
            vals.append(c / norm)
        rows.append(r)
        cols.append(n_feat)
        vals.append(1.0)
    return sp.csr_matrix(
        (np.asarray(vals, dtype=np.float64), (np.asarray(rows, dtype=np.int64), np.asarray(cols, dtype=np.int64))),
        shape=(len(features), n_feat + 1),
    )


# -------------------------------- training --------------------------------

def objective_and_gradient(
    weights: np.ndarray,
    features: sp.csr_matrix,
    labels: np.ndarray,
    l2_penalty: float,
) -> tuple[float, np.ndarray]:
    """
    Mean cross-entropy of softmax(features @ weights.T) against integer labels,
    plus (l2/2) * ||weights||^2 over every column except the last (bias).
    """
    m = features.shape[0]
    scores = np.asarray(features @ weights.T)
    scores = scores - scores.max(axis=1, keepdims=True)
    log_z = np.log(np.exp(scores).sum(axis=1, keepdims=True))
    log_p = scores - log_z
    rows = np.arange(m)
    penalised = weights[:, :-1]
    loss = -float(log_p[rows, labels].mean()) + 0.5 * l2_penalty * float(np.sum(penalised * penalised))

    resid = np.exp(log_p)
    resid[rows, labels] -= 1.0
    grad = np.asarray(features.T @ resid).T / m
    grad[:, :-1] += l2_penalty * penalised
    return loss, grad


def _training_tokens(corpus: TaggedCorpus, config: LidConfig) -> tuple[list[dict[str, int]], np.ndarray]:
    class_id = {c: i for i, c in enumerate(LANG_TAGS)}
    feats: list[dict[str, int]] = []
    labels: list[int] = []
    for u in corpus:
        for pos, (surface, tag) in enumerate(zip(u.tokens, u.tags)):
            tok = Token(surface, pos)
            if rule_tag(tok) is not None:
                continue
            feats.append(extract_features(tok, config))
            labels.append(class_id[tag])
    return feats, np.asarray(labels, dtype=np.int64)


def train(corpus: TaggedCorpus, config: Optional[LidConfig] = None) -> LidModel:
    """Full-batch gradient descent on the L2-penalised multinomial logistic objective."""
    config = config or LidConfig.from_config()
    feats, labels = _training_tokens(corpus, config)
    present = set(labels.tolist())
    for tag in REQUIRED_TRAINING_CLASSES:
        if LANG_TAGS.index(tag) not in present:
            raise DegenerateModelError(f"no classifier training tokens for class '{tag.value}'")

    totals: Counter[str] = Counter()
    for f in feats:
        totals.update(f)
    kept = sorted(g for g, c in totals.items() if c >= config.min_ngram_count)
    feature_index = {g: i for i, g in enumerate(kept)}
    x = _design(feats, feature_index)

    bound = max_stable_learning_rate(config.l2_penalty)
    if config.learning_rate >= bound:
        log.warning("learning rate %.3g >= %.3g; loss may not decrease monotonically",
                    config.learning_rate, bound)

    log.info("training on %d tokens, %d n-gram features (%d dropped below count %d)",
             len(labels), len(kept), len(totals) - len(kept), config.min_ngram_count)

    w = np.zeros((len(LANG_TAGS), len(kept) + 1), dtype=np.float64)
    history: list[float] = []
    for epoch in tqdm(range(config.epochs), desc="[lid] train", disable=not progress_enabled()):
        loss, grad = objective_and_gradient(w, x, labels, config.l2_penalty)
        if not math.isfinite(loss):
            raise ConvergenceError(f"non-finite training loss at epoch {epoch}")
        history.append(loss)
        w = w - config.learning_rate * grad
    loss, _ = objective_and_gradient(w, x, labels, config.l2_penalty)
    if not (math.isfinite(loss) and np.all(np.isfinite(w))):
        raise ConvergenceError("non-finite training loss after the last epoch")
    history.append(loss)

    log.info("loss %.4f -> %.4f over %d epochs", history[0], history[-1], config.epochs)
    return LidModel(feature_index, w, LANG_TAGS, config, loss_history=tuple(history))


# ------------------------------- inference -------------------------------

def predict(model: LidModel, text: str) -> TaggedUtterance:
    """Rule layer first; classifier argmax for the rest (ties go to the earlier class)."""
    tokens = tokenize(text)
    tags: list[Optional[LangTag]] = [rule_tag(t) for t in tokens]
    pending = [t for t, tag in zip(tokens, tags) if tag is None]
    if pending:
        best = np.argmax(model.class_scores(pending), axis=1)
        it = iter(model.classes[int(k)] for k in best)
        tags = [tag if tag is not None else next(it) for tag in tags]
    return TaggedUtterance(tuple(t.surface for t in tokens), tuple(tags))  # type: ignore[arg-type]


def _predict_utterance(model: LidModel, utt: Utterance) -> TaggedUtterance:
    return replace(predict(model, utt.text), sentiment=utt.sentiment, id=utt.id)


def predict_corpus(
    model: LidModel,
    utterances: Sequence[Utterance],
    workers: Optional[int] = None,
) -> TaggedCorpus:
    """Tag every utterance (order kept), carrying sentiment and id across."""
    workers = Config.WORKERS if workers is None else max(1, int(workers))
    job = partial(_predict_utterance, model)
    bar = dict(total=len(utterances), desc="[lid] tag", disable=not progress_enabled())
    if workers > 1 and len(utterances) > 1:
        with Pool(workers) as pool:
            tagged = list(tqdm(pool.imap(job, utterances, chunksize=256), **bar))
    else:
        tagged = [job(u) for u in tqdm(utterances, **bar)]
    return TaggedCorpus(tuple(tagged))


def import_tags(utterances: Sequence[Utterance], tags: TaggedCorpus) -> TaggedCorpus:
    """Attach sentiment labels and ids from `utterances` to externally tagged tokens."""
    if len(utterances) != len(tags):
        raise AlignmentError(
            f"utterance count mismatch: {len(utterances)} utterances vs {len(tags)} tagged"
        )
    merged: list[TaggedUtterance] = []
    for i, (utt, tagged) in enumerate(zip(utterances, tags)):
        if len(tokenize(utt.text)) != len(tagged):
            raise AlignmentError(f"token count mismatch at utterance {i}")
        merged.append(replace(tagged, sentiment=utt.sentiment, id=utt.id))
    return TaggedCorpus(tuple(merged))


# ------------------------------- evaluation -------------------------------

def evaluate(predictions: TaggedCorpus, gold: TaggedCorpus) -> EvalReport:
    if len(predictions) != len(gold):
        raise AlignmentError(
            f"utterance count mismatch: {len(predictions)} predicted vs {len(gold)} gold"
        )
    index = {t: i for i, t in enumerate(LANG_TAGS)}
    confusion = np.zeros((len(LANG_TAGS), len(LANG_TAGS)), dtype=np.int64)
    for i, (p, g) in enumerate(zip(predictions, gold)):
        if p.tokens != g.tokens:
            raise AlignmentError(f"token mismatch at utterance {i}")
        for pt, gt in zip(p.tags, g.tags):
            confusion[index[gt], index[pt]] += 1
    return EvalReport.from_confusion(confusion)


# ------------------------------ persistence ------------------------------

def save_model(model: LidModel, path: str | Path) -> Path:
    return write_json(path, model.to_dict())


def load_model(path: str | Path) -> LidModel:
    return LidModel.from_dict(read_json(path))
