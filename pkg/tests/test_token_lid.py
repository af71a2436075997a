# tests/test_token_lid.py
from __future__ import annotations

import logging

import numpy as np
import pytest

from codeswitch.core.corpus_io import TaggedCorpus, TaggedUtterance, Utterance
from codeswitch.core.token_lid import (
    BOUNDARY_END,
    BOUNDARY_START,
    EvalReport,
    LidConfig,
    LidModel,
    Token,
    _design,
    evaluate,
    extract_features,
    import_tags,
    load_model,
    max_stable_learning_rate,
    objective_and_gradient,
    predict,
    predict_corpus,
    rule_tag,
    save_model,
    tokenize,
    train,
)
from codeswitch.errors import AlignmentError, ConvergenceError, DegenerateModelError

from conftest import EN, NA, NEG, POS, TA, toy_corpus

# converges comfortably on the toy corpus
TOY = LidConfig(min_ngram_count=1, learning_rate=1.5, epochs=300, l2_penalty=1e-4, seed=13)


@pytest.fixture(scope="module")
def toy_model():
    return train(toy_corpus(), TOY)


class TestTokensAndRules:
    def test_tokenize_unicode_whitespace(self):
        toks = tokenize("  the padam\tsemma\n!! ")
        assert [t.surface for t in toks] == ["the", "padam", "semma", "!!"]
        assert [t.position for t in toks] == [0, 1, 2, 3]

    def test_tokenize_keeps_case_and_punctuation(self):
        assert [t.surface for t in tokenize("Super!! Padam")] == ["Super!!", "Padam"]

    @pytest.mark.parametrize("surface", ["123", "!!!", "...", "2.0", "\U0001F525", "#"])
    def test_rule_tags_letterless_tokens_na(self, surface):
        assert rule_tag(Token(surface, 0)) is NA

    @pytest.mark.parametrize("surface", ["padam", "the", "2day", "a!", "சூப்பர்"])
    def test_rule_defers_tokens_with_letters(self, surface):
        assert rule_tag(Token(surface, 0)) is None

    def test_token_needs_surface(self):
        with pytest.raises(ValueError):
            Token("", 0)


class TestFeatures:
    def test_boundary_markers_and_counts(self):
        cfg = LidConfig(ngram_min=1, ngram_max=2)
        feats = extract_features(Token("Aa", 0), cfg)
        s, e = BOUNDARY_START, BOUNDARY_END
        assert feats == {s: 1, "a": 2, e: 1, s + "a": 1, "aa": 1, "a" + e: 1}

    def test_feature_total_matches_window_count(self):
        cfg = LidConfig(ngram_min=1, ngram_max=4)
        feats = extract_features(Token("semma", 0), cfg)
        padded = len("semma") + 2
        assert sum(feats.values()) == sum(padded - n + 1 for n in range(1, 5))

    def test_design_rows_are_unit_norm_plus_bias(self):
        index = {"a": 0, "b": 1}
        x = _design([{"a": 3, "b": 4}, {"zz": 2}], index).toarray()
        np.testing.assert_allclose(x, [[0.6, 0.8, 1.0], [0.0, 0.0, 1.0]])

    def test_config_validation(self):
        with pytest.raises(ValueError):
            LidConfig(ngram_min=3, ngram_max=2)
        with pytest.raises(ValueError):
            LidConfig(learning_rate=0.0)
        with pytest.raises(ValueError):
            LidConfig(epochs=0)


class TestObjective:
    def test_gradient_matches_central_differences(self):
        rng = np.random.default_rng(5)
        feats = [{"a": 1, "b": 2}, {"b": 1, "c": 3}, {"a": 2, "c": 1}, {"d": 1}, {"a": 1, "d": 2}]
        index = {"a": 0, "b": 1, "c": 2, "d": 3}
        x = _design(feats, index)
        y = np.array([0, 1, 2, 0, 1])
        w = rng.normal(scale=0.5, size=(3, 5))
        l2 = 0.1
        _, grad = objective_and_gradient(w, x, y, l2)

        h = 1e-6
        for _ in range(5):
            i, j = rng.integers(3), rng.integers(5)
            wp, wm = w.copy(), w.copy()
            wp[i, j] += h
            wm[i, j] -= h
            numeric = (objective_and_gradient(wp, x, y, l2)[0] - objective_and_gradient(wm, x, y, l2)[0]) / (2 * h)
            np.testing.assert_allclose(grad[i, j], numeric, rtol=1e-5, atol=1e-9)

    def test_bias_column_not_penalised(self):
        x = _design([{"a": 1}], {"a": 0})
        y = np.array([0])
        w = np.zeros((3, 2))
        w[:, 1] = [5.0, 5.0, 5.0]
        loss, grad = objective_and_gradient(w, x, y, l2_penalty=1.0)
        assert loss == pytest.approx(np.log(3.0))
        np.testing.assert_allclose(grad[:, 1], [-2.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0])

    def test_zero_weights_loss_is_log_k(self):
        x = _design([{"a": 1}, {"b": 1}], {"a": 0, "b": 1})
        loss, _ = objective_and_gradient(np.zeros((3, 3)), x, np.array([0, 1]), 1e-4)
        assert loss == pytest.approx(np.log(3.0))


class TestTraining:
    def test_toy_training_accuracy_is_one(self, toy_model, toy_gold):
        predicted = TaggedCorpus(tuple(predict(toy_model, " ".join(u.tokens)) for u in toy_gold))
        report = evaluate(predicted, toy_gold)
        assert report.accuracy == 1.0

    def test_toy_prediction(self, toy_model):
        tagged = predict(toy_model, "the oru")
        assert tagged.tokens == ("the", "oru")
        assert tagged.tags == (EN, TA)

    def test_rule_layer_applies_before_classifier(self, toy_model):
        assert predict(toy_model, "!!! padam 2021").tags == (NA, TA, NA)

    def test_empty_text_gives_empty_utterance(self, toy_model):
        assert len(predict(toy_model, "   ")) == 0

    def test_loss_decreases_monotonically(self, toy_model):
        hist = np.asarray(toy_model.loss_history)
        assert len(hist) == TOY.epochs + 1
        assert np.all(np.diff(hist) <= 1e-12)
        assert hist[-1] < hist[0]

    def test_unseen_ngrams_ignored(self, toy_model):
        # only the two boundary unigrams of this surface are indexed
        scores = toy_model.class_scores([Token("\u014b\u0292\u014b\u0292", 0)])
        w = toy_model.weights
        start = toy_model.feature_index[BOUNDARY_START]
        end = toy_model.feature_index[BOUNDARY_END]
        expected = w[:, -1] + (w[:, start] + w[:, end]) / np.sqrt(2.0)
        np.testing.assert_allclose(scores[0], expected, rtol=1e-12, atol=1e-12)

    def test_identical_runs_serialize_identically(self, toy_gold, tmp_path):
        a = save_model(train(toy_gold, TOY), tmp_path / "a.json")
        b = save_model(train(toy_gold, TOY), tmp_path / "b.json")
        assert a.read_bytes() == b.read_bytes()

    def test_seed_does_not_change_weights(self, toy_gold, toy_model):
        other = train(toy_gold, LidConfig(min_ngram_count=1, learning_rate=1.5, epochs=300,
                                          l2_penalty=1e-4, seed=99))
        np.testing.assert_array_equal(other.weights, toy_model.weights)
        assert other.config.seed == 99

    def test_save_load_predicts_the_same(self, toy_model, toy_gold, tmp_path):
        back = load_model(save_model(toy_model, tmp_path / "m.json"))
        assert isinstance(back, LidModel)
        assert back.config == toy_model.config
        np.testing.assert_array_equal(back.weights, toy_model.weights)
        for u in toy_gold:
            text = " ".join(u.tokens)
            assert predict(back, text) == predict(toy_model, text)

    def test_missing_class_named(self):
        only_en = TaggedCorpus((TaggedUtterance(("the", "movie"), (EN, EN)),))
        with pytest.raises(DegenerateModelError, match="'ta'"):
            train(only_en, TOY)

    def test_na_may_be_absent_from_classifier_tokens(self):
        corpus = TaggedCorpus((TaggedUtterance(("the", "padam", "!!"), (EN, TA, NA)),))
        model = train(corpus, LidConfig(min_ngram_count=1, epochs=5))
        assert model.weights.shape[0] == 3

    def test_divergence_raises(self, toy_gold):
        with pytest.raises(ConvergenceError):
            train(toy_gold, LidConfig(min_ngram_count=1, learning_rate=1e308, epochs=5))

    def test_warns_above_stable_rate(self, toy_gold, caplog):
        rate = max_stable_learning_rate(1e-4) * 1.01
        with caplog.at_level(logging.WARNING, logger="codeswitch.lid"):
            train(toy_gold, LidConfig(min_ngram_count=1, learning_rate=rate, epochs=2, l2_penalty=1e-4))
        assert any("learning rate" in r.getMessage() for r in caplog.records)

    def test_predict_corpus_carries_labels(self, toy_model):
        utts = [Utterance(3, "the padam", POS), Utterance(9, "oru movie !!", NEG)]
        tagged = predict_corpus(toy_model, utts, workers=1)
        assert [(u.id, u.sentiment) for u in tagged] == [(3, POS), (9, NEG)]
        assert tagged[1].tags == (TA, EN, NA)

    def test_predict_corpus_pool_matches_serial(self, toy_model):
        utts = [Utterance(i, t, POS) for i, t in enumerate(["the oru", "padam super", "!! vera"] * 4)]
        assert predict_corpus(toy_model, utts, workers=2) == predict_corpus(toy_model, utts, workers=1)


class TestImportTags:
    def test_attaches_sentiment_and_id(self):
        utts = [Utterance(0, "the padam", POS), Utterance(1, "oru", NEG)]
        tags = TaggedCorpus((TaggedUtterance(("the", "padam"), (EN, TA)), TaggedUtterance(("oru",), (TA,))))
        merged = import_tags(utts, tags)
        assert [(u.id, u.sentiment) for u in merged] == [(0, POS), (1, NEG)]
        assert merged[0].tags == (EN, TA)

    def test_token_count_mismatch_names_utterance(self):
        utts = [Utterance(0, "a b", POS), Utterance(1, "c d e", POS)]
        tags = TaggedCorpus((TaggedUtterance(("a", "b"), (EN, EN)), TaggedUtterance(("c", "d"), (EN, EN))))
        with pytest.raises(AlignmentError, match="utterance 1"):
            import_tags(utts, tags)

    def test_utterance_count_mismatch(self):
        with pytest.raises(AlignmentError):
            import_tags([Utterance(0, "a", POS)], TaggedCorpus(()))


class TestEvaluation:
    # gold rows x predicted columns, en/ta/na
    VALIDATION_CONFUSION = np.array([
        [1048, 20, 40],
        [55, 66, 0],
        [38, 0, 1017],
    ])

    def test_validation_table_metrics(self):
        r = EvalReport.from_confusion(self.VALIDATION_CONFUSION)
        assert r.per_class_f1["en"] == pytest.approx(0.932, abs=5e-4)
        assert r.per_class_f1["ta"] == pytest.approx(0.638, abs=5e-4)
        assert r.per_class_f1["na"] == pytest.approx(0.963, abs=5e-4)
        assert r.macro_f1 == pytest.approx(0.844, abs=5e-4)
        assert r.accuracy == pytest.approx(0.933, abs=5e-4)
        assert r.support == {"en": 1108, "ta": 121, "na": 1055}
        assert r.n_tokens == 2284

    def test_perfect_predictions(self, toy_gold):
        r = evaluate(toy_gold, toy_gold)
        assert r.accuracy == 1.0 and r.macro_f1 == 1.0

    def test_absent_class_scores_zero(self):
        gold = TaggedCorpus((TaggedUtterance(("a", "b"), (EN, EN)),))
        r = evaluate(gold, gold)
        assert r.per_class_f1["ta"] == 0.0
        assert r.macro_f1 == pytest.approx(1 / 3)

    def test_hand_counted_fixture(self):
        gold = TaggedCorpus((TaggedUtterance(("a", "b", "c", "d"), (EN, TA, TA, NA)),))
        pred = TaggedCorpus((TaggedUtterance(("a", "b", "c", "d"), (EN, EN, TA, NA)),))
        r = evaluate(pred, gold)
        np.testing.assert_array_equal(r.confusion, [[1, 0, 0], [1, 1, 0], [0, 0, 1]])
        assert r.per_class_precision["en"] == 0.5
        assert r.per_class_recall["ta"] == 0.5
        assert r.accuracy == 0.75

    def test_permutation_invariance(self):
        rng = np.random.default_rng(11)
        tags = [EN, TA, NA]
        utts_g, utts_p = [], []
        for i in range(30):
            n = int(rng.integers(1, 6))
            toks = tuple(f"t{i}_{k}" for k in range(n))
            utts_g.append(TaggedUtterance(toks, tuple(tags[j] for j in rng.integers(3, size=n))))
            utts_p.append(TaggedUtterance(toks, tuple(tags[j] for j in rng.integers(3, size=n))))
        order = rng.permutation(30)
        a = evaluate(TaggedCorpus(tuple(utts_p)), TaggedCorpus(tuple(utts_g)))
        b = evaluate(TaggedCorpus(tuple(utts_p[i] for i in order)), TaggedCorpus(tuple(utts_g[i] for i in order)))
        np.testing.assert_array_equal(a.confusion, b.confusion)
        assert a.macro_f1 == b.macro_f1

    def test_token_mismatch_raises(self):
        gold = TaggedCorpus((TaggedUtterance(("a",), (EN,)),))
        pred = TaggedCorpus((TaggedUtterance(("b",), (EN,)),))
        with pytest.raises(AlignmentError):
            evaluate(pred, gold)

    def test_report_dict_fields(self):
        d = EvalReport.from_confusion(self.VALIDATION_CONFUSION).to_dict()
        assert set(d) == {"labels", "per_class", "macro_f1", "accuracy", "n_tokens", "confusion"}
        assert set(d["per_class"]["ta"]) == {"precision", "recall", "f1", "support"}
