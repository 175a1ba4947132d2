import numpy as np
import pytest

from sdpforge.conllu import parse_conllu_file
from sdpforge.silver import mark_instance
from sdpforge.synthtask import make_task
from sdpforge.trainer import (
    DomainData,
    EmptyCorpus,
    LabelOutOfRange,
    MarkerMissing,
    TrainConfig,
    batch_logits,
    build_vocab,
    encode_instances,
    evaluate,
    forward,
    init_model,
    loss_and_grads,
    macro_scores,
    replace_head,
    run_protocol,
    softmax,
    train_phase,
)

CFG = TrainConfig(d=8, h=8, lr_pretrain=0.01, lr_finetune=0.02, epochs=10)


def _marked(tokens, e1, e2, label="r"):
    return mark_instance(tokens, e1, e2, label)


def _tiny_model(k=3, seed=0, corpus=None, config=CFG):
    corpus = corpus or [["alpha", "beta", "gamma", "delta"], ["alpha", "epsilon"]]
    return init_model(config, k, corpus, seed=seed)


# ---------------------------------------------------------------------------
# config and vocab

def test_config_defaults_match_published_recipe():
    config = TrainConfig()
    assert config.lr_pretrain == 1e-5
    assert config.lr_finetune == 2e-5
    assert config.batch_size == 12
    assert config.seeds == (4012, 5096, 8878, 8857, 9908)


def test_config_rejects_bad_values():
    with pytest.raises(ValueError):
        TrainConfig(lr_pretrain=0.0)
    with pytest.raises(ValueError):
        TrainConfig(batch_size=0)
    with pytest.raises(ValueError):
        TrainConfig(seeds=())


def test_vocab_counts_distinct_forms(fixtures):
    (sentence,) = parse_conllu_file(fixtures / "lfp_generalization.conllu").sentences
    tokens = [t.form for t in sentence.tokens]
    vocab = build_vocab([tokens])
    # oracle: distinct surface forms, plus unknown plus the four markers
    assert len(vocab) == len(set(tokens)) + 5


def test_vocab_empty_corpus():
    with pytest.raises(EmptyCorpus):
        build_vocab([[]])


def test_vocab_cap_and_frequency_order():
    corpus = [["a"] * 5 + ["b"] * 3 + ["c"]]
    vocab = build_vocab(corpus, cap=7)
    assert set(vocab) == {"<unk>", "<e1>", "</e1>", "<e2>", "</e2>", "a", "b"}
    assert vocab["a"] < vocab["b"]


# ---------------------------------------------------------------------------
# init / replace_head

def test_init_deterministic_per_seed():
    a = _tiny_model(seed=4012)
    b = _tiny_model(seed=4012)
    c = _tiny_model(seed=5096)
    assert np.array_equal(a.E, b.E) and np.array_equal(a.W_head, b.W_head)
    assert not np.array_equal(a.E, c.E)


def test_head_shape_arithmetic():
    config = TrainConfig(d=4, h=4, lr_pretrain=0.01, lr_finetune=0.01)
    corpus = [[f"w{i}" for i in range(10)]]
    params = init_model(config, 2, corpus, seed=1)
    assert params.W_head.shape == (2, 8)
    assert params.E.shape == (10 + 5, 4)


def test_replace_head_preserves_encoder():
    params = _tiny_model(k=5, seed=3)
    digest = params.encoder_digest()
    swapped = replace_head(params, 18, seed=3)
    assert swapped.encoder_digest() == digest
    assert swapped.W_head.shape == (18, 2 * CFG.h)
    same_k = replace_head(params, 5, seed=3)
    assert same_k.encoder_digest() == digest
    assert not np.array_equal(same_k.W_head, params.W_head)


# ---------------------------------------------------------------------------
# forward

def test_zero_weights_zero_logits():
    params = _tiny_model(k=3)
    params.E[...] = 0.0
    params.W_enc[...] = 0.0
    params.W_head[...] = 0.0
    instance = _marked(["alpha", "beta", "gamma"], (0, 1), (2, 3))
    assert np.allclose(forward(params, instance), 0.0)


def test_forward_reads_only_marker_windows():
    params = _tiny_model(k=3, corpus=[["a", "b", "c", "d", "e", "f"]])
    base = _marked(["a", "b", "c", "d", "e", "f"], (1, 2), (3, 4))
    # swap tokens outside the start markers and their right neighbours
    swapped = _marked(["f", "b", "c", "d", "e", "a"], (1, 2), (3, 4))
    assert np.allclose(forward(params, base), forward(params, swapped))
    # changing an argument's first token does change the logits
    changed = _marked(["a", "e", "c", "d", "e", "f"], (1, 2), (3, 4))
    assert not np.allclose(forward(params, base), forward(params, changed))


def test_forward_matches_batched_fast_path():
    params = _tiny_model(k=4, corpus=[[f"w{i}" for i in range(20)]])
    rng = np.random.default_rng(0)
    instances = []
    for _ in range(20):
        tokens = [f"w{int(rng.integers(20))}" for _ in range(8)]
        instances.append({"tokens": tokens, "e1": [1, 2], "e2": [5, 6], "label": "x"})
    data = encode_instances(params, instances, ["x"])
    fast = batch_logits(params, data.cols)
    for i, obj in enumerate(instances):
        single = forward(params, _marked(obj["tokens"], (1, 2), (5, 6), "x"))
        assert np.allclose(single, fast[i])


def test_forward_marker_missing():
    params = _tiny_model()
    from sdpforge.silver import MarkedInstance

    broken = MarkedInstance(tokens=("a", "b", "c"), e1_start_pos=0, e2_start_pos=1, label="r")
    with pytest.raises(MarkerMissing):
        forward(params, broken)


def test_softmax_sums_to_one():
    rng = np.random.default_rng(1)
    logits = rng.normal(scale=50, size=(40, 7))
    probs = softmax(logits)
    assert np.all(np.abs(probs.sum(axis=1) - 1.0) < 1e-9)
    assert np.all(probs >= 0)


# ---------------------------------------------------------------------------
# gradients

def _random_batch(params, rng, n=6):
    v = params.E.shape[0]
    cols = rng.integers(0, v, size=(n, 4))
    k = params.W_head.shape[0]
    y = rng.integers(0, k, size=n)
    return cols, y


def test_gradient_check_quick():
    params = _tiny_model(k=3, corpus=[[f"w{i}" for i in range(12)]])
    rng = np.random.default_rng(17)
    cols, y = _random_batch(params, rng)
    _, grads = loss_and_grads(params, cols, y)
    step = 1e-6
    checked = 0
    for name in ("W_enc", "b_enc", "W_head", "b_head", "E"):
        arr = getattr(params, name)
        for _ in range(8):
            idx = tuple(int(rng.integers(s)) for s in arr.shape)
            if name == "E" and idx[0] not in set(cols.ravel().tolist()):
                continue  # untouched rows have exactly zero gradient
            original = arr[idx]
            arr[idx] = original + step
            up = _loss(params, cols, y)
            arr[idx] = original - step
            down = _loss(params, cols, y)
            arr[idx] = original
            numeric = (up - down) / (2 * step)
            analytic = grads[name][idx]
            denominator = max(abs(numeric), abs(analytic), 1e-8)
            assert abs(numeric - analytic) / denominator < 1e-4
            checked += 1
    assert checked >= 20


def _loss(params, cols, y):
    from sdpforge.trainer import batch_loss

    return batch_loss(params, cols, y)


def test_untouched_embedding_rows_have_zero_grad():
    params = _tiny_model(k=3, corpus=[[f"w{i}" for i in range(12)]])
    rng = np.random.default_rng(2)
    cols, y = _random_batch(params, rng)
    _, grads = loss_and_grads(params, cols, y)
    touched = set(cols.ravel().tolist())
    for row in range(params.E.shape[0]):
        if row not in touched:
            assert np.all(grads["E"][row] == 0.0)


# ---------------------------------------------------------------------------
# training

def _dataset(params, instances, labels):
    return encode_instances(params, instances, labels)


def test_single_instance_memorization():
    params = _tiny_model(k=2, corpus=[["foo", "bar", "baz", "qux"]])
    instance = {"tokens": ["foo", "bar", "baz", "qux"], "e1": [0, 1], "e2": [2, 3], "label": "a"}
    data = _dataset(params, [instance], ["a", "b"])
    config = TrainConfig(d=8, h=8, lr_pretrain=0.05, lr_finetune=0.05, epochs=200, batch_size=1)
    trained, history = train_phase(params, data, 0.05, config, seed=1)
    assert history.losses[-1] < 1e-3


def test_linearly_separable_set_reaches_perfect_f1():
    task = make_task(task_seed=3, groups=2, tokens_per_group=6, sem_classes=2, syn_labels=("nsubj", "obj"))
    instances = task.sample_gold(60, seed=5)
    labels = sorted({o["label"] for o in instances})
    params = init_model(CFG, len(labels), [o["tokens"] for o in instances], seed=2)
    data = _dataset(params, instances, labels)
    config = TrainConfig(d=8, h=8, lr_pretrain=0.05, lr_finetune=0.05, epochs=60)
    trained, _ = train_phase(params, data, 0.05, config, seed=2)
    assert evaluate(trained, data, exclude=()).macro_f1 == 1.0


def test_loss_decreases_over_epochs():
    task = make_task(task_seed=4)
    instances = task.sample_silver(300, seed=9)
    labels = sorted({o["label"] for o in instances})
    params = init_model(CFG, len(labels), [o["tokens"] for o in instances], seed=3)
    data = _dataset(params, instances, labels)
    _, history = train_phase(params, data, 0.01, CFG, seed=3)
    assert history.losses[0] > history.losses[4]


def test_empty_dataset_noop():
    params = _tiny_model(k=2)
    data = encode_instances(params, [], ["a", "b"])
    trained, history = train_phase(params, data, 0.01, CFG, seed=1)
    assert trained is params and history.losses == []


def test_label_out_of_range():
    params = _tiny_model(k=2)
    instance = {"tokens": ["alpha", "beta"], "e1": [0, 1], "e2": [1, 2], "label": "c"}
    data = encode_instances(params, [instance], ["a", "b", "c"])
    with pytest.raises(LabelOutOfRange):
        train_phase(params, data, 0.01, CFG, seed=1)


def test_dev_selection_keeps_best_epoch():
    task = make_task(task_seed=6)
    train = task.sample_silver(200, seed=1)
    dev = task.sample_silver(80, seed=2)
    labels = sorted({o["label"] for o in train + dev})
    params = init_model(CFG, len(labels), [o["tokens"] for o in train], seed=4)
    config = TrainConfig(d=8, h=8, lr_pretrain=0.02, lr_finetune=0.02, epochs=12, patience=3)
    trained, history = train_phase(
        params, _dataset(params, train, labels), 0.02, config, seed=4, dev=_dataset(params, dev, labels)
    )
    best = max(history.dev_scores)
    assert history.best_epoch == history.dev_scores.index(best)
    assert evaluate(trained, _dataset(params, dev, labels), exclude=()).macro_f1 == pytest.approx(best)


# ---------------------------------------------------------------------------
# metrics

def test_macro_perfect_predictions():
    y = np.array([0, 1, 2, 0])
    assert macro_scores(y, y.copy(), ["a", "b", "c"], exclude=()).macro_f1 == 1.0


def test_macro_two_class_mean():
    # class a: perfect (f1=1.0); class b: one of two found, no false positives
    y_true = np.array([0, 0, 1, 1])
    y_pred = np.array([0, 0, 1, 0])
    result = macro_scores(y_true, y_pred, ["a", "b"], exclude=())
    assert result.per_class["b"]["f1"] == pytest.approx(2 / 3)
    expected = (result.per_class["a"]["f1"] + result.per_class["b"]["f1"]) / 2
    assert result.macro_f1 == pytest.approx(expected)


def test_macro_half_and_full_average():
    # construct per-class f1 of exactly 1.0 and 0.5: b has one tp, one fn, one fp
    y_true = np.array([0, 0, 1, 1, 2])
    y_pred = np.array([0, 0, 1, 2, 1])
    result = macro_scores(y_true, y_pred, ["a", "b", "c"], exclude=("c",))
    assert result.per_class["a"]["f1"] == 1.0
    assert result.per_class["b"]["f1"] == pytest.approx(0.5)
    assert result.macro_f1 == pytest.approx(0.75)


def test_all_no_relation_predictions_scores_zero():
    y_true = np.array([0, 1, 2])
    y_pred = np.array([2, 2, 2])  # index 2 = no-relation
    result = macro_scores(y_true, y_pred, ["a", "b", "no-relation"])
    assert result.macro_f1 == 0.0


def test_evaluate_permutation_invariant():
    params = _tiny_model(k=3, corpus=[[f"w{i}" for i in range(10)]])
    rng = np.random.default_rng(6)
    instances = [
        {"tokens": [f"w{int(rng.integers(10))}" for _ in range(6)], "e1": [0, 1], "e2": [3, 4], "label": l}
        for l in ["a", "b", "c"] * 7
    ]
    data = encode_instances(params, instances, ["a", "b", "c"])
    shuffled = data.subset(np.random.default_rng(1).permutation(data.n))
    assert evaluate(params, data, ()).macro_f1 == evaluate(params, shuffled, ()).macro_f1


# ---------------------------------------------------------------------------
# protocol

def _protocol_inputs(pretrain_n=150, train_n=16, test_n=60):
    task = make_task(task_seed=11)
    pretrain = task.sample_silver(pretrain_n, seed=21)
    finetune = {
        "synthetic": DomainData(
            train=task.sample_gold(train_n, seed=22),
            dev=[],
            test=task.sample_gold(test_n, seed=23),
        )
    }
    return pretrain, finetune


def test_protocol_deterministic():
    pretrain, finetune = _protocol_inputs()
    config = TrainConfig(d=8, h=8, lr_pretrain=0.01, lr_finetune=0.02, epochs=4, seeds=(4012, 5096))
    a = run_protocol(pretrain, finetune, config)
    b = run_protocol(pretrain, finetune, config)
    assert a.to_json() == b.to_json()


def test_baseline_equals_empty_pretrain():
    _, finetune = _protocol_inputs()
    config = TrainConfig(d=8, h=8, lr_pretrain=0.01, lr_finetune=0.02, epochs=4, seeds=(4012,))
    with_flag = run_protocol([], finetune, config, baseline=True).to_dict()
    without = run_protocol([], finetune, config, baseline=False).to_dict()
    with_flag.pop("baseline")
    without.pop("baseline")
    assert with_flag == without


def test_baseline_has_no_pretrain_curve():
    pretrain, finetune = _protocol_inputs()
    config = TrainConfig(d=8, h=8, lr_pretrain=0.01, lr_finetune=0.02, epochs=3, seeds=(4012,))
    report = run_protocol(pretrain, finetune, config, baseline=True)
    assert report.loss_curves["pretrain"] == {}
    trained = run_protocol(pretrain, finetune, config, baseline=False)
    assert trained.loss_curves["pretrain"]["4012"]


def test_report_mean_matches_cells():
    pretrain, finetune = _protocol_inputs()
    config = TrainConfig(d=8, h=8, lr_pretrain=0.01, lr_finetune=0.02, epochs=3, seeds=(4012, 5096, 8878))
    report = run_protocol(pretrain, finetune, config)
    (row,) = report.summary
    values = [c["macro_f1"] for c in report.cells]
    assert row["mean_macro_f1"] == pytest.approx(float(np.mean(values)))
    assert row["min_macro_f1"] <= row["mean_macro_f1"] <= row["max_macro_f1"]
    assert len(report.cells) == 3


def test_report_schema_valid():
    import json

    import jsonschema

    from importlib import resources

    pretrain, finetune = _protocol_inputs()
    config = TrainConfig(d=8, h=8, lr_pretrain=0.01, lr_finetune=0.02, epochs=2, seeds=(4012,))
    report = run_protocol(pretrain, finetune, config)
    schema = json.loads(
        resources.files("sdpforge").joinpath("schemas/train_report.schema.json").read_text()
    )
    jsonschema.validate(json.loads(report.to_json()), schema)
