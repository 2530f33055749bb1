# Copyright (c) 2025 Bytedance Ltd. and/or its affiliates
# SPDX-License-Identifier: MIT

import math

import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal

from src.autodiff import Tensor
from src.autodiff.ops import WeightedFusion
from src.errors import (
    ConfigError,
    MissingGradientError,
    ModelTooLargeError,
    ShapeError,
    VocabMismatchError,
)
from src.model import build_model, param_count
from src.training import (
    BOS_ID,
    EOS_ID,
    ComparisonResult,
    OptimizerState,
    RunRecord,
    ScheduleConfig,
    ScheduleForm,
    TaskKind,
    TaskSpec,
    TrainConfig,
    adam_step,
    classical_lr_at,
    clip_grad_norm,
    comparison_configs,
    depth_path_grid,
    grad_check_model,
    grad_group,
    iterate_batches,
    learning_rate,
    lr_at,
    make_batch,
    make_examples,
    read_records,
    run_comparison,
    schedule_preset,
    train,
    write_records,
)
from tests.conftest import tiny_config

BASE = ScheduleConfig(peak_lr=0.001, warmup_steps=8000)


@pytest.mark.parametrize(
    "step, expected",
    [(8000, 0.001), (4000, 0.0005), (32000, 0.0005), (1, 0.001 / 8000)],
)
def test_lr_schedule_values(step, expected):
    """Test the schedule at warmup, half warmup and four times warmup."""
    assert lr_at(step, BASE) == pytest.approx(expected, rel=1e-12)


def test_lr_schedule_rejects_step_zero():
    with pytest.raises(ValueError):
        lr_at(0, BASE)
    with pytest.raises(ValueError):
        classical_lr_at(0, BASE)


def test_lr_peaks_at_warmup():
    """Test no step exceeds the peak learning rate."""
    values = [lr_at(s, BASE) for s in range(1, 20000, 97)]
    assert max(values) <= 0.001 + 1e-15
    assert lr_at(8000, BASE) == 0.001


def test_lr_is_continuous_at_warmup_and_then_decays():
    """Test both branches meet at warmup and the rate strictly falls after it."""
    w = BASE.warmup_steps
    assert lr_at(w, BASE) == BASE.peak_lr
    for step in (w - 1, w + 1):
        assert abs(lr_at(step, BASE) - BASE.peak_lr) < 2 * BASE.peak_lr / w
    after = [lr_at(s, BASE) for s in range(w, w + 5000, 7)]
    assert all(b < a for a, b in zip(after, after[1:]))


def test_classical_schedule_matches_formula():
    s = ScheduleConfig(warmup_steps=4000, d_model=512)
    assert classical_lr_at(4000, s) == pytest.approx(512**-0.5 * 4000**-0.5)


def test_learning_rate_follows_schedule_form():
    """Test the configured form picks the peak or the classical schedule."""
    classical = ScheduleConfig.model_validate(
        {"warmup_steps": 4000, "d_model": 256, "form": "classical"}
    )
    assert classical.form is ScheduleForm.CLASSICAL
    assert learning_rate(100, classical) == classical_lr_at(100, classical)
    assert learning_rate(100, BASE) == lr_at(100, BASE)


def test_schedule_presets():
    """Test the base and deep presets and an unknown name."""
    deep = schedule_preset("deep", d_model=256)
    assert deep.peak_lr == 0.002 and deep.warmup_steps == 16000
    assert deep.d_model == 256
    with pytest.raises(ConfigError):
        schedule_preset("fast")


def _weights(*values):
    return {"w": Tensor(np.array(values, dtype=float), requires_grad=True)}


def test_adam_zero_gradient_leaves_params():
    """Test a zero gradient does not move the parameters."""
    params = _weights(1.0, -2.0)
    st = adam_step(params, {"w": np.zeros(2)}, OptimizerState(), lr=0.1)
    assert_array_equal(params["w"].data, [1.0, -2.0])
    assert st.step == 1


def test_adam_first_step_moves_by_about_lr():
    """Test the first bias-corrected step has size close to lr."""
    params = _weights(1.0, -2.0, 0.5)
    adam_step(params, {"w": np.array([3.0, -0.01, 100.0])}, OptimizerState(), 0.01)
    assert_allclose(params["w"].data, [0.99, -1.99, 0.49], atol=1e-6)


def test_adam_step_is_opposite_to_gradient_sign():
    gen = np.random.default_rng(5)
    params = _weights(*gen.standard_normal(6))
    before = params["w"].data.copy()
    grad = gen.standard_normal(6)
    adam_step(params, {"w": grad}, OptimizerState(), 1e-3)
    assert np.all(np.sign(params["w"].data - before) == -np.sign(grad))


def test_adam_minimizes_a_quadratic():
    """Test Adam drives a quadratic close to its minimum."""
    params = _weights(3.0, -1.5)
    st = OptimizerState()
    for _ in range(2000):
        w = params["w"]
        adam_step(params, {"w": 2 * w.data}, st, 0.01)
    assert np.abs(params["w"].data).max() < 5e-2


def test_adam_reads_tensor_grads_when_none_given():
    params = _weights(1.0)
    params["w"].grad = np.array([1.0])
    adam_step(params, None, OptimizerState(), 0.1)
    assert params["w"].data[0] == pytest.approx(0.9)


def test_adam_errors():
    """Test Adam rejects missing or mismatched gradients."""
    params = _weights(1.0, 2.0)
    with pytest.raises(MissingGradientError):
        adam_step(params, {}, OptimizerState(), 0.1)
    with pytest.raises(MissingGradientError):
        adam_step(params, None, OptimizerState(), 0.1)
    with pytest.raises(ShapeError):
        adam_step(params, {"w": np.zeros(3)}, OptimizerState(), 0.1)
    with pytest.raises(ValueError):
        OptimizerState(beta2=1.0)


def test_clip_grad_norm():
    """Test clipping rescales grads to the global norm limit."""
    params = _weights(0.0, 0.0)
    params["w"].grad = np.array([3.0, 4.0])
    assert clip_grad_norm(params, 1.0) == pytest.approx(5.0)
    assert_allclose(params["w"].grad, [0.6, 0.8])
    with pytest.raises(ValueError):
        clip_grad_norm(params, 0.0)


def test_examples_are_deterministic_and_in_range():
    """Test task examples repeat per seed and keep content ids in range."""
    spec = TaskSpec(kind=TaskKind.REVERSE, vocab=10, samples_per_epoch=50, seed=3)
    a, b = make_examples(spec), make_examples(spec)
    assert a == b
    for ex in a:
        assert 5 <= len(ex.src) <= 10
        assert min(ex.src) >= 3 and max(ex.src) < 10
        assert ex.target == ex.src[::-1]


def test_task_spec_validation():
    with pytest.raises(ValueError):
        TaskSpec(min_len=8, max_len=4)
    with pytest.raises(ValueError):
        TaskSpec(vocab=3)


def test_seq2seq_batch_layout():
    """Test decoder inputs start with BOS and targets end with EOS."""
    spec = TaskSpec(samples_per_epoch=4)
    batch = make_batch(make_examples(spec)[:2], encoder_only=False)
    for src, tgt_in in zip(batch.srcs, batch.tgt_in):
        assert tgt_in == [BOS_ID] + src
    first = len(batch.srcs[0])
    assert batch.tgt_out[first] == EOS_ID
    assert batch.tgt_out.size == sum(len(s) + 1 for s in batch.srcs)


def test_encoder_only_batch_scores_sources():
    spec = TaskSpec(kind=TaskKind.REVERSE, samples_per_epoch=3)
    examples = make_examples(spec)
    batch = make_batch(examples, encoder_only=True)
    assert batch.tgt_in == []
    expected = np.concatenate([ex.src[::-1] for ex in examples])
    assert_array_equal(batch.tgt_out, expected)


def test_batches_reshuffle_each_epoch():
    """Test every epoch visits the examples in a new order."""
    spec = TaskSpec(samples_per_epoch=6, seed=1)
    stream = iterate_batches(spec, batch_size=6)
    first, second = next(stream), next(stream)
    assert sorted(map(tuple, first.srcs)) == sorted(map(tuple, second.srcs))
    assert first.srcs != second.srcs
    with pytest.raises(ValueError):
        next(iterate_batches(spec, batch_size=0))


def test_records_round_trip_and_truncated_tail(tmp_path):
    """Test a truncated last line of the metrics file is ignored."""
    path = tmp_path / "metrics.jsonl"
    records = [
        RunRecord(step=1, loss=2.5, acc=0.1, lr=1e-4, wall_ms=0.0),
        RunRecord(step=2, loss=2.25, acc=0.2, lr=2e-4, wall_ms=0.0),
    ]
    assert write_records(path, records) == 2
    assert read_records(path) == records
    with open(path, "a", encoding="utf-8") as f:
        f.write('{"step": 3, "loss"')
    assert read_records(path) == records


def test_records_reject_corrupt_middle_line(tmp_path):
    """Test a corrupt line inside the metrics file is an error."""
    path = tmp_path / "metrics.jsonl"
    path.write_text('{"step": 1\n{"step": 1, "loss": 1, "acc": 0, "lr": 0}\n')
    with pytest.raises(ValueError):
        read_records(path)


def _copy_task(vocab=8, **kwargs):
    return TaskSpec(vocab=vocab, min_len=2, max_len=4, samples_per_epoch=64, **kwargs)


def test_train_zero_steps_yields_nothing():
    model = build_model(tiny_config())
    before = model.src_embed.data.copy()
    assert list(train(model, _copy_task(), BASE, steps=0, batch=4)) == []
    assert_array_equal(model.src_embed.data, before)


def test_train_checks_vocabulary_eagerly():
    """Test a vocabulary mismatch fails before any step runs."""
    model = build_model(tiny_config(vocab_size=8))
    with pytest.raises(VocabMismatchError):
        train(model, _copy_task(vocab=12), BASE, steps=5, batch=2)


def test_train_emits_records_per_interval():
    """Test one record per interval plus a shorter last one."""
    model = build_model(tiny_config(dec_depth=1))
    sched = ScheduleConfig(peak_lr=0.01, warmup_steps=5)
    records = list(train(model, _copy_task(), sched, 7, 4, log_every=3, timing=False))
    assert [r.step for r in records] == [3, 6, 7]
    assert all(r.wall_ms == 0.0 for r in records)
    assert records[-1].lr == pytest.approx(lr_at(7, sched))


def test_training_is_deterministic():
    """Test two runs with the same seeds give the same records."""
    def run():
        model = build_model(tiny_config(n_paths=2, dec_depth=1))
        sched = ScheduleConfig(peak_lr=0.01, warmup_steps=5)
        records = list(train(model, _copy_task(), sched, 6, 4, 2, timing=False))
        return records, model.src_embed.data.copy()

    (rec_a, w_a), (rec_b, w_b) = run(), run()
    assert rec_a == rec_b
    assert_array_equal(w_a, w_b)


def test_learnable_alpha_moves_and_fixed_alpha_stays():
    """Test only learnable fusion weights change during training."""
    sched = ScheduleConfig(peak_lr=0.01, warmup_steps=2)
    learned = build_model(tiny_config(n_paths=2))
    list(train(learned, _copy_task(), sched, 4, 4, timing=False))
    assert not np.allclose(learned.enc_layers[0].attn.alpha.data, 0.5)

    frozen = build_model(tiny_config(n_paths=2, use_learnable_weights=False))
    start = frozen.enc_layers[0].attn.alpha.data.copy()
    list(train(frozen, _copy_task(), sched, 4, 4, timing=False))
    assert_array_equal(frozen.enc_layers[0].attn.alpha.data, start)


def test_train_with_clipping():
    model = build_model(tiny_config(dec_depth=1))
    stream = train(model, _copy_task(), BASE, 3, 2, clip_norm=0.5, timing=False)
    records = list(stream)
    assert len(records) == 1 and math.isfinite(records[0].loss)


def test_comparison_variants_share_shape():
    variants = comparison_configs(tiny_config(dec_depth=1))
    assert list(variants) == ["one_path", "two_path_plain", "two_path_full"]
    assert variants["one_path"].n_paths == 1
    assert variants["two_path_full"].multipath.use_more_features
    assert len({v.d_model for v in variants.values()}) == 1


def test_depth_path_grid_keeps_path_weight_budget():
    """Test every depth x paths split carries the same path weights."""
    base = tiny_config(n_paths=2, enc_depth=2, dec_depth=1, use_more_features=True)
    grid = depth_path_grid(base)
    assert list(grid) == ["depth4_path1", "depth2_path2", "depth1_path4"]
    assert grid["depth1_path4"].enc_depth == 1
    assert grid["depth1_path4"].n_paths == 4
    budgets = {param_count(cfg).groups["path_weights"] for cfg in grid.values()}
    assert len(budgets) == 1
    assert all(cfg.multipath.use_more_features for cfg in grid.values())
    assert all(cfg.dec_depth == 1 for cfg in grid.values())


def test_small_comparison_run():
    """Test a short comparison writes one row per variant."""
    variants = comparison_configs(tiny_config(dec_depth=1))
    cfg = TrainConfig(steps=2, batch=2, log_every=1)
    result = run_comparison(variants, _copy_task(), BASE, cfg)
    assert [r.variant for r in result.rows] == list(variants)
    text = result.to_csv()
    assert text.splitlines()[0] == "variant,final_loss,final_acc"
    assert ComparisonResult.from_csv(text) == result


def test_grad_group_names():
    assert grad_group("enc.0.attn.path1.w_q") == "attn_paths"
    assert grad_group("enc.2.ffn.path0.b1") == "ffn_paths"
    assert grad_group("enc.0.ffn.pathnorm3.gain") == "pathnorm"
    assert grad_group("enc.0.attn.pre_ln.bias") == "pre_ln"
    assert grad_group("enc.1.attn.alpha") == "alpha"
    assert grad_group("enc.1.ffn.beta") == "beta"
    assert grad_group("enc.final_ln.gain") == "final_ln"
    assert grad_group("dec.0.self_attn.w_v") == "decoder"
    with pytest.raises(ValueError):
        grad_group("something.else")


def test_grad_check_single_path():
    report = grad_check_model(tiny_config(n_paths=1, d_model=4, heads=1, vocab_size=5))
    assert report.passed, report.to_text()
    assert "alpha" in report.groups


def test_grad_check_three_paths_with_new_features():
    """Test whole-model grads with new features enabled."""
    cfg = tiny_config(
        n_paths=3, d_model=4, heads=2, vocab_size=5, use_more_features=True
    )
    report = grad_check_model(cfg)
    assert report.passed, report.to_text()
    assert {"attn_paths", "ffn_paths", "pathnorm", "alpha", "beta"} <= set(
        report.groups
    )


def test_grad_check_seq2seq():
    cfg = tiny_config(n_paths=2, d_model=4, heads=1, vocab_size=5, dec_depth=1)
    report = grad_check_model(cfg)
    assert report.passed, report.to_text()
    assert "decoder" in report.groups


def test_grad_check_flags_corrupted_alpha_gradient(monkeypatch):
    """Test a wrong alpha gradient fails only the alpha group."""
    original = WeightedFusion.backward

    def corrupted(self, grad):
        grads = original(self, grad)
        return (grads[0], grads[1] * 1.1) + grads[2:]

    monkeypatch.setattr(WeightedFusion, "backward", corrupted)
    report = grad_check_model(tiny_config(n_paths=2, d_model=4, heads=1, vocab_size=5))
    assert not report.passed
    assert report.failing_groups() == ["alpha"]


def test_grad_check_refuses_large_models():
    """Test the gradient check refuses models over the size limit."""
    with pytest.raises(ModelTooLargeError):
        grad_check_model(tiny_config(d_model=64, heads=4, vocab_size=64))
    with pytest.raises(ValueError):
        grad_check_model(tiny_config(d_model=4, heads=1, vocab_size=5), tol=0.0)
