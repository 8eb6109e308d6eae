# SPDX-License-Identifier: Apache-2.0
"""Smoke tests for the python module: every bound operation gets exercised
once with small inputs; numerics depth is covered by the C++ suites."""

import math

import pytest

import pysclm as sc

TINY_CFG = """
[model]
deepnorm = 1

[decoder]
layers = 1
d = 16
heads = 2
n_max = 48
dropout = 0.0

[encoder.text]
layers = 1
d = 12
heads = 2
max_span = 8
dropout = 0.0

[sampler]
ratio = 0.25
min_len = 2
max_len = 4

[schedule]
peak_lr = 1e-3
warmup = 2
total_steps = 10

[train]
batch = 2
steps = 3
checkpoint_every = 0
weight_decay = 0.01
clip_norm = 1.0
policy = full
seed = 5

[eval]
decode = greedy
beam_size = 4
alpha = 0.6
k = 1
max_new = 4
"""

DOCS = [
    ["the cat sat on the mat", "dogs bark at night"],
    ["ab=1 cd=2 ab=1", "short line"],
]


def test_special_tokens():
    assert (sc.BOS, sc.EOP, sc.EOD, sc.PAD) == (256, 257, 258, 259)
    assert sc.VOCAB_SIZE == 260
    assert sc.token_name(sc.BOS) == "<s>"


def test_tokenizer_roundtrip():
    ids = sc.encode("hi!")
    assert ids == [104, 105, 33]
    assert sc.decode(ids) == "hi!"
    assert "<\\s>" not in sc.render_tokens([sc.BOS] + ids)


def test_packing():
    seqs, notes = sc.pack_corpus(DOCS, 48)
    assert len(seqs) >= 1
    assert seqs[0].ids[0] == sc.BOS
    for b, e in seqs[0].doc_spans:
        assert 0 <= b < e <= len(seqs[0].ids)
    assert isinstance(notes, list)
    docs = sc.parse_corpus_text("para one\npara two\n\nsecond doc\n")
    assert docs == [["para one", "para two"], ["second doc"]]


def test_span_sampling():
    seqs, _ = sc.pack_corpus(DOCS, 48)
    seq = seqs[0]
    layout = sc.sample_spans(seq, 0.25, 2, 4, 7)
    assert layout.n == len(seq.ids)
    covered = set()
    for s, e in layout.spans:
        assert 2 <= e - s <= 4
        assert 1 <= s < e <= layout.n + 1
        for t in range(s, e):
            assert t not in covered
            covered.add(t)
    targets = sc.target_positions(layout)
    assert all(2 <= t <= layout.n for t in targets)
    for s, e in layout.spans:
        if e <= layout.n:
            assert sc.prediction_source(layout, e) == e - 1


def test_masks():
    mask = sc.causal_mask(3)
    assert mask.at(2, 0) and not mask.at(0, 2)
    assert set(mask.render()) <= {"█", "·", "\n"}
    full = sc.noncausal_mask(2)
    assert full.at(0, 1) and full.at(1, 0)
    pfx = sc.prefix_mask(4, 2)
    assert pfx.at(0, 1) and not pfx.at(1, 3)
    flow = sc.semicausal_flow(6, [(2, 4)])
    # Inside the span attention is bidirectional; outside it stays causal.
    assert flow.at(1, 2) and flow.at(2, 1)
    assert not flow.at(0, 1)


def test_config_canonicalization():
    canon = sc.canonical_config(TINY_CFG)
    assert sc.canonical_config(canon) == canon
    checksum = sc.config_checksum(TINY_CFG)
    assert len(checksum) == 16
    int(checksum, 16)


def test_model_loss_and_logits():
    model = sc.Model(TINY_CFG, seed=3)
    ids = [sc.BOS] + sc.encode("abcdef")
    loss = model.loss(ids)
    assert math.isfinite(loss) and loss > 0.0
    again = sc.Model(TINY_CFG, seed=3).loss(ids)
    assert loss == again
    rows = model.logits(ids, spans=[(2, 4)])
    assert len(rows) == len(ids)
    assert len(rows[0]) == sc.VOCAB_SIZE
    assert all(math.isfinite(x) for x in rows[-1])


def test_train_and_checkpoint_roundtrip(tmp_path):
    path = str(tmp_path / "tiny.ckpt")
    model = sc.Model(TINY_CFG, seed=11)
    report = model.train_corpus(DOCS, path)
    assert "step" in report and model.step == 3
    loaded = sc.Model.load(path)
    assert loaded.step == 3
    assert loaded.checksum == model.checksum
    ids = [sc.BOS] + sc.encode("abc")
    assert loaded.logits(ids) == model.logits(ids)


def test_generate_and_eval():
    model = sc.Model(TINY_CFG, seed=2)
    demos = [("ab=", "c"), ("de=", "f")]
    out = model.generate(demos, "ab=", beam=False, max_new=2)
    assert isinstance(out, str)
    records = sc.gen_kv_recall(5, 3, 2, True)
    assert len(records) == 3
    assert all(sc.kv_episode_solvable(r) for r in records)
    report = model.eval_records(records, k=2)
    assert report["episodes"] == 3
    assert 0.0 <= report["em"] <= 1.0
    assert 0.0 <= report["f1"] <= 1.0


def test_task_generators_and_files(tmp_path):
    corpus = sc.gen_kv_corpus(9, 4, 3, 2)
    assert len(corpus) == 4
    assert all(len(doc) == 9 for doc in corpus)
    records = sc.gen_toy_classify(3, 5, 2)
    assert len(records) == 5
    path = str(tmp_path / "tasks.jsonl")
    sc.write_task_file(path, records)
    back = sc.read_task_file(path)
    assert len(back) == len(records)
    assert back[0].test_input == records[0].test_input
    assert back[0].demos[0].input == records[0].demos[0].input
    with pytest.raises(sc.IoFailure):
        sc.read_task_file(str(tmp_path / "missing.jsonl"))


def test_decode_with_python_scorer():
    table = {
        (): [math.log(0.2), math.log(0.7), math.log(0.1)],
        (1,): [math.log(0.1), math.log(0.2), math.log(0.7)],
    }

    def scorer(prefix):
        return table.get(tuple(prefix), [math.log(1.0 / 3.0)] * 3)

    assert sc.greedy_decode(scorer, max_new=4, stop=[2]) == [1]
    assert sc.beam_search(scorer, max_new=4, beam_size=1, stop=[2]) == [1]
    with pytest.raises(sc.ContractError):
        sc.beam_search(scorer, max_new=4, beam_size=0, stop=[2])


def test_metrics():
    assert sc.exact_match([1, 2], [1, 2]) == 1.0
    assert sc.exact_match([1, 2], [2, 1]) == 0.0
    assert sc.token_f1([1, 2], [2, 3]) == pytest.approx(0.5)
    assert sc.token_f1([], []) == 1.0
