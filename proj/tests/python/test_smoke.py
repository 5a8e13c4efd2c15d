# Copyright 2026 The probekit Authors
# SPDX-License-Identifier: Apache-2.0

import math
from pathlib import Path

import numpy as np
import pytest

import probekit

DATA = Path(__file__).resolve().parents[1] / "data" / "gender"


def scalar_params():
    p = probekit.ProbeParams(1)
    # Flatten order: key, value, query, classifier weights, bias.
    p.unflatten([1.0, 1.0, 1.0, 1.0, -1.0, 0.0, 0.0])
    return p


def test_forward_matches_hand_computation():
    out = probekit.forward(scalar_params(), np.array([[1.0], [3.0]], dtype=np.float32))
    assert out["attention"] == pytest.approx([0.11920, 0.88080], abs=1e-4)
    assert out["probs"] == pytest.approx([0.99602, 0.00398], abs=1e-4)


def test_gradients_have_parameter_shape():
    p = probekit.init_params(4, seed=3)
    x = np.random.default_rng(0).normal(size=(7, 4)).astype(np.float32)
    loss, grads = probekit.loss_and_grads(p, x, 1)
    assert loss > 0
    assert len(grads) == p.parameter_count == len(p.flatten())


def test_errors_map_to_python_exceptions():
    p = probekit.init_params(4, seed=3)
    with pytest.raises(probekit.DimensionMismatch):
        probekit.forward(p, np.zeros((3, 5), dtype=np.float32))
    with pytest.raises(probekit.Error):
        probekit.forward(p, np.zeros((0, 4), dtype=np.float32))
    with pytest.raises(probekit.IoError):
        probekit.read_pack("/nonexistent/pack.fspk")


def test_pack_round_trip(tmp_path):
    rng = np.random.default_rng(1)
    seqs = [
        {"segment_id": f"s{i}", "speaker_id": f"p{i}", "gender": "She" if i % 2 else "He",
         "states": rng.normal(size=(3 + i, 5)).astype(np.float32)}
        for i in range(4)
    ]
    manifest = probekit.write_pack(seqs, tmp_path / "p.fspk")
    assert manifest.count("\n") == 4
    back = probekit.read_pack(tmp_path / "p.fspk", manifest)
    for a, b in zip(seqs, back):
        assert a["segment_id"] == b["segment_id"] and a["gender"] == b["gender"]
        np.testing.assert_array_equal(a["states"], b["states"])


def test_pooling_and_positions():
    x = np.array([[1, 5], [3, 2]], dtype=np.float32)
    assert probekit.pool_max(x) == [3, 5]
    assert probekit.pool_mean(x) == [2, 3.5]
    assert probekit.positional_indices(10) == [0, 2, 5, 7, 9]


def test_attention_curves():
    assert sum(probekit.resample([0.5, 0.3, 0.2], 100)) == pytest.approx(1.0)
    ramp = [k / 5050 for k in range(100, 0, -1)]
    assert probekit.early_mass([ramp], 0.5) == pytest.approx(3775 / 5050)


def test_metrics():
    report = probekit.classification_report([0, 0, 1, 1], [0, 1, 1, 1])
    assert report["macro_f1"] == pytest.approx(73.33, abs=0.01)
    reg = probekit.linreg([1, 2, 3, 4], [2, 4, 6, 8.5])
    assert reg["slope"] > 0 and reg["n"] == 4


def test_gender_fixture():
    outputs = (DATA / "outputs.tsv").read_text(encoding="utf-8")
    annotations = (DATA / "annotations.tsv").read_text(encoding="utf-8")
    judgments = (DATA / "judgments.tsv").read_text(encoding="utf-8")
    base = probekit.gender_score(outputs, annotations)
    assert base["All"]["coverage"] == 77.78 and base["All"]["accuracy"] == 71.43
    merged = probekit.gender_score(outputs, annotations, judgments)
    assert merged["All"]["coverage"] == 88.89 and merged["All"]["accuracy"] == 68.75
    assert not math.isnan(merged["He"]["accuracy"])
