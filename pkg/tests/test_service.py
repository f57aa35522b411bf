import json
import time

import numpy as np
import pytest
from fastapi.testclient import TestClient

from wahls.core import Activation, dense_chain
from wahls.service import CheckpointRegistry, create_app
from wahls.surrogates import save_checkpoint_file, train
from wahls.surrogates.train import TrainConfig


def _train_small(kind, dense_split, **model_config):
    train_ds, val_ds = dense_split
    cfg = TrainConfig(epochs=2, batch_size=32, optimizer="adamw", lr=1e-3,
                      schedule="none", loss="mse", seed=5)
    return train(kind, train_ds, val_ds, cfg, model_config=model_config)


@pytest.fixture(scope="module")
def served(tmp_path_factory, dense_split):
    root = tmp_path_factory.mktemp("ckpts")
    models = {
        "gnn-small": _train_small("gnn", dense_split, hidden_head_dim=4, embed_dim=8, mlp_hidden=16),
        "transformer-small": _train_small("transformer", dense_split, d_model=32, ff_dim=64, heads=4),
        "mlp-small": _train_small("mlp", dense_split, hidden=16),
    }
    registry = CheckpointRegistry()
    for name, model in models.items():
        registry.add_file(save_checkpoint_file(model, root / f"{name}.ckpt"))
    client = TestClient(create_app(registry))
    return client, models, registry


def _request_body(architecture, config, **extra):
    layers = [
        {
            "kind": l.kind.value,
            "in_shape": list(l.in_shape),
            "out_shape": list(l.out_shape),
            "units_or_filters": l.units_or_filters,
            "kernel_size": l.kernel_size,
            "stride": l.stride,
            "padding": l.padding.value,
            "activation": l.activation.value,
        }
        for l in architecture.layers
    ]
    body = {
        "architecture": {"name": architecture.name, "layers": layers},
        "hls_config": {
            "precision_total_bits": config.precision_total_bits,
            "precision_int_bits": config.precision_int_bits,
            "reuse_factor": config.reuse_factor,
            "strategy": config.strategy.value,
            "io_type": config.io_type.value,
            "clock_ns": config.clock_ns,
            "target_part": config.target_part,
            "vivado_version": config.vivado_version,
            "hls4ml_version": config.hls4ml_version,
        },
    }
    body.update(extra)
    return body


def test_health_and_catalog(served):
    client, models, registry = served
    health = client.get("/api/v1/health")
    assert health.status_code == 200
    assert health.json() == {"status": "ok", "models": 3}
    catalog = client.get("/api/v1/models").json()
    assert len(catalog) == 3
    assert {entry["kind"] for entry in catalog} == {"gnn", "transformer", "mlp"}
    assert all(entry["checkpoint_hash"] for entry in catalog)


def test_estimate_matches_direct_predict(served, jet, resource_cfg):
    client, models, _ = served
    for name, model in models.items():
        body = _request_body(jet, resource_cfg, checkpoint=name)
        response = client.post("/api/v1/estimate", json=body)
        assert response.status_code == 200, response.text
        payload = response.json()
        direct = model.predict(jet, resource_cfg)
        served_values = [payload["predictions"][t] for t in ("bram", "dsp", "ff", "lut", "cycles", "ii")]
        assert served_values == list(direct.as_tuple())  # bit-for-bit through JSON
        assert payload["bops"] > 0
        assert payload["model"]["id"] == name
        assert all(v >= 0 for v in served_values)


def test_estimate_missing_config_400(served, jet, resource_cfg):
    client, _, _ = served
    body = _request_body(jet, resource_cfg)
    del body["hls_config"]
    assert client.post("/api/v1/estimate", json=body).status_code == 400


def test_estimate_validation_400(served, jet, resource_cfg):
    client, _, _ = served
    body = _request_body(jet, resource_cfg)
    body["hls_config"]["reuse_factor"] = 0
    response = client.post("/api/v1/estimate", json=body)
    assert response.status_code == 400
    assert any(v["code"] == "ReuseBounds" for v in response.json()["detail"])


def test_estimate_unknown_checkpoint_404(served, jet, resource_cfg):
    client, _, _ = served
    body = _request_body(jet, resource_cfg, checkpoint="missing")
    assert client.post("/api/v1/estimate", json=body).status_code == 404


def test_estimate_too_deep_422(served, resource_cfg):
    client, _, _ = served
    deep = dense_chain("deep", 8, (8,) * 60, (Activation.RELU,) * 60)
    body = _request_body(deep, resource_cfg, checkpoint="transformer-small")
    response = client.post("/api/v1/estimate", json=body)
    assert response.status_code == 422


def test_kind_selection(served, jet, resource_cfg):
    client, models, _ = served
    body = _request_body(jet, resource_cfg, model_kind="mlp")
    payload = client.post("/api/v1/estimate", json=body).json()
    assert payload["model"]["kind"] == "mlp"


def test_compare_preserves_order_and_isolates_errors(served, jet, resource_cfg):
    client, _, _ = served
    good = _request_body(jet, resource_cfg, checkpoint="mlp-small")
    bad = _request_body(jet, resource_cfg, checkpoint="missing")
    response = client.post("/api/v1/compare", json={"requests": [good, bad, good]})
    assert response.status_code == 200
    results = response.json()["results"]
    assert [r["ok"] for r in results] == [True, False, True]
    assert results[1]["status"] == 404
    assert results[0]["predictions"] == results[2]["predictions"]


def test_concurrent_identical_requests_identical(served, jet, resource_cfg):
    client, _, _ = served
    body = _request_body(jet, resource_cfg, checkpoint="gnn-small")
    payloads = [client.post("/api/v1/estimate", json=body).json() for _ in range(4)]
    assert all(p["predictions"] == payloads[0]["predictions"] for p in payloads)


def test_latency_p95_under_one_second(served, resource_cfg):
    client, _, _ = served
    deep = dense_chain("deep51", 8, (8,) * 51, (Activation.RELU,) * 51)
    body = _request_body(deep, resource_cfg, checkpoint="transformer-small")
    times = []
    for _ in range(20):
        start = time.perf_counter()
        response = client.post("/api/v1/estimate", json=body)
        times.append(time.perf_counter() - start)
        assert response.status_code == 200
    assert float(np.percentile(times, 95)) < 1.0
