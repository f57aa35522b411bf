import json

import pytest

from wahls.errors import CorruptCheckpoint, VersionMismatch
from wahls.surrogates import (
    checkpoint_hash,
    load_checkpoint,
    save_checkpoint,
    train,
)
from wahls.surrogates.checkpoint import FORMAT_VERSION, MAGIC
from wahls.surrogates.train import TrainConfig


@pytest.fixture(scope="module")
def trained(dense_split):
    train_ds, val_ds = dense_split
    cfg = TrainConfig(epochs=2, batch_size=32, optimizer="adamw", lr=1e-3,
                      schedule="none", loss="mse", seed=9)
    return train("gnn", train_ds, val_ds, cfg,
                 model_config={"hidden_head_dim": 4, "embed_dim": 8, "mlp_hidden": 16})


def test_roundtrip_predictions_bit_identical(trained, dense_split):
    train_ds, _ = dense_split
    blob = save_checkpoint(trained)
    loaded = load_checkpoint(blob)
    for sample in train_ds.samples[:10]:
        a = trained.predict(sample.architecture, sample.hls_config)
        b = loaded.predict(sample.architecture, sample.hls_config)
        assert a == b  # exact float equality


def test_roundtrip_preserves_metadata(trained):
    loaded = load_checkpoint(save_checkpoint(trained))
    assert loaded.kind == trained.kind
    assert loaded.feature_layout_version == trained.feature_layout_version
    assert loaded.cost_model_version == trained.cost_model_version
    assert loaded.part_vocab == trained.part_vocab
    assert loaded.norm_stats.to_dict() == trained.norm_stats.to_dict()
    assert loaded.history == trained.history


def test_save_is_deterministic(trained):
    assert save_checkpoint(trained) == save_checkpoint(trained)
    assert checkpoint_hash(save_checkpoint(trained)) == checkpoint_hash(save_checkpoint(trained))


def test_truncated_bytes_rejected(trained):
    blob = save_checkpoint(trained)
    with pytest.raises(CorruptCheckpoint):
        load_checkpoint(blob[: len(blob) // 2])
    with pytest.raises(CorruptCheckpoint):
        load_checkpoint(blob[: len(MAGIC) + 4])
    with pytest.raises(CorruptCheckpoint):
        load_checkpoint(b"not a checkpoint")
    with pytest.raises(CorruptCheckpoint):
        load_checkpoint(blob + b"trailing junk")


def test_layout_version_mismatch_rejected(trained):
    blob = save_checkpoint(trained)
    header_len = int.from_bytes(blob[len(MAGIC) : len(MAGIC) + 8], "big")
    start = len(MAGIC) + 8
    header = json.loads(blob[start : start + header_len])

    header["feature_layout_version"] = "wa-feat-0"
    tampered = json.dumps(header, sort_keys=True, separators=(",", ":")).encode()
    rebuilt = MAGIC + len(tampered).to_bytes(8, "big") + tampered + blob[start + header_len :]
    with pytest.raises(VersionMismatch):
        load_checkpoint(rebuilt)

    header["feature_layout_version"] = trained.feature_layout_version
    header["format_version"] = FORMAT_VERSION + 1
    tampered = json.dumps(header, sort_keys=True, separators=(",", ":")).encode()
    rebuilt = MAGIC + len(tampered).to_bytes(8, "big") + tampered + blob[start + header_len :]
    with pytest.raises(VersionMismatch):
        load_checkpoint(rebuilt)
