import json

import pytest
from click.testing import CliRunner

from wahls.cli import main
from wahls.surrogates import save_checkpoint, train
from wahls.surrogates.train import TrainConfig


@pytest.fixture(scope="module")
def runner():
    return CliRunner()


@pytest.fixture(scope="module")
def workdir(tmp_path_factory, runner):
    root = tmp_path_factory.mktemp("cli")
    result = runner.invoke(
        main, ["generate", "--seed", "1", "--n", "80", "--mix", "dense=1.0",
               "--out", str(root / "data.jsonl")],
    )
    assert result.exit_code == 0, result.output
    return root


def test_generate_then_validate_ok(runner, workdir):
    result = runner.invoke(main, ["validate", str(workdir / "data.jsonl")])
    assert result.exit_code == 0, result.output
    assert "80 samples valid" in result.output


def test_generate_deterministic_bytes(runner, tmp_path):
    for name in ("a.jsonl", "b.jsonl"):
        result = runner.invoke(
            main, ["generate", "--seed", "7", "--n", "12", "--out", str(tmp_path / name)],
        )
        assert result.exit_code == 0
    assert (tmp_path / "a.jsonl").read_bytes() == (tmp_path / "b.jsonl").read_bytes()


def test_generate_bad_mix_is_usage_error(runner, tmp_path):
    result = runner.invoke(
        main, ["generate", "--n", "5", "--mix", "warp=1.0", "--out", str(tmp_path / "x.jsonl")],
    )
    assert result.exit_code == 2


def test_validate_reports_corruption(runner, workdir, tmp_path):
    lines = (workdir / "data.jsonl").read_text().splitlines()
    lines[3] = lines[3][:30]
    bad = tmp_path / "corrupt.jsonl"
    bad.write_text("\n".join(lines) + "\n")
    result = runner.invoke(main, ["validate", str(bad)])
    assert result.exit_code == 1
    assert "unparseable" in result.output


@pytest.fixture(scope="module")
def ckpt(runner, workdir):
    path = workdir / "mlp.ckpt"
    result = runner.invoke(
        main,
        ["train", "--model", "mlp", "--dataset", str(workdir / "data.jsonl"),
         "--epochs", "2", "--seed", "3", "--out", str(path)],
    )
    assert result.exit_code == 0, result.output
    return path


def test_train_evaluate_report_flow(runner, workdir, ckpt):
    assert ckpt.is_file()

    bundle = workdir / "bundle"
    result = runner.invoke(
        main,
        ["evaluate", "--model-ckpt", str(ckpt), "--dataset", str(workdir / "data.jsonl"),
         "--out", str(bundle)],
    )
    assert result.exit_code == 0, result.output
    assert (bundle / "metrics.json").is_file()
    assert (bundle / "predictions.csv").is_file()

    figures = workdir / "figures"
    result = runner.invoke(
        main, ["report", "--metrics", str(bundle / "metrics.json"), "--out", str(figures)],
    )
    assert result.exit_code == 0, result.output
    assert (figures / "metrics.csv").is_file()
    pngs = sorted(p.name for p in figures.glob("*.png"))
    assert pngs == [f"rpe_{t}.png" for t in ("bram", "cycles", "dsp", "ff", "ii", "lut")]


def test_evaluate_rejects_stale_layout(runner, workdir, tmp_path, dense_split):
    train_ds, val_ds = dense_split
    cfg = TrainConfig(epochs=1, batch_size=32, optimizer="adam", lr=1e-3,
                      schedule="none", loss="mse", seed=0)
    model = train("mlp", train_ds, val_ds, cfg, model_config={"hidden": 8})
    model.feature_layout_version = "wa-feat-0"
    stale = tmp_path / "stale.ckpt"
    stale.write_bytes(save_checkpoint(model))
    result = runner.invoke(
        main,
        ["evaluate", "--model-ckpt", str(stale), "--dataset", str(workdir / "data.jsonl"),
         "--out", str(tmp_path / "bundle")],
    )
    assert result.exit_code == 1
    assert "layout" in result.output


def test_estimate_command(runner, workdir, tmp_path, jet, resource_cfg, ckpt):
    arch = {
        "name": "Jet",
        "layers": [
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
            for l in jet.layers
        ],
    }
    cfg = {
        "precision_total_bits": 16,
        "precision_int_bits": 6,
        "reuse_factor": 1,
        "strategy": "resource",
        "io_type": "io_parallel",
        "target_part": "xcu250-figd2104-2L-e",
        "clock_ns": 5.0,
        "vivado_version": "2020.1",
        "hls4ml_version": "0.5.0",
    }
    (tmp_path / "arch.json").write_text(json.dumps(arch))
    (tmp_path / "cfg.json").write_text(json.dumps(cfg))
    result = runner.invoke(
        main,
        ["estimate", "--arch-file", str(tmp_path / "arch.json"),
         "--config-file", str(tmp_path / "cfg.json"), "--model-ckpt", str(ckpt)],
    )
    assert result.exit_code == 0, result.output
    payload = json.loads(result.output)
    assert set(payload["predictions"]) == {"bram", "dsp", "ff", "lut", "cycles", "ii"}
    assert all(v >= 0 for v in payload["predictions"].values())
    assert payload["bops"] > 0


def test_usage_error_exit_code(runner):
    result = runner.invoke(main, ["train", "--model", "quantum"])
    assert result.exit_code == 2


def test_serve_option_precedence(monkeypatch):
    from wahls.cli import _resolve

    monkeypatch.delenv("WAHLS_PORT", raising=False)
    assert _resolve(None, "WAHLS_PORT", {}, "port", 8080) == 8080
    assert _resolve(None, "WAHLS_PORT", {"port": 9000}, "port", 8080) == 9000
    monkeypatch.setenv("WAHLS_PORT", "9100")
    assert _resolve(None, "WAHLS_PORT", {"port": 9000}, "port", 8080) == "9100"
    assert _resolve(9200, "WAHLS_PORT", {"port": 9000}, "port", 8080) == 9200


def test_missing_dataset_is_data_error(runner, tmp_path):
    result = runner.invoke(main, ["validate", str(tmp_path)])
    assert result.exit_code == 1
