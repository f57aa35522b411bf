"""Command-line driver.

Exit codes: 0 on success, 1 on data errors, 2 on usage errors.  All
outputs are deterministic given the seeds on the command line.

Serve configuration precedence per option: CLI flag > environment
variable (WAHLS_PORT, WAHLS_CKPT_DIR) > config file (--config JSON) >
built-in default.
"""

from __future__ import annotations

import json
import logging
import sys
from pathlib import Path

import click

from wahls import __version__
from wahls.benchmark import evaluate, load_metrics, render_submission
from wahls.core import Split, load_dataset, parse_sample, save_dataset, validate_sample
from wahls.errors import WahlsError
from wahls.synth import FAMILIES, generate_dataset
from wahls.surrogates import (
    checkpoint_hash,
    load_checkpoint_file,
    save_checkpoint_file,
    train,
)
from wahls.surrogates.train import default_train_config

log = logging.getLogger("wahls")


def _fail(message: str) -> "click.ClickException":
    return click.ClickException(message)


def _parse_mix(text: str) -> dict[str, float]:
    mix = {}
    for part in text.split(","):
        name, _, value = part.partition("=")
        if name.strip() not in FAMILIES:
            raise click.BadParameter(f"unknown family {name.strip()!r}")
        mix[name.strip()] = float(value)
    return mix


@click.group()
@click.version_option(__version__)
@click.option("-v", "--verbose", is_flag=True, help="Enable debug logging.")
def main(verbose: bool) -> None:
    """Resource/latency estimation toolkit for HLS dataflow networks."""
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
    )


@main.command()
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--n", type=int, required=True, help="Number of samples to generate.")
@click.option("--mix", default="dense=1.0", show_default=True, help="Family fractions, e.g. dense=0.7,conv1d=0.2,conv2d=0.1.")
@click.option("--out", type=click.Path(path_type=Path), required=True, help="Output .jsonl archive or directory.")
def generate(seed: int, n: int, mix: str, out: Path) -> None:
    """Generate a labeled pseudo-synthesis dataset."""
    try:
        ds = generate_dataset(seed=seed, n=n, family_mix=_parse_mix(mix))
    except ValueError as exc:
        raise _fail(str(exc))
    save_dataset(ds, out)
    click.echo(f"wrote {len(ds)} samples to {out}")


@main.command()
@click.argument("dataset", type=click.Path(exists=True, path_type=Path))
def validate(dataset: Path) -> None:
    """Validate every sample in a dataset; nonzero exit on violations."""
    try:
        ds = load_dataset(dataset)
    except WahlsError as exc:
        raise _fail(str(exc))
    bad = 0
    for sample in ds:
        violations = validate_sample(sample)
        for violation in violations:
            click.echo(f"{sample.id}: {violation.code}: {violation.message}")
        bad += bool(violations)
    for source, error in ds.load_failures:
        click.echo(f"unparseable: {source}: {error}")
    if bad or ds.load_failures:
        raise _fail(f"{bad} invalid and {len(ds.load_failures)} unparseable of {len(ds) + len(ds.load_failures)} records")
    click.echo(f"{len(ds)} samples valid")


@main.command(name="train")
@click.option("--model", "kind", type=click.Choice(["mlp", "gnn", "transformer"]), required=True)
@click.option("--dataset", type=click.Path(exists=True, path_type=Path), required=True)
@click.option("--val-dataset", type=click.Path(exists=True, path_type=Path), default=None, help="Validation split; defaults to a 90/10 tail split of --dataset.")
@click.option("--epochs", type=int, default=None, help="Override the per-model default epoch count.")
@click.option("--batch-size", type=int, default=None)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", type=click.Path(path_type=Path), required=True, help="Checkpoint output path.")
def train_cmd(kind, dataset, val_dataset, epochs, batch_size, seed, out) -> None:
    """Train one estimator and save its checkpoint."""
    import dataclasses

    try:
        full = load_dataset(dataset, split=Split.TRAIN)
        if val_dataset is not None:
            train_ds, val_ds = full, load_dataset(val_dataset, split=Split.VALIDATION)
        else:
            cut = max(1, int(len(full) * 0.9))
            if cut == len(full):
                cut = len(full) - 1
            train_ds = dataclasses.replace(full, samples=full.samples[:cut])
            val_ds = dataclasses.replace(full, samples=full.samples[cut:], split=Split.VALIDATION)
        cfg = default_train_config(kind, seed=seed)
        if epochs is not None:
            cfg = dataclasses.replace(cfg, epochs=epochs)
        if batch_size is not None:
            cfg = dataclasses.replace(cfg, batch_size=batch_size)
        model = train(kind, train_ds, val_ds, cfg)
    except WahlsError as exc:
        raise _fail(str(exc))
    path = save_checkpoint_file(model, out)
    final = model.history["val_loss"][-1] if model.history["val_loss"] else float("nan")
    click.echo(f"trained {kind} ({len(train_ds)} train / {len(val_ds)} val), final val loss {final:.4g}")
    click.echo(f"checkpoint: {path} sha256={checkpoint_hash(path.read_bytes())[:16]}")


@main.command(name="evaluate")
@click.option("--model-ckpt", type=click.Path(exists=True, path_type=Path), required=True)
@click.option("--dataset", type=click.Path(exists=True, path_type=Path), required=True)
@click.option("--groups", default=None, help="Comma-separated group subset (default: all groups).")
@click.option("--out", type=click.Path(path_type=Path), required=True, help="Report bundle directory.")
def evaluate_cmd(model_ckpt, dataset, groups, out) -> None:
    """Score a checkpoint on a labeled dataset and write the report bundle."""
    try:
        model = load_checkpoint_file(model_ckpt)
        ds = load_dataset(dataset)
        report = evaluate(
            model,
            ds,
            groups=groups.split(",") if groups else None,
            predictor_meta={
                "name": model.kind,
                "kind": model.kind,
                "checkpoint_hash": checkpoint_hash(model_ckpt.read_bytes()),
                "feature_layout_version": model.feature_layout_version,
            },
        )
    except (WahlsError, KeyError) as exc:
        raise _fail(str(exc))
    artifacts = render_submission(report, out)
    for name, path in artifacts.items():
        click.echo(f"{name}: {path}")


@main.command()
@click.option("--metrics", type=click.Path(exists=True, path_type=Path), required=True, help="metrics.json from an evaluation bundle.")
@click.option("--out", type=click.Path(path_type=Path), required=True)
def report(metrics, out) -> None:
    """Render box-plot figures and a delimited metric summary from a
    metrics file."""
    from wahls.figures import metrics_csv, render_rpe_figures

    try:
        loaded = load_metrics(metrics)
    except (json.JSONDecodeError, KeyError) as exc:
        raise _fail(f"unreadable metrics file: {exc}")
    out.mkdir(parents=True, exist_ok=True)
    csv_path = metrics_csv(loaded, out / "metrics.csv")
    figures = render_rpe_figures(loaded, out)
    click.echo(f"summary: {csv_path}")
    for path in figures:
        click.echo(f"figure: {path}")


@main.command()
@click.option("--arch-file", type=click.Path(exists=True, path_type=Path), required=True, help="JSON file with the layer list (neutral schema).")
@click.option("--config-file", type=click.Path(exists=True, path_type=Path), required=True, help="JSON file with the conversion config.")
@click.option("--model-ckpt", type=click.Path(exists=True, path_type=Path), required=True)
def estimate(arch_file, config_file, model_ckpt) -> None:
    """Predict the six targets for one architecture/config pair."""
    from wahls.featurize import bops as bops_fn

    try:
        arch_obj = json.loads(arch_file.read_text())
        cfg_obj = json.loads(config_file.read_text())
        record = {
            "meta_data": {"id": "cli", "model_name": "cli", "artifact_tarball_name": ""},
            "model_config": arch_obj,
            "hls_config": cfg_obj,
            "resource_report": {"bram": 0, "dsp": 0, "ff": 0, "lut": 0},
            "hls_resource_report": {"bram": 0, "dsp": 0, "ff": 0, "lut": 0},
            "latency_report": {"cycles": 0, "ii": 0},
            "target_part": cfg_obj.get("target_part", ""),
            "vivado_version": cfg_obj.get("vivado_version", ""),
            "hls4ml_version": cfg_obj.get("hls4ml_version", ""),
        }
        sample = parse_sample(record)
        model = load_checkpoint_file(model_ckpt)
        prediction = model.predict(sample.architecture, sample.hls_config)
    except (WahlsError, json.JSONDecodeError, ValueError) as exc:
        raise _fail(str(exc))
    click.echo(
        json.dumps(
            {
                "predictions": dict(zip(("bram", "dsp", "ff", "lut", "cycles", "ii"), prediction.as_tuple())),
                "bops": bops_fn(sample.architecture, sample.hls_config),
                "model_kind": model.kind,
            },
            indent=2,
            sort_keys=True,
        )
    )


def _resolve(flag, env_name: str, config: dict, key: str, default):
    import os

    if flag is not None:
        return flag
    if os.environ.get(env_name):
        return os.environ[env_name]
    if key in config:
        return config[key]
    return default


@main.command()
@click.option("--port", type=int, default=None, help="Listen port [env WAHLS_PORT, default 8080].")
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--ckpt", "ckpts", type=click.Path(exists=True, path_type=Path), multiple=True, help="Checkpoint file(s) to serve; may repeat.")
@click.option("--ckpt-dir", type=click.Path(path_type=Path), default=None, help="Directory of .ckpt files [env WAHLS_CKPT_DIR].")
@click.option("--ui-dir", type=click.Path(path_type=Path), default=None, help="Static UI directory mounted at /ui.")
@click.option("--config", "config_file", type=click.Path(exists=True, path_type=Path), default=None, help="JSON config file (keys: port, ckpt_dir, ui_dir).")
def serve(port, host, ckpts, ckpt_dir, ui_dir, config_file) -> None:
    """Run the HTTP estimation service."""
    import uvicorn

    from wahls.service import CheckpointRegistry, create_app

    config = json.loads(config_file.read_text()) if config_file else {}
    port = int(_resolve(port, "WAHLS_PORT", config, "port", 8080))
    ckpt_dir = _resolve(ckpt_dir, "WAHLS_CKPT_DIR", config, "ckpt_dir", None)
    ui_dir = _resolve(ui_dir, "WAHLS_UI_DIR", config, "ui_dir", None)

    registry = CheckpointRegistry()
    try:
        for path in ckpts:
            registry.add_file(path)
        if ckpt_dir:
            registry.add_dir(ckpt_dir)
    except WahlsError as exc:
        raise _fail(str(exc))
    if len(registry) == 0:
        raise _fail("no checkpoints loaded; pass --ckpt or --ckpt-dir")
    app = create_app(registry, ui_dir=ui_dir)
    click.echo(f"serving {len(registry)} checkpoint(s) on {host}:{port}")
    uvicorn.run(app, host=host, port=port, log_level="info")


if __name__ == "__main__":
    sys.exit(main())
