"""Training loops, trained-model wrapper, and prediction paths.

Training is deterministic given the config seed on a single worker: model
initialization, batch shuffling, and dropout all derive from it.  Targets
are regressed in normalized log space and predictions are mapped back to
raw units on the way out.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Optional, Sequence

import numpy as np
import torch

from wahls.core import Dataset, HlsConfig, NetworkArchitecture, TargetVector
from wahls.errors import Diverged
from wahls.featurize import (
    DEFAULT_PART_VOCAB,
    FEATURE_LAYOUT_VERSION,
    NormStats,
    aggregate_features,
    apply_features,
    build_graph,
    build_sequence,
    encode_mlp_numeric,
    fit_normalizer_for,
    invert_targets,
)
from wahls.surrogates.models import build_model, model_config_dict


@dataclass(frozen=True)
class TrainConfig:
    """Optimization settings; defaults come from :func:`default_train_config`."""

    epochs: int
    batch_size: int
    optimizer: str  # "adam" | "adamw"
    lr: float
    schedule: str  # "plateau" | "none"
    loss: str  # "mse" | "msle"
    seed: int = 0
    plateau_factor: float = 0.5
    plateau_patience: int = 10
    weight_decay: float = 0.01
    early_stop_val_loss: Optional[float] = None

    def __post_init__(self):
        if self.epochs < 1 or self.batch_size < 1:
            raise ValueError("epochs and batch_size must be >= 1")


def default_train_config(kind: str, seed: int = 0) -> TrainConfig:
    """Published training recipes per estimator.

    The transformer's reference batch size (1024) is scaled down to suit
    desk-scale datasets.
    """
    if kind == "gnn":
        return TrainConfig(epochs=200, batch_size=64, optimizer="adamw", lr=1e-3, schedule="plateau", loss="mse", seed=seed)
    if kind == "transformer":
        return TrainConfig(epochs=250, batch_size=256, optimizer="adamw", lr=1e-3, schedule="plateau", loss="mse", seed=seed)
    if kind == "mlp":
        return TrainConfig(epochs=200, batch_size=64, optimizer="adam", lr=1e-3, schedule="none", loss="msle", seed=seed, weight_decay=0.0)
    raise ValueError(f"unknown model kind {kind!r}")


@dataclass
class TrainedModel:
    """A trained estimator plus everything needed to reuse it: normalization
    statistics, feature-layout/cost-model version stamps, model hyper-
    parameters, and the per-epoch loss history."""

    kind: str
    module: torch.nn.Module
    norm_stats: NormStats
    model_config: dict
    train_config: Optional[dict] = None
    feature_layout_version: str = FEATURE_LAYOUT_VERSION
    cost_model_version: str = ""
    part_vocab: tuple[str, ...] = DEFAULT_PART_VOCAB
    history: dict = field(default_factory=lambda: {"train_loss": [], "val_loss": []})

    @property
    def name(self) -> str:
        return self.kind

    def predict(self, architecture: NetworkArchitecture, config: HlsConfig) -> TargetVector:
        """Six nonnegative raw-unit predictions; pure and deterministic."""
        return self.predict_many([(architecture, config)])[0]

    def predict_many(self, pairs: Sequence[tuple[NetworkArchitecture, HlsConfig]]) -> list[TargetVector]:
        self.module.eval()
        z_rows = []
        with torch.no_grad():
            for start in range(0, len(pairs), 256):
                chunk = pairs[start : start + 256]
                z_rows.append(self._forward_chunk(chunk))
        z = torch.cat(z_rows).double().numpy()
        raw = invert_targets(self.norm_stats, z)
        return [TargetVector(*(float(v) for v in row)) for row in raw]

    def _forward_chunk(self, pairs: Sequence[tuple[NetworkArchitecture, HlsConfig]]) -> torch.Tensor:
        dtype = next(self.module.parameters()).dtype
        if self.kind == "gnn":
            graphs = [build_graph(a, c) for a, c in pairs]
            nodes, edges, graph_ids, blocks = _collate_graphs(
                [apply_features(self.norm_stats, g.node_features) for g in graphs],
                [g.edges for g in graphs],
                [g.global_block for g in graphs],
                dtype,
            )
            return self.module(nodes, edges, graph_ids, len(pairs), blocks)
        if self.kind == "transformer":
            seqs = [build_sequence(a, c) for a, c in pairs]
            t = max(s.length for s in seqs)
            tokens = np.stack([apply_features(self.norm_stats, s.tokens[:t]) for s in seqs])
            mask = np.stack([s.mask[:t] for s in seqs])
            return self.module(torch.as_tensor(tokens, dtype=dtype), torch.as_tensor(mask))
        if self.kind == "mlp":
            feats = [aggregate_features(a, c, self.part_vocab) for a, c in pairs]
            numeric = np.stack(
                [apply_features(self.norm_stats, encode_mlp_numeric(f.numeric)) for f in feats]
            )
            codes = torch.tensor(
                [[f.strategy_code, f.io_code, f.part_code] for f in feats], dtype=torch.int64
            )
            return self.module(torch.as_tensor(numeric, dtype=dtype), codes)
        raise ValueError(f"unknown model kind {self.kind!r}")


def _collate_graphs(node_arrays, edge_arrays, block_arrays, dtype):
    """Block-diagonal batch: nodes stacked, edge ids offset per graph."""
    offsets = np.cumsum([0] + [a.shape[0] for a in node_arrays[:-1]])
    nodes = torch.as_tensor(np.concatenate(node_arrays), dtype=dtype)
    edges = torch.as_tensor(
        np.concatenate([e + off for e, off in zip(edge_arrays, offsets)], axis=1)
    )
    graph_ids = torch.as_tensor(
        np.concatenate(
            [np.full(a.shape[0], i, dtype=np.int64) for i, a in enumerate(node_arrays)]
        )
    )
    blocks = torch.as_tensor(np.stack(block_arrays), dtype=dtype)
    return nodes, edges, graph_ids, blocks


# ---------------------------------------------------------------------------
# Featurized dataset caches
# ---------------------------------------------------------------------------


class _GraphData:
    def __init__(self, ds: Dataset, ns: NormStats):
        graphs = [build_graph(s.architecture, s.hls_config) for s in ds]
        self.nodes = [apply_features(ns, g.node_features) for g in graphs]
        self.edges = [g.edges for g in graphs]
        self.blocks = [g.global_block for g in graphs]

    def batch(self, idx: np.ndarray, dtype):
        return _collate_graphs(
            [self.nodes[i] for i in idx],
            [self.edges[i] for i in idx],
            [self.blocks[i] for i in idx],
            dtype,
        )


class _SequenceData:
    def __init__(self, ds: Dataset, ns: NormStats):
        seqs = [build_sequence(s.architecture, s.hls_config) for s in ds]
        t = max(s.length for s in seqs)
        self.tokens = torch.as_tensor(
            np.stack([apply_features(ns, s.tokens[:t]) for s in seqs]), dtype=torch.float32
        )
        self.mask = torch.as_tensor(np.stack([s.mask[:t] for s in seqs]))


class _TabularData:
    def __init__(self, ds: Dataset, ns: NormStats, part_vocab):
        feats = [aggregate_features(s.architecture, s.hls_config, part_vocab) for s in ds]
        self.numeric = torch.as_tensor(
            np.stack([apply_features(ns, encode_mlp_numeric(f.numeric)) for f in feats]),
            dtype=torch.float32,
        )
        self.codes = torch.tensor(
            [[f.strategy_code, f.io_code, f.part_code] for f in feats], dtype=torch.int64
        )


def _targets_z(ds: Dataset, ns: NormStats) -> torch.Tensor:
    raw = np.array([s.targets().as_tuple() for s in ds], dtype=np.float64)
    return torch.as_tensor(
        (np.log1p(raw) - ns.target_mean) / ns.target_std, dtype=torch.float32
    )


def _make_optimizer(cfg: TrainConfig, params) -> torch.optim.Optimizer:
    if cfg.optimizer == "adamw":
        return torch.optim.AdamW(params, lr=cfg.lr, weight_decay=cfg.weight_decay)
    if cfg.optimizer == "adam":
        return torch.optim.Adam(params, lr=cfg.lr, weight_decay=cfg.weight_decay)
    raise ValueError(f"unknown optimizer {cfg.optimizer!r}")


def _loss_fn(cfg: TrainConfig, ns: NormStats, target_slice: Optional[int] = None):
    """"mse" is mean squared error on normalized log targets; "msle" is mean
    squared error in plain log1p space (z residuals rescaled by the target
    std), i.e. the classic squared-logarithmic loss."""
    if cfg.loss == "mse":
        scale = None
    elif cfg.loss == "msle":
        std = torch.as_tensor(ns.target_std, dtype=torch.float32)
        scale = std if target_slice is None else std[target_slice]
    else:
        raise ValueError(f"unknown loss {cfg.loss!r}")

    def fn(pred: torch.Tensor, z: torch.Tensor) -> torch.Tensor:
        diff = pred - z
        if scale is not None:
            diff = diff * scale
        return (diff**2).mean()

    return fn


def train(
    kind: str,
    train_ds: Dataset,
    val_ds: Dataset,
    cfg: Optional[TrainConfig] = None,
    model_config: Optional[dict] = None,
) -> TrainedModel:
    """Fit one estimator; normalization statistics come from the training
    split only.  Raises :class:`Diverged` when the loss goes non-finite.
    """
    if len(train_ds) == 0 or len(val_ds) == 0:
        raise ValueError("training and validation datasets must be nonempty")
    cfg = cfg or default_train_config(kind)
    torch.manual_seed(cfg.seed)

    ns = fit_normalizer_for(kind, train_ds)
    model_config = dict(model_config or {})
    module = build_model(kind, model_config)
    cost_versions = {
        str(s.meta.extra_dict().get("cost_model_version", "")) for s in train_ds
    } - {""}

    trained = TrainedModel(
        kind=kind,
        module=module,
        norm_stats=ns,
        model_config=model_config_dict(module),
        train_config=asdict(cfg),
        cost_model_version=sorted(cost_versions)[0] if cost_versions else "",
    )

    z_train = _targets_z(train_ds, ns)
    z_val = _targets_z(val_ds, ns)
    shuffler = torch.Generator().manual_seed(cfg.seed)

    if kind == "mlp":
        _fit_tabular(trained, train_ds, val_ds, z_train, z_val, cfg, shuffler)
    else:
        _fit_joint(trained, train_ds, val_ds, z_train, z_val, cfg, shuffler)
    return trained


def _epoch_batches(n: int, batch_size: int, shuffler: torch.Generator) -> list[np.ndarray]:
    order = torch.randperm(n, generator=shuffler).numpy()
    return [order[i : i + batch_size] for i in range(0, n, batch_size)]


def _fit_joint(trained, train_ds, val_ds, z_train, z_val, cfg, shuffler):
    module = trained.module
    ns = trained.norm_stats
    loss_fn = _loss_fn(cfg, ns)
    opt = _make_optimizer(cfg, module.parameters())
    scheduler = (
        torch.optim.lr_scheduler.ReduceLROnPlateau(opt, factor=cfg.plateau_factor, patience=cfg.plateau_patience)
        if cfg.schedule == "plateau"
        else None
    )

    if trained.kind == "gnn":
        data_train = _GraphData(train_ds, ns)
        data_val = _GraphData(val_ds, ns)

        def run(data, idx, z):
            nodes, edges, graph_ids, blocks = data.batch(idx, torch.float32)
            pred = module(nodes, edges, graph_ids, len(idx), blocks)
            return loss_fn(pred, z[idx])

    else:
        data_train = _SequenceData(train_ds, ns)
        data_val = _SequenceData(val_ds, ns)

        def run(data, idx, z):
            sel = torch.as_tensor(idx)
            pred = module(data.tokens[sel], data.mask[sel])
            return loss_fn(pred, z[sel])

    n = len(train_ds)
    all_val = np.arange(len(val_ds))
    for epoch in range(cfg.epochs):
        module.train()
        total = 0.0
        for idx in _epoch_batches(n, cfg.batch_size, shuffler):
            opt.zero_grad()
            loss = run(data_train, idx, z_train)
            loss.backward()
            opt.step()
            total += float(loss.detach()) * len(idx)
        train_loss = total / n
        module.eval()
        with torch.no_grad():
            val_loss = float(run(data_val, all_val, z_val))
        trained.history["train_loss"].append(train_loss)
        trained.history["val_loss"].append(val_loss)
        if not (math.isfinite(train_loss) and math.isfinite(val_loss)):
            raise Diverged(f"non-finite loss at epoch {epoch}")
        if scheduler is not None:
            scheduler.step(val_loss)
        if cfg.early_stop_val_loss is not None and val_loss <= cfg.early_stop_val_loss:
            break


def _fit_tabular(trained, train_ds, val_ds, z_train, z_val, cfg, shuffler):
    module = trained.module
    ns = trained.norm_stats
    data_train = _TabularData(train_ds, ns, trained.part_vocab)
    data_val = _TabularData(val_ds, ns, trained.part_vocab)
    n = len(train_ds)
    all_val = torch.arange(len(val_ds))

    # one network fitted per target variable
    per_epoch_train = np.zeros(cfg.epochs)
    per_epoch_val = np.zeros(cfg.epochs)
    for t in range(6):
        loss_fn = _loss_fn(cfg, ns, target_slice=t)
        opt = _make_optimizer(cfg, module.nets[t].parameters())
        scheduler = (
            torch.optim.lr_scheduler.ReduceLROnPlateau(opt, factor=cfg.plateau_factor, patience=cfg.plateau_patience)
            if cfg.schedule == "plateau"
            else None
        )
        for epoch in range(cfg.epochs):
            module.train()
            total = 0.0
            for idx in _epoch_batches(n, cfg.batch_size, shuffler):
                sel = torch.as_tensor(idx)
                opt.zero_grad()
                pred = module.forward_target(data_train.numeric[sel], data_train.codes[sel], t)
                loss = loss_fn(pred, z_train[sel, t])
                loss.backward()
                opt.step()
                total += float(loss.detach()) * len(idx)
            train_loss = total / n
            module.eval()
            with torch.no_grad():
                val_loss = float(
                    loss_fn(
                        module.forward_target(data_val.numeric[all_val], data_val.codes[all_val], t),
                        z_val[:, t],
                    )
                )
            if not (math.isfinite(train_loss) and math.isfinite(val_loss)):
                raise Diverged(f"non-finite loss for target {t} at epoch {epoch}")
            per_epoch_train[epoch] += train_loss
            per_epoch_val[epoch] += val_loss
            if scheduler is not None:
                scheduler.step(val_loss)
    trained.history["train_loss"] = [float(v) / 6 for v in per_epoch_train]
    trained.history["val_loss"] = [float(v) / 6 for v in per_epoch_val]
