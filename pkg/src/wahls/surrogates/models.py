"""The three estimator architectures as torch modules.

Each maps one encoded model description to the six regression targets in
normalized log space; size hyperparameters are configurable so tests can
instantiate tiny variants, with defaults matching the shipped estimators.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

import torch
from torch import Tensor, nn

from wahls.errors import UnknownCategory
from wahls.featurize import (
    DEFAULT_PART_VOCAB,
    ENCODED_NODE_WIDTH,
    ENCODED_TOKEN_WIDTH,
    GLOBAL_BLOCK_WIDTH,
    MAX_SEQUENCE_LAYERS,
)
from wahls.surrogates.gat import GatBlock

MODEL_KINDS = ("mlp", "gnn", "transformer")

N_TARGETS = 6


@dataclass(frozen=True)
class GnnDims:
    node_in: int = ENCODED_NODE_WIDTH
    global_dim: int = GLOBAL_BLOCK_WIDTH
    heads: int = 5
    n_blocks: int = 5
    hidden_head_dim: int = 32
    embed_dim: int = 128
    mlp_hidden: int = 256
    dropout: float = 0.1


class GraphRegressor(nn.Module):
    """Stacked graph attention blocks, learnable-mix pooling, and an output
    MLP over the pooled embedding concatenated with the global block.

    Hidden blocks concatenate their attention heads; the final block
    averages them down to the node embedding width.
    """

    kind = "gnn"

    def __init__(self, dims: GnnDims = GnnDims()):
        super().__init__()
        self.dims = dims
        blocks = []
        width = dims.node_in
        for _ in range(dims.n_blocks - 1):
            block = GatBlock(width, dims.hidden_head_dim, heads=dims.heads, concat=True, dropout=dims.dropout)
            blocks.append(block)
            width = block.out_dim
        blocks.append(GatBlock(width, dims.embed_dim, heads=dims.heads, concat=False, dropout=dims.dropout))
        self.blocks = nn.ModuleList(blocks)
        self.project = nn.Linear(dims.embed_dim, dims.embed_dim)
        self.pool_weights = nn.Parameter(torch.full((3,), 1.0 / 3.0))
        self.head = nn.Sequential(
            nn.Linear(dims.embed_dim + dims.global_dim, dims.mlp_hidden),
            nn.ReLU(),
            nn.Linear(dims.mlp_hidden, dims.mlp_hidden),
            nn.ReLU(),
            nn.Linear(dims.mlp_hidden, N_TARGETS),
        )

    def forward(
        self,
        x: Tensor,
        edges: Tensor,
        graph_ids: Tensor,
        n_graphs: int,
        global_block: Tensor,
    ) -> Tensor:
        """x: (N, node_in); edges: (2, E); graph_ids: (N,) int64 mapping
        nodes to graphs; global_block: (n_graphs, global_dim)."""
        h = x
        for block in self.blocks:
            h = block(h, edges)
        h = self.project(h)

        dim = h.shape[1]
        idx = graph_ids.unsqueeze(1).expand(-1, dim)
        total = torch.zeros(n_graphs, dim, dtype=h.dtype, device=h.device).index_add(0, graph_ids, h)
        counts = torch.zeros(n_graphs, dtype=h.dtype, device=h.device).index_add(
            0, graph_ids, torch.ones(h.shape[0], dtype=h.dtype, device=h.device)
        )
        mean = total / counts.unsqueeze(1)
        peak = torch.full((n_graphs, dim), float("-inf"), dtype=h.dtype, device=h.device)
        peak = peak.scatter_reduce(0, idx, h, reduce="amax", include_self=True)

        w = self.pool_weights
        pooled = w[0] * total + w[1] * mean + w[2] * peak
        return self.head(torch.cat([pooled, global_block], dim=1))


@dataclass(frozen=True)
class TransformerDims:
    token_in: int = ENCODED_TOKEN_WIDTH
    d_model: int = 512
    heads: int = 8
    n_blocks: int = 2
    ff_dim: int = 2048
    max_positions: int = MAX_SEQUENCE_LAYERS + 1
    dropout: float = 0.1


class SequenceRegressor(nn.Module):
    """Encoder-only transformer over per-layer tokens with a learned
    summary token at slot 0 and learnable positional encodings.

    Padded positions are excluded from attention via the key padding mask;
    the summary token's output feeds the linear head.
    """

    kind = "transformer"

    def __init__(self, dims: TransformerDims = TransformerDims()):
        super().__init__()
        self.dims = dims
        self.project = nn.Linear(dims.token_in, dims.d_model)
        self.cls_embedding = nn.Parameter(torch.zeros(1, 1, dims.d_model))
        self.positional = nn.Parameter(torch.zeros(dims.max_positions, dims.d_model))
        nn.init.normal_(self.cls_embedding, std=0.02)
        nn.init.normal_(self.positional, std=0.02)
        layer = nn.TransformerEncoderLayer(
            d_model=dims.d_model,
            nhead=dims.heads,
            dim_feedforward=dims.ff_dim,
            dropout=dims.dropout,
            batch_first=True,
        )
        self.encoder = nn.TransformerEncoder(layer, num_layers=dims.n_blocks, enable_nested_tensor=False)
        self.head = nn.Linear(dims.d_model, N_TARGETS)

    def forward(self, tokens: Tensor, mask: Tensor) -> Tensor:
        """tokens: (B, T, token_in) with slot 0 reserved; mask: (B, T) bool,
        True at valid positions.  T may be any length up to max_positions."""
        b, t, _ = tokens.shape
        x = self.project(tokens)
        x = torch.cat([self.cls_embedding.expand(b, 1, -1), x[:, 1:]], dim=1)
        x = x + self.positional[:t].unsqueeze(0)
        out = self.encoder(x, src_key_padding_mask=~mask)
        return self.head(out[:, 0])


@dataclass(frozen=True)
class MlpDims:
    numeric_in: int = 5
    n_strategies: int = 2
    n_io: int = 2
    n_parts: int = len(DEFAULT_PART_VOCAB)
    embedding_dim: int = 4
    hidden: int = 128


class _TabularNet(nn.Module):
    """Single-target tabular regressor: embedded categorical codes
    concatenated with a dense block over the numeric averages."""

    def __init__(self, dims: MlpDims):
        super().__init__()
        self.strategy_emb = nn.Embedding(dims.n_strategies, dims.embedding_dim)
        self.io_emb = nn.Embedding(dims.n_io, dims.embedding_dim)
        self.part_emb = nn.Embedding(dims.n_parts, dims.embedding_dim)
        self.numeric_block = nn.Sequential(
            nn.Linear(dims.numeric_in, dims.hidden),
            nn.ReLU(),
            nn.Linear(dims.hidden, dims.hidden),
            nn.ReLU(),
        )
        self.final = nn.Sequential(
            nn.Linear(dims.hidden + 3 * dims.embedding_dim, dims.hidden),
            nn.ReLU(),
            nn.Linear(dims.hidden, 1),
        )

    def forward(self, numeric: Tensor, codes: Tensor) -> Tensor:
        embedded = torch.cat(
            [
                self.strategy_emb(codes[:, 0]),
                self.io_emb(codes[:, 1]),
                self.part_emb(codes[:, 2]),
            ],
            dim=1,
        )
        h = torch.cat([self.numeric_block(numeric), embedded], dim=1)
        return self.final(h).squeeze(-1)


class TabularEnsemble(nn.Module):
    """One tabular network per regression target."""

    kind = "mlp"

    def __init__(self, dims: MlpDims = MlpDims()):
        super().__init__()
        self.dims = dims
        self.nets = nn.ModuleList(_TabularNet(dims) for _ in range(N_TARGETS))

    def _check_codes(self, codes: Tensor) -> None:
        limits = (self.dims.n_strategies, self.dims.n_io, self.dims.n_parts)
        for column, limit in enumerate(limits):
            peak = int(codes[:, column].max())
            if peak >= limit or int(codes[:, column].min()) < 0:
                raise UnknownCategory(
                    f"ordinal code {peak} out of range for column {column} (table size {limit})"
                )

    def forward_target(self, numeric: Tensor, codes: Tensor, target: int) -> Tensor:
        self._check_codes(codes)
        return self.nets[target](numeric, codes)

    def forward(self, numeric: Tensor, codes: Tensor) -> Tensor:
        self._check_codes(codes)
        return torch.stack([net(numeric, codes) for net in self.nets], dim=1)


def model_config_dict(module: nn.Module) -> dict:
    return asdict(module.dims)


def build_model(kind: str, config: dict) -> nn.Module:
    if kind == "gnn":
        return GraphRegressor(GnnDims(**config))
    if kind == "transformer":
        return SequenceRegressor(TransformerDims(**config))
    if kind == "mlp":
        return TabularEnsemble(MlpDims(**config))
    raise ValueError(f"unknown model kind {kind!r}")
