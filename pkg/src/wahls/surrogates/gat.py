"""Graph attention (v2 scoring) message passing on explicit edge lists.

Attention for node i runs over its in-neighborhood plus itself; scores are
a^T ELU(Q x_i + K x_j) per head, softmax-normalized over the neighborhood,
and messages are attention-weighted linear transforms of the neighbors.
"""

from __future__ import annotations

import torch
from torch import Tensor, nn


def segment_softmax(scores: Tensor, segments: Tensor, n_segments: int) -> Tensor:
    """Softmax over rows of ``scores`` grouped by ``segments`` (per column).

    scores: (E, H); segments: (E,) int64 destination ids; returns (E, H)
    with each (segment, head) slice summing to 1.
    """
    heads = scores.shape[1]
    seg = segments.unsqueeze(1).expand(-1, heads)
    peak = torch.full((n_segments, heads), float("-inf"), dtype=scores.dtype, device=scores.device)
    peak = peak.scatter_reduce(0, seg, scores, reduce="amax", include_self=True)
    shifted = torch.exp(scores - peak.gather(0, seg))
    denom = torch.zeros(n_segments, heads, dtype=scores.dtype, device=scores.device)
    denom = denom.index_add(0, segments, shifted)
    return shifted / denom.gather(0, seg)


class GraphAttentionV2(nn.Module):
    """One multi-head attention convolution over a directed graph.

    ``query_lin`` transforms the aggregating node, ``key_lin`` the neighbor
    being attended to, ``msg_lin`` the message content.  Heads are
    concatenated when ``concat`` is set, averaged otherwise.
    """

    def __init__(self, in_dim: int, head_dim: int, heads: int = 5, concat: bool = True):
        super().__init__()
        self.in_dim = in_dim
        self.head_dim = head_dim
        self.heads = heads
        self.concat = concat
        self.out_dim = head_dim * heads if concat else head_dim
        self.msg_lin = nn.Linear(in_dim, heads * head_dim, bias=False)
        self.query_lin = nn.Linear(in_dim, heads * head_dim, bias=False)
        self.key_lin = nn.Linear(in_dim, heads * head_dim, bias=False)
        self.att = nn.Parameter(torch.empty(heads, head_dim))
        nn.init.xavier_uniform_(self.att)

    def attention(self, x: Tensor, edges: Tensor) -> Tensor:
        """Attention weights per edge, (E, heads); rows with a common
        destination sum to 1 per head."""
        src, dst = edges[0], edges[1]
        n = x.shape[0]
        q = self.query_lin(x).view(n, self.heads, self.head_dim)
        k = self.key_lin(x).view(n, self.heads, self.head_dim)
        hidden = torch.nn.functional.elu(q[dst] + k[src])
        scores = (hidden * self.att).sum(dim=-1)
        return segment_softmax(scores, dst, n)

    def forward(self, x: Tensor, edges: Tensor) -> Tensor:
        src, dst = edges[0], edges[1]
        n = x.shape[0]
        alpha = self.attention(x, edges)
        msg = self.msg_lin(x).view(n, self.heads, self.head_dim)
        weighted = msg[src] * alpha.unsqueeze(-1)
        out = torch.zeros(n, self.heads, self.head_dim, dtype=x.dtype, device=x.device)
        out = out.index_add(0, dst, weighted)
        if self.concat:
            return out.reshape(n, self.heads * self.head_dim)
        return out.mean(dim=1)


class GatBlock(nn.Module):
    """Attention convolution followed by layer norm, ELU, dropout, and a
    residual connection (linearly projected when widths differ)."""

    def __init__(self, in_dim: int, head_dim: int, heads: int = 5, concat: bool = True, dropout: float = 0.1):
        super().__init__()
        self.conv = GraphAttentionV2(in_dim, head_dim, heads=heads, concat=concat)
        self.norm = nn.LayerNorm(self.conv.out_dim)
        self.dropout = nn.Dropout(dropout)
        if in_dim == self.conv.out_dim:
            self.residual = nn.Identity()
        else:
            self.residual = nn.Linear(in_dim, self.conv.out_dim, bias=False)

    @property
    def out_dim(self) -> int:
        return self.conv.out_dim

    def forward(self, x: Tensor, edges: Tensor) -> Tensor:
        h = self.conv(x, edges)
        h = self.norm(h)
        h = torch.nn.functional.elu(h)
        h = self.dropout(h)
        return h + self.residual(x)
