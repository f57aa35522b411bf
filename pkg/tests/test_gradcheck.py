"""Analytic (autograd) parameter gradients of every trainable block must
match central finite differences on tiny float64 instances."""

import numpy as np
import torch

from wahls.surrogates.models import (
    GnnDims,
    GraphRegressor,
    MlpDims,
    SequenceRegressor,
    TabularEnsemble,
    TransformerDims,
)

EPS = 1e-4
REL_TOL = 1e-4
MAX_ENTRIES_PER_TENSOR = 60


def _check_gradients(model, loss_fn, seed=0):
    """Compare d(loss)/d(theta) from autograd against (f(+eps)-f(-eps))/2eps
    for a random subset of entries of every parameter tensor."""
    model.zero_grad()
    loss = loss_fn()
    loss.backward()
    rng = np.random.default_rng(seed)
    checked = 0
    for name, param in model.named_parameters():
        grad = param.grad
        assert grad is not None, f"no gradient reached {name}"
        flat = param.data.view(-1)
        n = flat.numel()
        indices = rng.permutation(n)[: min(n, MAX_ENTRIES_PER_TENSOR)]
        for index in indices:
            index = int(index)
            original = flat[index].item()
            with torch.no_grad():
                flat[index] = original + EPS
                hi = float(loss_fn())
                flat[index] = original - EPS
                lo = float(loss_fn())
                flat[index] = original
            fd = (hi - lo) / (2 * EPS)
            analytic = grad.view(-1)[index].item()
            scale = max(abs(analytic), abs(fd))
            if scale > 1e-6:
                rel = abs(analytic - fd) / scale
                assert rel < REL_TOL, f"{name}[{index}]: analytic {analytic} vs fd {fd} (rel {rel:.2e})"
            else:
                assert abs(analytic - fd) < 1e-7, f"{name}[{index}]: {analytic} vs {fd}"
            checked += 1
    assert checked > 0


def test_gnn_gradients_match_finite_differences():
    torch.manual_seed(0)
    dims = GnnDims(node_in=6, global_dim=4, heads=2, n_blocks=2, hidden_head_dim=3, embed_dim=4, mlp_hidden=6, dropout=0.0)
    model = GraphRegressor(dims).double()
    model.eval()
    rng = np.random.default_rng(0)
    n = 4
    x = torch.as_tensor(rng.normal(size=(n, 6)))
    seq = np.arange(n - 1)
    loops = np.arange(n)
    edges = torch.tensor(np.stack([np.concatenate([seq, loops]), np.concatenate([seq + 1, loops])]))
    ids = torch.zeros(n, dtype=torch.int64)
    blk = torch.as_tensor(rng.normal(size=(1, 4)))
    target = torch.as_tensor(rng.normal(size=(1, 6)))

    def loss_fn():
        return ((model(x, edges, ids, 1, blk) - target) ** 2).mean()

    _check_gradients(model, loss_fn)


def test_transformer_gradients_match_finite_differences():
    torch.manual_seed(1)
    dims = TransformerDims(token_in=5, d_model=8, heads=2, n_blocks=2, ff_dim=12, max_positions=6, dropout=0.0)
    model = SequenceRegressor(dims).double()
    model.eval()
    rng = np.random.default_rng(1)
    tokens = torch.zeros(2, 5, 5, dtype=torch.float64)
    tokens[:, 1:4] = torch.as_tensor(rng.normal(size=(2, 3, 5)))
    mask = torch.zeros(2, 5, dtype=torch.bool)
    mask[:, :4] = True
    target = torch.as_tensor(rng.normal(size=(2, 6)))

    def loss_fn():
        return ((model(tokens, mask) - target) ** 2).mean()

    _check_gradients(model, loss_fn)


def test_mlp_gradients_match_finite_differences():
    torch.manual_seed(2)
    model = TabularEnsemble(MlpDims(hidden=8, embedding_dim=3)).double()
    model.eval()
    rng = np.random.default_rng(2)
    numeric = torch.as_tensor(rng.normal(size=(3, 5)))
    codes = torch.tensor([[0, 0, 0], [1, 1, 1], [1, 0, 1]])
    target = torch.as_tensor(rng.normal(size=(3, 6)))

    def loss_fn():
        return ((model(numeric, codes) - target) ** 2).mean()

    _check_gradients(model, loss_fn)
