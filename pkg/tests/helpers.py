"""Small model and batch builders shared by the tests."""

import numpy as np

from code2comment.model import Batch, ContextMode, ModelConfig, ModelParams, init_params
from code2comment.vocab import EOS, GO, PAD


def tiny_params(mode="mul", embed=4, hidden=6, src_vocab=20, tgt_vocab=20, layers=3,
                seed=0, random_f=True, scale=0.5) -> ModelParams:
    """Random parameters big enough that every gradient path is exercised."""
    rng = np.random.default_rng(seed)
    cfg = ModelConfig(src_vocab, tgt_vocab, embed, hidden, layers, 0, ContextMode(mode))
    params = init_params(cfg, rng)
    for name, arr in params.tensors.items():
        if name == "F" and not random_f:
            continue
        arr[...] = rng.uniform(-scale, scale, size=arr.shape)
    return params


def random_batch(rng, B=3, T=5, K=4, src_vocab=20, tgt_vocab=20, ragged=True) -> Batch:
    """Padded batch; row 0 always uses the full widths so nothing gets trimmed."""
    src = np.zeros((B, T), dtype=np.int64)
    tgt = np.zeros((B, K + 1), dtype=np.int64)
    for b in range(B):
        n_src = T if b == 0 or not ragged else int(rng.integers(1, T + 1))
        n_tgt = K - 1 if b == 0 or not ragged else int(rng.integers(0, K))
        src[b, :n_src] = rng.integers(4, src_vocab, size=n_src)
        words = rng.integers(4, tgt_vocab, size=n_tgt)
        tgt[b, :n_tgt + 2] = [GO, *words, EOS]
    assert (src[:, 0] != PAD).all()
    return Batch(src, src.copy(), tgt)


def finite_difference_errors(params, batch, mode=None, step=1e-5):
    """Per-tensor relative error between backward() and central differences.

    The error of a tensor is ||analytic - numeric|| / max(||analytic||, ||numeric||),
    which stays meaningful for entries whose gradient is close to zero.
    """
    from code2comment.model import forward_loss
    from code2comment.train import backward

    _, trace = forward_loss(params, batch, mode)
    grads = backward(trace, params)
    errors = {}
    for name, arr in params.tensors.items():
        numeric = np.zeros_like(arr)
        flat, nflat = arr.reshape(-1), numeric.reshape(-1)
        for i in range(flat.size):
            old = flat[i]
            flat[i] = old + step
            up = forward_loss(params, batch, mode)[0]
            flat[i] = old - step
            down = forward_loss(params, batch, mode)[0]
            flat[i] = old
            nflat[i] = (up - down) / (2 * step)
        denom = max(np.linalg.norm(grads[name]), np.linalg.norm(numeric))
        errors[name] = 0.0 if denom == 0 else float(np.linalg.norm(grads[name] - numeric) / denom)
    return errors
