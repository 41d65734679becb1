"""GRU encoder-decoder with code attention.

Two forward paths live here.  ``forward_loss`` runs a whole padded batch
with teacher forcing and keeps a :class:`ForwardTrace` for backprop.  The
step-wise functions (``gru_cell``, ``encode``, ``attention_*``,
``context_vector``, ``decoder_step``) compute the same quantities one step at
a time and drive inference.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np
from scipy.special import expit

from .vocab import EOS, PAD

DTYPE = np.float64
INIT_SCALE = 0.08


class ContextMode(str, enum.Enum):
    """How token weights combine with encoder states in the context vector."""

    MULTIPLY = "mul"
    ADD = "add"
    BASELINE = "baseline"


@dataclass(frozen=True)
class ModelConfig:
    src_vocab: int
    tgt_vocab: int
    embed: int = 32
    hidden: int = 64
    layers: int = 3
    attn: int = 0  # 0 means "same as hidden"
    mode: ContextMode = ContextMode.MULTIPLY

    @property
    def attn_dim(self) -> int:
        return self.attn or self.hidden


class GruParams(NamedTuple):
    W_z: np.ndarray
    W_r: np.ndarray
    W_h: np.ndarray
    b_z: np.ndarray
    b_r: np.ndarray
    b_h: np.ndarray


GRU_FIELDS = GruParams._fields


class ModelParams:
    """All learnable tensors, stored by name in a fixed order."""

    def __init__(self, config: ModelConfig, tensors: dict[str, np.ndarray]):
        self.config = config
        self.tensors = tensors
        expected = param_shapes(config)
        if list(tensors) != list(expected):
            raise ValueError("tensor names do not match the model configuration")
        for name, shape in expected.items():
            if tensors[name].shape != shape:
                raise ValueError(f"{name}: expected shape {shape}, got {tensors[name].shape}")

    def __getitem__(self, name: str) -> np.ndarray:
        return self.tensors[name]

    def enc(self, layer: int) -> GruParams:
        return GruParams(*(self.tensors[f"enc{layer}.{f}"] for f in GRU_FIELDS))

    def dec(self, layer: int) -> GruParams:
        return GruParams(*(self.tensors[f"dec{layer}.{f}"] for f in GRU_FIELDS))

    def copy(self) -> "ModelParams":
        return ModelParams(self.config, {k: v.copy() for k, v in self.tensors.items()})

    def with_mode(self, mode: ContextMode) -> "ModelParams":
        cfg = ModelConfig(**{**self.config.__dict__, "mode": ContextMode(mode)})
        return ModelParams(cfg, self.tensors)


def param_shapes(cfg: ModelConfig) -> dict[str, tuple[int, ...]]:
    H, E, A = cfg.hidden, cfg.embed, cfg.attn_dim
    shapes: dict[str, tuple[int, ...]] = {
        "E_src": (cfg.src_vocab, E),
        "E_tgt": (cfg.tgt_vocab, E),
    }
    for side in ("enc", "dec"):
        for layer in range(cfg.layers):
            n_in = E if layer == 0 else H
            if side == "dec" and layer == cfg.layers - 1:
                n_in += H  # context vector joins the top decoder layer
            for g in "zrh":
                shapes[f"{side}{layer}.W_{g}"] = (H, H + n_in)
            for g in "zrh":
                shapes[f"{side}{layer}.b_{g}"] = (H,)
    shapes.update({
        "F": (cfg.src_vocab, H),
        "W_d": (A, H),
        "W_e": (A, H),
        "v": (A,),
        "W_o": (cfg.tgt_vocab, H),
        "b_o": (cfg.tgt_vocab,),
    })
    return shapes


def init_params(cfg: ModelConfig, rng: np.random.Generator) -> ModelParams:
    """Uniform(-0.08, 0.08) weights, zero biases.

    Token weights start at the identity of the combination operator (ones
    for multiply, zeros for add) so training starts from the plain
    attention model.
    """
    tensors = {}
    for name, shape in param_shapes(cfg).items():
        base = name.rsplit(".", 1)[-1]
        if base.startswith("b_"):
            tensors[name] = np.zeros(shape, dtype=DTYPE)
        elif name == "F":
            fill = 0.0 if cfg.mode is ContextMode.ADD else 1.0
            tensors[name] = np.full(shape, fill, dtype=DTYPE)
        else:
            tensors[name] = rng.uniform(-INIT_SCALE, INIT_SCALE, size=shape).astype(DTYPE)
    return ModelParams(cfg, tensors)


# ---------------------------------------------------------------------------
# step-wise path


def _check_finite(*arrays: np.ndarray) -> None:
    for a in arrays:
        if not np.all(np.isfinite(a)):
            raise FloatingPointError("non-finite value in GRU input")


def gru_cell(p: GruParams, h_prev: np.ndarray, x: np.ndarray) -> np.ndarray:
    """One GRU update; works on single vectors or on a leading batch axis."""
    _check_finite(h_prev, x)
    hx = np.concatenate([h_prev, x], axis=-1)
    z = expit(hx @ p.W_z.T + p.b_z)
    r = expit(hx @ p.W_r.T + p.b_r)
    h_tilde = np.tanh(np.concatenate([r * h_prev, x], axis=-1) @ p.W_h.T + p.b_h)
    return (1.0 - z) * h_prev + z * h_tilde


class Encoding(NamedTuple):
    states: np.ndarray  # (T, H) top-layer state per position
    weights: np.ndarray  # (T, H) token weight per position
    final: tuple[np.ndarray, ...]  # last state of every layer


def encode(params: ModelParams, src_ids: Sequence[int], token_idx: Sequence[int]) -> Encoding:
    src_ids = np.asarray(src_ids, dtype=np.int64)
    token_idx = np.asarray(token_idx, dtype=np.int64)
    if src_ids.ndim != 1 or src_ids.shape != token_idx.shape or len(src_ids) == 0:
        raise ValueError("src_ids and token_idx must be equal-length, non-empty sequences")
    H = params.config.hidden
    inputs = params["E_src"][src_ids]
    finals = []
    for layer in range(params.config.layers):
        p = params.enc(layer)
        h = np.zeros(H, dtype=DTYPE)
        outs = []
        for x in inputs:
            h = gru_cell(p, h, x)
            outs.append(h)
        inputs = np.stack(outs)
        finals.append(h)
    return Encoding(inputs, params["F"][token_idx], tuple(finals))


def attention_scores(params: ModelParams, d_top_prev: np.ndarray, states: np.ndarray,
                     mask: np.ndarray | None = None) -> np.ndarray:
    """Additive score of every encoder position against the previous top decoder state.

    Broadcasts: ``d_top_prev`` (..., H) against ``states`` (..., T, H).
    Masked-out positions score ``-inf``.
    """
    query = d_top_prev @ params["W_d"].T
    keys = states @ params["W_e"].T
    s = np.tanh(keys + query[..., None, :]) @ params["v"]
    if mask is not None:
        s = np.where(mask, s, -np.inf)
    return s


def attention_weights(scores: np.ndarray) -> np.ndarray:
    shifted = scores - np.max(scores, axis=-1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=-1, keepdims=True)


def combine(weights: np.ndarray, states: np.ndarray, mode: ContextMode) -> np.ndarray:
    mode = ContextMode(mode)
    if mode is ContextMode.MULTIPLY:
        return weights * states
    if mode is ContextMode.ADD:
        return weights + states
    return states


def context_vector(alpha: np.ndarray, weights: np.ndarray, states: np.ndarray,
                   mode: ContextMode) -> np.ndarray:
    terms = combine(weights, states, mode)
    return np.einsum("...t,...th->...h", alpha, terms)


def decoder_step(params: ModelParams, dec_state: Sequence[np.ndarray], y_prev,
                 c_t: np.ndarray) -> tuple[np.ndarray, tuple[np.ndarray, ...]]:
    """Advance every decoder layer by one token.

    ``dec_state`` holds one vector per layer (optionally batched); the
    context vector is concatenated to the input of the top layer only.
    """
    x = params["E_tgt"][np.asarray(y_prev)]
    new_state = []
    top = params.config.layers - 1
    for layer, h_prev in enumerate(dec_state):
        if layer == top:
            x = np.concatenate([x, c_t], axis=-1)
        x = gru_cell(params.dec(layer), h_prev, x)
        new_state.append(x)
    logits = x @ params["W_o"].T + params["b_o"]
    return logits, tuple(new_state)


# ---------------------------------------------------------------------------
# batched training path


@dataclass
class Batch:
    src: np.ndarray  # (B, T) ids, PAD on the right
    token_idx: np.ndarray  # (B, T)
    tgt: np.ndarray  # (B, K + 1): GO, comment, EOS, PAD...

    @classmethod
    def from_examples(cls, examples) -> "Batch":
        src = np.array([e.src_ids for e in examples], dtype=np.int64)
        idx = np.array([e.token_idx for e in examples], dtype=np.int64)
        tgt = np.array([e.tgt_ids for e in examples], dtype=np.int64)
        return cls(src, idx, tgt).trimmed()

    def trimmed(self) -> "Batch":
        """Drop trailing columns that are padding in every row; the loss is unchanged."""
        t = int(np.max(np.nonzero((self.src != PAD).any(axis=0))[0])) + 1
        k = int(np.max(np.nonzero((self.tgt != PAD).any(axis=0))[0])) + 1
        return Batch(self.src[:, :t], self.token_idx[:, :t], self.tgt[:, :max(k, 2)])


@dataclass
class GruSeqCache:
    x: np.ndarray  # (B, T, I)
    h_prev: np.ndarray  # (B, T, H)
    z: np.ndarray
    r: np.ndarray
    h_tilde: np.ndarray
    mask: np.ndarray | None  # (B, T, 1) bool


@dataclass
class ForwardTrace:
    """Everything backprop needs from one ``forward_loss`` call."""

    batch: Batch
    mode: ContextMode
    loss: float
    n_tokens: int
    src_mask: np.ndarray  # (B, T) bool
    tgt_mask: np.ndarray  # (B, K) bool
    enc: list[GruSeqCache]
    states: np.ndarray  # (B, T, H)
    weights: np.ndarray  # (B, T, H)
    terms: np.ndarray  # (B, T, H) combined values the context averages
    keys: np.ndarray  # (B, T, A)
    dec_lower: list[GruSeqCache]
    below: np.ndarray  # (B, K, D) input of the top decoder layer besides the context
    top: GruSeqCache  # x holds [below, context] per step
    top_in: np.ndarray  # (B, K, H) previous top state (attention query)
    att_u: np.ndarray  # (B, K, T, A) tanh activations of the score network
    alpha: np.ndarray  # (B, K, T)
    top_out: np.ndarray  # (B, K, H)
    probs: np.ndarray  # (B, K, V)
    extras: dict = field(default_factory=dict)


def _split(W: np.ndarray, H: int):
    return W[:, :H], W[:, H:]


def gru_seq_forward(p: GruParams, X: np.ndarray, h0: np.ndarray,
                    mask: np.ndarray | None = None) -> tuple[np.ndarray, GruSeqCache]:
    """Run one GRU layer over (B, T, I) inputs; masked steps carry the state."""
    B, T, _ = X.shape
    H = h0.shape[-1]
    Uz, Wzx = _split(p.W_z, H)
    Ur, Wrx = _split(p.W_r, H)
    Uh, Whx = _split(p.W_h, H)
    Uzr = np.concatenate([Uz, Ur], axis=0)
    xz = X @ Wzx.T + p.b_z
    xr = X @ Wrx.T + p.b_r
    xh = X @ Whx.T + p.b_h

    out = np.empty((B, T, H), dtype=DTYPE)
    hp_all = np.empty_like(out)
    z_all = np.empty_like(out)
    r_all = np.empty_like(out)
    ht_all = np.empty_like(out)
    h = h0
    for t in range(T):
        gates = h @ Uzr.T
        z = expit(gates[:, :H] + xz[:, t])
        r = expit(gates[:, H:] + xr[:, t])
        h_tilde = np.tanh((r * h) @ Uh.T + xh[:, t])
        h_new = (1.0 - z) * h + z * h_tilde
        hp_all[:, t], z_all[:, t], r_all[:, t], ht_all[:, t] = h, z, r, h_tilde
        if mask is not None:
            h_new = np.where(mask[:, t], h_new, h)
        out[:, t] = h_new
        h = h_new
    return out, GruSeqCache(X, hp_all, z_all, r_all, ht_all, mask)


def forward_loss(params: ModelParams, batch: Batch,
                 mode: ContextMode | None = None) -> tuple[float, ForwardTrace]:
    """Masked mean cross-entropy of the gold comment under teacher forcing."""
    cfg = params.config
    mode = ContextMode(mode or cfg.mode)
    H, L = cfg.hidden, cfg.layers
    src, tgt = batch.src, batch.tgt
    B, T = src.shape
    src_mask = src != PAD
    y_in, gold = tgt[:, :-1], tgt[:, 1:]
    # gold positions count up to and including the first EOS; ids after it are ignored
    is_eos = gold == EOS
    tgt_mask = (np.cumsum(is_eos, axis=1) - is_eos == 0) & (gold != PAD)
    n_tokens = int(tgt_mask.sum())
    if n_tokens == 0:
        raise ValueError("batch has no non-padding target tokens")
    if not src_mask[:, 0].all():
        raise ValueError("every example needs at least one source token")
    K = y_in.shape[1]

    # encoder
    inputs = params["E_src"][src]
    zeros = np.zeros((B, H), dtype=DTYPE)
    enc_caches, finals = [], []
    m3 = src_mask[:, :, None]
    for layer in range(L):
        inputs, cache = gru_seq_forward(params.enc(layer), inputs, zeros, m3)
        enc_caches.append(cache)
        finals.append(inputs[:, -1])
    states = inputs
    weights = params["F"][batch.token_idx]
    terms = combine(weights, states, mode)
    keys = states @ params["W_e"].T

    # lower decoder layers do not see the context and run as whole sequences
    below = params["E_tgt"][y_in]
    lower_caches = []
    for layer in range(L - 1):
        below, cache = gru_seq_forward(params.dec(layer), below, finals[layer])
        lower_caches.append(cache)

    # top decoder layer interleaved with attention
    p = params.dec(L - 1)
    D = below.shape[-1]
    Uz, Wzx = _split(p.W_z, H)
    Ur, Wrx = _split(p.W_r, H)
    Uh, Whx = _split(p.W_h, H)
    Uzr = np.concatenate([Uz, Ur], axis=0)
    Wx_below = np.concatenate([Wzx[:, :D], Wrx[:, :D], Whx[:, :D]], axis=0)
    Wx_ctx = np.concatenate([Wzx[:, D:], Wrx[:, D:], Whx[:, D:]], axis=0)
    b_all = np.concatenate([p.b_z, p.b_r, p.b_h])
    below_proj = below @ Wx_below.T + b_all
    W_d, v = params["W_d"], params["v"]
    A = W_d.shape[0]

    x_top = np.empty((B, K, D + H), dtype=DTYPE)
    hp_all = np.empty((B, K, H), dtype=DTYPE)
    z_all, r_all, ht_all, out = (np.empty_like(hp_all) for _ in range(4))
    att_u = np.empty((B, K, T, A), dtype=DTYPE)
    alpha = np.empty((B, K, T), dtype=DTYPE)
    h = finals[L - 1]
    for t in range(K):
        u = np.tanh(keys + (h @ W_d.T)[:, None, :])
        s = np.where(src_mask, u @ v, -np.inf)
        a = attention_weights(s)
        c = np.einsum("bt,bth->bh", a, terms)
        proj = below_proj[:, t] + c @ Wx_ctx.T
        gates = h @ Uzr.T
        z = expit(gates[:, :H] + proj[:, :H])
        r = expit(gates[:, H:] + proj[:, H:2 * H])
        h_tilde = np.tanh((r * h) @ Uh.T + proj[:, 2 * H:])
        h_new = (1.0 - z) * h + z * h_tilde
        x_top[:, t, :D], x_top[:, t, D:] = below[:, t], c
        hp_all[:, t], z_all[:, t], r_all[:, t], ht_all[:, t] = h, z, r, h_tilde
        att_u[:, t], alpha[:, t], out[:, t] = u, a, h_new
        h = h_new

    logits = out @ params["W_o"].T + params["b_o"]
    logits -= logits.max(axis=-1, keepdims=True)
    log_z = np.log(np.exp(logits).sum(axis=-1, keepdims=True))
    logp = logits - log_z
    gold_logp = np.take_along_axis(logp, gold[..., None], axis=-1)[..., 0]
    loss = float(-np.sum(np.where(tgt_mask, gold_logp, 0.0)) / n_tokens)

    trace = ForwardTrace(
        batch=batch, mode=mode, loss=loss, n_tokens=n_tokens,
        src_mask=src_mask, tgt_mask=tgt_mask, enc=enc_caches, states=states,
        weights=weights, terms=terms, keys=keys, dec_lower=lower_caches, below=below,
        top=GruSeqCache(x_top, hp_all, z_all, r_all, ht_all, None),
        top_in=hp_all, att_u=att_u, alpha=alpha, top_out=out, probs=np.exp(logp),
    )
    return loss, trace
