"""Backprop, SGD with a patience-based learning-rate decay, bucketed training and decoding."""

from __future__ import annotations

import csv
import dataclasses
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Sequence

import numpy as np

from .model import (
    DTYPE, Batch, ContextMode, ForwardTrace, GruParams, GruSeqCache, ModelConfig,
    ModelParams, _split, attention_scores, attention_weights, context_vector,
    decoder_step, encode, forward_loss, init_params,
)
from .vocab import DEFAULT_BUCKETS, EOS, GO, PAD, Bucket, ConfigError, Example, make_buckets

logger = logging.getLogger(__name__)

Grads = dict[str, np.ndarray]


# ---------------------------------------------------------------------------
# gradients


def _gru_seq_backward(p: GruParams, cache: GruSeqCache, d_out: np.ndarray,
                      d_last: np.ndarray | None, grads: Grads, prefix: str):
    """Backprop through one GRU layer run by ``gru_seq_forward``.

    Returns the gradients of the layer inputs (B, T, I) and initial state.
    """
    B, T, H = d_out.shape
    Uz, Wzx = _split(p.W_z, H)
    Ur, Wrx = _split(p.W_r, H)
    Uh, Whx = _split(p.W_h, H)
    da_z = np.empty_like(d_out)
    da_r = np.empty_like(d_out)
    da_h = np.empty_like(d_out)
    dh = np.zeros((B, H), dtype=DTYPE) if d_last is None else d_last.copy()
    for t in reversed(range(T)):
        dh = dh + d_out[:, t]
        if cache.mask is not None:
            m = cache.mask[:, t]
            d_new = np.where(m, dh, 0.0)
            d_carry = np.where(m, 0.0, dh)
        else:
            d_new, d_carry = dh, 0.0
        z, r, ht, hp = cache.z[:, t], cache.r[:, t], cache.h_tilde[:, t], cache.h_prev[:, t]
        dz = d_new * (ht - hp)
        dhp = d_new * (1.0 - z)
        dah = d_new * z * (1.0 - ht * ht)
        drh = dah @ Uh
        dr = drh * hp
        dhp += drh * r
        daz = dz * z * (1.0 - z)
        dar = dr * r * (1.0 - r)
        dhp += daz @ Uz + dar @ Ur
        da_z[:, t], da_r[:, t], da_h[:, t] = daz, dar, dah
        dh = dhp + d_carry

    flat = lambda a: a.reshape(B * T, -1)  # noqa: E731
    hp, x = flat(cache.h_prev), flat(cache.x)
    rh = flat(cache.r * cache.h_prev)
    for g, da, left in (("z", da_z, hp), ("r", da_r, hp), ("h", da_h, rh)):
        da = flat(da)
        grads[f"{prefix}.W_{g}"] += np.concatenate([da.T @ left, da.T @ x], axis=1)
        grads[f"{prefix}.b_{g}"] += da.sum(axis=0)
    dx = da_z @ Wzx + da_r @ Wrx + da_h @ Whx
    return dx, dh


def zero_grads(params: ModelParams) -> Grads:
    return {k: np.zeros_like(v) for k, v in params.tensors.items()}


def backward(trace: ForwardTrace, params: ModelParams) -> Grads:
    """Exact gradients of the traced mean cross-entropy for every tensor."""
    cfg = params.config
    H, L = cfg.hidden, cfg.layers
    grads = zero_grads(params)
    batch = trace.batch
    B, K, V = trace.probs.shape
    gold = batch.tgt[:, 1:]

    # output projection
    d_logits = trace.probs.copy()
    np.put_along_axis(d_logits, gold[..., None],
                      np.take_along_axis(d_logits, gold[..., None], axis=-1) - 1.0, axis=-1)
    d_logits *= trace.tgt_mask[..., None] / trace.n_tokens
    flat_dl = d_logits.reshape(B * K, V)
    grads["W_o"] += flat_dl.T @ trace.top_out.reshape(B * K, H)
    grads["b_o"] += flat_dl.sum(axis=0)
    d_top_out = d_logits @ params["W_o"]

    # top decoder layer with attention, step by step
    p = params.dec(L - 1)
    top = trace.top
    D = trace.below.shape[-1]
    Uz, Wzx = _split(p.W_z, H)
    Ur, Wrx = _split(p.W_r, H)
    Uh, Whx = _split(p.W_h, H)
    W_d, v = params["W_d"], params["v"]
    da_z = np.empty((B, K, H), dtype=DTYPE)
    da_r = np.empty_like(da_z)
    da_h = np.empty_like(da_z)
    d_below = np.empty((B, K, D), dtype=DTYPE)
    d_terms = np.zeros_like(trace.terms)
    d_keys = np.zeros_like(trace.keys)
    dh = np.zeros((B, H), dtype=DTYPE)
    for t in reversed(range(K)):
        dh = dh + d_top_out[:, t]
        z, r, ht, hp = top.z[:, t], top.r[:, t], top.h_tilde[:, t], top.h_prev[:, t]
        dz = dh * (ht - hp)
        dhp = dh * (1.0 - z)
        dah = dh * z * (1.0 - ht * ht)
        drh = dah @ Uh
        dhp += drh * r
        daz = dz * z * (1.0 - z)
        dar = drh * hp * r * (1.0 - r)
        dhp += daz @ Uz + dar @ Ur
        da_z[:, t], da_r[:, t], da_h[:, t] = daz, dar, dah
        dx = daz @ Wzx + dar @ Wrx + dah @ Whx
        d_below[:, t] = dx[:, :D]
        dc = dx[:, D:]

        a = trace.alpha[:, t]
        u = trace.att_u[:, t]
        d_alpha = np.einsum("bh,bth->bt", dc, trace.terms)
        d_terms += a[:, :, None] * dc[:, None, :]
        ds = a * (d_alpha - np.sum(a * d_alpha, axis=1, keepdims=True))
        grads["v"] += np.einsum("bt,bta->a", ds, u)
        d_pre = ds[:, :, None] * v * (1.0 - u * u)
        d_keys += d_pre
        d_query = d_pre.sum(axis=1)
        grads["W_d"] += d_query.T @ hp
        dhp += d_query @ W_d
        dh = dhp
    d_final_top = dh

    flat = lambda a: a.reshape(B * K, -1)  # noqa: E731
    x_top, hp_top = flat(top.x), flat(top.h_prev)
    rh = flat(top.r * top.h_prev)
    for g, da, left in (("z", da_z, hp_top), ("r", da_r, hp_top), ("h", da_h, rh)):
        da = flat(da)
        grads[f"dec{L - 1}.W_{g}"] += np.concatenate([da.T @ left, da.T @ x_top], axis=1)
        grads[f"dec{L - 1}.b_{g}"] += da.sum(axis=0)

    # lower decoder layers
    d_finals: list[np.ndarray] = [None] * L  # type: ignore[list-item]
    d_finals[L - 1] = d_final_top
    d_in = d_below
    for layer in reversed(range(L - 1)):
        d_in, d_finals[layer] = _gru_seq_backward(
            params.dec(layer), trace.dec_lower[layer], d_in, None, grads, f"dec{layer}")
    np.add.at(grads["E_tgt"], batch.tgt[:, :-1], d_in)

    # context terms and attention keys back to encoder states and token weights
    T = trace.states.shape[1]
    A = d_keys.shape[-1]
    grads["W_e"] += d_keys.reshape(B * T, A).T @ trace.states.reshape(B * T, H)
    d_states = d_keys @ params["W_e"]
    if trace.mode is ContextMode.MULTIPLY:
        d_states += d_terms * trace.weights
        d_weights = d_terms * trace.states
    elif trace.mode is ContextMode.ADD:
        d_states += d_terms
        d_weights = d_terms
    else:
        d_states += d_terms
        d_weights = None
    if d_weights is not None:
        np.add.at(grads["F"], batch.token_idx, d_weights)

    # encoder, top layer first; each layer's last state seeded the decoder
    d_in = d_states
    for layer in reversed(range(L)):
        d_in, _ = _gru_seq_backward(
            params.enc(layer), trace.enc[layer], d_in, d_finals[layer], grads, f"enc{layer}")
    np.add.at(grads["E_src"], batch.src, d_in)
    return grads


def global_norm(grads: Grads) -> float:
    return math.sqrt(sum(float(np.sum(g * g)) for g in grads.values()))


# ---------------------------------------------------------------------------
# optimisation


@dataclass
class LrState:
    current_lr: float
    best_loss: float = math.inf
    iters_since_improvement: int = 0
    decay_events: int = 0


def adapt_lr(state: LrState, new_loss: float, config: "TrainingConfig") -> LrState:
    """Multiply the rate by ``decay`` once ``patience`` steps pass without a new best loss."""
    if new_loss < state.best_loss:
        return dataclasses.replace(state, best_loss=new_loss, iters_since_improvement=0)
    stale = state.iters_since_improvement + 1
    if stale >= config.patience:
        return dataclasses.replace(state, current_lr=state.current_lr * config.decay,
                                   iters_since_improvement=0,
                                   decay_events=state.decay_events + 1)
    return dataclasses.replace(state, iters_since_improvement=stale)


def sgd_step(params: ModelParams, grads: Grads, lr: float, clip: float = 5.0) -> ModelParams:
    """Clip the global gradient norm to ``clip`` and take one descent step in place."""
    norm = global_norm(grads)
    if not math.isfinite(norm):
        logger.warning("non-finite gradient norm; update skipped")
        return params
    scale = clip / norm if clip and norm > clip else 1.0
    for name, g in grads.items():
        params.tensors[name] -= (lr * scale) * g
    return params


# ---------------------------------------------------------------------------
# configuration


PRESETS = {
    "desk": {"embed": 32, "hidden": 64},
    "paper": {"embed": 512, "hidden": 1024},
}


@dataclass
class TrainingConfig:
    lr0: float = 0.5
    decay: float = 0.99
    patience: int = 3000
    buckets: tuple[tuple[int, int], ...] = DEFAULT_BUCKETS
    embed: int = 32
    hidden: int = 64
    layers: int = 3
    attn: int = 0
    batch: int = 32
    max_iters: int = 10_000
    beam: int = 5
    seed: int = 0
    clip: float = 5.0
    vocab_cap: int = 50_000
    mode: ContextMode = ContextMode.MULTIPLY
    ident: bool = True
    checkpoint_every: int = 0
    log_every: int = 1

    def __post_init__(self):
        self.mode = ContextMode(self.mode)
        self.buckets = tuple(tuple(int(x) for x in b) for b in self.buckets)
        if not 0 < self.decay < 1:
            raise ConfigError(f"decay must lie in (0, 1), got {self.decay}")
        if self.patience < 1:
            raise ConfigError("patience must be at least 1")
        if self.beam < 1:
            raise ConfigError("beam width must be at least 1")
        if self.batch < 1 or self.max_iters < 0 or self.layers < 1:
            raise ConfigError("batch and layers must be positive, max_iters non-negative")
        make_buckets(self.buckets)

    @classmethod
    def preset(cls, name: str, **overrides) -> "TrainingConfig":
        if name not in PRESETS:
            raise ConfigError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}")
        return cls(**{**PRESETS[name], **overrides})

    @property
    def bucket_list(self) -> list[Bucket]:
        return make_buckets(self.buckets)

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["mode"] = self.mode.value
        d["buckets"] = [list(b) for b in self.buckets]
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "TrainingConfig":
        return cls(**d)


def _parse_value(name: str, kind, raw: str):
    raw = raw.strip()
    if name == "buckets":
        pairs = []
        for part in raw.replace(" ", "").split(","):
            s, _, t = part.strip("()").partition("x")
            pairs.append((int(s), int(t)))
        return tuple(pairs)
    if kind in ("bool", bool):
        if raw.lower() in ("1", "true", "yes", "on"):
            return True
        if raw.lower() in ("0", "false", "no", "off"):
            return False
        raise ValueError(raw)
    if kind in ("int", int):
        return int(raw)
    if kind in ("float", float):
        return float(raw)
    return raw


def parse_config(text: str, base: TrainingConfig | None = None) -> TrainingConfig:
    """Read ``key = value`` lines; ``#`` starts a comment.

    ``preset = desk|paper`` sets the model dimensions before other keys
    apply.  Buckets are written ``40x15, 55x20``.
    """
    fields = {f.name: f.type for f in dataclasses.fields(TrainingConfig)}
    values: dict = {}
    preset = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, val = line.partition("=")
        key = key.strip()
        if not sep:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        if key == "preset":
            preset = val.strip()
            continue
        if key not in fields:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        try:
            values[key] = _parse_value(key, fields[key], val)
        except ValueError:
            raise ConfigError(f"line {lineno}: bad value for {key!r}: {val.strip()!r}") from None
    start = dataclasses.asdict(base) if base else {}
    if preset:
        start.update(PRESETS.get(preset) or _unknown_preset(preset))
    start.update(values)
    return TrainingConfig(**start)


def _unknown_preset(name):
    raise ConfigError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}")


ABLATION_ROWS = {
    1: {"ident": False, "token": False, "mode": ContextMode.BASELINE},
    2: {"ident": True, "token": False, "mode": ContextMode.BASELINE},
    3: {"ident": True, "token": True, "mode": ContextMode.ADD},
    4: {"ident": True, "token": True, "mode": ContextMode.MULTIPLY},
}


def build_ablation_config(row: int) -> dict:
    """Feature flags for one row of the code-attention ablation table."""
    if row not in ABLATION_ROWS:
        raise ConfigError(f"ablation row must be 1-4, got {row}")
    return dict(ABLATION_ROWS[row])


def apply_ablation(config: TrainingConfig, row: int) -> TrainingConfig:
    flags = build_ablation_config(row)
    return dataclasses.replace(config, ident=flags["ident"], mode=flags["mode"])


# ---------------------------------------------------------------------------
# training loop


@dataclass
class TrainState:
    params: ModelParams
    lr: LrState
    iteration: int
    rng: np.random.Generator
    history: list[tuple[int, str, float, float]] = field(default_factory=list)


def group_by_bucket(examples: Iterable[Example]) -> dict[Bucket, list[Example]]:
    groups: dict[Bucket, list[Example]] = {}
    for ex in examples:
        groups.setdefault(ex.bucket, []).append(ex)
    return dict(sorted(groups.items()))


def sample_batch(groups: dict[Bucket, list[Example]], size: int,
                 rng: np.random.Generator) -> tuple[Bucket, list[Example]]:
    """Pick a bucket in proportion to its population, then a batch from it."""
    buckets = list(groups)
    counts = np.array([len(groups[b]) for b in buckets], dtype=float)
    bucket = buckets[int(rng.choice(len(buckets), p=counts / counts.sum()))]
    pool = groups[bucket]
    idx = rng.choice(len(pool), size=size, replace=len(pool) < size)
    return bucket, [pool[i] for i in idx]


def train_loop(config: TrainingConfig, examples: Sequence[Example], src_vocab_size: int,
               tgt_vocab_size: int, state: TrainState | None = None,
               log_path: str | Path | None = None,
               on_checkpoint: Callable[[TrainState], None] | None = None,
               until: int | None = None) -> TrainState:
    """Run SGD until ``config.max_iters`` (or ``until``) iterations are done.

    Passing a ``state`` resumes from it.  Every iteration appends
    ``(iteration, bucket, loss, lr)`` to the history and to ``log_path``.
    """
    if not examples:
        raise ConfigError("training set is empty")
    groups = group_by_bucket(examples)
    if state is None:
        rng = np.random.default_rng(config.seed)
        cfg = ModelConfig(src_vocab_size, tgt_vocab_size, config.embed, config.hidden,
                          config.layers, config.attn, config.mode)
        state = TrainState(init_params(cfg, rng), LrState(config.lr0), 0, rng)
    stop = config.max_iters if until is None else min(until, config.max_iters)

    log_file = None
    if log_path is not None:
        new = not Path(log_path).exists() or state.iteration == 0
        log_file = open(log_path, "w" if new else "a", newline="")
        writer = csv.writer(log_file)
        if new:
            writer.writerow(["iter", "bucket", "loss", "lr"])
    try:
        while state.iteration < stop:
            bucket, chosen = sample_batch(groups, config.batch, state.rng)
            loss, trace = forward_loss(state.params, Batch.from_examples(chosen))
            grads = backward(trace, state.params)
            lr_used = state.lr.current_lr
            state.lr = adapt_lr(state.lr, loss, config)
            sgd_step(state.params, grads, lr_used, config.clip)
            state.iteration += 1
            tag = f"{bucket.src_cap}x{bucket.tgt_cap}"
            state.history.append((state.iteration, tag, loss, lr_used))
            if log_file is not None:
                writer.writerow([state.iteration, tag, repr(loss), repr(lr_used)])
            if config.log_every and state.iteration % max(config.log_every, 1) == 0:
                logger.debug("iter %d bucket %s loss %.5f lr %.5f",
                             state.iteration, tag, loss, lr_used)
            if (on_checkpoint and config.checkpoint_every
                    and state.iteration % config.checkpoint_every == 0):
                on_checkpoint(state)
    finally:
        if log_file is not None:
            log_file.close()
    return state


# ---------------------------------------------------------------------------
# decoding


StepFn = Callable[[object, np.ndarray], tuple[np.ndarray, object]]


def log_softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=-1, keepdims=True)
    return shifted - np.log(np.exp(shifted).sum(axis=-1, keepdims=True))


@dataclass
class Hypothesis:
    tokens: list[int]
    logprob: float
    state: object = None

    @property
    def finished(self) -> bool:
        return bool(self.tokens) and self.tokens[-1] == EOS


def beam_decode(step: StepFn, init_state, beam: int, max_len: int,
                select_state: Callable[[object, np.ndarray], object]) -> Hypothesis:
    """Generic beam search.

    ``step(states, prev_tokens)`` scores a batch of hypotheses and returns
    (log-probabilities (N, V), new batched state); ``select_state`` gathers
    rows of a batched state.  Hypotheses finish on EOS and compete on total
    log-probability without length normalisation.
    """
    if beam < 1:
        raise ConfigError("beam width must be at least 1")
    alive = [Hypothesis([], 0.0)]
    states = init_state
    finished: list[Hypothesis] = []
    for _ in range(max_len):
        prev = np.array([h.tokens[-1] if h.tokens else GO for h in alive], dtype=np.int64)
        logp, new_states = step(states, prev)
        totals = np.array([h.logprob for h in alive])[:, None] + logp
        flat = totals.ravel()
        order = np.argsort(-flat, kind="stable")[:beam]
        V = logp.shape[1]
        keep_rows, next_alive = [], []
        for k in order:
            row, tok = divmod(int(k), V)
            hyp = Hypothesis(alive[row].tokens + [tok], float(flat[k]))
            if tok == EOS:
                finished.append(hyp)
            else:
                next_alive.append(hyp)
                keep_rows.append(row)
        alive = next_alive
        if not alive:
            break
        if finished and max(h.logprob for h in finished) >= alive[0].logprob:
            # scores only fall as hypotheses grow
            break
        states = select_state(new_states, np.array(keep_rows, dtype=np.int64))
    pool = finished + alive
    best = pool[0]
    for h in pool[1:]:
        if h.logprob > best.logprob:
            best = h
    return best


def _model_stepper(params: ModelParams, src_ids: Sequence[int], token_idx: Sequence[int]):
    enc = encode(params, src_ids, token_idx)
    mode = params.config.mode

    def step(state, prev):
        top = state[-1]
        scores = attention_scores(params, top, enc.states)
        alpha = attention_weights(scores)
        c = context_vector(alpha, enc.weights, enc.states, mode)
        logits, new_state = decoder_step(params, state, prev, c)
        # PAD and GO never occur as gold targets, so they are not generated
        logits[..., [PAD, GO]] = -np.inf
        return log_softmax(logits), new_state

    init = tuple(h[None, :] for h in enc.final)
    return step, init


def _select(state, rows):
    return tuple(h[rows] for h in state)


def beam_search(params: ModelParams, src_ids: Sequence[int], token_idx: Sequence[int],
                beam: int = 5, max_len: int = 15) -> list[int]:
    """Best comment ids for one source sequence, GO/EOS stripped."""
    if beam < 1:
        raise ConfigError("beam width must be at least 1")
    step, init = _model_stepper(params, src_ids, token_idx)
    best = beam_decode(step, init, beam, max_len, _select)
    return [t for t in best.tokens if t != EOS]


def greedy_decode(params: ModelParams, src_ids: Sequence[int], token_idx: Sequence[int],
                  max_len: int = 15) -> list[int]:
    step, state = _model_stepper(params, src_ids, token_idx)
    prev = np.array([GO])
    out = []
    for _ in range(max_len):
        logp, state = step(state, prev)
        tok = int(np.argmax(logp[0]))
        if tok == EOS:
            break
        out.append(tok)
        prev = np.array([tok])
    return out


def exhaustive_best(step: StepFn, init_state, vocab_size: int, max_len: int,
                    select_state) -> Hypothesis:
    """Brute-force argmax over every token sequence of length at most ``max_len``."""
    best = Hypothesis([], -math.inf)
    frontier = [Hypothesis([], 0.0, init_state)]
    for _ in range(max_len):
        nxt = []
        for h in frontier:
            prev = np.array([h.tokens[-1] if h.tokens else GO])
            logp, st = step(h.state, prev)
            for tok in range(vocab_size):
                cand = Hypothesis(h.tokens + [tok], h.logprob + float(logp[0, tok]), st)
                if tok == EOS:
                    if cand.logprob > best.logprob:
                        best = cand
                else:
                    nxt.append(cand)
        frontier = nxt
    for h in frontier:
        if h.logprob > best.logprob:
            best = h
    return best

