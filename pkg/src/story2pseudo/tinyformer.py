"""Desk-scale encoder-decoder transformer for code-to-pseudocode.

Everything runs in float64 numpy with hand-derived backpropagation: the
forward pass is mirrored by an explicit backward pass, and grad_check
verifies the analytic gradients against central finite differences.
Pre-layer-norm residual blocks, fixed sinusoidal positions, shared
source/target embedding tied to the output projection.

Input is processed one sequence pair at a time (no padding in the
batch sense); PAD only appears as a label mask value. All randomness
flows from one PCG64 generator seeded by the config, which makes
training bit-reproducible for a fixed (corpus, config).
"""

from __future__ import annotations

import json
import math
import re
import struct
import time
from collections import Counter
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from . import bleu
from .corpus import ParallelPair

PAD_ID, UNK_ID, BOS_ID, EOS_ID = 0, 1, 2, 3
RESERVED = ("<pad>", "<unk>", "<bos>", "<eos>")

_LN_EPS = 1e-5
_ADAM_B1, _ADAM_B2, _ADAM_EPS = 0.9, 0.999, 1e-8

MODEL_MAGIC = b"S2PTFMR1"
MODEL_FORMAT_VERSION = 1

_TOKEN_RE = re.compile(
    r"[A-Za-z_]\w*|\d+(?:\.\d+)?|[=!<>+\-*/%]=|\*\*|//|->|\S"
)

Params = dict[str, np.ndarray]


class TrainingDiverged(RuntimeError):
    pass


def tokenize(text: str) -> list[str]:
    """Whitespace-and-punctuation split shared by both corpus sides."""
    return _TOKEN_RE.findall(text)


@dataclass(frozen=True)
class Vocab:
    stoi: dict[str, int]
    itos: tuple[str, ...]

    def __len__(self) -> int:
        return len(self.itos)

    def encode(self, tokens: Sequence[str]) -> list[int]:
        return [self.stoi.get(t, UNK_ID) for t in tokens]

    def decode(self, ids: Sequence[int]) -> list[str]:
        return [
            self.itos[i]
            for i in ids
            if i not in (PAD_ID, BOS_ID, EOS_ID) and 0 <= i < len(self.itos)
        ]


@dataclass
class ModelConfig:
    d_model: int = 64
    heads: int = 4
    encoder_layers: int = 2
    decoder_layers: int = 2
    ffn_dim: int = 128
    max_len: int = 64
    dropout: float = 0.0
    seed: int = 13
    epochs: int = 5
    lr: float = 3e-4

    def __post_init__(self):
        for name in ("d_model", "heads", "encoder_layers", "decoder_layers",
                     "ffn_dim", "max_len"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        if self.d_model % self.heads != 0:
            raise ValueError(
                f"d_model ({self.d_model}) must be divisible by heads ({self.heads})"
            )
        if self.dropout != 0.0:
            raise ValueError("dropout is fixed at 0.0 in this implementation")


@dataclass(frozen=True)
class TrainReport:
    epoch_losses: tuple[float, ...]
    final_train_bleu: float
    epochs: int
    seed: int
    wall_time: float


def build_vocab(pairs: Sequence[ParallelPair], min_freq: int = 1) -> Vocab:
    """Frequency-then-lexicographic vocabulary over both corpus sides."""
    if not pairs:
        raise ValueError("empty corpus")
    counts: Counter = Counter()
    for pair in pairs:
        counts.update(tokenize(pair.source))
        counts.update(tokenize(pair.target))
    kept = sorted(
        (t for t, c in counts.items() if c >= min_freq),
        key=lambda t: (-counts[t], t),
    )
    itos = RESERVED + tuple(kept)
    stoi = {t: i for i, t in enumerate(itos)}
    return Vocab(stoi=stoi, itos=itos)


# --- parameters ------------------------------------------------------------


def _attn_param_names(prefix: str) -> list[str]:
    return [f"{prefix}.{w}" for w in ("wq", "wk", "wv", "wo")]


def init_params(
    config: ModelConfig, vocab_size: int, rng: np.random.Generator | None = None
) -> Params:
    """Dense weights uniform in +-1/sqrt(d_model); LN gains 1, biases 0."""
    if rng is None:
        rng = np.random.Generator(np.random.PCG64(config.seed))
    d, f = config.d_model, config.ffn_dim
    bound = 1.0 / math.sqrt(d)

    def mat(*shape):
        return rng.uniform(-bound, bound, size=shape)

    params: Params = {"embed": mat(vocab_size, d)}

    def add_ln(name):
        params[f"{name}.g"] = np.ones(d)
        params[f"{name}.b"] = np.zeros(d)

    def add_attn(prefix):
        for name in _attn_param_names(prefix):
            params[name] = mat(d, d)

    def add_ffn(prefix):
        params[f"{prefix}.w1"] = mat(d, f)
        params[f"{prefix}.b1"] = np.zeros(f)
        params[f"{prefix}.w2"] = mat(f, d)
        params[f"{prefix}.b2"] = np.zeros(d)

    for i in range(config.encoder_layers):
        add_ln(f"enc.{i}.ln1")
        add_attn(f"enc.{i}.attn")
        add_ln(f"enc.{i}.ln2")
        add_ffn(f"enc.{i}.ffn")
    add_ln("enc.lnf")
    for i in range(config.decoder_layers):
        add_ln(f"dec.{i}.ln1")
        add_attn(f"dec.{i}.self")
        add_ln(f"dec.{i}.ln2")
        add_attn(f"dec.{i}.cross")
        add_ln(f"dec.{i}.ln3")
        add_ffn(f"dec.{i}.ffn")
    add_ln("dec.lnf")
    return params


def sinusoid_positions(length: int, d_model: int) -> np.ndarray:
    pos = np.arange(length)[:, None].astype(np.float64)
    dim = np.arange(d_model)[None, :].astype(np.float64)
    angle = pos / np.power(10000.0, (2 * (dim // 2)) / d_model)
    enc = np.empty((length, d_model))
    enc[:, 0::2] = np.sin(angle[:, 0::2])
    enc[:, 1::2] = np.cos(angle[:, 1::2])
    return enc


# --- primitive layers ------------------------------------------------------


def _softmax_rows(x: np.ndarray) -> np.ndarray:
    shifted = x - x.max(axis=-1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=-1, keepdims=True)


def attention(
    queries: np.ndarray,
    keys: np.ndarray,
    values: np.ndarray,
    mask: np.ndarray | None = None,
) -> np.ndarray:
    """Single-head scaled dot-product attention.

    ``mask`` is boolean (query_len, key_len); True blocks a position,
    which receives -inf before the softmax and therefore exactly zero
    weight.
    """
    if queries.ndim != 2 or keys.ndim != 2 or values.ndim != 2:
        raise ValueError("attention expects 2-D matrices")
    if queries.shape[1] != keys.shape[1]:
        raise ValueError(
            f"query/key dims differ: {queries.shape[1]} vs {keys.shape[1]}"
        )
    if keys.shape[0] != values.shape[0]:
        raise ValueError(
            f"key/value lengths differ: {keys.shape[0]} vs {values.shape[0]}"
        )
    scores = queries @ keys.T / math.sqrt(queries.shape[1])
    if mask is not None:
        if mask.shape != scores.shape:
            raise ValueError(
                f"mask shape {mask.shape} does not match scores {scores.shape}"
            )
        scores = np.where(mask, -np.inf, scores)
    return _softmax_rows(scores) @ values


def _layer_norm_fwd(x, g, b):
    mu = x.mean(axis=-1, keepdims=True)
    xc = x - mu
    var = (xc * xc).mean(axis=-1, keepdims=True)
    inv = 1.0 / np.sqrt(var + _LN_EPS)
    xhat = xc * inv
    return g * xhat + b, (xhat, inv, g)


def _layer_norm_bwd(dout, cache):
    xhat, inv, g = cache
    dg = (dout * xhat).sum(axis=0)
    db = dout.sum(axis=0)
    dxhat = dout * g
    dx = (
        dxhat
        - dxhat.mean(axis=-1, keepdims=True)
        - xhat * (dxhat * xhat).mean(axis=-1, keepdims=True)
    ) * inv
    return dx, dg, db


def _split_heads(x, heads):
    t, d = x.shape
    return x.reshape(t, heads, d // heads).transpose(1, 0, 2)  # (H, T, dh)


def _merge_heads(x):
    h, t, dh = x.shape
    return x.transpose(1, 0, 2).reshape(t, h * dh)


def _mha_fwd(q_in, kv_in, params, prefix, heads, mask):
    wq, wk, wv, wo = (params[n] for n in _attn_param_names(prefix))
    qh = _split_heads(q_in @ wq, heads)
    kh = _split_heads(kv_in @ wk, heads)
    vh = _split_heads(kv_in @ wv, heads)
    scale = 1.0 / math.sqrt(qh.shape[-1])
    scores = (qh @ kh.transpose(0, 2, 1)) * scale
    if mask is not None:
        scores = np.where(mask[None, :, :], -np.inf, scores)
    weights = _softmax_rows(scores)
    heads_out = weights @ vh
    concat = _merge_heads(heads_out)
    out = concat @ wo
    cache = (q_in, kv_in, prefix, heads, qh, kh, vh, weights, concat, scale)
    return out, cache


def _mha_bwd(dout, cache, params, grads):
    q_in, kv_in, prefix, heads, qh, kh, vh, weights, concat, scale = cache
    wq, wk, wv, wo = (params[n] for n in _attn_param_names(prefix))
    grads[f"{prefix}.wo"] += concat.T @ dout
    dconcat = dout @ wo.T
    dheads = _split_heads(dconcat, heads)
    dweights = dheads @ vh.transpose(0, 2, 1)
    dvh = weights.transpose(0, 2, 1) @ dheads
    # softmax backward per row; masked positions have weight 0 -> grad 0
    dscores = weights * (dweights - (dweights * weights).sum(axis=-1, keepdims=True))
    dqh = (dscores @ kh) * scale
    dkh = (dscores.transpose(0, 2, 1) @ qh) * scale
    dq = _merge_heads(dqh)
    dk = _merge_heads(dkh)
    dv = _merge_heads(dvh)
    grads[f"{prefix}.wq"] += q_in.T @ dq
    grads[f"{prefix}.wk"] += kv_in.T @ dk
    grads[f"{prefix}.wv"] += kv_in.T @ dv
    dq_in = dq @ wq.T
    dkv_in = dk @ wk.T + dv @ wv.T
    return dq_in, dkv_in


def _ffn_fwd(x, params, prefix):
    w1, b1, w2, b2 = (params[f"{prefix}.{n}"] for n in ("w1", "b1", "w2", "b2"))
    z = x @ w1 + b1
    h = np.maximum(z, 0.0)
    out = h @ w2 + b2
    return out, (x, z, h, prefix)


def _ffn_bwd(dout, cache, params, grads):
    x, z, h, prefix = cache
    w1 = params[f"{prefix}.w1"]
    w2 = params[f"{prefix}.w2"]
    grads[f"{prefix}.w2"] += h.T @ dout
    grads[f"{prefix}.b2"] += dout.sum(axis=0)
    dh = dout @ w2.T
    dz = dh * (z > 0.0)
    grads[f"{prefix}.w1"] += x.T @ dz
    grads[f"{prefix}.b1"] += dz.sum(axis=0)
    return dz @ w1.T


# --- full model ------------------------------------------------------------


def _validate_ids(ids, vocab_size, what):
    arr = np.asarray(ids, dtype=np.int64)
    if arr.ndim != 1 or arr.size == 0:
        raise ValueError(f"{what} must be a non-empty 1-D id sequence")
    if arr.min() < 0 or arr.max() >= vocab_size:
        raise ValueError(
            f"{what} id out of vocab range [0, {vocab_size}): {arr.min()}..{arr.max()}"
        )
    return arr


def _embed_fwd(params, ids, d_model):
    scale = math.sqrt(d_model)
    x = params["embed"][ids] * scale + sinusoid_positions(len(ids), d_model)
    return x, (ids, scale)


def _encode_fwd(params, config, src_ids):
    x, embed_cache = _embed_fwd(params, src_ids, config.d_model)
    layer_caches = []
    for i in range(config.encoder_layers):
        p = f"enc.{i}"
        h1, ln1 = _layer_norm_fwd(x, params[f"{p}.ln1.g"], params[f"{p}.ln1.b"])
        a, attn = _mha_fwd(h1, h1, params, f"{p}.attn", config.heads, mask=None)
        x = x + a
        h2, ln2 = _layer_norm_fwd(x, params[f"{p}.ln2.g"], params[f"{p}.ln2.b"])
        f, ffn = _ffn_fwd(h2, params, f"{p}.ffn")
        x = x + f
        layer_caches.append((ln1, attn, ln2, ffn))
    out, lnf = _layer_norm_fwd(x, params["enc.lnf.g"], params["enc.lnf.b"])
    return out, (embed_cache, layer_caches, lnf)


def _decode_fwd(params, config, tgt_ids, enc_out):
    t = len(tgt_ids)
    causal = np.triu(np.ones((t, t), dtype=bool), k=1)
    y, embed_cache = _embed_fwd(params, tgt_ids, config.d_model)
    layer_caches = []
    for i in range(config.decoder_layers):
        p = f"dec.{i}"
        h1, ln1 = _layer_norm_fwd(y, params[f"{p}.ln1.g"], params[f"{p}.ln1.b"])
        a, self_attn = _mha_fwd(h1, h1, params, f"{p}.self", config.heads, causal)
        y = y + a
        h2, ln2 = _layer_norm_fwd(y, params[f"{p}.ln2.g"], params[f"{p}.ln2.b"])
        c, cross = _mha_fwd(h2, enc_out, params, f"{p}.cross", config.heads, mask=None)
        y = y + c
        h3, ln3 = _layer_norm_fwd(y, params[f"{p}.ln3.g"], params[f"{p}.ln3.b"])
        f, ffn = _ffn_fwd(h3, params, f"{p}.ffn")
        y = y + f
        layer_caches.append((ln1, self_attn, ln2, cross, ln3, ffn))
    out, lnf = _layer_norm_fwd(y, params["dec.lnf.g"], params["dec.lnf.b"])
    return out, (embed_cache, layer_caches, lnf)


def _forward_cached(params, config, src_ids, tgt_ids):
    enc_out, enc_cache = _encode_fwd(params, config, src_ids)
    dec_out, dec_cache = _decode_fwd(params, config, tgt_ids, enc_out)
    logits = dec_out @ params["embed"].T  # tied output projection
    return logits, (enc_cache, dec_cache, enc_out, dec_out)


def forward(params: Params, config: ModelConfig, source_ids, target_ids) -> np.ndarray:
    """Logits (target_len x vocab_size) for teacher-forced target ids."""
    vocab_size = params["embed"].shape[0]
    src = _validate_ids(source_ids, vocab_size, "source")
    tgt = _validate_ids(target_ids, vocab_size, "target")
    if len(src) > config.max_len or len(tgt) > config.max_len:
        raise ValueError(
            f"overlong sequence: source {len(src)}, target {len(tgt)}, "
            f"max_len {config.max_len}"
        )
    if tgt[0] != BOS_ID:
        raise ValueError("target must begin with BOS")
    logits, _ = _forward_cached(params, config, src, tgt)
    return logits


def _zero_grads(params: Params) -> Params:
    return {name: np.zeros_like(value) for name, value in params.items()}


def _backward(params, config, caches, dlogits, src_ids, tgt_ids):
    enc_cache, dec_cache, enc_out, dec_out = caches
    grads = _zero_grads(params)
    grads["embed"] += dlogits.T @ dec_out
    ddec_out = dlogits @ params["embed"]

    # decoder stack
    embed_cache_d, dec_layers, dec_lnf = dec_cache
    dy, dg, db = _layer_norm_bwd(ddec_out, dec_lnf)
    grads["dec.lnf.g"] += dg
    grads["dec.lnf.b"] += db
    denc_out = np.zeros_like(enc_out)
    for i in reversed(range(config.decoder_layers)):
        p = f"dec.{i}"
        ln1, self_attn, ln2, cross, ln3, ffn = dec_layers[i]
        dffn_in = _ffn_bwd(dy, ffn, params, grads)
        dh3, dg, db = _layer_norm_bwd(dffn_in, ln3)
        grads[f"{p}.ln3.g"] += dg
        grads[f"{p}.ln3.b"] += db
        dy = dy + dh3
        dq_in, dkv = _mha_bwd(dy, cross, params, grads)
        denc_out += dkv
        dh2, dg, db = _layer_norm_bwd(dq_in, ln2)
        grads[f"{p}.ln2.g"] += dg
        grads[f"{p}.ln2.b"] += db
        dy = dy + dh2
        dq_in, dkv = _mha_bwd(dy, self_attn, params, grads)
        dself_in = dq_in + dkv
        dh1, dg, db = _layer_norm_bwd(dself_in, ln1)
        grads[f"{p}.ln1.g"] += dg
        grads[f"{p}.ln1.b"] += db
        dy = dy + dh1
    ids, scale = embed_cache_d
    np.add.at(grads["embed"], ids, dy * scale)

    # encoder stack
    embed_cache_e, enc_layers, enc_lnf = enc_cache
    dx, dg, db = _layer_norm_bwd(denc_out, enc_lnf)
    grads["enc.lnf.g"] += dg
    grads["enc.lnf.b"] += db
    for i in reversed(range(config.encoder_layers)):
        p = f"enc.{i}"
        ln1, attn, ln2, ffn = enc_layers[i]
        dffn_in = _ffn_bwd(dx, ffn, params, grads)
        dh2, dg, db = _layer_norm_bwd(dffn_in, ln2)
        grads[f"{p}.ln2.g"] += dg
        grads[f"{p}.ln2.b"] += db
        dx = dx + dh2
        dq_in, dkv = _mha_bwd(dx, attn, params, grads)
        dattn_in = dq_in + dkv
        dh1, dg, db = _layer_norm_bwd(dattn_in, ln1)
        grads[f"{p}.ln1.g"] += dg
        grads[f"{p}.ln1.b"] += db
        dx = dx + dh1
    ids, scale = embed_cache_e
    np.add.at(grads["embed"], ids, dx * scale)
    return grads


def _log_softmax_rows(x):
    shifted = x - x.max(axis=-1, keepdims=True)
    return shifted - np.log(np.exp(shifted).sum(axis=-1, keepdims=True))


def loss_and_grads(params, config, src_ids, tgt_full):
    """Teacher-forced mean cross-entropy and its parameter gradients.

    ``tgt_full`` is BOS..EOS; the decoder reads tgt_full[:-1] and the
    labels are tgt_full[1:]. PAD labels are masked out of the loss.
    """
    src = np.asarray(src_ids, dtype=np.int64)
    full = np.asarray(tgt_full, dtype=np.int64)
    tgt_in, labels = full[:-1], full[1:]
    logits, caches = _forward_cached(params, config, src, tgt_in)
    mask = labels != PAD_ID
    active = int(mask.sum())
    if active == 0:
        return 0.0, _zero_grads(params)
    logp = _log_softmax_rows(logits)
    rows = np.arange(len(labels))
    loss = -logp[rows[mask], labels[mask]].mean()
    dlogits = np.exp(logp)
    dlogits[rows, labels] -= 1.0
    dlogits[~mask] = 0.0
    dlogits /= active
    grads = _backward(params, config, caches, dlogits, src, tgt_in)
    return float(loss), grads


def loss_only(params, config, src_ids, tgt_full):
    src = np.asarray(src_ids, dtype=np.int64)
    full = np.asarray(tgt_full, dtype=np.int64)
    tgt_in, labels = full[:-1], full[1:]
    logits, _ = _forward_cached(params, config, src, tgt_in)
    mask = labels != PAD_ID
    if not mask.any():
        return 0.0
    logp = _log_softmax_rows(logits)
    rows = np.arange(len(labels))
    return float(-logp[rows[mask], labels[mask]].mean())


# --- training --------------------------------------------------------------


def encode_pairs(pairs, vocab, max_len):
    """Encode pairs as (source ids, BOS..EOS target ids), checking length."""
    encoded = []
    for idx, pair in enumerate(pairs):
        src = vocab.encode(tokenize(pair.source))
        tgt = [BOS_ID] + vocab.encode(tokenize(pair.target)) + [EOS_ID]
        if not src:
            raise ValueError(f"pair {idx}: source is empty after tokenization")
        if len(src) > max_len or len(tgt) > max_len:
            raise ValueError(
                f"pair {idx}: encoded length {len(src)}/{len(tgt)} exceeds "
                f"max_len {max_len}"
            )
        encoded.append((np.asarray(src, dtype=np.int64), np.asarray(tgt, dtype=np.int64)))
    return encoded


def train(
    pairs: Sequence[ParallelPair],
    config: ModelConfig,
    vocab: Vocab | None = None,
) -> tuple[Params, TrainReport]:
    """Adam-optimized teacher forcing, one update per sample.

    beta1=0.9, beta2=0.999, eps=1e-8; learning rate and epoch count come
    from the config. Sample order is reshuffled each epoch by the same
    seeded generator that initialized the parameters.
    """
    if not pairs:
        raise ValueError("empty corpus")
    if vocab is None:
        vocab = build_vocab(pairs)
    encoded = encode_pairs(pairs, vocab, config.max_len)

    start = time.perf_counter()
    rng = np.random.Generator(np.random.PCG64(config.seed))
    params = init_params(config, len(vocab), rng)
    m = _zero_grads(params)
    v = _zero_grads(params)
    step = 0
    epoch_losses = []
    for epoch in range(config.epochs):
        order = rng.permutation(len(encoded))
        total = 0.0
        for idx in order:
            src, tgt = encoded[idx]
            loss, grads = loss_and_grads(params, config, src, tgt)
            if not math.isfinite(loss):
                raise TrainingDiverged(
                    f"non-finite loss at epoch {epoch + 1}, sample {int(idx)}"
                )
            total += loss
            step += 1
            bc1 = 1.0 - _ADAM_B1**step
            bc2 = 1.0 - _ADAM_B2**step
            for name, g in grads.items():
                m[name] = _ADAM_B1 * m[name] + (1 - _ADAM_B1) * g
                v[name] = _ADAM_B2 * v[name] + (1 - _ADAM_B2) * (g * g)
                params[name] -= config.lr * (m[name] / bc1) / (
                    np.sqrt(v[name] / bc2) + _ADAM_EPS
                )
        epoch_losses.append(total / len(encoded))

    scored = []
    for (src, tgt), pair in zip(encoded, pairs):
        hyp = _greedy_ids(params, config, src)
        scored.append((vocab.decode(hyp), [tokenize(pair.target)]))
    final_bleu = bleu.corpus_bleu(scored).score if scored else 0.0

    report = TrainReport(
        epoch_losses=tuple(epoch_losses),
        final_train_bleu=final_bleu,
        epochs=config.epochs,
        seed=config.seed,
        wall_time=time.perf_counter() - start,
    )
    return params, report


def _greedy_ids(params, config, src_ids):
    ys = [BOS_ID]
    for _ in range(config.max_len - 1):
        logits, _ = _forward_cached(
            params, config, np.asarray(src_ids), np.asarray(ys)
        )
        nxt = int(np.argmax(logits[-1]))
        if nxt == EOS_ID:
            break
        ys.append(nxt)
    return ys[1:]


def translate(params: Params, config: ModelConfig, vocab: Vocab, source: str) -> str:
    """Greedy-decode one source line; deterministic for fixed params."""
    tokens = tokenize(source)
    if not tokens:
        raise ValueError("source is empty after tokenization")
    src = vocab.encode(tokens)[: config.max_len]
    out_ids = _greedy_ids(params, config, np.asarray(src, dtype=np.int64))
    return " ".join(vocab.decode(out_ids))


def grad_check(
    params: Params,
    config: ModelConfig,
    sample: tuple[Sequence[int], Sequence[int]],
    epsilon: float = 1e-5,
    num_checks: int = 200,
    seed: int = 0,
) -> float:
    """Max relative error between analytic and central-difference grads.

    ``sample`` is (source ids, full target ids starting with BOS).
    Checks ``num_checks`` randomly chosen parameter coordinates.
    """
    src_ids, tgt_full = sample
    _, analytic = loss_and_grads(params, config, src_ids, tgt_full)
    names = sorted(params)
    sizes = [params[n].size for n in names]
    total = sum(sizes)
    rng = np.random.Generator(np.random.PCG64(seed))
    picks = rng.choice(total, size=min(num_checks, total), replace=False)

    offsets = np.cumsum([0] + sizes)
    worst = 0.0
    for flat in sorted(int(p) for p in picks):
        tensor_idx = int(np.searchsorted(offsets, flat, side="right") - 1)
        name = names[tensor_idx]
        local = flat - offsets[tensor_idx]
        coord = np.unravel_index(local, params[name].shape)
        original = params[name][coord]
        params[name][coord] = original + epsilon
        plus = loss_only(params, config, src_ids, tgt_full)
        params[name][coord] = original - epsilon
        minus = loss_only(params, config, src_ids, tgt_full)
        params[name][coord] = original
        fd = (plus - minus) / (2 * epsilon)
        a = float(analytic[name][coord])
        rel = abs(a - fd) / max(abs(a), abs(fd), 1e-8)
        worst = max(worst, rel)
    return worst


# --- model file ------------------------------------------------------------


def save_model(path: str | Path, params: Params, config: ModelConfig, vocab: Vocab) -> None:
    """Versioned binary model file: JSON header + little-endian float64 tensors."""
    names = sorted(params)
    header = {
        "format_version": MODEL_FORMAT_VERSION,
        "config": asdict(config),
        "vocab": list(vocab.itos),
        "tensors": [{"name": n, "shape": list(params[n].shape)} for n in names],
    }
    blob = json.dumps(header, sort_keys=True).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(MODEL_MAGIC)
        fh.write(struct.pack("<Q", len(blob)))
        fh.write(blob)
        for n in names:
            fh.write(np.ascontiguousarray(params[n], dtype="<f8").tobytes())


def load_model(path: str | Path) -> tuple[Params, ModelConfig, Vocab]:
    with open(path, "rb") as fh:
        magic = fh.read(len(MODEL_MAGIC))
        if magic != MODEL_MAGIC:
            raise ValueError(f"not a model file: {path}")
        (blob_len,) = struct.unpack("<Q", fh.read(8))
        header = json.loads(fh.read(blob_len).decode("utf-8"))
        if header.get("format_version") != MODEL_FORMAT_VERSION:
            raise ValueError(
                f"unsupported model format version: {header.get('format_version')}"
            )
        config = ModelConfig(**header["config"])
        itos = tuple(header["vocab"])
        vocab = Vocab(stoi={t: i for i, t in enumerate(itos)}, itos=itos)
        params: Params = {}
        for spec in header["tensors"]:
            shape = tuple(spec["shape"])
            count = int(np.prod(shape)) if shape else 1
            data = np.frombuffer(fh.read(count * 8), dtype="<f8").astype(np.float64)
            params[spec["name"]] = data.reshape(shape)
    return params, config, vocab
