"""Desk-scale consequence predictor: tokenizer, BiLSTM stack, sigmoid head.

Dynamics text is encoded to a fixed-length id sequence, passed through an
embedding table, two stacked bidirectional LSTM layers, a flatten, two ReLU
dense layers, dropout and a sigmoid output over the vocabulary. The target is
a multi-hot vector marking the consequence tokens, trained with mean binary
cross entropy and ADAM. Gradients are exact reverse-mode derivatives through
the whole stack; a finite-difference harness in the test suite holds them to
account.

Parameters default to float32 so the on-disk artifact (little-endian float32
blobs) round-trips bit-exactly; gradient checking uses float64 configs.
"""

from __future__ import annotations

import hashlib
import json
import math
import os
from collections import Counter
from dataclasses import asdict, dataclass
from typing import Iterable, Optional, Sequence

import numpy as np

from .corpus import Corpus, PreprocessConfig, preprocess
from .errors import IncmineError

PAD_TOKEN = "<pad>"
UNK_TOKEN = "<unk>"
PAD_ID = 0
UNK_ID = 1

ARTIFACT_VERSION = "lm-v1"
_PROB_EPS = 1e-7


class LangModelError(IncmineError):
    pass


class NonFiniteError(LangModelError):
    """A forward activation or gradient left the finite range."""


class TrainingDivergedError(NonFiniteError):
    def __init__(self, epoch: int, batch: int):
        super().__init__(f"training diverged at epoch {epoch}, batch {batch}")
        self.epoch = epoch
        self.batch = batch


class ArtifactError(LangModelError):
    pass


class ArtifactVersionError(ArtifactError):
    pass


class ArtifactChecksumError(ArtifactError):
    pass


# --------------------------------------------------------------------------
# vocabulary and encoding
# --------------------------------------------------------------------------

class LmVocabulary:
    """Frequency-ranked token list with PAD at 0 and UNK at 1."""

    def __init__(self, tokens: Sequence[str]):
        tokens = tuple(tokens)
        if len(tokens) < 2 or tokens[0] != PAD_TOKEN or tokens[1] != UNK_TOKEN:
            raise LangModelError("vocabulary must start with PAD, UNK")
        self.tokens = tokens
        self._index = {tok: i for i, tok in enumerate(tokens)}
        if len(self._index) != len(tokens):
            raise LangModelError("vocabulary contains duplicate tokens")

    def __len__(self):
        return len(self.tokens)

    def __eq__(self, other):
        return isinstance(other, LmVocabulary) and self.tokens == other.tokens

    def id_of(self, token: str) -> int:
        return self._index.get(token, UNK_ID)

    def __contains__(self, token: str) -> bool:
        return token in self._index


def fit_vocab(texts: Iterable[Sequence[str]], cap: int = 5000) -> LmVocabulary:
    """Rank tokens by descending count (ties lexicographic), keep cap-2 of them."""
    if cap < 2:
        raise ValueError("cap must be >= 2 to hold PAD and UNK")
    counts: Counter[str] = Counter()
    for tokens in texts:
        counts.update(tokens)
    if not counts:
        raise LangModelError("no tokens to build a vocabulary from")
    ranked = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
    kept = [tok for tok, _ in ranked[:cap - 2]]
    return LmVocabulary([PAD_TOKEN, UNK_TOKEN] + kept)


def encode(tokens: Sequence[str], vocab: LmVocabulary, seq_len: int) -> np.ndarray:
    """Token ids right-padded with PAD to seq_len, truncated beyond it."""
    ids = [vocab.id_of(tok) for tok in tokens[:seq_len]]
    ids.extend([PAD_ID] * (seq_len - len(ids)))
    return np.asarray(ids, dtype=np.int64)


# --------------------------------------------------------------------------
# configuration and parameters
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class LmConfig:
    vocab_size: int = 5000
    embed_dim: int = 128
    recurrent_units: int = 100   # per direction, two bidirectional layers
    dense_units: int = 50        # two dense layers
    dropout_rate: float = 0.5
    seq_len: int = 30
    learning_rate: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    batch_size: int = 32
    epochs: int = 5
    seed: int = 0
    clip_norm: float = 5.0
    dtype: str = "float32"

    def __post_init__(self):
        for name in ("vocab_size", "embed_dim", "recurrent_units",
                     "dense_units", "seq_len", "batch_size"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        if not 0.0 <= self.dropout_rate < 1.0:
            raise ValueError("dropout_rate must be in [0, 1)")
        if self.epochs < 0:
            raise ValueError("epochs must be >= 0")
        if self.dtype not in ("float32", "float64"):
            raise ValueError("dtype must be float32 or float64")

    @property
    def np_dtype(self):
        return np.float32 if self.dtype == "float32" else np.float64


def _param_specs(config: LmConfig) -> list[tuple[str, tuple[int, ...]]]:
    u = config.recurrent_units
    specs = [("embedding", (config.vocab_size, config.embed_dim))]
    in_dims = {1: config.embed_dim, 2: 2 * u}
    for layer in (1, 2):
        for direction in ("fw", "bw"):
            specs.append((f"lstm{layer}_{direction}_wx", (in_dims[layer], 4 * u)))
            specs.append((f"lstm{layer}_{direction}_wh", (u, 4 * u)))
            specs.append((f"lstm{layer}_{direction}_b", (4 * u,)))
    flat = config.seq_len * 2 * u
    specs.append(("dense1_w", (flat, config.dense_units)))
    specs.append(("dense1_b", (config.dense_units,)))
    specs.append(("dense2_w", (config.dense_units, config.dense_units)))
    specs.append(("dense2_b", (config.dense_units,)))
    specs.append(("out_w", (config.dense_units, config.vocab_size)))
    specs.append(("out_b", (config.vocab_size,)))
    return specs


def _xavier_bound(shape: tuple[int, ...]) -> float:
    if len(shape) == 2:
        fan_in, fan_out = shape
    else:
        fan_in = fan_out = shape[0]
    return math.sqrt(6.0 / (fan_in + fan_out))


def init_params(config: LmConfig, rng: np.random.Generator) -> dict[str, np.ndarray]:
    """Uniform Xavier draw per tensor, in registry order, cast to config dtype."""
    params = {}
    for name, shape in _param_specs(config):
        bound = _xavier_bound(shape)
        params[name] = rng.uniform(-bound, bound, size=shape).astype(config.np_dtype)
    return params


@dataclass
class AdamState:
    m: dict[str, np.ndarray]
    v: dict[str, np.ndarray]
    t: int = 0

    @classmethod
    def for_params(cls, params: dict[str, np.ndarray]) -> "AdamState":
        return cls(m={k: np.zeros_like(p) for k, p in params.items()},
                   v={k: np.zeros_like(p) for k, p in params.items()})


@dataclass
class LmModel:
    config: LmConfig
    vocab: LmVocabulary
    params: dict[str, np.ndarray]
    adam: AdamState

    @classmethod
    def initialized(cls, config: LmConfig, vocab: LmVocabulary,
                    rng: Optional[np.random.Generator] = None) -> "LmModel":
        if len(vocab) > config.vocab_size:
            raise LangModelError("vocabulary larger than configured vocab_size")
        if rng is None:
            rng = np.random.default_rng(config.seed)
        params = init_params(config, rng)
        return cls(config=config, vocab=vocab, params=params,
                   adam=AdamState.for_params(params))

    @classmethod
    def zeros(cls, config: LmConfig, vocab: LmVocabulary) -> "LmModel":
        params = {name: np.zeros(shape, dtype=config.np_dtype)
                  for name, shape in _param_specs(config)}
        return cls(config=config, vocab=vocab, params=params,
                   adam=AdamState.for_params(params))


@dataclass(frozen=True)
class TrainPair:
    input_ids: np.ndarray  # (seq_len,) int64
    target: np.ndarray     # (vocab_size,) multi-hot

    def __post_init__(self):
        if self.target[PAD_ID] != 0:
            raise LangModelError("PAD must never be set in a target")


def make_train_pairs(corpus: Corpus, vocab: LmVocabulary, config: LmConfig,
                     pre: PreprocessConfig) -> list[TrainPair]:
    """Dynamics -> ids, consequence tokens -> multi-hot target.

    Consequence tokens missing from the vocabulary are dropped rather than
    collapsed onto UNK, so the model never learns to predict UNK.
    """
    pairs = []
    for rec in corpus:
        ids = encode(preprocess(rec.dynamics, pre), vocab, config.seq_len)
        target = np.zeros(config.vocab_size, dtype=config.np_dtype)
        for tok in preprocess(rec.consequence, pre):
            idx = vocab.id_of(tok)
            if idx != UNK_ID:
                target[idx] = 1.0
        pairs.append(TrainPair(input_ids=ids, target=target))
    return pairs


# --------------------------------------------------------------------------
# forward / backward
# --------------------------------------------------------------------------

def _sigmoid(z):
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def _lstm_forward(x, wx, wh, b, reverse: bool):
    B, T, _ = x.shape
    u = wh.shape[0]
    dtype = x.dtype
    i_g = np.zeros((B, T, u), dtype=dtype)
    f_g = np.zeros((B, T, u), dtype=dtype)
    g_g = np.zeros((B, T, u), dtype=dtype)
    o_g = np.zeros((B, T, u), dtype=dtype)
    c_s = np.zeros((B, T, u), dtype=dtype)
    tc_s = np.zeros((B, T, u), dtype=dtype)
    h_seq = np.zeros((B, T, u), dtype=dtype)
    times = range(T - 1, -1, -1) if reverse else range(T)
    h = np.zeros((B, u), dtype=dtype)
    c = np.zeros((B, u), dtype=dtype)
    for t in times:
        z = x[:, t] @ wx + h @ wh + b
        i = _sigmoid(z[:, :u])
        f = _sigmoid(z[:, u:2 * u])
        g = np.tanh(z[:, 2 * u:3 * u])
        o = _sigmoid(z[:, 3 * u:])
        c = f * c + i * g
        tc = np.tanh(c)
        h = o * tc
        i_g[:, t], f_g[:, t], g_g[:, t], o_g[:, t] = i, f, g, o
        c_s[:, t], tc_s[:, t], h_seq[:, t] = c, tc, h
    cache = {"x": x, "i": i_g, "f": f_g, "g": g_g, "o": o_g,
             "c": c_s, "tc": tc_s, "h": h_seq, "reverse": reverse}
    return h_seq, cache


def _lstm_backward(cache, wx, wh, d_h_seq):
    x = cache["x"]
    B, T, _ = x.shape
    u = wh.shape[0]
    dtype = x.dtype
    times = list(range(T - 1, -1, -1) if cache["reverse"] else range(T))
    d_x = np.zeros_like(x)
    d_wx = np.zeros_like(wx)
    d_wh = np.zeros_like(wh)
    d_b = np.zeros(4 * u, dtype=dtype)
    dh_carry = np.zeros((B, u), dtype=dtype)
    dc_carry = np.zeros((B, u), dtype=dtype)
    zeros = np.zeros((B, u), dtype=dtype)
    for idx in range(T - 1, -1, -1):
        t = times[idx]
        i = cache["i"][:, t]
        f = cache["f"][:, t]
        g = cache["g"][:, t]
        o = cache["o"][:, t]
        tc = cache["tc"][:, t]
        c_prev = cache["c"][:, times[idx - 1]] if idx > 0 else zeros
        h_prev = cache["h"][:, times[idx - 1]] if idx > 0 else zeros
        dh = d_h_seq[:, t] + dh_carry
        do = dh * tc
        dc = dc_carry + dh * o * (1.0 - tc * tc)
        di = dc * g
        dg = dc * i
        df = dc * c_prev
        dc_carry = dc * f
        dz = np.concatenate([
            di * i * (1.0 - i),
            df * f * (1.0 - f),
            dg * (1.0 - g * g),
            do * o * (1.0 - o),
        ], axis=1)
        d_wx += x[:, t].T @ dz
        d_wh += h_prev.T @ dz
        d_b += dz.sum(axis=0)
        d_x[:, t] = dz @ wx.T
        dh_carry = dz @ wh.T
    return d_x, d_wx, d_wh, d_b


def _forward_batch(params, config: LmConfig, ids, train_mode: bool,
                   rng: Optional[np.random.Generator], want_cache: bool):
    B = ids.shape[0]
    u = config.recurrent_units
    emb = params["embedding"][ids]  # (B, T, E)
    h1f, c1f = _lstm_forward(emb, params["lstm1_fw_wx"], params["lstm1_fw_wh"],
                             params["lstm1_fw_b"], reverse=False)
    h1b, c1b = _lstm_forward(emb, params["lstm1_bw_wx"], params["lstm1_bw_wh"],
                             params["lstm1_bw_b"], reverse=True)
    h1 = np.concatenate([h1f, h1b], axis=2)
    h2f, c2f = _lstm_forward(h1, params["lstm2_fw_wx"], params["lstm2_fw_wh"],
                             params["lstm2_fw_b"], reverse=False)
    h2b, c2b = _lstm_forward(h1, params["lstm2_bw_wx"], params["lstm2_bw_wh"],
                             params["lstm2_bw_b"], reverse=True)
    h2 = np.concatenate([h2f, h2b], axis=2)
    flat = h2.reshape(B, config.seq_len * 2 * u)
    z1 = flat @ params["dense1_w"] + params["dense1_b"]
    a1 = np.maximum(z1, 0.0)
    z2 = a1 @ params["dense2_w"] + params["dense2_b"]
    a2 = np.maximum(z2, 0.0)
    rate = config.dropout_rate
    if train_mode and rate > 0.0:
        if rng is None:
            raise ValueError("train-mode forward with dropout needs an rng")
        mask = (rng.random((B, config.dense_units)) >= rate).astype(a2.dtype)
        a2d = a2 * mask / (1.0 - rate)
    else:
        mask = None
        a2d = a2
    zo = a2d @ params["out_w"] + params["out_b"]
    probs = _sigmoid(zo)
    if not np.isfinite(probs).all():
        raise NonFiniteError("non-finite activation in forward pass")
    if not want_cache:
        return probs, None
    cache = {"ids": ids, "emb": emb, "c1f": c1f, "c1b": c1b, "h1": h1,
             "c2f": c2f, "c2b": c2b, "flat": flat, "z1": z1, "a1": a1,
             "z2": z2, "a2": a2, "mask": mask, "a2d": a2d, "probs": probs}
    return probs, cache


def forward(model: LmModel, input_ids, train_mode: bool = False,
            rng: Optional[np.random.Generator] = None) -> np.ndarray:
    """Probability vector over the vocabulary for one id sequence."""
    ids = np.asarray(input_ids, dtype=np.int64)[None, :]
    probs, _ = _forward_batch(model.params, model.config, ids, train_mode,
                              rng, want_cache=False)
    return probs[0]


def bce_loss(probs, target) -> float:
    """Mean binary cross entropy over every vocabulary slot (and batch)."""
    probs = np.asarray(probs)
    target = np.asarray(target)
    if probs.shape != target.shape:
        raise LangModelError(
            f"shape mismatch: probs {probs.shape} vs target {target.shape}")
    p = np.clip(probs, _PROB_EPS, 1.0 - _PROB_EPS)
    losses = -(target * np.log(p) + (1.0 - target) * np.log1p(-p))
    return float(losses.mean())


def _batch_arrays(batch: Sequence[TrainPair], config: LmConfig):
    ids = np.stack([p.input_ids for p in batch]).astype(np.int64)
    targets = np.stack([p.target for p in batch]).astype(config.np_dtype)
    return ids, targets


def batch_loss(model: LmModel, batch: Sequence[TrainPair],
               rng: Optional[np.random.Generator] = None) -> float:
    """Train-mode forward + BCE without gradients (finite-difference hook)."""
    ids, targets = _batch_arrays(batch, model.config)
    probs, _ = _forward_batch(model.params, model.config, ids, True, rng,
                              want_cache=False)
    return bce_loss(probs, targets)


def backward(model: LmModel, batch: Sequence[TrainPair],
             rng: Optional[np.random.Generator] = None):
    """Exact gradients of the mean BCE for the batch; returns (grads, loss)."""
    if len(batch) == 0:
        raise LangModelError("batch must be non-empty")
    config = model.config
    params = model.params
    ids, targets = _batch_arrays(batch, config)
    B = ids.shape[0]
    V = config.vocab_size
    u = config.recurrent_units
    probs, cache = _forward_batch(params, config, ids, True, rng, want_cache=True)
    loss = bce_loss(probs, targets)

    grads = {name: np.zeros_like(p) for name, p in params.items()}
    in_range = (probs > _PROB_EPS) & (probs < 1.0 - _PROB_EPS)
    dzo = np.where(in_range, probs - targets, 0.0).astype(config.np_dtype)
    dzo /= V * B
    grads["out_w"] = cache["a2d"].T @ dzo
    grads["out_b"] = dzo.sum(axis=0)
    da2d = dzo @ params["out_w"].T
    if cache["mask"] is not None:
        da2 = da2d * cache["mask"] / (1.0 - config.dropout_rate)
    else:
        da2 = da2d
    dz2 = da2 * (cache["z2"] > 0)
    grads["dense2_w"] = cache["a1"].T @ dz2
    grads["dense2_b"] = dz2.sum(axis=0)
    da1 = dz2 @ params["dense2_w"].T
    dz1 = da1 * (cache["z1"] > 0)
    grads["dense1_w"] = cache["flat"].T @ dz1
    grads["dense1_b"] = dz1.sum(axis=0)
    dflat = dz1 @ params["dense1_w"].T
    dh2 = dflat.reshape(B, config.seq_len, 2 * u)

    dx2f, dwx, dwh, db = _lstm_backward(cache["c2f"], params["lstm2_fw_wx"],
                                        params["lstm2_fw_wh"], dh2[:, :, :u])
    grads["lstm2_fw_wx"], grads["lstm2_fw_wh"], grads["lstm2_fw_b"] = dwx, dwh, db
    dx2b, dwx, dwh, db = _lstm_backward(cache["c2b"], params["lstm2_bw_wx"],
                                        params["lstm2_bw_wh"], dh2[:, :, u:])
    grads["lstm2_bw_wx"], grads["lstm2_bw_wh"], grads["lstm2_bw_b"] = dwx, dwh, db
    dh1 = dx2f + dx2b

    dx1f, dwx, dwh, db = _lstm_backward(cache["c1f"], params["lstm1_fw_wx"],
                                        params["lstm1_fw_wh"], dh1[:, :, :u])
    grads["lstm1_fw_wx"], grads["lstm1_fw_wh"], grads["lstm1_fw_b"] = dwx, dwh, db
    dx1b, dwx, dwh, db = _lstm_backward(cache["c1b"], params["lstm1_bw_wx"],
                                        params["lstm1_bw_wh"], dh1[:, :, u:])
    grads["lstm1_bw_wx"], grads["lstm1_bw_wh"], grads["lstm1_bw_b"] = dwx, dwh, db
    demb = dx1f + dx1b

    np.add.at(grads["embedding"], ids, demb)
    for g in grads.values():
        if not np.isfinite(g).all():
            raise NonFiniteError("non-finite gradient")
    return grads, loss


# --------------------------------------------------------------------------
# optimization
# --------------------------------------------------------------------------

def adam_step(params, grads, state: AdamState, config: LmConfig):
    """One ADAM update in place: m, v moments, bias correction, step."""
    state.t += 1
    t = state.t
    b1, b2 = config.beta1, config.beta2
    corr1 = 1.0 - b1 ** t
    corr2 = 1.0 - b2 ** t
    for name, p in params.items():
        g = grads[name]
        m = state.m[name]
        v = state.v[name]
        m *= b1
        m += (1.0 - b1) * g
        v *= b2
        v += (1.0 - b2) * (g * g)
        m_hat = m / corr1
        v_hat = v / corr2
        p -= config.learning_rate * m_hat / (np.sqrt(v_hat) + config.epsilon)
    return params, state


def clip_gradients(grads, clip_norm: float) -> float:
    """Scale all gradients so the global L2 norm is at most clip_norm."""
    total = 0.0
    for g in grads.values():
        total += float((g.astype(np.float64) ** 2).sum())
    norm = math.sqrt(total)
    if clip_norm > 0 and norm > clip_norm:
        scale = clip_norm / norm
        for g in grads.values():
            g *= scale
    return norm


def train(pairs: Sequence[TrainPair], config: LmConfig,
          vocab: LmVocabulary) -> tuple[LmModel, list[float]]:
    """Shuffled mini-batch training; returns model + mean per-epoch losses."""
    if len(pairs) == 0:
        raise LangModelError("need at least one training pair")
    rng = np.random.default_rng(config.seed)
    model = LmModel.initialized(config, vocab, rng)
    history: list[float] = []
    n = len(pairs)
    for epoch in range(config.epochs):
        order = rng.permutation(n)
        total = 0.0
        for bi, start in enumerate(range(0, n, config.batch_size)):
            batch = [pairs[i] for i in order[start:start + config.batch_size]]
            try:
                grads, loss = backward(model, batch, rng)
            except NonFiniteError as exc:
                raise TrainingDivergedError(epoch, bi) from exc
            if not math.isfinite(loss):
                raise TrainingDivergedError(epoch, bi)
            clip_gradients(grads, config.clip_norm)
            adam_step(model.params, grads, model.adam, config)
            total += loss * len(batch)
        history.append(total / n)
    return model, history


def predict_consequence(model: LmModel, text: str, top_k: int = 10,
                        pre: Optional[PreprocessConfig] = None
                        ) -> list[tuple[str, float]]:
    """Top-k vocabulary tokens by probability for the given dynamics text.

    PAD and UNK never appear in the output; equal probabilities rank by index.
    """
    if top_k < 1:
        raise ValueError("top_k must be >= 1")
    if pre is None:
        pre = PreprocessConfig()
    tokens = preprocess(text, pre)
    ids = encode(tokens, model.vocab, model.config.seq_len)
    probs = forward(model, ids, train_mode=False)
    order = np.argsort(-probs, kind="stable")
    out = []
    for idx in order:
        idx = int(idx)
        if idx in (PAD_ID, UNK_ID) or idx >= len(model.vocab):
            continue
        out.append((model.vocab.tokens[idx], float(probs[idx])))
        if len(out) == top_k:
            break
    return out


# --------------------------------------------------------------------------
# model artifact (manifest + float32 tensor blobs)
# --------------------------------------------------------------------------

def save_model(model: LmModel, path) -> None:
    """Write manifest.json plus one little-endian float32 blob per tensor."""
    os.makedirs(os.path.join(path, "tensors"), exist_ok=True)
    tensors = {}
    for name in sorted(model.params):
        blob = model.params[name].astype("<f4").tobytes(order="C")
        rel = f"tensors/{name}.bin"
        with open(os.path.join(path, rel), "wb") as fh:
            fh.write(blob)
        tensors[name] = {
            "shape": list(model.params[name].shape),
            "dtype": "float32",
            "file": rel,
            "sha256": hashlib.sha256(blob).hexdigest(),
        }
    manifest = {
        "version": ARTIFACT_VERSION,
        "config": asdict(model.config),
        "vocab": list(model.vocab.tokens),
        "tensors": tensors,
    }
    with open(os.path.join(path, "manifest.json"), "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, sort_keys=True, indent=2)
        fh.write("\n")


def load_model(path) -> LmModel:
    """Rebuild a model from an artifact directory, verifying checksums."""
    with open(os.path.join(path, "manifest.json"), encoding="utf-8") as fh:
        manifest = json.load(fh)
    version = manifest.get("version")
    if version != ARTIFACT_VERSION:
        raise ArtifactVersionError(
            f"artifact version {version!r}, this build reads {ARTIFACT_VERSION!r}")
    config = LmConfig(**manifest["config"])
    vocab = LmVocabulary(manifest["vocab"])
    params = {}
    for name, spec in manifest["tensors"].items():
        with open(os.path.join(path, spec["file"]), "rb") as fh:
            blob = fh.read()
        digest = hashlib.sha256(blob).hexdigest()
        if digest != spec["sha256"]:
            raise ArtifactChecksumError(f"checksum mismatch for tensor {name!r}")
        arr = np.frombuffer(blob, dtype="<f4").reshape(spec["shape"])
        params[name] = arr.astype(config.np_dtype)
    expected = {name for name, _ in _param_specs(config)}
    if set(params) != expected:
        raise ArtifactError("artifact tensor set does not match configuration")
    return LmModel(config=config, vocab=vocab, params=params,
                   adam=AdamState.for_params(params))
