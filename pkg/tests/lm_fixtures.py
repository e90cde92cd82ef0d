"""Shared language-model fixtures: the 8-pair overfit set and the tiny
gradient-check configuration."""

import numpy as np

from incmine import langmodel as lm
from incmine.corpus import PreprocessConfig, preprocess

from conftest import make_corpus

OVERFIT_ROWS = [
    ("p0", "scivola su scala bagnata", "frattura"),
    ("p1", "taglio con lama affilata", "lacerazione"),
    ("p2", "caduta da ponteggio alto", "contusione"),
    ("p3", "urto contro carrello fermo", "trauma"),
    ("p4", "schiacciamento sotto pressa", "amputazione"),
    ("p5", "ustione da metallo fuso", "ustione"),
    ("p6", "inalazione di fumi densi", "intossicazione"),
    ("p7", "contatto con cavo scoperto", "folgorazione"),
]


def overfit_fixture(epochs=200):
    corpus = make_corpus(OVERFIT_ROWS)
    pre = PreprocessConfig()
    texts = [preprocess(r.dynamics, pre) for r in corpus]
    texts += [preprocess(r.consequence, pre) for r in corpus]
    vocab = lm.fit_vocab(texts, cap=64)
    config = lm.LmConfig(
        vocab_size=len(vocab), embed_dim=8, recurrent_units=8, dense_units=16,
        dropout_rate=0.0, seq_len=5, learning_rate=0.02, batch_size=8,
        epochs=epochs, seed=11, dtype="float32",
    )
    pairs = lm.make_train_pairs(corpus, vocab, config, pre)
    return corpus, pre, vocab, config, pairs


def gradcheck_fixture(seed=7):
    """Tiny float64 model and 3 random pairs for finite differences."""
    config = lm.LmConfig(
        vocab_size=12, embed_dim=4, recurrent_units=3, dense_units=4,
        dropout_rate=0.0, seq_len=5, dtype="float64", seed=3,
    )
    vocab = lm.LmVocabulary([lm.PAD_TOKEN, lm.UNK_TOKEN]
                            + [f"t{i}" for i in range(10)])
    rng = np.random.default_rng(seed)
    model = lm.LmModel.initialized(config, vocab, rng)
    pairs = []
    for _ in range(3):
        ids = rng.integers(0, config.vocab_size, size=config.seq_len)
        target = np.zeros(config.vocab_size)
        target[rng.integers(2, config.vocab_size, size=2)] = 1.0
        pairs.append(lm.TrainPair(input_ids=ids.astype(np.int64), target=target))
    return model, pairs


def max_relative_fd_error(model, pairs, coords_per_tensor, fd_rng, h=1e-5):
    """Max symmetric relative error between analytic and central-diff grads."""
    grads, _ = lm.backward(model, pairs)
    worst = 0.0
    for name in sorted(model.params):
        flat = model.params[name].ravel()
        gflat = grads[name].ravel()
        n_coords = min(coords_per_tensor, flat.size)
        idxs = fd_rng.choice(flat.size, size=n_coords, replace=False)
        for idx in idxs:
            orig = flat[idx]
            flat[idx] = orig + h
            loss_plus = lm.batch_loss(model, pairs)
            flat[idx] = orig - h
            loss_minus = lm.batch_loss(model, pairs)
            flat[idx] = orig
            fd = (loss_plus - loss_minus) / (2.0 * h)
            analytic = gflat[idx]
            rel = abs(analytic - fd) / max(abs(analytic) + abs(fd), 1e-8)
            worst = max(worst, rel)
    return worst
