"""Mini-batch gradient-descent training for the sequence tagger.

The loss is mean per-token cross-entropy of the normalized scores
against gold tags (negative log-likelihood per token for the CRF head).
Training is deterministic for a given seed: identical seed, data and
config serialize to bitwise-identical models.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ContractError, DataError
from ..train_data import O_TAG, LabeledExample
from .embeddings import EmbeddingTable
from .model import (
    TaggerModel,
    backward_batch,
    forward_batch,
    init_model,
)

_PROB_FLOOR = 1e-300


@dataclass(frozen=True)
class TrainingConfig:
    epochs: int = 10
    batch_size: int = 16
    learning_rate: float = 0.1
    momentum: float = 0.9
    seed: int = 0
    word_dim: int = 16
    char_dim: int = 8
    char_buckets: int = 256
    hidden_size: int = 16
    clip_norm: float | None = 5.0
    tags: tuple[str, ...] | None = None
    head: str = "softmax"


@dataclass
class TrainResult:
    model: TaggerModel
    epoch_losses: list[float]


def _as_token_tags(example) -> tuple[tuple[str, ...], tuple[str, ...]]:
    if isinstance(example, LabeledExample):
        return example.tokens, example.tags
    tokens, tags = example
    # Route through LabeledExample so the single-run/single-type
    # constraints are enforced uniformly.
    return LabeledExample(tuple(tokens), tuple(tags)).tokens, tuple(tags)


def _batch_loss_and_grads(model: TaggerModel, batch):
    """CE loss summed over tokens of equal-length sequences, plus grads."""
    tokens = [list(toks) for toks, _ in batch]
    scores, probs, cache = forward_batch(model, tokens)
    B, L, K = probs.shape
    gold = np.array(
        [[model.tag_index(tag) for tag in tags] for _, tags in batch]
    )
    rows = np.arange(B)[:, None], np.arange(L)[None, :]
    gold_p = probs[rows[0], rows[1], gold]
    loss = -np.log(np.maximum(gold_p, _PROB_FLOOR)).sum()
    if model.head == "crf":
        from .crf import sequence_nll_and_grads

        loss = 0.0
        dS = np.zeros_like(scores)
        crf_grads = {
            "crf_trans": np.zeros_like(model.params["crf_trans"]),
            "crf_start": np.zeros_like(model.params["crf_start"]),
            "crf_end": np.zeros_like(model.params["crf_end"]),
        }
        for b in range(B):
            nll, ds_b, g_trans, g_start, g_end = sequence_nll_and_grads(
                scores[b], gold[b], model.params
            )
            loss += nll
            dS[b] = ds_b
            crf_grads["crf_trans"] += g_trans
            crf_grads["crf_start"] += g_start
            crf_grads["crf_end"] += g_end
        grads = backward_batch(model, cache, dS)
        grads.update(crf_grads)
        return loss, B * L, grads
    dS = probs.copy()
    dS[rows[0], rows[1], gold] -= 1.0
    grads = backward_batch(model, cache, dS)
    return loss, B * L, grads


def _accumulate(total: dict, part: dict) -> None:
    for name, grad in part.items():
        if name in total:
            total[name] += grad
        else:
            total[name] = grad.copy()


def train(
    examples,
    config: TrainingConfig = TrainingConfig(),
    embeddings: EmbeddingTable | None = None,
) -> TrainResult:
    """Train a tagger; returns the model and per-epoch mean token loss.

    When no embedding table is supplied, a seeded random table over the
    corpus vocabulary is built (engineered or pretrained tables plug in
    through ``embeddings``). Word vectors stay fixed; the char trigram
    table, LSTM blocks and decode layer are learned.
    """
    data = [_as_token_tags(ex) for ex in examples]
    if not data:
        raise DataError("no training examples")
    tags = config.tags
    if tags is None:
        tags = tuple(
            sorted({t for _, ex_tags in data for t in ex_tags if t != O_TAG})
        )
    if not tags:
        raise DataError("training data contains no entity-type tags")
    known = set(tags) | {O_TAG}
    for toks, ex_tags in data:
        bad = set(ex_tags) - known
        if bad:
            raise DataError(f"example uses unknown tags {sorted(bad)}")
    if embeddings is None:
        vocab = sorted({tok for toks, _ in data for tok in toks})
        embeddings = EmbeddingTable.random(
            vocab, config.word_dim, seed=config.seed
        )
    model = init_model(
        tags,
        embeddings,
        hidden_size=config.hidden_size,
        char_dim=config.char_dim,
        char_buckets=config.char_buckets,
        seed=config.seed,
        head=config.head,
    )
    rng = np.random.default_rng(config.seed)
    velocity = {name: np.zeros_like(arr) for name, arr in model.params.items()}
    epoch_losses: list[float] = []
    for _ in range(config.epochs):
        order = rng.permutation(len(data))
        epoch_loss = 0.0
        epoch_tokens = 0
        for start in range(0, len(order), config.batch_size):
            chunk = [data[i] for i in order[start : start + config.batch_size]]
            by_length: dict[int, list] = {}
            for item in chunk:
                by_length.setdefault(len(item[0]), []).append(item)
            grads: dict[str, np.ndarray] = {}
            chunk_loss = 0.0
            chunk_tokens = 0
            for length in sorted(by_length):
                loss, count, part = _batch_loss_and_grads(
                    model, by_length[length]
                )
                chunk_loss += loss
                chunk_tokens += count
                _accumulate(grads, part)
            scale = 1.0 / chunk_tokens
            for name in grads:
                grads[name] *= scale
            if config.clip_norm is not None:
                norm = np.sqrt(
                    sum(float((g * g).sum()) for g in grads.values())
                )
                if norm > config.clip_norm:
                    shrink = config.clip_norm / norm
                    for name in grads:
                        grads[name] *= shrink
            for name, grad in grads.items():
                velocity[name] = (
                    config.momentum * velocity[name]
                    - config.learning_rate * grad
                )
                model.params[name] += velocity[name]
            epoch_loss += chunk_loss
            epoch_tokens += chunk_tokens
        epoch_losses.append(float(epoch_loss / epoch_tokens))
    return TrainResult(model, epoch_losses)


def example_loss(model: TaggerModel, example) -> float:
    """Mean per-token loss of one example under the current parameters."""
    toks, tags = _as_token_tags(example)
    loss, count, _ = _batch_loss_and_grads(model, [(toks, tags)])
    return loss / count


def _example_loss_only(model: TaggerModel, toks, tags):
    """Forward-only loss; dtype follows the parameter arrays."""
    scores, probs, _ = forward_batch(model, [list(toks)])
    gold = [model.tag_index(tag) for tag in tags]
    if model.head == "crf":
        from .crf import sequence_nll_and_grads

        nll, *_ = sequence_nll_and_grads(
            scores[0], np.array(gold), model.params
        )
        return nll / len(toks)
    gold_p = probs[0, np.arange(len(toks)), gold]
    return -np.log(np.maximum(gold_p, _PROB_FLOOR)).sum() / len(toks)


def gradient_check(model: TaggerModel, example, epsilon: float = 1e-4) -> float:
    """Max relative error of analytic vs central-difference gradients.

    Perturbs every trainable parameter entry by +-epsilon and compares
    (loss+ - loss-) / 2 eps against the backpropagated gradient using
    |ga - gf| / max(|ga|, |gf|, 1e-8). The difference losses are
    evaluated in extended precision so that round-off in the probe does
    not mask (or fake) errors in the double-precision backward pass.
    """
    if epsilon <= 0:
        raise ContractError("epsilon must be positive")
    toks, tags = _as_token_tags(example)
    _, count, grads = _batch_loss_and_grads(model, [(toks, tags)])
    scale = 1.0 / count
    fd_model = TaggerModel(
        model.embeddings,
        model.char,
        model.tags,
        model.hidden_size,
        {name: arr.astype(np.longdouble) for name, arr in model.params.items()},
        model.head,
    )
    eps = np.longdouble(epsilon)
    worst = 0.0
    for name, arr in fd_model.params.items():
        analytic = (grads[name] * scale).ravel()
        flat = arr.ravel()
        for idx in range(flat.size):
            original = flat[idx]
            flat[idx] = original + eps
            plus = _example_loss_only(fd_model, toks, tags)
            flat[idx] = original - eps
            minus = _example_loss_only(fd_model, toks, tags)
            flat[idx] = original
            fd = float((plus - minus) / (2.0 * eps))
            ga = float(analytic[idx])
            err = abs(ga - fd) / max(abs(ga), abs(fd), 1e-8)
            worst = max(worst, err)
    return worst
