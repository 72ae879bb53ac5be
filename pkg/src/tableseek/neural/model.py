"""Bidirectional-LSTM sequence tagger with adapted-softmax decoding.

The model tags each query token with an entity type or O. Trainable
parameters live in a flat dict of float64 arrays: the hashed character
trigram table, one LSTM block per direction (gate order i, f, o, g,
stacked along the first axis), and the affine decode layer. Word
embeddings are a fixed input table, as with pretrained vectors.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from ..core import Intent, Query, TaggedQuery
from ..errors import ContractError, DataError, ModelIntegrityError
from .embeddings import CharEncoder, EmbeddingTable

O_TAG = "O"


def _sigmoid(x):
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def softmax_rows(scores: np.ndarray) -> np.ndarray:
    shifted = scores - scores.max(axis=-1, keepdims=True)
    exp = np.exp(shifted)
    return exp / exp.sum(axis=-1, keepdims=True)


@dataclass
class TaggerModel:
    """Embeddings, char encoder, BiLSTM blocks and decode layer.

    ``tags`` lists the entity-type tags in decode-index order; the O tag
    occupies the final index. ``hidden_size`` is the concatenated hidden
    width k (k/2 per direction).
    """

    embeddings: EmbeddingTable
    char: CharEncoder
    tags: tuple[str, ...]
    hidden_size: int
    params: dict[str, np.ndarray]
    head: str = "softmax"

    @property
    def word_dim(self) -> int:
        return self.embeddings.dim

    @property
    def input_dim(self) -> int:
        return self.embeddings.dim + self.char.dim

    @property
    def num_labels(self) -> int:
        return len(self.tags) + 1

    @property
    def o_index(self) -> int:
        return len(self.tags)

    def tag_index(self, tag: str) -> int:
        if tag == O_TAG:
            return self.o_index
        try:
            return self.tags.index(tag)
        except ValueError:
            raise DataError(f"unknown tag {tag!r}") from None


def validate_model(model: TaggerModel) -> None:
    """Check every parameter shape against the declared dimensions."""
    if model.hidden_size <= 0 or model.hidden_size % 2 != 0:
        raise ModelIntegrityError(
            f"hidden_size must be positive and even, got {model.hidden_size}"
        )
    if len(set(model.tags)) != len(model.tags) or O_TAG in model.tags:
        raise ModelIntegrityError("tags must be distinct non-O identifiers")
    half = model.hidden_size // 2
    n = model.input_dim
    expected = {
        "char_emb": (model.char.buckets, model.char.dim),
        "w_fwd": (4 * half, n),
        "u_fwd": (4 * half, half),
        "b_fwd": (4 * half,),
        "w_bwd": (4 * half, n),
        "u_bwd": (4 * half, half),
        "b_bwd": (4 * half,),
        "w_out": (model.num_labels, model.hidden_size),
        "b_out": (model.num_labels,),
    }
    if model.head == "crf":
        expected["crf_trans"] = (model.num_labels, model.num_labels)
        expected["crf_start"] = (model.num_labels,)
        expected["crf_end"] = (model.num_labels,)
    elif model.head != "softmax":
        raise ModelIntegrityError(f"unknown head {model.head!r}")
    for name, shape in expected.items():
        arr = model.params.get(name)
        if arr is None:
            raise ModelIntegrityError(f"missing parameter {name!r}")
        if arr.shape != shape:
            raise ModelIntegrityError(
                f"parameter {name!r} has shape {arr.shape}, expected {shape}"
            )
    extra = set(model.params) - set(expected)
    if extra:
        raise ModelIntegrityError(f"unexpected parameters {sorted(extra)}")


def init_model(
    tags,
    embeddings: EmbeddingTable,
    hidden_size: int = 16,
    char_dim: int = 8,
    char_buckets: int = 256,
    seed: int = 0,
    head: str = "softmax",
) -> TaggerModel:
    """Seed-deterministic uniform(+-1/sqrt(fan-in)) initialization."""
    tags = tuple(tags)
    char = CharEncoder(char_buckets, char_dim)
    half = hidden_size // 2
    n = embeddings.dim + char_dim
    num_labels = len(tags) + 1
    rng = np.random.default_rng(seed)

    def uniform(shape, fan_in):
        scale = 1.0 / np.sqrt(fan_in)
        return rng.uniform(-scale, scale, size=shape)

    params = {
        "char_emb": uniform((char_buckets, char_dim), char_dim),
        "w_fwd": uniform((4 * half, n), n),
        "u_fwd": uniform((4 * half, half), half),
        "b_fwd": np.zeros(4 * half),
        "w_bwd": uniform((4 * half, n), n),
        "u_bwd": uniform((4 * half, half), half),
        "b_bwd": np.zeros(4 * half),
        "w_out": uniform((num_labels, hidden_size), hidden_size),
        "b_out": np.zeros(num_labels),
    }
    if head == "crf":
        params["crf_trans"] = np.zeros((num_labels, num_labels))
        params["crf_start"] = np.zeros(num_labels)
        params["crf_end"] = np.zeros(num_labels)
    model = TaggerModel(embeddings, char, tags, hidden_size, params, head)
    validate_model(model)
    return model


def _word_matrix(model: TaggerModel, batch_tokens) -> np.ndarray:
    B, L = len(batch_tokens), len(batch_tokens[0])
    out = np.zeros((B, L, model.word_dim))
    for b, toks in enumerate(batch_tokens):
        for t, tok in enumerate(toks):
            out[b, t] = model.embeddings.lookup(tok)
    return out


def _trigram_ids(model: TaggerModel, batch_tokens):
    return [
        [model.char.trigram_ids(tok) for tok in toks] for toks in batch_tokens
    ]


def _char_matrix(model: TaggerModel, tri_ids) -> np.ndarray:
    B, L = len(tri_ids), len(tri_ids[0])
    table = model.params["char_emb"]
    out = np.zeros((B, L, model.char.dim), dtype=table.dtype)
    for b in range(B):
        for t in range(L):
            ids = tri_ids[b][t]
            if ids:
                out[b, t] = table[ids].mean(axis=0)
    return out


def _lstm_direction(params, prefix: str, X: np.ndarray):
    """Run one LSTM direction over (B, L, n) inputs; returns (H, cache)."""
    W, U, b = params[f"w_{prefix}"], params[f"u_{prefix}"], params[f"b_{prefix}"]
    half = U.shape[1]
    B, L, _ = X.shape
    h = np.zeros((B, half), dtype=W.dtype)
    c = np.zeros((B, half), dtype=W.dtype)
    out = np.zeros((B, L, half), dtype=W.dtype)
    steps = range(L) if prefix == "fwd" else range(L - 1, -1, -1)
    cache = {}
    for t in steps:
        x = X[:, t, :]
        z = x @ W.T + h @ U.T + b
        i = _sigmoid(z[:, :half])
        f = _sigmoid(z[:, half : 2 * half])
        o = _sigmoid(z[:, 2 * half : 3 * half])
        g = np.tanh(z[:, 3 * half :])
        c_new = f * c + i * g
        tc = np.tanh(c_new)
        h_new = o * tc
        cache[t] = (x, h, c, i, f, o, g, tc)
        h, c = h_new, c_new
        out[:, t, :] = h
    return out, cache


def _lstm_direction_backward(params, prefix: str, cache, dH):
    """Backpropagate through one direction; returns grads and dX."""
    W, U = params[f"w_{prefix}"], params[f"u_{prefix}"]
    half = U.shape[1]
    B, L, _ = dH.shape
    dW = np.zeros_like(W)
    dU = np.zeros_like(U)
    db = np.zeros(4 * half)
    dX = np.zeros((B, L, W.shape[1]))
    dh_next = np.zeros((B, half))
    dc_next = np.zeros((B, half))
    steps = range(L - 1, -1, -1) if prefix == "fwd" else range(L)
    for t in steps:
        x, h_prev, c_prev, i, f, o, g, tc = cache[t]
        dh = dH[:, t, :] + dh_next
        do = dh * tc
        dc = dh * o * (1.0 - tc * tc) + dc_next
        di = dc * g
        df = dc * c_prev
        dg = dc * i
        dz = np.concatenate(
            [
                di * i * (1.0 - i),
                df * f * (1.0 - f),
                do * o * (1.0 - o),
                dg * (1.0 - g * g),
            ],
            axis=1,
        )
        dW += dz.T @ x
        dU += dz.T @ h_prev
        db += dz.sum(axis=0)
        dX[:, t, :] = dz @ W
        dh_next = dz @ U
        dc_next = dc * f
    return dW, dU, db, dX


def forward_batch(model: TaggerModel, batch_tokens):
    """Forward pass over same-length token sequences.

    Returns scores (B, L, K), probs and a cache for backprop.
    """
    if not batch_tokens or not batch_tokens[0]:
        raise ContractError("forward requires at least one non-empty sequence")
    length = len(batch_tokens[0])
    if any(len(toks) != length for toks in batch_tokens):
        raise ContractError("forward_batch requires equal-length sequences")
    validate_model(model)
    tri_ids = _trigram_ids(model, batch_tokens)
    word_x = _word_matrix(model, batch_tokens)
    char_x = _char_matrix(model, tri_ids)
    X = np.concatenate([word_x, char_x], axis=2)
    h_fwd, cache_fwd = _lstm_direction(model.params, "fwd", X)
    h_bwd, cache_bwd = _lstm_direction(model.params, "bwd", X)
    H = np.concatenate([h_fwd, h_bwd], axis=2)
    B, L, _ = H.shape
    flat = H.reshape(B * L, model.hidden_size)
    scores = (flat @ model.params["w_out"].T + model.params["b_out"]).reshape(
        B, L, model.num_labels
    )
    probs = softmax_rows(scores)
    cache = {
        "tri_ids": tri_ids,
        "H": H,
        "cache_fwd": cache_fwd,
        "cache_bwd": cache_bwd,
        "probs": probs,
    }
    return scores, probs, cache


def backward_batch(model: TaggerModel, cache, dS: np.ndarray):
    """Backpropagate decode-layer score gradients into parameter grads."""
    B, L, K = dS.shape
    half = model.hidden_size // 2
    H = cache["H"]
    flat_ds = dS.reshape(B * L, K)
    flat_h = H.reshape(B * L, model.hidden_size)
    grads = {
        "w_out": flat_ds.T @ flat_h,
        "b_out": flat_ds.sum(axis=0),
    }
    dH = (flat_ds @ model.params["w_out"]).reshape(B, L, model.hidden_size)
    dw_f, du_f, db_f, dx_f = _lstm_direction_backward(
        model.params, "fwd", cache["cache_fwd"], dH[:, :, :half]
    )
    dw_b, du_b, db_b, dx_b = _lstm_direction_backward(
        model.params, "bwd", cache["cache_bwd"], dH[:, :, half:]
    )
    grads.update(
        w_fwd=dw_f, u_fwd=du_f, b_fwd=db_f, w_bwd=dw_b, u_bwd=du_b, b_bwd=db_b
    )
    dX = dx_f + dx_b
    d_char = dX[:, :, model.word_dim :]
    d_table = np.zeros_like(model.params["char_emb"])
    tri_ids = cache["tri_ids"]
    for b in range(B):
        for t in range(L):
            ids = tri_ids[b][t]
            if ids:
                share = d_char[b, t] / len(ids)
                for idx in ids:
                    d_table[idx] += share
    grads["char_emb"] = d_table
    return grads


@dataclass(frozen=True)
class TokenScoreMatrix:
    """Per-token raw scores and softmax-normalized probabilities.

    Row i holds token i's score for each tag; the O tag is the final
    column. Each probability row sums to 1 and preserves the argmax of
    the corresponding score row.
    """

    query: Query
    tags: tuple[str, ...]
    scores: np.ndarray
    probs: np.ndarray

    def __post_init__(self):
        L, K = self.scores.shape
        if self.probs.shape != (L, K):
            raise ContractError("scores/probs shape mismatch")
        if K != len(self.tags) + 1:
            raise ContractError("tag count inconsistent with score width")
        if L != len(self.query.toks):
            raise ContractError("token count inconsistent with score rows")
        sums = self.probs.sum(axis=1)
        if np.any(np.abs(sums - 1.0) > 1e-9):
            raise ContractError("probability rows must sum to 1")
        if not np.array_equal(
            np.argmax(self.scores, axis=1), np.argmax(self.probs, axis=1)
        ):
            raise ContractError("normalization must preserve the score argmax")

    @property
    def o_index(self) -> int:
        return len(self.tags)


def forward(model: TaggerModel, q: Query) -> TokenScoreMatrix:
    """Score every token of a query against every tag."""
    if not q.toks:
        raise ContractError("forward requires a query with at least one token")
    scores, probs, _ = forward_batch(model, [list(q.toks)])
    return TokenScoreMatrix(q, model.tags, scores[0], probs[0])


def decode(
    p: TokenScoreMatrix, rho: float, intent: Intent
) -> TaggedQuery | None:
    """Adapted-softmax decoding with threshold ``rho``.

    Null when no token exceeds rho on an entity-type tag; a tagged query
    when the exceedances form exactly one contiguous run of one type
    (confidence = the run's mean probability for that type); null again
    for non-contiguous exceedances or multiple exceeding types.
    """
    if not (0.0 < rho < 1.0):
        raise ContractError(f"rho must lie in (0, 1), got {rho}")
    exceed = [
        (i, j)
        for i in range(p.probs.shape[0])
        for j in range(len(p.tags))
        if p.probs[i, j] > rho
    ]
    if not exceed:
        return None
    types = {j for _, j in exceed}
    if len(types) != 1:
        return None
    positions = sorted(i for i, _ in exceed)
    start, stop = positions[0], positions[-1] + 1
    if positions != list(range(start, stop)):
        return None
    j = types.pop()
    confidence = sum(p.probs[i, j] for i in range(start, stop)) / (stop - start)
    return TaggedQuery(p.query, intent, (start, stop), p.tags[j], confidence)


def predict_tagged_query(
    model: TaggerModel,
    q: Query,
    rho: float,
    intent: Intent = Intent.LIST,
) -> TaggedQuery | None:
    """Composition of forward and decode."""
    if model.head == "crf":
        from .crf import marginal_probabilities

        return decode(marginal_probabilities(model, q), rho, intent)
    return decode(forward(model, q), rho, intent)


MODEL_FORMAT_VERSION = 1


def dump_model_json(model: TaggerModel) -> str:
    """Canonical JSON serialization; identical models give identical bytes."""
    validate_model(model)
    payload = {
        "format_version": MODEL_FORMAT_VERSION,
        "head": model.head,
        "hidden_size": model.hidden_size,
        "tags": list(model.tags),
        "char": {"buckets": model.char.buckets, "dim": model.char.dim},
        "embeddings": {
            "dim": model.embeddings.dim,
            "fallback_seed": model.embeddings.fallback_seed,
            "fallback_buckets": model.embeddings.fallback_buckets,
            "vectors": {
                tok: model.embeddings.vectors[tok].tolist()
                for tok in sorted(model.embeddings.vectors)
            },
        },
        "params": {
            name: {"shape": list(arr.shape), "data": arr.ravel().tolist()}
            for name, arr in sorted(model.params.items())
        },
    }
    return json.dumps(payload, sort_keys=True, separators=(",", ":"))


def save_model(model: TaggerModel, path) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        handle.write(dump_model_json(model))


def load_model_json(text: str) -> TaggerModel:
    payload = json.loads(text)
    version = payload.get("format_version")
    if version != MODEL_FORMAT_VERSION:
        raise DataError(f"unsupported model format version {version!r}")
    emb = payload["embeddings"]
    embeddings = EmbeddingTable(
        emb["dim"],
        {tok: np.array(vec) for tok, vec in emb["vectors"].items()},
        fallback_seed=emb["fallback_seed"],
        fallback_buckets=emb["fallback_buckets"],
    )
    char = CharEncoder(payload["char"]["buckets"], payload["char"]["dim"])
    params = {
        name: np.array(rec["data"]).reshape(rec["shape"])
        for name, rec in payload["params"].items()
    }
    model = TaggerModel(
        embeddings,
        char,
        tuple(payload["tags"]),
        payload["hidden_size"],
        params,
        payload["head"],
    )
    validate_model(model)
    return model


def load_model(path) -> TaggerModel:
    with open(path, encoding="utf-8") as handle:
        return load_model_json(handle.read())
