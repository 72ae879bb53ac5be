"""Table-answer classifier (gradient boosted trees) and answer selection.

Boosting minimizes logistic loss: each round fits a depth-limited
regression tree to the loss gradients with exact greedy splits and
Newton leaf values, scaled by a shrinkage factor. Scores pass through a
sigmoid so F(Q,T) lies in (0,1) and the selection threshold is
comparable across models.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
import numpy as np

from .core import TaggedQuery
from .errors import ContractError, DataError
from .features import FEATURE_NAMES, FeatureVector, IdfTable, UNIFORM_IDF, featurize
from .tables import CandidatePool, WebTable

SELECTOR_FORMAT_VERSION = 1


@dataclass(frozen=True)
class TreeNode:
    """Axis-aligned regression tree node; leaves carry the fitted value."""

    value: float | None = None
    feature: int | None = None
    threshold: float | None = None
    left: "TreeNode | None" = None
    right: "TreeNode | None" = None

    @property
    def is_leaf(self) -> bool:
        return self.value is not None

    def predict_one(self, x) -> float:
        node = self
        while not node.is_leaf:
            node = node.left if x[node.feature] <= node.threshold else node.right
        return node.value

    def to_dict(self) -> dict:
        if self.is_leaf:
            return {"value": self.value}
        return {
            "feature": self.feature,
            "threshold": self.threshold,
            "left": self.left.to_dict(),
            "right": self.right.to_dict(),
        }

    @classmethod
    def from_dict(cls, record: dict) -> "TreeNode":
        if "value" in record:
            return cls(value=record["value"])
        return cls(
            feature=record["feature"],
            threshold=record["threshold"],
            left=cls.from_dict(record["left"]),
            right=cls.from_dict(record["right"]),
        )


@dataclass
class SelectorModel:
    trees: list[TreeNode]
    learning_rate: float
    base_score: float
    feature_names: tuple[str, ...]

    def raw_score(self, x) -> float:
        return self.base_score + self.learning_rate * sum(
            tree.predict_one(x) for tree in self.trees
        )


@dataclass(frozen=True)
class SelectorConfig:
    rounds: int = 200
    depth: int = 4
    learning_rate: float = 0.1
    seed: int = 0
    reg_lambda: float = 1.0
    min_gain: float = 1e-12


@dataclass
class SelectorTrainResult:
    model: SelectorModel
    round_losses: list[float]


def _sigmoid(x):
    return 1.0 / (1.0 + np.exp(-np.clip(x, -60, 60)))


def _to_matrix(pairs):
    features = []
    labels = []
    names = None
    for fv, label in pairs:
        if isinstance(fv, FeatureVector):
            row = fv.values
            names = FEATURE_NAMES
        else:
            row = tuple(float(v) for v in fv)
        features.append(row)
        labels.append(label)
    if not features:
        raise DataError("no training pairs")
    widths = {len(row) for row in features}
    if len(widths) != 1:
        raise ContractError(f"inconsistent feature counts {sorted(widths)}")
    X = np.asarray(features, dtype=np.float64)
    y = np.asarray(labels, dtype=np.float64)
    if names is None:
        names = tuple(f"f{i}" for i in range(X.shape[1]))
    return X, y, names


def _best_split(X, g, h, idx, reg_lambda):
    G, H = g[idx].sum(), h[idx].sum()
    parent = G * G / (H + reg_lambda)
    best_gain = -np.inf
    best = None
    for f in range(X.shape[1]):
        vals = X[idx, f]
        order = np.argsort(vals, kind="stable")
        sv = vals[order]
        if sv[0] == sv[-1]:
            continue
        cg = np.cumsum(g[idx][order])[:-1]
        ch = np.cumsum(h[idx][order])[:-1]
        valid = sv[:-1] != sv[1:]
        gl = cg
        hl = ch
        gr = G - gl
        hr = H - hl
        gains = gl * gl / (hl + reg_lambda) + gr * gr / (hr + reg_lambda) - parent
        gains = np.where(valid, gains, -np.inf)
        pos = int(np.argmax(gains))
        if gains[pos] > best_gain:
            best_gain = float(gains[pos])
            best = (f, (sv[pos] + sv[pos + 1]) / 2.0)
    return best_gain, best


def _fit_tree(X, g, h, idx, depth, reg_lambda, min_gain):
    G, H = g[idx].sum(), h[idx].sum()
    leaf = TreeNode(value=float(-G / (H + reg_lambda)))
    if depth <= 0 or len(idx) < 2:
        return leaf
    gain, split = _best_split(X, g, h, idx, reg_lambda)
    if split is None or gain <= min_gain:
        return leaf
    feature, threshold = split
    mask = X[idx, feature] <= threshold
    left_idx = idx[mask]
    right_idx = idx[~mask]
    if len(left_idx) == 0 or len(right_idx) == 0:
        return leaf
    return TreeNode(
        feature=feature,
        threshold=float(threshold),
        left=_fit_tree(X, g, h, left_idx, depth - 1, reg_lambda, min_gain),
        right=_fit_tree(X, g, h, right_idx, depth - 1, reg_lambda, min_gain),
    )


def _predict_matrix(tree: TreeNode, X) -> np.ndarray:
    return np.array([tree.predict_one(x) for x in X])


def train_selector(
    pairs, config: SelectorConfig = SelectorConfig()
) -> SelectorTrainResult:
    """Boost regression trees on logistic loss over labeled feature vectors.

    Deterministic for a given config; returns the model plus the
    per-round mean training loss.
    """
    X, y, names = _to_matrix(pairs)
    classes = set(np.unique(y))
    if not classes <= {0.0, 1.0}:
        raise DataError(f"labels must be 0/1, got {sorted(classes)}")
    if len(classes) < 2:
        raise DataError("training data must contain both classes")
    mean = float(y.mean())
    mean = min(max(mean, 1e-6), 1.0 - 1e-6)
    base = math.log(mean / (1.0 - mean))
    F = np.full(len(y), base)
    trees: list[TreeNode] = []
    losses: list[float] = []
    all_idx = np.arange(len(y))
    for _ in range(config.rounds):
        p = _sigmoid(F)
        g = p - y
        h = np.maximum(p * (1.0 - p), 1e-12)
        tree = _fit_tree(
            X, g, h, all_idx, config.depth, config.reg_lambda, config.min_gain
        )
        trees.append(tree)
        F = F + config.learning_rate * _predict_matrix(tree, X)
        p = np.clip(_sigmoid(F), 1e-12, 1.0 - 1e-12)
        losses.append(float(-(y * np.log(p) + (1 - y) * np.log(1 - p)).mean()))
    model = SelectorModel(trees, config.learning_rate, base, names)
    return SelectorTrainResult(model, losses)


def score(model: SelectorModel, fv) -> float:
    """Classifier score F(Q,T) in (0,1) for one feature vector."""
    if isinstance(fv, FeatureVector):
        if model.feature_names != FEATURE_NAMES:
            raise ContractError(
                "model fingerprint does not match the FeatureVector order"
            )
        x = fv.values
    else:
        x = tuple(float(v) for v in fv)
        if len(x) != len(model.feature_names):
            raise ContractError(
                f"expected {len(model.feature_names)} features, got {len(x)}"
            )
    return float(_sigmoid(np.array(model.raw_score(x))))


@dataclass(frozen=True)
class SelectionResult:
    """Outcome of answer selection over a candidate pool.

    ``best_table`` is non-null exactly when ``best_score`` exceeded the
    threshold; ``all_scores`` aligns with the pool's table order.
    """

    best_table: WebTable | None
    best_score: float
    all_scores: tuple[float, ...]


def select_answer(
    tq: TaggedQuery,
    pool: CandidatePool,
    model: SelectorModel,
    theta: float,
    idf: IdfTable = UNIFORM_IDF,
    td=None,
) -> SelectionResult:
    """Score every candidate, return the argmax if it clears ``theta``.

    Ties break toward the lower search-result rank, then extraction
    order. An empty pool or a sub-threshold maximum yields a null result.
    """
    if not (0.0 < theta < 1.0):
        raise ContractError(f"theta must lie in (0, 1), got {theta}")
    if not pool.tables:
        return SelectionResult(None, 0.0, ())
    scores = tuple(
        score(model, featurize(tq, table, idf, td)) for table in pool.tables
    )
    best_idx = 0
    for i in range(1, len(scores)):
        better = scores[i] > scores[best_idx]
        tie = scores[i] == scores[best_idx]
        if better or (
            tie and pool.tables[i].doc.sr_rank < pool.tables[best_idx].doc.sr_rank
        ):
            best_idx = i
    best_score = scores[best_idx]
    if best_score > theta:
        return SelectionResult(pool.tables[best_idx], best_score, scores)
    return SelectionResult(None, best_score, scores)


def dump_selector_json(model: SelectorModel) -> str:
    payload = {
        "format_version": SELECTOR_FORMAT_VERSION,
        "learning_rate": model.learning_rate,
        "base_score": model.base_score,
        "feature_names": list(model.feature_names),
        "trees": [tree.to_dict() for tree in model.trees],
    }
    return json.dumps(payload, sort_keys=True, separators=(",", ":"))


def save_selector(model: SelectorModel, path) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        handle.write(dump_selector_json(model))


def load_selector_json(text: str) -> SelectorModel:
    payload = json.loads(text)
    version = payload.get("format_version")
    if version != SELECTOR_FORMAT_VERSION:
        raise DataError(f"unsupported selector format version {version!r}")
    return SelectorModel(
        trees=[TreeNode.from_dict(t) for t in payload["trees"]],
        learning_rate=payload["learning_rate"],
        base_score=payload["base_score"],
        feature_names=tuple(payload["feature_names"]),
    )


def load_selector(path) -> SelectorModel:
    with open(path, encoding="utf-8") as handle:
        return load_selector_json(handle.read())
