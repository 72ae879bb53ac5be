"""Optional CRF prediction head for the sequence tagger.

Exists to compare holistic (CRF) against local (softmax) prediction at
fixture scale. Training uses exact negative log-likelihood gradients
from the forward-backward algorithm; inference offers Viterbi paths and
per-token marginal probabilities. The marginals plug into the same
threshold decoding as the softmax head.
"""

from __future__ import annotations

import numpy as np

from ..core import Query
from ..errors import ContractError
from .model import TaggerModel, TokenScoreMatrix, forward_batch


def _logsumexp(x, axis=None):
    if axis is None:
        m = np.max(x)
        return np.log(np.sum(np.exp(x - m))) + m
    m = np.max(x, axis=axis, keepdims=True)
    out = np.log(np.sum(np.exp(x - m), axis=axis, keepdims=True)) + m
    return np.squeeze(out, axis=axis)


def _forward_alphas(scores, trans, start):
    L, K = scores.shape
    alphas = np.zeros((L, K), dtype=scores.dtype)
    alphas[0] = start + scores[0]
    for t in range(1, L):
        alphas[t] = scores[t] + _logsumexp(
            alphas[t - 1][:, None] + trans, axis=0
        )
    return alphas


def _backward_betas(scores, trans, end):
    L, K = scores.shape
    betas = np.zeros((L, K), dtype=scores.dtype)
    betas[L - 1] = end
    for t in range(L - 2, -1, -1):
        betas[t] = _logsumexp(
            trans + scores[t + 1][None, :] + betas[t + 1][None, :], axis=1
        )
    return betas


def sequence_nll_and_grads(scores, gold, params):
    """Negative log-likelihood of the gold path plus exact gradients.

    Returns (nll, dScores, dTrans, dStart, dEnd). Gradients are the
    model marginals minus the gold indicators.
    """
    trans = params["crf_trans"]
    start = params["crf_start"]
    end = params["crf_end"]
    L, K = scores.shape
    alphas = _forward_alphas(scores, trans, start)
    betas = _backward_betas(scores, trans, end)
    log_z = _logsumexp(alphas[L - 1] + end)

    gold_score = start[gold[0]] + scores[0, gold[0]]
    for t in range(1, L):
        gold_score += trans[gold[t - 1], gold[t]] + scores[t, gold[t]]
    gold_score += end[gold[L - 1]]
    nll = log_z - gold_score

    token_marginals = np.exp(alphas + betas - log_z)
    d_scores = token_marginals.copy()
    d_scores[np.arange(L), gold] -= 1.0

    d_trans = np.zeros_like(trans)
    for t in range(L - 1):
        pair = np.exp(
            alphas[t][:, None]
            + trans
            + scores[t + 1][None, :]
            + betas[t + 1][None, :]
            - log_z
        )
        d_trans += pair
        d_trans[gold[t], gold[t + 1]] -= 1.0

    d_start = token_marginals[0].copy()
    d_start[gold[0]] -= 1.0
    d_end = token_marginals[L - 1].copy()
    d_end[gold[L - 1]] -= 1.0
    return nll, d_scores, d_trans, d_start, d_end


def viterbi(scores, trans, start, end) -> list[int]:
    """Most likely tag path; ties break toward the lower tag index."""
    L, K = scores.shape
    best = start + scores[0]
    back = np.zeros((L, K), dtype=int)
    for t in range(1, L):
        candidate = best[:, None] + trans
        back[t] = np.argmax(candidate, axis=0)
        best = candidate[back[t], np.arange(K)] + scores[t]
    best += end
    path = [int(np.argmax(best))]
    for t in range(L - 1, 0, -1):
        path.append(int(back[t][path[-1]]))
    return path[::-1]


def marginal_probabilities(model: TaggerModel, q: Query) -> TokenScoreMatrix:
    """Per-token marginal tag distributions under the CRF head.

    Packaged as a TokenScoreMatrix (scores = log marginals) so the
    adapted-softmax decoding applies unchanged.
    """
    if model.head != "crf":
        raise ContractError("model does not have a CRF head")
    if not q.toks:
        raise ContractError("query must have at least one token")
    scores, _, _ = forward_batch(model, [list(q.toks)])
    emission = scores[0]
    trans = model.params["crf_trans"]
    start = model.params["crf_start"]
    end = model.params["crf_end"]
    alphas = _forward_alphas(emission, trans, start)
    betas = _backward_betas(emission, trans, end)
    log_z = _logsumexp(alphas[-1] + end)
    log_marginals = alphas + betas - log_z
    marginals = np.exp(log_marginals)
    marginals /= marginals.sum(axis=1, keepdims=True)
    return TokenScoreMatrix(q, model.tags, log_marginals, marginals)


def viterbi_path(model: TaggerModel, q: Query) -> list[str]:
    """Viterbi-decoded tag names for a query."""
    if model.head != "crf":
        raise ContractError("model does not have a CRF head")
    scores, _, _ = forward_batch(model, [list(q.toks)])
    path = viterbi(
        scores[0],
        model.params["crf_trans"],
        model.params["crf_start"],
        model.params["crf_end"],
    )
    names = list(model.tags) + ["O"]
    return [names[i] for i in path]
