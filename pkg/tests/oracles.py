"""Independent oracle implementations the tests compare against.

Each oracle deliberately uses a different algorithm from the library
code it checks: dynamic programming instead of greedy matching, full
span enumeration instead of run detection, exhaustive scans instead of
incremental maxima.
"""

from functools import lru_cache

from tableseek.core import tokens_equivalent


def naive_cont(s, t) -> bool:
    """O(|s|*|t|) dynamic-programming subsequence check."""
    s, t = tuple(s), tuple(t)

    @lru_cache(maxsize=None)
    def match(i: int, j: int) -> bool:
        if j == len(t):
            return True
        if i == len(s):
            return False
        if tokens_equivalent(s[i], t[j]) and match(i + 1, j + 1):
            return True
        return match(i + 1, j)

    return match(0, 0)


def brute_force_decode(probs, rho):
    """Enumerate every (span, type) candidate and apply the three cases.

    Returns (start, stop, tag_index, confidence) or None. A candidate
    span must have every inside token exceed rho for its type, no inside
    token exceed rho for another type, and no outside token exceed rho
    for any type. The unique maximal candidate (if any) wins.
    """
    n_tokens, n_labels = probs.shape
    n_types = n_labels - 1
    candidates = []
    for start in range(n_tokens):
        for stop in range(start + 1, n_tokens + 1):
            for tag in range(n_types):
                ok = True
                for i in range(n_tokens):
                    if start <= i < stop:
                        if probs[i][tag] <= rho:
                            ok = False
                            break
                        for other in range(n_types):
                            if other != tag and probs[i][other] > rho:
                                ok = False
                                break
                    else:
                        for other in range(n_types):
                            if probs[i][other] > rho:
                                ok = False
                                break
                    if not ok:
                        break
                if ok:
                    candidates.append((start, stop, tag))
    if not candidates:
        return None
    start, stop, tag = max(candidates, key=lambda c: c[1] - c[0])
    confidence = sum(probs[i][tag] for i in range(start, stop)) / (stop - start)
    return (start, stop, tag, confidence)


def exhaustive_select(scores, sr_ranks, theta):
    """Scan-everything answer selection: index of the winner or None."""
    best = None
    for i, s in enumerate(scores):
        if best is None:
            best = i
            continue
        if s > scores[best] or (s == scores[best] and sr_ranks[i] < sr_ranks[best]):
            best = i
    if best is None or scores[best] <= theta:
        return None
    return best


def recount_distinct_tokens(query_tokens, field_tokens) -> int:
    """Set-based recount of distinct query tokens present in a field."""
    return len(set(query_tokens) & set(field_tokens))


def auc(scores, labels) -> float:
    """Rank-based AUC (probability a positive outscores a negative)."""
    pos = [s for s, y in zip(scores, labels) if y == 1]
    neg = [s for s, y in zip(scores, labels) if y == 0]
    if not pos or not neg:
        raise ValueError("AUC needs both classes")
    wins = 0.0
    for p in pos:
        for n in neg:
            if p > n:
                wins += 1.0
            elif p == n:
                wins += 0.5
    return wins / (len(pos) * len(neg))
