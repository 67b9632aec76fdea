"""Reference implementations written independently of the package.

These are deliberately naive: full tables, explicit backtraces, plain
enumeration. They exist only to be compared against the real code.
"""

from __future__ import annotations

import itertools
from functools import lru_cache


def dp_alignment(ref, hyp):
    """Full-table Levenshtein with lexicographic (edits, gaps) cost.

    Returns (S, D, I). Each cell stores the whole count tuple so the
    winning path is carried along instead of recovered by backtrace.
    """
    n, m = len(ref), len(hyp)
    # cell = (edits, gaps, S, D, I)
    table = [[None] * (m + 1) for _ in range(n + 1)]
    table[0][0] = (0, 0, 0, 0, 0)
    for i in range(1, n + 1):
        e, g, s, d, ins = table[i - 1][0]
        table[i][0] = (e + 1, g + 1, s, d + 1, ins)
    for j in range(1, m + 1):
        e, g, s, d, ins = table[0][j - 1]
        table[0][j] = (e + 1, g + 1, s, d, ins + 1)
    for i in range(1, n + 1):
        for j in range(1, m + 1):
            e, g, s, d, ins = table[i - 1][j - 1]
            if ref[i - 1] == hyp[j - 1]:
                diag = (e, g, s, d, ins)
            else:
                diag = (e + 1, g, s + 1, d, ins)
            e, g, s, d, ins = table[i - 1][j]
            up = (e + 1, g + 1, s, d + 1, ins)
            e, g, s, d, ins = table[i][j - 1]
            left = (e + 1, g + 1, s, d, ins + 1)
            table[i][j] = min((diag, up, left), key=lambda c: (c[0], c[1]))
    _, _, s, d, ins = table[n][m]
    return s, d, ins


def all_alignment_counts(ref, hyp) -> set[tuple[int, int, int]]:
    """Every (S, D, I) reachable by some alignment. Exponential; tiny inputs only."""
    ref, hyp = tuple(ref), tuple(hyp)

    @lru_cache(maxsize=None)
    def go(i, j):
        if i == len(ref) and j == len(hyp):
            return frozenset({(0, 0, 0)})
        out = set()
        if i < len(ref) and j < len(hyp):
            sub = 0 if ref[i] == hyp[j] else 1
            out |= {(s + sub, d, k) for s, d, k in go(i + 1, j + 1)}
        if i < len(ref):
            out |= {(s, d + 1, k) for s, d, k in go(i + 1, j)}
        if j < len(hyp):
            out |= {(s, d, k + 1) for s, d, k in go(i, j + 1)}
        return frozenset(out)

    return set(go(0, 0))


def best_of(counts: set[tuple[int, int, int]]) -> tuple[int, int, int]:
    return min(counts, key=lambda c: (sum(c), c[1] + c[2]))


def collapse(path, blank):
    return [k for k, _ in itertools.groupby(path) if k != blank]


def greedy_prefix(items, min_duration_s, budget_hours):
    """items: (id, duration_s, cer). Returns the selected ids in rank order."""
    eligible = [x for x in items if x[1] > min_duration_s]
    eligible.sort(key=lambda x: x[0])
    eligible.sort(key=lambda x: x[2], reverse=True)
    out, used = [], 0.0
    for uid, dur, _ in eligible:
        if used + dur > budget_hours * 3600 + 1e-6:
            break
        used += dur
        out.append(uid)
    return out


def best_rank_closed_subset(items, min_duration_s, budget_hours):
    """Enumerate every subset; keep those that fit the budget and contain
    every higher-ranked eligible item of each member; return the largest."""
    eligible = sorted((x for x in items if x[1] > min_duration_s), key=lambda x: (-x[2], x[0]))
    rank = {x[0]: r for r, x in enumerate(eligible)}
    best: tuple = ()
    for k in range(len(eligible) + 1):
        for combo in itertools.combinations(eligible, k):
            ids = {x[0] for x in combo}
            if sum(x[1] for x in combo) > budget_hours * 3600 + 1e-6:
                continue
            if any(rank[y[0]] < rank[x[0]] and y[0] not in ids for x in combo for y in eligible):
                continue
            if len(combo) > len(best):
                best = combo
    return [x[0] for x in sorted(best, key=lambda x: rank[x[0]])]
