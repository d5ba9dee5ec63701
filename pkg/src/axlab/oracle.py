"""Naive voter-level reference checkers.

These enumerate voter index subsets and per-voter replacement votes directly
on a Profile, with no use of ranking-type grouping.  They exist to test the
histogram-level search in ``axioms`` and to handle rules that depend on
voter identity.
"""

from __future__ import annotations

import itertools

import numpy as np

from .core import Profile, all_rankings, n_rankings, ranking_index, reverse
from .rules import apply_rule_batch, get_rule


def _winners(rule, profiles: list, m: int) -> np.ndarray:
    if not profiles:
        return np.zeros(0, dtype=np.int64)
    if rule.anonymous:
        counts = np.zeros((len(profiles), n_rankings(m)), dtype=np.int64)
        for i, votes in enumerate(profiles):
            for v in votes:
                counts[i, ranking_index(v)] += 1
        return apply_rule_batch(rule, counts, m)
    j = rule.param - 1
    return np.array([votes[j][0] if j < len(votes) else 0 for votes in profiles], dtype=np.int64)


def _better(r, a, b) -> bool:
    return r.index(a) < r.index(b)


def _beats(r, a):
    return set(r[r.index(a) + 1:])


def naive_check(rule, p: Profile, axiom: str, B: int, budget: int = 10**7):
    """(sat, None) by brute force over voter subsets and replacement votes."""
    rule = get_rule(rule)
    axiom = {"par": "Par", "hm": "HM", "mm": "MM", "sp": "SP", "cc": "CC"}[axiom.lower()]
    m, n = p.m, p.n
    votes = list(p.votes)
    w = int(_winners(rule, [votes], m)[0])
    if axiom == "CC":
        from .core import condorcet_winner, weighted_majority_graph
        cw = condorcet_winner(weighted_majority_graph(p.histogram()))
        return (1 if cw is None or cw == w else 0), None
    rankings = [tuple(int(x) for x in r) for r in all_rankings(m)]
    cands, owners = [], []
    kmax = min(B, n - 1) if axiom == "Par" else min(B, n)
    for k in range(1, kmax + 1):
        for S in itertools.combinations(range(n), k):
            if axiom == "Par":
                cands.append([v for i, v in enumerate(votes) if i not in S])
                owners.append(S)
            elif axiom == "HM":
                nv = list(votes)
                for i in S:
                    nv[i] = reverse(nv[i])
                cands.append(nv)
                owners.append(S)
            else:
                opts = []
                for i in S:
                    r = votes[i]
                    if axiom == "MM":
                        opts.append([q for q in rankings if q != r and _beats(r, w) <= _beats(q, w)])
                    else:
                        opts.append([q for q in rankings if q != r])
                for repl in itertools.product(*opts):
                    nv = list(votes)
                    for i, q in zip(S, repl):
                        nv[i] = q
                    cands.append(nv)
                    owners.append(S)
            if len(cands) > budget:
                raise RuntimeError("naive enumeration over budget")
    win = _winners(rule, cands, m)
    for nw, S in zip(win, owners):
        nw = int(nw)
        if nw == w:
            continue
        if axiom == "MM" or all(_better(votes[i], nw, w) for i in S):
            return 0, None
    return 1, None
