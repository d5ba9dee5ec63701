"""Resolute voting rules.

Every anonymous rule is described by a linear feature map over rankings plus
a vectorized winner function on feature rows.  ``apply_rule`` multiplies the
histogram by the feature matrix and evaluates one row.  The axiom checkers
reuse the same two pieces to evaluate thousands of candidate histograms in
one call.

Ties between alternatives always go to the smallest index.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np

from .core import (
    Histogram,
    Profile,
    all_rankings,
    margins_to_matrix,
    n_rankings,
    pair_list,
    pairwise_signs,
    positions,
)

RULE_NAMES = (
    "plurality", "borda", "veto", "copeland", "maximin", "stv",
    "ranked_pairs", "schulze", "constant_k", "dictator_j",
)

CC_RULES = ("copeland", "maximin", "ranked_pairs", "schulze")


class UnknownRuleError(ValueError):
    pass


@dataclass(frozen=True)
class Rule:
    name: str
    kind: str  # "score", "wmg", "hist", "const", "profile"
    param: int | None = None

    @property
    def anonymous(self) -> bool:
        return self.kind != "profile"

    @property
    def monotone(self) -> bool:
        """Winner stays when its own features improve and rivals' worsen."""
        return self.name in ("plurality", "borda", "veto", "copeland", "maximin")

    def features(self, m: int) -> np.ndarray:
        return _features(self.name, m)

    def winners(self, x: np.ndarray, m: int) -> np.ndarray:
        """1-based winners for each feature row of x (shape (N, d))."""
        x = np.asarray(x)
        if x.ndim == 1:
            x = x[None, :]
        return _WINNERS[self.name](self, x, m)

    def __str__(self):
        if self.param is None:
            return self.name
        base = self.name.rsplit("_", 1)[0]
        return f"{base}_{self.param}"


def get_rule(name) -> Rule:
    """Resolve a CLI rule string such as ``maximin`` or ``constant_2``."""
    if isinstance(name, Rule):
        return name
    name = str(name).strip().lower()
    m = re.fullmatch(r"(constant|dictator)_(\d+)", name)
    if m:
        k = int(m.group(2))
        if k < 1:
            raise UnknownRuleError(f"bad parameter in {name!r}")
        if m.group(1) == "constant":
            return Rule("constant_k", "const", k)
        return Rule("dictator_j", "profile", k)
    kinds = {
        "plurality": "score", "borda": "score", "veto": "score",
        "copeland": "wmg", "maximin": "wmg", "ranked_pairs": "wmg",
        "schulze": "wmg", "stv": "hist",
    }
    if name not in kinds:
        raise UnknownRuleError(f"unknown rule {name!r}")
    return Rule(name, kinds[name])


@lru_cache(maxsize=None)
def _features(name: str, m: int) -> np.ndarray:
    pos = positions(m)
    k = n_rankings(m)
    if name == "plurality":
        f = (pos == 0).astype(np.int64)
    elif name == "veto":
        f = (pos == m - 1).astype(np.int64)
    elif name == "borda":
        f = (m - 1 - pos).astype(np.int64)
    elif name in ("copeland", "maximin", "ranked_pairs", "schulze"):
        f = np.array(pairwise_signs(m))
    elif name == "stv":
        f = np.eye(k, dtype=np.int64)
    else:
        f = np.zeros((k, 0), dtype=np.int64)
    f.setflags(write=False)
    return f


def _argmax(s):
    return np.argmax(s, axis=-1) + 1


def _w_plurality(rule, x, m):
    return _argmax(x)


_w_borda = _w_plurality


def _w_veto(rule, x, m):
    return np.argmin(x, axis=-1) + 1


def _w_const(rule, x, m):
    if rule.param > m:
        raise ValueError(f"constant_{rule.param} needs at least {rule.param} alternatives")
    return np.full(x.shape[0], rule.param, dtype=np.int64)


def _w_copeland(rule, x, m):
    g = margins_to_matrix(x, m)
    off = ~np.eye(m, dtype=bool)
    s = 2 * ((g > 0) & off).sum(-1) + ((g == 0) & off).sum(-1)
    return _argmax(s)


def _w_maximin(rule, x, m):
    g = margins_to_matrix(x, m)
    big = np.iinfo(np.int64).max
    g = np.where(np.eye(m, dtype=bool), big, g)
    return _argmax(g.min(-1))


def _w_schulze(rule, x, m):
    g = margins_to_matrix(x, m)
    d = np.where(g > 0, g, 0)
    for k in range(m):
        d = np.maximum(d, np.minimum(d[:, :, k:k + 1], d[:, k:k + 1, :]))
    for a in range(m):
        d[:, a, a] = 0
    ok = (d >= np.swapaxes(d, 1, 2)).all(-1)
    return _argmax(ok)


def _rp_one(g: np.ndarray, m: int) -> int:
    edges = [(-int(g[a, b]), a, b) for a in range(m) for b in range(m) if a != b and g[a, b] > 0]
    edges.sort()
    reach = np.eye(m, dtype=bool)
    locked_in = np.zeros(m, dtype=bool)
    for _, a, b in edges:
        if reach[b, a]:
            continue
        # everything reaching a now reaches everything b reaches
        reach |= np.outer(reach[:, a], reach[b])
        locked_in[b] = True
    return int(np.flatnonzero(~locked_in)[0]) + 1


def _w_ranked_pairs(rule, x, m):
    g = margins_to_matrix(x, m)
    return np.array([_rp_one(gi, m) for gi in g], dtype=np.int64)


def _stv_one(counts: np.ndarray, m: int) -> int:
    rk = all_rankings(m)
    alive = np.ones(m + 1, dtype=bool)
    alive[0] = False
    nz = np.flatnonzero(counts)
    ballots, weights = rk[nz], counts[nz]
    for _ in range(m - 1):
        # top surviving alternative of each ballot
        mask = alive[ballots]
        tops = ballots[np.arange(len(ballots)), mask.argmax(1)]
        tally = np.bincount(tops, weights=weights, minlength=m + 1)
        cand = np.flatnonzero(alive)
        low = tally[cand].min()
        loser = cand[tally[cand] == low].max()
        alive[loser] = False
    return int(np.flatnonzero(alive)[0])


def _w_stv(rule, x, m):
    return np.array([_stv_one(row, m) for row in x], dtype=np.int64)


def _w_profile(rule, x, m):
    raise TypeError(f"{rule} depends on voter identities; apply it to a Profile")


_WINNERS: dict[str, Callable] = {
    "plurality": _w_plurality,
    "borda": _w_borda,
    "veto": _w_veto,
    "copeland": _w_copeland,
    "maximin": _w_maximin,
    "schulze": _w_schulze,
    "ranked_pairs": _w_ranked_pairs,
    "stv": _w_stv,
    "constant_k": _w_const,
    "dictator_j": _w_profile,
}


def apply_rule(rule, h) -> int:
    """Winner of a Histogram (or Profile) under the named rule."""
    rule = get_rule(rule)
    if isinstance(h, Profile):
        if rule.kind == "profile":
            if rule.param > h.n:
                raise ValueError(f"dictator_{rule.param} needs at least {rule.param} voters")
            return int(h.votes[rule.param - 1][0])
        h = h.histogram()
    if not isinstance(h, Histogram):
        raise TypeError("apply_rule expects a Histogram or Profile")
    if h.n < 1:
        raise ValueError("empty profile")
    x = h.counts @ rule.features(h.m)
    return int(rule.winners(x[None, :], h.m)[0])


def apply_rule_batch(rule, counts: np.ndarray, m: int) -> np.ndarray:
    """Winners for each row of a (N, m!) count array."""
    rule = get_rule(rule)
    return rule.winners(np.asarray(counts) @ rule.features(m), m)


def orientation(rule: Rule, m: int, t: int):
    """Dominance layout for a monotone rule and target winner t (1-based).

    Returns (key_cols, val_cols, signs): two feature vectors with equal key
    columns compare on sign-adjusted value columns, and the larger one is at
    least as favourable to t.  None for rules without this structure.
    """
    if not rule.monotone:
        return None
    if rule.kind == "wmg":
        key, val, sg = [], [], []
        for j, (a, b) in enumerate(pair_list(m)):
            if a == t - 1:
                val.append(j)
                sg.append(1)
            elif b == t - 1:
                val.append(j)
                sg.append(-1)
            else:
                key.append(j)
        return np.array(key, dtype=np.int64), np.array(val, dtype=np.int64), np.array(sg, dtype=np.int64)
    s = -1 if rule.name == "veto" else 1
    sg = np.full(m, -s, dtype=np.int64)
    sg[t - 1] = s
    return np.zeros(0, dtype=np.int64), np.arange(m, dtype=np.int64), sg
