"""Rankings, profiles, histograms and weighted majority graphs.

Alternatives are 1-based integers.  A ranking is a tuple listing the
alternatives from most to least preferred, so ``(2, 1, 3)`` means 2 > 1 > 3.
The m! rankings are enumerated once, in lexicographic order, and that order
indexes every histogram count vector in the package.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

MAX_M = 8

Ranking = tuple


class DimensionError(ValueError):
    """Objects built over different numbers of alternatives were combined."""


def validate_ranking(r: Sequence[int], m: int | None = None) -> Ranking:
    r = tuple(int(x) for x in r)
    if m is None:
        m = len(r)
    if len(r) != m or sorted(r) != list(range(1, m + 1)):
        raise ValueError(f"not a ranking of 1..{m}: {r}")
    return r


def reverse(r: Sequence[int]) -> Ranking:
    return tuple(reversed(tuple(r)))


def ranking_str(r: Sequence[int]) -> str:
    return ">".join(str(a) for a in r)


def parse_ranking(text: str, m: int | None = None) -> Ranking:
    parts = [p for p in text.replace(" ", "").split(">") if p]
    try:
        vals = [int(p) for p in parts]
    except ValueError as exc:
        raise ValueError(f"bad ranking {text!r}") from exc
    return validate_ranking(vals, m)


@lru_cache(maxsize=None)
def _tables(m: int):
    if not 1 <= m <= MAX_M:
        raise ValueError(f"m must lie in 1..{MAX_M}, got {m}")
    rk = np.array(list(itertools.permutations(range(1, m + 1))), dtype=np.int64)
    rk.setflags(write=False)
    # pos[r, a-1] = position (0 = top) of alternative a in ranking r
    pos = np.argsort(rk, axis=1).astype(np.int64)
    pos.setflags(write=False)
    index = {tuple(int(x) for x in row): i for i, row in enumerate(rk)}
    pairs = [(a, b) for a in range(m) for b in range(a + 1, m)]
    # pairwise sign feature: +1 if a > b in ranking r, else -1
    pw = np.empty((len(rk), len(pairs)), dtype=np.int64)
    for j, (a, b) in enumerate(pairs):
        pw[:, j] = np.where(pos[:, a] < pos[:, b], 1, -1)
    pw.setflags(write=False)
    rev = np.array([index[tuple(int(x) for x in row[::-1])] for row in rk], dtype=np.int64)
    rev.setflags(write=False)
    return rk, pos, index, pairs, pw, rev


def all_rankings(m: int) -> np.ndarray:
    """(m!, m) array of rankings in lexicographic order."""
    return _tables(m)[0]


def positions(m: int) -> np.ndarray:
    """(m!, m) array; entry [r, a-1] is the 0-based position of a in ranking r."""
    return _tables(m)[1]


def ranking_index(r: Sequence[int]) -> int:
    r = tuple(int(x) for x in r)
    try:
        return _tables(len(r))[2][r]
    except KeyError:
        raise ValueError(f"not a ranking: {r}") from None


def ranking_at(m: int, i: int) -> Ranking:
    return tuple(int(x) for x in _tables(m)[0][i])


def pair_list(m: int) -> list[tuple[int, int]]:
    """0-based pairs (a, b) with a < b, in the column order of pairwise features."""
    return _tables(m)[3]


def pairwise_signs(m: int) -> np.ndarray:
    return _tables(m)[4]


def reverse_index(m: int) -> np.ndarray:
    """rev[i] is the index of the reverse of ranking i."""
    return _tables(m)[5]


def n_rankings(m: int) -> int:
    if not 1 <= m <= MAX_M:
        raise ValueError(f"m must lie in 1..{MAX_M}, got {m}")
    return math.factorial(m)


@dataclass(frozen=True)
class Profile:
    """An ordered list of votes; voter identity is the list position."""

    votes: tuple

    def __post_init__(self):
        votes = tuple(validate_ranking(v) for v in self.votes)
        if not votes:
            raise ValueError("a profile needs at least one voter")
        m = len(votes[0])
        if any(len(v) != m for v in votes):
            raise DimensionError("votes over different numbers of alternatives")
        object.__setattr__(self, "votes", votes)

    @property
    def m(self) -> int:
        return len(self.votes[0])

    @property
    def n(self) -> int:
        return len(self.votes)

    def histogram(self) -> "Histogram":
        counts = np.zeros(n_rankings(self.m), dtype=np.int64)
        for v in self.votes:
            counts[ranking_index(v)] += 1
        return Histogram(self.m, counts)


class Histogram:
    """Count vector over the m! rankings (lexicographic order)."""

    __slots__ = ("m", "counts", "_key")

    def __init__(self, m: int, counts):
        c = np.array(counts, dtype=np.int64).reshape(-1)
        if c.shape[0] != n_rankings(m):
            raise DimensionError(f"expected {n_rankings(m)} counts for m={m}, got {c.shape[0]}")
        if (c < 0).any():
            raise ValueError("negative count in histogram")
        c.setflags(write=False)
        self.m = int(m)
        self.counts = c
        self._key = (self.m, c.tobytes())

    @classmethod
    def from_votes(cls, votes: Iterable[Sequence[int]], m: int | None = None) -> "Histogram":
        votes = list(votes)
        if m is None:
            return Profile(tuple(votes)).histogram()
        return _hist_from(votes, m)

    @classmethod
    def from_dict(cls, m: int, d: dict) -> "Histogram":
        counts = np.zeros(n_rankings(m), dtype=np.int64)
        for r, c in d.items():
            counts[ranking_index(validate_ranking(r, m))] += int(c)
        return cls(m, counts)

    @property
    def n(self) -> int:
        return int(self.counts.sum())

    def count(self, r: Sequence[int]) -> int:
        return int(self.counts[ranking_index(r)])

    def items(self):
        """(ranking, count) pairs with positive count, lexicographic order."""
        for i in np.flatnonzero(self.counts):
            yield ranking_at(self.m, int(i)), int(self.counts[i])

    def to_profile(self) -> Profile:
        votes = []
        for r, c in self.items():
            votes.extend([r] * c)
        return Profile(tuple(votes))

    def add(self, r: Sequence[int], k: int) -> "Histogram":
        c = self.counts.copy()
        c[ranking_index(r)] += k
        return Histogram(self.m, c)

    def __eq__(self, other):
        return isinstance(other, Histogram) and self._key == other._key

    def __hash__(self):
        return hash(self._key)

    def __repr__(self):
        body = ", ".join(f"{c}x{ranking_str(r)}" for r, c in self.items())
        return f"Histogram(m={self.m}, {{{body}}})"


def _hist_from(votes, m):
    counts = np.zeros(n_rankings(m), dtype=np.int64)
    for v in votes:
        counts[ranking_index(validate_ranking(v, m))] += 1
    return Histogram(m, counts)


def as_histogram(x) -> Histogram:
    if isinstance(x, Histogram):
        return x
    if isinstance(x, Profile):
        return x.histogram()
    raise TypeError(f"expected Histogram or Profile, got {type(x).__name__}")


def kendall_tau(r: Sequence[int], w: Sequence[int]) -> int:
    """Number of unordered pairs ranked oppositely by r and w."""
    r, w = tuple(r), tuple(w)
    if len(r) != len(w):
        raise DimensionError(f"rankings over {len(r)} and {len(w)} alternatives")
    validate_ranking(r)
    validate_ranking(w)
    pw = {a: i for i, a in enumerate(w)}
    seq = [pw[a] for a in r]
    return sum(1 for i in range(len(seq)) for j in range(i + 1, len(seq)) if seq[i] > seq[j])


def kendall_tau_all(w: Sequence[int]) -> np.ndarray:
    """KT distance from every ranking (lexicographic order) to w."""
    m = len(w)
    pos = positions(m)
    wpos = pos[ranking_index(w)]
    d = np.zeros(len(pos), dtype=np.int64)
    for a, b in pair_list(m):
        d += (pos[:, a] < pos[:, b]) != (wpos[a] < wpos[b])
    return d


def margin_vector(h: Histogram) -> np.ndarray:
    """Upper-triangle margins in pair_list order."""
    return h.counts @ pairwise_signs(h.m)


def margins_to_matrix(x: np.ndarray, m: int) -> np.ndarray:
    """Expand (..., m(m-1)/2) upper-triangle margins into (..., m, m) matrices."""
    x = np.asarray(x)
    out = np.zeros(x.shape[:-1] + (m, m), dtype=x.dtype)
    for j, (a, b) in enumerate(pair_list(m)):
        out[..., a, b] = x[..., j]
        out[..., b, a] = -x[..., j]
    return out


def weighted_majority_graph(h) -> np.ndarray:
    """Margin matrix; entry [a-1, b-1] = #(a > b) - #(b > a)."""
    h = as_histogram(h)
    return margins_to_matrix(margin_vector(h), h.m)


def margin(g: np.ndarray, a: int, b: int) -> int:
    return int(g[a - 1, b - 1])


def condorcet_winner(g: np.ndarray) -> int | None:
    """Alternative whose outgoing margins are all positive, if any."""
    g = np.asarray(g)
    m = g.shape[0]
    off = ~np.eye(m, dtype=bool)
    for a in range(m):
        if (g[a][off[a]] > 0).all():
            return a + 1
    return None


def condorcet_winners_batch(mv: np.ndarray, m: int) -> np.ndarray:
    """Vectorized CW over rows of upper-triangle margins; 0 where none."""
    mat = margins_to_matrix(mv, m)
    big = np.iinfo(np.int64).max
    mat = np.where(np.eye(m, dtype=bool), big, mat)
    ok = (mat > 0).all(axis=-1)
    has = ok.any(axis=-1)
    return np.where(has, ok.argmax(axis=-1) + 1, 0)


def prefers(r: Sequence[int], a: int, b: int) -> bool:
    """True if a is strictly above b in r."""
    r = tuple(r)
    return r.index(a) < r.index(b)


def beaten_set(r: Sequence[int], a: int) -> frozenset:
    r = tuple(r)
    return frozenset(r[r.index(a) + 1:])


def raises(r1: Sequence[int], r2: Sequence[int], a: int) -> bool:
    """True if everything a beats in r1 is also beaten by a in r2."""
    r1, r2 = tuple(r1), tuple(r2)
    if len(r1) != len(r2):
        raise DimensionError("rankings over different numbers of alternatives")
    if a not in r1:
        raise ValueError(f"invalid alternative {a}")
    return beaten_set(r1, a) <= beaten_set(r2, a)


# text formats

def _content_lines(text: str):
    for no, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if line:
            yield no, line


def parse_profile(text: str) -> Profile:
    votes = []
    for no, line in _content_lines(text):
        try:
            votes.append(parse_ranking(line))
        except ValueError as exc:
            raise ValueError(f"line {no}: {exc}") from None
    return Profile(tuple(votes))


def format_profile(p: Profile) -> str:
    return "".join(ranking_str(v) + "\n" for v in p.votes)


def parse_histogram(text: str, m: int | None = None) -> Histogram:
    entries = []
    for no, line in _content_lines(text):
        if ":" not in line:
            raise ValueError(f"line {no}: expected 'count: ranking'")
        c, r = line.split(":", 1)
        try:
            entries.append((int(c), parse_ranking(r, m)))
        except ValueError as exc:
            raise ValueError(f"line {no}: {exc}") from None
    if not entries:
        raise ValueError("empty histogram")
    m = len(entries[0][1])
    counts = np.zeros(n_rankings(m), dtype=np.int64)
    for c, r in entries:
        if len(r) != m:
            raise ValueError("rankings over different numbers of alternatives")
        if c < 0:
            raise ValueError("negative count")
        counts[ranking_index(r)] += c
    return Histogram(m, counts)


def format_histogram(h: Histogram) -> str:
    return "".join(f"{c}: {ranking_str(r)}\n" for r, c in h.items())
