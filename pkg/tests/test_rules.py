import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from axlab.core import Histogram, Profile, condorcet_winner, weighted_majority_graph
from axlab.rules import (
    CC_RULES,
    UnknownRuleError,
    apply_rule,
    apply_rule_batch,
    get_rule,
)

from conftest import brute_margins, random_hist

ANON = ["plurality", "borda", "veto", "copeland", "maximin", "stv", "ranked_pairs", "schulze"]


# ---------------------------------------------------------------- plain reference rules

def first_best(scores):
    best = max(scores.values())
    return min(a for a, s in scores.items() if s == best)


def ref_winner(name, votes, m):
    alts = range(1, m + 1)
    if name == "plurality":
        return first_best({a: sum(v[0] == a for v in votes) for a in alts})
    if name == "borda":
        return first_best({a: sum(m - 1 - v.index(a) for v in votes) for a in alts})
    if name == "veto":
        return first_best({a: -sum(v[-1] == a for v in votes) for a in alts})
    g = brute_margins(votes, m)
    if name == "copeland":
        return first_best({a: sum(2 if g[a - 1, b - 1] > 0 else 1 if g[a - 1, b - 1] == 0 else 0
                                  for b in alts if b != a) for a in alts})
    if name == "maximin":
        return first_best({a: min(g[a - 1, b - 1] for b in alts if b != a) for a in alts})
    if name == "schulze":
        d = {(a, b): max(g[a - 1, b - 1], 0) for a in alts for b in alts if a != b}
        for k in alts:
            for a in alts:
                for b in alts:
                    if len({a, b, k}) == 3:
                        d[a, b] = max(d[a, b], min(d[a, k], d[k, b]))
        return min(a for a in alts if all(d[a, b] >= d[b, a] for b in alts if b != a))
    if name == "ranked_pairs":
        pairs = sorted(((a, b) for a in alts for b in alts if a != b and g[a - 1, b - 1] > 0),
                       key=lambda e: (-g[e[0] - 1, e[1] - 1], e))
        locked = set()
        for a, b in pairs:
            # skip if b already reaches a
            seen, stack = {b}, [b]
            while stack:
                x = stack.pop()
                for (p, q) in locked:
                    if p == x and q not in seen:
                        seen.add(q)
                        stack.append(q)
            if a not in seen:
                locked.add((a, b))
        return min(a for a in alts if not any(q == a for _, q in locked))
    if name == "stv":
        alive = set(alts)
        while len(alive) > 1:
            tally = {a: 0 for a in alive}
            for v in votes:
                tally[next(x for x in v if x in alive)] += 1
            low = min(tally.values())
            alive.remove(max(a for a in alive if tally[a] == low))
        return alive.pop()
    raise KeyError(name)


@st.composite
def profiles(draw, max_m=5, max_n=15):
    m = draw(st.integers(2, max_m))
    votes = draw(st.lists(st.permutations(list(range(1, m + 1))).map(tuple), min_size=1, max_size=max_n))
    return Profile(tuple(votes))


@pytest.mark.parametrize("name", ANON)
@settings(max_examples=150, deadline=None)
@given(p=profiles())
def test_rules_match_reference(name, p):
    assert apply_rule(name, p.histogram()) == ref_winner(name, p.votes, p.m)


# ---------------------------------------------------------------- examples

def test_constant_and_unanimity(rng):
    for _ in range(20):
        assert apply_rule("constant_1", random_hist(rng, 4, 9)) == 1
    assert apply_rule("borda", Histogram.from_dict(3, {(1, 2, 3): 5})) == 1


def test_maximin_example_with_smallest_index_ties():
    # margins 1>2: +1, 1>3: -1, 2>3: +3; min scores (-1, -1, -3); tie goes to 1
    h = Histogram.from_dict(3, {(1, 2, 3): 2, (2, 3, 1): 2, (3, 1, 2): 1})
    g = weighted_majority_graph(h)
    assert (g[0, 1], g[0, 2], g[1, 2]) == (1, -1, 3)
    assert apply_rule("maximin", h) == 1


def test_tie_breaks():
    tie = Histogram.from_dict(3, {(2, 1, 3): 1, (1, 2, 3): 1})
    assert apply_rule("plurality", tie) == 1
    # stv: three-way tie drops 3, whose vote moves to 1
    h = Histogram.from_dict(3, {(1, 3, 2): 1, (2, 3, 1): 1, (3, 1, 2): 1})
    assert apply_rule("stv", h) == 1
    assert apply_rule("veto", Histogram.from_dict(3, {(1, 2, 3): 1})) == 1


def test_copeland_returns_condorcet_winner(rng):
    for _ in range(200):
        h = random_hist(rng, 4, 11)
        cw = condorcet_winner(weighted_majority_graph(h))
        if cw is not None:
            assert apply_rule("copeland", h) == cw


@pytest.mark.parametrize("m", [3, 4, 5])
def test_cc_rules_batch(m):
    rng = np.random.default_rng(m)
    k = len(list(itertools.permutations(range(m))))
    counts = np.stack([np.bincount(rng.integers(0, k, rng.integers(1, 40)), minlength=k) for _ in range(3000)])
    from axlab.core import condorcet_winners_batch, pairwise_signs
    cw = condorcet_winners_batch(counts @ pairwise_signs(m), m)
    for name in CC_RULES:
        w = apply_rule_batch(name, counts, m)
        assert (w[cw > 0] == cw[cw > 0]).all()


# ---------------------------------------------------------------- plumbing

def test_get_rule_names():
    assert str(get_rule("constant_2")) == "constant_2"
    assert str(get_rule("Dictator_3")) == "dictator_3"
    assert not get_rule("dictator_1").anonymous
    for bad in ("nope", "constant_0", "dictator_x"):
        with pytest.raises(UnknownRuleError):
            get_rule(bad)


def test_dictator_needs_profile():
    p = Profile(((2, 1, 3), (3, 1, 2)))
    assert apply_rule("dictator_2", p) == 3
    with pytest.raises(TypeError):
        apply_rule("dictator_1", p.histogram())
    with pytest.raises(ValueError):
        apply_rule("dictator_5", p)


@settings(max_examples=100, deadline=None)
@given(p=profiles(), rnd=st.randoms())
def test_anonymity_profile_paths_agree(p, rnd):
    votes = list(p.votes)
    rnd.shuffle(votes)
    q = Profile(tuple(votes))
    for name in ANON:
        assert apply_rule(name, p) == apply_rule(name, q) == apply_rule(name, p.histogram())


def test_batch_matches_single(rng):
    hs = [random_hist(rng, 4, 13) for _ in range(50)]
    counts = np.stack([h.counts for h in hs])
    for name in ANON:
        assert list(apply_rule_batch(name, counts, 4)) == [apply_rule(name, h) for h in hs]
