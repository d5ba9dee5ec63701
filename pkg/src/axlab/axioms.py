"""Exact group-axiom checkers with replayable witnesses.

Voters sharing a ranking are interchangeable, so a coalition is a multiset of
moves over ranking types.  A move changes the rule's feature vector by a fixed
delta, and the rule's winner depends only on features.  The search therefore
runs over distinct feature deltas rather than over multisets:

* breadth-first by coalition size, so the first hit has minimum size;
* deltas already reached with fewer moves are dropped;
* for monotone rules (plurality, borda, veto, copeland, maximin) a delta that
  is no better for the target winner than one already kept is dropped too.

When some ranking type has fewer than B voters, a per-type dynamic program
over (delta, size) replaces the uncapped breadth-first pass.  Uncapped state
sets do not depend on the profile, so they are cached per (rule, axiom,
winner, target, B).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import NamedTuple

import numpy as np

from .core import (
    Histogram,
    Profile,
    as_histogram,
    condorcet_winner,
    format_histogram,
    n_rankings,
    parse_histogram,
    parse_ranking,
    positions,
    prefers,
    raises,
    ranking_at,
    ranking_index,
    ranking_str,
    reverse,
    reverse_index,
    weighted_majority_graph,
)
from .rules import Rule, apply_rule, get_rule, orientation

DEFAULT_BUDGET = 10**8
AXIOMS = ("CC", "Par", "HM", "MM", "SP")
COMBOS = {"cp": "Par", "ch": "HM", "cm": "MM", "cs": "SP"}
KIND = {"Par": "abstain", "HM": "flip-to-reverse", "MM": "change", "SP": "change", "CC": "none"}


class BudgetError(RuntimeError):
    """Exact enumeration would exceed the configured state budget."""


class WitnessError(ValueError):
    """A witness failed replay."""


def axiom_label(x: str) -> str:
    for a in AXIOMS:
        if a.lower() == str(x).lower():
            return a
    raise ValueError(f"unknown axiom {x!r}")


@dataclass(frozen=True)
class Move:
    frm: tuple
    to: tuple | None
    count: int


@dataclass(frozen=True)
class CoalitionAction:
    kind: str
    moves: tuple = ()

    @property
    def size(self) -> int:
        return sum(mv.count for mv in self.moves)

    def apply(self, h: Histogram) -> Histogram:
        c = h.counts.copy()
        for mv in self.moves:
            i = ranking_index(mv.frm)
            if c[i] < mv.count:
                raise WitnessError(f"only {c[i]} votes {ranking_str(mv.frm)}, need {mv.count}")
            c[i] -= mv.count
            if mv.to is not None:
                c[ranking_index(mv.to)] += mv.count
        return Histogram(h.m, c)


@dataclass(frozen=True)
class ViolationWitness:
    axiom: str
    before: Histogram
    action: CoalitionAction
    after: Histogram
    winner_before: int
    winner_after: int
    B: int | None = None
    condorcet: int | None = None


class CheckResult(NamedTuple):
    sat: int
    witness: ViolationWitness | None = None
    exhaustive: bool = True


# ---------------------------------------------------------------- items

def _allowed_sources(h: Histogram, axiom: str, w: int, t: int | None) -> np.ndarray:
    pos = positions(h.m)
    ok = h.counts > 0
    if axiom != "MM":
        ok &= pos[:, t - 1] < pos[:, w - 1]
    return np.flatnonzero(ok)


def _raise_mask(m: int, w: int) -> np.ndarray:
    """[i, j] True when moving ranking i to ranking j weakly raises w."""
    pos = positions(m)
    beat = pos > pos[:, [w - 1]]  # alternatives w beats, per ranking
    # beaten set of i must be a subset of beaten set of j
    return ~(beat[:, None, :] & ~beat[None, :, :]).any(-1)


def _items(rule: Rule, m: int, srcs: np.ndarray, axiom: str, w: int):
    """Candidate single moves from the given source types.

    Returns (deltas, src, dst) with dst = -1 for abstention.  Moves from the
    same source with equal deltas are collapsed, keeping the first target in
    lexicographic order; zero deltas are dropped for change moves.
    """
    f = rule.features(m)
    k = n_rankings(m)
    if axiom == "Par":
        return -f[srcs], srcs.copy(), np.full(len(srcs), -1, dtype=np.int64)
    if axiom == "HM":
        rv = reverse_index(m)[srcs]
        return f[rv] - f[srcs], srcs.copy(), rv
    allow = _raise_mask(m, w) if axiom == "MM" else np.ones((k, k), dtype=bool)
    ds, ss, ts = [], [], []
    for s in srcs:
        dst = np.flatnonzero(allow[s])
        dst = dst[dst != s]
        if len(dst) == 0:
            continue
        d = f[dst] - f[s]
        keep = np.any(d != 0, axis=1) if d.shape[1] else np.zeros(len(dst), dtype=bool)
        d, dst = d[keep], dst[keep]
        if len(dst) == 0:
            continue
        _, first = np.unique(_rowkeys(d), return_index=True)
        first.sort()
        ds.append(d[first])
        ss.append(np.full(len(first), s, dtype=np.int64))
        ts.append(dst[first])
    if not ds:
        d = f.shape[1]
        return np.zeros((0, d), dtype=np.int64), np.zeros(0, dtype=np.int64), np.zeros(0, dtype=np.int64)
    return np.concatenate(ds), np.concatenate(ss), np.concatenate(ts)


def _rowkeys(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a, dtype=np.int64)
    if a.shape[1] == 0:
        return np.zeros(a.shape[0], dtype=np.int64)
    return a.view(np.dtype((np.void, 8 * a.shape[1]))).ravel()


# ---------------------------------------------------------------- search

@dataclass
class _Layers:
    """Reachable deltas by coalition size with back-pointers."""

    d: int
    states: list = field(default_factory=list)  # per size k>=1: (S_k, d) deltas
    parent: list = field(default_factory=list)  # index into layer k-1 (or -1)
    item: list = field(default_factory=list)    # item index used at this step
    count: int = 0

    def flat(self):
        if not self.states:
            z = np.zeros((0, self.d), dtype=np.int64)
            return z, np.zeros(0, dtype=np.int64), np.zeros(0, dtype=np.int64)
        st = np.concatenate(self.states)
        ks = np.concatenate([np.full(len(s), i + 1, dtype=np.int64) for i, s in enumerate(self.states)])
        off = np.concatenate([np.arange(len(s)) for s in self.states])
        return st, ks, off

    def path(self, k: int, idx: int) -> list[int]:
        out = []
        while k >= 1:
            out.append(int(self.item[k - 1][idx]))
            idx = int(self.parent[k - 1][idx])
            k -= 1
        return out[::-1]


def _bfs(deltas: np.ndarray, B: int, orient, budget: int) -> _Layers:
    d = deltas.shape[1]
    lay = _Layers(d)
    seen = _rowkeys(np.zeros((1, d), dtype=np.int64))
    front = np.zeros((1, d), dtype=np.int64)
    pareto: dict = {}
    if orient is not None:
        kc, vc, sg = orient
        pareto[bytes(np.zeros(len(kc), dtype=np.int64))] = [tuple([0] * len(vc))]
    nitem = len(deltas)
    for k in range(1, B + 1):
        if len(front) == 0 or nitem == 0:
            break
        cand = (front[:, None, :] + deltas[None, :, :]).reshape(-1, d)
        lay.count += len(cand)
        if lay.count > budget:
            raise BudgetError(f"more than {budget} candidate states")
        par = np.repeat(np.arange(len(front)), nitem)
        it = np.tile(np.arange(nitem), len(front))
        keys = _rowkeys(cand)
        _, first = np.unique(keys, return_index=True)
        first.sort()
        first = first[~np.isin(keys[first], seen)]
        cand, par, it = cand[first], par[first], it[first]
        if orient is not None and len(cand):
            keep = _pareto_filter(cand, orient, pareto)
            cand, par, it = cand[keep], par[keep], it[keep]
        seen = np.concatenate([seen, _rowkeys(cand)])
        lay.states.append(cand)
        lay.parent.append(par)
        lay.item.append(it)
        front = cand
    return lay


def _pareto_filter(cand, orient, pareto) -> np.ndarray:
    kc, vc, sg = orient
    kv = cand[:, kc]
    vv = cand[:, vc] * sg
    order = np.lexsort(vv.T[::-1])[::-1]  # lexicographically descending
    keep = np.zeros(len(cand), dtype=bool)
    kb = [bytes(r) for r in np.ascontiguousarray(kv)]
    vt = [tuple(r) for r in vv.tolist()]
    for i in order:
        lst = pareto.get(kb[i])
        v = vt[i]
        if lst is not None:
            if any(all(a >= b for a, b in zip(u, v)) for u in lst):
                continue
            lst.append(v)
        else:
            pareto[kb[i]] = [v]
        keep[i] = True
    return keep


def _capped(deltas: np.ndarray, groups: np.ndarray, caps: dict, B: int, budget: int):
    """All (delta, size) reachable under per-group caps; minimal size per delta.

    Returns (states, sizes, choice) where choice[s] is a list of item indices.
    """
    d = deltas.shape[1]
    states = np.zeros((1, d), dtype=np.int64)
    sizes = np.zeros(1, dtype=np.int64)
    hist = [[]]
    count = 0
    for g in np.unique(groups):
        idx = np.flatnonzero(groups == g)
        cap = min(int(caps[g]), B)
        # sums of j items from this group, j = 0..cap
        gs = [(np.zeros(d, dtype=np.int64), 0, [])]
        layer = gs
        seen = {bytes(gs[0][0])}
        for j in range(1, cap + 1):
            nxt = []
            for v, _, ch in layer:
                for i in idx:
                    u = v + deltas[i]
                    b = bytes(u)
                    if b in seen:
                        continue
                    seen.add(b)
                    nxt.append((u, j, ch + [int(i)]))
            layer = nxt
            gs.extend(nxt)
            if not nxt:
                break
        gv = np.array([x[0] for x in gs], dtype=np.int64).reshape(len(gs), d)
        gj = np.array([x[1] for x in gs], dtype=np.int64)
        cand = (states[:, None, :] + gv[None, :, :]).reshape(-1, d)
        csz = (sizes[:, None] + gj[None, :]).reshape(-1)
        src = np.repeat(np.arange(len(states)), len(gs))
        gsel = np.tile(np.arange(len(gs)), len(states))
        ok = csz <= B
        cand, csz, src, gsel = cand[ok], csz[ok], src[ok], gsel[ok]
        count += len(cand)
        if count > budget:
            raise BudgetError(f"more than {budget} candidate states")
        order = np.argsort(csz, kind="stable")
        cand, csz, src, gsel = cand[order], csz[order], src[order], gsel[order]
        _, first = np.unique(_rowkeys(cand), return_index=True)
        first.sort()
        states, sizes = cand[first], csz[first]
        hist = [hist[src[i]] + gs[gsel[i]][2] for i in first]
    return states, sizes, hist


@lru_cache(maxsize=256)
def _cached_layers(rule: Rule, m: int, axiom: str, w: int, t, B: int, budget: int):
    full = Histogram(m, np.ones(n_rankings(m), dtype=np.int64))
    srcs = _allowed_sources(full, axiom, w, t)
    deltas, src, dst = _items(rule, m, srcs, axiom, w)
    orient = orientation(rule, m, t) if t is not None else None
    lay = _bfs(deltas, B, orient, budget)
    st, ks, off = lay.flat()
    return srcs, src, dst, lay, st, ks, off


def _success(rule, m, x0, st, axiom, w, t):
    win = rule.winners(x0[None, :] + st, m)
    return (win != w) if axiom == "MM" else (win == t)


def _best_for_target(rule, h, x0, axiom, w, t, B, budget, nmax):
    """Minimum-size violating move list for one target; (k, moves) or None."""
    m = h.m
    srcs = _allowed_sources(h, axiom, w, t)
    if len(srcs) == 0:
        return None
    uncapped = bool((h.counts[srcs] >= B).all())
    if uncapped:
        full = Histogram(m, np.ones(n_rankings(m), dtype=np.int64))
        if len(srcs) == len(_allowed_sources(full, axiom, w, t)):
            fsrcs, src, dst, lay, st, ks, off = _cached_layers(rule, m, axiom, w, t, B, budget)
            sel = ks <= nmax
            if not sel.any():
                return None
            hit = np.flatnonzero(sel & _success(rule, m, x0, st, axiom, w, t))
            if len(hit) == 0:
                return None
            i = hit[0]  # states are ordered by size
            items = lay.path(int(ks[i]), int(off[i]))
            return int(ks[i]), [(int(src[j]), int(dst[j])) for j in items]
        deltas, src, dst = _items(get_rule(rule), m, srcs, axiom, w)
        orient = orientation(rule, m, t) if t is not None else None
        lay = _bfs(deltas, min(B, nmax), orient, budget)
        st, ks, off = lay.flat()
        if len(st) == 0:
            return None
        hit = np.flatnonzero(_success(rule, m, x0, st, axiom, w, t))
        if len(hit) == 0:
            return None
        i = hit[0]
        items = lay.path(int(ks[i]), int(off[i]))
        return int(ks[i]), [(int(src[j]), int(dst[j])) for j in items]
    deltas, src, dst = _items(rule, m, srcs, axiom, w)
    if len(deltas) == 0:
        return None
    caps = {int(s): int(h.counts[s]) for s in srcs}
    st, sz, choice = _capped(deltas, src, caps, min(B, nmax), budget)
    sel = sz >= 1
    st, sz, choice = st[sel], sz[sel], [c for c, s in zip(choice, sel) if s]
    if len(st) == 0:
        return None
    hit = np.flatnonzero(_success(rule, m, x0, st, axiom, w, t))
    if len(hit) == 0:
        return None
    i = hit[np.argsort(sz[hit], kind="stable")[0]]
    return int(sz[i]), [(int(src[j]), int(dst[j])) for j in choice[i]]


def _to_action(axiom: str, m: int, moves) -> CoalitionAction:
    agg: dict = {}
    for s, t in moves:
        agg[(s, t)] = agg.get((s, t), 0) + 1
    mv = tuple(
        Move(ranking_at(m, s), None if t < 0 else ranking_at(m, t), c)
        for (s, t), c in sorted(agg.items())
    )
    return CoalitionAction(KIND[axiom], mv)


def _check_args(h, B):
    if B < 1:
        raise ValueError("B must be at least 1")
    if B > h.n:
        raise ValueError(f"B={B} exceeds n={h.n}")


def find_violation(rule, h, axiom: str, B: int, *, budget: int = DEFAULT_BUDGET):
    """Smallest coalition witness for the axiom, or None.

    Among minimum-size witnesses the one with the smallest target winner is
    returned (MM has no target and returns the first in search order).
    """
    rule = get_rule(rule)
    axiom = axiom_label(axiom)
    h = as_histogram(h)
    x0 = h.counts @ rule.features(h.m)
    w = int(rule.winners(x0[None, :], h.m)[0])
    nmax = h.n - 1 if axiom == "Par" else h.n
    if nmax < 1 or x0.shape[0] == 0:  # constant rules have no features to move
        return None
    targets = [None] if axiom == "MM" else [t for t in range(1, h.m + 1) if t != w]
    best = None
    for t in targets:
        r = _best_for_target(rule, h, x0, axiom, w, t, B, budget, nmax)
        if r is not None and (best is None or r[0] < best[0]):
            best = r
    if best is None:
        return None
    act = _to_action(axiom, h.m, best[1])
    after = act.apply(h)
    return ViolationWitness(axiom, h, act, after, w, apply_rule(rule, after), B)


def min_violation_size(rule, h, axiom: str, B: int, *, budget: int = DEFAULT_BUDGET):
    """Smallest violating coalition size up to B, or None."""
    wit = find_violation(rule, h, axiom, B, budget=budget)
    return None if wit is None else wit.action.size


# ---------------------------------------------------------------- sampled mode

def _sampled(rule, h, axiom, B, samples, seed):
    rule = get_rule(rule)
    m = h.m
    x0 = h.counts @ rule.features(m)
    w = int(rule.winners(x0[None, :], m)[0])
    rng = np.random.default_rng(seed)
    nmax = h.n - 1 if axiom == "Par" else h.n
    if x0.shape[0] == 0:
        return None
    targets = [None] if axiom == "MM" else [t for t in range(1, m + 1) if t != w]
    for t in targets:
        srcs = _allowed_sources(h, axiom, w, t)
        deltas, src, dst = _items(rule, m, srcs, axiom, w)
        if len(deltas) == 0 or nmax < 1:
            continue
        for _ in range(samples):
            k = int(rng.integers(1, min(B, nmax) + 1))
            pick = rng.integers(0, len(deltas), size=k)
            used = np.bincount(src[pick], minlength=n_rankings(m))
            if (used > h.counts).any():
                continue
            x = x0 + deltas[pick].sum(0)
            win = int(rule.winners(x[None, :], m)[0])
            if (axiom == "MM" and win != w) or win == t:
                act = _to_action(axiom, m, [(int(src[j]), int(dst[j])) for j in pick])
                after = act.apply(h)
                return ViolationWitness(axiom, h, act, after, w, win, B)
    return None


# ---------------------------------------------------------------- checkers

def _group_check(rule, h, B, axiom, mode, budget, samples, seed) -> CheckResult:
    rule = get_rule(rule)
    if not rule.anonymous:
        if not isinstance(h, Profile):
            raise TypeError(f"{rule} is not anonymous; pass a Profile")
        from .oracle import naive_check
        _check_args(h.histogram(), B)
        sat, wit = naive_check(rule, h, axiom, B, budget=budget)
        return CheckResult(sat, wit, True)
    h = as_histogram(h)
    _check_args(h, B)
    if mode == "exact":
        wit = find_violation(rule, h, axiom, B, budget=budget)
        return CheckResult(0 if wit else 1, wit, True)
    if mode == "sampled":
        wit = _sampled(rule, h, axiom, B, samples, seed)
        return CheckResult(0 if wit else 1, wit, wit is not None)
    raise ValueError(f"unknown mode {mode!r}")


def check_cc(rule, h) -> CheckResult:
    rule = get_rule(rule)
    if isinstance(h, Profile) and not rule.anonymous:
        hh = h.histogram()
        win = apply_rule(rule, h)
    else:
        hh = as_histogram(h)
        win = apply_rule(rule, hh)
    cw = condorcet_winner(weighted_majority_graph(hh))
    if cw is None or cw == win:
        return CheckResult(1)
    return CheckResult(0, ViolationWitness("CC", hh, CoalitionAction("none"), hh, win, win, None, cw))


def check_par(rule, h, B, *, mode="exact", budget=DEFAULT_BUDGET, samples=10_000, seed=0) -> CheckResult:
    return _group_check(rule, h, B, "Par", mode, budget, samples, seed)


def check_hm(rule, h, B, *, mode="exact", budget=DEFAULT_BUDGET, samples=10_000, seed=0) -> CheckResult:
    return _group_check(rule, h, B, "HM", mode, budget, samples, seed)


def check_mm(rule, h, B, *, mode="exact", budget=DEFAULT_BUDGET, samples=10_000, seed=0) -> CheckResult:
    return _group_check(rule, h, B, "MM", mode, budget, samples, seed)


def check_sp(rule, h, B, *, mode="exact", budget=DEFAULT_BUDGET, samples=10_000, seed=0) -> CheckResult:
    return _group_check(rule, h, B, "SP", mode, budget, samples, seed)


CHECKERS = {"Par": check_par, "HM": check_hm, "MM": check_mm, "SP": check_sp}


def combo_axioms(which: str) -> tuple:
    """Axioms making up a combo label (cp, ch, cm, cs) or a single axiom."""
    w = str(which).lower()
    if w in COMBOS:
        return ("CC", COMBOS[w])
    return (axiom_label(w),)


def check_combo(which, rule, h, B, **kw) -> CheckResult:
    """Conjunction of CC and the group axiom named by the combo label."""
    if str(which).lower() not in COMBOS:
        raise ValueError(f"unknown combo {which!r}; expected one of {sorted(COMBOS)}")
    cc = check_cc(rule, h)
    if not cc.sat:
        return cc
    return CHECKERS[COMBOS[str(which).lower()]](rule, h, B, **kw)


def check_axiom(axiom, rule, h, B=1, **kw) -> CheckResult:
    axiom = axiom_label(axiom)
    if axiom == "CC":
        return check_cc(rule, h)
    return CHECKERS[axiom](rule, h, B, **kw)


# ---------------------------------------------------------------- replay

def verify_witness(rule, wit: ViolationWitness, B: int | None = None) -> bool:
    """Replay a witness; raise WitnessError describing the first failure."""
    rule = get_rule(rule)
    ax = axiom_label(wit.axiom)
    if B is None:
        B = wit.B
    if wit.action.kind != KIND[ax]:
        raise WitnessError(f"action kind {wit.action.kind!r} does not match {ax}")
    after = wit.action.apply(wit.before)
    if after != wit.after:
        raise WitnessError("action applied to 'before' does not give 'after'")
    wb = apply_rule(rule, wit.before)
    if wb != wit.winner_before:
        raise WitnessError(f"winner before is {wb}, witness says {wit.winner_before}")
    if ax == "CC":
        if wit.action.moves:
            raise WitnessError("CC witness carries moves")
        cw = condorcet_winner(weighted_majority_graph(wit.before))
        if cw is None or cw != wit.condorcet:
            raise WitnessError(f"Condorcet winner is {cw}, witness says {wit.condorcet}")
        if cw == wb:
            raise WitnessError("rule elects the Condorcet winner")
        if wit.winner_after != wb:
            raise WitnessError("CC witness winners disagree")
        return True
    if wit.condorcet is not None:
        raise WitnessError(f"{ax} witness carries a Condorcet label")
    size = wit.action.size
    if size < 1:
        raise WitnessError("empty coalition")
    if B is not None and size > B:
        raise WitnessError(f"coalition of {size} exceeds B={B}")
    if after.n < 1:
        raise WitnessError("everybody abstained")
    wa = apply_rule(rule, after)
    if wa != wit.winner_after:
        raise WitnessError(f"winner after is {wa}, witness says {wit.winner_after}")
    if wa == wb:
        raise WitnessError("winner did not change")
    for mv in wit.action.moves:
        if mv.count < 1:
            raise WitnessError("nonpositive move count")
        if ax == "Par" and mv.to is not None:
            raise WitnessError("abstention move has a target")
        if ax == "HM" and mv.to != reverse(mv.frm):
            raise WitnessError("flip target is not the reverse")
        if ax in ("MM", "SP") and (mv.to is None or mv.to == mv.frm):
            raise WitnessError("change move without a new ranking")
        if ax == "MM":
            if not raises(mv.frm, mv.to, wb):
                raise WitnessError(f"{ranking_str(mv.frm)} -> {ranking_str(mv.to)} does not raise {wb}")
        elif not prefers(mv.frm, wa, wb):
            raise WitnessError(f"voters {ranking_str(mv.frm)} do not prefer {wa} to {wb}")
    return True


def is_valid_witness(rule, wit, B=None) -> bool:
    try:
        return verify_witness(rule, wit, B)
    except (WitnessError, ValueError):
        return False


def format_witness(wit: ViolationWitness, rule=None) -> str:
    out = []
    if rule is not None:
        out.append(f"rule: {get_rule(rule)}")
    out += [
        f"axiom: {wit.axiom}",
        f"B: {'-' if wit.B is None else wit.B}",
        f"winner_before: {wit.winner_before}",
        f"winner_after: {wit.winner_after}",
        f"condorcet: {'-' if wit.condorcet is None else wit.condorcet}",
        f"kind: {wit.action.kind}",
    ]
    for mv in wit.action.moves:
        to = "-" if mv.to is None else ranking_str(mv.to)
        out.append(f"move: {mv.count} {ranking_str(mv.frm)} {to}")
    out.append("[before]")
    out.append(format_histogram(wit.before).rstrip("\n"))
    out.append("[after]")
    out.append(format_histogram(wit.after).rstrip("\n"))
    return "\n".join(out) + "\n"


def parse_witness(text: str):
    """Inverse of format_witness; returns (witness, rule name or None)."""
    head, before, after = {}, [], []
    moves = []
    sect = None
    for no, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line == "[before]":
            sect = before
            continue
        if line == "[after]":
            sect = after
            continue
        if sect is not None:
            sect.append(line)
            continue
        if ":" not in line:
            raise ValueError(f"line {no}: expected 'key: value'")
        k, v = (s.strip() for s in line.split(":", 1))
        if k == "move":
            parts = v.split()
            if len(parts) != 3:
                raise ValueError(f"line {no}: move needs count, from, to")
            moves.append(Move(parse_ranking(parts[1]), None if parts[2] == "-" else parse_ranking(parts[2]), int(parts[0])))
        else:
            if k in head:
                raise ValueError(f"line {no}: duplicate key {k}")
            head[k] = v
    need = ("axiom", "B", "winner_before", "winner_after", "condorcet", "kind")
    miss = [k for k in need if k not in head]
    if miss:
        raise ValueError(f"missing fields: {', '.join(miss)}")
    opt = lambda v: None if v == "-" else int(v)  # noqa: E731
    hb = parse_histogram("\n".join(before))
    ha = parse_histogram("\n".join(after)) if after else hb
    wit = ViolationWitness(
        axiom_label(head["axiom"]), hb, CoalitionAction(head["kind"], tuple(moves)), ha,
        int(head["winner_before"]), int(head["winner_after"]), opt(head["B"]), opt(head["condorcet"]),
    )
    return wit, head.get("rule")
