"""Monte-Carlo violation rates, an exact IC oracle and power-law fits.

For each sampled profile the lab computes k*, the smallest coalition size
that violates the requested combo (0 when CC already fails, infinity when no
coalition up to the largest requested B works).  A profile violates at B
exactly when k* <= B, so one pass serves every B of a sweep and the counts
are non-decreasing in B by construction.
"""

from __future__ import annotations

import csv
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from fractions import Fraction

import numpy as np
from scipy.stats import binomtest

from .axioms import DEFAULT_BUDGET, combo_axioms, min_violation_size
from .core import (
    Histogram,
    condorcet_winners_batch,
    n_rankings,
    pairwise_signs,
)
from .models import BLOCK, DistributionVector, draw_indices, parse_model
from .rules import apply_rule_batch, get_rule

NONE = np.iinfo(np.int32).max  # "no violation up to Bmax"
TABLE_LIMIT = 5_000_000
CSV_FIELDS = ("n", "B", "rule", "combo", "model", "trials", "violations", "rate", "ci_lo", "ci_hi", "seed")


@dataclass(frozen=True)
class RatePoint:
    n: int
    B: int
    rule: str
    combo: str
    model: str
    trials: int
    violations: int
    rate: float
    ci_lo: float
    ci_hi: float
    seed: int


@dataclass(frozen=True)
class FitResult:
    slope: float
    intercept: float
    residual: float


def wilson_interval(k: int, n: int) -> tuple[float, float]:
    ci = binomtest(int(k), int(n)).proportion_ci(confidence_level=0.95, method="wilson")
    return float(ci.low), float(ci.high)


def make_point(n, B, rule, combo, model, trials, violations, seed) -> RatePoint:
    lo, hi = wilson_interval(violations, trials)
    return RatePoint(int(n), int(B), str(rule), str(combo), str(model), int(trials),
                     int(violations), violations / trials, lo, hi, int(seed))


def kstar_batch(rule, combo: str, counts: np.ndarray, m: int, bmax: int,
                budget: int = DEFAULT_BUDGET) -> np.ndarray:
    """k* for each row of a (T, m!) count array."""
    rule = get_rule(rule)
    axes = combo_axioms(combo)
    out = np.full(len(counts), NONE, dtype=np.int64)
    todo = np.ones(len(counts), dtype=bool)
    if "CC" in axes:
        cw = condorcet_winners_batch(counts @ pairwise_signs(m), m)
        win = apply_rule_batch(rule, counts, m)
        bad = (cw > 0) & (cw != win)
        out[bad] = 0
        todo &= ~bad
    group = [a for a in axes if a != "CC"]
    if group:
        ax = group[0]
        for i in np.flatnonzero(todo):
            h = Histogram(m, counts[i])
            b = min(bmax, h.n)
            k = min_violation_size(rule, h, ax, b, budget=budget)
            if k is not None:
                out[i] = k
    return out


class _Table:
    """Dense k* cache over histogram codes sum_R h_R (n+1)^R."""

    def __init__(self, n: int, m: int):
        self.n, self.m = n, m
        self.pw = (n + 1) ** np.arange(n_rankings(m), dtype=np.int64)
        self.vals = np.full((n + 1) ** n_rankings(m), -1, dtype=np.int64)

    @staticmethod
    def fits(n: int, m: int) -> bool:
        return (n + 1) ** n_rankings(m) <= TABLE_LIMIT

    def lookup(self, idx: np.ndarray, rule, combo, bmax, budget):
        codes = self.pw[idx].sum(axis=1)
        v = self.vals[codes]
        miss = np.unique(codes[v < 0])
        if len(miss):
            k = n_rankings(self.m)
            c = (miss[:, None] // self.pw[None, :]) % (self.n + 1)
            self.vals[miss] = kstar_batch(rule, combo, c.reshape(-1, k), self.m, bmax, budget)
            v = self.vals[codes]
        return v


def _run_chunk(args):
    rule, combo, model, m, n, bmax, seed, lo, hi, budget = args
    v = parse_model(model, m, n)
    idx = draw_indices(v, seed, lo, hi)
    k = n_rankings(m)
    counts = np.zeros((hi - lo, k), dtype=np.int64)
    np.add.at(counts, (np.repeat(np.arange(hi - lo), n), idx.ravel()), 1)
    ks = kstar_batch(rule, combo, counts, m, bmax, budget)
    return np.bincount(np.minimum(ks, bmax + 1), minlength=bmax + 2)


def kstar_histogram(rule, combo, model: str, m: int, n: int, bmax: int, trials: int,
                    seed: int, workers: int = 1, budget: int = DEFAULT_BUDGET,
                    chunk: int = 16 * BLOCK) -> np.ndarray:
    """Counts of k* = 0..bmax (last bin: no violation up to bmax) over trials."""
    rule = str(get_rule(rule))
    acc = np.zeros(bmax + 2, dtype=np.int64)
    if _Table.fits(n, m):
        tab = _Table(n, m)
        v = parse_model(model, m, n)
        for lo in range(0, trials, chunk):
            hi = min(trials, lo + chunk)
            ks = tab.lookup(draw_indices(v, seed, lo, hi), rule, combo, bmax, budget)
            acc += np.bincount(np.minimum(ks, bmax + 1), minlength=bmax + 2)
        return acc
    jobs = [(rule, combo, model, m, n, bmax, seed, lo, min(trials, lo + chunk), budget)
            for lo in range(0, trials, chunk)]
    if workers <= 1 or len(jobs) == 1:
        for j in jobs:
            acc += _run_chunk(j)
    else:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            for r in ex.map(_run_chunk, jobs):
                acc += r
    return acc


def estimate_rates(rule, combo, n, Bs, model="ic", trials=10_000, seed=0, m=4,
                   workers=1, budget=DEFAULT_BUDGET) -> list[RatePoint]:
    """One RatePoint per B; every B sees the same sampled profiles."""
    Bs = [int(b) for b in Bs]
    if trials < 1:
        raise ValueError("trials must be positive")
    if min(Bs) < 1:
        raise ValueError("B must be positive")
    bmax = max(Bs)
    hist = kstar_histogram(rule, combo, model, m, n, bmax, trials, seed, workers, budget)
    cum = np.cumsum(hist)
    name = str(get_rule(rule))
    return [make_point(n, b, name, combo, model, trials, int(cum[b]), seed) for b in Bs]


def estimate_rate(rule, combo, n, B, model="ic", trials=10_000, seed=0, m=4,
                  workers=1, budget=DEFAULT_BUDGET) -> RatePoint:
    return estimate_rates(rule, combo, n, [B], model, trials, seed, m, workers, budget)[0]


def compositions(n: int, k: int):
    """All length-k nonnegative integer vectors summing to n, as an array."""
    total = math.comb(n + k - 1, k - 1)
    out = np.zeros((total, k), dtype=np.int64)
    for row, bars in enumerate(_bars(n, k)):
        out[row] = bars
    return out


def _bars(n, k):
    import itertools
    for c in itertools.combinations(range(n + k - 1), k - 1):
        prev = -1
        parts = []
        for x in c:
            parts.append(x - prev - 1)
            prev = x
        parts.append(n + k - 2 - prev)
        yield parts


def exact_ic_rate(rule, combo, n, B, m=3, budget: int = 2_000_000) -> Fraction:
    """Exact IC probability that the combo is violated at coalition bound B."""
    k = n_rankings(m)
    size = math.comb(n + k - 1, k - 1)
    if size > budget:
        raise ValueError(f"{size} histograms exceed the enumeration budget {budget}")
    hs = compositions(n, k)
    ks = kstar_batch(rule, combo, hs, m, min(B, n))
    bad = hs[ks <= B]
    lf = [math.factorial(i) for i in range(n + 1)]
    num = sum(lf[n] // math.prod(lf[int(c)] for c in row) for row in bad)
    return Fraction(num, k**n)


def fit_powerlaw(points, axis: str = "n") -> FitResult:
    """Least squares of log(rate) on log(axis value)."""
    if axis not in ("n", "B"):
        raise ValueError("axis must be 'n' or 'B'")
    pts = list(points)
    if len(pts) < 3:
        raise ValueError("need at least 3 points")
    x = np.array([getattr(p, axis) for p in pts], dtype=float)
    y = np.array([p.rate for p in pts], dtype=float)
    if (y <= 0).any():
        raise ValueError("all rates must be positive")
    A = np.column_stack([np.log(x), np.ones_like(x)])
    coef, res, *_ = np.linalg.lstsq(A, np.log(y), rcond=None)
    resid = float(np.linalg.norm(A @ coef - np.log(y)))
    return FitResult(float(coef[0]), float(coef[1]), resid)


def write_csv(points, path) -> None:
    with open(path, "w", newline="") as f:
        w = csv.DictWriter(f, fieldnames=CSV_FIELDS, lineterminator="\n")
        w.writeheader()
        for p in points:
            row = asdict(p)
            for key in ("rate", "ci_lo", "ci_hi"):
                row[key] = repr(float(row[key]))
            w.writerow(row)


def read_csv(path) -> list[RatePoint]:
    with open(path, newline="") as f:
        rd = csv.DictReader(f)
        missing = set(CSV_FIELDS) - set(rd.fieldnames or ())
        if missing:
            raise ValueError(f"CSV lacks columns: {', '.join(sorted(missing))}")
        out = []
        for row in rd:
            out.append(RatePoint(
                int(row["n"]), int(row["B"]), row["rule"], row["combo"], row["model"],
                int(row["trials"]), int(row["violations"]), float(row["rate"]),
                float(row["ci_lo"]), float(row["ci_hi"]), int(row["seed"]),
            ))
    return out


def default_workers() -> int:
    env = os.environ.get("AXLAB_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1
