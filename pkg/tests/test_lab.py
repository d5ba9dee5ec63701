import itertools
import math
from fractions import Fraction

import numpy as np
import pytest

from axlab.core import Histogram, condorcet_winners_batch, pairwise_signs
from axlab.lab import (
    NONE,
    RatePoint,
    _Table,
    compositions,
    estimate_rate,
    estimate_rates,
    exact_ic_rate,
    fit_powerlaw,
    kstar_batch,
    kstar_histogram,
    make_point,
    read_csv,
    wilson_interval,
    write_csv,
)
from axlab.oracle import naive_check


def multinomial(n, row):
    out = math.factorial(n)
    for c in row:
        out //= math.factorial(int(c))
    return out


def oracle_rate(rule, axiom, n, B, m=3):
    """Violation probability of CC-or-axiom via the voter-level oracle."""
    num = 0
    for row in compositions(n, math.factorial(m)):
        p = Histogram(m, row).to_profile()
        bad = naive_check(rule, p, "CC", B)[0] == 0 or naive_check(rule, p, axiom, B)[0] == 0
        if bad:
            num += multinomial(n, row)
    return Fraction(num, math.factorial(m) ** n)


def test_compositions_count():
    c = compositions(4, 6)
    assert c.shape == (math.comb(9, 5), 6)
    assert (c.sum(1) == 4).all()
    assert len({tuple(r) for r in c}) == len(c)


def test_borda_cm_exact_value():
    r = exact_ic_rate("borda", "cm", 10, 1, m=3)
    assert r == oracle_rate("borda", "MM", 10, 1)
    assert r == Fraction(405139, 1679616)


def test_exact_matches_voter_level_oracle_small():
    for n in (2, 3, 4):
        for rule in ("borda", "plurality"):
            assert exact_ic_rate(rule, "cm", n, 1) == oracle_rate(rule, "MM", n, 1)
            assert exact_ic_rate(rule, "cp", n, 1) == oracle_rate(rule, "Par", n, 1)


def test_exact_small_cases():
    assert exact_ic_rate("constant_1", "CC", 1, 1) == Fraction(2, 3)
    for rule in ("maximin", "copeland", "schulze", "ranked_pairs"):
        assert exact_ic_rate(rule, "CC", 1, 1) == 0
    assert exact_ic_rate("borda", "cm", 10, 1) == exact_ic_rate("borda", "cm", 10, 1)
    with pytest.raises(ValueError):
        exact_ic_rate("borda", "cm", 40, 1, m=4)


def test_condorcet_winner_probability_m3_n3():
    # 6^3 ordered profiles against the histogram-weighted sum
    rows = np.array([np.bincount(p, minlength=6) for p in itertools.product(range(6), repeat=3)])
    direct = Fraction(int((condorcet_winners_batch(rows @ pairwise_signs(3), 3) > 0).sum()), 216)
    hs = compositions(3, 6)
    has = condorcet_winners_batch(hs @ pairwise_signs(3), 3) > 0
    weighted = Fraction(sum(multinomial(3, r) for r in hs[has]), 216)
    assert direct == weighted == Fraction(17, 18)


def test_kstar_semantics():
    h = Histogram.from_dict(3, {(2, 1, 3): 4})
    assert kstar_batch("constant_1", "cm", h.counts[None, :], 3, 2)[0] == 0
    assert kstar_batch("maximin", "cm", h.counts[None, :], 3, 2)[0] == NONE


def test_wilson_interval_formula():
    for k, n in [(0, 50), (7, 100), (100, 100), (3, 1000)]:
        lo, hi = wilson_interval(k, n)
        z = 1.959963984540054
        p = k / n
        c = (p + z * z / (2 * n)) / (1 + z * z / n)
        r = z / (1 + z * z / n) * math.sqrt(p * (1 - p) / n + z * z / (4 * n * n))
        assert lo == pytest.approx(max(0.0, c - r), abs=1e-9)
        assert hi == pytest.approx(min(1.0, c + r), abs=1e-9)


def test_trivial_rates():
    p = estimate_rate("maximin", "CC", 9, 1, trials=2000, seed=1)
    assert p.violations == 0 and p.ci_lo == 0.0
    p = estimate_rate("constant_1", "Par", 9, 2, trials=500, seed=1)
    assert p.violations == 0


def test_common_random_numbers_and_workers():
    Bs = [1, 2, 3]
    a = estimate_rates("plurality", "cp", 30, Bs, trials=3000, seed=8, m=3, workers=1)
    b = estimate_rates("plurality", "cp", 30, Bs, trials=3000, seed=8, m=3, workers=3)
    assert a == b
    v = [p.violations for p in a]
    assert v == sorted(v)
    single = estimate_rate("plurality", "cp", 30, 2, trials=3000, seed=8, m=3)
    assert single.violations == a[1].violations


def test_table_cache_agrees_with_direct():
    assert _Table.fits(6, 3)
    k1 = kstar_histogram("borda", "cm", "ic", 3, 6, 2, 4000, seed=2)
    from axlab.lab import _run_chunk
    k2 = _run_chunk(("borda", "cm", "ic", 3, 6, 2, 2, 0, 4000, 10**8))
    assert (k1 == k2).all()


def test_estimate_close_to_exact():
    exact = float(exact_ic_rate("borda", "cm", 6, 1))
    p = estimate_rate("borda", "cm", 6, 1, trials=50_000, seed=3, m=3)
    sd = math.sqrt(exact * (1 - exact) / p.trials)
    assert abs(p.rate - exact) <= 4 * sd


def test_fit_powerlaw_exact_laws():
    pts = [make_point(n, 1, "r", "cp", "ic", 10**6, int(round(3e5 * n ** -0.5)), 0) for n in (4, 16, 64, 256)]
    pts = [RatePoint(**{**p.__dict__, "rate": 0.3 * p.n ** -0.5}) for p in pts]
    assert fit_powerlaw(pts, "n").slope == pytest.approx(-0.5, abs=1e-9)
    pts = [RatePoint(100, b, "r", "cp", "ic", 1, 0, 0.01 * b, 0, 1, 0) for b in (1, 2, 4, 8)]
    fr = fit_powerlaw(pts, "B")
    assert fr.slope == pytest.approx(1.0, abs=1e-9)
    assert fr.intercept == pytest.approx(math.log(0.01), abs=1e-9)
    with pytest.raises(ValueError):
        fit_powerlaw(pts[:2], "B")
    with pytest.raises(ValueError):
        fit_powerlaw(pts, "m")


def test_csv_roundtrip(tmp_path):
    pts = estimate_rates("borda", "cs", 5, [1, 2], trials=300, seed=4, m=3)
    f = tmp_path / "r.csv"
    write_csv(pts, f)
    assert read_csv(f) == pts
    first = f.read_bytes()
    write_csv(estimate_rates("borda", "cs", 5, [1, 2], trials=300, seed=4, m=3), f)
    assert f.read_bytes() == first
    (tmp_path / "bad.csv").write_text("n,B\n1,2\n")
    with pytest.raises(ValueError):
        read_csv(tmp_path / "bad.csv")
