import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from axlab.core import all_rankings, kendall_tau, n_rankings, ranking_index
from axlab.models import (
    BLOCK,
    ModelError,
    build_adversarial_vector,
    draw_histograms,
    iid,
    mallows_floor,
    mallows_pmf,
    parse_model,
    plackett_luce_pmf,
    sample_profile,
    uniform,
    uniforms,
)


def brute_mallows(w, phi):
    rks = list(itertools.permutations(sorted(w)))
    wts = [phi ** kendall_tau(r, w) for r in rks]
    z = sum(wts)
    return {r: x / z for r, x in zip(rks, wts)}


def test_mallows_examples():
    u = mallows_pmf((2, 3, 1), 1.0)
    assert np.allclose(u.pmf, 1 / 6)
    p = mallows_pmf((1, 2, 3), 0.5)
    z = sum(0.5 ** kendall_tau(r, (1, 2, 3)) for r in itertools.permutations((1, 2, 3)))
    assert z == pytest.approx(1 + 2 * 0.5 + 2 * 0.25 + 0.125)
    assert p.prob((1, 2, 3)) == pytest.approx(1 / z, abs=1e-15)
    assert p.pmf.argmax() == ranking_index((1, 2, 3))
    assert (np.sort(p.pmf)[-2] < p.pmf.max())
    for phi in (0.0, -1.0, 1.5):
        with pytest.raises(ModelError):
            mallows_pmf((1, 2, 3), phi)


@given(st.permutations([1, 2, 3, 4]), st.floats(0.05, 1.0))
def test_mallows_matches_brute_and_floor(w, phi):
    w = tuple(w)
    d = mallows_pmf(w, phi)
    ref = brute_mallows(w, phi)
    for r, p in ref.items():
        assert d.prob(r) == pytest.approx(p, rel=1e-12)
    assert d.floor == pytest.approx(mallows_floor(4, phi), rel=1e-12)


@given(st.permutations([1, 2, 3, 4]), st.permutations([1, 2, 3, 4]), st.permutations([1, 2, 3, 4]),
       st.floats(0.1, 1.0))
def test_mallows_relabel_invariance(w, sigma, r, phi):
    relabel = lambda x: tuple(sigma[a - 1] for a in x)  # noqa: E731
    a = mallows_pmf(tuple(w), phi).prob(tuple(r))
    b = mallows_pmf(relabel(w), phi).prob(relabel(r))
    assert a == pytest.approx(b, rel=1e-12)


def test_plackett_luce_examples():
    d = plackett_luce_pmf([0.5, 0.3, 0.2])
    assert d.prob((1, 2, 3)) == pytest.approx(0.5 * 0.3 / 0.5, abs=1e-15)
    assert d.pmf.sum() == pytest.approx(1.0, abs=1e-12)
    assert np.allclose(plackett_luce_pmf([0.25] * 4).pmf, 1 / 24)
    with pytest.raises(ModelError):
        plackett_luce_pmf([0.6, 0.5, -0.1])
    with pytest.raises(ModelError):
        plackett_luce_pmf([0.85, 0.1, 0.05])  # below the default floor


def test_plackett_luce_product_formula_by_hand():
    th = {1: 0.2, 2: 0.5, 3: 0.3}
    d = plackett_luce_pmf([th[1], th[2], th[3]])
    for r in itertools.permutations((1, 2, 3)):
        p = th[r[0]] / 1.0 * th[r[1]] / (th[r[1]] + th[r[2]])
        assert d.prob(r) == pytest.approx(p, rel=1e-12)


def test_sampler_block_layout_and_determinism():
    a = uniforms(5, 0, 3000, 4)
    b = np.vstack([uniforms(5, lo, min(3000, lo + 700), 4) for lo in range(0, 3000, 700)])
    assert np.array_equal(a, b)
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence([5, 1])))
    assert np.array_equal(a[BLOCK:2 * BLOCK].ravel(), rng.random(BLOCK * 4))
    v = iid(uniform(3), 7)
    assert sample_profile(v, 9, 4) == sample_profile(v, 9, 4)
    assert sample_profile(v, 9, 4).n == 7


def test_uniform_sampler_within_4_sigma():
    v = iid(uniform(3), 10)
    h = draw_histograms(v, 3, 0, 100_000).sum(0)
    N = 10 ** 6
    sd = math.sqrt(N * (1 / 6) * (5 / 6))
    assert np.abs(h - N / 6).max() <= 4 * sd
    assert (h > 0).all()


def test_mallows_sampler_within_4_sigma():
    d = mallows_pmf((1, 2, 3), 0.5)
    h = draw_histograms(iid(d, 10), 11, 0, 100_000).sum(0)
    N = 10 ** 6
    sd = np.sqrt(N * d.pmf * (1 - d.pmf))
    assert (np.abs(h - N * d.pmf) <= 4 * sd).all()


@pytest.mark.parametrize("n", [12, 13, 1000])
@pytest.mark.parametrize("model", ["mallows:phi=0.5", "pl:theta=0.5,0.3,0.2"])
def test_adversarial_deviation(n, model):
    v = parse_model("adversarial:" + model, 3, n)
    assert v.n == n
    assert v.deviation() <= n_rankings(3)
    if n % 6 == 0:
        assert v.deviation() == pytest.approx(0, abs=1e-9)


def test_adversarial_cycles_centers():
    v = build_adversarial_vector(mallows_pmf((1, 2, 3), 0.5), 12)
    centers = [int(e.pmf.argmax()) for e in v.entries]
    assert centers == list(range(6)) * 2
    ic = build_adversarial_vector(uniform(3), 5)
    assert ic.deviation() == pytest.approx(0, abs=1e-12)


@settings(max_examples=30, deadline=None)
@given(st.integers(3, 5), st.integers(1, 60), st.floats(0.1, 1.0))
def test_adversarial_deviation_property(m, n, phi):
    v = build_adversarial_vector(mallows_pmf(tuple(range(1, m + 1)), phi), n)
    assert v.deviation() <= n_rankings(m) + 1e-9


def test_parse_model_errors():
    assert parse_model("ic", 4, 3).identical()
    assert parse_model("mallows:phi=0.5;w=3>1>2", 3, 2).entries[0].pmf.argmax() == ranking_index((3, 1, 2))
    for bad in ("nope", "mallows:phi=0.05", "pl:theta=0.5,0.5", "mallows", "adversarial:nope"):
        with pytest.raises(ModelError):
            parse_model(bad, 3, 4)


def test_pl_random_theta_normalized():
    rng = np.random.default_rng(0)
    for _ in range(100):
        th = rng.dirichlet(np.ones(4)) * 0.6 + 0.1
        th = th / th.sum()
        d = plackett_luce_pmf(th)
        assert abs(d.pmf.sum() - 1.0) <= 1e-12
        assert len(d.pmf) == len(all_rankings(4))
