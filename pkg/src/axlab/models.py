"""Ranking distributions, profile samplers and symmetrized distribution vectors.

Random numbers come from numpy's PCG64 seeded through ``SeedSequence``.
Trials are grouped in fixed blocks of ``BLOCK`` trials; block ``b`` of seed
``s`` owns the stream ``SeedSequence([s, b])`` and voter ``j`` of trial ``t``
reads uniform number ``(t mod BLOCK) * n + j`` of that stream.  A trial's
draws therefore depend only on (seed, trial, voter), never on how trials are
split among workers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .core import (
    Profile,
    all_rankings,
    kendall_tau_all,
    n_rankings,
    parse_ranking,
    ranking_at,
)

PHI_FLOOR = 0.1
BLOCK = 1024


class ModelError(ValueError):
    pass


@dataclass(frozen=True)
class RankingDistribution:
    m: int
    pmf: np.ndarray = field(repr=False)
    family: str = "uniform"
    params: tuple = ()

    def __post_init__(self):
        p = np.asarray(self.pmf, dtype=float)
        if p.shape != (n_rankings(self.m),):
            raise ModelError("pmf has the wrong length")
        if (p <= 0).any():
            raise ModelError("pmf must be strictly positive")
        if abs(p.sum() - 1.0) > 1e-12:
            raise ModelError(f"pmf sums to {p.sum()!r}")
        p = p.copy()
        p.setflags(write=False)
        object.__setattr__(self, "pmf", p)

    @property
    def floor(self) -> float:
        return float(self.pmf.min())

    def prob(self, r) -> float:
        from .core import ranking_index
        return float(self.pmf[ranking_index(r)])


@dataclass(frozen=True)
class DistributionVector:
    entries: tuple

    def __post_init__(self):
        if not self.entries:
            raise ModelError("empty distribution vector")
        m = self.entries[0].m
        if any(e.m != m for e in self.entries):
            raise ModelError("entries over different numbers of alternatives")

    @property
    def n(self) -> int:
        return len(self.entries)

    @property
    def m(self) -> int:
        return self.entries[0].m

    def total(self) -> np.ndarray:
        return np.sum([e.pmf for e in self.entries], axis=0)

    def deviation(self) -> float:
        """Max-norm distance of the summed pmfs from (n/m!) * 1."""
        return float(np.abs(self.total() - self.n / n_rankings(self.m)).max())

    def identical(self) -> bool:
        first = self.entries[0]
        return all(e is first or np.array_equal(e.pmf, first.pmf) for e in self.entries)


def uniform(m: int) -> RankingDistribution:
    k = n_rankings(m)
    return RankingDistribution(m, np.full(k, 1.0 / k), "uniform")


def mallows_pmf(w, phi: float) -> RankingDistribution:
    """pmf(R) proportional to phi ** KT(R, w)."""
    w = parse_ranking(w) if isinstance(w, str) else tuple(w)
    if not phi > 0:
        raise ModelError("phi must be positive")
    if phi > 1:
        raise ModelError("phi must not exceed 1")
    wt = float(phi) ** kendall_tau_all(w).astype(float)
    return RankingDistribution(len(w), wt / wt.sum(), "mallows", (w, float(phi)))


def mallows_floor(m: int, phi: float) -> float:
    """Smallest Mallows probability: phi^(m(m-1)/2) / Z."""
    z = math.prod(sum(phi**j for j in range(i)) for i in range(1, m + 1))
    return phi ** (m * (m - 1) // 2) / z


def plackett_luce_pmf(theta, floor: float = PHI_FLOOR) -> RankingDistribution:
    th = np.asarray(theta, dtype=float)
    if th.ndim != 1 or len(th) < 1:
        raise ModelError("theta must be a vector")
    if (th <= 0).any():
        raise ModelError("theta entries must be positive")
    if abs(th.sum() - 1.0) > 1e-12:
        raise ModelError(f"theta sums to {th.sum()!r}, not 1")
    if floor and (th < floor).any():
        raise ModelError(f"theta entries must be at least {floor}")
    m = len(th)
    rk = all_rankings(m) - 1
    w = th[rk]  # (m!, m) weights in ranking order
    tail = np.cumsum(w[:, ::-1], axis=1)[:, ::-1]
    p = np.prod(w[:, :-1] / tail[:, :-1], axis=1)
    return RankingDistribution(m, p / p.sum(), "plackett_luce", tuple(float(x) for x in th))


# ------------------------------------------------------------------ sampling

def uniforms(seed: int, lo: int, hi: int, n: int) -> np.ndarray:
    """(hi - lo, n) uniforms for trials lo..hi-1 of the given seed."""
    out = np.empty((hi - lo, n))
    b0, b1 = lo // BLOCK, (hi - 1) // BLOCK
    for b in range(b0, b1 + 1):
        rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence([int(seed), b])))
        s = max(lo, b * BLOCK)
        e = min(hi, (b + 1) * BLOCK)
        skip = (s - b * BLOCK) * n
        if skip:
            rng.random(skip)
        out[s - lo:e - lo] = rng.random((e - s) * n).reshape(e - s, n)
    return out


def _cdfs(v: DistributionVector):
    if v.identical():
        c = np.cumsum(v.entries[0].pmf)
        c[-1] = 1.0
        return c
    c = np.cumsum(np.array([e.pmf for e in v.entries]), axis=1)
    c[:, -1] = 1.0
    return c


def draw_indices(v: DistributionVector, seed: int, lo: int, hi: int) -> np.ndarray:
    """Ranking indices, shape (hi - lo, n), by inverse CDF."""
    u = uniforms(seed, lo, hi, v.n)
    c = _cdfs(v)
    if c.ndim == 1:
        if v.entries[0].family == "uniform":
            k = len(c)
            return np.minimum((u * k).astype(np.int64), k - 1)
        return np.searchsorted(c, u, side="right")
    out = np.empty(u.shape, dtype=np.int64)
    for j in range(v.n):
        out[:, j] = np.searchsorted(c[j], u[:, j], side="right")
    return out


def draw_histograms(v: DistributionVector, seed: int, lo: int, hi: int) -> np.ndarray:
    """(hi - lo, m!) count arrays for trials lo..hi-1."""
    idx = draw_indices(v, seed, lo, hi)
    k = n_rankings(v.m)
    rows = np.repeat(np.arange(idx.shape[0]), idx.shape[1])
    out = np.zeros((idx.shape[0], k), dtype=np.int64)
    np.add.at(out, (rows, idx.ravel()), 1)
    return out


def sample_profile(v: DistributionVector, seed: int, trial: int = 0) -> Profile:
    idx = draw_indices(v, seed, trial, trial + 1)[0]
    return Profile(tuple(ranking_at(v.m, int(i)) for i in idx))


# ------------------------------------------------------------------ families

def iid(d: RankingDistribution, n: int) -> DistributionVector:
    return DistributionVector(tuple([d] * n))


def build_adversarial_vector(family, n: int) -> DistributionVector:
    """Cycle the family's central parameter through all m! relabelings.

    ``family`` is a RankingDistribution or a model string.  Every full block of
    m! voters sums exactly to the all-ones vector, so only the last partial
    block deviates from (n/m!) * 1.
    """
    if isinstance(family, str):
        raise ModelError("pass a RankingDistribution; use parse_model for strings")
    d = family
    m = d.m
    k = n_rankings(m)
    rk = all_rankings(m)
    if d.family == "uniform":
        return iid(d, n)
    if d.family == "mallows":
        phi = d.params[1]
        cyc = [mallows_pmf(tuple(int(x) for x in rk[i]), phi) for i in range(k)]
    elif d.family == "plackett_luce":
        th = np.array(d.params)
        # relabel alternatives by each permutation
        cyc = [plackett_luce_pmf(th[np.argsort(rk[i] - 1)], floor=0) for i in range(k)]
    else:
        raise ModelError(f"cannot symmetrize family {d.family!r}")
    v = DistributionVector(tuple(cyc[j % k] for j in range(n)))
    if v.deviation() > k + 1e-9:
        raise ModelError("symmetrized vector deviates more than m! from uniform")
    return v


def parse_model(text: str, m: int, n: int, floor: float = PHI_FLOOR) -> DistributionVector:
    """Model strings: ic, mallows:phi=0.5, pl:theta=.5,.3,.2, adversarial:<model>."""
    text = text.strip().lower()
    if text.startswith("adversarial:"):
        base = parse_model(text.split(":", 1)[1], m, 1, floor)
        return build_adversarial_vector(base.entries[0], n)
    name, _, rest = text.partition(":")
    kv = {}
    if rest:
        for part in rest.split(";"):
            k, _, val = part.partition("=")
            kv[k.strip()] = val.strip()
    if name in ("ic", "uniform"):
        return iid(uniform(m), n)
    if name == "mallows":
        phi = float(kv.get("phi", "nan"))
        if not phi >= floor:
            raise ModelError(f"mallows needs phi >= {floor}")
        w = parse_ranking(kv["w"], m) if "w" in kv else tuple(range(1, m + 1))
        return iid(mallows_pmf(w, phi), n)
    if name in ("pl", "plackett_luce"):
        if "theta" not in kv:
            raise ModelError("pl needs theta=...")
        th = [float(x) for x in kv["theta"].split(",")]
        if len(th) != m:
            raise ModelError(f"theta has {len(th)} entries, m={m}")
        return iid(plackett_luce_pmf(th, floor), n)
    raise ModelError(f"unknown model {text!r}")
