"""Dispersion-parameterized ballot noise models: exact per-ranking pmfs,
seeded sampling, and moment/concentration analytics.

A noise model maps a voter's base ranking to a distribution over all m!
rankings, governed by a dispersion parameter ``phi`` in [0, 1]:

* ``phi = 0`` leaves the ballot unchanged (point mass on the base ranking);
* ``phi = 1`` draws a uniformly random ranking;
* for ``phi`` in (0, 1] every ranking has positive probability, and the
  minimum outcome probability is non-decreasing in ``phi``.

All pmf arithmetic is exact over rationals — float ``phi`` values are
converted to their exact binary value — so probability vectors sum to
exactly one.  Models are immutable and neutral: relabeling the candidates
of both the base and the outcome leaves the probability unchanged.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from numbers import Integral, Rational, Real
from typing import Dict, Mapping, Sequence, Tuple

import numpy as np

from .core import (
    ArgumentError,
    ConfigurationError,
    Profile,
    Ranking,
    SingularMatrixError,
    enumerate_rankings,
    kendall_tau_matrix,
    ranking_index,
)

PmfRow = Tuple[Fraction, ...]


def _phi_fraction(phi) -> Fraction:
    """Validate ``phi`` in [0, 1] and return it as an exact Fraction."""
    if isinstance(phi, Rational):
        value = Fraction(phi)
    elif isinstance(phi, Real):
        value = Fraction(float(phi))
    else:
        raise ArgumentError(f"dispersion must be a real number, got {phi!r}")
    if not 0 <= value <= 1:
        raise ArgumentError(f"dispersion must lie in [0, 1], got {phi!r}")
    return value


class NoiseModel:
    """Base class for per-ballot noise models.

    Subclasses implement :meth:`_row`, the exact outcome distribution for
    one base ranking.  Instances are immutable; pmf rows and sampling
    tables are memoized per ``(m, phi)``.
    """

    name: str = "abstract"

    def __init__(self) -> None:
        self._row_cache: Dict[tuple, PmfRow] = {}
        self._alias_cache: Dict[tuple, Tuple[np.ndarray, np.ndarray]] = {}

    def _row(self, m: int, base_index: int, phi: Fraction) -> PmfRow:
        raise NotImplementedError

    def pmf(self, base: Ranking, phi) -> PmfRow:
        """Exact outcome probabilities for ``base``, ordered as
        ``enumerate_rankings(m)``."""
        phi_f = _phi_fraction(phi)
        m = len(base)
        base_index = ranking_index(m)[tuple(base)]
        key = (m, base_index, phi_f)
        row = self._row_cache.get(key)
        if row is None:
            row = self._row(m, base_index, phi_f)
            self._row_cache[key] = row
        return row

    def _alias_table(self, base: Ranking, phi) -> Tuple[np.ndarray, np.ndarray]:
        phi_f = _phi_fraction(phi)
        m = len(base)
        base_index = ranking_index(m)[tuple(base)]
        key = (m, base_index, phi_f)
        table = self._alias_cache.get(key)
        if table is None:
            table = _build_alias(self.pmf(base, phi_f))
            self._alias_cache[key] = table
        return table


class MallowsModel(NoiseModel):
    """Mallows kernel: Pr[outcome] proportional to phi ** kendall_tau(base,
    outcome), normalized over all rankings."""

    name = "mallows"

    def __init__(self) -> None:
        super().__init__()
        self._level_cache: Dict[tuple, Tuple[Fraction, ...]] = {}

    def _levels(self, m: int, phi: Fraction) -> Tuple[Fraction, ...]:
        """Probability assigned to an outcome at each Kendall-tau distance."""
        key = (m, phi)
        levels = self._level_cache.get(key)
        if levels is None:
            distances = kendall_tau_matrix(m)[0]
            weights = [phi ** d for d in range(max(distances) + 1)]
            z = sum(weights[d] for d in distances)
            levels = tuple(w / z for w in weights)
            self._level_cache[key] = levels
        return levels

    def _row(self, m: int, base_index: int, phi: Fraction) -> PmfRow:
        levels = self._levels(m, phi)
        distances = kendall_tau_matrix(m)[base_index]
        return tuple(levels[d] for d in distances)


class UniformMixtureModel(NoiseModel):
    """Keep the ballot with probability 1 - phi, else resample uniformly:
    pmf(outcome) = (1 - phi) * [outcome == base] + phi / m!."""

    name = "uniform-mixture"

    def _row(self, m: int, base_index: int, phi: Fraction) -> PmfRow:
        fact = math.factorial(m)
        background = phi / fact
        return tuple(
            background + (1 - phi) if j == base_index else background
            for j in range(fact)
        )


MODELS: Dict[str, NoiseModel] = {
    model.name: model for model in (MallowsModel(), UniformMixtureModel())
}


def get_model(name: str) -> NoiseModel:
    """Look up a registered noise model by name."""
    try:
        return MODELS[name]
    except KeyError:
        known = ", ".join(sorted(MODELS))
        raise ConfigurationError(
            f"unknown noise model {name!r}; available models: {known}"
        ) from None


def parse_noise_spec(spec: Mapping) -> Tuple[NoiseModel, float]:
    """Parse a ``{"model": ..., "phi": ...}`` mapping from a config file."""
    if not isinstance(spec, Mapping):
        raise ConfigurationError(f"noise spec must be a mapping, got {spec!r}")
    unknown = sorted(set(spec) - {"model", "phi"})
    if unknown:
        raise ConfigurationError(f"unknown noise spec fields: {', '.join(unknown)}")
    missing = sorted({"model", "phi"} - set(spec))
    if missing:
        raise ConfigurationError(f"missing noise spec fields: {', '.join(missing)}")
    model = get_model(spec["model"])
    phi = spec["phi"]
    _phi_fraction(phi)
    return model, float(phi)


# --------------------------------------------------------------------------
# pmf-level operations
# --------------------------------------------------------------------------

def pmf(model: NoiseModel, base: Ranking, phi) -> PmfRow:
    """Exact outcome distribution of the noisy ballot for one voter."""
    return model.pmf(base, phi)


def min_prob(model: NoiseModel, phi, m: int) -> Fraction:
    """Smallest single-ranking probability of the model at dispersion phi.

    By neutrality this does not depend on the base ranking.
    """
    base = enumerate_rankings(m)[0]
    return min(model.pmf(base, phi))


# --------------------------------------------------------------------------
# sampling
# --------------------------------------------------------------------------

def _build_alias(row: Sequence[Fraction]) -> Tuple[np.ndarray, np.ndarray]:
    """Walker alias table for O(1) categorical draws."""
    k = len(row)
    prob = np.ones(k)
    alias = np.arange(k, dtype=np.int64)
    scaled = [float(p) * k for p in row]
    small = [i for i, s in enumerate(scaled) if s < 1.0]
    large = [i for i, s in enumerate(scaled) if s >= 1.0]
    while small and large:
        s = small.pop()
        l = large.pop()
        prob[s] = scaled[s]
        alias[s] = l
        scaled[l] -= 1.0 - scaled[s]
        (small if scaled[l] < 1.0 else large).append(l)
    return prob, alias


def sample_outcome_indices(
    model: NoiseModel, base: Ranking, phi, rng: np.random.Generator, size: int
) -> np.ndarray:
    """Vectorized draws of outcome-ranking indices for one base ranking."""
    prob, alias = model._alias_table(base, phi)
    k = len(prob)
    slots = rng.integers(0, k, size=size)
    keep = rng.random(size) < prob[slots]
    return np.where(keep, slots, alias[slots])


def sample_ranking(
    model: NoiseModel, base: Ranking, phi, rng: np.random.Generator
) -> Ranking:
    """Draw one noisy ballot for a voter with the given base ranking."""
    index = int(sample_outcome_indices(model, base, phi, rng, 1)[0])
    return enumerate_rankings(len(base))[index]


def _seed_key(rng) -> Tuple[int, ...]:
    """Normalize a deterministic seed key for per-voter substreams."""
    if isinstance(rng, (int, np.integer)) and not isinstance(rng, bool):
        return (int(rng),)
    if isinstance(rng, (tuple, list)) and rng and all(
        isinstance(x, Integral) and not isinstance(x, bool) for x in rng
    ):
        return tuple(int(x) for x in rng)
    raise ArgumentError(
        "perturb_profile needs a reproducible seed: pass an integer or a "
        f"non-empty tuple of integers, got {rng!r}"
    )


def perturb_profile(model: NoiseModel, profile: Profile, phi, rng) -> Profile:
    """Perturb every voter independently.

    ``rng`` is an integer seed or tuple of integers; voter ``i`` draws from
    its own counter-based substream keyed by ``(*rng, i)``, so results are
    bit-identical for a given seed regardless of evaluation order.
    """
    phi_f = _phi_fraction(phi)
    key = _seed_key(rng)
    if phi_f == 0:
        return profile
    rankings = enumerate_rankings(profile.m)
    out = []
    for i, base in enumerate(profile.rankings):
        stream = np.random.default_rng((*key, i))
        index = int(sample_outcome_indices(model, base, phi_f, stream, 1)[0])
        out.append(rankings[index])
    return Profile(profile.m, tuple(out))


# --------------------------------------------------------------------------
# moments
# --------------------------------------------------------------------------

def expected_pmf_exact(model: NoiseModel, profile: Profile, phi) -> PmfRow:
    """Exact expected histogram over all m! coordinates: the count-weighted
    average of per-voter outcome distributions."""
    phi_f = _phi_fraction(phi)
    counts = profile.counts()
    n = profile.n
    fact = math.factorial(profile.m)
    total = [Fraction(0)] * fact
    rankings = enumerate_rankings(profile.m)
    for base_index, count in enumerate(counts):
        if count == 0:
            continue
        row = model.pmf(rankings[base_index], phi_f)
        for j in range(fact):
            total[j] += count * row[j]
    return tuple(entry / n for entry in total)


def expected_histogram(model: NoiseModel, profile: Profile, phi) -> np.ndarray:
    """Expected histogram in explicit coordinates (the last ranking's
    coordinate is implied by the others)."""
    full = expected_pmf_exact(model, profile, phi)
    return np.array([float(x) for x in full[:-1]])


@dataclass(frozen=True, eq=False)
class CovarianceMatrix:
    """Covariance of the perturbed profile's histogram, explicit coordinates.

    ``matrix`` already includes the ``1/n**2`` normalization recorded in
    ``scale``; it is symmetric and positive definite for phi > 0.
    """

    matrix: np.ndarray
    scale: float


def covariance(model: NoiseModel, profile: Profile, phi) -> CovarianceMatrix:
    """Histogram covariance: (1/n^2) * sum over voters of per-voter
    covariance diag(q) - q q^T in explicit coordinates.

    Raises SingularMatrixError at phi = 0, where every per-voter
    distribution is a point mass and the covariance is identically zero.
    """
    phi_f = _phi_fraction(phi)
    if phi_f == 0:
        raise SingularMatrixError(
            "covariance is singular at dispersion 0 (ballots are never "
            "perturbed); use dispersion > 0"
        )
    n = profile.n
    fact = math.factorial(profile.m)
    rankings = enumerate_rankings(profile.m)
    total = np.zeros((fact - 1, fact - 1))
    for base_index, count in enumerate(profile.counts()):
        if count == 0:
            continue
        q = np.array(
            [float(x) for x in model.pmf(rankings[base_index], phi_f)[:-1]]
        )
        total += count * (np.diag(q) - np.outer(q, q))
    scale = 1.0 / (n * n)
    return CovarianceMatrix(matrix=total * scale, scale=scale)


def inverse_single_voter_covariance(q_full: Sequence) -> np.ndarray:
    """Closed-form inverse of diag(q) - q q^T in explicit coordinates:
    diagonal 1/q_j + 1/q_last, off-diagonal 1/q_last.

    ``q_full`` is the full outcome distribution of one voter (all m!
    entries, each positive).
    """
    q = [float(x) for x in q_full]
    if min(q) <= 0:
        raise SingularMatrixError(
            "single-voter covariance is invertible only when every outcome "
            "has positive probability"
        )
    k = len(q) - 1
    inv = np.full((k, k), 1.0 / q[-1])
    inv[np.diag_indices(k)] += [1.0 / q[j] for j in range(k)]
    return inv


# --------------------------------------------------------------------------
# concentration bounds
# --------------------------------------------------------------------------

def hoeffding_bound(epsilon: float, n: int, m: int) -> float:
    """Lower bound on Pr[||H - E[H]||_1 < epsilon] for the perturbed
    histogram of an n-voter profile: 1 - 2 m! exp(-2 eps^2 n / m!)."""
    if not epsilon > 0:
        raise ArgumentError(f"epsilon must be positive, got {epsilon!r}")
    if n < 1:
        raise ArgumentError(f"n must be at least 1, got {n!r}")
    fact = math.factorial(m)
    return 1.0 - 2.0 * fact * math.exp(-2.0 * epsilon * epsilon * n / fact)


def starting_concentration_bound(epsilon: float, n: int) -> float:
    """Lower bound on Pr[||H - h||_1 < epsilon], with h the unperturbed
    histogram, valid whenever each ballot survives unchanged with
    probability above 1 - epsilon/2: 1 - exp(-eps^2 n / 2)."""
    if not epsilon > 0:
        raise ArgumentError(f"epsilon must be positive, got {epsilon!r}")
    if n < 1:
        raise ArgumentError(f"n must be at least 1, got {n!r}")
    return 1.0 - math.exp(-epsilon * epsilon * n / 2.0)


# --------------------------------------------------------------------------
# Gaussian-approximation diagnostics
# --------------------------------------------------------------------------

def _normal_cdf(x: float) -> float:
    return 0.5 * (1.0 + math.erf(x / math.sqrt(2.0)))


def half_space_gaussian_gap(
    model: NoiseModel,
    base: Ranking,
    phi,
    coord: int,
    t: float,
    n: int,
    trials: int,
    rng: np.random.Generator,
) -> float:
    """|empirical Pr[H_coord <= t] - Gaussian Pr| for an n-voter profile of
    identical ``base`` ballots, with the Gaussian matched to the exact mean
    and variance of coordinate ``coord``."""
    row = model.pmf(base, phi)
    pvals = np.array([float(x) for x in row])
    counts = rng.multinomial(n, pvals, size=trials)
    empirical = float(np.mean(counts[:, coord] / n <= t))
    mean = pvals[coord]
    sigma = math.sqrt(mean * (1.0 - mean) / n)
    gaussian = _normal_cdf((t - mean) / sigma)
    return abs(empirical - gaussian)


def berry_esseen_sup_gap(
    model: NoiseModel,
    base: Ranking,
    phi,
    n: int,
    trials: int,
    seed: int,
    coord: int = 0,
    z_grid: Sequence[float] = (-1.5, -1.0, -0.5, 0.0, 0.5, 1.0, 1.5),
) -> float:
    """Largest half-space Gaussian-approximation gap over a grid of
    thresholds mean + z * sigma.  Decays roughly like n^(-1/2)."""
    row = model.pmf(base, phi)
    pvals = np.array([float(x) for x in row])
    rng = np.random.default_rng((seed, n))
    counts = rng.multinomial(n, pvals, size=trials)
    shares = counts[:, coord] / n
    mean = pvals[coord]
    sigma = math.sqrt(mean * (1.0 - mean) / n)
    worst = 0.0
    for z in z_grid:
        t = mean + z * sigma
        empirical = float(np.mean(shares <= t))
        worst = max(worst, abs(empirical - _normal_cdf(z)))
    return worst
