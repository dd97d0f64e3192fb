"""Monte Carlo estimation of axiom-violation probabilities under ranking
noise, with exact expected-margin verification and sweep drivers.

Sampling is vectorized: the perturbed profile's ranking-count vector is a
sum of independent multinomials, one per group of voters sharing a base
ballot, so cost per trial is independent of the voter count.  Trials are
partitioned into fixed blocks of 512 and block ``i`` draws from
``default_rng([seed, stream, i])``; worker threads only split blocks, so
results are byte-identical for every worker count.
"""

from __future__ import annotations

import csv
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from .core import (
    ArgumentError,
    ConfigurationError,
    InvariantError,
    Profile,
    enumerate_rankings,
    replicate,
)
from .noise import MallowsModel, NoiseModel, _phi_fraction, expected_pmf_exact
from .rules import Hyperplane, VotingRule, margin_blocks
from .axioms import StrictCounterexample, parse_rho_expr

BLOCK_TRIALS = 512
WILSON_Z = 1.959963984540054  # two-sided 95% normal quantile
MIN_TRIALS = 100

CSV_COLUMNS = (
    "experiment", "rule", "axiom", "model", "phi", "n", "z",
    "trials", "p_hat", "ci_low", "ci_high", "seed", "ms",
)

BaseSource = Union[Profile, str, Callable[[int], Profile]]


# --------------------------------------------------------------------------
# estimates
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class Estimate:
    """A Bernoulli probability estimate with a Wilson 95% interval."""

    p_hat: float
    ci_low: float
    ci_high: float
    trials: int
    successes: int
    seed: int


def wilson_interval(successes: int, trials: int) -> Tuple[float, float]:
    """Wilson score interval for a binomial proportion at 95% coverage."""
    if trials <= 0:
        raise ArgumentError(f"trials must be positive, got {trials}")
    if not 0 <= successes <= trials:
        raise ArgumentError(f"successes {successes} outside [0, {trials}]")
    z2 = WILSON_Z * WILSON_Z
    p = successes / trials
    denom = 1.0 + z2 / trials
    center = (p + z2 / (2 * trials)) / denom
    half = (
        WILSON_Z
        * math.sqrt(p * (1.0 - p) / trials + z2 / (4.0 * trials * trials))
        / denom
    )
    low = 0.0 if successes == 0 else max(0.0, center - half)
    high = 1.0 if successes == trials else min(1.0, center + half)
    return (low, high)


def _estimate(successes: int, trials: int, seed: int) -> Estimate:
    low, high = wilson_interval(successes, trials)
    return Estimate(
        p_hat=successes / trials, ci_low=low, ci_high=high,
        trials=trials, successes=successes, seed=seed,
    )


# --------------------------------------------------------------------------
# schedules
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class RhoSchedule:
    """Coalition-size budget as a function of the electorate size:
    ``const:<k>`` or ``pow:<c>,<e>`` with e < 1/2 (the coalition's
    histogram reach must shrink faster than sampling noise)."""

    text: str

    def __post_init__(self):
        object.__setattr__(self, "_fn", parse_rho_expr(self.text))

    def value(self, n: int) -> int:
        return self._fn(n)


@dataclass(frozen=True)
class DeltaSchedule:
    """Shrinking hyperplane-slab width delta(n) = c * n**e with e < -1/2,
    so the slab narrows faster than the histogram's own fluctuations."""

    c: float
    e: float

    def __post_init__(self):
        if not self.c > 0:
            raise ConfigurationError(f"slab width scale must be positive, got {self.c}")
        if not self.e < -0.5:
            raise ConfigurationError(
                f"slab width exponent must be below -1/2, got {self.e}"
            )

    @classmethod
    def from_expr(cls, text: str) -> "DeltaSchedule":
        if not text.startswith("pow:"):
            raise ConfigurationError(
                f"slab schedule must be pow:<c>,<e>, got {text!r}"
            )
        body = text[len("pow:"):].split(",")
        if len(body) != 2:
            raise ConfigurationError(f"slab schedule needs c,e: {text!r}")
        try:
            return cls(c=float(body[0]), e=float(body[1]))
        except ValueError:
            raise ConfigurationError(f"bad slab schedule {text!r}") from None

    def value(self, n: int) -> float:
        return self.c * n ** self.e


# --------------------------------------------------------------------------
# base-profile presets
# --------------------------------------------------------------------------

def _preset_two_way_tie(n: int) -> Profile:
    if n < 2 or n % 2:
        raise ArgumentError(f"two-way-tie needs an even electorate, got n={n}")
    return Profile.from_counts(3, (n // 2, 0, n // 2, 0, 0, 0))


def _preset_cycle(n: int) -> Profile:
    """Near-equal thirds of abc/bca/cab; pairwise margins are cyclic for
    every n >= 3 except n = 4, where no strict cycle over these ballots
    exists."""
    if n < 3 or n == 4:
        raise ArgumentError(f"cycle preset needs n=3 or n>=5, got n={n}")
    q, r = divmod(n, 3)
    counts = [q + (1 if i < r else 0) for i in range(3)]
    return Profile.from_counts(3, (counts[0], 0, 0, counts[1], counts[2], 0))


def _preset_group_flip(n: int) -> Profile:
    """40% abc / 35% bac / 25% cab: a clear winner with a chasing runner-up."""
    if n < 20 or n % 20:
        raise ArgumentError(f"group-flip-base needs n divisible by 20, got n={n}")
    return Profile.from_counts(
        3, (2 * n // 5, 0, 7 * n // 20, 0, n // 4, 0)
    )


def _preset_uniform_mix(n: int) -> Profile:
    if n < 6:
        raise ArgumentError(f"uniform-mix needs n >= 6, got n={n}")
    counts = [n // 6] * 6
    counts[5] += n % 6
    return Profile.from_counts(3, tuple(counts))


PRESETS: Dict[str, Callable[[int], Profile]] = {
    "two-way-tie": _preset_two_way_tie,
    "cycle": _preset_cycle,
    "group-flip-base": _preset_group_flip,
    "uniform-mix": _preset_uniform_mix,
}


def preset_profile(name: str, n: int) -> Profile:
    if name not in PRESETS:
        known = ", ".join(sorted(PRESETS))
        raise ConfigurationError(f"unknown preset {name!r}; available: {known}")
    return PRESETS[name](n)


def _resolve_base(source: BaseSource, n: int) -> Profile:
    """Materialize a base profile of exactly n voters from a fixed profile
    (replicated), a preset name, or a generator callable."""
    if isinstance(source, Profile):
        if n % source.n:
            raise ArgumentError(
                f"target size n={n} is not a multiple of the base size {source.n}"
            )
        return replicate(source, n // source.n)
    if isinstance(source, str):
        return preset_profile(source, n)
    if callable(source):
        profile = source(n)
        if profile.n != n:
            raise InvariantError(
                f"base generator returned {profile.n} voters, wanted {n}"
            )
        return profile
    raise ArgumentError(f"cannot build a base profile from {source!r}")


# --------------------------------------------------------------------------
# block-seeded sampling engine
# --------------------------------------------------------------------------

def _validate_run(trials: int, seed: int, workers: int) -> None:
    if not isinstance(trials, int) or trials < MIN_TRIALS:
        raise ArgumentError(f"need at least {MIN_TRIALS} trials, got {trials!r}")
    if not isinstance(seed, int) or seed < 0:
        raise ArgumentError(f"seed must be a nonnegative integer, got {seed!r}")
    if not isinstance(workers, int) or workers < 1:
        raise ArgumentError(f"workers must be a positive integer, got {workers!r}")


def _blocks(trials: int) -> List[Tuple[int, int, int]]:
    return [
        (i, lo, min(lo + BLOCK_TRIALS, trials))
        for i, lo in enumerate(range(0, trials, BLOCK_TRIALS))
    ]


def _run_blocks(
    fill: Callable[[int, int, int], None], trials: int, workers: int
) -> None:
    blocks = _blocks(trials)
    if workers == 1:
        for i, lo, hi in blocks:
            fill(i, lo, hi)
        return
    with ThreadPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(fill, i, lo, hi) for i, lo, hi in blocks]
        for f in futures:
            f.result()


def _pvals(row: Sequence[Fraction]) -> np.ndarray:
    p = np.array([float(x) for x in row], dtype=np.float64)
    return p / p.sum()


def _ballot_groups(
    model: NoiseModel, base: Profile, phi
) -> List[Tuple[int, np.ndarray]]:
    rankings = enumerate_rankings(base.m)
    return [
        (count, _pvals(model.pmf(rankings[j], phi)))
        for j, count in enumerate(base.counts())
        if count
    ]


def sample_profile_counts(
    model: NoiseModel,
    base: Profile,
    phi,
    trials: int,
    seed: int,
    stream: int = 0,
    workers: int = 1,
) -> np.ndarray:
    """Ranking-count vectors of ``trials`` independently perturbed copies
    of ``base``, shape (trials, m!)."""
    _validate_run(trials, seed, workers)
    groups = _ballot_groups(model, base, phi)
    fact = len(base.counts())
    out = np.empty((trials, fact), dtype=np.int64)

    def fill(i: int, lo: int, hi: int) -> None:
        rng = np.random.default_rng([seed, stream, i])
        acc = np.zeros((hi - lo, fact), dtype=np.int64)
        for count, pvals in groups:
            acc += rng.multinomial(count, pvals, size=hi - lo)
        out[lo:hi] = acc

    _run_blocks(fill, trials, workers)
    return out


def _pair_side(ranking, a: int, b: int) -> bool:
    return ranking.index(a) < ranking.index(b)


def _iia_groups(
    model: NoiseModel, pair: Tuple[Profile, Profile], a: int, b: int, phi
) -> List[Tuple[str, int, np.ndarray]]:
    """Voter groups of a matched pair.  Voters whose two ballots coincide
    share one 6-cell draw; voters whose ballots differ draw from a 36-cell
    coupling whose first marginal is the first ballot's noise row and whose
    second coordinate is the second ballot's row conditioned on keeping the
    (a, b) order of the first draw."""
    p1, p2 = pair
    rankings = enumerate_rankings(3)
    counts: Dict[Tuple[int, int], int] = {}
    from .core import ranking_index
    index = ranking_index(3)
    for r1, r2 in zip(p1.rankings, p2.rankings):
        key = (index[r1], index[r2])
        counts[key] = counts.get(key, 0) + 1
    groups: List[Tuple[str, int, np.ndarray]] = []
    for (j1, j2), count in sorted(counts.items()):
        if j1 == j2:
            groups.append(("shared", count, _pvals(model.pmf(rankings[j1], phi))))
            continue
        row1 = model.pmf(rankings[j1], phi)
        row2 = model.pmf(rankings[j2], phi)
        sides = [_pair_side(r, a, b) for r in rankings]
        mass = {
            True: sum(q for q, s in zip(row2, sides) if s),
            False: sum(q for q, s in zip(row2, sides) if not s),
        }
        joint = []
        for x in range(6):
            if row1[x] and not mass[sides[x]]:
                raise InvariantError(
                    "coupling undefined: the second ballot's noise row has "
                    "no mass on the required (a, b) side"
                )
            for y in range(6):
                if row1[x] and row2[y] and sides[x] == sides[y]:
                    joint.append(row1[x] * row2[y] / mass[sides[x]])
                else:
                    joint.append(Fraction(0))
        groups.append(("coupled", count, _pvals(joint)))
    return groups


def sample_matched_pair_counts(
    model: NoiseModel,
    pair: Tuple[Profile, Profile],
    a: int,
    b: int,
    phi,
    trials: int,
    seed: int,
    stream: int = 0,
    workers: int = 1,
) -> Tuple[np.ndarray, np.ndarray]:
    """Jointly perturbed count vectors of a matched profile pair; every
    sampled pair keeps each voter's (a, b) order aligned."""
    _validate_run(trials, seed, workers)
    groups = _iia_groups(model, pair, a, b, phi)
    c1 = np.empty((trials, 6), dtype=np.int64)
    c2 = np.empty((trials, 6), dtype=np.int64)

    def fill(i: int, lo: int, hi: int) -> None:
        rng = np.random.default_rng([seed, stream, i])
        size = hi - lo
        acc1 = np.zeros((size, 6), dtype=np.int64)
        acc2 = np.zeros((size, 6), dtype=np.int64)
        for kind, count, pvals in groups:
            if kind == "shared":
                draw = rng.multinomial(count, pvals, size=size)
                acc1 += draw
                acc2 += draw
            else:
                draw = rng.multinomial(count, pvals, size=size).reshape(size, 6, 6)
                acc1 += draw.sum(axis=2)
                acc2 += draw.sum(axis=1)
        c1[lo:hi] = acc1
        c2[lo:hi] = acc2

    _run_blocks(fill, trials, workers)
    return c1, c2


# --------------------------------------------------------------------------
# vectorized axiom events
# --------------------------------------------------------------------------

def _first_place_matrix(m: int) -> np.ndarray:
    rankings = enumerate_rankings(m)
    mat = np.zeros((len(rankings), m), dtype=np.int64)
    for j, r in enumerate(rankings):
        mat[j, r[0]] = 1
    return mat


def _condorcet_matrix(counts: np.ndarray, m: int) -> np.ndarray:
    """(trials, m) one-hot rows marking the head-to-head champion."""
    margins = margin_blocks(counts, m)
    positive = margins > 0
    idx = np.arange(m)
    positive[:, idx, idx] = True
    return positive.all(axis=2)


def violation_events(
    rule: Optional[VotingRule], axiom: str, counts: np.ndarray, m: int
) -> np.ndarray:
    """Boolean violation indicator per sampled count vector."""
    if axiom == "no-condorcet-cycle":
        return ~_condorcet_matrix(counts, m).any(axis=1)
    if rule is None:
        raise ArgumentError(f"axiom {axiom!r} needs a rule")
    winners = rule.winners_from_counts(counts, m).astype(bool)
    if axiom == "resolvability":
        return winners.sum(axis=1) > 1
    if axiom == "condorcet":
        champs = _condorcet_matrix(counts, m)
        return champs.any(axis=1) & (winners != champs).any(axis=1)
    if axiom == "majority":
        firsts = counts @ _first_place_matrix(m)
        n = counts.sum(axis=1, keepdims=True)
        majority = 2 * firsts > n
        return majority.any(axis=1) & (winners != majority).any(axis=1)
    raise ConfigurationError(f"no vectorized event for axiom {axiom!r}")


def _singleton_column(winners: np.ndarray, c: int) -> np.ndarray:
    return winners[:, c] & (winners.sum(axis=1) == 1)


def iia_violation_events(
    rule: VotingRule, c1: np.ndarray, c2: np.ndarray, a: int, b: int
) -> np.ndarray:
    w1 = rule.winners_from_counts(c1, 3).astype(bool)
    w2 = rule.winners_from_counts(c2, 3).astype(bool)
    flip_ab = _singleton_column(w1, a) & _singleton_column(w2, b)
    flip_ba = _singleton_column(w1, b) & _singleton_column(w2, a)
    return flip_ab | flip_ba


# --------------------------------------------------------------------------
# group-flip events (exact plurality path + certificate path)
# --------------------------------------------------------------------------

def plurality_unstable_events(counts: np.ndarray, m: int, rho: int) -> np.ndarray:
    """Exact coalition instability for plurality: can rho ballot rewrites
    change the winner set?  Mirrors the scalar first-place-gap analysis."""
    firsts = counts @ _first_place_matrix(m)
    n = counts.sum(axis=1)
    order = np.sort(firsts, axis=1)
    top = order[:, -1]
    tied = top == order[:, -2]
    top_col = top[:, None]
    double_moves = np.minimum(rho, top_col)
    single_moves = np.minimum(
        np.maximum(rho - top_col, 0), n[:, None] - top_col - firsts
    )
    closeable = 2 * double_moves + single_moves
    gap = top_col - firsts
    beats = (closeable >= gap) & (firsts != top_col)
    return np.where(tied, rho >= 1, beats.any(axis=1))


def _integer_plane(plane: Hyperplane) -> Tuple[np.ndarray, int, int]:
    """Clear denominators: coefficients A (ints), target b*L, and max |A|,
    so that distance(h) = |A . counts - bL * n| / (n * max|A|)."""
    dens = [c.denominator for c in plane.coeffs] + [plane.constant.denominator]
    scale = math.lcm(*dens)
    coeffs = np.array([int(c * scale) for c in plane.coeffs], dtype=np.int64)
    target = int(plane.constant * scale)
    return coeffs, target, int(np.abs(coeffs).max())


def certified_stable_events(
    rule: VotingRule, counts: np.ndarray, m: int, rho: int
) -> np.ndarray:
    """True where every tie locus of the rule is further than 2*rho/n from
    the sampled histogram, freezing the winner set against any coalition
    of rho rewrites.  All-False when the rule exposes no tie loci."""
    planes = rule.hyperplanes(m)
    trials = counts.shape[0]
    if not planes:
        return np.zeros(trials, dtype=bool)
    n = counts.sum(axis=1)
    reduced = counts[:, :-1]
    certified = np.ones(trials, dtype=bool)
    for plane in planes:
        coeffs, target, max_abs = _integer_plane(plane)
        values = reduced @ coeffs - target * n
        # distance > 2*rho/n  <=>  |values| > 2 * rho * max|A|
        certified &= np.abs(values) > 2 * rho * max_abs
    return certified


def thick_plane_events(
    rule: VotingRule, counts: np.ndarray, m: int, delta: float
) -> np.ndarray:
    """True where the histogram lies within L1 distance delta of some tie
    locus of the rule (delta = 0 tests exact membership)."""
    planes = rule.hyperplanes(m)
    if not planes:
        raise ConfigurationError(f"rule {rule.name!r} exposes no tie loci")
    if delta < 0:
        raise ArgumentError(f"slab width must be nonnegative, got {delta}")
    n = counts.sum(axis=1)
    reduced = counts[:, :-1]
    hit = np.zeros(counts.shape[0], dtype=bool)
    for plane in planes:
        coeffs, target, max_abs = _integer_plane(plane)
        values = np.abs(reduced @ coeffs - target * n)
        hit |= values <= delta * n * max_abs
    return hit


# --------------------------------------------------------------------------
# estimators
# --------------------------------------------------------------------------

ESTIMATOR_AXIOMS = (
    "resolvability", "condorcet", "majority", "no-condorcet-cycle",
    "iia", "group-stability",
)


def estimate_violation(
    rule: Optional[VotingRule],
    axiom: str,
    base: Union[Profile, StrictCounterexample],
    model: NoiseModel,
    phi,
    trials: int,
    seed: int,
    z: int = 1,
    rho: Optional[int] = None,
    stream: int = 0,
    workers: int = 1,
) -> Estimate:
    """Probability that a noisy copy of ``replicate(base, z)`` violates the
    axiom under the rule.

    ``iia`` needs a matched pair: pass a library counterexample carrying
    one.  ``group-stability`` needs ``rho``.  ``consistency`` has no
    sampling template here and is rejected.
    """
    if axiom == "consistency":
        raise ConfigurationError(
            "consistency needs an explicit electorate split; no sampling "
            "template is available"
        )
    if axiom not in ESTIMATOR_AXIOMS:
        known = ", ".join(ESTIMATOR_AXIOMS)
        raise ConfigurationError(f"unknown axiom {axiom!r}; available: {known}")
    if not isinstance(z, int) or z < 1:
        raise ArgumentError(f"replication factor must be a positive integer, got {z!r}")

    if axiom == "iia":
        if not isinstance(base, StrictCounterexample) or base.iia_pair is None:
            raise ConfigurationError(
                "iia estimation needs a matched profile pair; use a library "
                "counterexample with an (a, b) pair"
            )
        a, b = base.iia_pair
        pair = (replicate(base.profiles[0], z), replicate(base.profiles[1], z))
        c1, c2 = sample_matched_pair_counts(
            model, pair, a, b, phi, trials, seed, stream=stream, workers=workers
        )
        violated = iia_violation_events(rule, c1, c2, a, b)
        return _estimate(int(violated.sum()), trials, seed)

    profile = base.profile if isinstance(base, StrictCounterexample) else base
    profile = replicate(profile, z)
    counts = sample_profile_counts(
        model, profile, phi, trials, seed, stream=stream, workers=workers
    )
    if axiom == "group-stability":
        if rho is None or not isinstance(rho, int) or rho < 0:
            raise ArgumentError(
                f"group-stability needs a nonnegative integer rho, got {rho!r}"
            )
        violated = _group_flip_events(rule, counts, profile.m, rho)
    else:
        violated = violation_events(rule, axiom, counts, profile.m)
    return _estimate(int(violated.sum()), trials, seed)


def _group_flip_events(
    rule: VotingRule, counts: np.ndarray, m: int, rho: int
) -> np.ndarray:
    """Flip events for one sampled batch.  Plurality is decided exactly and
    cross-checked against the certificate; other rules report failure of
    the stability certificate (an upper bound on flips)."""
    certified = certified_stable_events(rule, counts, m, rho)
    if rule.name == "plurality" and m == 3:
        unstable = plurality_unstable_events(counts, m, rho)
        if bool((certified & unstable).any()):
            raise InvariantError(
                "stability certificate contradicts the exact gap analysis"
            )
        return unstable
    return ~certified


# --------------------------------------------------------------------------
# sweeps
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class SweepRow:
    n: int
    z: int
    phi: float
    estimate: Estimate


@dataclass(frozen=True)
class SweepResult:
    rule: str
    axiom: str
    model: str
    rows: Tuple[SweepRow, ...]


def convergence_sweep(
    rule: Optional[VotingRule],
    axiom: str,
    base: Union[Profile, StrictCounterexample],
    model: NoiseModel,
    phi_list: Sequence[float],
    z_list: Sequence[int],
    trials: int,
    seed: int,
    rho_schedule: Optional[RhoSchedule] = None,
    workers: int = 1,
) -> SweepResult:
    """Violation estimates over a (phi, z) grid of replicated electorates.

    Grid points map to independent sample streams; a one-point sweep
    reproduces ``estimate_violation`` exactly.
    """
    if not phi_list or not z_list:
        raise ArgumentError("sweep needs at least one phi and one z")
    if len(set(phi_list)) != len(phi_list) or len(set(z_list)) != len(z_list):
        raise ArgumentError("sweep grid entries must be distinct")
    base_n = (
        base.profile.n if isinstance(base, StrictCounterexample) else base.n
    )
    rows: List[SweepRow] = []
    stream = 0
    for phi in phi_list:
        for z in z_list:
            n = base_n * z
            rho = rho_schedule.value(n) if rho_schedule is not None else None
            est = estimate_violation(
                rule, axiom, base, model, phi, trials, seed,
                z=z, rho=rho, stream=stream, workers=workers,
            )
            rows.append(SweepRow(n=n, z=z, phi=float(phi), estimate=est))
            stream += 1
    return SweepResult(
        rule=rule.name if rule is not None else "none",
        axiom=axiom,
        model=model.name,
        rows=tuple(rows),
    )


@dataclass(frozen=True)
class DiagnosticRow:
    n: int
    parameter: float
    estimate: Estimate


def thick_hyperplane_probability(
    rule: VotingRule,
    base: BaseSource,
    model: NoiseModel,
    phi,
    delta: Union[DeltaSchedule, float, int],
    n_list: Sequence[int],
    trials: int,
    seed: int,
    workers: int = 1,
) -> Tuple[DiagnosticRow, ...]:
    """Per electorate size, the probability that the perturbed histogram
    falls within delta(n) of some tie locus of the rule."""
    if not n_list:
        raise ArgumentError("need at least one electorate size")
    rows = []
    for stream, n in enumerate(n_list):
        profile = _resolve_base(base, n)
        width = delta.value(n) if isinstance(delta, DeltaSchedule) else float(delta)
        counts = sample_profile_counts(
            model, profile, phi, trials, seed, stream=stream, workers=workers
        )
        hit = thick_plane_events(rule, counts, profile.m, width)
        rows.append(
            DiagnosticRow(n=n, parameter=width, estimate=_estimate(int(hit.sum()), trials, seed))
        )
    return tuple(rows)


def group_flip_probability(
    rule: VotingRule,
    base: BaseSource,
    model: NoiseModel,
    phi,
    rho: RhoSchedule,
    n_list: Sequence[int],
    trials: int,
    seed: int,
    workers: int = 1,
) -> Tuple[DiagnosticRow, ...]:
    """Per electorate size, the probability that a coalition of rho(n)
    voters can change the perturbed winner set (exact for plurality,
    certificate-bounded otherwise)."""
    if not n_list:
        raise ArgumentError("need at least one electorate size")
    rows = []
    for stream, n in enumerate(n_list):
        profile = _resolve_base(base, n)
        rho_n = rho.value(n)
        counts = sample_profile_counts(
            model, profile, phi, trials, seed, stream=stream, workers=workers
        )
        flips = _group_flip_events(rule, counts, profile.m, rho_n)
        rows.append(
            DiagnosticRow(
                n=n, parameter=float(rho_n),
                estimate=_estimate(int(flips.sum()), trials, seed),
            )
        )
    return tuple(rows)


# --------------------------------------------------------------------------
# smoothing refinement grids
# --------------------------------------------------------------------------

def phi_refinement_grid(phi: float, direction: str) -> Tuple[float, ...]:
    """Noise levels bracketing a smoothed quantity: "up" spans [phi, 1]
    (suprema of satisfaction), "down" spans (0, phi] (infima of
    violation)."""
    if not 0 <= phi <= 1:
        raise ArgumentError(f"phi must lie in [0, 1], got {phi}")
    if direction == "up":
        grid = (phi, (1.0 + phi) / 2.0, 1.0)
    elif direction == "down":
        if phi == 0:
            raise ArgumentError("no positive noise level below phi=0")
        grid = (phi / 4.0, phi / 2.0, phi)
    else:
        raise ArgumentError(f"direction must be 'up' or 'down', got {direction!r}")
    return tuple(dict.fromkeys(grid))


# --------------------------------------------------------------------------
# exact expected margins on the 300-voter benchmark
# --------------------------------------------------------------------------

BENCHMARK_PROFILE = Profile.from_counts(3, (36, 80, 115, 0, 0, 69))


@dataclass(frozen=True)
class MarginRow:
    phi: float
    margin_b_over_a: Fraction
    margin_b_over_c: Fraction
    plurality_gap_a_over_b: Fraction
    matches_closed_form: bool


def _pair_margin(q: Sequence[Fraction], x: int, y: int) -> Fraction:
    rankings = enumerate_rankings(3)
    total = Fraction(0)
    for share, r in zip(q, rankings):
        total += share if r.index(x) < r.index(y) else -share
    return total


def verify_appendixD_margins(
    phi_grid: Sequence[float], model: Optional[NoiseModel] = None
) -> Tuple[MarginRow, ...]:
    """Exact expected pairwise and first-place margins of the perturbed
    300-voter benchmark, checked against their closed forms.

    With Z(phi) = 1 + 2*phi + 2*phi^2 + phi^3, the three margins times Z
    equal (1-phi)(17-23*phi+17*phi^2)/75, (1-phi)(1+116*phi+phi^2)/150,
    and (1-phi)(1+phi)(1+11*phi)/300; the identities hold exactly at every
    rational phi, so the comparison is equality of rationals.
    """
    if model is None:
        model = MallowsModel()
    if model.name != "mallows":
        raise ArgumentError(
            "closed-form margins are specific to the mallows model"
        )
    rows = []
    for phi in phi_grid:
        f = _phi_fraction(phi)
        q = expected_pmf_exact(model, BENCHMARK_PROFILE, phi)
        m_ba = _pair_margin(q, 1, 0)
        m_bc = _pair_margin(q, 1, 2)
        gap_ab = q[0] + q[1] - q[2] - q[3]  # first-place shares: a minus b
        zeta = 1 + 2 * f + 2 * f * f + f ** 3
        ok = (
            m_ba * zeta == (1 - f) * (17 - 23 * f + 17 * f * f) / 75
            and m_bc * zeta == (1 - f) * (1 + 116 * f + f * f) / 150
            and gap_ab * zeta == (1 - f) * (1 + f) * (1 + 11 * f) / 300
        )
        rows.append(
            MarginRow(
                phi=float(phi),
                margin_b_over_a=m_ba,
                margin_b_over_c=m_bc,
                plurality_gap_a_over_b=gap_ab,
                matches_closed_form=ok,
            )
        )
    return tuple(rows)


# --------------------------------------------------------------------------
# CSV emission
# --------------------------------------------------------------------------

def sweep_csv_rows(
    experiment: str, result: SweepResult, seed: int
) -> List[Dict[str, object]]:
    return [
        {
            "experiment": experiment,
            "rule": result.rule,
            "axiom": result.axiom,
            "model": result.model,
            "phi": row.phi,
            "n": row.n,
            "z": row.z,
            "trials": row.estimate.trials,
            "p_hat": row.estimate.p_hat,
            "ci_low": row.estimate.ci_low,
            "ci_high": row.estimate.ci_high,
            "seed": seed,
            "ms": 0,
        }
        for row in result.rows
    ]


def diagnostic_csv_rows(
    experiment: str,
    rule: str,
    axiom: str,
    model: str,
    phi: float,
    rows: Sequence[DiagnosticRow],
    seed: int,
) -> List[Dict[str, object]]:
    return [
        {
            "experiment": experiment,
            "rule": rule,
            "axiom": axiom,
            "model": model,
            "phi": float(phi),
            "n": row.n,
            "z": 1,
            "trials": row.estimate.trials,
            "p_hat": row.estimate.p_hat,
            "ci_low": row.estimate.ci_low,
            "ci_high": row.estimate.ci_high,
            "seed": seed,
            "ms": 0,
        }
        for row in rows
    ]


def write_csv(path, rows: Iterable[Mapping[str, object]]) -> None:
    """Write estimate rows in the fixed column order.  The ms column is
    pinned to 0 so identical configurations produce identical bytes; wall
    times belong in the run manifest."""
    rows = list(rows)
    for row in rows:
        if set(row) != set(CSV_COLUMNS):
            missing = sorted(set(CSV_COLUMNS) - set(row))
            extra = sorted(set(row) - set(CSV_COLUMNS))
            raise ArgumentError(
                f"row keys mismatch: missing {missing}, unexpected {extra}"
            )
    with open(path, "w", newline="") as handle:
        writer = csv.DictWriter(handle, fieldnames=CSV_COLUMNS)
        writer.writeheader()
        for row in rows:
            writer.writerow({k: _csv_cell(row[k]) for k in CSV_COLUMNS})


def _csv_cell(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)
