"""Axiom checks over voting rules.

Absolute axioms (resolvability, condorcet, majority, no-condorcet-cycle)
are pure predicates of (rule, profile).  Relative axioms (consistency, iia,
and the coalition axioms) are checked against explicit witnesses; a witness
that fails its own well-formedness invariants raises WitnessInvalidError,
which is distinct from "no violation".

The module also ships:

* ``check_group_stability`` — can a coalition of at most ``rho`` voters
  change the winner set by rewriting ballots?  Decided exactly for
  plurality via first-place gaps, soundly via the rule's hyperplane
  distance certificate, or exhaustively at small sizes; otherwise reports
  "undecided".
* ``counterexample_library`` — small profiles that violate specific axioms
  so robustly that every same-size profile within an L1 ball of certified
  radius also violates them; ``certify_counterexample`` samples that ball.
* ``brute_force_audit`` — exhaustive enumeration of all small elections,
  used as an independent oracle for the predicates.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational
from typing import Callable, Iterator, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from .core import (
    ArgumentError,
    ConfigurationError,
    InvariantError,
    Profile,
    Ranking,
    WitnessInvalidError,
    enumerate_rankings,
    histogram_of,
    validate_ranking,
)
from .rules import (
    Hyperplane,
    PairwiseMatrix,
    VotingRule,
    l1_distance_to_hyperplane,
    pairwise_margins,
    plurality_rule,
    psr_rule,
    CopelandRule,
)

ABSOLUTE_AXIOMS = ("resolvability", "condorcet", "majority", "no-condorcet-cycle")
RELATIVE_AXIOMS = (
    "consistency", "iia", "group-sp", "group-participation", "group-monotonicity",
)


# --------------------------------------------------------------------------
# absolute axioms
# --------------------------------------------------------------------------

def condorcet_winner(profile: Profile) -> Optional[int]:
    """The candidate beating every other head-to-head, if one exists."""
    margins = pairwise_margins(profile)
    for c in range(profile.m):
        if all(margins.margin(c, o) > 0 for o in range(profile.m) if o != c):
            return c
    return None


def majority_winner(profile: Profile) -> Optional[int]:
    """The candidate ranked first by strictly more than half the voters."""
    firsts = [0] * profile.m
    for ranking in profile.rankings:
        firsts[ranking[0]] += 1
    for c in range(profile.m):
        if 2 * firsts[c] > profile.n:
            return c
    return None


def check_absolute(axiom: str, rule: Optional[VotingRule], profile: Profile) -> bool:
    """True iff the profile satisfies the axiom under the rule.

    ``no-condorcet-cycle`` is rule-independent (``rule`` may be None);
    ``condorcet`` and ``majority`` hold vacuously when no such winner
    exists.
    """
    if axiom == "no-condorcet-cycle":
        return condorcet_winner(profile) is not None
    if rule is None:
        raise ArgumentError(f"axiom {axiom!r} needs a rule")
    if axiom == "resolvability":
        return len(rule.evaluate(profile)) == 1
    if axiom == "condorcet":
        cw = condorcet_winner(profile)
        return cw is None or rule.evaluate(profile) == {cw}
    if axiom == "majority":
        mw = majority_winner(profile)
        return mw is None or rule.evaluate(profile) == {mw}
    known = ", ".join(ABSOLUTE_AXIOMS)
    raise ConfigurationError(f"unknown absolute axiom {axiom!r}; expected one of {known}")


# --------------------------------------------------------------------------
# witnesses for relative axioms
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class ConsistencyWitness:
    """A split of the checked profile into sub-electorates."""

    parts: Tuple[Profile, ...]


@dataclass(frozen=True)
class IIAWitness:
    """A second profile agreeing with the checked one on every voter's
    relative order of candidates ``a`` and ``b``."""

    profile2: Profile
    a: int
    b: int


@dataclass(frozen=True)
class GroupDeviationWitness:
    """A coalition (voter indices into the checked profile) reporting
    ``replacements`` instead of their true ballots; at most ``rho`` strong."""

    coalition: Tuple[int, ...]
    replacements: Tuple[Ranking, ...]
    rho: int


@dataclass(frozen=True)
class ParticipationWitness:
    """A coalition that abstains (is removed from the profile)."""

    coalition: Tuple[int, ...]
    rho: int


@dataclass(frozen=True)
class MonotonicityWitness:
    """Ballot rewrites that never push ``candidate`` to a worse position."""

    candidate: int
    changes: Tuple[Tuple[int, Ranking], ...]
    rho: int


def _favorite(ranking: Ranking, winners) -> int:
    return min(winners, key=ranking.index)


def _coalition_improves(true_ballots: Sequence[Ranking], old, new) -> bool:
    """All coalition members weakly prefer the new winner set (by their
    favorite member of each set) and at least one strictly prefers it."""
    weak = all(
        r.index(_favorite(r, new)) <= r.index(_favorite(r, old))
        for r in true_ballots
    )
    strict = any(
        r.index(_favorite(r, new)) < r.index(_favorite(r, old))
        for r in true_ballots
    )
    return weak and strict


def _validate_coalition(indices: Sequence[int], n: int, rho: int, axiom: str) -> Tuple[int, ...]:
    coalition = tuple(indices)
    if rho < 0:
        raise WitnessInvalidError(f"{axiom}: rho must be nonnegative, got {rho}")
    if not coalition:
        raise WitnessInvalidError(f"{axiom}: coalition is empty")
    if len(set(coalition)) != len(coalition):
        raise WitnessInvalidError(f"{axiom}: coalition has repeated voters")
    if any(i < 0 or i >= n for i in coalition):
        raise WitnessInvalidError(f"{axiom}: voter index out of range")
    if len(coalition) > rho:
        raise WitnessInvalidError(
            f"{axiom}: coalition of {len(coalition)} exceeds rho={rho}"
        )
    return coalition


def check_witness(axiom: str, rule: VotingRule, profile: Profile, witness) -> bool:
    """True iff the witness certifies a violation of the axiom by the rule
    on this profile."""
    if axiom == "consistency":
        return _check_consistency(rule, profile, witness)
    if axiom == "iia":
        return _check_iia(rule, profile, witness)
    if axiom == "group-sp":
        return _check_group_sp(rule, profile, witness)
    if axiom == "group-participation":
        return _check_participation(rule, profile, witness)
    if axiom == "group-monotonicity":
        return _check_monotonicity(rule, profile, witness)
    known = ", ".join(RELATIVE_AXIOMS)
    raise ConfigurationError(f"unknown relative axiom {axiom!r}; expected one of {known}")


def _check_consistency(rule: VotingRule, profile: Profile, witness) -> bool:
    if not isinstance(witness, ConsistencyWitness):
        raise WitnessInvalidError("consistency needs a ConsistencyWitness")
    parts = witness.parts
    if len(parts) < 2:
        raise WitnessInvalidError("consistency: need at least two sub-electorates")
    if any(p.m != profile.m for p in parts):
        raise WitnessInvalidError("consistency: sub-profile candidate count differs")
    combined = [0] * len(profile.counts())
    for p in parts:
        for j, c in enumerate(p.counts()):
            combined[j] += c
    if tuple(combined) != profile.counts():
        raise WitnessInvalidError(
            "consistency: sub-profiles do not add up to the checked profile"
        )
    winner_sets = [rule.evaluate(p) for p in parts]
    if any(w != winner_sets[0] for w in winner_sets):
        return False
    return rule.evaluate(profile) != winner_sets[0]


def _check_iia(rule: VotingRule, profile: Profile, witness) -> bool:
    if not isinstance(witness, IIAWitness):
        raise WitnessInvalidError("iia needs an IIAWitness")
    other, a, b = witness.profile2, witness.a, witness.b
    m = profile.m
    if a == b or not (0 <= a < m and 0 <= b < m):
        raise WitnessInvalidError(f"iia: invalid candidate pair ({a}, {b})")
    if other.m != m or other.n != profile.n:
        raise WitnessInvalidError("iia: profiles must have the same shape")
    for i, (r1, r2) in enumerate(zip(profile.rankings, other.rankings)):
        if (r1.index(a) < r1.index(b)) != (r2.index(a) < r2.index(b)):
            raise WitnessInvalidError(
                f"iia: voter {i} orders ({a}, {b}) differently in the two profiles"
            )
    w1 = rule.evaluate(profile)
    w2 = rule.evaluate(other)
    return (w1 == {a} and w2 == {b}) or (w1 == {b} and w2 == {a})


def _check_group_sp(rule: VotingRule, profile: Profile, witness) -> bool:
    if not isinstance(witness, GroupDeviationWitness):
        raise WitnessInvalidError("group-sp needs a GroupDeviationWitness")
    coalition = _validate_coalition(witness.coalition, profile.n, witness.rho, "group-sp")
    if len(witness.replacements) != len(coalition):
        raise WitnessInvalidError("group-sp: one replacement ballot per coalition member")
    try:
        replacements = tuple(
            validate_ranking(r, profile.m) for r in witness.replacements
        )
    except InvariantError as exc:
        raise WitnessInvalidError(f"group-sp: {exc}") from None
    ballots = list(profile.rankings)
    for i, new_ballot in zip(coalition, replacements):
        ballots[i] = new_ballot
    old = rule.evaluate(profile)
    new = rule.evaluate(Profile(profile.m, tuple(ballots)))
    true_ballots = [profile.rankings[i] for i in coalition]
    return _coalition_improves(true_ballots, old, new)


def _check_participation(rule: VotingRule, profile: Profile, witness) -> bool:
    if not isinstance(witness, ParticipationWitness):
        raise WitnessInvalidError("group-participation needs a ParticipationWitness")
    coalition = _validate_coalition(
        witness.coalition, profile.n, witness.rho, "group-participation"
    )
    if len(coalition) >= profile.n:
        raise WitnessInvalidError("group-participation: someone must stay")
    staying = tuple(
        r for i, r in enumerate(profile.rankings) if i not in set(coalition)
    )
    old = rule.evaluate(profile)
    new = rule.evaluate(Profile(profile.m, staying))
    true_ballots = [profile.rankings[i] for i in coalition]
    return _coalition_improves(true_ballots, old, new)


def _check_monotonicity(rule: VotingRule, profile: Profile, witness) -> bool:
    if not isinstance(witness, MonotonicityWitness):
        raise WitnessInvalidError("group-monotonicity needs a MonotonicityWitness")
    candidate = witness.candidate
    if not 0 <= candidate < profile.m:
        raise WitnessInvalidError(f"group-monotonicity: no candidate {candidate}")
    indices = tuple(i for i, _ in witness.changes)
    _validate_coalition(indices, profile.n, witness.rho, "group-monotonicity")
    ballots = list(profile.rankings)
    for i, new_ballot in witness.changes:
        try:
            new_ballot = validate_ranking(new_ballot, profile.m)
        except InvariantError as exc:
            raise WitnessInvalidError(f"group-monotonicity: {exc}") from None
        if new_ballot.index(candidate) > ballots[i].index(candidate):
            raise WitnessInvalidError(
                f"group-monotonicity: voter {i} demotes candidate {candidate}"
            )
        ballots[i] = new_ballot
    old = rule.evaluate(profile)
    if candidate not in old:
        return False
    new = rule.evaluate(Profile(profile.m, tuple(ballots)))
    return candidate not in new


# --------------------------------------------------------------------------
# group stability
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class StabilityResult:
    """Outcome of a coalition-stability check.

    ``status`` is "stable", "unstable", or "undecided".  ``margin`` carries
    the certificate slack (hyperplane distance minus 2*rho/n, or the
    unclosable plurality gap); ``deviation`` is a witness profile whose
    winner set differs, when one was found.
    """

    status: str
    method: str
    margin: Optional[Fraction] = None
    deviation: Optional[Profile] = None


BRUTE_FORCE_N = 8
BRUTE_FORCE_RHO = 2


def check_group_stability(
    rule: VotingRule, profile: Profile, rho: int, method: str = "auto"
) -> StabilityResult:
    """Can ballots of at most ``rho`` voters be rewritten to change the
    winner set?

    Decision paths, tried in order under ``method="auto"``: an exact
    first-place-gap argument (plurality only, always decides), the
    hyperplane-distance certificate (sound for "stable" only), and
    exhaustive search over deviations (small instances).  ``method`` may
    pin a single path; an inapplicable path yields "undecided".
    """
    if not isinstance(rho, int) or rho < 0:
        raise ArgumentError(f"rho must be a nonnegative integer, got {rho!r}")
    if method not in ("auto", "exact-gap", "certificate", "brute-force"):
        raise ArgumentError(f"unknown stability method {method!r}")
    if rho == 0:
        return StabilityResult("stable", "trivial")
    if method in ("auto", "exact-gap") and rule.name == "plurality":
        return _plurality_gap_stability(rule, profile, rho)
    if method in ("auto", "certificate"):
        result = _certificate_stability(rule, profile, rho)
        if result.status == "stable" or method == "certificate":
            return result
    if method in ("auto", "brute-force"):
        if (
            profile.n <= BRUTE_FORCE_N
            and rho <= BRUTE_FORCE_RHO
            and profile.m == 3
        ):
            return _brute_force_stability(rule, profile, rho)
    return StabilityResult("undecided", "none")


def _plurality_gap_stability(rule, profile: Profile, rho: int) -> StabilityResult:
    m, n = profile.m, profile.n
    firsts = [0] * m
    for r in profile.rankings:
        firsts[r[0]] += 1
    winners = rule.evaluate(profile)
    if len(winners) > 1:
        # one voter not already behind y breaks the tie in y's favor
        y = min(winners)
        deviation = _plurality_deviation(profile, None, y, 1)
        return StabilityResult(
            "unstable", "exact-gap", margin=Fraction(0), deviation=deviation
        )
    top = next(iter(winners))
    slack: Optional[int] = None
    for y in range(m):
        if y == top:
            continue
        gap = firsts[top] - firsts[y]
        double_moves = min(rho, firsts[top])
        single_moves = min(max(rho - firsts[top], 0), n - firsts[top] - firsts[y])
        closeable = 2 * double_moves + single_moves
        if closeable >= gap:
            deviation = _plurality_deviation(profile, top, y, rho)
            return StabilityResult(
                "unstable", "exact-gap",
                margin=Fraction(gap - closeable), deviation=deviation,
            )
        slack = gap - closeable if slack is None else min(slack, gap - closeable)
    return StabilityResult("stable", "exact-gap", margin=Fraction(slack))


def _plurality_deviation(
    profile: Profile, top: Optional[int], target: int, rho: int
) -> Profile:
    """Build a deviation moving up to ``rho`` ballots toward ``target``
    (preferring ballots currently topped by ``top``) and verify it flips."""
    ballots = list(profile.rankings)
    order = sorted(
        range(profile.n),
        key=lambda i: (ballots[i][0] != top, ballots[i][0] == target),
    )
    moved = 0
    for i in order:
        if moved == rho:
            break
        if ballots[i][0] == target:
            continue
        ballots[i] = (target,) + tuple(c for c in ballots[i] if c != target)
        moved += 1
        candidate = Profile(profile.m, tuple(ballots))
        if plurality_rule().evaluate(candidate) != plurality_rule().evaluate(profile):
            return candidate
    candidate = Profile(profile.m, tuple(ballots))
    if plurality_rule().evaluate(candidate) == plurality_rule().evaluate(profile):
        raise InvariantError("gap analysis promised a flip but none materialized")
    return candidate


def _certificate_stability(rule: VotingRule, profile: Profile, rho: int) -> StabilityResult:
    planes = rule.hyperplanes(profile.m)
    if not planes:
        return StabilityResult("undecided", "certificate")
    h = histogram_of(profile)
    distance = min(l1_distance_to_hyperplane(h, plane) for plane in planes)
    threshold = Fraction(2 * rho, profile.n)
    if distance > threshold:
        # a rho-coalition moves the histogram by < 2*rho/n in L1, so the
        # profile cannot cross any tie locus and the winner set is frozen
        return StabilityResult(
            "stable", "certificate", margin=distance - threshold
        )
    return StabilityResult(
        "undecided", "certificate", margin=distance - threshold
    )


def _bounded_compositions(limits: Sequence[int], total: int) -> Iterator[Tuple[int, ...]]:
    """All vectors 0 <= v <= limits with sum(v) == total."""
    if not limits:
        if total == 0:
            yield ()
        return
    head = limits[0]
    for take in range(min(head, total) + 1):
        for rest in _bounded_compositions(limits[1:], total - take):
            yield (take,) + rest


def _brute_force_stability(rule: VotingRule, profile: Profile, rho: int) -> StabilityResult:
    counts = profile.counts()
    base_winners = rule.evaluate(profile)
    fact = len(counts)
    for k in range(1, rho + 1):
        for removed in _bounded_compositions(counts, k):
            for added in itertools.combinations_with_replacement(range(fact), k):
                new_counts = list(counts)
                for j, r in enumerate(removed):
                    new_counts[j] -= r
                for j in added:
                    new_counts[j] += 1
                deviated = Profile.from_counts(profile.m, tuple(new_counts))
                if rule.evaluate(deviated) != base_winners:
                    return StabilityResult(
                        "unstable", "brute-force", deviation=deviated
                    )
    return StabilityResult("stable", "brute-force")


# --------------------------------------------------------------------------
# counterexample library
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class StrictCounterexample:
    """A profile (or matched pair) violating an axiom so robustly that
    every same-size profile within L1 distance ``radius`` of its histogram
    still violates it."""

    name: str
    rule: Optional[VotingRule]
    axiom: str
    profiles: Tuple[Profile, ...]
    radius: Fraction
    iia_pair: Optional[Tuple[int, int]] = None

    @property
    def profile(self) -> Profile:
        return self.profiles[0]


def _exact_param(value, name: str) -> Fraction:
    """Exact rational from a library parameter.

    Floats are read as their decimal literal (0.3 -> 3/10), since the
    binary expansion would force astronomically large integer profiles.
    """
    try:
        if isinstance(value, float):
            return Fraction(str(value))
        if isinstance(value, (str, Rational)):
            return Fraction(value)
    except (ValueError, ZeroDivisionError):
        pass
    raise ArgumentError(f"parameter {name!r} must be a rational number, got {value!r}")


def _counts_profile(fractions: Mapping[int, Fraction]) -> Profile:
    """Smallest integer profile realizing exact ranking shares."""
    n = math.lcm(*[f.denominator for f in fractions.values()])
    counts = [0] * 6
    for index, share in fractions.items():
        counts[index] = int(share * n)
    return Profile.from_counts(3, tuple(counts))


ABC, ACB, BAC, BCA, CAB, CBA = range(6)


def _psr_condorcet_example(alpha: Fraction, axiom: str) -> StrictCounterexample:
    """Two-bloc profile where b holds a majority (hence is the Condorcet
    winner) but the scoring rule with weights (1, alpha, 0) elects a.

    The per-voter score gap of a over b is alpha/4; moving epsilon of
    histogram mass changes any score difference by at most epsilon, so the
    violation persists inside an L1 ball of radius alpha/4 (the majority
    and pairwise margins have strictly larger slack).
    """
    if not 0 < alpha <= 1:
        raise ArgumentError(
            f"psr-condorcet needs alpha in (0, 1], got {alpha}"
        )
    if axiom not in ("condorcet", "majority"):
        raise ArgumentError(
            f"psr-condorcet certifies 'condorcet' or 'majority', not {axiom!r}"
        )
    x = alpha / (4 * (2 - alpha))
    profile = _counts_profile({
        ACB: Fraction(1, 2) - x,
        BAC: Fraction(1, 2) + x,
    })
    rule = psr_rule([Fraction(1), alpha, Fraction(0)])
    return StrictCounterexample(
        name="psr-condorcet", rule=rule, axiom=axiom,
        profiles=(profile,), radius=alpha / 4,
    )


def _psr_iia_example(alpha: Fraction) -> StrictCounterexample:
    """Matched profile pair for the scoring rule with weights (1, alpha, 0):
    every voter keeps the same relative order of a and b, yet the winner
    flips from {a} to {b}.

    Score gaps per voter: a beats b by alpha/4 in the first profile and
    trails by alpha/4 in the second; a beats c by (1 - alpha)/2.  The
    smaller slack is the certified radius.  At alpha = 1 the a-c gap
    closes and at alpha = 0 the a-b gaps close, so both endpoints are
    rejected.
    """
    if not 0 < alpha < 1:
        raise ArgumentError(f"psr-iia needs alpha in (0, 1), got {alpha}")
    rankings = enumerate_rankings(3)
    first = (rankings[ACB], rankings[ACB], rankings[BCA], rankings[BAC])
    second = (rankings[ABC], rankings[ABC], rankings[BCA], rankings[BAC])
    rule = psr_rule([Fraction(1), alpha, Fraction(0)])
    radius = min(alpha / 4, (1 - alpha) / 2)
    return StrictCounterexample(
        name="psr-iia", rule=rule, axiom="iia",
        profiles=(Profile(3, first), Profile(3, second)),
        radius=radius, iia_pair=(0, 1),
    )


def _plurality_condorcet_example() -> StrictCounterexample:
    """4 abc / 3 bca / 2 cba: plurality elects a while b beats both rivals
    head-to-head.  Both the plurality gap and b's weakest pairwise margin
    are one voter in nine, giving radius 1/9."""
    profile = Profile.from_counts(3, (4, 0, 0, 3, 0, 2))
    return StrictCounterexample(
        name="plurality-condorcet", rule=plurality_rule(), axiom="condorcet",
        profiles=(profile,), radius=Fraction(1, 9),
    )


def _benchmark_300_example() -> StrictCounterexample:
    """The 300-voter benchmark (36 abc, 80 acb, 115 bac, 69 cba): b is the
    Condorcet winner but plurality elects a by a single first-place vote.
    The plurality gap (1 vote of 300, coefficient span 2) is the binding
    slack, giving radius 1/300."""
    profile = Profile.from_counts(3, (36, 80, 115, 0, 0, 69))
    return StrictCounterexample(
        name="appendixD", rule=plurality_rule(), axiom="condorcet",
        profiles=(profile,), radius=Fraction(1, 300),
    )


def _condorcet_cycle_example() -> StrictCounterexample:
    """abc + bca + cab: every candidate loses one pairwise contest, so no
    Condorcet winner exists.  Creating one requires reversing a pairwise
    share of 1/3 vs 2/3, i.e. moving L1 mass 1/3."""
    profile = Profile.from_counts(3, (1, 0, 0, 1, 1, 0))
    return StrictCounterexample(
        name="condorcet-cycle", rule=None, axiom="no-condorcet-cycle",
        profiles=(profile,), radius=Fraction(1, 3),
    )


def _copeland_resolvability_example() -> StrictCounterexample:
    """The same three-ranking cycle: all pairwise records tie under
    Copeland scoring, so the winner set is everyone; the margins keep
    their signs inside the same radius-1/3 ball."""
    profile = Profile.from_counts(3, (1, 0, 0, 1, 1, 0))
    return StrictCounterexample(
        name="copeland-resolvability", rule=CopelandRule(), axiom="resolvability",
        profiles=(profile,), radius=Fraction(1, 3),
    )


LIBRARY_NAMES = (
    "psr-condorcet", "psr-iia", "plurality-condorcet",
    "appendixD", "condorcet-cycle", "copeland-resolvability",
)


def counterexample_library(
    name: str, params: Optional[Mapping] = None
) -> StrictCounterexample:
    """Construct a library counterexample by name.

    ``psr-condorcet`` takes ``alpha`` in (0, 1] (the middle weight of the
    normalized scoring vector) and optionally ``axiom`` ("condorcet" or
    "majority"); ``psr-iia`` takes ``alpha`` in (0, 1).
    """
    if name not in LIBRARY_NAMES:
        known = ", ".join(LIBRARY_NAMES)
        raise ConfigurationError(f"unknown counterexample {name!r}; available: {known}")
    params = dict(params or {})
    if name == "psr-condorcet":
        alpha = _exact_param(params.pop("alpha", None), "alpha")
        axiom = params.pop("axiom", "condorcet")
    elif name == "psr-iia":
        alpha = _exact_param(params.pop("alpha", None), "alpha")
    if params:
        raise ArgumentError(
            f"unknown parameters for {name!r}: {sorted(params)}"
        )
    if name == "psr-condorcet":
        return _psr_condorcet_example(alpha, axiom)
    if name == "psr-iia":
        return _psr_iia_example(alpha)
    if name == "plurality-condorcet":
        return _plurality_condorcet_example()
    if name == "appendixD":
        return _benchmark_300_example()
    if name == "condorcet-cycle":
        return _condorcet_cycle_example()
    return _copeland_resolvability_example()


def _is_violation(example: StrictCounterexample, profiles: Tuple[Profile, ...]) -> bool:
    if example.axiom == "iia":
        a, b = example.iia_pair
        witness = IIAWitness(profile2=profiles[1], a=a, b=b)
        return check_witness("iia", example.rule, profiles[0], witness)
    return not check_absolute(example.axiom, example.rule, profiles[0])


def certify_counterexample(
    example: StrictCounterexample,
    z: Optional[int] = None,
    samples: int = 1000,
    seed: int = 0,
) -> int:
    """Sample ballot rewrites inside the certified L1 ball and require that
    every one still violates the axiom.

    Rewrites touch k voters of the z-fold replicated profile(s) with
    2k/(z*n) < radius, so the histogram stays strictly inside the ball.
    Matched pairs receive mirrored rewrites (the moved voter gets the same
    new ballot in both profiles), preserving the pair's alignment.
    Returns the number of verified samples; raises InvariantError on any
    survivor of the ball that fails to violate.
    """
    n = example.profile.n
    if z is None:
        z = int(2 / (example.radius * n)) + 1
    size = z * n
    k_max = math.ceil(example.radius * size / 2) - 1
    if k_max < 1:
        raise ArgumentError(
            f"replication z={z} leaves no room for a single-ballot rewrite "
            f"inside radius {example.radius}"
        )
    rankings = enumerate_rankings(3)
    bases = tuple(
        tuple(p.rankings) * z for p in example.profiles
    )
    rng = np.random.default_rng(seed)
    for _ in range(samples):
        k = int(rng.integers(1, k_max + 1))
        voters = rng.choice(size, size=k, replace=False)
        new_ballots = [rankings[j] for j in rng.integers(0, 6, size=k)]
        perturbed = []
        for base in bases:
            ballots = list(base)
            for voter, ballot in zip(voters, new_ballots):
                ballots[int(voter)] = ballot
            perturbed.append(Profile(3, tuple(ballots)))
        if not _is_violation(example, tuple(perturbed)):
            raise InvariantError(
                f"{example.name}: profile inside radius {example.radius} "
                f"(z={z}, k={k}) does not violate {example.axiom}"
            )
    return samples


# --------------------------------------------------------------------------
# brute-force audits
# --------------------------------------------------------------------------

AUDIT_MAX_N = 5


def _all_profiles(n_max: int) -> Iterator[Profile]:
    for n in range(1, n_max + 1):
        for combo in itertools.combinations_with_replacement(range(6), n):
            counts = [0] * 6
            for j in combo:
                counts[j] += 1
            yield Profile.from_counts(3, tuple(counts))


def brute_force_audit(
    rule: VotingRule, axiom: str, n_max: int, m: int = 3
) -> List:
    """Exhaustively enumerate all elections with up to n_max voters.

    Absolute axioms return the violating profiles.  ``consistency``
    returns (profile, (part1, part2)) for every splittable violation;
    ``iia`` returns (profile, profile2, a, b) winner-flip pairs.
    """
    if m != 3:
        raise ConfigurationError("brute-force audit supports m=3 only")
    if n_max > AUDIT_MAX_N or n_max < 1:
        raise ConfigurationError(
            f"brute-force audit supports 1 <= n_max <= {AUDIT_MAX_N}"
        )
    if axiom in ABSOLUTE_AXIOMS:
        return [
            p for p in _all_profiles(n_max)
            if not check_absolute(axiom, rule, p)
        ]
    if axiom == "consistency":
        return list(_audit_consistency(rule, n_max))
    if axiom == "iia":
        return list(_audit_iia(rule, n_max))
    raise ConfigurationError(
        f"audit supports absolute axioms, consistency, and iia; got {axiom!r}"
    )


def _audit_consistency(rule: VotingRule, n_max: int) -> Iterator[tuple]:
    for profile in _all_profiles(n_max):
        if profile.n < 2:
            continue
        counts = profile.counts()
        whole = rule.evaluate(profile)
        seen = set()
        # enumerate unordered proper splits once via the smaller half
        for size in range(1, profile.n // 2 + 1):
            for first_part in _bounded_compositions(counts, size):
                rest = tuple(c - f for c, f in zip(counts, first_part))
                key = min(first_part, rest)
                if key in seen:
                    continue
                seen.add(key)
                p1 = Profile.from_counts(3, first_part)
                p2 = Profile.from_counts(3, rest)
                w1 = rule.evaluate(p1)
                if w1 == rule.evaluate(p2) and w1 != whole:
                    yield (profile, (p1, p2))


def _audit_iia(rule: VotingRule, n_max: int) -> Iterator[tuple]:
    rankings = enumerate_rankings(3)
    for profile in _all_profiles(n_max):
        winners = rule.evaluate(profile)
        if len(winners) != 1:
            continue
        for a in range(3):
            for b in range(3):
                if a == b or winners != {a}:
                    continue
                same_side = [
                    [
                        r2 for r2 in rankings
                        if (r2.index(a) < r2.index(b)) == (r1.index(a) < r1.index(b))
                    ]
                    for r1 in profile.rankings
                ]
                seen = set()
                for choice in itertools.product(*same_side):
                    other = Profile(3, tuple(choice))
                    if other.counts() in seen:
                        continue
                    seen.add(other.counts())
                    if rule.evaluate(other) == {b}:
                        yield (profile, other, a, b)


# --------------------------------------------------------------------------
# axiom spec strings
# --------------------------------------------------------------------------

AXIOM_SPEC_NAMES = (
    "resolvability", "condorcet", "majority", "no-condorcet-cycle",
    "consistency", "iia", "group-stability",
)


def parse_rho_expr(text: str) -> Callable[[int], int]:
    """Coalition-size schedule: ``const:<k>`` (rho(n)=k) or ``pow:<c>,<e>``
    (rho(n)=floor(c*n^e), requiring e < 1/2 so the coalition's histogram
    reach shrinks faster than sampling noise)."""
    if text.startswith("const:"):
        try:
            k = int(text[len("const:"):])
        except ValueError:
            raise ConfigurationError(f"bad constant coalition bound {text!r}") from None
        if k < 0:
            raise ConfigurationError(f"coalition bound must be nonnegative: {text!r}")
        return lambda n: k
    if text.startswith("pow:"):
        body = text[len("pow:"):].split(",")
        if len(body) != 2:
            raise ConfigurationError(f"power schedule needs c,e: {text!r}")
        try:
            c, e = float(body[0]), float(body[1])
        except ValueError:
            raise ConfigurationError(f"bad power schedule {text!r}") from None
        if not c > 0:
            raise ConfigurationError(f"power schedule needs c > 0: {text!r}")
        if not e < 0.5:
            raise ConfigurationError(
                f"power schedule needs exponent < 1/2, got {e} in {text!r}"
            )
        return lambda n: int(math.floor(c * n ** e))
    raise ConfigurationError(
        f"unknown coalition schedule {text!r}; use const:<k> or pow:<c>,<e>"
    )


@dataclass(frozen=True)
class AxiomSpec:
    """Parsed axiom string: the canonical text, its kind, and (for
    group-stability) the coalition schedule."""

    text: str
    kind: str  # "absolute" | "relative" | "group"
    base: str
    rho: Optional[Callable[[int], int]] = None


def parse_axiom_spec(text: str) -> AxiomSpec:
    if text in ABSOLUTE_AXIOMS:
        return AxiomSpec(text=text, kind="absolute", base=text)
    if text in ("consistency", "iia"):
        return AxiomSpec(text=text, kind="relative", base=text)
    if text.startswith("group-stability:rho="):
        expr = text[len("group-stability:rho="):]
        return AxiomSpec(
            text=text, kind="group", base="group-stability",
            rho=parse_rho_expr(expr),
        )
    known = ", ".join(AXIOM_SPEC_NAMES)
    raise ConfigurationError(
        f"unknown axiom {text!r}; available axioms: {known} "
        "(group-stability takes :rho=const:<k> or :rho=pow:<c>,<e>)"
    )
