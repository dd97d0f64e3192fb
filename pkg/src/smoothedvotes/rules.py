"""Voting rules over full rankings: winner sets, pairwise margins, and the
tie-locus hyperplane geometry used for stability certificates.

Every rule returns the complete set of winning candidates (no tie-breaking)
and depends only on the profile's histogram.  Rules that expose hyperplanes
partition histogram space into regions on which the winner set is constant;
``l1_distance_to_hyperplane`` measures how far a histogram sits from such a
tie locus in the L1 sense.

All score comparisons are exact: positional weights are rationals scaled to
integers, and pairwise/Kendall-tau tallies are integer counts.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from numbers import Rational, Real
from typing import Callable, Dict, Sequence, Tuple

import numpy as np

from .core import (
    ArgumentError,
    ConfigurationError,
    Histogram,
    InvariantError,
    Profile,
    enumerate_rankings,
    kendall_tau_matrix,
)


@dataclass(frozen=True)
class Hyperplane:
    """Affine tie locus ``sum_j coeffs[j] * h[j] = constant`` in explicit
    histogram coordinates (the last ranking's coordinate is implied)."""

    coeffs: Tuple[Fraction, ...]
    constant: Fraction

    def __post_init__(self) -> None:
        coeffs = tuple(Fraction(c) for c in self.coeffs)
        object.__setattr__(self, "coeffs", coeffs)
        object.__setattr__(self, "constant", Fraction(self.constant))
        if not any(coeffs):
            raise InvariantError("hyperplane must have a nonzero coefficient")

    def evaluate(self, h: Histogram) -> Fraction:
        """Signed value ``a . h - b`` at a histogram."""
        if len(self.coeffs) != len(h.entries):
            raise ArgumentError(
                f"hyperplane dimension {len(self.coeffs)} does not match "
                f"histogram dimension {len(h.entries)}"
            )
        total = sum(c * e for c, e in zip(self.coeffs, h.entries))
        return total - self.constant


def l1_distance_to_hyperplane(h: Histogram, plane: Hyperplane) -> Fraction:
    """Exact L1 distance from a histogram to a hyperplane:
    |a . h - b| / max_j |a_j|."""
    return abs(plane.evaluate(h)) / max(abs(c) for c in plane.coeffs)


# --------------------------------------------------------------------------
# pairwise margins
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class PairwiseMatrix:
    """Antisymmetric matrix of pairwise victory margins:
    entry (x, y) = #{voters ranking x above y} - #{voters ranking y above x}."""

    margins: Tuple[Tuple[int, ...], ...]

    def margin(self, x: int, y: int) -> int:
        return self.margins[x][y]


@lru_cache(maxsize=None)
def _preference_tensor(m: int) -> np.ndarray:
    """Indicator tensor P[ranking, x, y] = 1 iff x is ranked above y."""
    rankings = enumerate_rankings(m)
    tensor = np.zeros((len(rankings), m, m), dtype=np.int64)
    for idx, ranking in enumerate(rankings):
        for i in range(m):
            for j in range(i + 1, m):
                tensor[idx, ranking[i], ranking[j]] = 1
    return tensor


def margin_blocks(counts: np.ndarray, m: int) -> np.ndarray:
    """Vectorized pairwise margins for a block of count vectors.

    ``counts`` has shape (blocks, m!); the result has shape (blocks, m, m).
    """
    tensor = _preference_tensor(m)
    above = counts @ tensor.reshape(len(tensor), m * m)
    above = above.reshape(-1, m, m)
    return above - above.transpose(0, 2, 1)


def pairwise_margins(profile: Profile) -> PairwiseMatrix:
    """Exact pairwise victory margins of a profile."""
    counts = np.array(profile.counts(), dtype=np.int64)[None, :]
    block = margin_blocks(counts, profile.m)[0]
    return PairwiseMatrix(tuple(tuple(int(v) for v in row) for row in block))


# --------------------------------------------------------------------------
# rule framework
# --------------------------------------------------------------------------

class VotingRule:
    """A rule maps profiles to nonempty winner sets, depends only on the
    histogram, and commutes with candidate relabeling.

    ``winners_from_counts`` is the vectorized core: given a block of count
    vectors (shape (blocks, m!)), it returns a boolean winner matrix of
    shape (blocks, m).  ``decisive`` records whether the winner is a
    singleton on every profile strictly off the rule's hyperplanes.
    """

    name: str = "abstract"
    decisive: bool = True

    def winners_from_counts(self, counts: np.ndarray, m: int) -> np.ndarray:
        raise NotImplementedError

    def evaluate(self, profile: Profile) -> frozenset:
        counts = np.array(profile.counts(), dtype=np.int64)[None, :]
        row = self.winners_from_counts(counts, profile.m)[0]
        return frozenset(int(c) for c in np.nonzero(row)[0])

    def hyperplanes(self, m: int) -> Tuple[Hyperplane, ...]:
        """Tie loci of the rule; empty when the rule exposes none."""
        return ()


def _reduced_plane(full_coeffs: Sequence[Fraction], target: Fraction) -> Hyperplane:
    """Rewrite ``sum_over_all_rankings c_j h_j = target`` in explicit
    coordinates using ``sum h_j = 1`` to eliminate the last coordinate."""
    last = full_coeffs[-1]
    return Hyperplane(
        coeffs=tuple(c - last for c in full_coeffs[:-1]),
        constant=target - last,
    )


# --------------------------------------------------------------------------
# positional scoring rules
# --------------------------------------------------------------------------

def _validate_weights(weights: Sequence[Fraction], m: int) -> Tuple[Fraction, ...]:
    if len(weights) != m:
        raise ArgumentError(
            f"scoring vector has {len(weights)} weights but m={m}"
        )
    weights = tuple(Fraction(w) for w in weights)
    if any(a < b for a, b in zip(weights, weights[1:])):
        raise ArgumentError(f"scoring weights must be nonincreasing: {weights}")
    if len(set(weights)) == 1:
        raise ArgumentError("scoring weights must not all be equal")
    return weights


@lru_cache(maxsize=None)
def _psr_score_matrix(weights: Tuple[Fraction, ...]) -> np.ndarray:
    """Integerized score matrix S[ranking, candidate] for exact argmax."""
    m = len(weights)
    scale = math.lcm(*[w.denominator for w in weights])
    int_weights = [int(w * scale) for w in weights]
    rankings = enumerate_rankings(m)
    matrix = np.zeros((len(rankings), m), dtype=np.int64)
    for idx, ranking in enumerate(rankings):
        for position, candidate in enumerate(ranking):
            matrix[idx, candidate] = int_weights[position]
    return matrix


class PositionalScoringRule(VotingRule):
    """Each voter awards weights[position] points to the candidate at each
    position; winners maximize total points."""

    decisive = True

    def __init__(self, name: str, weights_for: Callable[[int], Sequence]) -> None:
        self.name = name
        self._weights_for = weights_for

    def weights(self, m: int) -> Tuple[Fraction, ...]:
        return _validate_weights(self._weights_for(m), m)

    def winners_from_counts(self, counts: np.ndarray, m: int) -> np.ndarray:
        scores = counts @ _psr_score_matrix(self.weights(m))
        return scores == scores.max(axis=1, keepdims=True)

    def hyperplanes(self, m: int) -> Tuple[Hyperplane, ...]:
        weights = self.weights(m)
        rankings = enumerate_rankings(m)
        planes = []
        for x in range(m):
            for y in range(x + 1, m):
                full = [
                    weights[r.index(x)] - weights[r.index(y)] for r in rankings
                ]
                planes.append(_reduced_plane(full, Fraction(0)))
        return tuple(planes)


def _fixed_weights(weights: Sequence) -> Callable[[int], Sequence]:
    resolved = tuple(_as_fraction(w) for w in weights)

    def weights_for(m: int) -> Sequence:
        if m != len(resolved):
            raise ArgumentError(
                f"scoring vector has {len(resolved)} weights but m={m}"
            )
        return resolved

    return weights_for


def _as_fraction(value) -> Fraction:
    if isinstance(value, Rational):
        return Fraction(value)
    if isinstance(value, Real):
        return Fraction(float(value))
    raise ArgumentError(f"scoring weight must be a number, got {value!r}")


def plurality_rule() -> PositionalScoringRule:
    return PositionalScoringRule(
        "plurality", lambda m: (Fraction(1),) + (Fraction(0),) * (m - 1)
    )


def borda_rule() -> PositionalScoringRule:
    return PositionalScoringRule(
        "borda", lambda m: tuple(Fraction(m - 1 - i) for i in range(m))
    )


def veto_rule() -> PositionalScoringRule:
    return PositionalScoringRule(
        "veto", lambda m: (Fraction(1),) * (m - 1) + (Fraction(0),)
    )


def psr_rule(weights: Sequence) -> PositionalScoringRule:
    """Explicit-weight positional scoring rule; the weight length pins m."""
    weights = tuple(weights)
    resolved = _fixed_weights(weights)
    _validate_weights(resolved(len(weights)), len(weights))
    label = "psr:[" + ",".join(str(_as_fraction(w)) for w in weights) + "]"
    return PositionalScoringRule(label, resolved)


# --------------------------------------------------------------------------
# pairwise rules
# --------------------------------------------------------------------------

def _candidate_pairs(m: int) -> Tuple[Tuple[int, int], ...]:
    return tuple((x, y) for x in range(m) for y in range(x + 1, m))


def _margin_plane(m: int, x: int, y: int) -> Hyperplane:
    """Tie locus margin(x, y) = 0 as 'share ranking x above y equals 1/2'.

    Oriented with x < y so the omitted (descending) ranking contributes a
    zero coefficient, making the explicit-coordinate form exact.
    """
    rankings = enumerate_rankings(m)
    coeffs = tuple(
        Fraction(1) if r.index(x) < r.index(y) else Fraction(0)
        for r in rankings[:-1]
    )
    return Hyperplane(coeffs=coeffs, constant=Fraction(1, 2))


def _margin_planes(m: int) -> Tuple[Hyperplane, ...]:
    return tuple(_margin_plane(m, x, y) for x, y in _candidate_pairs(m))


class MinimaxRule(VotingRule):
    """Winners minimize their worst pairwise defeat (the largest margin any
    opponent holds against them)."""

    name = "minimax"
    decisive = True

    def winners_from_counts(self, counts: np.ndarray, m: int) -> np.ndarray:
        margins = margin_blocks(counts, m)
        idx = np.arange(m)
        margins[:, idx, idx] = np.iinfo(np.int64).min
        defeats = margins.max(axis=1)
        return defeats == defeats.min(axis=1, keepdims=True)

    def hyperplanes(self, m: int) -> Tuple[Hyperplane, ...]:
        """Margin-zero planes first, then planes equating the magnitudes of
        two pairwise margins.

        The extra planes are required for regions to pin down the winner:
        when the margin signs form a cycle, the winner depends on which
        defeat is smallest, i.e. on comparisons between margin values.
        """
        rankings = enumerate_rankings(m)
        planes = list(_margin_planes(m))
        pairs = _candidate_pairs(m)
        indicator = {
            (x, y): [Fraction(int(r.index(x) < r.index(y))) for r in rankings]
            for x, y in pairs
        }
        for i, p in enumerate(pairs):
            for q in pairs[i + 1:]:
                diff = [indicator[p][k] - indicator[q][k] for k in range(len(rankings))]
                total = [indicator[p][k] + indicator[q][k] for k in range(len(rankings))]
                # margin(p) = margin(q): shares of p-above and q-above agree
                planes.append(_reduced_plane(diff, Fraction(0)))
                # margin(p) = -margin(q): the two shares sum to one
                planes.append(_reduced_plane(total, Fraction(1)))
        return tuple(planes)


class CopelandRule(VotingRule):
    """Winners maximize pairwise wins, counting each pairwise tie as half a
    win (scores are doubled internally to stay in integers)."""

    name = "copeland"
    decisive = False

    def winners_from_counts(self, counts: np.ndarray, m: int) -> np.ndarray:
        margins = margin_blocks(counts, m)
        wins = (margins > 0).sum(axis=2)
        ties = (margins == 0).sum(axis=2) - 1  # drop the self-comparison
        scores = 2 * wins + ties
        return scores == scores.max(axis=1, keepdims=True)

    def hyperplanes(self, m: int) -> Tuple[Hyperplane, ...]:
        return _margin_planes(m)


@lru_cache(maxsize=None)
def _kemeny_tops(m: int) -> np.ndarray:
    return np.array([r[0] for r in enumerate_rankings(m)], dtype=np.int64)


class KemenyRule(VotingRule):
    """Winners are the top candidates of every ranking minimizing total
    Kendall-tau distance to the profile (exhaustive over all m! rankings)."""

    name = "kemeny"
    decisive = True

    def winners_from_counts(self, counts: np.ndarray, m: int) -> np.ndarray:
        distance = np.array(kendall_tau_matrix(m), dtype=np.int64)
        scores = counts @ distance
        optimal = scores == scores.min(axis=1, keepdims=True)
        tops = _kemeny_tops(m)
        winners = np.zeros((counts.shape[0], m), dtype=bool)
        for candidate in range(m):
            winners[:, candidate] = optimal[:, tops == candidate].any(axis=1)
        return winners

    def hyperplanes(self, m: int) -> Tuple[Hyperplane, ...]:
        distance = kendall_tau_matrix(m)
        fact = len(distance)
        planes = []
        for i in range(fact):
            for j in range(i + 1, fact):
                full = [
                    Fraction(distance[k][i] - distance[k][j]) for k in range(fact)
                ]
                # skip degenerate pairs whose score functionals coincide
                if any(c != full[-1] for c in full[:-1]):
                    planes.append(_reduced_plane(full, Fraction(0)))
        return tuple(planes)


# --------------------------------------------------------------------------
# operation wrappers and registry
# --------------------------------------------------------------------------

def psr_evaluate(weights: Sequence, profile: Profile) -> frozenset:
    """Winner set of the positional scoring rule with the given weights."""
    rule = PositionalScoringRule("psr", _fixed_weights(weights))
    return rule.evaluate(profile)


def minimax_evaluate(profile: Profile) -> frozenset:
    return MinimaxRule().evaluate(profile)


def copeland_evaluate(profile: Profile) -> frozenset:
    return CopelandRule().evaluate(profile)


def kemeny_evaluate(profile: Profile) -> frozenset:
    return KemenyRule().evaluate(profile)


def hyperplanes_of(rule: VotingRule, m: int) -> Tuple[Hyperplane, ...]:
    """All tie-locus hyperplanes a rule exposes at the given m."""
    return rule.hyperplanes(m)


RULES: Dict[str, Callable[[], VotingRule]] = {
    "plurality": plurality_rule,
    "borda": borda_rule,
    "veto": veto_rule,
    "minimax": MinimaxRule,
    "copeland": CopelandRule,
    "kemeny": KemenyRule,
}


def parse_rule_spec(text: str) -> VotingRule:
    """Build a rule from a config string: a registered name or
    ``psr:[w1,w2,...]`` with numeric weights."""
    if text in RULES:
        return RULES[text]()
    if text.startswith("psr:"):
        try:
            weights = json.loads(text[len("psr:"):])
        except json.JSONDecodeError as exc:
            raise ConfigurationError(f"unparseable scoring vector in {text!r}: {exc}")
        if not isinstance(weights, list) or not weights:
            raise ConfigurationError(
                f"psr spec must carry a nonempty list of weights, got {text!r}"
            )
        return psr_rule(weights)
    known = ", ".join(sorted(RULES) + ["psr:[w1,w2,...]"])
    raise ConfigurationError(f"unknown rule {text!r}; available rules: {known}")
