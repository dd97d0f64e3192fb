"""Rankings, profiles, and histograms with exact arithmetic.

Shared vocabulary for every other module: the fixed lexicographic ranking
enumeration, Kendall-tau distance, exact-rational histograms with an implicit
last coordinate, and the plain-text profile format.

Conventions:
    * Candidates are indices 0..m-1; letters ("a", "b", ...) exist only at
      I/O boundaries.
    * A ranking is a tuple ``perm`` where ``perm[j]`` is the candidate in
      position j (position 0 is most preferred).
    * The ranking enumeration is lexicographic on ``perm``; its last element
      (the descending ranking) is the one omitted from histogram vectors.
    * Noise composition uses the convention result(i) = pi(sigma(i)): the
      i-th post-noise position holds the candidate from pre-noise position
      sigma(i).  Readers comparing against other rank-noise conventions
      should note some texts use the inverse permutation.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import factorial
from typing import Iterable, Sequence

MAX_M = 6
MIN_M = 3

_LETTERS = "abcdefghijklmnopqrstuvwxyz"

Ranking = tuple[int, ...]


class SmoothedVotesError(Exception):
    """Base class for all package-specific errors."""


class ConfigurationError(SmoothedVotesError):
    """A size bound, registry name, or experiment setup is unsupported."""


class ArgumentError(SmoothedVotesError, ValueError):
    """A supplied value is outside an operation's documented domain."""


class InvariantError(SmoothedVotesError, ValueError):
    """An input breaks a structural invariant (non-bijection, mixed m, ...)."""


class WitnessInvalidError(SmoothedVotesError):
    """A relative-axiom witness is malformed (distinct from 'no violation')."""


class SingularMatrixError(SmoothedVotesError):
    """A covariance request that would produce a non-invertible matrix."""


class ParseError(SmoothedVotesError):
    """Profile or config text could not be parsed; carries a line number."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(message if line is None else f"line {line}: {message}")


def _check_m(m: int) -> None:
    if not isinstance(m, int) or not (MIN_M <= m <= MAX_M):
        raise ConfigurationError(
            f"candidate count m={m!r} unsupported; need {MIN_M} <= m <= {MAX_M}"
        )


def validate_ranking(perm: Sequence[int], m: int) -> Ranking:
    """Return ``perm`` as a tuple after checking it is a bijection on 0..m-1."""
    t = tuple(perm)
    if len(t) != m or sorted(t) != list(range(m)):
        raise InvariantError(f"{perm!r} is not a permutation of 0..{m - 1}")
    return t


@lru_cache(maxsize=None)
def enumerate_rankings(m: int) -> tuple[Ranking, ...]:
    """All m! rankings in lexicographic order; the last one is the descending
    ranking (the coordinate omitted from histograms)."""
    _check_m(m)
    return tuple(itertools.permutations(range(m)))


@lru_cache(maxsize=None)
def ranking_index(m: int) -> dict[Ranking, int]:
    """Map each ranking to its position in the fixed enumeration."""
    return {r: i for i, r in enumerate(enumerate_rankings(m))}


def compose(sigma: Sequence[int], pi: Sequence[int]) -> Ranking:
    """Apply position permutation ``sigma`` to ranking ``pi``.

    result(i) = pi(sigma(i)): position i of the result holds the candidate
    that ``pi`` placed at position sigma(i).
    """
    m = len(pi)
    sig = validate_ranking(sigma, m)
    p = validate_ranking(pi, m)
    return tuple(p[sig[i]] for i in range(m))


def relabel(sigma: Sequence[int], pi: Sequence[int]) -> Ranking:
    """Rename candidates of ``pi`` by candidate permutation ``sigma``
    (candidate c becomes sigma[c]); used by neutrality properties."""
    m = len(pi)
    sig = validate_ranking(sigma, m)
    p = validate_ranking(pi, m)
    return tuple(sig[c] for c in p)


def kendall_tau(pi: Sequence[int], pi2: Sequence[int]) -> int:
    """Number of candidate pairs ordered oppositely by the two rankings."""
    if len(pi) != len(pi2):
        raise InvariantError("rankings have different candidate counts")
    m = len(pi)
    a = validate_ranking(pi, m)
    b = validate_ranking(pi2, m)
    pos_b = [0] * m
    for j, c in enumerate(b):
        pos_b[c] = j
    d = 0
    for i in range(m):
        for j in range(i + 1, m):
            if pos_b[a[i]] > pos_b[a[j]]:
                d += 1
    return d


@lru_cache(maxsize=None)
def kendall_tau_matrix(m: int) -> tuple[tuple[int, ...], ...]:
    """Kendall-tau distances between all ranking pairs, indexed by the fixed
    enumeration."""
    rankings = enumerate_rankings(m)
    return tuple(
        tuple(kendall_tau(r1, r2) for r2 in rankings) for r1 in rankings
    )


@dataclass(frozen=True)
class Profile:
    """A sequence of n complete strict rankings over a common candidate set."""

    m: int
    rankings: tuple[Ranking, ...]

    def __post_init__(self):
        _check_m(self.m)
        if not self.rankings:
            raise InvariantError("a profile needs at least one voter")
        for r in self.rankings:
            validate_ranking(r, self.m)

    @property
    def n(self) -> int:
        return len(self.rankings)

    def counts(self) -> tuple[int, ...]:
        """Per-ranking voter counts over the full fixed enumeration."""
        idx = ranking_index(self.m)
        c = [0] * factorial(self.m)
        for r in self.rankings:
            c[idx[r]] += 1
        return tuple(c)

    @staticmethod
    def from_counts(m: int, counts: Sequence[int]) -> "Profile":
        """Build a profile from per-ranking counts (enumeration order)."""
        rankings = enumerate_rankings(m)
        if len(counts) != len(rankings):
            raise InvariantError(
                f"need {len(rankings)} counts for m={m}, got {len(counts)}"
            )
        if any(c < 0 for c in counts):
            raise InvariantError("counts must be nonnegative")
        seq: list[Ranking] = []
        for r, c in zip(rankings, counts):
            seq.extend([r] * c)
        return Profile(m, tuple(seq))


def histogram_entries_full(profile: Profile) -> tuple[Fraction, ...]:
    """All m! ranking proportions as exact rationals (sums to 1)."""
    n = profile.n
    return tuple(Fraction(c, n) for c in profile.counts())


@dataclass(frozen=True)
class Histogram:
    """Ranking-proportion vector with the last lexicographic coordinate
    implicit (equal to 1 minus the sum of the explicit entries)."""

    m: int
    entries: tuple[Fraction, ...]

    def __post_init__(self):
        _check_m(self.m)
        if len(self.entries) != factorial(self.m) - 1:
            raise InvariantError(
                f"histogram for m={self.m} needs {factorial(self.m) - 1} entries"
            )
        entries = tuple(Fraction(e) for e in self.entries)
        object.__setattr__(self, "entries", entries)
        if any(e < 0 for e in entries) or sum(entries) > 1:
            raise InvariantError("histogram entries must be >= 0 and sum <= 1")

    @property
    def implicit(self) -> Fraction:
        """The omitted proportion of the last (descending) ranking."""
        return 1 - sum(self.entries)

    def full(self) -> tuple[Fraction, ...]:
        """All m! coordinates including the implicit one."""
        return self.entries + (self.implicit,)


def histogram_of(profile: Profile) -> Histogram:
    """Exact ranking-proportion histogram of a profile."""
    full = histogram_entries_full(profile)
    return Histogram(profile.m, full[:-1])


def replicate(profile: Profile, z: int) -> Profile:
    """Concatenate ``z`` copies of the profile (histogram unchanged)."""
    if not isinstance(z, int) or z < 1:
        raise ArgumentError(f"replication factor must be a positive integer, got {z!r}")
    return Profile(profile.m, profile.rankings * z)


def l1_distance(h1: Histogram, h2: Histogram) -> Fraction:
    """L1 distance over all m! coordinates, including the implicit one."""
    if h1.m != h2.m:
        raise InvariantError("histograms have different candidate counts")
    return sum(abs(a - b) for a, b in zip(h1.full(), h2.full()))


# ---------------------------------------------------------------------------
# Text format: one line per ranking group, "<count> x a > b > c".
# Blank lines and '#' comments ignored.  Candidate names are assigned indices
# by first appearance; zero-count lines declare candidates without adding
# voters (format_profile emits one such line so round-trips are exact).
# ---------------------------------------------------------------------------


def candidate_name(c: int) -> str:
    return _LETTERS[c]


def format_ranking(r: Sequence[int]) -> str:
    return " > ".join(candidate_name(c) for c in r)


def format_profile(profile: Profile) -> str:
    """Render a profile in the group text format (exact round-trip)."""
    rankings = enumerate_rankings(profile.m)
    counts = profile.counts()
    lines = ["0 x " + format_ranking(range(profile.m))]
    for r, c in zip(rankings, counts):
        if c:
            lines.append(f"{c} x {format_ranking(r)}")
    return "\n".join(lines) + "\n"


def parse_profile(text: str) -> Profile:
    """Parse the group text format into a Profile.

    Raises ParseError (with a line number) on malformed input or when the
    file declares no voters.
    """
    names: dict[str, int] = {}
    groups: list[tuple[int, list[str]]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        head, sep, tail = line.partition("x")
        if not sep:
            raise ParseError("expected '<count> x <cand> > <cand> > ...'", lineno)
        try:
            count = int(head.strip())
        except ValueError:
            raise ParseError(f"bad count {head.strip()!r}", lineno) from None
        if count < 0:
            raise ParseError(f"negative count {count}", lineno)
        cands = [tok.strip() for tok in tail.split(">")]
        if any(not tok for tok in cands):
            raise ParseError("empty candidate name", lineno)
        if len(set(cands)) != len(cands):
            raise ParseError("duplicate candidate in ranking", lineno)
        for tok in cands:
            if tok not in names:
                names[tok] = len(names)
        groups.append((count, cands))
        if groups and len(cands) != len(groups[0][1]):
            raise ParseError("rankings have inconsistent candidate counts", lineno)
    m = len(names)
    if not groups or all(c == 0 for c, _ in groups):
        raise ParseError("no voters declared")
    _check_m(m)
    rankings: list[Ranking] = []
    for count, cands in groups:
        if len(cands) != m:
            raise ParseError("ranking does not cover all declared candidates")
        perm = validate_ranking(tuple(names[tok] for tok in cands), m)
        rankings.extend([perm] * count)
    return Profile(m, tuple(rankings))


def profiles_equal_as_multisets(p1: Profile, p2: Profile) -> bool:
    """True when the two profiles have identical per-ranking counts."""
    return p1.m == p2.m and p1.counts() == p2.counts()


def concatenate(parts: Iterable[Profile]) -> Profile:
    """Join sub-profiles into one profile (counts add exactly)."""
    parts = list(parts)
    if not parts:
        raise ArgumentError("need at least one sub-profile")
    m = parts[0].m
    if any(p.m != m for p in parts):
        raise InvariantError("sub-profiles have different candidate counts")
    rankings: tuple[Ranking, ...] = ()
    for p in parts:
        rankings += p.rankings
    return Profile(m, rankings)
