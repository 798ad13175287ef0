"""Exact combinatorics of key recovery.

All probabilities are computed as exact rationals (`fractions.Fraction`)
and only rendered to floats at the edges.  Counting is plain integer
arithmetic; Python integers never overflow, but absurdly large requests
are refused instead of grinding through million-digit numbers.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from math import comb, factorial, prod

from .errors import CapacityError, InputError
from .keyspace import BitSumProfile, KeySet, bit_sum_profile, multiplicity

MAX_EXACT_ARG = 4096
DEFAULT_WORK_BOUND = 10_000_000


def _check_exact_range(m: int, k: int) -> None:
    if m > MAX_EXACT_ARG or k > MAX_EXACT_ARG:
        raise CapacityError(
            f"(m={m}, k={k}) exceeds the supported exact-arithmetic range "
            f"(both must be <= {MAX_EXACT_ARG})"
        )


def surjection_count(m: int, k: int) -> int:
    """Number of surjections from an m-element set onto a k-element set.

    Inclusion-exclusion: sum_{i=0}^{k-1} (-1)^i C(k,i) (k-i)^m.  Exact.
    The m < k case is returned as 0 directly; the alternating sum only
    equals the surjection count for m >= 1.
    """
    if m < 0:
        raise InputError(f"m must be >= 0, got {m}")
    if k < 1:
        raise InputError(f"k must be >= 1, got {k}")
    _check_exact_range(m, k)
    if m < k:
        return 0
    return sum((-1) ** i * comb(k, i) * (k - i) ** m for i in range(k))


@dataclass(frozen=True)
class RecoveryProbability:
    """Probability that m uniform draws from k equiprobable keys
    reveal all k of them, as an exact rational plus float rendering."""

    k: int
    m: int
    exact: Fraction

    @property
    def value(self) -> float:
        return float(self.exact)


def prob_all_keys(k: int, m: int) -> RecoveryProbability:
    """All-keys recovery probability: surjections(m, k) / k**m."""
    if k < 1:
        raise InputError(f"k must be >= 1, got {k}")
    if m < 0:
        raise InputError(f"m must be >= 0, got {m}")
    _check_exact_range(m, k)
    if m < k:
        return RecoveryProbability(k, m, Fraction(0))
    return RecoveryProbability(k, m, Fraction(surjection_count(m, k), k**m))


def prob_two_keys(m: int) -> Fraction:
    """Two-key recovery probability, closed form: 1 - 2^(1-m) for m >= 2."""
    if m < 0:
        raise InputError(f"m must be >= 0, got {m}")
    if m < 2:
        return Fraction(0)
    return 1 - Fraction(1, 1 << (m - 1))


@dataclass(frozen=True)
class ConsistencyCount:
    """Counts of key assignments consistent with a bit-sum profile.

    `ordered_count` is the product over positions of C(k, r_q): the
    number of ways to pick, independently per bit position, which of the
    k ordered slots receive a 1.  `multiset_count` counts the distinct
    unordered multisets those assignments produce (duplicate keys
    allowed inside a multiset); `distinct_multiset_count` counts only
    the duplicate-free ones, which is the combination count a guesser
    who knows the keys are pairwise distinct would work from.
    """

    profile: BitSumProfile
    k: int
    n: int
    ordered_count: int
    multiset_count: int
    distinct_multiset_count: int
    multisets: tuple[tuple[int, ...], ...] | None = None

    def distinct_multisets(self) -> tuple[tuple[int, ...], ...]:
        if self.multisets is None:
            raise InputError("enumeration list was not requested")
        return tuple(
            ms for ms in self.multisets if len(set(ms)) == len(ms)
        )


def count_consistent_keysets(
    profile: BitSumProfile,
    k: int,
    include_multisets: bool = False,
    work_bound: int = DEFAULT_WORK_BOUND,
) -> ConsistencyCount:
    """Enumerate every key multiset consistent with a bit-sum profile.

    Iterates the ordered column assignments (which rows get bit 1, per
    position), collects the row multisets, and deduplicates them in
    canonical sorted order.  Refuses instances whose ordered assignment
    count exceeds `work_bound`.
    """
    if k < 1:
        raise InputError(f"k must be >= 1, got {k}")
    _check_exact_range(0, k)
    n = profile.n
    for q, r in enumerate(profile.counts):
        if r > k:
            raise InputError(
                f"profile count {r} at position {q} exceeds k={k}"
            )
    ordered = prod(comb(k, r) for r in profile.counts)
    if ordered > work_bound:
        raise CapacityError(
            f"enumeration needs {ordered} ordered assignments, "
            f"work bound is {work_bound}"
        )
    columns = [
        list(itertools.combinations(range(k), r)) for r in profile.counts
    ]
    seen: set[tuple[int, ...]] = set()
    for assignment in itertools.product(*columns):
        vals = [0] * k
        for q, rows in enumerate(assignment):
            bit = 1 << q
            for row in rows:
                vals[row] |= bit
        seen.add(tuple(sorted(vals)))
    distinct_free = sum(1 for ms in seen if len(set(ms)) == len(ms))
    return ConsistencyCount(
        profile=profile,
        k=k,
        n=n,
        ordered_count=ordered,
        multiset_count=len(seen),
        distinct_multiset_count=distinct_free,
        multisets=tuple(sorted(seen)) if include_multisets else None,
    )


def classical_guess_bound(profile: BitSumProfile, k: int) -> Fraction:
    """Upper bound on guessing all keys from an exact bit-sum profile:
    min(k! / prod_q C(k, r_q), 1)."""
    if k < 1:
        raise InputError(f"k must be >= 1, got {k}")
    _check_exact_range(0, k)
    for q, r in enumerate(profile.counts):
        if r > k:
            raise InputError(
                f"profile count {r} at position {q} exceeds k={k}"
            )
    ordered = prod(comb(k, r) for r in profile.counts)
    return min(Fraction(factorial(k), ordered), Fraction(1))


def classical_guess_exact(keys: KeySet) -> Fraction:
    """Exact probability that a uniformly drawn ordered assignment
    consistent with the keys' own bit-sum profile reproduces them:
    (k! / prod b_i!) / prod_q C(k, r_q)."""
    profile = bit_sum_profile(keys)
    mult = multiplicity(keys)
    ordered = prod(comb(keys.k, r) for r in profile.counts)
    return Fraction(mult.permutations, ordered)


def probability_record(formula: str, inputs: dict, exact: Fraction) -> dict:
    """Serialization shape shared by every exact probability result."""
    return {
        "formula": formula,
        "inputs": inputs,
        "rational": {
            "num": str(exact.numerator),
            "den": str(exact.denominator),
        },
        "double": float(exact),
    }
