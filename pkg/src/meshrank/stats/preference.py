"""Preference matrices, tournaments, and choice-consistency triads."""

from __future__ import annotations

from dataclasses import dataclass
from math import comb

import numpy as np

from ..errors import AggregationError
from ..protocol.session import PairOutcome


@dataclass
class PreferenceMatrix:
    """Antisymmetric n x n matrix of pairwise preference scores."""

    stimulus_ids: tuple[str, ...]
    scores: np.ndarray

    @property
    def n(self) -> int:
        return len(self.stimulus_ids)

    @property
    def totals(self) -> dict[str, float]:
        sums = self.scores.sum(axis=1)
        return {sid: float(sums[i]) for i, sid in enumerate(self.stimulus_ids)}


@dataclass
class Tournament:
    """Complete irreflexive win relation: wins[i, j] iff i beat j."""

    n: int
    wins: np.ndarray

    def __post_init__(self):
        w = self.wins
        if w.shape != (self.n, self.n):
            raise ValueError("wins matrix must be n x n")
        if np.any(np.diag(w)):
            raise ValueError("tournament must be irreflexive")
        off = ~np.eye(self.n, dtype=bool)
        if not np.all(w[off] ^ w.T[off]):
            raise ValueError("tournament must be complete: exactly one winner per pair")


def preference_matrix(outcomes: list[PairOutcome],
                      stimulus_ids: tuple[str, ...] | list[str]) -> PreferenceMatrix:
    """Fill the matrix from exactly one outcome per unordered pair."""
    ids = tuple(stimulus_ids)
    index = {sid: i for i, sid in enumerate(ids)}
    n = len(ids)
    expected = n * (n - 1) // 2
    if len(outcomes) != expected:
        raise AggregationError(f"need {expected} outcomes for {n} stimuli, got {len(outcomes)}")
    scores = np.zeros((n, n))
    seen = set()
    for outcome in outcomes:
        a, b = outcome.pair
        if a not in index or b not in index:
            raise AggregationError(f"outcome pair {outcome.pair} not in stimulus set")
        key = (a, b) if a < b else (b, a)
        if key in seen:
            raise AggregationError(f"duplicate outcome for pair {key}")
        seen.add(key)
        ps = outcome.ps
        scores[index[a], index[b]] = ps
        scores[index[b], index[a]] = -ps
    return PreferenceMatrix(stimulus_ids=ids, scores=scores)


def tournament_from_matrix(matrix: PreferenceMatrix) -> Tournament:
    return Tournament(n=matrix.n, wins=matrix.scores > 0)


def circular_triads(t: Tournament) -> tuple[int, float]:
    """Count intransitive triples and Kendall's consistency coefficient.

    T = C(n,3) - sum_i C(a_i, 2) with a_i the win count of item i;
    zeta = 1 - T / T_max, where T_max is n(n^2-1)/24 for odd n and
    n(n^2-4)/24 for even n.  A perfectly transitive judge scores 1.
    """
    n = t.n
    win_counts = t.wins.sum(axis=1)
    triads = comb(n, 3) - int(sum(comb(int(a), 2) for a in win_counts))
    if n % 2 == 1:
        t_max = n * (n * n - 1) // 24
    else:
        t_max = n * (n * n - 4) // 24
    if t_max == 0:
        return triads, 1.0 if triads == 0 else 0.0
    return triads, 1.0 - triads / t_max
