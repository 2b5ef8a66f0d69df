"""Classical rank and correlation tests used by the session analyses.

The statistics (r, H, U/Z, V) are computed here, including average ranks
and tie-corrected variances; scipy supplies only the reference
distributions (Student t, chi-square, standard normal) for p-values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import stats as _dists

from ..errors import DegenerateInputError


@dataclass
class TestResult:
    name: str
    statistic: float
    p_value: float
    method: str
    extras: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "statistic": self.statistic,
            "p_value": self.p_value,
            "method": self.method,
            **self.extras,
        }


def average_ranks(values: list[float] | np.ndarray) -> np.ndarray:
    """1-based ranks; tied values share the mean of their rank block."""
    arr = np.asarray(values, dtype=np.float64)
    order = np.argsort(arr, kind="stable")
    ranks = np.empty(len(arr))
    i = 0
    while i < len(arr):
        j = i
        while j + 1 < len(arr) and arr[order[j + 1]] == arr[order[i]]:
            j += 1
        ranks[order[i:j + 1]] = (i + j) / 2.0 + 1.0
        i = j + 1
    return ranks


def _tie_term(values: np.ndarray) -> float:
    """sum(t^3 - t) over groups of tied values."""
    _, counts = np.unique(values, return_counts=True)
    return float(np.sum(counts.astype(np.float64) ** 3 - counts))


def pearson(x: list[float], y: list[float]) -> TestResult:
    """Sample correlation with a two-sided Student-t p-value."""
    if len(x) != len(y):
        raise ValueError("x and y must have equal length")
    n = len(x)
    if n < 3:
        raise ValueError("pearson needs at least 3 observations")
    xa = np.asarray(x, dtype=np.float64)
    ya = np.asarray(y, dtype=np.float64)
    xd = xa - xa.mean()
    yd = ya - ya.mean()
    sxx = float(xd @ xd)
    syy = float(yd @ yd)
    if sxx == 0.0 or syy == 0.0:
        raise DegenerateInputError("correlation undefined for a constant sample")
    r = float(xd @ yd) / math.sqrt(sxx * syy)
    r = max(-1.0, min(1.0, r))
    df = n - 2
    if abs(r) == 1.0:
        p = 0.0
    else:
        t = r * math.sqrt(df / (1.0 - r * r))
        p = 2.0 * float(_dists.t.sf(abs(t), df))
    return TestResult(
        name="pearson_r",
        statistic=r,
        p_value=min(1.0, p),
        method=f"t approximation, df={df}",
        extras={"n": n, "df": df},
    )


def kruskal_wallis(groups: list[list[float]]) -> TestResult:
    """Rank-based k-group omnibus H test with tie correction."""
    if len(groups) < 2:
        raise ValueError("kruskal_wallis needs at least 2 groups")
    if any(len(g) == 0 for g in groups):
        raise ValueError("kruskal_wallis groups must be non-empty")
    pooled = np.concatenate([np.asarray(g, dtype=np.float64) for g in groups])
    n_total = len(pooled)
    ranks = average_ranks(pooled)
    h = 0.0
    offset = 0
    for g in groups:
        r_sum = float(ranks[offset:offset + len(g)].sum())
        h += r_sum * r_sum / len(g)
        offset += len(g)
    h = 12.0 / (n_total * (n_total + 1)) * h - 3.0 * (n_total + 1)
    tie = _tie_term(pooled)
    denom = 1.0 - tie / (n_total**3 - n_total)
    if denom <= 0.0:
        h = 0.0  # every observation tied
    else:
        h /= denom
    df = len(groups) - 1
    p = float(_dists.chi2.sf(h, df))
    return TestResult(
        name="kruskal_wallis_h",
        statistic=h,
        p_value=p,
        method=f"chi-square approximation, df={df}",
        extras={"df": df, "group_sizes": [len(g) for g in groups]},
    )


def ranksum_z(a: list[float], b: list[float]) -> TestResult:
    """Two-sample Mann-Whitney rank test, normal approximation.

    Z is signed by the direction of a versus b (positive when a ranks
    higher), with tie-corrected variance and a 0.5 continuity correction
    toward zero.
    """
    if len(a) == 0 or len(b) == 0:
        raise ValueError("ranksum_z needs non-empty samples")
    n_a, n_b = len(a), len(b)
    pooled = np.concatenate([np.asarray(a, np.float64), np.asarray(b, np.float64)])
    ranks = average_ranks(pooled)
    r_a = float(ranks[:n_a].sum())
    u_a = r_a - n_a * (n_a + 1) / 2.0
    mean_u = n_a * n_b / 2.0
    n = n_a + n_b
    tie = _tie_term(pooled)
    var_u = (n_a * n_b / 12.0) * ((n + 1) - tie / (n * (n - 1)))
    d = u_a - mean_u
    if var_u <= 0.0:
        z = 0.0
    elif abs(d) <= 0.5:
        z = 0.0
    else:
        z = (d - math.copysign(0.5, d)) / math.sqrt(var_u)
    p = min(1.0, 2.0 * float(_dists.norm.sf(abs(z))))
    return TestResult(
        name="ranksum_z",
        statistic=z,
        p_value=p,
        method="normal approximation, tie-corrected, continuity-corrected",
        extras={"u": u_a, "n_a": n_a, "n_b": n_b},
    )


def _signed_rank_exact_p(doubled_ranks: list[int], doubled_v: int) -> float:
    """Exact two-sided p over all 2^m sign assignments.

    Ranks arrive doubled so average ranks are integers; the distribution
    of the doubled positive-rank sum is built by convolution, which
    enumerates the same 2^m assignments without materializing them.
    """
    total = sum(doubled_ranks)
    counts = np.zeros(total + 1, dtype=np.int64)
    counts[0] = 1
    upto = 0
    for r2 in doubled_ranks:
        upto += r2
        shifted = np.zeros_like(counts)
        shifted[r2:upto + 1] = counts[:upto + 1 - r2]
        counts[:upto + 1] += shifted[:upto + 1]
    m = len(doubled_ranks)
    n_le = int(counts[:doubled_v + 1].sum())
    n_ge = int(counts[doubled_v:].sum())
    return min(1.0, 2.0 * min(n_le, n_ge) / 2**m)


def wilcoxon_signed_rank(a: list[float], b: list[float],
                         exact_limit: int = 20) -> TestResult:
    """Paired signed-rank test; V is the positive-difference rank sum.

    Zero differences are dropped before ranking (and counted).  Up to
    ``exact_limit`` non-zero pairs the two-sided p is exact over all 2^m
    sign assignments; beyond that a tie-corrected normal approximation
    with continuity correction is used.  The method note records which.
    """
    if len(a) != len(b):
        raise ValueError("paired samples must have equal length")
    if len(a) == 0:
        raise ValueError("wilcoxon needs at least one pair")
    diffs = np.asarray(a, np.float64) - np.asarray(b, np.float64)
    nonzero = diffs[diffs != 0.0]
    dropped = len(diffs) - len(nonzero)
    m = len(nonzero)
    if m == 0:
        raise DegenerateInputError("all paired differences are zero")
    abs_ranks = average_ranks(np.abs(nonzero))
    v = float(abs_ranks[nonzero > 0].sum())

    if m <= exact_limit:
        doubled = [int(round(2 * r)) for r in abs_ranks]
        p = _signed_rank_exact_p(doubled, int(round(2 * v)))
        method = f"exact enumeration of 2^{m} sign assignments"
    else:
        mean_v = m * (m + 1) / 4.0
        tie = _tie_term(np.abs(nonzero))
        var_v = m * (m + 1) * (2 * m + 1) / 24.0 - tie / 48.0
        d = v - mean_v
        if var_v <= 0.0 or abs(d) <= 0.5:
            z = 0.0
        else:
            z = (d - math.copysign(0.5, d)) / math.sqrt(var_v)
        p = min(1.0, 2.0 * float(_dists.norm.sf(abs(z))))
        method = "normal approximation, tie-corrected, continuity-corrected"
    return TestResult(
        name="wilcoxon_v",
        statistic=v,
        p_value=p,
        method=method,
        extras={"m": m, "dropped_zeros": dropped},
    )
