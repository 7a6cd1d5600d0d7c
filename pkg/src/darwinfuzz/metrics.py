"""Campaign statistics, scheduling-effectiveness metric, CSV emission, and
the Mann-Whitney U test used by the benchmark comparisons."""

import math
from dataclasses import dataclass, field
from itertools import combinations
from typing import Optional

STATS_HEADER = ("elapsed_ms,execs,mutations,unique_paths,edges_covered,"
                "crashes,effectiveness,execs_per_sec")

# Largest pooled sample size for which the U test enumerates all labelings.
EXACT_LIMIT = 12


@dataclass
class CampaignStats:
    execs: int = 0
    mutations: int = 0
    unique_paths: int = 0
    edges_covered: int = 0
    crashes: int = 0
    # (execs, mutations) at each post-priming new-path discovery.
    coverage_events: list = field(default_factory=list)
    # (execs, edges_covered) whenever the global edge count grew.
    edge_events: list = field(default_factory=list)


def effectiveness(stats: CampaignStats) -> Optional[float]:
    """Mean mutations per coverage event; None before the first event."""
    if not stats.coverage_events:
        return None
    return stats.mutations / len(stats.coverage_events)


def execs_per_second(stats: CampaignStats, elapsed_s: float) -> float:
    if elapsed_s <= 0:
        raise ValueError("elapsed time must be positive")
    return stats.execs / elapsed_s


def stats_row(stats: CampaignStats, elapsed_ms: int) -> str:
    eff = effectiveness(stats)
    eff_field = "" if eff is None else repr(eff)
    eps = stats.execs / (elapsed_ms / 1000.0) if elapsed_ms > 0 else 0.0
    return (f"{elapsed_ms},{stats.execs},{stats.mutations},{stats.unique_paths},"
            f"{stats.edges_covered},{stats.crashes},{eff_field},{eps!r}")


def _midranks(values):
    order = sorted(range(len(values)), key=values.__getitem__)
    ranks = [0.0] * len(values)
    i = 0
    while i < len(order):
        j = i
        while j + 1 < len(order) and values[order[j + 1]] == values[order[i]]:
            j += 1
        rank = (i + j) / 2.0 + 1.0
        for k in range(i, j + 1):
            ranks[order[k]] = rank
        i = j + 1
    return ranks


def _u_statistic(pooled, a_indices, n1, n2):
    """U for the first sample: large when `a` tends to exceed `b`."""
    ranks = _midranks(pooled)
    r1 = sum(ranks[i] for i in a_indices)
    return r1 - n1 * (n1 + 1) / 2.0


def mann_whitney_u(a, b, alternative: str = "two-sided"):
    """U statistic for sample `a` and its p value.

    Exact permutation p when the pooled size is at most 12, otherwise a
    normal approximation with tie-corrected variance and continuity
    correction.  `alternative` is 'two-sided', 'less' or 'greater'
    (one-sided alternatives describe where `a` tends relative to `b`).
    """
    if not a or not b:
        raise ValueError("both samples must be non-empty")
    if alternative not in ("two-sided", "less", "greater"):
        raise ValueError(f"unknown alternative: {alternative}")
    a = [float(x) for x in a]
    b = [float(x) for x in b]
    n1, n2 = len(a), len(b)
    pooled = a + b
    u = _u_statistic(pooled, range(n1), n1, n2)
    if n1 + n2 <= EXACT_LIMIT:
        p = _exact_p(pooled, n1, n2, u, alternative)
    else:
        p = _approx_p(pooled, n1, n2, u, alternative)
    return u, p


def _exact_p(pooled, n1, n2, u_obs, alternative):
    n = n1 + n2
    le = ge = total = 0
    for a_idx in combinations(range(n), n1):
        u = _u_statistic(pooled, a_idx, n1, n2)
        total += 1
        if u <= u_obs + 1e-9:
            le += 1
        if u >= u_obs - 1e-9:
            ge += 1
    if alternative == "less":
        return le / total
    if alternative == "greater":
        return ge / total
    return min(1.0, 2.0 * min(le, ge) / total)


def _approx_p(pooled, n1, n2, u_obs, alternative):
    n = n1 + n2
    counts = {}
    for v in pooled:
        counts[v] = counts.get(v, 0) + 1
    tie_term = sum(t ** 3 - t for t in counts.values())
    var = n1 * n2 / 12.0 * ((n + 1) - tie_term / (n * (n - 1)))
    if var == 0:
        return 1.0
    mean = n1 * n2 / 2.0
    sd = math.sqrt(var)

    def sf(z):
        return 0.5 * math.erfc(z / math.sqrt(2.0))

    if alternative == "less":
        return sf((mean - u_obs - 0.5) / sd)
    if alternative == "greater":
        return sf((u_obs - mean - 0.5) / sd)
    z = (abs(u_obs - mean) - 0.5) / sd
    return min(1.0, 2.0 * sf(z))


def median(values):
    vals = sorted(values)
    n = len(vals)
    if n == 0:
        raise ValueError("median of empty sequence")
    mid = n // 2
    if n % 2:
        return vals[mid]
    return (vals[mid - 1] + vals[mid]) / 2.0
