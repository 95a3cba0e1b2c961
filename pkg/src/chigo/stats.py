"""Exact binomial significance testing for version-vs-version matches."""

from __future__ import annotations

import numpy as np
from scipy.special import gammaln, logsumexp

# Outcomes whose probability is within this relative slack of the observed
# outcome's probability count as "at most as likely" despite float rounding.
_RELATIVE_SLACK = 1e-7


def log_binom_pmf(k: np.ndarray, n: int, p: float) -> np.ndarray:
    k = np.asarray(k, dtype=np.float64)
    return (
        gammaln(n + 1)
        - gammaln(k + 1)
        - gammaln(n - k + 1)
        + k * np.log(p)
        + (n - k) * np.log1p(-p)
    )


def binomial_test(wins: int, games: int, p0: float = 0.5) -> float:
    """Two-sided exact binomial test, computed in log space.

    Returns the probability, under Binomial(games, p0), of any outcome at
    most as likely as the observed win count.  Stable out to games ~ 1e6
    and p-values down to the float64 floor.
    """
    if not 0 <= wins <= games:
        raise ValueError(f"wins {wins} outside 0..{games}")
    if not 0.0 < p0 < 1.0:
        raise ValueError(f"p0 must be in (0, 1), got {p0}")
    if games == 0:
        return 1.0
    all_k = np.arange(games + 1)
    log_pmf = log_binom_pmf(all_k, games, p0)
    observed = log_pmf[wins]
    in_tail = log_pmf <= observed + np.log1p(_RELATIVE_SLACK)
    p_value = float(np.exp(logsumexp(log_pmf[in_tail])))
    return min(p_value, 1.0)
