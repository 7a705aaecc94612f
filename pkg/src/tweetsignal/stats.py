"""Binomial significance of trade hit counts and the ex-ante Sharpe ratio."""

from __future__ import annotations

import math
from datetime import date
from decimal import Decimal
from typing import Sequence

import numpy as np

from .labeler import as_index


class UndefinedRiskError(ArithmeticError):
    """The differential return series has zero spread."""


def _check_domain(n: int, k: int, p: float) -> None:
    if not (isinstance(n, (int, np.integer)) and isinstance(k, (int, np.integer))):
        raise ValueError("n and k must be integers")
    if n < 0 or not 0 <= k <= n:
        raise ValueError(f"need 0 <= k <= n, got n={n}, k={k}")
    if not 0.0 < p < 1.0:
        raise ValueError(f"p must lie in (0, 1), got {p}")


def log_binom_pmf(n: int, k: int, p: float) -> float:
    _check_domain(n, k, p)
    return (math.lgamma(n + 1) - math.lgamma(k + 1) - math.lgamma(n - k + 1)
            + k * math.log(p) + (n - k) * math.log1p(-p))


def binom_pmf(n: int, k: int, p: float) -> float:
    return math.exp(log_binom_pmf(n, k, p))


def binom_survival(n: int, k_min: int, p: float) -> float:
    """P(X >= k_min) for X ~ Binomial(n, p), summed term by term in log space."""
    _check_domain(n, max(min(k_min, n), 0), p)
    if k_min <= 0:
        return 1.0
    if k_min > n:
        return 0.0
    logs = np.array([log_binom_pmf(n, j, p) for j in range(k_min, n + 1)])
    top = logs.max()
    return float(min(1.0, math.exp(top) * np.exp(logs - top).sum()))


def frame_adjust(prob: float, frames: float) -> float:
    """Scale a chance probability by the number of selectable test windows (capped at 1)."""
    if not 0.0 <= prob <= 1.0:
        raise ValueError("prob must lie in [0, 1]")
    if frames < 1:
        raise ValueError("frames must be >= 1")
    return min(1.0, prob * frames)


def frame_adjust_independent(prob: float, frames: float) -> float:
    """Chance that at least one of ``frames`` independent windows hits: 1 - (1 - p)^frames."""
    if frames < 1:
        raise ValueError("frames must be >= 1")
    return -math.expm1(frames * math.log1p(-prob)) if prob < 1 else 1.0


def significance(n: int, k: int, p: float = 0.5, frames: float = 1.0) -> dict:
    """Everything the significance report prints.

    ``survival`` is P(X >= k).  ``survival_above`` is P(X >= k + 1), the tail
    that "better than this result" reads as when the result itself is excluded.
    """
    pmf = binom_pmf(n, k, p)
    surv = binom_survival(n, k, p)
    surv_above = binom_survival(n, k + 1, p)
    return {
        "n": n, "k": k, "p": p, "frames": frames,
        "pmf": pmf,
        "survival": surv,
        "survival_above": surv_above,
        "frame_adjusted_pmf": frame_adjust(pmf, frames),
        "frame_adjusted_survival": frame_adjust(surv, frames),
        "frame_adjusted_survival_above": frame_adjust(surv_above, frames),
        "independent_periods_variant": {
            "pmf": frame_adjust_independent(pmf, frames),
            "survival": frame_adjust_independent(surv, frames),
            "survival_above": frame_adjust_independent(surv_above, frames),
        },
    }


def sharpe(strategy: Sequence[float], benchmark: Sequence[float]) -> float:
    """mean(d) / std(d) with d = strategy - benchmark and the n-1 standard deviation.

    Identical series give 0 (no excess return); any other constant
    differential raises :class:`UndefinedRiskError`.
    """
    r_i = np.asarray(strategy, dtype=float)
    r_b = np.asarray(benchmark, dtype=float)
    if r_i.shape != r_b.shape:
        raise ValueError("strategy and benchmark series differ in length")
    if r_i.size < 2:
        raise ValueError("need at least two periods")
    d = r_i - r_b
    sd = d.std(ddof=1)
    if not d.any():
        return 0.0
    if sd <= 1e-15 * max(1.0, float(np.abs(d).max())):
        raise UndefinedRiskError("differential returns are constant; Sharpe ratio undefined")
    return float(d.mean() / sd)


def daily_returns(closes: Sequence[tuple[date, Decimal]]) -> list[tuple[date, float]]:
    """Close-to-close returns keyed by the later day."""
    out = []
    for (_, prev), (d, cur) in zip(closes, closes[1:]):
        out.append((d, float(Decimal(cur) / Decimal(prev) - 1)))
    return out


def benchmark_buy_and_hold(bars, period: tuple[date, date] | None = None) -> list[tuple[date, float]]:
    """Daily close-to-close returns of holding the benchmark over ``period`` (inclusive)."""
    closes = as_index(bars).daily_closes()
    if period is not None:
        closes = [(d, c) for d, c in closes if period[0] <= d <= period[1]]
    if len(closes) < 2:
        raise ValueError("benchmark data must cover at least two trading days of the period")
    return daily_returns(closes)
