"""Two-sample hypothesis tests and the normality / variance diagnostics.

The t machinery reports one-tailed probabilities with a log10 companion so
that tails far below double-precision comfort (1e-30 and beyond) stay
comparable. Shapiro-Wilk follows Royston's 1995 refinement (AS R94).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

from .descriptive import Sample, pooled_sd
from .special import (
    f_sf,
    log_student_t_sf,
    normal_quantile,
    normal_sf,
    student_t_sf,
)

Tail = Literal["greater", "less"]

LOG10 = math.log(10.0)


@dataclass(frozen=True)
class TTestResult:
    t: float
    df: float
    p: float
    log10_p: float
    tail: Tail
    pooled_sd: float | None
    cohens_d: float
    degenerate: bool = False


@dataclass(frozen=True)
class NormalityResult:
    W: float
    p: float


@dataclass(frozen=True)
class VarianceTestResult:
    F: float
    p: float


def _one_tailed(t: float, df: float, tail: Tail) -> tuple[float, float]:
    """(p, log10 p) for the requested direction."""
    if tail == "greater":
        return student_t_sf(t, df), log_student_t_sf(t, df) / LOG10
    if tail == "less":
        return student_t_sf(-t, df), log_student_t_sf(-t, df) / LOG10
    raise ValueError(f"tail must be 'greater' or 'less', got {tail!r}")


def student_t_test(a: Sample, b: Sample, tail: Tail = "greater") -> TTestResult:
    """Equal-variance two-sample t-test for equally sized samples.

    t = (mean_a - mean_b) / (s_p * sqrt(2/n)) with n1 + n2 - 2 degrees of
    freedom; Cohen's d is the mean difference over the pooled sd.
    """
    if a.n != b.n:
        raise ValueError(
            f"samples have sizes {a.n} and {b.n}; use welch_t_test for unequal sizes"
        )
    if a.n < 2:
        raise ValueError("t-test needs at least two values per sample")
    sp = pooled_sd(a, b)
    diff = a.mean - b.mean
    df = float(a.n + b.n - 2)
    if sp == 0.0:
        if diff == 0.0:
            return TTestResult(0.0, df, 0.5, math.log10(0.5), tail, sp, 0.0, degenerate=True)
        t = math.copysign(math.inf, diff)
        p = 0.0 if (tail == "greater") == (diff > 0) else 1.0
        log10_p = -math.inf if p == 0.0 else 0.0
        d = math.copysign(math.inf, diff)
        return TTestResult(t, df, p, log10_p, tail, sp, d, degenerate=True)
    t = diff / (sp * math.sqrt(1.0 / a.n + 1.0 / b.n))
    p, log10_p = _one_tailed(t, df, tail)
    return TTestResult(t, df, p, log10_p, tail, sp, diff / sp)


def welch_t_test(a: Sample, b: Sample, tail: Tail = "greater") -> TTestResult:
    """Unequal-variance t-test with Welch-Satterthwaite degrees of freedom.

    Cohen's d keeps the pooled-sd denominator so effect sizes stay on the
    same scale as the equal-variance branch.
    """
    if a.n < 2 or b.n < 2:
        raise ValueError("welch test needs at least two values per sample")
    va = a.variance / a.n
    vb = b.variance / b.n
    diff = a.mean - b.mean
    se2 = va + vb
    sp = pooled_sd(a, b)
    if se2 == 0.0:
        df = float(a.n + b.n - 2)
        if diff == 0.0:
            return TTestResult(0.0, df, 0.5, math.log10(0.5), tail, None, 0.0, degenerate=True)
        t = math.copysign(math.inf, diff)
        p = 0.0 if (tail == "greater") == (diff > 0) else 1.0
        log10_p = -math.inf if p == 0.0 else 0.0
        return TTestResult(t, df, p, log10_p, tail, None, math.copysign(math.inf, diff), degenerate=True)
    df = se2 * se2 / (va * va / (a.n - 1) + vb * vb / (b.n - 1))
    t = diff / math.sqrt(se2)
    p, log10_p = _one_tailed(t, df, tail)
    return TTestResult(t, df, p, log10_p, tail, None, diff / sp)


# Royston 1995 polynomial coefficients (AS R94), lowest order first.
_SW_C1 = (0.0, 0.221157, -0.147981, -2.071190, 4.434685, -2.706056)
_SW_C2 = (0.0, 0.042981, -0.293762, -1.752461, 5.682633, -3.582633)
_SW_C3 = (0.5440, -0.39978, 0.025054, -6.714e-4)
_SW_C4 = (1.3822, -0.77857, 0.062767, -0.0020322)
_SW_C5 = (-1.5861, -0.31082, -0.083751, 0.0038915)
_SW_C6 = (-0.4803, -0.082676, 0.0030302)


def _poly(coeffs: tuple[float, ...], x: float) -> float:
    acc = 0.0
    for c in reversed(coeffs):
        acc = acc * x + c
    return acc


def shapiro_wilk(sample: Sample) -> NormalityResult:
    """Shapiro-Wilk W and its p-value for 3 <= n <= 5000.

    Coefficients come from Blom-style normal scores with Royston's
    polynomial smoothing of the two outermost weights; the p-value uses the
    n <= 11 transform or the log-normal approximation for larger n.
    """
    n = sample.n
    if n < 3:
        raise ValueError(f"shapiro_wilk needs n >= 3, got {n}")
    if n > 5000:
        raise ValueError(f"shapiro_wilk supports n <= 5000, got {n}")
    x = sorted(sample.values)
    if x[-1] - x[0] == 0.0:
        raise ValueError("all sample values are identical; W is undefined")

    n2 = n // 2
    m = [normal_quantile((i - 0.375) / (n + 0.25)) for i in range(1, n2 + 1)]
    summ2 = 2.0 * sum(mi * mi for mi in m)
    ssumm2 = math.sqrt(summ2)
    rsn = 1.0 / math.sqrt(n)

    if n == 3:
        coeffs = [math.sqrt(0.5)]
    else:
        a1 = _poly(_SW_C1, rsn) - m[0] / ssumm2
        if n > 5:
            a2 = _poly(_SW_C2, rsn) - m[1] / ssumm2
            fac = math.sqrt(
                (summ2 - 2.0 * m[0] ** 2 - 2.0 * m[1] ** 2)
                / (1.0 - 2.0 * a1 * a1 - 2.0 * a2 * a2)
            )
            coeffs = [a1, a2] + [-mi / fac for mi in m[2:]]
        else:
            fac = math.sqrt((summ2 - 2.0 * m[0] ** 2) / (1.0 - 2.0 * a1 * a1))
            coeffs = [a1] + [-mi / fac for mi in m[1:]]

    mean = sum(x) / n
    ssq = sum((v - mean) ** 2 for v in x)
    sax = sum(c * (x[n - 1 - i] - x[i]) for i, c in enumerate(coeffs))
    w = min(sax * sax / ssq, 1.0)

    if n == 3:
        p = (6.0 / math.pi) * (math.asin(math.sqrt(w)) - math.asin(math.sqrt(0.75)))
        return NormalityResult(w, min(max(p, 0.0), 1.0))
    if n <= 11:
        gamma = -2.273 + 0.459 * n
        y = -math.log(gamma - math.log1p(-w))
        mu = _poly(_SW_C3, float(n))
        sigma = math.exp(_poly(_SW_C4, float(n)))
    else:
        y = math.log1p(-w)
        ln_n = math.log(n)
        mu = _poly(_SW_C5, ln_n)
        sigma = math.exp(_poly(_SW_C6, ln_n))
    return NormalityResult(w, normal_sf((y - mu) / sigma))


def levene(a: Sample, b: Sample, center: Literal["median", "mean"] = "median") -> VarianceTestResult:
    """Levene's variance-homogeneity test for two groups.

    A one-way ANOVA F on absolute deviations from the group centre, with
    (1, n1 + n2 - 2) degrees of freedom. Median centring (Brown-Forsythe),
    the default here and in the comparison report, is robust to skew;
    mean centring is the original Levene statistic.
    """
    if a.n < 2 or b.n < 2:
        raise ValueError("levene needs at least two values per group")
    groups = []
    for s in (a, b):
        if center == "median":
            ordered = sorted(s.values)
            mid = s.n // 2
            c = ordered[mid] if s.n % 2 else (ordered[mid - 1] + ordered[mid]) / 2.0
        elif center == "mean":
            c = s.mean
        else:
            raise ValueError(f"unknown centring {center!r}")
        groups.append([abs(v - c) for v in s.values])

    n_total = a.n + b.n
    k = 2
    grand = sum(sum(g) for g in groups) / n_total
    between = sum(len(g) * (sum(g) / len(g) - grand) ** 2 for g in groups) / (k - 1)
    within = sum(
        sum((z - sum(g) / len(g)) ** 2 for z in g) for g in groups
    ) / (n_total - k)
    if within == 0.0:
        if between == 0.0:
            return VarianceTestResult(0.0, 1.0)
        return VarianceTestResult(math.inf, 0.0)
    f = between / within
    return VarianceTestResult(f, f_sf(f, k - 1, n_total - k))
