"""Samples and descriptive statistics."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable


@dataclass(frozen=True)
class Sample:
    values: tuple[float, ...]
    label: str = ""

    def __post_init__(self) -> None:
        if len(self.values) < 1:
            raise ValueError(f"sample {self.label!r} is empty")
        if not all(math.isfinite(v) for v in self.values):
            raise ValueError(f"sample {self.label!r} contains non-finite values")

    @classmethod
    def of(cls, values: Iterable[float], label: str = "") -> "Sample":
        return cls(tuple(float(v) for v in values), label)

    @property
    def n(self) -> int:
        return len(self.values)

    @property
    def mean(self) -> float:
        return sum(self.values) / self.n

    @property
    def variance(self) -> float:
        """Sample variance with n-1 denominator; 0.0 for singletons."""
        if self.n < 2:
            return 0.0
        m = self.mean
        return sum((v - m) ** 2 for v in self.values) / (self.n - 1)

    @property
    def std(self) -> float:
        return math.sqrt(self.variance)


@dataclass(frozen=True)
class DescriptiveStats:
    n: int
    mean: float
    std: float
    variance: float
    minimum: float
    maximum: float
    median: float

    @property
    def std_defined(self) -> bool:
        """False for singletons, where the n-1 estimator has no meaning."""
        return self.n >= 2


def describe(sample: Sample) -> DescriptiveStats:
    """n, mean, n-1 standard deviation and variance, extrema, median."""
    ordered = sorted(sample.values)
    n = len(ordered)
    mid = n // 2
    median = ordered[mid] if n % 2 else (ordered[mid - 1] + ordered[mid]) / 2.0
    return DescriptiveStats(
        n=n,
        mean=sample.mean,
        std=sample.std,
        variance=sample.variance,
        minimum=ordered[0],
        maximum=ordered[-1],
        median=median,
    )


def pooled_sd(a: Sample, b: Sample) -> float:
    """Pooled standard deviation of two samples under equal variances."""
    if a.n < 2 or b.n < 2:
        raise ValueError("pooled sd needs at least two values per sample")
    num = (a.n - 1) * a.variance + (b.n - 1) * b.variance
    return math.sqrt(num / (a.n + b.n - 2))
