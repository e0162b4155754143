"""Self-contained frequentist statistics engine."""

from .descriptive import DescriptiveStats, Sample, describe, pooled_sd
from .report import ALPHA, MetricComparison, TestReport, run_full_comparison
from .special import (
    f_sf,
    log_reg_incomplete_beta,
    log_student_t_sf,
    normal_cdf,
    normal_quantile,
    normal_sf,
    reg_incomplete_beta,
    student_t_sf,
)
from .tests import (
    NormalityResult,
    TTestResult,
    VarianceTestResult,
    levene,
    shapiro_wilk,
    student_t_test,
    welch_t_test,
)

__all__ = [
    "ALPHA",
    "DescriptiveStats",
    "MetricComparison",
    "NormalityResult",
    "Sample",
    "TTestResult",
    "TestReport",
    "VarianceTestResult",
    "describe",
    "f_sf",
    "levene",
    "log_reg_incomplete_beta",
    "log_student_t_sf",
    "normal_cdf",
    "normal_quantile",
    "normal_sf",
    "pooled_sd",
    "reg_incomplete_beta",
    "run_full_comparison",
    "shapiro_wilk",
    "student_t_test",
    "student_t_sf",
    "welch_t_test",
]
