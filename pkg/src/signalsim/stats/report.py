"""Full two-controller comparison: diagnostics, test choice, decisions.

Per metric: describe both groups, check normality (Shapiro-Wilk) and
variance homogeneity (Levene), then run the equal-variance t-test when
Levene retains homogeneity at the 0.05 level and Welch's test otherwise.
Directions are one-tailed: the adaptive controller is expected to pass
more vehicles and accumulate less wait.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .descriptive import DescriptiveStats, Sample, describe
from .tests import (
    NormalityResult,
    Tail,
    TTestResult,
    VarianceTestResult,
    levene,
    shapiro_wilk,
    student_t_test,
    welch_t_test,
)

ALPHA = 0.05


@dataclass(frozen=True)
class MetricComparison:
    metric: str
    tail: Tail
    fixed: DescriptiveStats
    marl: DescriptiveStats
    shapiro_fixed: NormalityResult
    shapiro_marl: NormalityResult
    levene: VarianceTestResult
    equal_variances: bool
    test_used: str
    ttest: TTestResult
    reject_null: bool

    def to_dict(self) -> dict:
        def desc(d: DescriptiveStats) -> dict:
            return {
                "n": d.n,
                "mean": d.mean,
                "std": d.std,
                "variance": d.variance,
                "min": d.minimum,
                "max": d.maximum,
                "median": d.median,
            }

        return {
            "metric": self.metric,
            "tail": self.tail,
            "fixed": desc(self.fixed),
            "marl": desc(self.marl),
            "shapiro_fixed": {"W": self.shapiro_fixed.W, "p": self.shapiro_fixed.p},
            "shapiro_marl": {"W": self.shapiro_marl.W, "p": self.shapiro_marl.p},
            "levene": {"F": self.levene.F, "p": self.levene.p},
            "equal_variances": self.equal_variances,
            "test_used": self.test_used,
            "t": self.ttest.t,
            "df": self.ttest.df,
            "p": self.ttest.p,
            "log10_p": self.ttest.log10_p,
            "pooled_sd": self.ttest.pooled_sd,
            "cohens_d": self.ttest.cohens_d,
            "alpha": ALPHA,
            "reject_null": self.reject_null,
        }


@dataclass(frozen=True)
class TestReport:
    vehicles: MetricComparison
    wait: MetricComparison

    def to_dict(self) -> dict:
        return {
            "alpha": ALPHA,
            "metrics": {
                "vehicles_passed": self.vehicles.to_dict(),
                "wait_time_s": self.wait.to_dict(),
            },
        }

    def render_text(self) -> str:
        lines: list[str] = []
        for comp in (self.vehicles, self.wait):
            direction = ">" if comp.tail == "greater" else "<"
            lines.append(f"=== {comp.metric} (H1: marl {direction} fixed) ===")
            for name, d in (("fixed", comp.fixed), ("marl", comp.marl)):
                lines.append(
                    f"  {name:5s} n={d.n} mean={d.mean:.2f} std={d.std:.2f} "
                    f"var={d.variance:.2f} min={d.minimum:.2f} max={d.maximum:.2f} "
                    f"median={d.median:.2f}"
                )
            lines.append(
                f"  shapiro fixed W={comp.shapiro_fixed.W:.3f} p={comp.shapiro_fixed.p:.3f}; "
                f"marl W={comp.shapiro_marl.W:.3f} p={comp.shapiro_marl.p:.3f}"
            )
            lines.append(
                f"  levene F={comp.levene.F:.3f} p={comp.levene.p:.3g} -> "
                f"{'equal' if comp.equal_variances else 'unequal'} variances, "
                f"{comp.test_used} t-test"
            )
            lines.append(
                f"  t={comp.ttest.t:.2f} df={comp.ttest.df:.2f} p={comp.ttest.p:.3g} "
                f"(log10 p = {comp.ttest.log10_p:.2f}) cohens_d={comp.ttest.cohens_d:.2f}"
            )
            verdict = "rejected" if comp.reject_null else "retained"
            lines.append(f"  null hypothesis {verdict} at alpha={ALPHA}")
            lines.append("")
        return "\n".join(lines)


def _compare(metric: str, fixed: Sample, marl: Sample, tail: Tail) -> MetricComparison:
    lev = levene(marl, fixed)
    equal_var = lev.p >= ALPHA
    if equal_var and marl.n == fixed.n:
        result = student_t_test(marl, fixed, tail)
        used = "student"
    else:
        result = welch_t_test(marl, fixed, tail)
        used = "welch"
    return MetricComparison(
        metric=metric,
        tail=tail,
        fixed=describe(fixed),
        marl=describe(marl),
        shapiro_fixed=shapiro_wilk(fixed),
        shapiro_marl=shapiro_wilk(marl),
        levene=lev,
        equal_variances=equal_var,
        test_used=used,
        ttest=result,
        reject_null=result.p < ALPHA,
    )


def run_full_comparison(fixed: Sequence, marl: Sequence) -> TestReport:
    """Compare two batches of run records on both performance metrics.

    ``fixed`` and ``marl`` are sequences of objects exposing
    ``vehicles_passed`` and ``total_wait``; at least three runs per side
    are required by the diagnostics.
    """
    if len(fixed) < 3 or len(marl) < 3:
        raise ValueError("run_full_comparison needs at least 3 runs per controller")
    fixed_vehicles = Sample.of((r.vehicles_passed for r in fixed), "fixed vehicles")
    marl_vehicles = Sample.of((r.vehicles_passed for r in marl), "marl vehicles")
    fixed_wait = Sample.of((r.total_wait for r in fixed), "fixed wait")
    marl_wait = Sample.of((r.total_wait for r in marl), "marl wait")
    return TestReport(
        vehicles=_compare("vehicles_passed", fixed_vehicles, marl_vehicles, "greater"),
        wait=_compare("wait_time_s", fixed_wait, marl_wait, "less"),
    )
