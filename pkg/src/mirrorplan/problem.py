"""Bridges the mirror-arrangement geometry into the optimizer's problem shape."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import SQRT2, ArrangementSolution, DesignVector, SceneConfig, evaluate_design
from .harmony import ProblemSpec
from .validation import check_finite


@dataclass(frozen=True)
class DesignBounds:
    """Box bounds for the design variables; angles in degrees at this interface."""

    a: tuple[float, float] = (150.0, 400.0)
    b: tuple[float, float] = (150.0, 400.0)
    c: tuple[float, float] = (150.0, 400.0)
    theta1_deg: tuple[float, float] = (145.0, 180.0)

    def __post_init__(self):
        for name in ("a", "b", "c", "theta1_deg"):
            lo, hi = getattr(self, name)
            check_finite(f"{name} lower bound", lo)
            check_finite(f"{name} upper bound", hi)
            if not lo < hi:
                raise ValueError(f"{name} bounds must satisfy lower < upper, got ({lo}, {hi})")

    def lower_array(self) -> np.ndarray:
        return np.array([self.a[0], self.b[0], self.c[0], math.radians(self.theta1_deg[0])])

    def upper_array(self) -> np.ndarray:
        return np.array([self.a[1], self.b[1], self.c[1], math.radians(self.theta1_deg[1])])

    def contains(self, design: DesignVector, closed: bool = False) -> bool:
        """Whether the design lies inside the box (open by default)."""
        lo, hi = self.lower_array(), self.upper_array()
        x = design.to_array()
        if closed:
            return bool(np.all(x >= lo) and np.all(x <= hi))
        return bool(np.all(x > lo) and np.all(x < hi))


def objective_scales(bounds: DesignBounds) -> np.ndarray:
    """Normalization scales for the three objectives, derived from the bounds.

    f2 = b/sqrt(2) is bounded by b's upper bound exactly; f1 and f3 are path
    and extent lengths of the same order, bounded in practice by the sum of
    the three length upper bounds.
    """
    length_sum = bounds.a[1] + bounds.b[1] + bounds.c[1]
    return np.array([length_sum, bounds.b[1] / SQRT2, length_sum])


def make_problem(
    scene: SceneConfig,
    bounds: DesignBounds | None = None,
    equality_tolerance: float = 1e-6,
) -> ProblemSpec:
    """ProblemSpec whose evaluator derives the full arrangement as payload."""
    bounds = bounds or DesignBounds()

    def evaluator(x: np.ndarray):
        solution: ArrangementSolution = evaluate_design(scene, DesignVector.from_array(x))
        return solution.f, solution.g, solution

    return ProblemSpec(
        lower_bounds=bounds.lower_array(),
        upper_bounds=bounds.upper_array(),
        objective_count=3,
        constraint_count=6,
        evaluator=evaluator,
        equality_tolerance=equality_tolerance,
        objective_scales=objective_scales(bounds),
    )
