"""Constancy check for the mixed second derivative of one-step actions.

A one-step kernel built from an action can only be unitary (to leading
order in hbar) when det(d2 S / dx dy) is the same number everywhere. The
checker samples that determinant on a deterministic stratified grid of
(x, y) pairs and reports whether it is constant at a given tolerance.
"""

import math
from dataclasses import dataclass

import numpy as np

from .action import ActionModel

__all__ = ["CriterionReport", "CriterionError", "check_criterion", "check_linearized"]

# Below this magnitude the mean is treated as degenerate and the spread is
# reported absolutely instead of relatively.
DEGENERATE_MEAN = 1e-14

DEFAULT_SAMPLES = 1024
DEFAULT_TOLERANCE = 1e-8


class CriterionError(RuntimeError):
    """Action evaluator failed during sampling; message carries the coordinates."""


@dataclass(frozen=True)
class CriterionReport:
    samples: int
    det_min: float
    det_max: float
    det_mean: float
    relative_spread: float
    is_constant: bool
    tolerance: float
    trace_linearized: float | None = None

    def as_dict(self) -> dict:
        return {
            "samples": self.samples,
            "det_min": self.det_min,
            "det_max": self.det_max,
            "det_mean": self.det_mean,
            "relative_spread": self.relative_spread,
            "is_constant": self.is_constant,
            "tolerance": self.tolerance,
            "trace_linearized": self.trace_linearized,
        }


def _midpoints(lo: float, hi: float, m: int) -> np.ndarray:
    return lo + (np.arange(m) + 0.5) * (hi - lo) / m


def _sample_pairs(dimension: int, domain, n_samples: int):
    """Stratified midpoint grid over domain^2; deterministic and reproducible."""
    lo, hi = float(domain[0]), float(domain[1])
    if not hi > lo:
        raise ValueError(f"degenerate domain [{lo}, {hi}]")
    n_axes = 2 * dimension
    per_axis = max(2, math.ceil(n_samples ** (1.0 / n_axes)))
    t = _midpoints(lo, hi, per_axis)
    mesh = np.meshgrid(*([t] * n_axes), indexing="ij")
    cols = np.stack([m.ravel() for m in mesh], axis=-1)  # (S, 2 * dim)
    if dimension == 1:
        return cols[:, 0], cols[:, 1]
    return cols[:, :dimension], cols[:, dimension:]


def _locate_failure(model, xs, ys, original: Exception):
    # Re-evaluate sample by sample to attach coordinates to the failure.
    for xi, yi in zip(xs, ys):
        try:
            model.d2s_dxdy(xi, yi)
        except Exception as exc:
            raise CriterionError(f"action evaluator failed at x={xi}, y={yi}: {exc}") from exc
    raise original


def check_criterion(
    model: ActionModel,
    domain,
    n_samples: int = DEFAULT_SAMPLES,
    tolerance: float = DEFAULT_TOLERANCE,
) -> CriterionReport:
    """Sample det(d2 S / dx dy) over domain^2 and summarize its spread.

    ``domain`` is an interval (lo, hi) applied per axis. ``n_samples`` is a
    lower bound on the number of (x, y) pairs; the stratified grid rounds it
    up to a power of the per-axis resolution. The verdict ``is_constant`` is
    relative spread below ``tolerance``, except when the mean is degenerate,
    in which case the absolute spread is compared instead.
    """
    if n_samples < 16:
        raise ValueError(f"n_samples must be at least 16, got {n_samples}")
    xs, ys = _sample_pairs(model.dimension, domain, n_samples)
    try:
        mixed = np.asarray(model.d2s_dxdy(xs, ys), dtype=float)
    except Exception as exc:
        _locate_failure(model, xs, ys, exc)
        raise  # unreachable; _locate_failure always raises
    if model.dimension == 1:
        dets = mixed
    else:
        dets = mixed[..., 0, 0] * mixed[..., 1, 1] - mixed[..., 0, 1] * mixed[..., 1, 0]
    det_min = float(dets.min())
    det_max = float(dets.max())
    det_mean = float(dets.mean())
    spread = det_max - det_min
    if abs(det_mean) < DEGENERATE_MEAN:
        relative_spread = spread
    else:
        relative_spread = spread / abs(det_mean)
    trace = None
    if hasattr(model, "perturbation_mixed_trace"):
        trace = float(np.max(np.abs(model.perturbation_mixed_trace(xs, ys))))
    return CriterionReport(
        samples=int(dets.size),
        det_min=det_min,
        det_max=det_max,
        det_mean=det_mean,
        relative_spread=float(relative_spread),
        is_constant=bool(relative_spread < tolerance),
        tolerance=float(tolerance),
        trace_linearized=trace,
    )


def check_linearized(model, domain, n_samples: int = DEFAULT_SAMPLES) -> float:
    """Max over samples of |sum_a d2 s / dx_a dy_a| for a 2D perturbation.

    Accepts any object exposing ``perturbation_mixed_trace(x, y)`` over
    (..., 2) position arrays; raises TypeError for action kinds without a
    separable 2D perturbation.
    """
    trace_fn = getattr(model, "perturbation_mixed_trace", None)
    if trace_fn is None:
        kind = getattr(model, "kind", type(model).__name__)
        raise TypeError(f"action kind '{kind}' has no 2D perturbation to linearize")
    xs, ys = _sample_pairs(2, domain, n_samples)
    return float(np.max(np.abs(trace_fn(xs, ys))))
