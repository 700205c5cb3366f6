"""Dense one-step evolution kernels built from an action's phase.

The kernel matrix is U_jk = w A exp(i S(x_j, x_k) / hbar) with w the cell
weight, so every entry has the same magnitude w |A| and all structure lives
in the phase. Unitarity is quantified by the max-row-sum norm of
U U^dagger - I, which bounds the worst-case action on normalized states.
"""

import cmath
import math

import numpy as np
from scipy.optimize import minimize_scalar

from .action import ActionModel, StandardAction
from .grid import SpatialGrid, WaveState, momentum_matrix

__all__ = [
    "PropagatorKernel",
    "CalibrationError",
    "magic_time_step",
    "analytic_amplitude",
    "unitarity_defect",
    "build_kernel",
    "evolve",
    "multi_step_pathsum",
    "momentum_identity_residual",
]

MAX_POINTS_1D = 1024
MAX_POINTS_PER_AXIS_2D = 48
PATHSUM_MAX_POINTS = 64
CALIBRATION_SCAN = 41


class CalibrationError(RuntimeError):
    """Amplitude calibration could not locate a usable minimum.

    ``scan`` holds the (magnitude, deviation) pairs that were evaluated.
    """

    def __init__(self, message: str, scan):
        super().__init__(message)
        self.scan = list(scan)


class PropagatorKernel:
    """One-step evolution matrix with its calibrated amplitude and defect."""

    __slots__ = ("grid", "model", "amplitude", "matrix", "unitarity_deviation")

    def __init__(self, grid, model, amplitude, matrix, unitarity_deviation):
        self.grid = grid
        self.model = model
        self.amplitude = amplitude
        matrix.flags.writeable = False
        self.matrix = matrix
        self.unitarity_deviation = unitarity_deviation


def magic_time_step(grid: SpatialGrid, mass: float, hbar: float) -> float:
    """Time step making the free kinetic kernel an exact lattice unitary.

    At tau = m dx L / (2 pi hbar) the kinetic phase between points j and k
    is pi (j - k)^2 / N; the cross terms in U U^dagger then reduce to plain
    geometric sums that cancel exactly for j != k, for every N.
    """
    values = [mass * grid.spacing[a] * grid.extent[a] / (2.0 * math.pi * hbar) for a in range(grid.dimension)]
    if grid.dimension == 2 and abs(values[0] - values[1]) > 1e-12 * max(values):
        raise ValueError(f"axes disagree on the exact-unitarity step: {values[0]} vs {values[1]}")
    return values[0]


def analytic_amplitude(model: ActionModel) -> complex:
    """Continuum stationary-phase amplitude, one factor of e^{-i pi/4} per axis."""
    c = model.constants
    d = model.dimension
    magnitude = (c.mass / (2.0 * math.pi * c.hbar * c.time_step)) ** (d / 2.0)
    return cmath.exp(-1j * math.pi * d / 4.0) * magnitude


def unitarity_defect(matrix: np.ndarray) -> float:
    """Max-row-sum norm of U U^dagger - I."""
    product = matrix @ matrix.conj().T
    product[np.diag_indices_from(product)] -= 1.0
    return float(np.abs(product).sum(axis=1).max())


def _phase_matrix(grid: SpatialGrid, model: ActionModel) -> np.ndarray:
    if grid.dimension == 1:
        x = grid.axis_points(0)
        action = model.s(x[:, None], x[None, :])
    else:
        pts = grid.coordinates
        action = model.s(pts[:, None, :], pts[None, :, :])
    return np.exp(1j * np.asarray(action, dtype=float) / model.constants.hbar)


def _calibrate_magnitude(phases: np.ndarray, weight: float, center: float):
    """Minimize the unitarity defect over |A| in [0.5, 1.5] x analytic value.

    Returns (magnitude, scan). The scan is a coarse deterministic sweep; the
    best point is refined between its neighbors. Heavily non-unitary kernels
    have their best magnitude at the lower bracket edge, and that edge value
    is returned; only a non-finite defect landscape raises CalibrationError.
    """
    gram = phases @ phases.conj().T

    def defect(magnitude: float) -> float:
        scaled = (weight * magnitude) ** 2 * gram
        scaled = scaled.copy()
        scaled[np.diag_indices_from(scaled)] -= 1.0
        return float(np.abs(scaled).sum(axis=1).max())

    magnitudes = np.linspace(0.5 * center, 1.5 * center, CALIBRATION_SCAN)
    scan = [(float(a), defect(float(a))) for a in magnitudes]
    values = np.array([v for _, v in scan])
    if not np.all(np.isfinite(values)):
        raise CalibrationError("unitarity defect is not finite across the calibration bracket", scan)
    best = int(np.argmin(values))
    lo = magnitudes[max(best - 1, 0)]
    hi = magnitudes[min(best + 1, CALIBRATION_SCAN - 1)]
    result = minimize_scalar(defect, bounds=(float(lo), float(hi)), method="bounded")
    magnitude = float(result.x)
    if defect(magnitude) > values[best]:
        magnitude = float(magnitudes[best])
    return magnitude, scan


def build_kernel(grid: SpatialGrid, model: ActionModel, amplitude_mode: str = "analytic") -> PropagatorKernel:
    """Assemble the one-step kernel and record its unitarity deviation.

    ``analytic`` mode uses the continuum stationary-phase amplitude and is
    restricted to the standard/gauged family, where that value is exact at
    the magic time step. ``calibrated`` mode fixes the phase and fits the
    magnitude by minimizing the recorded deviation inside a +-50% bracket
    around the analytic value; it accepts any action kind, including the
    inadmissible probes (whose deviation stays large no matter the
    magnitude).
    """
    if grid.dimension != model.dimension:
        raise ValueError(f"grid dimension {grid.dimension} != action dimension {model.dimension}")
    if grid.dimension == 1 and grid.n_total > MAX_POINTS_1D:
        raise ValueError(f"1D kernels are limited to {MAX_POINTS_1D} points, got {grid.n_total}")
    if grid.dimension == 2 and max(grid.shape) > MAX_POINTS_PER_AXIS_2D:
        raise ValueError(
            f"2D kernels are limited to {MAX_POINTS_PER_AXIS_2D} points per axis, got {grid.shape}"
        )
    phases = _phase_matrix(grid, model)
    reference = analytic_amplitude(model)
    if amplitude_mode == "analytic":
        if not isinstance(model, StandardAction):
            raise ValueError(
                f"analytic amplitude mode requires the standard/gauged family, got '{model.kind}'"
            )
        amplitude = reference
    elif amplitude_mode == "calibrated":
        magnitude, _ = _calibrate_magnitude(phases, grid.weight, abs(reference))
        amplitude = (reference / abs(reference)) * magnitude
    else:
        raise ValueError(f"unknown amplitude mode '{amplitude_mode}'")
    matrix = grid.weight * amplitude * phases
    return PropagatorKernel(grid, model, complex(amplitude), matrix, unitarity_defect(matrix))


def evolve(kernel: PropagatorKernel, psi: WaveState) -> WaveState:
    """Advance a state by one step: psi' = U psi."""
    if psi.grid != kernel.grid:
        raise ValueError("state and kernel live on different grids")
    return WaveState(kernel.grid, kernel.matrix @ psi.amplitudes, psi.warnings)


def _point(grid: SpatialGrid, index: int):
    if grid.dimension == 1:
        return float(grid.axis_points(0)[index])
    return grid.coordinates[index]


def multi_step_pathsum(kernel: PropagatorKernel, k_steps: int, x_initial_index: int, x_final_index: int) -> complex:
    """Brute-force nested quadrature over intermediate positions.

    Sums exp(i (S(x_f, x_m) + ... + S(x_m', x_i)) / hbar) over every chain of
    k_steps - 1 intermediate lattice points, one cell weight per integration
    variable plus one for the kernel convention, and amplitude A^k. This is
    an independent oracle for the composition law: the result must match the
    (final, initial) element of the k-th matrix power.
    """
    grid = kernel.grid
    if grid.n_total > PATHSUM_MAX_POINTS:
        raise ValueError(f"path sum limited to {PATHSUM_MAX_POINTS} grid points, got {grid.n_total}")
    if not 1 <= k_steps <= 3:
        raise ValueError(f"k_steps must be 1, 2, or 3, got {k_steps}")
    model = kernel.model
    hbar = model.constants.hbar
    n = grid.n_total
    x_i = _point(grid, x_initial_index)
    x_f = _point(grid, x_final_index)

    def step_phase(a, b) -> complex:
        return cmath.exp(1j * float(model.s(a, b)) / hbar)

    if k_steps == 1:
        total = step_phase(x_f, x_i)
    elif k_steps == 2:
        total = 0.0 + 0.0j
        for m in range(n):
            x_m = _point(grid, m)
            total += step_phase(x_f, x_m) * step_phase(x_m, x_i)
    else:
        total = 0.0 + 0.0j
        for m1 in range(n):
            x_m1 = _point(grid, m1)
            left = step_phase(x_f, x_m1)
            for m2 in range(n):
                x_m2 = _point(grid, m2)
                total += left * step_phase(x_m1, x_m2) * step_phase(x_m2, x_i)
    return (grid.weight**k_steps) * (kernel.amplitude**k_steps) * total


def momentum_identity_residual(kernel: PropagatorKernel, psi_test: WaveState) -> float:
    """Relative residual of the translation-generator identity.

    Builds D_jk = sum_l conj(U_lj) (dS/dy)(x_l, x_k) U_lk, which for a
    unitary kernel acts on smooth states as minus the momentum operator, and
    returns ||D psi + P psi|| / ||P psi|| with P the central-difference
    momentum matrix. The residual is dominated by the O(dx^2) truncation of
    P, so a broad packet on a fine grid is the intended test state.
    """
    grid = kernel.grid
    if grid.dimension != 1:
        raise ValueError("the momentum identity check is one-dimensional")
    if psi_test.grid != grid:
        raise ValueError("test state and kernel live on different grids")
    model = kernel.model
    x = grid.axis_points(0)
    grad_y = np.asarray(model.ds_dy(x[:, None], x[None, :]), dtype=float)
    d_matrix = kernel.matrix.conj().T @ (grad_y * kernel.matrix)
    p_matrix = momentum_matrix(grid, model.constants.hbar)
    p_psi = p_matrix @ psi_test.amplitudes
    d_psi = d_matrix @ psi_test.amplitudes
    return float(np.linalg.norm(d_psi + p_psi) / np.linalg.norm(p_psi))
