"""Quantum-classical correspondence experiments.

Ehrenfest tracking follows lattice expectation values of an evolving packet
against the discrete classical trajectory started from the same (x0, p0);
the hbar sweep repeats the experiment on re-tuned grids to show the
deviation shrinking as hbar does; the gauge run verifies that a phase
difference in the action is invisible in position densities.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .action import ActionModel, GaugedAction, StandardAction
from .classical import (
    ClassicalTrajectory,
    NumericalError,
    TrajectoryStatus,
    integrate,
    invert_momentum,
)
from .grid import SpatialGrid, apply_gauge_phase, make_gaussian, make_grid
from .potentials import GaugePhase, Potential
from .propagator import build_kernel, evolve

__all__ = [
    "BoundaryError",
    "EhrenfestSeries",
    "CorrespondenceReport",
    "ehrenfest_run",
    "hbar_sweep",
    "gauge_equivalence_run",
]

BOUNDARY_SIGMAS = 5.0
MONOTONE_SLACK = 1e-6


class BoundaryError(RuntimeError):
    """The packet's safety envelope reaches the box edge during the run."""

    def __init__(self, step: int, message: str):
        super().__init__(message)
        self.step = step


@dataclass
class EhrenfestSeries:
    """Per-step observables of an evolving packet, plus the classical track."""

    steps: np.ndarray
    x_mean: np.ndarray
    p_mean: np.ndarray
    x_spread: np.ndarray
    norm: np.ndarray
    x_classical: np.ndarray | None = None
    p_classical: np.ndarray | None = None

    def max_position_deviation(self) -> float:
        if self.x_classical is None:
            raise ValueError("series has no classical reference")
        return float(np.max(np.abs(self.x_mean - self.x_classical)))

    def max_momentum_deviation(self) -> float:
        if self.p_classical is None:
            raise ValueError("series has no classical reference")
        return float(np.max(np.abs(self.p_mean - self.p_classical)))


def _observables(amps: np.ndarray, xs: np.ndarray, weight: float, dx: float, hbar: float):
    """Mean position/momentum, spread, and norm; means divided by the norm.

    Normalizing by the current norm keeps the series meaningful even when a
    non-magic time step lets the norm drift.
    """
    dens = np.abs(amps) ** 2
    nsq = weight * float(dens.sum())
    x_mean = weight * float((xs * dens).sum()) / nsq
    x_sq = weight * float((xs * xs * dens).sum()) / nsq
    dpsi = (np.roll(amps, -1) - np.roll(amps, 1)) / (2.0 * dx)
    p_mean = (weight * np.vdot(amps, -1j * hbar * dpsi)).real / nsq
    return x_mean, p_mean, math.sqrt(max(x_sq - x_mean * x_mean, 0.0)), math.sqrt(nsq)


def ehrenfest_run(
    model: ActionModel,
    grid: SpatialGrid,
    x0: float,
    p0: float,
    alpha: float = 1.0,
    n_steps: int = 50,
    amplitude_mode: str = "analytic",
    boundary_check: bool = True,
    include_classical: bool = True,
) -> EhrenfestSeries:
    """Evolve a Gaussian packet and record observables each step.

    The classical seed x_{-1} comes from inverting the discrete momentum map
    at (x0, p0). Boundary safety is estimated before evolving: the classical
    excursion plus a 5 sigma packet envelope has to stay inside the box for
    the whole run, otherwise BoundaryError reports the first offending step.
    The exact-unitarity time step is the intended operating point; other
    steps are allowed but exact norm preservation is then lost.
    """
    if model.dimension != 1 or grid.dimension != 1:
        raise ValueError("ehrenfest runs are one-dimensional")
    hbar = model.constants.hbar
    sigma = alpha * math.sqrt(hbar / 2.0)

    if n_steps < 0:
        raise ValueError(f"n_steps must be non-negative, got {n_steps}")
    trajectory = None
    if include_classical or boundary_check:
        x_m1 = invert_momentum(model, x0, p0)
        trajectory = integrate(model, x0, x_m1, max(n_steps, 1))
        if trajectory.status is not TrajectoryStatus.COMPLETE:
            raise NumericalError(f"classical reference failed: {trajectory.label()}")
        if n_steps == 0:
            trajectory = ClassicalTrajectory(
                times=trajectory.times[:1],
                positions=trajectory.positions[:1],
                momenta=trajectory.momenta[:1],
                residuals=trajectory.residuals[:1],
                status=trajectory.status,
            )
    if boundary_check:
        lo = grid.x_min[0]
        hi = lo + grid.extent[0]
        for n, xc in enumerate(trajectory.positions):
            if xc - BOUNDARY_SIGMAS * sigma < lo or xc + BOUNDARY_SIGMAS * sigma > hi:
                raise BoundaryError(
                    n, f"{BOUNDARY_SIGMAS:.0f}-sigma envelope reaches the box edge at step {n}"
                )

    kernel = build_kernel(grid, model, amplitude_mode)
    psi = make_gaussian(grid, x0, p0, alpha, hbar)
    xs = grid.axis_points(0)
    n_record = n_steps + 1
    x_mean = np.empty(n_record)
    p_mean = np.empty(n_record)
    x_spread = np.empty(n_record)
    norms = np.empty(n_record)
    for n in range(n_record):
        x_mean[n], p_mean[n], x_spread[n], norms[n] = _observables(
            psi.amplitudes, xs, grid.weight, grid.spacing[0], hbar
        )
        if n < n_steps:
            psi = evolve(kernel, psi)
    return EhrenfestSeries(
        steps=np.arange(n_record),
        x_mean=x_mean,
        p_mean=p_mean,
        x_spread=x_spread,
        norm=norms,
        x_classical=None if trajectory is None else trajectory.positions.copy(),
        p_classical=None if trajectory is None else trajectory.momenta.copy(),
    )


@dataclass
class CorrespondenceReport:
    """Deviation-versus-hbar summary of a sweep."""

    hbar_values: tuple[float, ...]
    max_deviation: tuple[float, ...]
    monotone_flag: bool
    finest: EhrenfestSeries | None
    errors: dict[float, str] = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {
            "hbar_values": list(self.hbar_values),
            "max_deviation": list(self.max_deviation),
            "monotone_flag": self.monotone_flag,
            "errors": {repr(k): v for k, v in self.errors.items()},
        }


def _sweep_grid(hbar: float, mass: float, tau: float, n_points: int, center: float) -> SpatialGrid:
    # Invert the exact-unitarity relation: spacing such that tau is the
    # magic step for this hbar on an n_points lattice.
    dx = math.sqrt(2.0 * math.pi * hbar * tau / (mass * n_points))
    return make_grid(n_points, center - 0.5 * n_points * dx, dx)


def hbar_sweep(
    make_model,
    hbars,
    x0: float,
    p0: float,
    n_steps: int,
    n_points: int,
    alpha: float = 1.0,
    max_workers: int = 0,
) -> CorrespondenceReport:
    """Run Ehrenfest tracking for each hbar and compare against one classical track.

    ``make_model(hbar)`` must return action models sharing mass, time step,
    and potential, so the classical trajectory (which never sees hbar) is
    common to the whole sweep. Each run gets its own grid: the spacing is
    retuned so the shared time step is that grid's exact-unitarity step, and
    the packet width alpha sqrt(hbar / 2) shrinks along with hbar. Per-run
    failures are recorded and the sweep continues.
    """
    hbars = [float(h) for h in hbars]
    if len(hbars) < 3:
        raise ValueError(f"a sweep needs at least 3 hbar values, got {len(hbars)}")
    if any(h <= 0 for h in hbars):
        raise ValueError("hbar values must be positive")
    if any(b >= a for a, b in zip(hbars, hbars[1:])):
        raise ValueError("hbar values must be strictly descending")

    models = [make_model(h) for h in hbars]
    mass = models[0].constants.mass
    tau = models[0].constants.time_step
    for m in models[1:]:
        if abs(m.constants.mass - mass) > 1e-12 * mass or abs(m.constants.time_step - tau) > 1e-12 * tau:
            raise ValueError("sweep models must share mass and time step")

    reference = integrate(models[0], x0, invert_momentum(models[0], x0, p0), n_steps)
    if reference.status is not TrajectoryStatus.COMPLETE:
        raise NumericalError(f"classical reference failed: {reference.label()}")
    center = 0.5 * (float(reference.positions.min()) + float(reference.positions.max()))

    def run_one(index: int):
        h = hbars[index]
        grid = _sweep_grid(h, mass, tau, n_points, center)
        return ehrenfest_run(models[index], grid, x0, p0, alpha, n_steps)

    results: list[EhrenfestSeries | None] = [None] * len(hbars)
    errors: dict[float, str] = {}

    def guarded(index: int):
        try:
            return index, run_one(index), None
        except (BoundaryError, NumericalError, ValueError) as exc:
            return index, None, f"{type(exc).__name__}: {exc}"

    if max_workers and max_workers > 1:
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            outcomes = list(pool.map(guarded, range(len(hbars))))
    else:
        outcomes = [guarded(i) for i in range(len(hbars))]
    for index, series, error in outcomes:
        if error is None:
            results[index] = series
        else:
            errors[hbars[index]] = error

    deviations = []
    for series in results:
        if series is None:
            deviations.append(float("nan"))
        else:
            deviations.append(float(np.max(np.abs(series.x_mean - reference.positions))))

    finite = [d for d in deviations if not math.isnan(d)]
    monotone = len(finite) == len(deviations) and all(
        b <= a + MONOTONE_SLACK for a, b in zip(finite, finite[1:])
    )
    finest = next((s for s in reversed(results) if s is not None), None)
    return CorrespondenceReport(
        hbar_values=tuple(hbars),
        max_deviation=tuple(deviations),
        monotone_flag=monotone,
        finest=finest,
        errors=errors,
    )


def gauge_equivalence_run(
    grid: SpatialGrid,
    constants,
    potential: Potential,
    phase: GaugePhase,
    x0: float,
    p0: float,
    alpha: float = 1.0,
    n_steps: int = 100,
    amplitude_mode: str = "analytic",
) -> float:
    """Max pointwise density discrepancy between gauged and plain evolutions.

    With the gauge term phi(x) - phi(y) added to the action, the gauged
    kernel is exactly Phi U Phi^dagger with Phi = diag(exp(i phi(x_j)/hbar)).
    Starting run B from Phi psi (applied here as a gauge phase with -phi)
    makes the two position densities agree to roundoff at every step; the
    returned number is the worst disagreement seen.
    """
    hbar = constants.hbar
    plain = StandardAction(constants, potential)
    gauged = GaugedAction(constants, potential, phase)
    kernel_a = build_kernel(grid, plain, amplitude_mode)
    kernel_b = build_kernel(grid, gauged, amplitude_mode)
    psi_a = make_gaussian(grid, x0, p0, alpha, hbar)
    psi_b = apply_gauge_phase(psi_a, lambda x: -np.asarray(phase.phi(x), dtype=float), hbar)
    worst = 0.0
    for _ in range(n_steps + 1):
        diff = float(
            np.max(np.abs(np.abs(psi_a.amplitudes) ** 2 - np.abs(psi_b.amplitudes) ** 2))
        )
        worst = max(worst, diff)
        psi_a = evolve(kernel_a, psi_a)
        psi_b = evolve(kernel_b, psi_b)
    return worst
