"""Uniform periodic position lattices, wavefunctions, and lattice observables.

All integrals over position are realized as rectangle-rule sums with the
cell weight prod(spacing); the lattice is periodic, so the extent of an
axis counts the wrap interval (L = n * dx, not (n-1) * dx).
"""

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

__all__ = [
    "SpatialGrid",
    "WaveState",
    "make_grid",
    "make_grid_2d",
    "inner",
    "norm",
    "expect_x",
    "expect_p",
    "position_spread",
    "make_gaussian",
    "apply_gauge_phase",
    "momentum_matrix",
]

# Construction-time accuracy for states labeled "normalized".
NORMALIZED_TOL = 1e-12
# Run-time drift allowed before expectation values refuse the input.
NORM_PRECONDITION_TOL = 1e-6


@dataclass(frozen=True)
class SpatialGrid:
    """Uniform lattice with periodic topology, one or two axes.

    Points along axis a are x_min[a] + j * spacing[a] for 0 <= j < shape[a].
    Two-dimensional grids are the Cartesian product of two 1D axes, stored
    row-major over (axis 0, axis 1) with a single flat index; every module
    that flattens 2D data uses this same order.
    """

    shape: tuple[int, ...]
    x_min: tuple[float, ...]
    spacing: tuple[float, ...]
    boundary: str = "periodic"

    @property
    def dimension(self) -> int:
        return len(self.shape)

    @property
    def n_total(self) -> int:
        return int(np.prod(self.shape))

    @property
    def extent(self) -> tuple[float, ...]:
        return tuple(n * d for n, d in zip(self.shape, self.spacing))

    @property
    def weight(self) -> float:
        """Quadrature weight of one lattice cell."""
        return float(np.prod(self.spacing))

    def axis_points(self, axis: int = 0) -> np.ndarray:
        return self.x_min[axis] + self.spacing[axis] * np.arange(self.shape[axis])

    @cached_property
    def coordinates(self) -> np.ndarray:
        """All lattice points as an (n_total, dimension) array, flat row-major order."""
        axes = [self.axis_points(a) for a in range(self.dimension)]
        mesh = np.meshgrid(*axes, indexing="ij")
        pts = np.stack([m.ravel() for m in mesh], axis=-1)
        pts.flags.writeable = False
        return pts


def make_grid(n_points: int, x_min: float, spacing: float) -> SpatialGrid:
    """Build a 1D periodic lattice of n_points cells of size spacing."""
    if n_points < 4:
        raise ValueError(f"n_points must be at least 4, got {n_points}")
    if not spacing > 0:
        raise ValueError(f"spacing must be positive, got {spacing}")
    return SpatialGrid((int(n_points),), (float(x_min),), (float(spacing),))


def make_grid_2d(shape, x_min, spacing) -> SpatialGrid:
    """Build a 2D lattice as the product of two 1D axes.

    Each argument may be a scalar (shared by both axes) or a pair.
    """
    ns = np.broadcast_to(np.asarray(shape, dtype=int), (2,))
    x0 = np.broadcast_to(np.asarray(x_min, dtype=float), (2,))
    dx = np.broadcast_to(np.asarray(spacing, dtype=float), (2,))
    if np.any(ns < 4):
        raise ValueError(f"each axis needs at least 4 points, got {tuple(ns)}")
    if np.any(dx <= 0):
        raise ValueError(f"spacings must be positive, got {tuple(dx)}")
    return SpatialGrid(tuple(int(n) for n in ns), tuple(map(float, x0)), tuple(map(float, dx)))


@dataclass(frozen=True, eq=False)
class WaveState:
    """Complex amplitudes over a grid; immutable after construction.

    ``warnings`` carries non-fatal quality flags (for instance a Gaussian
    packet too narrow for the lattice); it never affects the numerics.
    """

    grid: SpatialGrid
    amplitudes: np.ndarray
    warnings: tuple[str, ...] = ()

    def __post_init__(self):
        amps = np.array(self.amplitudes, dtype=complex)
        if amps.shape != (self.grid.n_total,):
            raise ValueError(
                f"amplitudes shape {amps.shape} does not match grid size {self.grid.n_total}"
            )
        if not np.all(np.isfinite(amps.view(float))):
            raise ValueError("amplitudes must be finite")
        amps.flags.writeable = False
        object.__setattr__(self, "amplitudes", amps)


def _require_same_grid(a: WaveState, b: WaveState) -> None:
    if a.grid != b.grid:
        raise ValueError("wave states live on different grids")


def inner(a: WaveState, b: WaveState) -> complex:
    """Quadrature inner product <a|b>; conjugates the first argument."""
    _require_same_grid(a, b)
    return complex(a.grid.weight * np.vdot(a.amplitudes, b.amplitudes))


def norm(psi: WaveState) -> float:
    return math.sqrt(inner(psi, psi).real)


def _require_normalized(psi: WaveState, tol: float = NORM_PRECONDITION_TOL) -> None:
    n = norm(psi)
    if abs(n - 1.0) > tol:
        raise ValueError(f"state is not normalized: |norm - 1| = {abs(n - 1.0):.3e} > {tol:.0e}")


def expect_x(psi: WaveState) -> np.ndarray:
    """Mean position, one entry per axis."""
    _require_normalized(psi)
    dens = psi.grid.weight * np.abs(psi.amplitudes) ** 2
    return psi.grid.coordinates.T @ dens


def _shift_difference(psi: WaveState, axis: int) -> np.ndarray:
    """Central difference with periodic wraparound, flattened."""
    arr = psi.amplitudes.reshape(psi.grid.shape)
    d = (np.roll(arr, -1, axis=axis) - np.roll(arr, 1, axis=axis)) / (2.0 * psi.grid.spacing[axis])
    return d.ravel()


def expect_p(psi: WaveState, hbar: float = 1.0) -> np.ndarray:
    """Mean momentum per axis, from the central-difference translation generator.

    The operator is Hermitian by construction, so the result is real up to
    roundoff; only the real part is returned. Meaningful for states that are
    normalized and localized away from the wrap seam (documented contract,
    not enforced).
    """
    w = psi.grid.weight
    out = []
    for axis in range(psi.grid.dimension):
        dpsi = -1j * hbar * _shift_difference(psi, axis)
        out.append((w * np.vdot(psi.amplitudes, dpsi)).real)
    return np.array(out)


def position_spread(psi: WaveState) -> np.ndarray:
    """Standard deviation of position per axis."""
    _require_normalized(psi)
    dens = psi.grid.weight * np.abs(psi.amplitudes) ** 2
    mean = psi.grid.coordinates.T @ dens
    second = (psi.grid.coordinates**2).T @ dens
    return np.sqrt(np.maximum(second - mean**2, 0.0))


def _per_axis(value, dim: int) -> np.ndarray:
    return np.broadcast_to(np.asarray(value, dtype=float), (dim,))


def make_gaussian(grid: SpatialGrid, x0, p0, alpha, hbar: float) -> WaveState:
    """Minimum-uncertainty Gaussian packet, numerically normalized to 1.

    Parameters
    ----------
    grid : SpatialGrid
    x0, p0 : float or pair
        Mean position and momentum per axis.
    alpha : float or pair
        Width parameter; the position spread per axis is alpha * sqrt(hbar / 2)
        and the momentum spread is sqrt(hbar / 2) / alpha.
    hbar : float

    Packets too narrow for the lattice (sigma < 2 dx) or too wide for the box
    (sigma > L / 8) are still built but flagged through ``WaveState.warnings``.
    """
    if not hbar > 0:
        raise ValueError(f"hbar must be positive, got {hbar}")
    dim = grid.dimension
    x0v = _per_axis(x0, dim)
    p0v = _per_axis(p0, dim)
    alphav = _per_axis(alpha, dim)
    if np.any(alphav <= 0):
        raise ValueError(f"alpha must be positive, got {alpha}")

    pts = grid.coordinates
    log_env = np.zeros(grid.n_total)
    phase = np.zeros(grid.n_total)
    flags: list[str] = []
    for a in range(dim):
        sigma = alphav[a] * math.sqrt(hbar / 2.0)
        if sigma < 2.0 * grid.spacing[a]:
            flags.append(
                f"axis {a}: width {sigma:.4g} below resolvable limit {2.0 * grid.spacing[a]:.4g}"
            )
        if sigma > grid.extent[a] / 8.0:
            flags.append(
                f"axis {a}: width {sigma:.4g} above boundary-safe limit {grid.extent[a] / 8.0:.4g}"
            )
        d = pts[:, a] - x0v[a]
        log_env -= d * d / (4.0 * sigma * sigma)
        phase += p0v[a] * pts[:, a] / hbar
    amps = np.exp(log_env + 1j * phase)
    amps /= math.sqrt(grid.weight * float(np.sum(np.abs(amps) ** 2)))
    return WaveState(grid, amps, tuple(flags))


def apply_gauge_phase(psi: WaveState, phi, hbar: float) -> WaveState:
    """Multiply by exp(-i phi(x) / hbar) pointwise; preserves every |psi_j|.

    ``phi`` is either a callable evaluated on the lattice points (1D arrays
    for 1D grids, (n, 2) rows for 2D grids) or an array of per-point values.
    """
    if not hbar > 0:
        raise ValueError(f"hbar must be positive, got {hbar}")
    grid = psi.grid
    if callable(phi):
        arg = grid.coordinates[:, 0] if grid.dimension == 1 else grid.coordinates
        values = np.asarray(phi(arg), dtype=float)
        values = np.broadcast_to(values, (grid.n_total,))
    else:
        values = np.asarray(phi, dtype=float)
        if values.shape != (grid.n_total,):
            raise ValueError(f"phase field shape {values.shape} != ({grid.n_total},)")
    if not np.all(np.isfinite(values)):
        raise ValueError("phase field must be finite on all grid points")
    return WaveState(grid, psi.amplitudes * np.exp(-1j * values / hbar), psi.warnings)


def momentum_matrix(grid: SpatialGrid, hbar: float, axis: int = 0) -> np.ndarray:
    """Dense central-difference momentum matrix with periodic wraparound.

    Exactly Hermitian: the only nonzero entries are -i hbar / (2 dx) one step
    above the diagonal and its conjugate one step below (cyclically).
    """
    n = grid.shape[axis]
    p = np.zeros((n, n), dtype=complex)
    coeff = -1j * hbar / (2.0 * grid.spacing[axis])
    idx = np.arange(n)
    p[idx, (idx + 1) % n] = coeff
    p[idx, (idx - 1) % n] = -coeff
    if grid.dimension == 1:
        return p
    if axis == 0:
        return np.kron(p, np.eye(grid.shape[1]))
    return np.kron(np.eye(grid.shape[0]), p)
