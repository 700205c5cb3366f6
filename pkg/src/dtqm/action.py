"""One-step action models: the admissible families and two inadmissible probes.

An action model evaluates S(x, y) for a single time step, x being the newer
position and y the older one, together with its first derivatives and the
mixed second derivative. All derivatives are analytic; finite differences
appear only as test oracles.
"""

import numpy as np

from .potentials import GaugeField2D, GaugePhase, Potential

__all__ = [
    "PhysicalConstants",
    "ActionModel",
    "StandardAction",
    "GaugedAction",
    "QuarticAction",
    "SineAction",
    "VectorPotentialAction2D",
    "continuum_lagrangian",
    "lagrangian_limit",
    "continuum_lagrangian_2d",
    "lagrangian_limit_2d",
]


class PhysicalConstants:
    """Mass, time step, and hbar; all strictly positive."""

    __slots__ = ("mass", "time_step", "hbar")

    def __init__(self, mass: float, time_step: float, hbar: float):
        for name, value in (("mass", mass), ("time_step", time_step), ("hbar", hbar)):
            if not value > 0:
                raise ValueError(f"{name} must be positive, got {value}")
        object.__setattr__(self, "mass", float(mass))
        object.__setattr__(self, "time_step", float(time_step))
        object.__setattr__(self, "hbar", float(hbar))

    def __setattr__(self, name, value):
        raise AttributeError("PhysicalConstants is immutable")

    def __repr__(self):
        return f"PhysicalConstants(mass={self.mass}, time_step={self.time_step}, hbar={self.hbar})"

    def __eq__(self, other):
        if not isinstance(other, PhysicalConstants):
            return NotImplemented
        return (self.mass, self.time_step, self.hbar) == (other.mass, other.time_step, other.hbar)

    def __hash__(self):
        return hash((self.mass, self.time_step, self.hbar))


class ActionModel:
    """Base class; evaluators broadcast over numpy arrays.

    One-dimensional models take scalars or arrays of positions. The 2D model
    takes arrays whose last axis has length 2; ``d2s_dxdy`` then returns the
    2x2 mixed block in the trailing two axes.
    """

    kind = "abstract"
    dimension = 1

    def __init__(self, constants: PhysicalConstants):
        self.constants = constants

    def s(self, x, y):
        raise NotImplementedError

    def ds_dx(self, x, y):
        raise NotImplementedError

    def ds_dy(self, x, y):
        raise NotImplementedError

    def d2s_dxdy(self, x, y):
        raise NotImplementedError


class StandardAction(ActionModel):
    """Kinetic difference term with a symmetrically split potential.

    The mixed second derivative is the constant -m / tau, which is exactly
    the property the unitarity criterion singles out.
    """

    kind = "standard"

    def __init__(self, constants: PhysicalConstants, potential: Potential):
        super().__init__(constants)
        self.potential = potential

    def s(self, x, y):
        c = self.constants
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        kinetic = 0.5 * c.mass / c.time_step * (x - y) ** 2
        return kinetic - 0.5 * c.time_step * (self.potential.v(x) + self.potential.v(y))

    def ds_dx(self, x, y):
        c = self.constants
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        return c.mass / c.time_step * (x - y) - 0.5 * c.time_step * self.potential.dv(x)

    def ds_dy(self, x, y):
        c = self.constants
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        return -c.mass / c.time_step * (x - y) - 0.5 * c.time_step * self.potential.dv(y)

    def d2s_dxdy(self, x, y):
        c = self.constants
        shape = np.broadcast_shapes(np.shape(x), np.shape(y))
        return np.full(shape, -c.mass / c.time_step)


class GaugedAction(StandardAction):
    """Standard action plus the dynamically inert difference phi(x) - phi(y)."""

    kind = "gauged"

    def __init__(self, constants: PhysicalConstants, potential: Potential, phase: GaugePhase):
        super().__init__(constants, potential)
        self.phase = phase

    def s(self, x, y):
        # Grouped so the gauge term is exactly zero at coincident points.
        gauge = self.phase.phi(np.asarray(x, dtype=float)) - self.phase.phi(np.asarray(y, dtype=float))
        return super().s(x, y) + gauge

    def ds_dx(self, x, y):
        return super().ds_dx(x, y) + self.phase.dphi(np.asarray(x, dtype=float))

    def ds_dy(self, x, y):
        return super().ds_dy(x, y) - self.phase.dphi(np.asarray(y, dtype=float))


class QuarticAction(ActionModel):
    """Standard action plus eps * (x - y)^4; deliberately inadmissible.

    The mixed second derivative picks up -12 eps (x - y)^2, so it is no
    longer constant and the one-step kernel built from it cannot be unitary.
    """

    kind = "quartic_probe"

    def __init__(self, constants: PhysicalConstants, potential: Potential, epsilon: float):
        super().__init__(constants)
        self.potential = potential
        self.epsilon = float(epsilon)

    def s(self, x, y):
        c = self.constants
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        d = x - y
        base = 0.5 * c.mass / c.time_step * d * d - 0.5 * c.time_step * (
            self.potential.v(x) + self.potential.v(y)
        )
        return base + self.epsilon * d**4

    def ds_dx(self, x, y):
        c = self.constants
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        d = x - y
        return c.mass / c.time_step * d - 0.5 * c.time_step * self.potential.dv(x) + 4.0 * self.epsilon * d**3

    def ds_dy(self, x, y):
        c = self.constants
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        d = x - y
        return -c.mass / c.time_step * d - 0.5 * c.time_step * self.potential.dv(y) - 4.0 * self.epsilon * d**3

    def d2s_dxdy(self, x, y):
        c = self.constants
        d = np.asarray(x, dtype=float) - np.asarray(y, dtype=float)
        return -c.mass / c.time_step - 12.0 * self.epsilon * d * d


class SineAction(ActionModel):
    """S = -c sin(x) sin(y); bounded gradients, |dS/dy| <= c.

    Inadmissible probe: the bounded gradient is what lets the discrete
    equation of motion run out of reachable next positions.
    """

    kind = "sine_probe"

    def __init__(self, constants: PhysicalConstants, strength: float):
        if not strength > 0:
            raise ValueError(f"strength must be positive, got {strength}")
        super().__init__(constants)
        self.strength = float(strength)

    def s(self, x, y):
        return -self.strength * np.sin(x) * np.sin(y)

    def ds_dx(self, x, y):
        return -self.strength * np.cos(x) * np.sin(y)

    def ds_dy(self, x, y):
        return -self.strength * np.sin(x) * np.cos(y)

    def d2s_dxdy(self, x, y):
        return -self.strength * np.cos(x) * np.cos(y)


class VectorPotentialAction2D(ActionModel):
    """2D standard action plus an antisymmetrized stream-function perturbation.

    The perturbation is
        s = ((a1(x1, y2) - a1(y1, x2)) + (a2(y1, x2) - a2(x1, y2))) / 2,
    built so that each term misses one of the paired variables: both diagonal
    mixed derivatives d2s/dx_a dy_a vanish identically, which is the
    linearized admissibility condition. In the small-step limit the extra
    term turns into a magnetic coupling q v . A with q A_a the derivative of
    a_a with respect to its own slot.

    Positions are arrays with trailing axis of length 2; built-in potentials
    act separably, V(x1) + V(x2).
    """

    kind = "vector_potential_2d"
    dimension = 2

    def __init__(
        self,
        constants: PhysicalConstants,
        potential: Potential,
        a1: GaugeField2D,
        a2: GaugeField2D,
    ):
        super().__init__(constants)
        self.potential = potential
        self.a1 = a1
        self.a2 = a2

    @staticmethod
    def _split(x):
        x = np.asarray(x, dtype=float)
        if x.shape[-1] != 2:
            raise ValueError(f"2D positions need a trailing axis of length 2, got shape {x.shape}")
        return x[..., 0], x[..., 1]

    def _v(self, x1, x2):
        return self.potential.v(x1) + self.potential.v(x2)

    def perturbation(self, x, y):
        x1, x2 = self._split(x)
        y1, y2 = self._split(y)
        return 0.5 * (
            self.a1.f(x1, y2) - self.a1.f(y1, x2) + self.a2.f(y1, x2) - self.a2.f(x1, y2)
        )

    def perturbation_mixed_trace(self, x, y):
        """Sum over axes of d2s/dx_a dy_a; structurally zero for this family."""
        x1, _ = self._split(x)
        y1, _ = self._split(y)
        return np.zeros(np.broadcast_shapes(np.shape(x1), np.shape(y1)))

    def s(self, x, y):
        c = self.constants
        x1, x2 = self._split(x)
        y1, y2 = self._split(y)
        kinetic = 0.5 * c.mass / c.time_step * ((x1 - y1) ** 2 + (x2 - y2) ** 2)
        pot = 0.5 * c.time_step * (self._v(x1, x2) + self._v(y1, y2))
        return kinetic - pot + self.perturbation(x, y)

    def ds_dx(self, x, y):
        c = self.constants
        x1, x2 = self._split(x)
        y1, y2 = self._split(y)
        g1 = (
            c.mass / c.time_step * (x1 - y1)
            - 0.5 * c.time_step * self.potential.dv(x1)
            + 0.5 * (self.a1.d_da(x1, y2) - self.a2.d_da(x1, y2))
        )
        g2 = (
            c.mass / c.time_step * (x2 - y2)
            - 0.5 * c.time_step * self.potential.dv(x2)
            + 0.5 * (-self.a1.d_db(y1, x2) + self.a2.d_db(y1, x2))
        )
        return np.stack(np.broadcast_arrays(g1, g2), axis=-1)

    def ds_dy(self, x, y):
        c = self.constants
        x1, x2 = self._split(x)
        y1, y2 = self._split(y)
        h1 = (
            -c.mass / c.time_step * (x1 - y1)
            - 0.5 * c.time_step * self.potential.dv(y1)
            + 0.5 * (-self.a1.d_da(y1, x2) + self.a2.d_da(y1, x2))
        )
        h2 = (
            -c.mass / c.time_step * (x2 - y2)
            - 0.5 * c.time_step * self.potential.dv(y2)
            + 0.5 * (self.a1.d_db(x1, y2) - self.a2.d_db(x1, y2))
        )
        return np.stack(np.broadcast_arrays(h1, h2), axis=-1)

    def d2s_dxdy(self, x, y):
        c = self.constants
        x1, x2 = self._split(x)
        y1, y2 = self._split(y)
        diag = np.full(np.broadcast_shapes(np.shape(x1), np.shape(y1)), -c.mass / c.time_step)
        m12 = 0.5 * (self.a1.d2_dadb(x1, y2) - self.a2.d2_dadb(x1, y2))
        m21 = 0.5 * (-self.a1.d2_dadb(y1, x2) + self.a2.d2_dadb(y1, x2))
        m11, m12, m21, m22 = np.broadcast_arrays(diag, m12, m21, diag)
        out = np.stack(
            [np.stack([m11, m12], axis=-1), np.stack([m21, m22], axis=-1)],
            axis=-2,
        )
        return out


def continuum_lagrangian(model: ActionModel, x: float, v: float) -> float:
    """Finite-step ratio S(x, x - tau v) / tau for the 1D admissible family."""
    if not isinstance(model, StandardAction):
        raise ValueError(f"unsupported action kind '{model.kind}' for a Lagrangian limit")
    tau = model.constants.time_step
    return float(model.s(x, x - tau * v)) / tau


def lagrangian_limit(model: ActionModel, x: float, v: float) -> float:
    """Analytic small-step limit of continuum_lagrangian."""
    if not isinstance(model, StandardAction):
        raise ValueError(f"unsupported action kind '{model.kind}' for a Lagrangian limit")
    value = 0.5 * model.constants.mass * v * v - float(model.potential.v(x))
    if isinstance(model, GaugedAction):
        # Total time derivative of the phase generator; kept so the two
        # routes compare like for like.
        value += float(model.phase.dphi(x)) * v
    return value


def continuum_lagrangian_2d(model: ActionModel, x, v) -> float:
    """Finite-step ratio S(x, x - tau v) / tau for the 2D family."""
    if not isinstance(model, VectorPotentialAction2D):
        raise ValueError(f"unsupported action kind '{model.kind}' for the 2D Lagrangian limit")
    x = np.asarray(x, dtype=float)
    v = np.asarray(v, dtype=float)
    tau = model.constants.time_step
    return float(model.s(x, x - tau * v)) / tau


def lagrangian_limit_2d(model: ActionModel, x, v) -> float:
    """Analytic limit: kinetic term plus q v . A minus the potential.

    The total-derivative part of the perturbation is dropped; q A_a is the
    derivative of the stream function a_a with respect to its own slot,
    evaluated at the position.
    """
    if not isinstance(model, VectorPotentialAction2D):
        raise ValueError(f"unsupported action kind '{model.kind}' for the 2D Lagrangian limit")
    x = np.asarray(x, dtype=float)
    v = np.asarray(v, dtype=float)
    qa1 = float(model.a1.d_da(x[0], x[1]))
    qa2 = float(model.a2.d_db(x[0], x[1]))
    kinetic = 0.5 * model.constants.mass * float(v @ v)
    return kinetic + qa1 * v[0] + qa2 * v[1] - float(model.potential.v(x[0]) + model.potential.v(x[1]))
