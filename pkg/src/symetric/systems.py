"""Concrete Hamiltonian systems, replicator games, and the dataset sampling
protocols (parameter ranges and initial-condition distributions).

Each system carries closed-form dH/dq and dH/dp so integrators never resort
to finite differences; the analytic gradients are cross-checked against
central differences in the test suite.

Hamiltonians (system units):

    mass-spring       H = k q^2 / 2 + p^2 / (2m)
    pendulum          H = m l g (1 - cos q) + p^2 / (2 l m)
    double pendulum   H = [m2 l2^2 p1^2 + (m1+m2) l1^2 p2^2
                           - 2 m2 l1 l2 p1 p2 cos(q1-q2)]
                          / [2 m2 l1^2 l2^2 (m1 + m2 sin^2(q1-q2))]
                          - (m1+m2) g l1 cos q1 - m2 g l2 cos q2
    n-body (2D)       H = -sum_{i<j} g m_i m_j / |q_i - q_j| + sum_i |p_i|^2 / (2 m_i)
    Lennard-Jones     H = sum_{i<j} 4 (r^-12 - r^-6) + sum_i |p_i|^2 / (2 m_i)
                      (reduced units, epsilon = sigma = 1, unit masses)
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, ParameterError, SingularityError, ValidationError
from .phasespace import PhaseState

MIN_SEPARATION = 1e-9

FIXED = "fixed"
COLORED = "colored"
VARIANTS = (FIXED, COLORED)


def _require_positive(**params):
    for name, value in params.items():
        if not value > 0:
            raise ParameterError(f"{name} must be strictly positive, got {value}")


class HamiltonianSystem:
    """Base interface: scalar energy plus analytic partials of H."""

    kind = "abstract"
    separable = True  # H = T(p) + V(q); admits explicit leapfrog

    @property
    def dim(self) -> int:
        raise NotImplementedError

    def energy(self, q, p) -> float:
        raise NotImplementedError

    def dH_dq(self, q, p) -> np.ndarray:
        raise NotImplementedError

    def dH_dp(self, q, p) -> np.ndarray:
        raise NotImplementedError

    def params(self) -> dict:
        raise NotImplementedError

    def _check_dim(self, q, p):
        if 2 * len(np.atleast_1d(q)) != self.dim or len(np.atleast_1d(q)) != len(np.atleast_1d(p)):
            raise DimensionError(
                f"{self.kind}: expected phase dim {self.dim}, got q:{np.size(q)} p:{np.size(p)}"
            )


@dataclass(frozen=True)
class MassSpring(HamiltonianSystem):
    k: float = 2.0
    m: float = 1.0
    kind = "mass-spring"
    separable = True

    def __post_init__(self):
        _require_positive(k=self.k, m=self.m)

    @property
    def dim(self) -> int:
        return 2

    def energy(self, q, p) -> float:
        q, p = np.asarray(q, float), np.asarray(p, float)
        return float(self.k * q[0] ** 2 / 2.0 + p[0] ** 2 / (2.0 * self.m))

    def dH_dq(self, q, p) -> np.ndarray:
        return self.k * np.asarray(q, float)

    def dH_dp(self, q, p) -> np.ndarray:
        return np.asarray(p, float) / self.m

    def params(self) -> dict:
        return {"k": self.k, "m": self.m}


@dataclass(frozen=True)
class Pendulum(HamiltonianSystem):
    m: float = 1.0
    l: float = 1.0
    g: float = 1.0
    kind = "pendulum"
    separable = True

    def __post_init__(self):
        _require_positive(m=self.m, l=self.l, g=self.g)

    @property
    def dim(self) -> int:
        return 2

    def energy(self, q, p) -> float:
        q, p = np.asarray(q, float), np.asarray(p, float)
        return float(
            self.m * self.l * self.g * (1.0 - np.cos(q[0]))
            + p[0] ** 2 / (2.0 * self.l * self.m)
        )

    def dH_dq(self, q, p) -> np.ndarray:
        return self.m * self.l * self.g * np.sin(np.asarray(q, float))

    def dH_dp(self, q, p) -> np.ndarray:
        return np.asarray(p, float) / (self.l * self.m)

    def params(self) -> dict:
        return {"m": self.m, "l": self.l, "g": self.g}


@dataclass(frozen=True)
class DoublePendulum(HamiltonianSystem):
    m1: float = 1.0
    m2: float = 1.0
    l1: float = 1.0
    l2: float = 1.0
    g: float = 1.0
    kind = "double-pendulum"
    separable = False  # kinetic term couples q and p

    def __post_init__(self):
        _require_positive(m1=self.m1, m2=self.m2, l1=self.l1, l2=self.l2, g=self.g)

    @property
    def dim(self) -> int:
        return 4

    def _pieces(self, q, p):
        d = q[0] - q[1]
        c, s = np.cos(d), np.sin(d)
        num = (
            self.m2 * self.l2 ** 2 * p[0] ** 2
            + (self.m1 + self.m2) * self.l1 ** 2 * p[1] ** 2
            - 2.0 * self.m2 * self.l1 * self.l2 * p[0] * p[1] * c
        )
        den = 2.0 * self.m2 * self.l1 ** 2 * self.l2 ** 2 * (self.m1 + self.m2 * s ** 2)
        return d, c, s, num, den

    def energy(self, q, p) -> float:
        q, p = np.asarray(q, float), np.asarray(p, float)
        _, _, _, num, den = self._pieces(q, p)
        return float(
            num / den
            - (self.m1 + self.m2) * self.g * self.l1 * np.cos(q[0])
            - self.m2 * self.g * self.l2 * np.cos(q[1])
        )

    def dH_dq(self, q, p) -> np.ndarray:
        q, p = np.asarray(q, float), np.asarray(p, float)
        _, c, s, num, den = self._pieces(q, p)
        dnum = 2.0 * self.m2 * self.l1 * self.l2 * p[0] * p[1] * s
        dden = 4.0 * self.m2 ** 2 * self.l1 ** 2 * self.l2 ** 2 * s * c
        dkin = dnum / den - num * dden / den ** 2
        return np.array(
            [
                dkin + (self.m1 + self.m2) * self.g * self.l1 * np.sin(q[0]),
                -dkin + self.m2 * self.g * self.l2 * np.sin(q[1]),
            ]
        )

    def dH_dp(self, q, p) -> np.ndarray:
        q, p = np.asarray(q, float), np.asarray(p, float)
        _, c, _, _, den = self._pieces(q, p)
        return np.array(
            [
                (2.0 * self.m2 * self.l2 ** 2 * p[0]
                 - 2.0 * self.m2 * self.l1 * self.l2 * p[1] * c) / den,
                (2.0 * (self.m1 + self.m2) * self.l1 ** 2 * p[1]
                 - 2.0 * self.m2 * self.l1 * self.l2 * p[0] * c) / den,
            ]
        )

    def params(self) -> dict:
        return {"m1": self.m1, "m2": self.m2, "l1": self.l1, "l2": self.l2, "g": self.g}


def _pairwise(q2d):
    """Displacements and distances between 2D particles, (i, j) with i < j."""
    n = q2d.shape[0]
    idx_i, idx_j = np.triu_indices(n, k=1)
    d = q2d[idx_i] - q2d[idx_j]
    r = np.sqrt((d ** 2).sum(axis=1))
    if (r < MIN_SEPARATION).any():
        raise SingularityError(
            f"coincident particles (pairwise distance < {MIN_SEPARATION})"
        )
    return idx_i, idx_j, d, r


@dataclass(frozen=True)
class NBody(HamiltonianSystem):
    """Planar gravitational N-body; q and p are flattened [x1, y1, x2, y2, ...]."""

    masses: tuple = (1.0, 1.0)
    g: float = 1.0
    kind = "n-body"
    separable = True

    def __post_init__(self):
        _require_positive(g=self.g, **{f"m{i+1}": m for i, m in enumerate(self.masses)})

    @property
    def bodies(self) -> int:
        return len(self.masses)

    @property
    def dim(self) -> int:
        return 4 * self.bodies

    def energy(self, q, p) -> float:
        q2d = np.asarray(q, float).reshape(-1, 2)
        p2d = np.asarray(p, float).reshape(-1, 2)
        m = np.asarray(self.masses)
        i, j, _, r = _pairwise(q2d)
        pot = -np.sum(self.g * m[i] * m[j] / r)
        kin = np.sum((p2d ** 2).sum(axis=1) / (2.0 * m))
        return float(pot + kin)

    def dH_dq(self, q, p) -> np.ndarray:
        q2d = np.asarray(q, float).reshape(-1, 2)
        m = np.asarray(self.masses)
        i, j, d, r = _pairwise(q2d)
        grad = np.zeros_like(q2d)
        # d(-g mi mj / r)/dq_i = g mi mj (q_i - q_j) / r^3
        f = (self.g * m[i] * m[j] / r ** 3)[:, None] * d
        np.add.at(grad, i, f)
        np.add.at(grad, j, -f)
        return grad.reshape(-1)

    def dH_dp(self, q, p) -> np.ndarray:
        p2d = np.asarray(p, float).reshape(-1, 2)
        return (p2d / np.asarray(self.masses)[:, None]).reshape(-1)

    def params(self) -> dict:
        return {"g": self.g, **{f"m{i+1}": m for i, m in enumerate(self.masses)}}


@dataclass(frozen=True)
class LennardJones(HamiltonianSystem):
    """Planar LJ gas/liquid in reduced units; pair potential 4(r^-12 - r^-6)."""

    particles: int = 4
    masses: tuple = None
    kind = "lennard-jones"
    separable = True

    def __post_init__(self):
        if self.masses is None:
            object.__setattr__(self, "masses", (1.0,) * self.particles)
        if len(self.masses) != self.particles:
            raise ParameterError("one mass per particle required")
        _require_positive(**{f"m{i+1}": m for i, m in enumerate(self.masses)})

    @property
    def dim(self) -> int:
        return 4 * self.particles

    def energy(self, q, p) -> float:
        q2d = np.asarray(q, float).reshape(-1, 2)
        p2d = np.asarray(p, float).reshape(-1, 2)
        m = np.asarray(self.masses)
        _, _, _, r = _pairwise(q2d)
        pot = np.sum(4.0 * (r ** -12 - r ** -6))
        kin = np.sum((p2d ** 2).sum(axis=1) / (2.0 * m))
        return float(pot + kin)

    def dH_dq(self, q, p) -> np.ndarray:
        q2d = np.asarray(q, float).reshape(-1, 2)
        i, j, d, r = _pairwise(q2d)
        grad = np.zeros_like(q2d)
        f = ((-48.0 * r ** -14 + 24.0 * r ** -8))[:, None] * d
        np.add.at(grad, i, f)
        np.add.at(grad, j, -f)
        return grad.reshape(-1)

    def dH_dp(self, q, p) -> np.ndarray:
        p2d = np.asarray(p, float).reshape(-1, 2)
        return (p2d / np.asarray(self.masses)[:, None]).reshape(-1)

    def params(self) -> dict:
        return {"particles": self.particles}


# ---------------------------------------------------------------------------
# Two-population replicator dynamics on the product of probability simplexes
# ---------------------------------------------------------------------------

SIMPLEX_TOL = 1e-9


@dataclass(frozen=True)
class ReplicatorGame:
    """Zero-sum bimatrix game: row payoff A, column payoff B = -A."""

    payoff: np.ndarray
    name: str = "game"

    def __post_init__(self):
        object.__setattr__(self, "payoff", np.asarray(self.payoff, dtype=np.float64))
        if self.payoff.ndim != 2:
            raise ParameterError("payoff must be a matrix")

    @property
    def dims(self) -> tuple:
        return self.payoff.shape

    @property
    def dim(self) -> int:
        return self.payoff.shape[0] + self.payoff.shape[1]


MATCHING_PENNIES = ReplicatorGame(np.array([[1.0, -1.0], [-1.0, 1.0]]), "matching-pennies")
ROCK_PAPER_SCISSORS = ReplicatorGame(
    np.array([[0.0, -1.0, 1.0], [1.0, 0.0, -1.0], [-1.0, 1.0, 0.0]]), "rock-paper-scissors"
)


def _check_simplex(v, label):
    v = np.asarray(v, float)
    if abs(v.sum() - 1.0) > SIMPLEX_TOL or v.min() < -SIMPLEX_TOL:
        raise ValidationError(
            f"{label} is off the probability simplex beyond tolerance {SIMPLEX_TOL}"
        )
    return v


def replicator_field(game: ReplicatorGame, x, y):
    """Time derivatives (dx/dt, dy/dt) of the two-population replicator ODE:
    dx_i = x_i [(A y)_i - x^T A y], dy_j = y_j [(x^T B)_j - x^T B y], B = -A."""
    x = _check_simplex(x, "x")
    y = _check_simplex(y, "y")
    a = game.payoff
    ay = a @ y
    xay = x @ ay
    dx = x * (ay - xay)
    xb = -(x @ a)  # x^T B with B = -A
    xby = xb @ y
    dy = y * (xb - xby)
    return dx, dy


# ---------------------------------------------------------------------------
# Sampling protocols
# ---------------------------------------------------------------------------

PHYSICS_KINDS = ("mass-spring", "pendulum", "double-pendulum", "two-body", "lj-4", "lj-16")
GAME_KINDS = ("matching-pennies", "rock-paper-scissors")
DATASET_KINDS = PHYSICS_KINDS + GAME_KINDS


def _uniform(rng, lo, hi):
    return float(rng.uniform(lo, hi))


def sample_system(kind: str, variant: str, rng: np.random.Generator):
    """Instantiate a system for one trajectory.

    The fixed variant pins every parameter (k = 2 for the mass-spring, all other
    parameters 1); the colored variant draws each listed parameter uniformly
    from its range: mass-spring m ~ U(0.2, 1.0); pendulum m ~ U(0.5, 1.5),
    g ~ U(3, 4), l ~ U(0.5, 1.0); double pendulum m ~ U(0.4, 0.6),
    g ~ U(2.5, 4.0), l ~ U(0.75, 1.0); two-body m ~ U(0.5, 1.5).
    """
    if variant not in VARIANTS:
        raise ValidationError(f"unknown variant {variant!r}, expected one of {VARIANTS}")
    colored = variant == COLORED
    if kind == "mass-spring":
        return MassSpring(k=2.0, m=_uniform(rng, 0.2, 1.0) if colored else 1.0)
    if kind == "pendulum":
        if colored:
            return Pendulum(
                m=_uniform(rng, 0.5, 1.5), g=_uniform(rng, 3.0, 4.0), l=_uniform(rng, 0.5, 1.0)
            )
        return Pendulum()
    if kind == "double-pendulum":
        if colored:
            return DoublePendulum(
                m1=_uniform(rng, 0.4, 0.6),
                m2=_uniform(rng, 0.4, 0.6),
                g=_uniform(rng, 2.5, 4.0),
                l1=_uniform(rng, 0.75, 1.0),
                l2=_uniform(rng, 0.75, 1.0),
            )
        return DoublePendulum()
    if kind == "two-body":
        if colored:
            return NBody(masses=(_uniform(rng, 0.5, 1.5), _uniform(rng, 0.5, 1.5)))
        return NBody()
    if kind in ("lj-4", "lj-16"):
        # +c changes only visual attributes, which are out of scope here
        return LennardJones(particles=4 if kind == "lj-4" else 16)
    if kind in GAME_KINDS:
        return MATCHING_PENNIES if kind == "matching-pennies" else ROCK_PAPER_SCISSORS
    raise ValidationError(f"unknown dataset kind {kind!r}, expected one of {DATASET_KINDS}")


def _annulus(rng, r_min, r_max):
    """Uniform point on the annulus r_min <= |(a, b)| <= r_max by rejection."""
    while True:
        a, b = rng.uniform(-r_max, r_max, size=2)
        r = np.hypot(a, b)
        if r_min <= r <= r_max:
            return a, b


LJ_FILL_FRACTIONS = {4: 0.05, 16: 0.3}
LJ_MOMENTUM_SCALE = 0.2


def sample_initial_state(system, rng: np.random.Generator) -> PhaseState:
    """Draw one initial condition using the kind-specific protocol."""
    if isinstance(system, MassSpring):
        q, p = _annulus(rng, 0.1, 1.0)
        return PhaseState([q], [p * np.sqrt(system.k * system.m)])
    if isinstance(system, Pendulum):
        q, p = _annulus(rng, 1.3, 2.3)
        return PhaseState([q], [p])
    if isinstance(system, DoublePendulum):
        q1, p1 = _annulus(rng, 1.3, 2.3)
        q2, p2 = _annulus(rng, 1.3, 2.3)
        return PhaseState([q1, q2], [p1, p2])
    if isinstance(system, NBody):
        if system.bodies != 2:
            raise ValidationError("initial-state protocol implemented for two bodies")
        return _two_body_state(system, rng)
    if isinstance(system, LennardJones):
        return _lj_state(system, rng)
    if isinstance(system, ReplicatorGame):
        x = rng.dirichlet(np.ones(system.dims[0]))
        y = rng.dirichlet(np.ones(system.dims[1]))
        return PhaseState.from_flat(np.concatenate([x, y]))
    raise ValidationError(f"no initial-state protocol for {type(system).__name__}")


def _two_body_state(system: NBody, rng) -> PhaseState:
    """Near-circular bound orbit: center of mass at rest, separation
    r ~ U(0.5, 1.5), tangential speeds perturbed by +-10%."""
    m1, m2 = system.masses
    r = rng.uniform(0.5, 1.5)
    theta = rng.uniform(0.0, 2.0 * np.pi)
    u = np.array([np.cos(theta), np.sin(theta)])
    t = np.array([-u[1], u[0]])
    mtot = m1 + m2
    q1 = (m2 / mtot) * r * u
    q2 = -(m1 / mtot) * r * u
    v_rel = np.sqrt(system.g * mtot / r) * rng.uniform(0.9, 1.1)
    # equal and opposite momenta keep the center of mass at rest
    mu = m1 * m2 / mtot
    p1 = mu * v_rel * t
    p2 = -p1
    return PhaseState(np.concatenate([q1, q2]), np.concatenate([p1, p2]))


def _lj_state(system: LennardJones, rng) -> PhaseState:
    """Jittered square lattice scaled to the preset fill fraction, momenta
    drawn from N(0, 0.2^2) per component."""
    n = system.particles
    fill = LJ_FILL_FRACTIONS.get(n, 0.1)
    side = int(np.ceil(np.sqrt(n)))
    area = n * (np.pi * 0.25) / fill  # particle radius sigma/2 = 0.5
    box = np.sqrt(area)
    spacing = box / side
    pts = []
    for i in range(n):
        gx, gy = i % side, i // side
        base = (np.array([gx, gy]) - (side - 1) / 2.0) * spacing
        pts.append(base + rng.uniform(-0.1, 0.1, size=2) * spacing)
    q = np.concatenate(pts)
    p = rng.normal(0.0, LJ_MOMENTUM_SCALE, size=q.size)
    return PhaseState(q, p)
