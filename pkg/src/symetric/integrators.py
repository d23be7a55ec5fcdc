"""Fixed-step integrators (kick-drift-kick leapfrog, RK4, improved Euler)
and trajectory rollout, forward or backward in time.

Backward rollouts feed -dt to the integrator. Replicator states are clipped
and renormalized onto their simplexes after every step, since fixed-step
schemes drift off the constraint surface.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DivergenceError, ValidationError
from .phasespace import PhaseState, Trajectory
from .systems import HamiltonianSystem, ReplicatorGame, replicator_field

LEAPFROG = "leapfrog"
RK4 = "rk4"
IMPROVED_EULER = "improved_euler"
SCHEMES = (LEAPFROG, RK4, IMPROVED_EULER)

FORWARD = "forward"
BACKWARD = "backward"

DEFAULT_DT = 0.125
REPLICATOR_DT = 0.1

BLOWUP_LIMIT = 1e12


@dataclass(frozen=True)
class IntegratorSpec:
    scheme: str
    dt: float = DEFAULT_DT
    steps: int = 1
    direction: str = FORWARD

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise ValidationError(f"unknown scheme {self.scheme!r}, expected one of {SCHEMES}")
        if self.dt <= 0:
            raise ValidationError(f"dt must be positive, got {self.dt}")
        if self.steps < 1:
            raise ValidationError(f"steps must be >= 1, got {self.steps}")
        if self.direction not in (FORWARD, BACKWARD):
            raise ValidationError(f"direction must be forward or backward, got {self.direction!r}")

    @property
    def signed_dt(self) -> float:
        return self.dt if self.direction == FORWARD else -self.dt


def _check_finite(s, step):
    if not np.isfinite(s).all() or np.abs(s).max() > BLOWUP_LIMIT:
        raise DivergenceError(f"state diverged at step {step}")


def _hamiltonian_deriv(system):
    def f(s):
        n = s.size // 2
        q, p = s[:n], s[n:]
        return np.concatenate([system.dH_dp(q, p), -system.dH_dq(q, p)])

    return f


def _replicator_deriv(game):
    nx = game.dims[0]

    def f(s):
        dx, dy = replicator_field(game, s[:nx], s[nx:])
        return np.concatenate([dx, dy])

    return f


def _replicator_project(game):
    nx = game.dims[0]

    def proj(s):
        x = np.clip(s[:nx], 0.0, None)
        y = np.clip(s[nx:], 0.0, None)
        return np.concatenate([x / x.sum(), y / y.sum()])

    return proj


def _leapfrog_steps(system, q, p, h, steps, out):
    half = 0.5 * h
    for i in range(steps):
        p = p - half * system.dH_dq(q, p)
        q = q + h * system.dH_dp(q, p)
        p = p - half * system.dH_dq(q, p)
        out[i + 1, : q.size] = q
        out[i + 1, q.size:] = p
        _check_finite(out[i + 1], i + 1)
    return out


def _rk4_step(f, s, h):
    k1 = f(s)
    k2 = f(s + 0.5 * h * k1)
    k3 = f(s + 0.5 * h * k2)
    k4 = f(s + h * k3)
    return s + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def _heun_step(f, s, h):
    k1 = f(s)
    k2 = f(s + h * k1)
    return s + 0.5 * h * (k1 + k2)


def rollout(target, initial: PhaseState, spec: IntegratorSpec) -> Trajectory:
    """Integrate `target` from `initial` for spec.steps fixed steps.

    `target` is a HamiltonianSystem or a ReplicatorGame. Leapfrog requires a
    separable Hamiltonian; replicator games integrate with RK4 or improved
    Euler. Raises DivergenceError naming the step if the state blows up.
    """
    s0 = initial.flat()
    out = np.empty((spec.steps + 1, s0.size))
    out[0] = s0
    h = spec.signed_dt

    if isinstance(target, ReplicatorGame):
        if spec.scheme == LEAPFROG:
            raise ValidationError("leapfrog requires a separable Hamiltonian system")
        if s0.size != target.dim:
            raise ValidationError(
                f"state dim {s0.size} does not match game dim {target.dim}"
            )
        f = _replicator_deriv(target)
        proj = _replicator_project(target)
        step = _rk4_step if spec.scheme == RK4 else _heun_step
        s = s0
        for i in range(spec.steps):
            s = proj(step(f, s, h))
            out[i + 1] = s
            _check_finite(s, i + 1)
        return Trajectory(spec.dt, out)

    if not isinstance(target, HamiltonianSystem):
        raise ValidationError(f"cannot integrate a {type(target).__name__}")
    if initial.dim != target.dim:
        raise ValidationError(
            f"state dim {initial.dim} does not match system dim {target.dim}"
        )

    if spec.scheme == LEAPFROG:
        if not target.separable:
            raise ValidationError(
                f"leapfrog requested on the non-separable {target.kind}; use rk4"
            )
        n = initial.n
        return Trajectory(spec.dt, _leapfrog_steps(target, s0[:n], s0[n:], h, spec.steps, out))

    f = _hamiltonian_deriv(target)
    step = _rk4_step if spec.scheme == RK4 else _heun_step
    s = s0
    for i in range(spec.steps):
        s = step(f, s, h)
        out[i + 1] = s
        _check_finite(s, i + 1)
    return Trajectory(spec.dt, out)


def trajectory_energies(system, traj: Trajectory) -> np.ndarray:
    n = traj.dim // 2
    return np.array([system.energy(row[:n], row[n:]) for row in traj.states])


def relative_energy_drift(system, traj: Trajectory) -> tuple:
    """(secular, oscillation): |linear-fit slope x duration| / |H0| and
    max |H(t) - H(0)| / |H0|. Symplectic schemes keep the secular part near
    rounding level while the oscillation stays bounded at O(dt^2)."""
    e = trajectory_energies(system, traj)
    t = np.arange(e.size) * traj.dt
    slope = np.polyfit(t, e, 1)[0]
    scale = abs(e[0])
    if scale == 0.0:
        scale = max(abs(e).max(), 1e-300)
    secular = abs(slope * (t[-1] - t[0])) / scale
    oscillation = np.abs(e - e[0]).max() / scale
    return float(secular), float(oscillation)
