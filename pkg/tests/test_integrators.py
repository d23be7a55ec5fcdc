import numpy as np
import pytest

from symetric.errors import DivergenceError, ValidationError
from symetric.integrators import (
    IMPROVED_EULER,
    LEAPFROG,
    RK4,
    BACKWARD,
    IntegratorSpec,
    relative_energy_drift,
    rollout,
    trajectory_energies,
)
from symetric.phasespace import PhaseState
from symetric.systems import (
    MATCHING_PENNIES,
    ROCK_PAPER_SCISSORS,
    DoublePendulum,
    MassSpring,
    NBody,
    Pendulum,
    sample_initial_state,
)


def test_rollout_length_contract():
    spec = IntegratorSpec(LEAPFROG, dt=0.1, steps=1)
    traj = rollout(MassSpring(), PhaseState([1.0], [0.0]), spec)
    assert len(traj) == 2
    assert np.array_equal(traj.states[0], [1.0, 0.0])
    with pytest.raises(ValidationError):
        IntegratorSpec(LEAPFROG, dt=0.1, steps=0)


def test_leapfrog_closed_form_period_return():
    # q(t) = cos t for k = m = 1 from (1, 0); one period = 50 steps of pi/25.
    # Leapfrog's phase lag per period is pi*(w*dt)^2/12 = 4.14e-3 rad, so the
    # period-end q error is second order (8.6e-6) while p misses by the full
    # phase lag; the frozen values document that dispersion.
    spec = IntegratorSpec(LEAPFROG, dt=np.pi / 25, steps=50)
    traj = rollout(MassSpring(k=1.0, m=1.0), PhaseState([1.0], [0.0]), spec)
    t = np.arange(51) * spec.dt
    assert abs(traj.states[-1, 0] - 1.0) < 1e-3
    assert abs(traj.states[-1, 0] - 1.0) < 2e-5
    assert 1e-3 < np.abs(traj.states[:, 0] - np.cos(t)).max() < 4e-3
    assert 3e-3 < abs(traj.states[-1, 1]) < 5e-3


def test_rk4_single_step_order():
    # halving dt shrinks the one-step error by ~2^5
    sys = MassSpring(k=1.0, m=1.0)
    start = PhaseState([1.0], [0.3])
    w = 1.0

    def exact(t):
        q = start.q[0] * np.cos(w * t) + start.p[0] / w * np.sin(w * t)
        p = -w * start.q[0] * np.sin(w * t) + start.p[0] * np.cos(w * t)
        return np.array([q, p])

    errs = []
    for dt in (0.2, 0.1):
        traj = rollout(sys, start, IntegratorSpec(RK4, dt=dt, steps=1))
        errs.append(np.abs(traj.states[1] - exact(dt)).max())
    assert 24.0 < errs[0] / errs[1] < 40.0


@pytest.mark.parametrize(
    "system",
    [MassSpring(k=2.0, m=1.0), Pendulum(), NBody()],
)
def test_leapfrog_forward_backward_recovers_initial_state(system):
    rng = np.random.default_rng(31)
    for _ in range(5):
        s0 = sample_initial_state(system, rng)
        fwd = rollout(system, s0, IntegratorSpec(LEAPFROG, dt=0.125, steps=1000))
        end = PhaseState.from_flat(fwd.states[-1])
        back = rollout(
            system, end, IntegratorSpec(LEAPFROG, dt=0.125, steps=1000, direction=BACKWARD)
        )
        assert np.abs(back.states[-1] - s0.flat()).max() < 1e-9


def test_backward_rollout_is_time_reversed_path():
    system = MassSpring(k=2.0, m=1.0)
    s0 = PhaseState([0.7], [0.2])
    fwd = rollout(system, s0, IntegratorSpec(LEAPFROG, dt=0.125, steps=100))
    back = rollout(
        system,
        PhaseState.from_flat(fwd.states[-1]),
        IntegratorSpec(LEAPFROG, dt=0.125, steps=100, direction=BACKWARD),
    )
    assert np.abs(back.states - fwd.states[::-1]).max() < 1e-10


def test_leapfrog_energy_bounded_oscillation_no_secular_drift():
    # exactly conserved shadow energy implies oscillation <= (w dt)^2/4
    # relative, while the secular component stays near rounding level
    system = MassSpring(k=2.0, m=1.0)
    rng = np.random.default_rng(13)
    envelope = 2.0 * 0.125 ** 2 / 4.0
    for _ in range(100):
        s0 = sample_initial_state(system, rng)
        traj = rollout(system, s0, IntegratorSpec(LEAPFROG, dt=0.125, steps=1000))
        secular, oscillation = relative_energy_drift(system, traj)
        assert secular < 1e-4
        assert oscillation < 1.1 * envelope


def test_rk4_required_for_double_pendulum():
    system = DoublePendulum()
    s0 = PhaseState([0.3, 0.1], [0.0, 0.0])
    with pytest.raises(ValidationError):
        rollout(system, s0, IntegratorSpec(LEAPFROG, dt=0.125, steps=10))
    traj = rollout(system, s0, IntegratorSpec(RK4, dt=0.01, steps=2000))
    e = trajectory_energies(system, traj)
    assert np.abs(e - e[0]).max() / abs(e[0]) < 1e-6


def test_replicator_rollout_stays_on_simplex():
    rng = np.random.default_rng(41)
    s0 = sample_initial_state(ROCK_PAPER_SCISSORS, rng)
    traj = rollout(ROCK_PAPER_SCISSORS, s0, IntegratorSpec(IMPROVED_EULER, dt=0.1, steps=1000))
    x = traj.states[:, :3]
    y = traj.states[:, 3:]
    assert np.abs(x.sum(axis=1) - 1.0).max() < 1e-6
    assert np.abs(y.sum(axis=1) - 1.0).max() < 1e-6
    assert x.min() >= -1e-12 and y.min() >= -1e-12


def test_replicator_fixed_point_is_stationary():
    s0 = PhaseState([0.5, 0.5], [0.5, 0.5])
    traj = rollout(MATCHING_PENNIES, s0, IntegratorSpec(IMPROVED_EULER, dt=0.1, steps=100))
    assert np.abs(traj.states - 0.5).max() < 1e-12


def test_divergence_error_names_step():
    # leapfrog is unstable on the harmonic oscillator once w*dt > 2
    system = MassSpring(k=2.0, m=1.0)
    with pytest.raises(DivergenceError, match="step"):
        rollout(system, PhaseState([1.0], [0.0]), IntegratorSpec(LEAPFROG, dt=5.0, steps=200))


def test_leapfrog_rejected_for_replicator():
    s0 = PhaseState([0.5, 0.5], [0.5, 0.5])
    with pytest.raises(ValidationError):
        rollout(MATCHING_PENNIES, s0, IntegratorSpec(LEAPFROG, dt=0.1, steps=10))
