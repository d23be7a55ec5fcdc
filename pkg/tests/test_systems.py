import numpy as np
import pytest

from symetric.errors import ParameterError, SingularityError, ValidationError
from symetric.systems import (
    MATCHING_PENNIES,
    ROCK_PAPER_SCISSORS,
    DoublePendulum,
    LennardJones,
    MassSpring,
    NBody,
    Pendulum,
    replicator_field,
    sample_initial_state,
    sample_system,
)
from symetric.testing import finite_difference_gradient


def test_mass_spring_energy_values():
    assert MassSpring(k=2.0, m=1.0).energy([1.0], [0.0]) == pytest.approx(1.0)
    assert MassSpring(k=2.0, m=1.0).energy([0.0], [0.0]) == 0.0
    assert MassSpring(k=2.0, m=0.5).energy([0.0], [1.0]) == pytest.approx(1.0)


def test_mass_spring_rejects_bad_params():
    with pytest.raises(ParameterError):
        MassSpring(k=0.0)
    with pytest.raises(ParameterError):
        MassSpring(m=-1.0)


def test_pendulum_ground_state():
    assert Pendulum().energy([0.0], [0.0]) == 0.0


def test_two_body_potential_at_unit_separation():
    sys = NBody(masses=(1.0, 1.0), g=1.0)
    q = np.array([0.0, 0.0, 1.0, 0.0])
    p = np.zeros(4)
    assert sys.energy(q, p) == pytest.approx(-1.0)


def test_lj_pair_energies():
    sys = LennardJones(particles=2)
    p = np.zeros(4)
    assert sys.energy(np.array([0.0, 0.0, 1.0, 0.0]), p) == pytest.approx(0.0)
    # the pair minimum sits at r = 2^(1/6) with depth -1
    rmin = 2.0 ** (1.0 / 6.0)
    assert sys.energy(np.array([0.0, 0.0, rmin, 0.0]), p) == pytest.approx(-1.0)


def test_coincident_particles_raise():
    sys = LennardJones(particles=2)
    with pytest.raises(SingularityError):
        sys.energy(np.array([0.0, 0.0, 0.0, 1e-12]), np.zeros(4))


@pytest.mark.parametrize(
    "system,n_states",
    [
        (MassSpring(k=2.0, m=0.7), 1000),
        (Pendulum(m=1.2, l=0.8, g=3.5), 1000),
        (DoublePendulum(m1=0.5, m2=0.6, l1=0.9, l2=0.85, g=3.0), 1000),
        (NBody(masses=(1.0, 1.3)), 1000),
        (LennardJones(particles=4), 200),
        (LennardJones(particles=16), 50),
    ],
)
def test_analytic_gradients_match_finite_differences(system, n_states):
    rng = np.random.default_rng(29)
    n = system.dim // 2
    for _ in range(n_states):
        state = sample_initial_state(system, rng)
        q, p = state.q, state.p
        gq = system.dH_dq(q, p)
        gp = system.dH_dp(q, p)
        fq = finite_difference_gradient(lambda qq: system.energy(qq, p), q)
        fp = finite_difference_gradient(lambda pp: system.energy(q, pp), p)
        scale = max(np.abs(np.concatenate([gq, gp])).max(), 1.0)
        assert np.abs(gq - fq).max() / scale < 1e-5
        assert np.abs(gp - fp).max() / scale < 1e-5


@pytest.mark.parametrize(
    "system",
    [
        MassSpring(k=2.0, m=0.7),
        Pendulum(),
        DoublePendulum(),
        NBody(masses=(1.0, 1.3)),
        LennardJones(particles=4),
    ],
)
def test_energy_even_in_momenta(system):
    rng = np.random.default_rng(3)
    for _ in range(50):
        state = sample_initial_state(system, rng)
        assert system.energy(state.q, state.p) == pytest.approx(
            system.energy(state.q, -state.p), rel=1e-12
        )


def test_replicator_uniform_matching_pennies_is_fixed_point():
    dx, dy = replicator_field(MATCHING_PENNIES, [0.5, 0.5], [0.5, 0.5])
    assert np.abs(np.concatenate([dx, dy])).max() == 0.0


def test_replicator_tangent_to_simplex():
    rng = np.random.default_rng(17)
    for _ in range(200):
        x = rng.dirichlet(np.ones(3))
        y = rng.dirichlet(np.ones(3))
        dx, dy = replicator_field(ROCK_PAPER_SCISSORS, x, y)
        assert abs(dx.sum()) < 1e-12
        assert abs(dy.sum()) < 1e-12


def test_replicator_pure_strategy_is_stationary_in_x():
    rng = np.random.default_rng(23)
    for _ in range(20):
        y = rng.dirichlet(np.ones(2))
        dx, _ = replicator_field(MATCHING_PENNIES, [1.0, 0.0], y)
        assert np.abs(dx).max() < 1e-15


def test_replicator_off_simplex_rejected():
    with pytest.raises(ValidationError):
        replicator_field(MATCHING_PENNIES, [0.7, 0.7], [0.5, 0.5])


def test_sample_system_fixed_constants():
    rng = np.random.default_rng(0)
    ms = sample_system("mass-spring", "fixed", rng)
    assert ms.k == 2.0 and ms.m == 1.0


def test_sample_system_colored_ranges():
    rng = np.random.default_rng(1)
    for _ in range(100):
        ms = sample_system("mass-spring", "colored", rng)
        assert ms.k == 2.0 and 0.2 <= ms.m <= 1.0
        pe = sample_system("pendulum", "colored", rng)
        assert 0.5 <= pe.m <= 1.5 and 3.0 <= pe.g <= 4.0 and 0.5 <= pe.l <= 1.0


def test_sample_system_deterministic():
    a = sample_system("pendulum", "colored", np.random.default_rng(42))
    b = sample_system("pendulum", "colored", np.random.default_rng(42))
    assert a == b


def test_mass_spring_initial_annulus_and_momentum_scaling():
    system = MassSpring(k=2.0, m=0.5)
    rng = np.random.default_rng(7)
    scale = np.sqrt(system.k * system.m)
    for _ in range(500):
        s = sample_initial_state(system, rng)
        r = np.hypot(s.q[0], s.p[0] / scale)
        assert 0.1 <= r <= 1.0


def test_pendulum_initial_annulus():
    rng = np.random.default_rng(7)
    for _ in range(500):
        s = sample_initial_state(Pendulum(), rng)
        assert 1.3 <= np.hypot(s.q[0], s.p[0]) <= 2.3


def test_two_body_initial_state_protocol():
    rng = np.random.default_rng(7)
    system = NBody()
    for _ in range(200):
        s = sample_initial_state(system, rng)
        q, p = s.q.reshape(2, 2), s.p.reshape(2, 2)
        assert np.abs(p.sum(axis=0)).max() < 1e-12  # center of mass at rest
        assert 0.5 - 1e-9 <= np.linalg.norm(q[0] - q[1]) <= 1.5 + 1e-9
        assert system.energy(s.q, s.p) < 0.0  # bound orbit


def test_replicator_initial_states_on_simplexes():
    rng = np.random.default_rng(7)
    for _ in range(100):
        s = sample_initial_state(ROCK_PAPER_SCISSORS, rng)
        assert s.q.sum() == pytest.approx(1.0)
        assert s.p.sum() == pytest.approx(1.0)
        assert s.q.min() >= 0.0 and s.p.min() >= 0.0


def test_initial_state_bit_reproducible():
    a = sample_initial_state(MassSpring(), np.random.default_rng(123))
    b = sample_initial_state(MassSpring(), np.random.default_rng(123))
    assert np.array_equal(a.flat(), b.flat())


def test_lj_initial_states_no_overlap():
    rng = np.random.default_rng(7)
    for particles in (4, 16):
        system = LennardJones(particles=particles)
        s = sample_initial_state(system, rng)
        q = s.q.reshape(-1, 2)
        for i in range(particles):
            for j in range(i + 1, particles):
                assert np.linalg.norm(q[i] - q[j]) > 1.0
