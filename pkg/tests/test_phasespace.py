import numpy as np
import pytest

from symetric.errors import DimensionError, NumericError
from symetric.phasespace import (
    PhaseState,
    Trajectory,
    canonical_block_matrix,
    hamiltonian_vector_field,
    symplecticity_defect,
)
from symetric.synth import random_linear_symplectic
from symetric.systems import (
    DoublePendulum,
    LennardJones,
    MassSpring,
    NBody,
    Pendulum,
    sample_initial_state,
)


def test_canonical_matrix_k1():
    a = canonical_block_matrix(1).dense()
    assert np.array_equal(a, [[0.0, 1.0], [-1.0, 0.0]])
    assert np.array_equal(a @ a.T, np.eye(2))


def test_canonical_matrix_antisymmetry_k2():
    a = canonical_block_matrix(2).dense()
    assert np.array_equal(a.T, -a)


@pytest.mark.parametrize("k", range(1, 9))
def test_canonical_matrix_identities(k):
    a = canonical_block_matrix(k).dense()
    assert np.array_equal(a.T @ a, np.eye(2 * k))
    assert np.array_equal(a @ a, -np.eye(2 * k))


def test_canonical_matrix_rejects_zero():
    with pytest.raises(DimensionError):
        canonical_block_matrix(0)


def test_phase_state_validation():
    with pytest.raises(DimensionError):
        PhaseState([1.0, 2.0], [1.0])
    with pytest.raises(NumericError):
        PhaseState([np.nan], [1.0])
    s = PhaseState([1.0, 2.0], [3.0, 4.0])
    assert s.dim == 4
    assert np.array_equal(s.flat(), [1.0, 2.0, 3.0, 4.0])
    assert np.array_equal(PhaseState.from_flat(s.flat()).q, s.q)


def test_trajectory_validation():
    with pytest.raises(DimensionError):
        Trajectory(0.1, np.zeros((1, 2)))
    with pytest.raises(DimensionError):
        Trajectory(-0.1, np.zeros((3, 2)))
    t = Trajectory(0.1, np.arange(8, dtype=float).reshape(4, 2))
    assert len(t) == 4 and t.dim == 2
    assert t.state(1).q[0] == 2.0


def test_vector_field_mass_spring():
    field = hamiltonian_vector_field(MassSpring(k=2.0, m=1.0), PhaseState([1.0], [0.0]))
    assert field.q[0] == 0.0
    assert field.p[0] == -2.0


def test_vector_field_pendulum_fixed_point():
    field = hamiltonian_vector_field(Pendulum(), PhaseState([0.0], [0.0]))
    assert np.allclose(field.flat(), 0.0, atol=0.0)


def test_vector_field_dim_mismatch():
    with pytest.raises(DimensionError):
        hamiltonian_vector_field(MassSpring(), PhaseState([1.0, 2.0], [0.0, 0.0]))


@pytest.mark.parametrize(
    "system",
    [
        MassSpring(k=2.0, m=0.7),
        Pendulum(m=1.2, l=0.8, g=3.5),
        DoublePendulum(m1=0.5, m2=0.6, l1=0.9, l2=0.8, g=3.0),
        NBody(masses=(1.0, 1.3)),
        LennardJones(particles=4),
    ],
)
def test_energy_derivative_vanishes_along_field(system):
    # dH/dt = <dH/dq, qdot> + <dH/dp, pdot> = 0 exactly for analytic gradients
    rng = np.random.default_rng(11)
    worst = 0.0
    for _ in range(1000):
        state = sample_initial_state(system, rng)
        dq = system.dH_dp(state.q, state.p)
        dp = -system.dH_dq(state.q, state.p)
        dh = system.dH_dq(state.q, state.p) @ dq + system.dH_dp(state.q, state.p) @ dp
        scale = max(1.0, abs(system.energy(state.q, state.p)))
        worst = max(worst, abs(dh) / scale)
    assert worst < 1e-10


def test_defect_identity():
    assert symplecticity_defect(np.eye(2)) == 0.0


def test_defect_unit_determinant_2x2():
    assert symplecticity_defect(np.diag([2.0, 0.5])) < 1e-15


def test_defect_hand_expansion():
    # M^T A M = 4A for M = 2I, so max|4A - A| = 3
    assert symplecticity_defect(np.diag([2.0, 2.0])) == pytest.approx(3.0)


def test_defect_sign_invariance():
    rng = np.random.default_rng(5)
    m = rng.normal(size=(4, 4))
    assert symplecticity_defect(m) == pytest.approx(symplecticity_defect(-m))


def test_defect_odd_dimension():
    with pytest.raises(DimensionError):
        symplecticity_defect(np.eye(3))


def test_symplectic_group_closure():
    for seed in range(20):
        p = random_linear_symplectic(2, seed=seed)
        q = random_linear_symplectic(2, seed=seed + 100)
        assert symplecticity_defect(p) < 1e-10
        assert symplecticity_defect(q) < 1e-10
        assert symplecticity_defect(p @ q) < 1e-9
