"""Phase-space primitives: states, trajectories, the canonical antisymmetric
matrix A = [[0, I], [-I, 0]], Hamiltonian vector fields and symplecticity checks.

A matrix M is symplectic when M^T A M = A; a differentiable map is symplectic
when its Jacobian is symplectic everywhere. All arithmetic is float64: Jacobian
products amplify rounding and 32-bit fails the conservation checks.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, NumericError


def _as_f64(x) -> np.ndarray:
    return np.asarray(x, dtype=np.float64)


@dataclass(frozen=True)
class PhaseState:
    """A point (q, p) in 2n-dimensional phase space."""

    q: np.ndarray
    p: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "q", _as_f64(self.q).reshape(-1))
        object.__setattr__(self, "p", _as_f64(self.p).reshape(-1))
        if self.q.size != self.p.size or self.q.size < 1:
            raise DimensionError(
                f"q and p must have equal length >= 1, got {self.q.size} and {self.p.size}"
            )
        if not (np.isfinite(self.q).all() and np.isfinite(self.p).all()):
            raise NumericError("phase-space state has non-finite entries")

    @property
    def n(self) -> int:
        return self.q.size

    @property
    def dim(self) -> int:
        return 2 * self.q.size

    def flat(self) -> np.ndarray:
        return np.concatenate([self.q, self.p])

    @staticmethod
    def from_flat(s) -> "PhaseState":
        s = _as_f64(s).reshape(-1)
        if s.size % 2 != 0:
            raise DimensionError(f"flat state length must be even, got {s.size}")
        n = s.size // 2
        return PhaseState(s[:n], s[n:])


@dataclass(frozen=True)
class Trajectory:
    """A time-ordered sequence of states with fixed step dt, stored as a
    (T+1, 2n) array with q in the first n columns and p in the last n."""

    dt: float
    states: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "states", _as_f64(self.states))
        if self.dt <= 0:
            raise DimensionError(f"dt must be positive, got {self.dt}")
        if self.states.ndim != 2 or self.states.shape[0] < 2:
            raise DimensionError("trajectory needs a 2-d state array with length >= 2")
        if self.states.shape[1] % 2 != 0:
            raise DimensionError(f"state dimension must be even, got {self.states.shape[1]}")

    def __len__(self) -> int:
        return self.states.shape[0]

    @property
    def dim(self) -> int:
        return self.states.shape[1]

    def state(self, i: int) -> PhaseState:
        return PhaseState.from_flat(self.states[i])


@dataclass(frozen=True)
class CanonicalMatrix:
    """The 2k x 2k block matrix A = [[0, I], [-I, 0]]."""

    k: int

    def __post_init__(self):
        if self.k < 1:
            raise DimensionError(f"canonical matrix needs k >= 1, got {self.k}")

    @property
    def dim(self) -> int:
        return 2 * self.k

    def dense(self) -> np.ndarray:
        a = np.zeros((2 * self.k, 2 * self.k))
        a[: self.k, self.k:] = np.eye(self.k)
        a[self.k:, : self.k] = -np.eye(self.k)
        return a


def canonical_block_matrix(k: int) -> CanonicalMatrix:
    return CanonicalMatrix(int(k))


def hamiltonian_vector_field(system, state: PhaseState) -> PhaseState:
    """Evaluate the equations of motion (dq/dt, dp/dt) = (dH/dp, -dH/dq)."""
    if state.dim != system.dim:
        raise DimensionError(
            f"state dim {state.dim} does not match system dim {system.dim}"
        )
    dq = system.dH_dp(state.q, state.p)
    dp = -system.dH_dq(state.q, state.p)
    if not (np.isfinite(dq).all() and np.isfinite(dp).all()):
        raise NumericError("non-finite Hamiltonian gradient")
    return PhaseState(dq, dp)


def symplecticity_defect(m) -> float:
    """Max-abs entry of M^T A M - A; zero iff M is symplectic."""
    m = _as_f64(m)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {m.shape}")
    if m.shape[0] % 2 != 0 or m.shape[0] == 0:
        raise DimensionError(f"symplectic matrices have even dimension, got {m.shape[0]}")
    a = canonical_block_matrix(m.shape[0] // 2).dense()
    return float(np.abs(m.T @ a @ m - a).max())
