"""Synthetic latent spaces with known relationships to the ground truth,
used to validate that the metric pipeline discriminates symplectic from
non-symplectic latent dynamics end to end.

Positive transforms (a symplectic F back to the truth exists): identity,
uniform scaling, the mass-spring action-angle change of coordinates, a random
linear symplectic matrix, and any of those embedded into a higher-dimensional
space padded with constant and pure-noise dimensions. Negative transforms:
momentum powering (the fitted F must power momenta back, which is polynomial
but not symplectic) and, with a large noise level and exponent 1, an
effectively pure-noise latent.

Synthetic sets carry KL surrogates (1.0 for signal dimensions, 1e-4 for
padding) so the informative-dimension filter is exercised deterministically.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .container import LatentTrajectorySet
from .errors import DimensionError, ValidationError
from .phasespace import canonical_block_matrix

IDENTITY = "identity"
UNIFORM_SCALE = "uniform-scale"
ACTION_ANGLE = "action-angle"
RANDOM_LINEAR_SYMPLECTIC = "random-linear-symplectic"
HIGH_DIM_EMBED = "high-dim-embed"
NON_SYMPLECTIC_DISTORT = "non-symplectic-distort"
TRANSFORM_KINDS = (
    IDENTITY,
    UNIFORM_SCALE,
    ACTION_ANGLE,
    RANDOM_LINEAR_SYMPLECTIC,
    HIGH_DIM_EMBED,
    NON_SYMPLECTIC_DISTORT,
)

SIGNAL_KL = 1.0
PADDING_KL = 1e-4


@dataclass(frozen=True)
class SyntheticTransform:
    kind: str
    scale: float = 2.0        # uniform-scale factor
    embed_dim: int = 32       # high-dim-embed target dimension 2m
    exponent: int = 3         # momentum power for the distortion
    noise: float = 0.0        # additive Gaussian noise level (distortion)
    spring_k: float = 2.0     # action-angle source system constants
    spring_m: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.kind not in TRANSFORM_KINDS:
            raise ValidationError(
                f"unknown transform {self.kind!r}, expected one of {TRANSFORM_KINDS}"
            )
        if self.kind == UNIFORM_SCALE and self.scale == 0.0:
            raise ValidationError("scale must be nonzero")
        if self.kind == HIGH_DIM_EMBED and (self.embed_dim < 2 or self.embed_dim % 2):
            raise ValidationError(f"embed_dim must be even and >= 2, got {self.embed_dim}")
        if self.kind == NON_SYMPLECTIC_DISTORT and (self.exponent < 1 or self.exponent % 2 == 0):
            raise ValidationError("exponent must be odd and >= 1 so momenta stay invertible")


def taylor_expm(x, tol: float = 1e-14) -> np.ndarray:
    """Matrix exponential by scaling-and-squaring with a plain Taylor series;
    adequate for the small matrices used here."""
    x = np.asarray(x, dtype=np.float64)
    norm = np.linalg.norm(x, 1)
    squarings = max(0, int(np.ceil(np.log2(norm / 0.5))) if norm > 0.5 else 0)
    y = x / (2.0 ** squarings)
    result = np.eye(x.shape[0]) + y
    term = y.copy()
    for k in range(2, 60):
        term = term @ y / k
        result = result + term
        if np.abs(term).max() < tol:
            break
    for _ in range(squarings):
        result = result @ result
    return result


def random_linear_symplectic(n: int, seed: int = 0) -> np.ndarray:
    """exp(A W) for symmetric random W: a random 2n x 2n symplectic matrix."""
    if n < 1:
        raise DimensionError(f"n must be >= 1, got {n}")
    rng = np.random.default_rng(seed)
    b = rng.normal(0.0, 0.5 / np.sqrt(2 * n), size=(2 * n, 2 * n))
    w = (b + b.T) / 2.0
    a = canonical_block_matrix(n).dense()
    return taylor_expm(a @ w)


def _action_angle_forward(states, k, m):
    n = states.shape[1] // 2
    if n != 1:
        raise DimensionError("action-angle transform implemented for 1-dof systems")
    q, p = states[:, 0], states[:, 1]
    w = np.sqrt(k / m)
    mw = m * w
    angle = np.arctan2(q * np.sqrt(mw), p / np.sqrt(mw))
    action = (p ** 2 + (mw * q) ** 2) / (2.0 * mw)
    return np.column_stack([angle, action])


def action_angle_jacobian(state, k: float = 2.0, m: float = 1.0) -> np.ndarray:
    """Analytic Jacobian of the mass-spring (q, p) -> (angle, action) map."""
    q, p = float(state[0]), float(state[1])
    w = np.sqrt(k / m)
    mw = m * w
    u, v = q * np.sqrt(mw), p / np.sqrt(mw)
    r2 = u * u + v * v
    if r2 == 0.0:
        raise ValidationError("action-angle Jacobian is singular at the origin")
    return np.array(
        [
            [np.sqrt(mw) * v / r2, -u / (np.sqrt(mw) * r2)],
            [mw * q, p / mw],
        ]
    )


def distortion_jacobian(state, exponent: int = 3) -> np.ndarray:
    """Analytic Jacobian of the noise-free momentum-powering distortion."""
    state = np.asarray(state, dtype=np.float64)
    n = state.size // 2
    diag = np.ones(state.size)
    p = state[n:]
    if exponent > 1:
        diag[n:] = np.abs(p) ** (1.0 / exponent - 1.0) / exponent
    return np.diag(diag)


def _apply_one(transform: SyntheticTransform, flat: np.ndarray) -> np.ndarray:
    dim = flat.shape[1]
    if transform.kind == IDENTITY:
        return flat.copy()
    if transform.kind == UNIFORM_SCALE:
        return transform.scale * flat
    if transform.kind == ACTION_ANGLE:
        return _action_angle_forward(flat, transform.spring_k, transform.spring_m)
    if transform.kind == RANDOM_LINEAR_SYMPLECTIC:
        mat = random_linear_symplectic(dim // 2, transform.seed)
        return flat @ mat.T
    if transform.kind == NON_SYMPLECTIC_DISTORT:
        n = dim // 2
        out = flat.copy()
        p = flat[:, n:]
        if transform.exponent > 1:
            out[:, n:] = np.sign(p) * np.abs(p) ** (1.0 / transform.exponent)
        if transform.noise > 0.0:
            rng = np.random.default_rng(transform.seed)
            out = out + rng.normal(0.0, transform.noise, size=out.shape)
        return out
    raise ValidationError(f"{transform.kind} cannot be applied pointwise here")


def _embed(transform: SyntheticTransform, flat: np.ndarray):
    d_in, d_out = flat.shape[1], transform.embed_dim
    if d_out < d_in:
        raise ValidationError(f"embed_dim {d_out} smaller than latent dim {d_in}")
    if d_in % 2:
        raise DimensionError("can only embed an even-dimensional latent")
    half_in, half_out = d_in // 2, d_out // 2
    rng = np.random.default_rng(transform.seed)
    out = np.empty((flat.shape[0], d_out))
    kl = np.full(d_out, PADDING_KL)
    # signal occupies the front of each canonical half so the filtered
    # latent keeps the (Q..., P...) pairing
    q_pos = list(range(half_in))
    p_pos = list(range(half_out, half_out + half_in))
    out[:, q_pos] = flat[:, :half_in]
    out[:, p_pos] = flat[:, half_in:]
    kl[q_pos] = SIGNAL_KL
    kl[p_pos] = SIGNAL_KL
    pad_pos = [i for i in range(d_out) if i not in q_pos and i not in p_pos]
    for rank, pos in enumerate(pad_pos):
        if rank % 2 == 0:  # constant dimension
            out[:, pos] = rng.normal(0.0, 1.0)
        else:  # pure-noise dimension
            out[:, pos] = rng.normal(0.0, 0.1, size=flat.shape[0])
    return out, kl


def apply_transform(transforms, data: LatentTrajectorySet) -> LatentTrajectorySet:
    """Build a synthetic latent set from the ground-truth side of `data`.

    `transforms` is one SyntheticTransform or a sequence applied left to
    right; a high-dim-embed may only appear last.
    """
    if isinstance(transforms, SyntheticTransform):
        transforms = [transforms]
    if not transforms:
        raise ValidationError("need at least one transform")
    k, length, dim = data.truth.shape
    flat = data.truth.reshape(k * length, dim)
    kl = None
    for i, tr in enumerate(transforms):
        if tr.kind == HIGH_DIM_EMBED:
            if i != len(transforms) - 1:
                raise ValidationError("high-dim-embed must be the last transform in a chain")
            flat, kl = _embed(tr, flat)
        else:
            flat = _apply_one(tr, flat)
    if kl is None:
        kl = np.full(flat.shape[1], SIGNAL_KL)
    return LatentTrajectorySet(
        latent=flat.reshape(k, length, flat.shape[1]),
        truth=data.truth.copy(),
        dt=data.dt,
        kl=kl,
    )
