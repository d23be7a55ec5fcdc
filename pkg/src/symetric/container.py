"""Paired latent / ground-truth trajectory sets and the HTRJ1 on-disk
container: a directory holding a key=value manifest plus raw little-endian
float64 payloads, row-major [trajectory][step][dimension].

    manifest     magic=HTRJ1, k, t, m, n, dt, has_kl
    latent.f64   k * (t+1) * 2m doubles (model state S)
    truth.f64    k * (t+1) * 2n doubles (ground-truth state s)
    kl.f64       2m doubles, present iff has_kl=1

Round-trips are bit-exact; dt is serialized with shortest round-trip repr.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateLatentError, DimensionError, FormatError, ValidationError

MAGIC = "HTRJ1"
MANIFEST = "manifest"
LATENT_FILE = "latent.f64"
TRUTH_FILE = "truth.f64"
KL_FILE = "kl.f64"

DEFAULT_KL_THRESHOLD = 0.01


@dataclass(frozen=True)
class LatentTrajectorySet:
    """K latent trajectories S(t) paired with ground-truth trajectories s(t),
    equal length, fixed dt; optionally a per-latent-dimension KL statistic."""

    latent: np.ndarray
    truth: np.ndarray
    dt: float
    kl: np.ndarray = None

    def __post_init__(self):
        object.__setattr__(self, "latent", np.asarray(self.latent, dtype=np.float64))
        object.__setattr__(self, "truth", np.asarray(self.truth, dtype=np.float64))
        if self.latent.ndim != 3 or self.truth.ndim != 3:
            raise DimensionError("latent and truth must be (K, T+1, dim) arrays")
        if self.latent.shape[:2] != self.truth.shape[:2]:
            raise DimensionError(
                f"latent {self.latent.shape} and truth {self.truth.shape} disagree on K or length"
            )
        if self.latent.shape[0] < 1 or self.latent.shape[1] < 2:
            raise DimensionError("need K >= 1 trajectories of length >= 2")
        if self.dt <= 0:
            raise ValidationError(f"dt must be positive, got {self.dt}")
        if self.kl is not None:
            object.__setattr__(self, "kl", np.asarray(self.kl, dtype=np.float64))
            if self.kl.shape != (self.latent.shape[2],):
                raise DimensionError(
                    f"kl must have one entry per latent dim, got {self.kl.shape}"
                )

    @property
    def n_trajectories(self) -> int:
        return self.latent.shape[0]

    @property
    def n_steps(self) -> int:
        return self.latent.shape[1]

    @property
    def latent_dim(self) -> int:
        return self.latent.shape[2]

    @property
    def truth_dim(self) -> int:
        return self.truth.shape[2]


def filter_informative_dims(data: LatentTrajectorySet, threshold: float = DEFAULT_KL_THRESHOLD):
    """Drop latent dimensions whose average KL from the prior falls below
    `threshold`; without KL statistics, fall back to per-dimension empirical
    variance with the same rule (drops constant dimensions).

    Returns (reduced set, kept index list). Raises DegenerateLatentError if
    nothing survives.
    """
    if not threshold > 0:
        raise ValidationError(f"threshold must be positive, got {threshold}")
    if data.kl is not None:
        score = data.kl
    else:
        score = data.latent.reshape(-1, data.latent_dim).var(axis=0)
    kept = np.flatnonzero(score >= threshold)
    if kept.size == 0:
        raise DegenerateLatentError(
            f"all {data.latent_dim} latent dimensions fall below threshold {threshold}"
        )
    reduced = LatentTrajectorySet(
        latent=data.latent[:, :, kept],
        truth=data.truth,
        dt=data.dt,
        kl=None if data.kl is None else data.kl[kept],
    )
    return reduced, kept.tolist()


def _write_f64(path, arr):
    with open(path, "wb") as fh:
        fh.write(np.ascontiguousarray(arr, dtype="<f8").tobytes())


def _read_f64(path, count, what):
    if not os.path.exists(path):
        raise FormatError(f"missing payload file {path}")
    expected = count * 8
    actual = os.path.getsize(path)
    if actual != expected:
        raise FormatError(
            f"{what} payload {path} holds {actual} bytes, manifest implies {expected}",
            offset=min(actual, expected),
        )
    with open(path, "rb") as fh:
        return np.frombuffer(fh.read(), dtype="<f8").astype(np.float64)


def save_container(data: LatentTrajectorySet, path: str) -> str:
    if data.latent_dim % 2 != 0 or data.truth_dim % 2 != 0:
        raise FormatError(
            f"container dims must be even, got latent {data.latent_dim}, truth {data.truth_dim}"
        )
    os.makedirs(path, exist_ok=True)
    lines = [
        f"magic={MAGIC}",
        f"k={data.n_trajectories}",
        f"t={data.n_steps - 1}",
        f"m={data.latent_dim // 2}",
        f"n={data.truth_dim // 2}",
        f"dt={data.dt!r}",
        f"has_kl={1 if data.kl is not None else 0}",
    ]
    with open(os.path.join(path, MANIFEST), "w", encoding="ascii") as fh:
        fh.write("\n".join(lines) + "\n")
    _write_f64(os.path.join(path, LATENT_FILE), data.latent)
    _write_f64(os.path.join(path, TRUTH_FILE), data.truth)
    if data.kl is not None:
        _write_f64(os.path.join(path, KL_FILE), data.kl)
    return path


def _parse_manifest(path):
    manifest = os.path.join(path, MANIFEST)
    if not os.path.exists(manifest):
        raise FormatError(f"no manifest in {path}")
    fields = {}
    with open(manifest, "r", encoding="ascii") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            if "=" not in line:
                raise FormatError(f"malformed manifest line {line!r} in {manifest}")
            key, value = line.split("=", 1)
            fields[key] = value
    if fields.get("magic") != MAGIC:
        raise FormatError(
            f"bad magic {fields.get('magic')!r} in {manifest}, expected {MAGIC!r}", offset=0
        )
    try:
        return {
            "k": int(fields["k"]),
            "t": int(fields["t"]),
            "m": int(fields["m"]),
            "n": int(fields["n"]),
            "dt": float(fields["dt"]),
            "has_kl": fields["has_kl"] == "1",
        }
    except (KeyError, ValueError) as exc:
        raise FormatError(f"manifest {manifest} is missing or corrupts a field: {exc}")


def load_container(path: str) -> LatentTrajectorySet:
    mf = _parse_manifest(path)
    k, steps = mf["k"], mf["t"] + 1
    dl, dn = 2 * mf["m"], 2 * mf["n"]
    latent = _read_f64(os.path.join(path, LATENT_FILE), k * steps * dl, "latent")
    truth = _read_f64(os.path.join(path, TRUTH_FILE), k * steps * dn, "truth")
    kl = None
    if mf["has_kl"]:
        kl = _read_f64(os.path.join(path, KL_FILE), dl, "kl")
    return LatentTrajectorySet(
        latent=latent.reshape(k, steps, dl),
        truth=truth.reshape(k, steps, dn),
        dt=mf["dt"],
        kl=kl,
    )
