"""Zero-copy array bindings for the symetric evaluation pipeline.

Training loops hold latent trajectories as in-memory float64 buffers; these
bindings validate the shapes, wrap the buffers without copying, and delegate
to the primary package, so a checkpoint can be scored without writing a
container to disk. Results are bit-identical to the CLI on the same data
(the rendered report text is included in the returned mapping).

    latent  (K, T+1, 2m) C-contiguous float64
    truth   (K, T+1, 2n) C-contiguous float64
    kl      (2m,) optional per-dimension KL statistic

Long evaluations spend their time inside numpy kernels, which release the
interpreter lock; callers may invoke these functions concurrently.
"""

from __future__ import annotations

import numpy as np

import symetric
from symetric.container import LatentTrajectorySet
from symetric.container import load_container as _load
from symetric.container import save_container as _save
from symetric.pipeline import EvaluateConfig, evaluate_set
from symetric.report import render_text

__version__ = "0.1.0"

__all__ = ["evaluate_arrays", "load_htrj1", "save_htrj1", "version"]


def version() -> str:
    """Version of the underlying evaluation package."""
    return symetric.__version__


def _check_array(name, value, ndim):
    arr = np.asarray(value)
    if arr.dtype != np.float64:
        raise TypeError(f"{name} must be float64, got {arr.dtype}")
    if arr.ndim != ndim:
        raise ValueError(f"{name} must have {ndim} dimensions, got shape {arr.shape}")
    if not arr.flags["C_CONTIGUOUS"]:
        raise ValueError(f"{name} must be C-contiguous")
    return arr


def evaluate_arrays(
    latent,
    truth,
    kl=None,
    dt: float = 1.0,
    method: str = "pr",
    kappa: int = 5,
    stop_r2: float = None,
    alpha: float = 0.9,
    epsilon: float = 0.05,
    vpt_lambda: float = 0.025,
    kl_threshold: float = 0.01,
    holdout: float = 0.2,
    seed: int = 0,
) -> dict:
    """Score latent trajectories against ground truth without touching disk.

    Returns a mapping with every report field plus the rendered report text
    under "text"; the numbers and bytes equal what the CLI produces for a
    container holding the same data.
    """
    latent = _check_array("latent", latent, 3)
    truth = _check_array("truth", truth, 3)
    if latent.shape[:2] != truth.shape[:2]:
        raise ValueError(
            f"latent {latent.shape} and truth {truth.shape} disagree on"
            " trajectory count or length"
        )
    if kl is not None:
        kl = _check_array("kl", kl, 1)
        if kl.shape[0] != latent.shape[2]:
            raise ValueError(
                f"kl has {kl.shape[0]} entries for {latent.shape[2]} latent dims"
            )
    data = LatentTrajectorySet(latent=latent, truth=truth, dt=dt, kl=kl)
    kwargs = dict(
        container="<arrays>", method=method, kappa=kappa, alpha=alpha,
        epsilon=epsilon, vpt_lambda=vpt_lambda, kl_threshold=kl_threshold,
        holdout=holdout, seed=seed,
    )
    if stop_r2 is not None:
        kwargs["stop_r2"] = stop_r2
    rep = evaluate_set(data, EvaluateConfig(**kwargs))
    return {
        "r2": rep.r2,
        "sym": rep.sym,
        "sym_min": rep.sym_min,
        "sym_max": rep.sym_max,
        "symetric": rep.symetric,
        "vpt_forward": rep.vpt_forward,
        "vpt_backward": rep.vpt_backward,
        "mse_reconstruction": rep.mse_reconstruction,
        "mse_extrapolation": rep.mse_extrapolation,
        "method": rep.method,
        "train_r2": rep.train_r2,
        "map_order": rep.map_order,
        "kept_dims": list(rep.kept_dims),
        "per_sample_sym": list(rep.per_sample_sym),
        "c_values": [tuple(v) for v in rep.c_values],
        "diagnostics": list(rep.diagnostics),
        "config": dict(rep.config),
        "text": render_text(rep),
    }


def load_htrj1(path: str):
    """Read an HTRJ1 container; returns (latent, truth, dt, kl-or-None)."""
    data = _load(path)
    return data.latent, data.truth, data.dt, data.kl


def save_htrj1(path: str, latent, truth, dt: float, kl=None) -> str:
    """Write arrays as an HTRJ1 container; round-trips are bit-exact."""
    latent = _check_array("latent", latent, 3)
    truth = _check_array("truth", truth, 3)
    if kl is not None:
        kl = _check_array("kl", kl, 1)
    return _save(LatentTrajectorySet(latent=latent, truth=truth, dt=dt, kl=kl), path)
