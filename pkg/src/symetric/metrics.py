"""Evaluation measures for learned latent dynamics.

  R^2        variance in the ground-truth state explained by F(S); computed
             as 1 - sum((F(S) - s)^2) / sum((s - s_mean)^2), <= 1, can be
             negative.
  Sym        mean squared deviation of c * A_hat A_hat^T from the identity,
             where A_hat = J A_m J^T, J the Jacobian of F at a sampled point
             and A_m the canonical antisymmetric matrix of the latent space.
             The per-trajectory constant c = 1 / mean(max|A_hat A_hat^T|)
             removes the unit/scale freedom of the latent space.
  SyMetric   binary: 1 iff R^2 > alpha and Sym < epsilon.
  VPT        first timestep at which framewise normalized MSE exceeds a
             threshold; the sequence length if it never does.
  MSE        ||x - x_hat||^2 / ||x||^2 framewise, averaged over the
             reconstruction (first half) or extrapolation (second half) steps.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .container import DEFAULT_KL_THRESHOLD, LatentTrajectorySet, filter_informative_dims
from .errors import DimensionError, NumericError, ValidationError
from .phasespace import canonical_block_matrix
from .regression import (
    DEFAULT_ALPHAS,
    DEFAULT_MAX_ITER,
    DEFAULT_STOP_R2,
    MlpConfig,
    mlp_fit,
    progressive_polynomial_fit,
)

DEFAULT_ALPHA = 0.9
DEFAULT_EPSILON = 0.05
DEFAULT_VPT_LAMBDA = 0.025
DEGENERATE_JACOBIAN = 1e-12

PR = "pr"
MLP_METHOD = "mlp"
METHODS = (PR, MLP_METHOD)


def r_squared(predicted, truth) -> float:
    """Goodness of fit of predictions against ground truth, aggregated over
    every sample and output dimension."""
    predicted = np.asarray(predicted, dtype=np.float64)
    truth = np.asarray(truth, dtype=np.float64)
    if predicted.shape != truth.shape:
        raise DimensionError(f"shape mismatch {predicted.shape} vs {truth.shape}")
    flat_p = predicted.reshape(-1, predicted.shape[-1]) if predicted.ndim > 1 else predicted.reshape(-1, 1)
    flat_t = truth.reshape(-1, truth.shape[-1]) if truth.ndim > 1 else truth.reshape(-1, 1)
    if flat_t.shape[0] < 2:
        raise ValidationError("r_squared needs at least 2 samples")
    ss_tot = np.sum((flat_t - flat_t.mean(axis=0)) ** 2)
    if ss_tot == 0.0:
        raise NumericError("undefined variance: ground truth is constant")
    ss_res = np.sum((flat_p - flat_t) ** 2)
    return float(1.0 - ss_res / ss_tot)


@dataclass(frozen=True)
class SymConfig:
    samples: int = 20
    trajectories_per_sample: int = 5
    points_per_trajectory: int = 10
    alpha: float = DEFAULT_ALPHA
    epsilon: float = DEFAULT_EPSILON
    seed: int = 0
    c_mode: str = "formula"  # or "minimize": least-squares c per trajectory

    def __post_init__(self):
        if min(self.samples, self.trajectories_per_sample, self.points_per_trajectory) < 1:
            raise ValidationError("all sampling counts must be >= 1")
        if not 0.0 < self.alpha < 1.0:
            raise ValidationError(f"alpha must lie in (0, 1), got {self.alpha}")
        if not self.epsilon > 0.0:
            raise ValidationError(f"epsilon must be positive, got {self.epsilon}")
        if self.c_mode not in ("formula", "minimize"):
            raise ValidationError(f"unknown c_mode {self.c_mode!r}")


@dataclass(frozen=True)
class SymResult:
    sym: float
    sym_min: float
    sym_max: float
    per_sample: tuple
    c_values: tuple  # (sample index, trajectory index, c)
    degenerate: bool = False


def _identity_mse(mats, c, eye):
    return [float(np.mean((c * m - eye) ** 2)) for m in mats]


def sym_score(fmap, data: LatentTrajectorySet, config: SymConfig = SymConfig()) -> SymResult:
    """Sym over repeated resamples of trajectories and points.

    For each sampled point: J = dF/dS, A_hat = J A_m J^T, M = A_hat A_hat^T.
    Per trajectory c = 1 / mean(max|M|) over its points; the sample's Sym is
    the mean over its points of MSE(c M, I). The aggregate is the mean over
    samples, with min and max also reported.

    If every sampled point yields max|M| below 1e-12 the map is degenerate;
    Sym is then the unnormalized deviation from the identity, flagged.
    """
    if fmap.input_dim != data.latent_dim:
        raise DimensionError(
            f"map expects latent dim {fmap.input_dim}, set has {data.latent_dim}"
        )
    if fmap.output_dim != data.truth_dim:
        raise DimensionError(
            f"map produces dim {fmap.output_dim}, truth has {data.truth_dim}"
        )
    if fmap.input_dim % 2 != 0:
        raise DimensionError(f"latent dim must be even, got {fmap.input_dim}")
    a_m = canonical_block_matrix(fmap.input_dim // 2).dense()
    eye = np.eye(fmap.output_dim)

    rng = np.random.default_rng(config.seed)
    k, length = data.n_trajectories, data.n_steps
    per_sample = []
    c_values = []
    degenerate_trajs = 0
    total_trajs = 0

    for sample_idx in range(config.samples):
        traj_idx = rng.choice(
            k, size=config.trajectories_per_sample, replace=k < config.trajectories_per_sample
        )
        mses = []
        for ti in traj_idx:
            pts = rng.choice(
                length,
                size=config.points_per_trajectory,
                replace=length < config.points_per_trajectory,
            )
            mats = []
            for step in sorted(pts):
                jac = fmap.jacobian(data.latent[ti, step])
                a_hat = jac @ a_m @ jac.T
                mats.append(a_hat @ a_hat.T)
            max_abs = np.array([np.abs(m).max() for m in mats])
            total_trajs += 1
            if max_abs.mean() < DEGENERATE_JACOBIAN:
                degenerate_trajs += 1
                c = 1.0
            elif config.c_mode == "minimize":
                c = float(sum(np.trace(m) for m in mats) / sum(np.sum(m * m) for m in mats))
            else:
                c = float(1.0 / max_abs.mean())
            c_values.append((sample_idx, int(ti), c))
            mses.extend(_identity_mse(mats, c, eye))
        per_sample.append(float(np.mean(mses)))

    return SymResult(
        sym=float(np.mean(per_sample)),
        sym_min=float(np.min(per_sample)),
        sym_max=float(np.max(per_sample)),
        per_sample=tuple(per_sample),
        c_values=tuple(c_values),
        degenerate=degenerate_trajs == total_trajs,
    )


def symetric(r2: float, sym: float, alpha: float = DEFAULT_ALPHA, epsilon: float = DEFAULT_EPSILON) -> int:
    return 1 if (r2 > alpha and sym < epsilon) else 0


def framewise_nmse(truth, predicted) -> np.ndarray:
    """Per-step ||x_t - x_hat_t||^2 / ||x_t||^2 for (L, dim) sequences."""
    truth = np.atleast_2d(np.asarray(truth, dtype=np.float64))
    predicted = np.atleast_2d(np.asarray(predicted, dtype=np.float64))
    if truth.shape != predicted.shape:
        raise DimensionError(f"shape mismatch {truth.shape} vs {predicted.shape}")
    denom = (truth ** 2).sum(axis=1)
    if (denom == 0.0).any():
        raise NumericError("undefined normalization: a ground-truth frame has zero norm")
    return ((truth - predicted) ** 2).sum(axis=1) / denom


RECONSTRUCTION = "reconstruction"
EXTRAPOLATION = "extrapolation"
ALL_STEPS = "all"


def normalized_mse(truth, predicted, segment: str = ALL_STEPS) -> float:
    """Scale-free MSE averaged over a step range: the reconstruction segment
    covers steps 0..T and the extrapolation segment steps T+1..2T, with
    T = (len - 1) // 2."""
    ratios = framewise_nmse(truth, predicted)
    half = (ratios.size - 1) // 2
    if segment == RECONSTRUCTION:
        ratios = ratios[: half + 1]
    elif segment == EXTRAPOLATION:
        if ratios.size < 2:
            raise ValidationError("sequence too short for an extrapolation segment")
        ratios = ratios[half + 1:]
    elif segment != ALL_STEPS:
        raise ValidationError(f"unknown segment {segment!r}")
    return float(ratios.mean())


def vpt(truth, predicted, threshold: float = DEFAULT_VPT_LAMBDA) -> int:
    """First index where the framewise normalized MSE exceeds `threshold`;
    the sequence length if it never diverges."""
    if not threshold > 0:
        raise ValidationError(f"threshold must be positive, got {threshold}")
    ratios = framewise_nmse(truth, predicted)
    over = np.flatnonzero(ratios > threshold)
    return int(over[0]) if over.size else int(ratios.size)


@dataclass(frozen=True)
class EvaluationReport:
    r2: float
    sym: float
    sym_min: float
    sym_max: float
    per_sample_sym: tuple
    c_values: tuple
    symetric: int
    vpt_forward: float
    vpt_backward: float
    mse_reconstruction: float
    mse_extrapolation: float
    method: str
    train_r2: float
    map_order: int  # 0 for the MLP form
    kept_dims: tuple
    diagnostics: tuple
    config: dict


def _dimension_scores(data: LatentTrajectorySet):
    if data.kl is not None:
        return data.kl
    return data.latent.reshape(-1, data.latent_dim).var(axis=0)


def evaluate(
    data: LatentTrajectorySet,
    method: str = PR,
    kappa: int = 5,
    stop_r2: float = DEFAULT_STOP_R2,
    alpha: float = DEFAULT_ALPHA,
    epsilon: float = DEFAULT_EPSILON,
    vpt_lambda: float = DEFAULT_VPT_LAMBDA,
    kl_threshold: float = DEFAULT_KL_THRESHOLD,
    holdout_fraction: float = 0.2,
    sym_config: SymConfig = None,
    mlp_config: MlpConfig = None,
    lasso_alphas=DEFAULT_ALPHAS,
    folds: int = 2,
    max_iter: int = DEFAULT_MAX_ITER,
    seed: int = 0,
) -> EvaluationReport:
    """Full pipeline: filter dims, fit F on training trajectories, score R^2
    on held-out trajectories, Sym on training trajectories, aggregate into
    the binary indicator, and report VPT / normalized MSE of F(S) against s
    on the held-out trajectories."""
    if method not in METHODS:
        raise ValidationError(f"unknown method {method!r}, expected one of {METHODS}")
    diagnostics = []

    filtered, kept = filter_informative_dims(data, kl_threshold)
    if filtered.latent_dim % 2 != 0 and filtered.latent_dim > 1:
        scores = _dimension_scores(filtered)
        drop = int(np.argmin(scores))
        keep = [i for i in range(filtered.latent_dim) if i != drop]
        diagnostics.append(
            f"dropped latent dim {kept[drop]} (lowest score) to keep an even dim count"
        )
        filtered = LatentTrajectorySet(
            latent=filtered.latent[:, :, keep],
            truth=filtered.truth,
            dt=filtered.dt,
            kl=None if filtered.kl is None else filtered.kl[keep],
        )
        kept = [kept[i] for i in keep]

    force_zero = filtered.latent_dim < data.truth_dim
    if force_zero:
        diagnostics.append(
            f"filtered latent dim {filtered.latent_dim} is below the ground-truth dim"
            f" {data.truth_dim}; no symplectic map can exist, SyMetric forced to 0"
        )

    k = filtered.n_trajectories
    n_hold = max(1, int(round(holdout_fraction * k)))
    if n_hold >= k:
        n_hold = k - 1 if k > 1 else 0
    if n_hold == 0:
        diagnostics.append("single-trajectory set: R^2 measured on the training trajectory")
        train, hold = filtered, filtered
    else:
        train = LatentTrajectorySet(
            filtered.latent[: k - n_hold], filtered.truth[: k - n_hold], filtered.dt, filtered.kl
        )
        hold = LatentTrajectorySet(
            filtered.latent[k - n_hold:], filtered.truth[k - n_hold:], filtered.dt, filtered.kl
        )

    if method == PR:
        fmap, train_r2 = progressive_polynomial_fit(
            train, kappa=kappa, stop_r2=stop_r2, alphas=lasso_alphas,
            folds=folds, max_iter=max_iter,
        )
        map_order = fmap.order
    else:
        cfg = mlp_config if mlp_config is not None else MlpConfig(seed=seed)
        flat_latent = train.latent.reshape(-1, train.latent_dim)
        flat_truth = train.truth.reshape(-1, train.truth_dim)
        fmap = mlp_fit(flat_latent, flat_truth, cfg)
        train_r2 = r_squared(fmap.predict(flat_latent), flat_truth)
        map_order = 0

    hold_latent = hold.latent.reshape(-1, hold.latent_dim)
    hold_truth = hold.truth.reshape(-1, hold.truth_dim)
    r2 = r_squared(fmap.predict(hold_latent), hold_truth)

    scfg = sym_config if sym_config is not None else SymConfig(alpha=alpha, epsilon=epsilon, seed=seed)
    if filtered.latent_dim % 2 == 0:
        sym_res = sym_score(fmap, train, scfg)
        if sym_res.degenerate:
            diagnostics.append(
                "degenerate map: every sampled Jacobian product vanished;"
                " Sym reported without c-normalization"
            )
    else:
        nan = float("nan")
        sym_res = SymResult(nan, nan, nan, (), (), degenerate=False)
        diagnostics.append(
            "odd filtered latent dim: no canonical pairing exists, Sym undefined"
        )

    verdict = 0 if force_zero else symetric(r2, sym_res.sym, alpha, epsilon)

    vf, vb, mr, me = [], [], [], []
    for ti in range(hold.n_trajectories):
        pred = fmap.predict(hold.latent[ti])
        truth = hold.truth[ti]
        vf.append(vpt(truth, pred, vpt_lambda))
        vb.append(vpt(truth[::-1], pred[::-1], vpt_lambda))
        mr.append(normalized_mse(truth, pred, RECONSTRUCTION))
        me.append(normalized_mse(truth, pred, EXTRAPOLATION))

    return EvaluationReport(
        r2=r2,
        sym=sym_res.sym,
        sym_min=sym_res.sym_min,
        sym_max=sym_res.sym_max,
        per_sample_sym=sym_res.per_sample,
        c_values=sym_res.c_values,
        symetric=verdict,
        vpt_forward=float(np.mean(vf)),
        vpt_backward=float(np.mean(vb)),
        mse_reconstruction=float(np.mean(mr)),
        mse_extrapolation=float(np.mean(me)),
        method=method,
        train_r2=float(train_r2),
        map_order=map_order,
        kept_dims=tuple(kept),
        diagnostics=tuple(diagnostics),
        config={
            "method": method,
            "kappa": kappa,
            "stop_r2": stop_r2,
            "alpha": alpha,
            "epsilon": epsilon,
            "vpt_lambda": vpt_lambda,
            "kl_threshold": kl_threshold,
            "holdout_fraction": holdout_fraction,
            "seed": seed,
            "sym_samples": scfg.samples,
            "sym_trajectories": scfg.trajectories_per_sample,
            "sym_points": scfg.points_per_trajectory,
            "sym_c_mode": scfg.c_mode,
        },
    )
