"""Shared run configurations and handlers behind both the CLI and the HTTP
service: dataset generation, synthetic latents, evaluation, VPT, and report
rendering. Every handler is deterministic for a fixed config and seed, and
thread counts never change output bytes (per-trajectory seeds are spawned
up front and results assembled in index order).
"""

from __future__ import annotations

import hashlib
import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from . import integrators, metrics, report as report_mod, synth
from .container import LatentTrajectorySet, load_container, save_container
from .errors import ValidationError
from .regression import DEFAULT_STOP_R2
from .systems import (
    DATASET_KINDS,
    GAME_KINDS,
    VARIANTS,
    sample_initial_state,
    sample_system,
)

log = logging.getLogger("symetric")


def configure_logging():
    level = os.environ.get("SYMETRIC_LOG", "warning").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING))


def default_dt(dataset: str) -> float:
    return integrators.REPLICATOR_DT if dataset in GAME_KINDS else integrators.DEFAULT_DT


def default_scheme(dataset: str) -> str:
    if dataset in GAME_KINDS:
        return integrators.IMPROVED_EULER
    if dataset == "double-pendulum":
        return integrators.RK4
    return integrators.LEAPFROG


@dataclass(frozen=True)
class GenerateConfig:
    dataset: str
    variant: str = "fixed"
    k: int = 100
    steps: int = 60
    dt: float = None
    seed: int = 0
    threads: int = 1
    out: str = None

    def __post_init__(self):
        if self.dataset not in DATASET_KINDS:
            raise ValidationError(
                f"unknown dataset {self.dataset!r}, expected one of {DATASET_KINDS}"
            )
        if self.variant not in VARIANTS:
            raise ValidationError(f"variant must be one of {VARIANTS}")
        if self.k < 1 or self.steps < 1:
            raise ValidationError("k and steps must be >= 1")
        if self.threads < 1:
            raise ValidationError("threads must be >= 1")


def generate_set(cfg: GenerateConfig) -> LatentTrajectorySet:
    """K ground-truth trajectories; the latent side is an identity copy so the
    container is a complete evaluation input as written."""
    dt = cfg.dt if cfg.dt is not None else default_dt(cfg.dataset)
    scheme = default_scheme(cfg.dataset)
    children = np.random.SeedSequence(cfg.seed).spawn(cfg.k)
    spec = integrators.IntegratorSpec(scheme=scheme, dt=dt, steps=cfg.steps)

    def one(i):
        rng = np.random.default_rng(children[i])
        system = sample_system(cfg.dataset, cfg.variant, rng)
        state0 = sample_initial_state(system, rng)
        return integrators.rollout(system, state0, spec).states

    if cfg.threads == 1:
        rows = [one(i) for i in range(cfg.k)]
    else:
        with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
            rows = list(pool.map(one, range(cfg.k)))
    truth = np.stack(rows)
    log.info("generated %s: %s trajectories x %s steps, dim %s",
             cfg.dataset, cfg.k, cfg.steps, truth.shape[2])
    return LatentTrajectorySet(latent=truth.copy(), truth=truth, dt=dt, kl=None)


def run_generate(cfg: GenerateConfig):
    data = generate_set(cfg)
    path = None
    if cfg.out:
        path = save_container(data, cfg.out)
    return data, path


@dataclass(frozen=True)
class SynthConfig:
    container: str
    transform: str
    out: str = None
    scale: float = 2.0
    exponent: int = 3
    noise: float = 0.0
    embed: int = 0
    transform_seed: int = 0


def run_synth(cfg: SynthConfig):
    data = load_container(cfg.container)
    chain = [
        synth.SyntheticTransform(
            kind=cfg.transform,
            scale=cfg.scale,
            exponent=cfg.exponent,
            noise=cfg.noise,
            seed=cfg.transform_seed,
        )
    ]
    if cfg.embed:
        chain.append(
            synth.SyntheticTransform(
                kind=synth.HIGH_DIM_EMBED, embed_dim=cfg.embed, seed=cfg.transform_seed
            )
        )
    out = synth.apply_transform(chain, data)
    path = None
    if cfg.out:
        path = save_container(out, cfg.out)
    return out, path


@dataclass(frozen=True)
class EvaluateConfig:
    container: str
    method: str = metrics.PR
    kappa: int = 5
    stop_r2: float = DEFAULT_STOP_R2
    alpha: float = metrics.DEFAULT_ALPHA
    epsilon: float = metrics.DEFAULT_EPSILON
    vpt_lambda: float = metrics.DEFAULT_VPT_LAMBDA
    kl_threshold: float = 0.01
    holdout: float = 0.2
    seed: int = 0
    out: str = None


def data_digest(data: LatentTrajectorySet) -> str:
    h = hashlib.sha256()
    h.update(np.ascontiguousarray(data.latent, dtype="<f8").tobytes())
    h.update(np.ascontiguousarray(data.truth, dtype="<f8").tobytes())
    if data.kl is not None:
        h.update(np.ascontiguousarray(data.kl, dtype="<f8").tobytes())
    return h.hexdigest()


def evaluate_set(data: LatentTrajectorySet, cfg: EvaluateConfig) -> metrics.EvaluationReport:
    rep = metrics.evaluate(
        data,
        method=cfg.method,
        kappa=cfg.kappa,
        stop_r2=cfg.stop_r2,
        alpha=cfg.alpha,
        epsilon=cfg.epsilon,
        vpt_lambda=cfg.vpt_lambda,
        kl_threshold=cfg.kl_threshold,
        holdout_fraction=cfg.holdout,
        seed=cfg.seed,
    )
    config = dict(rep.config)
    config["container_sha256"] = data_digest(data)
    return replace(rep, config=config)


def run_evaluate(cfg: EvaluateConfig):
    data = load_container(cfg.container)
    rep = evaluate_set(data, cfg)
    text = report_mod.render_text(rep)
    path = None
    if cfg.out:
        with open(cfg.out, "w", encoding="ascii") as fh:
            fh.write(text)
        path = cfg.out
    return rep, text, path


@dataclass(frozen=True)
class VptConfig:
    container: str
    threshold: float = metrics.DEFAULT_VPT_LAMBDA
    out: str = None


def run_vpt(cfg: VptConfig):
    """Valid prediction time of the latent sequences against the ground truth;
    requires equal dimensions (e.g. generated or identity-synth containers,
    or model rollouts already projected into the truth space)."""
    data = load_container(cfg.container)
    if data.latent_dim != data.truth_dim:
        raise ValidationError(
            f"vpt compares latent to truth framewise; dims {data.latent_dim} vs"
            f" {data.truth_dim} differ"
        )
    forward, backward = [], []
    for ti in range(data.n_trajectories):
        truth, pred = data.truth[ti], data.latent[ti]
        forward.append(metrics.vpt(truth, pred, cfg.threshold))
        backward.append(metrics.vpt(truth[::-1], pred[::-1], cfg.threshold))
    lines = [
        "format=symetric-vpt",
        "version=1",
        f"threshold={cfg.threshold!r}",
        f"vpt_forward={np.mean(forward)!r}",
        f"vpt_backward={np.mean(backward)!r}",
        f"vpt_mean={np.mean([np.mean(forward), np.mean(backward)])!r}",
        "per_trajectory_forward=" + ",".join(str(v) for v in forward),
        "per_trajectory_backward=" + ",".join(str(v) for v in backward),
    ]
    text = "\n".join(lines) + "\n"
    path = None
    if cfg.out:
        with open(cfg.out, "w", encoding="ascii") as fh:
            fh.write(text)
        path = cfg.out
    return {
        "vpt_forward": float(np.mean(forward)),
        "vpt_backward": float(np.mean(backward)),
        "per_trajectory_forward": [int(v) for v in forward],
        "per_trajectory_backward": [int(v) for v in backward],
    }, text, path


@dataclass(frozen=True)
class ReportConfig:
    report: str
    out_csv: str = None
    out_txt: str = None


def run_report(cfg: ReportConfig):
    with open(cfg.report, "r", encoding="ascii") as fh:
        rep = report_mod.parse_text(fh.read())
    csv_text = report_mod.render_csv(rep)
    summary = report_mod.render_summary(rep)
    if cfg.out_csv:
        with open(cfg.out_csv, "w", encoding="ascii") as fh:
            fh.write(csv_text)
    if cfg.out_txt:
        with open(cfg.out_txt, "w", encoding="ascii") as fh:
            fh.write(summary)
    return rep, csv_text, summary
