"""HTTP service wrapping the evaluation pipeline so long-running training
jobs (or several of them) can score trajectory containers over the network.

Validation problems map to HTTP 400, numeric failures to HTTP 422.
"""

from __future__ import annotations

from typing import Optional

from fastapi import FastAPI, HTTPException
from pydantic import BaseModel

from . import __version__, pipeline
from .errors import NumericError, ValidationError


class GenerateRequest(BaseModel):
    dataset: str
    variant: str = "fixed"
    k: int = 100
    steps: int = 60
    dt: Optional[float] = None
    seed: int = 0
    threads: int = 1
    out: str


class GenerateResponse(BaseModel):
    path: str
    trajectories: int
    steps: int
    dim: int
    dt: float


class SynthRequest(BaseModel):
    container: str
    transform: str
    out: str
    scale: float = 2.0
    exponent: int = 3
    noise: float = 0.0
    embed: int = 0
    transform_seed: int = 0


class SynthResponse(BaseModel):
    path: str
    latent_dim: int
    truth_dim: int


class EvaluateRequest(BaseModel):
    container: str
    method: str = "pr"
    kappa: int = 5
    stop_r2: float = pipeline.DEFAULT_STOP_R2
    alpha: float = 0.9
    epsilon: float = 0.05
    vpt_lambda: float = 0.025
    kl_threshold: float = 0.01
    holdout: float = 0.2
    seed: int = 0
    out: Optional[str] = None


class EvaluateResponse(BaseModel):
    symetric: int
    r2: float
    sym: float
    report_text: str
    report_path: Optional[str] = None


class VptRequest(BaseModel):
    container: str
    threshold: float = 0.025
    out: Optional[str] = None


class VptResponse(BaseModel):
    vpt_forward: float
    vpt_backward: float
    per_trajectory_forward: list
    per_trajectory_backward: list


class HealthResponse(BaseModel):
    status: str
    version: str


app = FastAPI(title="symetric", version=__version__)


def _guard(fn, *args):
    try:
        return fn(*args)
    except ValidationError as exc:
        raise HTTPException(status_code=400, detail=str(exc))
    except NumericError as exc:
        raise HTTPException(status_code=422, detail=str(exc))
    except FileNotFoundError as exc:
        raise HTTPException(status_code=400, detail=str(exc))


@app.get("/health", response_model=HealthResponse)
def health():
    return HealthResponse(status="ok", version=__version__)


@app.post("/generate", response_model=GenerateResponse)
def generate(req: GenerateRequest):
    def run():
        cfg = pipeline.GenerateConfig(
            dataset=req.dataset, variant=req.variant, k=req.k, steps=req.steps,
            dt=req.dt, seed=req.seed, threads=req.threads, out=req.out,
        )
        return pipeline.run_generate(cfg)

    data, path = _guard(run)
    return GenerateResponse(
        path=path, trajectories=data.n_trajectories, steps=data.n_steps - 1,
        dim=data.truth_dim, dt=data.dt,
    )


@app.post("/synth", response_model=SynthResponse)
def synth_endpoint(req: SynthRequest):
    def run():
        cfg = pipeline.SynthConfig(
            container=req.container, transform=req.transform, out=req.out,
            scale=req.scale, exponent=req.exponent, noise=req.noise,
            embed=req.embed, transform_seed=req.transform_seed,
        )
        return pipeline.run_synth(cfg)

    data, path = _guard(run)
    return SynthResponse(path=path, latent_dim=data.latent_dim, truth_dim=data.truth_dim)


@app.post("/evaluate", response_model=EvaluateResponse)
def evaluate(req: EvaluateRequest):
    def run():
        cfg = pipeline.EvaluateConfig(
            container=req.container, method=req.method, kappa=req.kappa,
            stop_r2=req.stop_r2, alpha=req.alpha, epsilon=req.epsilon,
            vpt_lambda=req.vpt_lambda, kl_threshold=req.kl_threshold,
            holdout=req.holdout, seed=req.seed, out=req.out,
        )
        return pipeline.run_evaluate(cfg)

    rep, text, path = _guard(run)
    return EvaluateResponse(
        symetric=rep.symetric, r2=rep.r2, sym=rep.sym,
        report_text=text, report_path=path,
    )


@app.post("/vpt", response_model=VptResponse)
def vpt_endpoint(req: VptRequest):
    def run():
        cfg = pipeline.VptConfig(container=req.container, threshold=req.threshold, out=req.out)
        return pipeline.run_vpt(cfg)

    result, _, _ = _guard(run)
    return VptResponse(**result)
