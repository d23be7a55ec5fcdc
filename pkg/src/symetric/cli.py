"""Command-line client for the trajectory/evaluation pipeline.

Runs the shared pipeline handlers in process by default; with --server URL
the subcommand is forwarded to a running service instead. Exit codes:
0 success, 1 validation/config error, 2 numeric failure.
"""

from __future__ import annotations

import argparse
import json
import sys
import urllib.error
import urllib.request

from . import __version__, pipeline, report as report_mod
from .errors import NumericError, ValidationError


def _add_common(p):
    p.add_argument("--server", default=None, help="forward to a running service at this URL")


def build_parser():
    parser = argparse.ArgumentParser(prog="symetric")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="simulate ground-truth trajectories into a container")
    g.add_argument("--dataset", required=True)
    g.add_argument("--variant", choices=["fixed", "colored"], default="fixed")
    g.add_argument("--k", type=int, default=100)
    g.add_argument("--steps", type=int, default=60)
    g.add_argument("--dt", type=float, default=None)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--threads", type=int, default=1)
    g.add_argument("--out", required=True)
    _add_common(g)

    s = sub.add_parser("synth", help="derive a synthetic latent container from ground truth")
    s.add_argument("--in", dest="container", required=True)
    s.add_argument("--transform", required=True)
    s.add_argument("--scale", type=float, default=2.0)
    s.add_argument("--exponent", type=int, default=3)
    s.add_argument("--noise", type=float, default=0.0)
    s.add_argument("--embed", type=int, default=0)
    s.add_argument("--transform-seed", type=int, default=0)
    s.add_argument("--out", required=True)
    _add_common(s)

    e = sub.add_parser("evaluate", help="score a latent/truth container")
    e.add_argument("--in", dest="container", required=True)
    e.add_argument("--method", choices=["pr", "mlp"], default="pr")
    e.add_argument("--kappa", type=int, default=5)
    e.add_argument("--stop-r2", type=float, default=pipeline.DEFAULT_STOP_R2)
    e.add_argument("--alpha", type=float, default=0.9)
    e.add_argument("--epsilon", type=float, default=0.05)
    e.add_argument("--lambda", dest="vpt_lambda", type=float, default=0.025)
    e.add_argument("--kl-threshold", type=float, default=0.01)
    e.add_argument("--holdout", type=float, default=0.2)
    e.add_argument("--seed", type=int, default=0)
    e.add_argument("--out", default=None, help="write the report text here")
    _add_common(e)

    v = sub.add_parser("vpt", help="valid prediction time of latent vs truth")
    v.add_argument("--in", dest="container", required=True)
    v.add_argument("--lambda", dest="vpt_lambda", type=float, default=0.025)
    v.add_argument("--out", default=None)
    _add_common(v)

    r = sub.add_parser("report", help="render a report file to CSV and a text summary")
    r.add_argument("--in", dest="report", required=True)
    r.add_argument("--csv", default=None)
    r.add_argument("--summary", default=None)

    srv = sub.add_parser("serve", help="run the HTTP service")
    srv.add_argument("--host", default="127.0.0.1")
    srv.add_argument("--port", type=int, default=8321)
    return parser


def _post(server, endpoint, payload):
    req = urllib.request.Request(
        server.rstrip("/") + endpoint,
        data=json.dumps(payload).encode(),
        headers={"Content-Type": "application/json"},
        method="POST",
    )
    try:
        with urllib.request.urlopen(req) as resp:
            return json.loads(resp.read()), 0
    except urllib.error.HTTPError as exc:
        body = exc.read().decode(errors="replace")
        print(f"server error {exc.code}: {body}", file=sys.stderr)
        return None, 2 if exc.code == 422 else 1


def _cmd_generate(args):
    if args.server:
        payload = {
            "dataset": args.dataset, "variant": args.variant, "k": args.k,
            "steps": args.steps, "dt": args.dt, "seed": args.seed,
            "threads": args.threads, "out": args.out,
        }
        body, code = _post(args.server, "/generate", payload)
        if body:
            print(json.dumps(body))
        return code
    cfg = pipeline.GenerateConfig(
        dataset=args.dataset, variant=args.variant, k=args.k, steps=args.steps,
        dt=args.dt, seed=args.seed, threads=args.threads, out=args.out,
    )
    data, path = pipeline.run_generate(cfg)
    print(f"wrote {path}: {data.n_trajectories} trajectories x {data.n_steps - 1} steps,"
          f" dim {data.truth_dim}, dt {data.dt}")
    return 0


def _cmd_synth(args):
    if args.server:
        payload = {
            "container": args.container, "transform": args.transform, "out": args.out,
            "scale": args.scale, "exponent": args.exponent, "noise": args.noise,
            "embed": args.embed, "transform_seed": args.transform_seed,
        }
        body, code = _post(args.server, "/synth", payload)
        if body:
            print(json.dumps(body))
        return code
    cfg = pipeline.SynthConfig(
        container=args.container, transform=args.transform, out=args.out,
        scale=args.scale, exponent=args.exponent, noise=args.noise,
        embed=args.embed, transform_seed=args.transform_seed,
    )
    data, path = pipeline.run_synth(cfg)
    print(f"wrote {path}: latent dim {data.latent_dim}, truth dim {data.truth_dim}")
    return 0


def _cmd_evaluate(args):
    if args.server:
        payload = {
            "container": args.container, "method": args.method, "kappa": args.kappa,
            "stop_r2": args.stop_r2, "alpha": args.alpha, "epsilon": args.epsilon,
            "vpt_lambda": args.vpt_lambda, "kl_threshold": args.kl_threshold,
            "holdout": args.holdout, "seed": args.seed, "out": args.out,
        }
        body, code = _post(args.server, "/evaluate", payload)
        if body:
            print(body["report_text"], end="")
        return code
    cfg = pipeline.EvaluateConfig(
        container=args.container, method=args.method, kappa=args.kappa,
        stop_r2=args.stop_r2, alpha=args.alpha, epsilon=args.epsilon,
        vpt_lambda=args.vpt_lambda, kl_threshold=args.kl_threshold,
        holdout=args.holdout, seed=args.seed, out=args.out,
    )
    rep, text, path = pipeline.run_evaluate(cfg)
    print(report_mod.render_summary(rep), end="")
    if path:
        print(f"report written to {path}")
    return 0


def _cmd_vpt(args):
    if args.server:
        payload = {"container": args.container, "threshold": args.vpt_lambda, "out": args.out}
        body, code = _post(args.server, "/vpt", payload)
        if body:
            print(json.dumps(body))
        return code
    cfg = pipeline.VptConfig(container=args.container, threshold=args.vpt_lambda, out=args.out)
    result, text, path = pipeline.run_vpt(cfg)
    print(f"vpt forward {result['vpt_forward']}, backward {result['vpt_backward']}")
    if path:
        print(f"written to {path}")
    return 0


def _cmd_report(args):
    cfg = pipeline.ReportConfig(report=args.report, out_csv=args.csv, out_txt=args.summary)
    _, csv_text, summary = pipeline.run_report(cfg)
    print(summary, end="")
    return 0


def _cmd_serve(args):
    import uvicorn

    from .service import app

    uvicorn.run(app, host=args.host, port=args.port)
    return 0


_HANDLERS = {
    "generate": _cmd_generate,
    "synth": _cmd_synth,
    "evaluate": _cmd_evaluate,
    "vpt": _cmd_vpt,
    "report": _cmd_report,
    "serve": _cmd_serve,
}


def main(argv=None) -> int:
    pipeline.configure_logging()
    args = build_parser().parse_args(argv)
    try:
        return _HANDLERS[args.command](args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except NumericError as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
