"""Deterministic text and CSV renderings of an EvaluationReport.

The text schema is versioned key=value lines in a fixed order; floats are
written with shortest round-trip repr so identical evaluations produce
byte-identical files.
"""

from __future__ import annotations

import csv
import io

from .errors import FormatError
from .metrics import EvaluationReport

FORMAT_NAME = "symetric-report"
FORMAT_VERSION = 1

_SCALAR_FIELDS = (
    "r2",
    "sym",
    "sym_min",
    "sym_max",
    "symetric",
    "vpt_forward",
    "vpt_backward",
    "mse_reconstruction",
    "mse_extrapolation",
    "method",
    "train_r2",
    "map_order",
)


def _fmt(value):
    if isinstance(value, float):
        return repr(value)
    return str(value)


def render_text(report: EvaluationReport) -> str:
    lines = [f"format={FORMAT_NAME}", f"version={FORMAT_VERSION}"]
    for name in _SCALAR_FIELDS:
        lines.append(f"{name}={_fmt(getattr(report, name))}")
    lines.append("kept_dims=" + ",".join(str(i) for i in report.kept_dims))
    lines.append("per_sample_sym=" + ",".join(repr(float(v)) for v in report.per_sample_sym))
    lines.append(
        "c_values="
        + ";".join(f"{s}:{t}:{repr(float(c))}" for s, t, c in report.c_values)
    )
    for i, diag in enumerate(report.diagnostics):
        lines.append(f"diagnostic.{i}={diag}")
    for key in sorted(report.config):
        lines.append(f"config.{key}={_fmt(report.config[key])}")
    return "\n".join(lines) + "\n"


def _coerce(text):
    for cast in (int, float):
        try:
            return cast(text)
        except ValueError:
            continue
    return text


def parse_text(text: str) -> EvaluationReport:
    fields = {}
    for line in text.splitlines():
        if not line.strip():
            continue
        if "=" not in line:
            raise FormatError(f"malformed report line {line!r}")
        key, value = line.split("=", 1)
        fields[key] = value
    if fields.get("format") != FORMAT_NAME:
        raise FormatError(f"not a {FORMAT_NAME} document")
    if fields.get("version") != str(FORMAT_VERSION):
        raise FormatError(f"unsupported report version {fields.get('version')!r}")

    def floats(key):
        raw = fields.get(key, "")
        return tuple(float(v) for v in raw.split(",") if v)

    c_values = []
    for chunk in fields.get("c_values", "").split(";"):
        if chunk:
            s, t, c = chunk.split(":")
            c_values.append((int(s), int(t), float(c)))
    diagnostics = []
    i = 0
    while f"diagnostic.{i}" in fields:
        diagnostics.append(fields[f"diagnostic.{i}"])
        i += 1
    config = {
        key[len("config."):]: _coerce(value)
        for key, value in fields.items()
        if key.startswith("config.")
    }
    return EvaluationReport(
        r2=float(fields["r2"]),
        sym=float(fields["sym"]),
        sym_min=float(fields["sym_min"]),
        sym_max=float(fields["sym_max"]),
        per_sample_sym=floats("per_sample_sym"),
        c_values=tuple(c_values),
        symetric=int(fields["symetric"]),
        vpt_forward=float(fields["vpt_forward"]),
        vpt_backward=float(fields["vpt_backward"]),
        mse_reconstruction=float(fields["mse_reconstruction"]),
        mse_extrapolation=float(fields["mse_extrapolation"]),
        method=fields["method"],
        train_r2=float(fields["train_r2"]),
        map_order=int(fields["map_order"]),
        kept_dims=tuple(int(v) for v in fields.get("kept_dims", "").split(",") if v),
        diagnostics=tuple(diagnostics),
        config=config,
    )


def render_csv(report: EvaluationReport) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["field", "value"])
    for name in _SCALAR_FIELDS:
        writer.writerow([name, _fmt(getattr(report, name))])
    writer.writerow(["kept_dims", " ".join(str(i) for i in report.kept_dims)])
    for i, v in enumerate(report.per_sample_sym):
        writer.writerow([f"sym_sample_{i}", repr(float(v))])
    for s, t, c in report.c_values:
        writer.writerow([f"c_sample{s}_traj{t}", repr(float(c))])
    for key in sorted(report.config):
        writer.writerow([f"config.{key}", _fmt(report.config[key])])
    return buf.getvalue()


def render_summary(report: EvaluationReport) -> str:
    verdict = "captured" if report.symetric == 1 else "not captured"
    lines = [
        f"SyMetric = {report.symetric} (underlying Hamiltonian dynamics {verdict})",
        f"  R^2 (held out)     {report.r2:.6g}",
        f"  Sym mean[min,max]  {report.sym:.6g} [{report.sym_min:.6g}, {report.sym_max:.6g}]",
        f"  VPT forward/back   {report.vpt_forward:.6g} / {report.vpt_backward:.6g}",
        f"  MSE recon/extrap   {report.mse_reconstruction:.6g} / {report.mse_extrapolation:.6g}",
        f"  method {report.method}, map order {report.map_order},"
        f" train R^2 {report.train_r2:.6g}, kept dims {list(report.kept_dims)}",
    ]
    for diag in report.diagnostics:
        lines.append(f"  note: {diag}")
    return "\n".join(lines) + "\n"
