"""On-disk form of learned maps: a key=value manifest plus raw little-endian
float64 payloads, mirroring the trajectory-container conventions.

    manifest      magic=HMAP1, form, in_dim, out_dim, order | layers
    *.f64         coefficient / weight payloads, row-major
"""

from __future__ import annotations

import os

import numpy as np

from .errors import FormatError
from .regression import MLP, POLYNOMIAL, MlpMap, PolynomialMap

MAGIC = "HMAP1"
MANIFEST = "manifest"


def _write(path, name, arr):
    with open(os.path.join(path, name), "wb") as fh:
        fh.write(np.ascontiguousarray(arr, dtype="<f8").tobytes())


def _read(path, name, shape):
    full = os.path.join(path, name)
    count = int(np.prod(shape))
    if not os.path.exists(full):
        raise FormatError(f"missing payload file {full}")
    expected = count * 8
    actual = os.path.getsize(full)
    if actual != expected:
        raise FormatError(
            f"payload {full} holds {actual} bytes, manifest implies {expected}",
            offset=min(actual, expected),
        )
    with open(full, "rb") as fh:
        return np.frombuffer(fh.read(), dtype="<f8").astype(np.float64).reshape(shape)


def save_map(fmap, path: str) -> str:
    os.makedirs(path, exist_ok=True)
    lines = [f"magic={MAGIC}", f"form={fmap.form}",
             f"in_dim={fmap.input_dim}", f"out_dim={fmap.output_dim}"]
    if fmap.form == POLYNOMIAL:
        lines.append(f"order={fmap.order}")
        lines.append(f"n_features={fmap.exponents.shape[0]}")
        _write(path, "exponents.f64", fmap.exponents.astype(np.float64))
        _write(path, "coef.f64", fmap.coef)
        _write(path, "intercept.f64", fmap.intercept)
    elif fmap.form == MLP:
        lines.append(f"layers={len(fmap.weights)}")
        for i, (w, b) in enumerate(zip(fmap.weights, fmap.biases)):
            lines.append(f"layer{i}_shape={w.shape[0]}x{w.shape[1]}")
            _write(path, f"w{i}.f64", w)
            _write(path, f"b{i}.f64", b)
    else:
        raise FormatError(f"unknown map form {fmap.form!r}")
    _write(path, "in_mean.f64", fmap.in_mean)
    _write(path, "in_scale.f64", fmap.in_scale)
    _write(path, "out_mean.f64", fmap.out_mean)
    _write(path, "out_scale.f64", fmap.out_scale)
    with open(os.path.join(path, MANIFEST), "w", encoding="ascii") as fh:
        fh.write("\n".join(lines) + "\n")
    return path


def load_map(path: str):
    manifest = os.path.join(path, MANIFEST)
    if not os.path.exists(manifest):
        raise FormatError(f"no manifest in {path}")
    fields = {}
    with open(manifest, "r", encoding="ascii") as fh:
        for line in fh:
            line = line.strip()
            if line:
                key, _, value = line.partition("=")
                fields[key] = value
    if fields.get("magic") != MAGIC:
        raise FormatError(f"bad magic {fields.get('magic')!r}, expected {MAGIC!r}", offset=0)
    in_dim, out_dim = int(fields["in_dim"]), int(fields["out_dim"])
    std = {
        name: _read(path, f"{name}.f64", (in_dim if name.startswith("in") else out_dim,))
        for name in ("in_mean", "in_scale", "out_mean", "out_scale")
    }
    if fields["form"] == POLYNOMIAL:
        n_feat = int(fields["n_features"])
        return PolynomialMap(
            exponents=_read(path, "exponents.f64", (n_feat, in_dim)).astype(np.int64),
            coef=_read(path, "coef.f64", (n_feat, out_dim)),
            intercept=_read(path, "intercept.f64", (out_dim,)),
            order=int(fields["order"]),
            **std,
        )
    if fields["form"] == MLP:
        layers = int(fields["layers"])
        weights, biases = [], []
        for i in range(layers):
            rows, cols = (int(v) for v in fields[f"layer{i}_shape"].split("x"))
            weights.append(_read(path, f"w{i}.f64", (rows, cols)))
            biases.append(_read(path, f"b{i}.f64", (rows,)))
        return MlpMap(weights=tuple(weights), biases=tuple(biases), **std)
    raise FormatError(f"unknown map form {fields['form']!r} in {manifest}")
