import os

import numpy as np
import pytest

from symetric.container import (
    LatentTrajectorySet,
    filter_informative_dims,
    load_container,
    save_container,
)
from symetric.errors import DegenerateLatentError, DimensionError, FormatError, ValidationError


def _random_set(rng, k=3, length=5, m=2, n=1, with_kl=True):
    return LatentTrajectorySet(
        latent=rng.normal(size=(k, length, 2 * m)),
        truth=rng.normal(size=(k, length, 2 * n)),
        dt=float(rng.uniform(0.01, 0.5)),
        kl=rng.uniform(0.001, 1.0, size=2 * m) if with_kl else None,
    )


def test_round_trip_bit_exact(tmp_path):
    rng = np.random.default_rng(2)
    for i in range(20):
        data = _random_set(
            rng,
            k=int(rng.integers(1, 6)),
            length=int(rng.integers(2, 9)),
            m=int(rng.integers(1, 5)),
            n=int(rng.integers(1, 4)),
            with_kl=bool(rng.integers(0, 2)),
        )
        path = tmp_path / f"c{i}"
        save_container(data, str(path))
        loaded = load_container(str(path))
        assert np.array_equal(loaded.latent, data.latent)
        assert np.array_equal(loaded.truth, data.truth)
        assert loaded.dt == data.dt
        if data.kl is None:
            assert loaded.kl is None
        else:
            assert np.array_equal(loaded.kl, data.kl)
        # saving the loaded set reproduces identical payload bytes
        path2 = tmp_path / f"c{i}_again"
        save_container(loaded, str(path2))
        for name in ("latent.f64", "truth.f64"):
            assert (path / name).read_bytes() == (path2 / name).read_bytes()


def test_magic_mismatch(tmp_path):
    data = _random_set(np.random.default_rng(0))
    save_container(data, str(tmp_path))
    manifest = tmp_path / "manifest"
    manifest.write_text(manifest.read_text().replace("HTRJ1", "HTRJ9"))
    with pytest.raises(FormatError, match="magic"):
        load_container(str(tmp_path))


def test_truncated_payload_reports_offset(tmp_path):
    data = _random_set(np.random.default_rng(0))
    save_container(data, str(tmp_path))
    payload = tmp_path / "latent.f64"
    raw = payload.read_bytes()
    payload.write_bytes(raw[:-16])
    with pytest.raises(FormatError, match="byte offset"):
        load_container(str(tmp_path))


def test_dimension_inconsistency(tmp_path):
    data = _random_set(np.random.default_rng(0), m=3)
    save_container(data, str(tmp_path))
    manifest = tmp_path / "manifest"
    manifest.write_text(manifest.read_text().replace("m=3", "m=2"))
    with pytest.raises(FormatError):
        load_container(str(tmp_path))


def test_missing_kl_with_flag_false_ok(tmp_path):
    data = _random_set(np.random.default_rng(1), with_kl=False)
    save_container(data, str(tmp_path))
    assert not os.path.exists(tmp_path / "kl.f64")
    assert load_container(str(tmp_path)).kl is None


def test_odd_dims_rejected_by_format():
    data = LatentTrajectorySet(
        latent=np.zeros((1, 3, 3)), truth=np.zeros((1, 3, 2)), dt=0.1
    )
    with pytest.raises(FormatError):
        save_container(data, "/tmp/never-written")


def test_set_shape_validation():
    with pytest.raises(DimensionError):
        LatentTrajectorySet(np.zeros((2, 5, 4)), np.zeros((2, 4, 2)), dt=0.1)
    with pytest.raises(DimensionError):
        LatentTrajectorySet(np.zeros((2, 5, 4)), np.zeros((2, 5, 2)), dt=0.1, kl=np.zeros(3))
    with pytest.raises(ValidationError):
        LatentTrajectorySet(np.zeros((2, 5, 4)), np.zeros((2, 5, 2)), dt=0.0)


def test_filter_by_kl_threshold():
    data = LatentTrajectorySet(
        latent=np.random.default_rng(0).normal(size=(2, 4, 3)),
        truth=np.zeros((2, 4, 2)),
        dt=0.1,
        kl=np.array([0.5, 0.005, 0.02]),
    )
    reduced, kept = filter_informative_dims(data, 0.01)
    assert kept == [0, 2]
    assert reduced.latent_dim == 2
    assert np.array_equal(reduced.latent, data.latent[:, :, [0, 2]])


def test_filter_identity_when_all_informative():
    data = _random_set(np.random.default_rng(3))
    object.__setattr__(data, "kl", np.full(data.latent_dim, 0.4))
    reduced, kept = filter_informative_dims(data)
    assert kept == list(range(data.latent_dim))
    assert np.array_equal(reduced.latent, data.latent)


def test_filter_variance_fallback_drops_constant_dim():
    rng = np.random.default_rng(4)
    latent = rng.normal(size=(3, 6, 4))
    latent[:, :, 2] = 7.5  # constant dimension
    data = LatentTrajectorySet(latent, rng.normal(size=(3, 6, 2)), dt=0.1, kl=None)
    reduced, kept = filter_informative_dims(data)
    assert kept == [0, 1, 3]


def test_filter_all_dropped_raises():
    data = LatentTrajectorySet(
        latent=np.zeros((2, 4, 2)), truth=np.zeros((2, 4, 2)), dt=0.1,
        kl=np.array([1e-5, 1e-6]),
    )
    with pytest.raises(DegenerateLatentError):
        filter_informative_dims(data)


def test_filter_idempotent():
    data = _random_set(np.random.default_rng(5), m=4)
    once, kept1 = filter_informative_dims(data, 0.3)
    twice, kept2 = filter_informative_dims(once, 0.3)
    assert np.array_equal(once.latent, twice.latent)
    assert kept2 == list(range(once.latent_dim))
