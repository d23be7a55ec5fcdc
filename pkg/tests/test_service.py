from fastapi.testclient import TestClient

from symetric.cli import main
from symetric.service import app

client = TestClient(app)


def test_health():
    body = client.get("/health").json()
    assert body["status"] == "ok"
    assert body["version"]


def test_generate_evaluate_round_trip(tmp_path):
    gen = client.post("/generate", json={
        "dataset": "mass-spring", "k": 15, "steps": 30, "seed": 3,
        "out": str(tmp_path / "c"),
    })
    assert gen.status_code == 200
    assert gen.json()["trajectories"] == 15
    assert gen.json()["dim"] == 2

    syn = client.post("/synth", json={
        "container": str(tmp_path / "c"), "transform": "uniform-scale",
        "scale": 2.0, "embed": 8, "out": str(tmp_path / "s"),
    })
    assert syn.status_code == 200
    assert syn.json()["latent_dim"] == 8

    ev = client.post("/evaluate", json={
        "container": str(tmp_path / "s"), "seed": 1,
    })
    assert ev.status_code == 200
    body = ev.json()
    assert body["symetric"] == 1
    assert body["r2"] > 0.99


def test_service_matches_cli_report_bytes(tmp_path, capsys):
    out = str(tmp_path / "c")
    client.post("/generate", json={"dataset": "pendulum", "k": 12, "steps": 25,
                                   "seed": 5, "out": out})
    ev = client.post("/evaluate", json={"container": out, "seed": 2})
    report_path = str(tmp_path / "cli-report.txt")
    assert main(["evaluate", "--in", out, "--seed", "2", "--out", report_path]) == 0
    with open(report_path) as fh:
        assert ev.json()["report_text"] == fh.read()


def test_validation_errors_map_to_400(tmp_path):
    resp = client.post("/generate", json={"dataset": "bogus", "out": str(tmp_path / "x")})
    assert resp.status_code == 400
    resp = client.post("/evaluate", json={"container": str(tmp_path / "missing")})
    assert resp.status_code == 400


def test_vpt_endpoint(tmp_path):
    out = str(tmp_path / "c")
    client.post("/generate", json={"dataset": "mass-spring", "k": 4, "steps": 10,
                                   "seed": 1, "out": out})
    resp = client.post("/vpt", json={"container": out})
    assert resp.status_code == 200
    assert resp.json()["vpt_forward"] == 11.0


def test_cli_server_mode_forwards(tmp_path, monkeypatch, capsys):
    # route the CLI's HTTP layer through the in-process test client
    import symetric.cli as cli_mod

    def fake_post(server, endpoint, payload):
        resp = client.post(endpoint, json=payload)
        if resp.status_code != 200:
            return None, 2 if resp.status_code == 422 else 1
        return resp.json(), 0

    monkeypatch.setattr(cli_mod, "_post", fake_post)
    out = str(tmp_path / "c")
    code = main(["generate", "--dataset", "mass-spring", "--k", "4", "--steps", "10",
                 "--seed", "1", "--out", out, "--server", "http://fake"])
    assert code == 0
    assert '"trajectories": 4' in capsys.readouterr().out
