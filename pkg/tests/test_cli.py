"""CLI commands: exit codes, stderr JSON contract, artifact determinism."""

import json
import sys
from pathlib import Path

import numpy as np
import pytest

try:
    import tomllib
except ModuleNotFoundError:
    import tomli as tomllib

from defectforge.cli import (
    EXIT_ENVIRONMENT,
    EXIT_OK,
    EXIT_VALIDATION,
    config_from_dict,
    default_config_text,
    main,
)
from defectforge.detector import aggregate, auroc
from defectforge.errors import ContractError
from defectforge.fixtures import sphere_cloud
from defectforge.geometry import load_cloud_channels, save_cloud


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def stderr_doc(err: str) -> dict:
    doc = json.loads(err.strip().splitlines()[-1])
    assert set(doc) >= {"code", "message", "detail"}
    return doc


def tree_bytes(root: Path) -> dict:
    return {
        p.relative_to(root).as_posix(): p.read_bytes()
        for p in sorted(root.rglob("*"))
        if p.is_file()
    }


@pytest.fixture
def workspace(tmp_path):
    """Config + train/test directories on disk."""
    train = tmp_path / "train"
    test = tmp_path / "test"
    train.mkdir()
    test.mkdir()
    for s in range(3):
        save_cloud(sphere_cloud(400, seed=s), None, train / f"train_{s}.ply")
    for s in range(10, 12):
        save_cloud(sphere_cloud(400, seed=s), None, test / f"normal_{s}.ply")
    config = tmp_path / "run.toml"
    config.write_text(
        """
[run]
category = "spheres"
seed = 11

[sdn]
v0 = 0.25

[synthesis.counts]
bump = 2
crack = 1

[detector]
k_feat = 8
bank_size = 64
"""
    )
    return tmp_path, config


# ---------------------------------------------------------------- config


def test_print_config_roundtrips(capsys):
    code, out, err = run(capsys, "--print-config")
    assert code == EXIT_OK and err == ""
    cfg = config_from_dict(tomllib.loads(out))
    assert cfg.category == "demo" and cfg.k_agg is None
    assert set(cfg.counts.values()) == {0}  # defaults schedule nothing


def test_config_collects_all_problems():
    doc = {
        "run": {"seed": -1},
        "sdn": {"v0": 3.0},
        "synthesis": {"counts": {"vortex": 1, "bump": -2}},
        "mystery": {},
    }
    with pytest.raises(ContractError) as exc:
        config_from_dict(doc)
    message = str(exc.value)
    for fragment in ("run.seed", "sdn.v0", "vortex", "counts.bump", "mystery"):
        assert fragment in message


def test_config_json_mirror(tmp_path, capsys):
    config = tmp_path / "run.json"
    config.write_text(json.dumps({"run": {"seed": 5}, "synthesis": {"counts": {}}}))
    (tmp_path / "train").mkdir()
    save_cloud(sphere_cloud(200, seed=0), None, tmp_path / "train" / "a.ply")
    code, out, err = run(capsys, "batch", "--config", str(config))
    assert code == EXIT_OK
    manifest = json.loads(Path(out.strip()).read_text())
    assert manifest["entries"] == [] and manifest["seed"] == 5


def test_config_syntax_error(tmp_path, capsys):
    config = tmp_path / "broken.toml"
    config.write_text("[run\nseed = ")
    code, out, err = run(capsys, "batch", "--config", str(config))
    assert code == EXIT_VALIDATION
    assert stderr_doc(err)["code"] == "format_error"


def test_config_missing_file(tmp_path, capsys):
    code, out, err = run(capsys, "batch", "--config", str(tmp_path / "nope.toml"))
    assert code == EXIT_ENVIRONMENT
    assert stderr_doc(err)["code"] == "io_error"


# ----------------------------------------------------------------- synth


def test_synth_template(tmp_path, capsys):
    src = tmp_path / "sphere.ply"
    save_cloud(sphere_cloud(500, seed=3), None, src)
    code, out, err = run(
        capsys, "synth", "--in", str(src), "--type", "bump", "--seed", "7",
        "--out", str(tmp_path / "out"),
    )
    assert code == EXIT_OK and err == ""
    paths = [Path(line) for line in out.strip().splitlines()]
    assert len(paths) == 3 and all(p.exists() for p in paths)
    _, mask, _ = load_cloud_channels(paths[1])
    assert mask is not None and mask.any()
    provenance = json.loads(paths[2].read_text())
    assert provenance["instruction"]["type"] == "bump"
    assert provenance["instruction"]["seed"] == 7


def test_synth_instruction_file(tmp_path, capsys):
    src = tmp_path / "sphere.ply"
    save_cloud(sphere_cloud(500, seed=3), None, src)
    instr = tmp_path / "dent.json"
    instr.write_text(
        json.dumps(
            {
                "type": "dent",
                "params": {"m": 1, "r": 0.06, "d": 0.03, "dir": -1},
                "seed": 4,
            }
        )
    )
    code, out, err = run(
        capsys, "synth", "--in", str(src), "--instruction", str(instr),
        "--out", str(tmp_path / "out"),
    )
    assert code == EXIT_OK
    provenance = json.loads(Path(out.strip().splitlines()[2]).read_text())
    assert provenance["origin"] == "file"


def test_synth_invalid_instruction(tmp_path, capsys):
    src = tmp_path / "sphere.ply"
    save_cloud(sphere_cloud(500, seed=3), None, src)
    instr = tmp_path / "bad.json"
    instr.write_text(
        json.dumps(
            {"type": "bump", "params": {"m": 1, "r": 0.9, "d": 0.03, "dir": 1}, "seed": 0}
        )
    )
    code, out, err = run(
        capsys, "synth", "--in", str(src), "--instruction", str(instr),
        "--out", str(tmp_path / "out"),
    )
    assert code == EXIT_VALIDATION and out == ""
    doc = stderr_doc(err)
    assert doc["code"] == "validation_error"
    assert doc["detail"]["violations"]  # the full report rides along


def test_synth_missing_input(tmp_path, capsys):
    code, out, err = run(
        capsys, "synth", "--in", str(tmp_path / "ghost.ply"), "--type", "bump",
        "--out", str(tmp_path / "out"),
    )
    assert code == EXIT_ENVIRONMENT
    assert stderr_doc(err)["code"] == "io_error"


# ----------------------------------------------------------------- batch


def test_batch_writes_corpus_and_reruns_identically(workspace, capsys):
    tmp_path, config = workspace
    code, out, err = run(capsys, "batch", "--config", str(config))
    assert code == EXIT_OK and err == ""
    manifest_path = Path(out.strip())
    manifest = json.loads(manifest_path.read_text())
    assert len(manifest["entries"]) == 3 and manifest["skipped"] == []

    corpus = manifest_path.parent
    first = tree_bytes(corpus)
    for p in sorted(corpus.rglob("*")):
        if p.is_file():
            p.unlink()
    code, out, err = run(capsys, "batch", "--config", str(config))
    assert code == EXIT_OK
    assert tree_bytes(corpus) == first


def test_batch_zero_counts(tmp_path, capsys):
    (tmp_path / "train").mkdir()
    save_cloud(sphere_cloud(300, seed=1), None, tmp_path / "train" / "a.ply")
    config = tmp_path / "run.toml"
    config.write_text('[run]\nseed = 1\n')
    code, out, err = run(capsys, "batch", "--config", str(config))
    assert code == EXIT_OK
    assert json.loads(Path(out.strip()).read_text())["entries"] == []


# ------------------------------------------------------------- fit + eval


def seed_defective_test_clouds(workspace_dir, config):
    """Put labeled anomalous clouds next to the normal ones (corpus layout)."""
    from defectforge.instructions import execute, fallback_template

    test = workspace_dir / "test"
    for i, (u, s) in enumerate([("bump", 21), ("crack", 22), ("freeform", 23)]):
        base = sphere_cloud(400, seed=100 + i, cloud_id=f"anom-{u}")
        instr = fallback_template(u, seed=s)
        out, mask, _ = execute(instr, base)
        save_cloud(out, None, test / f"anom_{u}.ply")
        save_cloud(out, mask, test / f"anom_{u}.mask.ply")


def test_fit_then_eval_with_recompute_oracle(workspace, capsys):
    tmp_path, config = workspace
    code, out, err = run(capsys, "fit", "--config", str(config))
    assert code == EXIT_OK and err == ""
    profile_path, bank_path = (Path(p) for p in out.strip().splitlines())
    assert profile_path.exists() and bank_path.exists()

    first = (profile_path.read_bytes(), bank_path.read_bytes())
    code, out, err = run(capsys, "fit", "--config", str(config))
    assert code == EXIT_OK
    assert (profile_path.read_bytes(), bank_path.read_bytes()) == first

    seed_defective_test_clouds(tmp_path, config)
    code, out, err = run(capsys, "eval", "--config", str(config))
    assert code == EXIT_OK and err == ""
    metrics_path = Path(out.strip().splitlines()[0])
    tail = json.loads(out.strip().splitlines()[1])
    report = json.loads(metrics_path.read_text())
    assert tail == {"o_roc": report["o_roc"], "p_roc": report["p_roc"]}
    assert report["n_clouds"] == 5

    # recompute both metrics from the overlay sidecars alone
    overlays = sorted((metrics_path.parent / "overlays").glob("*.json"))
    docs = [json.loads(p.read_text()) for p in overlays]
    labels = np.array([d["label"] for d in docs])
    object_scores = np.array(
        [aggregate(np.array(d["scores_down"]), d["k_agg"]) for d in docs]
    )
    assert auroc(labels, object_scores) == report["o_roc"]
    for d in docs:
        assert aggregate(np.array(d["scores_down"]), d["k_agg"]) == d["object_score"]
    pooled_scores = np.concatenate([d["scores"] for d in docs])
    pooled_mask = np.concatenate([d["mask"] for d in docs]).astype(bool)
    assert auroc(pooled_mask, pooled_scores) == report["p_roc"]

    # overlay PLYs carry the same mask and a display copy of the scores
    cloud, mask, scores = load_cloud_channels(overlays[0].with_suffix(".ply"))
    assert mask is not None and scores is not None
    np.testing.assert_array_equal(mask, np.array(docs[0]["mask"], dtype=bool))


def test_eval_worker_counts_agree(workspace, capsys):
    tmp_path, config = workspace
    assert run(capsys, "fit", "--config", str(config))[0] == EXIT_OK
    seed_defective_test_clouds(tmp_path, config)
    assert run(capsys, "eval", "--config", str(config), "--workers", "1")[0] == EXIT_OK
    metrics = tmp_path / "out" / "eval" / "metrics.json"
    single = metrics.read_bytes()
    assert run(capsys, "eval", "--config", str(config), "--workers", "8")[0] == EXIT_OK
    assert metrics.read_bytes() == single


def test_fit_empty_train_dir(tmp_path, capsys):
    (tmp_path / "train").mkdir()
    config = tmp_path / "run.toml"
    config.write_text("[run]\nseed = 0\n")
    code, out, err = run(capsys, "fit", "--config", str(config))
    assert code == EXIT_VALIDATION
    assert stderr_doc(err)["code"] == "contract_error"


def test_eval_missing_bank(workspace, capsys):
    tmp_path, config = workspace
    code, out, err = run(
        capsys, "eval", "--config", str(config), "--bank", str(tmp_path / "no.json")
    )
    assert code == EXIT_ENVIRONMENT
    assert stderr_doc(err)["code"] == "io_error"


# ----------------------------------------------------------------- serve


def free_port() -> int:
    import socket

    with socket.socket() as s:
        s.bind(("127.0.0.1", 0))
        return s.getsockname()[1]


def test_serve_health_and_clean_shutdown(tmp_path):
    import signal
    import subprocess
    import time

    import httpx

    port = free_port()
    proc = subprocess.Popen(
        [sys.executable, "-m", "defectforge.cli", "serve", "--port", str(port)],
        stdout=subprocess.PIPE,
        stderr=subprocess.PIPE,
    )
    try:
        deadline = time.monotonic() + 15
        doc = None
        while time.monotonic() < deadline:
            try:
                doc = httpx.get(f"http://127.0.0.1:{port}/health", timeout=1.0).json()
                break
            except httpx.HTTPError:
                if proc.poll() is not None:
                    raise AssertionError(proc.stderr.read().decode())
                time.sleep(0.1)
        assert doc == {"status": "ok", "version": defectforge_version()}
    finally:
        proc.send_signal(signal.SIGTERM)
        assert proc.wait(timeout=15) == 0


def defectforge_version() -> str:
    import defectforge

    return defectforge.__version__


def test_serve_occupied_port(capsys):
    import socket

    with socket.socket() as s:
        s.bind(("127.0.0.1", 0))
        s.listen(1)
        port = s.getsockname()[1]
        code, out, err = run(capsys, "serve", "--port", str(port))
    assert code == EXIT_ENVIRONMENT
    assert stderr_doc(err)["code"] == "io_error"
