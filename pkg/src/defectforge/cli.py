"""Command line front end: synth, batch, fit, eval, serve.

Exit codes are fixed for CI use: 0 success, 2 validation failure,
3 I/O or environment failure. Every failure writes one line of
{code, message, detail} JSON to stderr; stdout carries only result
paths and metrics.

Config files are TOML (JSON accepted as a mirror, chosen by file
suffix). Relative paths inside a config resolve against the config
file's directory, so a config plus its data folders can be moved as a
unit. `defectforge --print-config` prints the full default config.
"""

from __future__ import annotations

import argparse
import json
import socket
import sys
from dataclasses import dataclass, field
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # python < 3.11
    import tomli as tomllib

from .detector import (
    build_prototypes,
    evaluate,
    extract_features,
    load_bank,
    save_bank,
)
from .errors import (
    ConfigurationError,
    ContractError,
    DefectForgeError,
    FormatError,
    TransportError,
    ValidationError,
)
from .geometry import (
    estimate_normals,
    load_cloud,
    load_cloud_channels,
    save_cloud,
)
from .instructions import (
    DEFECT_TYPES,
    ORIGIN_RULE,
    execute,
    fallback_template,
    parse_instruction,
    validate,
)
from .pipeline import (
    AugmentConfig,
    apply_sdn,
    batch_synthesize,
    fit_sdn_profile,
    load_profile,
    save_profile,
)

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_ENVIRONMENT = 3

# environment problems keep exit code 3; every other library error is a
# rejection of the inputs and maps to 2
_ENVIRONMENT_ERRORS = (ConfigurationError, TransportError, OSError)


@dataclass(frozen=True)
class RunConfig:
    """One run's worth of knobs, flattened from the config file."""

    category: str = "demo"
    seed: int = 0
    train_dir: str = "train"
    test_dir: str = "test"
    out_dir: str = "out"
    v0: float = 0.03
    counts: dict = field(default_factory=dict)
    rotate: bool = False
    noise: bool = False
    noise_std: float = 0.005
    dropout: bool = False
    dropout_max: float = 0.15
    k_feat: int = 16
    bank_size: int = 2048
    k_agg: int | None = None
    base_dir: Path = field(default_factory=Path)

    def path(self, name: str) -> Path:
        return self.base_dir / getattr(self, name)


def default_config_text() -> str:
    """The complete default config as a TOML document."""
    counts = "\n".join(f"{u} = 0" for u in DEFECT_TYPES)
    return f"""\
[run]
category = "demo"
seed = 0

[paths]
train_dir = "train"
test_dir = "test"
out_dir = "out"

[sdn]
v0 = 0.03

# entries synthesized per defect type
[synthesis.counts]
{counts}

[augment]
rotate = false
noise = false
noise_std = 0.005
dropout = false
dropout_max = 0.15

[detector]
k_feat = 16
bank_size = 2048
# k_agg = 0 means automatic: max(10, 1% of points)
k_agg = 0
"""


def _want(problems, doc, section, key, kinds, label=None):
    """Type-checked lookup of doc[section][key]; None when absent or wrong."""
    table = doc.get(section)
    if table is None:
        return None
    if not isinstance(table, dict):
        problems.append(f"[{section}] must be a table")
        return None
    if key not in table:
        return None
    value = table[key]
    # bool is an int subclass; never silently accept it as a number
    if isinstance(value, bool) and bool not in (kinds if isinstance(kinds, tuple) else (kinds,)):
        problems.append(f"{section}.{key} must be {label or kinds}")
        return None
    if not isinstance(value, kinds):
        problems.append(f"{section}.{key} has wrong type")
        return None
    return value


def config_from_dict(doc: dict, base_dir: Path | None = None) -> RunConfig:
    """Validate a parsed config document; collects every problem."""
    if not isinstance(doc, dict):
        raise ContractError("config root must be a table")
    problems: list[str] = []

    known = {"run", "paths", "sdn", "synthesis", "augment", "detector"}
    for section in sorted(set(doc) - known):
        problems.append(f"unknown section [{section}]")

    values: dict = {}
    for section, key, kinds, dest in (
        ("run", "category", str, "category"),
        ("run", "seed", int, "seed"),
        ("paths", "train_dir", str, "train_dir"),
        ("paths", "test_dir", str, "test_dir"),
        ("paths", "out_dir", str, "out_dir"),
        ("sdn", "v0", (int, float), "v0"),
        ("augment", "rotate", bool, "rotate"),
        ("augment", "noise", bool, "noise"),
        ("augment", "noise_std", (int, float), "noise_std"),
        ("augment", "dropout", bool, "dropout"),
        ("augment", "dropout_max", (int, float), "dropout_max"),
        ("detector", "k_feat", int, "k_feat"),
        ("detector", "bank_size", int, "bank_size"),
        ("detector", "k_agg", int, "k_agg"),
    ):
        got = _want(problems, doc, section, key, kinds)
        if got is not None:
            values[dest] = float(got) if kinds == (int, float) else got

    counts = _want(problems, doc, "synthesis", "counts", dict)
    if counts is not None:
        clean = {}
        for key, value in counts.items():
            if key not in DEFECT_TYPES:
                problems.append(f"synthesis.counts: unknown defect type {key!r}")
            elif isinstance(value, bool) or not isinstance(value, int) or value < 0:
                problems.append(f"synthesis.counts.{key} must be a non-negative integer")
            else:
                clean[key] = value
        values["counts"] = clean

    if values.get("seed") is not None and values["seed"] < 0:
        problems.append("run.seed must be >= 0")
    v0 = values.get("v0")
    if v0 is not None and not 0 < v0 < 2:
        problems.append("sdn.v0 must be in (0, 2)")
    if values.get("k_feat", 16) < 5:
        problems.append("detector.k_feat must be >= 5")
    if values.get("bank_size", 1) < 1:
        problems.append("detector.bank_size must be >= 1")
    k_agg = values.get("k_agg")
    if k_agg is not None:
        if k_agg < 0:
            problems.append("detector.k_agg must be >= 0")
        values["k_agg"] = k_agg or None  # 0 means automatic

    if problems:
        raise ContractError("invalid config: " + "; ".join(problems))
    return RunConfig(base_dir=base_dir or Path("."), **values)


def load_config(path) -> RunConfig:
    path = Path(path)
    raw = path.read_bytes()
    try:
        if path.suffix.lower() == ".json":
            doc = json.loads(raw.decode("utf-8"))
        else:
            doc = tomllib.loads(raw.decode("utf-8"))
    except (ValueError, UnicodeDecodeError) as exc:
        raise FormatError(f"cannot parse config {path}: {exc}") from exc
    return config_from_dict(doc, base_dir=path.parent)


def _augment_from(cfg: RunConfig) -> AugmentConfig | None:
    if not (cfg.rotate or cfg.noise or cfg.dropout):
        return None
    return AugmentConfig(
        rotate=cfg.rotate,
        noise=cfg.noise,
        noise_std=cfg.noise_std,
        dropout=cfg.dropout,
        dropout_max=cfg.dropout_max,
        seed=cfg.seed,
    )


def _scan_cloud_files(directory: Path) -> list[Path]:
    """Cloud files under a directory, sorted for determinism.

    `.mask.ply` companions are label channels, not standalone clouds.
    """
    if not directory.is_dir():
        raise FileNotFoundError(f"not a directory: {directory}")
    found = [
        p
        for pattern in ("*.ply", "*.xyz")
        for p in directory.rglob(pattern)
        if not p.name.endswith(".mask.ply")
    ]
    return sorted(found, key=lambda p: p.as_posix())


def _ensured_normals(cloud):
    if cloud.has_normals:
        return cloud
    return estimate_normals(cloud, min(16, len(cloud) - 1))


def _write_json(path: Path, doc) -> None:
    path.write_text(json.dumps(doc, sort_keys=True, indent=2) + "\n", encoding="utf-8")


# ---------------------------------------------------------------- commands


def cmd_synth(args) -> int:
    cloud = load_cloud(args.input)
    if args.instruction:
        instr = parse_instruction(Path(args.instruction).read_text(encoding="utf-8"))
        report = validate(instr, cloud)
        if not report.valid:
            raise ValidationError(
                "instruction rejected by the validator", report=report.to_dict()
            )
        origin = "file"
    else:
        instr = fallback_template(args.type, seed=args.seed)
        origin = ORIGIN_RULE

    out, mask, provenance = execute(instr, cloud, origin=origin)

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    base = f"{Path(args.input).stem}_{instr.type}_s{instr.seed}"
    cloud_path = out_dir / f"{base}.ply"
    mask_path = out_dir / f"{base}.mask.ply"
    prov_path = out_dir / f"{base}.provenance.json"
    save_cloud(out, None, cloud_path)
    save_cloud(out, mask, mask_path)
    _write_json(prov_path, provenance)
    for p in (cloud_path, mask_path, prov_path):
        print(p)
    return EXIT_OK


def cmd_batch(args) -> int:
    cfg = load_config(args.config)
    src_paths = _scan_cloud_files(cfg.path("train_dir"))
    if not src_paths:
        raise ContractError(f"no source clouds in {cfg.path('train_dir')}")
    sources = [load_cloud(p) for p in src_paths]
    profile = fit_sdn_profile(sources, v0=cfg.v0, category=cfg.category)

    out_dir = cfg.path("out_dir") / "corpus"
    manifest = batch_synthesize(
        sources,
        profile,
        cfg.counts,
        out_dir,
        cfg=_augment_from(cfg),
        seed=cfg.seed,
        workers=args.workers,
    )
    print(out_dir / "manifest.json")
    if manifest["skipped"]:
        summary = {
            "code": "partial_failure",
            "message": f"{len(manifest['skipped'])} of "
            f"{len(manifest['entries']) + len(manifest['skipped'])} entries skipped",
            "detail": [
                {"id": s["id"], "error": s["error"]} for s in manifest["skipped"]
            ],
        }
        sys.stderr.write(json.dumps(summary, sort_keys=True) + "\n")
        return EXIT_VALIDATION
    return EXIT_OK


def cmd_fit(args) -> int:
    cfg = load_config(args.config)
    train_dir = Path(args.train_dir) if args.train_dir else cfg.path("train_dir")
    paths = _scan_cloud_files(train_dir)
    if not paths:
        raise ContractError(f"no training clouds in {train_dir}")
    clouds = [_ensured_normals(load_cloud(p)) for p in paths]

    profile = fit_sdn_profile(clouds, v0=cfg.v0, category=cfg.category)
    feats = [extract_features(apply_sdn(c, profile)[0], cfg.k_feat) for c in clouds]
    total = sum(len(f.features) for f in feats)
    bank = build_prototypes(feats, min(cfg.bank_size, total), profile_ref=cfg.category)

    out_dir = cfg.path("out_dir")
    out_dir.mkdir(parents=True, exist_ok=True)
    profile_path = out_dir / "profile.json"
    bank_path = out_dir / "bank.json"
    save_profile(profile, profile_path)
    save_bank(bank, bank_path)
    print(profile_path)
    print(bank_path)
    return EXIT_OK


def cmd_eval(args) -> int:
    cfg = load_config(args.config)
    out_dir = cfg.path("out_dir")
    bank = load_bank(Path(args.bank) if args.bank else out_dir / "bank.json")
    profile = load_profile(Path(args.profile) if args.profile else out_dir / "profile.json")

    test_dir = Path(args.test_dir) if args.test_dir else cfg.path("test_dir")
    paths = _scan_cloud_files(test_dir)
    if not paths:
        raise ContractError(f"no test clouds in {test_dir}")

    items = []
    for p in paths:
        # corpus layout keeps labels in a .mask.ply twin of the clean file
        sidecar = p.with_name(p.stem + ".mask.ply")
        cloud, mask, _ = load_cloud_channels(sidecar if sidecar.is_file() else p)
        cloud = _ensured_normals(cloud)
        label = bool(mask is not None and mask.any())
        items.append((cloud, mask, label))

    report, artifacts = evaluate(
        items, bank, profile, k_agg=cfg.k_agg, workers=args.workers
    )

    eval_dir = out_dir / "eval"
    overlay_dir = eval_dir / "overlays"
    overlay_dir.mkdir(parents=True, exist_ok=True)
    for i, ((cloud, mask, _), art) in enumerate(zip(items, artifacts)):
        name = f"{i:05d}_{art['id']}"
        save_cloud(cloud, art["mask"], overlay_dir / f"{name}.ply", scores=art["scores"])
        # full-precision copy: the PLY score channel is rounded for display,
        # this sidecar is what metric recomputation reads
        _write_json(
            overlay_dir / f"{name}.json",
            {
                "id": art["id"],
                "label": art["label"],
                "k_agg": art["k_agg"],
                "object_score": art["object_score"],
                "scores_down": [float(s) for s in art["scores_down"]],
                "scores": [float(s) for s in art["scores"]],
                "mask": [int(b) for b in art["mask"]],
            },
        )
    metrics_path = eval_dir / "metrics.json"
    _write_json(metrics_path, report)
    print(metrics_path)
    print(json.dumps({"o_roc": report["o_roc"], "p_roc": report["p_roc"]}, sort_keys=True))
    return EXIT_OK


def cmd_serve(args) -> int:
    # bind check first so an occupied port is an environment error, not a
    # uvicorn SystemExit
    probe = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
    try:
        probe.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
        probe.bind((args.host, args.port))
    finally:
        probe.close()

    import signal

    import uvicorn

    from .service import create_app

    app = create_app(data_dir=args.data_dir)
    server = uvicorn.Server(
        uvicorn.Config(app, host=args.host, port=args.port, log_level="warning")
    )
    # after a graceful shutdown uvicorn re-raises the captured signal with
    # the original disposition restored; park no-ops there so SIGTERM and
    # ctrl-c end the command with exit code 0
    signal.signal(signal.SIGTERM, lambda signum, frame: None)
    signal.signal(signal.SIGINT, lambda signum, frame: None)
    server.run()
    return EXIT_OK


# ------------------------------------------------------------------- main


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="defectforge",
        description="Point-cloud defect synthesis and anomaly detection toolkit.",
    )
    parser.add_argument(
        "--print-config",
        action="store_true",
        help="print the default config as TOML and exit",
    )
    sub = parser.add_subparsers(dest="command", metavar="command")

    p = sub.add_parser("synth", help="synthesize one defect onto a cloud")
    p.add_argument("--in", dest="input", required=True, help="input cloud (PLY/XYZ)")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--type", choices=DEFECT_TYPES, help="defect type (template)")
    group.add_argument("--instruction", help="instruction JSON file")
    p.add_argument("--seed", type=int, default=0, help="template seed (with --type)")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("batch", help="synthesize a corpus from a config")
    p.add_argument("--config", required=True, help="TOML or JSON config file")
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_batch)

    p = sub.add_parser("fit", help="fit normalization profile and prototype bank")
    p.add_argument("--config", required=True)
    p.add_argument("--train-dir", help="override paths.train_dir")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("eval", help="score a test directory against a bank")
    p.add_argument("--config", required=True)
    p.add_argument("--test-dir", help="override paths.test_dir")
    p.add_argument("--bank", help="bank file (default <out_dir>/bank.json)")
    p.add_argument("--profile", help="profile file (default <out_dir>/profile.json)")
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("serve", help="run the studio HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8321)
    p.add_argument("--data-dir", help="directory of clouds to preload")
    p.set_defaults(func=cmd_serve)

    return parser


def _fail(exc: BaseException) -> int:
    detail = getattr(exc, "report", None)
    code = getattr(exc, "code", None) or "io_error"
    line = json.dumps(
        {"code": code, "message": str(exc), "detail": detail}, sort_keys=True
    )
    sys.stderr.write(line + "\n")
    return EXIT_ENVIRONMENT if isinstance(exc, _ENVIRONMENT_ERRORS) else EXIT_VALIDATION


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.print_config:
        sys.stdout.write(default_config_text())
        return EXIT_OK
    if not args.command:
        parser.print_usage(sys.stderr)
        return EXIT_VALIDATION
    try:
        return args.func(args)
    except (DefectForgeError, OSError) as exc:
        return _fail(exc)


if __name__ == "__main__":
    raise SystemExit(main())
