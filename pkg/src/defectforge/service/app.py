"""HTTP studio service: upload, preview, validate, synthesize, score.

App factory; all state lives on app.state (store, banks, budgets) so
tests can build isolated instances. Every error response is one
{code, message, detail} JSON object.
"""

from __future__ import annotations

from pathlib import Path

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse, Response
from starlette.exceptions import HTTPException as StarletteHTTPException

from .. import __version__
from ..detector import (
    aggregate,
    default_k_agg,
    extract_features,
    load_bank,
    score_points,
    upsample_scores,
)
from ..errors import (
    ContractError,
    DefectForgeError,
    FormatError,
    ResourceLimitError,
    ValidationError,
)
from ..geometry import estimate_normals, parse_ply_text, serialize_ply
from ..instructions import execute, parse_instruction, validate
from ..pipeline import apply_sdn, load_profile
from .store import (
    DEFAULT_MAX_BYTES,
    DEFAULT_PREVIEW_BUDGET,
    SessionStore,
    StoredCloud,
    preview_indices,
)

# HTTP status per library error code; anything unlisted is a 400
_STATUS = {
    "validation_error": 422,
    "degenerate_geometry": 422,
    "unreachable_anchor": 422,
    "undefined_metric": 422,
    "resource_limit": 413,
    "configuration_error": 500,
    "transport_error": 502,
}


def _envelope(code: str, message: str, detail=None, status: int = 400) -> JSONResponse:
    return JSONResponse(
        {"code": code, "message": message, "detail": detail}, status_code=status
    )


def _ensured_normals(cloud):
    if cloud.has_normals:
        return cloud
    return estimate_normals(cloud, min(16, len(cloud) - 1))


def _not_found(kind: str, name: str) -> StarletteHTTPException:
    return StarletteHTTPException(status_code=404, detail=f"unknown {kind} '{name}'")


def create_app(
    data_dir=None,
    max_bytes: int = DEFAULT_MAX_BYTES,
    preview_budget: int = DEFAULT_PREVIEW_BUDGET,
) -> FastAPI:
    """Build the studio app, optionally preloading clouds and a bank.

    `data_dir` is scanned for `*.ply` clouds (`.mask.ply` companions are
    attached as label channels, as in the corpus layout) and for a
    `profile.json` + `bank.json` pair, registered as bank "default".
    """
    app = FastAPI(title="defectforge studio service", version=__version__)
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )

    store = SessionStore(max_bytes)
    banks: dict[str, tuple] = {}
    app.state.store = store
    app.state.banks = banks
    app.state.preview_budget = preview_budget

    def ingest(text: str, cloud_id: str) -> StoredCloud:
        """Parse, ensure normals, canonicalize; shared by upload and preload."""
        cloud, mask, _ = parse_ply_text(text, cloud_id)
        cloud = _ensured_normals(cloud)
        data = serialize_ply(cloud, mask).encode("ascii")
        return store.put(cloud, mask, data)

    if data_dir is not None:
        root = Path(data_dir)
        if not root.is_dir():
            raise ContractError(f"data_dir is not a directory: {root}")
        for p in sorted(root.rglob("*.ply"), key=lambda q: q.as_posix()):
            if p.name.endswith(".mask.ply"):
                continue
            sidecar = p.with_name(p.stem + ".mask.ply")
            source = sidecar if sidecar.is_file() else p
            ingest(source.read_text(encoding="ascii"), p.stem)
        bank_path = root / "bank.json"
        profile_path = root / "profile.json"
        if bank_path.is_file() and profile_path.is_file():
            banks["default"] = (load_bank(bank_path), load_profile(profile_path))

    def entry_or_404(cid: str) -> StoredCloud:
        entry = store.get(cid)
        if entry is None:
            raise _not_found("cloud", cid)
        return entry

    def preview_payload(entry_id, cloud, mask, budget: int) -> dict:
        idx = preview_indices(cloud.points, budget)
        return {
            "id": entry_id,
            "total": len(cloud),
            "count": int(len(idx)),
            "positions": cloud.points[idx].tolist(),
            "source_indices": idx.tolist(),
            "mask": None if mask is None else mask[idx].astype(int).tolist(),
        }

    # ------------------------------------------------------------ routes

    @app.get("/health")
    def health():
        return {"status": "ok", "version": __version__}

    @app.post("/clouds")
    async def upload(request: Request):
        body = await request.body()
        if len(body) > store.max_bytes:
            raise ResourceLimitError(
                f"upload of {len(body)} bytes exceeds cap {store.max_bytes}"
            )
        try:
            text = body.decode("ascii")
        except UnicodeDecodeError as exc:
            raise FormatError(f"upload is not ascii text: {exc}") from exc
        entry = ingest(text, "upload")
        points = entry.cloud.points
        return {
            "id": entry.id,
            "point_count": len(entry.cloud),
            "bounds": [points.min(axis=0).tolist(), points.max(axis=0).tolist()],
        }

    @app.get("/clouds/{cid}/preview")
    def preview(cid: str, budget: int | None = None):
        entry = entry_or_404(cid)
        if budget is None:
            budget = app.state.preview_budget
        return preview_payload(entry.id, entry.cloud, entry.mask, budget)

    @app.get("/clouds/{cid}/download")
    def download(cid: str):
        entry = entry_or_404(cid)
        return Response(
            content=entry.data,
            media_type="application/octet-stream",
            headers={
                "Content-Disposition": f'attachment; filename="{entry.id}.ply"'
            },
        )

    @app.post("/clouds/{cid}/validate")
    async def validate_instruction(cid: str, request: Request):
        entry = entry_or_404(cid)
        instr = parse_instruction(await request.body())
        return validate(instr, entry.cloud).to_dict()

    @app.post("/clouds/{cid}/synthesize")
    async def synthesize(
        cid: str, request: Request, mode: str = "preview", budget: int | None = None
    ):
        entry = entry_or_404(cid)
        if mode not in ("preview", "commit"):
            raise ContractError(f"mode must be 'preview' or 'commit', got {mode!r}")
        instr = parse_instruction(await request.body())
        report = validate(instr, entry.cloud)
        if not report.valid:
            raise ValidationError(
                "instruction rejected by the validator", report=report.to_dict()
            )
        out, mask, provenance = execute(instr, entry.cloud, origin="studio")

        if mode == "commit":
            new = store.put(out, mask, serialize_ply(out, mask).encode("ascii"))
            return {
                "id": new.id,
                "point_count": len(out),
                "masked": int(mask.sum()),
                "links": {
                    "download": f"/clouds/{new.id}/download",
                    "preview": f"/clouds/{new.id}/preview",
                },
                "provenance": provenance,
            }

        if budget is None:
            budget = app.state.preview_budget
        payload = preview_payload(None, out, mask, budget)
        payload["masked"] = int(mask.sum())
        payload["provenance"] = provenance
        return payload

    @app.post("/clouds/{cid}/score")
    def score(cid: str, bank: str = "default"):
        entry = entry_or_404(cid)
        pack = app.state.banks.get(bank)
        if pack is None:
            raise _not_found("bank", bank)
        bank_obj, profile = pack
        down, inverse = apply_sdn(entry.cloud, profile)
        features = extract_features(down, bank_obj.fingerprint["k_feat"])
        scores_down = score_points(features, bank_obj)
        k_agg = default_k_agg(len(scores_down))
        return {
            "id": entry.id,
            "bank": bank,
            "k_agg": int(k_agg),
            "object_score": float(aggregate(scores_down, k_agg)),
            "scores_down": [float(s) for s in scores_down],
            "scores": [float(s) for s in upsample_scores(scores_down, inverse)],
        }

    # ---------------------------------------------------- error envelopes

    @app.exception_handler(DefectForgeError)
    async def on_library_error(request: Request, exc: DefectForgeError):
        return _envelope(
            exc.code,
            str(exc),
            getattr(exc, "report", None),
            _STATUS.get(exc.code, 400),
        )

    @app.exception_handler(StarletteHTTPException)
    async def on_http_error(request: Request, exc: StarletteHTTPException):
        code = {404: "not_found", 405: "method_not_allowed"}.get(
            exc.status_code, "http_error"
        )
        return _envelope(code, str(exc.detail), None, exc.status_code)

    @app.exception_handler(RequestValidationError)
    async def on_request_error(request: Request, exc: RequestValidationError):
        detail = [
            {"loc": [str(part) for part in err.get("loc", ())], "msg": str(err.get("msg", ""))}
            for err in exc.errors()
        ]
        return _envelope("bad_request", "invalid request parameters", detail, 400)

    return app
