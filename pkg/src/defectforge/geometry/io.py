"""ASCII point-cloud I/O: PLY 1.0 (ascii only) and whitespace XYZ text.

Floats are serialized with 9 significant digits; save followed by load
followed by save reproduces the file byte for byte.
"""

from __future__ import annotations

import os

import numpy as np

from ..errors import ContractError, FormatError
from .cloud import PointCloud

_SCALAR_TYPES = {
    "char", "uchar", "int8", "uint8",
    "short", "ushort", "int16", "uint16",
    "int", "uint", "int32", "uint32",
    "float", "float32", "double", "float64",
}


def format_float(x: float) -> str:
    return "%.9g" % x


def _parse_ply(lines: list[str], path: str):
    if not lines or lines[0].strip() != "ply":
        raise FormatError(f"{path}:1: not a PLY file (missing 'ply' magic)")
    elements: list[tuple[str, int, list[tuple[str, str]]]] = []
    fmt_seen = False
    i = 1
    while i < len(lines):
        line = lines[i].strip()
        lineno = i + 1
        i += 1
        if not line or line.startswith("comment") or line.startswith("obj_info"):
            continue
        tokens = line.split()
        if tokens[0] == "format":
            if len(tokens) < 2 or tokens[1] != "ascii":
                raise FormatError(f"{path}:{lineno}: only ascii PLY is supported")
            fmt_seen = True
        elif tokens[0] == "element":
            if len(tokens) != 3:
                raise FormatError(f"{path}:{lineno}: malformed element declaration")
            try:
                count = int(tokens[2])
            except ValueError:
                raise FormatError(f"{path}:{lineno}: non-integer element count")
            elements.append((tokens[1], count, []))
        elif tokens[0] == "property":
            if not elements:
                raise FormatError(f"{path}:{lineno}: property before any element")
            if tokens[1] == "list":
                if len(tokens) != 5:
                    raise FormatError(f"{path}:{lineno}: malformed list property")
                elements[-1][2].append(("list", tokens[4]))
            else:
                if len(tokens) != 3 or tokens[1] not in _SCALAR_TYPES:
                    raise FormatError(f"{path}:{lineno}: unsupported property type")
                elements[-1][2].append((tokens[1], tokens[2]))
        elif tokens[0] == "end_header":
            if not fmt_seen:
                raise FormatError(f"{path}:{lineno}: missing format declaration")
            return elements, i
        else:
            raise FormatError(f"{path}:{lineno}: unknown header keyword '{tokens[0]}'")
    raise FormatError(f"{path}: header never terminated by end_header")


def _load_ply(path: str):
    with open(path, "r", encoding="ascii", errors="strict") as fh:
        lines = fh.read().splitlines()
    return _read_ply(lines, path)


def _read_ply(lines: list[str], path: str):
    if not lines:
        raise FormatError(f"{path}:1: empty file")
    elements, body_start = _parse_ply(lines, path)

    vertex_data = None
    cursor = body_start
    for name, count, props in elements:
        if name == "vertex":
            if any(t == "list" for t, _ in props):
                raise FormatError(f"{path}: list properties on vertex are unsupported")
            cols = [p for _, p in props]
            rows = np.empty((count, len(cols)), dtype=np.float64)
            for r in range(count):
                if cursor >= len(lines):
                    raise FormatError(
                        f"{path}:{len(lines)}: vertex element declares {count} rows "
                        f"but the file ends after {r}"
                    )
                parts = lines[cursor].split()
                lineno = cursor + 1
                cursor += 1
                if len(parts) != len(cols):
                    raise FormatError(
                        f"{path}:{lineno}: expected {len(cols)} values, got {len(parts)}"
                    )
                try:
                    rows[r] = [float(v) for v in parts]
                except ValueError:
                    raise FormatError(f"{path}:{lineno}: non-numeric vertex record")
            vertex_data = (cols, rows)
        else:
            # skip one line per row of any other ascii element
            cursor += count
    if vertex_data is None:
        raise FormatError(f"{path}: no vertex element")
    return vertex_data


def _cloud_from_vertex(cols: list[str], rows: np.ndarray, path: str, cloud_id: str):
    idx = {c: j for j, c in enumerate(cols)}
    for axis in ("x", "y", "z"):
        if axis not in idx:
            raise FormatError(f"{path}: vertex element lacks '{axis}' property")
    if len(rows) == 0:
        raise FormatError(f"{path}: vertex element is empty")
    points = rows[:, [idx["x"], idx["y"], idx["z"]]]
    normals = None
    if all(a in idx for a in ("nx", "ny", "nz")):
        normals = rows[:, [idx["nx"], idx["ny"], idx["nz"]]]
    mask = None
    if "anomaly" in idx:
        mask = rows[:, idx["anomaly"]].astype(np.int64) != 0
    scores = rows[:, idx["score"]].copy() if "score" in idx else None
    return PointCloud(points, normals, cloud_id), mask, scores


def _load_xyz(path: str, cloud_id: str) -> PointCloud:
    pts, nrm = [], []
    with open(path, "r", encoding="ascii") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if len(parts) not in (3, 6):
                raise FormatError(f"{path}:{lineno}: expected 3 or 6 values per line")
            try:
                vals = [float(v) for v in parts]
            except ValueError:
                raise FormatError(f"{path}:{lineno}: non-numeric record")
            pts.append(vals[:3])
            if len(parts) == 6:
                nrm.append(vals[3:])
    if not pts:
        raise FormatError(f"{path}:1: file contains no points")
    if nrm and len(nrm) != len(pts):
        raise FormatError(f"{path}: normals present on only some lines")
    return PointCloud(np.array(pts), np.array(nrm) if nrm else None, cloud_id)


def _infer_format(path: str, format: str | None) -> str:
    if format is not None:
        if format not in ("ply-ascii", "xyz-text"):
            raise ContractError(f"unknown format '{format}'")
        return format
    ext = os.path.splitext(path)[1].lower()
    if ext == ".ply":
        return "ply-ascii"
    if ext == ".xyz":
        return "xyz-text"
    raise ContractError(f"cannot infer format from extension of '{path}'")


def parse_ply_text(text: str, cloud_id: str = "upload"):
    """Parse an ASCII PLY document held in memory (e.g. an HTTP upload body).

    Returns (cloud, mask or None, scores or None) like load_cloud_channels.
    """
    label = f"<{cloud_id}>"
    cols, rows = _read_ply(text.splitlines(), label)
    return _cloud_from_vertex(cols, rows, label, cloud_id)


def load_cloud(path: str, format: str | None = None) -> PointCloud:
    """Load a cloud from ASCII PLY or XYZ text (format inferred from extension)."""
    cloud, _, _ = load_cloud_channels(path, format)
    return cloud


def load_cloud_channels(path: str, format: str | None = None):
    """Like load_cloud but also returns the anomaly mask and score channels.

    Returns (cloud, mask or None, scores or None); XYZ files never carry
    extra channels.
    """
    fmt = _infer_format(path, format)
    cloud_id = os.path.splitext(os.path.basename(path))[0]
    if fmt == "xyz-text":
        return _load_xyz(path, cloud_id), None, None
    cols, rows = _load_ply(path)
    return _cloud_from_vertex(cols, rows, path, cloud_id)


def serialize_ply(
    cloud: PointCloud,
    mask: np.ndarray | None = None,
    scores: np.ndarray | None = None,
) -> str:
    """Render a cloud as an ASCII PLY document (returned as a string)."""
    n = len(cloud)
    if mask is not None:
        mask = np.asarray(mask)
        if len(mask) != n:
            raise ContractError(f"mask length {len(mask)} != point count {n}")
    if scores is not None:
        scores = np.asarray(scores, dtype=np.float64)
        if len(scores) != n:
            raise ContractError(f"scores length {len(scores)} != point count {n}")

    header = ["ply", "format ascii 1.0", f"element vertex {n}"]
    header += [f"property double {a}" for a in ("x", "y", "z")]
    if cloud.has_normals:
        header += [f"property double {a}" for a in ("nx", "ny", "nz")]
    if mask is not None:
        header.append("property int anomaly")
    if scores is not None:
        header.append("property double score")
    header.append("end_header")

    out = list(header)
    pts = cloud.points
    nrm = cloud.normals
    for i in range(n):
        row = [format_float(v) for v in pts[i]]
        if nrm is not None:
            row += [format_float(v) for v in nrm[i]]
        if mask is not None:
            row.append(str(int(bool(mask[i]))))
        if scores is not None:
            row.append(format_float(scores[i]))
        out.append(" ".join(row))
    return "\n".join(out) + "\n"


def save_cloud(
    cloud: PointCloud,
    mask: np.ndarray | None,
    path: str,
    scores: np.ndarray | None = None,
) -> None:
    """Write an ASCII PLY; an optional mask adds an int 'anomaly' property."""
    text = serialize_ply(cloud, mask, scores)
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write(text)
