import numpy as np
import pytest

from defectforge.errors import ContractError, FormatError
from defectforge.geometry import (
    PointCloud,
    load_cloud,
    load_cloud_channels,
    save_cloud,
    serialize_ply,
)


def _random_cloud(rng, n=10, normals=True):
    pts = rng.normal(size=(n, 3)) * 3.7
    nrm = None
    if normals:
        nrm = rng.normal(size=(n, 3))
        nrm /= np.linalg.norm(nrm, axis=1, keepdims=True)
    return PointCloud(pts, nrm)


def test_ply_roundtrip_points(tmp_path, rng):
    cloud = _random_cloud(rng)
    path = tmp_path / "c.ply"
    save_cloud(cloud, None, str(path))
    back = load_cloud(str(path))
    # 9 significant digits: relative 1e-9, plus absolute floor for zeros
    assert np.allclose(back.points, cloud.points, rtol=1e-8, atol=1e-12)
    assert np.allclose(back.normals, cloud.normals, rtol=1e-8, atol=1e-12)


def test_ply_second_save_is_byte_identical(tmp_path, rng):
    cloud = _random_cloud(rng, n=25)
    p1, p2 = tmp_path / "a.ply", tmp_path / "b.ply"
    save_cloud(cloud, None, str(p1))
    save_cloud(load_cloud(str(p1)), None, str(p2))
    assert p1.read_bytes() == p2.read_bytes()


def test_ply_mask_channel(tmp_path, rng):
    cloud = _random_cloud(rng, n=6, normals=False)
    mask = np.array([0, 1, 0, 1, 1, 0], dtype=bool)
    path = tmp_path / "m.ply"
    save_cloud(cloud, mask, str(path))
    text = path.read_text()
    assert "property int anomaly" in text
    rows = text.splitlines()[text.splitlines().index("end_header") + 1 :]
    assert [int(r.split()[-1]) for r in rows] == [0, 1, 0, 1, 1, 0]
    _, back_mask, _ = load_cloud_channels(str(path))
    assert np.array_equal(back_mask, mask)


def test_ply_score_channel(tmp_path, rng):
    cloud = _random_cloud(rng, n=4, normals=False)
    scores = np.array([0.5, 1.25, 0.0, 9.0])
    path = tmp_path / "s.ply"
    save_cloud(cloud, None, str(path), scores=scores)
    _, _, back = load_cloud_channels(str(path))
    assert np.allclose(back, scores, atol=1e-9)


def test_mask_length_mismatch(tmp_path, rng):
    cloud = _random_cloud(rng, n=4)
    with pytest.raises(ContractError):
        save_cloud(cloud, np.zeros(3), str(tmp_path / "x.ply"))


def test_ply_vertex_count_mismatch(tmp_path):
    text = "\n".join(
        [
            "ply",
            "format ascii 1.0",
            "element vertex 5",
            "property double x",
            "property double y",
            "property double z",
            "end_header",
            "0 0 0",
            "1 0 0",
            "2 0 0",
            "3 0 0",
        ]
    )
    path = tmp_path / "short.ply"
    path.write_text(text + "\n")
    with pytest.raises(FormatError, match="declares 5"):
        load_cloud(str(path))


def test_ply_non_numeric_names_line(tmp_path):
    text = "\n".join(
        [
            "ply",
            "format ascii 1.0",
            "element vertex 2",
            "property double x",
            "property double y",
            "property double z",
            "end_header",
            "0 0 0",
            "0 zap 0",
        ]
    )
    path = tmp_path / "bad.ply"
    path.write_text(text + "\n")
    with pytest.raises(FormatError, match=":9"):
        load_cloud(str(path))


def test_binary_ply_rejected(tmp_path):
    path = tmp_path / "bin.ply"
    path.write_text("ply\nformat binary_little_endian 1.0\nelement vertex 0\nend_header\n")
    with pytest.raises(FormatError, match="ascii"):
        load_cloud(str(path))


def test_ply_extra_properties_ignored(tmp_path):
    text = "\n".join(
        [
            "ply",
            "format ascii 1.0",
            "comment colored",
            "element vertex 2",
            "property float x",
            "property float y",
            "property float z",
            "property uchar red",
            "end_header",
            "0 0 0 255",
            "1 2 3 17",
        ]
    )
    path = tmp_path / "extra.ply"
    path.write_text(text + "\n")
    cloud = load_cloud(str(path))
    assert np.allclose(cloud.points, [[0, 0, 0], [1, 2, 3]])
    assert cloud.normals is None


def test_ply_skips_face_element(tmp_path):
    text = "\n".join(
        [
            "ply",
            "format ascii 1.0",
            "element vertex 3",
            "property double x",
            "property double y",
            "property double z",
            "element face 1",
            "property list uchar int vertex_indices",
            "end_header",
            "0 0 0",
            "1 0 0",
            "0 1 0",
            "3 0 1 2",
        ]
    )
    path = tmp_path / "faced.ply"
    path.write_text(text + "\n")
    assert len(load_cloud(str(path))) == 3


def test_xyz_roundtrip(tmp_path):
    path = tmp_path / "c.xyz"
    path.write_text("0 0 0\n1 0 0\n")
    cloud = load_cloud(str(path))
    assert np.allclose(cloud.points, [[0, 0, 0], [1, 0, 0]])


def test_xyz_bad_line(tmp_path):
    path = tmp_path / "c.xyz"
    path.write_text("0 0 0\n1 0\n")
    with pytest.raises(FormatError, match=":2"):
        load_cloud(str(path))


def test_empty_file(tmp_path):
    path = tmp_path / "c.ply"
    path.write_text("")
    with pytest.raises(FormatError):
        load_cloud(str(path))


def test_nine_significant_digits():
    cloud = PointCloud(np.array([[1.0 / 3.0, 123456789012.0, 1e-20]]))
    text = serialize_ply(cloud)
    row = text.splitlines()[-1]
    assert row.split() == ["0.333333333", "1.23456789e+11", "1e-20"]
