"""Geometric primitives shared by synthesis and detection."""

from .analysis import estimate_normals, pca_frame
from .cloud import Plane, PointCloud
from .hull import HullMesh, convex_hull, coplanarity_ratio, distance_to_hull_surface
from .io import (
    format_float,
    load_cloud,
    load_cloud_channels,
    parse_ply_text,
    save_cloud,
    serialize_ply,
)
from .neighbors import KnnGraph, build_knn_graph, knn_indices
from .sphere import BoundingSphere, min_bounding_sphere
from .voxel import voxel_downsample

__all__ = [
    "Plane",
    "PointCloud",
    "KnnGraph",
    "BoundingSphere",
    "HullMesh",
    "load_cloud",
    "load_cloud_channels",
    "parse_ply_text",
    "save_cloud",
    "serialize_ply",
    "format_float",
    "estimate_normals",
    "pca_frame",
    "build_knn_graph",
    "knn_indices",
    "min_bounding_sphere",
    "voxel_downsample",
    "convex_hull",
    "coplanarity_ratio",
    "distance_to_hull_surface",
]
