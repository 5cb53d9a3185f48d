"""Labeled partitions of intervals, circles, surfaces and boxes, and moves between them."""

from .builders import brick_wall_2d, build_surface_partition, conforming_polygons, face_margins, label_faces
from .moves import (cut_along, join_surfaces, line_halfedges, merge_faces, random_surface_moves, refine_face,
                    relabel_face, sub_partition)
from .paths import (LabeledLoopPartition, LabeledPathPartition, build_loop_partition, build_path_partition,
                    concat_partitions, constant_partition, is_valid_path, loop_from_path_partition, merge_path,
                    random_loop_partition, random_path_moves, refine_path, relabel_path, require_valid_path,
                    split_partition)
from .surface import LabeledSurfacePartition, SurfaceDomain, polygon_partition
from .volume import LabeledVolumePartition, brick_lattice, build_volume_partition

__all__ = [
    "LabeledLoopPartition", "LabeledPathPartition", "LabeledSurfacePartition", "LabeledVolumePartition",
    "SurfaceDomain", "brick_lattice", "brick_wall_2d", "build_loop_partition", "build_path_partition",
    "build_surface_partition", "build_volume_partition", "concat_partitions", "conforming_polygons",
    "constant_partition", "cut_along", "face_margins", "is_valid_path", "join_surfaces", "label_faces",
    "line_halfedges", "loop_from_path_partition", "merge_faces", "merge_path", "polygon_partition",
    "random_loop_partition", "random_path_moves", "random_surface_moves", "refine_face", "refine_path",
    "relabel_face", "relabel_path", "require_valid_path", "split_partition", "sub_partition",
]
