"""Adaptive quad-tree fast multipole method for 2D point-charge potentials."""

from .expansions import (
    Expansion,
    evaluate_local,
    evaluate_multipole,
    expansion_order,
    fundamental_solution,
    l2l,
    m2l,
    m2m,
    p2m,
)
from .field import (
    FieldSample,
    PointCharge,
    charge_arrays,
    eval_direct,
    eval_direct_arrays,
    evaluate,
    evaluate_arrays,
    field_scale,
)
from .tree import (
    DEFAULT_LEAF_CAPACITY,
    DEFAULT_MAX_DEPTH,
    Box,
    QuadTree,
    QuadTreeNode,
    bounding_box,
    build_tree,
)

__all__ = [
    "Box",
    "DEFAULT_LEAF_CAPACITY",
    "DEFAULT_MAX_DEPTH",
    "Expansion",
    "FieldSample",
    "PointCharge",
    "QuadTree",
    "QuadTreeNode",
    "bounding_box",
    "build_tree",
    "charge_arrays",
    "eval_direct",
    "eval_direct_arrays",
    "evaluate",
    "evaluate_arrays",
    "evaluate_local",
    "evaluate_multipole",
    "expansion_order",
    "field_scale",
    "fundamental_solution",
    "l2l",
    "m2l",
    "m2m",
    "p2m",
]
