"""Adaptive quad-tree decomposition of a square 2D domain."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

DEFAULT_LEAF_CAPACITY = 30
DEFAULT_MAX_DEPTH = 20


@dataclass(frozen=True)
class Box:
    """Axis-aligned square cell: center, half-width, refinement level."""

    center: np.ndarray
    half: float
    level: int = 0

    def __post_init__(self):
        object.__setattr__(self, "center", np.asarray(self.center, dtype=float))
        if self.half <= 0:
            raise ValueError(f"box half-width must be positive, got {self.half}")
        if self.level < 0:
            raise ValueError(f"box level must be non-negative, got {self.level}")

    @property
    def side(self) -> float:
        return 2.0 * self.half

    @property
    def lo(self) -> np.ndarray:
        return self.center - self.half

    @property
    def hi(self) -> np.ndarray:
        return self.center + self.half

    def child(self, quadrant: int) -> "Box":
        """Quadrant order: 0=SW, 1=SE, 2=NW, 3=NE."""
        h = self.half / 2.0
        dx = h if quadrant & 1 else -h
        dy = h if quadrant & 2 else -h
        return Box(self.center + (dx, dy), h, self.level + 1)

    def gap_to(self, other: "Box") -> float:
        """Euclidean distance between the two closed squares (0 if they touch)."""
        d = np.abs(self.center - other.center) - (self.half + other.half)
        return float(np.hypot(max(d[0], 0.0), max(d[1], 0.0)))

    def touches(self, other: "Box", tol: float = 1e-12) -> bool:
        """Closed boxes intersect (edge or corner contact counts)."""
        d = np.abs(self.center - other.center) - (self.half + other.half)
        slack = tol * max(self.half, other.half)
        return bool(d[0] <= slack and d[1] <= slack)

    def well_separated_from(self, other: "Box", tol: float = 1e-12) -> bool:
        """Squares are well separated when their gap is at least the larger side."""
        need = 2.0 * max(self.half, other.half)
        return self.gap_to(other) >= need * (1.0 - tol)


class QuadTreeNode:
    """One cell of the tree; leaves carry the indices of their points."""

    __slots__ = ("box", "index", "parent", "children", "indices")

    def __init__(self, box: Box, index: int, parent: int):
        self.box = box
        self.index = index
        self.parent = parent
        self.children: tuple[QuadTreeNode, ...] = ()
        self.indices: np.ndarray | None = None  # leaves only

    @property
    def is_leaf(self) -> bool:
        return not self.children

    @property
    def level(self) -> int:
        return self.box.level


@dataclass
class QuadTree:
    """Adaptive quad-tree over a fixed point set.

    Immutable after construction; the split rule looks only at point
    locations and the leaf capacity, never at charge values.
    """

    points: np.ndarray
    box: Box
    leaf_capacity: int
    max_depth: int
    nodes: list[QuadTreeNode] = field(default_factory=list)
    point_leaf: np.ndarray | None = None  # leaf node index per point

    @property
    def root(self) -> QuadTreeNode:
        return self.nodes[0]

    @property
    def n_points(self) -> int:
        return len(self.points)

    def leaves(self) -> list[QuadTreeNode]:
        return [n for n in self.nodes if n.is_leaf]

    def nonempty_leaves(self) -> list[QuadTreeNode]:
        return [n for n in self.nodes if n.is_leaf and len(n.indices) > 0]

    def depth(self) -> int:
        return max(n.level for n in self.nodes)

    def bin_points(self, pts: np.ndarray) -> np.ndarray:
        """Assign arbitrary in-box points to leaves; returns leaf node indices."""
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        _check_in_box(pts, self.box, what="point")
        out = np.empty(len(pts), dtype=np.intp)

        def descend(node: QuadTreeNode, idx: np.ndarray) -> None:
            if node.is_leaf:
                out[idx] = node.index
                return
            quad = _quadrants(pts[idx], node.box.center)
            for q, child in enumerate(node.children):
                sub = idx[quad == q]
                if len(sub):
                    descend(child, sub)

        descend(self.root, np.arange(len(pts), dtype=np.intp))
        return out


def _quadrants(pts: np.ndarray, center: np.ndarray) -> np.ndarray:
    """Half-open quadrant rule: points on a split line go east/north."""
    east = pts[:, 0] >= center[0]
    north = pts[:, 1] >= center[1]
    return east.astype(np.int8) + 2 * north.astype(np.int8)


def _check_in_box(pts: np.ndarray, box: Box, what: str) -> None:
    lo, hi = box.lo, box.hi
    bad = (pts[:, 0] < lo[0]) | (pts[:, 0] > hi[0]) | (pts[:, 1] < lo[1]) | (pts[:, 1] > hi[1])
    if bad.any():
        i = int(np.argmax(bad))
        raise ValueError(
            f"{what} {i} at ({pts[i, 0]}, {pts[i, 1]}) lies outside the root box "
            f"[{lo[0]}, {hi[0]}] x [{lo[1]}, {hi[1]}]"
        )


def bounding_box(pts: np.ndarray, pad: float = 0.0) -> Box:
    """Tight centered square covering the points."""
    lo = pts.min(axis=0)
    hi = pts.max(axis=0)
    center = (lo + hi) / 2.0
    half = float(max((hi - lo).max() / 2.0 + pad, 1e-9))
    return Box(center, half, 0)


def build_tree(
    points,
    leaf_capacity: int = DEFAULT_LEAF_CAPACITY,
    max_depth: int = DEFAULT_MAX_DEPTH,
    box: Box | None = None,
) -> QuadTree:
    """Recursively quadrisect until every leaf holds at most ``leaf_capacity``
    points or sits at ``max_depth``.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise ValueError(f"points must be an (n, 2) array, got shape {pts.shape}")
    if leaf_capacity < 1:
        raise ValueError(f"leaf_capacity must be >= 1, got {leaf_capacity}")
    if max_depth < 1:
        raise ValueError(f"max_depth must be >= 1, got {max_depth}")
    if box is None:
        if len(pts) == 0:
            box = Box(np.zeros(2), 1.0, 0)
        else:
            box = bounding_box(pts)
    elif box.level != 0:
        raise ValueError("root box must be at level 0")
    if len(pts):
        _check_in_box(pts, box, what="point")

    tree = QuadTree(points=pts.copy(), box=box, leaf_capacity=leaf_capacity, max_depth=max_depth)
    point_leaf = np.empty(len(pts), dtype=np.intp)

    def grow(b: Box, idx: np.ndarray, parent: int) -> QuadTreeNode:
        node = QuadTreeNode(b, index=len(tree.nodes), parent=parent)
        tree.nodes.append(node)
        if len(idx) <= leaf_capacity or b.level >= max_depth:
            node.indices = idx
            point_leaf[idx] = node.index
            return node
        quad = _quadrants(pts[idx], b.center)
        node.children = tuple(
            grow(b.child(q), idx[quad == q], node.index) for q in range(4)
        )
        return node

    grow(box, np.arange(len(pts), dtype=np.intp), parent=-1)
    tree.point_leaf = point_leaf
    return tree
