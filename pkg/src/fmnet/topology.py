"""Spatial graphs over 2D point sets: multipole-tree backbones, disk graphs,
Delaunay/Gabriel triangulation graphs, and range restrictions."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components, minimum_spanning_tree
from scipy.spatial import Delaunay as _SciDelaunay
from scipy.spatial import QhullError, cKDTree

from .fmm.tree import QuadTree

INTRA_LEAF = "intra-leaf"
ADJACENT_LEAF = "adjacent-leaf"
ISOLATION_PATCH = "isolation-patch"
COMPONENT_PATCH = "component-patch"
PLAIN = "plain"
EDGE_LABELS = (INTRA_LEAF, ADJACENT_LEAF, ISOLATION_PATCH, COMPONENT_PATCH, PLAIN)

_LABEL_DTYPE = "U16"


@dataclass(frozen=True)
class SpatialGraph:
    """Undirected graph embedded at fixed 2D positions.

    Edges are canonical (u < v), lexicographically sorted and deduplicated;
    every edge carries its Euclidean length and a construction label.
    """

    positions: np.ndarray
    edges: np.ndarray
    lengths: np.ndarray
    labels: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "positions", np.asarray(self.positions, dtype=float))
        object.__setattr__(self, "edges", np.asarray(self.edges, dtype=np.intp).reshape(-1, 2))
        object.__setattr__(self, "lengths", np.asarray(self.lengths, dtype=float))
        object.__setattr__(self, "labels", np.asarray(self.labels, dtype=_LABEL_DTYPE))

    @property
    def n(self) -> int:
        return len(self.positions)

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    def degrees(self) -> np.ndarray:
        deg = np.zeros(self.n, dtype=np.int64)
        if self.edge_count:
            np.add.at(deg, self.edges[:, 0], 1)
            np.add.at(deg, self.edges[:, 1], 1)
        return deg

    def edge_set(self) -> set[tuple[int, int]]:
        return {(int(u), int(v)) for u, v in self.edges}

    def adjacency(self, weighted: bool = False) -> coo_matrix:
        """Symmetric sparse adjacency; weights are lengths when ``weighted``."""
        u, v = self.edges[:, 0], self.edges[:, 1]
        w = self.lengths if weighted else np.ones(self.edge_count)
        return coo_matrix(
            (np.concatenate([w, w]), (np.concatenate([u, v]), np.concatenate([v, u]))),
            shape=(self.n, self.n),
        )

    def is_connected(self) -> bool:
        if self.n <= 1:
            return True
        if self.edge_count == 0:
            return False
        ncomp, _ = connected_components(self.adjacency().tocsr(), directed=False)
        return ncomp == 1


def _edge_lengths(positions: np.ndarray, pairs: np.ndarray) -> np.ndarray:
    d = positions[pairs[:, 0]] - positions[pairs[:, 1]]
    return np.hypot(d[:, 0], d[:, 1])


def make_graph(positions, pairs, labels) -> SpatialGraph:
    """Canonicalize (u < v), sort, and deduplicate an edge list.

    ``labels`` may be a scalar or one label per edge; the first-emitted label
    wins for duplicated pairs.
    """
    positions = np.asarray(positions, dtype=float)
    pairs = np.asarray(pairs, dtype=np.intp).reshape(-1, 2)
    if len(pairs) == 0:
        return SpatialGraph(positions, np.zeros((0, 2), dtype=np.intp),
                            np.zeros(0), np.zeros(0, dtype=_LABEL_DTYPE))
    if np.any(pairs[:, 0] == pairs[:, 1]):
        raise ValueError("self-loops are not allowed")
    lab = np.asarray(labels, dtype=_LABEL_DTYPE)
    if lab.ndim == 0:
        lab = np.full(len(pairs), lab)
    pairs = np.sort(pairs, axis=1)
    order = np.lexsort((np.arange(len(pairs)), pairs[:, 1], pairs[:, 0]))
    pairs, lab = pairs[order], lab[order]
    keep = np.ones(len(pairs), dtype=bool)
    keep[1:] = np.any(pairs[1:] != pairs[:-1], axis=1)
    pairs, lab = pairs[keep], lab[keep]
    return SpatialGraph(positions, pairs, _edge_lengths(positions, pairs), lab)


def fmn(tree: QuadTree, positions) -> SpatialGraph:
    """Backbone graph grown from the multipole tree's leaf structure.

    Rules: (1) clique inside every nonempty leaf box; (2) one edge between the
    closest cross-pair of every pair of adjacent nonempty leaves; (3) any
    vertex still isolated links to its global nearest neighbor.  If the result
    is still disconnected, shortest component-bridging edges are added until
    it is; those patch edges are labeled separately and counted.
    """
    positions = np.asarray(positions, dtype=float)
    if tree.n_points != len(positions) or not np.array_equal(tree.points, positions):
        raise ValueError("tree was not built over these positions")
    n = len(positions)
    pairs: list[tuple[int, int]] = []
    labels: list[str] = []

    leaves = tree.nonempty_leaves()
    for leaf in leaves:
        idx = leaf.indices
        if len(idx) >= 2:
            iu, iv = np.triu_indices(len(idx), k=1)
            pairs.extend(zip(idx[iu], idx[iv]))
            labels.extend([INTRA_LEAF] * len(iu))

    for a in range(len(leaves)):
        ia = leaves[a].indices
        pa = positions[ia]
        for b in range(a + 1, len(leaves)):
            if not leaves[a].box.touches(leaves[b].box):
                continue
            ib = leaves[b].indices
            d2 = ((pa[:, None, :] - positions[ib][None, :, :]) ** 2).sum(axis=2)
            flat = int(np.argmin(d2))  # first minimum = lowest-index pair
            pairs.append((ia[flat // len(ib)], ib[flat % len(ib)]))
            labels.append(ADJACENT_LEAF)

    degree = np.zeros(n, dtype=np.int64)
    for u, v in pairs:
        degree[u] += 1
        degree[v] += 1
    isolated = np.flatnonzero(degree == 0)
    if len(isolated) and n >= 2:
        for u in isolated:
            d2 = ((positions - positions[u]) ** 2).sum(axis=1)
            d2[u] = np.inf
            v = int(np.argmin(d2))
            pairs.append((u, v))
            labels.append(ISOLATION_PATCH)

    g = make_graph(positions, pairs, labels)
    return _patch_components(g)


def _patch_components(g: SpatialGraph) -> SpatialGraph:
    """Join remaining components with shortest bridging edges (usually none)."""
    if g.n <= 1 or g.is_connected():
        return g
    positions = g.positions
    d2 = ((positions[:, None, :] - positions[None, :, :]) ** 2).sum(axis=2)
    pairs = [tuple(e) for e in g.edges]
    labels = list(g.labels)
    while True:
        adj = make_graph(positions, pairs, labels)
        ncomp, comp = connected_components(adj.adjacency().tocsr(), directed=False)
        if ncomp == 1:
            return adj
        cross = comp[:, None] != comp[None, :]
        masked = np.where(cross, d2, np.inf)
        flat = int(np.argmin(masked))
        u, v = divmod(flat, g.n)
        pairs.append((u, v))
        labels.append(COMPONENT_PATCH)


def rgg(positions, r: float) -> SpatialGraph:
    """Disk graph: an edge between every pair at distance <= r."""
    if r <= 0:
        raise ValueError(f"range parameter must be positive, got {r}")
    positions = np.asarray(positions, dtype=float)
    pairs = cKDTree(positions).query_pairs(r, output_type="ndarray")
    return make_graph(positions, pairs, PLAIN)


def _collinear_chain(positions: np.ndarray) -> np.ndarray:
    """Edge list for a degenerate (collinear) point set: the sorted chain."""
    rel = positions - positions[0]
    span = np.hypot(rel[:, 0], rel[:, 1])
    direction = rel[int(np.argmax(span))]
    norm = np.hypot(*direction)
    if norm == 0:
        raise ValueError("points are coincident; triangulation is undefined")
    order = np.argsort(rel @ (direction / norm), kind="stable")
    return np.column_stack([order[:-1], order[1:]])


def delaunay(positions) -> SpatialGraph:
    """Delaunay triangulation edges (empty-circumcircle triangles)."""
    positions = np.asarray(positions, dtype=float)
    if len(positions) < 2:
        raise ValueError("triangulation needs at least 2 points")
    if len(positions) == 2:
        return make_graph(positions, [(0, 1)], PLAIN)
    try:
        tri = _SciDelaunay(positions)
    except QhullError:
        return make_graph(positions, _collinear_chain(positions), PLAIN)
    s = tri.simplices
    pairs = np.concatenate([s[:, [0, 1]], s[:, [1, 2]], s[:, [0, 2]]])
    return make_graph(positions, pairs, PLAIN)


def gabriel(positions) -> SpatialGraph:
    """Edges whose diameter disk is empty of other vertices (open-disk rule),
    computed as the filtered Delaunay subgraph."""
    base = delaunay(positions)
    positions = base.positions
    keep = np.ones(base.edge_count, dtype=bool)
    for i, (u, v) in enumerate(base.edges):
        mid = (positions[u] + positions[v]) / 2.0
        r2 = ((positions[u] - positions[v]) ** 2).sum() / 4.0
        d2 = ((positions - mid) ** 2).sum(axis=1)
        d2[u] = d2[v] = np.inf
        keep[i] = not np.any(d2 < r2)  # strictly interior vertices block
    return SpatialGraph(positions, base.edges[keep], base.lengths[keep],
                        base.labels[keep])


def restrict(g: SpatialGraph, r: float) -> SpatialGraph:
    """Intersection with the disk graph of range r: keep edges of length <= r."""
    if r <= 0:
        raise ValueError(f"range parameter must be positive, got {r}")
    keep = g.lengths <= r
    return SpatialGraph(g.positions, g.edges[keep], g.lengths[keep], g.labels[keep])


def connectivity_threshold(positions) -> float:
    """Longest edge of the Euclidean minimum spanning tree: the smallest r
    for which the disk graph is connected."""
    positions = np.asarray(positions, dtype=float)
    if len(positions) < 2:
        raise ValueError("connectivity threshold needs at least 2 points")
    base = delaunay(positions)  # the EMST is a subgraph of the triangulation
    mst = minimum_spanning_tree(base.adjacency(weighted=True).tocsr())
    return float(mst.data.max())


def graph_to_doc(g: SpatialGraph) -> dict:
    """Edge-list JSON document for a spatial graph."""
    return {
        "n": g.n,
        "positions": [[float(x), float(y)] for x, y in g.positions],
        "edges": [
            {"u": int(u), "v": int(v), "len": float(d), "label": str(lab)}
            for (u, v), d, lab in zip(g.edges, g.lengths, g.labels)
        ],
    }


def graph_from_doc(doc: dict) -> SpatialGraph:
    """Parse the edge-list JSON document; lengths are recomputed and verified."""
    positions = np.asarray(doc["positions"], dtype=float).reshape(-1, 2)
    if len(positions) != int(doc["n"]):
        raise ValueError(f"document declares n={doc['n']} but has {len(positions)} positions")
    edges = doc.get("edges", [])
    pairs = [(e["u"], e["v"]) for e in edges]
    labels = [e.get("label", PLAIN) for e in edges]
    for e in edges:
        if not (0 <= e["u"] < len(positions) and 0 <= e["v"] < len(positions)):
            raise ValueError(f"edge ({e['u']}, {e['v']}) references a missing vertex")
    g = make_graph(positions, np.asarray(pairs, dtype=np.intp).reshape(-1, 2), labels)
    declared = {(min(e["u"], e["v"]), max(e["u"], e["v"])): e["len"] for e in edges}
    for (u, v), d in zip(g.edges, g.lengths):
        if abs(declared[(int(u), int(v))] - d) > 1e-8 * max(1.0, d):
            raise ValueError(f"edge ({u}, {v}) declares length {declared[(int(u), int(v))]} "
                             f"but the endpoints are {d} apart")
    return g
