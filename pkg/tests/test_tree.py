import numpy as np
import pytest

from fmnet.fmm import Box, bounding_box, build_tree


def test_single_point_is_root_leaf():
    tree = build_tree(np.array([[0.3, -0.2]]), box=Box(np.zeros(2), 1.0))
    assert tree.root.is_leaf
    assert len(tree.nodes) == 1
    assert list(tree.root.indices) == [0]


def test_capacity_one_splits_into_quadrant_leaves():
    pts = np.array([[-0.5, -0.5], [0.5, 0.5]])
    tree = build_tree(pts, leaf_capacity=1, box=Box(np.zeros(2), 1.0))
    assert not tree.root.is_leaf
    assert len(tree.nodes) == 5  # root + 4 children
    leaves = {n.index: n for n in tree.leaves()}
    owners = [tree.point_leaf[i] for i in range(2)]
    assert owners[0] != owners[1]
    for i, owner in enumerate(owners):
        assert leaves[owner].level == 1
        assert list(leaves[owner].indices) == [i]


def test_every_point_in_exactly_one_leaf():
    rng = np.random.default_rng(5)
    pts = rng.uniform(-1, 1, (500, 2))
    tree = build_tree(pts, leaf_capacity=8, box=Box(np.zeros(2), 1.0))
    seen = np.concatenate([n.indices for n in tree.leaves()])
    assert sorted(seen) == list(range(500))
    for n in tree.leaves():
        if n.level < tree.max_depth:
            assert len(n.indices) <= 8
    for n in tree.nodes:
        assert len(n.children) in (0, 4)


def test_children_quadrisect_parent():
    pts = np.random.default_rng(0).uniform(-1, 1, (100, 2))
    tree = build_tree(pts, leaf_capacity=10, box=Box(np.zeros(2), 1.0))
    for n in tree.nodes:
        if n.children:
            for c in n.children:
                assert c.box.half == pytest.approx(n.box.half / 2)
                assert c.box.level == n.box.level + 1
                assert np.all(np.abs(c.box.center - n.box.center) == pytest.approx(n.box.half / 2))


def test_boundary_points_have_unique_owner():
    # points on internal split lines and on the root's closed top/right edge
    pts = np.array([[0.0, 0.0], [1.0, 1.0], [-1.0, -1.0], [0.0, 1.0], [1.0, 0.0]])
    tree = build_tree(pts, leaf_capacity=1, box=Box(np.zeros(2), 1.0), max_depth=4)
    seen = np.concatenate([n.indices for n in tree.leaves() if len(n.indices)])
    assert sorted(seen) == list(range(len(pts)))


def test_point_outside_box_names_index():
    pts = np.array([[0.0, 0.0], [1.5, 0.0]])
    with pytest.raises(ValueError, match="point 1"):
        build_tree(pts, box=Box(np.zeros(2), 1.0))


def test_max_depth_stops_refinement():
    pts = np.tile([[0.1, 0.1]], (40, 1))  # coincident points can never separate
    tree = build_tree(pts, leaf_capacity=2, max_depth=5, box=Box(np.zeros(2), 1.0))
    assert tree.depth() == 5


def test_structure_ignores_everything_but_positions():
    rng = np.random.default_rng(17)
    pts = rng.uniform(-1, 1, (300, 2))
    a = build_tree(pts, leaf_capacity=12, box=Box(np.zeros(2), 1.0))
    b = build_tree(pts, leaf_capacity=12, box=Box(np.zeros(2), 1.0))
    assert len(a.nodes) == len(b.nodes)
    for na, nb in zip(a.nodes, b.nodes):
        assert np.array_equal(na.box.center, nb.box.center)
        assert na.box.half == nb.box.half
        assert na.is_leaf == nb.is_leaf


def test_bin_points_matches_build_assignment():
    rng = np.random.default_rng(23)
    pts = rng.uniform(-1, 1, (200, 2))
    tree = build_tree(pts, leaf_capacity=6, box=Box(np.zeros(2), 1.0))
    assert np.array_equal(tree.bin_points(pts), tree.point_leaf)


def test_bounding_box_covers_points():
    rng = np.random.default_rng(2)
    pts = rng.uniform(-3, 7, (50, 2))
    box = bounding_box(pts)
    assert np.all(pts >= box.lo - 1e-12)
    assert np.all(pts <= box.hi + 1e-12)


def test_box_adjacency_predicates():
    root = Box(np.zeros(2), 1.0)
    sw, se, nw, ne = (root.child(q) for q in range(4))
    assert sw.touches(se) and sw.touches(ne)  # edge and corner contact
    assert not sw.well_separated_from(se)
    far_a = Box(np.array([-0.75, -0.75]), 0.25, 2)
    far_b = Box(np.array([0.75, 0.75]), 0.25, 2)
    assert far_a.well_separated_from(far_b)
    # one box of side s exactly at gap s: boundary of the criterion
    a = Box(np.array([-0.75, 0.0]), 0.25, 2)
    b = Box(np.array([0.25, 0.0]), 0.25, 2)
    assert a.gap_to(b) == pytest.approx(0.5)
    assert a.well_separated_from(b)
