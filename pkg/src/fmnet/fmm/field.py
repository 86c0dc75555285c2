"""Potential/gradient evaluation: direct O(N*M) summation and the fast driver.

Sign convention: a charge of strength q contributes -q * V(|x - xi|) to the
total potential, so goals (q < 0) attract and obstacles (q > 0) repel a robot
descending the potential.  Internally all series algebra runs on the raw
summed-kernel field sum_j q_j * V and the sign is flipped on output.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dataclass_field

import numpy as np

from .expansions import (
    TWO_PI,
    eval_local_raw,
    expansion_order,
    multipole_coeffs,
    multipole_to_local_batch,
    shift_local,
    shift_multipole,
)
from .tree import QuadTree, QuadTreeNode, _check_in_box

CHARGE_KINDS = ("goal", "obstacle", "passive")

# Extra multipole terms beyond ceil(log2(1/eps)); the interaction geometry
# converges slightly slower than 2x per term, so a flat margin keeps the
# worst-case error inside the requested budget.
ORDER_MARGIN = 4

_P2P_CHUNK = 1 << 22  # max pairwise-block entries per direct-summation chunk


@dataclass(frozen=True)
class PointCharge:
    """Source location with signed strength; kind encodes the navigation role."""

    position: np.ndarray
    strength: float
    kind: str = ""

    def __post_init__(self):
        pos = np.asarray(self.position, dtype=float)
        if pos.shape != (2,):
            raise ValueError(f"charge position must be a 2-vector, got shape {pos.shape}")
        object.__setattr__(self, "position", pos)
        kind = self.kind or _infer_kind(self.strength)
        object.__setattr__(self, "kind", kind)
        if kind not in CHARGE_KINDS:
            raise ValueError(f"unknown charge kind {kind!r}; expected one of {CHARGE_KINDS}")
        if kind == "goal" and not self.strength < 0:
            raise ValueError(f"goal charges must have negative strength, got {self.strength}")
        if kind == "obstacle" and not self.strength > 0:
            raise ValueError(f"obstacle charges must have positive strength, got {self.strength}")
        if kind == "passive" and self.strength != 0:
            raise ValueError(f"passive points must have zero strength, got {self.strength}")


def _infer_kind(strength: float) -> str:
    if strength < 0:
        return "goal"
    if strength > 0:
        return "obstacle"
    return "passive"


@dataclass(frozen=True)
class FieldSample:
    """Potential and its spatial gradient at one target point."""

    potential: float
    gradient: np.ndarray = dataclass_field(default_factory=lambda: np.zeros(2))


def charge_arrays(charges) -> tuple[np.ndarray, np.ndarray]:
    """Split a charge list into a positions array and a strengths array."""
    if len(charges) == 0:
        return np.zeros((0, 2)), np.zeros(0)
    pos = np.array([c.position for c in charges], dtype=float)
    q = np.array([c.strength for c in charges], dtype=float)
    return pos, q


def _package(phi: np.ndarray, grad: np.ndarray) -> list[FieldSample]:
    return [FieldSample(float(phi[i]), grad[i].copy()) for i in range(len(phi))]


def _raw_block(phi, grad, tz, tsel, sz, q):
    """Accumulate the raw kernel sum of sources (sz, q) at targets tz[tsel]."""
    d = tz[tsel, None] - sz[None, :]
    d2 = d.real**2 + d.imag**2
    ok = d2 > 0.0  # coincident target/source pairs contribute nothing
    with np.errstate(divide="ignore", invalid="ignore"):
        lg = np.where(ok, 0.5 * np.log(d2), 0.0)
        inv = np.where(ok, 1.0 / d2, 0.0)
    phi[tsel] += (lg @ q) / TWO_PI
    grad[tsel, 0] += ((d.real * inv) @ q) / TWO_PI
    grad[tsel, 1] += ((d.imag * inv) @ q) / TWO_PI


def _raw_direct(src: np.ndarray, q: np.ndarray, tgt: np.ndarray):
    """Chunked exact pairwise summation of the raw field."""
    m = len(tgt)
    phi = np.zeros(m)
    grad = np.zeros((m, 2))
    if len(src) == 0 or m == 0:
        return phi, grad
    sz = src[:, 0] + 1j * src[:, 1]
    tz = tgt[:, 0] + 1j * tgt[:, 1]
    step = max(_P2P_CHUNK // max(len(src), 1), 1)
    for lo in range(0, m, step):
        _raw_block(phi, grad, tz, np.arange(lo, min(lo + step, m)), sz, q)
    return phi, grad


def eval_direct(charges, targets) -> list[FieldSample]:
    """Exact O(N*M) oracle: potential and gradient by pairwise summation."""
    tgt = np.atleast_2d(np.asarray(targets, dtype=float))
    pos, q = charge_arrays(charges)
    phi, grad = _raw_direct(pos, q, tgt)
    return _package(-phi, -grad)


def eval_direct_arrays(charges, targets):
    """Direct-summation twin of ``evaluate_arrays``."""
    tgt = np.atleast_2d(np.asarray(targets, dtype=float))
    pos, q = charge_arrays(charges)
    phi, grad = _raw_direct(pos, q, tgt)
    return -phi, -grad


def field_scale(charges, targets) -> float:
    """Accuracy yardstick: max |strength| times max |V| over the configuration."""
    pos, q = charge_arrays(charges)
    tgt = np.atleast_2d(np.asarray(targets, dtype=float))
    if len(pos) == 0 or len(tgt) == 0:
        return 0.0
    vmax = 0.0
    step = max(_P2P_CHUNK // len(pos), 1)
    for lo in range(0, len(tgt), step):
        d2 = ((tgt[lo : lo + step, None, :] - pos[None, :, :]) ** 2).sum(axis=2)
        d2 = d2[d2 > 0.0]
        if len(d2):
            lg = 0.5 * np.abs(np.log(d2))
            vmax = max(vmax, float(lg.max()) / TWO_PI)
    return float(np.abs(q).max()) * vmax


class _Workspace:
    """Per-evaluation state: binned sources/targets and expansion storage."""

    def __init__(self, tree: QuadTree, src: np.ndarray, q: np.ndarray,
                 tgt: np.ndarray, p: int):
        n_nodes = len(tree.nodes)
        self.p = p
        self.sz = src[:, 0] + 1j * src[:, 1]
        self.q = q
        self.tz = tgt[:, 0] + 1j * tgt[:, 1]
        self.src_at = [None] * n_nodes
        self.tgt_at = [None] * n_nodes
        self.n_src = np.zeros(n_nodes, dtype=np.int64)
        self.n_tgt = np.zeros(n_nodes, dtype=np.int64)
        self._bin(tree, src, self.src_at, self.n_src)
        self._bin(tree, tgt, self.tgt_at, self.n_tgt)
        self.center = np.array([complex(n.box.center[0], n.box.center[1])
                                for n in tree.nodes])
        self.half = np.array([n.box.half for n in tree.nodes])
        self.mpole = np.zeros((n_nodes, p + 1), dtype=complex)
        self.local = np.zeros((n_nodes, p + 1), dtype=complex)
        self.phi = np.zeros(len(tgt))
        self.grad = np.zeros((len(tgt), 2))

    @staticmethod
    def _bin(tree: QuadTree, pts: np.ndarray, at: list, counts: np.ndarray) -> None:
        if len(pts) == 0:
            return
        leaf_of = tree.bin_points(pts)
        order = np.argsort(leaf_of, kind="stable")
        sorted_leaves = leaf_of[order]
        starts = np.searchsorted(sorted_leaves, np.arange(len(tree.nodes)))
        ends = np.searchsorted(sorted_leaves, np.arange(len(tree.nodes)), side="right")
        for node in tree.nodes:
            i = node.index
            if node.is_leaf and ends[i] > starts[i]:
                at[i] = order[starts[i] : ends[i]]
        # subtree counts: children precede nothing — node indices are preorder,
        # so accumulate from the deepest nodes upward
        for node in reversed(tree.nodes):
            i = node.index
            if node.is_leaf:
                counts[i] = len(at[i]) if at[i] is not None else 0
            else:
                counts[i] = sum(counts[c.index] for c in node.children)


def _upward(tree: QuadTree, ws: _Workspace) -> None:
    p = ws.p
    for node in reversed(tree.nodes):
        i = node.index
        if ws.n_src[i] == 0:
            continue
        if node.is_leaf:
            sel = ws.src_at[i]
            rel = ws.sz[sel] - ws.center[i]
            ws.mpole[i] = multipole_coeffs(rel, ws.q[sel], p)
        else:
            for child in node.children:
                j = child.index
                if ws.n_src[j]:
                    t = ws.center[j] - ws.center[i]
                    ws.mpole[i] += shift_multipole(ws.mpole[j], t)


def _well_separated_fast(ws: _Workspace, a: int, b: int) -> bool:
    d = ws.center[a] - ws.center[b]
    hx = abs(d.real) - (ws.half[a] + ws.half[b])
    hy = abs(d.imag) - (ws.half[a] + ws.half[b])
    if hx < 0.0:
        hx = 0.0
    if hy < 0.0:
        hy = 0.0
    need = 2.0 * max(ws.half[a], ws.half[b])
    return hx * hx + hy * hy >= need * need * (1.0 - 1e-12)


def _collect_pairs(tree: QuadTree, ws: _Workspace):
    """Dual descent over the tree: every source/target pair is covered exactly
    once, by a multipole-to-local translation when the boxes are well separated
    and by direct summation between leaves otherwise.
    """
    m2l_src: list[int] = []
    m2l_tgt: list[int] = []
    p2p: list[tuple[int, int]] = []

    def visit(a: QuadTreeNode, b: QuadTreeNode) -> None:
        ia, ib = a.index, b.index
        fwd = ws.n_src[ia] and ws.n_tgt[ib]
        rev = ws.n_src[ib] and ws.n_tgt[ia]
        if not (fwd or rev):
            return
        if a is b:
            if a.is_leaf:
                p2p.append((ia, ib))
            else:
                kids = a.children
                for i in range(4):
                    for j in range(i, 4):
                        visit(kids[i], kids[j])
            return
        if _well_separated_fast(ws, ia, ib):
            if fwd:
                m2l_src.append(ia)
                m2l_tgt.append(ib)
            if rev:
                m2l_src.append(ib)
                m2l_tgt.append(ia)
            return
        if a.is_leaf and b.is_leaf:
            p2p.append((ia, ib))
        elif a.is_leaf:
            for c in b.children:
                visit(a, c)
        elif b.is_leaf:
            for c in a.children:
                visit(c, b)
        elif ws.half[ia] > ws.half[ib]:
            for c in a.children:
                visit(c, b)
        elif ws.half[ib] > ws.half[ia]:
            for c in b.children:
                visit(a, c)
        else:
            for ca in a.children:
                for cb in b.children:
                    visit(ca, cb)

    visit(tree.root, tree.root)
    return np.asarray(m2l_src, dtype=np.intp), np.asarray(m2l_tgt, dtype=np.intp), p2p


_M2L_BATCH = 1 << 16


def _apply_m2l(ws: _Workspace, src_ids: np.ndarray, tgt_ids: np.ndarray) -> None:
    for lo in range(0, len(src_ids), _M2L_BATCH):
        s = src_ids[lo : lo + _M2L_BATCH]
        t = tgt_ids[lo : lo + _M2L_BATCH]
        shift = ws.center[s] - ws.center[t]
        converted = multipole_to_local_batch(ws.mpole[s], shift)
        np.add.at(ws.local, t, converted)


def _downward(tree: QuadTree, ws: _Workspace) -> None:
    for node in tree.nodes:
        i = node.index
        if node.parent < 0 or ws.n_tgt[i] == 0:
            continue
        parent_local = ws.local[node.parent]
        if parent_local.any():
            t = ws.center[i] - ws.center[node.parent]
            ws.local[i] += shift_local(parent_local, t)


def _leaf_eval(tree: QuadTree, ws: _Workspace, p2p_pairs) -> None:
    for node in tree.nodes:
        i = node.index
        if not node.is_leaf or ws.tgt_at[i] is None:
            continue
        sel = ws.tgt_at[i]
        w = ws.tz[sel] - ws.center[i]
        phi, grad = eval_local_raw(ws.local[i], w)
        ws.phi[sel] += phi
        ws.grad[sel] += grad
    for ia, ib in p2p_pairs:
        if ws.n_src[ia] and ws.tgt_at[ib] is not None:
            sel = ws.src_at[ia]
            _raw_block(ws.phi, ws.grad, ws.tz, ws.tgt_at[ib], ws.sz[sel], ws.q[sel])
        if ia != ib and ws.n_src[ib] and ws.tgt_at[ia] is not None:
            sel = ws.src_at[ib]
            _raw_block(ws.phi, ws.grad, ws.tz, ws.tgt_at[ia], ws.sz[sel], ws.q[sel])


def evaluate_arrays(tree: QuadTree, charges, targets, epsilon: float):
    """FMM evaluation returning plain arrays (potential (m,), gradient (m, 2))."""
    if not 0.0 < epsilon <= 0.1:
        raise ValueError(f"epsilon must lie in (0, 0.1], got {epsilon}")
    tgt = np.atleast_2d(np.asarray(targets, dtype=float))
    if len(tgt):
        _check_in_box(tgt, tree.box, what="target")
    src, q = charge_arrays(charges)
    if len(src):
        _check_in_box(src, tree.box, what="charge")
    if len(src) == 0 or len(tgt) == 0:
        return np.zeros(len(tgt)), np.zeros((len(tgt), 2))

    p = expansion_order(epsilon) + ORDER_MARGIN
    ws = _Workspace(tree, src, q, tgt, p)
    _upward(tree, ws)
    m2l_src, m2l_tgt, p2p_pairs = _collect_pairs(tree, ws)
    _apply_m2l(ws, m2l_src, m2l_tgt)
    _downward(tree, ws)
    _leaf_eval(tree, ws, p2p_pairs)
    return -ws.phi, -ws.grad


def evaluate(tree: QuadTree, charges, targets, epsilon: float) -> list[FieldSample]:
    """Fast multipole evaluation of the potential field at the targets.

    Matches ``eval_direct`` to within ``epsilon`` times the configuration's
    field scale (see ``field_scale``); near-field pairs are summed directly.
    """
    phi, grad = evaluate_arrays(tree, charges, targets, epsilon)
    return _package(phi, grad)
