"""Exact finite-level geometry of a scale-irregular Vicsek set.

Coordinates are stored as integers: the level-n approximation lives on the
lattice obtained by multiplying true coordinates by sqrt(2) * L_n, where
L_n = l_1 * ... * l_n.  On this lattice every cell is an axis-aligned square
of half-side 1 centered at an even integer pair, every edge is a diagonal
step (+-1, +-1), and all distance comparisons reduce to exact integer
arithmetic: the true squared distance of two points at common scale n is
(dx^2 + dy^2) / (2 L_n^2).
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property

import numpy as np

from .errors import (
    DepthBudgetError,
    InvalidArgumentError,
    LevelError,
    LookupError_,
    ScaleMismatchError,
)
from .ratios import RatioSequence
from .words import (
    Word,
    enumerate_letters,
    letter_offset,
    validate_word,
    word_from_index,
)

DEFAULT_CELL_BUDGET = 5_000_000

# Corner slots of a cell: slot 0 is the center, slot j is the corner in
# diagonal direction j.
_SLOT_DX = (0, 1, -1, -1, 1)
_SLOT_DY = (0, 1, 1, -1, -1)


@dataclass(frozen=True)
class LatticePoint:
    """An exact point: true coordinates are (x, y) / (sqrt(2) * L_level)."""

    x: int
    y: int
    level: int

    def rescale(self, to_level: int, ratios: RatioSequence) -> "LatticePoint":
        """Exact change of scale level; refining multiplies coordinates."""
        if to_level >= self.level:
            f = ratios.length_product(to_level) // ratios.length_product(self.level)
            return LatticePoint(self.x * f, self.y * f, to_level)
        f = ratios.length_product(self.level) // ratios.length_product(to_level)
        if self.x % f or self.y % f:
            raise ScaleMismatchError(
                f"point {self} is not on the level-{to_level} lattice"
            )
        return LatticePoint(self.x // f, self.y // f, to_level)

    def true_distance_sq(self, other: "LatticePoint", ratios: RatioSequence) -> Fraction:
        if self.level != other.level:
            raise ScaleMismatchError(
                f"points at levels {self.level} and {other.level}; rescale first"
            )
        dx = self.x - other.x
        dy = self.y - other.y
        L = ratios.length_product(self.level)
        return Fraction(dx * dx + dy * dy, 2 * L * L)


def point_of_word(ratios: RatioSequence, word: Word, corner: int | str = 0) -> LatticePoint:
    """Image of a reference point of the unit cell under the word's map.

    ``corner`` 0 (or "center") gives the cell center, 1..4 the diagonal
    corners.  The result is exact, at scale level len(word).  This also
    evaluates the coding map on eventually-constant infinite words: a word
    ending in repeated centers is the finite prefix with corner 0, one
    ending in repeated maximal arm letters of direction j is the prefix
    with corner j; general infinite words are approximated by truncating
    to a prefix (error at most the cell diameter of the truncation level).
    """
    if corner == "center":
        corner = 0
    if corner not in (0, 1, 2, 3, 4):
        raise InvalidArgumentError(f"corner must be center or 1..4, got {corner!r}")
    validate_word(ratios, word)
    n = len(word)
    # accumulate center coordinates level by level: C_k = l_k * C_{k-1} + off_k
    x = 0
    y = 0
    for k, letter in enumerate(word, start=1):
        l = ratios.ratio(k)
        ox, oy = letter_offset(letter)
        x = x * l + ox
        y = y * l + oy
    x += _SLOT_DX[corner]
    y += _SLOT_DY[corner]
    return LatticePoint(x, y, n)


def within_open_ball(
    a: LatticePoint, b: LatticePoint, n_scale: int, ratios: RatioSequence
) -> bool:
    """Exact predicate d(a, b) < rho_{n_scale} for points at a common scale."""
    if a.level != b.level:
        raise ScaleMismatchError(
            f"points at levels {a.level} and {b.level}; rescale first"
        )
    if a.level < n_scale:
        raise ScaleMismatchError(
            f"points at level {a.level} are too coarse for radius index {n_scale}"
        )
    dx = a.x - b.x
    dy = a.y - b.y
    Lm = ratios.length_product(a.level)
    Ln = ratios.length_product(n_scale)
    return (dx * dx + dy * dy) * Ln * Ln < 8 * Lm * Lm


class VicsekLevel:
    """The level-n graph: deduplicated vertices, oriented edges, cell index.

    Vertices carry integer ids; ``coords[i]`` is the scaled coordinate pair.
    Edges are stored tail -> head with the tail strictly closer to the
    origin vertex in the tree metric.  ``edge_word[e]`` is the index of the
    unique cell whose interior contains edge e (= e // 4 by construction).
    """

    def __init__(self, ratios: RatioSequence, n: int, budget: int = DEFAULT_CELL_BUDGET):
        num_cells = ratios.num_words(n)
        if num_cells > budget:
            raise DepthBudgetError(n, num_cells, budget)
        self.ratios = ratios
        self.n = n
        self.L = ratios.length_product(n)
        self.num_cells = num_cells

        centers = _cell_centers(ratios, n)

        Lpad = self.L + 1
        stride = 2 * self.L + 3
        coord_to_id: dict[int, int] = {}
        xs: list[int] = []
        ys: list[int] = []
        owner: list[int] = []
        mult: list[int] = []
        cell_vertices = np.empty((num_cells, 5), dtype=np.int64)
        get = coord_to_id.get
        for w in range(num_cells):
            cx, cy = centers[w]
            row = cell_vertices[w]
            for slot in range(5):
                px = cx + _SLOT_DX[slot]
                py = cy + _SLOT_DY[slot]
                key = (px + Lpad) * stride + (py + Lpad)
                vid = get(key)
                if vid is None:
                    vid = len(xs)
                    coord_to_id[key] = vid
                    xs.append(px)
                    ys.append(py)
                    owner.append(w)
                    mult.append(1)
                else:
                    mult[vid] += 1
                row[slot] = vid

        self.coords = np.column_stack(
            (np.asarray(xs, dtype=np.int64), np.asarray(ys, dtype=np.int64))
        )
        self.owner_word = np.asarray(owner, dtype=np.int64)
        self.multiplicity = np.asarray(mult, dtype=np.int64)
        self.cell_vertices = cell_vertices
        self._coord_to_id = coord_to_id
        self._pack_pad = Lpad
        self._pack_stride = stride

        V = len(xs)
        self.num_vertices = V
        E = 4 * num_cells
        center_ids = np.repeat(cell_vertices[:, 0], 4)
        corner_ids = cell_vertices[:, 1:5].reshape(-1)

        self.origin = coord_to_id[Lpad * stride + Lpad]

        nbr_offsets, nbr = _csr_adjacency(V, center_ids, corner_ids)
        self._nbr_offsets = nbr_offsets
        self._nbr = nbr
        depth, parent = _bfs_tree(V, self.origin, nbr_offsets, nbr)
        self.depth = depth
        self.parent = parent

        d_a = depth[center_ids]
        d_b = depth[corner_ids]
        if not np.all(np.abs(d_a - d_b) == 1):
            raise AssertionError("orientation tie: endpoint depths do not differ by 1")
        swap = d_a > d_b
        self.edge_tail = np.where(swap, corner_ids, center_ids)
        self.edge_head = np.where(swap, center_ids, corner_ids)
        self.edge_word = np.arange(E, dtype=np.int64) // 4
        self.num_edges = E

    # -- lookups -----------------------------------------------------------

    def vertex_id(self, x: int, y: int) -> int:
        key = (x + self._pack_pad) * self._pack_stride + (y + self._pack_pad)
        vid = self._coord_to_id.get(key)
        if vid is None:
            raise LookupError_(f"no vertex at scaled coordinates ({x}, {y})")
        return vid

    def vertex_point(self, vid: int) -> LatticePoint:
        if not 0 <= vid < self.num_vertices:
            raise LookupError_(f"vertex id {vid} out of range")
        return LatticePoint(int(self.coords[vid, 0]), int(self.coords[vid, 1]), self.n)

    def word_of(self, word_id: int) -> Word:
        if not 0 <= word_id < self.num_cells:
            raise LookupError_(f"cell index {word_id} out of range")
        return word_from_index(self.ratios, self.n, word_id)

    def edge_length(self) -> Fraction:
        return Fraction(1, self.L)

    def neighbors(self, vid: int) -> np.ndarray:
        return self._nbr[self._nbr_offsets[vid] : self._nbr_offsets[vid + 1]]

    def _edge_lists(self) -> tuple[list[int], list[int]]:
        """Plain-list views of (tails, heads), cached for exact-mode loops."""
        cached = getattr(self, "_edge_lists_cache", None)
        if cached is None:
            cached = (self.edge_tail.tolist(), self.edge_head.tolist())
            self._edge_lists_cache = cached
        return cached

    @cached_property
    def vertex_cells(self) -> tuple[np.ndarray, np.ndarray]:
        """CSR map vertex id -> indices of the cells it belongs to."""
        flat = self.cell_vertices.reshape(-1)
        order = np.argsort(flat, kind="stable")
        counts = np.bincount(flat, minlength=self.num_vertices)
        offsets = np.zeros(self.num_vertices + 1, dtype=np.int64)
        np.cumsum(counts, out=offsets[1:])
        return offsets, (order // 5).astype(np.int64)

    # -- metrics -----------------------------------------------------------

    def geodesic_from_origin(self, vid: int) -> Fraction:
        if not 0 <= vid < self.num_vertices:
            raise LookupError_(f"vertex id {vid} out of range")
        return Fraction(int(self.depth[vid]), self.L)

    def path_edge_count(self, a: int, b: int) -> int:
        """Number of edges on the unique tree path between two vertices."""
        for vid in (a, b):
            if not 0 <= vid < self.num_vertices:
                raise LookupError_(f"vertex id {vid} out of range")
        da, db = int(self.depth[a]), int(self.depth[b])
        steps = 0
        while da > db:
            a = int(self.parent[a])
            da -= 1
            steps += 1
        while db > da:
            b = int(self.parent[b])
            db -= 1
            steps += 1
        while a != b:
            a = int(self.parent[a])
            b = int(self.parent[b])
            steps += 2
        return steps

    def geodesic_distance(self, a: int, b: int) -> Fraction:
        return Fraction(self.path_edge_count(a, b), self.L)

    def path_vertices(self, a: int, b: int) -> list[int]:
        """Vertex ids along the tree path from a to b, inclusive."""
        for vid in (a, b):
            if not 0 <= vid < self.num_vertices:
                raise LookupError_(f"vertex id {vid} out of range")
        up_a = [a]
        up_b = [b]
        da, db = int(self.depth[a]), int(self.depth[b])
        while da > db:
            a = int(self.parent[a])
            da -= 1
            up_a.append(a)
        while db > da:
            b = int(self.parent[b])
            db -= 1
            up_b.append(b)
        while a != b:
            a = int(self.parent[a])
            b = int(self.parent[b])
            up_a.append(a)
            up_b.append(b)
        return up_a + up_b[::-1][1:]

    # -- serialization -------------------------------------------------------

    def to_json_dict(self) -> dict:
        return {
            "level": self.n,
            "ratios": list(self.ratios.prefix(self.n)),
            "length_product": self.L,
            "num_cells": self.num_cells,
            "vertices": self.coords.tolist(),
            "edges": np.column_stack(
                (self.edge_tail, self.edge_head, self.edge_word)
            ).tolist(),
            "cell_vertices": self.cell_vertices.tolist(),
            "origin": int(self.origin),
            "geodesic_edge_counts": self.depth.tolist(),
        }


def _cell_centers(ratios: RatioSequence, n: int) -> list[tuple[int, int]]:
    """Scaled centers of all level-n cells in lexicographic word order."""
    centers = [(0, 0)]
    for k in range(1, n + 1):
        l = ratios.ratio(k)
        offsets = [letter_offset(s) for s in enumerate_letters(l)]
        new: list[tuple[int, int]] = []
        append = new.append
        for cx, cy in centers:
            bx = cx * l
            by = cy * l
            for ox, oy in offsets:
                append((bx + ox, by + oy))
        centers = new
    return centers


def _csr_adjacency(
    V: int, a: np.ndarray, b: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    src = np.concatenate((a, b))
    dst = np.concatenate((b, a))
    order = np.argsort(src, kind="stable")
    nbr = dst[order]
    counts = np.bincount(src, minlength=V)
    offsets = np.zeros(V + 1, dtype=np.int64)
    np.cumsum(counts, out=offsets[1:])
    return offsets, nbr


def _bfs_tree(
    V: int, root: int, offsets: np.ndarray, nbr: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    depth = np.full(V, -1, dtype=np.int64)
    parent = np.full(V, -1, dtype=np.int64)
    depth_l = depth.tolist()
    parent_l = parent.tolist()
    off = offsets.tolist()
    nb = nbr.tolist()
    depth_l[root] = 0
    queue = deque([root])
    pop = queue.popleft
    push = queue.append
    while queue:
        v = pop()
        dv = depth_l[v] + 1
        for i in range(off[v], off[v + 1]):
            u = nb[i]
            if depth_l[u] < 0:
                depth_l[u] = dv
                parent_l[u] = v
                push(u)
    depth = np.asarray(depth_l, dtype=np.int64)
    parent = np.asarray(parent_l, dtype=np.int64)
    if depth.min() < 0:
        raise AssertionError("graph is not connected")
    return depth, parent


def build_level(
    ratios: RatioSequence, n: int, budget: int = DEFAULT_CELL_BUDGET
) -> VicsekLevel:
    """Construct the exact level-n graph (tree) of the Vicsek approximation."""
    if n < 0:
        raise LevelError(f"level must be >= 0, got {n}")
    return VicsekLevel(ratios, n, budget)


class Hierarchy:
    """Levels 0..N of one ratio sequence plus the refinement maps between them.

    For each transition k -> k+1 the hierarchy records, once, how values on
    V_k extend to V_{k+1}: which new ids coincide with old vertices, which
    lie in the interior of a subdivided old edge (with their position), and
    how the remaining hanging vertices attach to the already-valued set.
    Value extension then reduces to table-driven passes, shared by exact and
    floating-point arithmetic.
    """

    def __init__(self, ratios: RatioSequence, max_level: int, budget: int = DEFAULT_CELL_BUDGET):
        self.ratios = ratios
        self.max_level = max_level
        self.levels = [build_level(ratios, k, budget) for k in range(max_level + 1)]
        self._lift: list[np.ndarray] = []
        self._interior: list[np.ndarray] = []
        self._hang: list[np.ndarray] = []  # rows (vertex, parent) in BFS order
        self._hang_waves: list[list[tuple[int, int]]] = []
        self._list_cache: dict[tuple[int, str], list] = {}
        for k in range(max_level):
            lift, interior, hang, waves = self._transition_maps(k)
            self._lift.append(lift)
            self._interior.append(interior)
            self._hang.append(hang)
            self._hang_waves.append(waves)

    def level(self, k: int) -> VicsekLevel:
        if not 0 <= k <= self.max_level:
            raise LevelError(f"level {k} not built (max {self.max_level})")
        return self.levels[k]

    def lift_ids(self, k: int) -> np.ndarray:
        """Id at level k+1 of each level-k vertex (same geometric point)."""
        return self._lift[k]

    def vertex_id_at(self, k_from: int, vid: int, k_to: int) -> int:
        for k in range(k_from, k_to):
            vid = int(self._lift[k][vid])
        return vid

    def hang_waves(self, k: int) -> list[tuple[int, int]]:
        """Row ranges of the hang table whose parents are all already valued."""
        return self._hang_waves[k]

    def _lists(self, k: int, name: str) -> list:
        """Cached plain-list views of the transition tables (exact-mode loops)."""
        key = (k, name)
        out = self._list_cache.get(key)
        if out is None:
            if name == "lift":
                out = self._lift[k].tolist()
            elif name == "interior":
                out = self._interior[k].tolist()
            elif name == "hang":
                out = self._hang[k].tolist()
            elif name == "tails":
                out = self.levels[k].edge_tail.tolist()
            elif name == "heads":
                out = self.levels[k].edge_head.tolist()
            else:
                raise KeyError(name)
            self._list_cache[key] = out
        return out

    def _transition_maps(self, k: int):
        coarse = self.levels[k]
        fine = self.levels[k + 1]
        l = self.ratios.ratio(k + 1)

        lift = np.empty(coarse.num_vertices, dtype=np.int64)
        cx = coarse.coords[:, 0].tolist()
        cy = coarse.coords[:, 1].tolist()
        pad = fine._pack_pad
        stride = fine._pack_stride
        lookup = fine._coord_to_id
        for i in range(coarse.num_vertices):
            lift[i] = lookup[(cx[i] * l + pad) * stride + (cy[i] * l + pad)]

        tails = coarse.edge_tail.tolist()
        heads = coarse.edge_head.tolist()
        interior = np.empty((coarse.num_edges, l - 1), dtype=np.int64)
        for e in range(coarse.num_edges):
            t = tails[e]
            h = heads[e]
            tx, ty = cx[t], cy[t]
            sx, sy = cx[h] - tx, cy[h] - ty
            bx, by = tx * l, ty * l
            row = interior[e]
            for i in range(1, l):
                row[i - 1] = lookup[(bx + i * sx + pad) * stride + (by + i * sy + pad)]

        assigned = np.zeros(fine.num_vertices, dtype=bool)
        assigned[lift] = True
        assigned[interior.reshape(-1)] = True
        hang_rows: list[tuple[int, int]] = []
        dists: list[int] = []
        sources = np.flatnonzero(assigned).tolist()
        queue = deque((v, 0) for v in sources)
        off = fine._nbr_offsets.tolist()
        nb = fine._nbr.tolist()
        seen = assigned.tolist()
        while queue:
            v, d = queue.popleft()
            for i in range(off[v], off[v + 1]):
                u = nb[i]
                if not seen[u]:
                    seen[u] = True
                    hang_rows.append((u, v))
                    dists.append(d + 1)
                    queue.append((u, d + 1))
        hang = np.asarray(hang_rows, dtype=np.int64).reshape(-1, 2)
        waves: list[tuple[int, int]] = []
        start = 0
        for i in range(1, len(dists) + 1):
            if i == len(dists) or dists[i] != dists[i - 1]:
                waves.append((start, i))
                start = i
        return lift, interior, hang, waves
