"""Families of dyadic cubes: packings, sparse, and weakly sparse classes.

A *packing* is an antichain: pairwise non-nested cubes.  A family is *sparse
of order* ``t`` in (0, 1] when for every member ``Q`` its family-children
(maximal members strictly inside ``Q``) satisfy

    sum over children Q' of |Q'|^t  <=  (1/2) |Q|^t

and *weakly sparse* when each core set ``E_Q = Q minus union(children)`` keeps
at least half the measure: ``|E_Q| >= |Q|/2``.  Order-1 sparseness implies
weak sparseness; packings are sparse of every order (no children at all).

Alongside the object-level API (:func:`validate`, :func:`enumerate_families`,
:func:`cz_family`) this module provides the flat oracle machinery used by the
exhaustive norm evaluators: bitmask subset enumeration over a breadth-first
cube numbering (node counts <= 15), cached per-family measure matrices for
vectorised evaluation, and exhaustive antichain *value* tables via recursive
cross-sums (node counts <= 63, where streaming every antichain one by one
would be hopeless but the multiset of achievable totals is small).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .grid import CubeId, GridFunction, children, cube_index, iter_cubes, tree_size
from .maximal import level_integrals

__all__ = [
    "CubeFamily",
    "SparsityViolation",
    "validate",
    "enumerate_families",
    "cz_family",
    "antichain_value_max",
]

COMPARE_TOL = 1e-12
_SUBSET_NODE_CAP = 15
_ANTICHAIN_NODE_CAP = 63
_VALUE_TABLE_CAP = 2_000_000


@dataclass(frozen=True)
class CubeFamily:
    """A validated family with its tree structure precomputed.

    ``children_map[Q]`` lists the maximal members strictly inside ``Q``;
    ``core_cells[Q]`` holds the flat finest-cell indices of ``E_Q``.
    Core sets are pairwise disjoint by construction.
    """

    dimension: int
    depth: int
    kind: str  # "packing" | "sparse" | "weakly_sparse"
    order: float | None
    cubes: tuple[CubeId, ...]
    children_map: dict[CubeId, tuple[CubeId, ...]]
    core_cells: dict[CubeId, tuple[int, ...]]

    def core_measure(self, cube: CubeId) -> float:
        return len(self.core_cells[cube]) * 2.0 ** (-self.dimension * self.depth)

    def to_json_dict(self) -> dict:
        return {
            "kind": self.kind,
            "order": self.order,
            "cubes": [
                {"level": c.level, "coords": list(c.coords)} for c in self.cubes
            ],
        }


@dataclass(frozen=True)
class SparsityViolation:
    """First cube breaking the requested condition, with both sides."""

    cube: CubeId
    condition: str
    lhs: float
    rhs: float

    def __str__(self) -> str:
        return (f"{self.condition} fails at {self.cube}: "
                f"{self.lhs:.12g} > {self.rhs:.12g}")


def _cells_of(cube: CubeId, depth: int) -> np.ndarray:
    """Flat indices (row-major at the finest level) of the cells in ``cube``."""
    s = 1 << (depth - cube.level)
    if cube.dimension == 1:
        start = cube.coords[0] * s
        return np.arange(start, start + s)
    side = 1 << depth
    rows = np.arange(cube.coords[0] * s, (cube.coords[0] + 1) * s)
    cols = np.arange(cube.coords[1] * s, (cube.coords[1] + 1) * s)
    return (rows[:, None] * side + cols[None, :]).ravel()


def _build_structure(cubes, dimension, depth):
    """children_map and core cells for a deduplicated member list."""
    members = sorted(set(cubes), key=lambda c: cube_index(c, dimension))
    member_set = set(members)
    children_map: dict[CubeId, list[CubeId]] = {c: [] for c in members}
    for c in members:
        walk = c
        while walk.level > 0:
            walk = walk.parent()
            if walk in member_set:
                children_map[walk].append(c)
                break
    core_cells = {}
    for c in members:
        cells = _cells_of(c, depth)
        kids = children_map[c]
        if kids:
            taken = np.concatenate([_cells_of(k, depth) for k in kids])
            cells = np.setdiff1d(cells, taken, assume_unique=True)
        core_cells[c] = tuple(int(i) for i in cells)
    return members, {c: tuple(k) for c, k in children_map.items()}, core_cells


def validate(family, order, *, dimension: int,
             depth: int) -> CubeFamily | SparsityViolation:
    """Classify a set of cubes, or report the first violating cube.

    ``order`` is a sparseness order in (0, 1], or ``"packing"``, or
    ``"weak"``.  Measures are powers of two, so the fractional-power sums are
    compared in floating point with a 1e-12 tolerance.
    """
    cubes = list(family)
    if not cubes:
        raise ValueError("a cube family must be nonempty")
    for c in cubes:
        if c.dimension != dimension:
            raise ValueError(f"cube {c} does not match dimension {dimension}")
        if c.level > depth:
            raise ValueError(f"cube {c} is finer than depth {depth}")
    members, children_map, core_cells = _build_structure(cubes, dimension, depth)

    if order == "packing":
        for c in members:
            if children_map[c]:
                return SparsityViolation(
                    c, "packing (pairwise non-nested)",
                    float(len(children_map[c])), 0.0)
        kind, order_val = "packing", None
    elif order == "weak":
        cell_meas = 2.0 ** (-dimension * depth)
        for c in members:
            core = len(core_cells[c]) * cell_meas
            if core < 0.5 * c.measure - COMPARE_TOL:
                return SparsityViolation(
                    c, "weak sparseness |E_Q| >= |Q|/2",
                    0.5 * c.measure, core)
        kind, order_val = "weakly_sparse", None
    else:
        t = float(order)
        if not 0.0 < t <= 1.0:
            raise ValueError(f"sparseness order must lie in (0, 1], got {order}")
        for c in members:
            lhs = sum(k.measure ** t for k in children_map[c])
            rhs = 0.5 * c.measure ** t
            if lhs > rhs + COMPARE_TOL:
                return SparsityViolation(
                    c, f"sparse(order {t:g})", lhs, rhs)
        kind, order_val = "sparse", t
    return CubeFamily(dimension, depth, kind, order_val, tuple(members),
                      children_map, core_cells)


# -- enumeration -------------------------------------------------------------

def enumerate_families(depth: int, dimension: int, order):
    """Yield every nonempty family of the requested class, exactly once.

    Full subset enumeration needs at most 15 tree nodes; families come out in
    ascending order of their member bitmask over the breadth-first cube
    numbering.  Packings alone are allowed up to 63 nodes through a recursive
    antichain generator (deterministic order, documented as such).
    """
    nodes = tree_size(depth, dimension)
    if order == "packing" and nodes > _SUBSET_NODE_CAP:
        if nodes > _ANTICHAIN_NODE_CAP:
            raise ValueError(
                f"oracle scale exceeded: {nodes} nodes > {_ANTICHAIN_NODE_CAP}")
        yield from _enumerate_antichains(depth, dimension)
        return
    if nodes > _SUBSET_NODE_CAP:
        raise ValueError(
            f"oracle scale exceeded: {nodes} nodes > {_SUBSET_NODE_CAP} "
            "for full subset enumeration")
    cubes = list(iter_cubes(depth, dimension))
    for mask in range(1, 1 << nodes):
        family = [cubes[i] for i in range(nodes) if mask >> i & 1]
        result = validate(family, order, dimension=dimension, depth=depth)
        if isinstance(result, CubeFamily):
            yield result


def _enumerate_antichains(depth, dimension):
    root = CubeId(0, (0,) * dimension)

    def walk(cube):
        """Antichains of the subtree at ``cube``: the singleton, then unions
        of child-subtree antichains."""
        yield (cube,)
        if cube.level >= depth:
            return
        kids = children(cube, depth)

        def combos(i):
            if i == len(kids):
                yield ()
                return
            for rest in combos(i + 1):
                yield rest
                for sub in walk(kids[i]):
                    yield sub + rest

        for combo in combos(0):
            if combo:
                yield combo

    for members in walk(root):
        fam = validate(members, "packing", dimension=dimension, depth=depth)
        assert isinstance(fam, CubeFamily)
        yield fam


# -- Calderon-Zygmund stopping time ------------------------------------------

def cz_family(g: GridFunction, factor: float = 2.0) -> CubeFamily:
    """Stopping-time family of a nonnegative density.

    Starting from the root, each selected cube ``Q`` recruits the maximal
    dyadic ``Q' != Q`` inside it whose average strictly exceeds
    ``factor * average(g, Q)``, then recurses.  Chebyshev gives
    ``sum |Q'| < |Q| / factor``, so ``factor >= 2`` lands in sparse(1).
    The result is validated before being returned.
    """
    if factor <= 1.0:
        raise ValueError(f"stopping factor must exceed 1, got {factor}")
    if np.any(g.values < 0):
        raise ValueError("stopping-time construction needs a nonnegative density")
    n, depth = g.dimension, g.depth
    integrals = level_integrals(g.values_nd * g.cell_measure, n, depth)

    def avg(cube: CubeId) -> float:
        if n == 1:
            return float(integrals[cube.level][cube.coords[0]]) / cube.measure
        return float(integrals[cube.level][cube.coords]) / cube.measure

    members: list[CubeId] = []

    def select(cube: CubeId) -> None:
        members.append(cube)
        threshold = factor * avg(cube)
        if cube.level >= depth:
            return
        queue = list(children(cube, depth))
        while queue:
            cand = queue.pop(0)
            if avg(cand) > threshold:
                select(cand)
            elif cand.level < depth:
                queue.extend(children(cand, depth))

    select(CubeId(0, (0,) * n))
    result = validate(members, 1.0, dimension=n, depth=depth)
    if isinstance(result, SparsityViolation):
        raise ValueError(
            f"stopping-time family failed sparseness validation: {result}")
    return result


# -- exhaustive antichain totals ----------------------------------------------

def antichain_value_max(weights: np.ndarray, dimension: int,
                        depth: int) -> float:
    """Exact max of ``sum of w`` over all nonempty antichains, by exhausting
    achievable totals.

    ``weights`` (nonnegative, indexed by the breadth-first cube numbering)
    are combined bottom-up: each subtree contributes the multiset {take the
    root} plus {any combination of child-subtree choices}.  When the full
    multiset would blow past the cap, only *maximal* antichains are kept,
    which is lossless for the max under nonnegative weights: every antichain
    extends to a maximal one without decreasing its total.
    """
    nodes = tree_size(depth, dimension)
    if nodes > _ANTICHAIN_NODE_CAP:
        raise ValueError(
            f"oracle scale exceeded: {nodes} nodes > {_ANTICHAIN_NODE_CAP}")
    w = np.asarray(weights, dtype=np.float64)
    if w.size != nodes:
        raise ValueError(f"need {nodes} weights, got {w.size}")
    if np.any(w < 0):
        raise ValueError("antichain totals need nonnegative weights")

    maximal_only = _count_totals(depth, dimension, False) > _VALUE_TABLE_CAP

    def totals(cube: CubeId) -> np.ndarray:
        own = w[cube_index(cube, dimension)]
        if cube.level >= depth:
            return np.array([own]) if maximal_only else np.array([own, 0.0])
        acc = None
        for kid in children(cube, depth):
            t = totals(kid)
            acc = t if acc is None else np.add.outer(acc, t).ravel()
        # full mode: acc keeps the all-children-empty 0, covering every
        # antichain of the subtree; the overall empty set contributes 0,
        # harmless under nonnegative weights.
        return np.concatenate(([own], acc))

    return float(totals(CubeId(0, (0,) * dimension)).max())


@lru_cache(maxsize=None)
def _count_totals(level_to_go: int, dimension: int, maximal_only: bool) -> int:
    if level_to_go == 0:
        return 1 if maximal_only else 2
    sub = _count_totals(level_to_go - 1, dimension, maximal_only)
    return 1 + sub ** (1 << dimension)


# -- cached family tables for vectorised oracles ------------------------------

@dataclass(frozen=True)
class FamilyTables:
    """All valid families of one class as measure matrices.

    Row ``i`` describes family ``i``: ``core_meas[i, j]`` is ``|E_Q|`` when
    cube ``j`` (breadth-first numbering) is a member, else 0; ``cube_meas``
    likewise holds ``|Q|``.  ``masks`` keeps the member bitmasks so witnesses
    can be reconstructed.
    """

    dimension: int
    depth: int
    order: object
    masks: np.ndarray
    core_meas: np.ndarray
    cube_meas: np.ndarray

    def family_cubes(self, row: int) -> list[CubeId]:
        cubes = list(iter_cubes(self.depth, self.dimension))
        mask = int(self.masks[row])
        return [cubes[i] for i in range(len(cubes)) if mask >> i & 1]


@lru_cache(maxsize=32)
def family_tables(dimension: int, depth: int, order) -> FamilyTables:
    """Enumerate once, evaluate many times: subset scan at <= 15 nodes."""
    nodes = tree_size(depth, dimension)
    if nodes > _SUBSET_NODE_CAP:
        raise ValueError(
            f"oracle scale exceeded: {nodes} nodes > {_SUBSET_NODE_CAP}")
    cubes = list(iter_cubes(depth, dimension))
    meas = np.array([c.measure for c in cubes])
    anc: list[list[int]] = []
    for c in cubes:
        chain = []
        walk = c
        while walk.level > 0:
            walk = walk.parent()
            chain.append(cube_index(walk, dimension))
        anc.append(chain)

    t = None if order in ("packing", "weak") else float(order)
    pow_meas = meas ** t if t is not None else meas

    masks, core_rows, cube_rows = [], [], []
    for mask in range(1, 1 << nodes):
        members = [i for i in range(nodes) if mask >> i & 1]
        parent = {}
        for i in members:
            for a in anc[i]:
                if mask >> a & 1:
                    parent[i] = a
                    break
        if order == "packing" and parent:
            continue
        core = meas.copy()
        child_pow = np.zeros(nodes)
        for i, pa in parent.items():
            core[pa] -= meas[i]
            child_pow[pa] += pow_meas[i]
        ok = True
        if order == "weak":
            ok = all(core[i] >= 0.5 * meas[i] - COMPARE_TOL for i in members)
        elif t is not None:
            ok = all(child_pow[i] <= 0.5 * pow_meas[i] + COMPARE_TOL
                     for i in members)
        if not ok:
            continue
        row_core = np.zeros(nodes)
        row_cube = np.zeros(nodes)
        for i in members:
            row_core[i] = core[i]
            row_cube[i] = meas[i]
        masks.append(mask)
        core_rows.append(row_core)
        cube_rows.append(row_cube)
    return FamilyTables(dimension, depth, order,
                        np.array(masks, dtype=np.int64),
                        np.array(core_rows), np.array(cube_rows))
