"""Oscillation norms over packings and sparse families of dyadic cubes.

Every functional here is a supremum of an ``L^p`` aggregate of scaled local
polynomial-approximation errors

    scaled(Q) = |Q|^e * E_k(f; Q)_q

over a class of cube families (see :mod:`oscnorm.families`).  Three evaluation
regimes are provided:

* ``packing_sup_norm`` -- exact at every scale.  Over antichains the summands
  are independent, so the supremum is a max-weight-antichain dynamic program
  on the cube tree with weights ``scaled(Q)^p |Q|``.
* ``sparse_sup_exhaustive`` -- exact by enumeration, oracle scale only
  (at most 15 tree nodes).  On a sparse family the core sets ``E_Q`` are
  disjoint, so the family's value is ``(sum scaled(Q)^p |E_Q|)^{1/p}``; the
  ``|Q|``-weighted variant is reported alongside.
* ``sparse_norm_bounds`` -- certified interval at any scale.  The upper bound
  is ``2 ||M_{q,lam}(f - P)||_p`` where ``P`` is the degree-(k-1) least
  squares fit on the root: for any cell x in a core set ``E_Q`` the summand
  ``scaled(Q)`` is dominated pointwise by the fractional maximal function of
  the residual, and the core sets are disjoint, giving the factor-2 form of
  the sparse domination bound.  The lower bound evaluates explicit families:
  the stopping-time family of the residual density, the finest packing, and
  all singletons.

The Garsia-Rodemich functional, decreasing rearrangements, weak-``L^p``, the
Luxemburg ``L log L`` norm, and ``sup(f** - f*)`` round out the toolkit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .families import (CubeFamily, SparsityViolation, cz_family,
                       family_tables, validate)
from .grid import CubeId, GridFunction, cube_index, iter_cubes, tree_size
from .local_poly import best_fit, poly_error, residual_cell_integrals
from .maximal import chain_max, level_integrals, lp_norm

__all__ = [
    "NormParams",
    "NormReport",
    "packing_sup_norm",
    "sparse_sup_exhaustive",
    "sparse_norm_bounds",
    "garo_norm",
    "bmo_norm",
    "Rearrangement",
    "rearrangement",
    "RIFunctionals",
    "ri_functionals",
    "scaled_error_levels",
]


@dataclass(frozen=True)
class NormParams:
    """Parameter tuple selecting a functional.

    ``family_class`` is ``"packing"``, ``"sparse"`` or ``"weak"``;
    ``family_order`` is the sparseness order (1 for the plain sparse class,
    ``1 - lam/n`` for the fractional refinement).
    """

    k: int = 1
    q: int = 1
    lam: float = 0.0
    p: float = 2.0
    convention: str = "V"
    family_class: str = "packing"
    family_order: float | None = None

    # -- the named functionals -------------------------------------------

    @classmethod
    def jn(cls, p: float) -> NormParams:
        return cls(k=1, q=1, lam=0.0, p=p, convention="V",
                   family_class="packing")

    @classmethod
    def bmo(cls) -> NormParams:
        return cls.jn(math.inf)

    @classmethod
    def riesz(cls, p: float) -> NormParams:
        """k=0: compare against the zero polynomial; recovers ||f||_p."""
        return cls(k=0, q=1, lam=0.0, p=p, convention="V",
                   family_class="packing")

    @classmethod
    def packing(cls, p: float, k: int, q: int, lam: float) -> NormParams:
        """General packing sup at smoothness k, integrability q, weight lam."""
        return cls(k=k, q=q, lam=lam, p=p, convention="V",
                   family_class="packing")

    @classmethod
    def sjn(cls, p: float) -> NormParams:
        return cls(k=1, q=1, lam=0.0, p=p, convention="SV",
                   family_class="sparse", family_order=1.0)

    @classmethod
    def sv(cls, p: float, k: int, q: int, lam: float) -> NormParams:
        return cls(k=k, q=q, lam=lam, p=p, convention="SV",
                   family_class="sparse", family_order=1.0)

    @classmethod
    def sv_fractional(cls, p: float, k: int, q: int, lam: float,
                      dimension: int) -> NormParams:
        """Supremum over families sparse of order 1 - lam/n."""
        return cls(k=k, q=q, lam=lam, p=p, convention="SV",
                   family_class="sparse", family_order=1.0 - lam / dimension)

    def to_json_dict(self) -> dict:
        return {
            "k": self.k, "q": self.q, "lambda": self.lam,
            "p": "inf" if math.isinf(self.p) else self.p,
            "convention": self.convention,
            "family_class": self.family_class,
            "family_order": self.family_order,
        }


@dataclass(frozen=True)
class NormReport:
    params: NormParams
    value_lower: float
    value_upper: float
    exact: bool
    witness: CubeFamily | None
    extras: dict = field(default_factory=dict)

    @property
    def value(self) -> float:
        if not self.exact:
            raise ValueError("norm is only bracketed; use value_lower/upper")
        return self.value_lower

    def to_json_dict(self) -> dict:
        return {
            "value_lower": self.value_lower,
            "value_upper": self.value_upper,
            "exact": self.exact,
            "params": self.params.to_json_dict(),
            "witness": None if self.witness is None
            else self.witness.to_json_dict(),
            "dyadic": True,
            **self.extras,
        }


# -- scaled local errors, level by level -------------------------------------

def _convention_exponent(params: NormParams, dimension: int) -> float:
    if params.convention == "V":
        return params.lam / dimension - 1.0 / params.q
    if params.convention == "SV":
        return params.lam / (dimension * params.q) - 1.0 / params.q
    raise ValueError(f"unknown convention {params.convention!r}")


def _median_rows(blocks: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Per row: (lower median, sum |v - median|)."""
    srt = np.sort(blocks, axis=1)
    m = srt.shape[1]
    j0 = (m - 1) // 2
    med = srt[:, j0]
    cs = np.cumsum(srt, axis=1)
    below = cs[:, j0]                      # sum of entries with index <= j0
    above = cs[:, -1] - below              # index > j0
    dev = (above - (m - 1 - j0) * med) + ((j0 + 1) * med - below)
    return med, dev


def _level_blocks(f: GridFunction, level: int) -> np.ndarray:
    """Cell values grouped by level-``level`` cube: (cubes, cells) matrix."""
    if f.dimension == 1:
        return f.values.reshape(1 << level, -1)
    side = 1 << level
    s = 1 << (f.depth - level)
    nd = f.values_nd.reshape(side, s, side, s)
    return nd.transpose(0, 2, 1, 3).reshape(side * side, s * s)


def scaled_error_levels(f: GridFunction, params: NormParams) -> list[np.ndarray]:
    """``scaled(Q)`` for every cube, one flat array per level."""
    n, L = f.dimension, f.depth
    e = _convention_exponent(params, n)
    k, q = params.k, params.q
    out: list[np.ndarray] = []
    if k == 0:
        dens = np.abs(f.values_nd) ** q * f.cell_measure
        for lvl, S in enumerate(level_integrals(dens, n, L)):
            meas = 2.0 ** (-n * lvl)
            out.append((meas ** e) * np.asarray(S).ravel() ** (1.0 / q))
    elif k == 1 and q == 1:
        for lvl in range(L + 1):
            _, dev = _median_rows(_level_blocks(f, lvl))
            meas = 2.0 ** (-n * lvl)
            out.append((meas ** e) * dev * f.cell_measure)
    else:
        for lvl in range(L + 1):
            meas = 2.0 ** (-n * lvl)
            vals = np.array([
                poly_error(f, c, k, q)
                for c in iter_cubes(L, n) if c.level == lvl
            ])
            out.append((meas ** e) * vals)
    return out


def _scaled_flat(f: GridFunction, params: NormParams) -> np.ndarray:
    """Scaled errors in breadth-first cube order."""
    return np.concatenate(scaled_error_levels(f, params))


# -- packing supremum ---------------------------------------------------------

def packing_sup_norm(f: GridFunction, params: NormParams) -> NormReport:
    """Exact supremum over dyadic packings (antichains) by tree DP.

    Ties between a cube and its descendants resolve to the shallower cube, so
    witnesses are deterministic.  ``p = inf`` degenerates to the max of the
    scaled error over all cubes (the BMO case for k=1, q=1, lam=0).
    """
    if params.family_class != "packing":
        raise ValueError("packing_sup_norm needs family_class='packing'")
    n, L = f.dimension, f.depth
    scaled = scaled_error_levels(f, params)
    if math.isinf(params.p):
        per_level_max = [lvl.max() for lvl in scaled]
        value = float(max(per_level_max))
        lvl = int(np.argmax(per_level_max))
        idx = int(np.argmax(scaled[lvl]))
        cube = _cube_from_rank(lvl, idx, n)
        witness = validate([cube], "packing", dimension=n, depth=L)
    else:
        p = params.p
        weights = [
            lvl_scaled ** p * 2.0 ** (-n * lvl)
            for lvl, lvl_scaled in enumerate(scaled)
        ]
        best = weights[L].copy()
        child_sums: list[np.ndarray | None] = [None] * (L + 1)
        for lvl in range(L - 1, -1, -1):
            kids = _sibling_sums(best, n)
            child_sums[lvl] = kids
            best = np.maximum(weights[lvl], kids)
        value = float(best[0]) ** (1.0 / p)
        members: list[CubeId] = []
        stack = [(0, 0)]
        while stack:
            lvl, idx = stack.pop()
            kids = child_sums[lvl]
            if lvl == L or weights[lvl][idx] >= kids[idx]:
                members.append(_cube_from_rank(lvl, idx, n))
            else:
                stack.extend((lvl + 1, j) for j in _child_ranks(lvl, idx, n))
        witness = validate(members, "packing", dimension=n, depth=L)
    assert isinstance(witness, CubeFamily)
    return NormReport(params, value, value, True, witness)


def _sibling_sums(level_vals: np.ndarray, dimension: int) -> np.ndarray:
    """Sum flat row-major level values over sibling groups (the parent's
    children), giving the flat row-major array one level up."""
    if dimension == 1:
        return level_vals.reshape(-1, 2).sum(axis=1)
    side = int(math.isqrt(level_vals.size))
    half = side // 2
    nd = level_vals.reshape(half, 2, half, 2)
    return nd.sum(axis=(1, 3)).ravel()


def _child_ranks(level: int, rank: int, dimension: int):
    """Flat row-major ranks (at ``level + 1``) of a cube's children."""
    if dimension == 1:
        return (rank << 1, (rank << 1) + 1)
    side = 1 << level
    r, c = divmod(rank, side)
    row0 = (r << 1) * (side << 1) + (c << 1)
    row1 = row0 + (side << 1)
    return (row0, row0 + 1, row1, row1 + 1)


def _cube_from_rank(level: int, rank: int, dimension: int) -> CubeId:
    if dimension == 1:
        return CubeId(level, (rank,))
    side = 1 << level
    return CubeId(level, (rank // side, rank % side))


def bmo_norm(f: GridFunction) -> float:
    return packing_sup_norm(f, NormParams.bmo()).value


# -- sparse suprema -----------------------------------------------------------

def _order_key(params: NormParams):
    if params.family_class == "sparse":
        return 1.0 if params.family_order is None else params.family_order
    if params.family_class == "weak":
        return "weak"
    raise ValueError(
        f"sparse evaluation needs a sparse family class, got "
        f"{params.family_class!r}")


def sparse_sup_exhaustive(f: GridFunction, params: NormParams) -> NormReport:
    """Exact sparse supremum by full family enumeration (<= 15 tree nodes).

    Reports the core-set form as the value and the ``|Q|``-weighted variant
    in ``extras["weighted_value"]``.  The witness is the first maximising
    family in bitmask order.
    """
    try:
        tables = family_tables(f.dimension, f.depth, _order_key(params))
    except ValueError as exc:
        raise ValueError(
            f"{exc}; use sparse_norm_bounds at this scale") from None
    scaled = _scaled_flat(f, params)
    if math.isinf(params.p):
        member = tables.cube_meas > 0
        fam_core = np.where(member, scaled[None, :], 0.0).max(axis=1)
        fam_weighted = fam_core
    else:
        sp = scaled ** params.p
        fam_core = (tables.core_meas @ sp) ** (1.0 / params.p)
        fam_weighted = (tables.cube_meas @ sp) ** (1.0 / params.p)
    row = int(np.argmax(fam_core))
    value = float(fam_core[row])
    witness = validate(tables.family_cubes(row), _order_key(params),
                       dimension=f.dimension, depth=f.depth)
    assert isinstance(witness, CubeFamily)
    return NormReport(params, value, value, True, witness,
                      extras={"weighted_value": float(fam_weighted.max())})


def family_value(f: GridFunction, family: CubeFamily, params: NormParams,
                 scaled_flat: np.ndarray | None = None) -> float:
    """Core-set value of one family: ``(sum scaled(Q)^p |E_Q|)^{1/p}``."""
    if scaled_flat is None:
        scaled_flat = _scaled_flat(f, params)
    vals = np.array([scaled_flat[cube_index(c, f.dimension)]
                     for c in family.cubes])
    if math.isinf(params.p):
        return float(vals.max())
    core = np.array([family.core_measure(c) for c in family.cubes])
    return float((vals ** params.p @ core) ** (1.0 / params.p))


def sparse_norm_bounds(f: GridFunction, params: NormParams) -> NormReport:
    """Certified interval for a sparse norm at any scale.

    Upper: ``2 ||M_{q,lam}(f - P)||_p`` with ``P`` the least-squares fit on
    the root cube; exact residual integrals feed the maximal function, so the
    bound is the theorem's factor-2 inequality evaluated without slack.
    Lower: the best of (a) the stopping-time family of the residual density,
    (b) the finest packing, (c) every singleton family.
    """
    n, L = f.dimension, f.depth
    root = CubeId(0, (0,) * n)
    fit = best_fit(f, root, params.k, 2 if params.k >= 1 else params.q)
    r_cells = residual_cell_integrals(f, fit, params.q)
    r_nd = r_cells.reshape(f.values_nd.shape)

    mvals = chain_max(level_integrals(r_nd, n, L), n, params.q, params.lam)
    upper = 2.0 * lp_norm(GridFunction(n, L, mvals.ravel()), params.p)

    scaled = _scaled_flat(f, params)
    order = _order_key(params)

    candidates: list[CubeFamily] = []
    density = GridFunction(n, L, (r_cells / f.cell_measure) ** (1.0 / params.q))
    stopping = cz_family(density, 2.0)
    if order == 1.0:
        candidates.append(stopping)
    else:
        # the stopping-time family is sparse(1); thinner classes may reject it
        revalidated = validate(stopping.cubes, order, dimension=n, depth=L)
        if isinstance(revalidated, CubeFamily):
            candidates.append(revalidated)
    finest = validate([c for c in iter_cubes(L, n) if c.level == L],
                      order, dimension=n, depth=L)
    if isinstance(finest, CubeFamily):
        candidates.append(finest)

    lower = -math.inf
    witness = None
    for fam in candidates:
        val = family_value(f, fam, params, scaled)
        if val > lower:
            lower, witness = val, fam
    # singletons are sparse of every order: no children at all
    meas = np.concatenate([
        np.full(1 << (n * lvl), 2.0 ** (-n * lvl)) for lvl in range(L + 1)
    ])
    if math.isinf(params.p):
        single_vals = scaled
    else:
        single_vals = (scaled ** params.p * meas) ** (1.0 / params.p)
    best_single = int(np.argmax(single_vals))
    if float(single_vals[best_single]) > lower:
        lower = float(single_vals[best_single])
        cube = _cube_from_bfs(best_single, n)
        single = validate([cube], order, dimension=n, depth=L)
        assert isinstance(single, CubeFamily)
        witness = single

    lower = max(lower, 0.0)
    return NormReport(params, lower, upper, False, witness,
                      extras={"reference_fit_error": fit.error})


def _cube_from_bfs(index: int, dimension: int) -> CubeId:
    lvl = 0
    while index >= 1 << (dimension * lvl):
        index -= 1 << (dimension * lvl)
        lvl += 1
    return _cube_from_rank(lvl, index, dimension)


# -- Garsia-Rodemich functional ----------------------------------------------

def garo_norm(f: GridFunction, p: float) -> NormReport:
    """sup over packings of ``sum_i E_1(f;Q_i)_1 / (sum_i |Q_i|)^{1/p'}``.

    Exact by enumeration at oracle scale (<= 15 tree nodes); beyond that the
    maximum over single cubes, full levels, and the packing-DP witness is a
    certified lower bound, with the packing JN value as upper bound (Hoelder
    applied per packing shows the ratio never exceeds it).
    """
    if p <= 1:
        raise ValueError(f"the functional needs p > 1, got {p}")
    n, L = f.dimension, f.depth
    params = NormParams.jn(p)
    # E_1(f;Q)_1 per cube = scaled error of the JN parameters times |Q|
    scaled = _scaled_flat(f, params)
    meas = np.concatenate([
        np.full(1 << (n * lvl), 2.0 ** (-n * lvl)) for lvl in range(L + 1)
    ])
    errors = scaled * meas
    pprime_inv = 1.0 if math.isinf(p) else 1.0 - 1.0 / p

    def ratio(member_idx: np.ndarray) -> float:
        num = float(errors[member_idx].sum())
        den = float(meas[member_idx].sum()) ** pprime_inv
        return num / den

    jn_report = packing_sup_norm(f, params)
    jn_value = jn_report.value
    if tree_size(L, n) <= 15:
        tables = family_tables(n, L, "packing")
        member = tables.cube_meas > 0
        nums = member @ errors
        dens = (member @ meas) ** pprime_inv
        ratios = nums / dens
        row = int(np.argmax(ratios))
        value = float(ratios[row])
        witness = validate(tables.family_cubes(row), "packing",
                           dimension=n, depth=L)
        assert isinstance(witness, CubeFamily)
        return NormReport(params, value, value, True, witness,
                          extras={"jn_value": jn_value})

    best_members: list[CubeId] | None = None
    best_val = -math.inf
    for idx in range(errors.size):
        val = ratio(np.array([idx]))
        if val > best_val:
            best_val, best_members = val, [_cube_from_bfs(idx, n)]
    offset = 0
    for lvl in range(L + 1):
        count = 1 << (n * lvl)
        idxs = np.arange(offset, offset + count)
        val = ratio(idxs)
        if val > best_val:
            best_val = val
            best_members = [_cube_from_bfs(i, n) for i in idxs]
        offset += count
    dp_witness = jn_report.witness
    idxs = np.array([cube_index(c, n) for c in dp_witness.cubes])
    val = ratio(idxs)
    if val > best_val:
        best_val, best_members = val, list(dp_witness.cubes)
    witness = validate(best_members, "packing", dimension=n, depth=L)
    assert isinstance(witness, CubeFamily)
    # when the best candidate attains the upper bound the sandwich is a proof
    exact = float(best_val) == jn_value
    return NormReport(params, float(best_val), jn_value, exact, witness,
                      extras={"jn_value": jn_value})


# -- rearrangement-invariant functionals ---------------------------------------

@dataclass(frozen=True)
class Rearrangement:
    """Decreasing rearrangement of ``|f|`` as a step function.

    ``f*`` is constant on blocks of measure ``block``; ``f**(t)`` is the
    running average ``(1/t) integral_0^t f*``, evaluated exactly.
    """

    values: np.ndarray  # sorted decreasing
    block: float

    def star(self, t: float) -> float:
        """Right-continuous ``f*`` on [0, 1)."""
        if not 0.0 <= t < 1.0:
            raise ValueError(f"f* is defined on [0,1), got t={t}")
        return float(self.values[int(t / self.block)])

    def star_left(self, t: float) -> float:
        """Left limit ``f*(t-)`` on (0, 1]."""
        if not 0.0 < t <= 1.0:
            raise ValueError(f"left limits exist on (0,1], got t={t}")
        return float(self.values[math.ceil(t / self.block) - 1])

    def starstar(self, t: float) -> float:
        if not 0.0 < t <= 1.0:
            raise ValueError(f"f** is defined on (0,1], got t={t}")
        full = int(t / self.block)
        partial = t - full * self.block
        acc = float(self.values[:full].sum()) * self.block
        if partial > 0 and full < self.values.size:
            acc += float(self.values[full]) * partial
        return acc / t


def rearrangement(f: GridFunction) -> Rearrangement:
    vals = np.sort(np.abs(f.values))[::-1].copy()
    return Rearrangement(vals, f.cell_measure)


@dataclass(frozen=True)
class RIFunctionals:
    weak_lp: float
    llogl: float
    bds: float


def ri_functionals(f: GridFunction, p: float) -> RIFunctionals:
    """weak-L^p, Luxemburg L log L, and sup(f** - f*) of one grid function.

    weak_lp = sup_t t^{1/p} f*(t), attained as t approaches block right
    endpoints.  llogl uses the Young function ``Phi(t) = t log(e + t)`` and
    bisection to 1e-10.  bds evaluates ``f**(t) - f*(t+)`` at block endpoints
    and midpoints (f* right-continuous; at t=1 the left limit) -- exhaustive
    for step functions since f** - f* decreases between consecutive jumps.
    """
    if p <= 1:
        raise ValueError(f"weak-L^p needs p > 1, got {p}")
    r = rearrangement(f)
    m = r.values.size
    rights = (np.arange(m) + 1) * r.block
    weak = float((rights ** (1.0 / p) * r.values).max())

    llogl = _luxemburg_llogl(f)

    pts: list[float] = []
    for j in range(m):
        pts.append((j + 0.5) * r.block)
        pts.append((j + 1.0) * r.block)
    bds = 0.0
    for t in pts:
        fstar_plus = r.star(t) if t < 1.0 else r.star_left(1.0)
        bds = max(bds, r.starstar(t) - fstar_plus)
    return RIFunctionals(weak, llogl, bds)


def _luxemburg_llogl(f: GridFunction, tol: float = 1e-10) -> float:
    v = np.abs(f.values)
    if not np.any(v > 0):
        return 0.0
    meas = f.cell_measure

    def integral(mu: float) -> float:
        x = v / mu
        return float((x * np.log(math.e + x)).sum() * meas)

    hi = max(float(v.max()), 1e-300)
    while integral(hi) > 1.0:
        hi *= 2.0
    lo = hi
    while integral(lo) <= 1.0:
        lo /= 2.0
        if lo < 1e-300:
            break
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if integral(mid) > 1.0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= tol:
            break
    return hi
