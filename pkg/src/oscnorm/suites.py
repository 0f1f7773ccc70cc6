"""Seeded verification suites with deterministic JSON reports.

Each suite draws reproducible random grids, evaluates a family of norm
relations, and reports aggregates plus named pass/fail assertions.  All the
heavy lifting runs on stacked value matrices (one row per trial), so suites
stay fast enough to act as calibration runs with thousands of grids.

Reports serialize with sorted keys; rerunning a suite with the same
configuration yields a byte-identical file.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .families import family_tables
from .generate import batch_uniform, log_singularity
from .grid import GridFunction, tree_size
from .maximal import lp_norm, maximal_opnorm_bound
from .norms import (NormParams, _luxemburg_llogl, _median_rows, bmo_norm,
                    garo_norm, packing_sup_norm, ri_functionals,
                    sparse_norm_bounds, sparse_sup_exhaustive)

__all__ = ["SUITE_NAMES", "SuiteConfig", "SuiteReport", "run_suite"]

SUITE_NAMES = ("riesz", "sparse-jn", "sv-equivalence", "fractional-sv",
               "jn-extrapolation", "sobolev-chain", "embedding-chain")

_MAX_ROWS = 20
_CHUNK_BUDGET = 4_000_000  # floats per family-table matmul block


@dataclass(frozen=True)
class SuiteConfig:
    suite: str
    dimension: int = 1
    depth: int = 2
    trials: int = 100
    seed: int = 0
    generator: str = "uniform-iid"

    def __post_init__(self):
        if self.suite not in SUITE_NAMES:
            raise ValueError(f"unknown suite {self.suite!r}; "
                             f"options: {', '.join(SUITE_NAMES)}")
        if self.trials < 1:
            raise ValueError("trials must be positive")

    def to_json_dict(self) -> dict:
        return {"suite": self.suite, "dimension": self.dimension,
                "depth": self.depth, "trials": self.trials,
                "seed": self.seed, "generator": self.generator}


@dataclass(frozen=True)
class SuiteReport:
    config: SuiteConfig
    aggregates: dict
    assertions: tuple[dict, ...]
    rows: tuple[dict, ...] = ()

    @property
    def passed(self) -> bool:
        return all(a["passed"] for a in self.assertions)

    def to_json_dict(self) -> dict:
        return {
            "schema": 1,
            "suite": self.config.suite,
            "config": self.config.to_json_dict(),
            "aggregates": self.aggregates,
            "assertions": list(self.assertions),
            "rows": list(self.rows),
            "passed": self.passed,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), sort_keys=True, indent=2) + "\n"


def _assertion(name: str, passed: bool, detail: str) -> dict:
    return {"name": name, "passed": bool(passed), "detail": detail}


# -- batched primitives (one row per trial) ----------------------------------

def _blocks(V: np.ndarray, n: int, L: int, level: int) -> np.ndarray:
    """Cell values grouped by level cube: (trials*cubes, cells_per_cube)."""
    T = V.shape[0]
    if n == 1:
        return V.reshape(T * (1 << level), -1)
    s = 1 << level
    b = 1 << (L - level)
    nd = V.reshape(T, s, b, s, b)
    return nd.transpose(0, 1, 3, 2, 4).reshape(T * s * s, b * b)


def _e1_levels(V: np.ndarray, n: int, L: int) -> list[np.ndarray]:
    """E_1(f;Q)_1 for every cube, one (trials, cubes) matrix per level."""
    cell_meas = 2.0 ** (-n * L)
    out = []
    for lvl in range(L + 1):
        _, dev = _median_rows(_blocks(V, n, L, lvl))
        out.append(dev.reshape(V.shape[0], -1) * cell_meas)
    return out


def _scaled_flat_e1(e1: list[np.ndarray], n: int, exponent: float) -> np.ndarray:
    """|Q|^exponent * E_1 concatenated in breadth-first order."""
    cols = [(2.0 ** (-n * lvl)) ** exponent * e for lvl, e in enumerate(e1)]
    return np.concatenate(cols, axis=1)


def _level_sums(dens: np.ndarray, n: int, L: int) -> list[np.ndarray]:
    """Integrals over every cube from per-cell integrals (trials leading)."""
    T = dens.shape[0]
    levels: list[np.ndarray] = [np.empty(0)] * (L + 1)
    cur = dens if n == 1 else dens.reshape(T, 1 << L, 1 << L)
    levels[L] = cur
    for lvl in range(L - 1, -1, -1):
        if n == 1:
            cur = cur.reshape(T, -1, 2).sum(axis=2)
        else:
            m = 1 << lvl
            cur = cur.reshape(T, m, 2, m, 2).sum(axis=(2, 4))
        levels[lvl] = cur
    return levels


def _chain_max(levels: list[np.ndarray], n: int, q: int,
               lam: float) -> np.ndarray:
    """Batched fractional maximal function over ancestor chains."""
    run: np.ndarray | None = None
    for lvl, S in enumerate(levels):
        meas = 2.0 ** (-n * lvl)
        val = (meas ** (lam / n - 1.0) * S) ** (1.0 / q)
        if run is None:
            run = val
        else:
            for ax in range(1, n + 1):
                run = np.repeat(run, 2, axis=ax)
            run = np.maximum(run, val)
    assert run is not None
    return run.reshape(run.shape[0], -1)


def _lp_rows(V: np.ndarray, p: float, cell_meas: float) -> np.ndarray:
    if math.isinf(p):
        return np.abs(V).max(axis=1)
    return ((np.abs(V) ** p).sum(axis=1) * cell_meas) ** (1.0 / p)


def _packing_dp_rows(weights: list[np.ndarray], n: int, p: float) -> np.ndarray:
    """Batched max-weight-antichain totals ** (1/p)."""
    best = weights[-1]
    for lvl in range(len(weights) - 2, -1, -1):
        T = best.shape[0]
        if n == 1:
            kids = best.reshape(T, -1, 2).sum(axis=2)
        else:
            side = int(math.isqrt(best.shape[1]))
            half = side // 2
            kids = best.reshape(T, half, 2, half, 2).sum(axis=(2, 4))
            kids = kids.reshape(T, -1)
        best = np.maximum(weights[lvl], kids)
    return best[:, 0] ** (1.0 / p)


def _chunks(trials: int, width: int):
    step = max(1, _CHUNK_BUDGET // max(width, 1))
    for t0 in range(0, trials, step):
        yield t0, min(t0 + step, trials)


# -- the suites ---------------------------------------------------------------

def _suite_riesz(cfg: SuiteConfig) -> SuiteReport:
    """Packing supremum with the approximation-by-zero convention recovers
    the plain L^p norm exactly."""
    n, L = cfg.dimension, cfg.depth
    V = batch_uniform(n, L, cfg.seed, cfg.trials)
    cell_meas = 2.0 ** (-n * L)
    p_list = (1.0, 2.0, 4.0)
    max_rel = 0.0
    rows = []
    dens_levels = _level_sums(np.abs(V) * cell_meas, n, L)
    for p in p_list:
        weights = [
            (S.reshape(S.shape[0], -1)) ** p * (2.0 ** (-n * lvl)) ** (1.0 - p)
            for lvl, S in enumerate(dens_levels)
        ]
        packing = _packing_dp_rows(weights, n, p)
        direct = _lp_rows(V, p, cell_meas)
        rel = np.abs(packing - direct) / np.maximum(direct, 1e-300)
        max_rel = max(max_rel, float(rel.max()))
        for t in range(min(cfg.trials, _MAX_ROWS // len(p_list) + 1)):
            rows.append({"trial": t, "p": p, "packing": float(packing[t]),
                         "lp": float(direct[t]), "rel_err": float(rel[t])})
    # cross-check the batched dynamic program against the library on a few
    spot = 0.0
    for t in range(min(cfg.trials, 3)):
        f = GridFunction(n, L, V[t])
        rep = packing_sup_norm(f, NormParams.riesz(2.0))
        spot = max(spot, abs(rep.value - lp_norm(f, 2.0)))
    asserts = (
        _assertion("riesz-identity", max_rel <= 1e-10,
                   f"max relative gap {max_rel:.3e} over "
                   f"{cfg.trials} grids x p in {p_list}"),
        _assertion("batched-matches-library", spot <= 1e-12,
                   f"spot-check gap {spot:.3e}"),
    )
    return SuiteReport(cfg, {"max_rel_err": max_rel, "p_list": list(p_list)},
                       asserts, tuple(rows[:_MAX_ROWS]))


def _suite_sparse_jn(cfg: SuiteConfig) -> SuiteReport:
    """Factor-2 sparse domination, the two-sided core/weighted comparison,
    maximal-over-norm calibration ratios, and the L log L ratio at p=1."""
    n, L = cfg.dimension, cfg.depth
    if tree_size(L, n) > 15:
        raise ValueError("sparse-jn runs at oracle scale (<= 15 tree nodes)")
    V = batch_uniform(n, L, cfg.seed, cfg.trials)
    T = V.shape[0]
    cell_meas = 2.0 ** (-n * L)
    tables = family_tables(n, L, 1.0)
    n_fam = tables.core_meas.shape[0]
    e1 = _e1_levels(V, n, L)
    scaled = _scaled_flat_e1(e1, n, -1.0)       # |Q|^{-1} E_1
    med = np.sort(V, axis=1)[:, (V.shape[1] - 1) // 2]
    resid = np.abs(V - med[:, None])
    mx = _chain_max(_level_sums(resid * cell_meas, n, L), n, 1, 0.0)

    p_list = (1.0, 2.0, 4.0)
    factor_two_viol = 0
    two_sided_viol = 0
    max_excess = 0.0
    ratio_max: dict[str, float] = {}
    sjn_by_p: dict[float, np.ndarray] = {}
    for p in p_list:
        sp = scaled ** p
        bound = 2.0 * _lp_rows(mx, p, cell_meas)
        core_max = np.empty(T)
        for t0, t1 in _chunks(T, n_fam):
            core = (sp[t0:t1] @ tables.core_meas.T) ** (1.0 / p)
            wted = (sp[t0:t1] @ tables.cube_meas.T) ** (1.0 / p)
            two_sided_viol += int((core > wted + 1e-12).sum())
            two_sided_viol += int((wted > 2.0 ** (1.0 / p) * core + 1e-12).sum())
            core_max[t0:t1] = core.max(axis=1)
        sjn_by_p[p] = core_max
        excess = core_max - bound
        factor_two_viol += int((excess > 1e-10).sum())
        max_excess = max(max_excess, float(excess.max()))
        ratio_max[f"p={p:g}"] = float((_lp_rows(mx, p, cell_meas)
                                       / (p * core_max)).max())

    mean = V.mean(axis=1)
    n_ll = min(T, 500)   # the bisection is per-grid; cap the slow part
    llogl = np.array([
        _luxemburg_llogl(GridFunction(n, L, V[t] - mean[t]))
        for t in range(n_ll)
    ])
    lr = sjn_by_p[1.0][:n_ll] / llogl
    rows = [{"trial": t, "sjn_p2": float(sjn_by_p[2.0][t]),
             "llogl_ratio": float(lr[t])} for t in range(min(T, _MAX_ROWS))]
    asserts = (
        _assertion("factor-two-upper", factor_two_viol == 0,
                   f"{factor_two_viol} violations, worst excess "
                   f"{max_excess:.3e} over {T} grids x p in {p_list}"),
        _assertion("core-weighted-two-sided", two_sided_viol == 0,
                   f"{two_sided_viol} violations over {n_fam} families"),
        _assertion("llogl-ratio-finite",
                   bool(np.isfinite(lr).all() and (lr > 0).all()),
                   f"ratio range [{float(lr.min()):.6g}, {float(lr.max()):.6g}]"),
    )
    aggregates = {
        "families": int(n_fam),
        "factor_two_violations": int(factor_two_viol),
        "two_sided_violations": int(two_sided_viol),
        "maximal_over_p_sjn_max": ratio_max,
        "llogl_trials": int(n_ll),
        "llogl_ratio_min": float(lr.min()),
        "llogl_ratio_max": float(lr.max()),
    }
    return SuiteReport(cfg, aggregates, asserts, tuple(rows))


def _suite_sv_equivalence(cfg: SuiteConfig) -> SuiteReport:
    """Factor-2 upper bound and packing-below-sparse across (k, q) choices."""
    n, L = cfg.dimension, cfg.depth
    if tree_size(L, n) > 15:
        raise ValueError("sv-equivalence runs at oracle scale (<= 15 nodes)")
    V = batch_uniform(n, L, cfg.seed, cfg.trials)
    kq_list = ((1, 1), (2, 2), (3, 2), (2, 1))
    p_list = (1.0, 2.0, 4.0)
    per = max(1, cfg.trials // len(kq_list))
    viol_upper = 0
    viol_pack = 0
    checks = 0
    worst = -math.inf
    rows = []
    for i, (k, q) in enumerate(kq_list):
        count = min(per, 40) if (k >= 2 and q == 1) else per
        for t in range(count):
            f = GridFunction(n, L, V[(i * per + t) % cfg.trials])
            for p in p_list:
                sv = sparse_sup_exhaustive(f, NormParams.sv(p, k, q, 0.0))
                bracket = sparse_norm_bounds(f, NormParams.sv(p, k, q, 0.0))
                pk = packing_sup_norm(f, NormParams.packing(p, k, q, 0.0))
                checks += 1
                gap = sv.value - bracket.value_upper
                worst = max(worst, gap)
                if gap > 1e-10:
                    viol_upper += 1
                if pk.value > sv.value + 1e-12:
                    viol_pack += 1
                if len(rows) < _MAX_ROWS:
                    rows.append({"k": k, "q": q, "p": p,
                                 "sv": sv.value,
                                 "upper": bracket.value_upper,
                                 "lower": bracket.value_lower,
                                 "packing": pk.value})
                if not (bracket.value_lower <= sv.value + 1e-10):
                    viol_upper += 1
    asserts = (
        _assertion("factor-two-upper", viol_upper == 0,
                   f"{viol_upper} violations in {checks} checks, worst "
                   f"excess {worst:.3e}"),
        _assertion("packing-below-sparse", viol_pack == 0,
                   f"{viol_pack} violations in {checks} checks"),
    )
    return SuiteReport(cfg, {"checks": checks, "worst_excess": float(worst)},
                       asserts, tuple(rows))


def _suite_fractional_sv(cfg: SuiteConfig) -> SuiteReport:
    """Order-(1 - lam/n) refinement: thinner families only lower the value,
    and the factor-2 fractional-maximal bound stays exact."""
    n, L = cfg.dimension, cfg.depth
    if tree_size(L, n) > 15:
        raise ValueError("fractional-sv runs at oracle scale (<= 15 nodes)")
    V = batch_uniform(n, L, cfg.seed, cfg.trials)
    T = V.shape[0]
    cell_meas = 2.0 ** (-n * L)
    e1 = _e1_levels(V, n, L)
    mean = V.mean(axis=1)
    resid = np.abs(V - mean[:, None])
    p_list = (1.0, 2.0, 4.0)
    lam_list = (0.0, n / 2.0)
    viol_nest = 0
    viol_upper = 0
    aggregates: dict = {"p_list": list(p_list), "lambda_list": list(lam_list)}
    rows = []
    for lam in lam_list:
        order = 1.0 - lam / n
        t_frac = family_tables(n, L, order)
        t_full = family_tables(n, L, 1.0)
        scaled = _scaled_flat_e1(e1, n, lam / n - 1.0)
        mx = _chain_max(_level_sums(resid * cell_meas, n, L), n, 1, lam)
        for p in p_list:
            sp = scaled ** p
            svt = np.empty(T)
            sv = np.empty(T)
            for t0, t1 in _chunks(T, t_full.core_meas.shape[0]):
                svt[t0:t1] = ((sp[t0:t1] @ t_frac.core_meas.T)
                              ** (1.0 / p)).max(axis=1)
                sv[t0:t1] = ((sp[t0:t1] @ t_full.core_meas.T)
                             ** (1.0 / p)).max(axis=1)
            bound = 2.0 * _lp_rows(mx, p, cell_meas)
            viol_nest += int((svt > sv + 1e-12).sum())
            viol_upper += int((svt > bound + 1e-10).sum())
            if lam > 0 and p == 2.0:
                aggregates["tight_margin_p2"] = float((bound - svt).min())
            for t in range(min(T, 3)):
                if len(rows) < _MAX_ROWS:
                    rows.append({"trial": t, "lambda": lam, "p": p,
                                 "svt": float(svt[t]), "sv": float(sv[t]),
                                 "bound": float(bound[t])})
    asserts = (
        _assertion("fractional-below-plain", viol_nest == 0,
                   f"{viol_nest} violations over {T} grids"),
        _assertion("factor-two-upper", viol_upper == 0,
                   f"{viol_upper} violations over {T} grids"),
    )
    return SuiteReport(cfg, aggregates, asserts, tuple(rows))


def _suite_jn_extrapolation(cfg: SuiteConfig) -> SuiteReport:
    """Growth of ||f - avg||_p against p * BMO for the logarithmic
    singularity, at the configured depth and two levels finer."""
    if cfg.dimension != 1:
        raise ValueError("the log-singularity comparison is 1-dimensional")
    p_list = (2.0, 4.0, 8.0, 16.0)
    depths = (cfg.depth, cfg.depth + 2)
    ratios: dict[int, list[float]] = {}
    decay_viol = 0
    decay_pairs = 0
    for L in depths:
        f = log_singularity(L)
        bmo = bmo_norm(f)
        g = GridFunction(1, L, f.values - float(np.mean(f.values)))
        ratios[L] = [lp_norm(g, p) / (p * bmo) for p in p_list]
        # dyadic distribution decay: mass above j*BMO drops geometrically
        cell = 2.0 ** (-L)
        absg = np.abs(g.values)
        masses = []
        j = 1
        while True:
            mu = float((absg > j * bmo).sum() * cell)
            if mu <= 0:
                break
            masses.append(mu)
            j += 1
        for a, b in zip(masses, masses[1:]):
            if b >= 4 * cell:
                decay_pairs += 1
                if b > 0.9 * a:
                    decay_viol += 1
    coarse, fine = depths
    max_coarse = max(ratios[coarse])
    max_fine = max(ratios[fine])
    mono_ok = all(
        ratios[L][i + 1] <= 1.05 * ratios[L][i]
        for L in depths for i in range(len(p_list) - 1)
    )
    asserts = (
        _assertion("depth-stability", max_fine <= 1.05 * max_coarse,
                   f"max ratio {max_fine:.6g} at L={fine} vs "
                   f"{max_coarse:.6g} at L={coarse}"),
        _assertion("nonincreasing-in-p", mono_ok,
                   f"ratios {[round(r, 6) for r in ratios[fine]]} at L={fine}"),
        _assertion("geometric-decay", decay_viol == 0,
                   f"{decay_viol} of {decay_pairs} threshold steps decayed "
                   "slower than 0.9"),
    )
    aggregates = {
        "p_list": list(p_list),
        "ratios": {str(L): ratios[L] for L in depths},
        "max_ratio_coarse": max_coarse,
        "max_ratio_fine": max_fine,
    }
    return SuiteReport(cfg, aggregates, asserts)


def _suite_sobolev_chain(cfg: SuiteConfig) -> SuiteReport:
    """Each link of the fractional-maximal / sparse-norm / L^p chain at
    (lam, p, q) = (1/2, 4/3, 4), exact links with zero violations."""
    if cfg.dimension != 1:
        raise ValueError("the chain is calibrated in dimension 1")
    n, L = 1, cfg.depth
    if tree_size(L, n) > 15:
        raise ValueError("sobolev-chain runs at oracle scale (<= 15 nodes)")
    lam, p, q = 0.5, 4.0 / 3.0, 4.0
    V = batch_uniform(n, L, cfg.seed, cfg.trials)
    T = V.shape[0]
    cell_meas = 2.0 ** (-n * L)
    tables = family_tables(n, L, 1.0)
    e1 = _e1_levels(V, n, L)
    scaled_q = _scaled_flat_e1(e1, n, lam / n - 1.0)   # |Q|^{lam/n - 1} E_1
    scaled_p = _scaled_flat_e1(e1, n, -1.0)            # |Q|^{-1} E_1
    mean = V.mean(axis=1)
    resid = np.abs(V - mean[:, None])
    m_lam = _chain_max(_level_sums(resid * cell_meas, n, L), n, 1, lam)
    m_zero = _chain_max(_level_sums(resid * cell_meas, n, L), n, 1, 0.0)
    m_lam_q = _lp_rows(m_lam, q, cell_meas)
    m_zero_p = _lp_rows(m_zero, p, cell_meas)
    fp = _lp_rows(V - mean[:, None], p, cell_meas)

    viol = {name: 0 for name in
            ("core-below-weighted", "sequence-embedding",
             "sv-below-fractional-maximal", "sjn-below-maximal",
             "sjn-upper-via-doob")}
    sv_core = np.empty(T)
    sjn_core = np.empty(T)
    wted_p_max = np.empty(T)
    for t0, t1 in _chunks(T, tables.core_meas.shape[0]):
        cq = (scaled_q[t0:t1] ** q @ tables.core_meas.T) ** (1.0 / q)
        wq = (scaled_q[t0:t1] ** q @ tables.cube_meas.T) ** (1.0 / q)
        wp = (scaled_p[t0:t1] ** p @ tables.cube_meas.T) ** (1.0 / p)
        cp = (scaled_p[t0:t1] ** p @ tables.core_meas.T) ** (1.0 / p)
        viol["core-below-weighted"] += int((cq > wq + 1e-12).sum())
        viol["sequence-embedding"] += int((wq > wp + 1e-12).sum())
        sv_core[t0:t1] = cq.max(axis=1)
        sjn_core[t0:t1] = cp.max(axis=1)
        wted_p_max[t0:t1] = wp.max(axis=1)
    viol["sv-below-fractional-maximal"] += int(
        (sv_core > m_lam_q + 1e-10).sum())
    viol["sjn-below-maximal"] += int((sjn_core > m_zero_p + 1e-10).sum())
    doob = 2.0 ** (1.0 / p) * maximal_opnorm_bound(p) * fp
    viol["sjn-upper-via-doob"] += int((wted_p_max > doob + 1e-10).sum())

    k_maximal = float((m_lam_q / sv_core).max())
    k_lp = float((fp / sjn_core).max())
    rows = [{"trial": t, "sv_core": float(sv_core[t]),
             "m_lam_q": float(m_lam_q[t]), "sjn_core": float(sjn_core[t]),
             "fp": float(fp[t])} for t in range(min(T, _MAX_ROWS))]
    asserts = tuple(
        _assertion(name, count == 0, f"{count} violations over {T} grids")
        for name, count in viol.items()
    )
    aggregates = {
        "lambda": lam, "p": p, "q": q,
        "k_maximal_over_sv": k_maximal,
        "k_lp_over_sjn": k_lp,
    }
    return SuiteReport(cfg, aggregates, asserts, tuple(rows))


def _suite_embedding_chain(cfg: SuiteConfig) -> SuiteReport:
    """garo <= packing JN <= sparse JN exactly, with weak-L^p / garo
    calibration ratios."""
    n, L = cfg.dimension, cfg.depth
    if tree_size(L, n) > 15:
        raise ValueError("embedding-chain runs at oracle scale (<= 15 nodes)")
    V = batch_uniform(n, L, cfg.seed, cfg.trials)
    T = V.shape[0]
    cell_meas = 2.0 ** (-n * L)
    pack = family_tables(n, L, "packing")
    sparse = family_tables(n, L, 1.0)
    member = (pack.cube_meas > 0).astype(np.float64)
    fam_meas = pack.cube_meas.sum(axis=1)
    e1 = _e1_levels(V, n, L)
    e1_flat = _scaled_flat_e1(e1, n, 0.0)
    scaled = _scaled_flat_e1(e1, n, -1.0)
    mean = V.mean(axis=1)
    resid_sorted = np.sort(np.abs(V - mean[:, None]), axis=1)[:, ::-1]
    rights = (np.arange(V.shape[1]) + 1) * cell_meas

    p_list = (1.5, 2.0, 4.0)
    viol_garo = 0
    viol_sjn = 0
    weak_over_garo: dict[str, float] = {}
    rows = []
    nums = e1_flat @ member.T
    for p in p_list:
        dens = fam_meas ** (1.0 - 1.0 / p)
        garo = (nums / dens).max(axis=1)
        weights = [
            (2.0 ** (-n * lvl)) ** (1.0 - p) * e ** p
            for lvl, e in enumerate(e1)
        ]
        jn = _packing_dp_rows(weights, n, p)
        sp = scaled ** p
        sjn = np.empty(T)
        for t0, t1 in _chunks(T, sparse.core_meas.shape[0]):
            sjn[t0:t1] = ((sp[t0:t1] @ sparse.core_meas.T)
                          ** (1.0 / p)).max(axis=1)
        viol_garo += int((garo > jn + 1e-12).sum())
        viol_sjn += int((jn > sjn + 1e-12).sum())
        weak = (resid_sorted * rights ** (1.0 / p)).max(axis=1)
        weak_over_garo[f"p={p:g}"] = float((weak / garo).max())
        for t in range(min(T, 3)):
            if len(rows) < _MAX_ROWS:
                rows.append({"trial": t, "p": p, "garo": float(garo[t]),
                             "jn": float(jn[t]), "sjn": float(sjn[t]),
                             "weak": float(weak[t])})
    spot = 0.0
    for t in range(min(T, 3)):
        f = GridFunction(n, L, V[t])
        g = garo_norm(f, 2.0)
        r = ri_functionals(GridFunction(n, L, V[t] - mean[t]), 2.0)
        dens2 = fam_meas ** 0.5
        spot = max(spot, abs(g.value - float((nums[t] / dens2).max())))
        weak2 = float((resid_sorted[t] * rights ** 0.5).max())
        spot = max(spot, abs(r.weak_lp - weak2))
    asserts = (
        _assertion("garo-below-jn", viol_garo == 0,
                   f"{viol_garo} violations over {T} grids x p in {p_list}"),
        _assertion("jn-below-sjn", viol_sjn == 0,
                   f"{viol_sjn} violations over {T} grids x p in {p_list}"),
        _assertion("batched-matches-library", spot <= 1e-12,
                   f"spot-check gap {spot:.3e}"),
    )
    aggregates = {
        "p_list": list(p_list),
        "packings": int(pack.core_meas.shape[0]),
        "weak_over_garo_max": weak_over_garo,
    }
    return SuiteReport(cfg, aggregates, asserts, tuple(rows))


_SUITES = {
    "riesz": _suite_riesz,
    "sparse-jn": _suite_sparse_jn,
    "sv-equivalence": _suite_sv_equivalence,
    "fractional-sv": _suite_fractional_sv,
    "jn-extrapolation": _suite_jn_extrapolation,
    "sobolev-chain": _suite_sobolev_chain,
    "embedding-chain": _suite_embedding_chain,
}


def run_suite(config: SuiteConfig) -> SuiteReport:
    if config.generator != "uniform-iid" and config.suite != "jn-extrapolation":
        raise ValueError("suites draw their grids from uniform-iid; use "
                         "`oscnorm compute` for other generators")
    return _SUITES[config.suite](config)
