"""Acceptance criteria as plain functions.

Each ``criterion_N`` returns a :class:`CriterionResult`; ``run_all`` drives
them for the ``selftest`` command and the test-suite gate.  Details hold
only deterministic quantities so reports are byte-stable across runs.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

TWO_PI = 2 * math.pi
ORDER_MIN = 1.8


@dataclass
class CriterionResult:
    number: int
    title: str
    passed: bool
    details: dict = field(default_factory=dict)
    elapsed: float = 0.0

    def line(self) -> str:
        return f"[{'PASS' if self.passed else 'FAIL'}] {self.number:2d} {self.title} ({self.elapsed:.2f} s)"


def _order(coarse, fine, ratio=2.0):
    return math.log(coarse / fine) / math.log(ratio)


# ---------------------------------------------------------------- 1. KdV

def criterion_1() -> CriterionResult:
    from fractions import Fraction

    from . import diffpoly as dp
    from .diffpoly import DiffPoly
    dp._hierarchy.cache_clear()
    t0 = time.perf_counter()
    u = DiffPoly.derivative(0)
    seeds = (dp.hierarchy(0) == DiffPoly.constant(Fraction(1, 2)) and dp.hierarchy(1) == u
             and dp.hierarchy(2) == DiffPoly.derivative(2) + 3 * u * u)
    kdv = dp.flow(1) == -DiffPoly.derivative(3) - 6 * u * DiffPoly.derivative(1)
    recurrence = all((dp.dz(dp.hierarchy(n + 1)) - dp.lenard(dp.hierarchy(n))).is_zero() for n in range(6))
    weights = all(dp.hierarchy(n).weights() == {2 * n} for n in range(7))
    elapsed = time.perf_counter() - t0
    ok = seeds and kdv and recurrence and weights and elapsed < 1.0
    return CriterionResult(1, "KdV hierarchy identities", ok, {
        "P2": str(dp.hierarchy(2)), "flow1": str(dp.flow(1)), "P3": str(dp.hierarchy(3)),
        "seeds_exact": seeds, "flow1_exact": kdv, "recurrence_n_le_5": recurrence,
        "weight_homogeneous_n_le_6": weights, "under_1s": elapsed < 1.0}, elapsed)


# -------------------------------------------------------------- 2. Miura

def criterion_2() -> CriterionResult:
    from . import diffpoly as dp
    from . import kdvlab as kl
    from . import shiffman as sh
    from . import symexpr as se
    t0 = time.perf_counter()
    miura_err = 0.0
    mkdv_err = 0.0
    for seed in range(5):
        g = kl.random_rational_g(seed)
        x = kl.log_derivative(g)
        zs = kl.safe_points([g, x], 100, seed)
        a = se.evaluate(kl.miura_from_g(g), zs)
        b = se.evaluate(kl.miura_from_x(x), zs)
        miura_err = max(miura_err, float(np.max(np.abs(a - b) / np.maximum(1, np.abs(a)))))
        c = se.evaluate(kl.xdot_from_g(g, sh.gdot_expr(g)), zs)
        d = se.evaluate(kl.mkdv_from_g(g), zs)
        mkdv_err = max(mkdv_err, float(np.max(np.abs(c - d) / np.maximum(1, np.abs(d)))))
    report = kl.chain_rule_check()
    dropped = kl.chain_rule_check(dp.DiffPoly({(3,): 1}, "x"))
    doubled = kl.chain_rule_check(kl.mkdv_poly() * 2)
    elapsed = time.perf_counter() - t0
    ok = (miura_err < 1e-10 and mkdv_err < 1e-9 and report.passed and not dropped.passed
          and not doubled.passed and elapsed < 1.0)
    return CriterionResult(2, "Miura chain from the Gauss map to KdV", ok, {
        "miura_max_rel_error": miura_err, "mkdv_max_rel_error": mkdv_err,
        "chain_rule_residual": str(report.residual), "kdv_time_scale": report.time_scale,
        "mutation_drop_cubic_residual": str(dropped.residual),
        "mutation_double_residual": str(doubled.residual), "under_1s": elapsed < 1.0}, elapsed)


# ------------------------------------------------------------ 3. Shiffman

def criterion_3() -> CriterionResult:
    from . import catalog
    from . import shiffman as sh
    t0 = time.perf_counter()
    cat = sh.shiffman_geometric(catalog.mesh("catenoid", 512)).max_abs()
    hel = sh.shiffman_geometric(catalog.mesh("helicoid", 512, form="height")).max_abs()
    riem = {n: sh.shiffman_geometric(catalog.riemann_example(1.0, (n, n))).max_abs() for n in (1024, 2048)}
    order = _order(riem[1024], riem[2048])
    elapsed = time.perf_counter() - t0
    ok = cat < 1e-6 and hel < 1e-6 and riem[2048] < 1e-4 and order >= ORDER_MIN and elapsed < 60
    return CriterionResult(3, "Shiffman field vanishes on catenoid, helicoid, Riemann", ok, {
        "catenoid_512": cat, "helicoid_512": hel, "riemann_1024": riem[1024], "riemann_2048": riem[2048],
        "riemann_order": order, "under_60s": elapsed < 60}, elapsed)


# -------------------------------------------------------------- 4. Jacobi

def criterion_4() -> CriterionResult:
    from . import catalog
    from . import diagnostics as dg
    from . import shiffman as sh
    from .weierstrass import immerse
    t0 = time.perf_counter()
    cal = sh.calibrate()
    conv = {"part": cal["part"], "sign": cal["sign"]}
    wd = sh.generic_patch()
    shif, norm, const = {}, {}, {}
    for n in (128, 256):
        m = immerse(wd, (0.0, 1.0, 0.0, 1.0), n)
        shif[n] = dg.jacobi_residual(m, sh.shiffman_part(wd, m.z, conv))
        c = catalog.mesh("catenoid", n)
        norm[n] = dg.jacobi_residual(c, c.normal[..., 2])
        const[n] = dg.jacobi_residual(c, np.ones(c.shape))
    o_s, o_n = _order(shif[128], shif[256]), _order(norm[128], norm[256])
    o_c = _order(const[128], const[256])
    ok = o_s >= ORDER_MIN and o_n >= ORDER_MIN and const[256] > 0.5 and abs(o_c) < 0.2
    return CriterionResult(4, "Jacobi property of the calibrated Shiffman part", ok, {
        "convention": cal["part"], "sign": cal["sign"], "calibration_correlation": cal["correlation"],
        "shiffman_128": shif[128], "shiffman_256": shif[256], "shiffman_order": o_s,
        "normal_e3_128": norm[128], "normal_e3_256": norm[256], "normal_e3_order": o_n,
        "constant_128": const[128], "constant_256": const[256], "constant_order": o_c},
        time.perf_counter() - t0)


# ---------------------------------------------------------------- 5. flux

def criterion_5() -> CriterionResult:
    from . import catalog
    from . import diagnostics as dg
    t0 = time.perf_counter()
    cat = dg.flux_series(catalog.mesh("catenoid", (129, 128)))
    cat_err = float(np.max(np.abs(cat - [0, 0, TWO_PI])))
    cat_spread = float(np.max(np.ptp(cat, axis=0)))
    riem = {}
    ok = cat_err < 1e-6 and cat_spread < 1e-8
    for t in (0.5, 1.0, 2.0):
        F = dg.flux_series(catalog.riemann_example(t, (256, 256)))
        err = float(np.max(np.abs(F - [t, 0, TWO_PI])))
        spread = float(np.max(np.ptp(F, axis=0)))
        riem[f"t={t:g}"] = {"flux": F.mean(axis=0), "max_error": err, "height_spread": spread}
        ok = ok and err < 1e-4 and spread < 1e-6
    return CriterionResult(5, "Flux of catenoid and Riemann examples", ok, {
        "catenoid_max_error": cat_err, "catenoid_height_spread": cat_spread, "riemann": riem},
        time.perf_counter() - t0)


# ---------------------------------------------------------- 6. Riemann H

def criterion_6() -> CriterionResult:
    from . import catalog
    from .mesh import mean_curvature_fd
    t0 = time.perf_counter()
    H = {n: float(np.nanmax(np.abs(mean_curvature_fd(catalog.riemann_example(1.0, (n, n))))))
         for n in (256, 512, 1024)}
    order = _order(H[512], H[1024])
    ok = H[1024] < 1e-5
    return CriterionResult(6, "Riemann example mean-curvature oracle", ok, {
        "H_256": H[256], "H_512": H[512], "H_1024": H[1024], "order": order},
        time.perf_counter() - t0)


# --------------------------------------------------------------- 7. decay

CATENOID_DECAY_RADII = (40.0, 60.0, 80.0, 100.0, 120.0, 160.0)
HELICOID_DECAY_RADII = (2.0, 4.0, 6.0, 8.0, 10.0, 12.0, 14.0, 16.0)


def criterion_7() -> CriterionResult:
    from . import catalog
    from . import diagnostics as dg
    t0 = time.perf_counter()
    cat = dg.decay_statistic(catalog.mesh("catenoid", (2401, 16), window=(-6.0, 6.0, 0.0, TWO_PI)),
                             CATENOID_DECAY_RADII)
    hel = dg.decay_statistic(catalog.mesh("helicoid", (65, 801), window=(-2.0, 2.0, -20.0, 20.0)),
                             HELICOID_DECAY_RADII)
    flat = dg.is_flat(cat.KR4)
    growing = bool(np.all(np.diff(hel.KR2[-5:]) > 0))
    ok = (cat.verdict == "finite total curvature" and flat
          and hel.verdict == "infinite total curvature" and growing)
    return CriterionResult(7, "Curvature decay classifier", ok, {
        "catenoid": {"R": cat.radii, "KR2": cat.KR2, "KR4": cat.KR4, "verdict": cat.verdict,
                     "KR4_flat_5pct": flat},
        "helicoid": {"R": hel.radii, "KR2": hel.KR2, "KR4": hel.KR4, "verdict": hel.verdict,
                     "KR2_increasing_last5": growing}}, time.perf_counter() - t0)


# -------------------------------------------------------------- 8. degree

def criterion_8() -> CriterionResult:
    from . import catalog
    from . import diagnostics as dg
    from .errors import AmbiguousDegreeError
    t0 = time.perf_counter()
    cases = {
        # name: (mesh, genus, end multiplicities)
        "catenoid": (lambda: catalog.mesh("catenoid", (401, 128), window=(-4.0, 4.0, 0.0, TWO_PI)), 0, (1, 1)),
        "plane": (lambda: catalog.mesh("plane", 65), 0, (1,)),
        "enneper": (lambda: catalog.mesh("enneper", 401, window=(-5.0, 5.0, -5.0, 5.0)), 0, (3,)),
    }
    ok = True
    out = {}
    for name, (make, genus, ends) in cases.items():
        try:
            deg, info = dg.gauss_degree(make(), details=True)
            agree = True
        except AmbiguousDegreeError as exc:
            deg, info, agree = None, {"error": str(exc)}, False
        expected = dg.jorge_meeks_degree(genus, ends)
        out[name] = {"degree": deg, "curvature_integral": info.get("integral"),
                     "preimage_counts": info.get("counts"), "methods_agree": agree,
                     "g_plus_r_minus_1": genus + len(ends) - 1, "expected": expected}
        ok = ok and agree and deg == expected
    return CriterionResult(8, "Gauss-map degree", ok, out, time.perf_counter() - t0)


# ----------------------------------------------------------------- 9. MSE

def criterion_9() -> CriterionResult:
    from . import mse
    t0 = time.perf_counter()
    p = mse.scherk_problem(65)
    sol = mse.solve_mse(p)
    X, Y = p.grid()
    err = float(np.max(np.abs(sol.u - mse.scherk_graph(X, Y))))
    rates = mse.quadratic_rate(sol.trace)
    quad = mse.is_quadratic(sol.trace)
    pa = mse.GridProblem((-1.0, 2.0, 0.0, 1.5), (17, 13), lambda x, y: 0.7 * x - 1.3 * y + 0.4)
    Xa, Ya = pa.grid()
    aff = float(np.max(np.abs(mse.solve_mse(pa).u - (0.7 * Xa - 1.3 * Ya + 0.4))))
    elapsed = time.perf_counter() - t0
    ok = err < 1e-4 and quad and aff < 1e-12 and elapsed < 10
    return CriterionResult(9, "Minimal surface equation solver", ok, {
        "scherk_max_error": err, "residual_trace": sol.trace, "quadratic_ratios": rates,
        "quadratic": quad, "affine_max_error": aff, "under_10s": elapsed < 10}, elapsed)


# --------------------------------------------------------- 10. area growth

PLANE_AREA_RADII = (0.25, 0.5, 1.0, 1.5, 1.9)
CATENOID_AREA_RADII = (2.0, 4.0, 8.0, 16.0, 32.0, 64.0, 100.0, 150.0, 190.0)


def criterion_10() -> CriterionResult:
    from . import catalog
    from . import diagnostics as dg
    t0 = time.perf_counter()
    plane = dg.area_growth(catalog.mesh("plane", 33, window=(-2.0, 2.0, -2.0, 2.0)), radii=PLANE_AREA_RADII)
    cat = dg.area_growth(catalog.mesh("catenoid", (1201, 128), window=(-6.0, 6.0, 0.0, TWO_PI)),
                         radii=CATENOID_AREA_RADII)
    plane_err = float(np.max(np.abs(plane - math.pi)))
    monotone = bool(np.all(np.diff(cat) >= -1e-8))
    rel = float(abs(cat[-1] / TWO_PI - 1))
    ok = plane_err < 1e-8 and monotone and rel < 0.02
    return CriterionResult(10, "Area growth and monotonicity", ok, {
        "plane_ratio": plane, "plane_max_error": plane_err, "catenoid_R": CATENOID_AREA_RADII,
        "catenoid_ratio": cat, "catenoid_monotone": monotone, "catenoid_rel_error_2pi": rel},
        time.perf_counter() - t0)


# -------------------------------------------------------------- 11. limits

LIMIT_N = (8, 12, 16, 24, 32, 48, 64)


def criterion_11() -> CriterionResult:
    from . import limits as lm
    t0 = time.perf_counter()
    cb = lm.blowup_set("catenoid")
    hb = lm.blowup_set("helicoid")
    cat_ok = len(cb.points) > 0 and float(np.max(np.linalg.norm(cb.points, axis=1))) <= lm.CELL
    axis = np.hypot(hb.points[:, 0], hb.points[:, 1]) if len(hb.points) else np.array([np.inf])
    zs = np.unique(np.round(hb.points[:, 2] / lm.CELL)) * lm.CELL if len(hb.points) else np.array([0.0])
    span = bool(zs.min() <= -1 + lm.CELL and zs.max() >= 1 - lm.CELL and np.max(np.diff(zs)) <= 2 * lm.CELL + 1e-9)
    hel_ok = bool(np.max(axis) <= lm.CELL) and span
    dc = lm.distance_series("catenoid", LIMIT_N, lm.Region(r_min=0.5, r_max=1.0))
    dh = lm.distance_series("helicoid", LIMIT_N, lm.Region(center=(0.6, 0.0, 0.0), r_max=0.3))
    mono = bool(np.all(np.diff(dc) < 0) and np.all(np.diff(dh) < 0))
    ok = cat_ok and hel_ok and mono
    return CriterionResult(11, "Blow-up sets and limit laminations", ok, {
        "catenoid_blowup_points": len(cb.points),
        "catenoid_blowup_max_radius": float(np.max(np.linalg.norm(cb.points, axis=1))) if len(cb.points) else None,
        "helicoid_blowup_points": len(hb.points), "helicoid_max_axis_distance": float(np.max(axis)),
        "helicoid_z_range": [float(zs.min()), float(zs.max())], "helicoid_axis_covered": span,
        "n": LIMIT_N, "catenoid_distance": dc, "helicoid_distance": dh, "monotone": mono},
        time.perf_counter() - t0)


CRITERIA = (criterion_1, criterion_2, criterion_3, criterion_4, criterion_5, criterion_6,
            criterion_7, criterion_8, criterion_9, criterion_10, criterion_11)


def run_all(echo=None) -> list:
    """Run criteria 1-11 (12 is the determinism check on this output)."""
    results = []
    for crit in CRITERIA:
        t0 = time.perf_counter()
        res = crit()
        res.elapsed = max(res.elapsed, 0.0) or time.perf_counter() - t0
        results.append(res)
        if echo:
            echo(res.line())
    return results


def to_report(results):
    from .report import Report
    return Report([("selftest", [dict([("criterion", r.number), ("title", r.title), ("passed", r.passed),
                                       ("details", r.details)]) for r in results]),
                   ("all_passed", all(r.passed for r in results))])
