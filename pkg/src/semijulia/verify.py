"""Executable verification: structural theorems as raster-scale pass/fail.

Default thresholds are 2 px for containment-style checks and 3 px for
cross-algorithm Hausdorff agreement, the measured slack of the raster
pipeline. Failures carry witnesses for debuggability. Reports serialize to
JSON deterministically given (config, seeds); wall-clock timings are kept
on the in-memory objects only so the bytes stay reproducible.
"""
from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy import ndimage

from .constructions import replay
from .errors import ConfigError, DynamicsError, RasterError
from .grid import GridSpec, RasterSet, annulus_raster
from .rasterdyn import (default_survivor_seed, directed_max_distance_px,
                        distance_px, generator_julia_rasters, hausdorff_px,
                        julia_chaos, julia_survivor, julia_word_union,
                        fiberwise_filled, preimage_raster, word_filled_raster)
from .semigroup import (Bounded, Escapes, GeneratorSet, postcritical_bounded_check,
                        smallest_filled_julia)
from .topology import (FatouClass, Relation, classify_fatou_components,
                       containment_report, find_jmin_jmax, jordan_test,
                       label_components, order_components, surrounding_compare)

DEFAULTS = {
    "depth": 12,
    "escape_iters": 200,
    "survivor_iters": 40,
    "chaos_samples": 1_000_000,
    "chaos_chains": 256,
    "word_len": 6,
    "seed": 1,
    "containment_px": 2.0,
    "hausdorff_px": 3.0,
    "min_dist_px": 2.0,
}


@dataclass
class Check:
    name: str
    verdict: str  # pass | fail | skip
    metric: Optional[float] = None
    threshold: Optional[float] = None
    elapsed: float = 0.0
    details: dict = field(default_factory=dict)

    def to_json(self):
        return {"name": self.name, "verdict": self.verdict,
                "metric": self.metric, "threshold": self.threshold,
                "details": self.details}


@dataclass
class Report:
    suite: str
    checks: list = field(default_factory=list)
    defaults: dict = field(default_factory=dict)

    @property
    def overall(self) -> bool:
        return all(c.verdict != "fail" for c in self.checks)

    def extend(self, other: "Report", prefix: str = ""):
        for c in other.checks:
            c = Check(prefix + c.name, c.verdict, c.metric, c.threshold,
                      c.elapsed, c.details)
            self.checks.append(c)

    def to_json(self):
        return {"suite": self.suite, "defaults": self.defaults,
                "checks": [c.to_json() for c in self.checks],
                "overall": "pass" if self.overall else "fail"}

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2)

    def summary(self) -> str:
        lines = [f"suite {self.suite}: {'pass' if self.overall else 'FAIL'}"]
        for c in self.checks:
            metric = "" if c.metric is None else f" metric={c.metric:.4g}"
            thr = "" if c.threshold is None else f" thr={c.threshold:g}"
            lines.append(f"  [{c.verdict.upper():4s}] {c.name}{metric}{thr}"
                         f" ({c.elapsed:.2f}s)")
        return "\n".join(lines)


def _timed(report: Report, name: str, fn):
    t0 = time.perf_counter()
    try:
        verdict, metric, threshold, details = fn()
    except DynamicsError as exc:
        report.checks.append(Check(name, "fail", None, None,
                                   time.perf_counter() - t0, {"error": str(exc)}))
        return
    report.checks.append(Check(name, verdict, metric, threshold,
                               time.perf_counter() - t0, details))


# ---------------------------------------------------------------------------
# individual checks
# ---------------------------------------------------------------------------

def check_invariance(gens: GeneratorSet, julia: RasterSet,
                     tol_px: float = 2.0) -> Report:
    """Backward invariance and self-similarity of a Julia raster."""
    report = Report("invariance")
    if julia.is_empty():
        raise RasterError("cannot check invariance of an empty raster")
    union = np.zeros(julia.grid.shape, dtype=bool)
    dist_to_julia = distance_px(julia)
    for gi, gen in enumerate(gens.generators):
        pre = preimage_raster(gen, julia, julia.grid)
        union |= pre.bits

        def one(pre=pre, gen=gen):
            if pre.is_empty():
                return "fail", None, tol_px, {"error": f"empty preimage of {gen.name}"}
            worst = float(dist_to_julia[pre.bits].max())
            where = None
            if worst > tol_px:
                flat = np.where(pre.bits, dist_to_julia, -1.0)
                where = [int(v) for v in np.unravel_index(np.argmax(flat), flat.shape)]
            return ("pass" if worst <= tol_px else "fail"), worst, tol_px, \
                {"witness_pixel": where} if where else {}
        _timed(report, f"preimage of {gen.name} inside the raster", one)

    def self_sim():
        h = hausdorff_px(julia, RasterSet(julia.grid, union))
        return ("pass" if h <= tol_px else "fail"), h, tol_px, {}
    _timed(report, "backward self-similarity (Hausdorff)", self_sim)
    return report


def check_structure(gens: GeneratorSet, julia: RasterSet, khat: RasterSet,
                    expected_components: Optional[int] = None,
                    tol_px: float = 2.0) -> Report:
    """Total order, Fatou connectivity classes, jmin/jmax identifications."""
    report = Report("structure")
    labels = label_components(julia)
    report.checks.append(Check("component count", "pass", float(labels.count),
                               None, 0.0, {}))
    if expected_components is not None:
        ok = labels.count == expected_components
        report.checks.append(Check("expected component count",
                                   "pass" if ok else "fail",
                                   float(labels.count),
                                   float(expected_components), 0.0, {}))
    ys, xs = np.nonzero(khat.bits)
    mesh = khat.grid.mesh()
    anchor = complex(mesh[ys, xs].mean()) if len(ys) else 0j

    state = {}

    def order():
        res = order_components(labels, anchor)
        state["order"] = res
        det = {} if res.total else {"violating_pair": list(res.violation)}
        return ("pass" if res.total else "fail"), float(labels.count), None, det
    _timed(report, "surrounding order is total", order)

    def classes():
        infos = classify_fatou_components(julia)
        bad = [f.id for f in infos if f.klass is FatouClass.OTHER]
        det = {"fatou_components": len(infos)}
        if bad:
            det["other_class_ids"] = bad
        return ("pass" if not bad else "fail"), float(len(bad)), 0.0, det
    _timed(report, "Fatou components simply or doubly connected", classes)

    def extremes():
        jmin, jmax = find_jmin_jmax(labels, khat, anchor)
        state["jmin"], state["jmax"] = jmin, jmax
        bd = khat.boundary()
        worst = directed_max_distance_px(bd, labels.component(jmin))
        det = {"jmin": jmin, "jmax": jmax}
        return ("pass" if worst <= tol_px else "fail"), worst, tol_px, det
    _timed(report, "jmin contains the K-hat boundary", extremes)

    def containment():
        if "jmin" not in state:
            return "skip", None, None, {"reason": "jmin identification failed"}
        gen_julia = generator_julia_rasters(gens, julia.grid)
        rep = containment_report(labels, gen_julia, slack_px=int(tol_px))
        ok = rep.mprime_in == state["jmin"] and rep.mdouble_in == state["jmax"]
        det = {"mprime_in": rep.mprime_in, "mdouble_in": rep.mdouble_in,
               "star_lambda": {str(k): v for k, v in rep.star_lambda.items() if v}}
        return ("pass" if ok else "fail"), None, None, det
    _timed(report, "jmin and jmax contain the extreme small Julia sets", containment)
    return report


def check_hyperbolic(gens: GeneratorSet, julia: RasterSet, depth: int = 12,
                     min_dist_px: float = 2.0) -> Report:
    """Empirical hyperbolicity: postcritical samples keep clear of the raster."""
    report = Report("hyperbolic")

    def run():
        verdict = postcritical_bounded_check(gens, depth)
        if isinstance(verdict, Escapes):
            word, origin = verdict.sample.escaped_witness
            return "skip", None, None, {
                "reason": "postcritical orbit escapes; semigroup not in the "
                          "postcritically bounded class at this depth",
                "witness_word": list(word),
                "witness_origin": [origin.real, origin.imag]}
        pts = np.array(verdict.sample.points)
        row, col, valid = julia.grid.to_index(pts)
        if not valid.any():
            return "fail", None, min_dist_px, {"error": "no postcritical sample in window"}
        dist = distance_px(julia)
        d = dist[row[valid], col[valid]]
        i = int(np.argmin(d))
        worst = float(d[i])
        pt = pts[valid][i]
        det = {"nearest_point": [pt.real, pt.imag],
               "samples": int(valid.sum()), "depth": depth}
        return ("pass" if worst >= min_dist_px else "fail"), worst, min_dist_px, det
    _timed(report, "postcritical set clear of the Julia raster", run)
    return report


def check_fiberwise_cantor(gens: GeneratorSet, prefix_depth: int,
                           grid: GridSpec, anchor: complex = 0j) -> Report:
    """Disjointness, Jordan property, and total order of fiberwise boundaries."""
    report = Report("fiberwise")
    if len(gens.generators) != 2:
        report.checks.append(Check("two-generator precondition", "skip", None, None,
                                   0.0, {"reason": "needs exactly two generators"}))
        return report
    gen_julia = generator_julia_rasters(gens, grid)
    rel = surrounding_compare(gen_julia[0], gen_julia[1]).relation
    if rel not in (Relation.LESS, Relation.GREATER):
        report.checks.append(Check("nested generator Julia sets precondition",
                                   "skip", None, None, 0.0,
                                   {"reason": f"generator Julia sets are {rel.value}"}))
        return report
    n = prefix_depth
    prefixes = [tuple((i >> s) & 1 for s in range(n)) for i in range(2 ** n)]
    curves = [fiberwise_filled(gens, p, grid).boundary() for p in prefixes]

    def disjoint():
        worst = None
        for i in range(len(curves)):
            fat = curves[i].dilate(1).bits
            for jj in range(i + 1, len(curves)):
                if (fat & curves[jj].bits).any():
                    worst = (prefixes[i], prefixes[jj])
                    return "fail", None, None, {"overlapping": [list(worst[0]),
                                                                list(worst[1])]}
        return "pass", float(len(curves)), None, {}
    _timed(report, f"{2 ** n} fiberwise boundaries pairwise disjoint", disjoint)

    def jordan():
        bad = [list(p) for p, c in zip(prefixes, curves) if not jordan_test(c)]
        return ("pass" if not bad else "fail"), float(len(bad)), 0.0, \
            ({"failing_prefixes": bad} if bad else {})
    _timed(report, "every fiberwise boundary is a Jordan curve", jordan)

    def ordered():
        union = curves[0]
        for c in curves[1:]:
            union = union.union(c)
        labels = label_components(union)
        if labels.count != len(curves):
            return "fail", float(labels.count), float(len(curves)), \
                {"error": "curves merge at raster scale"}
        res = order_components(labels, anchor)
        det = {} if res.total else {"violating_pair": list(res.violation)}
        return ("pass" if res.total else "fail"), float(labels.count), None, det
    _timed(report, "fiberwise boundaries totally ordered", ordered)
    return report


def check_triangulation(rasters: dict, tol_px: float = 3.0) -> Report:
    """Pairwise Hausdorff agreement of independently computed Julia rasters."""
    report = Report("triangulation")
    names = sorted(rasters)
    for i, a in enumerate(names):
        for b in names[i + 1:]:
            def pair(a=a, b=b):
                h = hausdorff_px(rasters[a], rasters[b])
                return ("pass" if h <= tol_px else "fail"), h, tol_px, {}
            _timed(report, f"{a} vs {b} Hausdorff", pair)
    return report


# ---------------------------------------------------------------------------
# suite runner
# ---------------------------------------------------------------------------

def _cfg(config: dict, key: str, default=None, required: bool = False):
    cur = config
    for part in key.split("."):
        if not isinstance(cur, dict) or part not in cur:
            if required:
                raise ConfigError(f"missing configuration key", key)
            return default
        cur = cur[part]
    return cur


def _grid_from_config(config: dict) -> GridSpec:
    g = _cfg(config, "grid", required=True)
    try:
        if "half_extent" in g:
            return GridSpec.square(float(g["half_extent"]), int(g["width"]))
        return GridSpec.from_window(float(g["xmin"]), float(g["ymin"]),
                                    float(g["xmax"]), float(g["ymax"]),
                                    int(g["width"]))
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"bad grid specification: {exc}", "grid")


KNOWN_CHECKS = ("invariance", "structure", "hyperbolic", "not_hyperbolic",
                "sub_hyperbolic", "fiberwise", "triangulation")


def run_suite(config: dict, artifacts_dir=None) -> Report:
    """Execute a suite configuration and aggregate one report.

    Config keys: name, construction {kind, params}, grid, algorithms,
    checks[], thresholds{}, expected_components, seed_region, sub_indices.
    """
    name = _cfg(config, "name", "unnamed")
    checks = _cfg(config, "checks", required=True)
    for c in checks:
        if c not in KNOWN_CHECKS:
            raise ConfigError(f"unknown check {c!r}", "checks")
    kind = _cfg(config, "construction.kind", required=True)
    params = _cfg(config, "construction.params", {})
    try:
        built = replay({"kind": kind, "params": params})
    except TypeError as exc:
        raise ConfigError(f"bad construction parameters: {exc}", "construction.params")
    gens = built.gens
    grid = _grid_from_config(config)

    thr = dict(DEFAULTS)
    thr.update(_cfg(config, "thresholds", {}))
    alg = {k: thr[k] for k in ("survivor_iters", "chaos_samples", "chaos_chains",
                               "word_len", "seed", "escape_iters")}
    alg.update(_cfg(config, "algorithms", {}))

    report = Report(name, defaults={**thr, **alg, "construction": kind,
                                    "params": params})

    khat = None
    if grid.covers_disk(gens.escape_radius):
        khat = smallest_filled_julia(gens, grid, iters=256)

    seed_cfg = _cfg(config, "seed_region")
    seed = None
    if seed_cfg:
        if seed_cfg.get("type") == "annulus":
            seed = annulus_raster(grid, float(seed_cfg["rmin"]), float(seed_cfg["rmax"]))
        else:
            raise ConfigError(f"unknown seed_region type", "seed_region.type")
    elif khat is not None:
        seed = default_survivor_seed(gens, grid, khat)
    else:
        raise ConfigError(
            "grid does not cover the escape disk; supply an explicit seed_region",
            "grid")

    source = _cfg(config, "algorithms.julia_source", "survivor")
    rasters = {}
    need_tri = "triangulation" in checks
    if need_tri or source == "survivor":
        rasters["survivor"] = julia_survivor(gens, grid, seed,
                                             int(alg["survivor_iters"]))
    if need_tri or source == "chaos":
        rasters["chaos"] = julia_chaos(gens, None, int(alg["chaos_samples"]), grid,
                                       int(alg["seed"]), int(alg["chaos_chains"]))
    if need_tri or source == "word_union":
        rasters["word_union"] = julia_word_union(gens, int(alg["word_len"]), grid,
                                                 int(alg["escape_iters"]))
    julia = rasters[source]

    for check in checks:
        if check == "invariance":
            report.extend(check_invariance(gens, julia, thr["containment_px"]),
                          "invariance: ")
        elif check == "structure":
            if khat is None:
                report.checks.append(Check("structure", "skip", None, None, 0.0,
                                           {"reason": "no K-hat on this grid"}))
            else:
                report.extend(check_structure(
                    gens, julia, khat, _cfg(config, "expected_components"),
                    thr["containment_px"]), "structure: ")
        elif check == "hyperbolic":
            report.extend(check_hyperbolic(gens, julia, int(thr["depth"]),
                                           thr["min_dist_px"]), "hyperbolic: ")
        elif check == "not_hyperbolic":
            sub = check_hyperbolic(gens, julia, int(thr["depth"]), thr["min_dist_px"])
            inner = sub.checks[0]
            witnessed = inner.verdict == "fail" and inner.metric is not None \
                and inner.metric <= 1.0
            report.checks.append(Check(
                "not hyperbolic: postcritical point on the Julia raster",
                "pass" if witnessed else "fail", inner.metric, 1.0,
                inner.elapsed, inner.details))
        elif check == "sub_hyperbolic":
            idx = _cfg(config, "sub_indices", required=True)
            sub_gens = GeneratorSet([gens.generators[i] for i in idx])
            sub_julia = julia_word_union(sub_gens, 1, grid, int(alg["escape_iters"]))
            report.extend(check_hyperbolic(sub_gens, sub_julia, int(thr["depth"]),
                                           thr["min_dist_px"]),
                          "sub-semigroup hyperbolic: ")
        elif check == "fiberwise":
            depth = int(_cfg(config, "fiberwise_depth", 4))
            report.extend(check_fiberwise_cantor(gens, depth, grid), "fiberwise: ")
        elif check == "triangulation":
            report.extend(check_triangulation(rasters, thr["hausdorff_px"]),
                          "triangulation: ")

    if artifacts_dir is not None:
        import os
        os.makedirs(artifacts_dir, exist_ok=True)
        for rname, raster in rasters.items():
            raster.write_pgm(os.path.join(artifacts_dir, f"{name}_{rname}.pgm"))
        if khat is not None:
            khat.write_pgm(os.path.join(artifacts_dir, f"{name}_khat.pgm"))
        with open(os.path.join(artifacts_dir, f"{name}_report.json"), "w") as fh:
            fh.write(report.dumps() + "\n")
    return report


def load_suite(path) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"suite config is not valid JSON: {exc}", str(path))
    except OSError as exc:
        raise ConfigError(f"cannot read suite config: {exc}", str(path))
