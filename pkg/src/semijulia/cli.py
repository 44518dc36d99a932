"""Command-line interface: construct, render, analyze, verify.

Every run consumes and produces serialized artifacts only (generator JSON,
PGM rasters with an embedded grid comment, report JSON), so pipelines can
be replayed stage by stage. Exit codes: 0 success (suite passed), 1 suite
failed, 2 usage or input error.
"""
from __future__ import annotations

import argparse
import json
import sys

from .constructions import BUILDERS
from .errors import DynamicsError
from .grid import GridSpec, RasterSet, annulus_raster
from .rasterdyn import (fiberwise_filled, generator_julia_rasters, julia_chaos,
                        julia_survivor, julia_word_union)
from .semigroup import GeneratorSet, smallest_filled_julia
from .topology import (classify_fatou_components, containment_report,
                       find_jmin_jmax, label_components, order_components)
from .verify import DEFAULTS, load_suite, run_suite


def _parse_grid(text: str) -> GridSpec:
    parts = text.split(":")
    if len(parts) != 5:
        raise DynamicsError(
            f"--grid expects xmin:ymin:xmax:ymax:width, got {text!r}")
    xmin, ymin, xmax, ymax = (float(p) for p in parts[:4])
    return GridSpec.from_window(xmin, ymin, xmax, ymax, int(parts[4]))


def _load_gens(path: str) -> GeneratorSet:
    with open(path) as fh:
        return GeneratorSet.from_json(json.load(fh))


def _add_construct(sub):
    p = sub.add_parser("construct", help="build a named semigroup")
    p.add_argument("kind", choices=sorted(set(BUILDERS) | {"k-components", "hmin-not"}))
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--a", type=complex, default=1.0)
    p.add_argument("--b", type=complex, default=0.25)
    p.add_argument("--k", type=int, default=2)
    p.add_argument("--j", type=int, default=2)
    p.add_argument("--m1", type=int, default=2)
    p.add_argument("--m2", type=int, default=None)
    p.add_argument("--m3", type=int, default=None)
    p.add_argument("--m4", type=int, default=None)
    p.add_argument("--c", type=float, default=0.1)
    p.add_argument("--count", type=int, default=2,
                   help="component count for k-components")


def _run_construct(args) -> int:
    kind = args.kind.replace("-", "_")
    if kind == "cantor":
        res = BUILDERS["cantor"](args.a, args.b, args.k, args.j, args.m1,
                                 args.m2 if args.m2 is not None else 2)
    elif kind == "figure1":
        res = BUILDERS["figure1"]()
    elif kind == "hmin_not":
        res = BUILDERS["hmin_not"](args.m2 if args.m2 is not None else 5, args.m3)
    elif kind == "k_components":
        res = BUILDERS["k_components"](args.count,
                                       args.m2 if args.m2 is not None else 5,
                                       args.m3, args.m4)
    elif kind == "nothyp":
        res = BUILDERS["nothyp"](args.c, args.m1,
                                 args.m2 if args.m2 is not None else 2)
    else:
        raise DynamicsError(f"unknown construction {args.kind!r}")
    with open(args.output, "w") as fh:
        fh.write(res.dumps() + "\n")
    print(f"construct {kind}: {len(res.gens.generators)} generators, "
          f"{sum(c.passed for c in res.assumption_checks)}/"
          f"{len(res.assumption_checks)} checks passed -> {args.output}")
    return 0


def _add_render(sub):
    p = sub.add_parser("render", help="rasterize a Julia-type set to PGM")
    p.add_argument("--gens", required=True)
    p.add_argument("--algo", required=True,
                   choices=["survivor", "chaos", "word-union", "fiberwise", "khat"])
    p.add_argument("--grid", required=True, type=_parse_grid,
                   metavar="xmin:ymin:xmax:ymax:width")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--iters", type=int, default=DEFAULTS["survivor_iters"])
    p.add_argument("--samples", type=int, default=DEFAULTS["chaos_samples"])
    p.add_argument("--seed", type=int, default=DEFAULTS["seed"])
    p.add_argument("--chains", type=int, default=DEFAULTS["chaos_chains"])
    p.add_argument("--word-len", type=int, default=DEFAULTS["word_len"])
    p.add_argument("--escape-iters", type=int, default=DEFAULTS["escape_iters"])
    p.add_argument("--prefix", type=str, default=None,
                   help="comma-separated generator indices for fiberwise")
    p.add_argument("--seed-annulus", type=str, default=None,
                   metavar="rmin:rmax", help="survivor seed annulus override")
    p.add_argument("--z0", type=complex, default=None,
                   help="chaos start point on the Julia set")
    p.add_argument("--threads", type=int, default=1,
                   help="worker cap (rendering is single-process)")


def _run_render(args) -> int:
    gens = _load_gens(args.gens)
    grid = args.grid
    if args.algo == "survivor":
        seed = None
        if args.seed_annulus:
            rmin, rmax = (float(v) for v in args.seed_annulus.split(":"))
            seed = annulus_raster(grid, rmin, rmax)
        out = julia_survivor(gens, grid, seed, args.iters)
    elif args.algo == "chaos":
        out = julia_chaos(gens, args.z0, args.samples, grid, args.seed, args.chains)
    elif args.algo == "word-union":
        out = julia_word_union(gens, args.word_len, grid, args.escape_iters)
    elif args.algo == "fiberwise":
        if not args.prefix:
            raise DynamicsError("--prefix is required for the fiberwise algorithm")
        prefix = tuple(int(v) for v in args.prefix.split(","))
        out = fiberwise_filled(gens, prefix, grid)
    else:
        out = smallest_filled_julia(gens, grid, max(args.iters, 1))
    out.write_pgm(args.output)
    print(f"render {args.algo}: {out.count} member pixels on "
          f"{grid.width}x{grid.height} -> {args.output}")
    return 0


def _add_analyze(sub):
    p = sub.add_parser("analyze", help="topological analysis of a raster")
    p.add_argument("what", choices=["components", "order", "classify", "containment"])
    p.add_argument("--input", required=True, help="Julia raster PGM")
    p.add_argument("--khat", default=None, help="K-hat raster PGM (for order)")
    p.add_argument("--gens", default=None, help="generator JSON (for containment)")
    p.add_argument("-o", "--output", default=None, help="write report JSON here")


def _run_analyze(args) -> int:
    raster = RasterSet.read_pgm(args.input)
    labels = label_components(raster)
    doc = labels.to_json()
    if args.what == "components":
        pass
    elif args.what == "order":
        anchor = 0j
        jmin = jmax = None
        if args.khat:
            khat = RasterSet.read_pgm(args.khat)
            import numpy as np
            ys, xs = np.nonzero(khat.bits)
            anchor = complex(khat.grid.mesh()[ys, xs].mean()) if len(ys) else 0j
            jmin, jmax = find_jmin_jmax(labels, khat, anchor)
        res = order_components(labels, anchor)
        doc["order"] = list(res.order) if res.total else None
        doc["total"] = res.total
        if not res.total:
            doc["violating_pair"] = list(res.violation)
        doc["jmin"], doc["jmax"] = jmin, jmax
    elif args.what == "classify":
        doc["fatou"] = [
            {"id": f.id, "pixels": f.pixels, "unbounded": f.unbounded,
             "holes": f.holes, "class": f.klass.value}
            for f in classify_fatou_components(raster)]
    else:
        if not args.gens:
            raise DynamicsError("--gens is required for containment analysis")
        gens = _load_gens(args.gens)
        gen_julia = generator_julia_rasters(gens, raster.grid)
        rep = containment_report(labels, gen_julia)
        doc["containment"] = {str(k): v for k, v in rep.contained.items()}
        doc["star_lambda"] = {str(k): v for k, v in rep.star_lambda.items()}
        doc["mprime_in"], doc["mdouble_in"] = rep.mprime_in, rep.mdouble_in
    text = json.dumps(doc, indent=2)
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    print(f"analyze {args.what}: {labels.count} components", file=sys.stderr)
    return 0


def _add_verify(sub):
    p = sub.add_parser("verify", help="run a verification suite")
    p.add_argument("target", choices=["suite"])
    p.add_argument("--config", required=True)
    p.add_argument("-o", "--output", default=None)
    p.add_argument("--artifacts", default=None)
    p.add_argument("--threads", type=int, default=1,
                   help="worker cap (checks run sequentially at 1)")


def _run_verify(args) -> int:
    config = load_suite(args.config)
    report = run_suite(config, artifacts_dir=args.artifacts)
    print(report.summary())
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(report.dumps() + "\n")
    return 0 if report.overall else 1


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="semijulia",
        description="Julia sets of postcritically bounded polynomial semigroups")
    sub = parser.add_subparsers(dest="command", required=True)
    _add_construct(sub)
    _add_render(sub)
    _add_analyze(sub)
    _add_verify(sub)
    args = parser.parse_args(argv)
    try:
        if args.command == "construct":
            return _run_construct(args)
        if args.command == "render":
            return _run_render(args)
        if args.command == "analyze":
            return _run_analyze(args)
        return _run_verify(args)
    except DynamicsError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
