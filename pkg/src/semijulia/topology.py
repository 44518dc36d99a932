"""Raster topology: components, polynomial hulls, and the surrounding order.

Set pixels are 8-connected and background regions 4-connected, preserving
discrete Jordan duality so hole counts and the Jordan-curve test behave.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Sequence

import numpy as np
from scipy import ndimage

from .errors import AnchorError, RasterError, StructureError
from .grid import GridSpec, RasterSet
from .rasterdyn import preimage_raster
from .semigroup import GeneratorSet

_EIGHT = np.ones((3, 3), dtype=int)
_FOUR = np.array([[0, 1, 0], [1, 1, 1], [0, 1, 0]], dtype=int)


@dataclass
class ComponentLabels:
    """8-connected labeling of a raster; label 0 is background."""

    grid: GridSpec
    labels: np.ndarray
    count: int
    sizes: list
    bboxes: list  # (rmin, cmin, rmax, cmax) inclusive

    def component(self, cid: int) -> RasterSet:
        if not (1 <= cid <= self.count):
            raise RasterError(f"component id {cid} out of range 1..{self.count}")
        return RasterSet(self.grid, self.labels == cid)

    def julia_raster(self) -> RasterSet:
        return RasterSet(self.grid, self.labels > 0)

    def to_json(self):
        return {"components": [
            {"id": i + 1, "pixels": int(self.sizes[i]),
             "bbox": [int(v) for v in self.bboxes[i]]}
            for i in range(self.count)]}


def label_components(r: RasterSet) -> ComponentLabels:
    """Union-find labeling with deterministic first-scan label order."""
    raw, n = ndimage.label(r.bits, structure=_EIGHT)
    if n == 0:
        return ComponentLabels(r.grid, raw.astype(np.int32), 0, [], [])
    flat = raw.ravel()
    nz = np.flatnonzero(flat)
    first = np.full(n + 1, flat.size, dtype=np.int64)
    np.minimum.at(first, flat[nz], nz)
    order = np.argsort(first[1:], kind="stable")
    remap = np.zeros(n + 1, dtype=np.int32)
    remap[order + 1] = np.arange(1, n + 1, dtype=np.int32)
    labels = remap[raw]
    sizes = ndimage.sum_labels(np.ones_like(labels), labels,
                               index=np.arange(1, n + 1)).astype(int).tolist()
    slices = ndimage.find_objects(labels)
    bboxes = [(s[0].start, s[1].start, s[0].stop - 1, s[1].stop - 1) for s in slices]
    return ComponentLabels(r.grid, labels, n, sizes, bboxes)


def polynomial_hull_raster(c: RasterSet) -> tuple[RasterSet, bool]:
    """The set plus all bounded complement components (flood fill from border).

    Returns (hull, truncated) where truncated flags a component touching the
    window border, in which case the hull is clipped by the window.
    """
    if c.is_empty():
        raise RasterError("hull of an empty component")
    comp, n = ndimage.label(~c.bits, structure=_FOUR)
    border = np.zeros(n + 1, dtype=bool)
    for edge in (comp[0, :], comp[-1, :], comp[:, 0], comp[:, -1]):
        border[np.unique(edge)] = True
    border[0] = False
    unbounded = border[comp] & (comp > 0)
    hull = ~unbounded
    b = c.bits
    truncated = bool(b[0, :].any() or b[-1, :].any() or b[:, 0].any() or b[:, -1].any())
    return RasterSet(c.grid, hull), truncated


class Relation(Enum):
    LESS = "less"            # first component surrounded by the second
    GREATER = "greater"
    OUTSIDE = "outside"
    INTERSECTS = "intersects"


@dataclass(frozen=True)
class OrderVerdict:
    relation: Relation
    witness: Optional[tuple] = None  # (row, col) pixel backing the verdict


def surrounding_compare(c1: RasterSet, c2: RasterSet) -> OrderVerdict:
    """Trichotomy for disjoint compact sets, pixel-tolerant.

    Sets whose 1-px dilations overlap count as intersecting; otherwise one
    surrounds the other exactly when it lies inside the other's hull.
    """
    if c1.grid != c2.grid:
        raise RasterError("surrounding_compare needs one grid")
    overlap = c1.dilate(1).bits & c2.dilate(1).bits
    if overlap.any():
        rc = np.argwhere(overlap)[0]
        return OrderVerdict(Relation.INTERSECTS, (int(rc[0]), int(rc[1])))
    hull2, _ = polynomial_hull_raster(c2)
    if bool(np.all(hull2.bits[c1.bits])):
        rc = np.argwhere(c1.bits)[0]
        return OrderVerdict(Relation.LESS, (int(rc[0]), int(rc[1])))
    hull1, _ = polynomial_hull_raster(c1)
    if bool(np.all(hull1.bits[c2.bits])):
        rc = np.argwhere(c2.bits)[0]
        return OrderVerdict(Relation.GREATER, (int(rc[0]), int(rc[1])))
    return OrderVerdict(Relation.OUTSIDE)


@dataclass(frozen=True)
class OrderResult:
    total: bool
    order: Optional[tuple] = None      # component ids, innermost first
    violation: Optional[tuple] = None  # (id1, id2) failing pair


def order_components(l: ComponentLabels, anchor: complex) -> OrderResult:
    """Sort components by distance from an anchor inside every hull.

    Distance sorting realizes the surrounding order for disjoint compacta
    whose hulls share the anchor; every adjacent pair is then re-validated
    with the raster trichotomy.
    """
    if l.count == 0:
        return OrderResult(True, ())
    mesh = l.grid.mesh()
    dist = np.abs(mesh - anchor)
    mins = ndimage.minimum(dist, l.labels, index=np.arange(1, l.count + 1))
    hulls = {}
    row, col, valid = l.grid.to_index(np.array([anchor]))
    if not valid[0]:
        raise AnchorError(0)
    for cid in range(1, l.count + 1):
        hull, _ = polynomial_hull_raster(l.component(cid))
        hulls[cid] = hull
        if not hull.bits[row[0], col[0]]:
            raise AnchorError(cid)
    order = [int(i) + 1 for i in np.argsort(mins, kind="stable")]
    for a, b in zip(order, order[1:]):
        ca, cb = l.component(a), l.component(b)
        if (ca.dilate(1).bits & cb.dilate(1).bits).any():
            return OrderResult(False, None, (a, b))
        if not np.all(hulls[b].bits[ca.bits]):
            return OrderResult(False, None, (a, b))
    return OrderResult(True, tuple(order))


class FatouClass(Enum):
    SIMPLY = "simply_connected"
    DOUBLY = "doubly_connected"
    OTHER = "other"


@dataclass(frozen=True)
class FatouComponent:
    id: int
    pixels: int
    unbounded: bool
    holes: int

    @property
    def klass(self) -> FatouClass:
        if self.holes == 0:
            return FatouClass.SIMPLY
        if self.holes == 1:
            return FatouClass.DOUBLY
        return FatouClass.OTHER


def classify_fatou_components(julia: RasterSet) -> list:
    """Connectivity classes of the complement regions of a Julia raster.

    The raster is closed with a 1-px dilation first so diagonal pixel leaks
    do not fuse distinct Fatou regions. Holes of a region are the extra
    8-connected components of its own complement.
    """
    closed = julia.dilate(1).bits
    comp, n = ndimage.label(~closed, structure=_FOUR)
    out = []
    for cid in range(1, n + 1):
        mask = comp == cid
        unbounded = bool(mask[0, :].any() or mask[-1, :].any()
                         or mask[:, 0].any() or mask[:, -1].any())
        _, nrest = ndimage.label(~mask, structure=_EIGHT)
        out.append(FatouComponent(cid, int(mask.sum()), unbounded, nrest - 1))
    return out


def jordan_test(curve: RasterSet) -> bool:
    """A raster curve passes iff its complement has exactly two 4-regions."""
    _, n = ndimage.label(~curve.bits, structure=_FOUR)
    return n == 2


def find_jmin_jmax(l: ComponentLabels, khat: RasterSet,
                   anchor: Optional[complex] = None) -> tuple[int, int]:
    """Identify the minimal and maximal components of a Julia raster.

    jmin must meet the K-hat boundary and jmax the boundary of the unbounded
    Fatou region (2-px tolerance); both identifications are cross-validated
    against the distance-sort extremes.
    """
    if khat.grid != l.grid:
        raise RasterError("khat grid differs from the labeling grid")
    if khat.is_empty():
        raise RasterError("khat raster is empty")
    if l.count == 0:
        raise StructureError("no components to identify jmin/jmax in")
    near_khat = khat.boundary().dilate(2).bits
    jmin_ids = sorted(set(np.unique(l.labels[near_khat])) - {0})
    julia = l.julia_raster()
    comp, n = ndimage.label(~julia.dilate(1).bits, structure=_FOUR)
    border_ids = set()
    for edge in (comp[0, :], comp[-1, :], comp[:, 0], comp[:, -1]):
        border_ids.update(np.unique(edge))
    border_ids.discard(0)
    uinf = np.isin(comp, sorted(border_ids))
    near_uinf = RasterSet(l.grid, uinf).dilate(3).bits
    jmax_ids = sorted(set(np.unique(l.labels[near_uinf])) - {0})
    if not jmin_ids:
        raise StructureError("no component meets the K-hat boundary")
    if not jmax_ids:
        raise StructureError("no component meets the unbounded Fatou boundary")
    if anchor is None:
        ys, xs = np.nonzero(khat.bits)
        mesh = khat.grid.mesh()
        anchor = complex(mesh[ys, xs].mean())
    result = order_components(l, anchor)
    if not result.total:
        raise StructureError(f"components are not totally ordered: {result.violation}")
    jmin, jmax = result.order[0], result.order[-1]
    if jmin not in jmin_ids:
        raise StructureError(
            f"distance-sort minimum {jmin} does not meet the K-hat boundary "
            f"(candidates {jmin_ids})")
    if jmax not in jmax_ids:
        raise StructureError(
            f"distance-sort maximum {jmax} does not meet the unbounded Fatou "
            f"boundary (candidates {jmax_ids})")
    return jmin, jmax


def g_star(gens: GeneratorSet, g_index: int, cid: int,
           l: ComponentLabels) -> int:
    """Label of the component containing the pullback of component `cid`."""
    comp = l.component(cid)
    pre = preimage_raster(gens.generators[g_index], comp, l.grid)
    if pre.is_empty():
        raise StructureError("preimage raster is empty within the window")
    touched = set(np.unique(l.labels[pre.dilate(1).bits])) - {0}
    if not touched:
        raise StructureError("preimage raster does not meet the Julia raster")
    if len(touched) > 1:
        raise StructureError(f"preimage spans several components: {sorted(touched)}")
    return int(touched.pop())


@dataclass
class ContainmentReport:
    """Per-component generator-Julia containment plus the M'/M'' extremes."""

    contained: dict                 # component id -> list of generator indices
    star_lambda: dict               # component id -> bool
    star: dict                      # component id -> bool (over supplied rasters)
    mprime_in: Optional[int]        # component id containing M'
    mdouble_in: Optional[int]       # component id containing M''
    union_count: int = 0


def containment_report(l: ComponentLabels, gen_julia: Sequence[RasterSet],
                       extra_julia: Sequence[RasterSet] = (),
                       slack_px: int = 2) -> ContainmentReport:
    """Where the small Julia sets sit inside the big one.

    M' and M'' are the minimal and maximal components of the union of the
    generator Julia rasters under the surrounding order; containment uses a
    2-px dilation because rasters from different algorithms disagree by up
    to a pixel each.
    """
    for r in list(gen_julia) + list(extra_julia):
        if r.grid != l.grid:
            raise RasterError("all rasters must share the labeling grid")
    contained = {}
    star_lambda = {}
    star = {}
    for cid in range(1, l.count + 1):
        fat = l.component(cid).dilate(slack_px)
        hits = [gi for gi, r in enumerate(gen_julia) if fat.contains(r)]
        contained[cid] = hits
        star_lambda[cid] = bool(hits)
        star[cid] = bool(hits) or any(fat.contains(r) for r in extra_julia)
    union = RasterSet(l.grid, np.logical_or.reduce(
        [r.bits for r in gen_julia]) if gen_julia else
        np.zeros(l.grid.shape, dtype=bool))
    if union.is_empty():
        return ContainmentReport(contained, star_lambda, star, None, None, 0)
    ul = label_components(union)
    mprime, mdouble = _min_max_components(ul)
    mprime_in = _component_home(l, ul.component(mprime), slack_px)
    mdouble_in = _component_home(l, ul.component(mdouble), slack_px)
    return ContainmentReport(contained, star_lambda, star, mprime_in,
                             mdouble_in, ul.count)


def _min_max_components(ul: ComponentLabels) -> tuple[int, int]:
    """Extremes of a labeling under the surrounding order via pairwise compares."""
    ids = list(range(1, ul.count + 1))
    if len(ids) == 1:
        return 1, 1
    rasters = {i: ul.component(i) for i in ids}
    mins, maxs = [], []
    for i in ids:
        less = gtr = 0
        for j in ids:
            if i == j:
                continue
            rel = surrounding_compare(rasters[i], rasters[j]).relation
            if rel is Relation.LESS:
                less += 1
            elif rel is Relation.GREATER:
                gtr += 1
        if less == len(ids) - 1:
            mins.append(i)
        if gtr == len(ids) - 1:
            maxs.append(i)
    if not mins or not maxs:
        raise StructureError("generator Julia components are not totally ordered")
    return mins[0], maxs[0]


def _component_home(l: ComponentLabels, piece: RasterSet, slack_px: int
                    ) -> Optional[int]:
    for cid in range(1, l.count + 1):
        if l.component(cid).dilate(slack_px).contains(piece):
            return cid
    return None
