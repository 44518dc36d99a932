"""Pixel-grid Julia set computation: three independent algorithms plus
fiberwise filled sets, raster preimages, and the pixel Hausdorff metric.

The default pipeline is the survivor iteration; the chaos game and the
word-union renderer are independent cross-checks. All membership lookups
against a previous-generation raster use a 1-px dilation: pixel-center
sampling incurs up to half a pixel of error on each side, and backward
dynamics contracts the slack instead of accumulating it.
"""
from __future__ import annotations

from typing import Optional, Sequence

import numpy as np
from scipy import ndimage

from .errors import DynamicsError, RasterError, ResourceBudgetError
from .grid import GridSpec, RasterSet
from .poly import Polynomial, batched_roots, validate_word
from .rng import SplitMix64
from .semigroup import Generator, GeneratorSet, pixel_maps, smallest_filled_julia

CHAOS_BURN_IN = 100
DEFAULT_ESCAPE_ITERS = 200
DEFAULT_WORD_BUDGET = 10_000


# ---------------------------------------------------------------------------
# survivor iteration: A_{n+1} = { z in A_0 : some generator maps z into A_n }
# ---------------------------------------------------------------------------

def default_survivor_seed(gens: GeneratorSet, grid: GridSpec,
                          khat: Optional[RasterSet] = None) -> RasterSet:
    """Escape disk minus the 1-px-eroded K-hat raster.

    Removing the K-hat interior strips the Fatou bulk so the survivor
    intersection collapses onto the Julia set instead of the filled sets.
    """
    if khat is None:
        khat = smallest_filled_julia(gens, grid, iters=256)
    bits = (np.abs(grid.mesh()) <= gens.escape_radius) & ~khat.erode(1).bits
    return RasterSet(grid, bits)


def julia_survivor(gens: GeneratorSet, grid: GridSpec,
                   seed_region: Optional[RasterSet] = None,
                   iters: int = 40) -> RasterSet:
    """Backward-self-similarity survivor set after `iters` refinements.

    Over-approximates J(G) whenever the seed contains it; equals J(G) at
    raster tolerance for the hyperbolic disconnected examples. Non-increasing
    in `iters`.
    """
    if seed_region is None:
        seed_region = default_survivor_seed(gens, grid)
    if seed_region.grid != grid:
        raise RasterError("seed_region grid differs from the requested grid")
    if seed_region.is_empty():
        raise RasterError("survivor seed region is empty")
    maps = pixel_maps(gens, grid)
    a0 = seed_region.bits.ravel()
    member = seed_region.bits.copy()
    for _ in range(iters):
        target = RasterSet(grid, member).dilate(1).bits.ravel()
        hit = np.zeros(a0.shape, dtype=bool)
        for idx, valid in maps:
            hit |= valid & target[idx]
        keep = (a0 & hit).reshape(grid.shape)
        if np.array_equal(keep, member):
            break
        member = keep
    return RasterSet(grid, member)


# ---------------------------------------------------------------------------
# chaos game: random backward orbit of a Julia point
# ---------------------------------------------------------------------------

def _branch_preimages(base: Polynomial, w: np.ndarray, pick: np.ndarray) -> np.ndarray:
    """One preimage of each w under the base map, selected by `pick`."""
    d = base.degree
    if d == 2:
        a2, a1, a0 = base.coeffs[2], base.coeffs[1], base.coeffs[0]
        disc = np.sqrt(a1 * a1 - 4.0 * a2 * (a0 - w))
        root = (-a1 + disc) / (2.0 * a2)
        other = (-a1 - disc) / (2.0 * a2)
        return np.where(pick == 0, root, other)
    if base.is_binomial():
        a, c = base.coeffs[-1], base.coeffs[0]
        principal = np.exp(np.log((w - c) / a + 0j) / d)
        turn = np.exp(2j * np.pi * pick / d)
        return principal * turn
    roots = batched_roots(base.coeffs, w)
    return roots[np.arange(len(w)), pick]


def julia_chaos(gens: GeneratorSet, z0: Optional[complex], samples: int,
                grid: GridSpec, seed: int, chains: int = 256) -> RasterSet:
    """Mark the pixels visited by random backward orbits.

    Deterministic given (seed, samples, chains): generator and branch choices
    come from per-chain splitmix64 streams. Each chain discards a 100-step
    burn-in; `samples` counts total steps across chains.
    """
    if samples < 1:
        raise DynamicsError("samples must be >= 1")
    if z0 is None:
        z0 = gens.generators[0].repelling_fixed_point()
    chains = max(1, min(chains, max(1, samples // (2 * CHAOS_BURN_IN))))
    steps = int(np.ceil(samples / chains))
    rng = SplitMix64(seed, lanes=chains)
    z = np.full(chains, complex(z0), dtype=complex)
    bits = np.zeros(grid.shape, dtype=bool)
    m = len(gens.generators)
    for step in range(steps):
        gsel = rng.next_below(m)
        for gi, gen in enumerate(gens.generators):
            lanes = np.flatnonzero(gsel == gi)
            if lanes.size == 0:
                continue
            vals = z[lanes]
            for _ in range(gen.power):
                pick = rng.next_below(gen.base.degree)[lanes]
                vals = _branch_preimages(gen.base, vals, pick)
            z[lanes] = vals
        if step < CHAOS_BURN_IN:
            continue
        row, col, valid = grid.to_index(z)
        bits[row[valid], col[valid]] = True
    return RasterSet(grid, bits)


# ---------------------------------------------------------------------------
# word-union renderer: boundaries of filled Julia sets of word maps
# ---------------------------------------------------------------------------

def enumerate_words(m: int, max_len: int, budget: int = DEFAULT_WORD_BUDGET):
    total = sum(m ** k for k in range(1, max_len + 1))
    if total > budget:
        raise ResourceBudgetError(
            f"{total} words of length <= {max_len} exceed budget {budget}")
    words = [(i,) for i in range(m)]
    out = list(words)
    for _ in range(max_len - 1):
        words = [w + (i,) for w in words for i in range(m)]
        out.extend(words)
    return out


def word_filled_raster(gens: GeneratorSet, word: Sequence[int], grid: GridSpec,
                       iters: int = DEFAULT_ESCAPE_ITERS) -> RasterSet:
    """Escape-time filled Julia set of the word map as a self-map.

    Stops early once an iteration produces no new escapes; remaining pixels
    are bounded at this resolution.
    """
    word = validate_word(word, len(gens.generators))
    radius = gens.escape_radius
    z = grid.mesh().ravel()
    alive = np.abs(z) <= radius
    vals = z[alive]
    alive_idx = np.flatnonzero(alive)
    for _ in range(iters):
        escaped_local = np.zeros(vals.shape, dtype=bool)
        for gi in word:
            vals, esc = gens.generators[gi].apply_with_escape(vals, radius)
            escaped_local |= esc
        if not escaped_local.any():
            break
        keep = ~escaped_local
        alive[alive_idx[escaped_local]] = False
        alive_idx = alive_idx[keep]
        vals = vals[keep]
        if alive_idx.size == 0:
            break
    return RasterSet(grid, alive.reshape(grid.shape))


def generator_julia_rasters(gens: GeneratorSet, grid: GridSpec,
                            iters: int = DEFAULT_ESCAPE_ITERS) -> list:
    """Boundary raster of each generator's filled Julia set."""
    return [word_filled_raster(gens, (i,), grid, iters).boundary()
            for i in range(len(gens.generators))]


def julia_word_union(gens: GeneratorSet, max_word_len: int, grid: GridSpec,
                     iters: int = DEFAULT_ESCAPE_ITERS,
                     budget: int = DEFAULT_WORD_BUDGET) -> RasterSet:
    """Union of J(w) boundary rasters over all words w up to max_word_len.

    Approximates J(G) from inside (Julia sets of semigroup elements are dense
    in J(G)); non-decreasing in the word length.
    """
    if max_word_len < 1:
        raise DynamicsError("max_word_len must be >= 1")
    out = np.zeros(grid.shape, dtype=bool)
    for word in enumerate_words(len(gens.generators), max_word_len, budget):
        filled = word_filled_raster(gens, word, grid, iters)
        out |= filled.boundary().bits
    return RasterSet(grid, out)


# ---------------------------------------------------------------------------
# fiberwise filled sets along one composition sequence
# ---------------------------------------------------------------------------

def fiberwise_filled(gens: GeneratorSet, prefix: Sequence[int],
                     grid: GridSpec) -> RasterSet:
    """Pixels whose first N partial compositions stay within the escape disk.

    The boundary of the result approximates the Julia set along the
    trajectory; non-increasing in the prefix length.
    """
    prefix = validate_word(prefix, len(gens.generators))
    radius = gens.escape_radius
    vals = grid.mesh().ravel()
    alive = np.abs(vals) <= radius
    vals = vals[alive]
    alive_idx = np.flatnonzero(alive)
    for gi in prefix:
        vals, esc = gens.generators[gi].apply_with_escape(vals, radius)
        if esc.any():
            alive[alive_idx[esc]] = False
            keep = ~esc
            alive_idx = alive_idx[keep]
            vals = vals[keep]
    return RasterSet(grid, alive.reshape(grid.shape))


# ---------------------------------------------------------------------------
# raster preimages and the pixel Hausdorff metric
# ---------------------------------------------------------------------------

def preimage_raster(p, target: RasterSet, out_grid: Optional[GridSpec] = None
                    ) -> RasterSet:
    """Forward-evaluation pullback: pixels mapping into the 1-px dilated target.

    `p` may be a Polynomial or a Generator; exact up to one pixel of slack.
    """
    if out_grid is None:
        out_grid = target.grid
    if isinstance(p, Generator):
        w = p.apply(out_grid.mesh())
    elif isinstance(p, Polynomial):
        with np.errstate(over="ignore", invalid="ignore"):
            w = p(out_grid.mesh())
    else:
        raise DynamicsError("preimage_raster needs a Polynomial or Generator")
    row, col, valid = target.grid.to_index(w)
    fat = target.dilate(1).bits
    bits = valid & fat[row, col]
    return RasterSet(out_grid, bits)


def distance_px(r: RasterSet) -> np.ndarray:
    """Euclidean distance (in pixels) from each pixel to the raster."""
    if r.is_empty():
        raise RasterError("distance transform of an empty raster")
    return ndimage.distance_transform_edt(~r.bits)


def hausdorff_px(a: RasterSet, b: RasterSet) -> float:
    """Symmetric Hausdorff distance between pixel-center sets, in pixels."""
    if a.grid != b.grid:
        raise RasterError("hausdorff_px needs rasters on one grid")
    if a.is_empty() or b.is_empty():
        raise RasterError("hausdorff_px needs nonempty rasters")
    da = distance_px(a)
    db = distance_px(b)
    return float(max(da[b.bits].max(), db[a.bits].max()))


def directed_max_distance_px(a: RasterSet, b: RasterSet) -> float:
    """Largest distance from a pixel of `a` to the set `b`, in pixels."""
    if a.grid != b.grid:
        raise RasterError("rasters on different grids")
    if a.is_empty():
        return 0.0
    if b.is_empty():
        raise RasterError("cannot measure distance to an empty raster")
    return float(distance_px(b)[a.bits].max())
