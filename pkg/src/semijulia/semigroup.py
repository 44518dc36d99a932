"""Semigroup-level quantities: escape radius, postcritical sampling, K-hat.

A generator is a base polynomial together with an iterate count (power).
Iterates stay lazy: f^m is evaluated by applying f m times, never expanded
to coefficient form. Monomial families that compose exactly are expanded by
the constructions module before they get here.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numpy as np

from .errors import DynamicsError, RasterError, ResourceBudgetError
from .grid import GridSpec, RasterSet
from .poly import Polynomial, all_roots, critical_points

DEFAULT_ORBIT_BUDGET = 10_000_000
DEDUP_RESOLUTION = 1e-9


@dataclass(frozen=True)
class Generator:
    """A named semigroup generator: the map base^power (composition)."""

    name: str
    base: Polynomial
    power: int = 1

    def __post_init__(self):
        if self.power < 1:
            raise DynamicsError("generator power must be >= 1")
        if self.base.degree < 2:
            raise DynamicsError(f"generator {self.name!r} must have degree >= 2")

    @property
    def degree(self) -> int:
        return self.base.degree ** self.power

    def apply_scalar(self, z: complex) -> complex:
        for _ in range(self.power):
            z = self.base(z)
        return z

    def apply(self, z: np.ndarray) -> np.ndarray:
        """Evaluate on an array; overflow becomes inf and is left to the caller."""
        out = np.asarray(z, dtype=complex)
        with np.errstate(over="ignore", invalid="ignore"):
            for _ in range(self.power):
                out = self.base(out)
        return out

    def apply_with_escape(self, z: np.ndarray, radius: float):
        """Evaluate, freezing lanes whose modulus exceeds `radius`.

        Returns (values, escaped). Frozen lanes keep the first escaping value,
        which is safe because every generator at least doubles modulus there.
        """
        out = np.array(z, dtype=complex)
        escaped = ~np.isfinite(out) | (np.abs(out) > radius)
        with np.errstate(over="ignore", invalid="ignore"):
            for _ in range(self.power):
                alive = ~escaped
                if not alive.any():
                    break
                vals = self.base(out[alive])
                out[alive] = vals
                bad = ~np.isfinite(vals) | (np.abs(vals) > radius)
                idx = np.flatnonzero(alive)
                escaped[idx[bad]] = True
        return out, escaped

    def critical_values(self) -> list:
        """Finite critical values of the composed map base^power.

        CV(f^m) = union over j < m of f^j(CV(f)); this avoids enumerating the
        d^m critical points of the iterate.
        """
        cv = [self.base(c) for c in critical_points(self.base)]
        out = list(cv)
        pts = list(cv)
        for _ in range(self.power - 1):
            pts = [self.base(p) for p in pts]
            out.extend(pts)
        seen = []
        for p in out:
            if not any(abs(p - q) <= 1e-12 * max(1.0, abs(q)) for q in seen):
                seen.append(p)
        return seen

    def repelling_fixed_point(self) -> complex:
        """Fixed point of the base map with largest modulus, if repelling.

        A repelling fixed point of the base is a repelling fixed point of the
        iterate and lies on its Julia set.
        """
        shifted = list(self.base.coeffs)
        shifted[1] = shifted[1] - 1.0
        roots = all_roots(Polynomial(shifted))
        z0 = max(roots, key=abs)
        if abs(self.base.derivative()(z0)) <= 1.0:
            raise DynamicsError(
                f"largest fixed point of {self.name!r} is not repelling; "
                "supply a Julia-set start point explicitly")
        return complex(z0)

    def to_json(self):
        doc = {"name": self.name, "coeffs": self.base.to_json()}
        if self.power != 1:
            doc["power"] = self.power
        return doc

    @staticmethod
    def from_json(doc) -> "Generator":
        return Generator(doc["name"], Polynomial.from_json(doc["coeffs"]),
                         int(doc.get("power", 1)))


def _escape_radius_one(p: Polynomial) -> float:
    """Smallest R >= 1 with |p(z)| >= 2|z| certified for all |z| >= R.

    Uses the largest positive root of |a_d| t^d - sum_{i<d} |a_i| t^i - 2t,
    which is exact for monomials and sound for every polynomial (the naive
    ((2 + sum|a_i|)/|a_d|)^(1/(d-1)) closed form fails for some multi-term
    maps, e.g. z^3 + 2z^2).
    """
    mods = np.abs(np.array(p.coeffs)).astype(float)
    # phi(t) = |a_d| t^d - |a_{d-1}| t^{d-1} - ... - (|a_1| + 2) t - |a_0|
    phi = np.concatenate([-mods[:-1], [mods[-1]]])
    phi[1] -= 2.0
    roots = all_roots(Polynomial(phi))
    real = [r.real for r in roots
            if abs(r.imag) <= 1e-9 * max(1.0, abs(r)) and r.real > 0]
    return max([1.0] + real)


@dataclass
class GeneratorSet:
    """Named finite polynomial family generating the semigroup."""

    generators: tuple

    _radius: Optional[float] = field(default=None, repr=False, compare=False)

    def __init__(self, generators: Sequence[Generator]):
        gens = tuple(generators)
        if not gens:
            raise DynamicsError("generator set must be nonempty")
        self.generators = gens
        self._radius = None

    def __len__(self):
        return len(self.generators)

    @property
    def escape_radius(self) -> float:
        """R with |h(z)| >= 2|z| for every generator h and every |z| >= R."""
        if self._radius is None:
            self._radius = max(_escape_radius_one(g.base) for g in self.generators)
        return self._radius

    def names(self):
        return [g.name for g in self.generators]

    def to_json(self):
        return {"generators": [g.to_json() for g in self.generators]}

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2)

    @staticmethod
    def from_json(doc) -> "GeneratorSet":
        return GeneratorSet([Generator.from_json(g) for g in doc["generators"]])

    @staticmethod
    def loads(text: str) -> "GeneratorSet":
        return GeneratorSet.from_json(json.loads(text))


# ---------------------------------------------------------------------------
# postcritical boundedness
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PostcriticalSample:
    points: tuple
    depth: int
    escaped_witness: Optional[tuple] = None  # (word, critical value)


@dataclass(frozen=True)
class Bounded:
    sample: PostcriticalSample


@dataclass(frozen=True)
class Escapes:
    sample: PostcriticalSample


def _dedup_key(z: complex):
    return (round(z.real / DEDUP_RESOLUTION), round(z.imag / DEDUP_RESOLUTION))


def postcritical_bounded_check(gens: GeneratorSet, depth: int,
                               budget: int = DEFAULT_ORBIT_BUDGET
                               ) -> Union[Bounded, Escapes]:
    """Depth-limited membership test for the postcritically bounded class.

    Explores forward orbits of all finite critical values under all words up
    to `depth`, deduplicating points on a 1e-9 grid. A point beyond the escape
    radius provably iterates to infinity, so an Escapes verdict is a proof;
    Bounded only certifies the explored depth.
    """
    if depth < 1:
        raise DynamicsError("depth must be >= 1")
    radius = gens.escape_radius
    seen = {}
    frontier = []
    for z in _all_critical_values(gens):
        key = _dedup_key(z)
        if key not in seen:
            seen[key] = z
            frontier.append((z, (), z))
    for z, word, origin in list(frontier):
        if abs(z) > radius:
            return Escapes(PostcriticalSample(tuple(seen.values()), 0, (word, origin)))
    for level in range(1, depth + 1):
        nxt = []
        for z, word, origin in frontier:
            for gi, gen in enumerate(gens.generators):
                w = gen.apply_scalar(z)
                new_word = word + (gi,)
                if not (np.isfinite(w.real) and np.isfinite(w.imag)) or abs(w) > radius:
                    sample = PostcriticalSample(tuple(seen.values()), level,
                                                (new_word, origin))
                    return Escapes(sample)
                key = _dedup_key(w)
                if key not in seen:
                    if len(seen) >= budget:
                        raise ResourceBudgetError(
                            f"postcritical orbit exceeded budget {budget}")
                    seen[key] = w
                    nxt.append((w, new_word, origin))
        frontier = nxt
        if not frontier:
            break
    return Bounded(PostcriticalSample(tuple(seen.values()), depth, None))


def _all_critical_values(gens: GeneratorSet):
    out = []
    for g in gens.generators:
        out.extend(g.critical_values())
    return out


# ---------------------------------------------------------------------------
# smallest filled-in Julia set
# ---------------------------------------------------------------------------

def pixel_maps(gens: GeneratorSet, grid: GridSpec):
    """Per-generator pixel-to-pixel maps: flat target index plus validity."""
    z = grid.mesh()
    maps = []
    for gen in gens.generators:
        w = gen.apply(z)
        row, col, valid = grid.to_index(w)
        maps.append(((row * grid.width + col).ravel(), valid.ravel()))
    return maps


def smallest_filled_julia(gens: GeneratorSet, grid: GridSpec,
                          iters: int) -> RasterSet:
    """Greatest-fixed-point iteration for K-hat on the pixel grid.

    K_0 = escape disk; a pixel survives a round when every generator sends it
    into the previous raster (1-px dilated for half-pixel sampling slack).
    The result is non-increasing in `iters` and over-approximates K-hat.
    """
    if iters < 1:
        raise DynamicsError("iters must be >= 1")
    radius = gens.escape_radius
    if not grid.covers_disk(radius):
        raise RasterError(
            f"grid window must cover the closed escape disk (radius {radius:.4g})")
    maps = pixel_maps(gens, grid)
    member = (np.abs(grid.mesh()) <= radius)
    k0 = member.copy()
    for _ in range(iters):
        target = RasterSet(grid, member).dilate(1).bits.ravel()
        keep = k0.copy().ravel()
        for idx, valid in maps:
            keep &= valid & target[idx]
        keep = keep.reshape(grid.shape)
        if np.array_equal(keep, member):
            break
        member = keep
    return RasterSet(grid, member)
