"""Parameterized builders for the explicit semigroups studied here.

Each builder verifies the assumptions its source construction makes (by
exact radius arithmetic on monomials where possible, by dense circle
sampling otherwise) and returns the generator set together with derived
constants and the check outcomes. Searches that the constructions leave as
"large enough" are deterministic sweeps: double the exponent until the
checks pass, then bisect down to the minimal passing value.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import ConstructionError, DynamicsError
from .grid import GridSpec, RasterSet, circle_raster
from .poly import Polynomial, monomial, monomial_iterate, COMPOSE_DEGREE_CAP
from .rasterdyn import julia_survivor, preimage_raster
from .semigroup import Generator, GeneratorSet, postcritical_bounded_check, Bounded
from .topology import label_components, polynomial_hull_raster, surrounding_compare, Relation

_SAMPLES = 4096
_SWEEP_CAP = 2 ** 20


@dataclass(frozen=True)
class AssumptionCheck:
    description: str
    passed: bool
    margin: float

    def to_json(self):
        return {"description": self.description, "passed": self.passed,
                "margin": self.margin}


@dataclass
class ConstructionResult:
    kind: str
    params: dict
    gens: GeneratorSet
    derived_constants: dict
    assumption_checks: list = field(default_factory=list)

    def constant(self, name: str):
        return self.derived_constants[name]

    def to_json(self):
        return {
            "kind": self.kind,
            "params": self.params,
            **self.gens.to_json(),
            "derived_constants": {k: _num_json(v)
                                  for k, v in self.derived_constants.items()},
            "assumption_checks": [c.to_json() for c in self.assumption_checks],
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2)


def _num_json(v):
    if isinstance(v, complex):
        return [v.real, v.imag]
    return v


def replay(doc: dict) -> ConstructionResult:
    """Rebuild a construction from its serialized form and re-verify it."""
    kind = doc["kind"]
    params = doc["params"]
    builder = BUILDERS.get(kind)
    if builder is None:
        raise ConstructionError(f"unknown construction kind {kind!r}")
    return builder(**params)


def _checked(checks: list, description: str, passed: bool, margin: float,
             advice: str = ""):
    checks.append(AssumptionCheck(description, bool(passed), float(margin)))
    if not passed:
        raise ConstructionError(
            f"assumption check failed: {description} (margin {margin:.3e})"
            + (f"; {advice}" if advice else ""),
            check=description, margin=margin)


def _circle_points(center: complex, radius: float, n: int = _SAMPLES) -> np.ndarray:
    t = 2 * np.pi * np.arange(n) / n
    return center + radius * np.exp(1j * t)


def _minimal_passing(check, start: int = 1, cap: int = _SWEEP_CAP) -> int:
    """Smallest m with check(m) true, assuming monotonicity in m."""
    m = start
    while not check(m):
        m *= 2
        if m > cap:
            raise ConstructionError(f"sweep exceeded cap {cap}")
    lo, hi = m // 2, m
    while hi - lo > 1 and lo >= start:
        mid = (lo + hi) // 2
        if mid < start:
            break
        if check(mid):
            hi = mid
        else:
            lo = mid
    return max(hi, start)


def _iterate_generator(name: str, base: Polynomial, power: int) -> Generator:
    """Expand monomial iterates in closed form; keep everything else lazy."""
    if base.is_binomial() and base.coeffs[0] == 0 \
            and base.degree ** power <= COMPOSE_DEGREE_CAP:
        return Generator(name, monomial_iterate(base.leading, base.degree, power))
    return Generator(name, base, power)


# ---------------------------------------------------------------------------
# Cantor set of round circles
# ---------------------------------------------------------------------------

def cantor_circles(a: complex = 1.0, b: complex = 0.25, k: int = 2, j: int = 2,
                   m1: int = 2, m2: int = 2) -> ConstructionResult:
    """Two monomial generators whose Julia set is a Cantor set of circles.

    f1 = a z^k and f2 = b z^j have circular Julia sets; iterating each enough
    times makes the closed annulus A between the circles backward absorbing
    with disjoint pullbacks, which is checked by exact radius arithmetic.
    """
    if k < 2 or j < 2:
        raise ConstructionError("monomial degrees must be at least 2")
    if m1 < 1 or m2 < 1:
        raise ConstructionError("iterate counts must be at least 1")
    a, b = complex(a), complex(b)
    checks = []
    rho1 = abs(a) ** (-1.0 / (k - 1))
    rho2 = abs(b) ** (-1.0 / (j - 1))
    sep = abs(np.log(rho1) - np.log(rho2))
    _checked(checks, "generator Julia circles are distinct", sep > 1e-12, sep,
             advice="equal radii violate |a|^(k-1) != |b|^(j-1)")
    lo, hi = np.log(min(rho1, rho2)), np.log(max(rho1, rho2))

    def pull(coeff_log: float, deg: int):
        return ((lo - coeff_log) / deg, (hi - coeff_log) / deg)

    g1 = _iterate_generator("g1", monomial(a, k), m1)
    g2 = _iterate_generator("g2", monomial(b, j), m2)
    d1, d2 = k ** m1, j ** m2
    la = np.log(abs(a)) * (d1 - 1) / (k - 1)
    lb = np.log(abs(b)) * (d2 - 1) / (j - 1)
    i1, i2 = pull(la, d1), pull(lb, d2)
    inside = min(i1[0] - lo, hi - i1[1], i2[0] - lo, hi - i2[1])
    _checked(checks, "pullbacks of the annulus stay inside it", inside >= -1e-12,
             inside, advice="increase m1/m2")
    gap = max(i1[0], i2[0]) - min(i1[1], i2[1])
    _checked(checks, "pullbacks of the annulus are disjoint", gap > 1e-12, gap,
             advice="increase m1/m2 (m1=m2=1 only works when k, j are not both 2)")
    consts = {
        "radius_inner": min(rho1, rho2), "radius_outer": max(rho1, rho2),
        "pullback_1": [float(np.exp(i1[0])), float(np.exp(i1[1]))],
        "pullback_2": [float(np.exp(i2[0])), float(np.exp(i2[1]))],
        "degree_1": d1, "degree_2": d2,
    }
    gens = GeneratorSet([g1, g2])
    params = {"a": _num_json(a), "b": _num_json(b), "k": k, "j": j,
              "m1": m1, "m2": m2}
    return ConstructionResult("cantor", params, gens, consts, checks)


# ---------------------------------------------------------------------------
# the two-generator semigroup behind the disconnected hyperbolic figure
# ---------------------------------------------------------------------------

def figure1_semigroup() -> ConstructionResult:
    """h1 = (z^2 - 1)^2 - 1 (kept as the square of z^2 - 1) and h2 = z^4/64."""
    checks = []
    h1 = Generator("h1", Polynomial([-1.0, 0.0, 1.0]), power=2)
    h2 = Generator("h2", monomial(1.0 / 64.0, 4))
    gens = GeneratorSet([h1, h2])
    cv = sorted(h1.critical_values(), key=lambda z: z.real)
    cv_err = max(abs(cv[0] - (-1.0)), abs(cv[1] - 0.0)) if len(cv) == 2 else np.inf
    _checked(checks, "critical values of h1 are {-1, 0}", cv_err < 1e-12, cv_err)
    verdict = postcritical_bounded_check(gens, depth=12)
    _checked(checks, "postcritical orbits bounded up to depth 12",
             isinstance(verdict, Bounded), float(len(verdict.sample.points)))
    consts = {"degree_h1": h1.degree, "degree_h2": h2.degree,
              "escape_radius": gens.escape_radius}
    return ConstructionResult("figure1", {}, gens, consts, checks)


# ---------------------------------------------------------------------------
# three generators whose minimal component swallows two generator Julia sets
# ---------------------------------------------------------------------------

def _hmin_core(m2: int, m3: Optional[int], checks: list):
    """Shared h1, h2, h3 setup with analytic verification.

    Works in the metric u = |z - eps|, where the third map acts exactly by
    u -> u^2 / r; that makes the annulus checks closed-form.
    """
    if m2 < 2:
        raise ConstructionError("m2 must be at least 2")
    P = 2.0 ** ((2 ** m2 - 1) / 2 ** (m2 + 1))
    r = (P ** 4 + P ** 2) / 2
    eps = (P ** 4 - P ** 2) / 2
    h1 = Generator("h1", Polynomial([0.0, 0.0, -1.0]))
    f2 = monomial(2.0 ** -0.5, 2)
    h2 = _iterate_generator("h2", f2, m2)
    f3 = Polynomial([eps * eps / r + eps, -2 * eps / r, 1.0 / r])

    m_inner = abs(abs(-P ** 2 - eps) - r)
    m_outer = abs(abs(P ** 4 - eps) - r)
    _checked(checks, "-P^2 lies on the circle J(f3)", m_inner <= 1e-10 * r, m_inner)
    _checked(checks, "P^4 lies on the circle J(f3)", m_outer <= 1e-10 * r, m_outer)
    chain = h1.apply_scalar(h1.apply_scalar(np.exp(1j * np.pi / 4) * P))
    m_chain = abs(chain - P ** 4) / P ** 4
    _checked(checks, "h1 twice maps e^{i pi/4} P to P^4", m_chain <= 1e-10, m_chain)

    circle = _circle_points(eps, r)
    img = -circle * circle
    margin_h1 = float(np.min(np.abs(np.abs(img - eps) - r)))
    _checked(checks, "h1 pullback of J(f3) misses J(f3) (4096-point sampling)",
             margin_h1 > 1e-6 * r, margin_h1)

    # u-extent of the two pullback curves of J(f3); A' must surround both
    d2 = 2 ** m2
    scale2 = 2.0 ** ((d2 - 1) / 2.0)
    mods = (scale2 * np.abs(circle)) ** (1.0 / d2)
    angles = (np.angle(circle) + 2 * np.pi * np.arange(d2)[:, None]) / d2
    wavy = mods[None, :] * np.exp(1j * angles)
    u_wavy = np.abs(wavy - eps)
    margin_h2 = float(r - np.max(u_wavy))
    _checked(checks, "h2 pullback of J(f3) stays strictly inside J(f3)",
             margin_h2 > 1e-6 * r, margin_h2, advice="increase m2")
    oval = np.sqrt(-circle + 0j)
    u_oval = np.abs(np.concatenate([oval, -oval]) - eps)
    u_curves = float(max(np.max(u_wavy), np.max(u_oval)))

    gap = r - u_curves
    u_lo = u_curves + 0.05 * gap
    u_hi = u_curves + 0.15 * gap

    def u_forward(u: float, steps: int) -> float:
        for _ in range(steps):
            u = u * u / r
        return u

    def a_prime_ok(m: int) -> bool:
        return eps + u_forward(u_hi, m) < 1.0 - 1e-9

    if m3 is None:
        m3 = _minimal_passing(a_prime_ok)
    margin_a = 1.0 - (eps + u_forward(u_hi, m3))
    _checked(checks, f"h3 = f3^{m3} maps the chosen annulus A' into B(0,1)",
             margin_a > 0, margin_a, advice="increase m3")
    margin_ball = 1.0 - (eps + u_forward(1.0 + eps, m3))
    _checked(checks, "h3 maps B(0,1) into itself", margin_ball > 0, margin_ball,
             advice="increase m3")
    h3 = Generator("h3", f3, m3)
    consts = {
        "P": P, "r": r, "eps": eps, "m2": m2, "m3": m3,
        "u_curves": u_curves, "a_prime": [u_lo, u_hi],
        "s_min": float(np.log(r / u_curves)), "s_max": float(np.log(r / (1 - eps))),
    }
    return (h1, h2, h3), consts


def hmin_not(m2: int = 5, m3: Optional[int] = None) -> ConstructionResult:
    """Three generators where J(h1) and J(h2) share the minimal component.

    P is the positive real pullback of the unit circle under h2 = f2^{m2}
    (closed form: 2^((2^m2 - 1)/2^(m2+1))); the circle J(f3) = C(eps, r) is
    pinned by requiring -P^2 and P^4 to land on it.
    """
    checks = []
    (h1, h2, h3), consts = _hmin_core(m2, m3, checks)
    gens = GeneratorSet([h1, h2, h3])
    consts["escape_radius"] = gens.escape_radius
    params = {"m2": m2, "m3": consts["m3"]}
    return ConstructionResult("hmin_not", params, gens, consts, checks)


# ---------------------------------------------------------------------------
# four generators realizing exactly k Julia components
# ---------------------------------------------------------------------------

def k_components(k: int, m2: int = 5, m3: Optional[int] = None,
                 m4: Optional[int] = None, work_width: int = 512
                 ) -> ConstructionResult:
    """Extend the hmin_not triple by a fourth map so J has k components.

    The construction realizes the annular regions B, h3^-n(B) and the
    internally tangent circle C(eps0, r0) at raster scale (work_width^2 grid)
    and verifies the four conditions the fourth map must satisfy. Layer
    separations shrink like 2^(-l*m3), so for k >= 3 the middle components
    exist analytically but collapse below pixel size on desk-scale grids.
    """
    if k < 2:
        raise ConstructionError(
            "k_components needs k >= 2 (any connected example serves k = 1)")
    checks = []
    (h1, h2, h3), consts = _hmin_core(m2, m3, checks)
    m3 = consts["m3"]
    P, r, eps = consts["P"], consts["r"], consts["eps"]
    ell = k - 2
    s_min, s_max = consts["s_min"], consts["s_max"]
    ratio_ok = s_max / s_min < 2 ** m3
    _checked(checks, "consecutive pullback layers of B are disjoint",
             ratio_ok, 2 ** m3 - s_max / s_min, advice="increase m3")

    grid = GridSpec.square(4.05, work_width)
    dx = grid.dx
    j_f3 = circle_raster(grid, r, center=complex(eps))
    pre1 = preimage_raster(h1, j_f3, grid)
    pre2 = preimage_raster(h2, j_f3, grid)
    hull, _ = polynomial_hull_raster(pre1.union(pre2))
    mesh = grid.mesh()
    b_raster = RasterSet(grid, hull.bits & (np.abs(mesh) >= 1.0 - 0.75 * dx))

    layers = [b_raster]
    for _ in range(ell + 1):
        layers.append(preimage_raster(h3, layers[-1], grid))

    # tangent circle: smallest disk tangent to J(h3) at P^4 covering layer l+1
    p4 = P ** 4
    zz = mesh[layers[ell + 1].bits]
    denom = p4 - zz.real
    if np.any(denom <= dx):
        raise ConstructionError("deep layer reaches the tangency point")
    r0 = float(np.max(np.abs(zz - p4) ** 2 / (2.0 * denom)))
    eps0 = p4 - r0
    _checked(checks, "tangent circle center lies in B(0,1)", abs(eps0) < 1.0,
             1.0 - abs(eps0), advice="increase m3")
    tangent = circle_raster(grid, r0, center=complex(eps0))
    meets = not tangent.intersect(layers[ell + 1].dilate(1)).is_empty()
    _checked(checks, "tangent circle meets the deep pullback layer", meets,
             float(meets))
    f4 = Polynomial([eps0 * eps0 / r0 + eps0, -2 * eps0 / r0, 1.0 / r0])

    # A0 = A' plus the forward h3-images of A'' (annuli in the u-metric)
    u_lo, u_hi = consts["a_prime"]
    layer1_min = r * np.exp(-s_max * 2.0 ** (-m3))
    _checked(checks, "the first pullback of B surrounds A'", layer1_min > u_hi,
             layer1_min - u_hi, advice="increase m3")
    a2_lo = r * np.exp(-s_min * 2.0 ** (-ell * m3))
    a2_hi = r * np.exp(-s_max * 2.0 ** (-(ell + 1) * m3))
    _checked(checks, "an annulus A'' fits between consecutive layers",
             a2_hi > a2_lo, a2_hi - a2_lo, advice="increase m3")
    inset = 0.1 * (a2_hi - a2_lo)
    a2_lo, a2_hi = a2_lo + inset, a2_hi - inset

    def u_forward(u: float, steps: int) -> float:
        for _ in range(steps):
            u = u * u / r
        return u

    a0_intervals = [(u_lo, u_hi)]
    for jj in range(ell + 1):
        a0_intervals.append((u_forward(a2_lo, jj * m3), u_forward(a2_hi, jj * m3)))
    a0_samples = np.concatenate([
        np.concatenate([_circle_points(eps, ulo), _circle_points(eps, 0.5 * (ulo + uhi)),
                        _circle_points(eps, uhi)])
        for ulo, uhi in a0_intervals])

    # jmin of the three-generator semigroup, pulled back l+1 times
    gens3 = GeneratorSet([h1, h2, h3])
    seed = RasterSet(grid, (np.abs(mesh) >= 1.0 - 2 * dx)
                     & (np.abs(mesh) <= p4 + 6 * dx))
    j3 = julia_survivor(gens3, grid, seed, iters=48)
    labels3 = label_components(j3)
    unit_ring = circle_raster(grid, 1.0)
    hit = set(np.unique(labels3.labels[unit_ring.bits])) - {0}
    if len(hit) != 1:
        raise ConstructionError(f"could not identify jmin of the core triple: {hit}")
    jmin3 = labels3.component(hit.pop())
    deep_jmin = jmin3
    for _ in range(ell + 1):
        deep_jmin = preimage_raster(h3, deep_jmin, grid)
    radius4 = max(GeneratorSet([h1, h2, h3, Generator("h4", f4)]).escape_radius,
                  gens3.escape_radius)

    def conditions(m: int):
        h4 = Generator("h4", f4, m)
        img = _safe_abs(h4.apply(a0_samples))
        margin_i = 1.0 - float(np.max(img))
        pre_gamma1 = preimage_raster(h4, unit_ring, grid)
        meets_ii = not pre_gamma1.intersect(deep_jmin.dilate(1)).is_empty()
        margin_iii = _escape_separation(h1, h2, h3, h4, a0_samples, radius4)
        if pre_gamma1.is_empty():
            rel_iv = False
        else:
            rel_iv = surrounding_compare(layers[ell], pre_gamma1).relation is Relation.LESS
        ok = (margin_i > 0) and meets_ii and (margin_iii > 0) and rel_iv
        return ok, (margin_i, meets_ii, margin_iii, rel_iv)

    if m4 is None:
        m4 = _minimal_passing(lambda m: conditions(m)[0])
    ok, (margin_i, meets_ii, margin_iii, rel_iv) = conditions(m4)
    _checked(checks, f"(i) h4 = f4^{m4} maps A0 into B(0,1)", margin_i > 0,
             margin_i, advice="increase m4")
    _checked(checks, "(ii) h4 pullback of the unit circle meets the deep jmin layer",
             meets_ii, float(meets_ii), advice="increase m4")
    _checked(checks, "(iii) h4 separates forward images of A0 beyond the escape radius",
             margin_iii > 0, margin_iii, advice="increase m4")
    _checked(checks, "(iv) h4 pullback of the unit circle surrounds layer l of B",
             rel_iv, float(rel_iv), advice="increase m4")

    h4 = Generator("h4", f4, m4)
    gens = GeneratorSet([h1, h2, h3, h4])
    consts.update({
        "ell": ell, "m4": m4, "eps0": eps0, "r0": r0,
        "a_doubleprime": [float(a2_lo), float(a2_hi)],
        "escape_radius": gens.escape_radius,
        "layer_gap": float(r * (np.exp(-s_max * 2.0 ** (-(ell + 1) * m3))
                                - np.exp(-s_min * 2.0 ** (-max(ell, 1) * m3)))),
    })
    params = {"k": k, "m2": m2, "m3": m3, "m4": m4, "work_width": work_width}
    return ConstructionResult("k_components", params, gens, consts, checks)


def _safe_abs(z: np.ndarray) -> np.ndarray:
    """Modulus with overflow mapped to +inf instead of nan."""
    with np.errstate(over="ignore", invalid="ignore"):
        m = np.abs(z)
    return np.where(np.isfinite(m), m, np.inf)


def _escape_separation(h1, h2, h3, h4, a0_samples: np.ndarray,
                       radius: float) -> float:
    """Min excess of |h4| over the escape radius along forward images of A0.

    Explores words over {h1, h2, h3} applied after h1 or h2, pruning any
    point that already left the escape disk (h4 keeps it outside). Every
    orbit escapes because the region outside K(h3) is forward invariant
    and expanding here, so the search terminates.
    """
    pts = np.concatenate([h1.apply(a0_samples), h2.apply(a0_samples)])
    margin = float(np.min(_safe_abs(h4.apply(pts)))) - radius
    budget = 2_000_000
    seen = 0
    frontier = pts[_safe_abs(pts) <= radius]
    depth = 0
    while frontier.size:
        seen += frontier.size
        depth += 1
        if seen > budget or depth > 64:
            raise ConstructionError("escape-separation search exceeded its budget")
        nxt = []
        for gen in (h1, h2, h3):
            img = gen.apply(frontier)
            margin = min(margin, float(np.min(_safe_abs(h4.apply(img)))) - radius)
            nxt.append(img[_safe_abs(img) <= radius])
        frontier = np.concatenate(nxt)
    return float(margin)


# ---------------------------------------------------------------------------
# hyperbolic pair whose join fails to be hyperbolic
# ---------------------------------------------------------------------------

def nothyp_pair(c: float = 0.1, m1: int = 2, m2: int = 2) -> ConstructionResult:
    """f1 = z^2 + c with small c > 0, f2 with the circular Julia set through c.

    The attracting fixed point z0 of f1 centers J(f2) = C(z0, |c - z0|), so
    the critical value c of f1 lies on J(h2): the pair generates a
    postcritically bounded semigroup that is not hyperbolic.
    """
    if not (0 < c < 0.25):
        raise ConstructionError("need 0 < c < 1/4 so f1 has an attracting fixed point")
    if m1 < 1 or m2 < 1:
        raise ConstructionError("iterate counts must be at least 1")
    checks = []
    z0 = (1.0 - np.sqrt(1.0 - 4.0 * c)) / 2.0
    rho = abs(c - z0)
    f1 = Polynomial([c, 0.0, 1.0])
    f2 = Polynomial([z0 * z0 / (c - z0) + z0, -2 * z0 / (c - z0), 1.0 / (c - z0)])
    h1 = Generator("h1", f1, m1)
    h2 = Generator("h2", f2, m2)
    ball = _circle_points(complex(z0), rho * (1 - 1e-9))
    for gen in (h1, h2):
        img = np.array([gen.apply_scalar(z) for z in ball])
        margin = rho - float(np.max(np.abs(img - z0)))
        _checked(checks, f"{gen.name} maps the ball B(z0, |c - z0|) into itself",
                 margin > 0, margin, advice="increase m1/m2")
    witness = abs(abs(c - z0) - rho)
    _checked(checks, "critical value c lies on J(h2)", witness <= 1e-12, witness)
    gens = GeneratorSet([h1, h2])
    consts = {"z0": float(z0), "radius": float(rho), "c": float(c),
              "witness": float(c), "escape_radius": gens.escape_radius}
    params = {"c": c, "m1": m1, "m2": m2}
    return ConstructionResult("nothyp", params, gens, consts, checks)


BUILDERS = {
    "cantor": cantor_circles,
    "figure1": figure1_semigroup,
    "hmin_not": hmin_not,
    "k_components": k_components,
    "nothyp": nothyp_pair,
}
