"""Polynomial arithmetic, root finding, and lazy word-map evaluation.

Polynomials are stored as ascending complex coefficient tuples. Word maps are
never expanded to coefficient form above degree 64; evaluation is chained
(coefficient magnitudes of composed maps overflow doubles quickly).
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence, Union

import numpy as np

from .errors import DynamicsError, InvalidIndexError, RootSolveError

DK_MAX_ITER = 200
CLUSTER_RTOL = 1e-7
COMPOSE_DEGREE_CAP = 64

# start circle rotation that breaks root symmetry (irrational fraction of a turn)
_DK_TWIST = 0.5 * (np.sqrt(5.0) - 1.0)


@dataclass(frozen=True)
class Polynomial:
    """Complex polynomial a_0 + a_1 z + ... + a_d z^d, trailing zeros trimmed."""

    coeffs: tuple

    def __init__(self, coeffs: Iterable[complex]):
        cs = [complex(c) for c in coeffs]
        while len(cs) > 1 and cs[-1] == 0:
            cs.pop()
        object.__setattr__(self, "coeffs", tuple(cs))

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def leading(self) -> complex:
        return self.coeffs[-1]

    def __call__(self, z):
        """Horner evaluation; accepts scalars or numpy arrays."""
        z = np.asarray(z, dtype=complex) if not np.isscalar(z) else z
        acc = self.coeffs[-1]
        if np.isscalar(z):
            for c in reversed(self.coeffs[:-1]):
                acc = acc * z + c
            return acc
        acc = np.full_like(z, acc)
        for c in reversed(self.coeffs[:-1]):
            acc *= z
            acc += c
        return acc

    def derivative(self) -> "Polynomial":
        if self.degree == 0:
            return Polynomial([0.0])
        return Polynomial([k * c for k, c in enumerate(self.coeffs)][1:])

    def compose(self, inner: "Polynomial") -> "Polynomial":
        """Coefficient form of self(inner(z)). Refuses degrees above the cap."""
        if self.degree * inner.degree > COMPOSE_DEGREE_CAP:
            raise DynamicsError(
                f"composed degree {self.degree * inner.degree} exceeds "
                f"expansion cap {COMPOSE_DEGREE_CAP}; keep the map lazy")
        acc = np.array([self.coeffs[-1]], dtype=complex)
        inner_c = np.array(inner.coeffs, dtype=complex)
        for c in reversed(self.coeffs[:-1]):
            acc = np.polymul(acc[::-1], inner_c[::-1])[::-1]
            acc[0] += c
        return Polynomial(acc)

    def is_binomial(self) -> bool:
        """True for maps of the form a z^d + c (closed-form invertible)."""
        return all(c == 0 for c in self.coeffs[1:-1])

    # JSON external form: [[re, im], ...] ascending
    def to_json(self):
        return [[c.real, c.imag] for c in self.coeffs]

    @staticmethod
    def from_json(data) -> "Polynomial":
        return Polynomial([complex(re, im) for re, im in data])


def monomial(a: complex, d: int) -> Polynomial:
    return Polynomial([0.0] * d + [a])


def monomial_iterate(a: complex, k: int, m: int) -> Polynomial:
    """Closed form of (a z^k) composed with itself m times: a' z^(k^m)."""
    d = k ** m
    if d > COMPOSE_DEGREE_CAP:
        raise DynamicsError(f"monomial iterate degree {d} exceeds cap")
    exponent = (d - 1) // (k - 1) if k > 1 else m
    return monomial(a ** exponent, d)


# ---------------------------------------------------------------------------
# root finding: Durand-Kerner simultaneous iteration + Newton polish
# ---------------------------------------------------------------------------

def _dk_roots(coeffs: np.ndarray) -> np.ndarray:
    """All roots of the ascending-coefficient polynomial via Durand-Kerner.

    Starts on a circle of radius 1 + max |a_i / a_d| rotated off the real axis
    so symmetric root sets do not trap the iteration.
    """
    d = len(coeffs) - 1
    if d == 1:
        return np.array([-coeffs[0] / coeffs[1]])
    mon = coeffs / coeffs[-1]
    radius = 1.0 + np.max(np.abs(mon[:-1]))
    angles = 2 * np.pi * (np.arange(d) + _DK_TWIST) / d
    z = radius * np.exp(1j * angles)
    for _ in range(DK_MAX_ITER):
        p = np.polyval(mon[::-1], z)
        diff = z[:, None] - z[None, :]
        np.fill_diagonal(diff, 1.0)
        denom = diff.prod(axis=1)
        step = p / denom
        z = z - step
        if np.max(np.abs(step)) < 1e-14 * max(1.0, radius):
            break
    return z


def _newton_polish(coeffs: np.ndarray, roots: np.ndarray, iters: int = 3) -> np.ndarray:
    dcoeffs = np.array([k * c for k, c in enumerate(coeffs)][1:])
    z = roots
    for _ in range(iters):
        p = np.polyval(coeffs[::-1], z)
        dp = np.polyval(dcoeffs[::-1], z)
        safe = np.abs(dp) > 0
        z = np.where(safe, z - p / np.where(safe, dp, 1.0), z)
    return z


def all_roots(p: Polynomial) -> np.ndarray:
    """Roots of p with multiplicity, Newton polished."""
    if p.degree < 1:
        raise DynamicsError("cannot solve a constant polynomial")
    coeffs = np.array(p.coeffs, dtype=complex)
    roots = _dk_roots(coeffs)
    return _newton_polish(coeffs, roots)


def batched_roots(coeffs: Sequence[complex], w: np.ndarray) -> np.ndarray:
    """Roots of p(z) = w_i for a batch of right-hand sides; shape (len(w), d).

    Same Durand-Kerner scheme as the scalar path, vectorized over the batch.
    """
    w = np.asarray(w, dtype=complex)
    base = np.array(coeffs, dtype=complex)
    d = len(base) - 1
    n = len(w)
    shifted = np.broadcast_to(base / base[-1], (n, d + 1)).copy()
    shifted[:, 0] -= w / base[-1]
    radius = 1.0 + np.max(np.abs(shifted[:, :-1]), axis=1)
    angles = 2 * np.pi * (np.arange(d) + _DK_TWIST) / d
    z = radius[:, None] * np.exp(1j * angles)[None, :]
    for _ in range(80):
        p = np.zeros_like(z)
        p += shifted[:, -1, None]
        for k in range(d - 1, -1, -1):
            p = p * z + shifted[:, k, None]
        diff = z[:, :, None] - z[:, None, :]
        idx = np.arange(d)
        diff[:, idx, idx] = 1.0
        denom = diff.prod(axis=2)
        step = p / denom
        z = z - step
        if np.max(np.abs(step)) < 1e-13 * max(1.0, np.max(radius)):
            break
    # one Newton pass against the exact (unshifted) target
    deriv = np.array([k * c for k, c in enumerate(base)][1:])
    for _ in range(2):
        pv = _horner_batch(base, z) - w[:, None]
        dv = _horner_batch(deriv, z)
        safe = np.abs(dv) > 0
        z = np.where(safe, z - pv / np.where(safe, dv, 1.0), z)
    return z


def _horner_batch(coeffs: np.ndarray, z: np.ndarray) -> np.ndarray:
    acc = np.full_like(z, coeffs[-1])
    for c in coeffs[-2::-1]:
        acc = acc * z + c
    return acc


def _cluster(points: np.ndarray, rtol: float = CLUSTER_RTOL) -> list:
    """Collapse near-duplicates; tolerance is relative to point magnitude."""
    out = []
    for z in points:
        tol = rtol * max(1.0, abs(z))
        for i, c in enumerate(out):
            if abs(z - c[0]) <= tol:
                out[i] = ((c[0] * c[1] + z) / (c[1] + 1), c[1] + 1)
                break
        else:
            out.append((z, 1))
    return [c[0] for c in out]


# ---------------------------------------------------------------------------
# spec operations
# ---------------------------------------------------------------------------

def critical_points(p: Polynomial) -> list:
    """Roots of p' as a clustered set (multiplicity collapsed)."""
    if p.degree < 2:
        raise DynamicsError("critical points need degree >= 2")
    dp = p.derivative()
    roots = all_roots(dp)
    lead = abs(dp.leading)
    resid = np.abs(dp(roots))
    scale = np.maximum(1.0, lead * np.abs(roots) ** max(dp.degree - 1, 0))
    worst = float(np.max(resid / np.maximum(scale, 1e-300)))
    if worst > 1e-10:
        raise RootSolveError("critical point solver did not converge", worst)
    return _cluster(roots)


def preimages(p: Polynomial, w: complex) -> list:
    """The d solutions of p(z) = w, with multiplicity, Newton polished."""
    if p.degree < 1:
        raise DynamicsError("preimages need degree >= 1")
    shifted = Polynomial([p.coeffs[0] - w] + list(p.coeffs[1:]))
    roots = all_roots(shifted)
    scale = max(1.0, abs(w), max(abs(c) for c in p.coeffs))
    resid = np.abs(p(roots) - w)
    worst = float(np.max(resid))
    if worst > 1e-9 * scale:
        raise RootSolveError("preimage solver did not converge", worst / scale)
    return list(roots)


def leading_capacity(p: Polynomial) -> float:
    """|a_d|^(-1/(d-1)); the radius of the invariant circle for a z^d maps."""
    if p.degree < 2:
        raise DynamicsError("leading_capacity needs degree >= 2")
    return float(abs(p.leading) ** (-1.0 / (p.degree - 1)))


# ---------------------------------------------------------------------------
# words over a generator family
# ---------------------------------------------------------------------------

Word = tuple  # sequence of generator indices, first index applied first


@dataclass(frozen=True)
class Value:
    value: complex


@dataclass(frozen=True)
class Escaped:
    step: int


def validate_word(word: Sequence[int], count: int) -> Word:
    if len(word) == 0:
        raise DynamicsError("words must be nonempty")
    for i in word:
        if not (0 <= int(i) < count):
            raise InvalidIndexError(i, count)
    return tuple(int(i) for i in word)


def eval_word(gens, word: Sequence[int], z: complex,
              escape_radius: float) -> Union[Value, Escaped]:
    """Chained evaluation of h_{i_n} o ... o h_{i_1} at z.

    Short-circuits with Escaped(k) the first time an intermediate value
    exceeds escape_radius in modulus (k counts applied generators, 1-based).
    """
    if escape_radius < 1:
        raise DynamicsError("escape_radius must be at least 1")
    word = validate_word(word, len(gens.generators))
    value = complex(z)
    for step, idx in enumerate(word, start=1):
        value = gens.generators[idx].apply_scalar(value)
        if abs(value) > escape_radius:
            return Escaped(step)
    return Value(value)
