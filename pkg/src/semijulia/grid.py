"""Pixel grids over a complex-plane window, bit rasters, and PGM I/O.

Conventions: pixels are square, row 0 is the top of the window (largest
imaginary part), and the pixel at (row, col) has center

    xmin + (col + 0.5) * dx  +  1j * (ymax - (row + 0.5) * dx).
"""
from __future__ import annotations

import re
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .errors import RasterError

_SQUARE_TOL = 1e-9


@dataclass(frozen=True)
class GridSpec:
    xmin: float
    xmax: float
    ymin: float
    ymax: float
    width: int
    height: int

    def __post_init__(self):
        if self.width <= 0 or self.height <= 0:
            raise RasterError("grid dimensions must be positive")
        if self.xmax <= self.xmin or self.ymax <= self.ymin:
            raise RasterError("grid window must have positive extent")
        dx = (self.xmax - self.xmin) / self.width
        dy = (self.ymax - self.ymin) / self.height
        if abs(dx - dy) > _SQUARE_TOL * max(dx, dy):
            raise RasterError(f"pixels are not square: dx={dx!r} dy={dy!r}")

    @property
    def dx(self) -> float:
        return (self.xmax - self.xmin) / self.width

    @property
    def shape(self) -> tuple[int, int]:
        return (self.height, self.width)

    @staticmethod
    def square(half_extent: float, width: int, center: complex = 0j) -> "GridSpec":
        """Square window [-h, h]^2 around `center` with `width` pixels per side."""
        cx, cy = center.real, center.imag
        return GridSpec(cx - half_extent, cx + half_extent,
                        cy - half_extent, cy + half_extent, width, width)

    @staticmethod
    def from_window(xmin: float, ymin: float, xmax: float, ymax: float,
                    width: int) -> "GridSpec":
        """Derive the height from the square-pixel constraint.

        ymax is nudged (by less than one pixel) so the constraint holds exactly.
        """
        dx = (xmax - xmin) / width
        height = max(1, round((ymax - ymin) / dx))
        return GridSpec(xmin, xmax, ymin, ymin + height * dx, width, height)

    def mesh(self) -> np.ndarray:
        """Complex array (height, width) of pixel centers."""
        dx = self.dx
        xs = self.xmin + (np.arange(self.width) + 0.5) * dx
        ys = self.ymax - (np.arange(self.height) + 0.5) * dx
        return xs[None, :] + 1j * ys[:, None]

    def pixel_center(self, row: int, col: int) -> complex:
        dx = self.dx
        return complex(self.xmin + (col + 0.5) * dx, self.ymax - (row + 0.5) * dx)

    def to_index(self, z: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Map complex values to (row, col, valid). Invalid entries get (0, 0)."""
        z = np.asarray(z)
        dx = self.dx
        with np.errstate(invalid="ignore"):
            finite = np.isfinite(z.real) & np.isfinite(z.imag)
            inside = (finite & (z.real >= self.xmin) & (z.real <= self.xmax)
                      & (z.imag >= self.ymin) & (z.imag <= self.ymax))
            x = np.where(inside, z.real, self.xmin)
            y = np.where(inside, z.imag, self.ymax)
            col = np.floor((x - self.xmin) / dx).astype(np.int64)
            row = np.floor((self.ymax - y) / dx).astype(np.int64)
        valid = inside & (col >= 0) & (col < self.width) & (row >= 0) & (row < self.height)
        col = np.where(valid, col, 0)
        row = np.where(valid, row, 0)
        return row, col, valid

    def covers_disk(self, radius: float, center: complex = 0j) -> bool:
        return (self.xmin <= center.real - radius and self.xmax >= center.real + radius
                and self.ymin <= center.imag - radius and self.ymax >= center.imag + radius)


@dataclass
class RasterSet:
    """Bit-per-pixel membership mask over a GridSpec."""

    grid: GridSpec
    bits: np.ndarray

    def __post_init__(self):
        self.bits = np.asarray(self.bits, dtype=bool)
        if self.bits.shape != self.grid.shape:
            raise RasterError(f"bits shape {self.bits.shape} != grid shape {self.grid.shape}")

    @staticmethod
    def empty(grid: GridSpec) -> "RasterSet":
        return RasterSet(grid, np.zeros(grid.shape, dtype=bool))

    @staticmethod
    def full(grid: GridSpec) -> "RasterSet":
        return RasterSet(grid, np.ones(grid.shape, dtype=bool))

    @property
    def count(self) -> int:
        return int(self.bits.sum())

    def is_empty(self) -> bool:
        return not self.bits.any()

    def same_grid(self, other: "RasterSet") -> bool:
        return self.grid == other.grid

    def dilate(self, px: int = 1) -> "RasterSet":
        if px <= 0:
            return RasterSet(self.grid, self.bits.copy())
        out = ndimage.binary_dilation(self.bits, structure=np.ones((3, 3), bool),
                                      iterations=px)
        return RasterSet(self.grid, out)

    def erode(self, px: int = 1) -> "RasterSet":
        if px <= 0:
            return RasterSet(self.grid, self.bits.copy())
        out = ndimage.binary_erosion(self.bits, structure=np.ones((3, 3), bool),
                                     iterations=px, border_value=1)
        return RasterSet(self.grid, out)

    def boundary(self) -> "RasterSet":
        """Member pixels with at least one 4-neighbor outside the set.

        Pixels beyond the window border count as non-members.
        """
        b = self.bits
        inner = np.zeros_like(b)
        inner[1:-1, 1:-1] = (b[1:-1, 1:-1] & b[:-2, 1:-1] & b[2:, 1:-1]
                             & b[1:-1, :-2] & b[1:-1, 2:])
        return RasterSet(self.grid, b & ~inner)

    def union(self, other: "RasterSet") -> "RasterSet":
        self._require_same_grid(other)
        return RasterSet(self.grid, self.bits | other.bits)

    def intersect(self, other: "RasterSet") -> "RasterSet":
        self._require_same_grid(other)
        return RasterSet(self.grid, self.bits & other.bits)

    def contains(self, other: "RasterSet", slack_px: int = 0) -> bool:
        """True if every pixel of `other` lies in this set dilated by slack_px."""
        self._require_same_grid(other)
        big = self.dilate(slack_px).bits if slack_px else self.bits
        return bool(np.all(big[other.bits]))

    def _require_same_grid(self, other: "RasterSet"):
        if self.grid != other.grid:
            raise RasterError("rasters live on different grids")

    # ---- PGM external interface -------------------------------------------

    def to_pgm_bytes(self) -> bytes:
        g = self.grid
        header = (f"P5\n# grid {g.xmin!r} {g.xmax!r} {g.ymin!r} {g.ymax!r}\n"
                  f"{g.width} {g.height}\n255\n").encode("ascii")
        data = np.where(self.bits, 255, 0).astype(np.uint8)
        return header + data.tobytes()

    def write_pgm(self, path):
        with open(path, "wb") as fh:
            fh.write(self.to_pgm_bytes())

    @staticmethod
    def from_pgm_bytes(raw: bytes) -> "RasterSet":
        return _parse_pgm(raw)

    @staticmethod
    def read_pgm(path) -> "RasterSet":
        with open(path, "rb") as fh:
            return _parse_pgm(fh.read())


def _parse_pgm(raw: bytes) -> RasterSet:
    if not raw.startswith(b"P5"):
        raise RasterError("not a binary PGM (P5) file")
    pos = 2
    fields = []
    grid_comment = None
    while len(fields) < 3:
        m = re.compile(rb"\s+").match(raw, pos)
        if m:
            pos = m.end()
        if pos < len(raw) and raw[pos:pos + 1] == b"#":
            end = raw.index(b"\n", pos)
            comment = raw[pos + 1:end].strip()
            if comment.startswith(b"grid "):
                grid_comment = comment.split()[1:]
            pos = end + 1
            continue
        m = re.compile(rb"\S+").match(raw, pos)
        if not m:
            raise RasterError("truncated PGM header")
        fields.append(m.group())
        pos = m.end()
    width, height, maxval = (int(f) for f in fields)
    if maxval != 255:
        raise RasterError(f"unsupported PGM maxval {maxval}")
    pos += 1  # single whitespace byte after maxval
    data = np.frombuffer(raw, dtype=np.uint8, count=width * height, offset=pos)
    bits = (data.reshape(height, width) > 127)
    if grid_comment is None:
        grid = GridSpec(0.0, float(width), 0.0, float(height), width, height)
    else:
        xmin, xmax, ymin, ymax = (float(v) for v in grid_comment)
        grid = GridSpec(xmin, xmax, ymin, ymax, width, height)
    return RasterSet(grid, bits)


def disk_raster(grid: GridSpec, radius: float, center: complex = 0j) -> RasterSet:
    z = grid.mesh()
    return RasterSet(grid, np.abs(z - center) <= radius)


def annulus_raster(grid: GridSpec, rmin: float, rmax: float,
                   center: complex = 0j) -> RasterSet:
    z = grid.mesh()
    m = np.abs(z - center)
    return RasterSet(grid, (m >= rmin) & (m <= rmax))


def circle_raster(grid: GridSpec, radius: float, center: complex = 0j) -> RasterSet:
    """Thin closed ring: pixels whose center is within ~half a pixel of the circle."""
    z = grid.mesh()
    tol = grid.dx * 0.75
    return RasterSet(grid, np.abs(np.abs(z - center) - radius) <= tol)
