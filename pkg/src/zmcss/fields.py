"""Discrete fields on a truncated plane and on a radial line.

The plane R^2 is replaced by the square [-L, L]^2 carrying n x n cell-centred
samples; everything outside the square is taken to be zero.  Array axis 0 is
the x1 direction and axis 1 is x2 (``indexing="ij"``).

Derivatives use a fourth-order difference located on cell faces,

    (D u)_{i+1/2} = (u_{i-1} - 27 u_i + 27 u_{i+1} - u_{i+2}) / (24 h),

applied to the zero-extended field.  The discrete Laplacian used by the
functional is ``-D^T D``, so ``<-Lap u, u> = |D u|^2`` holds to round-off.
"""
from __future__ import annotations

import io
import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

__all__ = [
    "Grid2D",
    "Field2D",
    "RadialGrid",
    "RadialField",
    "NormPack",
    "face_diff",
    "face_diff_adjoint",
    "neg_laplacian",
    "integrate",
    "inner",
    "gradient_sq_norm",
    "lp_norm",
    "e_norm",
    "gn_ratio",
    "strauss_ratio",
    "boundary_mass_fraction",
    "radial_integrate",
    "write_field_csv",
    "read_field_csv",
    "field_to_csv_text",
    "field_from_csv_text",
]

# fraction of |u|^p mass allowed in the outer 10% frame before warning
BOUNDARY_MASS_WARN = 1e-6


def _check_p(p):
    if not (1.0 < p < 2.0):
        raise ValueError(f"p must lie in (1,2), got {p!r}")


@dataclass(frozen=True)
class Grid2D:
    """Uniform cell-centred grid on [-L, L]^2."""

    half_width: float = 12.0
    n: int = 256

    def __post_init__(self):
        if not (self.half_width > 0 and math.isfinite(self.half_width)):
            raise ValueError(f"half_width must be positive, got {self.half_width!r}")
        n = int(self.n)
        if n != self.n or n < 8 or n & (n - 1):
            raise ValueError(f"n must be a power of two >= 8, got {self.n!r}")
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "half_width", float(self.half_width))

    @property
    def spacing(self) -> float:
        return 2.0 * self.half_width / self.n

    @property
    def cell_area(self) -> float:
        return self.spacing**2

    def axis(self) -> np.ndarray:
        h = self.spacing
        return -self.half_width + h * (np.arange(self.n) + 0.5)

    def mesh(self):
        x = self.axis()
        return np.meshgrid(x, x, indexing="ij")

    def radius(self, center=(0.0, 0.0)) -> np.ndarray:
        x1, x2 = self.mesh()
        return np.hypot(x1 - center[0], x2 - center[1])

    def refined(self, factor: int = 2) -> "Grid2D":
        return Grid2D(self.half_width, self.n * factor)


@dataclass(frozen=True, eq=False)
class Field2D:
    """Real samples on a :class:`Grid2D`.  The value array is read-only."""

    grid: Grid2D
    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=float, copy=True)
        n = self.grid.n
        if v.shape != (n, n):
            raise ValueError(f"values must have shape {(n, n)}, got {v.shape}")
        if not np.all(np.isfinite(v)):
            raise ValueError("field values must be finite")
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    @classmethod
    def from_function(cls, grid: Grid2D, fn) -> "Field2D":
        x1, x2 = grid.mesh()
        return cls(grid, fn(x1, x2))

    @classmethod
    def zeros(cls, grid: Grid2D) -> "Field2D":
        return cls(grid, np.zeros((grid.n, grid.n)))

    @classmethod
    def gaussian(cls, grid: Grid2D, amplitude=1.0, width=1.0, center=(0.0, 0.0)) -> "Field2D":
        r2 = grid.radius(center) ** 2
        return cls(grid, amplitude * np.exp(-r2 / (2.0 * width**2)))

    def scaled(self, s: float) -> "Field2D":
        return Field2D(self.grid, s * self.values)

    def with_values(self, values) -> "Field2D":
        return Field2D(self.grid, values)

    def same_grid(self, other: "Field2D") -> bool:
        return self.grid == other.grid

    def __repr__(self):
        return f"Field2D(grid={self.grid!r}, max|u|={np.abs(self.values).max():.6g})"


@dataclass(frozen=True)
class RadialGrid:
    """Nodes r_i = i * r_max / m, i = 1..m (the origin is excluded)."""

    r_max: float
    m: int

    def __post_init__(self):
        if not self.r_max > 0:
            raise ValueError("r_max must be positive")
        if int(self.m) != self.m or self.m < 2:
            raise ValueError("m must be an integer >= 2")

    @property
    def spacing(self) -> float:
        return self.r_max / self.m

    def nodes(self) -> np.ndarray:
        return self.spacing * np.arange(1, self.m + 1)


@dataclass(frozen=True, eq=False)
class RadialField:
    grid: RadialGrid
    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=float, copy=True)
        if v.shape != (self.grid.m,):
            raise ValueError(f"values must have shape {(self.grid.m,)}, got {v.shape}")
        if not np.all(np.isfinite(v)):
            raise ValueError("radial values must be finite")
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    @classmethod
    def from_function(cls, grid: RadialGrid, fn) -> "RadialField":
        return cls(grid, fn(grid.nodes()))

    @property
    def r(self) -> np.ndarray:
        return self.grid.nodes()


@dataclass(frozen=True)
class NormPack:
    grad_l2_sq: float
    lp_norm_p: float
    e_norm: float
    p: float = field(default=1.5)


# ---------------------------------------------------------------------------
# difference operators

def face_diff(values: np.ndarray, axis: int, h: float) -> np.ndarray:
    """Fourth-order face difference of the zero-extended array along ``axis``.

    Returns the n + 3 face values that can be nonzero; all other faces vanish.
    """
    v = np.moveaxis(np.asarray(values, dtype=float), axis, 0)
    n = v.shape[0]
    pad = [(3, 3)] + [(0, 0)] * (v.ndim - 1)
    P = np.pad(v, pad)
    out = (P[0:n + 3] - 27.0 * P[1:n + 4] + 27.0 * P[2:n + 5] - P[3:n + 6]) / (24.0 * h)
    return np.moveaxis(out, 0, axis)


def face_diff_adjoint(faces: np.ndarray, axis: int, h: float) -> np.ndarray:
    """Transpose of :func:`face_diff` (maps n + 3 faces back to n cells)."""
    w = np.moveaxis(np.asarray(faces, dtype=float), axis, 0)
    n = w.shape[0] - 3
    Q = np.zeros((n + 6,) + w.shape[1:])
    Q[0:n + 3] += w
    Q[1:n + 4] -= 27.0 * w
    Q[2:n + 5] += 27.0 * w
    Q[3:n + 6] -= w
    return np.moveaxis(Q[3:n + 3] / (24.0 * h), 0, axis)


def neg_laplacian(values: np.ndarray, h: float) -> np.ndarray:
    """``D_1^T D_1 u + D_2^T D_2 u``, the operator paired with the Dirichlet energy."""
    return (face_diff_adjoint(face_diff(values, 0, h), 0, h)
            + face_diff_adjoint(face_diff(values, 1, h), 1, h))


# ---------------------------------------------------------------------------
# quadrature and norms

def integrate(values, grid: Grid2D) -> float:
    """Midpoint rule over the cells."""
    return float(np.sum(values) * grid.cell_area)


def inner(u: Field2D, v: Field2D) -> float:
    if not u.same_grid(v):
        raise ValueError("fields live on different grids")
    return integrate(u.values * v.values, u.grid)


def gradient_sq_norm(u: Field2D) -> float:
    """|grad u|_2^2 of the zero-extended field."""
    h = u.grid.spacing
    d1 = face_diff(u.values, 0, h)
    d2 = face_diff(u.values, 1, h)
    return float((np.sum(d1 * d1) + np.sum(d2 * d2)) * h * h)


def _lp_p(u: Field2D, p: float) -> float:
    return integrate(np.abs(u.values) ** p, u.grid)


def lp_norm(u: Field2D, p: float) -> float:
    _check_p(p)
    return _lp_p(u, p) ** (1.0 / p)


def e_norm(u: Field2D, p: float = 1.5) -> NormPack:
    """Components of ||u|| = sqrt(|grad u|_2^2 + |u|_p^2)."""
    _check_p(p)
    g = gradient_sq_norm(u)
    lpp = _lp_p(u, p)
    return NormPack(g, lpp, math.sqrt(g + lpp ** (2.0 / p)), p)


def gn_ratio(u: Field2D, p: float, s: float) -> float:
    """|u|_s^s / (|grad u|_2^{s-p} |u|_p^p), the Gagliardo-Nirenberg quotient."""
    _check_p(p)
    if not s > p:
        raise ValueError("s must exceed p")
    g = gradient_sq_norm(u)
    lpp = _lp_p(u, p)
    if g == 0.0 or lpp == 0.0:
        raise ZeroDivisionError("gn_ratio undefined for the zero field")
    return _lp_p(u, s) / (g ** ((s - p) / 2.0) * lpp)


def strauss_ratio(u: Field2D, p: float) -> float:
    """max_x |u(x)| |x|^{2/p} / |u|_p, a sampled radial-decay constant."""
    _check_p(p)
    norm = lp_norm(u, p)
    if norm == 0.0:
        raise ZeroDivisionError("strauss_ratio undefined for the zero field")
    r = u.grid.radius()
    return float(np.max(np.abs(u.values) * r ** (2.0 / p)) / norm)


def boundary_mass_fraction(u: Field2D, p: float = 1.5, warn: bool = True) -> float:
    """Share of |u|^p mass lying in the outer 10% frame of the square."""
    a = np.abs(u.values) ** p
    total = a.sum()
    if total == 0.0:
        return 0.0
    x1, x2 = u.grid.mesh()
    edge = 0.9 * u.grid.half_width
    frac = float(a[(np.abs(x1) > edge) | (np.abs(x2) > edge)].sum() / total)
    if warn and frac > BOUNDARY_MASS_WARN:
        warnings.warn(f"boundary mass fraction {frac:.3e} exceeds {BOUNDARY_MASS_WARN:g}; "
                      "enlarge the domain", RuntimeWarning, stacklevel=2)
    return frac


def radial_integrate(values, grid: RadialGrid) -> float:
    """Trapezoid rule for ∫ g(|x|) dx = 2π ∫_0^{r_max} g(r) r dr.

    The origin contributes a zero node since the integrand carries the factor r.
    """
    r = np.concatenate(([0.0], grid.nodes()))
    g = np.concatenate(([0.0], np.asarray(values, dtype=float) * grid.nodes()))
    return float(2.0 * np.pi * np.trapezoid(g, r))


# ---------------------------------------------------------------------------
# CSV dump

def field_to_csv_text(u: Field2D) -> str:
    buf = io.StringIO()
    buf.write(f"# grid L={u.grid.half_width!r} n={u.grid.n}\n")
    np.savetxt(buf, u.values.reshape(-1), fmt="%.16e")
    return buf.getvalue()


def field_from_csv_text(text: str) -> Field2D:
    lines = text.splitlines()
    if not lines or not lines[0].startswith("# grid"):
        raise ValueError("missing '# grid L=<L> n=<n>' header")
    meta = dict(tok.split("=", 1) for tok in lines[0][len("# grid"):].split())
    try:
        grid = Grid2D(float(meta["L"]), int(meta["n"]))
    except KeyError as exc:
        raise ValueError(f"header lacks {exc.args[0]}") from None
    vals = np.array([float(s) for s in lines[1:] if s.strip()])
    if vals.size != grid.n**2:
        raise ValueError(f"expected {grid.n**2} values, found {vals.size}")
    return Field2D(grid, vals.reshape(grid.n, grid.n))


def write_field_csv(u: Field2D, path) -> None:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(field_to_csv_text(u))
    except OSError as exc:
        raise OSError(f"cannot write field dump to {path}: {exc}") from exc


def read_field_csv(path) -> Field2D:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise OSError(f"cannot read field dump {path}: {exc}") from exc
    return field_from_csv_text(text)
