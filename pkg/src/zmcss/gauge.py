"""Chern-Simons gauge fields of a real source u.

With Gamma = log|x| / (2 pi) and the odd kernels

    G1(x) = x1 / (2 pi |x|^2),   G2(x) = x2 / (2 pi |x|^2),

the fields are

    A1 = G2 * (u^2/2),   A2 = -G1 * (u^2/2),   A0 = G1 * (A2 u^2) - G2 * (A1 u^2),

which satisfy d1 A2 - d2 A1 = -u^2/2, d1 A1 + d2 A2 = 0, d1 A0 = A2 u^2 and
d2 A0 = -A1 u^2.  A1 is taken from its convolution form; the alternative
A1 = -G2 * (u^2/2) leaves the energy unchanged but violates the curl
constraint, which the residual checks would flag.  Convolutions are linear (zero padded to 2n x 2n) with the
kernels sampled at cell-centre offsets and set to zero at the origin.

Because the sampled kernels stay exactly odd, the discrete A0 is precisely the
chain-rule term of the discrete Chern-Simons energy and the identity
int A0 u^2 = 2 int (A1^2 + A2^2) u^2 holds to round-off.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import fft as sfft
from scipy.integrate import cumulative_trapezoid

from .fields import Field2D, Grid2D, RadialField, integrate, radial_integrate

__all__ = [
    "GaugeFields",
    "RadialGauge",
    "kernel_spectra",
    "convolve",
    "gauge_a12",
    "gauge_a0",
    "compute_gauge",
    "cs_energy",
    "gauge_identity_check",
    "constraint_residuals",
    "gauge_estimate_ratio",
    "radial_gauge",
]

_FLOOR = 1e-300


@lru_cache(maxsize=16)
def kernel_spectra(n: int, h: float):
    """rFFT of G1 and G2 on the doubled (2n)^2 grid, cached per (n, h)."""
    N = 2 * n
    off = np.fft.fftfreq(N, d=1.0 / N)  # 0, 1, ..., n-1, -n, ..., -1
    d1, d2 = np.meshgrid(off * h, off * h, indexing="ij")
    r2 = d1**2 + d2**2
    r2[0, 0] = 1.0
    g1 = d1 / (2.0 * np.pi * r2)
    g2 = d2 / (2.0 * np.pi * r2)
    g1[0, 0] = g2[0, 0] = 0.0
    # offset -n has no +n partner; dropping it keeps the tables exactly odd
    for g in (g1, g2):
        g[n, :] = 0.0
        g[:, n] = 0.0
    s1 = sfft.rfft2(g1)
    s2 = sfft.rfft2(g2)
    s1.flags.writeable = False
    s2.flags.writeable = False
    return s1, s2


def _spectrum(w: np.ndarray) -> np.ndarray:
    n = w.shape[0]
    return sfft.rfft2(w, s=(2 * n, 2 * n))


def _back(spec: np.ndarray, n: int, h: float) -> np.ndarray:
    return sfft.irfft2(spec, s=(2 * n, 2 * n))[:n, :n] * (h * h)


def convolve(kernel: str, w: np.ndarray, h: float) -> np.ndarray:
    """h^2 sum_j G(x_i - x_j) w_j for ``kernel`` in {"G1", "G2"}."""
    n = w.shape[0]
    s1, s2 = kernel_spectra(n, h)
    k = {"G1": s1, "G2": s2}[kernel]
    return _back(_spectrum(w) * k, n, h)


@dataclass(frozen=True)
class GaugeFields:
    a0: Field2D
    a1: Field2D
    a2: Field2D
    curl_residual: float
    div_residual: float


def _a12_arrays(u: np.ndarray, h: float):
    n = u.shape[0]
    s1, s2 = kernel_spectra(n, h)
    rho = _spectrum(0.5 * u * u)
    return _back(rho * s2, n, h), -_back(rho * s1, n, h)


def _a0_array(u: np.ndarray, a1: np.ndarray, a2: np.ndarray, h: float) -> np.ndarray:
    n = u.shape[0]
    s1, s2 = kernel_spectra(n, h)
    u2 = u * u
    return _back(_spectrum(a2 * u2) * s1 - _spectrum(a1 * u2) * s2, n, h)


def gauge_a12(u: Field2D):
    a1, a2 = _a12_arrays(u.values, u.grid.spacing)
    return Field2D(u.grid, a1), Field2D(u.grid, a2)


def gauge_a0(u: Field2D, a1: Field2D, a2: Field2D) -> Field2D:
    if not (u.same_grid(a1) and u.same_grid(a2)):
        raise ValueError("grid mismatch between source and gauge fields")
    return Field2D(u.grid, _a0_array(u.values, a1.values, a2.values, u.grid.spacing))


def cs_energy(u: Field2D) -> float:
    """int (A1^2 + A2^2) u^2."""
    a1, a2 = _a12_arrays(u.values, u.grid.spacing)
    return integrate((a1 * a1 + a2 * a2) * u.values**2, u.grid)


def gauge_identity_check(u: Field2D) -> float:
    """|int A0 u^2 - 2 cs_energy(u)| / cs_energy(u); 0 for the zero field."""
    h = u.grid.spacing
    a1, a2 = _a12_arrays(u.values, h)
    a0 = _a0_array(u.values, a1, a2, h)
    u2 = u.values**2
    cs = integrate((a1 * a1 + a2 * a2) * u2, u.grid)
    if cs == 0.0:
        return 0.0
    return abs(integrate(a0 * u2, u.grid) - 2.0 * cs) / max(cs, _FLOOR)


def _centered_diff(f: np.ndarray, h: float, axis: int) -> np.ndarray:
    """Fourth-order centred difference; second order on the two outer rows."""
    out = np.gradient(f, h, axis=axis, edge_order=2)
    g = np.moveaxis(f, axis, 0)
    o = np.moveaxis(out, axis, 0)
    o[2:-2] = (g[:-4] - 8.0 * g[1:-3] + 8.0 * g[3:-1] - g[4:]) / (12.0 * h)
    return out


def _residuals(u, a1, a2, grid: Grid2D):
    h = grid.spacing
    d1a2 = _centered_diff(a2, h, 0)
    d2a1 = _centered_diff(a1, h, 1)
    d1a1 = _centered_diff(a1, h, 0)
    d2a2 = _centered_diff(a2, h, 1)
    src = 0.5 * u * u
    src_norm = np.sqrt(integrate(src * src, grid))
    if src_norm == 0.0:
        return 0.0, 0.0
    curl = d1a2 - d2a1 + src
    div = d1a1 + d2a2
    curl_res = np.sqrt(integrate(curl * curl, grid)) / src_norm
    a_norm = np.sqrt(integrate(a1 * a1, grid)) + np.sqrt(integrate(a2 * a2, grid))
    div_res = np.sqrt(integrate(div * div, grid)) / max(a_norm, _FLOOR)
    return float(curl_res), float(div_res)


def constraint_residuals(u: Field2D, g: GaugeFields):
    """Relative L2 defects of the curl equation and of the Coulomb gauge.

    Derivatives of A are fourth-order centred differences, dropping to second
    order on the outermost rows of the square.
    """
    return _residuals(u.values, g.a1.values, g.a2.values, u.grid)


def compute_gauge(u: Field2D) -> GaugeFields:
    h = u.grid.spacing
    a1, a2 = _a12_arrays(u.values, h)
    a0 = _a0_array(u.values, a1, a2, h)
    curl, div = _residuals(u.values, a1, a2, u.grid)
    return GaugeFields(Field2D(u.grid, a0), Field2D(u.grid, a1), Field2D(u.grid, a2), curl, div)


def gauge_estimate_ratio(u: Field2D, r: float):
    """(|A1|_q / |u|_{2r}^2, |A2|_q / |u|_{2r}^2) with 1/r - 1/q = 1/2.

    Only the scaling behaviour of these ratios is meaningful.
    """
    if not 1.0 < r < 2.0:
        raise ValueError("r must lie in (1,2)")
    q = 1.0 / (1.0 / r - 0.5)
    a1, a2 = gauge_a12(u)
    den = integrate(np.abs(u.values) ** (2 * r), u.grid) ** (1.0 / r)
    if den == 0.0:
        raise ZeroDivisionError("zero source")
    nq = [integrate(np.abs(a.values) ** q, u.grid) ** (1.0 / q) for a in (a1, a2)]
    return nq[0] / den, nq[1] / den


# ---------------------------------------------------------------------------
# radial closed forms

@dataclass(frozen=True)
class RadialGauge:
    h: RadialField
    a0_radial: RadialField
    cs_density: RadialField

    def cs_energy(self, u: RadialField) -> float:
        """int (h^2/r^2) u^2 dx for the radial source ``u``."""
        return radial_integrate(self.cs_density.values * u.values**2, u.grid)


def radial_gauge(u: RadialField) -> RadialGauge:
    """h(s) = int_0^s (r/2) u^2 dr, int_r^inf (h/s) u^2 ds and h^2/r^2."""
    r = u.r
    u2 = u.values**2
    rr = np.concatenate(([0.0], r))
    hh = cumulative_trapezoid(np.concatenate(([0.0], 0.5 * r * u2)), rr)
    g = hh / r * u2
    # integral from r to r_max, accumulated from the outer end
    tail = cumulative_trapezoid(g[::-1], -r[::-1], initial=0.0)[::-1]
    grid = u.grid
    return RadialGauge(RadialField(grid, hh), RadialField(grid, tail),
                       RadialField(grid, hh**2 / r**2))
