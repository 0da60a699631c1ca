"""Moser concentration profiles and Trudinger-Moser integrals on a radial grid.

The profile is

    wbar_n(r) = (2 pi)^{-1/2} * { sqrt(log n)             r <= 1/n
                                { log(1/r) / sqrt(log n)  1/n <= r <= 1
                                { 0                       r >= 1

whose Dirichlet integral equals 1 for every n.  Probes use the unit-E-norm
rescaling wbar_n / sqrt(1 + |wbar_n|_p^2).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .fields import RadialField, RadialGrid, radial_integrate
from .nonlinearity import SaturationError, YoungParams, young_phi

__all__ = [
    "ResolutionError",
    "MoserProbe",
    "default_radial_grid",
    "moser_profile",
    "moser_l1_exact",
    "moser_grad_sq_quadrature",
    "moser_sequence",
    "phi_integral",
    "tm_probe",
]


class ResolutionError(ValueError):
    """The radial grid is too coarse for the plateau of radius 1/n."""


def default_radial_grid() -> RadialGrid:
    # 1/n lands on a node for every power of two n <= 2^16
    return RadialGrid(2.0, 2**17)


def _check_resolution(n: int, grid: RadialGrid):
    if n < 2 or int(n) != n:
        raise ValueError("n must be an integer >= 2")
    if grid.r_max <= 1.0:
        raise ValueError("r_max must exceed 1 to contain the support")
    if not grid.spacing < 1.0 / (4 * n):
        raise ResolutionError(f"node spacing {grid.spacing:.3g} must be below 1/(4n) = {1 / (4 * n):.3g}")


def moser_profile(n: int, grid: RadialGrid) -> RadialField:
    _check_resolution(n, grid)
    r = grid.nodes()
    ln = math.log(n)
    w = np.where(r <= 1.0 / n, math.sqrt(ln), np.log(1.0 / np.minimum(r, 1.0)) / math.sqrt(ln))
    w = np.where(r >= 1.0, 0.0, w)
    return RadialField(grid, w / math.sqrt(2.0 * math.pi))


def moser_l1_exact(n: int) -> float:
    """Closed form of int |wbar_n| dx."""
    ln = math.log(n)
    a = 1.0 / n
    tail = 0.25 - (0.5 * a * a * math.log(n) + 0.25 * a * a)
    return math.sqrt(ln / (2 * math.pi)) * math.pi / n**2 + math.sqrt(2 * math.pi / ln) * tail


def moser_grad_sq_quadrature(w: RadialField) -> float:
    """2 pi int w'(r)^2 r dr with one-sided differences on cell midpoints."""
    r = np.concatenate(([0.0], w.grid.nodes()))
    v = np.concatenate(([w.values[0]], w.values))
    d = np.diff(v) / np.diff(r)
    rm = 0.5 * (r[1:] + r[:-1])
    return float(2.0 * math.pi * np.sum(d * d * rm * np.diff(r)))


def phi_integral(yp: YoungParams, w: RadialField) -> float:
    return radial_integrate(young_phi(yp, w.values), w.grid)


@dataclass
class MoserProbe:
    n: int
    grad_sq: float
    l1_norm: float
    l1_exact: float
    lp_norm_p: float
    peak: float
    unit_scale: float
    phi_integrals: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"n": self.n, "grad_sq": self.grad_sq, "l1_norm": self.l1_norm,
                "l1_exact": self.l1_exact, "lp_norm_p": self.lp_norm_p, "peak": self.peak,
                "unit_scale": self.unit_scale,
                "phi_integrals": {repr(float(k)): v for k, v in self.phi_integrals.items()}}


def moser_sequence(n: int, p: float = 1.5, grid: RadialGrid | None = None,
                   alphas=()) -> MoserProbe:
    """Norms of wbar_n by quadrature, and Phi integrals of its unit-norm rescaling.

    ``peak`` is sqrt(log n / 2pi) / (1 + delta_n^{1/p}) with delta_n = |wbar_n|_p^p.
    """
    if not 1.0 < p < 2.0:
        raise ValueError(f"p must lie in (1,2), got {p!r}")
    grid = grid or default_radial_grid()
    w = moser_profile(n, grid)
    delta = radial_integrate(np.abs(w.values) ** p, grid)
    l1 = radial_integrate(np.abs(w.values), grid)
    gsq = moser_grad_sq_quadrature(w)
    # |wbar_n|^2_E = |grad|^2 + |wbar_n|_p^2 with the exact gradient term 1
    scale = 1.0 / math.sqrt(1.0 + delta ** (2.0 / p))
    unit = RadialField(grid, w.values * scale)
    phis = {}
    for a in alphas:
        try:
            phis[float(a)] = phi_integral(YoungParams(float(a), p), unit)
        except SaturationError:
            phis[float(a)] = math.inf
    peak = math.sqrt(math.log(n) / (2 * math.pi)) / (1.0 + delta ** (1.0 / p))
    return MoserProbe(int(n), gsq, l1, moser_l1_exact(n), delta, peak, scale, phis)


def tm_probe(p: float, alphas, n_range, grid: RadialGrid | None = None) -> dict:
    """Table of int Phi_{alpha,j0}(w_n) with per-doubling growth ratios.

    Entries that overflow are marked ``saturated`` rather than aborting the table.
    """
    grid = grid or default_radial_grid()
    n_range = [int(n) for n in n_range]
    rows = []
    series = {}
    for a in alphas:
        vals = []
        for n in n_range:
            probe = moser_sequence(n, p, grid, alphas=(a,))
            v = probe.phi_integrals[float(a)]
            status = "saturated" if not math.isfinite(v) else "ok"
            rows.append({"alpha": float(a), "n": n, "integral": v if status == "ok" else None,
                         "status": status})
            vals.append(v)
        ratios = [vals[i + 1] / vals[i] if vals[i] > 0 and math.isfinite(vals[i + 1]) else None
                  for i in range(len(vals) - 1)]
        finite = [v for v in vals if math.isfinite(v)]
        series[repr(float(a))] = {
            "integrals": [v if math.isfinite(v) else None for v in vals],
            "ratios": ratios,
            "increasing": bool(all(vals[i + 1] > vals[i] for i in range(len(vals) - 1))),
            "max_over_min": (max(finite) / min(finite)) if finite and min(finite) > 0 else None,
        }
    return {"p": float(p), "j0": YoungParams(1.0, p).j0, "n_range": n_range, "rows": rows,
            "series": series}
