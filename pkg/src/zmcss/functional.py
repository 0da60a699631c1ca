"""Energy functionals J_a / J_inf, their gradients and the Nehari residual.

    J(u) = 1/2 |grad u|^2 + 1/2 int (A1^2 + A2^2) u^2 + 1/p int a |u|^p - int F(u)

The |u|^p term is shifted to ((|u| + delta)^p - delta^p) with a tiny
``delta_reg`` so that its derivative sign(u) (|u| + delta)^{p-1} stays finite;
energy and gradient use the same shifted form, keeping them exactly paired.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from . import gauge as _gauge
from .fields import Field2D, Grid2D, gradient_sq_norm, integrate, neg_laplacian
from .nonlinearity import NonlinearitySpec

__all__ = [
    "DELTA_REG",
    "PotentialSpec",
    "EnergyBreakdown",
    "Evaluation",
    "energy",
    "gradient",
    "nehari_residual",
    "energy_report",
]

DELTA_REG = 1e-12


@dataclass(frozen=True)
class PotentialSpec:
    """a(x) = a_inf - b exp(-|x|^2 / sigma^2), or a = a_inf in constant mode."""

    a_inf: float = 1.0
    b: float = 0.0
    sigma: float = 2.0
    constant_mode: bool = False

    def __post_init__(self):
        if not self.a_inf >= 0:
            raise ValueError("a_inf must be nonnegative")
        if not self.sigma > 0:
            raise ValueError("sigma must be positive")
        if not 0 <= self.b:
            raise ValueError("b must be nonnegative")
        if self.a_inf > 0 and not self.b < self.a_inf:
            raise ValueError("b must be smaller than a_inf so that inf a > 0")
        if self.a_inf == 0 and self.b != 0:
            raise ValueError("b must vanish when a_inf = 0")

    @property
    def is_constant(self) -> bool:
        return self.constant_mode or self.b == 0.0

    def limit(self) -> "PotentialSpec":
        """The constant potential a = a_inf of the limit problem."""
        return PotentialSpec(self.a_inf, 0.0, self.sigma, True)

    def values(self, grid: Grid2D) -> np.ndarray:
        if self.is_constant:
            return np.full((grid.n, grid.n), self.a_inf)
        r2 = grid.radius() ** 2
        return self.a_inf - self.b * np.exp(-r2 / self.sigma**2)

    def hypotheses(self) -> dict:
        """(A1): inf a > 0; (A2): a <= a_inf, strictly on a set of positive measure."""
        inf_a = self.a_inf - (0.0 if self.is_constant else self.b)
        return {"A1": inf_a > 0, "A2_strict": (not self.is_constant) and self.b > 0}


@dataclass(frozen=True)
class EnergyBreakdown:
    dirichlet: float
    cs: float
    potential_p: float
    nonlinear: float
    total: float

    def to_dict(self) -> dict:
        return asdict(self)


class Evaluation:
    """Everything the solver needs at one field, sharing a single gauge solve.

    The fiber quantities (:meth:`fiber_energy`, :meth:`fiber_residual`) use the
    exact scalings A_j[t u] = t^2 A_j[u] so no further convolutions are needed.
    """

    def __init__(self, u: Field2D, pot: PotentialSpec, spec: NonlinearitySpec, p: float,
                 delta_reg: float = DELTA_REG, include_cs: bool = True):
        if not 1.0 < p < 2.0:
            raise ValueError(f"p must lie in (1,2), got {p!r}")
        self.u = u
        self.pot = pot
        self.spec = spec
        self.p = p
        self.delta = delta_reg
        self.include_cs = include_cs
        g = u.grid
        self.w = g.cell_area
        self.a = pot.values(g)
        self.absu = np.abs(u.values)
        self.grad_sq = gradient_sq_norm(u)
        h = g.spacing
        if include_cs:
            self.a1, self.a2 = _gauge._a12_arrays(u.values, h)
            self.asq = self.a1**2 + self.a2**2
            self.cs_energy = integrate(self.asq * u.values**2, g)
        else:
            self.a1 = self.a2 = self.asq = np.zeros_like(u.values)
            self.cs_energy = 0.0
        self._a0 = None

    # -- energy pieces -------------------------------------------------------
    def _pterm(self, t: float = 1.0) -> float:
        d = self.delta
        return float(np.sum(self.a * ((t * self.absu + d) ** self.p - d**self.p)) * self.w / self.p)

    def _pderiv_u(self, t: float = 1.0) -> float:
        """int a (t|u| + d)^{p-1} t|u|, the Nehari form of the p-term."""
        tu = t * self.absu
        return float(np.sum(self.a * (tu + self.delta) ** (self.p - 1.0) * tu) * self.w)

    def breakdown(self) -> EnergyBreakdown:
        dir_ = 0.5 * self.grad_sq
        cs = 0.5 * self.cs_energy
        pp = self._pterm()
        nl = float(np.sum(self.spec.F(self.u.values)) * self.w)
        return EnergyBreakdown(dir_, cs, pp, nl, dir_ + cs + pp - nl)

    @property
    def a0(self) -> np.ndarray:
        if self._a0 is None:
            if self.include_cs:
                self._a0 = _gauge._a0_array(self.u.values, self.a1, self.a2, self.u.grid.spacing)
            else:
                self._a0 = np.zeros_like(self.u.values)
        return self._a0

    def smooth_gradient(self, frozen_gauge: bool = False) -> np.ndarray:
        """Gradient of every term except the |u|^p potential term."""
        u = self.u.values
        pot = self.asq if frozen_gauge else self.asq + self.a0
        return neg_laplacian(u, self.u.grid.spacing) + pot * u - self.spec.f(u)

    def potential_gradient(self) -> np.ndarray:
        u = self.u.values
        return self.a * np.sign(u) * (self.absu + self.delta) ** (self.p - 1.0)

    def gradient(self, frozen_gauge: bool = False) -> np.ndarray:
        return self.smooth_gradient(frozen_gauge) + self.potential_gradient()

    def nehari_residual(self) -> float:
        u = self.u.values
        fu = float(np.sum(self.spec.f(u) * u) * self.w)
        return self.grad_sq + 3.0 * self.cs_energy + self._pderiv_u() - fu

    # -- fiber t -> J(t u) ---------------------------------------------------
    def fiber_energy(self, t: float) -> float:
        tu = t * self.u.values
        nl = float(np.sum(self.spec.F(tu)) * self.w)
        return (0.5 * t * t * self.grad_sq + 0.5 * t**6 * self.cs_energy
                + self._pterm(t) - nl)

    def fiber_residual(self, t: float) -> float:
        """J'(t u)[t u]."""
        tu = t * self.u.values
        fu = float(np.sum(self.spec.f(tu) * tu) * self.w)
        return (t * t * self.grad_sq + 3.0 * t**6 * self.cs_energy
                + self._pderiv_u(t) - fu)


def energy(u: Field2D, pot: PotentialSpec, spec: NonlinearitySpec, p: float = 1.5,
           delta_reg: float = DELTA_REG, include_cs: bool = True) -> EnergyBreakdown:
    return Evaluation(u, pot, spec, p, delta_reg, include_cs).breakdown()


def gradient(u: Field2D, pot: PotentialSpec, spec: NonlinearitySpec, p: float = 1.5,
             delta_reg: float = DELTA_REG, include_cs: bool = True,
             frozen_gauge: bool = False) -> Field2D:
    """Field g with <g, v> (cell quadrature) equal to the derivative of J along v.

    ``frozen_gauge=True`` drops the A0 u term, i.e. differentiates as if the
    gauge fields did not depend on u; it is a diagnostic only.
    """
    ev = Evaluation(u, pot, spec, p, delta_reg, include_cs)
    return Field2D(u.grid, ev.gradient(frozen_gauge))


def nehari_residual(u: Field2D, pot: PotentialSpec, spec: NonlinearitySpec, p: float = 1.5,
                    delta_reg: float = DELTA_REG, include_cs: bool = True) -> float:
    """|grad u|^2 + 3 int (A1^2+A2^2) u^2 + int a |u|^p - int f(u) u."""
    return Evaluation(u, pot, spec, p, delta_reg, include_cs).nehari_residual()


def energy_report(u: Field2D, pot: PotentialSpec, spec: NonlinearitySpec, p: float = 1.5) -> dict:
    ev = Evaluation(u, pot, spec, p)
    out = ev.breakdown().to_dict()
    out["nehari_residual"] = ev.nehari_residual()
    cs = ev.cs_energy
    out["gauge0_residual"] = (abs(integrate(ev.a0 * u.values**2, u.grid) - 2.0 * cs) / cs
                              if cs > 0 else 0.0)
    return {k: (float(v) if isinstance(v, (float, np.floating)) and math.isfinite(v) else v)
            for k, v in out.items()}
