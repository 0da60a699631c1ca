"""Nehari projection, ground-state minimisation and the potential comparison.

The ground state is sought by minimising the reduced functional
J^(w) = max_t J(t w) over nonnegative fields.  Every iterate lies on the Nehari
manifold (t_u = 1), where the gradient of J^ coincides with J'(u).  One step is

    v = u - eta * (J'(u) without the |u|^p term)
    w = prox of eta * (1/p) int a |.|^p  restricted to w >= 0   (per cell)
    u_new = t_w * w

with a Barzilai-Borwein trial step and halving backtracking until the
sufficient-decrease test J^(w) <= J^(u) - c / eta * |w - u|^2 holds.  The
|u|^p term is handled by its proximal map because its derivative is not
Lipschitz at 0; an explicit step on it makes small cells oscillate.
"""
from __future__ import annotations

import math
import time
import warnings
from dataclasses import asdict, dataclass, field, replace
from typing import Optional

import numpy as np
from scipy.optimize import brentq

from .fields import Field2D, Grid2D, e_norm, integrate
from .functional import DELTA_REG, EnergyBreakdown, Evaluation, PotentialSpec
from .nonlinearity import NonlinearitySpec, SaturationError

__all__ = [
    "NoBracketError",
    "NonConvergenceError",
    "NehariResult",
    "SolverConfig",
    "SolveReport",
    "ComparisonReport",
    "fiber_residual",
    "nehari_project",
    "seed_field",
    "ground_state",
    "compare_potentials",
]

SCAN_POINTS = 400
SCAN_DECADES = 9.0
SAT_MARGIN = 1.0 - 1e-9


class NoBracketError(RuntimeError):
    """The fiber residual keeps one sign up to the saturation threshold."""


class NonConvergenceError(RuntimeError):
    def __init__(self, msg, report=None):
        super().__init__(msg)
        self.report = report


@dataclass(frozen=True)
class NehariResult:
    t_u: float
    residual: float
    bracket: tuple
    sign_changes: int
    scale: float

    def to_dict(self) -> dict:
        return asdict(self)


def fiber_residual(ev: Evaluation, t) -> np.ndarray:
    """phi(t) = J'(t u)[t u] for scalar or array t."""
    t = np.atleast_1d(np.asarray(t, float))
    return np.array([ev.fiber_residual(float(s)) for s in t])


def _t_max(ev: Evaluation) -> float:
    umax = float(np.max(np.abs(ev.u.values)))
    if umax == 0.0:
        raise ValueError("the zero field has no Nehari projection")
    return SAT_MARGIN * ev.spec.t_sat / umax


def _refine(ev: Evaluation, lo: float, hi: float, flo: float, fhi: float,
            sign_changes: int, rtol: float) -> NehariResult:
    t = brentq(ev.fiber_residual, lo, hi, xtol=1e-300, rtol=rtol, maxiter=500)
    return NehariResult(float(t), float(ev.fiber_residual(t)), (float(lo), float(hi)),
                        int(sign_changes), float(max(abs(flo), abs(fhi))))


def _project_eval(ev: Evaluation, guess: Optional[float] = None, rtol: float = 1e-12,
                  scan_points: int = SCAN_POINTS) -> NehariResult:
    tmax = _t_max(ev)
    if guess is not None and 0 < guess < tmax:
        # local bracket expansion around a good guess (used inside the solver)
        lo = hi = guess
        flo = fhi = ev.fiber_residual(guess)
        if flo == 0.0:
            return NehariResult(float(guess), 0.0, (guess, guess), 1, 0.0)
        if flo > 0:
            for _ in range(200):
                lo, flo = hi, fhi
                hi = min(hi * 1.25, tmax)
                fhi = ev.fiber_residual(hi)
                if fhi < 0 or hi >= tmax:
                    break
            if fhi < 0:
                return _refine(ev, lo, hi, flo, fhi, 1, rtol)
        else:
            for _ in range(400):
                hi, fhi = lo, flo
                lo = lo / 1.25
                flo = ev.fiber_residual(lo)
                if flo > 0:
                    break
            if flo > 0:
                return _refine(ev, lo, hi, flo, fhi, 1, rtol)
        # fall through to a full scan
    ts = np.geomspace(tmax * 10.0 ** (-SCAN_DECADES), tmax, scan_points)
    phi = fiber_residual(ev, ts)
    s = np.sign(phi)
    idx = np.nonzero(s[:-1] * s[1:] < 0)[0]
    if idx.size == 0:
        raise NoBracketError(
            f"fiber residual has no sign change on t in [{ts[0]:.3g}, {ts[-1]:.3g}] "
            f"(phi(t_max) = {phi[-1]:.3g}); the nonlinearity is too weak for this profile")
    i = int(idx[0])
    return _refine(ev, ts[i], ts[i + 1], phi[i], phi[i + 1], idx.size, rtol)


def nehari_project(u: Field2D, pot: PotentialSpec, spec: NonlinearitySpec, p: float = 1.5,
                   include_cs: bool = True, delta_reg: float = DELTA_REG,
                   rtol: float = 1e-12, scan_points: int = SCAN_POINTS) -> NehariResult:
    """Find t_u > 0 with J'(t_u u)[t_u u] = 0.

    The fiber residual is scanned on a geometric grid spanning nine decades
    below the saturation limit; the first sign change is refined with Brent's
    method.  Gauge fields are computed once and rescaled along the fiber.
    """
    if np.any(u.values < 0):
        raise ValueError("Nehari projection expects a nonnegative field")
    ev = Evaluation(u, pot, spec, p, delta_reg, include_cs)
    return _project_eval(ev, None, rtol, scan_points)


# ---------------------------------------------------------------------------
# ground state

@dataclass(frozen=True)
class SolverConfig:
    half_width: float = 12.0
    n: int = 128
    tol: float = 1e-5
    max_iter: int = 5000
    eta0: float = 0.1
    armijo: float = 1e-4
    seed_offset: tuple = (0.0, 0.0)
    seed_width: float = 1.0
    delta_reg: float = DELTA_REG
    max_backtracks: int = 60

    def __post_init__(self):
        errs = []
        if not self.tol > 0:
            errs.append("tol must be positive")
        if not (isinstance(self.max_iter, int) and self.max_iter >= 1):
            errs.append("max_iter must be a positive integer")
        if not self.eta0 > 0:
            errs.append("eta0 must be positive")
        if not 0 < self.armijo < 1:
            errs.append("armijo must lie in (0,1)")
        if not self.seed_width > 0:
            errs.append("seed_width must be positive")
        if len(self.seed_offset) != 2:
            errs.append("seed_offset must have two components")
        if errs:
            raise ValueError("; ".join(errs))

    @property
    def grid(self) -> Grid2D:
        return Grid2D(self.half_width, self.n)


@dataclass
class SolveReport:
    energy_trace: list
    final_breakdown: EnergyBreakdown
    grad_norm: float
    e_norm: float
    nehari_residual: float
    min_value: float
    bound_2pi_alpha0: bool
    iterations: int
    converged: bool
    truncated_mass: float
    boundary_mass: float
    gauge0_residual: float
    field: Field2D = field(repr=False)
    elapsed: float = 0.0

    @property
    def energy(self) -> float:
        return self.final_breakdown.total

    @property
    def relative_grad_norm(self) -> float:
        return self.grad_norm / self.e_norm

    def to_dict(self, trace: bool = False) -> dict:
        out = {
            "energy": self.energy,
            "breakdown": self.final_breakdown.to_dict(),
            "grad_norm": self.grad_norm,
            "relative_grad_norm": self.relative_grad_norm,
            "e_norm": self.e_norm,
            "nehari_residual": self.nehari_residual,
            "relative_nehari_residual": self.nehari_residual / self.e_norm**2,
            "min_value": self.min_value,
            "bound_2pi_alpha0": self.bound_2pi_alpha0,
            "iterations": self.iterations,
            "converged": self.converged,
            "truncated_mass": self.truncated_mass,
            "boundary_mass": self.boundary_mass,
            "gauge0_residual": self.gauge0_residual,
        }
        if trace:
            out["energy_trace"] = list(self.energy_trace)
        return out


def seed_field(grid: Grid2D, pot: PotentialSpec, p: float, offset=(0.0, 0.0),
               width: float = 1.0) -> Field2D:
    """Gaussian bump scaled to unit E-norm."""
    u = Field2D.gaussian(grid, 1.0, width, center=tuple(offset))
    return u.scaled(1.0 / e_norm(u, p).e_norm)


def _prox_p(v: np.ndarray, c: np.ndarray, p: float, delta: float) -> np.ndarray:
    """argmin_{w >= 0} (w - v)^2 / 2 + c ((w + delta)^p - delta^p) / p, per cell."""
    w = np.zeros_like(v)
    act = v > c * delta ** (p - 1.0)
    if not np.any(act):
        return w
    va, ca = v[act], c[act]
    lo = np.zeros_like(va)
    hi = va.copy()
    q = p - 1.0
    # the optimality map w - v + c (w + delta)^q is increasing: bisect, then polish
    for _ in range(50):
        mid = 0.5 * (lo + hi)
        pos = mid - va + ca * (mid + delta) ** q > 0
        hi = np.where(pos, mid, hi)
        lo = np.where(pos, lo, mid)
    x = 0.5 * (lo + hi)
    for _ in range(3):
        r = x - va + ca * (x + delta) ** q
        x = np.clip(x - r / (1.0 + q * ca * (x + delta) ** (q - 1.0)), lo, hi)
    w[act] = x
    return w


def _kkt_residual(ev: Evaluation, gs: np.ndarray) -> np.ndarray:
    """Gradient on the positive set; on zero cells only the part pushing u upward."""
    u = ev.u.values
    full = gs + ev.potential_gradient()
    one_sided = gs + ev.a * ev.delta ** (ev.p - 1.0)
    return np.where(u > 0, full, np.minimum(one_sided, 0.0))


def ground_state(pot: PotentialSpec, spec: NonlinearitySpec, p: float = 1.5,
                 cfg: SolverConfig = SolverConfig(), initial: Optional[Field2D] = None,
                 raise_on_failure: bool = False, callback=None) -> SolveReport:
    """Minimise J over the Nehari manifold of nonnegative fields.

    Stops when the constrained gradient norm relative to the E-norm drops below
    ``cfg.tol``.  ``NoBracketError`` propagates if the seed cannot be projected.
    """
    t_start = time.perf_counter()
    grid = cfg.grid if initial is None else initial.grid
    u0 = initial if initial is not None else seed_field(grid, pot, p, cfg.seed_offset, cfg.seed_width)
    if np.any(u0.values < 0):
        raise ValueError("initial field must be nonnegative")
    d = cfg.delta_reg

    def make(vals):
        return Evaluation(Field2D(grid, vals), pot, spec, p, d)

    ev0 = make(u0.values)
    res = _project_eval(ev0)
    ev = make(res.t_u * u0.values)
    J = ev.breakdown().total
    trace = [J]
    eta = cfg.eta0
    prev = None
    removed_recent = []
    converged = False
    it = 0
    gnorm = math.inf
    for it in range(cfg.max_iter + 1):
        gs = ev.smooth_gradient()
        kkt = _kkt_residual(ev, gs)
        gnorm = math.sqrt(integrate(kkt * kkt, grid))
        en = e_norm(ev.u, p).e_norm
        if callback is not None:
            callback(it, J, gnorm / en, eta)
        if gnorm / en < cfg.tol:
            converged = True
            break
        if it == cfg.max_iter:
            break
        u = ev.u.values
        if prev is not None:
            s = u - prev[0]
            y = gs - prev[1]
            sy = float(np.sum(s * y))
            if sy > 0:
                eta = float(np.sum(s * s)) / sy
            else:
                eta = 2.0 * eta
        prev = (u, gs)
        accepted = False
        for _ in range(cfg.max_backtracks):
            v = u - eta * gs
            w = _prox_p(v, eta * ev.a, p, d)
            if not np.any(w > 0):
                eta *= 0.5
                continue
            evw = make(w)
            try:
                r = _project_eval(evw, guess=1.0)
            except (NoBracketError, SaturationError):
                eta *= 0.5
                continue
            Jw = evw.fiber_energy(r.t_u)
            step = float(np.sum((w - u) ** 2)) * grid.cell_area
            if Jw <= J - cfg.armijo / eta * step:
                accepted = True
                break
            eta *= 0.5
        if not accepted:
            break
        removed = float(np.sum(np.maximum(-v, 0.0)) / max(np.sum(np.abs(u)), 1e-300))
        removed_recent = (removed_recent + [removed])[-10:]
        ev = make(r.t_u * w)
        J = ev.breakdown().total
        # J is evaluated directly; keep the trace monotone up to round-off
        trace.append(J)

    bd = ev.breakdown()
    nres = ev.nehari_residual()
    en = e_norm(ev.u, p).e_norm
    truncated = max(removed_recent) if removed_recent else 0.0
    from .fields import boundary_mass_fraction
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        bmass = boundary_mass_fraction(ev.u, p)
    cs = ev.cs_energy
    g0 = abs(integrate(ev.a0 * ev.u.values**2, grid) - 2 * cs) / cs if cs > 0 else 0.0
    report = SolveReport(
        energy_trace=trace, final_breakdown=bd, grad_norm=gnorm, e_norm=en,
        nehari_residual=nres, min_value=float(np.min(ev.u.values)),
        bound_2pi_alpha0=bool(0.0 < bd.total < 2.0 * math.pi / spec.alpha0),
        iterations=it, converged=converged, truncated_mass=truncated,
        boundary_mass=bmass, gauge0_residual=float(g0), field=ev.u,
        elapsed=time.perf_counter() - t_start)
    if bmass > 1e-6:
        warnings.warn(f"boundary mass fraction {bmass:.3g} exceeds 1e-6; enlarge the domain",
                      RuntimeWarning, stacklevel=2)
    if not converged and raise_on_failure:
        raise NonConvergenceError(
            f"no convergence after {it} iterations (relative gradient {gnorm / en:.3g})", report)
    return report


# ---------------------------------------------------------------------------
# potential comparison

@dataclass
class ComparisonReport:
    m_a_upper: float
    m_inf_upper: float
    ordered: bool
    margin: float
    certificate: float
    certificate_t: float
    certificate_holds: bool
    arm_a: SolveReport = field(repr=False)
    arm_inf: SolveReport = field(repr=False)

    def to_dict(self) -> dict:
        return {
            "m_a_upper": self.m_a_upper,
            "m_inf_upper": self.m_inf_upper,
            "ordered": self.ordered,
            "margin": self.margin,
            "certificate_max_t_Ja": self.certificate,
            "certificate_t": self.certificate_t,
            "certificate_holds": self.certificate_holds,
            "arm_a": self.arm_a.to_dict(),
            "arm_inf": self.arm_inf.to_dict(),
        }


def compare_potentials(spec: NonlinearitySpec, p: float, pot_a: PotentialSpec,
                       cfg: SolverConfig = SolverConfig()) -> ComparisonReport:
    """Solve under a(x) and under a = a_inf, plus the fiber certificate.

    The certificate is max_t J_a(t u_inf*), an upper bound for m_a obtained by
    projecting the limit ground state onto the Nehari manifold of J_a.
    ``ordered`` requires the two-solve margin to exceed 10 * tol.
    """
    pot_inf = pot_a.limit()
    arm_inf = ground_state(pot_inf, spec, p, cfg)
    arm_a = ground_state(pot_a, spec, p, cfg)
    ev = Evaluation(arm_inf.field, pot_a, spec, p, cfg.delta_reg)
    r = _project_eval(ev)
    cert = ev.fiber_energy(r.t_u)
    m_a, m_inf = arm_a.energy, arm_inf.energy
    margin = m_inf - m_a
    return ComparisonReport(
        m_a_upper=m_a, m_inf_upper=m_inf, ordered=bool(margin > 10.0 * cfg.tol),
        margin=margin, certificate=float(cert), certificate_t=r.t_u,
        certificate_holds=bool(cert < m_inf), arm_a=arm_a, arm_inf=arm_inf)


def with_offset(cfg: SolverConfig, offset) -> SolverConfig:
    return replace(cfg, seed_offset=tuple(offset))
