"""Nonlinearities with critical exponential growth and their hypothesis checks.

The default family is f(t) = lam * t**qf * exp(alpha0 * t**2) for t > 0 and
f = 0 for t <= 0.  Its primitive has the closed form

    F(t) = lam / 2 * alpha0**(-(k+1)) * e**X * X**(k+1) / (k+1) * M(1, k+2, -X),

with X = alpha0 t^2, k = (qf - 1)/2 and M Kummer's confluent hypergeometric
function; it is evaluated in log space so that no intermediate overflows.

The hypothesis checkers sample dense geometric grids and return a
:class:`HypothesisReport`.  Arguments beyond the saturation threshold (where
f would overflow a double) are excluded from sampling and reported.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Callable, Optional

import numpy as np
from scipy.optimize import brentq
from scipy.special import hyp1f1

__all__ = [
    "SaturationError",
    "NonlinearitySpec",
    "HypothesisReport",
    "YoungParams",
    "f_eval",
    "F_eval",
    "check_f1",
    "check_f2",
    "check_f2prime",
    "check_f3",
    "check_f4",
    "check_critical_growth",
    "check_all",
    "tau_check",
    "young_phi",
    "growth_envelope_check",
]

LOG_SATURATION = 700.0
SAMPLES = 10_000
T_MIN = 1e-6

_GL_X, _GL_W = np.polynomial.legendre.leggauss(64)


class SaturationError(ArithmeticError):
    """An argument exceeds the range where the nonlinearity is representable."""


FAMILIES = ("power_exp", "custom_table", "callable")


@dataclass(frozen=True)
class NonlinearitySpec:
    family: str = "power_exp"
    lam: float = 1.0
    alpha0: float = 1.0
    qf: float = 5.0
    theta: float = 0.0
    M0: float = 1.0
    t0: float = 1.0
    beta0: float = math.inf
    table_t: Optional[tuple] = None
    table_f: Optional[tuple] = None
    f_func: Optional[Callable] = field(default=None, compare=False)
    F_func: Optional[Callable] = field(default=None, compare=False)
    t_saturation: Optional[float] = None

    def __post_init__(self):
        errs = []
        if self.family not in FAMILIES:
            errs.append(f"family must be one of {FAMILIES}, got {self.family!r}")
        if not self.alpha0 > 0:
            errs.append("alpha0 must be positive")
        if not self.lam > 0:
            errs.append("lambda must be positive")
        if self.family == "power_exp" and not self.qf >= 5:
            errs.append("qf must be >= 5 so that f(t)/t^5 is increasing")
        if not 0 <= self.theta < 1:
            errs.append("theta must lie in [0,1)")
        if not (self.M0 > 0 and self.t0 > 0):
            errs.append("M0 and t0 must be positive")
        if not self.beta0 > 0:
            errs.append("beta0 must be positive (may be inf)")
        if self.family == "custom_table":
            if self.table_t is None or self.table_f is None:
                errs.append("custom_table needs table_t and table_f")
            else:
                t = np.asarray(self.table_t, float)
                fv = np.asarray(self.table_f, float)
                if t.shape != fv.shape or t.ndim != 1 or t.size < 2:
                    errs.append("table_t and table_f must be 1-d of equal length >= 2")
                elif t[0] != 0.0 or np.any(np.diff(t) <= 0):
                    errs.append("table_t must start at 0 and increase strictly")
                elif fv[0] != 0.0 or not np.all(np.isfinite(fv)):
                    errs.append("table_f must be finite with f(0) = 0")
        if self.family == "callable" and self.f_func is None:
            errs.append("callable family needs f_func")
        if errs:
            raise ValueError("; ".join(errs))

    # -- convenience constructors ------------------------------------------
    @classmethod
    def custom(cls, f, F=None, t_saturation=1e6, **kw) -> "NonlinearitySpec":
        return cls(family="callable", f_func=f, F_func=F, t_saturation=t_saturation, **kw)

    @classmethod
    def pure_power(cls, q=5.0, lam=1.0) -> "NonlinearitySpec":
        return cls.custom(lambda t: lam * np.maximum(t, 0.0) ** q,
                          lambda t: lam * np.maximum(t, 0.0) ** (q + 1) / (q + 1))

    @classmethod
    def zero(cls) -> "NonlinearitySpec":
        return cls.custom(lambda t: np.zeros_like(t), lambda t: np.zeros_like(t))

    @classmethod
    def from_table(cls, t, f, **kw) -> "NonlinearitySpec":
        return cls(family="custom_table", table_t=tuple(map(float, t)),
                   table_f=tuple(map(float, f)), **kw)

    # -- evaluation ---------------------------------------------------------
    @cached_property
    def t_sat(self) -> float:
        """Largest argument accepted by :meth:`f` and :meth:`F`."""
        if self.t_saturation is not None:
            return float(self.t_saturation)
        if self.family == "custom_table":
            return float(self.table_t[-1])
        if self.family == "callable":
            return 1e6

        def g(t):
            return self._log_f(t) - LOG_SATURATION
        hi = 1.0
        while g(hi) < 0:
            hi *= 2.0
        return brentq(g, 1e-3, hi, xtol=1e-14, rtol=1e-15)

    def _log_f(self, t):
        return math.log(self.lam) + self.qf * np.log(t) + self.alpha0 * t * t

    def _check_range(self, t):
        if np.any(t > self.t_sat):
            raise SaturationError(f"argument {float(np.max(t)):.6g} exceeds the saturation "
                                  f"threshold {self.t_sat:.6g}")

    def f(self, t):
        t = np.asarray(t, dtype=float)
        self._check_range(t)
        pos = t > 0
        out = np.zeros_like(t)
        tp = t[pos]
        if self.family == "power_exp":
            out[pos] = np.exp(self._log_f(tp))
        elif self.family == "custom_table":
            out[pos] = np.interp(tp, self.table_t, self.table_f)
        else:
            out[pos] = self.f_func(tp)
        return out

    def F(self, t):
        t = np.asarray(t, dtype=float)
        self._check_range(t)
        pos = t > 0
        out = np.zeros_like(t)
        tp = t[pos]
        if tp.size == 0:
            return out
        if self.family == "power_exp":
            k = 0.5 * (self.qf - 1.0)
            X = self.alpha0 * tp * tp
            logF = (math.log(0.5 * self.lam) - (k + 1.0) * math.log(self.alpha0) + X
                    + (k + 1.0) * np.log(X) - math.log(k + 1.0)
                    + np.log(hyp1f1(1.0, k + 2.0, -X)))
            out[pos] = np.exp(logF)
        elif self.family == "custom_table":
            nodes = np.asarray(self.table_t)
            vals = np.asarray(self.table_f)
            cum = np.concatenate(([0.0], np.cumsum(0.5 * np.diff(nodes) * (vals[1:] + vals[:-1]))))
            idx = np.clip(np.searchsorted(nodes, tp, side="right") - 1, 0, nodes.size - 2)
            ft = np.interp(tp, nodes, vals)
            out[pos] = cum[idx] + 0.5 * (tp - nodes[idx]) * (vals[idx] + ft)
        elif self.F_func is not None:
            out[pos] = self.F_func(tp)
        else:
            # 64-point Gauss-Legendre on [0, t]
            x = 0.5 * (_GL_X + 1.0)
            vals = self.f_func(np.multiply.outer(tp, x).ravel()).reshape(tp.size, x.size)
            out[pos] = 0.5 * tp * (vals @ _GL_W)
        return out


def f_eval(spec: NonlinearitySpec, t):
    out = spec.f(t)
    return float(out) if np.ndim(out) == 0 else out


def F_eval(spec: NonlinearitySpec, t):
    out = spec.F(t)
    return float(out) if np.ndim(out) == 0 else out


# ---------------------------------------------------------------------------
# hypothesis checks

@dataclass
class HypothesisReport:
    name: str
    holds: bool
    detail: dict = field(default_factory=dict)

    @property
    def verdict(self) -> str:
        return "pass" if self.holds else "fail"

    def to_dict(self) -> dict:
        return {"name": self.name, "verdict": self.verdict, **self.detail}


def _sample(spec: NonlinearitySpec, lo=T_MIN, n=SAMPLES):
    top = spec.t_sat * (1.0 - 1e-9)
    return np.geomspace(lo, top, n), top


def check_f1(spec: NonlinearitySpec) -> HypothesisReport:
    """f = 0 on (-inf, 0] and f(t) = o(t) at 0+."""
    neg = -np.geomspace(1e-8, min(spec.t_sat, 1e3), 200)
    neg_ok = bool(np.all(spec.f(np.append(neg, 0.0)) == 0.0))
    small = np.geomspace(1e-10, 1e-4, 61)
    ratio = spec.f(small) / small
    # o(t): the quotient must shrink towards 0 as t decreases
    vanish = bool(ratio[0] < 1e-6 and ratio[0] <= ratio[-1])
    return HypothesisReport("f1", neg_ok and vanish,
                            {"zero_on_negative_axis": neg_ok,
                             "f_over_t_at_1e-10": float(ratio[0]),
                             "f_over_t_at_1e-4": float(ratio[-1])})


def check_f2(spec: NonlinearitySpec, samples: int = SAMPLES) -> HypothesisReport:
    """t -> f(t)/t^5 strictly increasing on the sampled range."""
    t, top = _sample(spec, n=samples)
    if spec.family == "power_exp":
        # increments of log(f/t^5) without cancellation
        inc = (spec.qf - 5.0) * np.diff(np.log(t)) + spec.alpha0 * np.diff(t) * (t[1:] + t[:-1])
    else:
        fv = spec.f(t)
        if np.any(fv <= 0):
            k = int(np.argmax(fv <= 0))
            return HypothesisReport("f2", False, {"first_violation": [float(t[k]), float(t[k])],
                                                  "reason": "f not positive",
                                                  "sampled_range": [T_MIN, top]})
        lr = np.log(fv) - 5.0 * np.log(t)
        inc = np.diff(lr)
    bad = np.nonzero(inc <= 0)[0]
    detail = {"sampled_range": [T_MIN, float(top)], "saturation_threshold": float(spec.t_sat)}
    if bad.size:
        k = int(bad[0])
        detail["first_violation"] = [float(t[k]), float(t[k + 1])]
        detail["violations"] = int(bad.size)
        return HypothesisReport("f2", False, detail)
    return HypothesisReport("f2", True, detail)


def check_f2prime(spec: NonlinearitySpec, samples: int = SAMPLES, tol: float = 1e-9) -> HypothesisReport:
    """f(t) t - 6 F(t) >= -tol |f(t) t| on the sampled range."""
    t, top = _sample(spec, n=samples)
    ft = spec.f(t) * t
    H = ft - 6.0 * spec.F(t)
    bad = np.nonzero(H < -tol * np.abs(ft))[0]
    detail = {"sampled_range": [T_MIN, float(top)], "min_relative": float(np.min(H / np.maximum(np.abs(ft), 1e-300)))}
    if bad.size:
        detail["first_violation"] = float(t[bad[0]])
        return HypothesisReport("f2prime", False, detail)
    return HypothesisReport("f2prime", True, detail)


def check_f3(spec: NonlinearitySpec, samples: int = SAMPLES) -> HypothesisReport:
    """0 < t^theta F(t) <= M0 f(t) for t > t0, with the declared constants."""
    top = spec.t_sat * (1.0 - 1e-9)
    if spec.t0 >= top:
        return HypothesisReport("f3", False, {"reason": "t0 beyond saturation threshold"})
    t = np.geomspace(spec.t0 * (1 + 1e-12), top, samples)
    lhs = t**spec.theta * spec.F(t)
    rhs = spec.M0 * spec.f(t)
    bad = np.nonzero((lhs <= 0) | (lhs > rhs))[0]
    detail = {"theta": spec.theta, "M0": spec.M0, "t0": spec.t0,
              "max_ratio": float(np.max(lhs / np.maximum(spec.f(t), 1e-300)))}
    if bad.size:
        detail["first_violation"] = float(t[bad[0]])
        return HypothesisReport("f3", False, detail)
    return HypothesisReport("f3", True, detail)


def check_f4(spec: NonlinearitySpec, samples: int = 2000) -> HypothesisReport:
    """F(t) exp(-alpha0 t^2) tends to a positive (possibly infinite) limit."""
    top = spec.t_sat * (1.0 - 1e-9)
    t = np.linspace(0.5 * top, top, samples)
    g = np.log(np.maximum(spec.F(t), 1e-300)) - spec.alpha0 * t * t
    tail = np.diff(g[-samples // 10:])
    if np.all(tail > 0):
        beta = math.inf
    else:
        beta = float(np.exp(g[-1]))
    holds = bool(beta > 1e-12)
    return HypothesisReport("f4", holds, {"beta0_estimate": beta if math.isfinite(beta) else "inf",
                                          "declared_beta0": spec.beta0 if math.isfinite(spec.beta0) else "inf"})


def check_critical_growth(spec: NonlinearitySpec, rel: float = 0.1) -> HypothesisReport:
    """f e^{-alpha t^2} decays for alpha > alpha0 and grows for alpha < alpha0 near saturation."""
    top = spec.t_sat * (1.0 - 1e-9)
    t = np.linspace(0.5 * top, top, 200)
    logf = np.log(np.maximum(spec.f(t), 1e-300))
    above = logf - spec.alpha0 * (1 + rel) * t * t
    below = logf - spec.alpha0 * (1 - rel) * t * t
    dec = bool(np.all(np.diff(above) < 0))
    inc = bool(np.all(np.diff(below) > 0))
    return HypothesisReport("critical_growth", dec and inc,
                            {"decays_above_alpha0": dec, "grows_below_alpha0": inc,
                             "probe_rel": rel})


def check_all(spec: NonlinearitySpec) -> dict:
    reports = [check_f1(spec), check_f2(spec), check_f2prime(spec), check_f3(spec),
               check_f4(spec), check_critical_growth(spec)]
    return {r.name: r for r in reports}


def tau_check(spec: NonlinearitySpec, s, t):
    """(1 - t^6)/6 f(s) s + F(st) - F(s); nonnegative under (f2), zero at t = 1."""
    s = np.asarray(s, dtype=float)
    t = np.asarray(t, dtype=float)
    out = (1.0 - t**6) / 6.0 * spec.f(s) * s + spec.F(s * t) - spec.F(s)
    return float(out) if out.ndim == 0 else out


# ---------------------------------------------------------------------------
# Young function

@dataclass(frozen=True)
class YoungParams:
    alpha: float
    p: float = 1.5

    def __post_init__(self):
        if not self.alpha >= 0:
            raise ValueError("alpha must be nonnegative")
        if not 1.0 < self.p < 2.0:
            raise ValueError(f"p must lie in (1,2), got {self.p!r}")

    @property
    def p_star_exact(self) -> Fraction:
        pf = Fraction(repr(float(self.p)))
        return 2 * pf / (2 - pf)

    @property
    def p_star(self) -> float:
        return float(self.p_star_exact)

    @property
    def j0(self) -> int:
        # least j >= 1 with 2j >= p*
        return max(1, math.ceil(self.p_star_exact / 2))


def young_phi(yp: YoungParams, t):
    """e^{alpha t^2} minus its first j0 Taylor terms."""
    t = np.asarray(t, dtype=float)
    x = yp.alpha * t * t
    if np.any(x > LOG_SATURATION):
        raise SaturationError(f"alpha t^2 = {float(np.max(x)):.6g} exceeds {LOG_SATURATION}")
    j0 = yp.j0
    out = np.empty_like(x)
    small = x < 1.0
    xs = x[small]
    # tail series sum_{j >= j0} x^j / j!
    term = xs**j0 / math.factorial(j0)
    acc = term.copy()
    j = j0
    while term.size and np.any(term > 1e-18 * acc):
        j += 1
        term = term * xs / j
        acc += term
    out[small] = acc
    xl = x[~small]
    head = sum(xl**j / math.factorial(j) for j in range(j0))
    out[~small] = np.exp(xl) - head
    return float(out) if out.ndim == 0 else out


def growth_envelope_check(spec: NonlinearitySpec, yp: YoungParams, q: float, eps: float,
                          samples: int = SAMPLES) -> float:
    """Smallest sampled C with |f(s)| <= eps s + C s^{q-1} Phi(s)."""
    if not yp.alpha > spec.alpha0:
        raise ValueError(f"envelope needs alpha > alpha0 (alpha={yp.alpha}, alpha0={spec.alpha0})")
    if not (q > 2 and eps > 0):
        raise ValueError("need q > 2 and eps > 0")
    top = min(spec.t_sat, math.sqrt(LOG_SATURATION / yp.alpha)) * (1.0 - 1e-9)
    s = np.geomspace(T_MIN, top, samples)
    excess = np.abs(spec.f(s)) - eps * s
    ratio = excess / young_phi(yp, s) / s ** (q - 1.0)
    return float(max(0.0, np.max(ratio)))
