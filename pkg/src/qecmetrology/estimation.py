"""Cramér-Rao bounds, interrogation-time optimisation and scaling sweeps."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, asdict
from typing import Callable, Optional, Sequence

import numpy as np

from .codes import _majority_tail, logical_flip_tail

__all__ = [
    "EstimationBudget",
    "PrecisionBound",
    "OptimizationResult",
    "BaselineBounds",
    "SweepConfig",
    "SweepRow",
    "SweepResult",
    "OptimizationError",
    "precision_bound",
    "optimize_interrogation_time",
    "default_bracket",
    "t_opt_closed_form",
    "f_per_t_closed_form",
    "t_opt_asymptote",
    "f_per_t_asymptote",
    "closed_form_valid",
    "baseline_bounds",
    "odd_ceil_log",
    "encoded_retention_power",
    "encoded_objective",
    "scaling_sweep",
    "RETENTION_THRESHOLD",
    "fit_loglog_slope",
]

RETENTION_THRESHOLD = 0.99
GAMMA_T_VALIDITY = 0.1
CLOSED_NUMERIC_TOL = 0.10
GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


class OptimizationError(ValueError):
    """Raised when the time objective is not finite on the search grid."""


@dataclass(frozen=True)
class EstimationBudget:
    nu: Optional[float] = None
    T_total: Optional[float] = None

    def __post_init__(self):
        if self.nu is None and self.T_total is None:
            raise ValueError("give nu (phase mode) or T_total (frequency mode)")
        if self.nu is not None and self.nu < 1:
            raise ValueError("nu must be >= 1")
        if self.T_total is not None and not self.T_total > 0:
            raise ValueError("T_total must be > 0")

    @property
    def mode(self) -> str:
        return "phase" if self.nu is not None else "frequency"


@dataclass(frozen=True)
class PrecisionBound:
    value: float
    mode: str
    achieving_state: str = "GHZ"

    @property
    def delta_lambda(self) -> float:
        if self.mode != "phase":
            raise AttributeError("frequency-mode bound is delta_lambda_sqrtT")
        return self.value

    @property
    def delta_lambda_sqrtT(self) -> float:
        if self.mode != "frequency":
            raise AttributeError("phase-mode bound is delta_lambda")
        return self.value


def precision_bound(f: float, budget: EstimationBudget, achieving_state: str = "GHZ") -> PrecisionBound:
    """``1/sqrt(nu F)`` in phase mode; in frequency mode ``f`` is ``F/t`` and the
    result is ``delta_lambda * sqrt(T) = (F/t)^(-1/2)``."""
    if not f > 0:
        raise ValueError(f"Fisher information must be > 0, got {f}")
    if budget.mode == "phase":
        return PrecisionBound(1.0 / math.sqrt(budget.nu * f), "phase", achieving_state)
    return PrecisionBound(1.0 / math.sqrt(f), "frequency", achieving_state)


@dataclass(frozen=True)
class OptimizationResult:
    t_opt: float
    value: float
    at_boundary: bool
    evaluations: int


def default_bracket(gamma: float) -> tuple[float, float]:
    if not gamma > 0:
        raise ValueError("default bracket needs gamma > 0")
    return 1e-6 / gamma, 10.0 / gamma


def optimize_interrogation_time(
    objective: Callable[[float], float],
    t_max: float,
    t_min: float | None = None,
    *,
    seeds: int = 200,
    rtol: float = 1e-8,
) -> OptimizationResult:
    """Global maximiser of ``objective`` on ``[t_min, t_max]``.

    A log-spaced grid picks the best seed (ties go to the largest ``t``), then
    golden-section search on ``log t`` between its neighbours refines it.
    """
    if t_min is None:
        t_min = t_max * 1e-7
    if not 0 < t_min < t_max:
        raise ValueError("need 0 < t_min < t_max")
    grid = np.geomspace(t_min, t_max, seeds)
    vals = np.array([objective(float(t)) for t in grid], dtype=float)
    bad = ~np.isfinite(vals)
    if bad.any():
        raise OptimizationError(f"objective not finite at t = {grid[bad][0]:.6g}")
    best = int(np.flatnonzero(vals == vals.max())[-1])
    evals = seeds
    if best == seeds - 1 or best == 0:
        return OptimizationResult(float(grid[best]), float(vals[best]), True, evals)

    def f(u: float) -> float:
        return objective(math.exp(u))

    a, b = math.log(grid[best - 1]), math.log(grid[best + 1])
    c, d = b - GOLDEN * (b - a), a + GOLDEN * (b - a)
    fc, fd = f(c), f(d)
    evals += 2
    # interval width in log t is the relative tolerance in t
    while b - a > rtol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - GOLDEN * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + GOLDEN * (b - a)
            fd = f(d)
        evals += 1
    u = 0.5 * (a + b)
    t, v = math.exp(u), f(u)
    if v < vals[best]:
        t, v = float(grid[best]), float(vals[best])
    return OptimizationResult(t, v, False, evals + 1)


def _check_closed(m: int, gamma: float, n: int) -> None:
    if m < 3 or m % 2 == 0:
        raise ValueError(f"closed forms need odd m >= 3, got {m}")
    if not gamma > 0:
        raise ValueError("gamma must be > 0")
    if n < 1:
        raise ValueError("N must be >= 1")


def _closed_base(m: int, gamma: float, n: int) -> float:
    h = (m + 1) // 2
    return 2.0 * math.comb(m, h) * (gamma / 2.0) ** h * (3 + n * m)


def t_opt_closed_form(m: int, gamma: float, n: int) -> float:
    """``[2 C(m,(m+1)/2) (gamma/2)^((m+1)/2) (3 + N m)]^(-2/(m+2))``."""
    _check_closed(m, gamma, n)
    return _closed_base(m, gamma, n) ** (-2.0 / (m + 2))


def f_per_t_closed_form(m: int, gamma: float, n: int) -> float:
    """``N^2 t_opt ((N m + 2)/(N m + 3))^(2N)``."""
    _check_closed(m, gamma, n)
    t = _closed_base(m, gamma, n) ** (-2.0 / (m + 2))
    return n * n * t * ((n * m + 2) / (n * m + 3)) ** (2 * n)


def closed_form_valid(m: int, gamma: float, n: int) -> bool:
    return gamma * t_opt_closed_form(m, gamma, n) <= GAMMA_T_VALIDITY


def t_opt_asymptote(gamma: float, n: int | None = None, m: int | None = None) -> float:
    """``N^(-2/m) / (2 gamma m^(2/m))``, or its limit ``1/(2 gamma e^2)`` without ``n`` and ``m``."""
    if n is None or m is None:
        return 1.0 / (2.0 * gamma * math.e**2)
    return n ** (-2.0 / m) / (2.0 * gamma * m ** (2.0 / m))


def f_per_t_asymptote(n: int, gamma: float, m: int | None = None) -> float:
    """``N^(2(1-1/m)) / (2 gamma m^(2/m))``, or its limit ``N^2/(2 gamma e^2)`` when ``m`` is None."""
    if m is None:
        return n * n / (2.0 * gamma * math.e**2)
    return n ** (2.0 * (1.0 - 1.0 / m)) / (2.0 * gamma * m ** (2.0 / m))


@dataclass(frozen=True)
class BaselineBounds:
    parallel: float
    classical: float
    transversal: float
    transversal_t_opt: float
    ghz_t_opt: float


def baseline_bounds(n: int, gamma: float) -> BaselineBounds:
    """Reference values of ``delta_lambda sqrt(T)`` and interrogation times."""
    if n < 1 or not gamma > 0:
        raise ValueError("need N >= 1 and gamma > 0")
    return BaselineBounds(
        parallel=math.sqrt(2 * gamma / n),
        classical=math.sqrt(2 * gamma * math.e / n),
        transversal=math.sqrt((9 * gamma) ** (1 / 3) / (2 * n ** (5 / 3))),
        transversal_t_opt=(3 / (gamma * n)) ** (1 / 3),
        ghz_t_opt=1 / (2 * n * gamma),
    )


def odd_ceil_log(n: int) -> int:
    """Smallest odd integer ``>= ln N`` (at least 1)."""
    if n < 1:
        raise ValueError("N must be >= 1")
    m = max(1, math.ceil(math.log(n) - 1e-12))
    return m if m % 2 else m + 1


def encoded_retention_power(gamma: float, m: int, n: int, t: float) -> float:
    """``(2 p_L(t) - 1)^(2N)`` with ``p = (1 + exp(-gamma t))/2`` per qubit."""
    if t <= 0 or gamma == 0:
        return 1.0
    flip = -math.expm1(-gamma * t) / 2.0
    tail = _majority_tail(flip, m)
    if tail >= 0.5:
        return 0.0
    return math.exp(2 * n * math.log1p(-2.0 * tail))


def encoded_objective(gamma: float, m: int, n: int) -> Callable[[float], float]:
    """``F(t)/t = t (2 p_L(t) - 1)^(2N) N^2`` for block size ``m``."""
    return lambda t: t * encoded_retention_power(gamma, m, n, t) * n * n


@dataclass(frozen=True)
class SweepConfig:
    n_values: tuple[int, ...]
    m_policy: str = "fixed"
    m: int = 3
    mode: str = "frequency"
    gamma: float = 0.01
    p: float | None = None
    t0: float = 1.0
    t_max: float = 1.0
    numeric: bool = True
    workers: int = 1

    def __post_init__(self):
        object.__setattr__(self, "n_values", tuple(int(n) for n in self.n_values))
        if not self.n_values:
            raise ValueError("empty N grid")
        if min(self.n_values) < 1:
            raise ValueError("N values must be >= 1")
        if self.m_policy not in ("fixed", "ceil_log"):
            raise ValueError(f"unknown m policy {self.m_policy!r}")
        if self.m_policy == "fixed" and (self.m < 1 or self.m % 2 == 0):
            raise ValueError("m must be odd and >= 1")
        if self.mode not in ("frequency", "phase"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.mode == "phase":
            if self.p is None or not 0.5 < self.p <= 1.0:
                raise ValueError("phase mode needs p in (1/2, 1]")
        elif self.gamma < 0:
            raise ValueError("gamma must be >= 0")
        if not self.t0 > 0 or not self.t_max > 0:
            raise ValueError("times must be > 0")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")

    def m_for(self, n: int) -> int:
        return self.m if self.m_policy == "fixed" else odd_ceil_log(n)

    @property
    def effective_gamma(self) -> float:
        if self.mode == "phase":
            # dephasing rate giving retention p after the fixed time t0
            return -math.log(2 * self.p - 1) / self.t0 if self.p < 1 else 0.0
        return self.gamma


@dataclass(frozen=True)
class SweepRow:
    N: int
    m: int
    gamma: float
    t_opt: float
    f_per_t: float
    delta_lambda_sqrtT: float
    baseline_parallel: float
    baseline_classical: float
    baseline_transversal: float
    heisenberg_retention: float
    t_opt_numeric: Optional[float] = None
    f_per_t_numeric: Optional[float] = None
    flags: tuple[str, ...] = ()

    def as_dict(self) -> dict:
        d = asdict(self)
        d["flags"] = list(self.flags)
        return d


@dataclass(frozen=True)
class SweepResult:
    config: SweepConfig
    rows: tuple[SweepRow, ...]
    n_max: Optional[int] = None
    meta: dict = field(default_factory=dict)


def _baselines(n: int, gamma: float) -> tuple[float, float, float]:
    if gamma == 0:
        return 0.0, 0.0, 0.0
    b = baseline_bounds(n, gamma)
    return b.parallel, b.classical, b.transversal


def _phase_row(cfg: SweepConfig, n: int) -> SweepRow:
    m = cfg.m_for(n)
    gamma = cfg.effective_gamma
    eps_l = 2.0 * logical_flip_tail(cfg.p, m)
    retention = math.exp(2 * n * math.log1p(-eps_l)) if eps_l < 1 else 0.0
    f = retention * n * n
    fpt = f / cfg.t0
    flags = [] if retention >= RETENTION_THRESHOLD else ["below_retention"]
    return SweepRow(n, m, gamma, cfg.t0, fpt, 1.0 / math.sqrt(fpt) if fpt > 0 else math.inf,
                    *_baselines(n, gamma), retention, flags=tuple(flags))


def _frequency_row(cfg: SweepConfig, n: int) -> SweepRow:
    m = cfg.m_for(n)
    gamma = cfg.gamma
    flags: list[str] = []
    if gamma == 0:
        t = cfg.t_max
        fpt = t * n * n
        return SweepRow(n, m, 0.0, t, fpt, 1.0 / math.sqrt(fpt), 0.0, 0.0, 0.0, 1.0,
                        t if cfg.numeric else None, fpt if cfg.numeric else None, ("noiseless",))
    if m == 1:
        t = 1.0 / (2 * n * gamma)
        fpt = n / (2 * gamma * math.e)
        flags.append("unencoded")
    else:
        t = t_opt_closed_form(m, gamma, n)
        fpt = f_per_t_closed_form(m, gamma, n)
        if gamma * t > GAMMA_T_VALIDITY:
            flags.append("gamma_t_large")
    t_num = f_num = None
    if cfg.numeric:
        lo, hi = default_bracket(gamma)
        res = optimize_interrogation_time(encoded_objective(gamma, m, n), hi, lo)
        t_num, f_num = res.t_opt, res.value
        if res.at_boundary:
            flags.append("numeric_boundary")
        if abs(fpt - f_num) > CLOSED_NUMERIC_TOL * f_num or abs(t - t_num) > CLOSED_NUMERIC_TOL * t_num:
            flags.append("closed_numeric_gap")
    retention = encoded_retention_power(gamma, m, n, t)
    return SweepRow(n, m, gamma, t, fpt, 1.0 / math.sqrt(fpt), *_baselines(n, gamma), retention,
                    t_num, f_num, tuple(flags))


def scaling_sweep(cfg: SweepConfig) -> SweepResult:
    """Tabulate optimal Fisher information per time over the ``N`` grid.

    Frequency mode uses the closed-form ``t_opt`` and ``(F/t)_opt`` columns
    (numeric optimum of the exact objective alongside).  Phase mode holds the
    per-qubit retention ``p`` fixed over time ``t0``.
    """
    row = _phase_row if cfg.mode == "phase" else _frequency_row
    ns = sorted(set(cfg.n_values))
    if cfg.workers > 1:
        with ThreadPoolExecutor(cfg.workers) as ex:
            rows = list(ex.map(lambda n: row(cfg, n), ns))
    else:
        rows = [row(cfg, n) for n in ns]
    rows.sort(key=lambda r: (r.N, r.m))
    n_max = None
    for r in rows:
        if r.heisenberg_retention < RETENTION_THRESHOLD:
            break
        n_max = r.N
    return SweepResult(cfg, tuple(rows), n_max, {"retention_threshold": RETENTION_THRESHOLD})


def fit_loglog_slope(x: Sequence[float], y: Sequence[float]) -> float:
    """Least-squares slope of ``log y`` against ``log x``."""
    lx, ly = np.log(np.asarray(x, float)), np.log(np.asarray(y, float))
    return float(np.polyfit(lx, ly, 1)[0])

