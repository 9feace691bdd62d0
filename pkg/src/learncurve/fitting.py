"""Power-law fitting for learning curves.

Two estimation routes for ``L(N) = c * N**alpha``:

* :func:`fit_loglog` -- ordinary least squares on (log N, log L), using
  ``log L = log c + alpha * log N``.
* :func:`fit_nonlinear` -- damped Gauss-Newton on the original scale,
  minimizing ``sum (L_i - c * N_i**alpha)**2``.

The two weight residuals differently and therefore disagree on noisy
data; :func:`fit_discrepancy` quantifies by how much.
:func:`detect_power_law_region` locates the grid point where power-law
behavior starts, and :func:`bootstrap_ci` attaches case-resampling
confidence intervals to either fit.  Natural logarithms are used
throughout; the exponent is base-invariant.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from typing import Mapping, NamedTuple

import numpy as np

from .errors import (
    InsufficientDataError,
    LogDomainError,
    NonConvergenceError,
    NoRegionError,
    ParameterError,
)
from .model import Measurement, MeasurementSet, aggregate

LOGLOG = "loglog"
NONLINEAR = "nonlinear"

GN_MAX_ITER = 200
GN_REL_TOL = 1e-10
GN_MAX_HALVINGS = 30


@dataclass(frozen=True)
class PowerLawFit:
    """Fitted ``L(N) = c * N**alpha``.

    ``rss`` and ``r_squared`` live in the fitting space: log-log space for
    the ``loglog`` method, the original linear space for ``nonlinear``.
    ``r_squared`` is ``None`` when the total sum of squares vanishes (flat
    data) and is clamped into [0, 1] otherwise.  ``n_range`` records the
    smallest and largest sample count actually used.  ``iterations`` is a
    solver diagnostic, set by the nonlinear route only.
    """

    alpha: float
    c: float
    method: str
    n_range: tuple[int, int]
    rss: float
    r_squared: float | None
    ci_alpha: tuple[float, float] | None = None
    iterations: int | None = None

    def __post_init__(self):
        if not self.c > 0:
            raise ParameterError(f"fitted c must be positive, got {self.c}")
        if not self.n_range[0] < self.n_range[1]:
            raise ParameterError(f"n_range must be increasing, got {self.n_range}")
        if self.rss < 0:
            raise ParameterError(f"rss must be non-negative, got {self.rss}")
        if self.r_squared is not None and not 0.0 <= self.r_squared <= 1.0:
            raise ParameterError(f"r_squared must lie in [0, 1], got {self.r_squared}")

    def predict(self, n: float) -> float:
        return self.c * float(n) ** self.alpha


@dataclass(frozen=True)
class RegionSegmentation:
    """Detected phase boundaries on the measurement grid.

    ``n_start_power_law`` is the grid point where power-law behavior
    begins; ``n_end_power_law`` is the grid point where the curve starts
    flattening into irreducible error, or ``None`` when that phase was
    not reached.  ``diagnostics`` maps every candidate start to the
    r-squared of the log-log fit over the suffix from that candidate.
    """

    n_start_power_law: int
    n_end_power_law: int | None
    diagnostics: Mapping[int, float | None]

    def __post_init__(self):
        if self.n_end_power_law is not None and self.n_start_power_law > self.n_end_power_law:
            raise ParameterError("region start must not exceed region end")


class Discrepancy(NamedTuple):
    """Relative parameter differences between two fits (reference = first)."""

    alpha: float
    c: float


def _select(ms: MeasurementSet, n_min, n_max) -> list[Measurement]:
    """Points of a single-metric set within [n_min, n_max], >= 2 distinct N."""
    if len(ms) == 0:
        raise InsufficientDataError("measurement set is empty")
    metrics = ms.metrics()
    if len(metrics) != 1:
        raise ParameterError(f"fitting expects a single metric, got {metrics}; use only()")
    lo = -math.inf if n_min is None else n_min
    hi = math.inf if n_max is None else n_max
    pts = [p for p in ms if lo <= p.n <= hi]
    distinct = {p.n for p in pts}
    if len(distinct) < 2:
        raise InsufficientDataError(
            f"need at least 2 distinct sample counts in [{n_min}, {n_max}], found {len(distinct)}"
        )
    return pts


def _xy(pts: list[Measurement], on_means: bool) -> tuple[np.ndarray, np.ndarray]:
    if on_means:
        rows = aggregate(MeasurementSet(tuple(pts)))
        return (
            np.asarray([r.n for r in rows], dtype=float),
            np.asarray([r.mean for r in rows], dtype=float),
        )
    return (
        np.asarray([p.n for p in pts], dtype=float),
        np.asarray([p.value for p in pts], dtype=float),
    )


def _ols(x: np.ndarray, y: np.ndarray) -> tuple[float, float, float, float]:
    """Least-squares line y = intercept + slope*x; returns slope, intercept, rss, ss_tot."""
    xm, ym = x.mean(), y.mean()
    xc = x - xm
    slope = float((xc * (y - ym)).sum() / (xc * xc).sum())
    intercept = float(ym - slope * xm)
    resid = y - (intercept + slope * x)
    return slope, intercept, float(resid @ resid), float(((y - ym) ** 2).sum())


def _r_squared(rss: float, ss_tot: float) -> float | None:
    if ss_tot == 0.0:
        return None
    return min(max(1.0 - rss / ss_tot, 0.0), 1.0)


def fit_loglog(
    ms: MeasurementSet,
    n_min: int | None = None,
    n_max: int | None = None,
    *,
    on_means: bool = True,
) -> PowerLawFit:
    """Least-squares line in log-log space.

    With ``on_means`` (the default, matching plotted mean curves) one
    point per distinct N enters the regression; otherwise every replicate
    is its own point.  All values in the window must be strictly positive.
    """
    pts = _select(ms, n_min, n_max)
    for p in pts:
        if p.value <= 0.0:
            raise LogDomainError(
                f"value {p.value!r} at (metric={p.metric!r}, n={p.n}, replicate={p.replicate}) "
                "is not positive; logarithm undefined"
            )
    n_arr, y_arr = _xy(pts, on_means)
    alpha, log_c, rss, ss_tot = _ols(np.log(n_arr), np.log(y_arr))
    used = [p.n for p in pts]
    return PowerLawFit(
        alpha=alpha,
        c=math.exp(log_c),
        method=LOGLOG,
        n_range=(min(used), max(used)),
        rss=rss,
        r_squared=_r_squared(rss, ss_tot),
    )


def _gauss_newton(
    n: np.ndarray, y: np.ndarray, c0: float, a0: float
) -> tuple[float, float, float, int, bool]:
    """Damped Gauss-Newton for min sum (y - c*n**a)**2.

    Full step first, then step halving (factor 0.5, at most
    ``GN_MAX_HALVINGS`` halvings) until the residual sum of squares
    decreases; candidates with c <= 0 are rejected the same way.  If no
    improving step exists the iterate is stationary and we declare
    convergence; otherwise convergence means a relative rss decrease
    below ``GN_REL_TOL``.  Returns (c, alpha, rss, iterations, converged).
    """
    ln_n = np.log(n)
    c, a = float(c0), float(a0)
    f = c * n**a
    rss = float(((y - f) ** 2).sum())
    for iteration in range(1, GN_MAX_ITER + 1):
        pow_na = n**a
        f = c * pow_na
        r = y - f
        jac = np.column_stack((pow_na, f * ln_n))  # d/dc, d/dalpha
        try:
            delta = np.linalg.solve(jac.T @ jac, jac.T @ r)
        except np.linalg.LinAlgError:
            return c, a, rss, iteration, False
        step = 1.0
        cand = None
        for _ in range(GN_MAX_HALVINGS + 1):
            cc = float(c + step * delta[0])
            aa = float(a + step * delta[1])
            if cc > 0.0:
                rr = float(((y - cc * n**aa) ** 2).sum())
                if rr < rss:
                    cand = (cc, aa, rr)
                    break
            step *= 0.5
        if cand is None:
            # No descent step exists: stationary point, zero rss change.
            return c, a, rss, iteration, True
        rel_drop = (rss - cand[2]) / rss if rss > 0 else 0.0
        c, a, rss = cand
        if rel_drop < GN_REL_TOL:
            return c, a, rss, iteration, True
    return c, a, rss, GN_MAX_ITER, False


def fit_nonlinear(
    ms: MeasurementSet,
    n_min: int | None = None,
    n_max: int | None = None,
    *,
    on_means: bool = True,
    init: PowerLawFit | None = None,
) -> PowerLawFit:
    """Direct least squares on the original scale via damped Gauss-Newton.

    Starts from ``init`` when given, else from a log-log fit of the same
    window (restricted to strictly positive values, since zeros are legal
    here but have no logarithm).  Raises :class:`NonConvergenceError`
    carrying the last iterate if 200 iterations do not converge.
    """
    pts = _select(ms, n_min, n_max)
    n_arr, y_arr = _xy(pts, on_means)
    used = [p.n for p in pts]
    n_range = (min(used), max(used))

    if init is not None:
        c0, a0 = init.c, init.alpha
    else:
        pos = [p for p in pts if p.value > 0.0]
        if len({p.n for p in pos}) < 2:
            raise InsufficientDataError(
                "cannot derive an initial guess: fewer than 2 distinct sample counts "
                "with positive values; pass init explicitly"
            )
        pn, py = _xy(pos, on_means)
        a0, log_c0, _, _ = _ols(np.log(pn), np.log(py))
        c0 = math.exp(log_c0)

    c, a, rss, iterations, converged = _gauss_newton(n_arr, y_arr, c0, a0)
    ss_tot = float(((y_arr - y_arr.mean()) ** 2).sum())
    fit = PowerLawFit(
        alpha=a,
        c=c,
        method=NONLINEAR,
        n_range=n_range,
        rss=rss,
        r_squared=_r_squared(rss, ss_tot),
        iterations=iterations,
    )
    if not converged:
        raise NonConvergenceError(
            f"Gauss-Newton did not converge within {GN_MAX_ITER} iterations "
            f"(last rss {rss:.6g})",
            last_fit=fit,
        )
    return fit


def fit_discrepancy(a: PowerLawFit, b: PowerLawFit) -> Discrepancy:
    """Relative |difference| of alpha and c between two fits, reference = first."""
    if a.n_range[0] > b.n_range[1] or b.n_range[0] > a.n_range[1]:
        raise ParameterError(
            f"fits cover disjoint sample ranges {a.n_range} and {b.n_range}"
        )
    if a.alpha == 0.0:
        raise ParameterError("reference fit has zero exponent; relative discrepancy undefined")
    return Discrepancy(
        alpha=abs(a.alpha - b.alpha) / abs(a.alpha),
        c=abs(a.c - b.c) / abs(a.c),
    )


def detect_power_law_region(
    ms: MeasurementSet,
    plateau: float | None = None,
    r2_threshold: float = 0.98,
) -> RegionSegmentation:
    """Locate the start (and, when visible, the end) of the power-law phase.

    The start is the smallest grid point N whose suffix (all points with
    N' >= N) admits a log-log fit on per-N means with r-squared at or
    above ``r2_threshold``; when ``plateau`` is given, the per-N mean at N
    must additionally sit below ``0.95 * plateau``, which keeps
    random-guess points out of the region.  The end is reported only when
    the trailing means flatten: the log-log slope of the last three grid
    points must exceed a quarter of the fitted exponent.
    """
    grid = ms.distinct_n()
    if len(grid) < 4:
        raise InsufficientDataError(f"need at least 4 distinct sample counts, found {len(grid)}")
    mean_at = {row.n: row.mean for row in aggregate(ms)}

    diagnostics: dict[int, float | None] = {}
    start = None
    start_fit = None
    for n0 in grid[:-1]:  # the last point alone cannot anchor a fit
        fit = fit_loglog(ms, n_min=n0, n_max=grid[-1], on_means=True)
        diagnostics[n0] = fit.r_squared
        ok = fit.r_squared is not None and fit.r_squared >= r2_threshold
        if ok and plateau is not None:
            ok = mean_at[n0] < 0.95 * plateau
        if ok and start is None:
            start, start_fit = n0, fit
    if start is None:
        raise NoRegionError(
            f"no suffix of the grid reaches r_squared >= {r2_threshold}",
            diagnostics=diagnostics,
        )

    n_end = None
    tail = grid[-3:]
    tail_slope, _, _, _ = _ols(
        np.log(np.asarray(tail, dtype=float)),
        np.log(np.asarray([mean_at[n] for n in tail], dtype=float)),
    )
    if tail_slope > start_fit.alpha / 4.0 and tail[0] >= start:
        n_end = tail[0]
    return RegionSegmentation(start, n_end, diagnostics)


def bootstrap_ci(
    ms: MeasurementSet,
    method: str = LOGLOG,
    n_min: int | None = None,
    n_max: int | None = None,
    *,
    draws: int = 1000,
    confidence: float = 0.95,
    seed: int = 0,
    on_means: bool = True,
) -> PowerLawFit:
    """Case-resampling percentile confidence interval for the exponent.

    Replicates are resampled with replacement independently within each N,
    the curve is refitted per draw, and the interval is the percentile
    range of the resampled exponents.  Randomness for draw ``i`` is derived
    from ``(seed, i)``, so results do not depend on evaluation order.
    Returns the fit on the original data with ``ci_alpha`` attached.
    """
    if method not in (LOGLOG, NONLINEAR):
        raise ParameterError(f"unknown fit method {method!r}")
    if draws < 1:
        raise ParameterError(f"draws must be >= 1, got {draws}")
    if not 0.0 < confidence < 1.0:
        raise ParameterError(f"confidence must lie in (0, 1), got {confidence}")
    if seed < 0:
        raise ParameterError(f"seed must be a non-negative integer, got {seed}")

    if method == LOGLOG:
        base = fit_loglog(ms, n_min, n_max, on_means=on_means)
    else:
        base = fit_nonlinear(ms, n_min, n_max, on_means=on_means)

    pts = sorted(_select(ms, n_min, n_max), key=lambda p: (p.n, p.replicate))
    groups: dict[int, list[float]] = {}
    for p in pts:
        groups.setdefault(p.n, []).append(p.value)
    for n, vals in groups.items():
        if len(vals) < 2:
            raise InsufficientDataError(
                f"only one replicate at N={n}: case resampling needs at least 2 "
                "(residual bootstrap is not supported)"
            )
    ns = np.asarray(sorted(groups), dtype=float)
    log_ns = np.log(ns)
    values = [np.asarray(groups[int(n)], dtype=float) for n in ns]
    counts = np.asarray([v.size for v in values])
    offsets = np.concatenate(([0], np.cumsum(counts)))
    total = int(counts.sum())

    alphas = []
    failures = 0
    for i in range(draws):
        rng = np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(i,)))
        u = rng.random(total)
        resampled = [
            vals[(u[offsets[g] : offsets[g + 1]] * vals.size).astype(np.intp)]
            for g, vals in enumerate(values)
        ]
        if on_means:
            x = ns
            y = np.asarray([grp.mean() for grp in resampled])
        else:
            x = np.repeat(ns, counts)
            y = np.concatenate(resampled)
        if method == LOGLOG:
            a, _, _, _ = _ols(log_ns if on_means else np.log(x), np.log(y))
            alphas.append(a)
        else:
            _, a, _, _, converged = _gauss_newton(x, y, base.c, base.alpha)
            if converged:
                alphas.append(a)
            else:
                failures += 1
    if failures > draws // 2:
        raise NonConvergenceError(
            f"bootstrap refit failed on {failures} of {draws} draws", last_fit=base
        )

    lo_q = (1.0 - confidence) / 2.0
    lo, hi = np.quantile(np.asarray(alphas), [lo_q, 1.0 - lo_q])
    return dataclasses.replace(base, ci_alpha=(float(lo), float(hi)))
