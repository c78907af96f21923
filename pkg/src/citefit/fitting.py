"""Maximum-likelihood fitting of the truncated discrete kernels.

All objectives are negative log-likelihoods: lower is better. The three
fitters use different machinery, matched to their likelihood surfaces:

* power law: the score is monotone in ``alpha``, so the MLE is found by
  bracketing and bisecting the derivative of the objective.
* discrete lognormal: box-constrained quasi-Newton descent (L-BFGS-B)
  with analytic gradients, started from the moments of ``ln x``. Its
  likelihood surface has a single sharp basin.
* hooked power law: projected gradient descent with a backtracking
  (nonmonotone Armijo) line search and Barzilai-Borwein trial steps,
  restarted from four initial points. Plain fixed-step descent is
  hopeless here: the surface has a long diagonal valley where increases
  in ``alpha`` trade off against increases in ``B``, so the problem is
  badly conditioned and single starts are unreliable. The gradient of
  the data term is analytic; the normalizer's contribution is a central
  difference with relative step 1e-5.

Non-convergence is a reported state (``converged=False``), never an
exception, so batch runs over many datasets complete. Degenerate data
(constant values, or fewer points than the model can identify) raises
:class:`~citefit.errors.DegenerateDataError`.

Everything here is a pure function of its inputs; concurrent use is safe.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.optimize import minimize
from scipy.special import logsumexp

from .dataset import CountDataset, TruncatedView, truncate
from .errors import DegenerateDataError, EmptyTailError, ScanError, UsageError
from .kernels import (
    ALPHA_MAX,
    ALPHA_MIN,
    B_MAX,
    B_MIN,
    DiscreteDistribution,
    DiscreteLognormalParams,
    HookedPowerLawParams,
    MU_MAX,
    MU_MIN,
    NORMALIZATION_TERMS,
    ParamSpec,
    PowerLawParams,
    SIGMA_MAX,
    SIGMA_MIN,
)

#: Minimum tail sizes for the fitters and the truncation scan.
MIN_TAIL_POWER_LAW = 2
MIN_TAIL_TWO_PARAM = 3
MIN_SCAN_TAIL = 10

#: Exit tolerances.
POWER_LAW_ALPHA_TOL = 1e-6
HOOKED_GRAD_TOL = 1e-6
HOOKED_MAX_ITER = 50_000
LOGNORMAL_GRAD_TOL = 1e-7
LOGNORMAL_MAX_ITER = 10_000

#: Hooked multi-start grid (alpha, B).
HOOKED_STARTS = ((1.5, 0.5), (1.5, 20.0), (3.0, 0.5), (3.0, 20.0))

_ALPHA_LO = ALPHA_MIN + 1e-9
_B_LO = B_MIN + 1e-9
_NORMALIZER_STEP = 1e-5


@dataclass(frozen=True)
class FitResult:
    """A fitted distribution plus optimizer diagnostics."""

    dist: DiscreteDistribution
    neg_log_likelihood: float
    n_tail: int
    x_min: int
    converged: bool
    iterations: int
    gradient_norm_at_exit: float

    @property
    def params(self) -> ParamSpec:
        return self.dist.params


@dataclass(frozen=True)
class XminScanEntry:
    x_min: int
    fit: FitResult
    selection_score: float


@dataclass(frozen=True)
class XminScanResult:
    """Fits across truncation candidates, scored by KS distance."""

    best_x_min: int
    per_xmin: tuple[XminScanEntry, ...]

    @property
    def best(self) -> XminScanEntry:
        for entry in self.per_xmin:
            if entry.x_min == self.best_x_min:
                return entry
        raise AssertionError("scan result lost its best entry")


class _TailStats:
    """Sufficient statistics of a truncated sample, shared by the fitters."""

    def __init__(self, view: TruncatedView):
        values, counts = np.unique(np.asarray(view.retained, dtype=float), return_counts=True)
        self.values = values
        self.counts = counts.astype(float)
        self.n = view.n_tail
        self.x_min = view.x_min
        self.window = np.arange(view.x_min, view.x_min + NORMALIZATION_TERMS, dtype=float)
        self.log_window = np.log(self.window)
        self.log_values = np.log(values)
        self.sum_log = float(self.counts @ self.log_values)

    @property
    def degenerate(self) -> bool:
        return len(self.values) < 2


def neg_log_likelihood(params: ParamSpec, x_min: int, data: TruncatedView) -> float:
    """Negative log-likelihood of ``data`` under the kernel truncated at ``x_min``."""
    if any(v < x_min for v in data.retained):
        raise UsageError("data contains values below the requested x_min")
    dist = DiscreteDistribution(params, x_min)
    values, counts = np.unique(np.asarray(data.retained, dtype=np.int64), return_counts=True)
    return float(-(counts @ dist.log_pmf(values)))


def fit_power_law(data: TruncatedView) -> FitResult:
    """MLE for the power-law exponent by bisecting the score function.

    The derivative of the objective in ``alpha`` is increasing, so a sign
    change over (1, 20] brackets the optimum; bisection then narrows it
    to ``|delta alpha| < 1e-6``. A bracket failure (optimum pinned at a
    boundary) returns ``converged=False`` at that boundary.
    """
    stats = _TailStats(data)
    if stats.n < MIN_TAIL_POWER_LAW or stats.degenerate:
        raise DegenerateDataError(
            "power-law fit needs at least two points and two distinct values"
        )

    def score(alpha: float) -> float:
        w = np.exp(-alpha * stats.log_window)
        return stats.sum_log - stats.n * float((stats.log_window @ w) / w.sum())

    lo, hi = _ALPHA_LO, ALPHA_MAX
    iterations = 0
    if score(lo) >= 0.0:
        alpha, converged = lo, False
    elif score(hi) <= 0.0:
        alpha, converged = hi, False
    else:
        while hi - lo > POWER_LAW_ALPHA_TOL:
            mid = 0.5 * (lo + hi)
            if score(mid) < 0.0:
                lo = mid
            else:
                hi = mid
            iterations += 1
        alpha, converged = 0.5 * (lo + hi), True
    params = PowerLawParams(alpha)
    return FitResult(
        dist=DiscreteDistribution(params, data.x_min),
        neg_log_likelihood=neg_log_likelihood(params, data.x_min, data),
        n_tail=stats.n,
        x_min=data.x_min,
        converged=converged,
        iterations=iterations,
        gradient_norm_at_exit=abs(score(alpha)),
    )


def _lognormal_objective(stats: _TailStats):
    log_win = stats.log_window
    log_vals = stats.log_values
    counts = stats.counts
    n = stats.n
    const = 0.5 * math.log(2.0 * math.pi)

    def fun(theta):
        mu, sigma = theta
        zw = (log_win - mu) / sigma
        logw = -log_win - math.log(sigma) - const - 0.5 * zw * zw
        log_z = float(logsumexp(logw))
        p = np.exp(logw - log_z)  # normalized window weights
        zv = (log_vals - mu) / sigma
        value = float(
            counts @ (log_vals + math.log(sigma) + const + 0.5 * zv * zv) + n * log_z
        )
        d_mu = float(-(counts @ zv) / sigma + n * (p @ zw) / sigma)
        d_sigma = float(
            counts @ (1.0 / sigma - zv * zv / sigma) + n * (p @ (zw * zw - 1.0)) / sigma
        )
        return value, np.array([d_mu, d_sigma])

    return fun


def fit_lognormal(data: TruncatedView) -> FitResult:
    """MLE for the discrete lognormal via box-constrained quasi-Newton descent.

    Starts from the moments of ``ln x`` on the tail and runs L-BFGS-B
    with analytic gradients inside the box ``mu in [-1000, 20]``,
    ``sigma in (1e-6, 50]`` until the projected gradient norm drops
    below 1e-7 or 10,000 iterations pass.
    """
    stats = _TailStats(data)
    if stats.n < MIN_TAIL_TWO_PARAM:
        raise DegenerateDataError("lognormal fit needs at least three points")
    if stats.degenerate:
        raise DegenerateDataError("lognormal fit needs at least two distinct values")

    logs = np.repeat(stats.log_values, stats.counts.astype(int))
    mu0 = float(np.clip(logs.mean(), MU_MIN, MU_MAX))
    sigma0 = float(np.clip(logs.std(), max(SIGMA_MIN, 1e-3), SIGMA_MAX))
    bounds = [(MU_MIN, MU_MAX), (SIGMA_MIN, SIGMA_MAX)]

    fun = _lognormal_objective(stats)
    res = minimize(
        fun,
        np.array([mu0, sigma0]),
        jac=True,
        method="L-BFGS-B",
        bounds=bounds,
        options={
            "maxiter": LOGNORMAL_MAX_ITER,
            "gtol": LOGNORMAL_GRAD_TOL / 2.0,
            "ftol": 0.0,
        },
    )
    theta, grad, polish_steps = _newton_polish(fun, res.x, res.jac, bounds)
    grad_norm = _projected_gradient_norm(theta, grad, bounds)
    params = DiscreteLognormalParams(float(theta[0]), float(theta[1]))
    return FitResult(
        dist=DiscreteDistribution(params, data.x_min),
        neg_log_likelihood=neg_log_likelihood(params, data.x_min, data),
        n_tail=stats.n,
        x_min=data.x_min,
        converged=bool(grad_norm < LOGNORMAL_GRAD_TOL),
        iterations=int(res.nit) + polish_steps,
        gradient_norm_at_exit=float(grad_norm),
    )


def _newton_polish(fun, theta, grad, bounds, max_steps=8):
    """Drive the gradient the last stretch to zero with full Newton steps.

    L-BFGS-B stops once f-progress reaches rounding noise, which can
    leave the gradient a little above the exit tolerance; the 2x2
    Hessian (finite differences of the analytic gradient) closes that
    gap quadratically. Steps are kept only while they shrink the
    projected gradient.
    """
    lower = np.array([b[0] for b in bounds])
    upper = np.array([b[1] for b in bounds])
    theta = np.asarray(theta, dtype=float)
    grad = np.asarray(grad, dtype=float)
    steps = 0
    for _ in range(max_steps):
        gnorm = _projected_gradient_norm(theta, grad, bounds)
        if gnorm < LOGNORMAL_GRAD_TOL / 10.0:
            break
        hessian = np.empty((2, 2))
        ok = True
        for i in range(2):
            h = 1e-6 * max(1.0, abs(theta[i]))
            up, down = theta.copy(), theta.copy()
            up[i] += h
            down[i] -= h
            hessian[:, i] = (fun(up)[1] - fun(down)[1]) / (2.0 * h)
        try:
            step = np.linalg.solve(hessian, -grad)
        except np.linalg.LinAlgError:
            ok = False
        if not ok or not np.all(np.isfinite(step)):
            break
        candidate = np.clip(theta + step, lower, upper)
        _, cand_grad = fun(candidate)
        if _projected_gradient_norm(candidate, cand_grad, bounds) >= gnorm:
            break
        theta, grad = candidate, cand_grad
        steps += 1
    return theta, grad, steps


def _projected_gradient_norm(theta, grad, bounds) -> float:
    stepped = np.clip(theta - grad, [b[0] for b in bounds], [b[1] for b in bounds])
    return float(np.linalg.norm(theta - stepped))


def _hooked_objective(stats: _TailStats):
    window = stats.window
    values = stats.values
    counts = stats.counts
    n = stats.n

    def fun(theta) -> float:
        alpha, b = theta
        z = np.exp(-alpha * np.log(b + window)).sum()
        return float(alpha * (counts @ np.log(b + values)) + n * math.log(z))

    def fun_grad(theta):
        alpha, b = theta
        log_shift = np.log(b + window)
        z = float(np.exp(-alpha * log_shift).sum())
        log_data = np.log(b + values)
        value = float(alpha * (counts @ log_data) + n * math.log(z))

        # central differences on the normalizer, relative step 1e-5
        h_a = _NORMALIZER_STEP * max(1.0, abs(alpha))
        dz_alpha = (
            np.exp(-(alpha + h_a) * log_shift).sum()
            - np.exp(-(alpha - h_a) * log_shift).sum()
        ) / (2.0 * h_a)
        h_b = _NORMALIZER_STEP * max(1.0, abs(b))
        dz_b = (
            np.exp(-alpha * np.log(b + h_b + window)).sum()
            - np.exp(-alpha * np.log(b - h_b + window)).sum()
        ) / (2.0 * h_b)

        g_alpha = float(counts @ log_data) + n * dz_alpha / z
        g_b = alpha * float(counts @ (1.0 / (b + values))) + n * dz_b / z
        return value, np.array([g_alpha, g_b])

    return fun, fun_grad


def _spg_descent(fun, fun_grad, start, lower, upper, grad_tol, max_iter):
    """Projected gradient descent with BB steps and nonmonotone backtracking."""
    theta = np.clip(np.asarray(start, dtype=float), lower, upper)
    value, grad = fun_grad(theta)
    step = 1.0 / max(1.0, float(np.linalg.norm(grad)))
    recent = deque([value], maxlen=10)
    iterations = 0
    converged = False
    while iterations < max_iter:
        projected = theta - np.clip(theta - grad, lower, upper)
        grad_norm = float(np.linalg.norm(projected))
        if grad_norm < grad_tol:
            converged = True
            break
        iterations += 1
        t = float(np.clip(step, 1e-12, 1e12))
        reference = max(recent)
        candidate = None
        for _ in range(80):
            trial = np.clip(theta - t * grad, lower, upper)
            direction = trial - theta
            if not direction.any():
                break
            trial_value = fun(trial)
            if trial_value <= reference + 1e-4 * float(grad @ direction):
                candidate = (trial, trial_value)
                break
            t *= 0.5
        if candidate is None:  # line search stalled at rounding noise
            break
        new_theta, new_value = candidate
        new_value, new_grad = fun_grad(new_theta)
        s = new_theta - theta
        y = new_grad - grad
        sy = float(s @ y)
        step = float(s @ s) / sy if sy > 1e-30 else 1.0
        theta, value, grad = new_theta, new_value, new_grad
        recent.append(value)
    projected = theta - np.clip(theta - grad, lower, upper)
    return theta, value, iterations, float(np.linalg.norm(projected)), converged


def fit_hooked(data: TruncatedView) -> FitResult:
    """MLE for the hooked power law by multi-start projected gradient descent.

    Four starts at ``(alpha, B) in {1.5, 3} x {0.5, 20}``; the best final
    value wins. See the module docstring for why a single start is not
    trusted on this likelihood surface.
    """
    stats = _TailStats(data)
    if stats.n < MIN_TAIL_TWO_PARAM:
        raise DegenerateDataError("hooked-power-law fit needs at least three points")
    if stats.degenerate:
        raise DegenerateDataError("hooked-power-law fit needs at least two distinct values")

    fun, fun_grad = _hooked_objective(stats)
    lower = np.array([_ALPHA_LO, _B_LO])
    upper = np.array([ALPHA_MAX, B_MAX])
    best = None
    total_iterations = 0
    for start in HOOKED_STARTS:
        theta, value, iters, grad_norm, converged = _spg_descent(
            fun, fun_grad, start, lower, upper, HOOKED_GRAD_TOL, HOOKED_MAX_ITER
        )
        total_iterations += iters
        if best is None or value < best[1]:
            best = (theta, value, grad_norm, converged)
    theta, _, grad_norm, converged = best
    params = HookedPowerLawParams(float(theta[0]), float(theta[1]))
    return FitResult(
        dist=DiscreteDistribution(params, data.x_min),
        neg_log_likelihood=neg_log_likelihood(params, data.x_min, data),
        n_tail=stats.n,
        x_min=data.x_min,
        converged=bool(converged),
        iterations=total_iterations,
        gradient_norm_at_exit=float(grad_norm),
    )


FITTERS: dict[str, Callable[[TruncatedView], FitResult]] = {
    "pl": fit_power_law,
    "ln": fit_lognormal,
    "hooked": fit_hooked,
}


def fit_kind(data: TruncatedView, kind: str) -> FitResult:
    """Dispatch to a fitter by kind: ``pl``, ``ln``, or ``hooked``."""
    try:
        return FITTERS[kind](data)
    except KeyError:
        raise UsageError(f"unknown distribution kind {kind!r}") from None


def ks_distance(dist: DiscreteDistribution, data: TruncatedView) -> float:
    """Kolmogorov-Smirnov distance between model and empirical CDFs.

    Evaluated at the distinct observed values, the standard discrete form.
    """
    values, counts = np.unique(np.asarray(data.retained, dtype=np.int64), return_counts=True)
    ecdf = np.cumsum(counts) / data.n_tail
    model_cdf = 1.0 - dist.ccdf(values + 1)
    return float(np.abs(ecdf - model_cdf).max())


def scan_x_min(data: CountDataset, kind: str, x_min_range) -> XminScanResult:
    """Fit at each truncation candidate and keep the best by KS distance.

    Candidates leaving fewer than ``MIN_SCAN_TAIL`` observations (or only
    degenerate data) are skipped; if none survive, raises ScanError.
    Ties break toward the smaller ``x_min`` (the larger tail).
    """
    candidates = sorted(set(int(x) for x in x_min_range))
    if not candidates:
        raise UsageError("x_min_range is empty")
    entries = []
    for x_min in candidates:
        try:
            view = truncate(data, x_min)
        except EmptyTailError:
            continue
        if view.n_tail < MIN_SCAN_TAIL:
            continue
        try:
            fit = fit_kind(view, kind)
        except DegenerateDataError:
            continue
        entries.append(XminScanEntry(x_min, fit, ks_distance(fit.dist, view)))
    if not entries:
        raise ScanError(
            f"no truncation candidate left a tail of at least {MIN_SCAN_TAIL} usable points"
        )
    best = entries[0]
    for entry in entries[1:]:
        if entry.selection_score < best.selection_score:
            best = entry
    return XminScanResult(best_x_min=best.x_min, per_xmin=tuple(entries))
