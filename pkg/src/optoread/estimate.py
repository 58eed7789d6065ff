"""Nonlinear least-squares estimation and single-shot state discrimination.

The fitting core is a damped Gauss-Newton (Levenberg-Marquardt) loop with
the model library used throughout the analysis: Lorentzian peak, complex
side-coupled notch resonator, exponential decay, damped cosine, and
equal-variance bimodal Gaussian. Each model carries an analytic Jacobian.
State discrimination uses a Fisher linear discriminant in the IQ plane and
reports the fidelity F = 1 - [p(1|0) + p(0|1)] / 2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.special import erfc

from .qubit import QubitState

_SQRT_2PI = math.sqrt(2.0 * math.pi)


@dataclass(frozen=True)
class FitResult:
    """Parameter estimates with 1-standard-error uncertainties."""

    params: np.ndarray
    sigma: np.ndarray
    residual_norm: float
    iterations: int
    converged: bool
    names: tuple = ()
    flag: str | None = None
    cost_history: tuple = field(default=(), repr=False)

    def __getitem__(self, name: str) -> float:
        return float(self.params[self.names.index(name)])

    def sigma_of(self, name: str) -> float:
        return float(self.sigma[self.names.index(name)])

    def to_dict(self) -> dict:
        return {
            "params": {n: float(v) for n, v in zip(self.names, self.params)},
            "sigma": {n: float(v) for n, v in zip(self.names, self.sigma)},
            "residual_norm": float(self.residual_norm),
            "iterations": int(self.iterations),
            "converged": bool(self.converged),
            "flag": self.flag,
        }


@dataclass(frozen=True)
class Model:
    """Parameterized function family y = fn(x, p) with Jacobian d fn / d p."""

    name: str
    param_names: tuple
    fn: Callable
    jac: Callable


def numeric_jacobian(fn: Callable, x: np.ndarray, p: np.ndarray,
                     rel_step: float = 1e-6) -> np.ndarray:
    """Central-difference Jacobian of fn(x, p) with respect to p."""
    p = np.asarray(p, dtype=float)
    y0 = np.asarray(fn(x, p))
    jac = np.empty((y0.size, p.size), dtype=y0.dtype)
    for k in range(p.size):
        h = rel_step * max(abs(p[k]), 1e-8)
        up = p.copy()
        dn = p.copy()
        up[k] += h
        dn[k] -= h
        jac[:, k] = (np.asarray(fn(x, up)) - np.asarray(fn(x, dn))) / (2.0 * h)
    return jac


def _stack_complex(values: np.ndarray) -> np.ndarray:
    if np.iscomplexobj(values):
        return np.concatenate([values.real, values.imag])
    return values


def least_squares_fit(model: Model, x, y, init, *,
                      max_iterations: int = 200,
                      lambda_init: float = 1e-3,
                      residual_tol: float = 1e-10,
                      gradient_tol: float = 1e-10,
                      names: tuple | None = None) -> FitResult:
    """Levenberg-Marquardt minimization of ||y - model.fn(x, p)||^2.

    Damping lambda is divided by 10 on accepted steps and multiplied by 10
    on rejected ones; convergence is declared when the relative residual
    change falls below ``residual_tol`` or the gradient infinity-norm below
    ``gradient_tol``. A singular normal matrix that damping cannot rescue is
    reported through ``converged=False``, never raised. Deterministic for
    identical inputs.
    """
    x = np.asarray(x)
    y = np.asarray(y)
    if y.size == 0:
        raise ValueError("data must be non-empty")
    if not np.all(np.isfinite(_stack_complex(y))):
        raise ValueError("data contains non-finite values")
    p = np.array(init, dtype=float)
    if not np.all(np.isfinite(p)):
        raise ValueError("initial parameters must be finite")

    def residual(params):
        with np.errstate(all="ignore"):
            return _stack_complex(y) - _stack_complex(np.asarray(model.fn(x, params)))

    def jacobian(params):
        with np.errstate(all="ignore"):
            j = np.asarray(model.jac(x, params))
        if np.iscomplexobj(j):
            j = np.concatenate([j.real, j.imag], axis=0)
        return j

    r = residual(p)
    cost = float(r @ r)
    history = [cost]
    lam = lambda_init
    converged = False
    flag = None
    iterations = 0

    for iterations in range(1, max_iterations + 1):
        jac = jacobian(p)
        grad = jac.T @ r
        if np.max(np.abs(grad)) < gradient_tol:
            converged = True
            break
        jtj = jac.T @ jac
        diag = np.diag(jtj).copy()
        diag[diag <= 0] = 1e-300
        accepted = False
        while lam < 1e12:
            try:
                step = np.linalg.solve(jtj + lam * np.diag(diag), grad)
            except np.linalg.LinAlgError:
                lam *= 10.0
                continue
            if not np.all(np.isfinite(step)):
                lam *= 10.0
                continue
            p_try = p + step
            r_try = residual(p_try)
            cost_try = float(r_try @ r_try)
            if math.isfinite(cost_try) and cost_try <= cost:
                rel_change = (cost - cost_try) / max(cost, 1e-300)
                p, r, cost = p_try, r_try, cost_try
                history.append(cost)
                lam = max(lam / 10.0, 1e-15)
                accepted = True
                if rel_change < residual_tol:
                    converged = True
                break
            lam *= 10.0
        if not accepted:
            flag = "damping exhausted without an accepted step"
            break
        if converged:
            break

    jac = jacobian(p)
    sigma = _parameter_sigma(jac, cost, y_size=_stack_complex(y).size)
    return FitResult(params=p, sigma=sigma, residual_norm=math.sqrt(cost),
                     iterations=iterations, converged=converged,
                     names=names if names is not None else model.param_names,
                     flag=flag, cost_history=tuple(history))


def _parameter_sigma(jac: np.ndarray, cost: float, y_size: int) -> np.ndarray:
    dof = max(y_size - jac.shape[1], 1)
    s2 = cost / dof
    try:
        cov = np.linalg.pinv(jac.T @ jac) * s2
        sigma = np.sqrt(np.clip(np.diag(cov), 0.0, None))
    except np.linalg.LinAlgError:
        sigma = np.full(jac.shape[1], np.inf)
    return sigma


def log_transformed(model: Model, log_indices: tuple, logit_indices: tuple = ()) -> Model:
    """Model over unconstrained parameters with p_i = exp(u_i) at ``log_indices``
    and p_i = sigmoid(u_i) at ``logit_indices``."""

    def decode(u):
        # clamp so wild trial steps yield huge-but-finite residuals, not overflow
        p = np.array(u, dtype=float)
        for i in log_indices:
            p[i] = math.exp(min(u[i], 700.0))
        for i in logit_indices:
            p[i] = 1.0 / (1.0 + math.exp(-min(max(u[i], -700.0), 700.0)))
        return p

    def fn(x, u):
        return model.fn(x, decode(u))

    def jac(x, u):
        p = decode(u)
        j = np.asarray(model.jac(x, p)).copy()
        for i in log_indices:
            j[:, i] *= p[i]
        for i in logit_indices:
            j[:, i] *= p[i] * (1.0 - p[i])
        return j

    return Model(name=model.name + "_transformed", param_names=model.param_names,
                 fn=fn, jac=jac)


def _encode(p, log_indices, logit_indices=()):
    u = np.array(p, dtype=float)
    for i in log_indices:
        u[i] = math.log(max(p[i], 1e-300))
    for i in logit_indices:
        v = min(max(p[i], 1e-9), 1.0 - 1e-9)
        u[i] = math.log(v / (1.0 - v))
    return u


def _fit_transformed(model, x, y, init, log_indices, logit_indices=(), **kwargs):
    wrapped = log_transformed(model, log_indices, logit_indices)
    result = least_squares_fit(wrapped, x, y, _encode(init, log_indices, logit_indices),
                               names=model.param_names, **kwargs)
    params = np.array(result.params, dtype=float)
    sigma = np.array(result.sigma, dtype=float)
    for i in log_indices:
        params[i] = math.exp(min(result.params[i], 700.0))
        sigma[i] = sigma[i] * params[i]
    for i in logit_indices:
        v = 1.0 / (1.0 + math.exp(-result.params[i]))
        params[i] = v
        sigma[i] = sigma[i] * v * (1.0 - v)
    return FitResult(params=params, sigma=sigma, residual_norm=result.residual_norm,
                     iterations=result.iterations, converged=result.converged,
                     names=result.names, flag=result.flag,
                     cost_history=result.cost_history)


# ---------------------------------------------------------------------------
# model library
# ---------------------------------------------------------------------------

def _lorentzian_fn(x, p):
    center, fwhm, amplitude, offset = p
    u = 2.0 * (x - center) / fwhm
    return offset + amplitude / (1.0 + u * u)


def _lorentzian_jac(x, p):
    center, fwhm, amplitude, offset = p
    u = 2.0 * (x - center) / fwhm
    denom = (1.0 + u * u) ** 2
    jac = np.empty((np.size(x), 4))
    jac[:, 0] = 4.0 * amplitude * u / (fwhm * denom)
    jac[:, 1] = 2.0 * amplitude * u * u / (fwhm * denom)
    jac[:, 2] = 1.0 / (1.0 + u * u)
    jac[:, 3] = 1.0
    return jac


LORENTZIAN = Model("lorentzian", ("center", "fwhm", "amplitude", "offset"),
                   _lorentzian_fn, _lorentzian_jac)


def _exponential_fn(t, p):
    t1, amplitude, offset = p
    return offset + amplitude * np.exp(-t / t1)


def _exponential_jac(t, p):
    t1, amplitude, offset = p
    decay = np.exp(-t / t1)
    jac = np.empty((np.size(t), 3))
    jac[:, 0] = amplitude * t / t1**2 * decay
    jac[:, 1] = decay
    jac[:, 2] = 1.0
    return jac


EXPONENTIAL = Model("exponential_decay", ("t1", "amplitude", "offset"),
                    _exponential_fn, _exponential_jac)


def _damped_cosine_fn(t, p):
    t2_star, detuning, phase, amplitude, offset = p
    return offset + amplitude * np.exp(-t / t2_star) * np.cos(detuning * t + phase)


def _damped_cosine_jac(t, p):
    t2_star, detuning, phase, amplitude, offset = p
    decay = np.exp(-t / t2_star)
    arg = detuning * t + phase
    cos_a = np.cos(arg)
    sin_a = np.sin(arg)
    jac = np.empty((np.size(t), 5))
    jac[:, 0] = amplitude * t / t2_star**2 * decay * cos_a
    jac[:, 1] = -amplitude * t * decay * sin_a
    jac[:, 2] = -amplitude * decay * sin_a
    jac[:, 3] = decay * cos_a
    jac[:, 4] = 1.0
    return jac


DAMPED_COSINE = Model("damped_cosine", ("t2_star", "detuning", "phase", "amplitude", "offset"),
                      _damped_cosine_fn, _damped_cosine_jac)


def _gauss(x, mu, sigma):
    return np.exp(-0.5 * ((x - mu) / sigma) ** 2) / (sigma * _SQRT_2PI)


def _bimodal_fn(x, p):
    mu0, mu1, sigma, weight = p
    return weight * _gauss(x, mu0, sigma) + (1.0 - weight) * _gauss(x, mu1, sigma)


def _bimodal_jac(x, p):
    mu0, mu1, sigma, weight = p
    g0 = _gauss(x, mu0, sigma)
    g1 = _gauss(x, mu1, sigma)
    u0 = (x - mu0) / sigma
    u1 = (x - mu1) / sigma
    jac = np.empty((np.size(x), 4))
    jac[:, 0] = weight * g0 * u0 / sigma
    jac[:, 1] = (1.0 - weight) * g1 * u1 / sigma
    jac[:, 2] = (weight * g0 * (u0 * u0 - 1.0) + (1.0 - weight) * g1 * (u1 * u1 - 1.0)) / sigma
    jac[:, 3] = g0 - g1
    return jac


BIMODAL_GAUSSIAN = Model("bimodal_gaussian", ("mu0", "mu1", "sigma", "weight"),
                         _bimodal_fn, _bimodal_jac)


def _notch_fn(f, p):
    f0, kappa_ee, kappa_ei, amp, phase, delay = p
    kappa = kappa_ee + kappa_ei
    lor = kappa_ee / (kappa + 2j * (f - f0))
    env = amp * np.exp(1j * (phase - 2.0 * np.pi * f * delay))
    return env * (1.0 - lor)


def _notch_jac(f, p):
    f0, kappa_ee, kappa_ei, amp, phase, delay = p
    kappa = kappa_ee + kappa_ei
    denom = kappa + 2j * (f - f0)
    lor = kappa_ee / denom
    env = amp * np.exp(1j * (phase - 2.0 * np.pi * f * delay))
    s = env * (1.0 - lor)
    jac = np.empty((np.size(f), 6), dtype=complex)
    jac[:, 0] = -env * (2j * kappa_ee / denom**2)
    jac[:, 1] = -env * (denom - kappa_ee) / denom**2
    jac[:, 2] = env * kappa_ee / denom**2
    jac[:, 3] = s / amp
    jac[:, 4] = 1j * s
    jac[:, 5] = -2j * np.pi * f * s
    return jac


NOTCH_RESONATOR = Model("notch_resonator",
                        ("f0", "kappa_ee", "kappa_ei", "amp", "phase", "delay"),
                        _notch_fn, _notch_jac)


def _linear_fn(x, p):
    return p[0] + p[1] * x


def _linear_jac(x, p):
    jac = np.empty((np.size(x), 2))
    jac[:, 0] = 1.0
    jac[:, 1] = x
    return jac


LINEAR = Model("linear", ("intercept", "slope"), _linear_fn, _linear_jac)

MODELS = {m.name: m for m in
          (LORENTZIAN, EXPONENTIAL, DAMPED_COSINE, BIMODAL_GAUSSIAN,
           NOTCH_RESONATOR, LINEAR)}


# ---------------------------------------------------------------------------
# fit entry points
# ---------------------------------------------------------------------------

def fit_lorentzian(x, y) -> FitResult:
    """Fit a Lorentzian peak; returns (center, fwhm>0, amplitude, offset)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.size < 5:
        raise ValueError("need at least 5 points spanning the peak")
    offset = float(np.median(y))
    k = int(np.argmax(np.abs(y - offset)))
    amplitude = float(y[k] - offset)
    center = float(x[k])
    half = offset + amplitude / 2.0
    above = (y - half) * np.sign(amplitude) > 0
    span = x[above]
    fwhm = float(span.max() - span.min()) if span.size > 1 else float((x.max() - x.min()) / 4)
    fwhm = max(fwhm, (x.max() - x.min()) / x.size)
    result = _fit_transformed(LORENTZIAN, x, y, [center, fwhm, amplitude, offset],
                              log_indices=(1,))
    if abs(result["amplitude"]) < 1e-12 * max(abs(offset), 1.0):
        result = _flagged(result, "amplitude consistent with zero")
    return result


def fit_exponential(t, y) -> FitResult:
    """Fit y = A exp(-t/T1) + c; returns (t1>0, amplitude, offset)."""
    t = np.asarray(t, dtype=float)
    y = np.asarray(y, dtype=float)
    if t.size < 4:
        raise ValueError("need at least 4 points")
    tail = max(1, t.size // 10)
    offset = float(np.mean(y[np.argsort(t)][-tail:]))
    amplitude = float(y[np.argmin(t)] - offset)
    t1 = float((t.max() - t.min()) / 3.0) or 1.0
    result = _fit_transformed(EXPONENTIAL, t, y, [t1, amplitude, offset],
                              log_indices=(0,))
    if result["amplitude"] * amplitude < 0 or not result.converged:
        result = _flagged(result, "no clear decay")
    return result


def fit_damped_cosine(t, y) -> FitResult:
    """Fit y = A exp(-t/T2*) cos(detuning t + phase) + c."""
    t = np.asarray(t, dtype=float)
    y = np.asarray(y, dtype=float)
    if t.size < 8:
        raise ValueError("need at least 8 points covering a fringe")
    offset = float(np.mean(y))
    amplitude = float((y.max() - y.min()) / 2.0) or 1.0
    # dominant FFT bin as frequency guess (grid assumed near-uniform)
    dt = float(np.median(np.diff(np.sort(t))))
    spectrum = np.abs(np.fft.rfft(y - offset))
    freqs = np.fft.rfftfreq(t.size, dt)
    k = 1 + int(np.argmax(spectrum[1:]))
    detuning = 2.0 * math.pi * float(freqs[k]) or math.pi / (t.max() - t.min())
    t2 = float((t.max() - t.min()) / 2.0)
    best = None
    for phase in (0.0, math.pi / 2.0, math.pi, -math.pi / 2.0):
        candidate = _fit_transformed(DAMPED_COSINE, t, y,
                                     [t2, detuning, phase, amplitude, offset],
                                     log_indices=(0,))
        if best is None or candidate.residual_norm < best.residual_norm:
            best = candidate
    if abs(best["amplitude"]) < 1e-12 or not best.converged:
        best = _flagged(best, "no clear fringe")
    return best


def fit_notch_resonator(freqs, s21) -> FitResult:
    """Fit the complex side-coupled notch 1 - (kee/k)/(1 + 2i(f-f0)/k).

    A global amplitude, phase and cable-delay nuisance is fitted along with
    (f0, kappa_ee, kappa_ei); the physics parameters are invariant under
    rotations/rescalings of the data.
    """
    freqs = np.asarray(freqs, dtype=float)
    s21 = np.asarray(s21, dtype=complex)
    if freqs.size < 6:
        raise ValueError("need at least 6 complex points spanning the dip")
    mag = np.abs(s21)
    amp = float(np.median(np.concatenate([mag[: max(1, mag.size // 10)],
                                          mag[-max(1, mag.size // 10):]])))
    amp = amp or 1.0
    k = int(np.argmin(mag))
    f0 = float(freqs[k])
    depth = max(1.0 - mag[k] / amp, 1e-3)
    below = mag < amp * (1.0 - depth / 2.0)
    span = freqs[below]
    kappa = float(span.max() - span.min()) if span.size > 1 else float((freqs.max() - freqs.min()) / 10)
    kappa = max(kappa, (freqs.max() - freqs.min()) / freqs.size)
    kappa_ee = max(depth * kappa, 1e-6 * kappa)
    kappa_ei = max(kappa - kappa_ee, 1e-6 * kappa)
    phase_fit = np.polyfit(freqs, np.unwrap(np.angle(s21)), 1)
    delay = float(-phase_fit[0] / (2.0 * math.pi))
    phase = float(np.angle(np.mean(s21 * np.exp(2j * math.pi * freqs * delay))))
    init = [f0, kappa_ee, kappa_ei, amp, phase, delay]
    result = _fit_transformed(NOTCH_RESONATOR, freqs, s21, init,
                              log_indices=(1, 2, 3))
    if 1.0 - np.min(mag) / amp < 0.01:
        result = _flagged(result, "dip depth below noise")
    return result


@dataclass(frozen=True)
class BimodalFitResult(FitResult):
    """Bimodal-Gaussian fit with the separation-over-sigma ratio attached."""

    snr: float = 0.0


def fit_bimodal_gaussian(samples, bins: int = 200) -> BimodalFitResult:
    """Equal-variance two-Gaussian mixture fit of a 1-D sample set.

    The sample histogram (fixed bin count, so the procedure is deterministic)
    is fitted with w N(mu0, sigma) + (1-w) N(mu1, sigma); initialization is a
    two-means split of the samples. SNR = |mu1 - mu0| / sigma.
    """
    samples = np.asarray(samples, dtype=float)
    if samples.size < 100:
        raise ValueError("need at least 100 samples")
    centers_init = _two_means(samples)
    edges = np.linspace(samples.min(), samples.max(), bins + 1)
    density, _ = np.histogram(samples, bins=edges, density=True)
    x = 0.5 * (edges[:-1] + edges[1:])
    assign = np.abs(samples[:, None] - np.asarray(centers_init)[None, :]).argmin(axis=1)
    weight = float(np.mean(assign == 0))
    spread = float(min(np.std(samples[assign == 0]) if np.any(assign == 0) else np.std(samples),
                       np.std(samples[assign == 1]) if np.any(assign == 1) else np.std(samples)))
    spread = spread or float(np.std(samples)) or 1.0
    init = [centers_init[0], centers_init[1], spread, min(max(weight, 0.02), 0.98)]
    base = _fit_transformed(BIMODAL_GAUSSIAN, x, density, init,
                            log_indices=(2,), logit_indices=(3,))
    mu0, mu1, sigma, weight = base.params
    snr = abs(mu1 - mu0) / sigma
    flag = base.flag
    if weight < 0.02 or weight > 0.98:
        flag = "mixture weight degenerate (unimodal data)"
    elif snr < 0.1:
        flag = "components indistinguishable"
    return BimodalFitResult(params=base.params, sigma=base.sigma,
                            residual_norm=base.residual_norm,
                            iterations=base.iterations, converged=base.converged,
                            names=base.names, flag=flag,
                            cost_history=base.cost_history, snr=float(snr))


def _two_means(samples: np.ndarray, max_iterations: int = 100) -> tuple[float, float]:
    """Deterministic 1-D two-means split, initialized at the outer quartiles."""
    lo, hi = np.quantile(samples, [0.25, 0.75])
    if lo == hi:
        lo, hi = samples.min(), samples.max()
    for _ in range(max_iterations):
        mid = 0.5 * (lo + hi)
        left = samples[samples <= mid]
        right = samples[samples > mid]
        if left.size == 0 or right.size == 0:
            break
        new_lo, new_hi = float(np.mean(left)), float(np.mean(right))
        if new_lo == lo and new_hi == hi:
            break
        lo, hi = new_lo, new_hi
    return lo, hi


def _flagged(result: FitResult, flag: str) -> FitResult:
    return FitResult(params=result.params, sigma=result.sigma,
                     residual_norm=result.residual_norm, iterations=result.iterations,
                     converged=result.converged, names=result.names, flag=flag,
                     cost_history=result.cost_history)


# ---------------------------------------------------------------------------
# state discrimination
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DecisionBoundary:
    """Linear boundary in the IQ plane; projection = normal . (i, q) - offset."""

    normal: np.ndarray  # unit 2-vector pointing from cluster 0 to cluster 1
    offset: float
    fallback: bool = False

    def project(self, iq: np.ndarray) -> np.ndarray:
        iq = np.atleast_2d(np.asarray(iq, dtype=float))
        return iq @ self.normal - self.offset

    def classify(self, iq: np.ndarray) -> np.ndarray:
        return (self.project(iq) > 0).astype(int)


def _as_iq_array(shots) -> np.ndarray:
    if isinstance(shots, np.ndarray) and shots.ndim == 2:
        return np.asarray(shots, dtype=float)
    return np.array([(s.i, s.q) for s in shots], dtype=float)


def _whitened_direction(cov: np.ndarray, diff: np.ndarray) -> tuple[np.ndarray, bool]:
    try:
        if np.linalg.cond(cov) > 1e12:
            raise np.linalg.LinAlgError
        return np.linalg.solve(cov, diff), False
    except np.linalg.LinAlgError:
        return diff.copy(), True


def lda_boundary(shots0, shots1) -> DecisionBoundary:
    """Fisher discriminant between two IQ clusters.

    Direction is the pooled-covariance-whitened mean difference; the
    threshold sits at equal posterior for equal priors. Switching events put
    a fraction of each prepared set into the other cluster, which would
    contaminate a covariance taken per prepared state, so after an initial
    pass the covariance is re-estimated within classifier-assigned clusters.
    A degenerate covariance falls back to the plain mean-difference
    direction (flagged).
    """
    a = _as_iq_array(shots0)
    b = _as_iq_array(shots1)
    if a.size == 0 or b.size == 0:
        raise ValueError("both shot sets must be non-empty")
    pooled = np.vstack([a, b])
    mu0 = a.mean(axis=0)
    mu1 = b.mean(axis=0)
    cov = ((a - mu0).T @ (a - mu0) + (b - mu1).T @ (b - mu1)) / max(len(a) + len(b) - 2, 1)
    fallback = False
    for _ in range(3):
        diff = mu1 - mu0
        direction, fallback = _whitened_direction(cov, diff)
        norm = np.linalg.norm(direction)
        if norm == 0:
            direction = np.array([1.0, 0.0])
            norm = 1.0
            fallback = True
        normal = direction / norm
        offset = float(normal @ (0.5 * (mu0 + mu1)))
        if fallback:
            break
        assigned = (pooled @ normal - offset) > 0
        low = pooled[~assigned]
        high = pooled[assigned]
        if len(low) < 2 or len(high) < 2:
            break
        new_mu0 = low.mean(axis=0)
        new_mu1 = high.mean(axis=0)
        new_cov = ((low - new_mu0).T @ (low - new_mu0)
                   + (high - new_mu1).T @ (high - new_mu1)) / (len(pooled) - 2)
        if (np.allclose(new_mu0, mu0) and np.allclose(new_mu1, mu1)
                and np.allclose(new_cov, cov)):
            break
        mu0, mu1, cov = new_mu0, new_mu1, new_cov
    return DecisionBoundary(normal=normal, offset=offset, fallback=fallback)


@dataclass(frozen=True)
class FidelityReport:
    """Readout fidelity and misassignment probabilities from labeled shots."""

    fidelity: float
    p_0_given_1: float
    p_1_given_0: float
    snr: float
    counts: dict

    def to_dict(self) -> dict:
        return {
            "fidelity": self.fidelity,
            "p_0_given_1": self.p_0_given_1,
            "p_1_given_0": self.p_1_given_0,
            "snr": self.snr,
            "counts": dict(self.counts),
        }


def fidelity_report(shots0, shots1, boundary: DecisionBoundary) -> FidelityReport:
    """Count misassignments per prepared state and report F and fitted SNR.

    F = 1 - [p(1|0) + p(0|1)] / 2. The SNR comes from a bimodal-Gaussian fit
    of the pooled boundary projections.
    """
    a = _as_iq_array(shots0)
    b = _as_iq_array(shots1)
    pred0 = boundary.classify(a)
    pred1 = boundary.classify(b)
    n00 = int(np.sum(pred0 == 0))
    n01 = int(np.sum(pred0 == 1))
    n10 = int(np.sum(pred1 == 0))
    n11 = int(np.sum(pred1 == 1))
    p_1_given_0 = n01 / max(n00 + n01, 1)
    p_0_given_1 = n10 / max(n10 + n11, 1)
    fidelity = 1.0 - (p_1_given_0 + p_0_given_1) / 2.0
    projections = np.concatenate([boundary.project(a), boundary.project(b)])
    snr_fit = fit_bimodal_gaussian(projections)
    return FidelityReport(fidelity=fidelity, p_0_given_1=p_0_given_1,
                          p_1_given_0=p_1_given_0, snr=snr_fit.snr,
                          counts={"n00": n00, "n01": n01, "n10": n10, "n11": n11})


def fidelity_vs_snr(snr: float) -> float:
    """Optimal-threshold fidelity of two equal-variance Gaussians at given SNR.

    F = 1 - erfc(snr / (2 sqrt(2))) / 2; F(0) = 0.5 and F -> 1 as snr grows.
    """
    if snr < 0:
        raise ValueError("snr must be >= 0")
    return 1.0 - 0.5 * float(erfc(snr / (2.0 * math.sqrt(2.0))))


def classify_shots(shots, boundary: DecisionBoundary) -> np.ndarray:
    """0/1 labels for a shot sequence under a decision boundary."""
    return boundary.classify(_as_iq_array(shots))
