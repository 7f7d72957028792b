"""Post-selection: transition value and pointer shifts.

Post-selecting ``|psi_f>`` after the coupling leaves the pointer in

    Xi(t) = sum_i beta_i* alpha_i exp(-i E_i t) phi_i(t)

(unnormalized).  Shifts are computed from the exact branch cross moments;
the closed forms in terms of the transition value are provided separately
so the two can be compared.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    ConfigurationError,
    DegenerateTransitionError,
    PostSelectionAnnihilationError,
)
from .pointer import (
    MeasurementConfig,
    branches,
    cross_moment_ratios,
    overlap_matrix,
    reduced_density_matrix,
)
from .spectral import (
    SelectionState,
    SpectralObservable,
    _check,
    conditional_expectation,
    weak_value,
)

WEAK_THRESHOLD = 0.99
"""``near_weak`` is set when every pairwise F exceeds this."""
STRONG_THRESHOLD = 0.01
"""``near_strong`` is set when every pairwise F is below this."""

_ZERO_PROBABILITY = 1e-28


@dataclass(frozen=True)
class TransitionResult:
    a_t: complex
    f_bar: float
    f_min: float
    dx: float
    dp: float
    near_weak: bool
    near_strong: bool


def _point(cfg):
    return {"g": cfg.g, "t": cfg.t, "m": cfg.m, "sigma": cfg.sigma}


def transition_value(
    obs: SpectralObservable,
    pre: SelectionState,
    post: SelectionState,
    cfg: MeasurementConfig,
) -> complex:
    """``<psi_f|A rho'|psi_f> / <psi_f|rho'|psi_f>`` with exact complex overlaps."""
    _check(obs, pre, post)
    rho = reduced_density_matrix(obs, pre, cfg).entries
    beta = post.amplitudes
    den = np.vdot(beta, rho @ beta)
    if abs(den) < _ZERO_PROBABILITY:
        raise DegenerateTransitionError(
            f"post-selection probability vanishes at {_point(cfg)}", point=_point(cfg)
        )
    num = np.vdot(beta, obs.eigenvalues * (rho @ beta))
    return complex(num / den)


def transition_value_reading(
    obs: SpectralObservable,
    pre: SelectionState,
    post: SelectionState,
    cfg: MeasurementConfig,
    reading: str = "exact",
) -> complex:
    """Transition value under alternative readings of the overlap factor.

    ``exact``: weight ``beta_j beta_i* alpha_i alpha_j*`` times ``<phi_j|phi_i>``
    (what tracing out the pointer gives).  ``printed_order``: the same weights
    times ``<phi_i|phi_j>``.  ``magnitude``: times the real ``F_ij``.
    """
    _check(obs, pre, post)
    alpha, beta, a = pre.amplitudes, post.amplitudes, obs.eigenvalues
    ov = overlap_matrix(cfg, a)
    if reading == "exact":
        factor = ov.T
    elif reading == "printed_order":
        factor = ov
    elif reading == "magnitude":
        factor = np.abs(ov)
    else:
        raise ConfigurationError(f"unknown reading {reading!r}")
    w = np.outer(beta.conj() * alpha, beta * alpha.conj()) * factor
    den = w.sum()
    if abs(den) < _ZERO_PROBABILITY:
        raise DegenerateTransitionError("vanishing denominator", point=_point(cfg))
    return complex((a[:, None] * w).sum() / den)


def _postselected_weights(obs, pre, post, cfg):
    phase = np.exp(-1j * obs.eigenphases * cfg.t)
    return post.amplitudes.conj() * pre.amplitudes * phase


def _xi_moments(obs, pre, post, cfg):
    """Norm and first moments of Xi via the pairwise cross-moment sums."""
    c = _postselected_weights(obs, pre, post, cfg)
    bs = branches(cfg, obs.eigenvalues)
    ov = overlap_matrix(cfg, obs.eigenvalues)
    n = len(bs)
    mx = np.empty((n, n), dtype=complex)
    mp = np.empty((n, n), dtype=complex)
    for i in range(n):
        for j in range(n):
            mx[i, j], mp[i, j] = cross_moment_ratios(bs[i], bs[j])
    w = np.outer(c.conj(), c) * ov
    norm = w.sum().real
    return norm, (w * mx).sum(), (w * mp).sum()


def postselected_pointer_shifts(
    obs: SpectralObservable,
    pre: SelectionState,
    post: SelectionState,
    cfg: MeasurementConfig,
):
    """``(dx, dp)`` of the normalized post-selected pointer relative to the
    initial Gaussian (which has ``<x> = <p> = 0``)."""
    _check(obs, pre, post)
    norm, sx, sp = _xi_moments(obs, pre, post, cfg)
    if norm < _ZERO_PROBABILITY:
        raise PostSelectionAnnihilationError(
            f"post-selected pointer has zero norm at {_point(cfg)}"
        )
    return float(sx.real / norm), float(sp.real / norm)


def unconditioned_pointer_shifts(obs: SpectralObservable, pre: SelectionState, cfg: MeasurementConfig):
    """``(dx, dp)`` of the pointer with no post-selection.

    The system eigenstates are orthogonal, so the pointer is the mixture
    ``sum |alpha_i|^2 |phi_i><phi_i|`` and the shifts are
    ``(g t^2/2m) <A>`` and ``g t <A>``; computed here from the branch moments.
    """
    _check(obs, pre)
    w = np.abs(pre.amplitudes) ** 2
    dx = dp = 0.0
    for wi, b in zip(w, branches(cfg, obs.eigenvalues)):
        mx, mp = cross_moment_ratios(b, b)
        dx += wi * mx.real
        dp += wi * mp.real
    return float(dx), float(dp)


def postselection_probability(obs, pre, post, cfg) -> float:
    """``<Xi|Xi>``, the probability that the post-selection succeeds."""
    _check(obs, pre, post)
    return float(_xi_moments(obs, pre, post, cfg)[0])


def shifts_from_transition_value(a_t: complex, cfg: MeasurementConfig):
    """Closed-form ``(dx, dp)`` expressed through ``A_T``."""
    g, t, m, sigma = cfg.g, cfg.t, cfg.m, cfg.sigma
    re, im = a_t.real, a_t.imag
    dx = (
        g * t**2 / (2 * m) * re
        + g * t**3 / (4 * sigma**2 * m**2) * im
        - 2 * g * t * cfg.sigma_t**2 * im
    )
    dp = g * t * re - g * t**2 / (4 * sigma**2 * m) * im
    return dx, dp


LIMITS = ("weak_F1", "strong_F0", "weak_F1_minf", "strong_F0_minf")


def limit_shifts(
    obs: SpectralObservable,
    pre: SelectionState,
    post: SelectionState,
    cfg: MeasurementConfig,
    limit: str,
):
    """Pointer shifts in the four limiting regimes.

    The ``weak`` limits use the weak value, the ``strong`` ones the
    conditional expectation; ``_minf`` drops every term that vanishes as the
    pointer mass grows without bound.
    """
    g, t, m, sigma = cfg.g, cfg.t, cfg.m, cfg.sigma
    if limit == "weak_F1":
        w = weak_value(obs, pre, post)
        dx = g * t**2 / (2 * m) * w.real - (g * t**3 + 8 * g * t * sigma**4 * m**2) / (
            4 * sigma**2 * m**2
        ) * w.imag
        dp = g * t * w.real - g * t**2 / (4 * sigma**2 * m) * w.imag
    elif limit == "weak_F1_minf":
        w = weak_value(obs, pre, post)
        dx = -2 * g * t * sigma**2 * w.imag
        dp = g * t * w.real
    elif limit == "strong_F0":
        c = conditional_expectation(obs, pre, post)
        dx = g * t**2 / (2 * m) * c
        dp = g * t * c
    elif limit == "strong_F0_minf":
        c = conditional_expectation(obs, pre, post)
        dx = 0.0
        dp = g * t * c
    else:
        raise ConfigurationError(f"unknown limit {limit!r}; expected one of {LIMITS}")
    return float(dx), float(dp)


def pairwise_factors(obs: SpectralObservable, cfg: MeasurementConfig) -> np.ndarray:
    """Decoherence factors over pairs of distinct eigenvalues (flattened)."""
    a = obs.eigenvalues
    ov = np.abs(overlap_matrix(cfg, a))
    iu = np.triu_indices(a.size, k=1)
    distinct = a[iu[0]] != a[iu[1]]
    return ov[iu][distinct]


def analyze(
    obs: SpectralObservable,
    pre: SelectionState,
    post: SelectionState,
    cfg: MeasurementConfig,
) -> TransitionResult:
    """Transition value, exact shifts and regime flags at one parameter point."""
    a_t = transition_value(obs, pre, post, cfg)
    dx, dp = postselected_pointer_shifts(obs, pre, post, cfg)
    f = pairwise_factors(obs, cfg)
    f_max = float(f.max()) if f.size else 1.0
    f_min = float(f.min()) if f.size else 1.0
    return TransitionResult(
        a_t=a_t,
        f_bar=f_max,
        f_min=f_min,
        dx=dx,
        dp=dp,
        near_weak=f_min > WEAK_THRESHOLD,
        near_strong=f_max < STRONG_THRESHOLD,
    )
