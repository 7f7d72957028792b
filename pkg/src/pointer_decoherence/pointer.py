"""Closed-form dynamics of a Gaussian pointer coupled through ``-g x A``.

Because the observable is conserved, each eigenvalue ``a`` drives its own
pointer branch under ``p^2/2m - g a x``.  Starting from the Gaussian

    phi(x) = (2 pi sigma^2)^(-1/4) exp(-x^2 / 4 sigma^2)

a branch stays Gaussian:

    phi_a(x, t) = N exp(-i theta) exp(i k x) exp(-(x - X)^2 / 4 s^2)

with ``s^2 = sigma^2 + i t/2m``, ``X = g a t^2/2m``, ``k = g a t`` and
``theta = (g a)^2 t^3 / 6m``.  All overlaps and first moments between
branches are evaluated as exact complex Gaussian integrals, in log space so
that extreme parameters neither overflow nor underflow.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import ConfigurationError, IncompatibleBranchError
from .spectral import SelectionState, SpectralObservable, _check

# Relative tolerance used when deciding two branches share a complex width.
_WIDTH_RTOL = 1e-12


@dataclass(frozen=True)
class MeasurementConfig:
    """Coupling ``g``, interaction time ``t``, pointer mass ``m`` and initial
    width ``sigma`` in natural units (``hbar = 1``).  ``g`` is held constant
    over ``[0, t]``."""

    g: float
    t: float
    m: float = 1.0
    sigma: float = 1.0

    def __post_init__(self):
        for name in ("g", "t", "m", "sigma"):
            value = float(getattr(self, name))
            if not math.isfinite(value):
                raise ConfigurationError(f"{name} must be finite, got {value}")
            object.__setattr__(self, name, value)
        if self.m <= 0:
            raise ConfigurationError(f"mass must be positive, got {self.m}")
        if self.sigma <= 0:
            raise ConfigurationError(f"sigma must be positive, got {self.sigma}")
        if self.t < 0:
            raise ConfigurationError(f"time must be non-negative, got {self.t}")

    @property
    def complex_width_sq(self) -> complex:
        return complex(self.sigma**2, self.t / (2.0 * self.m))

    @property
    def sigma_t(self) -> float:
        """Spread width ``sigma (1 + t^2 / 4 m^2 sigma^4)^(1/2)``."""
        return self.sigma * math.sqrt(1.0 + self.t**2 / (4.0 * self.m**2 * self.sigma**4))

    @property
    def regime_ratio(self) -> float:
        """``t / (m sigma^2)``: >> 1 is the long-time regime, << 1 the short-time one."""
        return self.t / (self.m * self.sigma**2)

    def separation(self, ai: float, aj: float) -> float:
        """Distance between branch centers, ``g t^2 (a_i - a_j) / 2m``."""
        return self.g * self.t**2 * (ai - aj) / (2.0 * self.m)


def wei_norman_coeffs(cfg: MeasurementConfig, a: float):
    """Coefficients of ``U = e^{g1} e^{g2 p^2} e^{g3 p} e^{g4 x}`` for one branch."""
    ga, t, m = cfg.g * a, cfg.t, cfg.m
    g1 = -1j * ga**2 * t**3 / (6.0 * m)
    g2 = -1j * t / (2.0 * m)
    g3 = 1j * t**2 * ga / (2.0 * m)
    g4 = 1j * ga * t
    return g1, g2, g3, g4


@dataclass(frozen=True)
class GaussianBranch:
    """``exp(log_norm_phase) * exp(i kick x) * exp(-(x - center)^2 / 4 s^2)``."""

    complex_width_sq: complex
    center: float
    kick: float
    log_norm_phase: complex
    eigenvalue: float = 0.0

    def __post_init__(self):
        if self.complex_width_sq.real <= 0:
            raise ConfigurationError("Re(s^2) must be positive")

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        return np.exp(
            self.log_norm_phase
            + 1j * self.kick * x
            - (x - self.center) ** 2 / (4.0 * self.complex_width_sq)
        )

    @property
    def sigma_t(self) -> float:
        return abs(self.complex_width_sq) / math.sqrt(self.complex_width_sq.real)

    def norm(self) -> float:
        return abs(branch_cross_moment(self, self, "overlap"))


def evolve_branch(cfg: MeasurementConfig, a: float) -> GaussianBranch:
    ga, t, m, sigma = cfg.g * a, cfg.t, cfg.m, cfg.sigma
    s2 = cfg.complex_width_sq
    theta = ga**2 * t**3 / (6.0 * m)
    log_norm = -0.25 * math.log(2.0 * math.pi * sigma**2) + math.log(sigma) - 0.5 * cmath.log(s2)
    return GaussianBranch(
        complex_width_sq=s2,
        center=ga * t**2 / (2.0 * m),
        kick=ga * t,
        log_norm_phase=log_norm - 1j * theta,
        eigenvalue=float(a),
    )


class _Pair(NamedTuple):
    log_overlap: complex
    mean_x: complex
    mean_p: complex


def _pair(bi: GaussianBranch, bj: GaussianBranch) -> _Pair:
    s2 = bi.complex_width_sq
    if abs(s2 - bj.complex_width_sq) > _WIDTH_RTOL * abs(s2):
        raise IncompatibleBranchError(
            f"complex widths differ: {bi.complex_width_sq} vs {bj.complex_width_sq}"
        )
    # Integrate conj(phi_i) phi_j in y = x - midpoint; the linear coefficient is
    # then purely imaginary and no large terms cancel.
    u = 1.0 / (4.0 * s2)
    p2 = 2.0 * u.real
    mid = 0.5 * (bi.center + bj.center)
    d = bj.center - bi.center
    dk = bj.kick - bi.kick
    q = 1j * (2.0 * d * u.imag + dk)
    log_ov = (
        bi.log_norm_phase.conjugate()
        + bj.log_norm_phase
        + 1j * dk * mid
        + 0.5 * math.log(math.pi / p2)
        + q * q / (4.0 * p2)
        - p2 * d * d / 4.0
    )
    y_bar = q / (2.0 * p2)
    mean_x = mid + y_bar
    mean_p = bj.kick + 2j * u * (y_bar - 0.5 * d)
    return _Pair(log_ov, mean_x, mean_p)


def log_overlap(bi: GaussianBranch, bj: GaussianBranch) -> complex:
    """``log <phi_i|phi_j>`` (principal imaginary part)."""
    lo = _pair(bi, bj).log_overlap
    return complex(lo.real, math.remainder(lo.imag, 2.0 * math.pi))


def branch_cross_moment(bi: GaussianBranch, bj: GaussianBranch, which: str = "overlap") -> complex:
    """``<phi_i|phi_j>``, ``<phi_i|x|phi_j>`` or ``<phi_i|p|phi_j>`` in closed form."""
    pair = _pair(bi, bj)
    ov = cmath.exp(pair.log_overlap)
    if which == "overlap":
        return ov
    if which == "x":
        return ov * pair.mean_x
    if which == "p":
        return ov * pair.mean_p
    raise ConfigurationError(f"unknown moment {which!r}; expected overlap, x or p")


def cross_moment_ratios(bi: GaussianBranch, bj: GaussianBranch):
    """``(<i|x|j>/<i|j>, <i|p|j>/<i|j>)``, finite even when the overlap underflows."""
    pair = _pair(bi, bj)
    return pair.mean_x, pair.mean_p


def branches(cfg: MeasurementConfig, eigenvalues) -> list[GaussianBranch]:
    return [evolve_branch(cfg, a) for a in np.asarray(eigenvalues, dtype=float).ravel()]


def overlap_matrix(cfg: MeasurementConfig, eigenvalues) -> np.ndarray:
    """``O[i, j] = <phi_i(t)|phi_j(t)>`` with the diagonal set to exactly 1."""
    bs = branches(cfg, eigenvalues)
    n = len(bs)
    out = np.eye(n, dtype=complex)
    for i in range(n):
        for j in range(i + 1, n):
            ov = branch_cross_moment(bs[i], bs[j])
            out[i, j] = ov
            out[j, i] = ov.conjugate()
    return out


def log_decoherence_factor(cfg: MeasurementConfig, ai: float, aj: float) -> float:
    """``ln F``; stays finite where ``F`` itself underflows."""
    if ai == aj:
        return 0.0
    lo = _pair(evolve_branch(cfg, ai), evolve_branch(cfg, aj)).log_overlap.real
    return min(lo, 0.0)


def decoherence_factor(cfg: MeasurementConfig, ai: float, aj: float) -> float:
    """``F = |<phi_i(t)|phi_j(t)>|`` from the exact overlap integral."""
    return math.exp(log_decoherence_factor(cfg, ai, aj))


def printed_log_factor(cfg: MeasurementConfig, ai: float, aj: float, variant: str) -> float:
    """Exponent of the two closed forms circulating for ``F``.

    ``variant="five_eighths"`` carries ``5/8 dx^2/sigma_t^2`` with a third term
    ``2 sigma^4 m^2 dx^2 / (t^2 sigma_t^2)``; ``variant="one_eighth"`` carries
    ``1/8 dx^2/sigma_t^2`` with ``2 m^2 sigma^2 dx^2 / t^2``.  Kept as
    diagnostics; :func:`decoherence_factor` is authoritative.
    """
    sigma, m, t = cfg.sigma, cfg.m, cfg.t
    dx = cfg.separation(ai, aj)
    st2 = cfg.sigma_t**2
    # dx / t written out so t = 0 is regular
    dx_over_t = cfg.g * t * (ai - aj) / (2.0 * m)
    middle = t**2 / (32.0 * sigma**4 * m**2) * dx**2 / st2
    if variant == "five_eighths":
        return -(5.0 / 8.0) * dx**2 / st2 - middle - 2.0 * sigma**4 * m**2 * dx_over_t**2 / st2
    if variant == "one_eighth":
        return -(1.0 / 8.0) * dx**2 / st2 - middle - 2.0 * m**2 * sigma**2 * dx_over_t**2
    raise ConfigurationError(f"unknown variant {variant!r}")


def printed_factor(cfg: MeasurementConfig, ai: float, aj: float, variant: str) -> float:
    return math.exp(printed_log_factor(cfg, ai, aj, variant))


class AsymptoticEstimate(NamedTuple):
    value: float
    log_value: float
    regime_ratio: float


def zeno_rate(cfg: MeasurementConfig, ai: float, aj: float) -> float:
    """``tau = g sigma (a_i - a_j) / sqrt(2)``; short-time ``F ~ 1 - tau^2 t^2``."""
    return cfg.g * cfg.sigma * (ai - aj) / math.sqrt(2.0)


def asymptotic_factor(cfg: MeasurementConfig, ai: float, aj: float, regime: str) -> AsymptoticEstimate:
    """Regime approximation of ``F``.

    ``long_time`` (``t >> m sigma^2``): ``exp(-g^2 da^2 t^4 / 32 sigma^2 m^2)``.
    ``short_time`` (``t << m sigma^2``): ``exp(-sigma^2 g^2 da^2 t^2 / 2)``.
    Whether the regime actually applies is up to the caller; ``regime_ratio``
    is returned to judge it.
    """
    da2 = (ai - aj) ** 2
    g, t, m, sigma = cfg.g, cfg.t, cfg.m, cfg.sigma
    if regime == "long_time":
        log_f = -(g**2) * da2 * t**4 / (32.0 * sigma**2 * m**2)
    elif regime == "short_time":
        log_f = -(sigma**2) * g**2 * da2 * t**2 / 2.0
    else:
        raise ConfigurationError(f"unknown regime {regime!r}; expected long_time or short_time")
    return AsymptoticEstimate(math.exp(log_f), log_f, cfg.regime_ratio)


@dataclass(frozen=True)
class ReducedDensityMatrix:
    entries: np.ndarray

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def hermiticity_error(self) -> float:
        return float(np.max(np.abs(self.entries - self.entries.conj().T)))

    def trace_error(self) -> float:
        return abs(complex(np.trace(self.entries)) - 1.0)

    def min_eigenvalue(self) -> float:
        herm = 0.5 * (self.entries + self.entries.conj().T)
        return float(np.linalg.eigvalsh(herm).min())

    def coherences(self) -> np.ndarray:
        """Off-diagonal part."""
        return self.entries - np.diag(np.diag(self.entries))


def reduced_density_matrix(obs: SpectralObservable, pre: SelectionState, cfg: MeasurementConfig) -> ReducedDensityMatrix:
    """System state after tracing out the pointer.

    ``rho[i, j] = alpha_i alpha_j* exp(-i (E_i - E_j) t) <phi_j(t)|phi_i(t)>``.
    """
    _check(obs, pre)
    alpha = pre.amplitudes
    ov = overlap_matrix(cfg, obs.eigenvalues)
    phase = np.exp(-1j * np.subtract.outer(obs.eigenphases, obs.eigenphases) * cfg.t)
    rho = np.outer(alpha, alpha.conj()) * phase * ov.T
    np.fill_diagonal(rho, np.abs(alpha) ** 2)
    return ReducedDensityMatrix(rho)
