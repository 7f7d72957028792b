"""Stern-Gerlach specialization: spin-1/2 in a linear field gradient.

``H = p^2/2m - f x sigma_z`` is the generic model with eigenvalues ``+-1``
and coupling ``g = f`` (``f`` is the magnetic moment times the field
gradient; only the product matters).  All numerics are delegated to the
generic modules; this one owns the angle parameterization and the
closed-form spin expressions used as cross-checks.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import PostSelectionAnnihilationError
from .pointer import (
    GaussianBranch,
    MeasurementConfig,
    ReducedDensityMatrix,
    decoherence_factor,
    evolve_branch,
    reduced_density_matrix,
)
from .spectral import SelectionState, SpectralObservable
from .transition import postselected_pointer_shifts

SIGMA_Z = SpectralObservable([1.0, -1.0])


@dataclass(frozen=True)
class SgScenario:
    theta1: float
    delta1: float
    theta2: float
    delta2: float
    f: float
    t: float
    m: float = 1.0
    sigma: float = 1.0

    @property
    def observable(self) -> SpectralObservable:
        return SIGMA_Z

    @property
    def pre(self) -> SelectionState:
        return SelectionState.qubit(self.theta1, self.delta1)

    @property
    def post(self) -> SelectionState:
        return SelectionState.qubit(self.theta2, self.delta2)

    @property
    def cfg(self) -> MeasurementConfig:
        return MeasurementConfig(g=self.f, t=self.t, m=self.m, sigma=self.sigma)


def sg_branches(s: SgScenario) -> tuple[GaussianBranch, GaussianBranch]:
    """Spin-up and spin-down pointer packets (centers ``+-f t^2/2m``)."""
    cfg = s.cfg
    return evolve_branch(cfg, 1.0), evolve_branch(cfg, -1.0)


def sg_decoherence(s: SgScenario) -> float:
    return decoherence_factor(s.cfg, 1.0, -1.0)


def sg_printed_decoherence(s: SgScenario) -> float:
    """``exp(-gamma^2/8 - t^2 gamma^2 / 32 m^2 sigma^4 - 2 sigma^2 f^2 t^2)``
    with ``gamma = f t^2 / (m sigma_t)``."""
    cfg = s.cfg
    gamma = s.f * s.t**2 / (s.m * cfg.sigma_t)
    return math.exp(
        -gamma**2 / 8.0
        - s.t**2 * gamma**2 / (32.0 * s.m**2 * s.sigma**4)
        - 2.0 * s.sigma**2 * s.f**2 * s.t**2
    )


def sg_density_matrix(s: SgScenario) -> ReducedDensityMatrix:
    return reduced_density_matrix(SIGMA_Z, s.pre, s.cfg)


def sg_printed_density_matrix(s: SgScenario, f_prime: float | None = None) -> np.ndarray:
    """``cos^2|up><up| + sin^2|dn><dn| + (1/2) e^{-i delta1} sin(2 theta1) F' |up><dn| + h.c.``"""
    fp = sg_decoherence(s) if f_prime is None else f_prime
    c2, s2 = math.cos(s.theta1) ** 2, math.sin(s.theta1) ** 2
    off = 0.5 * np.exp(-1j * s.delta1) * math.sin(2 * s.theta1) * fp
    return np.array([[c2, off], [np.conj(off), s2]])


def _angles(s: SgScenario):
    c1, s1 = math.cos(s.theta1), math.sin(s.theta1)
    c2, s2 = math.cos(s.theta2), math.sin(s.theta2)
    diag = (c1 * c2) ** 2 - (s1 * s2) ** 2
    diag_sum = (c1 * c2) ** 2 + (s1 * s2) ** 2
    cross = math.sin(2 * s.theta1) * math.sin(2 * s.theta2)
    return diag, diag_sum, cross, s.delta1 - s.delta2


def sg_beta_sq(s: SgScenario, f_prime: float | None = None) -> float:
    """Post-selection normalization
    ``cos^2 t1 cos^2 t2 + sin^2 t1 sin^2 t2 + (1/2) sin 2t1 sin 2t2 cos(d1 - d2) F'``."""
    fp = sg_decoherence(s) if f_prime is None else f_prime
    _, diag_sum, cross, dd = _angles(s)
    return diag_sum + 0.5 * cross * math.cos(dd) * fp


def sg_conditional(s: SgScenario) -> float:
    diag, diag_sum, _, _ = _angles(s)
    return diag / diag_sum


class SgShifts(NamedTuple):
    dx: float
    dp: float
    beta_sq: float
    dx_printed: float
    dp_printed: float


def sg_printed_shifts(s: SgScenario, f_prime: float | None = None):
    """Spin closed forms for ``(dx, dp)`` given ``F'``."""
    fp = sg_decoherence(s) if f_prime is None else f_prime
    f, t, m, sigma = s.f, s.t, s.m, s.sigma
    diag, _, cross, dd = _angles(s)
    b2 = sg_beta_sq(s, fp)
    if b2 <= 0.0:
        raise PostSelectionAnnihilationError("beta^2 vanishes")
    interference = cross * math.sin(dd) * fp
    dx = (
        f * t**2 / (2 * m) * diag
        + (f * t**3 + 8 * f * t * sigma**4 * m**2) / (8 * sigma**2 * m**2) * interference
    ) / b2
    dp = (f * t * diag + f * t**2 / (8 * sigma**2 * m) * interference) / b2
    return dx, dp


def sg_shifts(s: SgScenario) -> SgShifts:
    """Exact pointer shifts plus the closed-form spin expressions."""
    fp = sg_decoherence(s)
    b2 = sg_beta_sq(s, fp)
    if b2 < 1e-28:
        raise PostSelectionAnnihilationError(f"beta^2 = {b2:.3g}: post-selection annihilates the pointer")
    dx, dp = postselected_pointer_shifts(SIGMA_Z, s.pre, s.post, s.cfg)
    dxp, dpp = sg_printed_shifts(s, fp)
    return SgShifts(dx, dp, b2, dxp, dpp)
