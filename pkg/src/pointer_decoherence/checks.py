"""Limit-recovery checks run by ``pointer-decoherence limits-check``."""
from __future__ import annotations

import math
from typing import Callable, NamedTuple

import numpy as np
from scipy.optimize import brentq

from .pointer import (
    MeasurementConfig,
    asymptotic_factor,
    decoherence_factor,
    log_decoherence_factor,
    reduced_density_matrix,
)
from .spectral import (
    SelectionState,
    SpectralObservable,
    conditional_expectation,
    expectation_value,
    weak_value,
)
from .stern_gerlach import SgScenario, sg_density_matrix, sg_shifts
from .transition import (
    unconditioned_pointer_shifts,
    limit_shifts,
    pairwise_factors,
    postselected_pointer_shifts,
    transition_value,
)


class CheckResult(NamedTuple):
    name: str
    passed: bool
    worst: float
    tolerance: float


def random_selection(rng: np.random.Generator, dim: int):
    a = rng.uniform(-1.0, 1.0, dim)
    pre = SelectionState(rng.normal(size=dim) + 1j * rng.normal(size=dim))
    post = SelectionState(rng.normal(size=dim) + 1j * rng.normal(size=dim))
    return SpectralObservable(a), pre, post


def _gaps(obs):
    a = obs.eigenvalues
    g = np.abs(np.subtract.outer(a, a))[np.triu_indices(a.size, 1)]
    return g[g > 0]


def coupling_for_log_factor(gap: float, log_target: float, t: float = 1.0, m: float = 1.0, sigma: float = 1.0) -> float:
    """Coupling ``g`` at which the pair with eigenvalue gap ``gap`` has ``ln F = log_target``."""
    fn = lambda g: log_decoherence_factor(MeasurementConfig(g, t, m, sigma), gap, 0.0) - log_target
    hi = 1.0
    while fn(hi) > 0:
        hi *= 10.0
    return brentq(fn, 0.0, hi, xtol=1e-300, rtol=1e-14)


# Weak-limit probe sits at the edge of the admissible band 1 - F < 1e-6.
WEAK_PROBE = 0.999e-6
STRONG_PROBE = 0.999e-10


def weak_cfg(obs, one_minus_f: float = WEAK_PROBE) -> MeasurementConfig:
    """Coupling with ``1 - F_min = one_minus_f`` at ``t = m = sigma = 1``."""
    return MeasurementConfig(coupling_for_log_factor(_gaps(obs).max(), math.log1p(-one_minus_f)), 1.0)


def strong_cfg(obs, f_max: float = STRONG_PROBE) -> MeasurementConfig:
    """Coupling with ``F_max = f_max`` at ``t = m = sigma = 1``."""
    return MeasurementConfig(coupling_for_log_factor(_gaps(obs).min(), math.log(f_max)), 1.0)


def check_weak_limit(n: int = 100, seed: int = 0) -> CheckResult:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for k in range(n):
        obs, pre, post = random_selection(rng, 2 + k % 2)
        cfg = weak_cfg(obs)
        assert pairwise_factors(obs, cfg).min() > 1 - 1e-6
        dev = abs(transition_value(obs, pre, post, cfg) - weak_value(obs, pre, post))
        worst = max(worst, dev / obs.spectral_range)
    return CheckResult("weak limit: A_T -> <A>_w", worst <= 1e-4, worst, 1e-4)


def check_strong_limit(n: int = 100, seed: int = 0) -> CheckResult:
    rng = np.random.default_rng(seed)
    worst = worst_im = 0.0
    for k in range(n):
        obs, pre, post = random_selection(rng, 2 + k % 2)
        cfg = strong_cfg(obs)
        assert pairwise_factors(obs, cfg).max() < 1e-10
        at = transition_value(obs, pre, post, cfg)
        dev = abs(at - conditional_expectation(obs, pre, post)) / obs.spectral_range
        worst = max(worst, dev)
        worst_im = max(worst_im, abs(at.imag))
    passed = worst <= 1e-6 and worst_im <= 1e-8
    return CheckResult("strong limit: A_T -> <A>_c, |Im A_T| <= 1e-8", passed, worst, 1e-6)


def check_zero_coupling(n: int = 20, seed: int = 11) -> CheckResult:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for k in range(n):
        obs, pre, post = random_selection(rng, 2 + k % 3)
        for cfg in (MeasurementConfig(0.0, 2.0), MeasurementConfig(1.3, 0.0)):
            worst = max(worst, abs(transition_value(obs, pre, post, cfg) - weak_value(obs, pre, post)))
        dx, dp = postselected_pointer_shifts(obs, pre, post, MeasurementConfig(0.0, 2.0))
        worst = max(worst, abs(dx), abs(dp))
    return CheckResult("g=0 / t=0: A_T = <A>_w, zero shifts", worst <= 1e-12, worst, 1e-12)


def check_no_postselection(n: int = 50, seed: int = 3) -> CheckResult:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for k in range(n):
        obs, pre, _ = random_selection(rng, 2 + k % 3)
        cfg = MeasurementConfig(rng.uniform(0.1, 3), rng.uniform(0.1, 3), rng.uniform(0.5, 2), rng.uniform(0.5, 2))
        dx, dp = unconditioned_pointer_shifts(obs, pre, cfg)
        ev = expectation_value(obs, pre)
        worst = max(worst, abs(dx - cfg.g * cfg.t**2 / (2 * cfg.m) * ev), abs(dp - cfg.g * cfg.t * ev))
    return CheckResult("no post-selection: dx = g t^2 <A>/2m, dp = g t <A>", worst <= 1e-10, worst, 1e-10)


# Selections whose weak values have real and imaginary parts of comparable
# size; relative agreement is meaningless when either part vanishes.
MASS_PROBES = (
    ((1.0, -1.0), (math.pi / 3, 0.4), (math.pi / 5, -0.9)),
    ((1.0, -1.0), (0.7, 1.2), (0.5, 0.1)),
    ((1.0, 0.0, -1.0), (1.0, 0.5 + 0.5j, 0.3j), (0.2, 1.0j, 0.8)),
)


def _probe(eig, pre, post):
    obs = SpectralObservable(eig)
    if len(eig) == 2:
        return obs, SelectionState.qubit(*pre), SelectionState.qubit(*post)
    return obs, SelectionState(pre), SelectionState(post)


def check_infinite_mass() -> CheckResult:
    worst = 0.0
    for probe in MASS_PROBES:
        obs, pre, post = _probe(*probe)
        cfg = MeasurementConfig(1.0, 1.0, 1e6, 1.0)
        fin = limit_shifts(obs, pre, post, cfg, "weak_F1")
        inf = limit_shifts(obs, pre, post, cfg, "weak_F1_minf")
        worst = max(worst, *(abs(f - i) / abs(i) for f, i in zip(fin, inf)))
    return CheckResult("m -> inf: weak shifts -> (-2 g t sigma^2 Im w, g t Re w)", worst <= 1e-5, worst, 1e-5)


def check_sg_regimes(seed: int = 13) -> CheckResult:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(20):
        th1, th2 = rng.uniform(0.1, 1.4, 2)
        d1, d2 = rng.uniform(-math.pi, math.pi, 2)
        strong = SgScenario(th1, d1, th2, d2, f=8.0, t=1.0)
        sh = sg_shifts(strong)
        c = (math.cos(th1) ** 2 * math.cos(th2) ** 2 - math.sin(th1) ** 2 * math.sin(th2) ** 2) / (
            math.cos(th1) ** 2 * math.cos(th2) ** 2 + math.sin(th1) ** 2 * math.sin(th2) ** 2
        )
        worst = max(worst, abs(sh.dx - 8.0 / 2 * c), abs(sh.dp - 8.0 * c))
        weak = SgScenario(th1, d1, th2, d2, f=1e-5, t=1.0)
        sh = sg_shifts(weak)
        lim = limit_shifts(weak.observable, weak.pre, weak.post, weak.cfg, "weak_F1")
        worst = max(worst, abs(sh.dx - lim[0]) / 1e-5, abs(sh.dp - lim[1]) / 1e-5)
    return CheckResult("Stern-Gerlach strong / weak regime shifts", worst <= 1e-6, worst, 1e-6)


def check_decohered_state(seed: int = 17) -> CheckResult:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(20):
        th1, d1 = rng.uniform(0, math.pi), rng.uniform(-math.pi, math.pi)
        s = SgScenario(th1, d1, 0.3, 0.0, f=10.0, t=2.0)
        mixed = np.diag([math.cos(th1) ** 2, math.sin(th1) ** 2])
        worst = max(worst, float(np.abs(sg_density_matrix(s).entries - mixed).max()))
        s0 = SgScenario(th1, d1, 0.3, 0.0, f=0.0, t=2.0)
        psi = s0.pre.amplitudes
        worst = max(worst, float(np.abs(sg_density_matrix(s0).entries - np.outer(psi, psi.conj())).max()))
    return CheckResult("F'=0 mixture / F'=1 pure projector", worst <= 1e-10, worst, 1e-10)


def check_asymptotes() -> CheckResult:
    worst = 0.0
    for ratio in (1e2, 1e3, 1e4):
        cfg = MeasurementConfig(1.0, ratio)
        ex = log_decoherence_factor(cfg, 1.0, -1.0)
        worst = max(worst, abs(ex - asymptotic_factor(cfg, 1.0, -1.0, "long_time").log_value) / abs(ex))
    return CheckResult("long-time asymptote relative log error", worst <= 1e-2, worst, 1e-2)


CHECKS: list[Callable[[], CheckResult]] = [
    check_zero_coupling,
    check_weak_limit,
    check_strong_limit,
    check_no_postselection,
    check_infinite_mass,
    check_sg_regimes,
    check_decohered_state,
    check_asymptotes,
]


def run_limit_checks() -> list[CheckResult]:
    return [check() for check in CHECKS]
