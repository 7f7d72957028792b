"""Brute-force reference: split-operator propagation on a uniform grid.

The observable commutes with the Hamiltonian, so the bipartite state splits
exactly into independent scalar problems ``i dphi/dt = (p^2/2m - g a x) phi``,
one per eigenvalue.  Each is integrated with Strang splitting (half kinetic
step in Fourier space, full potential phase, half kinetic step).  Nothing in
this module uses the closed-form branch expressions.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from .errors import (
    BoundaryContaminationError,
    ConfigurationError,
    ConvergenceError,
    NumericalFailure,
    PostSelectionAnnihilationError,
)
from .pointer import MeasurementConfig
from .spectral import SelectionState

DEFAULT_POINTS = 4096
MAX_POINTS = 1 << 15
# Auto-sized grids keep this many widths between any packet and the edges.
PAD_WIDTHS = 12.0
# A packet whose edge density exceeds exp(-8) of its peak is 4 widths away.
_EDGE_DENSITY = math.exp(-8.0)
_ROUNDOFF_FLOOR = 1e-13


class GridInfeasibleError(NumericalFailure):
    """The auto-sized grid would exceed the point cap."""


@dataclass(frozen=True)
class GridSpec:
    x_min: float
    x_max: float
    n_points: int = DEFAULT_POINTS
    n_steps: int = 100

    def __post_init__(self):
        n = int(self.n_points)
        if n < 256 or n & (n - 1):
            raise ConfigurationError(f"n_points must be a power of two >= 256, got {n}")
        if not self.x_max > self.x_min:
            raise ConfigurationError("x_max must exceed x_min")
        if int(self.n_steps) < 1:
            raise ConfigurationError("n_steps must be positive")
        object.__setattr__(self, "x_min", float(self.x_min))
        object.__setattr__(self, "x_max", float(self.x_max))
        object.__setattr__(self, "n_points", n)
        object.__setattr__(self, "n_steps", int(self.n_steps))

    @property
    def dx(self) -> float:
        return (self.x_max - self.x_min) / self.n_points

    @property
    def x(self) -> np.ndarray:
        return self.x_min + self.dx * np.arange(self.n_points)

    @property
    def k(self) -> np.ndarray:
        return 2.0 * np.pi * np.fft.fftfreq(self.n_points, d=self.dx)

    @property
    def k_max(self) -> float:
        return math.pi / self.dx

    def with_steps(self, n_steps: int) -> "GridSpec":
        return GridSpec(self.x_min, self.x_max, self.n_points, n_steps)

    def with_points(self, n_points: int) -> "GridSpec":
        return GridSpec(self.x_min, self.x_max, n_points, self.n_steps)


def _spread(cfg: MeasurementConfig) -> float:
    return cfg.sigma * math.sqrt(1.0 + cfg.t**2 / (4.0 * cfg.m**2 * cfg.sigma**4))


def default_steps(cfg: MeasurementConfig, eigenvalues) -> int:
    """Step count with ``dt <= 0.05 min(m sigma^2, sqrt(m)/|g a|max)``."""
    c = float(np.max(np.abs(np.asarray(eigenvalues, dtype=float)))) * abs(cfg.g)
    dt = 0.05 * cfg.m * cfg.sigma**2
    if c > 0:
        dt = min(dt, 0.05 * math.sqrt(cfg.m) / c)
    return max(16, int(math.ceil(cfg.t / dt)))


def auto_grid(
    cfg: MeasurementConfig,
    eigenvalues,
    n_steps: int | None = None,
    min_points: int = DEFAULT_POINTS,
    max_points: int = MAX_POINTS,
) -> GridSpec:
    """Smallest power-of-two grid covering every branch trajectory and kick.

    Position extent: all classical paths ``0 -> g a t^2/2m`` padded by
    ``PAD_WIDTHS`` final widths.  Momentum extent: largest kick ``|g a| t``
    padded by ``PAD_WIDTHS`` momentum widths ``1/(2 sigma)``.
    """
    a = np.asarray(eigenvalues, dtype=float)
    centers = cfg.g * a * cfg.t**2 / (2.0 * cfg.m)
    pad = PAD_WIDTHS * _spread(cfg)
    lo = min(0.0, centers.min()) - pad
    hi = max(0.0, centers.max()) + pad
    k_need = float(np.abs(cfg.g * a).max()) * cfg.t + PAD_WIDTHS / (2.0 * cfg.sigma)
    need = (hi - lo) * k_need / math.pi
    n = max(min_points, 256)
    while n < need:
        n *= 2
    if n > max_points:
        raise GridInfeasibleError(
            f"grid needs {n} points (cap {max_points}) for g={cfg.g}, t={cfg.t}"
        )
    steps = default_steps(cfg, a) if n_steps is None else n_steps
    return GridSpec(lo, hi, n, steps)


def _initial(spec: GridSpec, sigma: float) -> np.ndarray:
    x = spec.x
    return (2.0 * np.pi * sigma**2) ** -0.25 * np.exp(-(x**2) / (4.0 * sigma**2)).astype(complex)


@dataclass
class GridBranch:
    """One pointer branch sampled on a grid after propagation."""

    spec: GridSpec
    cfg: MeasurementConfig
    eigenvalue: float
    psi: np.ndarray
    norm_history: list = field(default_factory=list)
    energy_history: list = field(default_factory=list)

    @property
    def x(self) -> np.ndarray:
        return self.spec.x

    def norm(self) -> float:
        return discrete_norm(self.spec, self.psi)

    def energy(self) -> float:
        return branch_energy(self.spec, self.psi, self.cfg.g * self.eigenvalue, self.cfg.m)


def discrete_norm(spec: GridSpec, psi: np.ndarray) -> float:
    return float(np.sum(np.abs(psi) ** 2) * spec.dx)


def _mean_k(spec: GridSpec, psi: np.ndarray, power: int = 1) -> float:
    pk = np.abs(np.fft.fft(psi)) ** 2
    return float(np.sum(spec.k**power * pk) / np.sum(pk))


def branch_energy(spec: GridSpec, psi: np.ndarray, force: float, m: float) -> float:
    """``<p^2/2m - force x>`` with ``<p^2>`` taken in Fourier space."""
    n = discrete_norm(spec, psi)
    mean_x = float(np.sum(spec.x * np.abs(psi) ** 2) * spec.dx / n)
    return _mean_k(spec, psi, 2) / (2.0 * m) - force * mean_x


def _check_edges(spec: GridSpec, psi: np.ndarray, where: str) -> None:
    dens = np.abs(psi) ** 2
    peak = dens.max()
    edge = max(dens[0], dens[-1])
    if edge > _EDGE_DENSITY * peak:
        raise BoundaryContaminationError(f"wavepacket within 4 widths of the x-boundary {where}")
    pk = np.abs(np.fft.fft(psi)) ** 2
    n = spec.n_points
    kedge = pk[n // 2 - 1 : n // 2 + 2].max()
    if kedge > _EDGE_DENSITY * pk.max():
        raise BoundaryContaminationError(f"momentum distribution reaches the Nyquist edge {where}")


def check_coverage(spec: GridSpec, cfg: MeasurementConfig, a: float) -> None:
    """Refuse grids that cannot hold the branch's classical path +- 8 widths."""
    sigma_t = _spread(cfg)
    center = cfg.g * a * cfg.t**2 / (2.0 * cfg.m)
    lo, hi = min(0.0, center) - 8.0 * sigma_t, max(0.0, center) + 8.0 * sigma_t
    if lo < spec.x_min or hi > spec.x_max:
        raise BoundaryContaminationError(
            f"grid [{spec.x_min}, {spec.x_max}] does not contain [{lo:.4g}, {hi:.4g}]"
        )
    k_hi = abs(cfg.g * a) * cfg.t + 8.0 / (2.0 * cfg.sigma)
    if k_hi > spec.k_max:
        raise BoundaryContaminationError(f"kick {k_hi:.4g} beyond grid Nyquist {spec.k_max:.4g}")


def propagate(spec: GridSpec, cfg: MeasurementConfig, a: float, checkpoints: int = 8) -> GridBranch:
    """Evolve the initial Gaussian under ``p^2/2m - g a x`` up to ``cfg.t``."""
    check_coverage(spec, cfg, a)
    psi = _initial(spec, cfg.sigma)
    force = cfg.g * a
    branch = GridBranch(spec, cfg, float(a), psi)
    branch.norm_history.append(discrete_norm(spec, psi))
    branch.energy_history.append(branch_energy(spec, psi, force, cfg.m))
    if cfg.t == 0.0:
        return branch

    n = spec.n_steps
    dt = cfg.t / n
    half_kin = np.exp(-0.5j * dt * spec.k**2 / (2.0 * cfg.m))
    full_kin = half_kin * half_kin
    pot = np.exp(1j * force * spec.x * dt)
    marks = set(np.linspace(0, n, checkpoints + 1, dtype=int)[1:])

    phik = np.fft.fft(psi) * half_kin
    for step in range(1, n + 1):
        phik = np.fft.fft(np.fft.ifft(phik) * pot)
        if step in marks:
            psi = np.fft.ifft(phik * half_kin)
            _check_edges(spec, psi, f"at t={step * dt:.4g}")
            branch.norm_history.append(discrete_norm(spec, psi))
            branch.energy_history.append(branch_energy(spec, psi, force, cfg.m))
            if step == n:
                break
        phik = phik * full_kin
    branch.psi = psi
    return branch


def propagate_all(spec: GridSpec, cfg: MeasurementConfig, eigenvalues) -> list[GridBranch]:
    return [propagate(spec, cfg, a) for a in np.asarray(eigenvalues, dtype=float).ravel()]


def _same_grid(b1: GridBranch, b2: GridBranch) -> None:
    if b1.spec != b2.spec:
        raise ConfigurationError("branches live on different grids")


def numeric_overlap(b1: GridBranch, b2: GridBranch) -> complex:
    """``<b1|b2>`` as a Riemann sum (spectrally accurate on a periodic grid)."""
    _same_grid(b1, b2)
    return complex(np.vdot(b1.psi, b2.psi) * b1.spec.dx)


class Moments(NamedTuple):
    norm: float
    mean_x: float
    mean_p: float


def _moments_of(spec: GridSpec, psi: np.ndarray) -> tuple[float, float, float]:
    n = discrete_norm(spec, psi)
    if n < 1e-14:
        raise PostSelectionAnnihilationError(f"post-selected pointer norm {n:.3g} underflows")
    mx = float(np.sum(spec.x * np.abs(psi) ** 2) * spec.dx / n)
    return n, mx, _mean_k(spec, psi)


def numeric_moments(
    grid_branches: Sequence[GridBranch],
    pre: SelectionState,
    post: SelectionState | None = None,
    eigenphases=None,
) -> Moments:
    """Pointer norm and first moments.

    With ``post`` the post-selected pointer ``sum beta_i* alpha_i phi_i`` is
    assembled on the grid; without it the moments of the unconditioned
    (mixed) pointer state ``sum |alpha_i|^2 |phi_i><phi_i|`` are returned.
    """
    alpha = pre.amplitudes
    if len(grid_branches) != alpha.size:
        raise ConfigurationError("one grid branch per eigenvalue is required")
    for b in grid_branches[1:]:
        _same_grid(grid_branches[0], b)
    spec = grid_branches[0].spec
    t = grid_branches[0].cfg.t
    phase = np.ones(alpha.size) if eigenphases is None else np.exp(-1j * np.asarray(eigenphases) * t)
    if post is None:
        total, mx, mp = 0.0, 0.0, 0.0
        for w, b in zip(np.abs(alpha) ** 2, grid_branches):
            n, x_, p_ = _moments_of(spec, b.psi)
            total += w * n
            mx += w * n * x_
            mp += w * n * p_
        return Moments(total, mx / total, mp / total)
    if post.dim != alpha.size:
        raise ConfigurationError("post-selection dimension mismatch")
    coeff = post.amplitudes.conj() * alpha * phase
    xi = sum(c * b.psi for c, b in zip(coeff, grid_branches))
    return Moments(*_moments_of(spec, xi))


def numeric_reduced_density_matrix(
    grid_branches: Sequence[GridBranch], pre: SelectionState, eigenphases=None
) -> np.ndarray:
    """``rho[i, j] = alpha_i alpha_j* e^{-i(E_i - E_j)t} <phi_j|phi_i>`` from grid overlaps."""
    alpha = pre.amplitudes
    t = grid_branches[0].cfg.t
    e = np.zeros(alpha.size) if eigenphases is None else np.asarray(eigenphases, dtype=float)
    n = alpha.size
    rho = np.empty((n, n), dtype=complex)
    for i in range(n):
        for j in range(n):
            ov = numeric_overlap(grid_branches[j], grid_branches[i])
            rho[i, j] = alpha[i] * alpha[j].conjugate() * np.exp(-1j * (e[i] - e[j]) * t) * ov
    return rho


def numeric_transition_value(
    grid_branches: Sequence[GridBranch], pre: SelectionState, post: SelectionState, eigenphases=None
) -> complex:
    """``<psi_f|A rho'|psi_f> / <psi_f|rho'|psi_f>`` with rho' built from grid overlaps."""
    rho = numeric_reduced_density_matrix(grid_branches, pre, eigenphases)
    a = np.array([b.eigenvalue for b in grid_branches])
    beta = post.amplitudes
    return complex(np.vdot(beta, a * (rho @ beta)) / np.vdot(beta, rho @ beta))


def richardson(coarse, fine, order: float = 2.0, ratio: float = 2.0):
    """Eliminate the leading ``h^order`` error term from two refinements."""
    f = ratio**order
    return (f * np.asarray(fine) - np.asarray(coarse)) / (f - 1.0)


def oracle_overlap(cfg: MeasurementConfig, ai: float, aj: float, spec: GridSpec | None = None) -> complex:
    """Grid ``<phi_i|phi_j>``, Richardson-extrapolated over ``n_steps`` and ``2 n_steps``."""
    spec = spec or auto_grid(cfg, [ai, aj])
    vals = []
    for s in (spec, spec.with_steps(2 * spec.n_steps)):
        bi, bj = propagate(s, cfg, ai), propagate(s, cfg, aj)
        vals.append(numeric_overlap(bi, bj))
    return complex(richardson(vals[0], vals[1]))


def oracle_moments(
    cfg: MeasurementConfig,
    eigenvalues,
    pre: SelectionState,
    post: SelectionState | None = None,
    spec: GridSpec | None = None,
) -> Moments:
    """Grid pointer moments, Richardson-extrapolated in the time step."""
    spec = spec or auto_grid(cfg, eigenvalues)
    vals = []
    for s in (spec, spec.with_steps(2 * spec.n_steps)):
        vals.append(numeric_moments(propagate_all(s, cfg, eigenvalues), pre, post))
    return Moments(*richardson(vals[0], vals[1]))


def oracle_transition_value(
    cfg: MeasurementConfig,
    eigenvalues,
    pre: SelectionState,
    post: SelectionState,
    spec: GridSpec | None = None,
) -> complex:
    spec = spec or auto_grid(cfg, eigenvalues)
    vals = []
    for s in (spec, spec.with_steps(2 * spec.n_steps)):
        vals.append(numeric_transition_value(propagate_all(s, cfg, eigenvalues), pre, post))
    return complex(richardson(vals[0], vals[1]))


@dataclass
class ConvergenceReport:
    """Outcome of a refinement ladder.

    ``differences[k]`` is the max change of the tracked quantities between
    rungs ``k`` and ``k+1``; ``orders[k]`` the observed order from rungs
    ``k, k+1, k+2`` (``None`` once differences sit at the round-off floor).
    """

    kind: str
    ladder: list
    values: list
    differences: list
    orders: list
    extrapolated: np.ndarray
    labels: list
    accepted: bool
    note: str = ""

    def value(self, label: str) -> complex:
        return complex(self.extrapolated[self.labels.index(label)])


def _ladder_quantities(spec: GridSpec, cfg: MeasurementConfig, eigenvalues):
    bs = propagate_all(spec, cfg, eigenvalues)
    init = _initial(spec, cfg.sigma)
    labels, vals = [], []
    for i, bi in enumerate(bs):
        labels.append(f"auto[{bi.eigenvalue:g}]")
        vals.append(complex(np.vdot(init, bi.psi) * spec.dx))
        for bj in bs[i + 1 :]:
            labels.append(f"overlap[{bi.eigenvalue:g},{bj.eigenvalue:g}]")
            vals.append(numeric_overlap(bi, bj))
    return labels, np.array(vals)


def convergence_study(
    ladder: Sequence[GridSpec], cfg: MeasurementConfig, eigenvalues, strict: bool = True
) -> ConvergenceReport:
    """Run a refinement ladder and measure the observed convergence order.

    Tracked quantities: every pairwise branch overlap and each branch's
    autocorrelation with the initial Gaussian (sensitive to the global phase).
    A time ladder (fixed ``n_points``, growing ``n_steps``) is extrapolated
    assuming second order; a space ladder converges spectrally and the finest
    rung is taken as the answer.
    """
    if len(ladder) < 3:
        raise ConfigurationError("a convergence ladder needs at least 3 rungs")
    if all(s.n_points == ladder[0].n_points for s in ladder):
        kind = "time"
        ratios = [ladder[k + 1].n_steps / ladder[k].n_steps for k in range(len(ladder) - 1)]
    elif all(s.n_steps == ladder[0].n_steps for s in ladder):
        kind = "space"
        ratios = [ladder[k + 1].n_points / ladder[k].n_points for k in range(len(ladder) - 1)]
    else:
        raise ConfigurationError("refine either n_steps or n_points along a ladder, not both")
    if any(r <= 1 for r in ratios):
        raise ConfigurationError("ladder must be strictly refining")

    labels, values = None, []
    for spec in ladder:
        labels, v = _ladder_quantities(spec, cfg, eigenvalues)
        values.append(v)
    diffs = [float(np.max(np.abs(values[k + 1] - values[k]))) for k in range(len(values) - 1)]
    orders = []
    accepted, note = True, ""
    for k in range(len(diffs) - 1):
        if diffs[k + 1] < _ROUNDOFF_FLOOR:
            orders.append(None)
            continue
        if diffs[k + 1] > diffs[k]:
            accepted = False
            note = f"non-monotone convergence between rungs {k} and {k + 2}"
            orders.append(None)
            continue
        orders.append(math.log(diffs[k] / diffs[k + 1]) / math.log(ratios[k + 1]))
    if kind == "time" and diffs[-1] >= _ROUNDOFF_FLOOR:
        extrapolated = richardson(values[-2], values[-1], 2.0, ratios[-1])
    else:
        extrapolated = values[-1]
    report = ConvergenceReport(kind, list(ladder), values, diffs, orders, extrapolated, labels, accepted, note)
    if strict and not accepted:
        raise ConvergenceError(note)
    return report


def write_snapshot(path, grid_branches: Sequence[GridBranch]) -> None:
    """Dump branches: one JSON header line, then little-endian float64 rows of
    ``(re, im)`` pairs, one row per grid point and one pair per branch."""
    spec = grid_branches[0].spec
    for b in grid_branches[1:]:
        _same_grid(grid_branches[0], b)
    header = {
        "spec": asdict(spec),
        "cfg": asdict(grid_branches[0].cfg),
        "eigenvalues": [b.eigenvalue for b in grid_branches],
        "dtype": "<f8",
        "layout": "row=grid point; columns=(re, im) per branch",
    }
    data = np.stack([b.psi for b in grid_branches], axis=1)
    raw = np.empty((spec.n_points, 2 * len(grid_branches)), dtype="<f8")
    raw[:, 0::2] = data.real
    raw[:, 1::2] = data.imag
    with open(path, "wb") as fh:
        fh.write(json.dumps(header, sort_keys=True).encode() + b"\n")
        fh.write(raw.tobytes())


def read_snapshot(path) -> list[GridBranch]:
    with open(path, "rb") as fh:
        header = json.loads(fh.readline())
        payload = fh.read()
    spec = GridSpec(**header["spec"])
    cfg = MeasurementConfig(**header["cfg"])
    eig = header["eigenvalues"]
    raw = np.frombuffer(payload, dtype="<f8").reshape(spec.n_points, 2 * len(eig))
    return [
        GridBranch(spec, cfg, float(a), raw[:, 2 * i] + 1j * raw[:, 2 * i + 1])
        for i, a in enumerate(eig)
    ]
