"""Spectral data of the measured observable and its three value functionals.

The observable is diagonal in its eigenbasis, so pre- and post-selected
states are just amplitude vectors over that basis.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    ConfigurationError,
    DegeneratePostSelectionError,
    OrthogonalSelectionError,
)

# Amplitude-level threshold below which a denominator counts as zero.
ZERO_AMPLITUDE = 1e-14


@dataclass(frozen=True)
class SpectralObservable:
    """Eigenvalues ``a_i`` of the measured observable and optional system
    eigenphases ``E_i`` (energies; ``hbar = 1``)."""

    eigenvalues: np.ndarray
    eigenphases: np.ndarray = field(default=None)

    def __post_init__(self):
        a = np.asarray(self.eigenvalues, dtype=float).ravel()
        if a.size < 2:
            raise ConfigurationError("an observable needs at least 2 eigenvalues")
        if not np.all(np.isfinite(a)):
            raise ConfigurationError("eigenvalues must be finite")
        if self.eigenphases is None:
            e = np.zeros_like(a)
        else:
            e = np.asarray(self.eigenphases, dtype=float).ravel()
            if e.shape != a.shape:
                raise ConfigurationError(
                    f"{e.size} eigenphases given for {a.size} eigenvalues"
                )
        a.flags.writeable = False
        e.flags.writeable = False
        object.__setattr__(self, "eigenvalues", a)
        object.__setattr__(self, "eigenphases", e)

    @property
    def dim(self) -> int:
        return self.eigenvalues.size

    @property
    def spectral_range(self) -> float:
        return float(self.eigenvalues.max() - self.eigenvalues.min())

    def gaps(self) -> np.ndarray:
        """Matrix of pairwise differences ``a_i - a_j``."""
        a = self.eigenvalues
        return a[:, None] - a[None, :]


@dataclass(frozen=True)
class SelectionState:
    """Pure state given by complex amplitudes over the observable's eigenbasis.

    Amplitudes are normalized on construction.
    """

    amplitudes: np.ndarray

    def __post_init__(self):
        amp = np.asarray(self.amplitudes, dtype=complex).ravel()
        if amp.size == 0 or not np.all(np.isfinite(amp)):
            raise ConfigurationError("amplitudes must be a non-empty finite vector")
        norm = np.linalg.norm(amp)
        if norm == 0.0:
            raise ConfigurationError("cannot normalize the zero vector")
        amp = amp / norm
        amp.flags.writeable = False
        object.__setattr__(self, "amplitudes", amp)

    @classmethod
    def qubit(cls, theta: float, delta: float = 0.0) -> "SelectionState":
        """``cos(theta)|0> + exp(i delta) sin(theta)|1>``."""
        return cls(np.array([np.cos(theta), np.exp(1j * delta) * np.sin(theta)]))

    @property
    def dim(self) -> int:
        return self.amplitudes.size

    def overlap(self, other: "SelectionState") -> complex:
        """``<self|other>``."""
        return complex(np.vdot(self.amplitudes, other.amplitudes))


def _check(obs: SpectralObservable, *states: SelectionState) -> None:
    for s in states:
        if s.dim != obs.dim:
            raise ConfigurationError(
                f"state of dimension {s.dim} paired with {obs.dim}-level observable"
            )


def expectation_value(obs: SpectralObservable, pre: SelectionState) -> float:
    """``sum_j a_j |alpha_j|^2``."""
    _check(obs, pre)
    return float(np.dot(obs.eigenvalues, np.abs(pre.amplitudes) ** 2))


def conditional_expectation(
    obs: SpectralObservable, pre: SelectionState, post: SelectionState
) -> float:
    """Post-selected strong value ``sum a_j |alpha_j beta_j*|^2 / sum |alpha_j beta_j*|^2``."""
    _check(obs, pre, post)
    w = np.abs(pre.amplitudes * np.conj(post.amplitudes)) ** 2
    den = w.sum()
    if np.sqrt(den) < ZERO_AMPLITUDE:
        raise DegeneratePostSelectionError(
            "pre- and post-selection share no eigen-component"
        )
    return float(np.dot(obs.eigenvalues, w) / den)


def weak_value(
    obs: SpectralObservable, pre: SelectionState, post: SelectionState
) -> complex:
    """``<psi_f|A|psi_i> / <psi_f|psi_i>``; complex and possibly outside the spectrum."""
    _check(obs, pre, post)
    c = pre.amplitudes * np.conj(post.amplitudes)
    den = c.sum()
    if abs(den) < ZERO_AMPLITUDE:
        raise OrthogonalSelectionError("<psi_f|psi_i> vanishes")
    return complex(np.dot(obs.eigenvalues, c) / den)
