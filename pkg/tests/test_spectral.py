import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from pointer_decoherence import (
    ConfigurationError,
    DegeneratePostSelectionError,
    OrthogonalSelectionError,
    SelectionState,
    SpectralObservable,
    conditional_expectation,
    expectation_value,
    weak_value,
)

from conftest import random_problem, random_state

PAULI_Z = SpectralObservable([1.0, -1.0])


def test_observable_validation():
    with pytest.raises(ConfigurationError):
        SpectralObservable([1.0])
    with pytest.raises(ConfigurationError):
        SpectralObservable([1.0, 2.0], eigenphases=[0.0])
    obs = SpectralObservable([1.0, 1.0, -2.0])
    assert obs.spectral_range == 3.0
    assert obs.gaps()[0, 2] == 3.0
    np.testing.assert_array_equal(obs.eigenphases, 0.0)


def test_selection_normalized_on_construction():
    s = SelectionState([3.0, 4.0j])
    assert abs(np.linalg.norm(s.amplitudes) - 1) < 1e-12
    with pytest.raises(ConfigurationError):
        SelectionState([0.0, 0.0])


def test_length_mismatch():
    with pytest.raises(ConfigurationError):
        expectation_value(PAULI_Z, SelectionState([1, 0, 0]))


@pytest.mark.parametrize(
    "alpha, expected",
    [
        ((1.0, 0.0), 1.0),
        ((2**-0.5, 2**-0.5), 0.0),
        ((math.cos(math.pi / 6), math.sin(math.pi / 6)), 0.5),
    ],
)
def test_expectation_examples(alpha, expected):
    assert expectation_value(PAULI_Z, SelectionState(alpha)) == pytest.approx(expected, abs=1e-15)


def test_conditional_example():
    th = math.pi / 8
    s = SelectionState([math.cos(th), math.sin(th)])
    # independent summation
    c4, s4 = math.cos(th) ** 4, math.sin(th) ** 4
    assert conditional_expectation(PAULI_Z, s, s) == pytest.approx((c4 - s4) / (c4 + s4), abs=1e-14)


def test_conditional_with_equal_selection_is_not_the_expectation():
    # sum a|alpha|^4 / sum |alpha|^4, which differs from <A> unless |alpha_i| are equal
    th = math.pi / 8
    s = SelectionState([math.cos(th), math.sin(th)])
    assert abs(conditional_expectation(PAULI_Z, s, s) - expectation_value(PAULI_Z, s)) > 0.1
    flat = SelectionState([1, 1j])
    assert conditional_expectation(PAULI_Z, flat, flat) == pytest.approx(expectation_value(PAULI_Z, flat))


def test_conditional_degenerate():
    with pytest.raises(DegeneratePostSelectionError):
        conditional_expectation(PAULI_Z, SelectionState([1, 0]), SelectionState([0, 1]))


def test_weak_orthogonal():
    with pytest.raises(OrthogonalSelectionError):
        weak_value(PAULI_Z, SelectionState([1, 1]), SelectionState([1, -1]))


def test_weak_and_conditional_errors_are_distinct():
    # <psi_f|psi_i> = 0 but the components still overlap
    pre, post = SelectionState([1, 1]), SelectionState([1, -1])
    assert conditional_expectation(PAULI_Z, pre, post) == pytest.approx(0.0)
    with pytest.raises(OrthogonalSelectionError):
        weak_value(PAULI_Z, pre, post)


@pytest.mark.parametrize(
    "t1, t2, expected",
    [
        (math.pi / 4, math.pi / 4, 0.0),
        (3 * math.pi / 8, 3 * math.pi / 8, -math.sqrt(2) / 2),
        (0.4 * math.pi, 0.4 * math.pi, math.cos(0.8 * math.pi)),
        (0.3, 1.1, math.cos(1.4) / math.cos(-0.8)),
    ],
)
def test_weak_value_two_level_angles(t1, t2, expected):
    w = weak_value(PAULI_Z, SelectionState.qubit(t1), SelectionState.qubit(t2))
    assert w.real == pytest.approx(expected, abs=1e-14)
    assert abs(w.imag) < 1e-15


def test_weak_value_amplification():
    eps = 0.01
    pre = SelectionState.qubit(math.pi / 4 + eps)
    post = SelectionState.qubit(-math.pi / 4)
    w = weak_value(PAULI_Z, pre, post)
    assert abs(w) > 50


@settings(max_examples=50, deadline=None)
@given(st.integers(2, 5), st.integers(0, 2**32 - 1))
def test_equal_selection_reduces_weak_value(dim, seed):
    rng = np.random.default_rng(seed)
    obs, pre, _ = random_problem(rng, dim)
    ev = expectation_value(obs, pre)
    w = weak_value(obs, pre, pre)
    assert abs(w.real - ev) < 1e-12 and abs(w.imag) < 1e-12


@settings(max_examples=50, deadline=None)
@given(st.integers(2, 5), st.integers(0, 2**32 - 1), st.floats(0, 2 * math.pi), st.floats(0, 2 * math.pi))
def test_global_phase_invariance(dim, seed, phi1, phi2):
    rng = np.random.default_rng(seed)
    obs, pre, post = random_problem(rng, dim)
    pre2 = SelectionState(pre.amplitudes * np.exp(1j * phi1))
    post2 = SelectionState(post.amplitudes * np.exp(1j * phi2))
    assert conditional_expectation(obs, pre2, post2) == pytest.approx(conditional_expectation(obs, pre, post), abs=1e-12)
    assert abs(weak_value(obs, pre2, post2) - weak_value(obs, pre, post)) < 1e-9 * max(1, abs(weak_value(obs, pre, post)))


@settings(max_examples=50, deadline=None)
@given(st.integers(2, 5), st.integers(0, 2**32 - 1), st.floats(-3, 3), st.floats(-3, 3))
def test_expectation_affine_and_bounded(dim, seed, c, d):
    rng = np.random.default_rng(seed)
    obs, pre, post = random_problem(rng, dim)
    ev = expectation_value(obs, pre)
    a = obs.eigenvalues
    assert a.min() - 1e-12 <= ev <= a.max() + 1e-12
    ce = conditional_expectation(obs, pre, post)
    assert a.min() - 1e-12 <= ce <= a.max() + 1e-12
    mapped = SpectralObservable(c * a + d)
    assert expectation_value(mapped, pre) == pytest.approx(c * ev + d, abs=1e-12)
