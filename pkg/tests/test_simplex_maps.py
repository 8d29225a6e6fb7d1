import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from sparsehop import simplex_maps as sm
from sparsehop.errors import (
    DegeneratePointError,
    EmptyInputError,
    InvalidInputError,
    InvalidParameterError,
)

finite = st.floats(-50, 50, allow_nan=False, allow_infinity=False)
score_vectors = arrays(np.float64, st.integers(1, 12), elements=finite)


def brute_force_projection(z):
    """Exhaustive over all 2^M - 1 supports; independent of both implementations."""
    return sm.simplex_projection_oracle(z, exhaustive=True).p


@pytest.mark.parametrize(
    "z, p, tau, kappa",
    [
        ((0.0, 0.0), (0.5, 0.5), -0.5, 2),
        ((1.5, 1.0, 0.5), (0.75, 0.25, 0.0), 0.75, 2),
        ((2.0, 0.0, 0.0), (1.0, 0.0, 0.0), 1.0, 1),
    ],
)
def test_sparsemax_examples(z, p, tau, kappa):
    sv = sm.sparsemax(z)
    np.testing.assert_allclose(sv.p, p, atol=1e-12)
    assert sv.tau == pytest.approx(tau, abs=1e-12)
    assert sv.kappa == kappa
    np.testing.assert_allclose(brute_force_projection(z), p, atol=1e-9)


def test_sparsemax_single_entry():
    sv = sm.sparsemax([3.0])
    assert sv.p.tolist() == [1.0]
    assert sv.tau == 2.0 and sv.kappa == 1


def test_sparsemax_errors():
    with pytest.raises(EmptyInputError):
        sm.sparsemax([])
    with pytest.raises(InvalidInputError):
        sm.sparsemax([1.0, np.nan])
    with pytest.raises(InvalidInputError):
        sm.sparsemax([np.inf, 0.0])


@pytest.mark.parametrize(
    "z, beta, expected",
    [
        ((0, 0), 1.0, (0.5, 0.5)),
        ((0, 0, 0, 0), 1.0, (0.25,) * 4),
        ((math.log(2), 0), 1.0, (2 / 3, 1 / 3)),
    ],
)
def test_softmax_examples(z, beta, expected):
    sv = sm.softmax(z, beta)
    np.testing.assert_allclose(sv.p, expected, atol=1e-15)
    assert sv.kappa == len(z)


def test_softmax_is_stable_for_huge_scores():
    sv = sm.softmax([1000.0, 999.0], 1.0)
    e = math.exp(-1.0)
    np.testing.assert_allclose(sv.p, [1 / (1 + e), e / (1 + e)], rtol=1e-14)


@pytest.mark.parametrize("beta", [0.0, -1.0, np.nan])
def test_softmax_and_lse_reject_bad_beta(beta):
    with pytest.raises(InvalidParameterError):
        sm.softmax([0.0], beta)
    with pytest.raises(InvalidParameterError):
        sm.lse(beta, [0.0])


@pytest.mark.parametrize(
    "beta, z, expected",
    [(1.0, (0, 0), math.log(2)), (2.0, (5,), 5.0), (1.0, (1, 1, 1, 1), 1 + math.log(4))],
)
def test_lse_examples(beta, z, expected):
    assert sm.lse(beta, z) == pytest.approx(expected, abs=1e-14)


@pytest.mark.parametrize(
    "p, expected", [((1, 0, 0), 0.0), ((0.5, 0.5), -0.25), ((0.25,) * 4, -0.375)]
)
def test_gini_entropy_neg(p, expected):
    assert sm.gini_entropy_neg(p) == pytest.approx(expected, abs=1e-15)
    assert sm.gini_entropy_neg(p) == pytest.approx(0.5 * np.dot(p, p) - 0.5, abs=1e-15)


def test_gini_entropy_rejects_off_simplex():
    with pytest.raises(InvalidInputError):
        sm.gini_entropy_neg([0.6, 0.6])
    with pytest.raises(InvalidInputError):
        sm.gini_entropy_neg([1.1, -0.1])


@pytest.mark.parametrize("z, expected", [((0, 0), 0.25), ((2, 0, 0), 2.0), ((0,), 0.0)])
def test_psi_star_examples(z, expected):
    assert sm.psi_star(z) == pytest.approx(expected, abs=1e-14)


def test_oracle_examples():
    np.testing.assert_allclose(sm.simplex_projection_oracle([0, 0]).p, [0.5, 0.5])
    np.testing.assert_allclose(
        sm.simplex_projection_oracle([1.5, 1.0, 0.5]).p, [0.75, 0.25, 0.0], atol=1e-15
    )
    with pytest.raises(InvalidParameterError):
        sm.simplex_projection_oracle(np.zeros(21), exhaustive=True)


def test_oracle_agrees_on_random_8_vectors():
    rng = np.random.default_rng(8)
    for _ in range(50):
        z = rng.uniform(-3, 3, 8)
        np.testing.assert_allclose(sm.sparsemax(z).p, sm.simplex_projection_oracle(z).p,
                                   atol=1e-9)
        np.testing.assert_allclose(sm.sparsemax(z).p, brute_force_projection(z), atol=1e-9)


@settings(max_examples=300, deadline=None)
@given(score_vectors)
def test_sparsemax_on_simplex(z):
    sv = sm.sparsemax(z)
    assert np.all(sv.p >= 0)
    assert abs(sv.p.sum() - 1) <= 1e-12
    assert np.sum(np.maximum(z - sv.tau, 0)) == pytest.approx(1.0, abs=1e-10)
    assert set(np.flatnonzero(sv.p > 0)) == set(sv.support.tolist())
    assert len(sv.support) == sv.kappa
    # entrywise [z - tau]_+ up to the support tolerance
    np.testing.assert_allclose(sv.p, np.maximum(z - sv.tau, 0), atol=1e-12 * max(1, np.abs(z).max()))


@settings(max_examples=200, deadline=None)
@given(score_vectors)
def test_sparsemax_matches_oracle(z):
    np.testing.assert_allclose(sm.sparsemax(z).p, sm.simplex_projection_oracle(z).p, atol=1e-9)


@settings(max_examples=200, deadline=None)
@given(score_vectors, st.floats(-100, 100))
def test_shift_invariance(z, c):
    np.testing.assert_allclose(sm.sparsemax(z + c).p, sm.sparsemax(z).p, atol=1e-12 * (1 + abs(c)) * 10)


@settings(max_examples=200, deadline=None)
@given(score_vectors, st.randoms(use_true_random=False))
def test_permutation_equivariance(z, rnd):
    perm = list(range(len(z)))
    rnd.shuffle(perm)
    np.testing.assert_allclose(sm.sparsemax(z[perm]).p, sm.sparsemax(z).p[perm], atol=1e-12)


def test_ties_produce_equal_probabilities():
    z = np.array([1.0, 0.3, 1.0, 0.3, -2.0])
    p = sm.sparsemax(z).p
    assert p[0] == p[2] and p[1] == p[3]


def test_scaling_drives_support_to_argmax_ties():
    z = np.array([0.4, 1.0, -0.2, 1.0, 0.9])
    kappas = [sm.sparsemax(g * z).kappa for g in (0.1, 1, 10, 100, 1e4)]
    assert kappas == sorted(kappas, reverse=True)
    assert kappas[-1] == 2
    assert sm.sparsemax(1e4 * np.array([0.1, 0.5, 0.2])).kappa == 1


@settings(max_examples=200, deadline=None)
@given(score_vectors)
def test_full_support_criterion(z):
    M = len(z)
    zs = np.sort(z)[::-1]
    full = 1 + M * zs[-1] > zs.sum()
    # ties straddling the tolerance can drop a boundary entry
    margin = abs(1 + M * zs[-1] - zs.sum())
    if margin > 1e-9 * max(1, np.abs(z).max()) * M:
        assert (sm.sparsemax(z).kappa == M) == full


@settings(max_examples=100, deadline=None)
@given(score_vectors)
def test_softmax_full_support(z):
    assert sm.softmax(z, 1.0).kappa == len(z)


@settings(max_examples=200, deadline=None)
@given(score_vectors)
def test_conjugate_variational_identity(z):
    # max over oracle candidates of <p, z> - Psi(p), Psi(p) = |p|^2/2 - 1/2
    p = brute_force_projection(z) if len(z) <= 10 else sm.simplex_projection_oracle(z).p
    variational = p @ z - (0.5 * p @ p - 0.5)
    assert sm.psi_star(z) == pytest.approx(variational, abs=1e-9 * max(1, np.abs(z).max() ** 2))


def test_jacobian_fd_examples():
    assert sm.sparsemax_jacobian_fd([4.0]).tolist() == [[0.0]]
    np.testing.assert_allclose(sm.sparsemax_jacobian_fd([2.0, 0.0, 0.0], 1e-6), 0.0, atol=1e-12)
    J = sm.sparsemax_jacobian_fd([1.5, 1.0, 0.5], 1e-6)
    s = np.array([1.0, 1.0, 0.0])
    np.testing.assert_allclose(J, np.diag(s) - np.outer(s, s) / 2, atol=1e-5)
    np.testing.assert_allclose(J.sum(axis=0), 0.0, atol=1e-6)


def test_jacobian_fd_matches_analytic_random():
    rng = np.random.default_rng(3)
    checked = 0
    while checked < 30:
        z = rng.uniform(-2, 2, rng.integers(2, 9))
        try:
            J = sm.sparsemax_jacobian_fd(z, 1e-6)
        except DegeneratePointError:
            continue
        np.testing.assert_allclose(J, sm.sparsemax_jacobian(z), atol=1e-5)
        np.testing.assert_allclose(J.sum(axis=0), 0.0, atol=1e-6)
        checked += 1


def test_jacobian_fd_errors():
    with pytest.raises(DegeneratePointError):
        sm.sparsemax_jacobian_fd([1.0, 0.0], 1e-6)  # tau = 0: entry 0 sits on the boundary
    with pytest.raises(InvalidParameterError):
        sm.sparsemax_jacobian_fd([1.5, 1.0, 0.5], 1e-3)


def test_danskin_gradient_of_psi_star():
    rng = np.random.default_rng(11)
    h = 1e-6
    for _ in range(50):
        z = rng.uniform(-3, 3, rng.integers(1, 9))
        if len(z) > 1 and np.min(np.abs(z - sm.sparsemax(z).tau)) <= 10 * h:
            continue
        grad = np.array([
            (sm.psi_star(z + h * e) - sm.psi_star(z - h * e)) / (2 * h) for e in np.eye(len(z))
        ])
        np.testing.assert_allclose(grad, sm.sparsemax(z).p, atol=1e-5)
