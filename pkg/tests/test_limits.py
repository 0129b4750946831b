"""Combinatorial limit spectra, limit matrices, and the maximality criterion."""

import numpy as np
import pytest
from numpy.testing import assert_allclose

from antitrotter.errors import EtaZero, MaximalityFails
from antitrotter.limits import (
    check_maximal,
    delta_set,
    eta_sequence,
    limit_eigenvalues,
    limit_eigenvalues_multi,
    limit_matrix,
    limit_matrix_multi,
    maximal_limit,
)
from antitrotter.matnum import PsdMatrix, chain_eigenvalues_numeric

from conftest import haar_unitary, pd_pair


def _rotation(theta: float) -> np.ndarray:
    c, s = np.cos(theta), np.sin(theta)
    return np.array([[c, -s], [s, c]], dtype=complex)


@pytest.fixture
def tilted_pair():
    """diag(4,1) against a 45-degree rotated spectrum (9,1)."""
    A = PsdMatrix(np.array([4.0, 1.0]), np.eye(2, dtype=complex))
    B = PsdMatrix(np.array([9.0, 1.0]), _rotation(np.pi / 4))
    return A, B


@pytest.fixture
def permutation_pair():
    """Shared eigenvectors but fully swapped pairing of the spectra."""
    A = PsdMatrix(np.array([4.0, 1.0]), np.eye(2, dtype=complex))
    W = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
    B = PsdMatrix(np.array([9.0, 1.0]), W)
    return A, B


class TestEtaSequence:
    def test_commuting_partial_products(self):
        A = PsdMatrix(np.array([5.0, 3.0, 2.0]), np.eye(3, dtype=complex))
        B = PsdMatrix(np.array([7.0, 4.0, 1.0]), np.eye(3, dtype=complex))
        seq = eta_sequence(A, B)
        got = [v.to_real() for v in seq.values]
        assert_allclose(got, [35.0, 35.0 * 12.0, 35.0 * 12.0 * 2.0], rtol=1e-12)

    def test_permutation_pair(self, permutation_pair):
        seq = eta_sequence(*permutation_pair)
        assert seq.values[0].to_real() == pytest.approx(9.0)
        assert seq.values[1].to_real() == pytest.approx(36.0)

    def test_tilted_pair(self, tilted_pair):
        seq = eta_sequence(*tilted_pair)
        assert seq.values[0].to_real() == pytest.approx(36.0)
        assert seq.values[1].to_real() == pytest.approx(36.0)

    def test_rank_one_first_argument_zero_tail(self):
        A = PsdMatrix(np.array([1.0, 0.0]), np.eye(2, dtype=complex))
        _, B = pd_pair(400, 2)
        seq = eta_sequence(A, B)
        assert not seq.values[0].is_zero
        assert seq.values[1].is_zero


class TestLimitEigenvalues:
    def test_commuting_sorted_products(self):
        A = PsdMatrix(np.array([5.0, 3.0]), np.eye(2, dtype=complex))
        B = PsdMatrix(np.array([2.0, 1.0]), np.eye(2, dtype=complex))
        lam = limit_eigenvalues(A, B)
        assert_allclose([v.to_real() for v in lam], [10.0, 3.0], rtol=1e-12)

    def test_tilted_pair(self, tilted_pair):
        lam = limit_eigenvalues(*tilted_pair)
        assert_allclose([v.to_real() for v in lam], [36.0, 1.0], rtol=1e-12)

    def test_rank_one_zero_eigenvalue(self):
        A = PsdMatrix(np.array([1.0, 0.0]), np.eye(2, dtype=complex))
        _, B = pd_pair(401, 2)
        lam = limit_eigenvalues(A, B)
        assert lam[1].is_zero

    def test_extreme_product_bounds(self):
        """Top eigenvalue never exceeds a_1 b_1; bottom never drops below a_d b_d."""
        for tag in range(20):
            d = 2 + tag % 4
            A, B = pd_pair(410 + tag, d)
            lam = limit_eigenvalues(A, B)
            la, lb = A.log_eigenvalues(), B.log_eigenvalues()
            assert lam[0].logmag <= la[0] + lb[0] + 1e-12
            assert lam[-1].logmag >= la[-1] + lb[-1] - 1e-12

    def test_scale_equivariance_exact_in_log(self):
        A, B = pd_pair(430, 3)
        c = 7.5
        As = PsdMatrix(c * A.eigenvalues, A.eigenvectors)
        lam = limit_eigenvalues(A, B)
        lam_s = limit_eigenvalues(As, B)
        for v, vs in zip(lam, lam_s):
            assert vs.logmag == pytest.approx(v.logmag + np.log(c), abs=1e-12)


class TestDeltaSet:
    def test_commuting_single_maximizer(self):
        A = PsdMatrix(np.array([5.0, 3.0, 2.0]), np.eye(3, dtype=complex))
        B = PsdMatrix(np.array([7.0, 4.0, 1.0]), np.eye(3, dtype=complex))
        pairs = delta_set(A, B, 2)
        got = {(I.members, J.members) for I, J in pairs}
        assert got == {((1, 2), (1, 2))}

    def test_tilted_pair_k1(self, tilted_pair):
        pairs = delta_set(*tilted_pair, 1)
        got = {(I.members, J.members) for I, J in pairs}
        assert got == {((1,), (1,))}

    def test_permutation_pair_k1(self, permutation_pair):
        pairs = delta_set(*permutation_pair, 1)
        got = {(I.members, J.members) for I, J in pairs}
        assert got == {((2,), (1,))}

    def test_eta_zero_rejected(self):
        A = PsdMatrix(np.array([1.0, 0.0]), np.eye(2, dtype=complex))
        B = PsdMatrix(np.array([1.0, 0.0]), _rotation(0.3))
        with pytest.raises(EtaZero):
            delta_set(A, B, 2)


class TestLimitMatrix:
    def test_commuting_diagonal(self):
        A = PsdMatrix(np.array([5.0, 3.0]), np.eye(2, dtype=complex))
        B = PsdMatrix(np.array([2.0, 1.0]), np.eye(2, dtype=complex))
        report = limit_matrix(A, B)
        assert_allclose(report.matrix.matrix(), np.diag([10.0, 3.0]), atol=1e-12)

    def test_permutation_pair(self, permutation_pair):
        report = limit_matrix(*permutation_pair)
        assert_allclose(report.matrix.matrix(), np.diag([4.0, 9.0]), atol=1e-12)

    def test_hand_2x2_dominant(self):
        A = PsdMatrix(np.array([4.0, 1.0]), np.eye(2, dtype=complex))
        B = PsdMatrix.from_matrix(np.array([[5.0, 4.0], [4.0, 5.0]]))
        report = limit_matrix(A, B)
        assert_allclose(report.matrix.matrix(), np.diag([36.0, 1.0]), atol=1e-9)
        assert report.maximal is not None and report.maximal.holds

    def test_spectra_match_eigenvalue_path(self):
        for tag in range(8):
            A, B = pd_pair(440 + tag, 3)
            report = limit_matrix(A, B)
            lam = limit_eigenvalues(A, B)
            got = report.matrix.log_eigenvalues()
            for i, v in enumerate(lam):
                assert got[i] == pytest.approx(v.logmag, abs=1e-8)

    def test_group_projections_partition(self):
        A, B = pd_pair(450, 4)
        report = limit_matrix(A, B)
        total = np.zeros((4, 4), dtype=complex)
        for g in report.groups:
            P = g.projection
            assert_allclose(P @ P, P, atol=1e-8)
            assert_allclose(P, P.conj().T, atol=1e-10)
            for h in report.groups:
                if h is not g:
                    assert np.abs(P @ h.projection).max() < 1e-8
            total += P
        assert_allclose(total, np.eye(4), atol=1e-8)

    def test_diagnostics_shrink_along_schedule(self):
        A, B = pd_pair(460, 3)
        report = limit_matrix(A, B)
        ps = sorted(report.diagnostics)
        resid = [report.diagnostics[p] for p in ps]
        assert resid[-1] <= resid[0] + 1e-12

    def test_unitary_equivariance(self, rng):
        A, B = pd_pair(470, 3)
        U = haar_unitary(rng, 3)
        Au = PsdMatrix(A.eigenvalues, U @ A.eigenvectors)
        Bu = PsdMatrix(B.eigenvalues, U @ B.eigenvectors)
        Z = limit_matrix(A, B).matrix.matrix()
        Zu = limit_matrix(Au, Bu).matrix.matrix()
        assert_allclose(Zu, U @ Z @ U.conj().T, atol=1e-8 * np.abs(Z).max())


class TestCheckMaximal:
    def test_shared_basis_holds(self, rng):
        V = haar_unitary(rng, 3)
        A = PsdMatrix(np.array([5.0, 2.0, 1.0]), V)
        B = PsdMatrix(np.array([4.0, 3.0, 0.5]), V)
        verdict = check_maximal(A, B)
        assert verdict.holds
        assert verdict.eigenvalues_match

    def test_permutation_fails_at_first_boundary(self, permutation_pair):
        verdict = check_maximal(*permutation_pair)
        assert not verdict.holds
        assert verdict.failing_k == 1

    def test_tilted_pair_holds(self, tilted_pair):
        verdict = check_maximal(*tilted_pair)
        assert verdict.holds


class TestMaximalLimit:
    def test_distinct_spectra_closed_form(self, rng):
        V = haar_unitary(rng, 3)
        W = haar_unitary(rng, 3)
        A = PsdMatrix(np.array([5.0, 2.0, 1.0]), V)
        B = PsdMatrix(np.array([4.0, 3.0, 0.5]), W)
        if not check_maximal(A, B).holds:
            pytest.skip("random rotation hit a vanishing leading minor")
        report = maximal_limit(A, B)
        want = (V * (A.eigenvalues * B.eigenvalues)) @ V.conj().T
        assert_allclose(report.matrix.matrix(), want, atol=1e-10 * want.max())

    def test_identity_first_argument(self):
        _, B = pd_pair(480, 3)
        A = PsdMatrix(np.ones(3), np.eye(3, dtype=complex))
        report = maximal_limit(A, B)
        assert_allclose(report.matrix.matrix(), B.matrix(), atol=1e-10 * B.eigenvalues[0])
        direct = limit_matrix(A, B)
        assert_allclose(
            report.matrix.matrix(), direct.matrix.matrix(), atol=1e-8 * B.eigenvalues[0]
        )

    def test_commuting_agrees_with_general_path(self):
        A = PsdMatrix(np.array([5.0, 3.0]), np.eye(2, dtype=complex))
        B = PsdMatrix(np.array([2.0, 1.0]), np.eye(2, dtype=complex))
        assert_allclose(
            maximal_limit(A, B).matrix.matrix(),
            limit_matrix(A, B).matrix.matrix(),
            atol=1e-12,
        )

    def test_refuses_non_maximal(self, permutation_pair):
        with pytest.raises(MaximalityFails):
            maximal_limit(*permutation_pair)


class TestMultiMatrix:
    def test_commuting_diagonals(self):
        mats = [
            PsdMatrix(np.array([2.0, 1.0]), np.eye(2, dtype=complex)),
            PsdMatrix(np.array([3.0, 1.0]), np.eye(2, dtype=complex)),
            PsdMatrix(np.array([5.0, 2.0]), np.eye(2, dtype=complex)),
        ]
        lam = limit_eigenvalues_multi(mats)
        assert_allclose([v.to_real() for v in lam], [30.0, 2.0], rtol=1e-12)

    def test_two_factor_reduction_bit_identical(self, tilted_pair):
        A, B = tilted_pair
        lam2 = limit_eigenvalues(A, B)
        lam_multi = limit_eigenvalues_multi([A, B])
        for u, v in zip(lam2, lam_multi):
            assert u.sign == v.sign
            assert u.logmag == v.logmag

    def test_triple_top_eigenvalue_matches_numeric(self):
        for tag in range(4):
            mats = [
                pd_pair(500 + tag, 2, lo=0.1, hi=10.0)[0],
                pd_pair(510 + tag, 2, lo=0.1, hi=10.0)[0],
                pd_pair(520 + tag, 2, lo=0.1, hi=10.0)[0],
            ]
            lam = limit_eigenvalues_multi(mats)
            num = chain_eigenvalues_numeric(mats, 4096.0)
            assert lam[0].logmag == pytest.approx(num[0].logmag, abs=1e-3)

    def test_matrix_multi_two_factor_agreement(self, tilted_pair):
        A, B = tilted_pair
        Z2 = limit_matrix(A, B).matrix.matrix()
        Zm = limit_matrix_multi([A, B]).matrix.matrix()
        assert_allclose(Zm, Z2, atol=1e-12)

    def test_matrix_multi_commuting(self):
        mats = [
            PsdMatrix(np.array([2.0, 1.0]), np.eye(2, dtype=complex)),
            PsdMatrix(np.array([3.0, 1.0]), np.eye(2, dtype=complex)),
        ]
        report = limit_matrix_multi(mats)
        assert_allclose(report.matrix.matrix(), np.diag([6.0, 1.0]), atol=1e-12)
