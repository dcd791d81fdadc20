"""LU substrate tests against independent oracles (triple loop, cofactor)."""

import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from detmc.linalg import (
    DenseMatrix,
    MatrixFormatError,
    SingularMatrixError,
    load_matrix,
    log_abs_det,
    lu_factorize,
    lu_solve,
    lu_solve_many,
    matvec,
    save_matrix,
)


def naive_matvec(a, v):
    """Independent triple-loop-style oracle for the product."""
    n = len(v)
    out = np.zeros(n)
    for i in range(n):
        s = 0.0
        for j in range(n):
            s += a[i][j] * v[j]
        out[i] = s
    return out


def reconstruction_error(m, f):
    n = m.n
    lower = np.tril(f.lu, -1) + np.eye(n)
    upper = np.triu(f.lu)
    permuted = m.data[f.pivots]
    return np.max(np.abs(permuted - lower @ upper)) / max(1.0, np.max(np.abs(m.data)))


class TestMatvec:
    def test_identity(self):
        m = DenseMatrix(np.eye(3))
        np.testing.assert_array_equal(matvec(m, np.array([1.0, 2.0, 3.0])), [1.0, 2.0, 3.0])

    def test_diagonal(self):
        m = DenseMatrix(np.diag([2.0, 3.0]))
        np.testing.assert_array_equal(matvec(m, np.array([1.0, 1.0])), [2.0, 3.0])

    def test_matches_triple_loop_oracle(self):
        rng = np.random.default_rng(31)
        a = rng.standard_normal((3, 3))
        v = rng.standard_normal(3)
        got = matvec(DenseMatrix(a), v)
        np.testing.assert_allclose(got, naive_matvec(a, v), rtol=1e-14)

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            matvec(DenseMatrix(np.eye(3)), np.ones(4))


class TestDenseMatrix:
    def test_rejects_non_square(self):
        with pytest.raises(ValueError):
            DenseMatrix(np.ones((2, 3)))

    def test_rejects_non_finite(self):
        with pytest.raises(ValueError):
            DenseMatrix(np.array([[1.0, np.nan], [0.0, 1.0]]))

    def test_immutable(self):
        m = DenseMatrix(np.eye(2))
        with pytest.raises(ValueError):
            m.data[0, 0] = 5.0


class TestLUFactorize:
    def test_identity(self):
        f = lu_factorize(DenseMatrix(np.eye(4)))
        np.testing.assert_array_equal(f.lu, np.eye(4))
        np.testing.assert_array_equal(f.pivots, np.arange(4))
        assert f.parity == 1

    def test_swap_matrix(self):
        f = lu_factorize(DenseMatrix(np.array([[0.0, 1.0], [1.0, 0.0]])))
        assert f.parity == -1
        assert sorted(f.pivots.tolist()) == [0, 1]
        assert log_abs_det(f) == pytest.approx(0.0, abs=1e-15)

    def test_seeded_reconstruction(self):
        rng = np.random.default_rng(404)
        m = DenseMatrix(rng.standard_normal((4, 4)))
        assert reconstruction_error(m, lu_factorize(m)) < 1e-12

    def test_pivots_form_permutation(self):
        rng = np.random.default_rng(8)
        f = lu_factorize(DenseMatrix(rng.standard_normal((7, 7))))
        assert sorted(f.pivots.tolist()) == list(range(7))
        assert f.parity in (-1, 1)

    @pytest.mark.parametrize(
        "bad",
        [
            np.zeros((3, 3)),
            np.array([[1.0, 2.0], [2.0, 4.0]]),  # rank 1
            np.array([[1e-320]]),  # below the pivot floor
        ],
    )
    def test_singular_rejected(self, bad):
        with pytest.raises(SingularMatrixError):
            lu_factorize(DenseMatrix(bad))


class TestLUSolve:
    def test_identity(self):
        f = lu_factorize(DenseMatrix(np.eye(2)))
        np.testing.assert_array_equal(lu_solve(f, np.array([5.0, 6.0])), [5.0, 6.0])

    def test_diagonal(self):
        f = lu_factorize(DenseMatrix(np.diag([2.0, 4.0])))
        np.testing.assert_array_equal(lu_solve(f, np.array([2.0, 4.0])), [1.0, 1.0])

    def test_seeded_residual(self):
        rng = np.random.default_rng(55)
        a = rng.standard_normal((5, 5))
        b = rng.standard_normal(5)
        x = lu_solve(lu_factorize(DenseMatrix(a)), b)
        assert np.linalg.norm(a @ x - b) / np.linalg.norm(b) < 1e-10

    def test_block_solve_matches_loop(self):
        rng = np.random.default_rng(56)
        a = rng.standard_normal((6, 6))
        rhs = rng.standard_normal((9, 6))
        f = lu_factorize(DenseMatrix(a))
        block = lu_solve_many(f, rhs)
        for i in range(9):
            np.testing.assert_allclose(block[i], lu_solve(f, rhs[i]), rtol=1e-12, atol=1e-14)

    def test_dimension_mismatch(self):
        f = lu_factorize(DenseMatrix(np.eye(3)))
        with pytest.raises(ValueError):
            lu_solve(f, np.ones(2))


class TestLogAbsDet:
    def test_identity(self):
        assert log_abs_det(lu_factorize(DenseMatrix(np.eye(5)))) == 0.0

    def test_diagonal(self):
        got = log_abs_det(lu_factorize(DenseMatrix(np.diag([2.0, 3.0]))))
        assert got == pytest.approx(math.log(6.0), abs=1e-15)

    def test_seeded_2x2_cofactor(self):
        rng = np.random.default_rng(77)
        a, b, c, d = rng.standard_normal(4)
        got = log_abs_det(lu_factorize(DenseMatrix(np.array([[a, b], [c, d]]))))
        assert got == pytest.approx(math.log(abs(a * d - b * c)), abs=1e-12)

    def test_permutation_invariance(self):
        rng = np.random.default_rng(13)
        a = rng.standard_normal((6, 6))
        base = log_abs_det(lu_factorize(DenseMatrix(a)))
        for seed in range(4):
            p = np.random.default_rng(seed).permutation(6)
            permuted = log_abs_det(lu_factorize(DenseMatrix(a[p])))
            assert permuted == pytest.approx(base, abs=1e-12)

    @pytest.mark.parametrize("c", [0.5, 3.0, 10.0])
    def test_scaling_law(self, c):
        rng = np.random.default_rng(21)
        a = rng.standard_normal((5, 5))
        base = log_abs_det(lu_factorize(DenseMatrix(a)))
        scaled = log_abs_det(lu_factorize(DenseMatrix(c * a)))
        assert scaled == pytest.approx(5 * math.log(c) + base, abs=1e-10)

    @pytest.mark.parametrize("seed", range(10))
    def test_parity_recovers_signed_determinant(self, seed):
        a = np.random.default_rng(seed).standard_normal((4, 4))
        f = lu_factorize(DenseMatrix(a))
        signed = f.parity * np.prod(np.sign(np.diag(f.lu))) * math.exp(log_abs_det(f))
        assert signed == pytest.approx(np.linalg.det(a), rel=1e-10)


@given(st.integers(min_value=1, max_value=8), st.integers(min_value=0, max_value=10_000))
@settings(deadline=None, max_examples=60)
def test_solve_then_matvec_roundtrip(n, seed):
    rng = np.random.default_rng(seed)
    a = rng.standard_normal((n, n))
    assume(np.linalg.cond(a) < 1e6)
    m = DenseMatrix(a)
    b = rng.standard_normal(n)
    x = lu_solve(lu_factorize(m), b)
    assert np.linalg.norm(matvec(m, x) - b) <= 1e-8 * np.linalg.norm(b)


@given(
    arrays(np.float64, (5, 5), elements=st.floats(min_value=-100.0, max_value=100.0)),
)
@settings(deadline=None, max_examples=60)
def test_reconstruction_property(entries):
    assume(abs(np.linalg.det(entries)) > 1e-6)
    m = DenseMatrix(entries)
    assert reconstruction_error(m, lu_factorize(m)) < 1e-10


class TestMatrixFiles:
    def test_round_trip_exact(self, tmp_path):
        rng = np.random.default_rng(3)
        m = DenseMatrix(rng.standard_normal((4, 4)) * 10.0 ** rng.integers(-8, 8, (4, 4)))
        path = tmp_path / "m.txt"
        save_matrix(path, m)
        loaded = load_matrix(path)
        np.testing.assert_array_equal(loaded.data, m.data)

    def test_format_on_disk(self, tmp_path):
        path = tmp_path / "m.txt"
        save_matrix(path, DenseMatrix(np.array([[1.5, 0.0], [-2.0, 4.0]])))
        lines = path.read_text().splitlines()
        assert lines[0] == "2"
        assert len(lines) == 3
        assert [float(t) for t in lines[1].split()] == [1.5, 0.0]

    @pytest.mark.parametrize(
        "text",
        [
            "",
            "x\n1 2\n3 4\n",
            "2\n1 2\n3\n",
            "2\n1 2 3 4 5\n",
            "-1\n",
            "2\n1 2\n3 inf\n",
        ],
    )
    def test_malformed_rejected(self, tmp_path, text):
        path = tmp_path / "bad.txt"
        path.write_text(text)
        with pytest.raises(MatrixFormatError):
            load_matrix(path)
