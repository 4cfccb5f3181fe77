import math
from fractions import Fraction

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.linalg import expm, null_space

from susylmg.hamiltonian import collective_matrices
from susylmg.specfun import (
    LOG_FACTORIAL_TABLE_SIZE,
    LogNum,
    MagneticIndex,
    Spin,
    cg_stretched,
    doubled,
    jacobi_polynomial,
    legendre_log,
    log_binomial,
    log_binomials,
    log_cg_stretched_grid,
    log_d_imag_column,
    log_d_pi2_column,
    log_factorial,
    wigner_d_imag,
    wigner_d_pi2,
    wigner_d_pi2_exact,
)


def sum_log(n):
    return math.fsum(math.log(k) for k in range(2, n + 1))


class TestSpinTypes:
    def test_doubled_storage(self):
        assert Spin.of(Fraction(3, 2)).two_j == 3
        assert Spin.of(0.5).dim == 2
        assert Spin.of(2).is_integer
        assert str(Spin(3)) == "3/2"
        assert list(Spin(2).projections()) == [-2, 0, 2]

    @pytest.mark.parametrize("bad", [0.3, -1, "1"])
    def test_rejects(self, bad):
        with pytest.raises((ValueError, TypeError)):
            Spin.of(bad)

    def test_magnetic_parity(self):
        MagneticIndex.of(-0.5).check(Spin(1))
        with pytest.raises(ValueError):
            MagneticIndex(1).check(Spin(2))
        with pytest.raises(ValueError):
            MagneticIndex(4).check(Spin(2))

    def test_doubled_negative(self):
        assert doubled(-1.5, allow_negative=True) == -3
        with pytest.raises(ValueError):
            doubled(-1.5)


class TestLogNum:
    def test_arithmetic(self):
        a, b = LogNum.from_float(-3.0), LogNum.from_float(0.5)
        assert float(a * b) == pytest.approx(-1.5)
        assert float(a / b) == pytest.approx(-6.0)
        assert float(LogNum.from_float(9.0).sqrt()) == pytest.approx(3.0)
        assert (a * LogNum.zero()).sign == 0

    def test_out_of_range_is_flagged(self):
        big = LogNum(1, 1000.0)
        assert not big.representable
        with pytest.raises(OverflowError):
            big.to_float()
        assert (big / big).to_float() == 1.0

    def test_bad_sign(self):
        with pytest.raises(ValueError):
            LogNum(2, 0.0)


class TestFactorials:
    def test_small(self):
        assert log_factorial(0) == 0.0
        assert log_factorial(5) == pytest.approx(4.787491743, abs=1e-9)

    @pytest.mark.parametrize("n", [400, 2000, LOG_FACTORIAL_TABLE_SIZE + 7])
    def test_against_summation(self, n):
        assert log_factorial(n) == pytest.approx(sum_log(n), rel=1e-13)

    def test_binomials(self):
        assert log_binomial(2, 1).log_mag == pytest.approx(math.log(2))
        assert log_binomial(4, 2).log_mag == pytest.approx(math.log(6))
        assert log_binomial(5, 7).sign == 0
        assert log_binomial(5, -1).sign == 0
        ref = sum_log(400) - 2 * sum_log(200)
        assert log_binomial(400, 200).log_mag == pytest.approx(ref, rel=1e-12)

    @given(st.integers(0, 3000), st.data())
    def test_binomial_symmetry(self, n, data):
        k = data.draw(st.integers(0, n))
        assert log_binomial(n, k).log_mag == log_binomial(n, n - k).log_mag

    def test_vectorised(self):
        k = np.arange(-1, 12)
        out = log_binomials(10, k)
        assert np.isneginf(out[0]) and np.isneginf(out[-1])
        np.testing.assert_allclose(np.exp(out[1:-1]), [math.comb(10, j) for j in range(11)], rtol=1e-13)


class TestLegendre:
    def test_examples(self):
        assert legendre_log(7, 1.0).log_mag == 0.0
        assert legendre_log(7, 1.0).sign == 1
        assert legendre_log(1, 2.5).log_mag == pytest.approx(math.log(2.5))
        assert legendre_log(2, 2.0).log_mag == pytest.approx(math.log(5.5))

    def test_domain(self):
        with pytest.raises(ValueError):
            legendre_log(3, 0.9)
        with pytest.raises(ValueError):
            legendre_log(0.5, 2.0)

    @pytest.mark.parametrize("n,x", [(200, math.cosh(2.0)), (2000, 30.0), (1500, 1.0001), (777, 3.3)])
    def test_against_mpmath(self, n, x):
        mpmath.mp.dps = 30
        ref = float(mpmath.log(mpmath.legendre(n, mpmath.mpf(x))))
        assert legendre_log(n, x).log_mag == pytest.approx(ref, rel=1e-10)

    @settings(max_examples=60)
    @given(st.integers(0, 300), st.floats(1.0, 3.0))
    def test_against_naive_recurrence(self, n, x):
        prev, cur = 1.0, x
        if n == 0:
            cur = 1.0
        for k in range(1, n):
            prev, cur = cur, ((2 * k + 1) * x * cur - k * prev) / (k + 1)
        if math.isfinite(cur):
            assert math.exp(legendre_log(n, x).log_mag - math.log(cur)) == pytest.approx(1.0, abs=1e-10)


def jy_rotation_column(J, beta):
    jy = collective_matrices(J)["Jy"]
    return expm(-1j * beta * jy)[:, J]


class TestWignerPi2:
    def test_examples(self):
        assert wigner_d_pi2(1, 0) == 0.0
        assert wigner_d_pi2(1, 1) == pytest.approx(-1 / math.sqrt(2), abs=1e-15)
        assert wigner_d_pi2(2, 0) == pytest.approx(-0.5, abs=1e-15)

    @pytest.mark.parametrize("J", [1, 2, 5, 12])
    def test_matches_matrix_exponential(self, J):
        col = jy_rotation_column(J, math.pi / 2)
        ours = [wigner_d_pi2(J, m) for m in range(-J, J + 1)]
        np.testing.assert_allclose(ours, col.real, atol=1e-13)

    @pytest.mark.parametrize("J", [8, 9])
    def test_twisted_column_is_jy_null_vector(self, J):
        v = null_space(collective_matrices(J)["Jy"])[:, 0]
        mp = np.arange(-J, J + 1)
        ours = (-1j) ** (mp % 4) * np.array([wigner_d_pi2(J, m) for m in mp])
        assert abs(abs(np.vdot(v, ours)) - 1.0) < 1e-12

    def test_plain_column_is_jx_null_vector(self):
        J = 7
        ours = np.array([wigner_d_pi2(J, m) for m in range(-J, J + 1)])
        assert np.linalg.norm(collective_matrices(J)["Jx"] @ ours) < 1e-13

    @pytest.mark.parametrize("J", range(0, 51))
    def test_unit_column_and_parity(self, J):
        signs, logs = log_d_pi2_column(J)
        d = signs * np.exp(logs)
        assert math.fsum(d**2) == pytest.approx(1.0, abs=1e-12)
        odd = (J + np.arange(-J, J + 1)) % 2 == 1
        assert np.all(signs[odd] == 0) and np.all(d[odd] == 0.0)

    def test_exact_sum_agrees(self):
        J = 6
        for mp in range(-J, J + 1):
            assert float(wigner_d_pi2_exact(J, mp, 0)) == pytest.approx(wigner_d_pi2(J, mp), rel=1e-14, abs=1e-300)
        full = expm(-1j * math.pi / 2 * collective_matrices(J)["Jy"]).real
        for mp in range(-J, J + 1):
            for m in range(-J, J + 1):
                assert float(wigner_d_pi2_exact(J, mp, m)) == pytest.approx(full[mp + J, m + J], abs=1e-13)

    def test_half_integer(self):
        full = expm(-1j * math.pi / 2 * collective_matrices(1.5)["Jy"]).real
        assert float(wigner_d_pi2_exact(1.5, 0.5, -1.5)) == pytest.approx(full[2, 0], abs=1e-14)


class TestClebschGordan:
    def test_examples(self):
        assert cg_stretched(0.5, 0.5, 0.5, -0.5) == pytest.approx(1 / math.sqrt(2))
        assert cg_stretched(2.5, 1, 2.5, 1) == pytest.approx(1.0)
        assert cg_stretched(1, 1, 1, -1) == pytest.approx(math.sqrt(1 / 6))

    def test_exact_fractions(self):
        for j1, j2, m1, m2 in [(1, 2, 0, 1), (1.5, 0.5, -0.5, 0.5), (3, 3, 2, -3)]:
            t1, t2 = int(2 * j1), int(2 * j2)
            k1, k2 = int(j1 + m1), int(j2 + m2)
            sq = Fraction(math.comb(t1, k1) * math.comb(t2, k2), math.comb(t1 + t2, k1 + k2))
            assert cg_stretched(j1, j2, m1, m2) ** 2 == pytest.approx(float(sq), rel=1e-14)

    def test_columns_normalised(self):
        for t1 in range(0, 21):
            for t2 in range(0, 21 - t1):
                grid = np.exp(2 * log_cg_stretched_grid(Spin(t1), Spin(t2)))
                k = np.add.outer(np.arange(t1 + 1), np.arange(t2 + 1))
                sums = np.bincount(k.ravel(), weights=grid.ravel())
                assert np.abs(sums - 1.0).max() < 1e-12

    def test_grid_matches_scalar(self):
        grid = log_cg_stretched_grid(1.5, 2)
        assert grid[1, 4] == pytest.approx(math.log(cg_stretched(1.5, 2, -0.5, 2)))

    def test_bad_projection(self):
        with pytest.raises(ValueError):
            cg_stretched(1, 1, 2, 0)


class TestImaginaryAngle:
    def test_identity_at_zero(self):
        assert float(wigner_d_imag(3, 0, 0.0)) == 1.0
        assert wigner_d_imag(3, 2, 0.0).sign == 0

    @pytest.mark.parametrize("J,mp,gamma", [(1, 0, 0.3), (2, 1, 0.5), (6, -4, 1.7), (10, 7, 0.05)])
    def test_matrix_oracle_with_phase(self, J, mp, gamma):
        jy = collective_matrices(J)["Jy"]
        ref = expm(-gamma * jy)[mp + J, J]
        ours = (1j) ** (mp % 4) * float(wigner_d_imag(J, mp, gamma))
        assert abs(ours - ref) < 1e-12 * max(1.0, abs(ref))

    def test_unit_norm_column_of_nonunitary_rotation(self):
        # e^{-gamma Jy} is Hermitian positive, so its J-th column has norm^2 = <0|e^{-2 gamma Jy}|0> = P_J(cosh 2 gamma)
        J, gamma = 40, 0.8
        logs = log_d_imag_column(J, gamma)
        lhs = np.log(np.sum(np.exp(2 * (logs - logs.max())))) + 2 * logs.max()
        assert lhs == pytest.approx(legendre_log(J, math.cosh(2 * gamma)).log_mag, rel=1e-12)

    def test_rejects_negative(self):
        with pytest.raises(ValueError):
            wigner_d_imag(2, 0, -0.1)


class TestJacobiPolynomial:
    @pytest.mark.parametrize("n,a,b,x", [(0, 1, 2, 0.3), (1, 0.5, 1.5, -0.2), (7, 2, 3, 1.4), (9, 0, 0, 2.2)])
    def test_against_mpmath(self, n, a, b, x):
        assert jacobi_polynomial(n, a, b, x) == pytest.approx(float(mpmath.jacobi(n, a, b, x)), rel=1e-12)

    def test_negative_parameters_reduce_to_legendre_sum(self):
        # P_J^(0,0) is the Legendre polynomial
        assert jacobi_polynomial(12, 0, 0, 1.7) == pytest.approx(math.exp(legendre_log(12, 1.7).log_mag), rel=1e-12)
        assert jacobi_polynomial(4, -2, 2, 0.0) == pytest.approx(-10.0 / 16.0, rel=1e-13)
