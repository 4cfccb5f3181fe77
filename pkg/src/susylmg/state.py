"""Collective-spin states in the Dicke sector and the analytic SUSY ground state.

Amplitude vectors are indexed by m = -J..J in ascending order. Operators use
J_y = (J+ - J-)/2i, so the J_y eigenstate |m_y = 0> has real nonnegative
z-basis components.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .specfun import (
    MagneticIndex,
    Spin,
    doubled,
    legendre_log,
    log_d_imag_column,
    log_d_pi2_column,
    wigner_d_pi2_exact,
)

NORM_TOL = 1e-12
LEGENDRE_CHECK_RTOL = 1e-9


@dataclass(frozen=True)
class CouplingParams:
    """Couplings of the factorisable LMG Hamiltonian.

    ``alpha = tanh(gamma)`` and ``beta = alpha**2``. ``m`` is the level index
    of the seed state |m_y = m>; the Hamiltonian coupling that annihilates
    exp(-gamma J_z)|m_y = m> is ``mu = m / cosh(gamma)``, which equals m only
    for m = 0 or gamma = 0.
    """

    gamma: float
    m: float = 0.0
    alpha: float = field(init=False)
    beta: float = field(init=False)

    def __post_init__(self):
        if not self.gamma >= 0:
            raise ValueError(f"gamma must be >= 0, got {self.gamma}")
        doubled(self.m, allow_negative=True)
        alpha = math.tanh(self.gamma)
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "beta", alpha * alpha)

    @classmethod
    def from_gamma(cls, gamma: float, m: float = 0.0) -> "CouplingParams":
        return cls(float(gamma), m)

    @property
    def mu(self) -> float:
        return self.m / math.cosh(self.gamma)


@dataclass(frozen=True)
class AmplitudeVector:
    """Normalised state of one spin-J sector in the collective z-basis."""

    spin: Spin
    coeffs: np.ndarray

    def __post_init__(self):
        coeffs = np.array(self.coeffs, dtype=np.complex128)
        if coeffs.shape != (self.spin.dim,):
            raise ValueError(f"expected {self.spin.dim} amplitudes, got shape {coeffs.shape}")
        norm = np.linalg.norm(coeffs)
        if abs(norm - 1.0) > NORM_TOL:
            raise ValueError(f"amplitudes are not normalised (norm {norm!r})")
        coeffs.setflags(write=False)
        object.__setattr__(self, "coeffs", coeffs)

    @property
    def two_m(self) -> np.ndarray:
        return self.spin.projections()

    def component(self, m) -> complex:
        two_m = doubled(m, allow_negative=True)
        MagneticIndex(two_m).check(self.spin)
        return complex(self.coeffs[(two_m + self.spin.two_j) // 2])

    def overlap(self, other: "AmplitudeVector") -> complex:
        return complex(np.vdot(self.coeffs, other.coeffs))


def _normalised_from_logs(log_mag: np.ndarray, phase: np.ndarray) -> tuple[np.ndarray, float]:
    """Max-shifted, normalised amplitudes and ln of the raw squared norm.

    The global phase makes the largest-m' nonvanishing component real
    positive; it is read off the unit phases, so a component that underflows
    after the shift still fixes the convention.
    """
    finite = np.isfinite(log_mag)
    top = log_mag[finite].max()
    ref = phase[np.flatnonzero(finite)[-1]]
    mag = np.zeros_like(log_mag)
    mag[finite] = np.exp(log_mag[finite] - top)
    norm = np.linalg.norm(mag)
    log_norm_sq = 2.0 * (top + math.log(norm))
    return (phase * np.conj(ref) / abs(ref)) * (mag / norm), log_norm_sq


def _my_eigenstate_logs(spin: Spin, two_m: int) -> tuple[np.ndarray, np.ndarray]:
    """Log-magnitudes and phases of |m_y = m> before the global phase fix.

    <m'|m_y = m> = exp(-i pi m'/2) d^J_{m',m}(pi/2).
    """
    two_mp = spin.projections()
    twist = np.exp(-0.25j * np.pi * two_mp)
    if two_m == 0:
        signs, logs = log_d_pi2_column(spin)
    else:
        vals = [wigner_d_pi2_exact(spin, MagneticIndex(t), MagneticIndex(two_m)) for t in two_mp]
        signs = np.array([v.sign for v in vals])
        logs = np.array([v.log_mag for v in vals])
    phase = np.where(signs == 0, 0.0, signs * twist)
    # exact zeros must stay exact zeros
    return logs, phase


def build_my_eigenstate(J, m=0) -> AmplitudeVector:
    """Eigenstate of J_y with eigenvalue m, in the z-basis.

    The global phase makes the largest-m' nonzero component real positive;
    for m = 0 all components are then real and nonnegative.
    """
    spin = Spin.of(J)
    two_m = doubled(m, allow_negative=True)
    MagneticIndex(two_m).check(spin)
    logs, phase = _my_eigenstate_logs(spin, two_m)
    coeffs, _ = _normalised_from_logs(logs, phase)
    if two_m == 0:
        coeffs = coeffs.real.astype(np.complex128)
    return AmplitudeVector(spin, coeffs)


def susy_log_weights(J, params: CouplingParams) -> tuple[np.ndarray, np.ndarray]:
    """Unnormalised log|c_m'| and phases of exp(-gamma J_z)|m_y = m>."""
    spin = Spin.of(J)
    two_m = doubled(params.m, allow_negative=True)
    MagneticIndex(two_m).check(spin)
    logs, phase = _my_eigenstate_logs(spin, two_m)
    logs = logs - params.gamma * spin.projections() / 2.0
    return logs, phase


def build_susy_state(J, params: CouplingParams, check_norm: bool = True) -> AmplitudeVector:
    """Analytic ground state N exp(-gamma J_z)|m_y = m> in the z-basis.

    For m = 0 the squared norm before normalisation must equal
    P_J(cosh 2 gamma); with ``check_norm`` a mismatch beyond 1e-9 relative
    raises ``ArithmeticError``.
    """
    spin = Spin.of(J)
    logs, phase = susy_log_weights(spin, params)
    coeffs, log_norm_sq = _normalised_from_logs(logs, phase)
    if params.m == 0:
        coeffs = coeffs.real.astype(np.complex128)
        x = math.cosh(2.0 * params.gamma)
        if check_norm and spin.is_integer and math.isfinite(x):
            expected = legendre_log(spin, x).log_mag
            if abs(math.expm1(log_norm_sq - expected)) > LEGENDRE_CHECK_RTOL:
                raise ArithmeticError(
                    f"norm identity violated at J={spin}, gamma={params.gamma}: "
                    f"ln norm^2 = {log_norm_sq}, ln P_J = {expected}"
                )
    return AmplitudeVector(spin, coeffs)


def rotated_log_amplitudes(J, gamma: float) -> np.ndarray:
    """ln|phi_m'| of the SUSY state seen with quantisation axis along y.

    The collective rotation taking y -> z and z -> x maps
    exp(-gamma J_z)|m_y = 0> onto exp(-gamma J_x)|m_z = 0>, whose components
    are |d^J_{m',0}(-i gamma)| up to the phases i^m'. Those phases factorise
    over any bipartition, so the nonnegative magnitudes carry every
    entanglement quantity. Unnormalised.
    """
    spin = Spin.of(J)
    if not spin.is_integer:
        raise ValueError("the m = 0 SUSY state needs an even number of spins")
    return log_d_imag_column(spin, gamma)


def build_rotated_susy_state(J, gamma: float) -> AmplitudeVector:
    spin = Spin.of(J)
    logs = rotated_log_amplitudes(spin, gamma)
    coeffs, _ = _normalised_from_logs(logs, np.ones_like(logs))
    return AmplitudeVector(spin, coeffs)


def ladder_coefficients(spin: Spin) -> np.ndarray:
    """sqrt(J(J+1) - m(m+1)) for m = -J..J (J+ matrix elements, m -> m+1)."""
    two_m = spin.projections()
    # 4[J(J+1) - m(m+1)] = (2J - 2m)(2J + 2m + 2)
    return 0.5 * np.sqrt((spin.two_j - two_m) * (spin.two_j + two_m + 2.0))


def apply_collective(op: str, v) -> np.ndarray:
    """Apply Jx, Jy, Jz, J+ or J- to an amplitude vector (no normalisation)."""
    if isinstance(v, AmplitudeVector):
        spin, c = v.spin, v.coeffs
    else:
        c = np.asarray(v, dtype=np.complex128)
        spin = Spin(c.size - 1)
    a = ladder_coefficients(spin)
    up = np.zeros_like(c)
    up[1:] = a[:-1] * c[:-1]
    down = np.zeros_like(c)
    down[:-1] = a[:-1] * c[1:]
    if op == "J+":
        return up
    if op == "J-":
        return down
    if op == "Jx":
        return 0.5 * (up + down)
    if op == "Jy":
        return -0.5j * (up - down)
    if op == "Jz":
        return 0.5 * spin.projections() * c
    raise ValueError(f"unknown collective operator {op!r}")


def annihilation_residual(v, params: CouplingParams) -> float:
    """|| (alpha J_x - i J_y + i mu) v ||."""
    c = v.coeffs if isinstance(v, AmplitudeVector) else np.asarray(v, dtype=np.complex128)
    r = params.alpha * apply_collective("Jx", c) - 1j * apply_collective("Jy", c) + 1j * params.mu * c
    return float(np.linalg.norm(r))
