"""Exact diagonalisation of the LMG Hamiltonian in one spin-J sector.

    H = alpha J_z + beta J_x^2 + J_y^2 - 2 mu J_y

For beta = alpha**2 it factorises as
(alpha J_x + i J_y - i mu)(alpha J_x - i J_y + i mu) - mu**2, and for mu = 0 the
spectrum is supersymmetric: a nondegenerate zero-energy ground state and
pairwise degenerate excited levels.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .jacobi import DEFAULT_MAX_SWEEPS, DEFAULT_TOL, jacobi_eigh
from .specfun import Spin
from .state import CouplingParams, build_susy_state, ladder_coefficients

MAX_BUILD_DIM = 4001
MAX_DENSE_DIM = 2001
HERMITIAN_TOL = 1e-14


class DimensionError(ValueError):
    pass


@dataclass(frozen=True)
class SpectrumReport:
    eigenvalues: np.ndarray
    ground_energy: float
    gap: float
    pairing_deviations: np.ndarray
    ground_overlap: float
    h_max: float

    @property
    def max_pairing_deviation(self) -> float:
        return float(self.pairing_deviations.max()) if self.pairing_deviations.size else 0.0


def collective_matrices(J) -> dict[str, np.ndarray]:
    """Dense Jx, Jy, Jz, J+, J- on the z-basis m = -J..J."""
    spin = Spin.of(J)
    a = ladder_coefficients(spin)[:-1]
    jp = np.diag(a, -1).astype(np.complex128)
    jm = jp.T.copy()
    return {
        "J+": jp,
        "J-": jm,
        "Jx": 0.5 * (jp + jm),
        "Jy": -0.5j * (jp - jm),
        "Jz": np.diag(spin.projections() / 2.0).astype(np.complex128),
    }


def build_lmg(J, alpha: float, beta: float, mu: float, max_dim: int = MAX_BUILD_DIM) -> np.ndarray:
    """Pentadiagonal LMG matrix assembled from the ladder matrix elements."""
    spin = Spin.of(J)
    if spin.dim > max_dim:
        raise DimensionError(f"dimension {spin.dim} exceeds the limit {max_dim}")
    n = spin.dim
    m = spin.projections() / 2.0
    jj = spin.two_j * (spin.two_j + 2) / 4.0
    a = ladder_coefficients(spin)  # <m+1|J+|m>

    h = np.zeros((n, n), dtype=np.complex128)
    # J_x^2 + J_y^2 weights on the diagonal: (J+J- + J-J+)/4 = (J(J+1) - m^2)/2
    h[np.arange(n), np.arange(n)] = alpha * m + 0.5 * (beta + 1.0) * (jj - m * m)
    # <m+2|J_x^2|m> = a_m a_{m+1}/4, <m+2|J_y^2|m> = -a_m a_{m+1}/4
    two_step = 0.25 * (beta - 1.0) * a[:-2] * a[1:-1]
    idx = np.arange(n - 2)
    h[idx + 2, idx] = two_step
    h[idx, idx + 2] = two_step
    # -2 mu <m+1|J_y|m> = -2 mu a_m / 2i = i mu a_m
    if mu:
        idx = np.arange(n - 1)
        h[idx + 1, idx] = 1j * mu * a[:-1]
        h[idx, idx + 1] = -1j * mu * a[:-1]
    return h


def is_hermitian(h: np.ndarray, tol: float = HERMITIAN_TOL) -> bool:
    return bool(np.abs(h - h.conj().T).max(initial=0.0) <= tol)


def factorization_residual(J, alpha: float, mu: float, beta: float | None = None) -> float:
    """Max entry-wise |H_lmg - H_product|; ``beta`` defaults to alpha**2."""
    if beta is None:
        beta = alpha * alpha
    ops = collective_matrices(J)
    eye = np.eye(ops["Jz"].shape[0])
    left = alpha * ops["Jx"] + 1j * ops["Jy"] - 1j * mu * eye
    right = alpha * ops["Jx"] - 1j * ops["Jy"] + 1j * mu * eye
    product = left @ right - mu * mu * eye
    return float(np.abs(build_lmg(J, alpha, beta, mu) - product).max())


def diagonalize(
    h: np.ndarray,
    max_dim: int = MAX_DENSE_DIM,
    tol: float = DEFAULT_TOL,
    max_sweeps: int = DEFAULT_MAX_SWEEPS,
) -> tuple[np.ndarray, np.ndarray]:
    """Ascending eigenvalues and eigenvectors (columns) via cyclic Jacobi."""
    if h.shape[0] > max_dim:
        raise DimensionError(f"dense solve limited to dimension {max_dim}, got {h.shape[0]}")
    return jacobi_eigh(h, tol=tol, max_sweeps=max_sweeps)


def pairing_deviations(eigenvalues: np.ndarray) -> np.ndarray:
    """|E_2k - E_2k-1| for the excited levels paired as (1,2), (3,4), ..."""
    excited = np.asarray(eigenvalues)[1:]
    n = excited.size - excited.size % 2
    return np.abs(excited[1:n:2] - excited[0:n:2])


def ground_state_report(J, params: CouplingParams) -> SpectrumReport:
    """Spectrum of H(alpha, alpha**2, mu) against the analytic ground state.

    For level index m the coupling is mu = m / cosh(gamma) and the analytic
    ground energy is -mu**2; the SUSY case m = 0 has E_0 = 0.
    """
    spin = Spin.of(J)
    h = build_lmg(spin, params.alpha, params.beta, params.mu)
    w, v = diagonalize(h)
    psi = build_susy_state(spin, params)
    return SpectrumReport(
        eigenvalues=w,
        ground_energy=float(w[0]),
        gap=float(w[1] - w[0]) if w.size > 1 else np.inf,
        pairing_deviations=pairing_deviations(w),
        ground_overlap=float(abs(np.vdot(v[:, 0], psi.coeffs))),
        h_max=float(np.abs(h).max()),
    )


def susy_report(J, gamma: float) -> SpectrumReport:
    spin = Spin.of(J)
    if not spin.is_integer:
        raise ValueError("the m = 0 sector needs integer J")
    return ground_state_report(spin, CouplingParams(gamma))
