"""Bipartite and geometric entanglement of the SUSY ground state.

The block decomposition couples J = J1 + J2 in the stretched channel, so the
amplitude matrix of the state splits into a Clebsch-Gordan factor and one
column of a rotation matrix. Entropies are in bits throughout.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from typing import NamedTuple, Sequence

import numpy as np

from .jacobi import DEFAULT_MAX_SWEEPS, DEFAULT_TOL, jacobi_eigh, jacobi_svd
from .specfun import (
    Spin,
    jacobi_polynomial,
    legendre_log,
    log_binomial,
    log_binomials,
    log_cg_stretched_grid,
    log_factorial,
)
from .state import CouplingParams, build_susy_state, rotated_log_amplitudes, susy_log_weights

SUM_RULE_TOL = 1e-10
RANK_TOL = 1e-12
GRAM_CLIP = 1e-28
UNDERFLOW_LOG = -745.0
GAUSSIAN_CONST = 0.5 * (1.0 + math.log2(math.pi * math.e))
PRINTED_GAMMA0_CONST = GAUSSIAN_CONST
REDERIVED_GAMMA0_CONST = 0.5 * math.log2(math.pi * math.e)
OVERLAP_STAGNATION_TOL = 1e-6


class ParityError(ValueError):
    """Raised when J1 + J2 is half-integer (odd number of spins)."""


class OptimizationError(RuntimeError):
    pass


class OrderingPolicy(Enum):
    NATURAL_BY_M = "natural"
    CENTER_PEAKED = "center"


@dataclass(frozen=True)
class BipartiteAmplitudeMatrix:
    """A[m1, m2] for |Psi> = sum A |J1 m1> |J2 m2>, rows and columns ascending in m."""

    j1: Spin
    j2: Spin
    gamma: float
    entries: np.ndarray

    def __post_init__(self):
        entries = np.array(self.entries)
        if entries.shape != (self.j1.dim, self.j2.dim):
            raise ValueError(f"expected shape {(self.j1.dim, self.j2.dim)}, got {entries.shape}")
        norm_sq = float(np.sum(np.abs(entries) ** 2))
        if abs(norm_sq - 1.0) > SUM_RULE_TOL:
            raise ArithmeticError(f"amplitude matrix not normalised: sum |A|^2 = {norm_sq!r}")
        entries.setflags(write=False)
        object.__setattr__(self, "entries", entries)

    @property
    def spin(self) -> Spin:
        return Spin(self.j1.two_j + self.j2.two_j)


@dataclass(frozen=True)
class SchmidtSpectrum:
    """Schmidt coefficients in nonincreasing order.

    ``m_labels`` holds <m1> of each left Schmidt vector when available; at
    gamma = 0 these are the exact CG labels.
    """

    lambdas: np.ndarray
    rank_tol: float = RANK_TOL
    m_labels: np.ndarray | None = field(default=None, compare=False)

    def __post_init__(self):
        lam = np.asarray(self.lambdas, dtype=float)
        if lam.ndim != 1 or lam.size == 0:
            raise ValueError("need a nonempty 1-D sequence of coefficients")
        if np.any(lam < 0) or np.any(np.diff(lam) > 0):
            raise ValueError("Schmidt coefficients must be nonnegative and nonincreasing")
        lam = lam.copy()
        lam.setflags(write=False)
        object.__setattr__(self, "lambdas", lam)

    @property
    def probabilities(self) -> np.ndarray:
        return self.lambdas**2

    @property
    def rank(self) -> int:
        return int(np.count_nonzero(self.lambdas >= self.rank_tol * self.lambdas[0]))

    @property
    def sum_rule_deviation(self) -> float:
        return abs(math.fsum(self.probabilities) - 1.0)


@dataclass(frozen=True)
class EntanglementResult:
    entropy_bits: float
    schmidt_rank: int
    rank_bound_bits: float
    gaussian_estimate_bits: float
    ordering_variance: float


class GaussianEstimate(NamedTuple):
    bits: float
    variance: float
    degenerate: bool


class Gamma0Asymptotic(NamedTuple):
    printed: float
    rederived: float


def _split(J1, J2) -> tuple[Spin, Spin, Spin]:
    s1, s2 = Spin.of(J1), Spin.of(J2)
    total = Spin(s1.two_j + s2.two_j)
    if not total.is_integer:
        raise ParityError(f"J1 + J2 = {total} needs an even number of spins")
    return s1, s2, total


def _from_log_grid(log_a: np.ndarray, sign: np.ndarray | float = 1.0) -> np.ndarray:
    top = np.max(log_a)
    shifted = log_a - top
    keep = (shifted > UNDERFLOW_LOG) & np.isfinite(log_a)
    mag = np.where(keep, np.exp(np.where(keep, shifted, 0.0)), 0.0)
    a = sign * mag
    return a / np.linalg.norm(a)


def _sum_index(s1: Spin, s2: Spin) -> np.ndarray:
    # position of m1 + m2 in the ascending list of total projections
    return np.add.outer(np.arange(s1.dim), np.arange(s2.dim))


def amplitude_matrix(J1, J2, gamma: float) -> BipartiteAmplitudeMatrix:
    """Nonnegative amplitude matrix of the SUSY state, built in the log domain.

    Quantisation axes are taken along y on both blocks. The collective
    rotation involved is a product of identical single-spin rotations, so
    the Schmidt spectrum is untouched, while the state becomes
    exp(-gamma J_x)|m_z = 0> and every entry is real and nonnegative:

        A[m1, m2] ~ C(J1 m1, J2 m2 | J m1+m2) |d^J_{m1+m2, 0}(-i gamma)|

    At gamma = 0 only the anti-diagonal m1 + m2 = 0 survives and it is
    exactly the stretched Clebsch-Gordan column.
    """
    if not gamma >= 0:
        raise ValueError(f"gamma must be >= 0, got {gamma}")
    s1, s2, total = _split(J1, J2)
    log_phi = rotated_log_amplitudes(total, gamma)
    log_a = log_cg_stretched_grid(s1, s2) + log_phi[_sum_index(s1, s2)]
    return BipartiteAmplitudeMatrix(s1, s2, float(gamma), _from_log_grid(log_a))


def amplitude_matrix_lab(J1, J2, gamma: float) -> BipartiteAmplitudeMatrix:
    """Amplitude matrix in the original z-basis: CG times exp(-gamma J_z)|m_y = 0>."""
    s1, s2, total = _split(J1, J2)
    logs, phase = susy_log_weights(total, CouplingParams(float(gamma)))
    idx = _sum_index(s1, s2)
    log_a = log_cg_stretched_grid(s1, s2) + logs[idx]
    # drop the global phase (+-i for odd J) so the amplitudes are real
    ref = phase[np.flatnonzero(phase)[-1]]
    sign = np.sign((phase / ref).real)[idx]
    return BipartiteAmplitudeMatrix(s1, s2, float(gamma), _from_log_grid(log_a, sign))


def amplitude_matrix_jacobi(J1, J2, gamma: float) -> BipartiteAmplitudeMatrix:
    """Complex amplitudes from the closed Jacobi-polynomial form.

        A ~ i^(m1+m2) sqrt((J!)^2 (2J1)! (2J2)! / ((2J)! prod (Ji +- mi)!))
              coth(gamma/2)^(m1+m2) P_J^(-m, m)(cosh gamma),   m = m1 + m2

    Plain floating point with a degree recurrence; meant for modest J as an
    independent check. Requires gamma > 0.
    """
    if not gamma > 0:
        raise ValueError("the Jacobi form is singular at gamma = 0")
    s1, s2, total = _split(J1, J2)
    J = total.two_j // 2
    x = math.cosh(gamma)
    log_coth = math.log(1.0 / math.tanh(gamma / 2.0))
    k1, k2 = np.arange(s1.dim), np.arange(s2.dim)
    log_fact1 = log_factorial(s1.two_j) - np.array([log_factorial(k) + log_factorial(s1.two_j - k) for k in k1])
    log_fact2 = log_factorial(s2.two_j) - np.array([log_factorial(k) + log_factorial(s2.two_j - k) for k in k2])
    pref = 2 * log_factorial(J) - log_factorial(2 * J)

    # log|coth^m P_J^(-m, m)| and its sign; for m > 0 the reflection
    # C(J, m) P_J^(-m, m)(x) = C(J + m, m) ((x - 1)/2)^m P_(J-m)^(m, m)(x)
    # avoids cancellation
    log_sinh_half = math.log(math.sinh(gamma / 2.0))
    radial = {}
    for m in range(-J, J + 1):
        if m > 0:
            p = jacobi_polynomial(J - m, m, m, x)
            log_extra = 2 * m * log_sinh_half + log_binomial(J + m, m).log_mag - log_binomial(J, m).log_mag
        else:
            p = jacobi_polynomial(J, -m, m, x)
            log_extra = 0.0
        radial[m] = (math.copysign(1.0, p), m * log_coth + log_extra + math.log(abs(p)) if p else -math.inf)
    a = np.zeros((s1.dim, s2.dim), dtype=np.complex128)
    for i in k1:
        for j in k2:
            m = int(i + j) - J
            sign, log_r = radial[m]
            if log_r == -math.inf:
                continue
            log_mag = 0.5 * (pref + log_fact1[i] + log_fact2[j]) + log_r
            a[i, j] = (1j) ** (m % 4) * sign * math.exp(log_mag)
    a /= np.linalg.norm(a)
    return BipartiteAmplitudeMatrix(s1, s2, float(gamma), a)


def schmidt(
    A: BipartiteAmplitudeMatrix | np.ndarray,
    rank_tol: float = RANK_TOL,
    tol: float = DEFAULT_TOL,
    max_sweeps: int = DEFAULT_MAX_SWEEPS,
    method: str = "svd",
) -> SchmidtSpectrum:
    """Schmidt coefficients of an amplitude matrix.

    ``method="svd"`` rotates the rows of A directly (one-sided Jacobi), so
    every coefficient is good to about 1e-16 absolute.  ``method="gram"``
    takes square roots of the eigenvalues of the smaller Gram matrix;
    coefficients below about 1e-8 are then dominated by rounding.

    Raises ``ConvergenceError`` from the rotations and ``ArithmeticError``
    if the squared coefficients miss the unit sum by more than 1e-10.
    """
    a = A.entries if isinstance(A, BipartiteAmplitudeMatrix) else np.asarray(A)
    rows, cols = a.shape
    if method == "svd":
        lam, u = jacobi_svd(a, tol=tol, max_sweeps=max_sweeps)
    elif method == "gram":
        lam, u = _gram_route(a, tol, max_sweeps)
    else:
        raise ValueError(f"unknown method {method!r}")
    labels = _m_labels(lam, u, np.arange(rows) - (rows - 1) / 2.0)
    spectrum = SchmidtSpectrum(lam, rank_tol=rank_tol, m_labels=labels)
    if spectrum.sum_rule_deviation > SUM_RULE_TOL:
        raise ArithmeticError(f"Schmidt sum rule violated by {spectrum.sum_rule_deviation:.3e}")
    return spectrum


def _m_labels(lam: np.ndarray, u: np.ndarray, m1: np.ndarray, rel_gap: float = 1e-9) -> np.ndarray:
    # inside a degenerate cluster any rotation of u is a valid Schmidt basis;
    # pick the one that diagonalises J_z of the first block
    labels = m1 @ np.abs(u) ** 2
    start = 0
    while start < lam.size:
        stop = start + 1
        while stop < lam.size and lam[start] - lam[stop] <= rel_gap * lam[start]:
            stop += 1
        if stop - start > 1 and lam[start] > 0:
            block = u[:, start:stop]
            labels[start:stop] = jacobi_eigh((block.conj().T * m1) @ block)[0]
        start = stop
    return labels


def _gram_route(a: np.ndarray, tol: float, max_sweeps: int) -> tuple[np.ndarray, np.ndarray]:
    rows, cols = a.shape
    left_gram = rows <= cols
    gram = a @ a.conj().T if left_gram else a.conj().T @ a
    w, v = jacobi_eigh(gram, tol=tol, max_sweeps=max_sweeps)
    w = np.where(w < GRAM_CLIP, 0.0, w)
    order = np.argsort(-w, kind="stable")
    w, v = w[order], v[:, order]
    lam = np.sqrt(w)
    if left_gram:
        return lam, v
    with np.errstate(divide="ignore", invalid="ignore"):
        u = np.where(lam > 0, (a @ v) / np.where(lam > 0, lam, 1.0), 0.0)
    return lam, u


def entropy_bits(s: SchmidtSpectrum | Sequence[float]) -> float:
    lam = s.lambdas if isinstance(s, SchmidtSpectrum) else np.asarray(s, dtype=float)
    p = lam**2
    p = p[p > 0]
    return float(max(0.0, -math.fsum(p * np.log2(p))))


def bits_to_nats(bits: float) -> float:
    return bits * math.log(2.0)


def induced_distribution(
    s: SchmidtSpectrum, ordering: OrderingPolicy = OrderingPolicy.CENTER_PEAKED
) -> tuple[np.ndarray, np.ndarray]:
    """Positions and weights lambda^2, sorted by position."""
    p = s.probabilities
    if ordering is OrderingPolicy.NATURAL_BY_M:
        if s.m_labels is None:
            raise ValueError("natural ordering needs m labels on the spectrum")
        x = np.rint(np.asarray(s.m_labels, dtype=float) * 2.0) / 2.0
    elif ordering is OrderingPolicy.CENTER_PEAKED:
        # largest at 0, then +1, -1, +2, -2, ...
        k = np.arange(p.size)
        x = np.where(k % 2 == 1, (k + 1) // 2, -(k // 2)).astype(float)
    else:
        raise ValueError(f"unknown ordering {ordering!r}")
    order = np.argsort(x, kind="stable")
    return x[order], p[order]


def is_unimodal(weights: np.ndarray, slack: float = 0.0) -> bool:
    d = np.diff(np.asarray(weights, dtype=float))
    rising = d > slack
    falling = d < -slack
    if not falling.any():
        return True
    first_fall = int(np.argmax(falling))
    return not rising[first_fall:].any()


def gaussian_estimate(
    s: SchmidtSpectrum,
    ordering: OrderingPolicy = OrderingPolicy.CENTER_PEAKED,
    continuity_correction: bool = False,
) -> GaussianEstimate:
    """Continuum Gaussian entropy ½(1 + log2(pi e)) + log2(dx) of the ordered weights.

    dx is the standard deviation of the positions under weights lambda^2.
    ``continuity_correction`` adds the lattice term 1/12 to dx^2, which turns
    the estimate into a strict upper bound on the discrete entropy. A single
    coefficient gives dx = 0; the estimate is then floored at 0 and flagged.
    """
    x, p = induced_distribution(s, ordering)
    mean = math.fsum(x * p)
    var = math.fsum((x - mean) ** 2 * p)
    if continuity_correction:
        var += 1.0 / 12.0
    if var <= 0.0:
        return GaussianEstimate(0.0, 0.0, True)
    return GaussianEstimate(GAUSSIAN_CONST + 0.5 * math.log2(var), var, False)


def entropy_gamma0_asymptotic(J1) -> Gamma0Asymptotic:
    """Small-block entropy at gamma = 0 with the two competing constants."""
    j1 = float(Spin.of(J1).value)
    half_log = 0.5 * math.log2(j1)
    return Gamma0Asymptotic(half_log + PRINTED_GAMMA0_CONST, half_log + REDERIVED_GAMMA0_CONST)


def analyze(
    J1, J2, gamma: float, ordering: OrderingPolicy = OrderingPolicy.CENTER_PEAKED
) -> EntanglementResult:
    spectrum = schmidt(amplitude_matrix(J1, J2, gamma))
    est = gaussian_estimate(spectrum, ordering)
    return EntanglementResult(
        entropy_bits=entropy_bits(spectrum),
        schmidt_rank=spectrum.rank,
        rank_bound_bits=math.log2(spectrum.rank),
        gaussian_estimate_bits=est.bits,
        ordering_variance=est.variance,
    )


def entropy_curve(
    J, gamma: float, J1_list, check_symmetry: bool = False, threads: int = 1
) -> list[tuple[float, float]]:
    """(J1, S) for every block spin in ``J1_list``, in input order.

    With ``check_symmetry`` each point is recomputed at J - J1 and a mismatch
    beyond 1e-9 raises ``ArithmeticError``.
    """
    total = Spin.of(J)
    blocks = [Spin.of(j1) for j1 in J1_list]
    for b in blocks:
        if b.two_j > total.two_j:
            raise ValueError(f"J1 = {b} exceeds J = {total}")

    def point(b: Spin) -> tuple[float, float]:
        rest = Spin(total.two_j - b.two_j)
        s = entropy_bits(schmidt(amplitude_matrix(b, rest, gamma)))
        if check_symmetry:
            s_mirror = entropy_bits(schmidt(amplitude_matrix(rest, b, gamma)))
            if abs(s - s_mirror) > 1e-9:
                raise ArithmeticError(f"S(J1) != S(J - J1) at J1 = {b}: {s} vs {s_mirror}")
        return float(b.value), s

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(point, blocks))
    return [point(b) for b in blocks]


def log_slope_fit(J1s, entropies) -> tuple[float, float]:
    """Least-squares (slope, intercept) of S against log2 J1."""
    slope, intercept = np.polyfit(np.log2(np.asarray(J1s, dtype=float)), np.asarray(entropies, dtype=float), 1)
    return float(slope), float(intercept)


def scaling_prefactor(J, gamma: float, J1_list) -> tuple[float, float]:
    """Fitted (f, c) in S ~ f log2(J1/J) + c over the given blocks."""
    pts = entropy_curve(J, gamma, J1_list)
    total = float(Spin.of(J).value)
    x = np.log2(np.array([p[0] for p in pts]) / total)
    slope, intercept = np.polyfit(x, np.array([p[1] for p in pts]), 1)
    return float(slope), float(intercept)


def tail_r_squared(s: SchmidtSpectrum, first: int = 2, last: int = 20) -> float:
    """R^2 of a straight-line fit of ln(lambda) against rank over ranks first..last (1-based)."""
    stop = min(last, s.rank)
    lam = s.lambdas[first - 1 : stop]
    if lam.size < 3:
        raise ValueError("need at least three tail coefficients")
    k = np.arange(first, first + lam.size, dtype=float)
    y = np.log(lam)
    coef = np.polyfit(k, y, 1)
    resid = y - np.polyval(coef, k)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    return 1.0 - float(np.sum(resid**2)) / ss_tot if ss_tot > 0 else 1.0


def monotonicity_violations(J, J1_list, gammas, slack: float = 1e-9) -> list[tuple[float, float, float, float]]:
    """(J1, gamma_lo, gamma_hi, increase) wherever S grows with gamma beyond ``slack``."""
    gammas = sorted(gammas)
    curves = [entropy_curve(J, g, J1_list) for g in gammas]
    found = []
    for i, j1 in enumerate(J1_list):
        for g0, g1, c0, c1 in zip(gammas, gammas[1:], curves, curves[1:]):
            rise = c1[i][1] - c0[i][1]
            if rise > slack:
                found.append((float(Spin.of(j1).value), g0, g1, rise))
    return found


# -- geometric entanglement ---------------------------------------------------


def _integer_spin(J) -> Spin:
    spin = Spin.of(J)
    if not spin.is_integer:
        raise ParityError("the m = 0 SUSY state needs integer J")
    return spin


def log_lambda_max(J, gamma: float) -> float:
    """ln of the maximal product-state overlap."""
    spin = _integer_spin(J)
    if not gamma >= 0:
        raise ValueError(f"gamma must be >= 0, got {gamma}")
    n = spin.two_j // 2
    log_p = legendre_log(spin, math.cosh(2.0 * gamma)).log_mag
    value = 0.5 * log_factorial(2 * n) - n * math.log(2.0) - log_factorial(n) + gamma * n - 0.5 * log_p
    return min(value, 0.0)


def lambda_max(J, gamma: float) -> float:
    return math.exp(log_lambda_max(J, gamma))


def geometric_entanglement(J, gamma: float) -> float:
    """E_G = -2 log2 Lambda_max."""
    return -2.0 * log_lambda_max(J, gamma) / math.log(2.0)


def geometric_entanglement_asymptotic(J, gamma: float) -> float:
    """Large-J limit: -½ log2(1 - e^(-4 gamma)), or ½ log2(pi J) at gamma = 0."""
    spin = _integer_spin(J)
    if gamma == 0:
        return 0.5 * math.log2(math.pi * float(spin.value))
    return -0.5 * math.log2(-math.expm1(-4.0 * gamma))


class OverlapOptimum(NamedTuple):
    alpha: float
    beta: float
    xi: float
    overlap: float


def _coherent_overlap(J: int, psi: np.ndarray, alpha: float, beta: float) -> float:
    """|<phi|Psi>| for phi = e^{-i alpha Jz} e^{-i beta Jy} |m_z = -J>.

    <m'|phi> = sqrt(C(2J, J+m')) (-sin(beta/2))^(J+m') cos(beta/2)^(J-m') e^{-i alpha m'}
    """
    k = np.arange(2 * J + 1)  # J + m'
    sb, cb = -math.sin(beta / 2.0), math.cos(beta / 2.0)
    with np.errstate(divide="ignore"):
        log_s, log_c = math.log(abs(sb)) if sb else -np.inf, math.log(abs(cb)) if cb else -np.inf
    # 0 * log(0) counts as 0 here
    up, down = np.zeros(k.size), np.zeros(k.size)
    up[k > 0] = k[k > 0] * log_s
    down[k < 2 * J] = (2 * J - k[k < 2 * J]) * log_c
    log_mag = 0.5 * log_binomials(2 * J, k) + up + down
    sign = np.where((k % 2 == 1) & (sb < 0), -1.0, 1.0) * np.where(((2 * J - k) % 2 == 1) & (cb < 0), -1.0, 1.0)
    finite = np.isfinite(log_mag)
    mag = np.where(finite, np.exp(np.where(finite, log_mag, 0.0)), 0.0)
    phi = sign * mag * np.exp(-1j * alpha * (k - J))
    return float(abs(np.vdot(phi, psi)))


def maximize_overlap(J, gamma: float, grid: int = 24) -> OverlapOptimum:
    """Maximise |<phi|Psi>| over rotated product states by grid search and Nelder-Mead.

    The third Euler angle only changes a global phase and is returned as 0.
    Ties with the unrotated state |m_z = -J> (beta = 0) are resolved in its
    favour. Raises ``OptimizationError`` if the optimum falls short of the
    analytic value by more than 1e-6.
    """
    from scipy.optimize import minimize

    spin = _integer_spin(J)
    n = spin.two_j // 2
    psi = build_susy_state(spin, CouplingParams(float(gamma))).coeffs

    def neg(x):
        return -_coherent_overlap(n, psi, x[0], x[1])

    alphas = np.linspace(0.0, 2.0 * np.pi, grid, endpoint=False)
    betas = np.linspace(0.0, np.pi, grid + 1)
    scores = np.array([[-neg((a, b)) for b in betas] for a in alphas])
    starts = np.argsort(scores, axis=None)[::-1][:4]
    best = (0.0, 0.0, _coherent_overlap(n, psi, 0.0, 0.0))
    for flat in starts:
        ia, ib = np.unravel_index(flat, scores.shape)
        res = minimize(
            neg,
            x0=(alphas[ia], betas[ib]),
            method="Nelder-Mead",
            options={"xatol": 1e-10, "fatol": 1e-15, "maxiter": 4000},
        )
        if -res.fun > best[2] + 1e-12:
            best = (float(res.x[0]), float(res.x[1]), float(-res.fun))

    alpha, beta, value = best
    alpha = math.remainder(alpha, 2.0 * math.pi)
    beta = math.remainder(beta, 4.0 * math.pi)
    analytic = lambda_max(spin, gamma)
    if value < analytic - OVERLAP_STAGNATION_TOL:
        raise OptimizationError(f"overlap search stalled at {value!r} below the analytic {analytic!r}")
    return OverlapOptimum(alpha, beta, 0.0, value)
