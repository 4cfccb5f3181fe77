"""Angular-momentum special functions evaluated in the log domain.

Spins and magnetic quantum numbers are carried as doubled integers
(``two_j = 2J``, ``two_m = 2m``) so half-integers never touch floating point.
Public functions accept a :class:`Spin`, a :class:`MagneticIndex` or a plain
number (``1``, ``0.5``, ``Fraction(3, 2)``); see :func:`doubled`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from numbers import Real

import numpy as np

LOG_FACTORIAL_TABLE_SIZE = 2048
RESCALE_THRESHOLD = 2.0**500

# exp() of anything above this overflows a double
_MAX_LOG = math.log(np.finfo(float).max)
_MIN_LOG = math.log(np.finfo(float).tiny) - 52 * math.log(2.0)


@dataclass(frozen=True, order=True)
class Spin:
    """Angular momentum J stored as ``two_j = 2J``."""

    two_j: int

    def __post_init__(self):
        if not isinstance(self.two_j, (int, np.integer)) or self.two_j < 0:
            raise ValueError(f"two_j must be a nonnegative integer, got {self.two_j!r}")

    @classmethod
    def of(cls, value) -> "Spin":
        if isinstance(value, Spin):
            return value
        return cls(doubled(value))

    @property
    def dim(self) -> int:
        return self.two_j + 1

    @property
    def is_integer(self) -> bool:
        return self.two_j % 2 == 0

    @property
    def value(self) -> float:
        return self.two_j / 2

    def projections(self) -> np.ndarray:
        """Doubled projections ``2m`` for m = -J..J in ascending order."""
        return np.arange(-self.two_j, self.two_j + 1, 2)

    def __str__(self):
        return str(self.two_j // 2) if self.is_integer else f"{self.two_j}/2"


@dataclass(frozen=True)
class MagneticIndex:
    """Projection m stored as ``two_m = 2m``."""

    two_m: int

    @classmethod
    def of(cls, value) -> "MagneticIndex":
        if isinstance(value, MagneticIndex):
            return value
        return cls(doubled(value, allow_negative=True))

    def check(self, spin: Spin) -> None:
        if abs(self.two_m) > spin.two_j or (self.two_m - spin.two_j) % 2:
            raise ValueError(f"m = {self.two_m}/2 is not a projection of J = {spin}")

    @property
    def value(self) -> float:
        return self.two_m / 2


def doubled(value, allow_negative: bool = False) -> int:
    """Return ``2*value`` as an exact int; ``value`` must be a multiple of 1/2."""
    if isinstance(value, Spin):
        return value.two_j
    if isinstance(value, MagneticIndex):
        return value.two_m
    if isinstance(value, (bool, np.bool_)) or not isinstance(value, (Real, Fraction)):
        raise TypeError(f"expected a spin value, got {value!r}")
    twice = Fraction(value) * 2
    if twice.denominator != 1:
        raise ValueError(f"{value!r} is not a multiple of 1/2")
    result = int(twice)
    if result < 0 and not allow_negative:
        raise ValueError(f"{value!r} must be nonnegative")
    return result


@dataclass(frozen=True)
class LogNum:
    """Signed number stored as ``sign * exp(log_mag)``."""

    sign: int
    log_mag: float = -math.inf

    def __post_init__(self):
        if self.sign not in (-1, 0, 1):
            raise ValueError("sign must be -1, 0 or +1")
        if self.sign == 0:
            object.__setattr__(self, "log_mag", -math.inf)

    @classmethod
    def zero(cls) -> "LogNum":
        return cls(0)

    @classmethod
    def from_float(cls, x: float) -> "LogNum":
        if x == 0:
            return cls(0)
        return cls(1 if x > 0 else -1, math.log(abs(x)))

    def __mul__(self, other: "LogNum") -> "LogNum":
        if not isinstance(other, LogNum):
            return NotImplemented
        if self.sign == 0 or other.sign == 0:
            return LogNum(0)
        return LogNum(self.sign * other.sign, self.log_mag + other.log_mag)

    def __truediv__(self, other: "LogNum") -> "LogNum":
        if not isinstance(other, LogNum):
            return NotImplemented
        if other.sign == 0:
            raise ZeroDivisionError("LogNum division by zero")
        if self.sign == 0:
            return LogNum(0)
        return LogNum(self.sign * other.sign, self.log_mag - other.log_mag)

    def sqrt(self) -> "LogNum":
        if self.sign < 0:
            raise ValueError("square root of a negative LogNum")
        return LogNum(self.sign, 0.5 * self.log_mag)

    @property
    def representable(self) -> bool:
        return self.sign == 0 or _MIN_LOG <= self.log_mag <= _MAX_LOG

    def to_float(self) -> float:
        """Plain float; raises ``OverflowError`` outside the double range."""
        if self.sign == 0:
            return 0.0
        if not self.representable:
            raise OverflowError(f"exp({self.log_mag}) is outside the double range")
        return self.sign * math.exp(self.log_mag)

    __float__ = to_float


def _build_table(size: int) -> np.ndarray:
    table = np.array([math.lgamma(n + 1.0) for n in range(size)])
    table.setflags(write=False)
    return table


_LOG_FACTORIALS = _build_table(LOG_FACTORIAL_TABLE_SIZE)
_lgamma_ufunc = np.frompyfunc(math.lgamma, 1, 1)


def log_factorial(n: int) -> float:
    """ln(n!) for a nonnegative integer n."""
    if n < 0:
        raise ValueError("log_factorial needs n >= 0")
    if n < LOG_FACTORIAL_TABLE_SIZE:
        return float(_LOG_FACTORIALS[n])
    return math.lgamma(n + 1.0)


def log_factorials(n) -> np.ndarray:
    """Vectorised :func:`log_factorial`; entries must be nonnegative integers."""
    n = np.asarray(n, dtype=np.int64)
    if n.size and n.min() < 0:
        raise ValueError("log_factorials needs n >= 0")
    if n.size == 0 or n.max() < LOG_FACTORIAL_TABLE_SIZE:
        return _LOG_FACTORIALS[n]
    return _lgamma_ufunc(n + 1.0).astype(float)


def log_binomial(n: int, k: int) -> LogNum:
    """ln C(n, k) with sign +1, or sign 0 outside 0 <= k <= n."""
    if k < 0 or k > n:
        return LogNum(0)
    k = min(k, n - k)  # exact symmetry in k <-> n - k
    return LogNum(1, log_factorial(n) - log_factorial(k) - log_factorial(n - k))


def log_binomials(n, k) -> np.ndarray:
    """Vectorised ln C(n, k); -inf where k is outside [0, n]."""
    n, k = np.broadcast_arrays(np.asarray(n, dtype=np.int64), np.asarray(k, dtype=np.int64))
    out = np.full(n.shape, -np.inf)
    ok = (k >= 0) & (k <= n)
    nk, kk = n[ok], np.minimum(k[ok], n[ok] - k[ok])
    out[ok] = log_factorials(nk) - log_factorials(kk) - log_factorials(nk - kk)
    return out


def legendre_log(J, x: float) -> LogNum:
    """ln P_J(x) for x >= 1 by the three-term recurrence.

    The running pair (P_{n-1}, P_n) is divided by P_n whenever P_n exceeds
    2**500, with the scale accumulated in the log offset.
    """
    two_j = doubled(J)
    if two_j % 2:
        raise ValueError("Legendre degree must be an integer")
    if not x >= 1.0:
        raise ValueError(f"legendre_log needs x >= 1, got {x}")
    n_max = two_j // 2
    if n_max == 0 or x == 1.0:
        return LogNum(1, 0.0)
    prev, cur, offset = 1.0, x, 0.0
    for n in range(1, n_max):
        prev, cur = cur, ((2 * n + 1) * x * cur - n * prev) / (n + 1)
        if cur > RESCALE_THRESHOLD:
            prev /= cur
            offset += math.log(cur)
            cur = 1.0
    return LogNum(1, offset + math.log(cur))


def log_d_pi2_column(J) -> tuple[np.ndarray, np.ndarray]:
    """Signs and log-magnitudes of d^J_{m',0}(pi/2) for m' = -J..J.

    At beta = pi/2 the Jacobi polynomial at zero collapses to a product of
    central binomials:  d^2 = C(J+m', (J+m')/2) C(J-m', (J-m')/2) / 4^J with
    sign (-1)^((J+m')/2), and d = 0 when J + m' is odd.
    """
    two_j = doubled(J)
    if two_j % 2:
        raise ValueError("d^J_{m',0} needs integer J")
    j = two_j // 2
    mp = np.arange(-j, j + 1)
    signs = np.zeros(mp.shape, dtype=np.int64)
    logs = np.full(mp.shape, -np.inf)
    even = (j + mp) % 2 == 0
    a = (j + mp[even]) // 2
    b = (j - mp[even]) // 2
    logs[even] = 0.5 * (log_binomials(2 * a, a) + log_binomials(2 * b, b)) - j * math.log(2.0)
    signs[even] = np.where(a % 2 == 0, 1, -1)
    return signs, logs


def wigner_d_pi2(J, mprime) -> float:
    """d^J_{m',0}(pi/2) with the standard (Condon-Shortley) sign convention."""
    two_j = doubled(J)
    two_mp = doubled(mprime, allow_negative=True)
    MagneticIndex(two_mp).check(Spin(two_j))
    if two_j % 2:
        raise ValueError("d^J_{m',0} needs integer J")
    j, mp = two_j // 2, two_mp // 2
    if (j + mp) % 2:
        return 0.0
    a, b = (j + mp) // 2, (j - mp) // 2
    log_mag = 0.5 * (log_binomial(2 * a, a).log_mag + log_binomial(2 * b, b).log_mag) - j * math.log(2.0)
    return (1.0 if a % 2 == 0 else -1.0) * math.exp(log_mag)


def wigner_d_pi2_exact(J, mprime, m) -> LogNum:
    """d^J_{m',m}(pi/2) for arbitrary m from the Wigner sum in exact integers.

    d = 2^-J sqrt((J+m)!(J-m)!/((J+m')!(J-m')!))
        * sum_k (-1)^(k+m'-m) C(J-m', k) C(J+m', J+m-k)
    The integer sum is exact, so there is no cancellation error at large J.
    """
    two_j = doubled(J)
    two_mp = doubled(mprime, allow_negative=True)
    two_m = doubled(m, allow_negative=True)
    spin = Spin(two_j)
    MagneticIndex(two_mp).check(spin)
    MagneticIndex(two_m).check(spin)
    jpm, jmm = (two_j + two_m) // 2, (two_j - two_m) // 2
    jpmp, jmmp = (two_j + two_mp) // 2, (two_j - two_mp) // 2
    diff = (two_mp - two_m) // 2
    total = 0
    for k in range(max(0, -diff), min(jmmp, jpm) + 1):
        term = math.comb(jmmp, k) * math.comb(jpmp, jpm - k)
        total += -term if (k + diff) % 2 else term
    if total == 0:
        return LogNum(0)
    log_mag = (
        math.log(abs(total))
        + 0.5 * (log_factorial(jpm) + log_factorial(jmm) - log_factorial(jpmp) - log_factorial(jmmp))
        - 0.5 * two_j * math.log(2.0)
    )
    return LogNum(1 if total > 0 else -1, log_mag)


def log_cg_stretched(J1, J2, m1, m2) -> float:
    """ln C^{J1 J2 J}_{m1 m2 m} for J = J1 + J2 (binomial form)."""
    t1, t2 = doubled(J1), doubled(J2)
    u1, u2 = doubled(m1, allow_negative=True), doubled(m2, allow_negative=True)
    MagneticIndex(u1).check(Spin(t1))
    MagneticIndex(u2).check(Spin(t2))
    t, u = t1 + t2, u1 + u2
    return 0.5 * (
        log_binomial(t1, (t1 + u1) // 2).log_mag
        + log_binomial(t2, (t2 + u2) // 2).log_mag
        - log_binomial(t, (t + u) // 2).log_mag
    )


def cg_stretched(J1, J2, m1, m2) -> float:
    """Clebsch-Gordan coefficient for stretched coupling J = J1 + J2.

    The squared coefficient is C(2J1, J1+m1) C(2J2, J2+m2) / C(2J, J+m); the
    positive root is returned, matching Condon-Shortley for this coupling.
    """
    return math.exp(log_cg_stretched(J1, J2, m1, m2))


def log_cg_stretched_grid(J1, J2) -> np.ndarray:
    """ln C^{J1 J2 J}_{m1 m2 m} on the full (2J1+1) x (2J2+1) grid."""
    t1, t2 = doubled(J1), doubled(J2)
    k1 = np.arange(t1 + 1)[:, None]  # J1 + m1
    k2 = np.arange(t2 + 1)[None, :]  # J2 + m2
    return 0.5 * (log_binomials(t1, k1) + log_binomials(t2, k2) - log_binomials(t1 + t2, k1 + k2))


def _log_sinh(x: float) -> float:
    if x < 1.0:
        return math.log(math.sinh(x))
    return x + math.log1p(-math.exp(-2.0 * x)) - math.log(2.0)


def _log_cosh(x: float) -> float:
    return x + math.log1p(math.exp(-2.0 * x)) - math.log(2.0)


def log_d_imag_column(J, gamma: float) -> np.ndarray:
    """ln |d^J_{m',0}(-i gamma)| for m' = -J..J (-inf where it vanishes).

    With beta = -i gamma the Jacobi form becomes a sum of positive terms,
        |d| = J!/sqrt((J+m')!(J-m')!)
              * sum_s C(J-m', J-s) C(J+m', s) sinh^(2s-m')(g/2) cosh^(2J-2s+m')(g/2),
    evaluated here with a log-sum-exp per m'.
    """
    two_j = doubled(J)
    if two_j % 2:
        raise ValueError("d^J_{m',0} needs integer J")
    if gamma < 0:
        raise ValueError("gamma must be >= 0")
    j = two_j // 2
    out = np.full(two_j + 1, -np.inf)
    if gamma / 2 == 0:
        out[j] = 0.0
        return out
    ls, lc = _log_sinh(gamma / 2), _log_cosh(gamma / 2)
    lf = log_factorials(np.arange(two_j + 1))
    for idx, mp in enumerate(range(-j, j + 1)):
        s = np.arange(max(0, mp), min(j, j + mp) + 1)
        terms = (
            log_binomials(j - mp, j - s)
            + log_binomials(j + mp, s)
            + (2 * s - mp) * ls
            + (2 * j - 2 * s + mp) * lc
        )
        top = terms.max()
        out[idx] = lf[j] - 0.5 * (lf[j + mp] + lf[j - mp]) + top + math.log(np.exp(terms - top).sum())
    return out


def wigner_d_imag(J, mprime, gamma: float) -> LogNum:
    """Real factor r of d^J_{m',0}(-i gamma) = <m'|exp(-gamma J_y)|0> = i^m' r.

    The phase i^m' comes from sin(beta/2)^(-m') at beta = -i gamma, with
    J_y = (J+ - J-)/2i; r >= 0. Only |d| enters any Schmidt spectrum since
    i^(m1+m2) factorises into row and column phases.
    """
    two_mp = doubled(mprime, allow_negative=True)
    two_j = doubled(J)
    MagneticIndex(two_mp).check(Spin(two_j))
    if gamma < 0:
        raise ValueError("gamma must be >= 0")
    if two_j % 2:
        raise ValueError("d^J_{m',0} needs integer J")
    if gamma == 0:
        return LogNum(1, 0.0) if two_mp == 0 else LogNum(0)
    log_mag = log_d_imag_column(two_j / 2, gamma)[(two_mp + two_j) // 2]
    return LogNum(1, float(log_mag))


def jacobi_polynomial(n: int, a: float, b: float, x: float) -> float:
    """P_n^(a,b)(x) by the three-term recurrence in the degree.

    Negative integer parameters are allowed as long as 2k + a + b != 0 for
    k >= 2, which holds for the (-m, m) family used with rotation matrices.
    """
    if n < 0:
        raise ValueError("degree must be >= 0")
    prev = 1.0
    if n == 0:
        return prev
    cur = (a + 1.0) + (a + b + 2.0) * (x - 1.0) / 2.0
    for k in range(2, n + 1):
        s = 2 * k + a + b
        c0 = 2 * k * (k + a + b) * (s - 2)
        c1 = (s - 1) * (s * (s - 2) * x + a * a - b * b)
        c2 = 2 * (k + a - 1) * (k + b - 1) * s
        prev, cur = cur, (c1 * cur - c2 * prev) / c0
    return cur
