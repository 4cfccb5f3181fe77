"""Full 2^N product-space oracle for small spin systems.

Basis states are integers b whose bit i is the state of particle i
(1 = up). The Dicke-sector state is embedded by spreading each m component
evenly over all bitstrings with the matching number of up spins.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .state import AmplitudeVector

MAX_PARTICLES = 14
NORM_TOL = 1e-12


@dataclass(frozen=True)
class FullStateVector:
    n_particles: int
    amps: np.ndarray

    def __post_init__(self):
        amps = np.array(self.amps, dtype=np.complex128)
        if amps.shape != (1 << self.n_particles,):
            raise ValueError(f"expected {1 << self.n_particles} amplitudes, got {amps.shape}")
        norm = np.linalg.norm(amps)
        if abs(norm - 1.0) > NORM_TOL:
            raise ValueError(f"state not normalised (norm {norm!r})")
        amps.setflags(write=False)
        object.__setattr__(self, "amps", amps)

    def tensor(self) -> np.ndarray:
        """Amplitudes as an N-index array; axis i is particle i."""
        n = self.n_particles
        # C-order reshape puts the most significant bit first
        return self.amps.reshape((2,) * n).transpose(tuple(range(n - 1, -1, -1))) if n else self.amps

    def symmetry_deviation(self) -> float:
        """Largest spread of amplitudes within one population sector."""
        pop = popcounts(self.n_particles)
        worst = 0.0
        for k in range(self.n_particles + 1):
            sector = self.amps[pop == k]
            worst = max(worst, float(np.abs(sector - sector[0]).max()))
        return worst


@dataclass(frozen=True)
class ReducedDensityMatrix:
    subset_size: int
    entries: np.ndarray

    @property
    def trace(self) -> float:
        return float(np.trace(self.entries).real)

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.entries)


def popcounts(n: int) -> np.ndarray:
    b = np.arange(1 << n)
    count = np.zeros(b.size, dtype=np.int64)
    for i in range(n):
        count += (b >> i) & 1
    return count


def dicke_embed(psi: AmplitudeVector) -> FullStateVector:
    n = psi.spin.two_j
    if n > MAX_PARTICLES:
        raise ValueError(f"N = {n} exceeds the brute-force limit {MAX_PARTICLES}")
    k = popcounts(n)
    # the m = k - N/2 component sits at index k of the ascending amplitude list
    scale = np.array([1.0 / math.sqrt(math.comb(n, j)) for j in range(n + 1)])
    amps = psi.coeffs[k] * scale[k]
    return FullStateVector(n, amps / np.linalg.norm(amps))


def _check_subset(full: FullStateVector, subset) -> tuple[int, ...]:
    sub = tuple(sorted(set(int(i) for i in subset)))
    if any(i < 0 or i >= full.n_particles for i in sub):
        raise ValueError(f"subset {subset} out of range for N = {full.n_particles}")
    return sub


def reduced_density_matrix(full: FullStateVector, subset) -> ReducedDensityMatrix:
    """rho of the particles in ``subset`` with the rest traced out."""
    sub = _check_subset(full, subset)
    rest = tuple(i for i in range(full.n_particles) if i not in sub)
    m = full.tensor().transpose(sub + rest).reshape(1 << len(sub), 1 << len(rest))
    return ReducedDensityMatrix(len(sub), m @ m.conj().T)


def reduced_entropy(full: FullStateVector, subset) -> float:
    """Von Neumann entropy in bits; the smaller side of the cut is diagonalised."""
    sub = _check_subset(full, subset)
    if 2 * len(sub) > full.n_particles:
        sub = tuple(i for i in range(full.n_particles) if i not in sub)
    p = reduced_density_matrix(full, sub).eigenvalues()
    p = p[p > 0]
    return float(max(0.0, -np.sum(p * np.log2(p))))


def partition_invariance(full: FullStateVector, k: int, trials: int = 10, seed: int = 0) -> float:
    """Spread of block entropies over the first k particles and random k-subsets."""
    n = full.n_particles
    if not 0 < k < n:
        raise ValueError(f"block size must lie in 1..{n - 1}")
    rng = np.random.default_rng(seed)
    subsets = {tuple(range(k))}
    available = math.comb(n, k)
    if available <= trials + 1:
        subsets.update(combinations(range(n), k))
    else:
        while len(subsets) < trials + 1:
            subsets.add(tuple(sorted(rng.choice(n, size=k, replace=False).tolist())))
    values = [reduced_entropy(full, s) for s in sorted(subsets)]
    return float(max(values) - min(values))
