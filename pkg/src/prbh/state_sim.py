"""SU(2) generator blocks, cloner output states and the block channel action.

A qubit ``rho = (I + n.sigma) / 2`` is mapped to a direct sum of blocks, block
``k`` living in dimension ``k + 2``::

    N(rho) = (1 - z)^3 sum_k z^k xi_k,   xi_k = (k+1)/2 I + n.J^(k+2)

Blocks are stored unit trace; the probability sits in a separate weight, which
equals the cloner probability ``p_{k+1}``.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import block_diag, eigvalsh_tridiagonal

from .channel_model import ZLike, build_distribution

PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)

_UNIT_TOL = 1e-12


def _frozen(a):
    a = np.array(a, dtype=complex)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class BlochVector:
    """Unit Bloch direction, or the all-zero vector for the maximally mixed qubit."""

    nx: float
    ny: float
    nz: float

    def __post_init__(self):
        comps = [float(c) for c in (self.nx, self.ny, self.nz)]
        if not all(math.isfinite(c) for c in comps):
            raise ValueError(f"Bloch components must be finite, got {comps}")
        norm2 = sum(c * c for c in comps)
        if norm2 != 0.0 and abs(norm2 - 1.0) > _UNIT_TOL:
            raise ValueError(f"Bloch vector must be unit length or zero, |n|^2 = {norm2!r}")
        for name, c in zip(("nx", "ny", "nz"), comps):
            object.__setattr__(self, name, c)

    @classmethod
    def from_array(cls, n) -> "BlochVector":
        nx, ny, nz = (float(c) for c in n)
        return cls(nx, ny, nz)

    @classmethod
    def normalized(cls, n) -> "BlochVector":
        """Rescale an arbitrary nonzero 3-vector onto the unit sphere."""
        v = np.asarray(n, dtype=float)
        return cls.from_array(v / np.linalg.norm(v))

    @classmethod
    def mixed(cls) -> "BlochVector":
        return cls(0.0, 0.0, 0.0)

    @property
    def is_mixed(self) -> bool:
        return self.nx == 0.0 and self.ny == 0.0 and self.nz == 0.0

    def as_array(self) -> np.ndarray:
        return np.array([self.nx, self.ny, self.nz])


def qubit_state(n: BlochVector) -> np.ndarray:
    """``(I + n.sigma) / 2`` as a dense 2x2 matrix."""
    return 0.5 * (np.eye(2) + n.nx * PAULI_X + n.ny * PAULI_Y + n.nz * PAULI_Z)


@dataclass(frozen=True)
class SpinGenerators:
    dim: int
    jx: np.ndarray
    jy: np.ndarray
    jz: np.ndarray

    @property
    def spin(self) -> float:
        return (self.dim - 1) / 2

    def along(self, n: BlochVector) -> np.ndarray:
        """``n.J`` for a Bloch direction."""
        return n.nx * self.jx + n.ny * self.jy + n.nz * self.jz

    def casimir(self) -> np.ndarray:
        return self.jx @ self.jx + self.jy @ self.jy + self.jz @ self.jz


@functools.lru_cache(maxsize=512)
def su2_generators(dim: int) -> SpinGenerators:
    """Spin-j generators in the ``dim = 2j + 1`` irrep, basis ordered ``m = j, j-1, ..., -j``."""
    if int(dim) != dim or dim < 2:
        raise ValueError(f"representation dimension must be an integer >= 2, got {dim!r}")
    dim = int(dim)
    j = (dim - 1) / 2
    m = j - np.arange(dim)
    # <m+1| J+ |m> sits one row above the diagonal in descending-m order
    ladder = np.sqrt(j * (j + 1) - m[1:] * (m[1:] + 1))
    jp = np.diag(ladder, k=1).astype(complex)
    jm = jp.conj().T
    return SpinGenerators(
        dim,
        _frozen(0.5 * (jp + jm)),
        _frozen(-0.5j * (jp - jm)),
        _frozen(np.diag(m)),
    )


def xi_block(k: int, n: BlochVector) -> np.ndarray:
    """Unnormalized block ``(k+1)/2 I + n.J`` in dimension ``k + 2``; trace ``(k+1)(k+2)/2``."""
    if int(k) != k or k < 0:
        raise ValueError(f"block index must be a nonnegative integer, got {k!r}")
    k = int(k)
    gens = su2_generators(k + 2)
    return 0.5 * (k + 1) * np.eye(k + 2) + gens.along(n)


def cloner_output(N: int) -> np.ndarray:
    """Output of the 1 -> N cloner, ``diag(2k / (N (N+1)))`` for ``k = 0..N``.

    A prefactor of ``N (N+1) / 2`` would give trace ``(N (N+1) / 2)^2``; ``2 / (N (N+1))`` gives unit trace.
    """
    if int(N) != N or N < 1:
        raise ValueError(f"N must be a positive integer, got {N!r}")
    N = int(N)
    ks = np.arange(N + 1, dtype=float)
    return np.diag(2.0 * ks / (N * (N + 1))).astype(complex)


def sturm_count(diag, offdiag, sigma: float) -> int:
    """Number of eigenvalues below ``sigma`` of the real symmetric tridiagonal (diag, offdiag).

    Counts negative pivots of the LDL^T factorization of ``T - sigma I``.
    """
    count = 0
    q = 1.0
    tiny = np.finfo(float).tiny
    for i, a in enumerate(diag):
        e2 = offdiag[i - 1] ** 2 if i else 0.0
        q = (a - sigma) - e2 / q
        if q == 0.0:
            q = -tiny
        if q < 0.0:
            count += 1
    return count


@dataclass(frozen=True)
class Block:
    """One Hermitian tridiagonal block: real diagonal plus complex superdiagonal.

    Every block of the channel output couples only neighbouring ``m`` in the
    descending-m basis, so the band determines the matrix. ``matrix`` builds the
    dense form on demand.
    """

    k: int
    weight: float
    diag: np.ndarray
    upper: np.ndarray

    @property
    def dim(self) -> int:
        return len(self.diag)

    @functools.cached_property
    def matrix(self) -> np.ndarray:
        m = np.diag(self.diag).astype(complex)
        if self.dim > 1:
            m += np.diag(self.upper, 1) + np.diag(self.upper.conj(), -1)
        m.setflags(write=False)
        return m

    def trace(self) -> float:
        return math.fsum(self.diag)

    def eigenvalues(self) -> np.ndarray:
        """Ascending eigenvalues.

        A diagonal phase change maps the block onto the real symmetric
        tridiagonal with off-diagonal moduli, which has the same spectrum.
        """
        if self.dim == 1:
            return np.array(self.diag, dtype=float)
        return eigvalsh_tridiagonal(self.diag, np.abs(self.upper), lapack_driver="sterf")

    def count_below(self, sigma: float) -> int:
        return sturm_count(self.diag.tolist(), np.abs(self.upper).tolist(), sigma)


def _band(diag, upper) -> tuple:
    diag = np.array(diag, dtype=float)
    upper = np.array(upper, dtype=complex)
    diag.setflags(write=False)
    upper.setflags(write=False)
    return diag, upper


@dataclass(frozen=True)
class BlockDensityMatrix:
    blocks: tuple
    tail_mass: float
    meta: dict = field(default_factory=dict, compare=False)

    def __len__(self):
        return len(self.blocks)

    def __iter__(self):
        return iter(self.blocks)

    def __getitem__(self, k) -> Block:
        return self.blocks[k]

    @property
    def weights(self) -> np.ndarray:
        return np.array([b.weight for b in self.blocks])

    def total_weight(self) -> float:
        return math.fsum(b.weight for b in self.blocks)

    def total_trace(self) -> float:
        return math.fsum(b.weight * b.trace() for b in self.blocks)

    def min_eigenvalue(self) -> float:
        return min(float(b.eigenvalues()[0]) for b in self.blocks)

    def is_psd(self, tol: float = 1e-10) -> bool:
        """True when no block has an eigenvalue below ``-tol``."""
        return all(b.count_below(-tol) == 0 for b in self.blocks)

    def to_dense(self) -> np.ndarray:
        """Weighted direct sum as one dense matrix (truncated blocks only)."""
        return block_diag(*[b.weight * b.matrix for b in self.blocks])


def channel_apply(n: BlochVector, z: ZLike, tail_tol: float = 1e-9) -> BlockDensityMatrix:
    """Block action of the channel on the qubit with Bloch vector ``n``.

    Block ``k`` is ``xi_k`` divided by its trace ``(k+1)(k+2)/2``, assembled from
    the ladder coefficients: ``n.J`` has diagonal ``nz m`` and superdiagonal
    ``(nx - i ny) / 2 * sqrt(j(j+1) - m(m+1))``.
    """
    dist = build_distribution(z, tail_tol)
    shift = complex(n.nx, -n.ny) / 2
    blocks = []
    for k, p in enumerate(dist.probs):
        j = (k + 1) / 2
        m = j - np.arange(k + 2)
        ladder = np.sqrt(j * (j + 1) - m[1:] * (m[1:] + 1))
        norm = 0.5 * (k + 1) * (k + 2)
        diag, upper = _band((0.5 * (k + 1) + n.nz * m) / norm, shift * ladder / norm)
        blocks.append(Block(k, p, diag, upper))
    return BlockDensityMatrix(tuple(blocks), dist.tail_mass, {"z": dist.z.z, "n": n.as_array().tolist()})


def mixed_input_outputs(z: ZLike, tail_tol: float = 1e-9):
    """Bob and environment states ``(sigma_B, sigma_E)`` for the maximally mixed input.

    ``sigma_B`` carries ``T_k S_k`` on an identity of dimension ``k + 2`` and
    ``sigma_E`` carries ``T_k S~_k`` on dimension ``k + 1``, with ``T_k = (1-z)^3 z^k``,
    ``S_k = (k+1)/2`` and ``S~_k = (k+2)/2``. Both trace weights reduce to ``p_{k+1}``.
    """
    dist = build_distribution(z, tail_tol)
    bob, env = [], []
    for k, p in enumerate(dist.probs):
        bob.append(Block(k, p, *_band(np.full(k + 2, 1.0 / (k + 2)), np.zeros(k + 1))))
        env.append(Block(k, p, *_band(np.full(k + 1, 1.0 / (k + 1)), np.zeros(k))))
    meta = {"z": dist.z.z}
    return (
        BlockDensityMatrix(tuple(bob), dist.tail_mass, meta),
        BlockDensityMatrix(tuple(env), dist.tail_mass, meta),
    )
