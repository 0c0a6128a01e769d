"""Block-structured symmetric matrices and the matrix algebra used everywhere else.

The variable space is a direct sum of symmetric matrix blocks, a nonnegative
orthant and a group of unconstrained scalars.  Everything in this module is
immutable after construction and safe to share between threads.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


class StructureMismatchError(ValueError):
    """Two block objects with incompatible structures were combined."""


@dataclass(frozen=True)
class BlockStructure:
    """Shape of the mixed cone: SDP blocks + nonnegative scalars + free scalars."""

    sdp_blocks: tuple[int, ...] = ()
    nonneg_dim: int = 0
    free_dim: int = 0

    def __post_init__(self):
        object.__setattr__(self, "sdp_blocks", tuple(int(s) for s in self.sdp_blocks))
        if any(s < 1 for s in self.sdp_blocks):
            raise ValueError("all SDP block sizes must be >= 1")
        if self.nonneg_dim < 0 or self.free_dim < 0:
            raise ValueError("nonneg_dim and free_dim must be >= 0")

    @property
    def sym_dim(self) -> int:
        """Total number of scalar parameters under symmetric packing."""
        return sum(s * (s + 1) // 2 for s in self.sdp_blocks) + self.nonneg_dim + self.free_dim

    @property
    def cone_dim(self) -> int:
        """Barrier dimension: sum of block sizes plus the nonnegative count."""
        return sum(self.sdp_blocks) + self.nonneg_dim


def _symmetrize(m: np.ndarray) -> np.ndarray:
    return (m + m.T) / 2.0


class SymBlockMat:
    """One element of the block space: per-block symmetric matrices plus vectors.

    Blocks are symmetrized on construction by averaging with the transpose, so
    entry (i, j) equals entry (j, i) bit-for-bit afterwards.
    """

    __slots__ = ("structure", "blocks", "nonneg", "free")

    def __init__(self, structure: BlockStructure, blocks=None, nonneg=None, free=None):
        self.structure = structure
        if blocks is None:
            blocks = [np.zeros((s, s)) for s in structure.sdp_blocks]
        if len(blocks) != len(structure.sdp_blocks):
            raise StructureMismatchError("wrong number of SDP blocks")
        fixed = []
        for b, s in zip(blocks, structure.sdp_blocks):
            b = np.asarray(b, dtype=float)
            if b.shape != (s, s):
                raise StructureMismatchError(f"block shape {b.shape} != ({s}, {s})")
            fixed.append(_symmetrize(b))
        self.blocks = fixed
        self.nonneg = np.zeros(structure.nonneg_dim) if nonneg is None else np.asarray(nonneg, dtype=float).copy()
        self.free = np.zeros(structure.free_dim) if free is None else np.asarray(free, dtype=float).copy()
        if self.nonneg.shape != (structure.nonneg_dim,):
            raise StructureMismatchError("nonneg part has wrong length")
        if self.free.shape != (structure.free_dim,):
            raise StructureMismatchError("free part has wrong length")

    # -- constructors -------------------------------------------------------
    @classmethod
    def zeros(cls, structure: BlockStructure) -> "SymBlockMat":
        return cls(structure)

    @classmethod
    def identity(cls, structure: BlockStructure) -> "SymBlockMat":
        """Identity of the cone part: unit blocks and unit nonnegative entries."""
        return cls(
            structure,
            blocks=[np.eye(s) for s in structure.sdp_blocks],
            nonneg=np.ones(structure.nonneg_dim),
            free=np.zeros(structure.free_dim),
        )

    # -- arithmetic ---------------------------------------------------------
    def _check(self, other: "SymBlockMat"):
        if self.structure != other.structure:
            raise StructureMismatchError("operands have different block structures")

    def __add__(self, other: "SymBlockMat") -> "SymBlockMat":
        self._check(other)
        return SymBlockMat(
            self.structure,
            [a + b for a, b in zip(self.blocks, other.blocks)],
            self.nonneg + other.nonneg,
            self.free + other.free,
        )

    def __sub__(self, other: "SymBlockMat") -> "SymBlockMat":
        self._check(other)
        return SymBlockMat(
            self.structure,
            [a - b for a, b in zip(self.blocks, other.blocks)],
            self.nonneg - other.nonneg,
            self.free - other.free,
        )

    def __mul__(self, t: float) -> "SymBlockMat":
        t = float(t)
        return SymBlockMat(self.structure, [t * b for b in self.blocks], t * self.nonneg, t * self.free)

    __rmul__ = __mul__

    def __neg__(self) -> "SymBlockMat":
        return self * -1.0

    def copy(self) -> "SymBlockMat":
        return SymBlockMat(self.structure, [b.copy() for b in self.blocks], self.nonneg, self.free)

    def norm(self) -> float:
        """Frobenius norm over all parts."""
        return float(np.sqrt(frobenius_inner(self, self)))

    def max_abs(self) -> float:
        vals = [np.max(np.abs(b)) if b.size else 0.0 for b in self.blocks]
        for v in (self.nonneg, self.free):
            if v.size:
                vals.append(np.max(np.abs(v)))
        return max(vals, default=0.0)

    def trace(self) -> float:
        return float(sum(np.trace(b) for b in self.blocks) + self.nonneg.sum())

    def min_cone_eig(self) -> float:
        """Smallest eigenvalue over SDP blocks and nonnegative entries."""
        vals = [np.linalg.eigvalsh(b)[0] for b in self.blocks if b.size]
        if self.nonneg.size:
            vals.append(self.nonneg.min())
        return float(min(vals)) if vals else np.inf

    def is_zero(self, tol: float = 0.0) -> bool:
        return self.max_abs() <= tol

    def __repr__(self):
        s = self.structure
        return f"SymBlockMat(blocks={list(s.sdp_blocks)}, nonneg={s.nonneg_dim}, free={s.free_dim})"


def frobenius_inner(a: SymBlockMat, b: SymBlockMat) -> float:
    """Trace pairing summed over blocks plus the nonneg/free dot products."""
    if a.structure != b.structure:
        raise StructureMismatchError("frobenius_inner: operands have different structures")
    total = 0.0
    for x, y in zip(a.blocks, b.blocks):
        total += float(np.tensordot(x, y))
    total += float(a.nonneg @ b.nonneg) + float(a.free @ b.free)
    return total


# ---------------------------------------------------------------------------
# vec / mat


def vec(m: np.ndarray) -> np.ndarray:
    """Stack matrix columns into one vector (column-wise packing)."""
    return np.asarray(m).reshape(-1, order="F").copy()


def mat(v: np.ndarray, rows: int, cols: int) -> np.ndarray:
    """Inverse of :func:`vec`; requires len(v) == rows * cols."""
    v = np.asarray(v)
    if v.size != rows * cols:
        raise ValueError(f"cannot reshape length-{v.size} vector to {rows}x{cols}")
    return v.reshape(rows, cols, order="F").copy()


# ---------------------------------------------------------------------------
# complex <-> real embedding


def embed_hermitian(b: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    """Real symmetric embedding [[Re, -Im], [Im, Re]] of a Hermitian matrix.

    The embedding is PSD exactly when the input is, with every eigenvalue
    doubled in multiplicity.
    """
    b = np.asarray(b)
    scale = max(1.0, float(np.max(np.abs(b))) if b.size else 0.0)
    if np.max(np.abs(b - b.conj().T)) > tol * scale:
        raise ValueError("input is not Hermitian within tolerance")
    br, bi = np.real(b), np.imag(b)
    return np.block([[br, -bi], [bi, br]])


def recover_complex(x_real: np.ndarray) -> np.ndarray:
    """Pull a Hermitian matrix back out of its doubled real representation.

    For x = embed_hermitian(B) / 2 the round trip returns B exactly.
    """
    x = np.asarray(x_real, dtype=float)
    n2 = x.shape[0]
    if x.shape[0] != x.shape[1] or n2 % 2 != 0:
        raise ValueError("input must be square with even size")
    n = n2 // 2
    x11 = x[:n, :n]
    x21 = x[n:, :n]
    return 2.0 * x11 + 1j * (x21 - x21.T)


# ---------------------------------------------------------------------------
# PSD checks


@dataclass(frozen=True)
class PsdCheck:
    ok: bool
    min_eig: float
    # on failure: unit vector v with v' M v = min_eig < -tol
    # on success: lower-triangular L with L L' ~= M (up to the tolerance shift)
    witness: np.ndarray = field(repr=False, default=None)


def is_psd(m: np.ndarray, tol: float = 1e-9) -> PsdCheck:
    """Eigenvalue test for positive semidefiniteness with a witness.

    Returns ok=True iff the smallest eigenvalue is >= -tol.  The witness is a
    failing unit direction when not PSD, otherwise a Cholesky factor of the
    (tolerance-shifted) matrix.
    """
    m = np.asarray(m, dtype=float)
    if m.size and np.max(np.abs(m - m.T)) > 1e-10 * max(1.0, np.max(np.abs(m))):
        raise ValueError("is_psd expects a symmetric matrix")
    w, v = np.linalg.eigh(_symmetrize(m))
    lam = float(w[0])
    if lam < -tol:
        return PsdCheck(False, lam, v[:, 0].copy())
    shift = max(0.0, -lam) + tol
    try:
        chol = np.linalg.cholesky(m + shift * np.eye(m.shape[0]))
    except np.linalg.LinAlgError:
        chol = None
    return PsdCheck(True, lam, chol)


def sylvester_psd_oracle(m: np.ndarray, tol: float = 1e-9) -> bool:
    """Exhaustive principal-minor test; independent oracle for :func:`is_psd`.

    Only sensible for small matrices; sizes above 6 are rejected.
    """
    m = np.asarray(m, dtype=float)
    n = m.shape[0]
    if n > 6:
        raise ValueError("sylvester_psd_oracle supports sizes up to 6")
    scale = max(1.0, float(np.max(np.abs(m))) if m.size else 0.0)
    idx = range(n)
    from itertools import combinations

    for k in range(1, n + 1):
        for subset in combinations(idx, k):
            sub = m[np.ix_(subset, subset)]
            if np.linalg.det(sub) < -tol * scale**k:
                return False
    return True


# ---------------------------------------------------------------------------
# Schur complement


def schur_complement(m: np.ndarray, split: int, rcond_min: float = 1e-12) -> np.ndarray:
    """Schur complement M / D of the trailing block for M = [[A, B], [B', D]].

    ``split`` is the size of the leading block A.  Raises when D is singular
    or too ill-conditioned (reciprocal condition estimate below rcond_min).
    """
    m = np.asarray(m, dtype=float)
    n = m.shape[0]
    if not 0 < split < n:
        raise ValueError("split must cut the matrix into two nonempty blocks")
    a = m[:split, :split]
    b = m[:split, split:]
    d = m[split:, split:]
    sv = np.linalg.svd(d, compute_uv=False)
    scale = max(sv[0], float(np.linalg.norm(m, 2)))
    if scale == 0 or sv[-1] / scale < rcond_min:
        raise np.linalg.LinAlgError("trailing block is singular or ill-conditioned")
    return _symmetrize(a - b @ np.linalg.solve(d, b.T))
