"""Index subsets, minors, compound matrices, and wedge products.

Everything here is indexed by k-element subsets of {1, ..., d} in
lexicographic order.  Subsets use 1-based members externally (matching the
usual minor notation) and convert to 0-based row/column indices internally.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    BadCardinality,
    CardinalityMismatch,
    DimensionMismatch,
    DimensionTooLarge,
    NotDecomposable,
)

MAX_DIM = 20
# binomial(20, 10); largest subset family we agree to materialize
MAX_SUBSETS = 184756


def _check_dk(d: int, k: int) -> None:
    if d < 1 or d > MAX_DIM:
        raise DimensionTooLarge(f"dimension {d} outside 1..{MAX_DIM}")
    if k < 1 or k > d:
        raise BadCardinality(f"cardinality {k} outside 1..{d}")


def subset_rank(d: int, members: Sequence[int]) -> int:
    """Lexicographic rank of a strictly increasing 1-based subset."""
    k = len(members)
    rank = 0
    prev = 0
    for j, m in enumerate(members):
        for v in range(prev + 1, m):
            rank += math.comb(d - v, k - j - 1)
        prev = m
    return rank


def subset_from_rank(d: int, k: int, rank: int) -> tuple:
    """Inverse of subset_rank for the same ordering."""
    members = []
    prev = 0
    r = rank
    for j in range(k):
        v = prev + 1
        while True:
            block = math.comb(d - v, k - j - 1)
            if r < block:
                break
            r -= block
            v += 1
        members.append(v)
        prev = v
    return tuple(members)


@dataclass(frozen=True)
class IndexSet:
    """A k-subset of {1..d}, strictly increasing, with its lex rank."""

    d: int
    members: tuple
    rank: int

    def __post_init__(self):
        if not all(isinstance(m, int) for m in self.members):
            raise BadCardinality("members must be integers")
        k = len(self.members)
        _check_dk(self.d, k)
        for a, b in zip(self.members, self.members[1:]):
            if b <= a:
                raise BadCardinality("members must be strictly increasing")
        if self.members[0] < 1 or self.members[-1] > self.d:
            raise BadCardinality("members must lie in 1..d")
        if self.rank != subset_rank(self.d, self.members):
            raise BadCardinality("rank does not match members")

    @classmethod
    def from_members(cls, d: int, members: Iterable[int]) -> "IndexSet":
        mem = tuple(int(m) for m in members)
        return cls(d=d, members=mem, rank=subset_rank(d, mem))

    @classmethod
    def from_rank(cls, d: int, k: int, rank: int) -> "IndexSet":
        _check_dk(d, k)
        n = math.comb(d, k)
        if rank < 0 or rank >= n:
            raise BadCardinality(f"rank {rank} outside 0..{n - 1}")
        return cls(d=d, members=subset_from_rank(d, k, rank), rank=rank)

    @property
    def k(self) -> int:
        return len(self.members)

    def indices(self) -> np.ndarray:
        """0-based numpy index array for slicing rows/columns."""
        return np.asarray(self.members, dtype=np.intp) - 1


def enumerate_subsets(d: int, k: int):
    """All k-subsets of {1..d} as IndexSet, in lexicographic order."""
    _check_dk(d, k)
    n = math.comb(d, k)
    if n > MAX_SUBSETS:
        raise DimensionTooLarge(
            f"binomial({d},{k}) = {n} exceeds the {MAX_SUBSETS} subset cap"
        )
    return [
        IndexSet(d=d, members=mem, rank=r)
        for r, mem in enumerate(itertools.combinations(range(1, d + 1), k))
    ]


def _coerce_rows(d: int, sel) -> np.ndarray:
    if isinstance(sel, IndexSet):
        if sel.d != d:
            raise DimensionMismatch(f"index set over 1..{sel.d} used on dimension {d}")
        return sel.indices()
    idx = np.asarray(tuple(sel), dtype=np.intp)
    if idx.size == 0:
        raise BadCardinality("empty index selection")
    if idx.min() < 1 or idx.max() > d:
        raise BadCardinality("members must lie in 1..d")
    return idx - 1


def minor(M: np.ndarray, rows, cols) -> complex:
    """Determinant of the submatrix M[rows, cols] (1-based selections).

    Row and column selections must have equal cardinality.
    """
    M = np.asarray(M)
    if M.ndim != 2:
        raise DimensionMismatch("minor expects a 2-d array")
    ri = _coerce_rows(M.shape[0], rows)
    ci = _coerce_rows(M.shape[1], cols)
    if ri.size != ci.size:
        raise CardinalityMismatch(
            f"row selection has {ri.size} members, column selection {ci.size}"
        )
    sub = M[np.ix_(ri, ci)]
    return complex(np.linalg.det(sub))


def compound(M: np.ndarray, k: int) -> np.ndarray:
    """k-th multiplicative compound: entry (I, J) is the minor M[I, J].

    Rows and columns are indexed by k-subsets in lexicographic order.
    """
    M = np.asarray(M, dtype=complex)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise DimensionMismatch("compound expects a square matrix")
    d = M.shape[0]
    _check_dk(d, k)
    n = math.comb(d, k)
    if n > MAX_SUBSETS:
        raise DimensionTooLarge(
            f"binomial({d},{k}) = {n} exceeds the {MAX_SUBSETS} subset cap"
        )
    combs = np.asarray(list(itertools.combinations(range(d), k)), dtype=np.intp)
    out = np.empty((n, n), dtype=complex)
    for a in range(n):
        # one batched determinant sweep per row subset
        block = M[combs[a], :]
        stacked = block[:, combs].transpose(1, 0, 2)
        out[a, :] = np.linalg.det(stacked)
    return out


@dataclass(frozen=True)
class WedgeVector:
    """Coordinates of an element of the k-th exterior power of C^d.

    coordinates[r] is the coefficient of the basis wedge e_I where I is the
    k-subset of lex rank r.
    """

    d: int
    k: int
    coordinates: np.ndarray

    def __post_init__(self):
        _check_dk(self.d, self.k)
        coords = np.asarray(self.coordinates, dtype=complex)
        if coords.shape != (math.comb(self.d, self.k),):
            raise DimensionMismatch(
                f"expected {math.comb(self.d, self.k)} coordinates, "
                f"got shape {coords.shape}"
            )
        object.__setattr__(self, "coordinates", coords)

    def norm(self) -> float:
        return float(np.linalg.norm(self.coordinates))


def wedge(*vectors) -> WedgeVector:
    """Wedge product of k vectors in C^d.

    Accepts either k separate 1-d arrays or a single d-by-k array whose
    columns are the vectors.  The coordinate at subset I is the determinant
    of the rows I of the stacked matrix.
    """
    if len(vectors) == 1 and np.asarray(vectors[0]).ndim == 2:
        frame = np.asarray(vectors[0], dtype=complex)
    else:
        cols = [np.asarray(v, dtype=complex) for v in vectors]
        if any(c.ndim != 1 for c in cols):
            raise DimensionMismatch("wedge factors must be vectors")
        if len({c.shape[0] for c in cols}) != 1:
            raise DimensionMismatch("wedge factors must share a dimension")
        frame = np.column_stack(cols)
    d, k = frame.shape
    _check_dk(d, k)
    n = math.comb(d, k)
    if n > MAX_SUBSETS:
        raise DimensionTooLarge(
            f"binomial({d},{k}) = {n} exceeds the {MAX_SUBSETS} subset cap"
        )
    combs = np.asarray(list(itertools.combinations(range(d), k)), dtype=np.intp)
    stacked = frame[combs, :]
    return WedgeVector(d=d, k=k, coordinates=np.linalg.det(stacked))


def _lift_matrix(psi: WedgeVector) -> np.ndarray:
    """Matrix of x -> x wedge psi from C^d to the (k+1)-th exterior power."""
    d, k = psi.d, psi.k
    n_up = math.comb(d, k + 1)
    ranks_k = {
        mem: r for r, mem in enumerate(itertools.combinations(range(1, d + 1), k))
    }
    L = np.zeros((n_up, d), dtype=complex)
    for r_up, mem_up in enumerate(itertools.combinations(range(1, d + 1), k + 1)):
        for pos, i in enumerate(mem_up):
            rest = mem_up[:pos] + mem_up[pos + 1 :]
            sign = -1.0 if pos % 2 else 1.0
            L[r_up, i - 1] += sign * psi.coordinates[ranks_k[rest]]
    return L


def subspace_from_decomposable(psi: WedgeVector, tol: float = 1e-8):
    """Recover the k-plane whose wedge coordinates are psi.

    Returns (basis, projection) where basis is a d-by-k orthonormal frame
    and projection = basis @ basis^*.  Raises NotDecomposable when psi is
    not (numerically) a pure wedge of k vectors.
    """
    d, k = psi.d, psi.k
    nrm = psi.norm()
    if nrm == 0.0:
        raise NotDecomposable("zero tensor has no well-defined span")
    if k == d:
        basis = np.eye(d, dtype=complex)
        return basis, np.eye(d, dtype=complex)
    L = _lift_matrix(psi)
    _, svals, vh = np.linalg.svd(L)
    cutoff = tol * svals[0] if svals.size else 0.0
    null_dim = int(np.sum(svals <= cutoff)) + (d - len(svals))
    if null_dim != k:
        raise NotDecomposable(
            f"wedge annihilator has dimension {null_dim}, expected {k}"
        )
    basis = vh[d - k :, :].conj().T
    rebuilt = wedge(basis)
    overlap = abs(np.vdot(rebuilt.coordinates, psi.coordinates))
    score = overlap / (rebuilt.norm() * nrm)
    if score < 1.0 - tol:
        raise NotDecomposable(
            f"recovered span reproduces the tensor with collinearity {score:.3e}"
        )
    return basis, basis @ basis.conj().T
