"""Distances between subspaces of C^d.

Two metrics on k-planes: the operator-norm gap between orthogonal
projections, and a chordal distance computed from the overlap determinant
of two orthonormal frames.  The probe utility samples random frame pairs
and reports how the two metrics compare in practice.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NotProjection, RankMismatch, ShapeMismatch

ORTHO_TOL = 1e-10


@dataclass(frozen=True)
class Frame:
    """Orthonormal d-by-k frame; columns span the represented subspace."""

    columns: np.ndarray

    def __post_init__(self):
        cols = np.asarray(self.columns, dtype=complex)
        if cols.ndim != 2 or cols.shape[0] < cols.shape[1] or cols.shape[1] == 0:
            raise ShapeMismatch(f"expected a tall d-by-k frame, got {cols.shape}")
        gram = cols.conj().T @ cols
        if np.max(np.abs(gram - np.eye(cols.shape[1]))) > 1e-8:
            raise ShapeMismatch("frame columns are not orthonormal")
        cols = cols.copy()
        cols.setflags(write=False)
        object.__setattr__(self, "columns", cols)

    @classmethod
    def random(cls, d: int, k: int, seed) -> "Frame":
        """Haar-distributed frame: complex Gaussian then thin QR with the
        phase fixed so the R diagonal is positive."""
        rng = np.random.default_rng(seed)
        Z = rng.standard_normal((d, k)) + 1j * rng.standard_normal((d, k))
        Q, R = np.linalg.qr(Z)
        diag = np.diag(R)
        phase = np.where(np.abs(diag) > 0, diag / np.abs(np.where(diag == 0, 1, diag)), 1.0)
        return cls(Q * phase.conj())

    @property
    def d(self) -> int:
        return self.columns.shape[0]

    @property
    def k(self) -> int:
        return self.columns.shape[1]

    def projection(self) -> np.ndarray:
        return self.columns @ self.columns.conj().T


def _check_projection(P: np.ndarray, name: str) -> np.ndarray:
    P = np.asarray(P, dtype=complex)
    if P.ndim != 2 or P.shape[0] != P.shape[1]:
        raise NotProjection(f"{name} is not square")
    scale = max(1.0, float(np.max(np.abs(P))))
    if np.max(np.abs(P - P.conj().T)) > ORTHO_TOL * scale:
        raise NotProjection(f"{name} is not Hermitian")
    if np.max(np.abs(P @ P - P)) > ORTHO_TOL * scale:
        raise NotProjection(f"{name} is not idempotent")
    return P


def gap_distance(P: np.ndarray, Q: np.ndarray) -> float:
    """Operator-norm distance between two orthogonal projections of equal
    rank; always lies in [0, 1]."""
    P = _check_projection(P, "first argument")
    Q = _check_projection(Q, "second argument")
    if P.shape != Q.shape:
        raise RankMismatch(f"projections act on dimensions {P.shape[0]} and {Q.shape[0]}")
    rp = int(round(float(np.trace(P).real)))
    rq = int(round(float(np.trace(Q).real)))
    if rp != rq:
        raise RankMismatch(f"projections have ranks {rp} and {rq}")
    return float(min(1.0, np.linalg.norm(P - Q, 2)))


def _log_overlap(ucols: np.ndarray, vcols: np.ndarray) -> float:
    """log |det(U^* V)| as the log-product of principal-angle cosines.

    Direct evaluation of 1 - |det| cancels catastrophically when the spans
    nearly coincide, so narrow angles are measured through their sines
    (singular values of the residual V - U U^* V) and wide ones through
    their cosines; the two SVDs describe the same angles in opposite order.
    """
    M = ucols.conj().T @ vcols
    cosines = np.clip(np.linalg.svd(M, compute_uv=False), 0.0, 1.0)
    residual = vcols - ucols @ M
    sines = np.clip(np.linalg.svd(residual, compute_uv=False), 0.0, 1.0)[::-1]
    total = 0.0
    for c, s in zip(cosines, sines):
        if c * c <= 0.5:
            if c == 0.0:
                return -np.inf
            total += np.log(c)
        else:
            total += 0.5 * np.log1p(-min(1.0, s * s))
    return total


def wedge_distance(U, V) -> float:
    """Chordal distance sqrt(2 - 2|det(U^* V)|) between the spans of two
    orthonormal frames of the same shape."""
    if not isinstance(U, Frame):
        U = Frame(U)
    if not isinstance(V, Frame):
        V = Frame(V)
    if (U.d, U.k) != (V.d, V.k):
        raise ShapeMismatch(f"frames have shapes {(U.d, U.k)} and {(V.d, V.k)}")
    log_overlap = _log_overlap(U.columns, V.columns)
    return float(np.sqrt(max(0.0, -2.0 * np.expm1(log_overlap))))


@dataclass(frozen=True)
class ComparabilityReport:
    samples: int
    d: int
    k: int
    ratios: np.ndarray
    min_ratio: float
    max_ratio: float
    zero_consistent: bool


def metric_comparability_probe(samples: int, d: int, k: int, seed) -> ComparabilityReport:
    """Sample random frame pairs and report the spread of the ratio
    wedge_distance / gap_distance.  Purely empirical; makes no claim of
    equivalence between the metrics."""
    ratios = []
    zero_ok = True
    for i in range(samples):
        U = Frame.random(d, k, seed=[seed, 2 * i])
        V = Frame.random(d, k, seed=[seed, 2 * i + 1])
        g = gap_distance(U.projection(), V.projection())
        w = wedge_distance(U, V)
        if g < 1e-12 or w < 1e-12:
            zero_ok = zero_ok and (g < 1e-12 and w < 1e-12)
            continue
        ratios.append(w / g)
    arr = np.asarray(ratios, dtype=float)
    return ComparabilityReport(
        samples=samples,
        d=d,
        k=k,
        ratios=arr,
        min_ratio=float(arr.min()) if arr.size else np.nan,
        max_ratio=float(arr.max()) if arr.size else np.nan,
        zero_consistent=zero_ok,
    )
