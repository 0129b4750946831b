"""Numeric core: log-scale scalars, spectral forms of positive matrices, and
direct evaluation of sandwiched matrix powers at large exponents.

Everything here works in the natural-log domain where it matters.  The two
workhorses evaluate, for positive semidefinite A and B,

* ``z_p_*``: the spectrum and matrix of (A^(p/2) B^p A^(p/2))^(1/p),
* ``g_p_*``: the matrix of the geometric mean power (A^p # B^p)^(2/p),

without ever forming A^p or B^p as floats, so p in the thousands is routine
even for eigenvalue ratios near 1e6.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import total_ordering

import numpy as np

from . import _xsvd
from .errors import (
    DimensionMismatch,
    DimensionTooLarge,
    MateriallyNegative,
    NotHermitian,
    BadSpectrum,
    RegularizationDiverged,
)

NEG_INF = float("-inf")

HERMITIAN_RTOL = 1e-12
MATERIAL_NEG_RTOL = 1e-8
CLAMP_RTOL = 1e-12
MAX_DIM = 20

DEFAULT_P_SCHEDULE = (64, 128, 256, 512, 1024, 2048, 4096)
DEFAULT_EPSILONS = (1e-6, 1e-8, 1e-10)


@total_ordering
@dataclass(frozen=True)
class LogValue:
    """A real number stored as sign and natural log of magnitude.

    sign is -1, 0, or +1; logmag is -inf exactly when sign is 0.
    """

    sign: int
    logmag: float

    def __post_init__(self):
        if self.sign not in (-1, 0, 1):
            raise ValueError("sign must be -1, 0, or +1")
        if self.sign == 0 and self.logmag != NEG_INF:
            raise ValueError("zero value must carry logmag -inf")
        if self.sign != 0 and not self.logmag > NEG_INF:
            raise ValueError("nonzero value must carry finite logmag")

    @classmethod
    def from_real(cls, x):
        x = float(x)
        if x == 0.0:
            return cls(0, NEG_INF)
        return cls(1 if x > 0 else -1, math.log(abs(x)))

    @classmethod
    def from_log(cls, logmag, sign=1):
        if logmag == NEG_INF:
            return cls(0, NEG_INF)
        return cls(sign, float(logmag))

    def to_real(self):
        if self.sign == 0:
            return 0.0
        return self.sign * math.exp(self.logmag)

    @property
    def is_zero(self):
        return self.sign == 0

    def __mul__(self, other):
        if not isinstance(other, LogValue):
            return NotImplemented
        s = self.sign * other.sign
        if s == 0:
            return LogValue(0, NEG_INF)
        return LogValue(s, self.logmag + other.logmag)

    def __truediv__(self, other):
        if not isinstance(other, LogValue):
            return NotImplemented
        if other.sign == 0:
            raise ZeroDivisionError("division by zero LogValue")
        if self.sign == 0:
            return LogValue(0, NEG_INF)
        return LogValue(self.sign * other.sign, self.logmag - other.logmag)

    def __pow__(self, exponent):
        exponent = float(exponent)
        if self.sign == 0:
            if exponent <= 0:
                raise ZeroDivisionError("zero LogValue to a nonpositive power")
            return LogValue(0, NEG_INF)
        if self.sign < 0 and exponent != int(exponent):
            raise ValueError("negative LogValue needs an integer exponent")
        if self.sign < 0:
            sign = -1 if int(exponent) % 2 else 1
        else:
            sign = 1
        return LogValue(sign, self.logmag * exponent)

    def _key(self):
        if self.sign == 0:
            return (0, 0.0)
        return (self.sign, self.sign * self.logmag)

    def __eq__(self, other):
        if not isinstance(other, LogValue):
            return NotImplemented
        return self._key() == other._key()

    def __lt__(self, other):
        if not isinstance(other, LogValue):
            return NotImplemented
        return self._key() < other._key()

    def __repr__(self):
        if self.sign == 0:
            return "LogValue(0)"
        return f"LogValue({'+' if self.sign > 0 else '-'}exp({self.logmag:.12g}))"


def logs_to_values(logmags):
    """Wrap an array of log magnitudes (with -inf for zeros) as LogValues."""
    return [LogValue.from_log(float(x)) for x in np.asarray(logmags, dtype=float)]


def require_hermitian(M, rtol=HERMITIAN_RTOL):
    M = np.asarray(M, dtype=complex)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise NotHermitian("matrix must be square")
    scale = max(np.abs(M).max(), 1e-300)
    if np.abs(M - M.conj().T).max() > rtol * scale:
        raise NotHermitian("matrix is not Hermitian within tolerance")
    return (M + M.conj().T) / 2.0


def spectral_decompose(M, rtol=HERMITIAN_RTOL):
    """Eigenvalues (decreasing) and matching unitary eigenvectors of a
    Hermitian matrix; ties keep the ascending original eigh order."""
    H = require_hermitian(M, rtol)
    vals, vecs = np.linalg.eigh(H)
    order = np.argsort(-vals, kind="stable")
    return vals[order], vecs[:, order]


@dataclass(frozen=True)
class PsdMatrix:
    """A positive semidefinite matrix in spectral form.

    eigenvalues are decreasing and nonnegative; column i of eigenvectors is
    the unit eigenvector for eigenvalues[i].
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def __post_init__(self):
        vals = np.array(self.eigenvalues, dtype=float, copy=True)
        vecs = np.array(self.eigenvectors, dtype=complex, copy=True)
        if vals.ndim != 1 or vecs.ndim != 2:
            raise BadSpectrum("eigenvalues must be a vector, eigenvectors a matrix")
        d = vals.shape[0]
        if d == 0 or vecs.shape != (d, d):
            raise BadSpectrum("spectral form needs d eigenvalues and a d-by-d basis")
        if d > MAX_DIM:
            raise DimensionTooLarge(f"dimension {d} exceeds the supported cap {MAX_DIM}")
        if np.any(vals < 0):
            raise BadSpectrum("eigenvalues must be nonnegative")
        if np.any(np.diff(vals) > 0):
            raise BadSpectrum("eigenvalues must be in decreasing order")
        gram = vecs.conj().T @ vecs
        if np.abs(gram - np.eye(d)).max() > 1e-10:
            raise BadSpectrum("eigenvector matrix is not unitary within 1e-10")
        vals.setflags(write=False)
        vecs.setflags(write=False)
        object.__setattr__(self, "eigenvalues", vals)
        object.__setattr__(self, "eigenvectors", vecs)

    @classmethod
    def from_matrix(cls, M, rtol=HERMITIAN_RTOL):
        vals, vecs = spectral_decompose(M, rtol)
        top = max(vals[0], 0.0)
        floor = -MATERIAL_NEG_RTOL * max(top, 1e-300)
        if vals[-1] < floor:
            raise MateriallyNegative(
                f"most negative eigenvalue {vals[-1]:.3e} is material at scale {top:.3e}"
            )
        clamp = CLAMP_RTOL * top
        vals = np.where(vals > clamp, vals, 0.0)
        return cls(vals, vecs)

    @classmethod
    def from_diagonal(cls, diag):
        diag = np.asarray(diag, dtype=float)
        order = np.argsort(-diag, kind="stable")
        vals = diag[order]
        if np.any(vals < 0):
            raise BadSpectrum("diagonal entries must be nonnegative")
        vecs = np.eye(len(diag), dtype=complex)[:, order]
        return cls(vals, vecs)

    @property
    def d(self):
        return self.eigenvalues.shape[0]

    @property
    def rank(self):
        return int(np.count_nonzero(self.eigenvalues))

    def log_eigenvalues(self):
        with np.errstate(divide="ignore"):
            return np.where(
                self.eigenvalues > 0, np.log(np.where(self.eigenvalues > 0, self.eigenvalues, 1.0)), NEG_INF
            )

    def matrix(self):
        M = (self.eigenvectors * self.eigenvalues) @ self.eigenvectors.conj().T
        return (M + M.conj().T) / 2.0

    def power(self, t):
        """Matrix power A**t on the support; t < 0 uses the pseudoinverse."""
        vals = np.zeros_like(self.eigenvalues)
        pos = self.eigenvalues > 0
        vals[pos] = self.eigenvalues[pos] ** t
        order = np.argsort(-vals, kind="stable")
        return PsdMatrix(vals[order], self.eigenvectors[:, order])

    def support_projection(self):
        Vr = self.eigenvectors[:, : self.rank]
        P = Vr @ Vr.conj().T
        return (P + P.conj().T) / 2.0

    def shifted(self, eps_abs):
        """Same eigenbasis with eps_abs added to every eigenvalue."""
        return PsdMatrix(self.eigenvalues + eps_abs, self.eigenvectors)


def _check_pair(A, B):
    if not isinstance(A, PsdMatrix) or not isinstance(B, PsdMatrix):
        raise TypeError("expected PsdMatrix operands")
    if A.d != B.d:
        raise DimensionMismatch(f"dimensions differ: {A.d} vs {B.d}")


def _embed_left_vectors(U_small, d, ra, rank):
    """Lift left singular vectors of the support block to the full space and
    complete them to a unitary basis (support complement first, kernel last)."""
    U = np.zeros((d, rank), dtype=complex)
    U[:ra, :] = U_small
    if rank == d:
        return U
    if rank < ra:
        top = _xsvd.complete_columns(U_small, ra)[:, rank:]
        pad = np.zeros((d, ra - rank), dtype=complex)
        pad[:ra, :] = top
        U = np.hstack([U, pad])
    if ra < d:
        ker = np.zeros((d, d - ra), dtype=complex)
        ker[ra:, :] = np.eye(d - ra)
        U = np.hstack([U, ker])
    return U


def _zp_core(A, B, p):
    """Eigen-logs (decreasing, -inf padded) of Z_p and its eigenvector basis,
    expressed in the ambient coordinates."""
    _check_pair(A, B)
    p = float(p)
    if not p > 0:
        raise ValueError("p must be positive")
    d = A.d
    ra, rb = A.rank, B.rank
    la = A.log_eigenvalues()
    lb = B.log_eigenvalues()
    if ra == 0 or rb == 0:
        return np.full(d, NEG_INF), np.eye(d, dtype=complex)
    Uab = _basis_overlap(A.eigenvectors, B.eigenvectors)
    core = Uab[:ra, :rb]
    G = _xsvd.from_scaled(core, (p / 2.0) * la[:ra], (p / 2.0) * lb[:rb])
    U_small, s_log, _, rank = _xsvd.graded_svd(G)
    lam_logs = np.concatenate([(2.0 / p) * s_log, np.full(d - rank, NEG_INF)])
    U = _embed_left_vectors(U_small, d, ra, rank)
    return lam_logs, A.eigenvectors @ U


def z_p_eigenvalues_numeric(A, B, p):
    """Eigenvalues of (A^(p/2) B^p A^(p/2))^(1/p), decreasing LogValues."""
    lam_logs, _ = _zp_core(A, B, p)
    return logs_to_values(lam_logs)


def z_p_matrix_numeric(A, B, p):
    """(A^(p/2) B^p A^(p/2))^(1/p) as a PsdMatrix."""
    lam_logs, vecs = _zp_core(A, B, p)
    with np.errstate(over="raise"):
        vals = np.where(lam_logs > NEG_INF, np.exp(lam_logs), 0.0)
    return PsdMatrix(vals, vecs)


def _basis_overlap(V, W):
    """V^H W with sub-roundoff entries snapped to exact zero.

    The float product of two stored isometries carries absolute noise of
    order d*eps where the true entry is zero; downstream consumers raise
    overlap entries to powers that grow with p, which amplifies such false
    nonzeros without bound, so they must be removed at the source.  True
    entries this small are below the product's own noise floor anyway."""
    d = V.shape[0]
    if V is W or np.array_equal(V, W):
        return np.eye(V.shape[1], dtype=complex)
    U = V.conj().T @ W
    cut = 16.0 * d * np.finfo(float).eps
    return np.where(np.abs(U) <= cut, 0.0, U)


def _gp_core(base, other, p):
    """Eigen-logs and eigenvectors of (base^p # other^p)^(2/p); base must be
    positive definite.  The mean is symmetric, so callers may swap arguments
    to put an invertible matrix in the base slot."""
    d = base.d
    la = base.log_eigenvalues()
    lb = other.log_eigenvalues()
    rb = other.rank
    if rb == 0:
        return np.full(d, NEG_INF), np.eye(d, dtype=complex)
    Uab = _basis_overlap(base.eigenvectors, other.eigenvectors)
    GN = _xsvd.from_scaled(Uab[:, :rb], -(p / 2.0) * la, (p / 2.0) * lb[:rb])
    UN, sN, VN, rankN = _xsvd.graded_svd(GN)
    UNg = _xsvd.left_factor_graded(GN, sN, VN, UN)
    GT = _xsvd.GMat(
        UNg.man,
        UNg.exp + (p / 2.0) * la[:, None] + 0.5 * sN[None, :],
        normalized=True,
    )
    UT, sT, _, rankT = _xsvd.graded_svd(GT)
    lam_logs = np.concatenate([(4.0 / p) * sT, np.full(d - rankT, NEG_INF)])
    U = _embed_left_vectors(UT, d, d, rankT)
    return lam_logs, base.eigenvectors @ U


def _canonical_first(A, B):
    """Deterministic argument order so symmetric operations evaluate both
    orders through the identical computation."""
    ka = (tuple(A.eigenvalues), A.eigenvectors.tobytes())
    kb = (tuple(B.eigenvalues), B.eigenvectors.tobytes())
    return ka >= kb


def _gp_eig_pair(A, B, p):
    _check_pair(A, B)
    p = float(p)
    if not p > 0:
        raise ValueError("p must be positive")
    a_pd = A.rank == A.d
    b_pd = B.rank == B.d
    if a_pd and b_pd:
        if _canonical_first(A, B):
            return _gp_core(A, B, p)
        return _gp_core(B, A, p)
    if a_pd:
        return _gp_core(A, B, p)
    if b_pd:
        return _gp_core(B, A, p)
    if not _canonical_first(A, B):
        A, B = B, A
    return _gp_singular_pair(A, B, p)


def _gp_singular_pair(A, B, p):
    """Shrinking-shift limit for a pair with no invertible member: evaluate at
    a few shifts, then accept the geometric-ratio extrapolation only if its
    own error estimate is small."""
    d = A.d
    scale = max(A.eigenvalues[0], B.eigenvalues[0], 1e-300)
    mats = []
    for eps in DEFAULT_EPSILONS:
        Ae = A.shifted(eps * max(A.eigenvalues[0], scale * 1e-6))
        Be = B.shifted(eps * max(B.eigenvalues[0], scale * 1e-6))
        logs, vecs = _gp_core(Ae, Be, p)
        vals = np.where(logs > NEG_INF, np.exp(logs), 0.0)
        mats.append((vecs * vals) @ vecs.conj().T)
    X, resid = _geometric_extrapolate(mats)
    vals, vecs = spectral_decompose(X)
    floor = 1e-2 * A.eigenvalues[0] * B.eigenvalues[0]
    if resid > 1e-6 * max(vals[0], floor):
        raise RegularizationDiverged(
            f"shift extrapolation residual {resid:.3e} too large at scale {max(vals[0], floor):.3e}"
        )
    vals = np.where(vals > CLAMP_RTOL * max(vals[0], 1e-300), vals, 0.0)
    with np.errstate(divide="ignore"):
        logs = np.where(vals > 0, np.log(np.where(vals > 0, vals, 1.0)), NEG_INF)
    return logs, vecs


def _geometric_extrapolate(mats):
    """Extrapolate a sequence X_k -> X assuming geometric increments.

    Returns (X_estimate, residual_estimate); exact for X_k = X + c r**k.
    """
    X1, X2, X3 = mats[-3], mats[-2], mats[-1]
    D1 = X2 - X1
    D2 = X3 - X2
    n1 = np.linalg.norm(D1, 2)
    n2 = np.linalg.norm(D2, 2)
    if n2 == 0:
        return X3, 0.0
    if n1 == 0 or n2 >= n1:
        raise RegularizationDiverged("shift sequence is not settling")
    theta = n2 / n1
    X = X3 + D2 * (theta / (1.0 - theta))
    resid = n2 * theta / (1.0 - theta)
    return (X + X.conj().T) / 2.0, resid


def g_p_eigenvalues_numeric(A, B, p):
    """Eigenvalues of (A^p # B^p)^(2/p), decreasing LogValues."""
    logs, _ = _gp_eig_pair(A, B, p)
    return logs_to_values(logs)


def g_p_matrix_numeric(A, B, p):
    """(A^p # B^p)^(2/p) as a PsdMatrix, where # is the geometric mean."""
    logs, vecs = _gp_eig_pair(A, B, p)
    with np.errstate(over="raise"):
        vals = np.where(logs > NEG_INF, np.exp(logs), 0.0)
    return PsdMatrix(vals, vecs)


def chain_eigenvalues_numeric(mats, p):
    """Eigenvalues of ((A_1^(p/2) ... A_m^(p/2))(...)^*)^(1/p) for a tuple of
    PsdMatrix factors, decreasing LogValues.  With two factors this is the
    same spectrum as z_p_eigenvalues_numeric(A_1, A_2, p)."""
    mats = list(mats)
    if len(mats) < 2:
        raise ValueError("need at least two factors")
    d = mats[0].d
    for M in mats:
        if not isinstance(M, PsdMatrix):
            raise TypeError("expected PsdMatrix operands")
        if M.d != d:
            raise DimensionMismatch("chain factors must share one dimension")
    if len(mats) == 2:
        return z_p_eigenvalues_numeric(mats[0], mats[1], p)
    p = float(p)
    if not p > 0:
        raise ValueError("p must be positive")
    if any(M.rank == 0 for M in mats):
        return logs_to_values(np.full(d, NEG_INF))
    first = mats[0]
    ra = first.rank
    G = _xsvd.from_scaled(
        np.eye(ra, dtype=complex),
        (p / 2.0) * first.log_eigenvalues()[:ra],
        np.zeros(ra),
    )
    carrier = first.eigenvectors[:, :ra]
    for M in mats[1:]:
        r = M.rank
        link = _basis_overlap(carrier, M.eigenvectors[:, :r])
        G = _xsvd.matmul(G, _xsvd.from_scaled(link, np.zeros(link.shape[0]), (p / 2.0) * M.log_eigenvalues()[:r]))
        carrier = M.eigenvectors[:, :r]
    U, s_log, _, rank = _xsvd.graded_svd(G)
    logs = np.concatenate([(2.0 / p) * s_log, np.full(d - rank, NEG_INF)])
    return logs_to_values(logs)
