"""Operator means, their small-p and large-p limits, and Renyi divergences.

A Kubo-Ando mean is described by its representing function f (positive,
operator monotone, f(1) = 1) and acts on a PD base through
A^{1/2} f(A^{-1/2} B A^{-1/2}) A^{1/2}.  Singular inputs are handled with a
vanishing-shift sequence and geometric extrapolation, matching the
regularized definition of means on PSD operators.

The small-p limits live on the intersection of the supports: compressing
the logarithms to that subspace and exponentiating the weighted sum gives
the limit of (A^p sigma B^p)^(1/p).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterator, Optional, Sequence

import numpy as np

from . import _xsvd
from .errors import (
    AlphaOne,
    DimensionMismatch,
    NotConverged,
    NotDensity,
    NotProjection,
    RegularizationDiverged,
    ZZero,
)
from .matnum import (
    DEFAULT_P_SCHEDULE,
    NEG_INF,
    LogValue,
    PsdMatrix,
    _check_pair,
    _geometric_extrapolate,
    g_p_eigenvalues_numeric,
    g_p_matrix_numeric,
    logs_to_values,
    require_hermitian,
    spectral_decompose,
)

DIFF_STEP = 1e-6


@dataclass(frozen=True)
class OperatorMeanSpec:
    """A mean described by its representing function and weight alpha.

    alpha = f'(1) is the arithmetic weight of the second operand; the three
    builtin families cover the weighted arithmetic, harmonic, and (for
    alpha = 1/2) geometric means.
    """

    name: str
    f: Callable[[float], float]
    alpha: float

    def __post_init__(self):
        if abs(self.f(1.0) - 1.0) > 1e-12:
            raise ValueError(f"mean '{self.name}' must satisfy f(1) = 1")
        if not -1e-9 <= self.alpha <= 1.0 + 1e-9:
            raise ValueError(f"mean weight {self.alpha} outside [0, 1]")

    @classmethod
    def from_function(cls, name: str, f: Callable[[float], float]) -> "OperatorMeanSpec":
        alpha = (f(1.0 + DIFF_STEP) - f(1.0 - DIFF_STEP)) / (2.0 * DIFF_STEP)
        return cls(name=name, f=f, alpha=alpha)

    @classmethod
    def arithmetic(cls, alpha: float = 0.5) -> "OperatorMeanSpec":
        a = float(alpha)
        return cls(name=f"arithmetic[{a:g}]", f=lambda x: (1.0 - a) + a * x, alpha=a)

    @classmethod
    def harmonic(cls, alpha: float = 0.5) -> "OperatorMeanSpec":
        a = float(alpha)
        return cls(
            name=f"harmonic[{a:g}]",
            f=lambda x: x / ((1.0 - a) * x + a) if x > 0 else 0.0,
            alpha=a,
        )

    @classmethod
    def geometric(cls) -> "OperatorMeanSpec":
        return cls(name="geometric", f=math.sqrt, alpha=0.5)


def _apply_f_psd(M: np.ndarray, f: Callable[[float], float]) -> np.ndarray:
    vals, vecs = spectral_decompose(M)
    fv = np.asarray([f(max(float(v), 0.0)) for v in vals], dtype=float)
    return (vecs * fv) @ vecs.conj().T


def _mean_pd(A: PsdMatrix, B: PsdMatrix, spec: OperatorMeanSpec) -> np.ndarray:
    Ah = A.power(0.5).matrix()
    Aih = A.power(-0.5).matrix()
    mid = Aih @ B.matrix() @ Aih
    mid = 0.5 * (mid + mid.conj().T)
    return Ah @ _apply_f_psd(mid, spec.f) @ Ah


def operator_mean(A: PsdMatrix, B: PsdMatrix, spec: OperatorMeanSpec) -> PsdMatrix:
    """The mean of A and B described by spec.

    PD first operand: direct evaluation through the representing function.
    Singular first operand: arithmetic and harmonic means use their exact
    PSD forms; other means are evaluated on shifted inputs and the shift is
    extrapolated away (RegularizationDiverged when that fails to settle).
    """
    _check_pair(A, B)
    d = A.d
    if spec.alpha <= 0.0:
        return A
    if spec.alpha >= 1.0:
        return B
    if A.rank == d:
        M = _mean_pd(A, B, spec)
        return PsdMatrix.from_matrix(0.5 * (M + M.conj().T))
    name_root = spec.name.split("[")[0]
    if name_root == "arithmetic":
        M = (1.0 - spec.alpha) * A.matrix() + spec.alpha * B.matrix()
        return PsdMatrix.from_matrix(0.5 * (M + M.conj().T))
    if name_root == "harmonic":
        # weighted parallel sum X(X+Y)^+Y with X = A/(1-alpha), Y = B/alpha
        X = A.matrix() / (1.0 - spec.alpha)
        Y = B.matrix() / spec.alpha
        S = PsdMatrix.from_matrix(X + Y)
        M = X @ S.power(-1.0).matrix() @ Y
        return PsdMatrix.from_matrix(0.5 * (M + M.conj().T))
    if name_root == "geometric" and B.rank == d:
        M = _mean_pd(B, A, spec)
        return PsdMatrix.from_matrix(0.5 * (M + M.conj().T))
    scale = max(A.eigenvalues[0], B.eigenvalues[0], 1e-300)
    shifted = []
    for eps in (1e-6, 1e-8, 1e-10):
        As = A.shifted(eps * scale)
        Bs = B.shifted(eps * scale)
        shifted.append(_mean_pd(As, Bs, spec))
    est, resid = _geometric_extrapolate(shifted)
    est = 0.5 * (est + est.conj().T)
    vals, vecs = spectral_decompose(est)
    norms = [float(np.linalg.norm(M, 2)) for M in shifted]
    # a vanishing limit leaves an estimate below the extrapolation noise
    # while the raw shift values keep decaying geometrically; that pattern
    # certifies the zero matrix, which the residual rule alone cannot
    decaying = norms[-1] <= 0.5 * norms[-2] and norms[-2] <= 0.5 * norms[-3]
    if decaying and vals[0] <= max(resid, 1e-14 * scale):
        return PsdMatrix(np.zeros(d), np.eye(d, dtype=complex))
    # negativity must be judged against the input scale rather than the
    # (possibly tiny) output scale
    floor = max(10.0 * resid, 1e-9 * scale)
    if vals[-1] < -floor:
        raise RegularizationDiverged(
            f"shift sequence left negative eigenvalue {vals[-1]:.3e}"
        )
    out = PsdMatrix(np.maximum(vals, 0.0), vecs)
    tol = 1e-6 * max(out.eigenvalues[0], 1e-2 * scale)
    if resid > tol:
        raise RegularizationDiverged(
            f"shift sequence residual {resid:.3e} exceeds {tol:.3e}"
        )
    return out


@dataclass(frozen=True)
class SupportProjection:
    """Orthogonal projection onto the intersection of two supports."""

    matrix: np.ndarray
    rank: int

    def __post_init__(self):
        P = np.asarray(self.matrix, dtype=complex)
        if np.max(np.abs(P - P.conj().T)) > 1e-10:
            raise NotProjection("support meet lost Hermitian symmetry")
        if np.max(np.abs(P @ P - P)) > 1e-8:
            raise NotProjection("support meet is not idempotent")
        P = P.copy()
        P.setflags(write=False)
        object.__setattr__(self, "matrix", P)

    def frame(self) -> np.ndarray:
        """Orthonormal columns spanning the projected subspace."""
        vals, vecs = spectral_decompose(self.matrix)
        return vecs[:, : self.rank]


def support_meet(A: PsdMatrix, B: PsdMatrix) -> SupportProjection:
    """Projection onto range(A) intersected with range(B).

    Eigenvectors of A^0 + B^0 with eigenvalue 2 span the meet; the cut
    sits at 2 - 1e-8.
    """
    _check_pair(A, B)
    S = A.support_projection() + B.support_projection()
    vals, vecs = spectral_decompose(S)
    keep = vals >= 2.0 - 1e-8
    r = int(np.sum(keep))
    Q = vecs[:, :r]
    return SupportProjection(matrix=Q @ Q.conj().T, rank=r)


def generalized_log(A: PsdMatrix) -> np.ndarray:
    """Support-restricted logarithm: log of the positive eigenvalues on the
    support, zero on the kernel."""
    d = A.d
    r = A.rank
    logs = A.log_eigenvalues()[:r]
    V = A.eigenvectors[:, :r]
    return (V * logs) @ V.conj().T


def _exp_on_subspace(H_small: np.ndarray, Q: np.ndarray) -> PsdMatrix:
    vals, vecs = np.linalg.eigh(0.5 * (H_small + H_small.conj().T))
    d = Q.shape[0]
    r = Q.shape[1]
    frame = Q @ vecs
    with np.errstate(over="raise"):
        ev = np.exp(vals[::-1])
    evecs = np.zeros((d, d), dtype=complex)
    evecs[:, :r] = frame[:, ::-1]
    if r < d:
        # complete with the orthogonal complement for the zero eigenvalues
        full, _, _ = np.linalg.svd(np.eye(d) - Q @ Q.conj().T)
        evecs[:, r:] = full[:, : d - r]
    vals_full = np.concatenate([ev, np.zeros(d - r)])
    return PsdMatrix(vals_full, evecs)


def lie_trotter_limit(A: PsdMatrix, B: PsdMatrix) -> PsdMatrix:
    """Small-p limit of (A^{p/2} B^p A^{p/2})^{1/p}.

    Both logarithms enter with full weight: the limit is the exponential of
    the compressed log sum on the support meet, AB for commuting inputs.
    """
    return weighted_lt_limit(A, B, OperatorMeanSpec.arithmetic(0.5), normalization="2/p")


def weighted_lt_limit(
    A: PsdMatrix,
    B: PsdMatrix,
    spec: OperatorMeanSpec,
    normalization: str = "1/p",
) -> PsdMatrix:
    """Limit of (A^p sigma B^p)^(1/p) as p decreases to zero.

    The weight alpha = f'(1) of the mean is all that survives: the limit is
    exp((1 - alpha) log A + alpha log B) compressed to the support meet.
    With normalization "2/p" (used for the squared geometric-mean scaling)
    the exponent doubles.  alpha = 0 or 1 returns the corresponding input.
    """
    _check_pair(A, B)
    if normalization not in ("1/p", "2/p"):
        raise ValueError(f"unknown normalization {normalization!r}")
    if spec.alpha <= 0.0:
        return A
    if spec.alpha >= 1.0:
        return B
    P0 = support_meet(A, B)
    if P0.rank == 0:
        return PsdMatrix(np.zeros(A.d), np.eye(A.d, dtype=complex))
    Q = P0.frame()
    H = (1.0 - spec.alpha) * (Q.conj().T @ generalized_log(A) @ Q) + spec.alpha * (
        Q.conj().T @ generalized_log(B) @ Q
    )
    if normalization == "2/p":
        H = 2.0 * H
    return _exp_on_subspace(H, Q)


def _stacked_power_logs(mats: Sequence[PsdMatrix], p: float, sign: float, frame=None):
    """Graded row-stack of the (sign * p/2)-powers of the factors.

    Returns the graded matrix whose squared singular values are the
    eigenvalues of sum_i A_i^(sign*p), optionally compressed to frame^*.
    """
    blocks = []
    exps = []
    for M in mats:
        r = M.rank
        V = M.eigenvectors[:, :r]
        core = V.conj().T if frame is None else V.conj().T @ frame
        blocks.append(core)
        exps.append(sign * (p / 2.0) * M.log_eigenvalues()[:r])
    stack = np.vstack(blocks)
    row_exp = np.concatenate(exps)
    return _xsvd.from_scaled(stack, row_exp, np.zeros(stack.shape[1]))


def _sup_at_p(A: PsdMatrix, B: PsdMatrix, p: float):
    """Eigen-logs and eigenvectors of (A^p + B^p)^(1/p)."""
    d = A.d
    G = _stacked_power_logs([A, B], p, +1.0)
    _, s_log, V, rank = _xsvd.graded_svd(G)
    logs = np.concatenate([(2.0 / p) * s_log, np.full(d - rank, NEG_INF)])
    return logs, _xsvd.complete_columns(V, d)


def _inf_at_p(A: PsdMatrix, B: PsdMatrix, p: float, Q: np.ndarray):
    """Eigen-logs and eigenvectors of (A^p !_{1/2} B^p)^(1/p) on the meet.

    The harmonic mean of PSD powers equals the inverse of the compressed
    average of inverse powers on the support meet; the average of the two
    inverse powers is a graded Gram square, so its eigenvalues come from
    one graded SVD.  log 2 spreads the averaging weight.
    """
    d = A.d
    r = Q.shape[1]
    G = _stacked_power_logs([A, B], p, -1.0, frame=Q)
    _, s_log, V, rank = _xsvd.graded_svd(G)
    if rank < r:
        raise NotConverged("inverse-power compression lost rank")
    # eigenvalues of the compressed average are exp(2 s - log 2), inverted
    # and re-rooted: logs of the mean = -(2 s - log 2), decreasing order
    inner = -(2.0 * s_log - math.log(2.0))
    logs = np.concatenate([inner[::-1] / p, np.full(d - r, NEG_INF)])
    vecs = Q @ V[:, ::-1]
    return logs, vecs


def _aitken_window(x1: np.ndarray, x2: np.ndarray, x3: np.ndarray) -> np.ndarray:
    est = np.array(x3, dtype=float)
    for i in range(est.size):
        if not np.isfinite(x3[i]):
            continue
        d1 = x2[i] - x1[i]
        d2 = x3[i] - x2[i]
        if not (np.isfinite(d1) and np.isfinite(d2)):
            continue
        if abs(d2) < 1e-13 * max(1.0, abs(x3[i])):
            continue
        if abs(d1) <= abs(d2):
            continue
        theta = d2 / d1
        est[i] = x3[i] + d2 * theta / (1.0 - theta)
    return est


def _extrapolate_logs(series: np.ndarray, schedule: Sequence[float]):
    """Windowed extrapolation of per-eigenvalue logs along the schedule.

    Each window of three consecutive schedule points yields one estimate of
    the limit; the residual is the Cauchy increment between the last two
    windows.  Entries at -inf throughout are zero eigenvalues (residual 0);
    entries of mixed finiteness get an infinite residual.
    """
    S = np.asarray(series, dtype=float)
    n, m = S.shape
    finite = np.isfinite(S)
    est_prev = _aitken_window(S[-4], S[-3], S[-2]) if n >= 4 else None
    est = _aitken_window(S[-3], S[-2], S[-1])
    resid = np.zeros(m)
    for i in range(m):
        col = finite[:, i]
        if not col.any():
            continue
        if not col.all():
            resid[i] = np.inf
            continue
        if est_prev is None:
            resid[i] = abs(S[-1, i] - S[-2, i])
        else:
            resid[i] = abs(est[i] - est_prev[i])
    return est, resid


def _lowner_leq(X: np.ndarray, Y: np.ndarray, slack: float) -> bool:
    H = 0.5 * (Y - X + (Y - X).conj().T)
    w = np.linalg.eigvalsh(H)
    return bool(w[0] >= -slack)


def spectral_sup(
    A: PsdMatrix, B: PsdMatrix, p_schedule: Sequence[float] = DEFAULT_P_SCHEDULE
) -> PsdMatrix:
    """Large-p limit of (A^p + B^p)^(1/p): the spectral join of A and B.

    Extrapolates the schedule tail and verifies a Cauchy criterion at 1e-6
    in the log domain (NotConverged otherwise).  The result dominates both
    inputs in the Loewner order up to the same tolerance.
    """
    _check_pair(A, B)
    d = A.d
    schedule = sorted(float(p) for p in p_schedule)
    if len(schedule) < 3:
        raise NotConverged("schedule must contain at least three points")
    logs_series = []
    vecs_last = None
    for p in schedule:
        logs, vecs = _sup_at_p(A, B, p)
        logs_series.append(logs)
        vecs_last = vecs
    est, resid = _extrapolate_logs(np.asarray(logs_series), schedule)
    finite = np.isfinite(est)
    if np.any(resid[finite] > 1e-6):
        raise NotConverged(
            f"join schedule residual {float(np.max(resid[finite])):.3e} above 1e-6"
        )
    rank = int(np.sum(finite))
    # extrapolated estimates can cross the finite-p ordering, so the
    # finite block is re-sorted jointly with its eigenvector columns
    order = np.argsort(-est[:rank], kind="stable")
    with np.errstate(over="raise"):
        vals = np.concatenate([np.exp(est[order]), np.zeros(d - rank)])
    V = np.array(vecs_last)
    V[:, :rank] = vecs_last[:, order]
    out = PsdMatrix(vals, V)
    slack = 1e-6 * max(vals[0], 1.0)
    if not (_lowner_leq(A.matrix(), out.matrix(), slack) and _lowner_leq(B.matrix(), out.matrix(), slack)):
        raise NotConverged("join estimate fails the domination check")
    return out


def spectral_inf(
    A: PsdMatrix, B: PsdMatrix, p_schedule: Sequence[float] = DEFAULT_P_SCHEDULE
) -> PsdMatrix:
    """Large-p limit of (A^p !_{1/2} B^p)^(1/p): the spectral meet.

    Supported on the intersection of the input supports; dominated by both
    inputs up to the convergence tolerance.
    """
    _check_pair(A, B)
    d = A.d
    schedule = sorted(float(p) for p in p_schedule)
    if len(schedule) < 3:
        raise NotConverged("schedule must contain at least three points")
    P0 = support_meet(A, B)
    if P0.rank == 0:
        return PsdMatrix(np.zeros(d), np.eye(d, dtype=complex))
    Q = P0.frame()
    logs_series = []
    vecs_last = None
    for p in schedule:
        logs, vecs = _inf_at_p(A, B, p, Q)
        logs_series.append(logs)
        vecs_last = vecs
    est, resid = _extrapolate_logs(np.asarray(logs_series), schedule)
    finite = np.isfinite(est)
    if np.any(resid[finite] > 1e-6):
        raise NotConverged(
            f"meet schedule residual {float(np.max(resid[finite])):.3e} above 1e-6"
        )
    rank = int(np.sum(finite))
    # extrapolated estimates can cross the finite-p ordering, so the
    # finite block is re-sorted jointly with its eigenvector columns
    order = np.argsort(-est[:rank], kind="stable")
    with np.errstate(over="raise"):
        vals = np.concatenate([np.exp(est[order]), np.zeros(d - rank)])
    d_r = Q.shape[1]
    vecs = np.zeros((d, d), dtype=complex)
    vecs[:, :rank] = vecs_last[:, order]
    if rank < d_r:
        vecs[:, rank:d_r] = vecs_last[:, rank:d_r]
    if d_r < d:
        comp, _, _ = np.linalg.svd(np.eye(d) - Q @ Q.conj().T)
        vecs[:, d_r:] = comp[:, : d - d_r]
    out = PsdMatrix(vals, vecs)
    slack = 1e-6 * max(A.eigenvalues[0], B.eigenvalues[0], 1.0)
    if not (_lowner_leq(out.matrix(), A.matrix(), slack) and _lowner_leq(out.matrix(), B.matrix(), slack)):
        raise NotConverged("meet estimate fails the domination check")
    return out


@dataclass(frozen=True)
class G2Limit:
    """Large-p limit of (A^p # B^p)^(2/p) for 2x2 inputs."""

    matrix: np.ndarray
    eigenvalues: np.ndarray
    branch: str
    normalization_derived: bool = False

    def __iter__(self) -> Iterator:
        return iter((self.matrix, self.eigenvalues))


def g_p_limit_2x2(A: PsdMatrix, B: PsdMatrix, minor_tol: float = 1e-10) -> G2Limit:
    """Closed-form limit of (A^p # B^p)^(2/p) for 2x2 PSD pairs.

    Branches on the zero pattern of the eigenvector overlap and on input
    ranks.  The generic PD branch has eigenvalues (max, min) of the two
    antidiagonal products; its eigenframe is the one of whichever input has
    the larger determinant-normalized top eigenvalue, which is also the
    frame of the spectral join of the normalized pair.  Branches reached by
    rescaling a normalized statement are flagged normalization_derived.
    """
    _check_pair(A, B)
    if A.d != 2:
        raise DimensionMismatch("closed form is specific to 2x2 inputs")
    a = A.eigenvalues
    b = B.eigenvalues
    V = A.eigenvectors
    W = B.eigenvectors
    U = V.conj().T @ W
    if A.rank == 0 or B.rank == 0:
        return G2Limit(np.zeros((2, 2), dtype=complex), np.zeros(2), branch="zero-input")
    if abs(U[0, 1]) <= minor_tol:
        vals = np.array([a[0] * b[0], a[1] * b[1]])
        M = (V * vals) @ V.conj().T
        return G2Limit(M, vals, branch="aligned")
    if abs(U[0, 0]) <= minor_tol:
        cross = np.array([a[0] * b[1], a[1] * b[0]])
        order = np.argsort(-cross, kind="stable")
        vals = cross[order]
        vecs = V[:, order]
        M = (vecs * vals) @ vecs.conj().T
        return G2Limit(M, vals, branch="antialigned")
    if A.rank == 1 and B.rank == 1:
        return G2Limit(np.zeros((2, 2), dtype=complex), np.zeros(2), branch="rank-one-pair")
    if A.rank == 1:
        # generic overlap, B positive definite: one positive eigenvalue
        vals = np.array([a[0] * b[1], 0.0])
        M = (V * vals) @ V.conj().T
        return G2Limit(M, vals, branch="first-rank-one", normalization_derived=True)
    if B.rank == 1:
        vals = np.array([a[1] * b[0], 0.0])
        M = (W * vals) @ W.conj().T
        return G2Limit(M, vals, branch="second-rank-one", normalization_derived=True)
    la = A.log_eigenvalues()
    lb = B.log_eigenvalues()
    # Sign of the normalized-spread gap picks the frame; a tie makes the
    # eigenvalues equal, so either frame yields the same scalar matrix.
    spread_gap = (lb[0] - lb[1]) - (la[0] - la[1])
    cross = np.array([a[0] * b[1], a[1] * b[0]])
    vals = np.sort(cross)[::-1]
    vecs = W if spread_gap >= 0.0 else V
    M = (vecs * vals) @ vecs.conj().T
    return G2Limit(M, vals, branch="generic")


@dataclass(frozen=True)
class GLimitEstimate:
    """Extrapolated large-p behaviour of (A^p # B^p)^(2/p).

    Diagnostic only for d >= 3: existence of the matrix limit is not
    established there, so the estimate reports residuals and a monotone
    validation instead of asserting convergence.
    """

    eigenvalue_logs: np.ndarray
    eigenvalue_residuals: np.ndarray
    matrix_estimate: np.ndarray
    matrix_cauchy: np.ndarray
    monotone_ok: bool
    converged_looking: bool


def g_limit_estimate(
    A: PsdMatrix, B: PsdMatrix, p_schedule: Sequence[float] = DEFAULT_P_SCHEDULE
) -> GLimitEstimate:
    """Schedule sweep of the normalized geometric mean with extrapolation.

    Validates the decreasing log-majorization ordering along the schedule,
    extrapolates per-eigenvalue logs, and reports Cauchy increments of the
    matrix iterates.  Never asserts convergence of the matrix estimate.
    """
    _check_pair(A, B)
    schedule = sorted(float(p) for p in p_schedule)
    if len(schedule) < 3:
        raise NotConverged("schedule must contain at least three points")
    logs_series = []
    mats = []
    for p in schedule:
        vals = g_p_eigenvalues_numeric(A, B, p)
        logs_series.append([v.logmag if not v.is_zero else NEG_INF for v in vals])
        mats.append(g_p_matrix_numeric(A, B, p).matrix())
    logs_arr = np.asarray(logs_series)
    est, resid = _extrapolate_logs(logs_arr, schedule)
    monotone = True
    slack = 1e-8 * A.d
    for prev, cur in zip(logs_arr, logs_arr[1:]):
        csum_prev = np.cumsum(prev)
        csum_cur = np.cumsum(cur)
        mask = np.isfinite(csum_prev) & np.isfinite(csum_cur)
        if np.any(csum_cur[mask] > csum_prev[mask] + slack):
            monotone = False
    cauchy = np.asarray(
        [float(np.linalg.norm(b - a, 2)) for a, b in zip(mats, mats[1:])]
    )
    finite = np.isfinite(est)
    converged = bool(
        np.all(resid[finite] <= 1e-4)
        and (cauchy.size < 2 or cauchy[-1] <= 0.5 * cauchy[-2] + 1e-12)
    )
    return GLimitEstimate(
        eigenvalue_logs=est,
        eigenvalue_residuals=resid,
        matrix_estimate=mats[-1],
        matrix_cauchy=cauchy,
        monotone_ok=monotone,
        converged_looking=converged,
    )


def renyi_divergence(rho: PsdMatrix, sigma: PsdMatrix, alpha: float, z: float) -> float:
    """alpha-z Renyi divergence of two density matrices.

    D = log Tr (sigma^((1-alpha)/2z) rho^(alpha/z) sigma^((1-alpha)/2z))^z
    divided by (alpha - 1), computed in the log domain through the singular
    values of sigma^((1-alpha)/2z) rho^(alpha/2z).  Support-restricted
    powers are used throughout; when (1-alpha)/z < 0 the divergence is
    +inf unless range(rho) is contained in range(sigma).
    """
    _check_pair(rho, sigma)
    alpha = float(alpha)
    z = float(z)
    if alpha == 1.0:
        raise AlphaOne("the alpha = 1 divergence is the relative-entropy limit")
    if z == 0.0:
        raise ZZero("the z = 0 normalization is singular")
    for name, M in (("rho", rho), ("sigma", sigma)):
        if abs(float(np.sum(M.eigenvalues)) - 1.0) > 1e-10:
            raise NotDensity(f"{name} must have unit trace")
    u = alpha / (2.0 * z)
    v = (1.0 - alpha) / (2.0 * z)
    if v < 0.0:
        Ps = sigma.support_projection()
        Pr = rho.support_projection()
        if np.linalg.norm((np.eye(rho.d) - Ps) @ Pr, 2) > 1e-10:
            return math.inf
    if u < 0.0:
        Ps = sigma.support_projection()
        Pr = rho.support_projection()
        if np.linalg.norm((np.eye(rho.d) - Pr) @ Ps, 2) > 1e-10:
            return math.inf
    rr = rho.rank
    rs = sigma.rank
    core = sigma.eigenvectors[:, :rs].conj().T @ rho.eigenvectors[:, :rr]
    G = _xsvd.from_scaled(
        core, v * sigma.log_eigenvalues()[:rs], u * rho.log_eigenvalues()[:rr]
    )
    _, s_log, _, rank = _xsvd.graded_svd(G)
    if rank == 0:
        return math.inf if (alpha - 1.0) * z < 0 else -math.inf
    powered = 2.0 * z * s_log
    m = float(np.max(powered))
    log_tr = m + math.log(float(np.sum(np.exp(powered - m))))
    return log_tr / (alpha - 1.0)
