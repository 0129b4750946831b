"""Independent verification paths for the limit machinery.

Everything here recomputes quantities the main modules already provide, on
purpose: subset scans with no pruning and a separate determinant code,
large-p traces of the numeric approximants, and extrapolation of those
traces.  Tests compare the two routes; neither calls into the other's
internals.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from itertools import combinations
from typing import Optional, Sequence

import numpy as np

from .errors import BadCardinality, BadSpectrum, InsufficientPoints
from .matnum import (
    NEG_INF,
    LogValue,
    PsdMatrix,
    _check_pair,
    g_p_eigenvalues_numeric,
    g_p_matrix_numeric,
    z_p_eigenvalues_numeric,
    z_p_matrix_numeric,
)

DEFAULT_ORACLE_SCHEDULE = tuple(float(2 ** k) for k in range(6, 13))


def _thread_count() -> int:
    raw = os.environ.get("ANTITROTTER_THREADS", "1")
    try:
        n = int(raw)
    except ValueError:
        return 1
    return max(1, n)


@dataclass(frozen=True)
class ConvergenceTrace:
    """Per-p spectra of a matrix family, collected along a schedule.

    spectra_logs holds natural logs, one row per schedule point, sorted
    decreasingly within each row; -inf marks zero eigenvalues.
    """

    p_values: tuple
    spectra_logs: np.ndarray
    matrices: Optional[tuple] = None

    def __post_init__(self):
        ps = tuple(float(p) for p in self.p_values)
        object.__setattr__(self, "p_values", ps)
        logs = np.asarray(self.spectra_logs, dtype=float)
        object.__setattr__(self, "spectra_logs", logs)
        if len(ps) != logs.shape[0]:
            raise ValueError("one spectrum row per schedule point required")
        if any(not b > a for a, b in zip(ps, ps[1:])):
            raise ValueError("schedule must be strictly increasing")
        if self.matrices is not None and len(self.matrices) != len(ps):
            raise ValueError("one matrix per schedule point required")

    def spectra(self) -> list:
        from .matnum import logs_to_values

        return [logs_to_values(row) for row in self.spectra_logs]


@dataclass(frozen=True)
class ExtrapolationResult:
    """Limit estimate from a trace: per-eigenvalue logs, decay rates, and
    leftover Cauchy residuals."""

    limit_logs: np.ndarray
    rates: np.ndarray
    residuals: np.ndarray

    def score(self) -> float:
        finite = np.isfinite(self.limit_logs)
        if not np.any(finite):
            return 0.0
        return float(np.max(self.residuals[finite]))


def _det_cofactor(M: np.ndarray) -> complex:
    n = M.shape[0]
    if n == 1:
        return complex(M[0, 0])
    if n == 2:
        return complex(M[0, 0] * M[1, 1] - M[0, 1] * M[1, 0])
    total = 0.0 + 0.0j
    sign = 1.0
    for j in range(n):
        sub = np.delete(M[1:, :], j, axis=1)
        total += sign * M[0, j] * _det_cofactor(sub)
        sign = -sign
    return complex(total)


def _det_lu(M: np.ndarray) -> complex:
    A = np.array(M, dtype=complex)
    n = A.shape[0]
    det = 1.0 + 0.0j
    for k in range(n):
        piv = k + int(np.argmax(np.abs(A[k:, k])))
        if A[piv, k] == 0.0:
            return 0.0 + 0.0j
        if piv != k:
            A[[k, piv], :] = A[[piv, k], :]
            det = -det
        det *= A[k, k]
        A[k + 1:, k] = A[k + 1:, k] / A[k, k]
        A[k + 1:, k + 1:] -= np.outer(A[k + 1:, k], A[k, k + 1:])
    return complex(det)


def _det_independent(M: np.ndarray) -> complex:
    if M.shape[0] <= 4:
        return _det_cofactor(M)
    return _det_lu(M)


def brute_force_eta(A: PsdMatrix, B: PsdMatrix, k: int, minor_tol: float = 1e-10) -> LogValue:
    """Max of a_I * b_J over index pairs with a nonzero k-minor of V*W.

    Full enumeration with no ordering tricks; minors come from cofactor
    expansion (k <= 4) or a local partial-pivot LU.  The nonzero test is the
    same column-norm scaled cut the fast path applies.
    """
    _check_pair(A, B)
    d = A.d
    if not 0 <= k <= d:
        raise BadCardinality(f"cardinality {k} outside 0..{d}")
    if k == 0:
        return LogValue.from_real(1.0)
    U = A.eigenvectors.conj().T @ B.eigenvectors
    la = A.log_eigenvalues()
    lb = B.log_eigenvalues()
    colsq_all = np.abs(U) ** 2
    log_tol = math.log(minor_tol)
    best = NEG_INF
    for I in combinations(range(d), k):
        rows = np.asarray(I, dtype=np.intp)
        a_val = float(np.sum(la[rows]))
        if a_val == NEG_INF:
            continue
        colsq_rows = colsq_all[rows, :].sum(axis=0)
        for J in combinations(range(d), k):
            cols = np.asarray(J, dtype=np.intp)
            v = a_val + float(np.sum(lb[cols]))
            if not v > best:
                continue
            c = colsq_rows[cols]
            if np.any(c == 0.0):
                continue
            mag = abs(_det_independent(U[np.ix_(rows, cols)]))
            if mag == 0.0:
                continue
            if math.log(mag) <= log_tol + 0.5 * float(np.sum(np.log(c))):
                continue
            best = v
    if best == NEG_INF:
        return LogValue.from_log(NEG_INF)
    return LogValue.from_log(best)


def _map_schedule(fn, schedule):
    threads = _thread_count()
    if threads <= 1:
        return [fn(p) for p in schedule]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, schedule))


def collect_z_trace(
    A: PsdMatrix,
    B: PsdMatrix,
    p_schedule: Sequence[float] = DEFAULT_ORACLE_SCHEDULE,
    with_matrices: bool = False,
) -> ConvergenceTrace:
    """Numeric spectra of (A^{p/2} B^p A^{p/2})^{1/p} along the schedule."""
    schedule = tuple(float(p) for p in p_schedule)
    rows = _map_schedule(
        lambda p: np.asarray([v.logmag for v in z_p_eigenvalues_numeric(A, B, p)]),
        schedule,
    )
    mats = None
    if with_matrices:
        mats = tuple(_map_schedule(lambda p: z_p_matrix_numeric(A, B, p), schedule))
    return ConvergenceTrace(schedule, np.vstack(rows), mats)


def collect_g_trace(
    A: PsdMatrix,
    B: PsdMatrix,
    p_schedule: Sequence[float] = DEFAULT_ORACLE_SCHEDULE,
    with_matrices: bool = False,
) -> ConvergenceTrace:
    """Numeric spectra of (A^p # B^p)^{2/p} along the schedule."""
    schedule = tuple(float(p) for p in p_schedule)
    rows = _map_schedule(
        lambda p: np.asarray([v.logmag for v in g_p_eigenvalues_numeric(A, B, p)]),
        schedule,
    )
    mats = None
    if with_matrices:
        mats = tuple(_map_schedule(lambda p: g_p_matrix_numeric(A, B, p), schedule))
    return ConvergenceTrace(schedule, np.vstack(rows), mats)


def extrapolate(trace: ConvergenceTrace) -> ExtrapolationResult:
    """Accelerated limit of a trace whose tail decays like c * r^p.

    Subsets of three consecutive points each give one accelerated estimate;
    the residual is the change between the last two estimates (or the last
    raw increment when the trace has exactly three points).  The reported
    rate is the per-p contraction of the final window, 0 for a trace that
    has already settled.
    """
    S = trace.spectra_logs
    n, m = S.shape
    if n < 3:
        raise InsufficientPoints("need at least three schedule points")
    ps = trace.p_values

    def window(i3):
        x1, x2, x3 = S[i3 - 2], S[i3 - 1], S[i3]
        est = np.array(x3, dtype=float)
        theta = np.zeros(m)
        for i in range(m):
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
            t = d2 / d1
            theta[i] = abs(t)
            est[i] = x3[i] + d2 * t / (1.0 - t)
        return est, theta

    est, theta = window(n - 1)
    if n >= 4:
        prev, _ = window(n - 2)
        resid = np.abs(est - prev)
    else:
        resid = np.abs(S[-1] - S[-2])
    resid = np.where(np.isfinite(est), np.where(np.isfinite(resid), resid, np.inf), 0.0)
    finite_all = np.isfinite(S).all(axis=0)
    finite_any = np.isfinite(S).any(axis=0)
    resid[finite_any & ~finite_all] = np.inf
    gap = ps[-1] - ps[-2]
    rates = np.where(theta > 0.0, theta ** (1.0 / gap), 0.0)
    rates[~np.isfinite(est)] = 0.0
    return ExtrapolationResult(est, rates, resid)


def random_psd(seed, d: int, spectrum_spec) -> PsdMatrix:
    """Seeded PSD matrix with a Haar-distributed eigenbasis.

    spectrum_spec is either a sequence of d nonnegative eigenvalues or a
    mapping {"log_range": (lo, hi)} for a log-uniform draw.  The QR phase
    is fixed so identical seeds give identical matrices on any backend.
    """
    rng = np.random.default_rng(seed)
    if isinstance(spectrum_spec, dict):
        try:
            lo, hi = spectrum_spec["log_range"]
        except (KeyError, TypeError, ValueError):
            raise BadSpectrum("spectrum mapping must supply log_range=(lo, hi)")
        lo = float(lo)
        hi = float(hi)
        if not (lo > 0.0 and hi >= lo):
            raise BadSpectrum(f"log_range bounds must satisfy 0 < lo <= hi, got ({lo}, {hi})")
        vals = np.exp(rng.uniform(math.log(lo), math.log(hi), size=d))
    else:
        vals = np.asarray(list(spectrum_spec), dtype=float)
        if vals.shape != (d,):
            raise BadSpectrum(f"expected {d} eigenvalues, got shape {vals.shape}")
        if np.any(vals < 0.0) or not np.all(np.isfinite(vals)):
            raise BadSpectrum("eigenvalues must be finite and nonnegative")
    vals = np.sort(vals)[::-1]
    Z = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    Q, R = np.linalg.qr(Z)
    diag = np.diag(R)
    phase = diag / np.abs(diag)
    Q = Q * phase.conj()
    return PsdMatrix(vals, Q)
