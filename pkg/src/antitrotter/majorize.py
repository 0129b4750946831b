"""Log-majorization predicates and monotonicity checks along p-schedules.

All comparisons run in the log domain.  A spectrum is any decreasing
sequence of nonnegative reals, given as floats, as LogValue entries, or as
an array of natural-log magnitudes wrapped by SpectrumVector.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import LengthMismatch, BadSpectrum
from .matnum import (
    LogValue,
    NEG_INF,
    PsdMatrix,
    g_p_eigenvalues_numeric,
    z_p_eigenvalues_numeric,
)

DEFAULT_SLACK = 1e-10


@dataclass(frozen=True)
class SpectrumVector:
    """Decreasing nonnegative spectrum stored as natural-log magnitudes."""

    logs: np.ndarray

    def __post_init__(self):
        logs = np.asarray(self.logs, dtype=float)
        if logs.ndim != 1 or logs.size == 0:
            raise BadSpectrum("expected a nonempty 1-d spectrum")
        if np.any(np.isnan(logs)) or np.any(logs == np.inf):
            raise BadSpectrum("spectrum entries must be finite or zero")
        if np.any(logs[:-1] < logs[1:] - 1e-12 * np.maximum(1.0, np.abs(logs[1:]))):
            raise BadSpectrum("spectrum must be decreasing")
        object.__setattr__(self, "logs", logs)

    @classmethod
    def from_values(cls, values) -> "SpectrumVector":
        vals = list(values)
        if vals and isinstance(vals[0], LogValue):
            logs = [v.logmag if v.sign else NEG_INF for v in vals]
            return cls(np.asarray(logs, dtype=float))
        arr = np.asarray(vals, dtype=float)
        if np.any(arr < 0):
            raise BadSpectrum("spectrum entries must be nonnegative")
        with np.errstate(divide="ignore"):
            return cls(np.log(arr))

    @property
    def d(self) -> int:
        return self.logs.size

    def zero_count(self) -> int:
        return int(np.sum(np.isneginf(self.logs)))


def _coerce(x) -> SpectrumVector:
    if isinstance(x, SpectrumVector):
        return x
    if isinstance(x, PsdMatrix):
        return SpectrumVector(x.log_eigenvalues())
    return SpectrumVector.from_values(x)


def log_majorizes(x, y, slack: float = DEFAULT_SLACK) -> bool:
    """True when x sits below y: every leading log-product of x is at most
    the matching one of y, and the total products agree.

    Zeros compare through sign-0 conventions: a zero prefix product on the
    dominated side is below anything, and total-product equality requires
    the two spectra to carry the same number of zeros.
    """
    sx, sy = _coerce(x), _coerce(y)
    if sx.d != sy.d:
        raise LengthMismatch(f"spectra have lengths {sx.d} and {sy.d}")
    d = sx.d
    if sx.zero_count() != sy.zero_count():
        return False
    cx = np.cumsum(sx.logs)
    cy = np.cumsum(sy.logs)
    for k in range(d - 1):
        if np.isneginf(cx[k]):
            continue
        if np.isneginf(cy[k]):
            return False
        if cx[k] > cy[k] + slack:
            return False
    if np.isneginf(cx[-1]) and np.isneginf(cy[-1]):
        return True
    if np.isneginf(cx[-1]) or np.isneginf(cy[-1]):
        return False
    return bool(abs(cx[-1] - cy[-1]) <= slack)


def _worst_margin(x: SpectrumVector, y: SpectrumVector) -> float:
    """Largest amount by which a leading log-product of x exceeds that of y.

    Negative margins mean x sits below y with room to spare; the total
    product contributes through the absolute difference.
    """
    cx = np.cumsum(x.logs)
    cy = np.cumsum(y.logs)
    worst = -np.inf
    for k in range(x.d - 1):
        if np.isneginf(cx[k]) and np.isneginf(cy[k]):
            continue
        if np.isneginf(cx[k]):
            continue
        if np.isneginf(cy[k]):
            return np.inf
        worst = max(worst, cx[k] - cy[k])
    if np.isneginf(cx[-1]) != np.isneginf(cy[-1]):
        return np.inf
    if not np.isneginf(cx[-1]):
        worst = max(worst, abs(cx[-1] - cy[-1]))
    return worst


@dataclass(frozen=True)
class MonotonicityReport:
    passes: bool
    pair_results: tuple
    worst_margin: float

    def __bool__(self) -> bool:
        return self.passes


def _monotone_along(spectra, p_grid, slack, direction: str) -> MonotonicityReport:
    results = []
    worst = -np.inf
    ok_all = True
    for (p, sp), (q, sq) in zip(zip(p_grid, spectra), zip(p_grid[1:], spectra[1:])):
        if direction == "up":
            hi, lo = sq, sp
        else:
            hi, lo = sp, sq
        margin = _worst_margin(lo, hi)
        ok = log_majorizes(lo, hi, slack)
        ok_all = ok_all and ok
        worst = max(worst, margin)
        results.append((p, q, ok, margin))
    return MonotonicityReport(passes=ok_all, pair_results=tuple(results), worst_margin=worst)


def check_alt_monotonicity(
    A: PsdMatrix, B: PsdMatrix, p_grid: Sequence[float], slack: float = DEFAULT_SLACK
) -> MonotonicityReport:
    """Spectra of (A^{p/2} B^p A^{p/2})^{1/p} grow in log-majorization order
    as p increases; checks every adjacent pair of the grid."""
    grid = sorted(float(p) for p in p_grid)
    if len(grid) < 2:
        raise LengthMismatch("need at least two p values")
    spectra = [
        SpectrumVector.from_values(z_p_eigenvalues_numeric(A, B, p)) for p in grid
    ]
    return _monotone_along(spectra, grid, slack, direction="up")


def check_gm_monotonicity(
    A: PsdMatrix, B: PsdMatrix, p_grid: Sequence[float], slack: float = DEFAULT_SLACK
) -> MonotonicityReport:
    """Spectra of (A^p # B^p)^{2/p} shrink in log-majorization order as p
    increases; checks every adjacent pair of the grid."""
    grid = sorted(float(p) for p in p_grid)
    if len(grid) < 2:
        raise LengthMismatch("need at least two p values")
    spectra = [
        SpectrumVector.from_values(g_p_eigenvalues_numeric(A, B, p)) for p in grid
    ]
    return _monotone_along(spectra, grid, slack, direction="down")


def gelfand_naimark_sandwich(
    A: PsdMatrix, B: PsdMatrix, spectrum, slack: float = DEFAULT_SLACK
) -> bool:
    """True when the given spectrum sits between the antidiagonal and the
    diagonal eigenvalue products of A and B in log-majorization order."""
    s = _coerce(spectrum)
    la = A.log_eigenvalues()
    lb = B.log_eigenvalues()
    if la.size != s.d or lb.size != s.d:
        raise LengthMismatch("spectrum length must match the matrix dimension")
    upper = la + lb
    lower = np.sort(la + lb[::-1])[::-1]
    return log_majorizes(SpectrumVector(lower), s, slack) and log_majorizes(
        s, SpectrumVector(upper), slack
    )
