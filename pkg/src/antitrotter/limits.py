"""Large-p limits of (A^(p/2) B^p A^(p/2))^(1/p) for PSD pairs and chains.

The limit spectrum comes from a combinatorial maximization: for each
cardinality k, eta_k is the largest product a_I * b_J over index subsets
whose overlap minor det((V^* W)[I, J]) does not vanish, and the k-th limit
eigenvalue is the ratio eta_k / eta_{k-1}.  The limit matrix itself is
assembled from rank-one Gram tensors supported on the maximizing pairs.

All eigenvalue bookkeeping runs in the log domain so that spectra spanning
hundreds of orders of magnitude stay exact to float precision.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field, replace
from typing import Callable, Optional, Sequence

import numpy as np

from .antisym import IndexSet, WedgeVector, subspace_from_decomposable
from .errors import (
    BadSpectrum,
    DimensionMismatch,
    EtaZero,
    MaximalityFails,
    NotDecomposable,
    QNotRankOne,
)
from .matnum import (
    NEG_INF,
    LogValue,
    PsdMatrix,
    _basis_overlap,
    _check_pair,
    chain_eigenvalues_numeric,
    z_p_matrix_numeric,
)

DEFAULT_MINOR_TOL = 1e-10
DEFAULT_SPEC_TOL = 1e-9
DEFAULT_GROUP_TOL = 1e-8
DEFAULT_VERIFY_SCHEDULE = (256, 1024, 4096)


def _resolve_product_tol(d: int, product_tol: Optional[float]) -> float:
    return 1e-9 * d if product_tol is None else float(product_tol)


def _overlap(A: PsdMatrix, B: PsdMatrix) -> np.ndarray:
    return _basis_overlap(A.eigenvectors, B.eigenvectors)


def _minor_if_nonzero(U, rows, cols, colsq_rows, minor_tol):
    """Minor det(U[rows, cols]) when it clears the scaled threshold.

    The cut is minor_tol times the product of the column norms of the
    submatrix (its Hadamard bound), so the test is invariant under overall
    scaling of the selected columns.
    """
    c = colsq_rows[cols]
    if np.any(c == 0.0):
        return None
    det = complex(np.linalg.det(U[np.ix_(rows, cols)]))
    mag = abs(det)
    if mag == 0.0:
        return None
    if math.log(mag) <= math.log(minor_tol) + 0.5 * float(np.sum(np.log(c))):
        return None
    return det


def _subset_sums(logs: np.ndarray, combs: np.ndarray) -> np.ndarray:
    return logs[combs].sum(axis=1)


def _eta_scan(U, la, lb, k, minor_tol):
    """Max of a_I * b_J over nonzero minors at cardinality k (log domain).

    Returns (best_log, witness_ranks, combs, asums, bsums); witness_ranks is
    None when every admissible pair has zero product.
    """
    d = U.shape[0]
    combs = np.asarray(list(itertools.combinations(range(d), k)), dtype=np.intp)
    asums = _subset_sums(la, combs)
    bsums = _subset_sums(lb, combs)
    order_a = np.argsort(-asums, kind="stable")
    order_b = np.argsort(-bsums, kind="stable")
    b_top = bsums[order_b[0]]
    colsq_all = np.abs(U) ** 2
    best = NEG_INF
    wit = None
    for ia in order_a:
        av = asums[ia]
        if not av + b_top > best:
            break
        rows = combs[ia]
        colsq_rows = colsq_all[rows, :].sum(axis=0)
        for jb in order_b:
            v = av + bsums[jb]
            if not v > best:
                break
            if _minor_if_nonzero(U, rows, combs[jb], colsq_rows, minor_tol) is not None:
                best = v
                wit = (int(ia), int(jb))
                break
    return best, wit, combs, asums, bsums


def _delta_scan(U, la, lb, k, eta_log, minor_tol, product_tol):
    """All pairs within product_tol of eta_k with a nonzero minor.

    Returns (triplets, n) where each triplet is (rank_I, rank_J, minor)
    sorted lexicographically and n = binomial(d, k).
    """
    d = U.shape[0]
    combs = np.asarray(list(itertools.combinations(range(d), k)), dtype=np.intp)
    asums = _subset_sums(la, combs)
    bsums = _subset_sums(lb, combs)
    order_a = np.argsort(-asums, kind="stable")
    order_b = np.argsort(-bsums, kind="stable")
    b_top = bsums[order_b[0]]
    colsq_all = np.abs(U) ** 2
    cut = eta_log - product_tol
    out = []
    for ia in order_a:
        av = asums[ia]
        if av + b_top < cut:
            break
        rows = combs[ia]
        colsq_rows = colsq_all[rows, :].sum(axis=0)
        for jb in order_b:
            v = av + bsums[jb]
            if v < cut:
                break
            det = _minor_if_nonzero(U, rows, combs[jb], colsq_rows, minor_tol)
            if det is not None:
                out.append((int(ia), int(jb), det))
    out.sort(key=lambda t: (t[0], t[1]))
    return out, len(combs)


@dataclass(frozen=True)
class EtaSequence:
    """The maximized subset products eta_1 >= ... >= eta_d with witnesses.

    values[k-1] is eta_k as a LogValue; witnesses[k-1] is a maximizing
    (IndexSet, IndexSet) pair, or None once eta_k = 0.  Ratios of successive
    values are non-increasing and a zero is absorbing.
    """

    d: int
    values: tuple
    witnesses: tuple

    def __post_init__(self):
        if len(self.values) != self.d or len(self.witnesses) != self.d:
            raise BadSpectrum("eta sequence length must equal the dimension")
        seen_zero = False
        prev_ratio = None
        prev = LogValue.from_real(1.0)
        for k, v in enumerate(self.values):
            if v.is_zero:
                seen_zero = True
                if self.witnesses[k] is not None:
                    raise BadSpectrum("zero eta must not carry a witness")
                continue
            if seen_zero:
                raise BadSpectrum("eta sequence must stay zero after a zero")
            ratio = v.logmag - prev.logmag
            if prev_ratio is not None and ratio > prev_ratio + 1e-9:
                raise BadSpectrum("eta ratios must be non-increasing")
            prev_ratio = ratio
            prev = v

    def ratios(self):
        """Limit eigenvalues lambda_k = eta_k / eta_{k-1} as LogValues."""
        out = []
        prev = LogValue.from_real(1.0)
        for v in self.values:
            if v.is_zero:
                out.append(LogValue.from_real(0.0))
            else:
                out.append(v / prev)
                prev = v
        return out


def eta_sequence(A: PsdMatrix, B: PsdMatrix, minor_tol: float = DEFAULT_MINOR_TOL) -> EtaSequence:
    """Compute eta_k for k = 1..d by pruned search over subset pairs.

    Pairs are visited in decreasing product order so the first admissible
    minor ends each cardinality; the minor threshold is minor_tol scaled by
    the Hadamard bound of the tested submatrix.
    """
    _check_pair(A, B)
    d = A.d
    U = _overlap(A, B)
    la = A.log_eigenvalues()
    lb = B.log_eigenvalues()
    values = []
    witnesses = []
    dead = False
    for k in range(1, d + 1):
        if dead:
            values.append(LogValue.from_real(0.0))
            witnesses.append(None)
            continue
        best, wit, combs, _, _ = _eta_scan(U, la, lb, k, minor_tol)
        if wit is None:
            dead = True
            values.append(LogValue.from_real(0.0))
            witnesses.append(None)
        else:
            ia, jb = wit
            values.append(LogValue.from_log(best))
            witnesses.append(
                (
                    IndexSet.from_members(d, (combs[ia] + 1).tolist()),
                    IndexSet.from_members(d, (combs[jb] + 1).tolist()),
                )
            )
    return EtaSequence(d=d, values=tuple(values), witnesses=tuple(witnesses))


def limit_eigenvalues(
    A: PsdMatrix, B: PsdMatrix, minor_tol: float = DEFAULT_MINOR_TOL
) -> list:
    """Decreasing list of the d limit eigenvalues as LogValues."""
    return eta_sequence(A, B, minor_tol).ratios()


def delta_set(
    A: PsdMatrix,
    B: PsdMatrix,
    k: int,
    minor_tol: float = DEFAULT_MINOR_TOL,
    product_tol: Optional[float] = None,
):
    """Maximizing subset pairs at cardinality k, lexicographically sorted.

    A pair (I, J) belongs to the set when its overlap minor is nonzero and
    log(a_I b_J) lies within product_tol of log(eta_k).  Raises EtaZero when
    eta_k vanishes.
    """
    _check_pair(A, B)
    d = A.d
    if k < 1 or k > d:
        raise DimensionMismatch(f"cardinality {k} outside 1..{d}")
    product_tol = _resolve_product_tol(d, product_tol)
    U = _overlap(A, B)
    la = A.log_eigenvalues()
    lb = B.log_eigenvalues()
    best, wit, combs, _, _ = _eta_scan(U, la, lb, k, minor_tol)
    if wit is None:
        raise EtaZero(f"eta_{k} vanishes; the maximizing set is undefined")
    triplets, _ = _delta_scan(U, la, lb, k, best, minor_tol, product_tol)
    return [
        (
            IndexSet.from_members(d, (combs[ia] + 1).tolist()),
            IndexSet.from_members(d, (combs[jb] + 1).tolist()),
        )
        for ia, jb, _ in triplets
    ]


@dataclass(frozen=True)
class SpectralGroup:
    """One constant-eigenvalue block of the limit: positions first..last
    (1-based, inclusive) share the eigenvalue and the orthogonal projection."""

    first: int
    last: int
    eigenvalue: LogValue
    projection: np.ndarray

    @property
    def multiplicity(self) -> int:
        return self.last - self.first + 1


@dataclass(frozen=True)
class MaximalVerdict:
    """Outcome of the subset-chain criterion for lambda_i = a_i b_i."""

    holds: bool
    witnesses: dict
    failing_k: Optional[int]
    eigenvalues_match: Optional[bool]

    def __bool__(self) -> bool:
        return self.holds


@dataclass(frozen=True)
class LimitReport:
    """Full description of one computed limit."""

    eigenvalues: tuple
    matrix: PsdMatrix
    groups: tuple
    maximal: Optional[MaximalVerdict]
    diagnostics: dict = field(default_factory=dict)
    notes: tuple = ()


def _group_boundaries(lam_logs: np.ndarray, group_tol: float) -> list:
    """1-based end positions of the positive eigenvalue groups."""
    m = int(np.sum(~np.isneginf(lam_logs)))
    bounds = []
    for k in range(1, m):
        if lam_logs[k - 1] - lam_logs[k] > group_tol:
            bounds.append(k)
    if m > 0:
        bounds.append(m)
    return bounds


def _basis_from_vmat(d: int, k: int, vmat: np.ndarray, group_tol: float) -> np.ndarray:
    """Span of the top eigenvector of Q = vmat vmat^* read as a wedge tensor.

    vmat is indexed by lex subset ranks on both axes.  Q must be rank one up
    to group_tol; its eigenvector is decomposable and the returned d-by-k
    orthonormal basis spans the corresponding subspace.
    """
    rows = np.flatnonzero(np.any(vmat != 0, axis=1))
    cols = np.flatnonzero(np.any(vmat != 0, axis=0))
    M = vmat[np.ix_(rows, cols)]
    Q = M @ M.conj().T
    evals, evecs = np.linalg.eigh(Q)
    top = evals[-1]
    if len(evals) > 1 and evals[-2] > group_tol * top:
        raise QNotRankOne(
            f"maximizer Gram matrix at cardinality {k} has eigenvalue ratio "
            f"{evals[-2] / top:.3e} above {group_tol:.1e}"
        )
    psi = np.zeros(vmat.shape[0], dtype=complex)
    psi[rows] = evecs[:, -1]
    basis, _ = subspace_from_decomposable(WedgeVector(d=d, k=k, coordinates=psi))
    return basis


def _assemble_report(
    d: int,
    lam: list,
    boundaries: list,
    basis_fn: Callable[[int], np.ndarray],
    frame: np.ndarray,
    group_tol: float,
):
    """Build the limit matrix and its groups from nested boundary spans.

    basis_fn(k) returns an orthonormal basis (in the diagonal frame of the
    first operand) of the span attached to boundary k; successive spans are
    nested and group projections are their orthogonal differences.  The
    remaining complement, if any, carries eigenvalue zero.
    """
    groups = []
    col_blocks = []
    cum = np.zeros((d, 0), dtype=complex)
    lam_logs = np.asarray([v.logmag if not v.is_zero else NEG_INF for v in lam])
    prev = 0
    for k in boundaries:
        basis = basis_fn(k)
        X = basis - cum @ (cum.conj().T @ basis)
        Ux, sx, _ = np.linalg.svd(X, full_matrices=False)
        need = k - prev
        if sx[need - 1] < 0.5 or (need < sx.size and sx[need] > 0.5):
            raise NotDecomposable(
                f"spans recovered at boundaries {prev} and {k} are not nested"
            )
        G = Ux[:, :need]
        G = G - cum @ (cum.conj().T @ G)
        G, _ = np.linalg.qr(G)
        proj = frame @ G @ G.conj().T @ frame.conj().T
        glog = float(np.mean(lam_logs[prev:k]))
        groups.append(
            SpectralGroup(
                first=prev + 1,
                last=k,
                eigenvalue=LogValue.from_log(glog),
                projection=proj,
            )
        )
        col_blocks.append(G)
        cum = np.hstack([cum, G])
        prev = k
    if prev < d:
        evals, evecs = np.linalg.eigh(cum @ cum.conj().T)
        n_zero = d - prev
        if evals[n_zero - 1] > 0.5 or (prev > 0 and evals[n_zero] < 0.5):
            raise NotDecomposable("zero-group complement is ill separated")
        Z0 = evecs[:, :n_zero]
        proj = frame @ Z0 @ Z0.conj().T @ frame.conj().T
        groups.append(
            SpectralGroup(
                first=prev + 1,
                last=d,
                eigenvalue=LogValue.from_real(0.0),
                projection=proj,
            )
        )
        col_blocks.append(Z0)
    vecs = frame @ np.hstack(col_blocks)
    vals = np.asarray([v.to_real() for v in lam], dtype=float)
    return PsdMatrix(vals, vecs), tuple(groups)


def _validate_groups(groups, d: int) -> None:
    total = np.zeros((d, d), dtype=complex)
    for g in groups:
        total = total + g.projection
    if np.max(np.abs(total - np.eye(d))) > 1e-8:
        raise NotDecomposable("group projections do not resolve the identity")
    for ga, gb in itertools.combinations(groups, 2):
        if np.max(np.abs(ga.projection @ gb.projection)) > 1e-8:
            raise NotDecomposable("group projections are not mutually orthogonal")


def limit_matrix(
    A: PsdMatrix,
    B: PsdMatrix,
    minor_tol: float = DEFAULT_MINOR_TOL,
    product_tol: Optional[float] = None,
    group_tol: float = DEFAULT_GROUP_TOL,
    verify_schedule: Sequence[float] = DEFAULT_VERIFY_SCHEDULE,
) -> LimitReport:
    """Limit of (A^(p/2) B^p A^(p/2))^(1/p) as p grows, with diagnostics.

    Requires every eigenvalue group boundary to carry an effectively
    rank-one maximizer Gram matrix (QNotRankOne otherwise, which happens
    when neighbouring limit eigenvalues are too close to separate).
    Diagnostics hold the spectral-norm distance to the finite-p numeric
    evaluation at each schedule point.
    """
    _check_pair(A, B)
    d = A.d
    product_tol = _resolve_product_tol(d, product_tol)
    es = eta_sequence(A, B, minor_tol)
    lam = es.ratios()
    lam_logs = np.asarray([v.logmag if not v.is_zero else NEG_INF for v in lam])
    boundaries = _group_boundaries(lam_logs, group_tol)
    U = _overlap(A, B)
    la = A.log_eigenvalues()
    lb = B.log_eigenvalues()

    def basis_fn(k: int) -> np.ndarray:
        triplets, n = _delta_scan(
            U, la, lb, k, es.values[k - 1].logmag, minor_tol, product_tol
        )
        vmat = np.zeros((n, n), dtype=complex)
        for ia, jb, det in triplets:
            vmat[ia, jb] = det
        return _basis_from_vmat(d, k, vmat, group_tol)

    Z, groups = _assemble_report(d, lam, boundaries, basis_fn, A.eigenvectors, group_tol)
    _validate_groups(groups, d)
    verdict = check_maximal(A, B, minor_tol=minor_tol)
    diagnostics = {}
    for p in verify_schedule or ():
        Zp = z_p_matrix_numeric(A, B, p)
        diagnostics[float(p)] = float(np.linalg.norm(Zp.matrix() - Z.matrix(), 2))
    return LimitReport(
        eigenvalues=tuple(lam),
        matrix=Z,
        groups=groups,
        maximal=verdict,
        diagnostics=diagnostics,
    )


def _block_ends(logs: np.ndarray, spec_tol: float) -> list:
    """1-based end positions of the near-equal blocks of a decreasing
    log-spectrum; zeros form a single final block."""
    d = logs.size
    ends = []
    for i in range(d - 1):
        lo, hi = logs[i + 1], logs[i]
        if np.isneginf(hi) and np.isneginf(lo):
            continue
        if np.isneginf(lo) or hi - lo > spec_tol:
            ends.append(i + 1)
    ends.append(d)
    return ends


def check_maximal(
    A: PsdMatrix,
    B: PsdMatrix,
    minor_tol: float = DEFAULT_MINOR_TOL,
    spec_tol: float = DEFAULT_SPEC_TOL,
) -> MaximalVerdict:
    """Test the subset-chain criterion for the maximal limit spectrum.

    For every interior block boundary k of either spectrum there must exist
    subsets I, J of size k that contain all earlier blocks, stay inside the
    current ones, and have a nonzero overlap minor.  When the criterion
    holds the limit eigenvalues equal a_i b_i termwise; the verdict records
    a witness pair per boundary, or the first failing k.
    """
    _check_pair(A, B)
    d = A.d
    U = _overlap(A, B)
    la = A.log_eigenvalues()
    lb = B.log_eigenvalues()
    ends_a = _block_ends(la, spec_tol)
    ends_b = _block_ends(lb, spec_tol)
    interior = sorted(set(ends_a[:-1]) | set(ends_b[:-1]))
    colsq_all = np.abs(U) ** 2
    witnesses = {}

    def enclosing(ends, k):
        prev = 0
        for e in ends:
            if k <= e:
                return prev, e
            prev = e
        return prev, d

    for k in interior:
        ia_prev, ia_cur = enclosing(ends_a, k)
        jb_prev, jb_cur = enclosing(ends_b, k)
        found = None
        for ex_i in itertools.combinations(range(ia_prev + 1, ia_cur + 1), k - ia_prev):
            mem_i = tuple(range(1, ia_prev + 1)) + ex_i
            rows = np.asarray(mem_i, dtype=np.intp) - 1
            colsq_rows = colsq_all[rows, :].sum(axis=0)
            for ex_j in itertools.combinations(
                range(jb_prev + 1, jb_cur + 1), k - jb_prev
            ):
                mem_j = tuple(range(1, jb_prev + 1)) + ex_j
                cols = np.asarray(mem_j, dtype=np.intp) - 1
                if _minor_if_nonzero(U, rows, cols, colsq_rows, minor_tol) is not None:
                    found = (
                        IndexSet.from_members(d, mem_i),
                        IndexSet.from_members(d, mem_j),
                    )
                    break
            if found is not None:
                break
        if found is None:
            return MaximalVerdict(
                holds=False,
                witnesses=dict(witnesses),
                failing_k=k,
                eigenvalues_match=None,
            )
        witnesses[k] = found
    lam = limit_eigenvalues(A, B, minor_tol)
    match = True
    for i in range(d):
        target = la[i] + lb[i]
        if lam[i].is_zero != bool(np.isneginf(target)):
            match = False
            break
        if not lam[i].is_zero and abs(lam[i].logmag - target) > 1e-9:
            match = False
            break
    return MaximalVerdict(
        holds=True, witnesses=witnesses, failing_k=None, eigenvalues_match=match
    )


def maximal_limit(
    A: PsdMatrix,
    B: PsdMatrix,
    minor_tol: float = DEFAULT_MINOR_TOL,
    spec_tol: float = DEFAULT_SPEC_TOL,
    group_tol: float = DEFAULT_GROUP_TOL,
    verify_schedule: Sequence[float] = DEFAULT_VERIFY_SCHEDULE,
) -> LimitReport:
    """Limit matrix in the maximal case lambda_i = a_i b_i.

    Raises MaximalityFails when the subset-chain criterion does not hold.
    With a multiplicity-free base spectrum the limit is assembled directly
    in the eigenbasis of the first operand; otherwise the general
    construction runs and the block structure of the result is checked
    against the spectral projections of the first operand.
    """
    verdict = check_maximal(A, B, minor_tol=minor_tol, spec_tol=spec_tol)
    if not verdict.holds:
        raise MaximalityFails(
            f"subset-chain criterion fails at cardinality {verdict.failing_k}"
        )
    d = A.d
    la = A.log_eigenvalues()
    lb = B.log_eigenvalues()
    ends_a = _block_ends(la, spec_tol)
    lam_logs = la + lb
    lam = [LogValue.from_log(x) for x in lam_logs]
    if len(ends_a) == d:
        lam_sorted = np.asarray(lam_logs)
        boundaries = _group_boundaries(lam_sorted, group_tol)
        basis_fn = lambda k: np.eye(d, k, dtype=complex)
        Z, groups = _assemble_report(
            d, lam, boundaries, basis_fn, A.eigenvectors, group_tol
        )
        _validate_groups(groups, d)
        diagnostics = {}
        for p in verify_schedule or ():
            Zp = z_p_matrix_numeric(A, B, p)
            diagnostics[float(p)] = float(np.linalg.norm(Zp.matrix() - Z.matrix(), 2))
        return LimitReport(
            eigenvalues=tuple(lam),
            matrix=Z,
            groups=groups,
            maximal=verdict,
            diagnostics=diagnostics,
            notes=("eigenbasis assembly for a multiplicity-free base spectrum",),
        )
    rep = limit_matrix(
        A,
        B,
        minor_tol=minor_tol,
        product_tol=None,
        group_tol=group_tol,
        verify_schedule=verify_schedule,
    )
    Zmat = rep.matrix.matrix()
    scale = max(rep.matrix.eigenvalues[0], 1.0)
    notes = list(rep.notes)
    V = A.eigenvectors
    prev = 0
    compatible = True
    for e in ends_a:
        block = V[:, prev:e]
        P = block @ block.conj().T
        if np.max(np.abs(P @ Zmat - Zmat @ P)) > 1e-8 * scale:
            compatible = False
        prev = e
    notes.append(
        "base spectral projections commute with the limit"
        if compatible
        else "base spectral projection compatibility violated"
    )
    return replace(rep, maximal=verdict, notes=tuple(notes))


def _cluster_items(items: list, tol: float) -> list:
    """Group (value, key) pairs whose sorted values sit within tol of their
    neighbours; returns (representative, members) per cluster."""
    items = sorted(items, key=lambda t: (t[0], t[1]))
    clusters = []
    cur = [items[0]]
    for it in items[1:]:
        gap = it[0] - cur[-1][0]
        if gap > tol:
            clusters.append(cur)
            cur = [it]
        else:
            cur = cur + [it]
    clusters.append(cur)
    return [(c[-1][0], [k for _, k in c]) for c in clusters]


def _advance_states(states, link, s_next, tol):
    """One transfer step of the interior-product dynamic program.

    states maps accumulated interior log-products to matrices whose (I, J)
    entry sums the chain minors reaching column subset J; multiplying by the
    next link and absorbing the next interior subset product re-clusters the
    accumulated values within tol.
    """
    n = link.shape[1]
    progressed = [(c, M @ link) for c, M in states]
    items = []
    for si, (c, _) in enumerate(progressed):
        for j in range(n):
            items.append((c + s_next[j], (si, j)))
    out = []
    for rep, members in _cluster_items(items, tol):
        N = np.zeros((progressed[0][1].shape[0], n), dtype=complex)
        for si, j in members:
            N[:, j] += progressed[si][1][:, j]
        out.append((rep, N))
    return out


def _chain_classes(mats, k, product_tol):
    """Interior-product classes of the k-compound transfer chain.

    Returns (classes, s_first, s_last) where classes is a list of
    (interior log-product, coefficient matrix) pairs over lex subset ranks
    of the first and last factors.
    """
    from .antisym import compound

    m = len(mats)
    d = mats[0].d
    combs = np.asarray(list(itertools.combinations(range(d), k)), dtype=np.intp)
    slog = [_subset_sums(M.log_eigenvalues(), combs) for M in mats]
    links = []
    for l in range(m - 1):
        W = _basis_overlap(mats[l].eigenvectors, mats[l + 1].eigenvectors)
        links.append(compound(W, k))
    n = len(combs)
    states = [(0.0, np.eye(n, dtype=complex))]
    for t in range(1, m - 1):
        states = _advance_states(states, links[t - 1], slog[t], product_tol)
    classes = [(c, M @ links[-1]) for c, M in states]
    return classes, slog[0], slog[-1]


def _eta_multi(classes, s_first, s_last, minor_tol):
    """Max total log-product over nonzero chain coefficients."""
    best = NEG_INF
    for c, F in classes:
        mask = np.abs(F) > minor_tol
        if not mask.any():
            continue
        vals = s_first[:, None] + c + s_last[None, :]
        vals = np.where(mask, vals, NEG_INF)
        v = float(vals.max())
        if v > best:
            best = v
    return best


def _check_chain(mats) -> int:
    if len(mats) < 2:
        raise DimensionMismatch("need at least two factors")
    d = mats[0].d
    for M in mats:
        if not isinstance(M, PsdMatrix):
            raise TypeError("expected PsdMatrix factors")
        if M.d != d:
            raise DimensionMismatch("chain factors must share one dimension")
    return d


def limit_eigenvalues_multi(
    mats: Sequence[PsdMatrix],
    minor_tol: float = DEFAULT_MINOR_TOL,
    product_tol: Optional[float] = None,
) -> list:
    """Limit spectrum for a symmetric product chain of several factors.

    The chain (A_1^(p/2) ... A_{m-1}^(p/2) A_m^p A_{m-1}^(p/2) ... A_1^(p/2))
    raised to 1/p converges; the k-th eta value maximizes the product of
    outer subset eigenvalues over chains of subsets whose summed transfer
    coefficient (grouped by interior subset products) is nonzero.  With two
    factors this reduces exactly to limit_eigenvalues.
    """
    mats = list(mats)
    d = _check_chain(mats)
    if len(mats) == 2:
        return limit_eigenvalues(mats[0], mats[1], minor_tol)
    product_tol = _resolve_product_tol(d, product_tol)
    etas = []
    dead = False
    for k in range(1, d + 1):
        if dead:
            etas.append(NEG_INF)
            continue
        classes, s_first, s_last = _chain_classes(mats, k, product_tol)
        best = _eta_multi(classes, s_first, s_last, minor_tol)
        if np.isneginf(best):
            dead = True
        etas.append(best)
    out = []
    prev = 0.0
    for e in etas:
        if np.isneginf(e):
            out.append(LogValue.from_real(0.0))
        else:
            out.append(LogValue.from_log(e - prev))
            prev = e
    return out


def limit_matrix_multi(
    mats: Sequence[PsdMatrix],
    minor_tol: float = DEFAULT_MINOR_TOL,
    product_tol: Optional[float] = None,
    group_tol: float = DEFAULT_GROUP_TOL,
    verify_schedule: Sequence[float] = DEFAULT_VERIFY_SCHEDULE,
) -> LimitReport:
    """Limit matrix for a symmetric product chain of several factors.

    Mirrors limit_matrix: boundary spans come from the top eigenvector of
    the Gram matrix of maximizing chain coefficients, rotated into the
    eigenbasis of the first factor.  Diagnostics hold, per schedule point,
    the largest absolute log gap between the computed spectrum and the
    finite-p numeric chain spectrum over the positive eigenvalues.
    """
    mats = list(mats)
    d = _check_chain(mats)
    if len(mats) == 2:
        return limit_matrix(
            mats[0],
            mats[1],
            minor_tol=minor_tol,
            product_tol=product_tol,
            group_tol=group_tol,
            verify_schedule=verify_schedule,
        )
    product_tol = _resolve_product_tol(d, product_tol)
    per_k = []
    etas = []
    dead = False
    for k in range(1, d + 1):
        if dead:
            per_k.append(None)
            etas.append(NEG_INF)
            continue
        classes, s_first, s_last = _chain_classes(mats, k, product_tol)
        best = _eta_multi(classes, s_first, s_last, minor_tol)
        per_k.append((classes, s_first, s_last))
        if np.isneginf(best):
            dead = True
        etas.append(best)
    lam = []
    prev = 0.0
    for e in etas:
        if np.isneginf(e):
            lam.append(LogValue.from_real(0.0))
        else:
            lam.append(LogValue.from_log(e - prev))
            prev = e
    lam_logs = np.asarray([v.logmag if not v.is_zero else NEG_INF for v in lam])
    boundaries = _group_boundaries(lam_logs, group_tol)

    def basis_fn(k: int) -> np.ndarray:
        classes, s_first, s_last = per_k[k - 1]
        eta_log = etas[k - 1]
        n = s_first.size
        vmat = np.zeros((n, n), dtype=complex)
        for c, F in classes:
            vals = s_first[:, None] + c + s_last[None, :]
            sel = (np.abs(F) > minor_tol) & (vals >= eta_log - product_tol)
            vmat[sel] += F[sel]
        return _basis_from_vmat(d, k, vmat, group_tol)

    Z, groups = _assemble_report(
        d, lam, boundaries, basis_fn, mats[0].eigenvectors, group_tol
    )
    _validate_groups(groups, d)
    diagnostics = {}
    for p in verify_schedule or ():
        nums = chain_eigenvalues_numeric(mats, p)
        worst = 0.0
        for v_lim, v_num in zip(lam, nums):
            if v_lim.is_zero or v_num.is_zero:
                continue
            worst = max(worst, abs(v_lim.logmag - v_num.logmag))
        diagnostics[float(p)] = worst
    return LimitReport(
        eigenvalues=tuple(lam),
        matrix=Z,
        groups=groups,
        maximal=None,
        diagnostics=diagnostics,
        notes=("chain diagnostics compare log-spectra, not matrices",),
    )
