"""Exponent-carrying SVD for severely graded matrices.

A graded matrix is stored as a mantissa/exponent pair: entry (i, j) equals
``man[i, j] * e**exp[i, j]`` with ``|man| == 1`` for nonzero entries and
``(0, -inf)`` for exact zeros.  Matrices like ``diag(e**r) @ U @ diag(e**c)``
with exponent spreads far beyond float range then stay representable, and all
singular values keep relative accuracy instead of drowning in
``eps * s_max``.  Three stages:

1. complete-pivot LDU in graded arithmetic produces a rank-revealing
   factorization whose triangular factors are well conditioned plain floats
   (entries bounded by one) while the grading is confined to the diagonal,
2. column-pivoted Gram-Schmidt absorbs the left grading into a triangular
   factor held with per-column exponents,
3. one-sided Jacobi with per-column exponents finishes the SVD; rotations for
   far-separated column scales degrade gracefully into Gram-Schmidt steps, so
   no intermediate ever leaves float range.
"""

from __future__ import annotations

import numpy as np

NEG_INF = float("-inf")


def _normalize(man, exp):
    """Return (man, exp) with |man| == 1 for nonzero entries, (0, -inf) else."""
    man = np.asarray(man, dtype=complex)
    exp = np.asarray(exp, dtype=float)
    a = np.abs(man)
    nz = (a > 0) & (exp > NEG_INF) & np.isfinite(a)
    out_m = np.zeros(man.shape, dtype=complex)
    out_e = np.full(exp.shape, NEG_INF)
    # complex division by a subnormal magnitude can overflow, so peel the
    # phase with angle() outside the comfortable range
    safe = nz & (a > 1e-280) & (a < 1e280)
    hard = nz & ~safe
    out_m[safe] = man[safe] / a[safe]
    out_m[hard] = np.exp(1j * np.angle(man[hard]))
    out_e[nz] = exp[nz] + np.log(a[nz])
    return out_m, out_e


class GMat:
    """Matrix whose (i, j) entry is man[i, j] * e**exp[i, j]."""

    __slots__ = ("man", "exp")

    def __init__(self, man, exp, *, normalized=False):
        if normalized:
            self.man = np.asarray(man, dtype=complex)
            self.exp = np.asarray(exp, dtype=float)
        else:
            self.man, self.exp = _normalize(man, exp)
        if self.man.shape != self.exp.shape:
            raise ValueError("mantissa and exponent shapes differ")

    @property
    def shape(self):
        return self.man.shape

    def dense(self):
        """Plain complex array; overflows to inf for exponents beyond float range."""
        with np.errstate(over="ignore"):
            out = np.where(self.exp > NEG_INF, self.man * np.exp(self.exp), 0.0)
        return out


def from_scaled(core, row_exp, col_exp):
    """GMat holding diag(e**row_exp) @ core @ diag(e**col_exp)."""
    core = np.asarray(core, dtype=complex)
    row_exp = np.asarray(row_exp, dtype=float)
    col_exp = np.asarray(col_exp, dtype=float)
    return GMat(core, np.add.outer(row_exp, col_exp))


def from_dense(M):
    return GMat(np.asarray(M, dtype=complex), np.zeros(np.shape(M)))


def matmul(A, B):
    """Graded product; sums are aligned to the dominant exponent per entry."""
    m, k = A.shape
    k2, n = B.shape
    if k != k2:
        raise ValueError("inner dimensions differ")
    if k == 0:
        return GMat(np.zeros((m, n)), np.full((m, n), NEG_INF), normalized=True)
    E = A.exp[:, :, None] + B.exp[None, :, :]
    P = A.man[:, :, None] * B.man[None, :, :]
    M = E.max(axis=1)
    with np.errstate(invalid="ignore"):
        W = np.exp(E - M[:, None, :])
    W[~np.isfinite(E)] = 0.0
    S = (P * W).sum(axis=1)
    S[~np.isfinite(M)] = 0.0
    return GMat(S, np.where(np.isfinite(M), M, NEG_INF))


def gecp_ldu(G):
    """Complete-pivot LDU factorization of a graded matrix.

    Returns (pr, pc, L, d_man, d_exp, U, rank) with
    ``values(G)[np.ix_(pr, pc)] == L @ diag(d) @ U``, L unit lower trapezoidal
    and U unit upper trapezoidal, both plain complex with entries bounded by
    one in magnitude; the grading sits entirely in the diagonal d.
    """
    man = G.man.copy()
    exp = G.exp.copy()
    m, n = man.shape
    rmax = min(m, n)
    pr = np.arange(m)
    pc = np.arange(n)
    L = np.zeros((m, rmax), dtype=complex)
    U = np.zeros((rmax, n), dtype=complex)
    d_man = np.zeros(rmax, dtype=complex)
    d_exp = np.full(rmax, NEG_INF)
    rank = rmax
    for k in range(rmax):
        sub = exp[k:, k:]
        flat = int(np.argmax(sub))
        i0, j0 = divmod(flat, sub.shape[1])
        i0 += k
        j0 += k
        if exp[i0, j0] == NEG_INF:
            rank = k
            break
        if i0 != k:
            man[[k, i0], :] = man[[i0, k], :]
            exp[[k, i0], :] = exp[[i0, k], :]
            L[[k, i0], :] = L[[i0, k], :]
            pr[[k, i0]] = pr[[i0, k]]
        if j0 != k:
            man[:, [k, j0]] = man[:, [j0, k]]
            exp[:, [k, j0]] = exp[:, [j0, k]]
            U[:, [k, j0]] = U[:, [j0, k]]
            pc[[k, j0]] = pc[[j0, k]]
        pm = man[k, k]
        pe = exp[k, k]
        d_man[k] = pm
        d_exp[k] = pe
        # multipliers are formed once and the grade difference of the two
        # update terms is assembled from per-entry subtractions, so rows that
        # coincide bitwise cancel to exact zeros instead of leaving rounding
        # noise at the dominant grade
        lman = man[k + 1:, k] / pm
        lcol = exp[k + 1:, k] - pe
        urow = exp[k, k + 1:] - pe
        with np.errstate(invalid="ignore"):
            L[k + 1:, k] = lman * np.exp(lcol)
            U[k, k + 1:] = man[k, k + 1:] / pm * np.exp(urow)
        L[k + 1:, k][~np.isfinite(lcol)] = 0.0
        U[k, k + 1:][~np.isfinite(urow)] = 0.0
        se = exp[k + 1:, k + 1:]
        sm = man[k + 1:, k + 1:]
        tm = lman[:, None] * man[k, k + 1:][None, :]
        upd = np.isfinite(lcol)[:, None] & np.isfinite(urow)[None, :]
        new = sm.copy()
        ne = se.copy()
        fresh = upd & ~np.isfinite(se)
        if np.any(fresh):
            te = pe + lcol[:, None] + urow[None, :]
            new[fresh] = -tm[fresh]
            ne[fresh] = te[fresh]
        both = upd & np.isfinite(se)
        if np.any(both):
            with np.errstate(invalid="ignore"):
                diff = lcol[:, None] + (urow[None, :] - (se - pe))
            dpos = both & (diff > 0)
            dneg = both & ~(diff > 0)
            new[dneg] = sm[dneg] - tm[dneg] * np.exp(diff[dneg])
            if np.any(dpos):
                te = pe + lcol[:, None] + urow[None, :]
                new[dpos] = sm[dpos] * np.exp(-diff[dpos]) - tm[dpos]
                ne[dpos] = te[dpos]
        nm, ne = _normalize(new, ne)
        man[k + 1:, k + 1:] = nm
        exp[k + 1:, k + 1:] = ne
    for k in range(rank):
        L[k, k] = 1.0
        U[k, k] = 1.0
    return pr, pc, L[:, :rank], d_man[:rank], d_exp[:rank], U[:rank, :], rank


def _graded_scalar_add(m1, e1, m2, e2):
    if e1 == NEG_INF:
        return m2, e2
    if e2 == NEG_INF:
        return m1, e1
    top = max(e1, e2)
    return m1 * np.exp(e1 - top) + m2 * np.exp(e2 - top), top


def qrcp_colexp(man, cexp):
    """Column-pivoted Gram-Schmidt QR of A = man @ diag(e**cexp).

    Returns (Q, R, perm, rank) with ``values(A)[:, perm] == Q @ values(R)``,
    Q a plain matrix with orthonormal columns and R a graded upper triangle.
    """
    man = np.array(man, dtype=complex)
    cexp = np.array(cexp, dtype=float)
    m, n = man.shape
    rmax = min(m, n)
    perm = np.arange(n)
    Q = np.zeros((m, rmax), dtype=complex)
    R_man = np.zeros((rmax, n), dtype=complex)
    R_exp = np.full((rmax, n), NEG_INF)
    rank = rmax
    for k in range(rmax):
        nrm = np.linalg.norm(man[:, k:], axis=0)
        with np.errstate(divide="ignore"):
            key = cexp[k:] + np.log(np.where(nrm > 0, nrm, 1.0))
        key[nrm == 0] = NEG_INF
        j0 = k + int(np.argmax(key))
        if key[j0 - k] == NEG_INF:
            rank = k
            break
        if j0 != k:
            man[:, [k, j0]] = man[:, [j0, k]]
            cexp[[k, j0]] = cexp[[j0, k]]
            R_man[:, [k, j0]] = R_man[:, [j0, k]]
            R_exp[:, [k, j0]] = R_exp[:, [j0, k]]
            perm[[k, j0]] = perm[[j0, k]]
        v = man[:, k].copy()
        for _ in range(2):
            if k == 0:
                break
            c = Q[:, :k].conj().T @ v
            v -= Q[:, :k] @ c
            for i in range(k):
                R_man[i, k], R_exp[i, k] = _graded_scalar_add(
                    R_man[i, k], R_exp[i, k], c[i], cexp[k]
                )
        nv = np.linalg.norm(v)
        if nv == 0:
            rank = k
            break
        q = v / nv
        Q[:, k] = q
        R_man[k, k] = 1.0
        R_exp[k, k] = cexp[k] + np.log(nv)
        if k + 1 < n:
            coef = q.conj() @ man[:, k + 1:]
            R_man[k, k + 1:] = coef
            R_exp[k, k + 1:] = cexp[k + 1:]
            man[:, k + 1:] -= np.outer(q, coef)
            tail = np.linalg.norm(man[:, k + 1:], axis=0)
            pos = tail > 0
            idx = np.flatnonzero(pos) + k + 1
            man[:, idx] /= tail[pos]
            cexp[idx] += np.log(tail[pos])
            zid = np.flatnonzero(~pos) + k + 1
            cexp[zid] = NEG_INF
    R = GMat(R_man[:rank], R_exp[:rank])
    return Q[:, :rank], R, perm, rank


def jacobi_colexp(X, cexp, tol=1e-15, max_sweeps=60):
    """One-sided Jacobi SVD of X @ diag(e**cexp), columns kept in place.

    Returns (U_man, s_log, V) where column j of the input equals
    ``U_man[:, j] * e**s_log[j]`` combined through V:
    ``values(X) == U_man @ diag(e**s_log) @ V.conj().T``.
    Rotations between columns whose scales are farther apart than e**40
    are applied in scale-peeled form, so nothing overflows.
    """
    X = np.array(X, dtype=complex)
    cexp = np.array(cexp, dtype=float)
    m, n = X.shape
    nrm = np.linalg.norm(X, axis=0)
    pos = nrm > 0
    X[:, pos] /= nrm[pos]
    with np.errstate(divide="ignore"):
        cexp = np.where(pos, cexp + np.log(np.where(pos, nrm, 1.0)), NEG_INF)
    V = np.eye(n, dtype=complex)
    for _ in range(max_sweeps):
        off = 0.0
        for i in range(n - 1):
            if cexp[i] == NEG_INF:
                continue
            for j in range(i + 1, n):
                if cexp[j] == NEG_INF:
                    continue
                g12 = np.vdot(X[:, i], X[:, j])
                a12 = abs(g12)
                if a12 <= tol:
                    continue
                off = max(off, a12)
                phi = g12 / a12
                delta = cexp[i] - cexp[j]
                if abs(delta) <= 40.0:
                    tau = (np.exp(-delta) - np.exp(delta)) / (2.0 * a12)
                    sgn = 1.0 if tau >= 0 else -1.0
                    t = sgn / (abs(tau) + np.hypot(1.0, tau))
                    log_t = np.log(abs(t))
                else:
                    sgn = -1.0 if delta > 0 else 1.0
                    log_t = np.log(a12) - abs(delta)
                    t = sgn * np.exp(log_t)
                c = 1.0 / np.hypot(1.0, t)
                log_c = np.log(c)
                coef_i = sgn * np.exp(min(log_t + log_c + cexp[j] - cexp[i], 700.0))
                coef_j = sgn * np.exp(min(log_t + log_c + cexp[i] - cexp[j], 700.0))
                xi = c * phi * X[:, i] - coef_i * X[:, j]
                xj = coef_j * phi * X[:, i] + c * X[:, j]
                ni = np.linalg.norm(xi)
                nj = np.linalg.norm(xj)
                X[:, i] = xi / ni if ni > 0 else 0.0
                X[:, j] = xj / nj if nj > 0 else 0.0
                cexp[i] = cexp[i] + np.log(ni) if ni > 0 else NEG_INF
                cexp[j] = cexp[j] + np.log(nj) if nj > 0 else NEG_INF
                s_plain = sgn * c * np.exp(log_t)
                vi = c * phi * V[:, i] - s_plain * V[:, j]
                vj = s_plain * phi * V[:, i] + c * V[:, j]
                V[:, i] = vi
                V[:, j] = vj
        if off <= tol:
            break
    return X, cexp, V


def graded_svd(G):
    """SVD of a graded matrix with relative-accuracy singular values.

    Returns (U, s_log, V, rank): values(G) == U @ diag(e**s_log) @ V.conj().T
    with U (m, rank) and V (n, rank) holding orthonormal columns and s_log
    decreasing (natural-log scale).
    """
    m, n = G.shape
    pr, pc, L, d_man, d_exp, Uu, rank = gecp_ldu(G)
    if rank == 0:
        return (
            np.zeros((m, 0), dtype=complex),
            np.zeros(0),
            np.zeros((n, 0), dtype=complex),
            0,
        )
    Q1, R, perm, rank2 = qrcp_colexp(L * d_man[None, :], d_exp)
    inv = np.empty_like(perm)
    inv[perm] = np.arange(len(perm))
    R_unperm = GMat(R.man[:, inv], R.exp[:, inv], normalized=True)
    W = matmul(R_unperm, from_dense(Uu))
    f = W.exp.max(axis=1)
    keep = np.flatnonzero(f > NEG_INF)
    with np.errstate(invalid="ignore"):
        K = W.man[keep] * np.exp(W.exp[keep] - f[keep, None])
    K[~np.isfinite(W.exp[keep])] = 0.0
    Um, s_log, Vrot = jacobi_colexp(K.T.copy(), f[keep])
    live = np.flatnonzero(s_log > NEG_INF)
    Pw = np.conj(Vrot)[:, live]
    Qw = np.conj(Um)[:, live]
    s_log = s_log[live]
    left = np.zeros((m, len(live)), dtype=complex)
    right = np.zeros((n, len(live)), dtype=complex)
    left[pr, :] = Q1[:, keep] @ Pw
    right[pc, :] = Qw
    order = np.argsort(-s_log, kind="stable")
    return left[:, order], s_log[order], right[:, order], len(live)


def left_factor_graded(G, s_log, right, left_plain, noise=1e-13):
    """Left singular factor of G as a graded matrix, via U = G V inv(Sigma).

    The plain factor is authoritative above the noise floor, where its
    absolute eps-level error is a small relative error.  Below the floor the
    graded product takes over: row gradings of G pass into it exactly, so
    entries that are tiny for structural reasons keep relative accuracy.  An
    entry both readings call tiny but the product calls large has lost its
    cancellation partners and is unrecoverable; it gets pinned at the floor,
    which at worst overstates a chain that honest chains then outweigh.
    """
    U = matmul(G, from_dense(right))
    gexp = U.exp - s_log[None, :]
    apl = np.abs(left_plain)
    lfloor = np.log(noise)
    big = apl >= noise
    with np.errstate(divide="ignore"):
        lp = np.log(np.where(apl > 0, apl, 1e-300))
    use_graded = ~big & (gexp < lfloor)
    man = np.array(U.man)
    man[big] = left_plain[big] / apl[big]
    exp = np.where(big, lp, np.where(use_graded, gexp, lfloor))
    # rigorous caps: |U[i, j]| <= 1 and |U[i, j]| * s_j <= l2 norm of row i
    rt = G.exp.max(axis=1, keepdims=True)
    with np.errstate(invalid="ignore"):
        rw = np.exp(G.exp - rt)
    rw[~np.isfinite(G.exp)] = 0.0
    rnorm = np.where(
        np.isfinite(rt[:, 0]), rt[:, 0] + np.log(np.linalg.norm(rw, axis=1) + 1e-300), NEG_INF
    )
    bound = np.minimum(rnorm[:, None] - s_log[None, :], 0.0)
    return GMat(man, np.minimum(exp, bound), normalized=True)


def complete_columns(U, d):
    """Extend orthonormal columns U (d, r) to a full orthonormal (d, d) basis."""
    r = U.shape[1]
    if r >= d:
        return U[:, :d]
    P = np.eye(d, dtype=complex) - U @ U.conj().T
    w, vec = np.linalg.eigh((P + P.conj().T) / 2.0)
    extra = vec[:, np.argsort(-w, kind="stable")[: d - r]]
    q, _ = np.linalg.qr(extra - U @ (U.conj().T @ extra))
    return np.hstack([U, q])
