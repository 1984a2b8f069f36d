"""Small dense Hermitian kernel: realification, Jacobi eigensolver, PSD tools.

The eigendecomposition route goes through the 2n x 2n real symmetric
realification and a cyclic Jacobi sweep, then pairs the doubled spectrum back
into n complex eigenvectors.  All tolerances scale with max(1, trace) or the
Frobenius norm so they remain meaningful on per-unit data.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import NumericalError

JACOBI_SWEEP_CAP = 40
JACOBI_OFFDIAG_TOL = 1e-12
PAIR_MATCH_TOL = 1e-9


@dataclass(frozen=True)
class HermitianMatrix:
    """Dense Hermitian matrix; diagonal imaginary parts forced to zero."""

    mat: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.mat, dtype=complex)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValueError("square matrix required")
        # symmetrize: keeps Hermitian structure exact by storage
        h = 0.5 * (a + a.conj().T)
        np.fill_diagonal(h, h.diagonal().real)
        object.__setattr__(self, "mat", h)

    @property
    def n(self) -> int:
        return self.mat.shape[0]

    def trace(self) -> float:
        return float(self.mat.trace().real)

    def fro_norm(self) -> float:
        return float(np.linalg.norm(self.mat))

    def __add__(self, other):
        return HermitianMatrix(self.mat + other.mat)

    def __sub__(self, other):
        return HermitianMatrix(self.mat - other.mat)

    def scale(self, a: float):
        return HermitianMatrix(a * self.mat)


@dataclass(frozen=True)
class EigenDecomposition:
    eigenvalues: np.ndarray   # nonincreasing
    eigenvectors: np.ndarray  # unit columns, eigenvectors[:, i] for value i

    def negative_pairs(self, cutoff: float):
        """(lambda_i, q_i) for every eigenvalue below `cutoff`."""
        out = []
        for i, lam in enumerate(self.eigenvalues):
            if lam < cutoff:
                out.append((float(lam), self.eigenvectors[:, i]))
        return out


def realify(x) -> np.ndarray:
    """L(X) = [[Re X, -Im X], [Im X, Re X]] for any complex square X.

    For Hermitian input the result is real symmetric; the same block formula
    extends to general complex matrices (used by the rank identity checks).
    """
    m = x.mat if isinstance(x, HermitianMatrix) else np.asarray(x, dtype=complex)
    re, im = m.real, m.imag
    top = np.hstack([re, -im])
    bot = np.hstack([im, re])
    return np.vstack([top, bot])


def jacobi_eigh(a: np.ndarray, sweep_cap: int = JACOBI_SWEEP_CAP,
                tol: float = JACOBI_OFFDIAG_TOL):
    """Cyclic Jacobi for real symmetric matrices.

    Returns (eigenvalues desc, eigenvector columns).  Raises NumericalError
    with the residual off-diagonal norm if the sweep cap is hit.
    """
    a = np.array(a, dtype=float)
    n = a.shape[0]
    if not np.array_equal(a, a.T):
        a = 0.5 * (a + a.T)
    v = np.eye(n)
    fro = np.linalg.norm(a)
    threshold = tol * max(fro, 1e-300)

    def offdiag_norm():
        off = a - np.diag(np.diag(a))
        return float(np.linalg.norm(off))

    for _ in range(sweep_cap):
        if offdiag_norm() <= threshold:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if abs(apq) <= 1e-300:
                    continue
                theta = 0.5 * math.atan2(2.0 * apq, a[q, q] - a[p, p])
                c, s = math.cos(theta), math.sin(theta)
                rot_p = c * a[:, p] - s * a[:, q]
                rot_q = s * a[:, p] + c * a[:, q]
                a[:, p], a[:, q] = rot_p, rot_q
                rot_p = c * a[p, :] - s * a[q, :]
                rot_q = s * a[p, :] + c * a[q, :]
                a[p, :], a[q, :] = rot_p, rot_q
                a[p, q] = a[q, p] = 0.0
                rot_p = c * v[:, p] - s * v[:, q]
                rot_q = s * v[:, p] + c * v[:, q]
                v[:, p], v[:, q] = rot_p, rot_q
    else:
        resid = offdiag_norm()
        if resid > threshold:
            raise NumericalError(
                "Jacobi did not converge in %d sweeps; off-diagonal "
                "residual %.3e (threshold %.3e)" % (sweep_cap, resid, threshold))

    vals = np.diag(a).copy()
    order = np.argsort(-vals, kind="stable")
    return vals[order], v[:, order]


def eigen(x: HermitianMatrix) -> EigenDecomposition:
    """Eigendecomposition via Jacobi on L(X) with doubled-spectrum pairing.

    Every eigenvalue of L(X) appears twice; one real representative (x, y)
    per pair is mapped to the complex eigenvector q = x + jy, keeping only
    representatives that are complex-orthogonal to those already selected.
    """
    n = x.n
    if n > 64:
        raise ValueError("kernel is for small matrices (n <= 64)")
    lam, vecs = jacobi_eigh(realify(x))
    kept_vals = []
    kept_vecs = []
    for i in range(2 * n):
        if len(kept_vals) == n:
            break
        q = vecs[:n, i] + 1j * vecs[n:, i]
        for kq in kept_vecs:
            q = q - np.vdot(kq, q) * kq
        norm = np.linalg.norm(q)
        if norm > 1e-6:  # duplicate representatives project to ~zero
            kept_vals.append(lam[i])
            kept_vecs.append(q / norm)
    if len(kept_vals) != n:
        raise NumericalError("eigenpair pairing failed: kept %d of %d"
                             % (len(kept_vals), n))
    return EigenDecomposition(eigenvalues=np.array(kept_vals),
                              eigenvectors=np.column_stack(kept_vecs))


def psd_status(x: HermitianMatrix, tol: float):
    """('psd', []) or ('indefinite', [(lambda, q), ...]) per Lemma-style test.

    PSD iff lambda_min >= -tol * max(1, trace).
    """
    if tol < 0:
        raise ValueError("tol must be nonnegative")
    dec = eigen(x)
    cutoff = -tol * max(1.0, x.trace())
    neg = dec.negative_pairs(cutoff)
    if neg:
        return "indefinite", neg
    return "psd", []


def psd_project(x: HermitianMatrix) -> HermitianMatrix:
    """Euclidean projection onto the PSD cone: keep the positive spectrum."""
    dec = eigen(x)
    n = x.n
    out = np.zeros((n, n), dtype=complex)
    for lam, q in zip(dec.eigenvalues, dec.eigenvectors.T):
        if lam > 0:
            out += lam * np.outer(q, q.conj())
    return HermitianMatrix(out)


def w_to_x(w: np.ndarray) -> HermitianMatrix:
    """Map a real symmetric 2n x 2n matrix to its associated Hermitian matrix.

    With k' = k + n:  X_kk = W_kk + W_k'k',  Re X_km = W_km + W_k'm',
    Im X_km = W_mk' - W_km'.  The imaginary-part sign is fixed so that the
    (c, s) values of a feasible real-relaxation point reappear as the real and
    imaginary parts of X.
    """
    w = np.asarray(w, dtype=float)
    if w.ndim != 2 or w.shape[0] != w.shape[1] or w.shape[0] % 2 != 0:
        raise ValueError("even-dimensional square matrix required")
    n = w.shape[0] // 2
    a, d = w[:n, :n], w[n:, n:]
    b = w[:n, n:]  # rows k, cols m'
    re = a + d
    im = b.T - b   # Im X_km = W_mk' - W_km' = b[m,k] - b[k,m]
    return HermitianMatrix(re + 1j * im)


def rank_of(x, tol: float) -> int:
    """Numerical rank: eigenvalue count above tol * max(1, fro norm).

    Accepts HermitianMatrix, real symmetric arrays, or general complex
    arrays (singular values are used for the non-symmetric case).
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    if isinstance(x, HermitianMatrix):
        vals = np.abs(eigen(x).eigenvalues)
        scale = max(1.0, x.fro_norm())
    else:
        a = np.asarray(x)
        scale = max(1.0, float(np.linalg.norm(a)))
        if np.iscomplexobj(a) or not np.allclose(a, a.T, atol=0.0):
            vals = np.linalg.svd(a, compute_uv=False)
        else:
            vals = np.abs(jacobi_eigh(a)[0])
    return int(np.count_nonzero(vals > tol * scale))
