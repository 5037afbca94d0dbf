"""Dense complex linear-algebra kernel.

Everything downstream (combs, instruments, testers, channels) is built on the
handful of primitives in this module: Hermitian eigendecompositions, SVD-based
numerical rank with nullvector extraction, partial traces, Hermitian operator
bases, and the real vectorization that turns operator-independence questions
into matrix-rank questions.

Operators are plain complex ``numpy`` arrays.  All functions are pure.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatchError, NotHermitianError, NotPositiveError


@dataclass(frozen=True)
class TolerancePolicy:
    """Single-knob tolerance policy.

    ``eps_rel`` scales every threshold coherently:

    * Hermiticity:  ``eps_rel * max(1, |A|_max)``
    * rank cutoff:  ``max(m, n) * sigma_max * eps_rel``
    * support cutoff: ``dim * max(lambda_max, 1) * eps_rel``
    * normalization residuals: ``comb_factor * eps_rel`` (two partial traces
      of eigendecomposition-accurate operators)
    """

    eps_rel: float = 1e-10
    comb_factor: float = 10.0

    @property
    def eps_comb(self) -> float:
        return self.comb_factor * self.eps_rel

    def herm_tol(self, a: np.ndarray) -> float:
        scale = float(np.abs(a).max()) if a.size else 0.0
        return self.eps_rel * max(1.0, scale)

    def rank_tol(self, n_rows: int, n_cols: int, sigma_max: float) -> float:
        return max(n_rows, n_cols) * sigma_max * self.eps_rel

    def supp_tol(self, dim: int, lambda_max: float) -> float:
        # The max(., 1) floor keeps near-zero outcomes (a legal degenerate
        # case) from tripping the negativity check on float dust.
        return dim * max(lambda_max, 1.0) * self.eps_rel

    def scaled(self, eps_rel: float) -> "TolerancePolicy":
        return TolerancePolicy(eps_rel=eps_rel, comb_factor=self.comb_factor)


DEFAULT_TOL = TolerancePolicy()


@dataclass(frozen=True)
class EigenDecomposition:
    """Eigenvalues sorted descending; eigenvectors as matching columns."""

    values: np.ndarray
    vectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        return (self.vectors * self.values) @ self.vectors.conj().T


def max_abs(a: np.ndarray) -> float:
    return float(np.abs(a).max()) if a.size else 0.0


def hs_inner(a: np.ndarray, b: np.ndarray) -> complex:
    """Hilbert-Schmidt inner product Tr(a^dagger b)."""
    return complex(np.trace(a.conj().T @ b))


def check_hermitian(a: np.ndarray, pol: TolerancePolicy = DEFAULT_TOL) -> np.ndarray:
    """Check Hermiticity within tolerance and return the symmetrized operator."""
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionMismatchError(f"expected a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise NotHermitianError("matrix contains non-finite entries")
    dev = max_abs(a - a.conj().T)
    if dev > pol.herm_tol(a):
        raise NotHermitianError(f"not Hermitian: |A - A^dagger|_max = {dev:.3e}")
    return (a + a.conj().T) / 2


def kron(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.kron(a, b)


def kron_all(factors) -> np.ndarray:
    out = np.eye(1, dtype=complex)
    for f in factors:
        out = np.kron(out, f)
    return out


def partial_trace(a: np.ndarray, dims, traced) -> np.ndarray:
    """Trace out the tensor factors listed in ``traced``.

    ``dims`` lists the factor dimensions in Kronecker order (first factor is
    the leftmost / most significant index block).
    """
    a = np.asarray(a, dtype=complex)
    dims = list(int(d) for d in dims)
    traced = set(int(t) for t in traced)
    total = math.prod(dims)
    if a.shape != (total, total):
        raise DimensionMismatchError(
            f"operator shape {a.shape} does not match factor dims {dims}"
        )
    if any(t < 0 or t >= len(dims) for t in traced):
        raise DimensionMismatchError(f"traced indices {traced} out of range for {dims}")
    t = a.reshape(*dims, *dims)
    n = len(dims)
    for i in sorted(traced, reverse=True):
        t = np.trace(t, axis1=i, axis2=i + n)
        n -= 1
    keep = math.prod(d for i, d in enumerate(dims) if i not in traced)
    return np.asarray(t).reshape(keep, keep)


def hermitian_eig(a: np.ndarray, pol: TolerancePolicy = DEFAULT_TOL) -> EigenDecomposition:
    """Eigendecomposition of a Hermitian operator, eigenvalues descending."""
    h = check_hermitian(a, pol)
    w, v = np.linalg.eigh(h)
    order = np.argsort(w)[::-1]
    return EigenDecomposition(values=w[order].copy(), vectors=v[:, order].copy())


def _fix_sign(vec: np.ndarray) -> np.ndarray:
    # Deterministic orientation: make the largest-magnitude entry positive.
    k = int(np.argmax(np.abs(vec)))
    if vec[k] < 0:
        return -vec
    return vec


def numerical_rank(vectors, pol: TolerancePolicy = DEFAULT_TOL):
    """Rank of a family of real vectors, with a nullvector when deficient.

    Returns ``(rank, nullvector)``.  The nullvector ``c`` (unit norm) satisfies
    ``|sum_j c_j x_j| <= tau`` with ``tau = max(m, n) * sigma_max * eps_rel``.
    """
    rows = [np.asarray(v, dtype=float).ravel() for v in vectors]
    if not rows:
        return 0, None
    lengths = {r.size for r in rows}
    if len(lengths) != 1:
        raise DimensionMismatchError(f"vectors of mixed lengths {sorted(lengths)}")
    x = np.vstack(rows)
    u, s, _ = np.linalg.svd(x, full_matrices=True)
    sigma_max = float(s[0]) if s.size else 0.0
    tau = pol.rank_tol(*x.shape, sigma_max)
    rank = int(np.count_nonzero(s > tau))
    if rank == len(rows):
        return rank, None
    return rank, _fix_sign(u[:, -1].copy())


def family_singular_values(vectors) -> np.ndarray:
    rows = [np.asarray(v, dtype=float).ravel() for v in vectors]
    if not rows:
        return np.zeros(0)
    return np.linalg.svd(np.vstack(rows), compute_uv=False)


def complex_family_rank(mats, pol: TolerancePolicy = DEFAULT_TOL) -> int:
    """Rank over the complex field of a family of matrices of equal shape."""
    rows = [np.asarray(m, dtype=complex).ravel() for m in mats]
    if not rows:
        return 0
    x = np.vstack(rows)
    s = np.linalg.svd(x, compute_uv=False)
    tau = pol.rank_tol(*x.shape, float(s[0]) if s.size else 0.0)
    return int(np.count_nonzero(s > tau))


def vectorize_hermitian(a: np.ndarray) -> np.ndarray:
    """Real vector of length d^2, isometric for the HS inner product.

    Layout: diagonal (real), then sqrt(2)*Re(upper triangle) row-major, then
    sqrt(2)*Im(upper triangle) row-major.
    """
    a = np.asarray(a, dtype=complex)
    d = a.shape[0]
    iu = np.triu_indices(d, k=1)
    upper = a[iu]
    return np.concatenate(
        [np.real(np.diagonal(a)), math.sqrt(2.0) * upper.real, math.sqrt(2.0) * upper.imag]
    )


def unvectorize_hermitian(v: np.ndarray, d: int) -> np.ndarray:
    """Inverse of :func:`vectorize_hermitian`."""
    v = np.asarray(v, dtype=float)
    if v.size != d * d:
        raise DimensionMismatchError(f"vector length {v.size} != {d}^2")
    n_off = d * (d - 1) // 2
    diag = v[:d]
    re = v[d : d + n_off] / math.sqrt(2.0)
    im = v[d + n_off :] / math.sqrt(2.0)
    out = np.diag(diag).astype(complex)
    iu = np.triu_indices(d, k=1)
    out[iu] = re + 1j * im
    out[(iu[1], iu[0])] = re - 1j * im
    return out


def psd_check(a: np.ndarray, pol: TolerancePolicy = DEFAULT_TOL) -> float:
    """Smallest eigenvalue; raises if below the (negative) support cutoff."""
    eig = hermitian_eig(a, pol)
    lam_max = float(eig.values[0]) if eig.values.size else 0.0
    lam_min = float(eig.values[-1]) if eig.values.size else 0.0
    if lam_min < -pol.supp_tol(a.shape[0], lam_max):
        raise NotPositiveError(f"negative eigenvalue {lam_min:.3e}")
    return lam_min


def support_projector(t: np.ndarray, pol: TolerancePolicy = DEFAULT_TOL) -> np.ndarray:
    eig = hermitian_eig(t, pol)
    lam_max = float(eig.values[0]) if eig.values.size else 0.0
    tau = pol.supp_tol(t.shape[0], lam_max)
    cols = eig.vectors[:, eig.values > tau]
    return cols @ cols.conj().T


def support_basis(t: np.ndarray, pol: TolerancePolicy = DEFAULT_TOL) -> list:
    """HS-orthonormal basis of Hermitian operators supported on Supp(t).

    ``t`` must be positive semidefinite within tolerance; returns r^2 elements
    for eigen-rank r: the projectors ``v_n v_n^dagger``, then the symmetric
    pairs, then the antisymmetric pairs (n < m, lexicographic).
    """
    eig = hermitian_eig(t, pol)
    d = t.shape[0]
    lam_max = float(eig.values[0]) if eig.values.size else 0.0
    tau = pol.supp_tol(d, lam_max)
    if eig.values.size and float(eig.values[-1]) < -tau:
        raise NotPositiveError(f"negative eigenvalue {eig.values[-1]:.3e}")
    vecs = [eig.vectors[:, k] for k in range(d) if eig.values[k] > tau]
    r = len(vecs)
    out = []
    for n in range(r):
        out.append(np.outer(vecs[n], vecs[n].conj()))
    s = 1.0 / math.sqrt(2.0)
    for n in range(r):
        for m in range(n + 1, r):
            cross = np.outer(vecs[n], vecs[m].conj())
            out.append(s * (cross + cross.conj().T))
    for n in range(r):
        for m in range(n + 1, r):
            cross = np.outer(vecs[n], vecs[m].conj())
            out.append(1j * s * (cross - cross.conj().T))
    return out


def traceless_hermitian_basis(d: int) -> list:
    """Generalized Gell-Mann basis: d^2 - 1 HS-orthonormal traceless Hermitians.

    Ordering: symmetric family, antisymmetric family, diagonal family last;
    index-lexicographic within each family.
    """
    if d < 1:
        raise DimensionMismatchError(f"dimension must be >= 1, got {d}")
    out = []
    s = 1.0 / math.sqrt(2.0)
    for j in range(d):
        for k in range(j + 1, d):
            e = np.zeros((d, d), dtype=complex)
            e[j, k] = s
            e[k, j] = s
            out.append(e)
    for j in range(d):
        for k in range(j + 1, d):
            e = np.zeros((d, d), dtype=complex)
            e[j, k] = -1j * s
            e[k, j] = 1j * s
            out.append(e)
    for l in range(1, d):
        e = np.zeros((d, d), dtype=complex)
        norm = 1.0 / math.sqrt(l * (l + 1))
        for j in range(l):
            e[j, j] = norm
        e[l, l] = -l * norm
        out.append(e)
    return out


def hermitian_basis(d: int) -> list:
    """Full HS-orthonormal Hermitian basis: I/sqrt(d) followed by the traceless family."""
    return [np.eye(d, dtype=complex) / math.sqrt(d)] + traceless_hermitian_basis(d)
