"""Deterministic quantum N-combs.

A deterministic N-comb is a positive operator on the 2N alternating
input/output spaces H_0 .. H_{2N-1} whose partial traces obey the recursive
normalization cascade

    Tr_{2n-1} R^(n) = I_{2n-2} (x) R^(n-1),      Tr_1 R^(1) = I_0.

Convention: the comb operator lives on H_{2N-1} (x) ... (x) H_0, i.e. space 0
is the LAST Kronecker factor.  A signature lists dimensions in label order
(d_0, ..., d_{2N-1}).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import linalg
from .errors import DimensionMismatchError, ValidationError
from .linalg import DEFAULT_TOL, TolerancePolicy


@dataclass(frozen=True)
class CombSignature:
    """Hilbert-space dimensions (d_0, ..., d_{2N-1}) of a comb's teeth."""

    dims: tuple

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        object.__setattr__(self, "dims", dims)
        if len(dims) % 2 != 0:
            raise DimensionMismatchError(f"signature length must be even, got {dims}")
        if any(d < 1 for d in dims):
            raise DimensionMismatchError(f"dimensions must be >= 1, got {dims}")

    @property
    def n(self) -> int:
        return len(self.dims) // 2

    @property
    def total_dim(self) -> int:
        return math.prod(self.dims) if self.dims else 1

    @property
    def kron_dims(self) -> tuple:
        """Factor dimensions in Kronecker order: (d_{2N-1}, ..., d_0)."""
        return tuple(reversed(self.dims))

    @property
    def odd_product(self) -> int:
        return math.prod(self.dims[1::2]) if self.dims else 1

    def truncated(self, level: int) -> "CombSignature":
        """Signature of the reduced comb R^(level)."""
        return CombSignature(self.dims[: 2 * level])


@dataclass(frozen=True)
class DeterministicComb:
    signature: CombSignature
    operator: np.ndarray


@dataclass(frozen=True)
class CombVerdict:
    ok: bool
    level_residuals: tuple
    min_eigenvalue: float

    @property
    def max_residual(self) -> float:
        return max(self.level_residuals) if self.level_residuals else 0.0


def central_comb(sig: CombSignature) -> DeterministicComb:
    """The maximally mixed deterministic comb I / (product of output dims)."""
    op = np.eye(sig.total_dim, dtype=complex) / sig.odd_product
    return DeterministicComb(signature=sig, operator=op)


def _reduce_once(op: np.ndarray, sig: CombSignature, level: int) -> np.ndarray:
    """Extract R^(level-1) as Tr_{2n-1,2n-2} R^(level) / d_{2n-2}."""
    sub = sig.truncated(level)
    reduced = linalg.partial_trace(op, sub.kron_dims, {0, 1})
    return reduced / sub.dims[-2]


def is_deterministic_comb(
    r: np.ndarray,
    sig: CombSignature,
    tol: float | None = None,
    pol: TolerancePolicy = DEFAULT_TOL,
) -> CombVerdict:
    """Validate the normalization cascade, reporting one residual per level."""
    r = linalg.check_hermitian(r, pol)
    if r.shape[0] != sig.total_dim:
        raise DimensionMismatchError(
            f"operator dimension {r.shape[0]} != signature total {sig.total_dim}"
        )
    if tol is None:
        tol = pol.eps_comb
    eig = linalg.hermitian_eig(r, pol)
    lam_min = float(eig.values[-1])
    psd_ok = lam_min >= -pol.supp_tol(r.shape[0], float(eig.values[0]))

    residuals = []
    current = r
    for level in range(sig.n, 0, -1):
        sub = sig.truncated(level)
        lhs = linalg.partial_trace(current, sub.kron_dims, {0})
        if level == 1:
            rhs = np.eye(sub.dims[0], dtype=complex)
            current = np.array([[np.trace(current).real / sub.dims[0]]], dtype=complex)
        else:
            nxt = _reduce_once(current, sig, level)
            rhs = linalg.kron(np.eye(sub.dims[-2], dtype=complex), nxt)
            current = nxt
        residuals.append(linalg.max_abs(lhs - rhs))
    ok = psd_ok and all(res <= tol for res in residuals)
    return CombVerdict(ok=ok, level_residuals=tuple(residuals), min_eigenvalue=lam_min)


def reduced_comb(
    comb: DeterministicComb,
    level: int,
    pol: TolerancePolicy = DEFAULT_TOL,
) -> DeterministicComb:
    """Return the reduced comb R^(level), 0 <= level <= N."""
    sig = comb.signature
    if not 0 <= level <= sig.n:
        raise DimensionMismatchError(f"level {level} out of range 0..{sig.n}")
    verdict = is_deterministic_comb(comb.operator, sig, pol=pol)
    if not verdict.ok:
        raise ValidationError(
            f"not a deterministic comb: residuals {verdict.level_residuals}, "
            f"min eigenvalue {verdict.min_eigenvalue:.3e}"
        )
    op = comb.operator
    for lev in range(sig.n, level, -1):
        op = _reduce_once(op, sig, lev)
    return DeterministicComb(signature=sig.truncated(level), operator=op)


def _level_blocks(sig: CombSignature):
    """Per-level (top identity dim, odd dim, lower dim) for the variable basis."""
    dims = sig.dims
    for n in range(sig.n, 0, -1):
        odd = dims[2 * n - 1]
        top = math.prod(dims[2 * n :]) if 2 * n < len(dims) else 1
        low = math.prod(dims[: 2 * n - 1])
        yield top, odd, low


def comb_variable_basis(sig: CombSignature) -> list:
    """The HS-orthonormal variable-direction basis of the deterministic-comb family.

    Listed level by level from the last tooth down: traceless operators on each
    odd (output) space tensored with a full Hermitian basis of everything
    below, padded with identity above.  Adding any combination of these to the
    central comb preserves the normalization cascade exactly; only positivity
    can fail.
    """
    out = []
    for top, odd, low in _level_blocks(sig):
        eye_top = np.eye(top, dtype=complex) / math.sqrt(top)
        for e in linalg.traceless_hermitian_basis(odd):
            for f in linalg.hermitian_basis(low):
                out.append(linalg.kron(eye_top, linalg.kron(e, f)))
    return out


def comb_variable_count(sig: CombSignature) -> int:
    """Closed-form size of the variable basis (independent of enumeration)."""
    total = 0
    dims = sig.dims
    for n in range(1, sig.n + 1):
        odd = dims[2 * n - 1]
        low = math.prod(dims[: 2 * n - 1])
        total += (odd * odd - 1) * low * low
    return total


def comb_forbidden_directions(sig: CombSignature) -> list:
    """Directions excluded by the cascade: identity on an odd space times a
    traceless operator on the even space directly below it."""
    out = []
    dims = sig.dims
    for n in range(sig.n, 0, -1):
        even = dims[2 * n - 2]
        top = math.prod(dims[2 * n - 1 :])
        low = math.prod(dims[: 2 * n - 2])
        eye_top = np.eye(top, dtype=complex) / math.sqrt(top)
        for e in linalg.traceless_hermitian_basis(even):
            for f in linalg.hermitian_basis(low):
                out.append(linalg.kron(eye_top, linalg.kron(e, f)))
    return out


def random_deterministic_comb(
    sig: CombSignature,
    seed=None,
    spread: float = 0.5,
    pol: TolerancePolicy = DEFAULT_TOL,
) -> DeterministicComb:
    """Random comb from the cascade-preserving parametrization.

    Draws random coefficients on the variable basis and rescales the variable
    part so that the smallest eigenvalue stays at ``(1 - spread)`` times the
    central comb's.  ``spread = 0`` returns the central comb; ``spread = 1``
    touches the boundary of positivity.
    """
    if not 0.0 <= spread <= 1.0:
        raise ValidationError(f"spread must lie in [0, 1], got {spread}")
    rng = np.random.default_rng(seed)
    base = central_comb(sig)
    basis = comb_variable_basis(sig)
    if not basis or spread == 0.0:
        return base
    coeff = rng.standard_normal(len(basis))
    var = sum(c * g for c, g in zip(coeff, basis))
    lam_min = float(np.linalg.eigvalsh(var)[0])
    lam0 = 1.0 / sig.odd_product
    if lam_min >= -1e-15:
        return base
    scale = spread * lam0 / (-lam_min)
    return DeterministicComb(signature=sig, operator=base.operator + scale * var)
