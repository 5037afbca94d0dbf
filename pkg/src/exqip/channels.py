"""Channels and instruments via Choi-Jamiolkowski operators.

Conventions: ``|A>> = (A (x) I)|I>>`` with ``|I>> = sum_i |i>|i>``, so the
operator-to-vector map is a plain row-major reshape and Choi operators live on
H_1 (x) H_0 (output factor first).  Minimal Kraus representations come from the
Choi spectral decomposition.

Extremality routes: Choi's criterion (independence of {K_m^dagger K_n}), the
rank-test form of the master criterion (their equivalence is a test oracle),
the pooled Kraus-product criterion for instruments, and the square-root /
Lueders constructions.  The appendix fixtures exercise all seven attainable
(instrument, channel, POVM) extremality combinations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import combs, gqi as gqi_mod, linalg, testers
from .combs import CombSignature
from .errors import DimensionMismatchError, NotPositiveError, ValidationError
from .gqi import Gqi
from .linalg import DEFAULT_TOL, TolerancePolicy
from .testers import Povm


@dataclass(frozen=True)
class Channel:
    d1: int
    d0: int
    choi: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "choi", np.asarray(self.choi, dtype=complex))
        total = self.d1 * self.d0
        if self.choi.shape != (total, total):
            raise DimensionMismatchError(
                f"Choi shape {self.choi.shape} does not match d1*d0 = {total}"
            )


@dataclass(frozen=True)
class Instrument:
    d1: int
    d0: int
    operators: tuple

    def __post_init__(self):
        object.__setattr__(
            self, "operators", tuple(np.asarray(n, dtype=complex) for n in self.operators)
        )
        total = self.d1 * self.d0
        for n in self.operators:
            if n.shape != (total, total):
                raise DimensionMismatchError(
                    f"operator shape {n.shape} does not match d1*d0 = {total}"
                )

    @property
    def n_outcomes(self) -> int:
        return len(self.operators)


def vec_op(a: np.ndarray) -> np.ndarray:
    """|A>> as a vector on H_1 (x) H_0 (row-major reshape)."""
    return np.asarray(a, dtype=complex).ravel()


def unvec_op(v: np.ndarray, d1: int, d0: int) -> np.ndarray:
    return np.asarray(v, dtype=complex).reshape(d1, d0)


def kraus_to_choi(kraus) -> np.ndarray:
    ks = [np.asarray(k, dtype=complex) for k in kraus]
    vs = [vec_op(k) for k in ks]
    dim = vs[0].size
    out = np.zeros((dim, dim), dtype=complex)
    for v in vs:
        out += np.outer(v, v.conj())
    return out


def choi_to_kraus(choi: np.ndarray, d1: int, d0: int, pol: TolerancePolicy = DEFAULT_TOL) -> list:
    """Minimal Kraus list from the Choi spectral form; count = eigen-rank."""
    eig = linalg.hermitian_eig(choi, pol)
    lam_max = float(eig.values[0]) if eig.values.size else 0.0
    tau = pol.supp_tol(choi.shape[0], lam_max)
    if eig.values.size and float(eig.values[-1]) < -tau:
        raise NotPositiveError(f"Choi operator has negative eigenvalue {eig.values[-1]:.3e}")
    return [
        math.sqrt(eig.values[m]) * unvec_op(eig.vectors[:, m], d1, d0)
        for m in range(choi.shape[0])
        if eig.values[m] > tau
    ]


def channel_kraus(c: Channel, pol: TolerancePolicy = DEFAULT_TOL) -> list:
    return choi_to_kraus(c.choi, c.d1, c.d0, pol)


def instrument_kraus(ins: Instrument, pol: TolerancePolicy = DEFAULT_TOL) -> list:
    """Per-outcome minimal Kraus lists."""
    return [choi_to_kraus(n, ins.d1, ins.d0, pol) for n in ins.operators]


def channel_from_kraus(kraus, d1: int | None = None, d0: int | None = None) -> Channel:
    ks = [np.asarray(k, dtype=complex) for k in kraus]
    if d1 is None or d0 is None:
        d1, d0 = ks[0].shape
    return Channel(d1=d1, d0=d0, choi=kraus_to_choi(ks))


def instrument_from_kraus(outcome_kraus, d1: int | None = None, d0: int | None = None) -> Instrument:
    """Build an instrument from one Kraus list per outcome."""
    ops = []
    for ks in outcome_kraus:
        ks = [np.asarray(k, dtype=complex) for k in ks]
        if d1 is None or d0 is None:
            d1, d0 = ks[0].shape
        ops.append(kraus_to_choi(ks))
    return Instrument(d1=d1, d0=d0, operators=tuple(ops))


def as_gqi(obj) -> Gqi:
    """Channel or instrument as a GQI on the signature (d_0, d_1)."""
    if isinstance(obj, Channel):
        return Gqi(signature=CombSignature((obj.d0, obj.d1)), outcomes=(obj.choi,))
    return Gqi(signature=CombSignature((obj.d0, obj.d1)), outcomes=obj.operators)


def is_valid_channel(c: Channel, tol: float | None = None, pol: TolerancePolicy = DEFAULT_TOL) -> bool:
    return gqi_mod.is_valid_gqi(as_gqi(c), tol=tol, pol=pol).ok


def is_valid_instrument(ins: Instrument, tol: float | None = None, pol: TolerancePolicy = DEFAULT_TOL) -> bool:
    return gqi_mod.is_valid_gqi(as_gqi(ins), tol=tol, pol=pol).ok


def choi_condition(c: Channel, pol: TolerancePolicy = DEFAULT_TOL) -> bool:
    """Choi's criterion: {K_m^dagger K_n} over the minimal Kraus family must be
    linearly independent."""
    if not is_valid_channel(c, pol=pol):
        raise ValidationError("not a valid channel")
    ks = channel_kraus(c, pol)
    products = [km.conj().T @ kn for km in ks for kn in ks]
    return linalg.complex_family_rank(products, pol) == len(products)


def channel_extremal_theorem1(c: Channel, pol: TolerancePolicy = DEFAULT_TOL) -> bool:
    """Master-criterion form: {|K_m>><<K_n|} pooled with {sigma_a (x) I} and
    {sigma_a (x) sigma_b} must be linearly independent."""
    if not is_valid_channel(c, pol=pol):
        raise ValidationError("not a valid channel")
    ks = channel_kraus(c, pol)
    vs = [vec_op(k) for k in ks]
    family = [np.outer(vm, vn.conj()) for vm in vs for vn in vs]
    eye0 = np.eye(c.d0, dtype=complex)
    for sa in linalg.traceless_hermitian_basis(c.d1):
        family.append(linalg.kron(sa, eye0))
        for sb in linalg.traceless_hermitian_basis(c.d0):
            family.append(linalg.kron(sa, sb))
    return linalg.complex_family_rank(family, pol) == len(family)


def instrument_extremal(ins: Instrument, pol: TolerancePolicy = DEFAULT_TOL) -> bool:
    """Kraus-product criterion: the pooled per-outcome families
    {K_m^(i)dagger K_n^(i)} must be linearly independent."""
    if not is_valid_instrument(ins, pol=pol):
        raise ValidationError("not a valid instrument")
    products = []
    for ks in instrument_kraus(ins, pol):
        products.extend(km.conj().T @ kn for km in ks for kn in ks)
    return linalg.complex_family_rank(products, pol) == len(products)


def instrument_extremal_rank_test(ins: Instrument, pol: TolerancePolicy = DEFAULT_TOL) -> bool:
    """Direct master-criterion rank test on the GQI view (cross-check oracle)."""
    return gqi_mod.is_extremal(as_gqi(ins), pol=pol).extremal


@dataclass(frozen=True)
class InstrumentRankBound:
    outcome_ranks: tuple
    lhs: int
    rhs: int
    ok: bool


def instrument_rank_bound(ins: Instrument, pol: TolerancePolicy = DEFAULT_TOL) -> InstrumentRankBound:
    """Necessary condition for extremality: sum of squared ranks <= d_0^2."""
    ranks = [len(ks) for ks in instrument_kraus(ins, pol)]
    lhs = sum(r * r for r in ranks)
    rhs = ins.d0 ** 2
    return InstrumentRankBound(outcome_ranks=tuple(ranks), lhs=lhs, rhs=rhs, ok=lhs <= rhs)


def _sqrt_psd(a: np.ndarray, pol: TolerancePolicy) -> np.ndarray:
    eig = linalg.hermitian_eig(a, pol)
    return (eig.vectors * np.sqrt(np.clip(eig.values, 0.0, None))) @ eig.vectors.conj().T


def sqrt_instrument(p: Povm, pol: TolerancePolicy = DEFAULT_TOL) -> Instrument:
    """The instrument rho -> sqrt(P_i) rho sqrt(P_i); extremal exactly when the
    effects are linearly independent."""
    kraus = [[_sqrt_psd(e, pol)] for e in p.effects]
    return instrument_from_kraus(kraus, d1=p.d, d0=p.d)


def luders_instrument(projectors) -> Instrument:
    """Lueders instrument of an orthogonal projector decomposition."""
    ps = [np.asarray(p, dtype=complex) for p in projectors]
    d = ps[0].shape[0]
    return instrument_from_kraus([[p] for p in ps], d1=d, d0=d)


def induced_channel(ins: Instrument) -> Channel:
    return Channel(d1=ins.d1, d0=ins.d0, choi=sum(ins.operators))


def induced_povm(ins: Instrument) -> Povm:
    """P_i = (Tr_1 N_i)^T, so that Tr[P_i rho] reproduces the Kraus-rule
    outcome probabilities under the |A>> convention."""
    effects = []
    for n in ins.operators:
        effects.append(linalg.partial_trace(n, (ins.d1, ins.d0), {0}).T)
    return Povm(d=ins.d0, effects=tuple(effects))


@dataclass(frozen=True)
class CombinationTriple:
    instrument: bool
    channel: bool
    povm: bool

    def as_signs(self) -> tuple:
        return tuple("+" if flag else "-" for flag in (self.instrument, self.channel, self.povm))


def classify_combination(ins: Instrument, pol: TolerancePolicy = DEFAULT_TOL) -> CombinationTriple:
    """Extremality of an instrument, its induced channel, and its induced POVM."""
    return CombinationTriple(
        instrument=instrument_extremal(ins, pol),
        channel=choi_condition(induced_channel(ins), pol),
        povm=testers.povm_is_extremal(induced_povm(ins), pol),
    )


APPENDIX_TABLE = {
    1: ("+", "+", "+"),
    2: ("+", "+", "-"),
    3: ("+", "-", "+"),
    4: ("+", "-", "-"),
    6: ("-", "+", "-"),
    7: ("-", "-", "+"),
    8: ("-", "-", "-"),
}

_KET0 = np.array([1.0, 0.0], dtype=complex)
_KET1 = np.array([0.0, 1.0], dtype=complex)


def _commuting_independent_povm() -> Povm:
    p0 = np.diag([1.0 / 3.0, 2.0 / 3.0]).astype(complex)
    p1 = np.diag([2.0 / 3.0, 1.0 / 3.0]).astype(complex)
    return Povm(d=2, effects=(p0, p1))


def combination_fixture(k: int) -> Instrument:
    """Concrete instrument realizing row ``k`` of the extremality table.

    Row 5 (non-extremal instrument with extremal channel and POVM) is an open
    problem and has no fixture.
    """
    if k == 5:
        raise ValidationError(
            "combination 5 is an open problem: no instrument with a non-extremal "
            "instrument but extremal induced channel and POVM is known"
        )
    if k == 1:
        return instrument_from_kraus([[np.eye(2, dtype=complex)]], d1=2, d0=2)
    if k == 2:
        povm = _commuting_independent_povm()
        sp0 = _sqrt_psd(povm.effects[0], DEFAULT_TOL)
        sp1 = _sqrt_psd(povm.effects[1], DEFAULT_TOL)
        w = np.outer(_KET0, _KET1.conj()) - np.outer(_KET1, _KET0.conj())
        plus = (_KET0 + _KET1) / math.sqrt(2.0)
        m0 = linalg.kron(sp0, plus[:, None])
        m1 = (
            linalg.kron(sp1, _KET0[:, None]) + linalg.kron(w @ sp1, _KET1[:, None])
        ) / math.sqrt(2.0)
        return instrument_from_kraus([[m0], [m1]], d1=4, d0=2)
    if k == 3:
        return luders_instrument([np.diag([1.0, 0.0]), np.diag([0.0, 1.0])])
    if k == 4:
        return sqrt_instrument(_commuting_independent_povm())
    if k == 6:
        gamma = 0.5
        k1 = np.array([[1.0, 0.0], [0.0, math.sqrt(1.0 - gamma)]], dtype=complex)
        k2 = np.array([[0.0, math.sqrt(gamma)], [0.0, 0.0]], dtype=complex)
        a = instrument_from_kraus([[k1], [k2]], d1=2, d0=2)
        b = instrument_from_kraus([[k2], [k1]], d1=2, d0=2)
        return Instrument(
            d1=2,
            d0=2,
            operators=tuple(0.5 * x + 0.5 * y for x, y in zip(a.operators, b.operators)),
        )
    if k == 7:
        pi = [np.diag([1.0, 0.0]).astype(complex), np.diag([0.0, 1.0]).astype(complex)]
        sx = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
        a = instrument_from_kraus([[p] for p in pi], d1=2, d0=2)
        b = instrument_from_kraus([[sx @ p] for p in pi], d1=2, d0=2)
        return Instrument(
            d1=2,
            d0=2,
            operators=tuple(0.5 * x + 0.5 * y for x, y in zip(a.operators, b.operators)),
        )
    if k == 8:
        h = np.array([[1.0, 1.0], [1.0, -1.0]], dtype=complex) / math.sqrt(2.0)
        comp = [np.diag([1.0, 0.0]).astype(complex), np.diag([0.0, 1.0]).astype(complex)]
        had = [h @ p @ h.conj().T for p in comp]
        a = luders_instrument(comp)
        b = luders_instrument(had)
        return Instrument(
            d1=2,
            d0=2,
            operators=tuple(0.5 * x + 0.5 * y for x, y in zip(a.operators, b.operators)),
        )
    raise ValidationError(f"unknown combination {k}; valid rows are 1,2,3,4,6,7,8")


def random_unitary(d: int, rng) -> np.ndarray:
    g = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    q, r = np.linalg.qr(g)
    return q * (np.diagonal(r) / np.abs(np.diagonal(r)))


def random_channel(d0: int, d1: int, kraus_count: int, rng) -> Channel:
    """Random channel via a Haar-ish random Stinespring isometry.

    ``kraus_count`` is clamped up to ceil(d0/d1), the minimum for an isometry
    to exist."""
    kraus_count = max(kraus_count, -(-d0 // d1))
    g = rng.standard_normal((d1 * kraus_count, d0)) + 1j * rng.standard_normal(
        (d1 * kraus_count, d0)
    )
    q, _ = np.linalg.qr(g)
    ks = [q[m * d1 : (m + 1) * d1, :] for m in range(kraus_count)]
    return channel_from_kraus(ks, d1=d1, d0=d0)


def random_instrument(d0: int, d1: int, outcome_kraus_counts, rng) -> Instrument:
    """Random instrument: random channel Kraus family partitioned per outcome."""
    total = sum(outcome_kraus_counts)
    chan = random_channel(d0, d1, total, rng)
    ks = channel_kraus(chan)
    # Channel rank may collapse below the requested count; pad the partition.
    while len(ks) < total:
        ks.append(np.zeros((d1, d0), dtype=complex))
    groups = []
    pos = 0
    for count in outcome_kraus_counts:
        groups.append(ks[pos : pos + count])
        pos += count
    return instrument_from_kraus(groups, d1=d1, d0=d0)
