"""Randomized property suites and fixture generators.

These back the ``exqip suite`` CLI command and the acceptance tests: the
channel-criteria equivalence check, verdict invariance under the
normalization-changing xi transform, the counting bounds as necessary
conditions, and the appendix fixture table regression.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import channels, gqi as gqi_mod, linalg, testers
from .channels import APPENDIX_TABLE
from .linalg import DEFAULT_TOL, TolerancePolicy


@dataclass
class SuiteResult:
    name: str
    total: int = 0
    failures: int = 0
    details: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.failures == 0

    def record(self, ok: bool, detail: str = "") -> None:
        self.total += 1
        if not ok:
            self.failures += 1
            if detail:
                self.details.append(detail)

    def merge(self, other: "SuiteResult") -> None:
        self.total += other.total
        self.failures += other.failures
        self.details.extend(other.details)

    def summary(self) -> dict:
        return {
            "suite": self.name,
            "total": self.total,
            "failures": self.failures,
            "ok": self.ok,
            "details": self.details[:20],
        }


# ---------------------------------------------------------------------------
# Generators
# ---------------------------------------------------------------------------


def random_full_rank_state(d: int, rng, floor: float = 0.05) -> np.ndarray:
    """Random density operator with eigenvalues bounded away from zero."""
    u = channels.random_unitary(d, rng)
    w = rng.random(d) + floor
    w /= w.sum()
    return (u * w) @ u.conj().T


def random_extremal_qubit_tester(rng) -> testers.Tester:
    """Entangled two-outcome tester, sometimes split to 3 or 4 outcomes."""
    angle = rng.uniform(0.15, math.pi / 4)
    t = testers.schmidt_tester(
        angle, channels.random_unitary(2, rng), channels.random_unitary(2, rng)
    )
    style = rng.integers(0, 3)
    if style == 1:
        effects = testers.projective_split_effects(t.outcomes[1])
        t = testers.split_outcome(t, 1, effects)
    elif style == 2:
        effects = testers.projective_split_effects(t.outcomes[1])
        merged = [effects[0] + effects[1], effects[2]]
        t = testers.split_outcome(t, 1, merged)
    return t


def random_nonextremal_qubit_tester(rng) -> testers.Tester:
    """Product-vector testers and mixtures of distinct extremal testers."""
    if rng.integers(0, 2) == 0:
        return testers.schmidt_tester(
            0.0, channels.random_unitary(2, rng), channels.random_unitary(2, rng)
        )
    a = testers.schmidt_tester(
        rng.uniform(0.2, math.pi / 4),
        channels.random_unitary(2, rng),
        channels.random_unitary(2, rng),
    )
    b = testers.schmidt_tester(
        rng.uniform(0.2, math.pi / 4),
        channels.random_unitary(2, rng),
        channels.random_unitary(2, rng),
    )
    return testers.Tester(
        d2=2,
        d1=2,
        outcomes=tuple(0.5 * x + 0.5 * y for x, y in zip(a.outcomes, b.outcomes)),
    )


def random_rank22_qubit_tester(rng, nonextremal: bool = False) -> testers.Tester:
    """Two-outcome tester with both parts rank two ((2,2) profile)."""
    if not nonextremal:
        u = channels.random_unitary(4, rng)
        p1 = u[:, :2] @ u[:, :2].conj().T
    else:
        if rng.integers(0, 2) == 0:
            v = channels.random_unitary(2, rng)[:, 0]
            p1 = linalg.kron(np.eye(2, dtype=complex), np.outer(v, v.conj()))
        else:
            f = channels.random_unitary(2, rng)
            h = channels.random_unitary(2, rng)
            e = channels.random_unitary(2, rng)
            p1 = linalg.kron(
                np.outer(f[:, 0], f[:, 0].conj()), np.outer(e[:, 0], e[:, 0].conj())
            ) + linalg.kron(
                np.outer(h[:, 0], h[:, 0].conj()), np.outer(e[:, 1], e[:, 1].conj())
            )
    p2 = np.eye(4, dtype=complex) - p1
    return testers.Tester(d2=2, d1=2, outcomes=(p1 / 2.0, p2 / 2.0))


def random_two_outcome_qubit_tester(rng) -> testers.Tester:
    """Mixed population spanning the (1,3) and (2,2) profiles, including
    near-product Schmidt angles down to 1e-6 and exact product vectors."""
    style = rng.integers(0, 6)
    u2 = channels.random_unitary(2, rng)
    u1 = channels.random_unitary(2, rng)
    if style == 0:
        return testers.schmidt_tester(rng.uniform(0.1, math.pi / 4), u2, u1)
    if style == 1:
        return testers.schmidt_tester(0.0, u2, u1)
    if style == 2:
        return testers.schmidt_tester(rng.uniform(1e-6, 1e-5), u2, u1)
    if style == 3:
        return random_rank22_qubit_tester(rng, nonextremal=False)
    if style == 4:
        return random_rank22_qubit_tester(rng, nonextremal=True)
    return testers.schmidt_tester(1e-6, u2, u1)


def random_nonextremal_gqi(rng) -> gqi_mod.Gqi:
    """Midpoint of two distinct random instruments (never extremal)."""
    counts = [(1, 1), (1, 2), (2, 1), (1, 1, 1)][rng.integers(0, 4)]
    a = channels.random_instrument(2, 2, counts, rng)
    b = channels.random_instrument(2, 2, counts, rng)
    return gqi_mod.mix(channels.as_gqi(a), channels.as_gqi(b), 0.5)


# ---------------------------------------------------------------------------
# Suites
# ---------------------------------------------------------------------------

EQUIVALENCE_DIMS = ((2, 2), (2, 3), (3, 2), (3, 3))


def _run_seeds(name: str, seeds: int, worker, jobs: int = 1) -> SuiteResult:
    result = SuiteResult(name=name)
    if jobs <= 1:
        for seed in range(seeds):
            result.merge(worker(seed))
        return result
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        for part in pool.map(worker, range(seeds)):
            result.merge(part)
    return result


def run_equivalence(seeds: int = 200, pol: TolerancePolicy = DEFAULT_TOL, jobs: int = 1) -> SuiteResult:
    """Choi's criterion and the master-criterion form must agree on random
    channels across small dimension pairs."""

    def worker(seed: int) -> SuiteResult:
        part = SuiteResult(name="equivalence")
        rng = np.random.default_rng(1000 + seed)
        for d0, d1 in EQUIVALENCE_DIMS:
            count = int(rng.integers(-(-d0 // d1), d0 * d1 + 1))
            chan = channels.random_channel(d0, d1, count, rng)
            a = channels.choi_condition(chan, pol)
            b = channels.channel_extremal_theorem1(chan, pol)
            part.record(
                a == b,
                f"seed {seed} dims ({d0},{d1}) kraus {count}: choi={a} rank-form={b}",
            )
        return part

    return _run_seeds("equivalence", seeds, worker, jobs)


def run_xi_invariance(seeds: int = 200, pol: TolerancePolicy = DEFAULT_TOL, jobs: int = 1) -> SuiteResult:
    """Extremality verdicts are invariant under xi_{rho,U}; the transform
    round-trips to 1e-10."""

    def worker(seed: int) -> SuiteResult:
        part = SuiteResult(name="xi-invariance")
        rng = np.random.default_rng(2000 + seed)
        if seed % 2 == 0:
            t = random_extremal_qubit_tester(rng)
        else:
            t = random_nonextremal_qubit_tester(rng)
        rho = random_full_rank_state(2, rng)
        u = channels.random_unitary(2, rng)
        before = testers.is_extremal_tester(t, pol).extremal
        moved = testers.xi_transform(t, rho, u, pol)
        after = testers.is_extremal_tester(moved, pol).extremal
        back = testers.xi_inverse(moved, rho, u, pol)
        residual = max(
            linalg.max_abs(x - y) for x, y in zip(back.outcomes, t.outcomes)
        )
        part.record(
            before == after and residual <= 1e-10,
            f"seed {seed}: before={before} after={after} roundtrip={residual:.2e}",
        )
        return part

    return _run_seeds("xi-invariance", seeds, worker, jobs)


def run_bounds(seeds: int = 200, pol: TolerancePolicy = DEFAULT_TOL, jobs: int = 1) -> SuiteResult:
    """Counting bounds hold for every object the criteria report extremal."""

    def worker(seed: int) -> SuiteResult:
        part = SuiteResult(name="bounds")
        rng = np.random.default_rng(3000 + seed)
        pool = [
            random_extremal_qubit_tester(rng),
            random_nonextremal_qubit_tester(rng),
            random_rank22_qubit_tester(rng, nonextremal=bool(rng.integers(0, 2))),
        ]
        for t in pool:
            if testers.is_extremal_tester(t, pol).extremal:
                bounds = testers.check_bounds(t, pol)
                part.record(bounds.ok, f"seed {seed}: tester bound violated {bounds}")
        counts = [(1,), (1, 1), (1, 2), (1, 1, 1), (2, 2)][int(rng.integers(0, 5))]
        ins = channels.random_instrument(2, 2, counts, rng)
        if channels.instrument_extremal(ins, pol):
            bound = channels.instrument_rank_bound(ins, pol)
            part.record(bound.ok, f"seed {seed}: instrument bound violated {bound}")
        return part

    return _run_seeds("bounds", seeds, worker, jobs)


def run_appendix_c(pol: TolerancePolicy = DEFAULT_TOL, jobs: int = 1) -> SuiteResult:
    """Each fixture must reproduce its row of the extremality table."""
    result = SuiteResult(name="appendix-c")
    for k, expected in sorted(APPENDIX_TABLE.items()):
        triple = channels.classify_combination(channels.combination_fixture(k), pol)
        got = triple.as_signs()
        result.record(got == expected, f"row {k}: expected {expected}, got {got}")
    return result


SUITES = {
    "equivalence": run_equivalence,
    "xi-invariance": run_xi_invariance,
    "bounds": run_bounds,
    "appendix-c": run_appendix_c,
}


def run_suite(name: str, seeds: int = 200, pol: TolerancePolicy = DEFAULT_TOL, jobs: int = 1) -> SuiteResult:
    if name not in SUITES:
        raise KeyError(f"unknown suite {name!r}; choose from {sorted(SUITES)}")
    if name == "appendix-c":
        return run_appendix_c(pol=pol, jobs=jobs)
    return SUITES[name](seeds=seeds, pol=pol, jobs=jobs)
