"""Acceptance gate: ten end-to-end criteria with pinned tolerances.

Each test prints a single ``ACCEPTANCE n <name>: PASS/FAIL`` line (visible
with ``pytest -s`` or in captured output on failure) and asserts the
criterion.
"""

import math

import numpy as np
import pytest

from exqip import channels, combs, gqi, linalg, suites, testers
from exqip.channels import APPENDIX_TABLE
from exqip.combs import CombSignature
from exqip.gqi import Gqi
from exqip.linalg import DEFAULT_TOL


# Collected PASS/FAIL lines; conftest.py prints them in the terminal summary.
RESULT_LINES = []


def report(number, name, ok, detail):
    line = f"ACCEPTANCE {number:02d} {name}: {'PASS' if ok else 'FAIL'} ({detail})"
    RESULT_LINES.append(line)
    print(line)
    assert ok, line


def test_01_channel_criteria_equivalent():
    """Choi's criterion and the rank-test form agree on random channels."""
    total = failures = 0
    for d0, d1 in [(2, 2), (2, 3), (3, 2), (3, 3)]:
        for seed in range(200):
            rng = np.random.default_rng(10_000 * d0 + 100 * d1 + seed)
            count = int(rng.integers(-(-d0 // d1), d0 * d1 + 1))
            chan = channels.random_channel(d0, d1, count, rng)
            a = channels.choi_condition(chan, DEFAULT_TOL)
            b = channels.channel_extremal_theorem1(chan, DEFAULT_TOL)
            total += 1
            failures += a != b
    report(1, "channel-criteria-equivalence", failures == 0, f"{total - failures}/{total} agree")


def test_02_instrument_criteria_equivalent():
    """Kraus-product and direct rank-test instrument criteria are identical."""
    total = failures = 0
    for seed in range(200):
        rng = np.random.default_rng(20_000 + seed)
        counts = [(1, 1), (1, 2), (2, 1), (2, 2), (1, 1, 1), (1, 1, 2)][seed % 6]
        ins = channels.random_instrument(2, 2, counts, rng)
        a = channels.instrument_extremal(ins, DEFAULT_TOL)
        b = channels.instrument_extremal_rank_test(ins, DEFAULT_TOL)
        total += 1
        failures += a != b
    report(2, "instrument-criteria-equivalence", failures == 0, f"{total - failures}/{total} agree")


def test_03_combination_table():
    """The seven fixtures reproduce their rows of the extremality table."""
    hits = 0
    for k, expected in sorted(APPENDIX_TABLE.items()):
        triple = channels.classify_combination(channels.combination_fixture(k), DEFAULT_TOL)
        hits += triple.as_signs() == expected
    report(3, "combination-table", hits == len(APPENDIX_TABLE), f"{hits}/{len(APPENDIX_TABLE)} rows")


def test_04_two_outcome_qubit_closed_form():
    """The closed-form classification agrees with the rank criterion on a
    mixed population of 500 two-outcome qubit testers."""
    total = failures = 0
    for seed in range(500):
        rng = np.random.default_rng(40_000 + seed)
        t = suites.random_two_outcome_qubit_tester(rng)
        a = testers.classify_two_outcome_qubit(t, DEFAULT_TOL).extremal
        b = testers.is_extremal_tester(t, DEFAULT_TOL).extremal
        total += 1
        failures += a != b
    report(4, "two-outcome-qubit-closed-form", failures == 0, f"{total - failures}/{total} agree")


def test_05_xi_invariance():
    """Extremality verdicts survive the normalization-changing transform and
    the transform round-trips to 1e-10."""
    result = suites.run_xi_invariance(seeds=200, pol=DEFAULT_TOL)
    report(
        5,
        "xi-invariance",
        result.ok,
        f"{result.total - result.failures}/{result.total} invariant",
    )


def test_06_bounds_necessary():
    """Every object reported extremal satisfies its counting bounds."""
    result = suites.run_bounds(seeds=200, pol=DEFAULT_TOL)
    report(
        6,
        "counting-bounds",
        result.ok,
        f"{result.total - result.failures}/{result.total} extremal objects within bounds",
    )


def test_07_decomposition_soundness():
    """decompose_step yields two valid, distinct GQIs averaging back to the
    input, with a maximal step size."""
    total = failures = 0
    for seed in range(50):
        rng = np.random.default_rng(70_000 + seed)
        g = suites.random_nonextremal_gqi(rng)
        cert = gqi.is_extremal(g, DEFAULT_TOL)
        ok = not cert.extremal
        if ok:
            plus, minus = gqi.decompose_step(g, DEFAULT_TOL, certificate=cert)
            ok &= gqi.is_valid_gqi(plus, pol=DEFAULT_TOL).ok
            ok &= gqi.is_valid_gqi(minus, pol=DEFAULT_TOL).ok
            distance = math.sqrt(
                sum(
                    float(np.linalg.norm(a - b)) ** 2
                    for a, b in zip(plus.outcomes, minus.outcomes)
                )
            )
            ok &= distance > 1e-6
            mid = gqi.mix(plus, minus, 0.5)
            residual = max(
                linalg.max_abs(a - b) for a, b in zip(mid.outcomes, g.outcomes)
            )
            ok &= residual <= 1e-9
            # maximality: the working positivity margin must fail just beyond
            # epsilon_star
            beyond = cert.perturbation.epsilon_star * (1.0 + 1e-6)
            ok &= not gqi.perturbation_feasible(
                g.outcomes, cert.perturbation.directions, beyond, DEFAULT_TOL
            )
        total += 1
        failures += not ok
    report(7, "decomposition-soundness", failures == 0, f"{total - failures}/{total} sound")


def test_08_random_combs_valid():
    """Randomly generated combs pass the cascade check at 1e-9 and have no
    component along the forbidden directions."""
    total = failures = 0
    for dims in [(2, 2), (2, 3, 3, 2), (2, 2, 2, 2)]:
        sig = CombSignature(dims)
        forbidden = combs.comb_forbidden_directions(sig)
        for seed in range(100):
            spread = (seed % 10) / 10.0
            comb = combs.random_deterministic_comb(sig, seed=seed, spread=spread)
            verdict = combs.is_deterministic_comb(comb.operator, sig, tol=1e-9)
            ok = verdict.ok
            ok &= all(
                abs(linalg.hs_inner(f, comb.operator)) <= 1e-12 for f in forbidden
            )
            total += 1
            failures += not ok
    report(8, "random-comb-validity", failures == 0, f"{total - failures}/{total} valid")


def test_09_luders_and_projector_povm():
    """Lueders instruments are extremal in d = 2, 3, 4, and an instrument can
    be extremal while its induced POVM is not."""
    ok = True
    detail = []
    for d in (2, 3, 4):
        for seed in range(5):
            rng = np.random.default_rng(90_000 + 10 * d + seed)
            u = channels.random_unitary(d, rng)
            # random orthogonal projector decomposition of I
            cut = int(rng.integers(1, d))
            p1 = u[:, :cut] @ u[:, :cut].conj().T
            p2 = u[:, cut:] @ u[:, cut:].conj().T
            ins = channels.luders_instrument([p1, p2])
            ok &= channels.instrument_extremal(ins, DEFAULT_TOL)
    detail.append("Lueders extremal d=2,3,4")
    # half-projector instrument: extremal instrument, dependent induced POVM
    k1 = np.diag([1.0 / math.sqrt(2.0), 0.0]).astype(complex)
    k2 = np.array(
        [[1.0 / math.sqrt(2.0), 0.0], [0.0, 1.0]], dtype=complex
    )
    ins = channels.instrument_from_kraus([[k1], [k2]], d1=2, d0=2)
    assert channels.is_valid_instrument(ins)
    ok &= channels.instrument_extremal(ins, DEFAULT_TOL)
    ok &= not testers.povm_is_extremal(channels.induced_povm(ins), DEFAULT_TOL)
    detail.append("extremal instrument with non-extremal POVM")
    report(9, "luders-and-induced-povm", ok, "; ".join(detail))


def test_10_numerical_identities():
    """Spectral reconstruction, the partial-trace/Kraus identity, and the
    Hilbert-Schmidt isometry of the vectorization."""
    ok = True
    rng = np.random.default_rng(100_000)
    # eigendecomposition reconstruction, dims up to 16
    for d in (2, 3, 5, 8, 16):
        g = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
        h = (g + g.conj().T) / 2.0
        eig = linalg.hermitian_eig(h)
        ok &= linalg.max_abs(eig.reconstruct() - h) <= 1e-10
    # Tr_1 |K_m>><<K_n| = K_m^T K_n^conj on 100 random pairs
    for _ in range(100):
        d1, d0 = int(rng.integers(2, 4)), int(rng.integers(2, 4))
        km = rng.standard_normal((d1, d0)) + 1j * rng.standard_normal((d1, d0))
        kn = rng.standard_normal((d1, d0)) + 1j * rng.standard_normal((d1, d0))
        lhs = linalg.partial_trace(
            np.outer(channels.vec_op(km), channels.vec_op(kn).conj()), (d1, d0), {0}
        )
        ok &= linalg.max_abs(lhs - km.T @ kn.conj()) <= 1e-12
    # vectorization preserves the HS inner product
    for _ in range(100):
        d = int(rng.integers(1, 7))
        ga = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
        gb = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
        a, b = (ga + ga.conj().T) / 2.0, (gb + gb.conj().T) / 2.0
        va, vb = linalg.vectorize_hermitian(a), linalg.vectorize_hermitian(b)
        ok &= abs(float(va @ vb) - linalg.hs_inner(a, b).real) <= 1e-12 * max(
            1.0, abs(linalg.hs_inner(a, b))
        )
    report(10, "numerical-identities", ok, "spectral, partial-trace, isometry checks")
