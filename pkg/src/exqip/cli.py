"""Command-line interface.

Subcommands::

    exqip validate FILE              check positivity + normalization structure
    exqip extremal FILE              decide extremality, optionally emit a certificate
    exqip decompose FILE --out DIR   binary convex decomposition tree
    exqip generate KIND --out FILE   write example objects
    exqip suite NAME                 run a randomized property suite

Exit codes: 0 success, 1 mathematical failure (invalid object, failing suite,
undecomposable input), 2 usage or file-format error.  The working tolerance is
``--tol`` or the ``EXQIP_TOL`` environment variable (relative epsilon,
default 1e-10).
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import channels, combs, fileio, gqi as gqi_mod, linalg, suites, testers
from .channels import Channel, Instrument
from .combs import CombSignature, DeterministicComb
from .errors import ExqipError, FileFormatError, ValidationError
from .gqi import Gqi
from .linalg import TolerancePolicy
from .testers import Povm, Tester


def _policy(args) -> TolerancePolicy:
    eps = args.tol
    if eps is None:
        eps = os.environ.get("EXQIP_TOL")
    if eps is None:
        return linalg.DEFAULT_TOL
    eps = float(eps)
    if not 0.0 < eps < 1.0:
        raise ValueError(f"tolerance must lie in (0, 1), got {eps}")
    return TolerancePolicy(eps_rel=eps)


def _to_gqi(obj) -> Gqi:
    """Uniform GQI view of any supported object kind."""
    if isinstance(obj, DeterministicComb):
        return Gqi(signature=obj.signature, outcomes=(obj.operator,))
    if isinstance(obj, Gqi):
        return obj
    if isinstance(obj, Tester):
        return testers.as_gqi(obj)
    if isinstance(obj, (Channel, Instrument)):
        return channels.as_gqi(obj)
    if isinstance(obj, Povm):
        return testers.povm_as_gqi(obj)
    raise FileFormatError(f"unsupported object type {type(obj).__name__}")


def _from_gqi(g: Gqi, template):
    """Rewrap a GQI as the same kind as ``template`` (shapes unchanged)."""
    if isinstance(template, DeterministicComb):
        return DeterministicComb(signature=template.signature, operator=g.outcomes[0])
    if isinstance(template, Gqi):
        return g
    if isinstance(template, Tester):
        return Tester(d2=template.d2, d1=template.d1, outcomes=g.outcomes)
    if isinstance(template, Channel):
        return Channel(d1=template.d1, d0=template.d0, choi=g.outcomes[0])
    if isinstance(template, Instrument):
        return Instrument(d1=template.d1, d0=template.d0, operators=g.outcomes)
    return Povm(d=template.d, effects=g.outcomes)


def _validate_report(obj, pol: TolerancePolicy) -> dict:
    kind = fileio.object_kind(obj)
    g = _to_gqi(obj)
    verdict = gqi_mod.is_valid_gqi(g, pol=pol)
    report = {
        "kind": kind,
        "valid": bool(verdict.ok),
        "outcomes": g.n_outcomes,
        "signature": list(g.signature.dims),
        "min_eigenvalues": [float(x) for x in verdict.outcome_min_eigenvalues],
        "cascade_residuals": [float(r) for r in verdict.comb_verdict.level_residuals],
    }
    if kind == "tester":
        _, residual = testers.tester_normalization(obj, pol)
        report["product_form_residual"] = float(residual)
        report["valid"] = bool(report["valid"] and testers.is_valid_tester(obj, pol=pol))
    if kind == "povm":
        report["valid"] = bool(testers.povm_is_valid(obj, pol=pol))
    return report


def _certificate(obj, pol: TolerancePolicy) -> gqi_mod.ExtremalityCertificate:
    if isinstance(obj, Tester):
        return testers.is_extremal_tester(obj, pol=pol)
    return gqi_mod.is_extremal(_to_gqi(obj), pol=pol)


def cmd_validate(args) -> int:
    obj = fileio.load_object(args.file)
    report = _validate_report(obj, _policy(args))
    print(json.dumps(report, indent=2, sort_keys=True))
    return 0 if report["valid"] else 1


def cmd_extremal(args) -> int:
    pol = _policy(args)
    obj = fileio.load_object(args.file)
    kind = fileio.object_kind(obj)
    cert = _certificate(obj, pol)
    print(
        json.dumps(
            {
                "kind": kind,
                "verdict": cert.verdict,
                "family_size": cert.family_size,
                "rank": cert.rank,
                "support_ranks": list(cert.support_ranks),
                "epsilon_star": None
                if cert.perturbation is None
                else cert.perturbation.epsilon_star,
            },
            indent=2,
            sort_keys=True,
        )
    )
    if args.certificate:
        fileio.save_certificate(args.certificate, kind, cert, pol)
    return 0


def cmd_decompose(args) -> int:
    pol = _policy(args)
    obj = fileio.load_object(args.file)
    kind = fileio.object_kind(obj)
    root = _to_gqi(obj)
    cert = _certificate(obj, pol)
    if cert.extremal:
        print("input is extremal; nothing to decompose", file=sys.stderr)
        return 1
    os.makedirs(args.out, exist_ok=True)

    leaves = []

    def descend(g: Gqi, weight: float, depth: int) -> None:
        if depth >= args.steps:
            leaves.append((g, weight, depth, None))
            return
        c = gqi_mod.is_extremal(g, pol=pol)
        if c.extremal:
            leaves.append((g, weight, depth, "extremal"))
            return
        plus, minus = gqi_mod.decompose_step(g, pol=pol, certificate=c)
        descend(plus, weight / 2.0, depth + 1)
        descend(minus, weight / 2.0, depth + 1)

    descend(root, 1.0, 0)

    recon = [np.zeros_like(t) for t in root.outcomes]
    for g, w, _, _ in leaves:
        for i, t in enumerate(g.outcomes):
            recon[i] = recon[i] + w * t
    residual = max(linalg.max_abs(a - b) for a, b in zip(recon, root.outcomes))

    entries = []
    for idx, (g, w, depth, status) in enumerate(leaves):
        name = f"leaf_{idx:03d}.json"
        fileio.save_object(
            os.path.join(args.out, name),
            _from_gqi(g, obj),
            metadata={"weight": w, "depth": depth},
        )
        entries.append({"file": name, "weight": w, "depth": depth, "status": status})

    summary = {
        "kind": kind,
        "steps": args.steps,
        "leaves": entries,
        "total_weight": sum(e["weight"] for e in entries),
        "reconstruction_residual": float(residual),
    }
    with open(os.path.join(args.out, "summary.json"), "w", encoding="utf-8") as fh:
        fh.write(fileio.dumps_canonical(summary))
    print(json.dumps(summary, indent=2, sort_keys=True))
    return 0 if residual <= 1e-8 else 1


def _parse_signature(text: str) -> CombSignature:
    try:
        dims = tuple(int(part) for part in text.split(",") if part.strip())
    except ValueError as exc:
        raise ValueError(f"bad signature {text!r}: {exc}") from exc
    return CombSignature(dims)


def cmd_generate(args) -> int:
    pol = _policy(args)
    if args.kind == "two-outcome-qubit-tester":
        obj = testers.schmidt_tester(args.schmidt_angle)
        meta = {"schmidt_angle": args.schmidt_angle}
    elif args.kind == "split-tester":
        base = fileio.load_object(args.base)
        if not isinstance(base, Tester):
            raise FileFormatError("--base must point to a tester file")
        if args.sub_povm:
            sub = fileio.load_object(args.sub_povm)
            if not isinstance(sub, Povm):
                raise FileFormatError("--sub-povm must point to a povm file")
            effects = sub.effects
        else:
            effects = testers.projective_split_effects(base.outcomes[args.outcome], pol)
        obj = testers.split_outcome(base, args.outcome, effects, pol)
        meta = {"base": os.path.basename(args.base), "outcome": args.outcome}
    elif args.kind == "combination":
        obj = channels.combination_fixture(args.k)
        meta = {"combination": args.k}
    elif args.kind == "random-comb":
        sig = _parse_signature(args.signature)
        comb = combs.random_deterministic_comb(sig, seed=args.seed, spread=args.spread)
        obj = comb
        meta = {"seed": args.seed, "spread": args.spread}
    else:  # pragma: no cover - argparse restricts choices
        raise ValueError(f"unknown kind {args.kind}")
    fileio.save_object(args.out, obj, metadata=meta)
    print(f"wrote {fileio.object_kind(obj)} to {args.out}")
    return 0


def cmd_suite(args) -> int:
    pol = _policy(args)
    result = suites.run_suite(args.name, seeds=args.seeds, pol=pol, jobs=args.jobs)
    print(json.dumps(result.summary(), indent=2, sort_keys=True))
    return 0 if result.ok else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="exqip",
        description="Validate, classify, and decompose quantum protocol operators.",
    )
    parser.add_argument(
        "--tol",
        type=float,
        default=None,
        help="relative tolerance epsilon (default: EXQIP_TOL or 1e-10)",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check an operator file")
    p.add_argument("file")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("extremal", help="decide extremality")
    p.add_argument("file")
    p.add_argument("--certificate", help="write a certificate JSON here")
    p.set_defaults(func=cmd_extremal)

    p = sub.add_parser("decompose", help="binary convex decomposition")
    p.add_argument("file")
    p.add_argument("--steps", type=int, default=1, help="maximum tree depth")
    p.add_argument("--out", required=True, help="output directory for leaves")
    p.set_defaults(func=cmd_decompose)

    p = sub.add_parser("generate", help="write an example object")
    p.add_argument(
        "kind",
        choices=["two-outcome-qubit-tester", "split-tester", "combination", "random-comb"],
    )
    p.add_argument("--out", required=True)
    p.add_argument("--schmidt-angle", type=float, default=0.5)
    p.add_argument("--base", help="tester file to split (split-tester)")
    p.add_argument("--outcome", type=int, default=1, help="outcome index to split")
    p.add_argument("--sub-povm", help="povm file for the split (default: projective)")
    p.add_argument("--k", type=int, default=1, help="extremality-table row (combination)")
    p.add_argument("--signature", default="2,2", help="comma-separated dims (random-comb)")
    p.add_argument("--spread", type=float, default=0.5)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("suite", help="run a randomized property suite")
    p.add_argument("name", choices=sorted(suites.SUITES))
    p.add_argument("--seeds", type=int, default=200)
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=cmd_suite)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    try:
        return args.func(args)
    except FileFormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ExqipError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
