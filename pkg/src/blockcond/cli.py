"""Command-line audit harness.

Subcommands: audit-extract23, audit-condense, condense, cover, entropy.
Exit codes: 0 = all checks passed, 2 = a certified bound was violated (a
genuine counterexample, the most valuable outcome), 1 = operational error.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction

import numpy as np

from . import __version__
from .adversaries import (CertificateError, build_1l_adversary, build_nosf23_adversary,
                          build_shela23_extraction_adversary, delta_1l)
from .condensers import (audit_sampled, derive_params, sample_output_light,
                         scaled_params, validate_constraints)
from .covering import BipartiteGraph, CoverBoundViolation, greedy_cover
from .dist import Dist, heavy_set, min_entropy, smooth_min_entropy, tv_distance
from .report import Report
from .sources import BlockFunctionTable, load_function_file

EXTRACTION_FLOOR = Fraction(2, 25)


def _rng(args) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(args.rng_seed))


def _functions(args, ell: int):
    """Function tables from --fn-file or --random, in rng-stream order."""
    if args.fn_file:
        yield "file:" + args.fn_file, load_function_file(args.fn_file, args.n, ell, args.t)
        return
    rng = _rng(args)
    for i in range(args.random):
        yield f"random:{i}", BlockFunctionTable.random(args.n, ell, args.t, rng)


def cmd_audit_extract23(args) -> Report:
    report = Report("audit-extract23", _config_echo(args))
    biases = []
    cases: dict[str, int] = {}
    for name, f in _functions(args, ell=3):
        adv = build_shela23_extraction_adversary(f)
        biases.append(adv.bias)
        cases[adv.case] = cases.get(adv.case, 0) + 1
        report.check(f"bias[{name}]",
                     "adversaries: constructed source has exact bias >= 0.08",
                     adv.bias >= EXTRACTION_FLOOR, float(adv.bias))
    report.results["min_bias"] = float(min(biases)) if biases else None
    report.results["case_distribution"] = cases
    return report


def cmd_audit_condense(args) -> Report:
    report = Report("audit-condense", _config_echo(args))
    cases: dict[str, int] = {}
    bounds = []
    for name, f in _functions(args, ell=args.ell):
        if args.theorem == "nosf23":
            cert = build_nosf23_adversary(f, args.eps)
            target = 2 * f.t / 3 + cert.delta_formula
        else:
            cert = build_1l_adversary(f, args.eps)
            target = f.t / f.ell + delta_1l(args.eps)
        cases[cert.case] = cases.get(cert.case, 0) + 1
        bounds.append(cert.oracle_entropy)
        report.check(f"oracle<=bound[{name}]",
                     "adversaries: oracle smooth min-entropy within the certified bound",
                     cert.oracle_entropy <= cert.bound_bits + 1e-9,
                     cert.oracle_entropy)
        report.check(f"bound<=closed-form[{name}]",
                     "adversaries: certificate bound within the rate + delta closed form",
                     cert.oracle_entropy <= target + 1e-9, target)
    report.results["case_distribution"] = cases
    report.results["max_oracle_entropy"] = max(bounds) if bounds else None
    return report


def cmd_condense(args) -> Report:
    report = Report("condense", _config_echo(args))
    if args.profile == "paper":
        params = derive_params(n=args.n, k=args.k, eps=args.eps)
        rows = validate_constraints(params)
        for row in rows:
            report.check(f"constraint[{row.name}]",
                         "condensers: paper-profile parameters satisfy the constraint table",
                         row.passed, {"lhs": row.lhs, "rhs": row.rhs})
        report.results["params"] = params.to_json()
        return report
    if args.kind == "explicit":
        return _cmd_condense_explicit(args, report)
    params = scaled_params(args.n, args.m_bits, args.k, args.eps, args.p)
    cond = sample_output_light(params, args.rng_seed)
    audit = audit_sampled(cond, params, trials=args.trials, rng_seed=args.rng_seed + 1,
                          gamma_audit=args.gamma_audit,
                          mult_bound=4 * params.p * params.N)
    invariants = {
        "sizes-within-(1+/-gamma)pM": "condensers: sampled set sizes concentrate around pM",
        "max-multiplicity<bound": "condensers: no output value is popular",
        "subset-tv<=eps": "condensers: random flat subsets condense to within eps of uniform",
        "greedy-adversary<eps": "condensers: the greedy heavy-set adversary stays below eps",
        "insertion-recount": "condensers: set sizes equal the recorded insertion count",
    }
    for name, ok in audit.checks.items():
        report.check(name, invariants.get(name, "condensers: empirical audit"), ok)
    report.results["audit"] = audit.to_json()
    report.results["params"] = params.to_json()
    return report


def _cmd_condense_explicit(args, report: Report) -> Report:
    import math

    from .condensers import (ExplicitCfg, audit_explicit, explicit_output_light_bound,
                             somewhere_random_tv)
    from .seeded import SeededExtSpec, TableRandomExtractor

    n = args.n
    m_inner = n // 2 - int(round(math.log2(4 / args.eps)))
    inner = TableRandomExtractor(SeededExtSpec(7 * n // 4, args.d, m_inner),
                                 rng_seed=args.rng_seed)
    cfg = ExplicitCfg(n=n, eps=args.eps, inner=inner)
    audit = audit_explicit(cfg, rng_seed=args.rng_seed + 1, fiber_samples=args.trials)
    for name, ok in audit.checks.items():
        report.check(name, "condensers: fiber structure certifies output-lightness", ok)
    rng = _rng(args)
    worst = Fraction(0)
    for i in range(4):
        table = rng.integers(0, 1 << n, size=1 << n)
        worst = max(worst, somewhere_random_tv(cfg, 2 - (i % 2), table))
    report.check("somewhere-random-tv<=eps",
                 "condensers: exact TV against uniform for somewhere-random inputs",
                 worst <= Fraction(str(args.eps)), float(worst))
    r_bound = explicit_output_light_bound(cfg)
    report.results["explicit"] = audit.to_json()
    report.results["cfg"] = cfg.to_json()
    report.results["wrapped_k"] = math.log2(args.eps) + 2 * n - math.log2(2 * r_bound)
    return report


def cmd_cover(args) -> Report:
    report = Report("cover", _config_echo(args))
    rng = _rng(args)
    t = args.t_right
    degree = max(1, int(np.ceil(args.c0 * t ** args.delta)))
    adjacency = []
    for _ in range(args.n_left):
        deg = int(rng.integers(degree, t + 1))
        adjacency.append(sorted(rng.choice(t, size=deg, replace=False).tolist()))
    graph = BipartiteGraph(args.n_left, t, adjacency)
    res = greedy_cover(graph, args.c0, args.delta, args.c1)
    for name, ok in res.checks.items():
        report.check(name, "covering: greedy cover postcondition", ok)
    report.results["cover"] = res.to_json()
    return report


def cmd_entropy(args) -> Report:
    report = Report("entropy", _config_echo(args))
    with open(args.dist_file) as fh:
        dist = Dist.from_json(json.load(fh))
    res = smooth_min_entropy(dist, args.eps)
    report.results["min_entropy"] = min_entropy(dist)
    report.results["smooth_min_entropy"] = res.entropy_bits
    report.results["removed_mass"] = float(res.removed_mass)
    if args.k is not None:
        d = heavy_set(dist, args.k, args.eps)
        report.results["heavy_set"] = sorted(d) if d is not None else None
        if d is not None:
            report.check("heavy-set-recount",
                         "dist-core: heavy set has mass >= eps and size < 2^k",
                         float(dist.prob_of_set(d)) >= args.eps and len(d) < 2 ** args.k,
                         {"size": len(d), "mass": float(dist.prob_of_set(d))})
    report.check("entropy-order",
                 "dist-core: min-entropy <= smooth min-entropy <= t",
                 min_entropy(dist) <= res.entropy_bits + 1e-12
                 and res.entropy_bits <= dist.bit_width + 1e-12)
    report.results["tv_to_uniform"] = float(tv_distance(dist, Dist.uniform(dist.bit_width)))
    return report


def _config_echo(args) -> dict:
    skip = {"func", "out", "csv"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="blockcond",
                                     description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, with_rng=True):
        p.add_argument("--out", help="write the JSON report here")
        p.add_argument("--csv", help="write a CSV check summary here")
        if with_rng:
            p.add_argument("--rng-seed", type=int, required=True, dest="rng_seed")

    p = sub.add_parser("audit-extract23", help="extraction bias lower bound on (2,3) sources")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--t", type=int, default=1)
    p.add_argument("--random", type=int, default=0, help="number of random functions")
    p.add_argument("--fn-file", dest="fn_file")
    common(p)
    p.set_defaults(func=cmd_audit_extract23)

    p = sub.add_parser("audit-condense", help="condensing impossibility certificates")
    p.add_argument("--theorem", choices=["oneell", "nosf23"], default="oneell")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--ell", type=int, default=3)
    p.add_argument("--t", type=int, required=True)
    p.add_argument("--eps", type=float, default=0.1)
    p.add_argument("--random", type=int, default=0)
    p.add_argument("--fn-file", dest="fn_file")
    common(p)
    p.set_defaults(func=cmd_audit_condense)

    p = sub.add_parser("condense", help="build/audit the sampled or explicit condenser")
    p.add_argument("--profile", choices=["paper", "scaled"], required=True)
    p.add_argument("--kind", choices=["sampled", "explicit"], default="sampled")
    p.add_argument("--n", type=int, required=True,
                   help="log2 N (sampled) or the block length (explicit)")
    p.add_argument("--k", type=float, default=6, help="log2 K")
    p.add_argument("--m-bits", type=int, dest="m_bits", default=10, help="log2 M (scaled)")
    p.add_argument("--p", type=float, default=0.0625, help="inclusion probability (scaled)")
    p.add_argument("--d", type=int, default=4, help="inner seed bits (explicit)")
    p.add_argument("--eps", type=float, default=0.2)
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--gamma-audit", type=float, dest="gamma_audit", default=0.5)
    common(p)
    p.set_defaults(func=cmd_condense)

    p = sub.add_parser("cover", help="greedy covering on a random certified graph")
    p.add_argument("--n-left", type=int, dest="n_left", required=True)
    p.add_argument("--t-right", type=int, dest="t_right", required=True)
    p.add_argument("--c0", type=float, default=1.0)
    p.add_argument("--c1", type=float, default=0.75)
    p.add_argument("--delta", type=float, default=0.5)
    common(p)
    p.set_defaults(func=cmd_cover)

    p = sub.add_parser("entropy", help="entropy report for a serialized distribution")
    p.add_argument("--dist-file", dest="dist_file", required=True)
    p.add_argument("--eps", type=float, default=0.0)
    p.add_argument("--k", type=float, default=None)
    common(p, with_rng=False)
    p.set_defaults(func=cmd_entropy)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        report = args.func(args)
    except (CertificateError, CoverBoundViolation) as exc:
        print(f"certified bound violated: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # operational errors
        print(f"error: {exc}", file=sys.stderr)
        return 1
    text = report.dumps()
    if args.out:
        report.write(args.out)
    else:
        print(text)
    if getattr(args, "csv", None):
        report.write_csv(args.csv)
    return 0 if report.all_passed else 2


if __name__ == "__main__":
    sys.exit(main())
