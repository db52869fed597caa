"""Command-line entry point.

Every command prints one report envelope (JSON by default, CSV on request).
Exit status: 0 success, 1 a checked property failed, 2 usage or input error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from fractions import Fraction

from dotchains import __version__
from dotchains.algebra import parse_structure
from dotchains.chains import DEFAULT_BRUTE_BUDGET, ChainSpec, Policy, count_chains, count_chains_brute, count_chains_dp
from dotchains.charsums import (
    check_pair_lemma,
    check_rc,
    check_tsum_lemma,
    decompose,
    s_l2,
    s_sum,
    t_sum,
    term_structure,
)
from dotchains.constructions import (
    axes_set,
    erratum_counterexample,
    erratum_family_report,
    erratum_family_set,
    line_points,
    shifted_lines_set,
)
from dotchains.errors import DotChainsError
from dotchains.experiments import DEFAULT_SWEEP, SweepConfig, smallset_experiment, threshold_sweep
from dotchains.pointsets import PointSet, read_pointset, sample_uniform, serialize_pointset, write_pointset
from dotchains.rng import SplitMix64, derive_seed


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _ints(text: str) -> list[int]:
    try:
        return [int(t) for t in text.replace(" ", "").split(",") if t != ""]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--structure", help="Fp:<p>, F:<p>^<m> or Z:<p>^<l>")
    p.add_argument("--d", type=int, default=2, help="dimension")
    p.add_argument("--seed", type=int, default=None, help="master seed (default 0)")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--budget", type=int, default=DEFAULT_BRUTE_BUDGET, help="brute-force / sweep budget")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = _Parser(prog="dotchains", description="Exact dot-product chain counting over finite rings.")
    parser.add_argument("--version", action="version", version=f"dotchains {__version__}")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    c = sub.add_parser("count", parents=[common], help="count k-chains in a point-set file")
    c.add_argument("--set", required=True, dest="pointset")
    c.add_argument("--alpha", required=True, type=_ints)
    c.add_argument("--policy", default="all", choices=["all", "adjacent", "pairwise"])
    c.add_argument("--method", default="auto", choices=["auto", "dp", "brute"])

    c = sub.add_parser("decompose", parents=[common], help="remainder terms by auxiliary-variable support")
    c.add_argument("--set", required=True, dest="pointset")
    c.add_argument("--alpha", required=True, type=_ints)

    c = sub.add_parser("charsum", parents=[common], help="exact one- and two-link character sums")
    c.add_argument("kind", choices=["s_sum", "s_l2", "t_sum"])
    c.add_argument("--set", required=True, dest="pointset")
    c.add_argument("--alpha", required=True, type=_ints)
    c.add_argument("--point", type=_ints)
    c.add_argument("--domain", default="space", choices=["E", "space"])

    c = sub.add_parser("lemma-check", parents=[common], help="randomized or exhaustive lemma checks")
    c.add_argument("lemma", choices=["1dp", "1dpR", "2dp", "2dpR", "rc", "mn"])
    c.add_argument("--trials", type=int, default=100)
    c.add_argument("--size", type=int, help="fixed |E| (default: uniform in [0, q^d])")
    c.add_argument("--C", type=Fraction, default=Fraction(2), help="constant for the field two-link bound")
    c.add_argument("--k", type=int, default=14, help="largest tuple length for mn")
    c.add_argument("--max-dim", type=int, default=8, help="largest matrix side for rc")

    c = sub.add_parser("construct", parents=[common], help="emit a structured point set")
    c.add_argument("kind", choices=["axes", "shifted", "erratum-family", "line"])
    c.add_argument("--alpha", type=_ints)
    c.add_argument("--point", type=_ints)
    c.add_argument("--out", help="also write the point-set file here")

    sub.add_parser("erratum-check", parents=[common], help="recompute the Z_9^2 line counterexample")

    c = sub.add_parser("experiment", parents=[common], help="randomized threshold experiments")
    c.add_argument("kind", choices=["sweep", "smallset"])
    c.add_argument("--config", help="sweep configuration JSON (default: built-in grid)")
    c.add_argument("--size", type=int, default=20)
    c.add_argument("--k", type=_ints, default=[2, 3, 5])
    c.add_argument("--trials", type=int, default=100)
    c.add_argument("--alpha", type=int, default=1)
    c.add_argument("--max-ratio", type=Fraction, default=Fraction(4), help="regression guard for smallset")
    return parser


# -- helpers ---------------------------------------------------------------------


def _structure(args):
    if not args.structure:
        raise UsageError("--structure is required for this command")
    return parse_structure(args.structure)


def _load(args) -> PointSet:
    try:
        return read_pointset(args.pointset)
    except OSError as exc:
        raise UsageError(f"cannot read {args.pointset}: {exc}") from None


def _random_sets(S, d, trials, seed, size):
    total = S.q**d
    for t in range(trials):
        s = derive_seed(seed, t)
        n = size if size is not None else SplitMix64(s ^ 0x5EED).below(total + 1)
        yield t, s, sample_uniform(S, d, n, s)


def _lemma_summary(results: list[dict], extra: dict | None = None) -> tuple[dict, bool]:
    failures = [r for r in results if not r["pass"]]
    payload = {"checks": len(results), "passed": len(results) - len(failures), "failures": failures[:20]}
    if extra:
        payload.update(extra)
    return payload, not failures


# -- commands ----------------------------------------------------------------------


def cmd_count(args):
    E = _load(args)
    spec = ChainSpec(args.alpha, Policy.parse(args.policy))
    if args.method == "dp":
        rep = count_chains_dp(E, spec)
    elif args.method == "brute":
        rep = count_chains_brute(E, spec, args.budget)
    else:
        rep = count_chains(E, spec, args.budget)
    return E.structure.literal, rep.to_dict(), True


def cmd_decompose(args):
    E = _load(args)
    rep = decompose(E, ChainSpec(args.alpha))
    return E.structure.literal, rep.to_dict(), True


def cmd_charsum(args):
    E = _load(args)
    a = args.alpha
    if args.kind == "s_sum":
        if args.point is None or len(a) != 1:
            raise UsageError("s_sum needs --point and a single --alpha")
        value = s_sum(E, tuple(args.point), a[0])
    elif args.kind == "s_l2":
        if len(a) != 1:
            raise UsageError("s_l2 needs a single --alpha")
        value = s_l2(E, a[0], args.domain)
    else:
        if len(a) != 2:
            raise UsageError("t_sum needs --alpha a,b")
        value = t_sum(E, a[0], a[1])
    return E.structure.literal, {"kind": args.kind, "alphas": a, "value": value}, True


def cmd_lemma_check(args):
    seed = args.seed or 0
    lemma = args.lemma
    if lemma == "mn":
        results = []
        for k in range(1, args.k + 1):
            for bits in range(1 << k):
                ts = term_structure([(bits >> i) & 1 for i in range(k)])
                results.append({"j": list(ts.j), "pass": ts.bound_holds})
        payload, ok = _lemma_summary(results, {"max_k": args.k})
        return None, payload, ok
    if lemma == "rc":
        rng = SplitMix64(seed)
        results = []
        for t in range(args.trials):
            m, n = 1 + rng.below(args.max_dim), 1 + rng.below(args.max_dim)

            def rnd():
                return (Fraction(rng.below(41) - 20, 1 + rng.below(9)), Fraction(rng.below(41) - 20, 1 + rng.below(9)))

            c = [[rnd() for _ in range(n)] for _ in range(m)]
            z = [rnd() for _ in range(m)]
            y = [rnd() for _ in range(n)]
            res = check_rc(c, z, y)
            results.append({"trial": t, "m": m, "n": n, "pass": res.passed, "method": res.detail["method"]})
        payload, ok = _lemma_summary(results, {"trials": args.trials})
        return None, payload, ok

    S = _structure(args)
    if lemma in ("1dp", "2dp") and not S.is_field:
        raise UsageError(f"{lemma} is a field statement; use {lemma}R for Z_(p^l)")
    if lemma in ("1dpR", "2dpR") and S.is_field:
        raise UsageError(f"{lemma} is a ring statement; use a Z:<p>^<l> structure")
    results = []
    for t, s, E in _random_sets(S, args.d, args.trials, seed, args.size):
        ok_all, worst = True, 0.0
        if lemma in ("1dp", "1dpR"):
            gammas = S.elements() if lemma == "1dp" else S.units()
            for g in gammas:
                r = check_pair_lemma(E, g)
                ok_all &= r.passed
                worst = max(worst, r.ratio)
        else:
            vals = S.elements() if lemma == "2dp" else S.units()
            for a in vals:
                for b in vals:
                    r = check_tsum_lemma(E, a, b, args.C) if lemma == "2dp" else check_tsum_lemma(E, a, b)
                    ok_all &= r.passed
                    worst = max(worst, r.ratio)
        results.append({"trial": t, "seed": s, "size": len(E), "pass": bool(ok_all), "approx_max_ratio": worst})
    extra = {"lemma": lemma, "d": args.d, "trials": args.trials}
    if lemma == "2dp":
        extra["constant"] = str(args.C)
    payload, ok = _lemma_summary(results, extra)
    return S.literal, payload, ok


def cmd_construct(args):
    S = _structure(args)
    kind = args.kind
    if kind == "axes":
        E = axes_set(S, args.d)
    elif kind == "shifted":
        if not args.alpha or len(args.alpha) != 1:
            raise UsageError("shifted needs --alpha a")
        E = shifted_lines_set(S, args.alpha[0])
    elif kind == "erratum-family":
        if S.is_field or not args.alpha or len(args.alpha) != 2:
            raise UsageError("erratum-family needs a Z:<p>^<l> structure and --alpha a,b")
        E = erratum_family_set(S.p, S.e, args.alpha[0], args.alpha[1])
    else:
        if not args.point or not args.alpha or len(args.alpha) != 1:
            raise UsageError("line needs --point v1,v2 and --alpha a")
        L = line_points(S, tuple(args.point), args.alpha[0])
        E = PointSet.build(S, 2, L.points)
    if args.out:
        write_pointset(E, args.out)
    payload = {"kind": kind, "size": len(E), "d": E.d, "pointset": serialize_pointset(E)}
    return S.literal, payload, True


def cmd_erratum_check(args):
    rep = erratum_counterexample()
    fam = {
        "Z:3^2": erratum_family_report(3, 2, 2, 4, args.budget),
        "Z:5^2": erratum_family_report(5, 2, 2, 3, args.budget),
    }
    rep["family"] = fam
    ok = rep["pass"] and all(f["pass"] for f in fam.values())
    return rep["structure"], rep, ok


def cmd_experiment(args):
    if args.kind == "sweep":
        if args.config:
            try:
                with open(args.config, encoding="utf-8") as fh:
                    raw = json.load(fh)
            except (OSError, json.JSONDecodeError) as exc:
                raise UsageError(f"cannot read sweep config: {exc}") from None
        else:
            raw = DEFAULT_SWEEP
        cfg = SweepConfig.from_dict(raw)
        if args.seed is not None:
            cfg.seed = args.seed
        args.seed = cfg.seed
        rep = threshold_sweep(cfg)
        if args.format == "csv":
            return None, rep, rep.passed
        return None, rep.to_dict(), rep.passed
    S = _structure(args)
    out = smallset_experiment(S.literal, args.size, args.k, args.trials, args.seed or 0, args.alpha)
    out["max_ratio_guard"] = str(args.max_ratio)
    ok = all(Fraction(r["max_ratio"]) <= args.max_ratio for r in out["rows"])
    return S.literal, out, ok


COMMANDS = {
    "count": cmd_count,
    "decompose": cmd_decompose,
    "charsum": cmd_charsum,
    "lemma-check": cmd_lemma_check,
    "construct": cmd_construct,
    "erratum-check": cmd_erratum_check,
    "experiment": cmd_experiment,
}


def _flatten(obj, prefix=""):
    if isinstance(obj, dict):
        for k, v in obj.items():
            yield from _flatten(v, f"{prefix}{k}.")
    elif isinstance(obj, list):
        for i, v in enumerate(obj):
            yield from _flatten(v, f"{prefix}{i}.")
    else:
        yield prefix[:-1], obj


def envelope(argv, structure, seed, payload, ok) -> dict:
    return {
        "tool": "dotchains",
        "version": __version__,
        "command": list(argv),
        "structure": structure,
        "seed": seed,
        "payload": payload,
        "summary": {"pass": bool(ok)},
    }


def run(argv=None, stdout=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    stdout = stdout or sys.stdout
    try:
        args = build_parser().parse_args(argv)
        structure, payload, ok = COMMANDS[args.command](args)
    except (UsageError, DotChainsError, OSError) as exc:
        print(f"dotchains: error: {exc}", file=sys.stderr)
        return 2
    seed = args.seed if args.seed is not None else 0
    if args.format == "csv":
        if hasattr(payload, "to_csv"):
            stdout.write(payload.to_csv())
        else:
            buf = io.StringIO()
            w = csv.writer(buf, lineterminator="\n")
            w.writerow(["key", "value"])
            env = envelope(argv, structure, seed, payload, ok)
            for k, v in _flatten(env):
                w.writerow([k, v])
            stdout.write(buf.getvalue())
    else:
        if hasattr(payload, "to_dict"):
            payload = payload.to_dict()
        stdout.write(json.dumps(envelope(argv, structure, seed, payload, ok), sort_keys=True, indent=2) + "\n")
    return 0 if ok else 1


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
