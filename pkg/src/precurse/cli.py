"""Command-line entry point: ``precurse <subcommand> [options]``.

Tables go to ``--output`` (default stdout) as CSV, recurrences and matrices as
JSON.  ``--plot FILE.png`` writes a figure next to the table where one makes
sense.  Exit codes: 0 success, 1 domain error, 2 usage error, 3 budget
exceeded.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from fractions import Fraction
from pathlib import Path

from . import __version__
from .errors import BudgetExceeded, PrecurseError
from .ring import DEFAULT_TERM_CAP


def _emit(args, text: str):
    if args.output:
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text)


def _csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow(["true" if v is True else "false" if v is False else v for v in r])
    return buf.getvalue()


def _frac(p: Fraction) -> str:
    return f"{p.numerator}/{p.denominator}"


# ---------------------------------------------------------------------------


def cmd_b(args) -> int:
    from .automaton import b_closed_form, count_flat_paths, gamma, load_automaton

    A = load_automaton(args.automaton) if args.automaton else gamma()
    rows, ok = [], True
    for n in range(args.max + 1):
        closed = b_closed_form(n)
        if args.check == "dfs":
            dfs = count_flat_paths(A, n, args.budget)
            agree = dfs == closed
            ok &= agree
            rows.append([n, closed, dfs, agree])
        else:
            rows.append([n, closed])
    header = ["n", "b_closed", "b_dfs", "agree"] if args.check == "dfs" else ["n", "b_closed"]
    _emit(args, _csv(header, rows))
    if args.plot:
        from .plotting import plot_indicator

        plot_indicator([r[0] for r in rows], [r[1] for r in rows], args.plot)
    return 0 if ok else 1


def cmd_paths(args) -> int:
    from .automaton import accepting_paths, gamma, load_automaton

    A = load_automaton(args.automaton) if args.automaton else gamma()
    rows = []
    for i, cert in enumerate(accepting_paths(A, args.length, args.budget)):
        for t, (e, p) in enumerate(zip(cert.edges, cert.products), 1):
            rows.append([i, t, e.source, e.target, "" if e.label.is_identity() else str(e.label), str(p.x), str(p.y)])
    _emit(args, _csv(["path", "step", "source", "target", "label", "omega_x", "omega_y"], rows))
    return 0


def cmd_witness(args) -> int:
    from . import witness as W

    if args.check == "correspondence":
        from .automaton import count_flat_paths, gamma
        from .ring import pruned_identity_count
        from .words import PairElement

        S = W.load_witness_set()
        target = PairElement.parse(W.TARGET_TEXT)
        rows, ok = [], True
        for n in range(1, args.max + 1):
            lhs = pruned_identity_count(S.weighted(), n, target, budget=args.budget, frame=W.FRAME)
            rhs = count_flat_paths(gamma(), n, args.budget)
            ok &= lhs == rhs
            rows.append([n, lhs, rhs, lhs == rhs])
        _emit(args, _csv(["n", "products", "paths", "agree"], rows))
        return 0 if ok else 1
    if args.check == "mod4":
        rows, ok = [], True
        for n in range(1, args.max + 1, 2):
            brute = W.brute_force_u_mod4(n, args.budget)
            closed = W.a_odd_mod4((n - 1) // 2)
            ok &= brute == closed
            rows.append([n, brute, closed, brute == closed])
        _emit(args, _csv(["n", "search_mod4", "closed_form_mod4", "agree"], rows))
        return 0 if ok else 1
    if args.check == "sl4":
        from .words import PairElement

        M = W.sl4_realize(PairElement.parse(args.element or "1"))
        _emit(args, W.matrix_json(M) + "\n")
        return 0
    if args.check == "injectivity":
        rep = W.injectivity_check(args.max_len)
        out = {
            "max_len": rep.max_len,
            "x_words": rep.x_words,
            "y_words": rep.y_words,
            "homomorphism": W.homomorphism_check(),
            "injective": rep.injective,
            "collisions": [[f, list(u), list(v)] for f, u, v in rep.collisions],
        }
        _emit(args, json.dumps(out, indent=2) + "\n")
        return 0 if rep.injective else 1
    if args.check == "egf":
        rows, ok = [], True
        for n in range(args.max + 1):
            good = W.egf_convolution_check(n, args.rank_x, args.rank_y)
            ok &= good
            rows.append([n, W.product_return_bruteforce(n, args.rank_x, args.rank_y), good])
        _emit(args, _csv(["n", "product_returns", "convolution_agrees"], rows))
        return 0 if ok else 1
    if args.check == "u2":
        rows = [[n, W.u2_parity_check(n, args.budget)] for n in range(args.max + 1)]
        _emit(args, _csv(["n", "u2_equals_u_mod2"], rows))
        return 0 if all(r[1] for r in rows) else 1
    raise AssertionError(args.check)


def _load_recurrence(args):
    from .holo import FIXTURES, Recurrence

    if args.recurrence:
        return Recurrence.from_json(Path(args.recurrence).read_text()), None
    fx = FIXTURES[args.fixture]
    return fx.recurrence, fx


def _load_sequence(args):
    from .holo import FIXTURES, SequencePrefix, eval_recurrence

    if args.input:
        return SequencePrefix.from_csv(Path(args.input).read_text())
    if args.fixture == "b":
        from .automaton import b_closed_form

        return SequencePrefix([b_closed_form(n) for n in range(1, args.terms + 1)])
    fx = FIXTURES[args.fixture]
    return eval_recurrence(fx.recurrence, fx.seeds, args.terms)


def cmd_guess(args) -> int:
    from .holo import guess_recurrence

    seq = _load_sequence(args)
    rec = guess_recurrence(seq, args.max_order, args.max_degree, args.held)
    _emit(args, (rec.to_json() if rec else "null") + "\n")
    return 0


def cmd_eval(args) -> int:
    from .holo import SequencePrefix, eval_recurrence

    rec, fx = _load_recurrence(args)
    if args.seeds:
        seeds = SequencePrefix([int(s) for s in args.seeds.split(",")], args.start)
    elif fx is not None:
        seeds = fx.seeds
    else:
        raise PrecurseError("--seeds is required with --recurrence")
    mode = "modular" if args.modulus else args.mode
    seq = eval_recurrence(rec, seeds, args.count, mode, args.modulus)
    out = [[i, _frac(v) if isinstance(v, Fraction) else v] for i, v in zip(seq.indices, seq.terms)]
    _emit(args, _csv(["index", "value"], out))
    return 0


def cmd_forbidden(args) -> int:
    from .holo import find_subword, forbidden_word, parity_prefix

    rec, fx = _load_recurrence(args)
    fw = forbidden_word(rec)
    out = {"ell": fw.ell, "m": fw.m, "d": fw.d, "v": str(fw.v), "length": len(fw.v)}
    if args.check_prefix:
        if fx is None:
            raise PrecurseError("--check-prefix needs a --fixture sequence")
        w = parity_prefix(fx, args.check_prefix)
        out["prefix_bits"] = args.check_prefix
        out["first_occurrence"] = find_subword(w, fw.v)
    _emit(args, json.dumps(out, indent=2) + "\n")
    return 0 if out.get("first_occurrence") is None else 1


def cmd_complexity(args) -> int:
    from .holo import FIXTURES, parity_prefix, subword_complexity

    if args.source == "b":
        from .automaton import b_word

        w = b_word(args.length)
    else:
        w = str(parity_prefix(FIXTURES[args.source], args.length))
    rows = [[n, subword_complexity(w, n), 2**n] for n in range(args.max_n + 1)]
    # counts only see factors inside the prefix, so they are lower bounds
    _emit(args, _csv(["n", "factors_in_prefix", "2^n"], rows))
    if args.plot:
        from .plotting import plot_complexity

        plot_complexity([r[0] for r in rows], [r[1] for r in rows], args.plot, f"{args.source}, {args.length} bits")
    return 0


def _walk_counts(args) -> list[int]:
    from .walk import h_walk

    counts = []
    for st in h_walk(args.steps, args.ball_cap, check_symmetry=args.check_symmetry):
        if st.mass != 6**st.n or st.symmetric is False:
            raise PrecurseError(f"walk invariant failed at step {st.n}")
        counts.append(st.a_n)
    return counts


def cmd_walk(args) -> int:
    from .walk import return_probability

    counts = _walk_counts(args)
    probs = return_probability(counts, 6)
    _emit(args, _csv(["n", "a_n", "p_n"], [[n, a, _frac(p)] for n, (a, p) in enumerate(zip(counts, probs))]))
    if args.plot:
        from .plotting import plot_walk
        from .walk import _log_fraction

        ns = list(range(1, args.steps // 2 + 1))
        plot_walk(ns, [_log_fraction(probs[2 * n]) for n in ns], args.plot)
    return 0


def cmd_fit(args) -> int:
    from .walk import _log_fraction, asymptotic_report, even_probabilities

    if args.input:
        rows = list(csv.DictReader(io.StringIO(Path(args.input).read_text())))
        probs = [Fraction(r["p_n"]) for r in rows]
        p_even = [probs[m] for m in range(2, len(probs), 2)]
    else:
        p_even = even_probabilities(_walk_counts(args), 6)
    rep = asymptotic_report(p_even)
    out = [[f.shape, f"{f.intercept:.12g}", f"{f.slope:.12g}", f"{f.residual:.6e}"] for f in rep.fits]
    _emit(args, _csv(["shape", "intercept", "slope", "rms_residual"], out))
    if args.plot:
        from .plotting import plot_walk

        ns = list(range(1, len(p_even) + 1))
        plot_walk(ns, [_log_fraction(p) for p in p_even], args.plot, rep.fits)
    return 0


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--output", "-o", help="write the table here instead of stdout")
    common.add_argument("--threads", type=int, default=1, help="worker cap (computations here run single-threaded)")
    common.add_argument(
        "--budget", type=int, default=DEFAULT_TERM_CAP, help="memo/support size cap (env PRECURSE_BUDGET)"
    )

    p = argparse.ArgumentParser(prog="precurse", description=__doc__.split("\n\n")[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True, metavar="COMMAND")

    s = sub.add_parser(
        "b",
        parents=[common],
        help="accepting-length indicator b_n of the two-stack graph",
        description="Tabulate b_n from the closed form L(k, j) and optionally check it against a path DFS.",
    )
    s.add_argument("--max", type=int, default=60)
    s.add_argument("--check", choices=["none", "dfs"], default="none")
    s.add_argument("--automaton", help="graph file (default: bundled gamma)")
    s.add_argument("--plot", help="PNG of the indicator")
    s.set_defaults(func=cmd_b)

    s = sub.add_parser(
        "paths",
        parents=[common],
        help="list accepting paths of a given length",
        description="Enumerate accepting paths with their running stack contents, one row per edge.",
    )
    s.add_argument("--length", type=int, required=True)
    s.add_argument("--automaton")
    s.set_defaults(func=cmd_paths)

    s = sub.add_parser(
        "witness",
        parents=[common],
        help="checks on the 19-term witness set and its matrices",
        description=(
            "correspondence: products of witness terms reaching s1^-1 s8 vs accepting paths; "
            "mod4: [1]u^n mod 4 by search vs closed form; sl4: 4x4 matrix of an element; "
            "injectivity: homomorphism and injectivity of the matrix realization; "
            "egf: product-group returns vs binomial convolution; u2: [1]u_2^n = [1]u^n mod 2."
        ),
    )
    s.add_argument("--check", choices=["correspondence", "mod4", "sl4", "injectivity", "egf", "u2"], required=True)
    s.add_argument("--max", type=int, default=12, help="largest n for table checks")
    s.add_argument("--element", help="element in word syntax, for --check sl4")
    s.add_argument("--max-len", type=int, default=6, help="word length for --check injectivity")
    s.add_argument("--rank-x", type=int, default=2)
    s.add_argument("--rank-y", type=int, default=2)
    s.set_defaults(func=cmd_witness)

    def seq_source(s):
        s.add_argument("--input", help="sequence CSV (index,value)")
        s.add_argument("--fixture", choices=["catalan", "fibonacci", "fragmented", "b"], default="catalan")
        s.add_argument("--terms", type=int, default=30)

    s = sub.add_parser(
        "guess",
        parents=[common],
        help="fit a polynomial-coefficient recurrence",
        description="Exact nullspace search over orders and degrees; prints recurrence JSON or null.",
    )
    seq_source(s)
    s.add_argument("--max-order", type=int, default=2)
    s.add_argument("--max-degree", type=int, default=2)
    s.add_argument("--held", type=int, default=10, help="terms held out for confirmation")
    s.set_defaults(func=cmd_guess)

    def rec_source(s):
        s.add_argument("--recurrence", help="recurrence JSON file")
        s.add_argument("--fixture", choices=["catalan", "fibonacci", "fragmented"], default="catalan")

    s = sub.add_parser(
        "eval",
        parents=[common],
        help="evaluate a recurrence from seeds",
        description="Extend seed terms with a recurrence, exactly, rationally or modulo m.",
    )
    rec_source(s)
    s.add_argument("--seeds", help="comma-separated seed terms")
    s.add_argument("--start", type=int, default=1, help="index of the first seed")
    s.add_argument("--count", type=int, default=20)
    s.add_argument("--mode", choices=["integer", "rational"], default="integer")
    s.add_argument("--modulus", type=int)
    s.set_defaults(func=cmd_eval)

    s = sub.add_parser(
        "forbidden",
        parents=[common],
        help="2-adic forbidden factor of a recurrence",
        description="Build the binary word that cannot occur in the parity word of any integer solution.",
    )
    rec_source(s)
    s.add_argument("--check-prefix", type=int, help="scan this many parity bits of the fixture")
    s.set_defaults(func=cmd_forbidden)

    s = sub.add_parser(
        "complexity",
        parents=[common],
        help="factor complexity of a binary prefix",
        description="Count distinct length-n factors of a prefix (a lower bound for the infinite word).",
    )
    s.add_argument("--source", choices=["b", "catalan", "fibonacci", "fragmented"], default="b")
    s.add_argument("--length", type=int, default=40000)
    s.add_argument("--max-n", type=int, default=10)
    s.add_argument("--plot")
    s.set_defaults(func=cmd_complexity)

    def walk_opts(s):
        s.add_argument("--fixture", choices=["H"], default="H")
        s.add_argument("--steps", type=int, default=20)
        s.add_argument("--ball-cap", type=int, default=None)
        s.add_argument("--check-symmetry", action="store_true")
        s.add_argument("--plot")

    s = sub.add_parser(
        "walk",
        parents=[common],
        help="return counts of the walk on Z x| Z^2",
        description="Exact a_n and p_n = a_n / 6^n for the six-generator walk.",
    )
    walk_opts(s)
    s.set_defaults(func=cmd_walk)

    s = sub.add_parser(
        "fit",
        parents=[common],
        help="diagnostic shape fit of log p(2n)",
        description="Least-squares fits against n, n^(1/3) and log n; floating point, non-certifying.",
    )
    walk_opts(s)
    s.add_argument("--input", help="CSV from the walk subcommand")
    s.set_defaults(func=cmd_fit)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "ball_cap", 0) is None:
        from .walk import DEFAULT_BALL_CAP

        args.ball_cap = DEFAULT_BALL_CAP
    try:
        return args.func(args)
    except BudgetExceeded as e:
        print(f"precurse: budget exceeded: {e}", file=sys.stderr)
        return 3
    except (PrecurseError, ValueError, OSError) as e:
        print(f"precurse: error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
