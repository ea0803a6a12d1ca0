"""Command-line front end: ``bikoszul <command> ...``.

Exit codes:
  0  every executed check passed (or was inapplicable; unknown rows warn)
  2  parse error in an input file, an unreadable file, or a bad command line
  3  truncation bound too small for the requested computation
  4  a transfer run failed its own Stasheff certification
  5  verify found a violated identity (the first witness is printed)
  6  the dense oracle disagrees with the main pipeline
  7  analyze: generation by E^1..E^3 under m_2, m_3 fails
  8  analyze: the strong containment criterion fails
  9  analyze: truncated decomposition or re-gluing fails
"""

from __future__ import annotations

import argparse
import dataclasses
import sys

from . import ainfty, bar, classify, generation
from .presentation import ParseError, TruncationError, parse_presentation

EXIT_PARSE, EXIT_TRUNC, EXIT_SELFCERT, EXIT_VERIFY, EXIT_ORACLE = 2, 3, 4, 5, 6
EXIT_GEN, EXIT_STRONG, EXIT_SURGERY = 7, 8, 9


class UsageError(Exception):
    """Flag combination that argparse cannot express; reported like a usage error."""


def _read(path):
    if path == "-":
        return sys.stdin.read()
    with open(path) as fh:
        return fh.read()


def _load_presentation(args):
    pres = parse_presentation(_read(args.path))
    if args.maxdeg is not None:
        top = max(pres.relation_degrees(), default=0)
        if args.maxdeg < max(top, 1):
            raise TruncationError(f"--maxdeg {args.maxdeg} is below the largest relation degree {top}")
        pres = dataclasses.replace(pres, maxdeg=args.maxdeg)
    return pres


def _tor_lines(tor):
    out = []
    for p in sorted(tor):
        for q in sorted(tor[p]):
            out.append(f"tor p={p} q={q} dim={tor[p][q]}")
    return out


def _emit(lines, out):
    text = "\n".join(lines) + "\n"
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_classify(args) -> int:
    pres = _load_presentation(args)
    tor = bar.tor_dimensions(pres, pmax=args.pmax)
    lines = [f"# Tor dimensions through internal degree {pres.maxdeg}"]
    lines += _tor_lines(tor)
    top = max((p for p, v in tor.items() if v), default=0)
    c = classify.classify(tor, pres.maxdeg)
    if c.verdict == "koszul" and top <= 1:
        c.bound = None
    lines += c.lines()
    _emit(lines, args.output)
    return 0


def cmd_oracle(args) -> int:
    pres = _load_presentation(args)
    dense = bar.brute_force_tor(pres, pmax=args.pmax)
    lines = [f"# dense bar-complex Tor through internal degree {pres.maxdeg}"]
    lines += _tor_lines(dense)
    top = max((p for p, v in dense.items() if v), default=0)
    if top < max(dense):
        lines.append(f"# no classes beyond p={top}")
    main = bar.tor_dimensions(pres, pmax=args.pmax)
    agree = {p: v for p, v in main.items() if v} == {p: v for p, v in dense.items() if v}
    lines.append("agreement with main pipeline: " + ("yes" if agree else "NO"))
    _emit(lines, args.output)
    return 0 if agree else EXIT_ORACLE


def cmd_transfer(args) -> int:
    pres = _load_presentation(args)
    dual = bar.build_dual_bar(pres)
    s = bar.merkulov_transfer(dual, nmax=args.nmax)
    reports = ainfty.check_SI_suite(s)
    if s.degrees and s.degrees[0] == (0, 0):
        reports.append(ainfty.check_unitality(s))
    text = ainfty.format_structure(s)
    summary = []
    for r in reports:
        summary += ["# " + x for x in r.lines()]
    bad = [r for r in reports if r.status == "FAIL"]
    summary.append("# certification: " + ("FAIL" if bad else "all checkable identities pass"))
    body = text + "\n".join(summary) + "\n"
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(body)
        sys.stdout.write("\n".join(x[2:] for x in summary) + "\n")
    else:
        sys.stdout.write(body)
    return EXIT_SELFCERT if bad else 0


def _load_structure(path):
    return ainfty.parse_structure(_read(path))


def cmd_verify(args) -> int:
    s = _load_structure(args.path)
    reports = ainfty.check_SI_suite(s, args.nmax)
    if args.morphism:
        if not args.target:
            raise UsageError("verify: --morphism needs --target")
        t = _load_structure(args.target)
        f = ainfty.parse_morphism(_read(args.morphism), s, t)
        top = args.nmax if args.nmax is not None else min(s.complete_arity(), t.complete_arity())
        reports += ainfty.check_MI_suite(f, top)
    lines = []
    witness = None
    for r in reports:
        lines += r.lines()
        if r.status == "FAIL" and witness is None:
            witness = r.lines()[1] if len(r.lines()) > 1 else r.name
        if r.status == "unknown":
            lines.append(f"warning: {r.name} unknown within the stored truncation")
    if witness:
        lines.append("first violation:" + witness.replace("  violation", ""))
    _emit(lines, args.output)
    return EXIT_VERIFY if witness else 0


def cmd_enumerate(args) -> int:
    lines = []
    if args.symbolic:
        sols = classify.symbolic_solutions(args.dmin, args.dmax)
        for key in ("S1", "S2"):
            lines.append(f"{key}: " + " ".join("(" + ", ".join(t) + ")" for t in sols[key]))
        for var in ("d", "d+1"):
            lines.append(f"S3[{var}]: " + " ".join("(" + ", ".join(t) + ")" for t in sols["S3"][var]))
        _emit(lines, args.output)
        return 0
    if args.d is None:
        raise UsageError("enumerate: give --d D or --symbolic")
    ar, sols = classify.enumerate_arities(args.d)
    lines.append(f"arities d={args.d}: {{{', '.join(map(str, ar))}}}")
    for s in sols:
        lines.append(f"solution case={s.case} variant={s.variant} k={s.k} beta={s.beta} l={s.l}")
    lines.append("# admissible components: arity | inputs | target")
    lines += classify.format_rows(classify.admissible_components(args.d))
    _emit(lines, args.output)
    return 0


def _infer_d(s):
    """Smallest d whose component classes cover every basis bidegree, else None."""
    qs = sorted({q for p, q in s.degrees if p == 2})
    for d in sorted({c for q in qs for c in (q - 1, q)}):
        if d < 2:
            continue
        try:
            for p, q in s.degrees:
                classify.component_class(p, q, d)
        except classify.ClassUndefined:
            continue
        return d
    return None


def cmd_analyze(args) -> int:
    s = _load_structure(args.path)
    d = args.d if args.d is not None else _infer_d(s)
    lines = []
    code = 0
    if d is None:
        higher = [n for n in s.arities() if n > 2]
        lines.append("reduced: " + ("yes (vacuous)" if not higher else "n/a"))
        lines.append("truncated: n/a (no Delta_d profile)")
        _emit(lines, args.output)
        return 0
    lines.append(f"d: {d}" + ("" if args.d is not None else " (inferred from E^2 support)"))
    red = classify.is_reduced(s, d)
    lines.append("reduced: " + ("yes" if red.ok else "no"))
    trunc = classify.is_truncated(s, d) if d >= 2 else None
    is_tr = trunc is not None and trunc.ok
    lines.append("truncated: " + ("yes" if is_tr else "no"))
    pmax = args.pmax
    body = []
    if red.ok:
        r = generation.check_thm36(s, d, pmax)
        top = pmax if pmax is not None else max(p for p, _ in s.degrees)
        lines.append(f"[m2,m3]-finitely generated by E^1..E^3: {r.status} (up to p={top})")
        body += r.lines()
        if r.status == "FAIL":
            code = code or EXIT_GEN
    else:
        lines.append("[m2,m3]-finitely generated by E^1..E^3: inapplicable (not reduced)")
        body += red.lines()
    kmax = args.kmax if args.kmax is not None else max(1, (s.trunc - d - 1) // (2 * d))
    if red.ok:
        st = generation.check_strong_criterion(s, d, kmax)
        verdict = {"pass": "yes", "FAIL": "no", "unknown": "unknown"}[st.status]
        lines.append(f"strongly: {verdict} (containment criterion, k<={kmax})")
        body += st.lines()
        if st.status == "FAIL":
            code = code or EXIT_STRONG
        if st.status == "unknown":
            lines.append("warning: strong criterion rows beyond the stored truncation")
    if is_tr and d >= 4:
        try:
            dec = generation.decompose_truncated(s, d)
            glued, _ = generation.glue_decomposition(s, dec, d)
            same = glued == s.with_maps(s.maps)
            lines.append("roundtrip: " + ("identical" if same else "differs"))
            if dec.discarded:
                lines.append(
                    "note: components kept by neither piece: "
                    + ", ".join(f"m_{n} x{len(v)}" for n, v in sorted(dec.discarded.items()))
                )
            if not (same and dec.ok):
                code = code or EXIT_SURGERY
        except (generation.DecompositionError, generation.GlueRejected) as e:
            lines.append(f"roundtrip: failed ({e})")
            code = code or EXIT_SURGERY
    elif is_tr:
        lines.append("roundtrip: n/a (d < 4)")
    keys = ("truncated", "strongly", "roundtrip")
    picked = [x.split(" (")[0] for x in lines if x.split(":")[0] in keys]
    if picked:
        lines.append("summary: " + "; ".join(picked))
    if args.verbose:
        lines += body
    _emit(lines, args.output)
    return code


def build_parser():
    ap = argparse.ArgumentParser(
        prog="bikoszul",
        description="Ext-algebras, A-infinity structures and bi-Koszul checks.",
        epilog=__doc__.split("\n", 2)[2],
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, path=True):
        if path:
            p.add_argument("path", help="input file ('-' for stdin)")
        p.add_argument("-o", "--output", help="write the report to PATH")

    p = sub.add_parser("classify", help="Tor table and Koszul-type verdict of a presentation")
    common(p)
    p.add_argument("--maxdeg", type=int)
    p.add_argument("--pmax", type=int)
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("oracle", help="dense Tor table, compared with the main pipeline")
    common(p)
    p.add_argument("--maxdeg", type=int)
    p.add_argument("--pmax", type=int)
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("transfer", help="minimal A-infinity structure on Ext, self-certified")
    common(p)
    p.add_argument("--maxdeg", type=int)
    p.add_argument("--nmax", type=int)
    p.set_defaults(func=cmd_transfer)

    p = sub.add_parser("verify", help="check Stasheff (and morphism) identities of a structure file")
    common(p)
    p.add_argument("--nmax", type=int)
    p.add_argument("--morphism", help="morphism file with the structure as source")
    p.add_argument("--target", help="target structure file for --morphism")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("enumerate", help="admissible arities and component tables")
    common(p, path=False)
    p.add_argument("--d", type=int)
    p.add_argument("--symbolic", action="store_true")
    p.add_argument("--dmin", type=int, default=5)
    p.add_argument("--dmax", type=int, default=12)
    p.set_defaults(func=cmd_enumerate)

    p = sub.add_parser("analyze", help="reduced/truncated tests, generation and strong criteria")
    common(p)
    p.add_argument("--d", type=int)
    p.add_argument("--pmax", type=int)
    p.add_argument("--kmax", type=int)
    p.add_argument("-v", "--verbose", action="store_true", help="print every per-bidegree line")
    p.set_defaults(func=cmd_analyze)
    return ap


def _check_bounds(args):
    for name in ("maxdeg", "pmax", "nmax", "kmax", "d"):
        v = getattr(args, name, None)
        if v is not None and v < 1:
            raise UsageError(f"--{name} must be positive")


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        _check_bounds(args)
        return args.func(args)
    except UsageError as e:
        parser.error(str(e))
    except ParseError as e:
        print(f"parse error: {e}", file=sys.stderr)
        return EXIT_PARSE
    except TruncationError as e:
        print(f"truncation error: {e}", file=sys.stderr)
        return EXIT_TRUNC
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_PARSE


if __name__ == "__main__":
    sys.exit(main())
