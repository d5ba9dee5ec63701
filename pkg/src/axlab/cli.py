"""Command-line front end: ``axlab <command> [options]``.

Exit status is 0 on success, 1 on domain errors (budget exhausted, a root
outside its set, a rejected witness) and 2 on usage errors.
"""

from __future__ import annotations

import argparse
import logging
import math
import sys

from . import __version__
from .axioms import (
    AXIOMS,
    COMBOS,
    DEFAULT_BUDGET,
    BudgetError,
    WitnessError,
    check_axiom,
    check_combo,
    format_witness,
    parse_witness,
    verify_witness,
)
from .core import (
    Histogram,
    format_histogram,
    format_profile,
    parse_histogram,
    parse_profile,
)
from .lab import (
    default_workers,
    estimate_rates,
    exact_ic_rate,
    fit_powerlaw,
    read_csv,
    write_csv,
)
from .models import ModelError, parse_model, sample_profile
from .rules import UnknownRuleError, get_rule
from .templates import (
    BUILTIN,
    PREDICATES,
    MembershipError,
    TemplateError,
    format_walk,
    generate_root_profile,
    instantiate,
    load_template,
    validate,
    walk,
)

log = logging.getLogger("axlab")


class UsageError(Exception):
    pass


# ------------------------------------------------------------------ helpers

def _int_list(text: str) -> list[int]:
    try:
        out = [int(x) for x in str(text).split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None
    if not out:
        raise argparse.ArgumentTypeError("empty list")
    return out


def _positive(text) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {v}")
    return v


def _read_input(path: str):
    """A Histogram from 'count: ranking' lines or a Profile from plain rankings."""
    text = sys.stdin.read() if path == "-" else open(path).read()
    lines = [ln.split("#", 1)[0].strip() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln]
    if lines and all(":" in ln for ln in lines):
        return parse_histogram(text)
    return parse_profile(text)


def _emit(text: str, path: str | None) -> None:
    if path and path != "-":
        with open(path, "w") as f:
            f.write(text)
    else:
        sys.stdout.write(text)


def _rule(name):
    try:
        return get_rule(name)
    except UnknownRuleError as exc:
        raise UsageError(str(exc)) from None


def load_config(path: str) -> dict:
    """key=value lines; keys are option names without the leading dashes."""
    cfg = {}
    with open(path) as f:
        for no, raw in enumerate(f, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(f"{path}:{no}: expected key=value")
            k, v = (s.strip() for s in line.split("=", 1))
            cfg[k] = v
    return cfg


# ------------------------------------------------------------------ commands

def cmd_check(a) -> int:
    rule = _rule(a.rule)
    x = _read_input(a.input)
    if isinstance(x, Histogram) and not rule.anonymous:
        raise UsageError(f"{rule} needs a voter list, not a histogram")
    if not rule.anonymous:
        h = x
    else:
        h = x.histogram() if not isinstance(x, Histogram) else x
    kw = dict(mode=a.mode, budget=a.budget, samples=a.samples, seed=a.seed)
    if a.combo:
        res = check_combo(a.combo, rule, h, a.B, **kw)
        what = a.combo
    else:
        res = check_axiom(a.axiom, rule, h, a.B, **kw) if a.axiom != "CC" else check_axiom("CC", rule, h)
        what = a.axiom
    status = "satisfied" if res.sat else "violated"
    note = "" if res.exhaustive else " (sampled, not exhaustive)"
    print(f"{what} B={a.B} rule={rule}: {status}{note}")
    if res.witness is not None:
        text = format_witness(res.witness, rule)
        if a.out:
            _emit(text, a.out)
        else:
            sys.stdout.write(text)
    return 0


def cmd_verify(a) -> int:
    with open(a.witness) as f:
        text = f.read()
    if "[witness]" in text:  # output of `template run`
        text = text.split("[witness]", 1)[1]
    try:
        wit, rname = parse_witness(text)
    except ValueError as exc:
        print(f"rejected: {exc}")
        return 1
    rname = a.rule or rname
    if rname is None:
        raise UsageError("witness names no rule; pass --rule")
    rule = _rule(rname)
    try:
        verify_witness(rule, wit, a.B)
    except (WitnessError, ValueError) as exc:
        print(f"rejected: {exc}")
        return 1
    print(f"valid {wit.axiom} witness for {rule}")
    return 0


def cmd_estimate(a) -> int:
    rule = _rule(a.rule)
    parse_model(a.model, a.m, a.n)  # fail fast on bad model strings
    pts = estimate_rates(rule, a.combo, a.n, a.B, model=a.model, trials=a.trials,
                         seed=a.seed, m=a.m, workers=a.threads, budget=a.budget)
    if a.out:
        write_csv(pts, a.out)
    for p in pts:
        print(f"n={p.n} B={p.B} rate={p.rate:.6g} [{p.ci_lo:.6g}, {p.ci_hi:.6g}] "
              f"({p.violations}/{p.trials})")
    return 0


def cmd_exact(a) -> int:
    rule = _rule(a.rule)
    r = exact_ic_rate(rule, a.combo, a.n, a.B, m=a.m)
    print(f"{r.numerator}/{r.denominator} {float(r):.12g}")
    return 0


def _template(a):
    src = a.template
    try:
        return load_template(src, a.m)
    except FileNotFoundError:
        raise UsageError(f"no builtin template or file named {src!r}; builtins: {', '.join(BUILTIN)}") from None


def cmd_template_run(a) -> int:
    rule = _rule(a.rule)
    t = _template(a)
    pred = t.nodes[t.root].predicate
    if a.root:
        h = _read_input(a.root)
        h = h if isinstance(h, Histogram) else h.histogram()
        if h.n != a.n:
            raise UsageError(f"root has {h.n} votes, --n says {a.n}")
    else:
        h = generate_root_profile(pred, a.n, seed=a.seed, m=t.m, template=t)
    B = a.B if a.B else math.isqrt(a.n)
    res = walk(instantiate(t, a.n, B), rule, h, B)
    text = format_walk(res, rule)
    _emit(text, a.out)
    if a.out:
        print(f"{res.axiom} witness written to {a.out}")
    return 0


def cmd_template_validate(a) -> int:
    t = _template(a)
    validate(t)
    print(f"{t.name}: ok ({len(t.nodes)} nodes, {len(t.paths())} leaves, mode {t.mode})")
    return 0


def cmd_root_gen(a) -> int:
    if a.template:
        t = _template(a)
        pred, m = t.nodes[t.root].predicate, t.m
    else:
        t, pred, m = None, a.pred, a.m
        if pred not in PREDICATES:
            raise UsageError(f"unknown predicate {pred!r}")
    h = generate_root_profile(pred, a.n, seed=a.seed, m=m, template=t)
    _emit(format_histogram(h), a.out)
    return 0


def cmd_fit(a) -> int:
    pts = read_csv(a.input)
    pts = [p for p in pts if (a.rule is None or p.rule == a.rule)]
    fr = fit_powerlaw(pts, a.axis)
    print(f"slope={fr.slope:.6f} intercept={fr.intercept:.6f} residual={fr.residual:.6f}")
    if a.gnuplot:
        with open(a.gnuplot, "w") as f:
            f.write(f"# {a.axis} rate\n")
            for p in sorted(pts, key=lambda p: getattr(p, a.axis)):
                f.write(f"{getattr(p, a.axis)} {p.rate!r}\n")
    return 0


def cmd_sample(a) -> int:
    v = parse_model(a.model, a.m, a.n)
    p = sample_profile(v, a.seed, a.trial)
    _emit(format_histogram(p.histogram()) if a.histogram else format_profile(p), a.out)
    return 0


# ------------------------------------------------------------------ parser

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="axlab", description="Voting-axiom violation lab.")
    ap.add_argument("--version", action="version", version=f"axlab {__version__}")
    ap.add_argument("--config", help="key=value file supplying option defaults")
    ap.add_argument("--threads", type=_positive, default=None,
                    help="worker processes (default: $AXLAB_THREADS or all cores)")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", help="check one profile against an axiom or combo")
    p.add_argument("--rule", required=True)
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--combo", choices=sorted(COMBOS))
    g.add_argument("--axiom", choices=AXIOMS)
    p.add_argument("--input", required=True, help="histogram or profile file, '-' for stdin")
    p.add_argument("--B", type=_positive, default=1)
    p.add_argument("--mode", choices=("exact", "sampled"), default="exact")
    p.add_argument("--budget", type=_positive, default=DEFAULT_BUDGET)
    p.add_argument("--samples", type=_positive, default=10_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="write the witness here")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("verify-witness", help="replay a witness file")
    p.add_argument("witness")
    p.add_argument("--rule")
    p.add_argument("--B", type=_positive, default=None)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("estimate", help="Monte-Carlo violation rates")
    p.add_argument("--rule", required=True)
    p.add_argument("--combo", choices=sorted(COMBOS), required=True)
    p.add_argument("--m", type=_positive, default=4)
    p.add_argument("--n", type=_positive, required=True)
    p.add_argument("--B", type=_int_list, default=[1])
    p.add_argument("--model", default="ic")
    p.add_argument("--trials", type=_positive, default=10_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--budget", type=_positive, default=DEFAULT_BUDGET)
    p.add_argument("--out")
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("exact", help="exact violation probability under IC")
    p.add_argument("--rule", required=True)
    p.add_argument("--combo", choices=sorted(COMBOS), required=True)
    p.add_argument("--m", type=_positive, default=3)
    p.add_argument("--n", type=_positive, required=True)
    p.add_argument("--B", type=_positive, default=1)
    p.set_defaults(func=cmd_exact)

    p = sub.add_parser("template", help="run or validate a template")
    tsub = p.add_subparsers(dest="tcmd", required=True)
    q = tsub.add_parser("run")
    q.add_argument("--template", required=True)
    q.add_argument("--rule", required=True)
    q.add_argument("--n", type=_positive, required=True)
    q.add_argument("--B", type=_positive, default=None)
    q.add_argument("--m", type=_positive, default=None, help="alternatives, for templates with a block")
    q.add_argument("--seed", type=int, default=0)
    q.add_argument("--root", help="root histogram file (default: generate one)")
    q.add_argument("--out")
    q.set_defaults(func=cmd_template_run)
    q = tsub.add_parser("validate")
    q.add_argument("template")
    q.add_argument("--m", type=_positive, default=None)
    q.set_defaults(func=cmd_template_validate)

    p = sub.add_parser("root", help="root profiles")
    rsub = p.add_subparsers(dest="rcmd", required=True)
    q = rsub.add_parser("gen")
    g = q.add_mutually_exclusive_group(required=True)
    g.add_argument("--template")
    g.add_argument("--pred", choices=sorted(PREDICATES))
    q.add_argument("--n", type=_positive, required=True)
    q.add_argument("--m", type=_positive, default=None)
    q.add_argument("--seed", type=int, default=0)
    q.add_argument("--out")
    q.set_defaults(func=cmd_root_gen)

    p = sub.add_parser("fit", help="power-law fit of rates in a CSV")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--axis", choices=("n", "B"), default="n")
    p.add_argument("--rule")
    p.add_argument("--gnuplot", help="write two-column plot data here")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("sample", help="draw one profile from a model")
    p.add_argument("--model", default="ic")
    p.add_argument("--m", type=_positive, default=3)
    p.add_argument("--n", type=_positive, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--trial", type=int, default=0)
    p.add_argument("--histogram", action="store_true", help="print counts instead of votes")
    p.add_argument("--out")
    p.set_defaults(func=cmd_sample)
    return ap


def _config_path(argv):
    for i, tok in enumerate(argv):
        if tok == "--config" and i + 1 < len(argv):
            return argv[i + 1]
        if tok.startswith("--config="):
            return tok.split("=", 1)[1]
    return None


def with_config(argv: list) -> list:
    """Append config entries as flags unless the command line already has them."""
    path = _config_path(argv)
    if path is None:
        return argv
    extra = []
    for k, v in load_config(path).items():
        flag = "--" + k
        if any(t == flag or t.startswith(flag + "=") for t in argv):
            continue
        if v.lower() in ("true", "yes", "on"):
            extra.append(flag)  # store_true switches
        else:
            extra += [flag, v]
    return argv + extra


def run(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    ap = build_parser()
    try:
        args = ap.parse_args(with_config(argv))
    except SystemExit as exc:
        return int(exc.code or 0)
    except (UsageError, OSError) as exc:
        print(f"axlab: error: {exc}", file=sys.stderr)
        return 2
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    args.threads = args.threads or default_workers()
    try:
        return args.func(args)
    except (UsageError, UnknownRuleError, FileNotFoundError) as exc:
        print(f"axlab: error: {exc}", file=sys.stderr)
        return 2
    except (BudgetError, MembershipError, TemplateError, WitnessError, ModelError, ValueError) as exc:
        print(f"axlab: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
