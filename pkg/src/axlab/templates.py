"""Violation templates: proof diagrams as data, scaled by ceil(sqrt n).

A template is a rooted tree.  Interior nodes route on the current winner,
edges carry flip or change operations measured in abstract units, and each
leaf names the Condorcet winner its profile must have.  ``instantiate`` turns
every unit into operations of at most B votes; ``walk`` follows the tree from
a root profile and stops at the first group-axiom or Condorcet violation.
"""

from __future__ import annotations

import logging
import math
import re
from dataclasses import dataclass, field, replace
from importlib import resources

import numpy as np

from .axioms import (
    CoalitionAction,
    Move,
    ViolationWitness,
    verify_witness,
)
from .core import (
    Histogram,
    condorcet_winner,
    n_rankings,
    pair_list,
    pairwise_signs,
    parse_ranking,
    prefers,
    raises,
    ranking_index,
    ranking_str,
    reverse,
    weighted_majority_graph,
)
from .rules import apply_rule, get_rule

log = logging.getLogger(__name__)

BUILTIN = ("cm_m3", "cs_m3", "cp_m4", "ch_m4", "general_m")
MODES = ("par", "hm", "mm", "sp")
UNIT_BUDGET = 7


class TemplateError(ValueError):
    """Malformed template, or a walk that broke a template guarantee."""


class TemplateParseError(TemplateError):
    def __init__(self, line: int, msg: str):
        super().__init__(f"line {line}: {msg}")
        self.line = line


class MembershipError(TemplateError):
    pass


class InsufficientVotes(TemplateError):
    pass


@dataclass(frozen=True)
class Op:
    kind: str  # "flip" or "change"
    count: int  # abstract units, or votes once instantiated
    frm: tuple
    to: tuple


@dataclass(frozen=True)
class Cond:
    winners: frozenset
    goto: str | None  # None marks an unreachable winner set


@dataclass(frozen=True)
class Node:
    name: str
    conds: tuple = ()
    condorcet: int | None = None  # set on leaves
    predicate: str | None = None  # set on the root

    @property
    def is_leaf(self) -> bool:
        return self.condorcet is not None


@dataclass(frozen=True)
class Template:
    name: str
    m: int
    mode: str
    root: str
    nodes: dict = field(hash=False, compare=True)
    edges: dict = field(hash=False, compare=True)  # (parent, child) -> tuple[Op]
    base: int | None = None
    n: int | None = None  # set once instantiated
    B: int | None = None

    @property
    def instantiated(self) -> bool:
        return self.n is not None

    @property
    def scale(self) -> int:
        return math.isqrt(self.n - 1) + 1 if self.n else 1

    def children(self, name):
        return [c for (p, c) in self.edges if p == name]

    def paths(self):
        """Root-to-leaf node sequences, in file order."""
        out = []

        def rec(name, acc):
            node = self.nodes[name]
            if node.is_leaf:
                out.append(acc)
                return
            for cond in node.conds:
                if cond.goto is not None:
                    rec(cond.goto, acc + [cond.goto])

        rec(self.root, [self.root])
        return out

    def total_ops(self) -> int:
        return sum(len(v) for v in self.edges.values())


# ------------------------------------------------------------------ root sets

@dataclass(frozen=True)
class RootPredicate:
    kind: str
    weights: tuple = ()  # ((a, b, w), ...) for a -> b edges
    tol: float = 1.0  # band half-width in units of sqrt n
    hist_tol: float = 4.0
    block_margin: float = 20.0


CP_WEIGHTS = ((1, 2, 8), (3, 1, 12), (2, 4, 12), (4, 3, 8))

PREDICATES = {
    "cp_m4": RootPredicate("cp_m4", CP_WEIGHTS),
    "general_m": RootPredicate("general_m", CP_WEIGHTS),
    "cm_m3": RootPredicate("cm_m3"),
}


def get_predicate(p) -> RootPredicate:
    if isinstance(p, RootPredicate):
        return p
    if p not in PREDICATES:
        raise TemplateError(f"unknown root predicate {p!r}")
    return PREDICATES[p]


def _weight(pred: RootPredicate, a: int, b: int) -> int:
    for x, y, w in pred.weights:
        if (x, y) == (a, b):
            return w
        if (x, y) == (b, a):
            return -w
    return 0


def check_root_membership(pred, h: Histogram, n: int | None = None, B: int = 1) -> bool:
    pred = get_predicate(pred)
    n = h.n if n is None else n
    if h.n != n:
        return False
    if not 1 <= B or B * B > n:
        raise ValueError(f"B must lie in 1..sqrt(n), got B={B}, n={n}")
    g = weighted_majority_graph(h)
    rt = math.sqrt(n)
    m = h.m
    if pred.kind == "cm_m3":
        if m != 3:
            return False
        return all(0 <= g[a - 1, b - 1] <= rt for a, b in ((1, 2), (2, 3), (3, 1)))
    if pred.kind == "cp_m4" and m != 4:
        return False
    if pred.kind == "general_m" and m < 5:
        return False
    for a in range(1, 5):
        for b in range(1, 5):
            if a != b and abs(g[a - 1, b - 1] - rt * _weight(pred, a, b)) > pred.tol * rt:
                return False
    if np.abs(h.counts - n / n_rankings(m)).max() > pred.hist_tol * rt:
        return False
    if pred.kind == "general_m":
        if (g[:4, 4:] < pred.block_margin * rt).any():
            return False
    return True


# ------------------------------------------------------------------ file format

_SECTION = re.compile(r"\[(node|edge|leaf)\s+([^\]]+)\]$")


def _parse_set(text: str, m: int, base: int | None, line: int) -> frozenset:
    text = text.strip()
    if not (text.startswith("{") and text.endswith("}")):
        raise TemplateParseError(line, f"expected a winner set like {{1,2}}, got {text!r}")
    out = set()
    for tok in filter(None, (t.strip() for t in text[1:-1].split(","))):
        mm = re.fullmatch(r"(\d+)\.\.(m|\d+)", tok)
        if mm:
            lo = int(mm.group(1))
            hi = m if mm.group(2) == "m" else int(mm.group(2))
            out.update(range(lo, hi + 1))
        elif tok.isdigit():
            out.add(int(tok))
        else:
            raise TemplateParseError(line, f"bad winner token {tok!r}")
    bad = [a for a in out if not 1 <= a <= m]
    if bad:
        raise TemplateParseError(line, f"alternatives {bad} outside 1..{m}")
    return frozenset(out)


def _extend(r: tuple, m: int, base: int | None, line: int) -> tuple:
    if base is None:
        if len(r) != m:
            raise TemplateParseError(line, f"ranking {ranking_str(r)} is not over {m} alternatives")
        return r
    if len(r) != base:
        raise TemplateParseError(line, f"ranking {ranking_str(r)} is not over {base} alternatives")
    return r + tuple(range(base + 1, m + 1))


def parse_template(text: str, m: int | None = None) -> Template:
    """Parse template text; ``m`` overrides the file's m for templates with a base."""
    head = {}
    sections = []
    cur = None
    for no, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        sm = _SECTION.match(line)
        if sm:
            cur = (sm.group(1), sm.group(2).split(), no, [])
            sections.append(cur)
            continue
        if line.startswith("["):
            raise TemplateParseError(no, f"bad section header {line!r}")
        if cur is None:
            parts = line.split(None, 1)
            if len(parts) != 2:
                raise TemplateParseError(no, f"expected 'key value', got {line!r}")
            if parts[0] in head:
                raise TemplateParseError(no, f"duplicate header {parts[0]}")
            head[parts[0]] = (parts[1].strip(), no)
        else:
            cur[3].append((no, line))
    for key in ("template", "m", "mode"):
        if key not in head:
            raise TemplateParseError(1, f"missing header '{key}'")
    unknown = set(head) - {"template", "m", "mode", "base", "n", "B"}
    if unknown:
        k = sorted(unknown)[0]
        raise TemplateParseError(head[k][1], f"unknown header {k!r}")

    def hint(key):
        v, no = head[key]
        try:
            return int(v)
        except ValueError:
            raise TemplateParseError(no, f"{key} must be an integer") from None

    base = hint("base") if "base" in head else None
    mm = hint("m")
    if m is not None:
        if base is None and m != mm:
            raise TemplateError(f"template {head['template'][0]} is fixed to m={mm}")
        mm = m
    if base is not None and mm <= base:
        raise TemplateError(f"m must exceed base {base}")
    mode = head["mode"][0].lower()
    if mode not in MODES:
        raise TemplateParseError(head["mode"][1], f"mode must be one of {MODES}")
    n = hint("n") if "n" in head else None
    B = hint("B") if "B" in head else None

    nodes, edges, root = {}, {}, None
    for kind, args, no, body in sections:
        if kind in ("node", "leaf"):
            if len(args) != 1:
                raise TemplateParseError(no, f"[{kind}] takes one name")
            name = args[0]
            if name in nodes:
                raise TemplateParseError(no, f"duplicate node {name}")
            conds, cw, pred = [], None, None
            for ln, line in body:
                if kind == "leaf":
                    lm = re.fullmatch(r"condorcet\s+(\d+)", line)
                    if not lm:
                        raise TemplateParseError(ln, f"leaf expects 'condorcet A', got {line!r}")
                    if cw is not None:
                        raise TemplateParseError(ln, "duplicate condorcet label")
                    cw = int(lm.group(1))
                    if not 1 <= cw <= mm:
                        raise TemplateParseError(ln, f"alternative {cw} outside 1..{mm}")
                    continue
                if line.startswith("root "):
                    pred = line.split(None, 1)[1].strip()
                    if pred not in PREDICATES:
                        raise TemplateParseError(ln, f"unknown root predicate {pred!r}")
                    if root is not None:
                        raise TemplateParseError(ln, "second root")
                    root = name
                    continue
                om = re.fullmatch(r"on\s+(\{[^}]*\})\s+(?:goto\s+(\S+)|(unreachable))", line)
                if not om:
                    raise TemplateParseError(ln, f"expected 'on {{..}} goto NODE' or 'on {{..}} unreachable', got {line!r}")
                ws = _parse_set(om.group(1), mm, base, ln)
                if ws:
                    conds.append(Cond(ws, om.group(2)))
            if kind == "leaf" and cw is None:
                raise TemplateParseError(no, f"leaf {name} lacks a condorcet label")
            nodes[name] = Node(name, tuple(conds), cw, pred)
        else:
            if len(args) != 2:
                raise TemplateParseError(no, "[edge] takes parent and child names")
            key = (args[0], args[1])
            if key in edges:
                raise TemplateParseError(no, f"duplicate edge {args[0]} -> {args[1]}")
            ops = []
            for ln, line in body:
                parts = line.split()
                if not parts or parts[0] not in ("flip", "change"):
                    raise TemplateParseError(ln, f"expected 'flip COUNT FROM' or 'change COUNT FROM TO', got {line!r}")
                want = 3 if parts[0] == "flip" else 4
                if len(parts) != want:
                    raise TemplateParseError(ln, f"{parts[0]} takes {want - 1} arguments")
                try:
                    cnt = int(parts[1])
                    frm = _extend(parse_ranking(parts[2]), mm, base, ln)
                    to = reverse(frm) if parts[0] == "flip" else _extend(parse_ranking(parts[3]), mm, base, ln)
                except ValueError as exc:
                    if isinstance(exc, TemplateParseError):
                        raise
                    raise TemplateParseError(ln, str(exc)) from None
                if cnt < 1:
                    raise TemplateParseError(ln, "count must be positive")
                ops.append(Op(parts[0], cnt, frm, to))
            edges[key] = tuple(ops)
    if root is None:
        raise TemplateError("no node declares a root predicate")
    t = Template(head["template"][0], mm, mode, root, nodes, edges, base, n, B)
    validate(t)
    return t


def validate(t: Template) -> None:
    """Raise TemplateError listing every structural problem found."""
    errs = []
    alts = frozenset(range(1, t.m + 1))
    parents = {}
    for (p, c), ops in t.edges.items():
        for x in (p, c):
            if x not in t.nodes:
                errs.append(f"edge {p} -> {c} names unknown node {x}")
        if c in parents:
            errs.append(f"node {c} has two parents")
        parents[c] = p
        if not ops:
            errs.append(f"edge {p} -> {c} has no operations")
        for op in ops:
            if op.kind == "flip" and op.to != reverse(op.frm):
                errs.append(f"edge {p} -> {c}: flip target is not the reverse")
            if op.kind == "change" and op.to == op.frm:
                errs.append(f"edge {p} -> {c}: change to the same ranking")
            if t.mode in ("par", "hm") and op.kind != "flip":
                errs.append(f"edge {p} -> {c}: mode {t.mode} needs flip operations")
    for name, node in t.nodes.items():
        if node.is_leaf:
            if node.conds:
                errs.append(f"leaf {name} has winner conditions")
            continue
        seen = set()
        for cond in node.conds:
            dup = seen & cond.winners
            if dup:
                errs.append(f"node {name}: winners {sorted(dup)} covered twice")
            seen |= cond.winners
            if cond.goto is not None and parents.get(cond.goto) != name:
                errs.append(f"node {name}: goto {cond.goto} without an edge {name} -> {cond.goto}")
        if seen != alts:
            errs.append(f"node {name}: winners {sorted(alts - seen)} not covered")
        for c in t.children(name):
            if not any(cd.goto == c for cd in node.conds):
                errs.append(f"edge {name} -> {c} is never taken")
    if t.root in parents:
        errs.append("root has a parent")
    for name in t.nodes:
        if name != t.root and name not in parents:
            errs.append(f"node {name} is unreachable from the root")
    # cycles
    for name in t.nodes:
        cur, hops = name, 0
        while cur in parents and hops <= len(t.nodes):
            cur, hops = parents[cur], hops + 1
        if hops > len(t.nodes):
            errs.append(f"cycle through {name}")
            break
    if not errs:
        cap = UNIT_BUDGET * (t.scale if t.instantiated else 1)
        for path in t.paths():
            tot = sum(op.count for a, b in zip(path, path[1:]) for op in t.edges[(a, b)])
            if tot > cap:
                errs.append(f"branch {' -> '.join(path)} moves {tot} > {cap}")
    if errs:
        raise TemplateError("; ".join(errs))


def format_template(t: Template) -> str:
    def rk(r):
        return ranking_str(r[: t.base] if t.base else r)

    def ws(s):
        s = sorted(s)
        if t.base and s and s == list(range(t.base + 1, t.m + 1)):
            return "{" + f"{t.base + 1}..m" + "}"
        return "{" + ",".join(map(str, s)) + "}"

    out = [f"template {t.name}"]
    if t.base:
        out.append(f"base {t.base}")
    out += [f"m {t.m}", f"mode {t.mode}"]
    if t.instantiated:
        out += [f"n {t.n}", f"B {t.B}"]
    out.append("")
    order = []

    def rec(name):
        order.append(name)
        for c in t.children(name):
            rec(c)

    rec(t.root)
    for name in order:
        node = t.nodes[name]
        parent = next((p for (p, c) in t.edges if c == name), None)
        if parent is not None:
            out.append(f"[edge {parent} {name}]")
            for op in t.edges[(parent, name)]:
                if op.kind == "flip":
                    out.append(f"flip {op.count} {rk(op.frm)}")
                else:
                    out.append(f"change {op.count} {rk(op.frm)} {rk(op.to)}")
            out.append("")
        if node.is_leaf:
            out += [f"[leaf {name}]", f"condorcet {node.condorcet}", ""]
        else:
            out.append(f"[node {name}]")
            if node.predicate:
                out.append(f"root {node.predicate}")
            for cd in node.conds:
                tgt = "unreachable" if cd.goto is None else f"goto {cd.goto}"
                out.append(f"on {ws(cd.winners)} {tgt}")
            out.append("")
    return "\n".join(out)


save_template = format_template


def load_template(source, m: int | None = None) -> Template:
    """Load a builtin template by name, a path, or raw template text."""
    src = str(source)
    if src in BUILTIN:
        text = resources.files("axlab").joinpath("data", f"{src}.tmpl").read_text()
    elif "\n" in src:
        text = src
    else:
        with open(src) as f:
            text = f.read()
    return parse_template(text, m)


# ------------------------------------------------------------------ scaling

def split_unit(s: int, B: int) -> list[int]:
    """Sizes of the ceil(s/B) operations that realize one unit of s votes."""
    q = -(-s // B)
    return [B] * (q - 1) + [s - B * (q - 1)]


def instantiate(t: Template, n: int, B: int) -> Template:
    if t.instantiated:
        raise TemplateError("template already instantiated")
    if B < 1 or B * B > n:
        raise ValueError(f"B must lie in 1..sqrt(n), got B={B}, n={n}")
    return _expand(t, n, B)


def _expand(t: Template, n: int, B: int) -> Template:
    s = math.isqrt(n - 1) + 1
    sizes = split_unit(s, B)
    edges = {}
    for key, ops in t.edges.items():
        out = []
        for op in ops:
            for _ in range(op.count):
                out.extend(replace(op, count=c) for c in sizes)
        edges[key] = tuple(out)
    res = replace(t, edges=edges, n=n, B=B)
    validate(res)
    return res


# ------------------------------------------------------------------ walking

@dataclass
class WalkResult:
    witness: ViolationWitness
    axiom: str
    path: list  # (Histogram, winner) per visited profile
    ops: list  # operations applied, in order
    nodes: list  # template nodes visited

    def profiles_visited(self) -> int:
        return len(self.path)


def _winner(rule, h: Histogram) -> int:
    return apply_rule(rule, h)


def _apply(h: Histogram, frm, to, k) -> Histogram:
    c = h.counts.copy()
    i = ranking_index(frm)
    if c[i] < k:
        raise InsufficientVotes(f"need {k} votes {ranking_str(frm)}, have {c[i]}")
    c[i] -= k
    c[ranking_index(to)] += k
    return Histogram(h.m, c)


def _cc_witness(rule, h, w):
    cw = condorcet_winner(weighted_majority_graph(h))
    if cw is not None and cw != w:
        return cw, ViolationWitness("CC", h, CoalitionAction("none"), h, w, w, None, cw)
    return cw, None


def _op_witness(t: Template, rule, op: Op, p1, w1, p2, w2, B):
    """Witness triggered by one operation, or None if the mode's rule is quiet."""
    k = op.count
    mode = t.mode
    if mode in ("par", "hm"):
        if w1 == w2 or not prefers(op.frm, w2, w1):
            return None
        if mode == "hm":
            act = CoalitionAction("flip-to-reverse", (Move(op.frm, op.to, k),))
            return ViolationWitness("HM", p1, act, p2, w1, w2, B)
        c = p1.counts.copy()
        c[ranking_index(op.frm)] -= k
        pb = Histogram(p1.m, c)
        wb = _winner(rule, pb)
        if prefers(op.frm, wb, w1):
            act = CoalitionAction("abstain", (Move(op.frm, None, k),))
            return ViolationWitness("Par", p1, act, pb, w1, wb, B)
        # otherwise the new voters at P2 gain by abstaining back to P1^B
        if not prefers(op.to, wb, w2):
            raise TemplateError("abstention extraction failed")
        act = CoalitionAction("abstain", (Move(op.to, None, k),))
        return ViolationWitness("Par", p2, act, pb, w2, wb, B)
    if w1 == w2:
        return None
    if mode == "mm":
        if not raises(op.frm, op.to, w1):
            raise TemplateError(f"winner changed on a non-raising operation {ranking_str(op.frm)} -> {ranking_str(op.to)}")
        act = CoalitionAction("change", (Move(op.frm, op.to, k),))
        return ViolationWitness("MM", p1, act, p2, w1, w2, B)
    # sp: forward manipulation at P1, else backward at P2
    if prefers(op.frm, w2, w1):
        act = CoalitionAction("change", (Move(op.frm, op.to, k),))
        return ViolationWitness("SP", p1, act, p2, w1, w2, B)
    if prefers(op.to, w1, w2):
        act = CoalitionAction("change", (Move(op.to, op.frm, k),))
        return ViolationWitness("SP", p2, act, p1, w2, w1, B)
    raise TemplateError("winner changed but neither direction is a manipulation")


def walk(t: Template, rule, root: Histogram, B: int | None = None, *, check_root: bool = True) -> WalkResult:
    """Follow the tree from root until a verified witness appears."""
    rule = get_rule(rule)
    if not t.instantiated:
        raise TemplateError("instantiate the template before walking")
    B = t.B if B is None else B
    if B != t.B:
        raise TemplateError(f"template instantiated for B={t.B}, walk asked for B={B}")
    if root.m != t.m or root.n != t.n:
        raise TemplateError(f"root has (m, n) = ({root.m}, {root.n}), template ({t.m}, {t.n})")
    pred = t.nodes[t.root].predicate
    if check_root and not check_root_membership(pred, root, t.n, B):
        raise MembershipError(f"root histogram fails the {pred} membership test")
    h = root
    w = _winner(rule, h)
    path = [(h, w)]
    ops_done = []
    name = t.root
    visited = [name]
    while True:
        node = t.nodes[name]
        cw, wit = _cc_witness(rule, h, w)
        if node.is_leaf:
            if cw != node.condorcet:
                raise TemplateError(f"leaf {name}: Condorcet winner {cw}, expected {node.condorcet}")
            if wit is None:
                raise TemplateError(f"leaf {name}: rule elects the Condorcet winner, no violation found")
            return _finish(rule, wit, "CC", path, ops_done, visited)
        if wit is not None:
            return _finish(rule, wit, "CC", path, ops_done, visited)
        cond = next(c for c in node.conds if w in c.winners)
        if cond.goto is None:
            raise TemplateError(f"node {name}: winner {w} was declared unreachable")
        for op in t.edges[(name, cond.goto)]:
            h2 = _apply(h, op.frm, op.to, op.count)
            w2 = _winner(rule, h2)
            ops_done.append(op)
            path.append((h2, w2))
            wit = _op_witness(t, rule, op, h, w, h2, w2, B)
            if wit is not None:
                return _finish(rule, wit, wit.axiom, path, ops_done, visited)
            h, w = h2, w2
        name = cond.goto
        visited.append(name)


def _finish(rule, wit, axiom, path, ops, visited) -> WalkResult:
    verify_witness(rule, wit, wit.B)
    label = {"Par": "Par_B", "HM": "HM_B", "MM": "MM_B", "SP": "SP_B", "CC": "CC"}[axiom]
    return WalkResult(wit, label, path, ops, visited)


def unwind(h: Histogram, ops) -> Histogram:
    """Replay the reverse of each operation, last first."""
    for op in reversed(list(ops)):
        h = _apply(h, op.to, op.frm, op.count)
    return h


def format_walk(res: WalkResult, rule=None) -> str:
    from .axioms import format_witness
    out = [f"violation: {res.axiom}", f"nodes: {' '.join(res.nodes)}", f"profiles: {len(res.path)}", "[path]"]
    base = res.path[0][0].counts
    for i, (h, w) in enumerate(res.path):
        d = h.counts - base
        nz = np.flatnonzero(d)
        delta = " ".join(f"{int(d[j]):+d}:{ranking_str(tuple(int(x) for x in _rk(h.m, j)))}" for j in nz)
        out.append(f"{i} winner={w} delta={delta or '0'}")
    out.append("[witness]")
    return "\n".join(out) + "\n" + format_witness(res.witness, rule)


def _rk(m, j):
    from .core import all_rankings
    return all_rankings(m)[j]


# ------------------------------------------------------------------ roots

def _unit_path_constraints(t: Template, n: int, paths=None):
    """Linear requirements A h >= b so every operation has enough source votes."""
    s = math.isqrt(n - 1) + 1
    k = n_rankings(t.m)
    rows, rhs = [], []
    for path in (paths if paths is not None else t.paths()):
        net = np.zeros(k)
        for a, b in zip(path, path[1:]):
            for op in t.edges[(a, b)]:
                f, g = ranking_index(op.frm), ranking_index(op.to)
                for _ in range(op.count):
                    row = np.zeros(k)
                    row[f] = 1
                    rows.append(row)
                    rhs.append(s - net[f])
                    net[f] -= s
                    net[g] += s
    if not rows:
        return np.zeros((0, k)), np.zeros(0)
    return np.array(rows), np.array(rhs)


def path_feasible(t: Template, h: Histogram, paths=None) -> bool:
    A, b = _unit_path_constraints(t, h.n, paths)
    return bool((A @ h.counts >= b - 1e-9).all())


def _core_paths(t: Template):
    """Paths that never route on a winner set inside the appended block."""
    if not t.base:
        return t.paths()
    block = frozenset(range(t.base + 1, t.m + 1))
    out = []
    for path in t.paths():
        ok = True
        for a, b in zip(path, path[1:]):
            cond = next(c for c in t.nodes[a].conds if c.goto == b)
            if cond.winners <= block:
                ok = False
        if ok:
            out.append(path)
    return out


def min_root_n(m: int) -> int:
    """Smallest n with n/m! - 8 ceil(sqrt n) >= ceil(sqrt n)."""
    k = n_rankings(m)
    n = 1
    while n / k - 9 * (math.isqrt(n - 1) + 1) < 0:
        n += 1
    return n


def generate_root_profile(pred, n: int, seed: int = 0, m: int | None = None,
                          template: Template | None = None) -> Histogram:
    """A random histogram inside the predicate's root set.

    When a template is given, the root also carries enough source votes for
    every operation on every branch (or, for templates with an appended
    block, on every branch that avoids block winners if the full set is
    infeasible at this n).
    """
    pred = get_predicate(pred)
    rng = np.random.default_rng([int(seed), n])
    if pred.kind == "cm_m3":
        return _cm_root(n, rng, template)
    if m is None:
        m = 4 if pred.kind == "cp_m4" else 5
    if template is None:
        template = load_template("cp_m4" if pred.kind == "cp_m4" else "general_m", None if pred.kind == "cp_m4" else m)
    h = _recipe_root(pred, n, m, rng, template)
    if h is None:
        h = _milp_root(pred, n, m, rng, template)
    if not check_root_membership(pred, h, n, 1):
        raise TemplateError("generated root fails its own membership test")
    return h


def _balanced_base(n: int, m: int, rng) -> np.ndarray:
    """Near-uniform counts with every ranking paired with its reverse."""
    from .core import reverse_index
    k = n_rankings(m)
    rv = reverse_index(m)
    c = np.full(k, n // k, dtype=np.int64)
    rem = n - c.sum()
    reps = [i for i in range(k) if i < rv[i]]
    pick = rng.permutation(reps)[: rem // 2]
    c[pick] += 1
    c[rv[pick]] += 1
    rem -= 2 * len(pick)
    return c, int(rem)


def _cm_root(n, rng, template):
    if template is None:
        template = load_template("cm_m3")
    rt = math.sqrt(n)
    cyc = [ranking_index(r) for r in ((1, 2, 3), (2, 3, 1), (3, 1, 2))]
    from .core import reverse_index
    rv = reverse_index(3)
    for _ in range(1000):
        c, rem = _balanced_base(n, 3, rng)
        # odd leftovers go to one cycle ranking each
        for j in range(rem):
            c[cyc[j % 3]] += 1
        hi = max(1, math.floor(rt / 2))
        ks = rng.integers(1, hi + 1, size=3)
        for i, kk in zip(cyc, ks):
            kk = min(int(kk), int(c[rv[i]]))
            c[rv[i]] -= kk
            c[i] += kk
        h = Histogram(3, c)
        g = weighted_majority_graph(h)
        mar = [g[0, 1], g[1, 2], g[2, 0]]
        if min(mar) >= 1 and max(mar) <= rt and path_feasible(template, h):
            return _neutral_shuffle(h, rng, lambda x: check_root_membership("cm_m3", x, n, 1)
                                    and min(_cyc(x)) >= 1 and path_feasible(template, x))
    raise TemplateError(f"could not build a cm_m3 root at n={n}")


def _cyc(h):
    g = weighted_majority_graph(h)
    return [g[0, 1], g[1, 2], g[2, 0]]


def _neutral_shuffle(h: Histogram, rng, ok, rounds: int = 64) -> Histogram:
    """Random moves that keep every pairwise margin: +k on R and reverse(R), -k on S and reverse(S)."""
    from .core import reverse_index
    m = h.m
    k = n_rankings(m)
    rv = reverse_index(m)
    reps = [i for i in range(k) if i < rv[i]]
    c = h.counts.copy()
    for _ in range(rounds):
        a, b = rng.choice(reps, size=2, replace=False)
        amt = int(rng.integers(1, 4))
        d = c.copy()
        d[a] += amt
        d[rv[a]] += amt
        d[b] -= amt
        d[rv[b]] -= amt
        if (d < 0).any():
            continue
        cand = Histogram(m, d)
        if ok(cand):
            c = d
    return Histogram(m, c)


def _recipe_root(pred, n, m, rng, template):
    """Near-uniform base plus the unit flips that shape the root margins."""
    s = math.isqrt(n - 1) + 1
    recipe = (((1, 2, 4, 3), 2), ((2, 4, 3, 1), 3), ((3, 1, 2, 4), 3), ((4, 3, 1, 2), 2))
    c, rem = _balanced_base(n, m, rng)
    if rem:
        return None
    for r, units in recipe:
        full = r + tuple(range(5, m + 1))
        i, j = ranking_index(full), ranking_index(reverse(full))
        if c[j] < units * s:
            return None
        c[j] -= units * s
        c[i] += units * s
    h = Histogram(m, c)
    if pred.kind == "general_m":
        return None  # the block margins need a dedicated construction
    if check_root_membership(pred, h, n, 1) and path_feasible(template, h):
        return h
    return None


def _milp_root(pred, n, m, rng, template):
    from scipy.optimize import Bounds, LinearConstraint, milp

    k = n_rankings(m)
    rt = math.sqrt(n)
    mu = n / k
    pw = pairwise_signs(m)
    plist = pair_list(m)
    # target: a random near-uniform histogram, matched in L1
    goal = rng.multinomial(n, np.full(k, 1.0 / k)).astype(float)
    eye = np.eye(k)

    def base_cons(spread, slack):
        cons = [LinearConstraint(np.concatenate([np.ones(k), np.zeros(k)])[None, :], n, n)]
        rows, lo, hi = [], [], []
        for j, (a, b) in enumerate(plist):
            if a < 4 and b < 4:
                tgt = rt * _weight(pred, a + 1, b + 1) + rng.uniform(-spread, spread) * rt
                rows.append(pw[:, j])
                lo.append(tgt - slack * rt)
                hi.append(tgt + slack * rt)
            elif a < 4 <= b and pred.kind == "general_m":
                rows.append(pw[:, j])
                lo.append(pred.block_margin * rt)
                hi.append(np.inf)
        R = np.array(rows, dtype=float)
        cons.append(LinearConstraint(np.hstack([R, np.zeros_like(R)]), lo, hi))
        # L1 distance to the goal via t >= |h - goal|
        cons.append(LinearConstraint(np.hstack([eye, -eye]), -np.inf, goal))
        cons.append(LinearConstraint(np.hstack([-eye, -eye]), -np.inf, -goal))
        return cons

    lb = np.concatenate([np.maximum(0, np.ceil(mu - 4 * rt)) * np.ones(k), np.zeros(k)])
    ub = np.concatenate([np.floor(mu + 4 * rt) * np.ones(k), np.full(k, np.inf)])
    cost = np.concatenate([np.zeros(k), np.ones(k)])
    integ = np.concatenate([np.ones(k), np.zeros(k)])

    def solve(paths):
        A, b = _unit_path_constraints(template, n, paths)
        # random interior margins first, then the widest band the set allows
        for spread, slack in ((0.25, 0.5), (0.0, 0.75), (0.0, 1.0)):
            cc = base_cons(spread, slack)
            if len(A):
                cc.append(LinearConstraint(np.hstack([A, np.zeros_like(A)]), b, np.inf))
            res = milp(cost, constraints=cc, integrality=integ, bounds=Bounds(lb, ub))
            if res.status == 0 and res.x is not None:
                return Histogram(m, np.rint(res.x[:k]).astype(np.int64))
        return None

    h = solve(None)
    if h is None and template.base:
        h = solve(_core_paths(template))
        if h is not None:
            log.warning("n=%d: branches for winners above %d lack source votes; "
                        "roots cover the other branches only", n, template.base)
    if h is None:
        raise TemplateError(f"no {pred.kind} root with enough source votes exists at n={n}")
    return h
