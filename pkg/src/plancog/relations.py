"""Structural program relations: control-flow graph, prime-structure tree and
def-use chains.

The CFG keeps one node per simple statement plus one condition node per loop
or if statement (a repeat's condition node carries the UNTIL line). The prime
tree decomposes the structured statement language into sequence, iteration
and conditional nodes whose leaves partition the simple statements.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from . import frontend as fe
from .errors import AnalysisError

ENTRY = "entry"
EXIT = "exit"
STMT = "stmt"
COND = "cond"

SEQ = "seq"
TRUE = "true"
FALSE = "false"
LOOP_BACK = "loop-back"


@dataclass
class CfgNode:
    id: int
    kind: str            # entry | exit | stmt | cond
    line: int | None
    label: str
    stmt: object = None  # AST statement for stmt nodes, loop/if for cond nodes


@dataclass
class Cfg:
    nodes: list[CfgNode] = field(default_factory=list)
    edges: list[tuple[int, int, str]] = field(default_factory=list)
    entry: int = 0
    exit: int = 0
    program: fe.Program | None = None

    def succs(self, nid):
        return [(dst, lbl) for src, dst, lbl in self.edges if src == nid]

    def preds(self, nid):
        return [(src, lbl) for src, dst, lbl in self.edges if dst == nid]

    def node_at(self, line):
        for n in self.nodes:
            if n.line == line:
                return n
        return None


def build_cfg(program: fe.Program) -> Cfg:
    cfg = Cfg(program=program)
    entry = _add(cfg, ENTRY, None, "entry")
    cfg.entry = entry.id
    tails = _chain(cfg, program.body, [(entry.id, SEQ)])
    exit_node = _add(cfg, EXIT, None, "exit")
    cfg.exit = exit_node.id
    for src, lbl in tails:
        cfg.edges.append((src, exit_node.id, lbl))
    return cfg


def _add(cfg, kind, line, label, stmt=None):
    node = CfgNode(len(cfg.nodes), kind, line, label, stmt)
    cfg.nodes.append(node)
    return node


def _connect(cfg, pending, nid):
    for src, lbl in pending:
        cfg.edges.append((src, nid, lbl))


def _chain(cfg, stmts, pending):
    for s in stmts:
        pending = _statement(cfg, s, pending)
    return pending


def _statement(cfg, s, pending):
    if isinstance(s, fe.SIMPLE_KINDS):
        node = _add(cfg, STMT, s.line, fe.node_text(s), s)
        _connect(cfg, pending, node.id)
        return [(node.id, SEQ)]
    if isinstance(s, fe.Compound):
        return _chain(cfg, s.body, pending)
    if isinstance(s, fe.If):
        cond = _add(cfg, COND, s.line, f"if {fe.expr_text(s.cond)}", s)
        _connect(cfg, pending, cond.id)
        out = _statement(cfg, s.then, [(cond.id, TRUE)])
        if s.otherwise is None:
            out = out + [(cond.id, FALSE)]
        else:
            out = out + _statement(cfg, s.otherwise, [(cond.id, FALSE)])
        return out
    if isinstance(s, fe.While):
        cond = _add(cfg, COND, s.line, f"while {fe.expr_text(s.cond)}", s)
        _connect(cfg, pending, cond.id)
        body_out = _statement(cfg, s.body, [(cond.id, TRUE)])
        for src, _ in body_out:
            cfg.edges.append((src, cond.id, LOOP_BACK))
        return [(cond.id, FALSE)]
    if isinstance(s, fe.For):
        head = _add(cfg, COND, s.line, f"for {s.var}", s)
        _connect(cfg, pending, head.id)
        body_out = _statement(cfg, s.body, [(head.id, TRUE)])
        for src, _ in body_out:
            cfg.edges.append((src, head.id, LOOP_BACK))
        return [(head.id, FALSE)]
    if isinstance(s, fe.Repeat):
        cond = _add(cfg, COND, s.until_line, f"until {fe.expr_text(s.cond)}", s)
        body_in = list(pending)
        body_out = _chain(cfg, s.body, body_in)
        if s.body:
            first = _first_node_of(cfg, s.body)
            _connect(cfg, body_out, cond.id)
            cfg.edges.append((cond.id, first, LOOP_BACK))
        else:
            _connect(cfg, pending, cond.id)
            cfg.edges.append((cond.id, cond.id, LOOP_BACK))
        return [(cond.id, TRUE)]
    raise TypeError(f"unexpected statement {s!r}")


def _first_node_of(cfg, stmts):
    first_stmt = next(iter(fe.walk_statements(stmts)))
    while isinstance(first_stmt, fe.Compound):
        first_stmt = first_stmt.body[0]
    for n in cfg.nodes:
        if n.stmt is first_stmt:
            return n.id
    raise AnalysisError("loop body produced no node")


# --- prime structures ----------------------------------------------------

@dataclass
class PrimeNode:
    kind: str                 # sequence | iteration | conditional
    lines: list[int]          # own lines: leaf span, or header/condition lines
    children: list = field(default_factory=list)

    def is_leaf(self):
        return self.kind == "sequence" and not self.children

    def leaves(self):
        if self.is_leaf():
            yield self
        for c in self.children:
            yield from c.leaves()

    def walk(self):
        yield self
        for c in self.children:
            yield from c.walk()


def decompose_primes(cfg: Cfg) -> PrimeNode:
    if cfg.program is None:
        raise AnalysisError("cfg carries no program")
    return _sequence(cfg.program.body)


def _flatten(stmts):
    for s in stmts:
        if isinstance(s, fe.Compound):
            yield from _flatten(s.body)
        else:
            yield s


def _sequence(stmts):
    items = []
    run = []
    for s in _flatten(stmts):
        if isinstance(s, fe.SIMPLE_KINDS):
            run.append(s.line)
            continue
        if run:
            items.append(PrimeNode("sequence", run))
            run = []
        items.append(_structure(s))
    if run:
        items.append(PrimeNode("sequence", run))
    if len(items) == 1 and items[0].kind == "sequence":
        return items[0]
    return PrimeNode("sequence", [], items)


def _structure(s):
    if isinstance(s, fe.Repeat):
        return PrimeNode("iteration", [s.line, s.until_line], [_sequence(s.body)])
    if isinstance(s, (fe.While, fe.For)):
        return PrimeNode("iteration", [s.line], [_sequence([s.body])])
    if isinstance(s, fe.If):
        children = [_sequence([s.then])]
        if s.otherwise is not None:
            children.append(_sequence([s.otherwise]))
        return PrimeNode("conditional", [s.line], children)
    raise TypeError(f"unexpected statement {s!r}")


# --- def-use -------------------------------------------------------------

@dataclass
class DefUse:
    definitions: list[tuple[str, int]]
    uses: list[tuple[str, int]]
    chains: dict[tuple[str, int], set[int]]
    possibly_uninitialized: list[tuple[str, int]]

    def defs_of(self, var):
        var = var.lower()
        return sorted(line for v, line in self.definitions if v == var)

    def uses_of(self, var):
        var = var.lower()
        return sorted(line for v, line in self.uses if v == var)


def node_defs(node: CfgNode) -> list[str]:
    s = node.stmt
    if node.kind == STMT:
        if isinstance(s, fe.Assign):
            return [s.target.lower()]
        if isinstance(s, fe.Readln):
            return [s.var.lower()]
    if node.kind == COND and isinstance(s, fe.For):
        return [s.var.lower()]
    return []


def node_uses(node: CfgNode) -> list[str]:
    s = node.stmt
    if node.kind == STMT:
        if isinstance(s, fe.Assign):
            return sorted({n.lower() for n, _ in fe._expr_identifiers(s.expr)})
        if isinstance(s, fe.Writeln):
            return sorted({n.lower() for n, _ in fe._expr_identifiers(s.expr)})
        return []
    if node.kind == COND:
        if isinstance(s, fe.If):
            cond = s.cond
        elif isinstance(s, (fe.While, fe.Repeat)):
            cond = s.cond
        elif isinstance(s, fe.For):
            names = {n.lower() for n, _ in fe._expr_identifiers(s.start)}
            names |= {n.lower() for n, _ in fe._expr_identifiers(s.stop)}
            return sorted(names)
        else:
            return []
        return sorted({n.lower() for n, _ in fe._expr_identifiers(cond)})
    return []


def def_use(program: fe.Program, cfg: Cfg) -> DefUse:
    """Reaching-definitions over the CFG; a chain maps a definition to every
    use a def-clear path can reach."""
    defs = []
    uses = []
    for n in cfg.nodes:
        for v in node_defs(n):
            defs.append((v, n.line))
        for v in node_uses(n):
            uses.append((v, n.line))

    preds = {n.id: [] for n in cfg.nodes}
    for src, dst, _ in cfg.edges:
        preds[dst].append(src)

    # IN[n] = union of OUT[p]; OUT[n] = gen(n) | (IN[n] - kill(n)).
    # A synthetic entry definition (id None) per variable makes "possibly
    # uninitialized" mean: some path carries no real definition to the use.
    reach_in = {n.id: set() for n in cfg.nodes}
    reach_out = {n.id: set() for n in cfg.nodes}
    reach_out[cfg.entry] = {(d.name.lower(), None) for d in program.declarations}
    changed = True
    while changed:
        changed = False
        for n in cfg.nodes:
            new_in = set()
            for p in preds[n.id]:
                new_in |= reach_out[p]
            gen = {(v, n.id) for v in node_defs(n)}
            killed = set(node_defs(n))
            new_out = gen | {(v, d) for v, d in new_in if v not in killed}
            if n.id == cfg.entry:
                new_out |= reach_out[cfg.entry]
            if new_in != reach_in[n.id] or new_out != reach_out[n.id]:
                reach_in[n.id] = new_in
                reach_out[n.id] = new_out
                changed = True

    by_id = {n.id: n for n in cfg.nodes}
    chains = {}
    uninit = set()
    for n in cfg.nodes:
        for v in node_uses(n):
            reaching = [d for dv, d in reach_in[n.id] if dv == v]
            if None in reaching:
                uninit.add((v, n.line))
            for d in reaching:
                if d is None:
                    continue
                key = (v, by_id[d].line)
                chains.setdefault(key, set()).add(n.line)
    for key in defs:
        chains.setdefault(key, set())
    return DefUse(sorted(defs, key=lambda t: (t[1], t[0])),
                  sorted(uses, key=lambda t: (t[1], t[0])),
                  chains,
                  sorted(uninit, key=lambda t: (t[1], t[0])))


def query_relation(kind: str, program: fe.Program, line: int) -> set[int]:
    """Lines control- or data-related to the statement at `line`."""
    cfg = build_cfg(program)
    if kind == "control":
        node = cfg.node_at(line)
        if node is None:
            raise AnalysisError(f"no statement at line {line}")
        related = set()
        for nid, _ in cfg.succs(node.id) + cfg.preds(node.id):
            other = cfg.nodes[nid]
            if other.line is not None:
                related.add(other.line)
        related.discard(line)
        return related
    if kind == "data":
        du = def_use(program, cfg)
        if cfg.node_at(line) is None:
            raise AnalysisError(f"no statement at line {line}")
        related = set()
        for (v, def_line), use_lines in du.chains.items():
            if def_line == line:
                related |= use_lines
            if line in use_lines:
                related.add(def_line)
        related.discard(line)
        return related
    raise AnalysisError(f"unknown relation kind {kind!r}")
