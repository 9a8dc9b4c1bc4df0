"""Lexer, parser, pretty printer and line blanking for the mini-Pascal subset.

The language covers exactly what the fixture corpus needs: one PROGRAM with
scalar VAR declarations (integer/real/boolean) and a statement body built
from assignment, READLN, WRITELN, REPEAT/UNTIL, WHILE/DO, FOR/TO, IF/THEN
[/ELSE] and BEGIN/END blocks. Keywords and identifiers are case-insensitive;
identifiers keep their spelling. Comments `{...}` and `(*...*)` are kept as
tokens and collected per program.
"""

from __future__ import annotations

import copy
from dataclasses import dataclass, field

from .errors import AnalysisError, LexError, ParseError

KEYWORDS = frozenset({
    "PROGRAM", "VAR", "BEGIN", "END", "REPEAT", "UNTIL", "WHILE", "DO",
    "FOR", "TO", "IF", "THEN", "ELSE", "READLN", "WRITELN",
    "INTEGER", "REAL", "BOOLEAN", "NOT", "AND", "OR", "DIV", "MOD",
    "TRUE", "FALSE",
})

KW = "keyword"
IDENT = "identifier"
INT = "integer-literal"
REALLIT = "real-literal"
OP = "operator"
PUNCT = "punctuation"
COMMENT = "comment"

_TWO_CHAR_OPS = (":=", "<>", "<=", ">=")
_ONE_CHAR_OPS = "+-*/=<>"
_PUNCT = "(),;:."


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    line: int
    start: int
    end: int


def tokenize(source: str) -> list[Token]:
    """Turn source text into tokens; comments become COMMENT tokens with the
    interior text stripped of surrounding whitespace."""
    tokens = []
    i, line = 0, 1
    n = len(source)
    while i < n:
        c = source[i]
        if c == "\n":
            line += 1
            i += 1
            continue
        if c.isspace():
            i += 1
            continue
        if c == "{" or source.startswith("(*", i):
            closer = "}" if c == "{" else "*)"
            start, start_line = i, line
            j = source.find(closer, i + (1 if c == "{" else 2))
            if j < 0:
                raise LexError("unterminated comment", start_line)
            body = source[i + (1 if c == "{" else 2):j]
            line += body.count("\n")
            i = j + len(closer)
            tokens.append(Token(COMMENT, body.strip(), start_line, start, i))
            continue
        if c.isalpha() or c == "_":
            j = i
            while j < n and (source[j].isalnum() or source[j] == "_"):
                j += 1
            text = source[i:j]
            kind = KW if text.upper() in KEYWORDS else IDENT
            tokens.append(Token(kind, text, line, i, j))
            i = j
            continue
        if c.isdigit():
            j = i
            while j < n and source[j].isdigit():
                j += 1
            if j < n - 1 and source[j] == "." and source[j + 1].isdigit():
                j += 1
                while j < n and source[j].isdigit():
                    j += 1
                tokens.append(Token(REALLIT, source[i:j], line, i, j))
            else:
                tokens.append(Token(INT, source[i:j], line, i, j))
            i = j
            continue
        two = source[i:i + 2]
        if two in _TWO_CHAR_OPS:
            tokens.append(Token(OP, two, line, i, i + 2))
            i += 2
            continue
        if c in _ONE_CHAR_OPS:
            tokens.append(Token(OP, c, line, i, i + 1))
            i += 1
            continue
        if c in _PUNCT:
            tokens.append(Token(PUNCT, c, line, i, i + 1))
            i += 1
            continue
        raise LexError(f"illegal character {c!r}", line)
    return tokens


# --- AST ---------------------------------------------------------------

@dataclass
class IntLit:
    value: int
    line: int


@dataclass
class RealLit:
    value: float
    line: int


@dataclass
class BoolLit:
    value: bool
    line: int


@dataclass
class VarRef:
    name: str
    line: int


@dataclass
class Unary:
    op: str
    operand: object
    line: int


@dataclass
class Binary:
    op: str
    left: object
    right: object
    line: int


@dataclass
class Assign:
    target: str
    expr: object
    line: int


@dataclass
class Readln:
    var: str
    line: int


@dataclass
class Writeln:
    expr: object
    line: int


@dataclass
class Repeat:
    body: list
    cond: object
    line: int
    until_line: int


@dataclass
class While:
    cond: object
    body: object
    line: int


@dataclass
class For:
    var: str
    start: object
    stop: object
    body: object
    line: int


@dataclass
class If:
    cond: object
    then: object
    otherwise: object
    line: int


@dataclass
class Compound:
    body: list
    line: int


@dataclass
class Hole:
    """Placeholder left by blank_line; never produced by parse()."""
    line: int


@dataclass
class Decl:
    name: str
    type: str  # integer | real | boolean
    line: int


@dataclass
class Program:
    name: str
    params: list[str]
    declarations: list[Decl]
    body: list
    comments: list[tuple[int, str]] = field(default_factory=list)


@dataclass
class BlankedProgram:
    original: str
    blank_line: int
    context: Program


SIMPLE_KINDS = (Assign, Readln, Writeln, Hole)
LOOP_KINDS = (Repeat, While, For)


# --- parser ------------------------------------------------------------

class _Parser:
    def __init__(self, tokens):
        self.tokens = [t for t in tokens if t.kind != COMMENT]
        self.pos = 0

    def peek(self):
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def _line(self):
        tok = self.peek()
        if tok is not None:
            return tok.line
        return self.tokens[-1].line if self.tokens else 1

    def fail(self, message, expected=()):
        raise ParseError(message, self._line(), expected)

    def advance(self):
        tok = self.peek()
        if tok is None:
            self.fail("unexpected end of input")
        self.pos += 1
        return tok

    def at_keyword(self, *words):
        tok = self.peek()
        return tok is not None and tok.kind == KW and tok.text.upper() in words

    def expect_keyword(self, word):
        if not self.at_keyword(word):
            self.fail(f"expected {word}", {word})
        return self.advance()

    def expect(self, kind, text=None):
        tok = self.peek()
        if tok is None or tok.kind != kind or (text is not None and tok.text != text):
            self.fail("unexpected token" if tok is None else f"unexpected {tok.text!r}",
                      {text or kind})
        return self.advance()

    def accept(self, kind, text=None):
        tok = self.peek()
        if tok is not None and tok.kind == kind and (text is None or tok.text == text):
            self.pos += 1
            return tok
        return None

    def program(self):
        self.expect_keyword("PROGRAM")
        name = self.expect(IDENT).text
        params = []
        if self.accept(PUNCT, "("):
            params.append(self.expect(IDENT).text)
            while self.accept(PUNCT, ","):
                params.append(self.expect(IDENT).text)
            self.expect(PUNCT, ")")
        self.expect(PUNCT, ";")
        decls = self.declarations()
        self.expect_keyword("BEGIN")
        body = self.statement_list({"END"})
        self.expect_keyword("END")
        self.expect(PUNCT, ".")
        if self.peek() is not None:
            self.fail("trailing input after final '.'")
        return Program(name, params, decls, body)

    def declarations(self):
        decls = []
        while self.at_keyword("VAR"):
            self.advance()
            while self.peek() is not None and self.peek().kind == IDENT:
                names = [self.advance()]
                while self.accept(PUNCT, ","):
                    names.append(self.expect(IDENT))
                self.expect(PUNCT, ":")
                if not self.at_keyword("INTEGER", "REAL", "BOOLEAN"):
                    self.fail("expected a type name", {"INTEGER", "REAL", "BOOLEAN"})
                ty = self.advance().text.lower()
                self.expect(PUNCT, ";")
                for tok in names:
                    decls.append(Decl(tok.text, ty, tok.line))
        return decls

    def statement_list(self, terminators):
        stmts = []
        while True:
            while self.accept(PUNCT, ";"):
                pass
            tok = self.peek()
            if tok is None:
                self.fail("unterminated statement list", terminators)
            if tok.kind == KW and tok.text.upper() in terminators:
                return stmts
            stmts.append(self.statement())
            tok = self.peek()
            if tok is not None and tok.kind == KW and tok.text.upper() in terminators:
                return stmts
            self.expect(PUNCT, ";")

    def statement(self):
        tok = self.peek()
        if tok is None:
            self.fail("expected a statement")
        if tok.kind == IDENT:
            name = self.advance()
            self.expect(OP, ":=")
            return Assign(name.text, self.expression(), name.line)
        if tok.kind != KW:
            self.fail(f"unexpected {tok.text!r}", {"statement"})
        word = tok.text.upper()
        if word == "READLN":
            self.advance()
            self.expect(PUNCT, "(")
            var = self.expect(IDENT)
            self.expect(PUNCT, ")")
            return Readln(var.text, tok.line)
        if word == "WRITELN":
            self.advance()
            self.expect(PUNCT, "(")
            expr = self.expression()
            self.expect(PUNCT, ")")
            return Writeln(expr, tok.line)
        if word == "REPEAT":
            self.advance()
            body = self.statement_list({"UNTIL"})
            until = self.expect_keyword("UNTIL")
            cond = self.expression()
            return Repeat(body, cond, tok.line, until.line)
        if word == "WHILE":
            self.advance()
            cond = self.expression()
            self.expect_keyword("DO")
            return While(cond, self.statement(), tok.line)
        if word == "FOR":
            self.advance()
            var = self.expect(IDENT)
            self.expect(OP, ":=")
            start = self.expression()
            self.expect_keyword("TO")
            stop = self.expression()
            self.expect_keyword("DO")
            return For(var.text, start, stop, self.statement(), tok.line)
        if word == "IF":
            self.advance()
            cond = self.expression()
            self.expect_keyword("THEN")
            then = self.statement()
            otherwise = None
            if self.at_keyword("ELSE"):
                self.advance()
                otherwise = self.statement()
            return If(cond, then, otherwise, tok.line)
        if word == "BEGIN":
            self.advance()
            body = self.statement_list({"END"})
            self.expect_keyword("END")
            return Compound(body, tok.line)
        self.fail(f"unexpected keyword {tok.text}", {"statement"})

    # expressions: relational < additive < multiplicative < unary
    def expression(self):
        left = self.simple_expression()
        tok = self.peek()
        while tok is not None and tok.kind == OP and tok.text in ("=", "<>", "<", "<=", ">", ">="):
            self.advance()
            right = self.simple_expression()
            left = Binary(tok.text, left, right, left.line)
            tok = self.peek()
        return left

    def simple_expression(self):
        left = self.term()
        while True:
            tok = self.peek()
            if tok is not None and tok.kind == OP and tok.text in ("+", "-"):
                op = self.advance().text
            elif self.at_keyword("OR"):
                op = self.advance().text.lower()
            else:
                return left
            left = Binary(op, left, self.term(), left.line)

    def term(self):
        left = self.factor()
        while True:
            tok = self.peek()
            if tok is not None and tok.kind == OP and tok.text in ("*", "/"):
                op = self.advance().text
            elif self.at_keyword("DIV", "MOD", "AND"):
                op = self.advance().text.lower()
            else:
                return left
            left = Binary(op, left, self.factor(), left.line)

    def factor(self):
        tok = self.peek()
        if tok is None:
            self.fail("expected an expression")
        if tok.kind == OP and tok.text == "-":
            self.advance()
            return Unary("-", self.factor(), tok.line)
        if self.at_keyword("NOT"):
            self.advance()
            return Unary("not", self.factor(), tok.line)
        if tok.kind == INT:
            self.advance()
            return IntLit(int(tok.text), tok.line)
        if tok.kind == REALLIT:
            self.advance()
            return RealLit(float(tok.text), tok.line)
        if self.at_keyword("TRUE", "FALSE"):
            self.advance()
            return BoolLit(tok.text.upper() == "TRUE", tok.line)
        if tok.kind == IDENT:
            self.advance()
            return VarRef(tok.text, tok.line)
        if tok.kind == PUNCT and tok.text == "(":
            self.advance()
            expr = self.expression()
            self.expect(PUNCT, ")")
            return expr
        self.fail(f"unexpected {tok.text!r}", {"expression"})


def parse(source: str) -> Program:
    """Parse source text and check declarations: every identifier used in the
    body must be declared exactly once."""
    tokens = tokenize(source)
    program = _Parser(tokens).program()
    program.comments = [(t.line, t.text) for t in tokens if t.kind == COMMENT]
    seen = {}
    for d in program.declarations:
        key = d.name.lower()
        if key in seen:
            raise ParseError(f"duplicate declaration of {d.name}", d.line)
        seen[key] = d
    for stmt in walk_statements(program.body):
        for name, line in _stmt_identifiers(stmt):
            if name.lower() not in seen:
                raise ParseError(f"undeclared identifier {name}", line)
    return program


def _stmt_identifiers(stmt):
    if isinstance(stmt, Assign):
        yield stmt.target, stmt.line
        yield from _expr_identifiers(stmt.expr)
    elif isinstance(stmt, Readln):
        yield stmt.var, stmt.line
    elif isinstance(stmt, Writeln):
        yield from _expr_identifiers(stmt.expr)
    elif isinstance(stmt, Repeat):
        yield from _expr_identifiers(stmt.cond)
    elif isinstance(stmt, While):
        yield from _expr_identifiers(stmt.cond)
    elif isinstance(stmt, For):
        yield stmt.var, stmt.line
        yield from _expr_identifiers(stmt.start)
        yield from _expr_identifiers(stmt.stop)
    elif isinstance(stmt, If):
        yield from _expr_identifiers(stmt.cond)


def _expr_identifiers(expr):
    if isinstance(expr, VarRef):
        yield expr.name, expr.line
    elif isinstance(expr, Unary):
        yield from _expr_identifiers(expr.operand)
    elif isinstance(expr, Binary):
        yield from _expr_identifiers(expr.left)
        yield from _expr_identifiers(expr.right)


def walk_statements(stmts):
    """Yield every statement, depth first, including structured ones."""
    for s in stmts:
        yield s
        if isinstance(s, Repeat):
            yield from walk_statements(s.body)
        elif isinstance(s, While):
            yield from walk_statements([s.body])
        elif isinstance(s, For):
            yield from walk_statements([s.body])
        elif isinstance(s, If):
            yield from walk_statements([s.then])
            if s.otherwise is not None:
                yield from walk_statements([s.otherwise])
        elif isinstance(s, Compound):
            yield from walk_statements(s.body)


def simple_statements(program: Program):
    return [s for s in walk_statements(program.body) if isinstance(s, SIMPLE_KINDS)]


def statement_at(program: Program, line: int):
    for s in walk_statements(program.body):
        if s.line == line:
            return s
    return None


def enclosing_loops(program: Program) -> dict[int, list]:
    """Map id(stmt) -> enclosing loop statements, innermost last."""
    out = {}

    def visit(stmts, stack):
        for s in stmts:
            out[id(s)] = list(stack)
            if isinstance(s, Repeat):
                visit(s.body, stack + [s])
            elif isinstance(s, (While, For)):
                visit([s.body], stack + [s])
            elif isinstance(s, If):
                visit([s.then], stack)
                if s.otherwise is not None:
                    visit([s.otherwise], stack)
            elif isinstance(s, Compound):
                visit(s.body, stack)

    visit(program.body, [])
    return out


# --- text rendering ----------------------------------------------------

def expr_text(expr) -> str:
    """Compact, case-preserving rendering used for cue payloads and display."""
    if isinstance(expr, IntLit):
        return str(expr.value)
    if isinstance(expr, RealLit):
        return repr(expr.value)
    if isinstance(expr, BoolLit):
        return "true" if expr.value else "false"
    if isinstance(expr, VarRef):
        return expr.name
    if isinstance(expr, Unary):
        inner = expr_text(expr.operand)
        if isinstance(expr.operand, Binary):
            inner = f"({inner})"
        return f"{expr.op}{inner}" if expr.op == "-" else f"not {inner}"
    if isinstance(expr, Binary):
        left = expr_text(expr.left)
        right = expr_text(expr.right)
        if isinstance(expr.left, Binary) and _prec(expr.left.op) < _prec(expr.op):
            left = f"({left})"
        if isinstance(expr.right, Binary) and _prec(expr.right.op) <= _prec(expr.op):
            right = f"({right})"
        pad = " " if expr.op in ("div", "mod", "and", "or") else ""
        return f"{left}{pad}{expr.op}{pad}{right}"
    raise TypeError(f"not an expression: {expr!r}")


def _prec(op):
    if op in ("=", "<>", "<", "<=", ">", ">="):
        return 1
    if op in ("+", "-", "or"):
        return 2
    return 3


def node_text(stmt) -> str:
    """One-line rendering of a simple statement (payload form, no spaces)."""
    if isinstance(stmt, Assign):
        return f"{stmt.target}:={expr_text(stmt.expr)}"
    if isinstance(stmt, Readln):
        return f"readln({stmt.var})"
    if isinstance(stmt, Writeln):
        return f"writeln({expr_text(stmt.expr)})"
    if isinstance(stmt, Hole):
        return "(blank)"
    raise TypeError(f"no single-line text for {type(stmt).__name__}")


# --- pretty printer ----------------------------------------------------

def _expr_pretty(expr) -> str:
    if isinstance(expr, Binary):
        left = _expr_pretty(expr.left)
        right = _expr_pretty(expr.right)
        if isinstance(expr.left, Binary) and _prec(expr.left.op) < _prec(expr.op):
            left = f"({left})"
        if isinstance(expr.right, Binary) and _prec(expr.right.op) <= _prec(expr.op):
            right = f"({right})"
        op = expr.op.upper() if expr.op in ("div", "mod", "and", "or") else expr.op
        return f"{left} {op} {right}"
    if isinstance(expr, Unary):
        inner = _expr_pretty(expr.operand)
        if isinstance(expr.operand, Binary):
            inner = f"({inner})"
        return f"-{inner}" if expr.op == "-" else f"NOT {inner}"
    if isinstance(expr, BoolLit):
        return "TRUE" if expr.value else "FALSE"
    return expr_text(expr)


def pretty_print(program: Program) -> str:
    """Render a program in the canonical layout; reparsing the result yields a
    structurally identical program (holes render as comments and are the one
    exception)."""
    head = f"PROGRAM {program.name}"
    if program.params:
        head += "(" + ", ".join(program.params) + ")"
    lines = [head + ";"]
    groups = []
    for d in program.declarations:
        if groups and groups[-1][1] == d.type:
            groups[-1][0].append(d.name)
        else:
            groups.append(([d.name], d.type))
    for i, (names, ty) in enumerate(groups):
        prefix = "VAR " if i == 0 else "    "
        lines.append(f"{prefix}{', '.join(names)}: {ty.upper()};")
    if not program.body:
        lines.append("BEGIN END.")
        return "\n".join(lines) + "\n"
    lines.append("BEGIN")
    for s in program.body:
        lines.extend(_stmt_lines(s, 4, ";"))
    lines.append("END.")
    return "\n".join(lines) + "\n"


def _stmt_lines(stmt, indent, terminator):
    pad = " " * indent
    if isinstance(stmt, Assign):
        return [f"{pad}{stmt.target} := {_expr_pretty(stmt.expr)}{terminator}"]
    if isinstance(stmt, Readln):
        return [f"{pad}READLN({stmt.var}){terminator}"]
    if isinstance(stmt, Writeln):
        return [f"{pad}WRITELN({_expr_pretty(stmt.expr)}){terminator}"]
    if isinstance(stmt, Hole):
        return [f"{pad}{{ blank }}"]
    if isinstance(stmt, Repeat):
        out = [f"{pad}REPEAT"]
        for s in stmt.body:
            out.extend(_stmt_lines(s, indent + 4, ";"))
        out.append(f"{pad}UNTIL {_expr_pretty(stmt.cond)}{terminator}")
        return out
    if isinstance(stmt, While):
        out = [f"{pad}WHILE {_expr_pretty(stmt.cond)} DO"]
        out.extend(_stmt_lines(stmt.body, indent + 4, terminator))
        return out
    if isinstance(stmt, For):
        out = [f"{pad}FOR {stmt.var} := {_expr_pretty(stmt.start)} TO {_expr_pretty(stmt.stop)} DO"]
        out.extend(_stmt_lines(stmt.body, indent + 4, terminator))
        return out
    if isinstance(stmt, If):
        out = [f"{pad}IF {_expr_pretty(stmt.cond)} THEN"]
        if stmt.otherwise is None:
            out.extend(_stmt_lines(stmt.then, indent + 4, terminator))
        else:
            out.extend(_stmt_lines(stmt.then, indent + 4, ""))
            out.append(f"{pad}ELSE")
            out.extend(_stmt_lines(stmt.otherwise, indent + 4, terminator))
        return out
    if isinstance(stmt, Compound):
        out = [f"{pad}BEGIN"]
        for s in stmt.body:
            out.extend(_stmt_lines(s, indent + 4, ";"))
        out.append(f"{pad}END{terminator}")
        return out
    raise TypeError(f"not a statement: {stmt!r}")


# --- structural equality ------------------------------------------------

def structurally_equal(a, b) -> bool:
    """Node-for-node equality ignoring line numbers and identifier case."""
    return _shape(a) == _shape(b)


def _shape(node):
    if isinstance(node, Program):
        return ("program", node.name.lower(), tuple(p.lower() for p in node.params),
                tuple((d.name.lower(), d.type) for d in node.declarations),
                tuple(_shape(s) for s in node.body))
    if isinstance(node, Assign):
        return ("assign", node.target.lower(), _shape(node.expr))
    if isinstance(node, Readln):
        return ("readln", node.var.lower())
    if isinstance(node, Writeln):
        return ("writeln", _shape(node.expr))
    if isinstance(node, Repeat):
        return ("repeat", tuple(_shape(s) for s in node.body), _shape(node.cond))
    if isinstance(node, While):
        return ("while", _shape(node.cond), _shape(node.body))
    if isinstance(node, For):
        return ("for", node.var.lower(), _shape(node.start), _shape(node.stop), _shape(node.body))
    if isinstance(node, If):
        return ("if", _shape(node.cond), _shape(node.then),
                None if node.otherwise is None else _shape(node.otherwise))
    if isinstance(node, Compound):
        return ("compound", tuple(_shape(s) for s in node.body))
    if isinstance(node, Hole):
        return ("hole",)
    if isinstance(node, VarRef):
        return ("var", node.name.lower())
    if isinstance(node, (IntLit, RealLit, BoolLit)):
        return ("lit", node.value)
    if isinstance(node, Unary):
        return ("unary", node.op, _shape(node.operand))
    if isinstance(node, Binary):
        return ("binary", node.op, _shape(node.left), _shape(node.right))
    raise TypeError(f"unexpected node {node!r}")


# --- blanking -----------------------------------------------------------

def blank_line(source: str, line: int) -> BlankedProgram:
    """Replace the simple statement on `line` with a hole; everything else is
    kept as parsed."""
    program = parse(source)
    last_line = max((t.line for t in tokenize(source)), default=0)
    if line < 1 or line > last_line:
        raise AnalysisError(f"line {line} out of range")
    target = statement_at(program, line)
    if target is None or not isinstance(target, (Assign, Readln, Writeln)):
        raise AnalysisError(f"line {line} is not a blankable statement")
    context = copy.deepcopy(program)
    _replace(context.body, line)
    return BlankedProgram(source, line, context)


def _replace(stmts, line):
    for i, s in enumerate(stmts):
        if s.line == line and isinstance(s, (Assign, Readln, Writeln)):
            stmts[i] = Hole(line)
            return True
        if isinstance(s, Repeat) and _replace(s.body, line):
            return True
        if isinstance(s, Compound) and _replace(s.body, line):
            return True
        if isinstance(s, (While, For)):
            wrapper = [s.body]
            if _replace(wrapper, line):
                s.body = wrapper[0]
                return True
        if isinstance(s, If):
            wrapper = [s.then]
            if _replace(wrapper, line):
                s.then = wrapper[0]
                return True
            if s.otherwise is not None:
                wrapper = [s.otherwise]
                if _replace(wrapper, line):
                    s.otherwise = wrapper[0]
                    return True
    return False
