"""Parser for the input language and for solver model responses.

The surface language has four declaration blocks (sorts, objects,
constants, variables) followed by clauses.  Statements end with ``.``,
comments run from ``%`` to end of line.  ``A <- B`` normalizes to
``B -> A``; ``not`` binds tighter than ``&``, which binds tighter than
``|``, which binds tighter than the clause arrow.

The solver-model reader lives here too since it shares the s-expression
lexer used for diagnostics.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Union

from .model import (
    And,
    ArithTerm,
    Atom,
    BOOLEAN,
    Bottom,
    BOTTOM,
    ConstantDecl,
    DUMMY_SPAN,
    EnumSort,
    FnEq,
    FnTerm,
    Formula,
    Iff,
    Implies,
    IntRange,
    NumTerm,
    ObjTerm,
    ObjectDecl,
    Or,
    PolyCmp,
    Program,
    Rule,
    ShowDecl,
    SortDecl,
    SourceSpan,
    SpatialKind,
    SPATIAL_SORT_NAMES,
    Term,
    Top,
    TOP,
    VarTerm,
    VariableDecl,
    builtin_spatial_sort,
    conj,
    format_fraction,
    is_neg,
    neg,
)


class ParseError(Exception):
    def __init__(self, message: str, span: SourceSpan, expected: tuple[str, ...] = ()):
        detail = f" (expected {', '.join(expected)})" if expected else ""
        super().__init__(f"{message} at line {span.line}, column {span.column}{detail}")
        self.message = message
        self.span = span
        self.expected = expected


# ---------------------------------------------------------------------------
# Lexer

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<comment>%[^\n]*)
  | (?P<number>\d+(?:\.\d+)?)
  | (?P<name>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op><->|<-|->|<=|>=|!=|\.\.|::|[-+*(){},.|&<>=])
    """,
    re.VERBOSE,
)

KEYWORDS = frozenset({"sorts", "objects", "constants", "variables", "not", "show", "boolean"})


@dataclass(frozen=True)
class Token:
    kind: str  # number | name | keyword | op | eof
    text: str
    span: SourceSpan


def tokenize(text: str) -> list[Token]:
    tokens: list[Token] = []
    pos = 0
    line = 1
    line_start = 0
    n = len(text)
    while pos < n:
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            span = SourceSpan(pos, pos + 1, line, pos - line_start + 1)
            raise ParseError(f"unexpected character {text[pos]!r}", span)
        kind = m.lastgroup or ""
        value = m.group()
        if kind in ("ws", "comment"):
            line += value.count("\n")
            if "\n" in value:
                line_start = m.start() + value.rindex("\n") + 1
            pos = m.end()
            continue
        span = SourceSpan(m.start(), m.end(), line, m.start() - line_start + 1)
        if kind == "name" and value in KEYWORDS:
            kind = "keyword"
        tokens.append(Token(kind, value, span))
        pos = m.end()
    tokens.append(Token("eof", "", SourceSpan(n, n, line, n - line_start + 1)))
    return tokens


# ---------------------------------------------------------------------------
# Program parser


class _ProgramParser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = tokenize(text)
        self.pos = 0
        self.sorts: list[SortDecl] = []
        self.objects: list[ObjectDecl] = []
        self.constants: list[ConstantDecl] = []
        self.variables: list[VariableDecl] = []
        self.rules: list[Rule] = []
        self.shows: list[ShowDecl] = []

    # -- token plumbing -----------------------------------------------------

    def peek(self) -> Token:
        return self.tokens[self.pos]

    def next(self) -> Token:
        tok = self.tokens[self.pos]
        if tok.kind != "eof":
            self.pos += 1
        return tok

    def at(self, text: str) -> bool:
        return self.peek().text == text and self.peek().kind in ("op", "keyword")

    def accept(self, text: str) -> Optional[Token]:
        if self.at(text):
            return self.next()
        return None

    def expect(self, text: str) -> Token:
        tok = self.peek()
        if not self.at(text):
            raise ParseError(f"unexpected {describe(tok)}", tok.span, (repr(text),))
        return self.next()

    def expect_name(self, what: str = "identifier") -> Token:
        tok = self.peek()
        if tok.kind != "name":
            raise ParseError(f"unexpected {describe(tok)}", tok.span, (what,))
        return self.next()

    # -- declarations ---------------------------------------------------------

    def parse(self) -> Program:
        section = None
        while self.peek().kind != "eof":
            tok = self.peek()
            if tok.kind == "keyword" and tok.text in ("sorts", "objects", "constants", "variables"):
                section = tok.text
                self.next()
                continue
            if tok.kind == "keyword" and tok.text == "show":
                self.parse_show()
                continue
            if section is not None and not self._looks_like_declaration(section):
                section = None
            if section == "sorts":
                self.parse_sort_decl()
            elif section == "objects":
                self.parse_object_decl()
            elif section == "constants":
                self.parse_constant_decl()
            elif section == "variables":
                self.parse_variable_decl()
            else:
                self.parse_clause()
        return Program(
            tuple(self.sorts),
            tuple(self.objects),
            tuple(self.constants),
            tuple(self.variables),
            tuple(self.rules),
            tuple(self.shows),
        )

    def _looks_like_declaration(self, section: str) -> bool:
        """Lookahead: does the next statement fit the section's declaration shape?

        Clauses may follow a declaration block without a separator; a bare
        ``name.`` inside a sorts block always reads as a sort declaration.
        """
        i = self.pos
        toks = self.tokens

        def is_name(k: int) -> bool:
            return toks[k].kind == "name"

        if not is_name(i):
            return False
        if section == "sorts":
            return toks[i + 1].text in ("=", ".")
        if section in ("objects", "variables"):
            k = i + 1
            while toks[k].text == "," and is_name(k + 1):
                k += 2
            return toks[k].text == "::"
        # constants: name with optional balanced argument list, then ::
        k = i + 1
        if toks[k].text == "(":
            depth = 1
            k += 1
            while depth and toks[k].kind != "eof":
                if toks[k].text == "(":
                    depth += 1
                elif toks[k].text == ")":
                    depth -= 1
                k += 1
        return toks[k].text == "::"

    def parse_sort_decl(self) -> None:
        name = self.expect_name("sort name")
        if self.accept("="):
            lo = self.parse_signed_int()
            self.expect("..")
            hi = self.parse_signed_int()
            kind: Union[IntRange, EnumSort] = IntRange(lo, hi)
        else:
            kind = EnumSort()
        self.expect(".")
        self.sorts.append(SortDecl(name.text, kind, name.span))

    def parse_signed_int(self) -> int:
        sign = -1 if self.accept("-") else 1
        tok = self.peek()
        if tok.kind != "number" or "." in tok.text:
            raise ParseError(f"unexpected {describe(tok)}", tok.span, ("integer",))
        self.next()
        return sign * int(tok.text)

    def parse_sort_ref(self) -> SortDecl:
        tok = self.peek()
        if tok.kind == "number" or self.at("-"):
            lo = self.parse_signed_int()
            self.expect("..")
            hi = self.parse_signed_int()
            return SortDecl(f"{lo}..{hi}", IntRange(lo, hi), tok.span)
        name = self.expect_name("sort name")
        if name.text == "polygon":
            self.expect("(")
            arity = self.parse_signed_int()
            self.expect(")")
            return builtin_spatial_sort("polygon", arity)
        if name.text in SPATIAL_SORT_NAMES:
            return builtin_spatial_sort(name.text)
        for s in self.sorts:
            if s.name == name.text:
                return s
        # unresolved: keep the name so validation can report it
        return SortDecl(name.text, EnumSort(), name.span)

    def parse_object_decl(self) -> None:
        names = [self.expect_name("object name")]
        while self.accept(","):
            names.append(self.expect_name("object name"))
        self.expect("::")
        sort = self.parse_sort_ref()
        self.expect(".")
        for n in names:
            self.objects.append(ObjectDecl(n.text, sort, n.span))

    def parse_constant_decl(self) -> None:
        name = self.expect_name("constant name")
        args: list[SortDecl] = []
        if self.accept("("):
            args.append(self.parse_sort_ref())
            while self.accept(","):
                args.append(self.parse_sort_ref())
            self.expect(")")
        self.expect("::")
        if self.accept("boolean"):
            result: Union[SortDecl, str] = BOOLEAN
        else:
            result = self.parse_sort_ref()
        self.expect(".")
        self.constants.append(ConstantDecl(name.text, tuple(args), result, True, name.span))

    def parse_variable_decl(self) -> None:
        names = [self.expect_name("variable name")]
        while self.accept(","):
            names.append(self.expect_name("variable name"))
        self.expect("::")
        sort = self.parse_sort_ref()
        self.expect(".")
        for n in names:
            if not n.text[0].isupper():
                raise ParseError(f"variable {n.text!r} must start with an uppercase letter", n.span)
            self.variables.append(VariableDecl(n.text, sort, n.span))

    def parse_show(self) -> None:
        start = self.expect("show")
        f = self.parse_atomic()
        if not isinstance(f, Atom):
            raise ParseError("show expects a relation atom", start.span)
        self.expect(".")
        self.shows.append(ShowDecl(f, start.span))

    # -- clauses --------------------------------------------------------------

    def parse_clause(self) -> None:
        start = self.peek()
        if self.accept("{"):
            head = self.parse_atomic()
            self.expect("}")
            body: Formula = TOP
            if self.accept("<-"):
                body = self.parse_formula()
            self.expect(".")
            self.rules.append(Rule(head, body, choice=True, span=start.span))
            return
        if self.accept("<-"):
            body = self.parse_formula()
            self.expect(".")
            self.rules.append(Rule(BOTTOM, body, span=start.span))
            return
        first = self.parse_formula()
        if self.accept("<-"):
            body = self.parse_formula()
            self.expect(".")
            self.add_rules(first, body, start.span)
            return
        if self.accept("->"):
            head = self.parse_formula()
            self.expect(".")
            self.add_rules(head, first, start.span)
            return
        self.expect(".")
        self.add_rules(first, TOP, start.span)

    def add_rules(self, head: Formula, body: Formula, span: SourceSpan) -> None:
        """Split conjunctive heads into one rule per atomic conjunct."""
        parts = list(head.children) if isinstance(head, And) else [head]
        for p in parts:
            if isinstance(p, Bottom):
                self.rules.append(Rule(BOTTOM, body, span=span))
            elif isinstance(p, (Atom, FnEq, PolyCmp)):
                self.rules.append(Rule(p, body, span=span))
            else:
                raise ParseError(
                    f"rule head must be a conjunction of atoms or equalities, got {kindname(p)}",
                    span,
                )

    # -- formulas -------------------------------------------------------------

    def parse_formula(self) -> Formula:
        parts = [self.parse_conjunction()]
        while self.accept("|"):
            parts.append(self.parse_conjunction())
        return parts[0] if len(parts) == 1 else Or(tuple(parts))

    def parse_conjunction(self) -> Formula:
        parts = [self.parse_unary()]
        while self.accept("&"):
            parts.append(self.parse_unary())
        return parts[0] if len(parts) == 1 else And(tuple(parts))

    def parse_unary(self) -> Formula:
        if self.accept("not"):
            return neg(self.parse_unary())
        if self.accept("("):
            f = self.parse_formula()
            self.expect(")")
            return f
        return self.parse_atomic()

    def parse_atomic(self) -> Formula:
        tok = self.peek()
        lhs = self.parse_expr()
        op = None
        for candidate in ("<=", ">=", "!=", "<", ">", "="):
            if self.at(candidate):
                op = self.next().text
                break
        if op is None:
            if isinstance(lhs, FnTerm):
                return Atom(lhs.name, lhs.args)
            if isinstance(lhs, (ObjTerm, VarTerm)):
                return Atom(str(lhs), ())
            raise ParseError(f"expected an atom or comparison, got term {lhs}", tok.span)
        rhs = self.parse_expr()
        return self.classify_equality(op, lhs, rhs, tok.span)

    def classify_equality(self, op: str, lhs: Term, rhs: Term, span: SourceSpan) -> Formula:
        def as_user_fn(t: Term) -> Optional[FnTerm]:
            if isinstance(t, FnTerm) and any(c.name == t.name for c in self.constants):
                return t
            if isinstance(t, ObjTerm) and any(c.name == t.name and c.arity == 0 for c in self.constants):
                return FnTerm(t.name, ())
            return None

        f_lhs, f_rhs = as_user_fn(lhs), as_user_fn(rhs)
        if op == "=":
            if f_lhs is not None:
                return FnEq(f_lhs, rhs)
            if f_rhs is not None:
                return FnEq(f_rhs, lhs)
        if op == "!=" and (f_lhs is not None or f_rhs is not None):
            # default-negated equality; != stays primitive only over polynomials
            if f_lhs is not None:
                return neg(FnEq(f_lhs, rhs))
            return neg(FnEq(f_rhs, lhs))  # type: ignore[arg-type]
        return PolyCmp(op, lhs, rhs)

    # -- terms ----------------------------------------------------------------

    def parse_expr(self) -> Term:
        t = self.parse_mul()
        while True:
            if self.accept("+"):
                t = ArithTerm("+", t, self.parse_mul())
            elif self.accept("-"):
                t = ArithTerm("-", t, self.parse_mul())
            else:
                return t

    def parse_mul(self) -> Term:
        t = self.parse_factor()
        while self.accept("*"):
            t = ArithTerm("*", t, self.parse_factor())
        return t

    def parse_factor(self) -> Term:
        if self.accept("-"):
            inner = self.parse_factor()
            if isinstance(inner, NumTerm):
                return NumTerm(-inner.value)
            return ArithTerm("-", NumTerm(Fraction(0)), inner)
        tok = self.peek()
        if tok.kind == "number":
            self.next()
            return NumTerm(Fraction(tok.text))
        if self.accept("("):
            t = self.parse_expr()
            self.expect(")")
            return t
        if tok.kind == "name":
            self.next()
            if self.accept("("):
                args = [self.parse_expr()]
                while self.accept(","):
                    args.append(self.parse_expr())
                self.expect(")")
                return FnTerm(tok.text, tuple(args))
            if tok.text[0].isupper():
                return VarTerm(tok.text)
            if any(c.name == tok.text for c in self.constants):
                return FnTerm(tok.text, ())
            return ObjTerm(tok.text)
        raise ParseError(f"unexpected {describe(tok)}", tok.span, ("term",))


def describe(tok: Token) -> str:
    return "end of input" if tok.kind == "eof" else f"{tok.kind} {tok.text!r}"


def kindname(f: Formula) -> str:
    return type(f).__name__


def parse_program(text: str) -> Program:
    """Parse source text into a Program; raises ParseError on the first error."""
    return _ProgramParser(text).parse()


def parse_formula_text(text: str, program: Program) -> Formula:
    """Parse a stand-alone formula (e.g. an entailment query) against a program.

    The program's declarations drive equality classification exactly as in
    rule bodies.
    """
    p = _ProgramParser("")
    p.text = text
    p.tokens = tokenize(text)
    p.pos = 0
    p.constants = list(program.constants)
    f = p.parse_formula()
    tok = p.peek()
    if tok.kind != "eof":
        raise ParseError(f"unexpected {describe(tok)} after formula", tok.span)
    return f


# ---------------------------------------------------------------------------
# Pretty-printer (inverse of parse_program up to layout)


def pretty_term(t: Term) -> str:
    if isinstance(t, ArithTerm):
        left, right = pretty_term(t.left), pretty_term(t.right)
        if t.op == "*":
            if isinstance(t.left, ArithTerm) and t.left.op in "+-":
                left = f"({left})"
            if isinstance(t.right, ArithTerm):
                right = f"({right})"
            return f"{left} * {right}"
        if isinstance(t.right, ArithTerm) and (t.op == "-" or t.right.op in "+-"):
            right = f"({right})"
        return f"{left} {t.op} {right}"
    if isinstance(t, NumTerm):
        return _pretty_number(t.value)
    if isinstance(t, FnTerm) and t.args:
        return f"{t.name}({', '.join(pretty_term(a) for a in t.args)})"
    return str(t)


def _pretty_number(v: Fraction) -> str:
    sign = "-" if v < 0 else ""
    a = abs(v)
    if a.denominator == 1:
        return f"{sign}{a.numerator}"
    # decimals reparse exactly; only power-of-ten denominators are printable
    n, exp = a.denominator, 0
    while n % 10 == 0:
        n //= 10
        exp += 1
    if n != 1:
        raise ValueError(f"{v} has no exact decimal literal in the input syntax")
    digits = str(a.numerator).rjust(exp + 1, "0")
    return f"{sign}{digits[:-exp]}.{digits[-exp:]}"


def pretty_formula(f: Formula, parent: str = "") -> str:
    if isinstance(f, Top):
        return "0 = 0"
    if isinstance(f, Bottom):
        return "0 = 1"
    if isinstance(f, Atom):
        return str(f)
    if isinstance(f, FnEq):
        return f"{pretty_term(f.fn)} = {pretty_term(f.value)}"
    if isinstance(f, PolyCmp):
        return f"{pretty_term(f.lhs)} {f.op} {pretty_term(f.rhs)}"
    if is_neg(f):
        inner = f.antecedent  # type: ignore[union-attr]
        text = f"not {pretty_formula(inner, 'not')}"
        return text
    if isinstance(f, And):
        text = " & ".join(pretty_formula(c, "&") for c in f.children)
        return f"({text})" if parent in ("not",) else text
    if isinstance(f, Or):
        text = " | ".join(pretty_formula(c, "|") for c in f.children)
        return f"({text})" if parent in ("not", "&") else text
    if isinstance(f, Implies):
        return f"({pretty_formula(f.antecedent)} -> {pretty_formula(f.consequent)})"
    if isinstance(f, Iff):
        return f"({pretty_formula(f.lhs)} <-> {pretty_formula(f.rhs)})"
    raise ValueError(f"cannot print {type(f).__name__}")


def pretty_sort(s: SortDecl) -> str:
    if isinstance(s.kind, SpatialKind):
        return s.kind.display()
    if isinstance(s.kind, IntRange):
        return s.kind.display() if "." in s.name else s.name
    return s.name


def pretty_rule(r: Rule) -> str:
    head = pretty_formula(r.head) if not isinstance(r.head, Bottom) else ""
    if r.choice:
        head = "{" + head + "}"
    if isinstance(r.body, Top) and head:
        return f"{head}."
    body = pretty_formula(r.body)
    return f"{head} <- {body}." if head else f"<- {body}."


def pretty_program(p: Program) -> str:
    lines: list[str] = []
    named_sorts = [s for s in p.sorts]
    if named_sorts:
        lines.append("sorts")
        for s in named_sorts:
            if isinstance(s.kind, IntRange):
                lines.append(f"  {s.name} = {s.kind.lo}..{s.kind.hi}.")
            else:
                lines.append(f"  {s.name}.")
    if p.objects:
        lines.append("objects")
        for o in p.objects:
            lines.append(f"  {o.name} :: {pretty_sort(o.sort)}.")
    if p.constants:
        lines.append("constants")
        for c in p.constants:
            args = f"({', '.join(pretty_sort(s) for s in c.arg_sorts)})" if c.arg_sorts else ""
            result = "boolean" if c.result == BOOLEAN else pretty_sort(c.result)  # type: ignore[arg-type]
            lines.append(f"  {c.name}{args} :: {result}.")
    if p.variables:
        lines.append("variables")
        for v in p.variables:
            lines.append(f"  {v.name} :: {pretty_sort(v.sort)}.")
    if lines:
        lines.append("")
    for r in p.rules:
        lines.append(pretty_rule(r))
    for s in p.shows:
        lines.append(f"show {s.atom}.")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# S-expressions and solver models


SExpr = Union[str, list]


def parse_sexprs(text: str) -> list[SExpr]:
    """Parse a sequence of s-expressions; atoms stay strings."""
    tokens = re.findall(r"\(|\)|\"(?:[^\"\\]|\\.)*\"|[^\s()]+", text)
    pos = 0

    def parse_one() -> SExpr:
        nonlocal pos
        if pos >= len(tokens):
            raise ParseError("unexpected end of s-expression", SourceSpan(len(text), len(text), 1, 1))
        tok = tokens[pos]
        pos += 1
        if tok == "(":
            items: list[SExpr] = []
            while pos < len(tokens) and tokens[pos] != ")":
                items.append(parse_one())
            if pos >= len(tokens):
                raise ParseError("unbalanced parenthesis in solver output", SourceSpan(0, len(text), 1, 1))
            pos += 1
            return items
        if tok == ")":
            raise ParseError("unbalanced parenthesis in solver output", SourceSpan(0, len(text), 1, 1))
        return tok

    out: list[SExpr] = []
    while pos < len(tokens):
        out.append(parse_one())
    return out


def sexpr_to_text(e: SExpr) -> str:
    if isinstance(e, str):
        return e
    return "(" + " ".join(sexpr_to_text(c) for c in e) + ")"


@dataclass(frozen=True)
class ModelBinding:
    """One (define-fun) entry of a solver model."""

    name: str
    sort: str  # Bool | Int | Real
    value: Union[bool, Fraction, float]
    exact: bool
    raw: str

    def numeric(self) -> Fraction | float:
        assert not isinstance(self.value, bool)
        return self.value


def _decimal_fraction(text: str) -> Fraction:
    return Fraction(text.rstrip("?"))


def _approx_root_obj(poly: SExpr, index: int) -> float:
    """Numeric value of the index-th (1-based, ascending) real root."""
    import sympy

    x = sympy.Symbol("x")

    def conv(e: SExpr):
        if isinstance(e, str):
            if e == "x":
                return x
            return sympy.Rational(str(_decimal_fraction(e)))
        head = e[0]
        args = [conv(a) for a in e[1:]]
        if head == "+":
            return sum(args)
        if head == "-":
            return -args[0] if len(args) == 1 else args[0] - sum(args[1:])
        if head == "*":
            out = args[0]
            for a in args[1:]:
                out *= a
            return out
        if head == "^":
            return args[0] ** args[1]
        if head == "/":
            return args[0] / args[1]
        raise ParseError(f"unsupported operator {head!r} in algebraic number", DUMMY_SPAN)

    roots = sympy.Poly(conv(poly), x).real_roots()
    distinct = []
    for r in roots:
        if not distinct or r != distinct[-1]:
            distinct.append(r)
    if not 1 <= index <= len(distinct):
        raise ParseError(f"algebraic root index {index} out of range", DUMMY_SPAN)
    return float(distinct[index - 1].evalf(30))


def _parse_value(e: SExpr) -> tuple[Union[bool, Fraction, float], bool]:
    """Returns (value, exact)."""
    if isinstance(e, str):
        if e == "true":
            return True, True
        if e == "false":
            return False, True
        return _decimal_fraction(e), True
    head = e[0]
    if head == "-" and len(e) == 2:
        v, exact = _parse_value(e[1])
        assert not isinstance(v, bool)
        return -v, exact
    if head == "/" and len(e) == 3:
        a, ea = _parse_value(e[1])
        b, eb = _parse_value(e[2])
        assert not isinstance(a, bool) and not isinstance(b, bool)
        if ea and eb and isinstance(a, Fraction) and isinstance(b, Fraction):
            return a / b, True
        return float(a) / float(b), False
    if head == "root-obj" and len(e) == 3:
        return _approx_root_obj(e[1], int(str(e[2]))), False
    raise ParseError(f"cannot interpret model value {sexpr_to_text(e)}", DUMMY_SPAN)


def parse_solver_model(text: str) -> list[ModelBinding]:
    """Decode a solver's get-model response into symbol bindings.

    Accepts a bare list of define-funs, a (model ...) wrapper, or the whole
    stdout including the sat line; (error ...) forms are skipped.
    """
    stripped = "\n".join(
        line for line in text.splitlines() if line.strip() not in ("sat", "unsat", "unknown")
    )
    forms = parse_sexprs(stripped)
    defines: list[SExpr] = []

    def collect(form: SExpr) -> None:
        if not isinstance(form, list) or not form:
            return
        if form[0] == "define-fun":
            defines.append(form)
        elif form[0] in ("model", "error"):
            if form[0] == "model":
                for sub in form[1:]:
                    collect(sub)
        else:
            for sub in form:
                collect(sub)

    for form in forms:
        collect(form)

    out: list[ModelBinding] = []
    for d in defines:
        if len(d) != 5 or d[2] != []:
            continue  # skip non-constant definitions
        name, sort, body = str(d[1]), str(d[3]), d[4]
        value, exact = _parse_value(body)
        out.append(ModelBinding(name, sort, value, exact, sexpr_to_text(body)))
    return out
