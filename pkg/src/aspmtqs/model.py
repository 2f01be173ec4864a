"""Abstract syntax shared by every pipeline stage.

Declarations (sorts, objects, constants, variables), terms, formulas,
rules, and the intensional signature.  All types are immutable after
construction and safe to share between concurrent runs.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator, Optional, Union


# ---------------------------------------------------------------------------
# Source locations


@dataclass(frozen=True)
class SourceSpan:
    """Byte range of a construct in its source text."""

    start: int
    end: int
    line: int
    column: int

    def __post_init__(self) -> None:
        if self.start > self.end:
            raise ValueError(f"invalid span: start {self.start} > end {self.end}")


DUMMY_SPAN = SourceSpan(0, 0, 1, 1)


# ---------------------------------------------------------------------------
# Sorts


@dataclass(frozen=True)
class SpatialKind:
    """A built-in spatial object sort such as circle or polygon(4)."""

    name: str
    arity: int = 0  # vertex count for polygon(n), 0 otherwise

    def display(self) -> str:
        return f"{self.name}({self.arity})" if self.arity else self.name


@dataclass(frozen=True)
class IntRange:
    """A bounded integer sort lo..hi."""

    lo: int
    hi: int

    def __post_init__(self) -> None:
        if self.lo > self.hi:
            raise ValueError(f"empty integer range {self.lo}..{self.hi}")

    def values(self) -> range:
        return range(self.lo, self.hi + 1)

    def display(self) -> str:
        return f"{self.lo}..{self.hi}"


@dataclass(frozen=True)
class EnumSort:
    """An enumerated sort; its members are the objects declared with it."""

    def display(self) -> str:
        return "enum"


SortKind = Union[SpatialKind, IntRange, EnumSort]

BOOLEAN = "boolean"  # marker for predicate result "sort"

#: Built-in spatial sort names (polygon takes an arity and is handled apart).
SPATIAL_SORT_NAMES = frozenset(
    {"point", "segment", "circle", "triangle", "eggyolk", "interval", "rectangle"}
)


@dataclass(frozen=True)
class SortDecl:
    name: str
    kind: SortKind
    span: SourceSpan = DUMMY_SPAN

    @property
    def is_spatial(self) -> bool:
        return isinstance(self.kind, SpatialKind)

    @property
    def is_finite(self) -> bool:
        return not self.is_spatial


def builtin_spatial_sort(name: str, arity: int = 0) -> SortDecl:
    return SortDecl(name if not arity else f"{name}({arity})", SpatialKind(name, arity))


@dataclass(frozen=True)
class ObjectDecl:
    name: str
    sort: SortDecl
    span: SourceSpan = DUMMY_SPAN


@dataclass(frozen=True)
class ConstantDecl:
    """A user constant: predicate (boolean result) or function."""

    name: str
    arg_sorts: tuple[SortDecl, ...]
    result: Union[SortDecl, str]  # SortDecl or BOOLEAN
    intensional: bool = True
    span: SourceSpan = DUMMY_SPAN

    @property
    def is_predicate(self) -> bool:
        return self.result == BOOLEAN

    @property
    def arity(self) -> int:
        return len(self.arg_sorts)


@dataclass(frozen=True)
class VariableDecl:
    name: str
    sort: SortDecl
    span: SourceSpan = DUMMY_SPAN


# ---------------------------------------------------------------------------
# Terms


@dataclass(frozen=True)
class NumTerm:
    """Exact rational literal."""

    value: Fraction

    def __str__(self) -> str:
        return format_fraction(self.value)


@dataclass(frozen=True)
class ObjTerm:
    """Reference to a declared object (spatial or enum member)."""

    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class VarTerm:
    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class FnTerm:
    """Application of a user constant or a built-in parametric function."""

    name: str
    args: tuple["Term", ...]

    def __str__(self) -> str:
        if not self.args:
            return self.name
        return f"{self.name}({', '.join(map(str, self.args))})"


@dataclass(frozen=True)
class ArithTerm:
    op: str  # one of + - *
    left: "Term"
    right: "Term"

    def __str__(self) -> str:
        return f"({self.left} {self.op} {self.right})"


@dataclass(frozen=True)
class ValueHole:
    """Placeholder for the head value in Clark normal form for functions.

    Not a program variable: ground theories stay variable-free and this
    marker is resolved per domain value during completion.
    """

    def __str__(self) -> str:
        return "?v"


Term = Union[NumTerm, ObjTerm, VarTerm, FnTerm, ArithTerm, ValueHole]


def format_fraction(v: Fraction) -> str:
    if v.denominator == 1:
        return str(v.numerator)
    return f"{v.numerator}/{v.denominator}"


def num(value) -> NumTerm:
    return NumTerm(Fraction(value))


def term_variables(t: Term) -> Iterator[str]:
    if isinstance(t, VarTerm):
        yield t.name
    elif isinstance(t, FnTerm):
        for a in t.args:
            yield from term_variables(a)
    elif isinstance(t, ArithTerm):
        yield from term_variables(t.left)
        yield from term_variables(t.right)


def term_functions(t: Term) -> Iterator[FnTerm]:
    """All function applications in t, outermost first."""
    if isinstance(t, FnTerm):
        yield t
        for a in t.args:
            yield from term_functions(a)
    elif isinstance(t, ArithTerm):
        yield from term_functions(t.left)
        yield from term_functions(t.right)


# ---------------------------------------------------------------------------
# Formulas

CMP_OPS = ("<", "<=", "=", "!=", ">=", ">")


@dataclass(frozen=True)
class Atom:
    pred: str
    args: tuple[Term, ...]

    def __str__(self) -> str:
        if not self.args:
            return self.pred
        return f"{self.pred}({', '.join(map(str, self.args))})"


@dataclass(frozen=True)
class FnEq:
    """Equality f(t) = u for an uninterpreted (user) function f."""

    fn: FnTerm
    value: Term

    def __str__(self) -> str:
        return f"{self.fn} = {self.value}"


@dataclass(frozen=True)
class PolyCmp:
    """Comparison of two polynomial terms; != is primitive, not Not(=)."""

    op: str
    lhs: Term
    rhs: Term

    def __post_init__(self) -> None:
        if self.op not in CMP_OPS:
            raise ValueError(f"bad comparison operator {self.op!r}")

    def __str__(self) -> str:
        return f"{self.lhs} {self.op} {self.rhs}"


@dataclass(frozen=True)
class And:
    children: tuple["Formula", ...]

    def __post_init__(self) -> None:
        if len(self.children) < 2:
            raise ValueError("And needs at least two children")


@dataclass(frozen=True)
class Or:
    children: tuple["Formula", ...]

    def __post_init__(self) -> None:
        if len(self.children) < 2:
            raise ValueError("Or needs at least two children")


@dataclass(frozen=True)
class Implies:
    antecedent: "Formula"
    consequent: "Formula"


@dataclass(frozen=True)
class Iff:
    """Equivalence; produced by Clark completion only."""

    lhs: "Formula"
    rhs: "Formula"


@dataclass(frozen=True)
class Top:
    pass


@dataclass(frozen=True)
class Bottom:
    pass


Formula = Union[Atom, FnEq, PolyCmp, And, Or, Implies, Iff, Top, Bottom]

TOP = Top()
BOTTOM = Bottom()


def neg(f: Formula) -> Formula:
    """not F, stored as F -> Bottom."""
    return Implies(f, BOTTOM)


def is_neg(f: Formula) -> bool:
    return isinstance(f, Implies) and isinstance(f.consequent, Bottom)


def conj(parts: list[Formula]) -> Formula:
    parts = [p for p in parts if not isinstance(p, Top)]
    if any(isinstance(p, Bottom) for p in parts):
        return BOTTOM
    if not parts:
        return TOP
    if len(parts) == 1:
        return parts[0]
    return And(tuple(parts))


def disj(parts: list[Formula]) -> Formula:
    parts = [p for p in parts if not isinstance(p, Bottom)]
    if any(isinstance(p, Top) for p in parts):
        return TOP
    if not parts:
        return BOTTOM
    if len(parts) == 1:
        return parts[0]
    return Or(tuple(parts))


def subformulas(f: Formula) -> Iterator[Formula]:
    yield f
    if isinstance(f, (And, Or)):
        for c in f.children:
            yield from subformulas(c)
    elif isinstance(f, Implies):
        yield from subformulas(f.antecedent)
        yield from subformulas(f.consequent)
    elif isinstance(f, Iff):
        yield from subformulas(f.lhs)
        yield from subformulas(f.rhs)


def formula_atoms(f: Formula) -> Iterator[Union[Atom, FnEq, PolyCmp]]:
    for g in subformulas(f):
        if isinstance(g, (Atom, FnEq, PolyCmp)):
            yield g


def formula_terms(f: Formula) -> Iterator[Term]:
    for g in formula_atoms(f):
        if isinstance(g, Atom):
            yield from g.args
        elif isinstance(g, FnEq):
            yield g.fn
            yield g.value
        else:
            yield g.lhs
            yield g.rhs


def formula_variables(f: Formula) -> set[str]:
    out: set[str] = set()
    for t in formula_terms(f):
        out.update(term_variables(t))
    return out


def check_well_formed(f: Formula) -> None:
    """Structural validity walk: children counts must match node kinds.

    Raises ValueError on malformed trees; used as a debugging guard and in
    property tests.
    """
    if isinstance(f, (Top, Bottom)):
        return
    if isinstance(f, Atom):
        if not isinstance(f.args, tuple):
            raise ValueError("Atom args must be a tuple")
        return
    if isinstance(f, FnEq):
        if not isinstance(f.fn, FnTerm):
            raise ValueError("FnEq left side must be a function application")
        return
    if isinstance(f, PolyCmp):
        if f.op not in CMP_OPS:
            raise ValueError(f"bad PolyCmp op {f.op!r}")
        return
    if isinstance(f, (And, Or)):
        if len(f.children) < 2:
            raise ValueError("connective needs at least two children")
        for c in f.children:
            check_well_formed(c)
        return
    if isinstance(f, Implies):
        check_well_formed(f.antecedent)
        check_well_formed(f.consequent)
        return
    if isinstance(f, Iff):
        check_well_formed(f.lhs)
        check_well_formed(f.rhs)
        return
    raise ValueError(f"unknown formula node {type(f).__name__}")


# ---------------------------------------------------------------------------
# Rules and programs


@dataclass(frozen=True)
class Rule:
    """head <- body.  Heads are a single atom, equality, comparison or Bottom."""

    head: Formula
    body: Formula
    choice: bool = False
    span: SourceSpan = DUMMY_SPAN

    def __post_init__(self) -> None:
        if not isinstance(self.head, (Atom, FnEq, PolyCmp, Bottom)):
            raise ValueError(
                f"rule head must be atomic or Bottom, got {type(self.head).__name__}"
            )

    @property
    def is_constraint(self) -> bool:
        return isinstance(self.head, Bottom)

    @property
    def is_fact(self) -> bool:
        return isinstance(self.body, Top) and not self.choice


@dataclass(frozen=True)
class ShowDecl:
    """Tracks a ground built-in relation atom for model output."""

    atom: Atom
    span: SourceSpan = DUMMY_SPAN


@dataclass(frozen=True)
class IntensionalSignature:
    """The signature c of the stable-model operator."""

    predicates: frozenset[str]
    functions: frozenset[str]

    def __post_init__(self) -> None:
        common = self.predicates & self.functions
        if common:
            raise ValueError(f"signature not disjoint: {sorted(common)}")

    def __contains__(self, name: str) -> bool:
        return name in self.predicates or name in self.functions


@dataclass(frozen=True)
class Program:
    sorts: tuple[SortDecl, ...]
    objects: tuple[ObjectDecl, ...]
    constants: tuple[ConstantDecl, ...]
    variables: tuple[VariableDecl, ...]
    rules: tuple[Rule, ...]
    shows: tuple[ShowDecl, ...] = ()

    def sort(self, name: str) -> Optional[SortDecl]:
        for s in self.sorts:
            if s.name == name:
                return s
        return None

    def object(self, name: str) -> Optional[ObjectDecl]:
        for o in self.objects:
            if o.name == name:
                return o
        return None

    def constant(self, name: str) -> Optional[ConstantDecl]:
        for c in self.constants:
            if c.name == name:
                return c
        return None

    def variable(self, name: str) -> Optional[VariableDecl]:
        for v in self.variables:
            if v.name == name:
                return v
        return None

    def objects_of_sort(self, sort: SortDecl) -> list[ObjectDecl]:
        return [o for o in self.objects if o.sort == sort]

    def signature(self) -> IntensionalSignature:
        preds = frozenset(
            c.name for c in self.constants if c.intensional and c.is_predicate
        )
        fns = frozenset(
            c.name for c in self.constants if c.intensional and not c.is_predicate
        )
        return IntensionalSignature(preds, fns)


# ---------------------------------------------------------------------------
# Validation


@dataclass(frozen=True)
class ValidationIssue:
    kind: str  # undeclared-sort | undeclared-object | undeclared-constant |
    # arity-mismatch | duplicate-declaration | bad-declaration | bad-usage
    message: str
    span: SourceSpan = DUMMY_SPAN

    def __str__(self) -> str:
        return f"{self.kind}: {self.message} (line {self.span.line})"


@dataclass(frozen=True)
class ValidationReport:
    issues: tuple[ValidationIssue, ...]

    @property
    def ok(self) -> bool:
        return not self.issues

    def __str__(self) -> str:
        if self.ok:
            return "program is well-formed"
        return "\n".join(str(i) for i in self.issues)


class ProgramError(Exception):
    """A pipeline stage rejected the program."""

    def __init__(self, stage: str, message: str, span: SourceSpan = DUMMY_SPAN):
        super().__init__(f"[{stage}] {message}")
        self.stage = stage
        self.message = message
        self.span = span


def validate_program(program: Program, catalog=None) -> ValidationReport:
    """Collect every declaration and usage error; empty report iff well-formed.

    Pure function of its input: two calls yield identical reports.  The
    relation catalog is injected to avoid import cycles; when omitted the
    built-in catalog is used.
    """
    if catalog is None:
        from .spatial import CATALOG

        catalog = CATALOG
    issues: list[ValidationIssue] = []

    def issue(kind: str, message: str, span: SourceSpan = DUMMY_SPAN) -> None:
        issues.append(ValidationIssue(kind, message, span))

    # declaration-level checks
    seen: set[str] = set()
    for decl_list in (program.objects, program.constants):
        for d in decl_list:
            if d.name.startswith(("pair_", "triple_", "aux_")):
                issue(
                    "bad-declaration",
                    f"{d.name!r} uses a name prefix reserved for solver witnesses",
                    d.span,
                )
    for s in program.sorts:
        if s.name in seen:
            issue("duplicate-declaration", f"sort {s.name!r} declared twice", s.span)
        seen.add(s.name)
        if s.name in SPATIAL_SORT_NAMES or s.name == "polygon":
            issue("bad-declaration", f"sort {s.name!r} shadows a built-in spatial sort", s.span)
    for o in program.objects:
        if o.name in seen:
            issue("duplicate-declaration", f"object {o.name!r} declared twice", o.span)
        seen.add(o.name)
        if not o.sort.is_spatial and program.sort(o.sort.name) is None:
            issue("undeclared-sort", f"object {o.name!r} has undeclared sort {o.sort.name!r}", o.span)
        if isinstance(o.sort.kind, IntRange):
            issue("bad-declaration", f"object {o.name!r} declared over integer sort {o.sort.name!r}", o.span)
    for c in program.constants:
        if c.name in seen:
            issue("duplicate-declaration", f"constant {c.name!r} declared twice", c.span)
        seen.add(c.name)
        if catalog.has_relation(c.name) or catalog.is_parameter_name(c.name):
            issue("bad-declaration", f"constant {c.name!r} shadows a built-in spatial symbol", c.span)
        for s in c.arg_sorts:
            if not s.is_spatial and program.sort(s.name) is None and not isinstance(s.kind, IntRange):
                issue("undeclared-sort", f"constant {c.name!r} uses undeclared sort {s.name!r}", c.span)
        if isinstance(c.result, SortDecl):
            if c.result.is_spatial:
                issue("bad-declaration", f"constant {c.name!r} has spatial result sort", c.span)
            elif program.sort(c.result.name) is None and not isinstance(c.result.kind, IntRange):
                issue("undeclared-sort", f"constant {c.name!r} has undeclared result sort {c.result.name!r}", c.span)
    for v in program.variables:
        if v.name in seen:
            issue("duplicate-declaration", f"variable {v.name!r} declared twice", v.span)
        seen.add(v.name)
        if not v.sort.is_spatial and program.sort(v.sort.name) is None and not isinstance(v.sort.kind, IntRange):
            issue("undeclared-sort", f"variable {v.name!r} has undeclared sort {v.sort.name!r}", v.span)

    # usage checks inside rules
    def term_sort(t: Term) -> object:
        """Best-effort sort of a term: SortDecl, 'int', 'real' or None."""
        if isinstance(t, NumTerm):
            return "int" if t.value.denominator == 1 else "real"
        if isinstance(t, ObjTerm):
            o = program.object(t.name)
            return o.sort if o else None
        if isinstance(t, VarTerm):
            v = program.variable(t.name)
            return v.sort if v else None
        if isinstance(t, ArithTerm):
            return "int"
        if isinstance(t, FnTerm):
            c = program.constant(t.name)
            if c is not None:
                return c.result if isinstance(c.result, SortDecl) else None
            if catalog.is_parameter_name(t.name):
                return "real"
            return None
        return None

    def check_term(t: Term, span: SourceSpan) -> None:
        if isinstance(t, ObjTerm):
            if program.object(t.name) is None:
                issue("undeclared-object", f"object {t.name!r} is not declared", span)
        elif isinstance(t, VarTerm):
            if program.variable(t.name) is None:
                issue("undeclared-object", f"variable {t.name!r} is not declared", span)
        elif isinstance(t, ArithTerm):
            check_term(t.left, span)
            check_term(t.right, span)
        elif isinstance(t, FnTerm):
            for a in t.args:
                check_term(a, span)
            c = program.constant(t.name)
            if c is not None:
                if len(t.args) != c.arity:
                    issue(
                        "arity-mismatch",
                        f"{t.name!r} used with {len(t.args)} arguments, declared with {c.arity}",
                        span,
                    )
                return
            if catalog.is_parameter_name(t.name):
                _check_parametric(t, span)
                return
            issue("undeclared-constant", f"constant {t.name!r} is not declared", span)

    def _check_parametric(t: FnTerm, span: SourceSpan) -> None:
        if not t.args or len(t.args) > 2:
            issue("arity-mismatch", f"parametric function {t.name!r} takes one object and an optional step", span)
            return
        host = t.args[0]
        host_sort = term_sort(host)
        if isinstance(host_sort, SortDecl) and host_sort.is_spatial:
            kind: SpatialKind = host_sort.kind  # type: ignore[assignment]
            if not catalog.kind_has_parameter(kind, t.name):
                issue("bad-usage", f"{host_sort.name!r} objects have no parameter {t.name!r}", span)
        elif host_sort is not None:
            issue("bad-usage", f"parametric function {t.name!r} applied to non-spatial term {host}", span)
        if len(t.args) == 2 and not _int_like(t.args[1]):
            issue("bad-usage", f"step argument of {t} must be a bounded-integer term", span)

    def _int_like(t: Term) -> bool:
        s = term_sort(t)
        return s == "int" or (isinstance(s, SortDecl) and isinstance(s.kind, IntRange))

    def check_atom(a: Atom, span: SourceSpan) -> None:
        for t in a.args:
            check_term(t, span)
        c = program.constant(a.pred)
        if c is not None:
            if not c.is_predicate:
                issue("bad-usage", f"function constant {a.pred!r} used as a predicate", span)
            if len(a.args) != c.arity:
                issue(
                    "arity-mismatch",
                    f"{a.pred!r} used with {len(a.args)} arguments, declared with {c.arity}",
                    span,
                )
            return
        if catalog.has_relation(a.pred):
            kinds = []
            n_spatial = 0
            for t in a.args:
                s = term_sort(t)
                if isinstance(s, SortDecl) and s.is_spatial:
                    kinds.append(s.kind)
                    n_spatial += 1
                else:
                    break
            step_args = a.args[n_spatial:]
            if len(step_args) > 1 or (step_args and not _int_like(step_args[0])):
                issue("bad-usage", f"relation {a.pred!r} takes spatial arguments and an optional step", span)
                return
            if not catalog.lookup(a.pred, tuple(kinds)):
                shown = ", ".join(k.display() for k in kinds)
                issue(
                    "arity-mismatch",
                    f"relation {a.pred!r} is not defined for argument kinds ({shown})",
                    span,
                )
            return
        issue("undeclared-constant", f"predicate {a.pred!r} is not declared", span)

    def check_formula(f: Formula, span: SourceSpan) -> None:
        for g in formula_atoms(f):
            if isinstance(g, Atom):
                check_atom(g, span)
            elif isinstance(g, FnEq):
                check_term(g.fn, span)
                check_term(g.value, span)
            else:
                check_term(g.lhs, span)
                check_term(g.rhs, span)

    for r in program.rules:
        check_formula(r.head, r.span)
        check_formula(r.body, r.span)
        if r.choice and isinstance(r.head, Bottom):
            issue("bad-usage", "choice rule cannot have an empty head", r.span)
    for s in program.shows:
        check_atom(s.atom, s.span)
        if formula_variables(s.atom):
            issue("bad-usage", f"show atom {s.atom} must be ground", s.span)
        if not catalog.has_relation(s.atom.pred):
            issue("bad-usage", f"show expects a built-in spatial relation, got {s.atom.pred!r}", s.span)

    return ValidationReport(tuple(issues))
