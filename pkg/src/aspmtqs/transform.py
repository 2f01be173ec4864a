"""Logical pipeline: syntactic checks, default desugaring, grounding,
Clark normal form, completion, dependency graph and tightness.

Only the tight fragment is supported: a cyclic dependency graph is a hard
error naming a witness cycle, since completion is sound for stable models
exactly on tight theories over the ground signature.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator, Mapping, Optional, Union

from .model import (
    And,
    ArithTerm,
    Atom,
    Bottom,
    BOTTOM,
    ConstantDecl,
    DUMMY_SPAN,
    FnEq,
    FnTerm,
    Formula,
    Iff,
    Implies,
    IntensionalSignature,
    IntRange,
    NumTerm,
    ObjTerm,
    Or,
    PolyCmp,
    Program,
    ProgramError,
    Rule,
    SortDecl,
    Term,
    Top,
    TOP,
    ValueHole,
    VarTerm,
    conj,
    disj,
    formula_atoms,
    formula_variables,
    neg,
    term_functions,
    validate_program,
)
from .spatial import CATALOG

MAX_GROUND_INSTANCES = 200_000


class GroundingError(ProgramError):
    def __init__(self, message: str, span=None):
        super().__init__("ground", message, span or DUMMY_SPAN)


class TightnessError(ProgramError):
    def __init__(self, cycle: list[str]):
        loop = " -> ".join(cycle + cycle[:1])
        super().__init__("tightness", f"theory is not tight; dependency cycle: {loop}")
        self.cycle = cycle


# ---------------------------------------------------------------------------
# f-plain and av-separated checks


def check_f_plain(program: Program, fn: ConstantDecl) -> tuple[bool, list[Formula]]:
    """True iff every atomic formula omits fn or is fn(t) = u with t, u free of fn."""

    def contains(t: Term) -> bool:
        return any(app.name == fn.name for app in term_functions(t))

    offending: list[Formula] = []
    for rule in program.rules:
        for f in itertools.chain(formula_atoms(rule.head), formula_atoms(rule.body)):
            if isinstance(f, Atom):
                if any(contains(a) for a in f.args):
                    offending.append(f)
            elif isinstance(f, FnEq):
                sides = []
                if f.fn.name == fn.name:
                    sides = [*f.fn.args, f.value]
                elif isinstance(f.value, FnTerm) and f.value.name == fn.name:
                    # equality read in the symmetric direction
                    sides = [*f.value.args, f.fn]
                elif contains(f.fn) or contains(f.value):
                    offending.append(f)
                    continue
                if any(contains(s) for s in sides):
                    offending.append(f)
            elif isinstance(f, PolyCmp):
                if contains(f.lhs) or contains(f.rhs):
                    offending.append(f)
    return not offending, offending


class _UnionFind:
    def __init__(self) -> None:
        self.parent: dict[str, str] = {}

    def find(self, x: str) -> str:
        self.parent.setdefault(x, x)
        while self.parent[x] != x:
            self.parent[x] = self.parent[self.parent[x]]
            x = self.parent[x]
        return x

    def union(self, a: str, b: str) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[ra] = rb


def check_av_separated(program: Program) -> tuple[bool, list[tuple[str, str]]]:
    """True iff no argument variable of an uninterpreted function is linked by
    equality to the value variable of another uninterpreted function."""
    intensional_fns = {
        c.name for c in program.constants if c.intensional and not c.is_predicate
    }
    offending: list[tuple[str, str]] = []
    for rule in program.rules:
        occurrences: list[tuple[int, set[str], set[str]]] = []  # (id, argvars, valuevars)
        uf = _UnionFind()
        for f in itertools.chain(formula_atoms(rule.head), formula_atoms(rule.body)):
            if isinstance(f, PolyCmp) and f.op == "=":
                if isinstance(f.lhs, VarTerm) and isinstance(f.rhs, VarTerm):
                    uf.union(f.lhs.name, f.rhs.name)
            if isinstance(f, FnEq) and f.fn.name in intensional_fns:
                argvars = {v for a in f.fn.args for v in _vars_of(a)}
                valuevars = set(_vars_of(f.value))
                occurrences.append((len(occurrences), argvars, valuevars))
        for (i, args_i, _), (j, _, values_j) in itertools.permutations(occurrences, 2):
            for x in sorted(args_i):
                for v in sorted(values_j):
                    if uf.find(x) == uf.find(v) and (x, v) not in offending:
                        offending.append((x, v))
    return not offending, offending


def _vars_of(t: Term) -> Iterator[str]:
    if isinstance(t, VarTerm):
        yield t.name
    elif isinstance(t, FnTerm):
        for a in t.args:
            yield from _vars_of(a)
    elif isinstance(t, ArithTerm):
        yield from _vars_of(t.left)
        yield from _vars_of(t.right)


# ---------------------------------------------------------------------------
# Default desugaring


def desugar_defaults(program: Program) -> Program:
    """Replace every choice rule {H} <- B with H <- B & not not H."""
    rules = []
    for r in program.rules:
        if not r.choice:
            rules.append(r)
            continue
        extra = neg(neg(r.head))
        body = extra if isinstance(r.body, Top) else And((r.body, extra))
        rules.append(Rule(r.head, body, choice=False, span=r.span))
    return Program(program.sorts, program.objects, program.constants, program.variables, tuple(rules), program.shows)


# ---------------------------------------------------------------------------
# Grounding


@dataclass(frozen=True)
class GroundTheory:
    """A variable-free theory plus the ground intensional signature."""

    rules: tuple[Rule, ...]
    signature: IntensionalSignature
    atom_universe: tuple[Atom, ...]
    fn_universe: tuple[FnTerm, ...]
    value_domains: Mapping[FnTerm, tuple[Term, ...]]
    program: Program
    step_sort: Optional[SortDecl]

    @property
    def steps(self) -> Optional[range]:
        if self.step_sort is None:
            return None
        assert isinstance(self.step_sort.kind, IntRange)
        return self.step_sort.kind.values()

    def relation_atoms(self) -> list[Atom]:
        """Ground built-in relation atoms occurring in rules or show statements."""
        seen: dict[Atom, None] = {}
        for rule in self.rules:
            for f in itertools.chain(formula_atoms(rule.head), formula_atoms(rule.body)):
                if isinstance(f, Atom) and CATALOG.has_relation(f.pred):
                    seen[f] = None
        for s in self.program.shows:
            seen[s.atom] = None
        return list(seen)

    def is_intensional_atom(self, f: Formula) -> bool:
        return isinstance(f, Atom) and f.pred in self.signature.predicates

    def is_intensional_fneq(self, f: Formula) -> bool:
        return isinstance(f, FnEq) and f.fn.name in self.signature.functions


def _sort_values(program: Program, sort: SortDecl) -> list[Term]:
    if isinstance(sort.kind, IntRange):
        return [NumTerm(Fraction(v)) for v in sort.kind.values()]
    return [ObjTerm(o.name) for o in program.objects if o.sort.name == sort.name]


def _substitute_term(t: Term, env: Mapping[str, Term]) -> Term:
    if isinstance(t, VarTerm):
        if t.name not in env:
            raise GroundingError(f"variable {t.name} is not declared over a finite sort")
        return env[t.name]
    if isinstance(t, FnTerm):
        return FnTerm(t.name, tuple(_substitute_term(a, env) for a in t.args))
    if isinstance(t, ArithTerm):
        left = _substitute_term(t.left, env)
        right = _substitute_term(t.right, env)
        if isinstance(left, NumTerm) and isinstance(right, NumTerm):
            if t.op == "+":
                return NumTerm(left.value + right.value)
            if t.op == "-":
                return NumTerm(left.value - right.value)
            return NumTerm(left.value * right.value)
        return ArithTerm(t.op, left, right)
    return t


class _RangeViolation(Exception):
    pass


def _fold_cmp(f: PolyCmp) -> Formula:
    if isinstance(f.lhs, NumTerm) and isinstance(f.rhs, NumTerm):
        from .spatial import _CMP_FUNCS

        return TOP if _CMP_FUNCS[f.op](f.lhs.value, f.rhs.value) else BOTTOM
    return f


def simplify(f: Formula) -> Formula:
    """Fold boolean constants; keeps all other structure (incl. double negation)."""
    if isinstance(f, And):
        return conj([simplify(c) for c in f.children])
    if isinstance(f, Or):
        return disj([simplify(c) for c in f.children])
    if isinstance(f, Implies):
        a, c = simplify(f.antecedent), simplify(f.consequent)
        if isinstance(a, Bottom) or isinstance(c, Top):
            return TOP
        if isinstance(a, Top):
            return c
        return Implies(a, c)
    if isinstance(f, Iff):
        return Iff(simplify(f.lhs), simplify(f.rhs))
    if isinstance(f, PolyCmp):
        return _fold_cmp(f)
    return f


def _detect_step_sort(program: Program) -> Optional[SortDecl]:
    temporal = False
    for rule in program.rules:
        for f in itertools.chain(formula_atoms(rule.head), formula_atoms(rule.body)):
            for t in _atom_terms(f):
                for app in term_functions(t):
                    if CATALOG.is_parameter_name(app.name) and len(app.args) == 2:
                        temporal = True
            if isinstance(f, Atom) and CATALOG.has_relation(f.pred):
                if _relation_step_split(program, f)[1] is not None:
                    temporal = True
    for s in program.shows:
        if _relation_step_split(program, s.atom)[1] is not None:
            temporal = True
    if not temporal:
        return None
    named = [s for s in program.sorts if isinstance(s.kind, IntRange)]
    if len(named) != 1:
        raise GroundingError(
            "temporal programs must declare exactly one bounded-integer sort to serve as the step sort"
        )
    return named[0]


def _atom_terms(f: Formula) -> list[Term]:
    if isinstance(f, Atom):
        return list(f.args)
    if isinstance(f, FnEq):
        return [f.fn, f.value]
    if isinstance(f, PolyCmp):
        return [f.lhs, f.rhs]
    return []


def _relation_step_split(program: Program, atom: Atom) -> tuple[int, Optional[Term]]:
    """Number of leading spatial arguments and the optional trailing step term."""
    n_spatial = 0
    for t in atom.args:
        sort = None
        if isinstance(t, ObjTerm):
            o = program.object(t.name)
            sort = o.sort if o else None
        elif isinstance(t, VarTerm):
            v = program.variable(t.name)
            sort = v.sort if v else None
        if sort is not None and sort.is_spatial:
            n_spatial += 1
        else:
            break
    rest = atom.args[n_spatial:]
    if not rest:
        return n_spatial, None
    if len(rest) == 1:
        return n_spatial, rest[0]
    raise GroundingError(f"relation {atom.pred} has more than one step argument")


def ground(program: Program) -> GroundTheory:
    """Instantiate all rules over their variables' finite sorts.

    Bounded-integer arithmetic in argument positions is evaluated, and any
    instance whose argument value leaves its sort range is dropped.
    """
    report = validate_program(program)
    if not report.ok:
        raise ProgramError("validate", str(report))
    step_sort = _detect_step_sort(program)
    decls = {c.name: c for c in program.constants}

    def check_ranges(f: Formula) -> Formula:
        """Fold comparisons and enforce sort ranges; raises _RangeViolation."""
        if isinstance(f, Atom):
            if f.pred in decls:
                _check_fn_args(FnTerm(f.pred, f.args))
            elif CATALOG.has_relation(f.pred):
                n_spatial, step = _relation_step_split(program, f)
                if step is not None:
                    _check_step(step)
            return f
        if isinstance(f, FnEq):
            _check_fn_args(f.fn)
            _check_value(f.fn, f.value)
            for app in term_functions(f.value):
                if app.name in decls:
                    _check_fn_args(app)
                elif CATALOG.is_parameter_name(app.name) and len(app.args) == 2:
                    _check_step(app.args[1])
            return f
        if isinstance(f, PolyCmp):
            for side in (f.lhs, f.rhs):
                for app in term_functions(side):
                    if app.name in decls:
                        _check_fn_args(app)
                    elif CATALOG.is_parameter_name(app.name) and len(app.args) == 2:
                        _check_step(app.args[1])
            return _fold_cmp(f)
        if isinstance(f, And):
            return conj([check_ranges(c) for c in f.children])
        if isinstance(f, Or):
            return disj([check_ranges(c) for c in f.children])
        if isinstance(f, Implies):
            return simplify(Implies(check_ranges(f.antecedent), check_ranges(f.consequent)))
        return f

    def _check_step(t: Term) -> None:
        if step_sort is None:
            raise GroundingError("step argument used but no step sort is declared")
        assert isinstance(step_sort.kind, IntRange)
        if isinstance(t, NumTerm):
            if t.value.denominator != 1 or not (step_sort.kind.lo <= t.value <= step_sort.kind.hi):
                raise _RangeViolation()
        else:
            raise GroundingError(f"step argument {t} did not ground to an integer")

    def _check_fn_args(app: FnTerm) -> None:
        decl = decls[app.name]
        for value, sort in zip(app.args, decl.arg_sorts):
            _check_sorted_value(value, sort)

    def _check_value(fn: FnTerm, value: Term) -> None:
        decl = decls[fn.name]
        if isinstance(decl.result, SortDecl) and isinstance(value, (NumTerm, ObjTerm)):
            _check_sorted_value(value, decl.result)

    def _check_sorted_value(value: Term, sort: SortDecl) -> None:
        if isinstance(sort.kind, IntRange) and isinstance(value, NumTerm):
            if value.value.denominator != 1 or not (sort.kind.lo <= value.value <= sort.kind.hi):
                raise _RangeViolation()

    ground_rules: list[Rule] = []
    for rule in program.rules:
        if rule.choice:
            raise ProgramError("ground", "choice rules must be desugared before grounding", rule.span)
        names = sorted(formula_variables(rule.head) | formula_variables(rule.body))
        domains = []
        for name in names:
            var = program.variable(name)
            if var is None:
                raise GroundingError(f"variable {name} is not declared", rule.span)
            values = _sort_values(program, var.sort)
            if not values:
                raise GroundingError(
                    f"variable {name} ranges over sort {var.sort.name!r} with no members", rule.span
                )
            domains.append(values)
        count = 1
        for d in domains:
            count *= len(d)
        if count > MAX_GROUND_INSTANCES:
            raise GroundingError(f"rule grounds to {count} instances (limit {MAX_GROUND_INSTANCES})", rule.span)
        for combo in itertools.product(*domains):
            env = dict(zip(names, combo))
            try:
                head = _substitute_formula(rule.head, env)
                body = _substitute_formula(rule.body, env)
                head = check_ranges(head) if not isinstance(head, Bottom) else head
                body = simplify(check_ranges(body))
            except _RangeViolation:
                continue
            if isinstance(body, Bottom) or isinstance(head, Top):
                continue
            ground_rules.append(Rule(head, body, span=rule.span))

    signature = program.signature()
    atom_universe: list[Atom] = []
    fn_universe: list[FnTerm] = []
    value_domains: dict[FnTerm, tuple[Term, ...]] = {}
    for c in program.constants:
        if not c.intensional:
            continue
        arg_values = [_sort_values(program, s) for s in c.arg_sorts]
        if any(not vals for vals in arg_values):
            continue
        count = 1
        for vals in arg_values:
            count *= len(vals)
        if count > MAX_GROUND_INSTANCES:
            raise GroundingError(f"constant {c.name} grounds to {count} instances")
        for combo in itertools.product(*arg_values):
            if c.is_predicate:
                atom_universe.append(Atom(c.name, tuple(combo)))
            else:
                app = FnTerm(c.name, tuple(combo))
                fn_universe.append(app)
                assert isinstance(c.result, SortDecl)
                value_domains[app] = tuple(_sort_values(program, c.result))

    return GroundTheory(
        tuple(ground_rules),
        signature,
        tuple(atom_universe),
        tuple(fn_universe),
        value_domains,
        program,
        step_sort,
    )


def _substitute_formula(f: Formula, env: Mapping[str, Term]) -> Formula:
    if isinstance(f, Atom):
        return Atom(f.pred, tuple(_substitute_term(t, env) for t in f.args))
    if isinstance(f, FnEq):
        fn = _substitute_term(f.fn, env)
        assert isinstance(fn, FnTerm)
        return FnEq(fn, _substitute_term(f.value, env))
    if isinstance(f, PolyCmp):
        return PolyCmp(f.op, _substitute_term(f.lhs, env), _substitute_term(f.rhs, env))
    if isinstance(f, And):
        return And(tuple(_substitute_formula(c, env) for c in f.children))
    if isinstance(f, Or):
        return Or(tuple(_substitute_formula(c, env) for c in f.children))
    if isinstance(f, Implies):
        return Implies(_substitute_formula(f.antecedent, env), _substitute_formula(f.consequent, env))
    return f


# ---------------------------------------------------------------------------
# Clark normal form and completion


def _is_theory_head(head: Formula) -> bool:
    if isinstance(head, PolyCmp):
        return True
    if isinstance(head, Atom) and CATALOG.has_relation(head.pred):
        return True
    return False


def to_clark_normal_form(theory: GroundTheory) -> GroundTheory:
    """Group rules by intensional head; heads with no rules get body Bottom.

    Constraints and rules with built-in relation or polynomial heads pass
    through unchanged (they are classical conjuncts, not definitions).
    """
    atom_bodies: dict[Atom, list[Formula]] = {a: [] for a in theory.atom_universe}
    # value None marks a rule already in normal form (head value is the hole)
    fn_bodies: dict[FnTerm, list[tuple[Optional[Term], Formula]]] = {
        t: [] for t in theory.fn_universe
    }
    passthrough: list[Rule] = []
    for rule in theory.rules:
        head = rule.head
        if isinstance(head, Bottom) or _is_theory_head(head):
            passthrough.append(rule)
            continue
        if isinstance(head, Atom):
            if head.pred not in theory.signature.predicates:
                raise ProgramError(
                    "clark-nf",
                    f"rule head {head} uses non-intensional predicate {head.pred!r}",
                    rule.span,
                )
            if head not in atom_bodies:
                raise ProgramError("clark-nf", f"head {head} is outside the ground universe", rule.span)
            atom_bodies[head].append(rule.body)
            continue
        assert isinstance(head, FnEq)
        fn = head.fn
        if fn.name not in theory.signature.functions:
            raise ProgramError(
                "clark-nf",
                f"rule head {head} uses non-intensional function {fn.name!r}",
                rule.span,
            )
        if fn not in fn_bodies:
            raise ProgramError("clark-nf", f"head term {fn} is outside the ground universe", rule.span)
        if isinstance(head.value, ValueHole):
            fn_bodies[fn].append((None, rule.body))
        else:
            fn_bodies[fn].append((head.value, rule.body))

    out: list[Rule] = []
    for atom in theory.atom_universe:
        out.append(Rule(atom, disj(atom_bodies[atom])))
    for fn in theory.fn_universe:
        parts: list[Formula] = []
        for value, body in fn_bodies[fn]:
            if value is None:
                parts.append(body)
            else:
                parts.append(conj([body, _value_match(value)]))
        out.append(Rule(FnEq(fn, ValueHole()), disj(parts)))
    out.extend(passthrough)
    return GroundTheory(
        tuple(out),
        theory.signature,
        theory.atom_universe,
        theory.fn_universe,
        theory.value_domains,
        theory.program,
        theory.step_sort,
    )


def _value_match(value: Term) -> Formula:
    if isinstance(value, FnTerm):
        return FnEq(value, ValueHole())
    if isinstance(value, (NumTerm, ObjTerm)):
        return PolyCmp("=", ValueHole(), value)
    raise ProgramError("clark-nf", f"unsupported head value term {value}")


@dataclass(frozen=True)
class CompletedTheory:
    """Completion sentences (equivalences plus constraints) over the signature."""

    sentences: tuple[Formula, ...]
    signature: IntensionalSignature
    ground: GroundTheory


def _subst_hole(f: Formula, value: Term) -> Formula:
    if isinstance(f, PolyCmp):
        lhs = value if isinstance(f.lhs, ValueHole) else f.lhs
        rhs = value if isinstance(f.rhs, ValueHole) else f.rhs
        substituted = lhs is not f.lhs or rhs is not f.rhs
        if (
            substituted
            and f.op in ("=", "!=")
            and isinstance(lhs, (NumTerm, ObjTerm))
            and isinstance(rhs, (NumTerm, ObjTerm))
        ):
            return TOP if (lhs == rhs) == (f.op == "=") else BOTTOM
        return PolyCmp(f.op, lhs, rhs)
    if isinstance(f, FnEq):
        if isinstance(f.value, ValueHole):
            return FnEq(f.fn, value)
        return f
    if isinstance(f, And):
        return conj([_subst_hole(c, value) for c in f.children])
    if isinstance(f, Or):
        return disj([_subst_hole(c, value) for c in f.children])
    if isinstance(f, Implies):
        return simplify(Implies(_subst_hole(f.antecedent, value), _subst_hole(f.consequent, value)))
    return f


def clark_completion(theory: GroundTheory) -> CompletedTheory:
    """Turn Clark-normal-form implications into equivalences.

    Functional definitions are resolved pointwise over their finite value
    domains; constraints and theory-head rules are kept as implications.
    """
    sentences: list[Formula] = []
    for rule in theory.rules:
        head = rule.head
        if isinstance(head, Bottom):
            sentences.append(neg(rule.body) if not isinstance(rule.body, Top) else BOTTOM)
        elif _is_theory_head(head):
            sentences.append(head if isinstance(rule.body, Top) else Implies(rule.body, head))
        elif isinstance(head, Atom):
            sentences.append(Iff(head, rule.body))
        else:
            assert isinstance(head, FnEq) and isinstance(head.value, ValueHole)
            for value in theory.value_domains[head.fn]:
                sentences.append(Iff(FnEq(head.fn, value), _subst_hole(rule.body, value)))
    return CompletedTheory(tuple(sentences), theory.signature, theory)


# ---------------------------------------------------------------------------
# Dependency graph and tightness

Vertex = Union[Atom, FnTerm]


@dataclass(frozen=True)
class DependencyGraph:
    vertices: tuple[Vertex, ...]
    edges: frozenset[tuple[Vertex, Vertex]]

    def successors(self, v: Vertex) -> list[Vertex]:
        return [d for (c, d) in self.edges if c == v]


def _strictly_positive_vertices(theory: GroundTheory, f: Formula) -> set[Vertex]:
    """Intensional constants with a strictly positive occurrence in f.

    An occurrence is strictly positive when it is not in the antecedent of
    any implication; `not not H` therefore contributes nothing.
    """
    out: set[Vertex] = set()

    def walk(g: Formula) -> None:
        if isinstance(g, Atom):
            if g.pred in theory.signature.predicates:
                out.add(g)
            return
        if isinstance(g, FnEq):
            if g.fn.name in theory.signature.functions:
                out.add(g.fn)
            for app in term_functions(g.value):
                if app.name in theory.signature.functions:
                    out.add(app)
            return
        if isinstance(g, (And, Or)):
            for c in g.children:
                walk(c)
            return
        if isinstance(g, Implies):
            walk(g.consequent)  # the antecedent subtree is not strictly positive
            return

    walk(f)
    return out


def dependency_graph(theory: GroundTheory) -> DependencyGraph:
    vertices: tuple[Vertex, ...] = (*theory.atom_universe, *theory.fn_universe)
    edges: set[tuple[Vertex, Vertex]] = set()
    for rule in theory.rules:
        head = rule.head
        if isinstance(head, Bottom) or _is_theory_head(head):
            continue
        heads: set[Vertex] = set()
        if isinstance(head, Atom):
            if head.pred in theory.signature.predicates:
                heads.add(head)
        elif isinstance(head, FnEq):
            if head.fn.name in theory.signature.functions:
                heads.add(head.fn)
            for app in term_functions(head.value):
                if app.name in theory.signature.functions:
                    heads.add(app)
        bodies = _strictly_positive_vertices(theory, rule.body)
        for c in heads:
            for d in bodies:
                edges.add((c, d))
    return DependencyGraph(vertices, frozenset(edges))


def is_tight(graph: DependencyGraph) -> tuple[bool, Optional[list[Vertex]]]:
    """Acyclicity check; returns a witness cycle when the graph is cyclic."""
    adjacency: dict[Vertex, list[Vertex]] = {v: [] for v in graph.vertices}
    for c, d in sorted(graph.edges, key=lambda e: (str(e[0]), str(e[1]))):
        adjacency.setdefault(c, []).append(d)
    WHITE, GRAY, BLACK = 0, 1, 2
    color: dict[Vertex, int] = {v: WHITE for v in adjacency}
    stack: list[Vertex] = []

    def visit(v: Vertex) -> Optional[list[Vertex]]:
        color[v] = GRAY
        stack.append(v)
        for w in adjacency.get(v, []):
            if color.get(w, WHITE) == GRAY:
                return stack[stack.index(w):]
            if color.get(w, WHITE) == WHITE:
                cycle = visit(w)
                if cycle is not None:
                    return cycle
        stack.pop()
        color[v] = BLACK
        return None

    for v in list(adjacency):
        if color[v] == WHITE:
            cycle = visit(v)
            if cycle is not None:
                return False, cycle
    return True, None


# ---------------------------------------------------------------------------
# Whole-pipeline driver


@dataclass(frozen=True)
class PipelineResult:
    program: Program
    desugared: Program
    ground: GroundTheory
    normal_form: GroundTheory
    completed: CompletedTheory
    graph: DependencyGraph


def run_pipeline(program: Program) -> PipelineResult:
    """parse-validated program -> completed theory, or ProgramError."""
    report = validate_program(program)
    if not report.ok:
        raise ProgramError("validate", str(report))
    for c in program.constants:
        if c.intensional and not c.is_predicate:
            ok, offending = check_f_plain(program, c)
            if not ok:
                shown = "; ".join(str(o) for o in offending[:3])
                raise ProgramError("f-plain", f"program is not {c.name}-plain: {shown}")
    ok, pairs = check_av_separated(program)
    if not ok:
        shown = ", ".join(f"({a}, {b})" for a, b in pairs[:3])
        raise ProgramError("av-separated", f"argument/value variables linked by equality: {shown}")
    desugared = desugar_defaults(program)
    theory = ground(desugared)
    graph = dependency_graph(theory)
    tight, cycle = is_tight(graph)
    if not tight:
        assert cycle is not None
        raise TightnessError([str(v) for v in cycle])
    nf = to_clark_normal_form(theory)
    completed = clark_completion(nf)
    return PipelineResult(program, desugared, theory, nf, completed, graph)


# ---------------------------------------------------------------------------
# Dumps (input-syntax views of intermediate forms)


def pretty_ground(theory: GroundTheory) -> str:
    from .parser import pretty_rule

    lines = [pretty_rule(r) for r in theory.rules]
    return "\n".join(lines) + ("\n" if lines else "")


def pretty_completion(completed: CompletedTheory) -> str:
    from .parser import pretty_formula

    lines = [pretty_formula(s) + "." for s in completed.sentences]
    return "\n".join(lines) + ("\n" if lines else "")
