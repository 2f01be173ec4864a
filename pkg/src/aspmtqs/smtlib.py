"""SMT-LIB 2 emission, external solver driving, and verdict decoding.

The completed theory plus the spatial constraint set become one
quantifier-free instance over nonlinear real arithmetic (finite-sort
functional terms ride along as bounded integers).  Any solver that reads
SMT-LIB 2 from a file argument or stdin and prints ``sat``/``unsat``/
``unknown`` followed by optional model forms is usable.
"""

from __future__ import annotations

import enum
import os
import shlex
import shutil
import subprocess
import tempfile
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Union

from .model import (
    And,
    ArithTerm,
    Atom,
    Bottom,
    EnumSort,
    FnEq,
    FnTerm,
    Formula,
    Iff,
    Implies,
    IntRange,
    NumTerm,
    ObjTerm,
    Or,
    PolyCmp,
    ProgramError,
    SortDecl,
    Term,
    Top,
    formula_atoms,
    neg,
)
from .parser import ModelBinding, parse_solver_model
from .spatial import CATALOG, ArgRef, EncodedRelation, domain_axioms, encode_relation, kind_slots
from .transform import CompletedTheory, GroundTheory, _relation_step_split


class EmitError(Exception):
    """An assertion references an undeclared symbol (internal bug guard)."""


class SolverLaunchError(Exception):
    pass


class SolverProtocolError(Exception):
    pass


class Status(enum.Enum):
    SAT = "sat"
    UNSAT = "unsat"
    UNKNOWN = "unknown"


ParamKey = tuple[str, str, Optional[int]]  # (function, object, step)


# ---------------------------------------------------------------------------
# Symbol mangling


def _token(t: Term) -> str:
    if isinstance(t, ObjTerm):
        return t.name
    if isinstance(t, NumTerm) and t.value.denominator == 1:
        v = t.value.numerator
        return str(v) if v >= 0 else f"m{-v}"
    raise EmitError(f"term {t} cannot appear in a symbol name")


def atom_symbol(a: Atom) -> str:
    parts = [a.pred, *(_token(t) for t in a.args)]
    return "holds_" + "_".join(parts)


def fn_symbol(t: FnTerm) -> str:
    if not t.args:
        return t.name
    return t.name + "_" + "_".join(_token(a) for a in t.args)


def param_symbol(key: ParamKey) -> str:
    fn, obj, step = key
    return f"{fn}_{obj}" if step is None else f"{fn}_{obj}_{step}"


# ---------------------------------------------------------------------------
# Instance


@dataclass
class SmtInstance:
    text: str
    logic: str
    assertions: tuple[Formula, ...]
    param_symbols: dict[str, ParamKey]
    atom_symbols: dict[str, Atom]
    fn_symbols: dict[str, FnTerm]
    fn_domains: dict[str, tuple[Term, ...]]
    relation_atoms: tuple[Atom, ...]


@dataclass
class SpatialModel:
    """Decoded satisfying assignment: object parameters, atom truths,
    finite-sort functional values."""

    parameters: dict[ParamKey, Union[Fraction, float]]
    atoms: dict[Atom, bool]
    functions: dict[FnTerm, Term]
    bindings: dict[str, ModelBinding]

    def parameter(self, fn: str, obj: str, step: Optional[int] = None) -> Union[Fraction, float]:
        return self.parameters[(fn, obj, step)]

    def atom_true(self, a: Atom) -> bool:
        return self.atoms.get(a, False)


@dataclass
class SolverVerdict:
    status: Status
    model: Optional[SpatialModel]
    wall_time: float
    timed_out: bool = False
    raw_output: str = ""


class EntailmentStatus(enum.Enum):
    ENTAILED = "entailed"
    NOT_ENTAILED = "not-entailed"
    UNKNOWN = "unknown"


@dataclass
class EntailmentResult:
    status: EntailmentStatus
    verdict: SolverVerdict

    @property
    def countermodel(self) -> Optional[SpatialModel]:
        return self.verdict.model


# ---------------------------------------------------------------------------
# Emission


class _Emitter:
    def __init__(self, completed: CompletedTheory, query_asserts: tuple[Formula, ...] = ()):
        self.completed = completed
        self.theory: GroundTheory = completed.ground
        self.program = self.theory.program
        self.query_asserts = query_asserts
        self.param_symbols: dict[str, ParamKey] = {}
        self.atom_symbols: dict[str, Atom] = {}
        self.fn_symbols: dict[str, FnTerm] = {}
        self.fn_domains: dict[str, tuple[Term, ...]] = {}
        self.declared: dict[str, str] = {}  # symbol -> smt sort
        # centre-distance witnesses per circle pair and signed-area witnesses
        # per ordered circle triple; keys carry the step index
        self.pair_vars: dict[tuple[str, str, Optional[int]], FnTerm] = {}
        self.cross_vars: dict[tuple[str, str, str, Optional[int]], FnTerm] = {}
        self.witness_defs: list[Formula] = []

    def _declare(self, symbol: str, sort: str) -> None:
        if symbol in self.declared:
            if self.declared[symbol] != sort:
                raise EmitError(f"symbol {symbol!r} declared with two sorts")
            return
        self.declared[symbol] = sort

    # -- spatial layer -------------------------------------------------------

    def _steps(self) -> list[Optional[int]]:
        steps = self.theory.steps
        return list(steps) if steps is not None else [None]

    def _spatial_objects(self) -> list:
        return [o for o in self.program.objects if o.sort.is_spatial]

    def _declare_object_slots(self) -> None:
        for obj in self._spatial_objects():
            kind = obj.sort.kind
            for step in self._steps():
                for slot in kind_slots(kind):
                    key = (slot, obj.name, step)
                    symbol = param_symbol(key)
                    self._declare(symbol, "Real")
                    self.param_symbols[symbol] = key

    def _relation_atom_set(self) -> list[Atom]:
        atoms = dict.fromkeys(self.theory.relation_atoms())
        for f in self.query_asserts:
            for g in formula_atoms(f):
                if isinstance(g, Atom) and CATALOG.has_relation(g.pred):
                    atoms.setdefault(g, None)
        return sorted(atoms, key=atom_symbol)

    def _encode_relation_atom(self, a: Atom) -> EncodedRelation:
        n_spatial, step_term = _relation_step_split(self.program, a)
        step: Optional[int] = None
        if step_term is not None:
            if not isinstance(step_term, NumTerm) or step_term.value.denominator != 1:
                raise ProgramError("emit", f"relation atom {a} has a non-ground step")
            step = int(step_term.value)
            steps = self.theory.steps
            if steps is None or step not in steps:
                raise ProgramError("emit", f"step {step} of {a} is outside the step sort")
        refs = []
        for t in a.args[:n_spatial]:
            assert isinstance(t, ObjTerm)
            decl = self.program.object(t.name)
            assert decl is not None and decl.sort.is_spatial
            refs.append(ArgRef(t.name, decl.sort.kind, step))
        dist_form = _distance_form(self, a.pred, tuple(refs), step)
        if dist_form is not None:
            return EncodedRelation(dist_form)
        token = atom_symbol(a).removeprefix("holds_")
        return encode_relation(a.pred, tuple(refs), atom_token=f"aux_{token}")

    # -- centre-distance witnesses --------------------------------------------

    def pair_dist(self, a: ArgRef, b: ArgRef, step: Optional[int]) -> FnTerm:
        """Distance witness d >= 0 with d*d = squared centre distance."""
        o1, o2 = sorted((a.obj, b.obj))
        key = (o1, o2, step)
        if key not in self.pair_vars:
            host = ObjTerm(f"pair_{o1}_{o2}")
            args: tuple[Term, ...] = (host,) if step is None else (host, NumTerm(Fraction(step)))
            d = FnTerm("d", args)
            pk: ParamKey = ("d", host.name, step)
            self._declare(param_symbol(pk), "Real")
            self.param_symbols[param_symbol(pk)] = pk
            first = ArgRef(o1, a.kind if a.obj == o1 else b.kind, step)
            second = ArgRef(o2, b.kind if b.obj == o2 else a.kind, step)
            from .spatial import delta, mul

            self.witness_defs.append(PolyCmp(">=", d, NumTerm(Fraction(0))))
            self.witness_defs.append(PolyCmp("=", mul(d, d), delta(first, second)))
            self.pair_vars[key] = d
        return self.pair_vars[key]

    def triple_cross(self, a: ArgRef, b: ArgRef, c: ArgRef, step: Optional[int]) -> FnTerm:
        """Signed doubled-area witness of the triple (a located against b->c)."""
        key = (a.obj, b.obj, c.obj, step)
        if key not in self.cross_vars:
            host = ObjTerm(f"triple_{a.obj}_{b.obj}_{c.obj}")
            args: tuple[Term, ...] = (host,) if step is None else (host, NumTerm(Fraction(step)))
            cr = FnTerm("cr", args)
            pk: ParamKey = ("cr", host.name, step)
            self._declare(param_symbol(pk), "Real")
            self.param_symbols[param_symbol(pk)] = pk
            from .spatial import _triple_cross as cross_poly

            self.witness_defs.append(PolyCmp("=", cr, cross_poly(a, b, c)))
            # Heron tie: 4*cr^2 equals the product of the four side-length sums
            from .spatial import add, mul, sub

            dab = self.pair_dist(a, b, step)
            dbc = self.pair_dist(b, c, step)
            dac = self.pair_dist(a, c, step)
            p1 = add(add(dab, dbc), dac)
            p2 = add(sub(dbc, dab), dac)
            p3 = add(sub(dab, dbc), dac)
            p4 = sub(add(dab, dbc), dac)
            lhs = mul(NumTerm(Fraction(4)), mul(cr, cr))
            self.witness_defs.append(PolyCmp("=", lhs, mul(mul(p1, p2), mul(p3, p4))))
            self.cross_vars[key] = cr
        return self.cross_vars[key]

    def _symmetry_pins(self, relation_atoms: list[Atom]) -> list[Formula]:
        """WLOG anchoring of the rigid-motion symmetry.

        Translation: sound when every direct positional-parameter reference
        is a bare same-slot equality (the inertia idiom x(o,T+1) = x(o,T)),
        since those are invariant under translating the whole trajectory.
        Rotation: sound only when positional parameters are never referenced
        directly and no axis-dependent relation or object kind occurs.
        """
        from .model import formula_atoms as _fatoms
        from .model import term_functions as _tfns

        translation_ok = True
        any_positional = False

        def positional(app: FnTerm) -> bool:
            return CATALOG.is_parameter_name(app.name) and app.name not in ("r", "ri", "ro")

        formulas = [
            *(r.head for r in self.theory.rules),
            *(r.body for r in self.theory.rules),
            *self.query_asserts,
        ]
        for f in formulas:
            for g in _fatoms(f):
                apps = [
                    app
                    for t in _atom_poly_terms(g)
                    for app in _tfns(t)
                    if positional(app)
                ]
                if not apps:
                    continue
                any_positional = True
                same_slot_equality = (
                    isinstance(g, PolyCmp)
                    and g.op == "="
                    and isinstance(g.lhs, FnTerm)
                    and isinstance(g.rhs, FnTerm)
                    and g.lhs.name == g.rhs.name
                )
                if not same_slot_equality:
                    translation_ok = False
        if not translation_ok:
            return []
        anchors = [
            o for o in self._spatial_objects() if o.sort.kind.name in _PRIMARY_POINT_SLOTS
        ]
        if not anchors:
            return []
        first_step = self.theory.steps[0] if self.theory.steps is not None else None
        zero = NumTerm(Fraction(0))
        pins: list[Formula] = []

        def slot_term(obj, slot: str) -> FnTerm:
            args: tuple[Term, ...] = (ObjTerm(obj.name),)
            if first_step is not None:
                args = (ObjTerm(obj.name), NumTerm(Fraction(first_step)))
            return FnTerm(slot, args)

        sx, sy = _PRIMARY_POINT_SLOTS[anchors[0].sort.kind.name]
        pins.append(PolyCmp("=", slot_term(anchors[0], sx), zero))
        pins.append(PolyCmp("=", slot_term(anchors[0], sy), zero))
        axis_dependent = any(a.pred.startswith(("cdc", "rax", "ray", "ia")) for a in relation_atoms)
        axis_kinds = any(
            o.sort.kind.name in ("rectangle", "interval") for o in self._spatial_objects()
        )
        if len(anchors) > 1 and not any_positional and not axis_dependent and not axis_kinds:
            _, sy2 = _PRIMARY_POINT_SLOTS[anchors[1].sort.kind.name]
            pins.append(PolyCmp("=", slot_term(anchors[1], sy2), zero))
        return pins

    def triangle_lemmas(self) -> list[Formula]:
        """Triangle inequalities for every step-coherent distance triple."""
        from .spatial import add

        by_step: dict[Optional[int], set[tuple[str, str]]] = {}
        for (o1, o2, step) in self.pair_vars:
            by_step.setdefault(step, set()).add((o1, o2))
        out: list[Formula] = []
        for step in sorted(by_step, key=lambda s: (s is not None, s)):
            pairs = by_step[step]
            objs = sorted({o for p in pairs for o in p})
            for i, oa in enumerate(objs):
                for j in range(i + 1, len(objs)):
                    for k in range(j + 1, len(objs)):
                        ob, oc = objs[j], objs[k]
                        if {(oa, ob), (ob, oc), (oa, oc)} <= pairs:
                            dab = self.pair_vars[(oa, ob, step)]
                            dbc = self.pair_vars[(ob, oc, step)]
                            dac = self.pair_vars[(oa, oc, step)]
                            out.append(PolyCmp("<=", dab, add(dbc, dac)))
                            out.append(PolyCmp("<=", dbc, add(dab, dac)))
                            out.append(PolyCmp("<=", dac, add(dab, dbc)))
        return out

    # -- rendering -------------------------------------------------------------

    def render_real(self, t: Term) -> str:
        if isinstance(t, NumTerm):
            v = t.value
            if v < 0:
                return f"(- {self.render_real(NumTerm(-v))})"
            if v.denominator == 1:
                return f"{v.numerator}.0"
            return f"(/ {v.numerator}.0 {v.denominator}.0)"
        if isinstance(t, FnTerm):
            obj = t.args[0] if t.args else None
            step = None
            if len(t.args) == 2:
                second = t.args[1]
                assert isinstance(second, NumTerm)
                step = int(second.value)
            if not isinstance(obj, ObjTerm):
                raise EmitError(f"parametric application {t} is not ground")
            symbol = param_symbol((t.name, obj.name, step))
            if symbol not in self.declared:
                raise EmitError(f"assertion references undeclared symbol {symbol!r}")
            return symbol
        if isinstance(t, ArithTerm):
            return f"({t.op} {self.render_real(t.left)} {self.render_real(t.right)})"
        raise EmitError(f"cannot render term {t} in a real context")

    def render_int(self, t: Term) -> str:
        if isinstance(t, NumTerm) and t.value.denominator == 1:
            v = t.value.numerator
            return str(v) if v >= 0 else f"(- {-v})"
        if isinstance(t, FnTerm):
            symbol = fn_symbol(t)
            if symbol not in self.declared:
                raise EmitError(f"assertion references undeclared symbol {symbol!r}")
            return symbol
        if isinstance(t, ArithTerm):
            return f"({t.op} {self.render_int(t.left)} {self.render_int(t.right)})"
        raise EmitError(f"cannot render term {t} in an integer context")

    def _fneq_value_code(self, fn: FnTerm, value: Term) -> str:
        decl = self.program.constant(fn.name)
        assert decl is not None and isinstance(decl.result, SortDecl)
        if isinstance(decl.result.kind, EnumSort):
            if isinstance(value, ObjTerm):
                members = [o.name for o in self.program.objects if o.sort.name == decl.result.name]
                try:
                    return str(members.index(value.name))
                except ValueError:
                    raise EmitError(f"{value.name!r} is not a member of sort {decl.result.name!r}")
            if isinstance(value, FnTerm):
                return self.render_int(value)
            raise EmitError(f"cannot encode enum value {value}")
        return self.render_int(value)

    def render_formula(self, f: Formula) -> str:
        if isinstance(f, Top):
            return "true"
        if isinstance(f, Bottom):
            return "false"
        if isinstance(f, Atom):
            symbol = atom_symbol(f)
            if symbol not in self.declared:
                raise EmitError(f"assertion references undeclared symbol {symbol!r}")
            return symbol
        if isinstance(f, FnEq):
            lhs = self.render_int(f.fn)
            rhs = self._fneq_value_code(f.fn, f.value)
            return f"(= {lhs} {rhs})"
        if isinstance(f, PolyCmp):
            lhs, rhs = self.render_real(f.lhs), self.render_real(f.rhs)
            if f.op == "!=":
                return f"(distinct {lhs} {rhs})"
            return f"({f.op} {lhs} {rhs})"
        if isinstance(f, And):
            return "(and " + " ".join(self.render_formula(c) for c in f.children) + ")"
        if isinstance(f, Or):
            return "(or " + " ".join(self.render_formula(c) for c in f.children) + ")"
        if isinstance(f, Implies):
            if isinstance(f.consequent, Bottom):
                return f"(not {self.render_formula(f.antecedent)})"
            return f"(=> {self.render_formula(f.antecedent)} {self.render_formula(f.consequent)})"
        if isinstance(f, Iff):
            return f"(= {self.render_formula(f.lhs)} {self.render_formula(f.rhs)})"
        raise EmitError(f"cannot render {type(f).__name__}")

    # -- assembly ----------------------------------------------------------------

    def emit(self) -> SmtInstance:
        theory = self.theory
        self._declare_object_slots()

        for a in theory.atom_universe:
            symbol = atom_symbol(a)
            if symbol in self.declared:
                raise EmitError(f"symbol clash on {symbol!r}")
            self._declare(symbol, "Bool")
            self.atom_symbols[symbol] = a
        for t in theory.fn_universe:
            symbol = fn_symbol(t)
            if symbol in self.declared:
                raise EmitError(f"symbol clash on {symbol!r}")
            self._declare(symbol, "Int")
            self.fn_symbols[symbol] = t
            self.fn_domains[symbol] = theory.value_domains[t]

        relation_atoms = self._relation_atom_set()
        encodings: list[tuple[Atom, EncodedRelation]] = []
        for a in relation_atoms:
            enc = self._encode_relation_atom(a)
            symbol = atom_symbol(a)
            if symbol in self.atom_symbols:
                raise EmitError(f"symbol clash on {symbol!r}")
            self._declare(symbol, "Bool")
            self.atom_symbols[symbol] = a
            for aux in enc.aux_points:
                for slot in ("x", "y"):
                    key = (slot, aux, None)
                    self._declare(param_symbol(key), "Real")
                    self.param_symbols[param_symbol(key)] = key
            encodings.append((a, enc))

        # assertions in pipeline order: domain axioms, finite-sort bounds,
        # spatial relation equivalences (with witness definitions first),
        # completion sentences, query
        axiom_group: list[Formula] = []
        for obj in self._spatial_objects():
            for step in self._steps():
                axiom_group.extend(domain_axioms(obj.name, obj.sort.kind, step))
        bound_texts: list[str] = []
        for symbol in sorted(self.fn_symbols):
            domain = self.fn_domains[symbol]
            lo, hi = _int_bounds(self.program, self.fn_symbols[symbol], domain)
            bound_texts.append(f"(assert (and (<= {lo} {symbol}) (<= {symbol} {hi})))")
        spatial_group: list[Formula] = [
            *self._symmetry_pins(relation_atoms),
            *self.witness_defs,
            *self.triangle_lemmas(),
            *(Iff(a, enc.formula) for a, enc in encodings),
        ]
        assertions: list[Formula] = [
            *axiom_group,
            *spatial_group,
            *self.completed.sentences,
            *self.query_asserts,
        ]

        logic = "QF_NIRA" if self.fn_symbols else "QF_NRA"
        lines = [f"(set-logic {logic})"]
        for symbol in sorted(self.declared):
            lines.append(f"(declare-const {symbol} {self.declared[symbol]})")
        lines.extend(f"(assert {self.render_formula(a)})" for a in axiom_group)
        lines.extend(bound_texts)
        lines.extend(
            f"(assert {self.render_formula(a)})"
            for a in (*spatial_group, *self.completed.sentences, *self.query_asserts)
        )
        lines.append("(check-sat)")
        lines.append("(get-model)")
        return SmtInstance(
            "\n".join(lines) + "\n",
            logic,
            tuple(assertions),
            self.param_symbols,
            self.atom_symbols,
            self.fn_symbols,
            self.fn_domains,
            tuple(relation_atoms),
        )


_PRIMARY_POINT_SLOTS = {
    "point": ("x", "y"),
    "circle": ("x", "y"),
    "segment": ("x1", "y1"),
    "triangle": ("x1", "y1"),
    "polygon": ("x1", "y1"),
    "eggyolk": ("xi", "yi"),
}


def _atom_poly_terms(g) -> list[Term]:
    if isinstance(g, PolyCmp):
        return [g.lhs, g.rhs]
    if isinstance(g, FnEq):
        return [g.value]
    return []


def _distance_form(
    em: _Emitter, name: str, refs: tuple[ArgRef, ...], step: Optional[int]
) -> Optional[Formula]:
    """Circle-relation encoding written through the distance witnesses.

    Logically equivalent to the catalog's squared-distance rows given the
    witness definitions, but linear in distance and radii, which the
    solver's propagation layer exploits.
    """
    from .spatial import add, cmp, sub

    zero = NumTerm(Fraction(0))
    if len(refs) == 2 and all(r.kind.name == "circle" for r in refs):
        c1, c2 = refs
        if name in _CIRCLE_INVERSES:
            name = _CIRCLE_INVERSES[name]
            c1, c2 = c2, c1
        if name not in _CIRCLE_DIST_OPS and name not in ("rccEQ", "concentric", "rccPO"):
            return None
        d = em.pair_dist(c1, c2, step)
        r1, r2 = c1.p("r"), c2.p("r")
        if name == "concentric":
            return cmp("=", d, zero)
        if name == "rccEQ":
            return And((cmp("=", d, zero), cmp("=", r1, r2)))
        if name == "rccPO":
            return And(
                (cmp(">", d, sub(r1, r2)), cmp(">", d, sub(r2, r1)), cmp("<", d, add(r1, r2)))
            )
        op, bound, extra = _CIRCLE_DIST_OPS[name]
        rhs = add(r1, r2) if bound == "sum" else sub(r2, r1)
        parts: list[Formula] = [cmp(op, d, rhs)]
        if extra is not None:
            parts.append(cmp(extra, r1, r2))
        return parts[0] if len(parts) == 1 else And(tuple(parts))
    if len(refs) == 3 and all(r.kind.name == "circle" for r in refs):
        if name not in ("leftOf", "rightOf", "collinear"):
            return None
        cr = em.triple_cross(refs[0], refs[1], refs[2], step)
        op = {"leftOf": ">", "rightOf": "<", "collinear": "="}[name]
        return cmp(op, cr, zero)
    return None


# op against sum (r1+r2) or difference (r2-r1), plus an optional radius side
# condition; inverses swap the arguments first
_CIRCLE_DIST_OPS: dict[str, tuple[str, str, Optional[str]]] = {
    "rccC": ("<=", "sum", None),
    "rccDR": (">=", "sum", None),
    "rccDC": (">", "sum", None),
    "rccEC": ("=", "sum", None),
    "rccO": ("<", "sum", None),
    "rccP": ("<=", "diff", "<="),
    "rccPP": ("<=", "diff", "<"),
    "rccTPP": ("=", "diff", "<"),
    "rccNTPP": ("<", "diff", "<"),
}

_CIRCLE_INVERSES = {
    "rccPi": "rccP",
    "rccPPi": "rccPP",
    "rccTPPi": "rccTPP",
    "rccNTPPi": "rccNTPP",
}


def _int_bounds(program, fn: FnTerm, domain: tuple[Term, ...]) -> tuple[int, int]:
    decl = program.constant(fn.name)
    assert decl is not None and isinstance(decl.result, SortDecl)
    if isinstance(decl.result.kind, IntRange):
        return decl.result.kind.lo, decl.result.kind.hi
    return 0, len(domain) - 1


def emit_smtlib(completed: CompletedTheory, query_asserts: tuple[Formula, ...] = ()) -> SmtInstance:
    """Deterministic SMT-LIB text for a completed theory plus spatial layer.

    Identical inputs yield byte-identical text: declarations are sorted
    lexicographically and assertions follow pipeline order.
    """
    return _Emitter(completed, query_asserts).emit()


# ---------------------------------------------------------------------------
# Solver subprocess


def default_solver_command() -> list[str]:
    """Resolve the solver: $ASPMTQS_SOLVER, else the bundled Z3 wrapper."""
    env = os.environ.get("ASPMTQS_SOLVER")
    if env:
        return shlex.split(env)
    node = shutil.which("node") or shutil.which("nodejs")
    wrapper = os.path.join(os.path.dirname(__file__), "solvers", "z3smt2.cjs")
    if node and os.path.exists(wrapper):
        return [node, wrapper]
    raise SolverLaunchError(
        "no SMT solver configured: set ASPMTQS_SOLVER or install node plus "
        "the z3-solver npm package for the bundled wrapper"
    )


_npm_root_cache: Optional[str] = None


def _node_env() -> dict[str, str]:
    global _npm_root_cache
    env = dict(os.environ)
    if _npm_root_cache is None:
        npm = shutil.which("npm")
        _npm_root_cache = ""
        if npm:
            try:
                out = subprocess.run(
                    [npm, "root", "-g"], capture_output=True, text=True, timeout=20
                )
                _npm_root_cache = out.stdout.strip()
            except (OSError, subprocess.SubprocessError):
                pass
    if _npm_root_cache:
        existing = env.get("NODE_PATH", "")
        env["NODE_PATH"] = _npm_root_cache + (os.pathsep + existing if existing else "")
    return env


def solve(
    instance: SmtInstance,
    solver: Optional[list[str]] = None,
    timeout: float = 60.0,
) -> SolverVerdict:
    """Run the external solver on the instance and decode the verdict."""
    cmd = solver if solver is not None else default_solver_command()
    start = time.perf_counter()
    with tempfile.TemporaryDirectory(prefix="aspmtqs-") as tmp:
        path = os.path.join(tmp, "instance.smt2")
        with open(path, "w", encoding="ascii") as handle:
            handle.write(instance.text)
        try:
            proc = subprocess.run(
                [*cmd, path],
                capture_output=True,
                text=True,
                timeout=timeout,
                env=_node_env(),
            )
        except FileNotFoundError as e:
            raise SolverLaunchError(f"solver executable not found: {cmd[0]}") from e
        except subprocess.TimeoutExpired:
            return SolverVerdict(Status.UNKNOWN, None, time.perf_counter() - start, timed_out=True)
    wall = time.perf_counter() - start
    stdout = proc.stdout or ""
    status = _parse_status(stdout)
    if status is None:
        if proc.returncode != 0:
            raise SolverLaunchError(
                f"solver exited with code {proc.returncode} and no verdict: {proc.stderr.strip()[:500]}"
            )
        raise SolverProtocolError(f"no sat/unsat/unknown line in solver output: {stdout[:500]!r}")
    if status is not Status.SAT:
        return SolverVerdict(status, None, wall, raw_output=stdout)
    try:
        bindings = parse_solver_model(stdout)
    except Exception as e:
        raise SolverProtocolError(f"unparseable model in solver output: {e}") from e
    return SolverVerdict(status, _decode_model(instance, bindings), wall, raw_output=stdout)


def _parse_status(stdout: str) -> Optional[Status]:
    for line in stdout.splitlines():
        line = line.strip()
        if line in ("sat", "unsat", "unknown"):
            return Status(line)
    return None


def _decode_model(instance: SmtInstance, bindings: list[ModelBinding]) -> SpatialModel:
    model = SpatialModel({}, {}, {}, {})
    for b in bindings:
        model.bindings[b.name] = b
        if b.name in instance.param_symbols:
            if isinstance(b.value, bool):
                raise SolverProtocolError(f"boolean value for real symbol {b.name}")
            model.parameters[instance.param_symbols[b.name]] = b.value
        elif b.name in instance.atom_symbols:
            if not isinstance(b.value, bool):
                raise SolverProtocolError(f"non-boolean value for atom symbol {b.name}")
            model.atoms[instance.atom_symbols[b.name]] = b.value
        elif b.name in instance.fn_symbols:
            if isinstance(b.value, bool) or b.value != int(b.value):
                raise SolverProtocolError(f"non-integer value for finite-sort symbol {b.name}")
            term = instance.fn_symbols[b.name]
            domain = instance.fn_domains[b.name]
            model.functions[term] = _decode_fn_value(domain, int(b.value))
    return model


def _decode_fn_value(domain: tuple[Term, ...], code: int) -> Term:
    if domain and isinstance(domain[0], ObjTerm):
        if not 0 <= code < len(domain):
            raise SolverProtocolError(f"enum code {code} outside the domain")
        return domain[code]
    return NumTerm(Fraction(code))


# ---------------------------------------------------------------------------
# Model soundness re-check


def verify_model(instance: SmtInstance, model: SpatialModel, tolerance: float = 1e-9) -> list[str]:
    """Re-evaluate every asserted formula at the model values.

    Exact rational arithmetic when every relevant binding is exact; decimal
    approximations of algebraic values are accepted within the tolerance.
    Returns the rendered source of violated assertions (empty = sound).
    """
    failures: list[str] = []
    for f in instance.assertions:
        try:
            ok = _eval_assert(f, instance, model, tolerance)
        except KeyError as e:
            failures.append(f"{f}: missing binding {e}")
            continue
        if not ok:
            failures.append(str(f))
    return failures


def _eval_assert(f: Formula, instance: SmtInstance, model: SpatialModel, tol: float) -> bool:
    if isinstance(f, Top):
        return True
    if isinstance(f, Bottom):
        return False
    if isinstance(f, Atom):
        return model.atoms[f]
    if isinstance(f, FnEq):
        actual = model.functions[f.fn]
        if isinstance(f.value, FnTerm):
            return actual == model.functions[f.value]
        return actual == f.value
    if isinstance(f, PolyCmp):
        lhs = _eval_real(f.lhs, model)
        rhs = _eval_real(f.rhs, model)
        exact = isinstance(lhs, Fraction) and isinstance(rhs, Fraction)
        if exact:
            from .spatial import _CMP_FUNCS

            return _CMP_FUNCS[f.op](lhs, rhs)
        a, b = float(lhs), float(rhs)
        if f.op == "=":
            return abs(a - b) <= tol
        if f.op == "!=":
            return abs(a - b) > tol
        if f.op == "<":
            return a < b + tol
        if f.op == "<=":
            return a <= b + tol
        if f.op == ">":
            return a > b - tol
        return a >= b - tol
    if isinstance(f, And):
        return all(_eval_assert(c, instance, model, tol) for c in f.children)
    if isinstance(f, Or):
        return any(_eval_assert(c, instance, model, tol) for c in f.children)
    if isinstance(f, Implies):
        return (not _eval_assert(f.antecedent, instance, model, tol)) or _eval_assert(
            f.consequent, instance, model, tol
        )
    if isinstance(f, Iff):
        return _eval_assert(f.lhs, instance, model, tol) == _eval_assert(f.rhs, instance, model, tol)
    raise EmitError(f"cannot verify {type(f).__name__}")


def _eval_real(t: Term, model: SpatialModel) -> Union[Fraction, float]:
    if isinstance(t, NumTerm):
        return t.value
    if isinstance(t, FnTerm):
        obj = t.args[0]
        step = int(t.args[1].value) if len(t.args) == 2 else None  # type: ignore[union-attr]
        assert isinstance(obj, ObjTerm)
        return model.parameters[(t.name, obj.name, step)]
    if isinstance(t, ArithTerm):
        lhs = _eval_real(t.left, model)
        rhs = _eval_real(t.right, model)
        if isinstance(lhs, Fraction) and isinstance(rhs, Fraction):
            return {"+": lhs + rhs, "-": lhs - rhs, "*": lhs * rhs}[t.op]
        a, b = float(lhs), float(rhs)
        return {"+": a + b, "-": a - b, "*": a * b}[t.op]
    raise EmitError(f"cannot evaluate {t}")


# ---------------------------------------------------------------------------
# Entailment


def check_entailed(
    completed: CompletedTheory,
    query: Formula,
    solver: Optional[list[str]] = None,
    timeout: float = 60.0,
) -> EntailmentResult:
    """base |= query iff base plus the negated query is unsatisfiable."""
    _validate_query(completed.ground, query)
    instance = emit_smtlib(completed, query_asserts=(neg(query),))
    verdict = solve(instance, solver, timeout)
    if verdict.status is Status.UNSAT:
        return EntailmentResult(EntailmentStatus.ENTAILED, verdict)
    if verdict.status is Status.SAT:
        return EntailmentResult(EntailmentStatus.NOT_ENTAILED, verdict)
    return EntailmentResult(EntailmentStatus.UNKNOWN, verdict)


def _validate_query(theory: GroundTheory, query: Formula) -> None:
    from .model import formula_variables

    if formula_variables(query):
        raise ProgramError("query", f"entailment query must be ground: {query}")
    universe = set(theory.atom_universe)
    for g in formula_atoms(query):
        if isinstance(g, Atom):
            if CATALOG.has_relation(g.pred):
                continue
            if g.pred in theory.signature.predicates:
                if g not in universe:
                    raise ProgramError("query", f"atom {g} is outside the ground universe")
                continue
            raise ProgramError("query", f"unknown predicate {g.pred!r} in query")
        if isinstance(g, FnEq):
            if g.fn not in theory.fn_universe:
                raise ProgramError("query", f"functional term {g.fn} is outside the ground universe")
