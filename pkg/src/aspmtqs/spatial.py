"""Spatial ontology: object kinds, parametric functions, relation catalog.

Every spatial object kind carries named real-valued parameter slots; a
qualitative relation is defined by polynomial equations and inequalities
over the slots of its arguments.  The catalog is immutable after import.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional

from .model import (
    And,
    ArithTerm,
    Atom,
    Bottom,
    FnEq,
    FnTerm,
    Formula,
    Iff,
    Implies,
    NumTerm,
    ObjTerm,
    Or,
    PolyCmp,
    SpatialKind,
    Term,
    Top,
    conj,
    disj,
)


class UnknownRelation(Exception):
    pass


class KindMismatch(Exception):
    pass


class MissingSlot(Exception):
    pass


# ---------------------------------------------------------------------------
# Object kinds and their parameter slots

POINT = SpatialKind("point")
SEGMENT = SpatialKind("segment")
CIRCLE = SpatialKind("circle")
TRIANGLE = SpatialKind("triangle")
EGGYOLK = SpatialKind("eggyolk")
INTERVAL = SpatialKind("interval")
RECTANGLE = SpatialKind("rectangle")


def polygon(n: int) -> SpatialKind:
    return SpatialKind("polygon", n)


_FIXED_SLOTS: dict[str, tuple[str, ...]] = {
    "point": ("x", "y"),
    "segment": ("x1", "y1", "x2", "y2"),
    "circle": ("x", "y", "r"),
    "triangle": ("x1", "y1", "x2", "y2", "x3", "y3"),
    "eggyolk": ("xi", "yi", "ri", "xo", "yo", "ro"),
    "interval": ("lo", "hi"),
    "rectangle": ("xmin", "ymin", "xmax", "ymax"),
}

_VERTEX_SLOT_RE = re.compile(r"^[xy]\d+$")
_ALL_FIXED_SLOT_NAMES = frozenset(n for slots in _FIXED_SLOTS.values() for n in slots)


def kind_slots(kind: SpatialKind) -> tuple[str, ...]:
    if kind.name == "polygon":
        if kind.arity < 3:
            raise ValueError("polygon needs at least three vertices")
        out: list[str] = []
        for i in range(1, kind.arity + 1):
            out.extend((f"x{i}", f"y{i}"))
        return tuple(out)
    try:
        return _FIXED_SLOTS[kind.name]
    except KeyError:
        raise ValueError(f"unknown spatial kind {kind.name!r}") from None


@dataclass(frozen=True)
class SpatialObjectKind:
    """A spatial sort together with its parameter slots."""

    kind: SpatialKind
    slots: tuple[str, ...]


def object_kind(kind: SpatialKind) -> SpatialObjectKind:
    return SpatialObjectKind(kind, kind_slots(kind))


# ---------------------------------------------------------------------------
# Slot access terms


@dataclass(frozen=True)
class ArgRef:
    """A concrete spatial argument: object name, kind, optional step index."""

    obj: str
    kind: SpatialKind
    step: Optional[int] = None

    def p(self, slot: str) -> FnTerm:
        if slot not in kind_slots(self.kind):
            raise MissingSlot(f"{self.kind.display()} object {self.obj!r} has no slot {slot!r}")
        args: tuple[Term, ...] = (ObjTerm(self.obj),)
        if self.step is not None:
            args = (ObjTerm(self.obj), NumTerm(Fraction(self.step)))
        return FnTerm(slot, args)

    def vertex(self, i: int) -> tuple[FnTerm, FnTerm]:
        """1-based vertex accessor for segment/triangle/polygon slots."""
        return self.p(f"x{i}"), self.p(f"y{i}")


def add(a: Term, b: Term) -> Term:
    return ArithTerm("+", a, b)


def sub(a: Term, b: Term) -> Term:
    return ArithTerm("-", a, b)


def mul(a: Term, b: Term) -> Term:
    return ArithTerm("*", a, b)


def sq(a: Term) -> Term:
    return mul(a, a)


def cmp(op: str, a: Term, b: Term) -> PolyCmp:
    return PolyCmp(op, a, b)


def delta(a: ArgRef, b: ArgRef) -> Term:
    """Squared centre distance of two circles."""
    return add(sq(sub(a.p("x"), b.p("x"))), sq(sub(a.p("y"), b.p("y"))))


def cross_from(ox: Term, oy: Term, ax: Term, ay: Term, bx: Term, by: Term) -> Term:
    """z of (a - o) x (b - o); positive iff b is left of the ray o->a."""
    return sub(mul(sub(ax, ox), sub(by, oy)), mul(sub(ay, oy), sub(bx, ox)))


# ---------------------------------------------------------------------------
# Relation schemas

Builder = Callable[..., Formula]


@dataclass(frozen=True)
class EncodedRelation:
    """Instantiated defining constraint plus any auxiliary point objects."""

    formula: Formula
    aux_points: tuple[str, ...] = ()


@dataclass(frozen=True)
class RelationSchema:
    name: str
    arg_kind_names: tuple[str, ...]
    provenance: str  # "table-1" | "paper" | "reconstructed"
    build: Builder
    description: str = ""
    needs_aux: bool = False
    build_eval: Optional[Builder] = None  # aux-free equivalent used by evaluation

    @property
    def arity(self) -> int:
        return len(self.arg_kind_names)

    def signature(self) -> str:
        return f"{self.name}({', '.join(self.arg_kind_names)})"


class AuxAllocator:
    """Allocates auxiliary point objects with deterministic names."""

    def __init__(self, prefix: str):
        self.prefix = prefix
        self.names: list[str] = []

    def point(self) -> ArgRef:
        name = f"{self.prefix}#{len(self.names)}"
        self.names.append(name)
        return ArgRef(name, POINT, None)


# --- RCC-8 / RCC-5 over circles (Table-style rows) -------------------------


def _sum_sq(a: ArgRef, b: ArgRef) -> Term:
    return sq(add(a.p("r"), b.p("r")))


def _diff_sq(a: ArgRef, b: ArgRef) -> Term:
    return sq(sub(a.p("r"), b.p("r")))


def _rcc_C(a, b):
    return cmp("<=", delta(a, b), _sum_sq(a, b))


def _rcc_DR(a, b):
    return cmp(">=", delta(a, b), _sum_sq(a, b))


def _rcc_DC(a, b):
    return cmp(">", delta(a, b), _sum_sq(a, b))


def _rcc_EC(a, b):
    return cmp("=", delta(a, b), _sum_sq(a, b))


def _rcc_O(a, b):
    return cmp("<", delta(a, b), _sum_sq(a, b))


def _rcc_PO(a, b):
    return And((cmp("<", _diff_sq(a, b), delta(a, b)), cmp("<", delta(a, b), _sum_sq(a, b))))


def _rcc_P(a, b):
    return And((cmp("<=", delta(a, b), _diff_sq(a, b)), cmp("<=", a.p("r"), b.p("r"))))


def _rcc_PP(a, b):
    return And((cmp("<=", delta(a, b), _diff_sq(a, b)), cmp("<", a.p("r"), b.p("r"))))


def _rcc_TPP(a, b):
    return And((cmp("=", delta(a, b), _diff_sq(a, b)), cmp("<", a.p("r"), b.p("r"))))


def _rcc_NTPP(a, b):
    return And((cmp("<", delta(a, b), _diff_sq(a, b)), cmp("<", a.p("r"), b.p("r"))))


def _rcc_EQ(a, b):
    return And(
        (
            cmp("=", a.p("x"), b.p("x")),
            cmp("=", a.p("y"), b.p("y")),
            cmp("=", a.p("r"), b.p("r")),
        )
    )


def _concentric(a, b):
    return And((cmp("=", a.p("x"), b.p("x")), cmp("=", a.p("y"), b.p("y"))))


def _swapped(builder: Builder) -> Builder:
    def build(a, b, **kw):
        return builder(b, a, **kw)

    return build


# --- orientation and distance (analytic encodings) -------------------------


def _seg_point_cross(s: ArgRef, p: ArgRef) -> Term:
    (x1, y1), (x2, y2) = s.vertex(1), s.vertex(2)
    return cross_from(x1, y1, x2, y2, p.p("x"), p.p("y"))


def _left_of_seg(p, s):
    return cmp(">", _seg_point_cross(s, p), NumTerm(Fraction(0)))


def _right_of_seg(p, s):
    return cmp("<", _seg_point_cross(s, p), NumTerm(Fraction(0)))


def _collinear_seg(p, s):
    return cmp("=", _seg_point_cross(s, p), NumTerm(Fraction(0)))


def _triple_cross(a: ArgRef, b: ArgRef, c: ArgRef) -> Term:
    # a located w.r.t. the directed segment from b to c
    return cross_from(b.p("x"), b.p("y"), c.p("x"), c.p("y"), a.p("x"), a.p("y"))


def _left_of3(a, b, c):
    return cmp(">", _triple_cross(a, b, c), NumTerm(Fraction(0)))


def _right_of3(a, b, c):
    return cmp("<", _triple_cross(a, b, c), NumTerm(Fraction(0)))


def _collinear3(a, b, c):
    return cmp("=", _triple_cross(a, b, c), NumTerm(Fraction(0)))


def _parallel(s, t):
    (sx1, sy1), (sx2, sy2) = s.vertex(1), s.vertex(2)
    (tx1, ty1), (tx2, ty2) = t.vertex(1), t.vertex(2)
    lhs = mul(sub(sx2, sx1), sub(ty2, ty1))
    rhs = mul(sub(sy2, sy1), sub(tx2, tx1))
    return cmp("=", lhs, rhs)


def _perpendicular(s, t):
    (sx1, sy1), (sx2, sy2) = s.vertex(1), s.vertex(2)
    (tx1, ty1), (tx2, ty2) = t.vertex(1), t.vertex(2)
    dot = add(mul(sub(sx2, sx1), sub(tx2, tx1)), mul(sub(sy2, sy1), sub(ty2, ty1)))
    return cmp("=", dot, NumTerm(Fraction(0)))


def _coincident(p, c):
    d = add(sq(sub(p.p("x"), c.p("x"))), sq(sub(p.p("y"), c.p("y"))))
    return cmp("=", d, sq(c.p("r")))


def _nearer_than(a, b, c):
    da = add(sq(sub(a.p("x"), c.p("x"))), sq(sub(a.p("y"), c.p("y"))))
    db = add(sq(sub(b.p("x"), c.p("x"))), sq(sub(b.p("y"), c.p("y"))))
    return cmp("<", da, db)


# --- LR: point against a directed segment, with degenerate cases -----------


def _lr_parts(s: ArgRef, p: ArgRef) -> tuple[Term, Term, Term]:
    (x1, y1), (x2, y2) = s.vertex(1), s.vertex(2)
    px, py = p.p("x"), p.p("y")
    cross = cross_from(x1, y1, x2, y2, px, py)
    dot = add(mul(sub(x2, x1), sub(px, x1)), mul(sub(y2, y1), sub(py, y1)))
    len2 = add(sq(sub(x2, x1)), sq(sub(y2, y1)))
    return cross, dot, len2


def _lr_left(s, p):
    return cmp(">", _lr_parts(s, p)[0], NumTerm(Fraction(0)))


def _lr_right(s, p):
    return cmp("<", _lr_parts(s, p)[0], NumTerm(Fraction(0)))


def _lr_back(s, p):
    cross, dot, _ = _lr_parts(s, p)
    return And((cmp("=", cross, NumTerm(Fraction(0))), cmp("<", dot, NumTerm(Fraction(0)))))


def _lr_start(s, p):
    (x1, y1), _ = s.vertex(1), s.vertex(2)
    return And((cmp("=", p.p("x"), x1), cmp("=", p.p("y"), y1)))


def _lr_inside(s, p):
    cross, dot, len2 = _lr_parts(s, p)
    zero = NumTerm(Fraction(0))
    return And((cmp("=", cross, zero), cmp(">", dot, zero), cmp("<", dot, len2)))


def _lr_end(s, p):
    _, (x2, y2) = s.vertex(1), s.vertex(2)
    return And((cmp("=", p.p("x"), x2), cmp("=", p.p("y"), y2)))


def _lr_front(s, p):
    cross, dot, len2 = _lr_parts(s, p)
    return And((cmp("=", cross, NumTerm(Fraction(0))), cmp(">", dot, len2)))


# --- Interval Algebra over 1D intervals -------------------------------------

_IA_DEFS: dict[str, Callable[[ArgRef, ArgRef], Formula]] = {
    "Before": lambda i, j: cmp("<", i.p("hi"), j.p("lo")),
    "Meets": lambda i, j: cmp("=", i.p("hi"), j.p("lo")),
    "Overlaps": lambda i, j: And(
        (cmp("<", i.p("lo"), j.p("lo")), cmp("<", j.p("lo"), i.p("hi")), cmp("<", i.p("hi"), j.p("hi")))
    ),
    "Starts": lambda i, j: And((cmp("=", i.p("lo"), j.p("lo")), cmp("<", i.p("hi"), j.p("hi")))),
    "During": lambda i, j: And((cmp("<", j.p("lo"), i.p("lo")), cmp("<", i.p("hi"), j.p("hi")))),
    "Finishes": lambda i, j: And((cmp("=", i.p("hi"), j.p("hi")), cmp("<", j.p("lo"), i.p("lo")))),
    "Equals": lambda i, j: And((cmp("=", i.p("lo"), j.p("lo")), cmp("=", i.p("hi"), j.p("hi")))),
}

_IA_INVERSES = {
    "Before": "After",
    "Meets": "MetBy",
    "Overlaps": "OverlappedBy",
    "Starts": "StartedBy",
    "During": "Contains",
    "Finishes": "FinishedBy",
}


def _ra_builder(axis: str, ia_build: Callable[[ArgRef, ArgRef], Formula]) -> Builder:
    lo_slot = "xmin" if axis == "x" else "ymin"
    hi_slot = "xmax" if axis == "x" else "ymax"

    class _Axis:
        def __init__(self, ref: ArgRef):
            self.ref = ref

        def p(self, slot: str) -> FnTerm:
            return self.ref.p(lo_slot if slot == "lo" else hi_slot)

    def build(a: ArgRef, b: ArgRef) -> Formula:
        return ia_build(_Axis(a), _Axis(b))  # type: ignore[arg-type]

    return build


# --- CDC over points ---------------------------------------------------------


def _cdc(dx: str, dy: str) -> Builder:
    # dx, dy in {"<", "=", ">"}: comparison of p against reference q per axis
    def build(p: ArgRef, q: ArgRef) -> Formula:
        return And((cmp(dx, p.p("x"), q.p("x")), cmp(dy, p.p("y"), q.p("y"))))

    return build


# --- RCC-5 over convex polygons ---------------------------------------------


def _poly_edges(a: ArgRef) -> list[tuple[tuple[Term, Term], tuple[Term, Term]]]:
    n = a.kind.arity
    verts = [a.vertex(i) for i in range(1, n + 1)]
    return [(verts[i], verts[(i + 1) % n]) for i in range(n)]


def _edge_side(edge, px: Term, py: Term) -> Term:
    (ex1, ey1), (ex2, ey2) = edge
    return cross_from(ex1, ey1, ex2, ey2, px, py)


def _poly_contains(a: ArgRef, b: ArgRef) -> Formula:
    # every vertex of a inside every (closed) edge half-plane of b
    parts: list[Formula] = []
    for i in range(1, a.kind.arity + 1):
        vx, vy = a.vertex(i)
        for edge in _poly_edges(b):
            parts.append(cmp(">=", _edge_side(edge, vx, vy), NumTerm(Fraction(0))))
    return conj(parts)


def _poly_not_contains(a: ArgRef, b: ArgRef) -> Formula:
    parts: list[Formula] = []
    for i in range(1, a.kind.arity + 1):
        vx, vy = a.vertex(i)
        for edge in _poly_edges(b):
            parts.append(cmp("<", _edge_side(edge, vx, vy), NumTerm(Fraction(0))))
    return disj(parts)


def _poly_separated(a: ArgRef, b: ArgRef) -> Formula:
    # separating-axis disjunction over both polygons' edges (closed outside)
    cases: list[Formula] = []
    for host, other in ((a, b), (b, a)):
        for edge in _poly_edges(host):
            inner: list[Formula] = []
            for i in range(1, other.kind.arity + 1):
                vx, vy = other.vertex(i)
                inner.append(cmp("<=", _edge_side(edge, vx, vy), NumTerm(Fraction(0))))
            cases.append(conj(inner))
    return disj(cases)


def _poly_interiors_meet(a: ArgRef, b: ArgRef) -> Formula:
    # negation of the separating-axis form; used by the numeric evaluator
    cases: list[Formula] = []
    for host, other in ((a, b), (b, a)):
        for edge in _poly_edges(host):
            inner: list[Formula] = []
            for i in range(1, other.kind.arity + 1):
                vx, vy = other.vertex(i)
                inner.append(cmp(">", _edge_side(edge, vx, vy), NumTerm(Fraction(0))))
            cases.append(disj(inner))
    return conj(cases)


def _poly_strict_inside_point(p: ArgRef, a: ArgRef) -> Formula:
    parts: list[Formula] = []
    for edge in _poly_edges(a):
        parts.append(cmp(">", _edge_side(edge, p.p("x"), p.p("y")), NumTerm(Fraction(0))))
    return conj(parts)


def _rcc5_O(a, b, aux: AuxAllocator):
    p = aux.point()
    return conj([_poly_strict_inside_point(p, a), _poly_strict_inside_point(p, b)])


def _rcc5_O_eval(a, b):
    return _poly_interiors_meet(a, b)


def _rcc5_DR(a, b):
    return _poly_separated(a, b)


def _rcc5_P(a, b):
    return _poly_contains(a, b)


def _rcc5_EQ(a, b):
    return conj([_poly_contains(a, b), _poly_contains(b, a)])


def _rcc5_PP(a, b):
    return conj([_poly_contains(a, b), _poly_not_contains(b, a)])


def _rcc5_PO(a, b, aux: AuxAllocator):
    return conj([_rcc5_O(a, b, aux), _poly_not_contains(a, b), _poly_not_contains(b, a)])


def _rcc5_PO_eval(a, b):
    return conj([_poly_interiors_meet(a, b), _poly_not_contains(a, b), _poly_not_contains(b, a)])


# ---------------------------------------------------------------------------
# The catalog


class RelationCatalog:
    """Immutable registry of qualitative relations keyed by name and kinds."""

    def __init__(self) -> None:
        self._schemas: dict[str, list[RelationSchema]] = {}
        self._register_all()

    def _add(
        self,
        name: str,
        kinds: tuple[str, ...],
        provenance: str,
        build: Builder,
        description: str = "",
        needs_aux: bool = False,
        build_eval: Optional[Builder] = None,
    ) -> None:
        schema = RelationSchema(name, kinds, provenance, build, description, needs_aux, build_eval)
        self._schemas.setdefault(name, []).append(schema)

    def _register_all(self) -> None:
        cc = ("circle", "circle")
        rcc_rows = [
            ("rccC", _rcc_C, "contact"),
            ("rccDR", _rcc_DR, "discrete from"),
            ("rccDC", _rcc_DC, "disconnected"),
            ("rccEC", _rcc_EC, "externally connected"),
            ("rccO", _rcc_O, "overlaps"),
            ("rccPO", _rcc_PO, "partially overlaps"),
            ("rccP", _rcc_P, "part of"),
            ("rccPP", _rcc_PP, "proper part of"),
            ("rccTPP", _rcc_TPP, "tangential proper part"),
            ("rccNTPP", _rcc_NTPP, "nontangential proper part"),
            ("rccEQ", _rcc_EQ, "equal"),
        ]
        for name, build, desc in rcc_rows:
            self._add(name, cc, "table-1", build, desc)
        for base, inv in (("rccP", "rccPi"), ("rccPP", "rccPPi"), ("rccTPP", "rccTPPi"), ("rccNTPP", "rccNTPPi")):
            build = dict((n, b) for n, b, _ in rcc_rows)[base]
            self._add(inv, cc, "table-1", _swapped(build), f"inverse of {base}")
        self._add("concentric", cc, "paper", _concentric, "equal centre points")

        self._add("leftOf", ("point", "segment"), "paper", _left_of_seg, "point left of directed segment")
        self._add("rightOf", ("point", "segment"), "paper", _right_of_seg, "point right of directed segment")
        self._add("collinear", ("point", "segment"), "paper", _collinear_seg, "point on the segment's line")
        for name, build in (("leftOf", _left_of3), ("rightOf", _right_of3), ("collinear", _collinear3)):
            self._add(name, ("point", "point", "point"), "paper", build, "first point against directed pair")
            self._add(name, ("circle", "circle", "circle"), "paper", build, "first centre against directed centre pair")
        self._add("parallel", ("segment", "segment"), "paper", _parallel, "direction cross product zero")
        self._add("perpendicular", ("segment", "segment"), "paper", _perpendicular, "direction dot product zero")
        self._add("coincident", ("point", "circle"), "paper", _coincident, "point on the circle")
        self._add("nearerThan", ("point", "point", "point"), "paper", _nearer_than, "first nearer than second to reference")

        sp = ("segment", "point")
        for name, build, desc in (
            ("lrLeft", _lr_left, "point left of the directed segment"),
            ("lrRight", _lr_right, "point right of the directed segment"),
            ("lrBack", _lr_back, "on the line, behind the start"),
            ("lrStart", _lr_start, "coincides with the start point"),
            ("lrInside", _lr_inside, "strictly between the endpoints"),
            ("lrEnd", _lr_end, "coincides with the end point"),
            ("lrFront", _lr_front, "on the line, beyond the end"),
        ):
            self._add(name, sp, "reconstructed", build, desc)

        ii = ("interval", "interval")
        for base, build in _IA_DEFS.items():
            self._add(f"ia{base}", ii, "reconstructed", build)
            if base in _IA_INVERSES:
                self._add(f"ia{_IA_INVERSES[base]}", ii, "reconstructed", _swapped(build))

        rr = ("rectangle", "rectangle")
        for axis in ("x", "y"):
            for base, build in _IA_DEFS.items():
                self._add(f"ra{axis}{base}", rr, "reconstructed", _ra_builder(axis, build))
                if base in _IA_INVERSES:
                    self._add(
                        f"ra{axis}{_IA_INVERSES[base]}",
                        rr,
                        "reconstructed",
                        _swapped(_ra_builder(axis, build)),
                    )

        pp = ("point", "point")
        for name, dx, dy in (
            ("cdcN", "=", ">"),
            ("cdcNE", ">", ">"),
            ("cdcE", ">", "="),
            ("cdcSE", ">", "<"),
            ("cdcS", "=", "<"),
            ("cdcSW", "<", "<"),
            ("cdcW", "<", "="),
            ("cdcNW", "<", ">"),
            ("cdcEQ", "=", "="),
        ):
            self._add(name, pp, "reconstructed", _cdc(dx, dy), "cardinal direction of first against second")

        gg = ("polygon", "polygon")
        self._add("rcc5DR", gg, "reconstructed", _rcc5_DR, "separating axis over both edge sets")
        self._add("rcc5O", gg, "reconstructed", _rcc5_O, "common interior point", needs_aux=True, build_eval=_rcc5_O_eval)
        self._add("rcc5P", gg, "reconstructed", _rcc5_P, "vertexwise half-plane containment")
        self._add("rcc5Pi", gg, "reconstructed", _swapped(_rcc5_P), "inverse of rcc5P")
        self._add("rcc5EQ", gg, "reconstructed", _rcc5_EQ, "mutual containment")
        self._add("rcc5PP", gg, "reconstructed", _rcc5_PP, "contained and not containing")
        self._add("rcc5PPi", gg, "reconstructed", _swapped(_rcc5_PP), "inverse of rcc5PP")
        self._add("rcc5PO", gg, "reconstructed", _rcc5_PO, "overlap without containment", needs_aux=True, build_eval=_rcc5_PO_eval)

    # -- queries ------------------------------------------------------------

    def has_relation(self, name: str) -> bool:
        return name in self._schemas

    def lookup(self, name: str, arg_kinds: tuple[SpatialKind, ...]) -> Optional[RelationSchema]:
        for schema in self._schemas.get(name, ()):
            if len(schema.arg_kind_names) != len(arg_kinds):
                continue
            if all(k.name == want for k, want in zip(arg_kinds, schema.arg_kind_names)):
                return schema
        return None

    def schemas(self) -> list[RelationSchema]:
        out = [s for group in self._schemas.values() for s in group]
        return sorted(out, key=lambda s: (s.name, s.arg_kind_names))

    def is_parameter_name(self, name: str) -> bool:
        return name in _ALL_FIXED_SLOT_NAMES or bool(_VERTEX_SLOT_RE.match(name))

    def kind_has_parameter(self, kind: SpatialKind, name: str) -> bool:
        try:
            return name in kind_slots(kind)
        except ValueError:
            return False


CATALOG = RelationCatalog()


# ---------------------------------------------------------------------------
# Domain axioms


def domain_axioms(obj: str, kind: SpatialKind, step: Optional[int] = None) -> list[Formula]:
    """Well-formedness constraints for one declared spatial object."""
    a = ArgRef(obj, kind, step)
    zero = NumTerm(Fraction(0))
    if kind.name == "point":
        return []
    if kind.name == "circle":
        return [cmp(">", a.p("r"), zero)]
    if kind.name == "segment":
        (x1, y1), (x2, y2) = a.vertex(1), a.vertex(2)
        return [cmp(">", add(sq(sub(x1, x2)), sq(sub(y1, y2))), zero)]
    if kind.name == "triangle":
        (x1, y1), (x2, y2), (x3, y3) = a.vertex(1), a.vertex(2), a.vertex(3)
        return [cmp(">", cross_from(x1, y1, x2, y2, x3, y3), zero)]
    if kind.name == "polygon":
        out: list[Formula] = []
        n = kind.arity
        for i in range(1, n + 1):
            for j in range(i + 1, n + 1):
                for k in range(j + 1, n + 1):
                    (xi, yi), (xj, yj), (xk, yk) = a.vertex(i), a.vertex(j), a.vertex(k)
                    out.append(cmp(">", cross_from(xi, yi, xj, yj, xk, yk), zero))
        return out
    if kind.name == "eggyolk":
        inner_sq = sq(sub(a.p("ri"), a.p("ro")))
        d = add(sq(sub(a.p("xi"), a.p("xo"))), sq(sub(a.p("yi"), a.p("yo"))))
        return [
            cmp(">", a.p("ri"), zero),
            cmp(">", a.p("ro"), zero),
            cmp("<=", d, inner_sq),
            cmp("<", a.p("ri"), a.p("ro")),
        ]
    if kind.name == "interval":
        return [cmp("<", a.p("lo"), a.p("hi"))]
    if kind.name == "rectangle":
        return [cmp("<", a.p("xmin"), a.p("xmax")), cmp("<", a.p("ymin"), a.p("ymax"))]
    raise ValueError(f"unknown spatial kind {kind.name!r}")


# ---------------------------------------------------------------------------
# Encoding and evaluation


def encode_relation(name: str, args: tuple[ArgRef, ...], atom_token: str = "") -> EncodedRelation:
    """Instantiate a catalog relation for concrete arguments.

    ``atom_token`` seeds deterministic names for auxiliary points.
    """
    schema = CATALOG.lookup(name, tuple(a.kind for a in args))
    if schema is None:
        if not CATALOG.has_relation(name):
            raise UnknownRelation(name)
        kinds = ", ".join(a.kind.display() for a in args)
        raise KindMismatch(f"{name} is not defined for argument kinds ({kinds})")
    if schema.needs_aux:
        aux = AuxAllocator(atom_token or f"{name}_" + "_".join(a.obj for a in args))
        formula = schema.build(*args, aux=aux)
        return EncodedRelation(formula, tuple(aux.names))
    return EncodedRelation(schema.build(*args))


ParamKey = tuple[str, str, Optional[int]]  # (function, object, step)


def eval_term(t: Term, assignment: dict[ParamKey, Fraction]) -> Fraction:
    if isinstance(t, NumTerm):
        return t.value
    if isinstance(t, FnTerm):
        obj = t.args[0]
        step: Optional[int] = None
        if len(t.args) == 2:
            second = t.args[1]
            if not isinstance(second, NumTerm):
                raise MissingSlot(f"non-ground step in {t}")
            step = int(second.value)
        if not isinstance(obj, ObjTerm):
            raise MissingSlot(f"non-ground object in {t}")
        key = (t.name, obj.name, step)
        if key not in assignment:
            raise MissingSlot(f"no value for {t}")
        return assignment[key]
    if isinstance(t, ArithTerm):
        lv = eval_term(t.left, assignment)
        rv = eval_term(t.right, assignment)
        if t.op == "+":
            return lv + rv
        if t.op == "-":
            return lv - rv
        return lv * rv
    raise MissingSlot(f"cannot evaluate term {t}")


_CMP_FUNCS = {
    "<": lambda a, b: a < b,
    "<=": lambda a, b: a <= b,
    "=": lambda a, b: a == b,
    "!=": lambda a, b: a != b,
    ">=": lambda a, b: a >= b,
    ">": lambda a, b: a > b,
}


def eval_poly_formula(f: Formula, assignment: dict[ParamKey, Fraction]) -> bool:
    """Exact rational evaluation of a polynomial-constraint formula."""
    if isinstance(f, Top):
        return True
    if isinstance(f, Bottom):
        return False
    if isinstance(f, PolyCmp):
        return _CMP_FUNCS[f.op](eval_term(f.lhs, assignment), eval_term(f.rhs, assignment))
    if isinstance(f, And):
        return all(eval_poly_formula(c, assignment) for c in f.children)
    if isinstance(f, Or):
        return any(eval_poly_formula(c, assignment) for c in f.children)
    if isinstance(f, Implies):
        return (not eval_poly_formula(f.antecedent, assignment)) or eval_poly_formula(
            f.consequent, assignment
        )
    if isinstance(f, Iff):
        return eval_poly_formula(f.lhs, assignment) == eval_poly_formula(f.rhs, assignment)
    raise MissingSlot(f"cannot numerically evaluate {type(f).__name__}")


def evaluate_relation(
    name: str, args: tuple[ArgRef, ...], assignment: dict[ParamKey, Fraction]
) -> bool:
    """Exact truth of a ground relation atom under a full slot assignment."""
    schema = CATALOG.lookup(name, tuple(a.kind for a in args))
    if schema is None:
        if not CATALOG.has_relation(name):
            raise UnknownRelation(name)
        kinds = ", ".join(a.kind.display() for a in args)
        raise KindMismatch(f"{name} is not defined for argument kinds ({kinds})")
    build = schema.build_eval if schema.build_eval is not None else schema.build
    return eval_poly_formula(build(*args), assignment)
