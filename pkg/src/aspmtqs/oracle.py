"""Brute-force stable-model enumeration over finite domains.

Used as a test oracle for the completion pipeline: on tight theories the
stable models computed here must coincide exactly with the classical
models of the Clark completion.  Real-valued spatial content is out of
scope; theories fed to this module carry propositional atoms and
finite-domain functions only.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Mapping, Optional, Union

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
    Term,
    Top,
)
from .transform import GroundTheory

DEFAULT_SPACE_BOUND = 2**20


class DomainTooLarge(Exception):
    pass


class OracleError(Exception):
    """The theory contains content the finite oracle cannot evaluate."""


@dataclass(frozen=True)
class FiniteInterpretation:
    """Total assignment over the ground intensional signature."""

    atoms: tuple[tuple[Atom, bool], ...]
    functions: tuple[tuple[FnTerm, Term], ...]

    def atom(self, a: Atom) -> bool:
        for key, value in self.atoms:
            if key == a:
                return value
        raise OracleError(f"atom {a} is outside the interpretation")

    def function(self, t: FnTerm) -> Term:
        for key, value in self.functions:
            if key == t:
                return value
        raise OracleError(f"functional term {t} is outside the interpretation")

    def true_atoms(self) -> list[Atom]:
        return [a for a, v in self.atoms if v]

    def __str__(self) -> str:
        parts = [str(a) for a, v in self.atoms if v]
        parts += [f"{t}={v}" for t, v in self.functions]
        return "{" + ", ".join(parts) + "}"


@dataclass(frozen=True)
class ReductContext:
    """Candidate interpretation I and comparison interpretation J (for the
    variable list of the stable-model operator); J agrees with I outside
    the intensional signature."""

    candidate: FiniteInterpretation
    comparison: FiniteInterpretation


def _eval_term(t: Term, interp: FiniteInterpretation) -> Term:
    """Reduce a ground term to a literal (NumTerm or ObjTerm)."""
    if isinstance(t, (NumTerm, ObjTerm)):
        return t
    if isinstance(t, FnTerm):
        return interp.function(t)
    if isinstance(t, ArithTerm):
        left = _eval_term(t.left, interp)
        right = _eval_term(t.right, interp)
        if not isinstance(left, NumTerm) or not isinstance(right, NumTerm):
            raise OracleError(f"non-numeric arithmetic in {t}")
        ops = {"+": left.value + right.value, "-": left.value - right.value, "*": left.value * right.value}
        return NumTerm(ops[t.op])
    raise OracleError(f"cannot evaluate term {t}")


_CMP = {
    "<": lambda a, b: a < b,
    "<=": lambda a, b: a <= b,
    "=": lambda a, b: a == b,
    "!=": lambda a, b: a != b,
    ">=": lambda a, b: a >= b,
    ">": lambda a, b: a > b,
}


def evaluate(f: Formula, interp: FiniteInterpretation) -> bool:
    """Classical truth of a ground finite-domain formula."""
    if isinstance(f, Top):
        return True
    if isinstance(f, Bottom):
        return False
    if isinstance(f, Atom):
        return interp.atom(f)
    if isinstance(f, FnEq):
        return _eval_term(f.fn, interp) == _eval_term(f.value, interp)
    if isinstance(f, PolyCmp):
        lhs, rhs = _eval_term(f.lhs, interp), _eval_term(f.rhs, interp)
        if f.op in ("=", "!="):
            return (lhs == rhs) == (f.op == "=")
        if isinstance(lhs, NumTerm) and isinstance(rhs, NumTerm):
            return _CMP[f.op](lhs.value, rhs.value)
        raise OracleError(f"cannot order non-numeric values in {f}")
    if isinstance(f, And):
        return all(evaluate(c, interp) for c in f.children)
    if isinstance(f, Or):
        return any(evaluate(c, interp) for c in f.children)
    if isinstance(f, Implies):
        return (not evaluate(f.antecedent, interp)) or evaluate(f.consequent, interp)
    if isinstance(f, Iff):
        return evaluate(f.lhs, interp) == evaluate(f.rhs, interp)
    raise OracleError(f"cannot evaluate {type(f).__name__}")


def star_transform(f: Formula, ctx: ReductContext) -> bool:
    """Truth of F*(c-hat) with the function/predicate variables read from
    the comparison interpretation and everything else from the candidate."""
    if isinstance(f, (Top, Bottom)):
        return evaluate(f, ctx.candidate)
    if isinstance(f, (Atom, FnEq, PolyCmp)):
        # atomic case: F' (intensionals from J) conjoined with F (from I)
        return evaluate(f, ctx.comparison) and evaluate(f, ctx.candidate)
    if isinstance(f, And):
        return all(star_transform(c, ctx) for c in f.children)
    if isinstance(f, Or):
        return any(star_transform(c, ctx) for c in f.children)
    if isinstance(f, Implies):
        starred = (not star_transform(f.antecedent, ctx)) or star_transform(f.consequent, ctx)
        return starred and evaluate(f, ctx.candidate)
    raise OracleError(f"reduct of {type(f).__name__} is not defined before completion")


def theory_formula(theory: GroundTheory) -> list[Formula]:
    """The theory as a conjunction of implications body -> head."""
    out: list[Formula] = []
    for rule in theory.rules:
        if isinstance(rule.body, Top):
            out.append(rule.head)
        else:
            out.append(Implies(rule.body, rule.head))
    return out


def _interpretation_space(
    theory: GroundTheory, bound: int
) -> tuple[list[Atom], list[FnTerm], list[tuple[Term, ...]]]:
    atoms = list(theory.atom_universe)
    fns = list(theory.fn_universe)
    domains = [theory.value_domains[t] for t in fns]
    for t, d in zip(fns, domains):
        if len(d) < 2:
            raise OracleError(
                f"value domain of {t} has {len(d)} element(s); the stable-model "
                "equivalence requires at least two"
            )
    size = 2 ** len(atoms)
    for d in domains:
        size *= len(d)
    if size > bound:
        raise DomainTooLarge(f"interpretation space has {size} elements (bound {bound})")
    return atoms, fns, domains


def _interpretations(
    atoms: list[Atom], fns: list[FnTerm], domains: list[tuple[Term, ...]]
) -> Iterator[FiniteInterpretation]:
    # lexicographic over the canonical atom ordering for reproducible failures
    for bits in itertools.product((False, True), repeat=len(atoms)):
        for values in itertools.product(*domains):
            yield FiniteInterpretation(tuple(zip(atoms, bits)), tuple(zip(fns, values)))


def enumerate_stable_models(
    theory: GroundTheory, bound: int = DEFAULT_SPACE_BOUND
) -> list[FiniteInterpretation]:
    """All stable models of the ground theory per the SM operator.

    An interpretation I is stable when it satisfies the theory and no J
    strictly below it on the intensional constants satisfies the reduct
    F*(J).
    """
    atoms, fns, domains = _interpretation_space(theory, bound)
    conjuncts = theory_formula(theory)
    models: list[FiniteInterpretation] = []
    for candidate in _interpretations(atoms, fns, domains):
        if not all(evaluate(c, candidate) for c in conjuncts):
            continue
        truths = dict(candidate.atoms)
        atom_choices = [(False, True) if truths[a] else (False,) for a in atoms]
        defeated = False
        for bits in itertools.product(*atom_choices):
            if defeated:
                break
            for values in itertools.product(*domains):
                comparison = FiniteInterpretation(tuple(zip(atoms, bits)), tuple(zip(fns, values)))
                if comparison == candidate:
                    continue
                ctx = ReductContext(candidate, comparison)
                if all(star_transform(c, ctx) for c in conjuncts):
                    defeated = True
                    break
        if not defeated:
            models.append(candidate)
    return models


def enumerate_classical_models(
    sentences: tuple[Formula, ...], theory: GroundTheory, bound: int = DEFAULT_SPACE_BOUND
) -> list[FiniteInterpretation]:
    """Classical models of a sentence list over the theory's ground signature;
    the brute-force side of the completion cross-check."""
    atoms, fns, domains = _interpretation_space(theory, bound)
    return [
        interp
        for interp in _interpretations(atoms, fns, domains)
        if all(evaluate(s, interp) for s in sentences)
    ]
