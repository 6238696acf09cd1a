"""Typed variable-based terms: signatures, contexts, statements, rewrites.

A term is a chain of sampling and observation statements ending in a
return statement.  Sampling binds fresh output variables; observation
constrains two variables of equal type (the core form) or an arbitrary
predicate over the scope (the evaluator-only form, which the algebraic
operations reject).
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Iterator, Mapping, Union

from .errors import (
    NonFreshOutput,
    NotApplicable,
    TypeMismatch,
    UnboundVariable,
    UnknownGenerator,
)
from .subdist import Outcome, render_outcome

TypeName = str
Var = str
Context = tuple[tuple[Var, TypeName], ...]


@dataclass(frozen=True)
class Generator:
    """A named primitive channel symbol with typed input and output lists."""

    name: str
    inputs: tuple[TypeName, ...]
    outputs: tuple[TypeName, ...]


@dataclass(frozen=True)
class Signature:
    types: frozenset[TypeName]
    generators: Mapping[str, Generator] = field(default_factory=dict)

    def __post_init__(self):
        for gen in self.generators.values():
            for t in gen.inputs + gen.outputs:
                if t not in self.types:
                    raise UnknownGenerator(f"generator {gen.name} uses undeclared type {t}")

    def generator(self, name: str) -> Generator:
        try:
            return self.generators[name]
        except KeyError:
            raise UnknownGenerator(f"no generator named {name}") from None


# -- predicates for evaluator-level observes ------------------------------

@dataclass(frozen=True)
class PVar:
    name: Var


@dataclass(frozen=True)
class PLit:
    value: Outcome
    type: TypeName


Operand = Union[PVar, PLit]


@dataclass(frozen=True)
class PEq:
    left: Operand
    right: Operand


@dataclass(frozen=True)
class PNe:
    left: Operand
    right: Operand


@dataclass(frozen=True)
class PIn:
    element: PLit
    var: PVar


@dataclass(frozen=True)
class PAnd:
    left: "Pred"
    right: "Pred"


@dataclass(frozen=True)
class PTrue:
    pass


Pred = Union[PEq, PNe, PIn, PAnd, PTrue]


def pred_vars(p: Pred) -> set[Var]:
    if isinstance(p, (PEq, PNe)):
        return {o.name for o in (p.left, p.right) if isinstance(o, PVar)}
    if isinstance(p, PIn):
        return {p.var.name}
    if isinstance(p, PAnd):
        return pred_vars(p.left) | pred_vars(p.right)
    return set()


def render_pred(p: Pred) -> str:
    def operand(o: Operand) -> str:
        return o.name if isinstance(o, PVar) else render_outcome(o.value)

    if isinstance(p, PEq):
        return f"{operand(p.left)} = {operand(p.right)}"
    if isinstance(p, PNe):
        return f"{operand(p.left)} != {operand(p.right)}"
    if isinstance(p, PIn):
        return f"{render_outcome(p.element.value)} IN {p.var.name}"
    if isinstance(p, PAnd):
        return f"{render_pred(p.left)} AND {render_pred(p.right)}"
    return "TRUE"


# -- term nodes ------------------------------------------------------------

@dataclass(frozen=True)
class Return:
    vars: tuple[Var, ...]


@dataclass(frozen=True)
class Observe:
    left: Var
    right: Var
    cont: "Term"


@dataclass(frozen=True)
class ObservePred:
    """Evaluator-only observe over an arbitrary predicate (non-core)."""

    pred: Pred
    cont: "Term"


@dataclass(frozen=True)
class Sample:
    gen: Generator
    args: tuple[Var, ...]
    outs: tuple[Var, ...]
    cont: "Term"


Term = Union[Return, Observe, ObservePred, Sample]


def statements(t: Term) -> tuple[list[Term], Return]:
    """Split a term into its statement heads and the final return."""
    heads = []
    while not isinstance(t, Return):
        heads.append(t)
        t = t.cont
    return heads, t


def from_statements(heads: list[Term], ret: Return) -> Term:
    t: Term = ret
    for h in reversed(heads):
        t = replace(h, cont=t)
    return t


def render_statement(node: Term) -> str:
    """Canonical one-line text of a single statement."""
    if isinstance(node, Return):
        return f"RETURN({', '.join(node.vars)})"
    if isinstance(node, Observe):
        return f"OBSERVE({node.left} = {node.right})"
    if isinstance(node, ObservePred):
        return f"OBSERVE({render_pred(node.pred)})"
    return f"{', '.join(node.outs)} <- {node.gen.name}({', '.join(node.args)})"


def is_core(t: Term) -> bool:
    """True when the term uses only equality observes."""
    heads, _ = statements(t)
    return not any(isinstance(h, ObservePred) for h in heads)


# -- typechecking ------------------------------------------------------------

@dataclass(frozen=True)
class TypedTerm:
    """A term together with the signature, context, and output type list
    certifying it."""

    sig: Signature
    ctx: Context
    term: Term
    out_types: tuple[TypeName, ...]


def _check_operand(o: Operand, scope: dict[Var, TypeName]) -> TypeName:
    if isinstance(o, PVar):
        if o.name not in scope:
            raise UnboundVariable(f"variable {o.name} not in scope")
        return scope[o.name]
    return o.type


def _check_pred(p: Pred, scope: dict[Var, TypeName]) -> None:
    if isinstance(p, (PEq, PNe)):
        lt = _check_operand(p.left, scope)
        rt = _check_operand(p.right, scope)
        if lt != rt:
            raise TypeMismatch(f"comparison between {lt} and {rt} in OBSERVE({render_pred(p)})")
    elif isinstance(p, PIn):
        _check_operand(p.var, scope)
    elif isinstance(p, PAnd):
        _check_pred(p.left, scope)
        _check_pred(p.right, scope)


def typecheck(sig: Signature, ctx: Context, t: Term) -> TypedTerm:
    """Accept exactly the derivable terms; return the certified term.

    Raises UnboundVariable, TypeMismatch, NonFreshOutput, or
    UnknownGenerator, naming the offending statement.
    """
    scope: dict[Var, TypeName] = {}
    for name, tname in ctx:
        if name in scope:
            raise NonFreshOutput(f"duplicate context variable {name}")
        if tname not in sig.types:
            raise UnknownGenerator(f"context uses undeclared type {tname}")
        scope[name] = tname

    def check(node: Term, scope: dict[Var, TypeName]) -> tuple[TypeName, ...]:
        where = render_statement(node)
        if isinstance(node, Return):
            out = []
            for v in node.vars:
                if v not in scope:
                    raise UnboundVariable(f"variable {v} not in scope in {where}")
                out.append(scope[v])
            return tuple(out)
        if isinstance(node, Observe):
            for v in (node.left, node.right):
                if v not in scope:
                    raise UnboundVariable(f"variable {v} not in scope in {where}")
            if scope[node.left] != scope[node.right]:
                raise TypeMismatch(
                    f"OBSERVE needs equal types, got {scope[node.left]} and "
                    f"{scope[node.right]} in {where}"
                )
            return check(node.cont, scope)
        if isinstance(node, ObservePred):
            _check_pred(node.pred, scope)
            return check(node.cont, scope)
        if isinstance(node, Sample):
            declared = sig.generators.get(node.gen.name)
            if declared is None or declared != node.gen:
                raise UnknownGenerator(f"generator {node.gen.name} not in signature in {where}")
            if len(node.args) != len(node.gen.inputs):
                raise TypeMismatch(f"arity mismatch in {where}")
            for v, expected in zip(node.args, node.gen.inputs):
                if v not in scope:
                    raise UnboundVariable(f"variable {v} not in scope in {where}")
                if scope[v] != expected:
                    raise TypeMismatch(f"argument {v}: {scope[v]} is not {expected} in {where}")
            if len(node.outs) != len(node.gen.outputs):
                raise TypeMismatch(f"output arity mismatch in {where}")
            extended = dict(scope)
            for v, tname in zip(node.outs, node.gen.outputs):
                if v in extended:
                    raise NonFreshOutput(f"output {v} shadows an existing variable in {where}")
                extended[v] = tname
            return check(node.cont, extended)
        raise TypeMismatch(f"not a term node: {node!r}")

    return TypedTerm(sig, ctx, t, check(t, scope))


# -- alpha equivalence ---------------------------------------------------------


def alpha_eq(t1: Term, t2: Term, ctx1: Context | None = None, ctx2: Context | None = None) -> bool:
    """Equality up to consistent renaming of sampling-bound variables.

    Without contexts, free variables must match literally.  When both
    contexts are given they are aligned positionally, so terms over
    differently named but equally typed contexts can be compared.
    """

    def resolve(v: Var, bound: dict[Var, int]):
        return bound.get(v, v)

    def pred_resolved(p: Pred, bound: dict[Var, int]):
        if isinstance(p, (PEq, PNe)):
            conv = lambda o: resolve(o.name, bound) if isinstance(o, PVar) else ("lit", o.value, o.type)
            return (type(p).__name__, conv(p.left), conv(p.right))
        if isinstance(p, PIn):
            return ("PIn", p.element.value, p.element.type, resolve(p.var.name, bound))
        if isinstance(p, PAnd):
            return ("PAnd", pred_resolved(p.left, bound), pred_resolved(p.right, bound))
        return ("PTrue",)

    def walk(a: Term, b: Term, ba: dict[Var, int], bb: dict[Var, int], depth: int) -> bool:
        if type(a) is not type(b):
            return False
        if isinstance(a, Return):
            return [resolve(v, ba) for v in a.vars] == [resolve(v, bb) for v in b.vars]
        if isinstance(a, Observe):
            return (
                resolve(a.left, ba) == resolve(b.left, bb)
                and resolve(a.right, ba) == resolve(b.right, bb)
                and walk(a.cont, b.cont, ba, bb, depth)
            )
        if isinstance(a, ObservePred):
            return pred_resolved(a.pred, ba) == pred_resolved(b.pred, bb) and walk(
                a.cont, b.cont, ba, bb, depth
            )
        if isinstance(a, Sample):
            if a.gen != b.gen or len(a.outs) != len(b.outs):
                return False
            if [resolve(v, ba) for v in a.args] != [resolve(v, bb) for v in b.args]:
                return False
            na = dict(ba)
            nb = dict(bb)
            for i, (va, vb) in enumerate(zip(a.outs, b.outs)):
                na[va] = depth + i
                nb[vb] = depth + i
            return walk(a.cont, b.cont, na, nb, depth + len(a.outs))
        return False

    seed1: dict[Var, int] = {}
    seed2: dict[Var, int] = {}
    depth = 0
    if ctx1 is not None and ctx2 is not None:
        if tuple(t for _, t in ctx1) != tuple(t for _, t in ctx2):
            return False
        for i, ((v1, _), (v2, _)) in enumerate(zip(ctx1, ctx2)):
            seed1[v1] = -(i + 1)
            seed2[v2] = -(i + 1)
    return walk(t1, t2, seed1, seed2, depth)


# -- substitution -----------------------------------------------------------------


def substitute(t: Term, x: Var, u: Var, ctx: Context | None = None) -> Term:
    """Replace the context variable x by u everywhere it is consumed.

    Return statements substitute every variable, observe statements both
    sides, sampling statements their arguments; bound outputs are never
    touched.  When a context is supplied, x and u must have the same type.
    """
    if ctx is not None:
        types = dict(ctx)
        if x not in types or u not in types:
            raise UnboundVariable(f"{x} or {u} not in the ambient context")
        if types[x] != types[u]:
            raise TypeMismatch(f"cannot substitute {types[x]} {x} by {types[u]} {u}")

    def sub(v: Var) -> Var:
        return u if v == x else v

    def sub_operand(o: Operand) -> Operand:
        return PVar(sub(o.name)) if isinstance(o, PVar) else o

    def sub_pred(p: Pred) -> Pred:
        if isinstance(p, PEq):
            return PEq(sub_operand(p.left), sub_operand(p.right))
        if isinstance(p, PNe):
            return PNe(sub_operand(p.left), sub_operand(p.right))
        if isinstance(p, PIn):
            return PIn(p.element, PVar(sub(p.var.name)))
        if isinstance(p, PAnd):
            return PAnd(sub_pred(p.left), sub_pred(p.right))
        return p

    def walk(node: Term) -> Term:
        if isinstance(node, Return):
            return Return(tuple(sub(v) for v in node.vars))
        if isinstance(node, Observe):
            return Observe(sub(node.left), sub(node.right), walk(node.cont))
        if isinstance(node, ObservePred):
            return ObservePred(sub_pred(node.pred), walk(node.cont))
        return Sample(node.gen, tuple(sub(v) for v in node.args), node.outs, walk(node.cont))

    return walk(t)


# -- axiom rewrites ------------------------------------------------------------------

AXIOM_IDS = ("1a", "1b", "1c", "2", "3", "4")


def axiom_step(t: Term, which: str, position: int, direction: str = "fwd") -> Term:
    """Apply one named axiom at a statement position (0-based from the head).

    Directions read the axiom left-to-right (``fwd``) or right-to-left
    (``bwd``).  Raises NotApplicable when the statement shapes or side
    conditions do not match.
    """
    if which not in AXIOM_IDS:
        raise NotApplicable(f"unknown axiom {which!r}")
    if direction not in ("fwd", "bwd"):
        raise NotApplicable(f"unknown direction {direction!r}")
    heads, ret = statements(t)
    if not 0 <= position < len(heads):
        raise NotApplicable(f"no statement at position {position}")

    def need(cond: bool, why: str):
        if not cond:
            raise NotApplicable(why)

    node = heads[position]

    if which == "1a":
        need(position + 1 < len(heads), "needs two adjacent statements")
        first, second = heads[position], heads[position + 1]
        need(isinstance(first, Sample) and isinstance(second, Sample), "needs two sampling statements")
        need(not set(first.outs) & set(second.args), "second statement consumes the first's output")
        need(not set(second.outs) & set(first.args), "first statement consumes the second's output")
        heads = heads[:position] + [second, first] + heads[position + 2 :]
        return from_statements(heads, ret)

    if which == "1b":
        need(position + 1 < len(heads), "needs two adjacent statements")
        first, second = heads[position], heads[position + 1]
        if direction == "fwd":
            need(isinstance(first, Sample) and isinstance(second, Observe),
                 "needs sampling then observe")
            need(not {second.left, second.right} & set(first.outs),
                 "observe mentions the sampled outputs")
        else:
            need(isinstance(first, Observe) and isinstance(second, Sample),
                 "needs observe then sampling")
            need(not {first.left, first.right} & set(second.outs),
                 "observe mentions the sampled outputs")
        heads = heads[:position] + [second, first] + heads[position + 2 :]
        return from_statements(heads, ret)

    if which == "1c":
        need(position + 1 < len(heads), "needs two adjacent statements")
        first, second = heads[position], heads[position + 1]
        need(isinstance(first, Observe) and isinstance(second, Observe),
             "needs two observe statements")
        heads = heads[:position] + [second, first] + heads[position + 2 :]
        return from_statements(heads, ret)

    if which == "2":
        need(isinstance(node, Observe), "needs an observe statement")
        heads = heads[:position] + [replace(node, left=node.right, right=node.left)] + heads[position + 1 :]
        return from_statements(heads, ret)

    if which == "3":
        need(isinstance(node, Observe), "needs an observe statement")
        rest = from_statements(heads[position + 1 :], ret)
        if direction == "fwd":
            rest = substitute(rest, node.left, node.right)
        else:
            # mirrored substitution; sound by composing with the symmetry axiom
            rest = substitute(rest, node.right, node.left)
        rest_heads, rest_ret = statements(rest)
        return from_statements(heads[: position + 1] + rest_heads, rest_ret)

    # which == "4"
    need(direction == "fwd", "inserting a self-observation needs a variable choice")
    need(isinstance(node, Observe), "needs an observe statement")
    need(node.left == node.right, "observe is not of the form x = x")
    heads = heads[:position] + heads[position + 1 :]
    return from_statements(heads, ret)


def applicable_steps(t: Term) -> Iterator[tuple[str, int, str]]:
    """Enumerate every (axiom, position, direction) that rewrites the term."""
    heads, _ = statements(t)
    for pos in range(len(heads)):
        for which in AXIOM_IDS:
            for direction in ("fwd", "bwd"):
                if which in ("1a", "1c", "2") and direction == "bwd":
                    continue  # same rewrite as fwd
                try:
                    axiom_step(t, which, pos, direction)
                except NotApplicable:
                    continue
                yield which, pos, direction


def fresh_name(base: str, used: set[str]) -> str:
    if base not in used:
        return base
    i = 2
    while f"{base}{i}" in used:
        i += 1
    return f"{base}{i}"
