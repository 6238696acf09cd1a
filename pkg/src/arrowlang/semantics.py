"""Evaluation of terms into subdistributions.

An interpretation assigns a finite carrier to each type and a
substochastic kernel row to every generator input.  Terms then denote
channels; closed programs evaluate line by line into a trace whose
state is the joint subdistribution over all variables introduced so
far, exactly as the worked puzzles compute it.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from typing import Mapping

from .combinator import CObs, CombTerm, CRet
from .errors import CarrierMismatch, PredicateTypeError, ZeroMassState
from .subdist import FAILURE, Outcome, Subdist, dirac, rescale, restrict, zero
from .syntax import (
    Generator,
    Observe,
    ObservePred,
    PAnd,
    PEq,
    PIn,
    PNe,
    Pred,
    PTrue,
    PVar,
    Return,
    Sample,
    Signature,
    Term,
    TypedTerm,
    TypeName,
    render_statement,
)

KernelTable = Mapping[tuple, Subdist]


@dataclass(frozen=True)
class Interpretation:
    """Carriers per type plus one substochastic kernel row per generator input."""

    carriers: Mapping[TypeName, tuple[Outcome, ...]]
    kernels: Mapping[str, KernelTable]

    def carrier(self, t: TypeName) -> tuple[Outcome, ...]:
        try:
            return self.carriers[t]
        except KeyError:
            raise CarrierMismatch(f"no carrier for type {t}") from None

    def kernel_row(self, gen: Generator, args: tuple) -> Subdist:
        table = self.kernels.get(gen.name)
        if table is None:
            raise CarrierMismatch(f"no kernel for generator {gen.name}")
        try:
            return table[args]
        except KeyError:
            raise CarrierMismatch(f"kernel {gen.name} undefined on {args!r}") from None

    def validate(self, sig: Signature) -> None:
        """Check carriers are nonempty and kernels are total and substochastic."""
        for t in sig.types:
            if not self.carrier(t):
                raise CarrierMismatch(f"empty carrier for type {t}")
        for gen in sig.generators.values():
            if gen.name not in self.kernels:
                raise CarrierMismatch(f"no kernel for generator {gen.name}")
            table = self.kernels[gen.name]
            out_space = set(product(*(self.carrier(t) for t in gen.outputs)))
            for args in product(*(self.carrier(t) for t in gen.inputs)):
                row = table.get(args)
                if row is None:
                    raise CarrierMismatch(f"kernel {gen.name} undefined on {args!r}")
                for x, _ in row.items():
                    if outs_tuple(x, len(gen.outputs)) not in out_space:
                        raise CarrierMismatch(
                            f"kernel {gen.name} emits {x!r} outside its output carrier"
                        )


def collapse_values(values: tuple) -> Outcome:
    return values[0] if len(values) == 1 else values


def joint_values(joint: Outcome, n: int) -> tuple:
    """Inverse of collapse_values for a joint outcome over n variables."""
    if n == 1:
        return (joint,)
    return joint if isinstance(joint, tuple) else (joint,)


def outs_tuple(out_val: Outcome, arity: int) -> tuple:
    if arity == 1:
        return (out_val,)
    if arity == 0:
        return ()
    return out_val  # type: ignore[return-value]


def pred_holds(p: Pred, env: Mapping[str, Outcome]) -> bool:
    """Evaluate a predicate in a variable environment."""

    def value(operand) -> Outcome:
        if isinstance(operand, PVar):
            try:
                return env[operand.name]
            except KeyError:
                raise PredicateTypeError(f"variable {operand.name} not in scope") from None
        return operand.value

    if isinstance(p, PEq):
        return value(p.left) == value(p.right)
    if isinstance(p, PNe):
        return value(p.left) != value(p.right)
    if isinstance(p, PIn):
        container = value(p.var)
        if not isinstance(container, frozenset):
            raise PredicateTypeError(f"{p.var.name} is not set-valued")
        return p.element.value in container
    if isinstance(p, PAnd):
        return pred_holds(p.left, env) and pred_holds(p.right, env)
    if isinstance(p, PTrue):
        return True
    raise PredicateTypeError(f"not a predicate: {p!r}")


def interpret(tt: TypedTerm, interp: Interpretation, v: tuple = ()) -> Subdist:
    """Denotation of a typed term at one input vector.

    Return yields the reindexed point mass; a sampling statement pushes
    the kernel row through the continuation by Kleisli extension; an
    observe keeps or zeroes the branch.
    """
    if len(v) != len(tt.ctx):
        raise CarrierMismatch(f"input arity {len(v)} != context length {len(tt.ctx)}")
    for (name, tname), val in zip(tt.ctx, v):
        if val not in interp.carrier(tname):
            raise CarrierMismatch(f"{val!r} outside carrier of {tname} (variable {name})")

    def walk(node: Term, env: dict[str, Outcome]) -> Subdist:
        if isinstance(node, Return):
            return dirac(collapse_values(tuple(env[x] for x in node.vars)))
        if isinstance(node, Observe):
            if env[node.left] == env[node.right]:
                return walk(node.cont, env)
            return zero()
        if isinstance(node, ObservePred):
            if pred_holds(node.pred, env):
                return walk(node.cont, env)
            return zero()
        # sampling: sum the kernel row through the continuation
        row = interp.kernel_row(node.gen, tuple(env[x] for x in node.args))
        acc = zero()
        for out_val, w in row.items():
            extended = dict(env)
            for name, val in zip(node.outs, outs_tuple(out_val, len(node.outs))):
                extended[name] = val
            acc = acc + w * walk(node.cont, extended)
        return acc

    env = {name: val for (name, _), val in zip(tt.ctx, v)}
    return walk(tt.term, env)


# -- line-by-line traces -------------------------------------------------------


@dataclass(frozen=True)
class TraceLine:
    line: int
    text: str
    state: Subdist
    mass: Fraction


@dataclass(frozen=True)
class EvalResult:
    final: Subdist
    validity: Fraction
    posterior: object  # Subdist or FAILURE


def _extend_state(state: Subdist, layout: list[str], node: Sample,
                  interp: Interpretation) -> Subdist:
    """Tensor the kernel's new columns onto every monomial of the state."""
    index = {name: i for i, name in enumerate(layout)}
    acc: dict = {}
    for joint, w in state.items():
        values = joint_values(joint, len(layout))
        args = tuple(values[index[a]] for a in node.args)
        row = interp.kernel_row(node.gen, args)
        for out_val, wv in row.items():
            new_joint = collapse_values(values + outs_tuple(out_val, len(node.outs)))
            acc[new_joint] = acc.get(new_joint, Fraction(0)) + w * wv
    return Subdist(acc)


def _state_env(joint: Outcome, layout: list[str]) -> dict[str, Outcome]:
    return dict(zip(layout, joint_values(joint, len(layout))))


def trace(program: TypedTerm, interp: Interpretation,
          texts: tuple[str, ...] | None = None,
          normalize: bool = False) -> tuple[list[TraceLine], EvalResult]:
    """Evaluate a closed program statement by statement.

    Each line records the joint state over all variables introduced so
    far; observe lines cross out violating monomials and the final
    return projects.  With ``normalize`` the state is rescaled to mass 1
    after every line, raising ZeroMassState if the mass hits zero.
    """
    if program.ctx:
        raise CarrierMismatch("trace needs a closed program (empty context)")

    node: Term = program.term
    layout: list[str] = []
    state = dirac(())
    lines: list[TraceLine] = []
    lineno = 0

    def emit(node: Term, state: Subdist) -> Subdist:
        nonlocal lineno
        lineno += 1
        if normalize:
            if state.is_zero():
                raise ZeroMassState(lineno)
            _, state = rescale(state)
        text = texts[lineno - 1] if texts else render_statement(node)
        lines.append(TraceLine(lineno, text, state, state.mass))
        return state

    while not isinstance(node, Return):
        if isinstance(node, Sample):
            state = _extend_state(state, layout, node, interp)
            layout.extend(node.outs)
        elif isinstance(node, Observe):
            left, right = node.left, node.right

            def equal(j, left=left, right=right):
                env = _state_env(j, layout)
                return env[left] == env[right]

            state = restrict(state, equal)
        else:  # ObservePred
            state = observe_predicate(state, node.pred, layout)
        state = emit(node, state)
        node = node.cont

    # final return projects each monomial onto the returned variables
    index = {name: i for i, name in enumerate(layout)}
    projected: dict = {}
    for joint, w in state.items():
        values = joint_values(joint, len(layout))
        key = collapse_values(tuple(values[index[x]] for x in node.vars))
        projected[key] = projected.get(key, Fraction(0)) + w
    final = Subdist(projected)
    final = emit(node, final)

    res = rescale(final)
    if res is FAILURE:
        result = EvalResult(final, Fraction(0), FAILURE)
    else:
        validity, posterior = res
        result = EvalResult(final, validity, posterior)
    return lines, result


def trace_normalized(program: TypedTerm, interp: Interpretation,
                     texts: tuple[str, ...] | None = None) -> tuple[list[TraceLine], EvalResult]:
    """Trace that rescales the state to mass 1 after every statement."""
    return trace(program, interp, texts, normalize=True)


def observe_predicate(state: Subdist, p: Pred, layout: list[str]) -> Subdist:
    """Restrict a joint state to the monomials satisfying a predicate."""
    return restrict(state, lambda j: pred_holds(p, _state_env(j, layout)))


# -- semantics of combinator terms ------------------------------------------------


def semantics_of_comb(c: CombTerm, interp: Interpretation) -> dict[tuple, Subdist]:
    """The channel denoted by a combinator term, tabulated over its
    whole input carrier product."""

    def denote(node: CombTerm, env: tuple) -> Subdist:
        if isinstance(node, CRet):
            return dirac(collapse_values(tuple(env[t - 1] for t in node.sel.targets)))
        if isinstance(node, CObs):
            if env[node.pair(1) - 1] == env[node.pair(2) - 1]:
                return denote(node.cont, env)
            return zero()
        row = interp.kernel_row(node.gen, tuple(env[t - 1] for t in node.sel.targets))
        acc = zero()
        arity = len(node.gen.outputs)
        for out_val, w in row.items():
            acc = acc + w * denote(node.cont, env + outs_tuple(out_val, arity))
        return acc

    space = product(*(interp.carrier(t) for t in c.in_types))
    return {env: denote(c, env) for env in space}


def denote_channel(tt: TypedTerm, interp: Interpretation) -> dict[tuple, Subdist]:
    """Tabulate `interpret` over the whole input carrier product."""
    space = product(*(interp.carrier(t) for _, t in tt.ctx))
    return {env: interpret(tt, interp, env) for env in space}


def channels_equal(a: Mapping[tuple, Subdist], b: Mapping[tuple, Subdist]) -> bool:
    return dict(a) == dict(b)
