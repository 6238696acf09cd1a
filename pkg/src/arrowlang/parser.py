"""Concrete syntax for .arrow program files.

A file declares enumerated types (and optionally named generators with
kernel tables), then a statement list ending in RETURN.  UNIFORM and
CASE are sugar: elaboration turns each into a fresh generator whose
kernel is the inline table, so the core term uses exactly the three
statement forms.

Grammar sketch (comments start with ``#``, newlines separate
statements, rationals are ``p`` or ``p/q``):

    TYPE Door = {L, M, R}
    GEN f : Door -> Door = L -> 1|R>; M -> 1/2|L> + 1/2|R>; R -> 1|L>
    car <- UNIFORM {L, M, R}
    host <- CASE (car, player) OF
      (x, x) -> 1/2|y> + 1/2|z> IF x != y AND y != z AND z != x
      (x, y) -> 1|z> IF x != y AND y != z AND z != x
    OBSERVE(host = L)
    OBSERVE(A IN ports)
    RETURN(car)

CASE patterns are literals, ``_`` wildcards, or variables; repeated
variables force equality and ``IF`` inequalities constrain both pattern
variables and extra ket variables, which are resolved by enumeration
over the carrier.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import product

from .errors import ElaborationError, ParseError
from .semantics import Interpretation, collapse_values
from .subdist import Dollar, Outcome, Subdist, outcome_key, render_weight
from .syntax import (
    Generator,
    Observe,
    ObservePred,
    PAnd,
    PEq,
    PIn,
    PLit,
    PNe,
    Pred,
    PVar,
    Return,
    Sample,
    Signature,
    Term,
    TypedTerm,
    typecheck,
)

KEYWORDS = {"TYPE", "GEN", "UNIFORM", "CASE", "OF", "OBSERVE", "RETURN", "IF", "AND", "IN"}


# -- tokens ------------------------------------------------------------------

@dataclass(frozen=True)
class Token:
    kind: str  # NEWLINE IDENT INT DOLLAR PUNCT EOF
    text: str
    line: int
    col: int


PUNCT_TWO = ("<-", "->", "!=")
PUNCT_ONE = "{}(),;:|>+/=_"


def tokenize(text: str) -> list[Token]:
    tokens: list[Token] = []
    line, col = 1, 1
    i = 0
    n = len(text)
    while i < n:
        c = text[i]
        if c == "#":
            while i < n and text[i] != "\n":
                i += 1
            continue
        if c == "\n":
            tokens.append(Token("NEWLINE", "\n", line, col))
            i += 1
            line += 1
            col = 1
            continue
        if c in " \t\r":
            i += 1
            col += 1
            continue
        if text[i : i + 2] in PUNCT_TWO:
            tokens.append(Token("PUNCT", text[i : i + 2], line, col))
            i += 2
            col += 2
            continue
        if c == "$":
            j = i + 1
            while j < n and text[j].isdigit():
                j += 1
            if j == i + 1:
                raise ParseError("expected digits after $", line, col)
            tokens.append(Token("DOLLAR", text[i:j], line, col))
            col += j - i
            i = j
            continue
        if c.isdigit():
            j = i
            while j < n and text[j].isdigit():
                j += 1
            tokens.append(Token("INT", text[i:j], line, col))
            col += j - i
            i = j
            continue
        if c.isalpha() or c == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            tokens.append(Token("IDENT", text[i:j], line, col))
            col += j - i
            i = j
            continue
        if c in PUNCT_ONE:
            tokens.append(Token("PUNCT", c, line, col))
            i += 1
            col += 1
            continue
        raise ParseError(f"unexpected character {c!r}", line, col)
    tokens.append(Token("EOF", "", line, col))
    return tokens


# -- surface syntax ------------------------------------------------------------

@dataclass(frozen=True)
class SOperand:
    """An unresolved predicate operand: a name or a literal value."""

    name: str | None = None
    value: Outcome | None = None


@dataclass(frozen=True)
class SAtom:
    op: str  # "=", "!=", "IN"
    left: SOperand
    right: SOperand


@dataclass(frozen=True)
class CaseRow:
    pattern: tuple  # entries: ("wild",) | ("name", str) | ("lit", value)
    ket: tuple  # ((Fraction, (rawvalue, ...)), ...) raw: ("name", s) | ("lit", v)
    conditions: tuple  # ((name, name), ...) inequalities


@dataclass(frozen=True)
class TypeDecl:
    name: str
    values: tuple
    line: int


@dataclass(frozen=True)
class GenDecl:
    name: str
    inputs: tuple[str, ...]
    outputs: tuple[str, ...]
    rows: tuple[CaseRow, ...] | None
    line: int


@dataclass(frozen=True)
class SampleStmt:
    vars: tuple[str, ...]
    kind: str  # "uniform" | "case" | "call"
    uniform_values: tuple = ()
    scrutinee: tuple[str, ...] = ()
    rows: tuple[CaseRow, ...] = ()
    callee: str = ""
    args: tuple[str, ...] = ()
    line: int = 0


@dataclass(frozen=True)
class ObserveStmt:
    atoms: tuple[SAtom, ...]  # conjunction
    line: int = 0


@dataclass(frozen=True)
class ReturnStmt:
    vars: tuple[str, ...]
    line: int = 0


@dataclass(frozen=True)
class SourceProgram:
    types: tuple[TypeDecl, ...]
    gens: tuple[GenDecl, ...]
    stmts: tuple


class _Parser:
    def __init__(self, tokens: list[Token]):
        self.toks = tokens
        self.pos = 0

    def peek(self, offset: int = 0) -> Token:
        return self.toks[min(self.pos + offset, len(self.toks) - 1)]

    def next(self) -> Token:
        tok = self.toks[self.pos]
        if tok.kind != "EOF":
            self.pos += 1
        return tok

    def error(self, message: str) -> ParseError:
        tok = self.peek()
        return ParseError(message + (f", got {tok.text!r}" if tok.text else ", got end of file"),
                          tok.line, tok.col)

    def expect(self, text: str) -> Token:
        tok = self.peek()
        if tok.text != text or tok.kind == "EOF":
            raise self.error(f"expected {text!r}")
        return self.next()

    def expect_ident(self, what: str = "identifier") -> str:
        tok = self.peek()
        if tok.kind != "IDENT" or tok.text in KEYWORDS:
            raise self.error(f"expected {what}")
        return self.next().text

    def skip_newlines(self):
        while self.peek().kind == "NEWLINE":
            self.next()

    def end_statement(self):
        tok = self.peek()
        if tok.kind not in ("NEWLINE", "EOF"):
            raise self.error("expected end of line")
        self.skip_newlines()

    # -- values ------------------------------------------------------

    def parse_value(self) -> Outcome:
        tok = self.peek()
        if tok.kind == "INT":
            self.next()
            return int(tok.text)
        if tok.kind == "DOLLAR":
            self.next()
            return Dollar(int(tok.text[1:]))
        if tok.text == "{":
            self.next()
            elems = []
            if self.peek().text != "}":
                elems.append(self.parse_value())
                while self.peek().text == ",":
                    self.next()
                    elems.append(self.parse_value())
            self.expect("}")
            return frozenset(elems)
        if tok.kind == "IDENT" and tok.text not in KEYWORDS:
            self.next()
            return tok.text
        raise self.error("expected a value")

    def parse_value_set(self) -> tuple:
        self.expect("{")
        values = [self.parse_value()]
        while self.peek().text == ",":
            self.next()
            values.append(self.parse_value())
        self.expect("}")
        return tuple(values)

    # -- kets and rows ---------------------------------------------------

    def parse_rational(self) -> Fraction:
        tok = self.peek()
        if tok.kind != "INT":
            raise self.error("expected a rational literal")
        self.next()
        num = int(tok.text)
        if self.peek().text == "/":
            self.next()
            den_tok = self.peek()
            if den_tok.kind != "INT":
                raise self.error("expected a denominator")
            self.next()
            den = int(den_tok.text)
            if den == 0:
                raise ParseError("zero denominator", den_tok.line, den_tok.col)
            return Fraction(num, den)
        return Fraction(num)

    def parse_ket_value(self) -> tuple:
        tok = self.peek()
        if tok.kind == "IDENT" and tok.text not in KEYWORDS:
            self.next()
            return ("name", tok.text)
        return ("lit", self.parse_value())

    def parse_ket(self) -> tuple:
        monomials = []
        while True:
            weight = Fraction(1)
            if self.peek().kind == "INT":
                weight = self.parse_rational()
            self.expect("|")
            values = [self.parse_ket_value()]
            while self.peek().text == ",":
                self.next()
                values.append(self.parse_ket_value())
            self.expect(">")
            monomials.append((weight, tuple(values)))
            if self.peek().text == "+":
                self.next()
                continue
            return tuple(monomials)

    def parse_pattern(self, arity_hint: int | None = None) -> tuple:
        def atom() -> tuple:
            tok = self.peek()
            if tok.text == "_":
                self.next()
                return ("wild",)
            if tok.kind == "IDENT" and tok.text not in KEYWORDS:
                self.next()
                return ("name", tok.text)
            return ("lit", self.parse_value())

        if self.peek().text == "(":
            self.next()
            entries = []
            if self.peek().text != ")":
                entries.append(atom())
                while self.peek().text == ",":
                    self.next()
                    entries.append(atom())
            self.expect(")")
            return tuple(entries)
        return (atom(),)

    def parse_row(self) -> CaseRow:
        pattern = self.parse_pattern()
        self.expect("->")
        ket = self.parse_ket()
        conditions = []
        if self.peek().text == "IF":
            self.next()
            while True:
                left = self.expect_ident("a pattern variable")
                self.expect("!=")
                right = self.expect_ident("a pattern variable")
                conditions.append((left, right))
                if self.peek().text == "AND":
                    self.next()
                    continue
                break
        return CaseRow(pattern, ket, tuple(conditions))

    def at_new_statement(self) -> bool:
        tok = self.peek()
        if tok.kind == "EOF":
            return True
        if tok.text in ("TYPE", "GEN", "OBSERVE", "RETURN"):
            return True
        if tok.kind == "IDENT" and tok.text not in KEYWORDS:
            # scan an identifier list for a following arrow
            k = 1
            while self.peek(k).text == "," and self.peek(k + 1).kind == "IDENT":
                k += 2
            return self.peek(k).text == "<-"
        return False

    def parse_rows(self) -> tuple[CaseRow, ...]:
        rows = []
        while True:
            while self.peek().kind == "NEWLINE" or self.peek().text == ";":
                self.next()
            if self.at_new_statement():
                break
            rows.append(self.parse_row())
        if not rows:
            raise self.error("expected at least one table row")
        return tuple(rows)

    # -- declarations and statements -----------------------------------------

    def parse_type_decl(self) -> TypeDecl:
        line = self.peek().line
        self.expect("TYPE")
        name = self.expect_ident("a type name")
        self.expect("=")
        values = self.parse_value_set()
        self.end_statement()
        return TypeDecl(name, values, line)

    def parse_type_list(self) -> tuple[str, ...]:
        if self.peek().text == "(":
            self.next()
            self.expect(")")
            return ()
        names = [self.expect_ident("a type name")]
        while self.peek().text == ",":
            self.next()
            names.append(self.expect_ident("a type name"))
        return tuple(names)

    def parse_gen_decl(self) -> GenDecl:
        line = self.peek().line
        self.expect("GEN")
        name = self.expect_ident("a generator name")
        self.expect(":")
        inputs = self.parse_type_list()
        self.expect("->")
        outputs = self.parse_type_list()
        rows = None
        if self.peek().text == "=":
            self.next()
            rows = self.parse_rows()
        else:
            self.end_statement()
        return GenDecl(name, inputs, outputs, rows, line)

    def parse_observe(self) -> ObserveStmt:
        line = self.peek().line
        self.expect("OBSERVE")
        self.expect("(")

        def operand() -> SOperand:
            tok = self.peek()
            if tok.kind == "IDENT" and tok.text not in KEYWORDS:
                self.next()
                return SOperand(name=tok.text)
            return SOperand(value=self.parse_value())

        atoms = []
        while True:
            left = operand()
            tok = self.peek()
            if tok.text in ("=", "!="):
                self.next()
                atoms.append(SAtom(tok.text, left, operand()))
            elif tok.text == "IN":
                self.next()
                var = self.expect_ident("a set-valued variable")
                atoms.append(SAtom("IN", left, SOperand(name=var)))
            else:
                raise self.error("expected =, != or IN")
            if self.peek().text == "AND":
                self.next()
                continue
            break
        self.expect(")")
        self.end_statement()
        return ObserveStmt(tuple(atoms), line)

    def parse_return(self) -> ReturnStmt:
        line = self.peek().line
        self.expect("RETURN")
        self.expect("(")
        names: list[str] = []
        if self.peek().text != ")":
            names.append(self.expect_ident("a variable"))
            while self.peek().text == ",":
                self.next()
                names.append(self.expect_ident("a variable"))
        self.expect(")")
        self.end_statement()
        return ReturnStmt(tuple(names), line)

    def parse_sample(self) -> SampleStmt:
        line = self.peek().line
        names = [self.expect_ident("a variable")]
        while self.peek().text == ",":
            self.next()
            names.append(self.expect_ident("a variable"))
        self.expect("<-")
        tok = self.peek()
        if tok.text == "UNIFORM":
            self.next()
            values = self.parse_value_set()
            self.end_statement()
            return SampleStmt(tuple(names), "uniform", uniform_values=values, line=line)
        if tok.text == "CASE":
            self.next()
            scrutinee = []
            if self.peek().text == "(":
                self.next()
                scrutinee.append(self.expect_ident("a variable"))
                while self.peek().text == ",":
                    self.next()
                    scrutinee.append(self.expect_ident("a variable"))
                self.expect(")")
            else:
                scrutinee.append(self.expect_ident("a variable"))
            self.expect("OF")
            rows = self.parse_rows()
            return SampleStmt(tuple(names), "case", scrutinee=tuple(scrutinee),
                              rows=rows, line=line)
        callee = self.expect_ident("a generator name")
        self.expect("(")
        args: list[str] = []
        if self.peek().text != ")":
            args.append(self.expect_ident("a variable"))
            while self.peek().text == ",":
                self.next()
                args.append(self.expect_ident("a variable"))
        self.expect(")")
        self.end_statement()
        return SampleStmt(tuple(names), "call", callee=callee, args=tuple(args), line=line)

    def parse_program(self) -> SourceProgram:
        types: list[TypeDecl] = []
        gens: list[GenDecl] = []
        stmts: list = []
        self.skip_newlines()
        while self.peek().kind != "EOF":
            tok = self.peek()
            if tok.text == "TYPE":
                types.append(self.parse_type_decl())
            elif tok.text == "GEN":
                gens.append(self.parse_gen_decl())
            elif tok.text == "OBSERVE":
                stmts.append(self.parse_observe())
            elif tok.text == "RETURN":
                stmts.append(self.parse_return())
                self.skip_newlines()
                if self.peek().kind != "EOF":
                    raise self.error("statements after RETURN")
                break
            elif tok.kind == "IDENT" and tok.text not in KEYWORDS:
                stmts.append(self.parse_sample())
            else:
                raise self.error("expected a declaration or statement")
            self.skip_newlines()
        if not stmts or not isinstance(stmts[-1], ReturnStmt):
            tok = self.peek()
            raise ParseError("program must end with RETURN", tok.line, tok.col)
        return SourceProgram(tuple(types), tuple(gens), tuple(stmts))


def parse(text: str) -> SourceProgram:
    """Parse .arrow source text; raises ParseError with line and column."""
    return _Parser(tokenize(text)).parse_program()


# -- canonical rendering ---------------------------------------------------------


def _src_value(v: Outcome) -> str:
    if isinstance(v, Dollar):
        return repr(v)
    if isinstance(v, frozenset):
        return "{" + ", ".join(_src_value(e) for e in sorted(v, key=outcome_key)) + "}"
    return str(v)


def _ket_value(raw: tuple) -> str:
    kind, v = raw
    return v if kind == "name" else _src_value(v).replace(", ", ",")


def render_ket(ket: tuple) -> str:
    parts = []
    for weight, values in ket:
        parts.append(f"{render_weight(weight)}|{','.join(_ket_value(v) for v in values)}>")
    return " + ".join(parts)


def render_row(row: CaseRow) -> str:
    atoms = []
    for entry in row.pattern:
        if entry[0] == "wild":
            atoms.append("_")
        elif entry[0] == "name":
            atoms.append(entry[1])
        else:
            atoms.append(_src_value(entry[1]))
    pattern = atoms[0] if len(atoms) == 1 else "(" + ", ".join(atoms) + ")"
    text = f"{pattern} -> {render_ket(row.ket)}"
    if row.conditions:
        text += " IF " + " AND ".join(f"{a} != {b}" for a, b in row.conditions)
    return text


def _render_operand(op: SOperand) -> str:
    return op.name if op.name is not None else _src_value(op.value)


def render_stmt(stmt, oneline: bool = True) -> str:
    """Canonical statement text; CASE tables fold onto one line when asked."""
    if isinstance(stmt, ObserveStmt):
        inner = " AND ".join(
            f"{_render_operand(a.left)} {a.op} {_render_operand(a.right)}"
            for a in stmt.atoms
        )
        return f"OBSERVE({inner})"
    if isinstance(stmt, ReturnStmt):
        return f"RETURN({', '.join(stmt.vars)})"
    lhs = ", ".join(stmt.vars)
    if stmt.kind == "uniform":
        values = ", ".join(_src_value(v) for v in stmt.uniform_values)
        return f"{lhs} <- UNIFORM {{{values}}}"
    if stmt.kind == "call":
        return f"{lhs} <- {stmt.callee}({', '.join(stmt.args)})"
    scrutinee = stmt.scrutinee[0] if len(stmt.scrutinee) == 1 else "(" + ", ".join(stmt.scrutinee) + ")"
    head = f"{lhs} <- CASE {scrutinee} OF"
    rows = [render_row(r) for r in stmt.rows]
    if oneline:
        return head + " " + "; ".join(rows)
    return head + "\n" + "\n".join("  " + r for r in rows)


def pretty(sp: SourceProgram) -> str:
    """Canonical source text; parsing it back gives the same program."""
    lines: list[str] = []
    for td in sp.types:
        values = ", ".join(_src_value(v) for v in td.values)
        lines.append(f"TYPE {td.name} = {{{values}}}")
    for gd in sp.gens:
        ins = ", ".join(gd.inputs) if gd.inputs else "()"
        outs = ", ".join(gd.outputs) if gd.outputs else "()"
        head = f"GEN {gd.name} : {ins} -> {outs}"
        if gd.rows is None:
            lines.append(head)
        else:
            lines.append(head + " =")
            lines.extend("  " + render_row(r) for r in gd.rows)
    if lines:
        lines.append("")
    for stmt in sp.stmts:
        if isinstance(stmt, SampleStmt) and stmt.kind == "case":
            lines.append(render_stmt(stmt, oneline=False))
        else:
            lines.append(render_stmt(stmt))
    return "\n".join(lines) + "\n"


# -- elaboration -------------------------------------------------------------------


@dataclass
class Program:
    """A parsed, elaborated, and typechecked program.

    ``typed`` is the core term, ``interp`` the interpretation declared by
    the file's tables, and ``texts`` the display line for each core
    statement of the trace.
    """

    source: SourceProgram
    typed: TypedTerm
    interp: Interpretation
    texts: tuple[str, ...]


def _unique_type_for(values, carriers: dict, where: str) -> str:
    candidates = [t for t, carrier in carriers.items() if all(v in carrier for v in values)]
    if not candidates:
        raise ElaborationError(f"no declared type contains {where}")
    if len(candidates) > 1:
        raise ElaborationError(f"ambiguous type for {where}: {' or '.join(sorted(candidates))}")
    return candidates[0]


class _RowMatcher:
    """Pattern-matching and instantiation for one table row."""

    def __init__(self, row: CaseRow, input_types: tuple[str, ...],
                 carriers: dict, where: str):
        self.row = row
        self.input_types = input_types
        self.carriers = carriers
        self.where = where
        if len(row.pattern) != len(input_types):
            raise ElaborationError(
                f"{where}: pattern arity {len(row.pattern)} does not match {len(input_types)} inputs"
            )
        # classify pattern entries; names that denote carrier values are literals
        self.entries = []
        self.var_types: dict[str, str] = {}
        for entry, tname in zip(row.pattern, input_types):
            if entry[0] == "lit" or (entry[0] == "name" and entry[1] in carriers[tname]):
                value = entry[1]
                if value not in carriers[tname]:
                    raise ElaborationError(f"{where}: literal {_src_value(value)} not in {tname}")
                self.entries.append(("lit", value))
            elif entry[0] == "name":
                name = entry[1]
                if name in self.var_types and self.var_types[name] != tname:
                    raise ElaborationError(f"{where}: pattern variable {name} used at two types")
                self.var_types[name] = tname
                self.entries.append(("var", name))
            else:
                self.entries.append(("wild", None))
        # extra variables are condition names not bound by the pattern;
        # their types come from inequation links, propagated to a fixpoint
        self.extras: dict[str, str | None] = {}
        for a, b in row.conditions:
            for name in (a, b):
                if name not in self.var_types:
                    self.extras.setdefault(name, None)
        changed = True
        while changed:
            changed = False
            for a, b in row.conditions:
                ta = self.var_types.get(a) or self.extras.get(a)
                tb = self.var_types.get(b) or self.extras.get(b)
                if ta and not tb and b in self.extras:
                    self.extras[b] = ta
                    changed = True
                if tb and not ta and a in self.extras:
                    self.extras[a] = tb
                    changed = True
                if ta and tb and ta != tb:
                    raise ElaborationError(f"{where}: condition {a} != {b} compares {ta} with {tb}")
        for name, tname in self.extras.items():
            if tname is None:
                raise ElaborationError(f"{where}: cannot infer a type for variable {name}")

    def bind(self, combo: tuple):
        """Match the pattern against concrete values; None when it fails."""
        bound: dict[str, Outcome] = {}
        for (kind, payload), value in zip(self.entries, combo):
            if kind == "lit" and payload != value:
                return None
            if kind == "var":
                if payload in bound and bound[payload] != value:
                    return None
                bound[payload] = value
        return bound

    def _conditions_hold(self, env: dict[str, Outcome]) -> bool:
        return all(env[a] != env[b] for a, b in self.row.conditions)

    def instantiate(self, bound: dict[str, Outcome], out_types: tuple[str, ...]):
        """Row subdistribution for a matched combo; None when unsatisfiable.

        Extra variables are enumerated over their carriers; every
        satisfying assignment must yield the same table row.
        """
        extra_names = sorted(self.extras)
        spaces = [self.carriers[self.extras[x]] for x in extra_names]
        results = []
        for assignment in product(*spaces):
            env = dict(bound)
            env.update(zip(extra_names, assignment))
            if not self._conditions_hold(env):
                continue
            acc: dict = {}
            for weight, values in self.row.ket:
                if len(values) != len(out_types):
                    raise ElaborationError(
                        f"{self.where}: ket arity {len(values)} does not match outputs"
                    )
                resolved = []
                for (kind, v), tname in zip(values, out_types):
                    if kind == "name":
                        if v in env:
                            resolved.append(env[v])
                        elif v in self.carriers[tname]:
                            resolved.append(v)
                        else:
                            raise ElaborationError(
                                f"{self.where}: {v} is neither a variable nor a value of {tname}"
                            )
                    else:
                        if v not in self.carriers[tname]:
                            raise ElaborationError(
                                f"{self.where}: {_src_value(v)} not in {tname}"
                            )
                        resolved.append(v)
                key = collapse_values(tuple(resolved))
                acc[key] = acc.get(key, Fraction(0)) + weight
            if sum(acc.values(), Fraction(0)) > 1:
                raise ElaborationError(f"{self.where}: row mass exceeds 1")
            results.append(Subdist(acc))
        if not results:
            return None
        first = results[0]
        for other in results[1:]:
            if other != first:
                raise ElaborationError(
                    f"{self.where}: conflicting assignments of {', '.join(extra_names)} give different rows"
                )
        return first


def build_table(rows, input_types: tuple[str, ...], out_types: tuple[str, ...],
                carriers: dict, where: str) -> dict:
    """Expand pattern rows into a total kernel table over the carriers."""
    matchers = [_RowMatcher(row, input_types, carriers, where) for row in rows]
    table: dict = {}
    for combo in product(*(carriers[t] for t in input_types)):
        row_value = None
        for matcher in matchers:
            bound = matcher.bind(combo)
            if bound is None:
                continue
            row_value = matcher.instantiate(bound, out_types)
            if row_value is not None:
                break
        if row_value is None:
            shown = ", ".join(_src_value(v) for v in combo)
            raise ElaborationError(f"{where}: no row matches ({shown})")
        table[combo] = row_value
    return table


def _infer_case_output_type(stmt: SampleStmt, matchers, carriers: dict) -> str:
    votes: set[str] = set()
    literal_values: list = []
    for matcher in matchers:
        for _, values in matcher.row.ket:
            if len(values) != 1:
                raise ElaborationError(
                    f"line {stmt.line}: CASE kets must have exactly one value"
                )
            kind, v = values[0]
            if kind == "name":
                if v in matcher.var_types:
                    votes.add(matcher.var_types[v])
                elif v in matcher.extras:
                    votes.add(matcher.extras[v])
                else:
                    literal_values.append(v)
            else:
                literal_values.append(v)
    if len(votes) > 1:
        raise ElaborationError(
            f"line {stmt.line}: CASE kets mix output types {' and '.join(sorted(votes))}"
        )
    if votes:
        tname = votes.pop()
        for v in literal_values:
            if v not in carriers[tname]:
                raise ElaborationError(
                    f"line {stmt.line}: {_src_value(v)} not in inferred type {tname}"
                )
        return tname
    return _unique_type_for(literal_values, carriers, f"the CASE kets on line {stmt.line}")


def elaborate(sp: SourceProgram) -> Program:
    """Resolve sugar and build the core term, interpretation, and trace texts."""
    carriers: dict[str, tuple] = {}
    for td in sp.types:
        if td.name in carriers:
            raise ElaborationError(f"type {td.name} declared twice")
        if not td.values:
            raise ElaborationError(f"type {td.name} has an empty carrier")
        if len(set(td.values)) != len(td.values):
            raise ElaborationError(f"type {td.name} repeats a value")
        carriers[td.name] = tuple(td.values)

    gens: dict[str, Generator] = {}
    kernels: dict[str, dict] = {}
    for gd in sp.gens:
        if gd.name in gens:
            raise ElaborationError(f"generator {gd.name} declared twice")
        for t in gd.inputs + gd.outputs:
            if t not in carriers:
                raise ElaborationError(f"generator {gd.name} uses undeclared type {t}")
        gens[gd.name] = Generator(gd.name, gd.inputs, gd.outputs)
        if gd.rows is not None:
            kernels[gd.name] = build_table(
                gd.rows, gd.inputs, gd.outputs, carriers, f"generator {gd.name}"
            )

    scope: dict[str, str] = {}
    heads: list = []
    texts: list[str] = []
    ret: Return | None = None

    def declare(names: tuple[str, ...], types: tuple[str, ...], line: int):
        for name, tname in zip(names, types):
            if name in scope:
                raise ElaborationError(f"line {line}: variable {name} already bound")
            scope[name] = tname

    def fresh_gen_name(base: str, index: int) -> str:
        # keyed by statement index, not source line, so reformatting a
        # file never changes the synthesised signature
        name = f"__{base}{index}"
        while name in gens:
            name += "_"
        return name

    def resolve_literal(name_or_value, tname: str, line: int) -> PLit:
        if name_or_value not in carriers[tname]:
            raise ElaborationError(
                f"line {line}: {_src_value(name_or_value)} is not a value of {tname}"
            )
        return PLit(name_or_value, tname)

    def resolve_atom(atom: SAtom, line: int) -> Pred:
        if atom.op == "IN":
            if atom.right.name is None or atom.right.name not in scope:
                raise ElaborationError(f"line {line}: IN needs a bound set-valued variable")
            element = atom.left.value if atom.left.value is not None else atom.left.name
            tname = _unique_type_for([element], carriers, f"{_src_value(element)} on line {line}")
            return PIn(PLit(element, tname), PVar(atom.right.name))
        ops = []
        for side in (atom.left, atom.right):
            if side.name is not None and side.name in scope:
                ops.append(PVar(side.name))
            else:
                ops.append(side)
        if not any(isinstance(o, PVar) for o in ops):
            shown = " and ".join(_render_operand(o) for o in (atom.left, atom.right))
            raise ElaborationError(
                f"line {line}: neither side of the comparison ({shown}) is a bound variable"
            )
        if all(isinstance(o, PVar) for o in ops):
            left, right = ops
        else:
            var = next(o for o in ops if isinstance(o, PVar))
            other = next(o for o in ops if not isinstance(o, PVar))
            value = other.value if other.value is not None else other.name
            lit = resolve_literal(value, scope[var.name], line)
            left, right = (var, lit) if isinstance(ops[0], PVar) else (lit, var)
        return PEq(left, right) if atom.op == "=" else PNe(left, right)

    for stmt_index, stmt in enumerate(sp.stmts, 1):
        if isinstance(stmt, SampleStmt):
            if stmt.kind == "uniform":
                if len(stmt.vars) != 1:
                    raise ElaborationError(f"line {stmt.line}: UNIFORM binds exactly one variable")
                values = stmt.uniform_values
                if len(set(values)) != len(values):
                    raise ElaborationError(f"line {stmt.line}: UNIFORM repeats a value")
                tname = _unique_type_for(values, carriers, f"UNIFORM on line {stmt.line}")
                gname = fresh_gen_name("u", stmt_index)
                gen = Generator(gname, (), (tname,))
                gens[gname] = gen
                kernels[gname] = {(): Subdist({v: Fraction(1, len(values)) for v in values})}
                heads.append(Sample(gen, (), stmt.vars, None))
                declare(stmt.vars, (tname,), stmt.line)
            elif stmt.kind == "case":
                for v in stmt.scrutinee:
                    if v not in scope:
                        raise ElaborationError(f"line {stmt.line}: unknown variable {v}")
                if len(stmt.vars) != 1:
                    raise ElaborationError(f"line {stmt.line}: CASE binds exactly one variable")
                in_types = tuple(scope[v] for v in stmt.scrutinee)
                matchers = [
                    _RowMatcher(row, in_types, carriers, f"line {stmt.line}")
                    for row in stmt.rows
                ]
                out_type = _infer_case_output_type(stmt, matchers, carriers)
                gname = fresh_gen_name("case", stmt_index)
                gen = Generator(gname, in_types, (out_type,))
                gens[gname] = gen
                kernels[gname] = build_table(
                    stmt.rows, in_types, (out_type,), carriers, f"line {stmt.line}"
                )
                heads.append(Sample(gen, stmt.scrutinee, stmt.vars, None))
                declare(stmt.vars, (out_type,), stmt.line)
            else:  # call
                gen = gens.get(stmt.callee)
                if gen is None:
                    raise ElaborationError(f"line {stmt.line}: unknown generator {stmt.callee}")
                for a in stmt.args:
                    if a not in scope:
                        raise ElaborationError(f"line {stmt.line}: unknown variable {a}")
                if len(stmt.vars) != len(gen.outputs):
                    raise ElaborationError(
                        f"line {stmt.line}: {stmt.callee} produces {len(gen.outputs)} outputs"
                    )
                heads.append(Sample(gen, stmt.args, stmt.vars, None))
                declare(stmt.vars, gen.outputs, stmt.line)
            texts.append(render_stmt(stmt))
        elif isinstance(stmt, ObserveStmt):
            atom = stmt.atoms[0]
            both_vars = (
                len(stmt.atoms) == 1
                and atom.op == "="
                and atom.left.name in scope
                and atom.right.name in scope
            )
            if both_vars:
                heads.append(Observe(atom.left.name, atom.right.name, None))
                texts.append(render_stmt(stmt))
                continue
            nullary = None
            if len(stmt.atoms) == 1 and atom.op == "=":
                for a, b in ((atom.left, atom.right), (atom.right, atom.left)):
                    gen = gens.get(b.name) if b.name else None
                    if (a.name in scope and b.name not in scope
                            and gen is not None and gen.inputs == () and len(gen.outputs) == 1):
                        nullary = (a.name, gen)
                        break
            if nullary is not None:
                var, gen = nullary
                out = f"__o{stmt_index}"
                while out in scope:
                    out += "_"
                heads.append(Sample(gen, (), (out,), None))
                declare((out,), gen.outputs, stmt.line)
                heads.append(Observe(var, out, None))
                texts.append(f"{out} <- {gen.name}()")
                texts.append(f"OBSERVE({var} = {out})")
                continue
            pred: Pred = resolve_atom(stmt.atoms[0], stmt.line)
            for extra in stmt.atoms[1:]:
                pred = PAnd(pred, resolve_atom(extra, stmt.line))
            heads.append(ObservePred(pred, None))
            texts.append(render_stmt(stmt))
        else:  # ReturnStmt
            ret = Return(stmt.vars)
            texts.append(render_stmt(stmt))

    term: Term = ret
    for h in reversed(heads):
        if isinstance(h, Observe):
            term = Observe(h.left, h.right, term)
        elif isinstance(h, ObservePred):
            term = ObservePred(h.pred, term)
        else:
            term = Sample(h.gen, h.args, h.outs, term)

    sig = Signature(frozenset(carriers), gens)
    typed = typecheck(sig, (), term)
    interp = Interpretation(carriers, kernels)
    return Program(sp, typed, interp, tuple(texts))


def load_text(text: str) -> Program:
    return elaborate(parse(text))


def load_file(path) -> Program:
    with open(path, encoding="utf-8") as fh:
        return load_text(fh.read())
