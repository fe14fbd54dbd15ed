"""Core language: values, arrays, security labels, expressions, commands.

Values are 64-bit unsigned naturals, booleans, or array handles.  Arithmetic
wraps at the word width, so the all-ones bitmask is an exact unit for `&` and
the all-zeros mask an exact zero.  The bottom marker (represented as None)
never appears in source-level states; it only arises in the transient variable
maps of the speculative machine.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Union

WORD_BITS = 64
WORD_MASK = (1 << WORD_BITS) - 1

ALL_ONES = WORD_MASK
ALL_ZEROS = 0

LABEL_PUBLIC = "L"
LABEL_SECRET = "H"

STABLE = "S"
TRANSIENT = "T"


def label_flows_to(l1: str, l2: str) -> bool:
    """Security lattice order: L below H, H never below L."""
    return l1 == LABEL_PUBLIC or l2 == LABEL_SECRET


def label_join(l1: str, l2: str) -> str:
    return LABEL_SECRET if LABEL_SECRET in (l1, l2) else LABEL_PUBLIC


def flow_leq(t1: str, t2: str) -> bool:
    """Transient-flow lattice order: S below T, T never below S."""
    return t1 == STABLE or t2 == TRANSIENT


def flow_join(t1: str, t2: str) -> str:
    return TRANSIENT if TRANSIENT in (t1, t2) else STABLE


@dataclass(frozen=True, slots=True)
class ArrayDecl:
    """A named array occupying memory cells [base, base + length)."""

    name: str
    base: int
    length: int
    label: str

    def covers(self, addr: int) -> bool:
        return self.base <= addr < self.base + self.length


# A value is a natural (int), a boolean, or an array handle.  Note that bool
# is a subclass of int in Python, so dispatch must test bool first.
Value = Union[int, bool, ArrayDecl]


def is_nat(v) -> bool:
    return isinstance(v, int) and not isinstance(v, bool)


class LangError(Exception):
    """Base class for front-end and evaluation errors."""


class EvalError(LangError):
    """Operator applied to operands of the wrong value kind."""


# ---------------------------------------------------------------------------
# Expressions
# ---------------------------------------------------------------------------


class Expr:
    __slots__ = ()


@dataclass(frozen=True, slots=True)
class Lit(Expr):
    value: Value


@dataclass(frozen=True, slots=True)
class Var(Expr):
    name: str


@dataclass(frozen=True, slots=True)
class Add(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True, slots=True)
class Lt(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True, slots=True)
class BitAnd(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True, slots=True)
class Ternary(Expr):
    """Non-speculative conditional select; the machine never predicts it."""

    cond: Expr
    then: Expr
    other: Expr


@dataclass(frozen=True, slots=True)
class Length(Expr):
    arg: Expr


@dataclass(frozen=True, slots=True)
class Base(Expr):
    arg: Expr


# ---------------------------------------------------------------------------
# Right-hand sides and commands
# ---------------------------------------------------------------------------


class Rhs:
    __slots__ = ()


@dataclass(frozen=True, slots=True)
class Pure(Rhs):
    expr: Expr


@dataclass(frozen=True, slots=True)
class PtrRead(Rhs):
    """Raw memory read `*L(e)`; the label decorates the pointed-to data."""

    label: str
    addr: Expr


@dataclass(frozen=True, slots=True)
class ArrayRead(Rhs):
    """Bounds-checked read `a[e]`; the array operand is a static constant."""

    array: ArrayDecl
    index: Expr


class Command:
    __slots__ = ()


@dataclass(frozen=True, slots=True)
class Skip(Command):
    pass


@dataclass(frozen=True, slots=True)
class Fail(Command):
    pass


@dataclass(frozen=True, slots=True)
class Assign(Command):
    target: str
    rhs: Rhs


@dataclass(frozen=True, slots=True)
class Protect(Command):
    """Like Assign, but the value is withheld until it is stable."""

    target: str
    rhs: Rhs


@dataclass(frozen=True, slots=True)
class PtrWrite(Command):
    label: str
    addr: Expr
    value: Expr


@dataclass(frozen=True, slots=True)
class ArrayWrite(Command):
    array: ArrayDecl
    index: Expr
    value: Expr


@dataclass(frozen=True, slots=True)
class If(Command):
    cond: Expr
    then: Command
    other: Command


@dataclass(frozen=True, slots=True)
class While(Command):
    cond: Expr
    body: Command


@dataclass(frozen=True, slots=True)
class Seq(Command):
    first: Command
    second: Command


@dataclass(frozen=True, slots=True)
class Policy:
    """Names of attacker-observable (public) variables and arrays."""

    public_vars: frozenset[str]
    public_arrays: frozenset[str]


def seq_all(commands: list[Command]) -> Command:
    """Right-nest a statement list into a Seq chain."""
    if not commands:
        raise LangError("empty command list")
    result = commands[-1]
    for c in reversed(commands[:-1]):
        result = Seq(c, result)
    return result


# ---------------------------------------------------------------------------
# Expression evaluation
# ---------------------------------------------------------------------------


def _as_nat(v: Value, what: str) -> int:
    if isinstance(v, bool) or not isinstance(v, int):
        raise EvalError(f"{what} expects a natural, got {v!r}")
    return v


def _as_bool(v: Value, what: str) -> bool:
    if not isinstance(v, bool):
        raise EvalError(f"{what} expects a boolean, got {v!r}")
    return v


def _as_array(v: Value, what: str) -> ArrayDecl:
    if not isinstance(v, ArrayDecl):
        raise EvalError(f"{what} expects an array, got {v!r}")
    return v


def eval_expr(e: Expr, rho: dict) -> Optional[Value]:
    """Evaluate `e` under a variable map that may bind names to bottom (None).

    Strict in bottom: if any needed operand is undefined the result is
    undefined.  The ternary only consults the selected branch once the
    condition is defined.  Naturals wrap at 64 bits.
    """
    if isinstance(e, Lit):
        return e.value
    if isinstance(e, Var):
        if e.name not in rho:
            raise EvalError(f"unbound variable {e.name}")
        return rho[e.name]
    if isinstance(e, Add):
        a = eval_expr(e.left, rho)
        if a is None:
            return None
        b = eval_expr(e.right, rho)
        if b is None:
            return None
        return (_as_nat(a, "+") + _as_nat(b, "+")) & WORD_MASK
    if isinstance(e, Lt):
        a = eval_expr(e.left, rho)
        if a is None:
            return None
        b = eval_expr(e.right, rho)
        if b is None:
            return None
        return _as_nat(a, "<") < _as_nat(b, "<")
    if isinstance(e, BitAnd):
        a = eval_expr(e.left, rho)
        if a is None:
            return None
        b = eval_expr(e.right, rho)
        if b is None:
            return None
        return _as_nat(a, "&") & _as_nat(b, "&")
    if isinstance(e, Ternary):
        c = eval_expr(e.cond, rho)
        if c is None:
            return None
        return eval_expr(e.then if _as_bool(c, "?:") else e.other, rho)
    if isinstance(e, Length):
        a = eval_expr(e.arg, rho)
        if a is None:
            return None
        return _as_array(a, "length").length
    if isinstance(e, Base):
        a = eval_expr(e.arg, rho)
        if a is None:
            return None
        return _as_array(a, "base").base
    raise EvalError(f"unknown expression {e!r}")


# ---------------------------------------------------------------------------
# Structural helpers
# ---------------------------------------------------------------------------


def assignments(c: Command) -> list[tuple[str, Rhs, bool]]:
    """All (target, rhs, is_protect) assignment nodes, in program order."""
    out: list[tuple[str, Rhs, bool]] = []

    def walk(cmd: Command) -> None:
        if isinstance(cmd, Assign):
            out.append((cmd.target, cmd.rhs, False))
        elif isinstance(cmd, Protect):
            out.append((cmd.target, cmd.rhs, True))
        elif isinstance(cmd, Seq):
            walk(cmd.first)
            walk(cmd.second)
        elif isinstance(cmd, If):
            walk(cmd.then)
            walk(cmd.other)
        elif isinstance(cmd, While):
            walk(cmd.body)

    walk(c)
    return out


def check_ssa(c: Command) -> list[str]:
    """Variables assigned by more than one syntactic Assign/Protect node.

    A single assignment inside a loop body counts once; repair rewrites the
    unique syntactic node, so that is the granularity that matters.
    """
    counts: dict[str, int] = {}
    for target, _rhs, _prot in assignments(c):
        counts[target] = counts.get(target, 0) + 1
    return [x for x, n in counts.items() if n > 1]


def is_constant_expr(e: Expr) -> bool:
    """True when the expression mentions no variables (a constant address)."""
    return not expr_vars(e)


# Value kinds for the static front-end check.
KIND_NAT = "nat"
KIND_BOOL = "bool"
KIND_ARRAY = "array"


def kind_check(c: Command, init_vars: dict[str, Value]) -> list[str]:
    """Best-effort static value-kind check; returns problem descriptions.

    Variable kinds come from their declared initial values; assigned-only
    variables are naturals (their default initial value is 0).  Memory cells
    hold naturals, so loads produce naturals and stored values must be
    naturals.  Arithmetic and comparison work on naturals only, the select
    condition and branch conditions must be booleans.  Programs built
    directly as syntax trees may bypass this check; the evaluator still
    rejects mismatches dynamically.
    """
    problems: list[str] = []
    kinds: dict[str, str] = {}
    for x in command_vars(c):
        kinds[x] = KIND_NAT
    for x, v in init_vars.items():
        kinds[x] = KIND_BOOL if isinstance(v, bool) else KIND_NAT

    def expr_kind(e: Expr) -> str:
        if isinstance(e, Lit):
            if isinstance(e.value, bool):
                return KIND_BOOL
            if isinstance(e.value, ArrayDecl):
                return KIND_ARRAY
            return KIND_NAT
        if isinstance(e, Var):
            return kinds.get(e.name, KIND_NAT)
        if isinstance(e, (Add, BitAnd, Lt)):
            op = {"Add": "+", "BitAnd": "&", "Lt": "<"}[type(e).__name__]
            for side in (e.left, e.right):
                if expr_kind(side) != KIND_NAT:
                    problems.append(f"operand of {op} is not a natural")
            return KIND_BOOL if isinstance(e, Lt) else KIND_NAT
        if isinstance(e, Ternary):
            if expr_kind(e.cond) != KIND_BOOL:
                problems.append("select condition is not a boolean")
            k1, k2 = expr_kind(e.then), expr_kind(e.other)
            if k1 != k2:
                problems.append("select branches have different kinds")
            return k1
        if isinstance(e, (Length, Base)):
            if expr_kind(e.arg) != KIND_ARRAY:
                problems.append("length/base argument is not an array")
            return KIND_NAT
        raise LangError(f"cannot kind {e!r}")

    def require(e: Expr, kind: str, what: str) -> None:
        if expr_kind(e) != kind:
            problems.append(f"{what} is not a {kind}")

    def rhs_kind(r: Rhs) -> str:
        if isinstance(r, Pure):
            return expr_kind(r.expr)
        if isinstance(r, PtrRead):
            require(r.addr, KIND_NAT, "pointer address")
            return KIND_NAT
        require(r.index, KIND_NAT, "array index")
        return KIND_NAT

    def walk(cmd: Command) -> None:
        if isinstance(cmd, (Skip, Fail)):
            return
        if isinstance(cmd, Seq):
            walk(cmd.first)
            walk(cmd.second)
        elif isinstance(cmd, (Assign, Protect)):
            got = rhs_kind(cmd.rhs)
            want = kinds.get(cmd.target, KIND_NAT)
            if got != want:
                problems.append(
                    f"{cmd.target} holds a {want} but is assigned a {got}")
        elif isinstance(cmd, PtrWrite):
            require(cmd.addr, KIND_NAT, "pointer address")
            require(cmd.value, KIND_NAT, "stored value")
        elif isinstance(cmd, ArrayWrite):
            require(cmd.index, KIND_NAT, "array index")
            require(cmd.value, KIND_NAT, "stored value")
        elif isinstance(cmd, If):
            require(cmd.cond, KIND_BOOL, "branch condition")
            walk(cmd.then)
            walk(cmd.other)
        elif isinstance(cmd, While):
            require(cmd.cond, KIND_BOOL, "loop condition")
            walk(cmd.body)
        else:
            raise LangError(f"cannot kind {cmd!r}")

    walk(c)
    return problems


def expr_vars(e: Expr) -> set[str]:
    if isinstance(e, Var):
        return {e.name}
    if isinstance(e, (Add, Lt, BitAnd)):
        return expr_vars(e.left) | expr_vars(e.right)
    if isinstance(e, Ternary):
        return expr_vars(e.cond) | expr_vars(e.then) | expr_vars(e.other)
    if isinstance(e, (Length, Base)):
        return expr_vars(e.arg)
    return set()


def rhs_vars(r: Rhs) -> set[str]:
    if isinstance(r, Pure):
        return expr_vars(r.expr)
    if isinstance(r, PtrRead):
        return expr_vars(r.addr)
    return expr_vars(r.index)


def command_vars(c: Command) -> set[str]:
    """Every variable read or assigned anywhere in the command."""
    out: set[str] = set()

    def walk(cmd: Command) -> None:
        if isinstance(cmd, (Assign, Protect)):
            out.add(cmd.target)
            out.update(rhs_vars(cmd.rhs))
        elif isinstance(cmd, PtrWrite):
            out.update(expr_vars(cmd.addr) | expr_vars(cmd.value))
        elif isinstance(cmd, ArrayWrite):
            out.update(expr_vars(cmd.index) | expr_vars(cmd.value))
        elif isinstance(cmd, If):
            out.update(expr_vars(cmd.cond))
            walk(cmd.then)
            walk(cmd.other)
        elif isinstance(cmd, While):
            out.update(expr_vars(cmd.cond))
            walk(cmd.body)
        elif isinstance(cmd, Seq):
            walk(cmd.first)
            walk(cmd.second)

    walk(c)
    return out
