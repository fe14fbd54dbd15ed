"""Speculative out-of-order machine driven by attacker directives.

The machine is a three-stage pipeline over a reorder buffer and a stack of
partially flattened commands.  `fetch` pops the next command and either
rewrites it on the stack (sequencing, bounds-check expansion, loop unrolling)
or appends an instruction to the buffer; `fetch b` predicts a branch and
records a guard carrying the rollback stack; `exec n` resolves the n-th
buffered instruction out of order against the transient variable map of its
prefix; `retire` commits the buffer head to the architectural state.

Each step yields an observation: memory reads and writes carry the absolute
address plus the identifiers of the guard/fail instructions still pending in
front of them, mispredictions yield `rollback(p)`, and retired failures yield
`fail(p)`.  A directive that no rule matches leaves the machine *stuck*;
stuck is an ordinary result, not an error.

Two implementations of `protect` are provided.  In hardware mode the buffer
holds a dedicated protect instruction that resolves like an assignment but
releases its value only once no guard precedes it.  In SLH mode a protected
array read is instead expanded at fetch time into bounds-check code that
masks the load address, so the load stalls until the check resolves and a
mispredicted out-of-bounds access can only touch the reserved address 0.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, replace
from typing import Iterator, Optional, Union

from .lang import (
    ALL_ONES,
    ALL_ZEROS,
    Add,
    ArrayRead,
    ArrayWrite,
    Assign,
    Base,
    BitAnd,
    Command,
    EvalError,
    Expr,
    Fail,
    If,
    LangError,
    Length,
    Lit,
    Lt,
    Protect,
    PtrRead,
    PtrWrite,
    Pure,
    Seq,
    Skip,
    Ternary,
    Value,
    Var,
    While,
    eval_expr,
    is_nat,
)
from .seq import BudgetExceeded, SeqFail, SeqRead, SeqWrite

MODE_HW = "hw"
MODE_SLH = "slh"

# Machine-generated temporaries use names no source program can contain.
_TMP_PREFIX = "."


def is_reserved_name(name: str) -> bool:
    return name.startswith(_TMP_PREFIX)


# ---------------------------------------------------------------------------
# Instructions, directives, observations
# ---------------------------------------------------------------------------


@dataclass(frozen=True, slots=True)
class Nop:
    pass


@dataclass(frozen=True, slots=True)
class FailInstr:
    pred: int


@dataclass(frozen=True, slots=True)
class AssignI:
    target: str
    expr: Expr

    @property
    def resolved(self) -> bool:
        return isinstance(self.expr, Lit)


@dataclass(frozen=True, slots=True)
class LoadI:
    target: str
    label: str
    addr: Expr


@dataclass(frozen=True, slots=True)
class StoreI:
    """A pending store.  Unlike assignments, a store with literal operands
    still needs its execute step: that step is what emits the write
    observation, so `resolved` tracks execution, not operand shape."""

    label: str
    addr: Expr
    value: Expr
    executed: bool = False

    @property
    def resolved(self) -> bool:
        return self.executed


@dataclass(frozen=True, slots=True)
class ProtectI:
    target: str
    expr: Expr

    @property
    def resolved(self) -> bool:
        return isinstance(self.expr, Lit)


@dataclass(frozen=True, slots=True)
class GuardI:
    cond: Expr
    predicted: bool
    rollback: tuple[Command, ...]
    pred: int


Instruction = Union[Nop, FailInstr, AssignI, LoadI, StoreI, ProtectI, GuardI]


@dataclass(frozen=True, slots=True)
class Fetch:
    pass


@dataclass(frozen=True, slots=True)
class FetchBranch:
    prediction: bool


@dataclass(frozen=True, slots=True)
class Exec:
    index: int  # 1-based position in the reorder buffer


@dataclass(frozen=True, slots=True)
class Retire:
    pass


Directive = Union[Fetch, FetchBranch, Exec, Retire]


@dataclass(frozen=True, slots=True)
class Silent:
    pass


@dataclass(frozen=True, slots=True)
class ReadObs:
    addr: int
    pending: tuple[int, ...]


@dataclass(frozen=True, slots=True)
class WriteObs:
    addr: int
    pending: tuple[int, ...]


@dataclass(frozen=True, slots=True)
class FailObs:
    pred: int


@dataclass(frozen=True, slots=True)
class RollbackObs:
    pred: int


Observation = Union[Silent, ReadObs, WriteObs, FailObs, RollbackObs]

SILENT = Silent()


@dataclass(frozen=True, slots=True)
class Stuck:
    reason: str


@dataclass(frozen=True, slots=True)
class Config:
    """Machine state.  Terminal when both buffer and stack are empty.

    The prediction-id and temporary-name counters live in the configuration
    so that a step is a pure function of (configuration, directive, mode) and
    replays are exact.
    """

    buffer: tuple[Instruction, ...]
    stack: tuple[Command, ...]
    mem: dict[int, Value]
    vars: dict[str, Value]
    next_pred: int = 1
    next_tmp: int = 0

    @property
    def terminal(self) -> bool:
        return not self.buffer and not self.stack


def initial_config(c: Command, mem: dict[int, Value],
                   rho: dict[str, Value]) -> Config:
    return Config(buffer=(), stack=(c,), mem=dict(mem), vars=dict(rho))


# ---------------------------------------------------------------------------
# Transient variable map
# ---------------------------------------------------------------------------


def transient_map(rho: dict[str, Value],
                  prefix: tuple[Instruction, ...]) -> dict:
    """Variable map as seen past `prefix`: resolved assignments are bound,
    pending assignments and loads are bottom, and protected values stay
    bottom even once resolved so they are never forwarded early."""
    out = dict(rho)
    for instr in prefix:
        if isinstance(instr, AssignI):
            out[instr.target] = instr.expr.value if instr.resolved else None
        elif isinstance(instr, (LoadI, ProtectI)):
            out[instr.target] = None
    return out


def pending_ids(prefix: tuple[Instruction, ...]) -> tuple[int, ...]:
    """Identifiers of guard and fail instructions in buffer order."""
    return tuple(i.pred for i in prefix
                 if isinstance(i, (GuardI, FailInstr)))


# ---------------------------------------------------------------------------
# Step function
# ---------------------------------------------------------------------------


def step(config: Config, directive: Directive,
         mode: str = MODE_HW) -> Union[tuple[Config, Observation], Stuck]:
    if isinstance(directive, Fetch):
        return _fetch(config, mode)
    if isinstance(directive, FetchBranch):
        return _fetch_branch(config, directive.prediction)
    if isinstance(directive, Exec):
        return _exec(config, directive.index)
    if isinstance(directive, Retire):
        return _retire(config)
    raise LangError(f"unknown directive {directive!r}")


def _array_bounds_check(array, index: Expr) -> Expr:
    return Lt(index, Length(Lit(array)))


def _array_address(array, index: Expr) -> Expr:
    return Add(Base(Lit(array)), index)


def _fetch(config: Config, mode: str):
    if not config.stack:
        return Stuck("fetch on an empty command stack")
    head, rest = config.stack[0], config.stack[1:]

    def with_stack(*cs: Command) -> Config:
        return replace(config, stack=tuple(cs) + rest)

    def push_instr(instr: Instruction, **counters) -> Config:
        return replace(config, buffer=config.buffer + (instr,), stack=rest,
                       **counters)

    if isinstance(head, Skip):
        return push_instr(Nop()), SILENT
    if isinstance(head, Fail):
        instr = FailInstr(config.next_pred)
        return push_instr(instr, next_pred=config.next_pred + 1), SILENT
    if isinstance(head, Seq):
        return with_stack(head.first, head.second), SILENT
    if isinstance(head, While):
        unrolled = If(head.cond, Seq(head.body, head), Skip())
        return with_stack(unrolled), SILENT
    if isinstance(head, Assign):
        rhs = head.rhs
        if isinstance(rhs, Pure):
            return push_instr(AssignI(head.target, rhs.expr)), SILENT
        if isinstance(rhs, PtrRead):
            return push_instr(LoadI(head.target, rhs.label, rhs.addr)), SILENT
        if isinstance(rhs, ArrayRead):
            checked = If(
                _array_bounds_check(rhs.array, rhs.index),
                Assign(head.target,
                       PtrRead(rhs.array.label,
                               _array_address(rhs.array, rhs.index))),
                Fail(),
            )
            return with_stack(checked), SILENT
    if isinstance(head, PtrWrite):
        return push_instr(StoreI(head.label, head.addr, head.value)), SILENT
    if isinstance(head, ArrayWrite):
        checked = If(
            _array_bounds_check(head.array, head.index),
            PtrWrite(head.array.label,
                     _array_address(head.array, head.index), head.value),
            Fail(),
        )
        return with_stack(checked), SILENT
    if isinstance(head, Protect):
        return _fetch_protect(config, head, rest, mode)
    if isinstance(head, If):
        return Stuck("branch at stack head requires a fetch with a prediction")
    raise LangError(f"cannot fetch {head!r}")


def _fetch_protect(config: Config, head: Protect,
                   rest: tuple[Command, ...], mode: str):
    rhs = head.rhs
    if isinstance(rhs, Pure):
        instr = ProtectI(head.target, rhs.expr)
        return (replace(config, buffer=config.buffer + (instr,), stack=rest),
                SILENT)
    if isinstance(rhs, ArrayRead) and mode == MODE_SLH:
        # Expand to bounds-check code that masks the load address: the load
        # cannot execute before the mask resolves, and a mispredicted
        # out-of-bounds access reads the reserved address 0.
        mask = f"{_TMP_PREFIX}m{config.next_tmp}"
        check = Assign(mask, Pure(_array_bounds_check(rhs.array, rhs.index)))
        widen = Assign(mask, Pure(Ternary(Var(mask), Lit(ALL_ONES),
                                          Lit(ALL_ZEROS))))
        masked_load = Assign(
            head.target,
            PtrRead(rhs.array.label,
                    BitAnd(_array_address(rhs.array, rhs.index), Var(mask))))
        expansion = Seq(check, If(Var(mask), Seq(widen, masked_load), Fail()))
        return (replace(config, stack=(expansion,) + rest,
                        next_tmp=config.next_tmp + 1), SILENT)
    # Hardware flavor: read into a fresh intermediate, then protect it.  The
    # intermediate keeps the rewritten program single-assignment.
    tmp = f"{_TMP_PREFIX}t{config.next_tmp}"
    read = Assign(tmp, rhs)
    guard_value = Protect(head.target, Pure(Var(tmp)))
    return (replace(config, stack=(read, guard_value) + rest,
                    next_tmp=config.next_tmp + 1), SILENT)


def _fetch_branch(config: Config, prediction: bool):
    if not config.stack:
        return Stuck("fetch-branch on an empty command stack")
    head, rest = config.stack[0], config.stack[1:]
    if not isinstance(head, If):
        return Stuck("fetch-branch requires a branch at the stack head")
    taken = head.then if prediction else head.other
    not_taken = head.other if prediction else head.then
    guard = GuardI(head.cond, prediction, (not_taken,) + rest,
                   config.next_pred)
    return (replace(config, buffer=config.buffer + (guard,),
                    stack=(taken,) + rest,
                    next_pred=config.next_pred + 1), SILENT)


def _exec(config: Config, index: int):
    if index < 1 or index > len(config.buffer):
        return Stuck(f"no instruction at buffer position {index}")
    prefix = config.buffer[:index - 1]
    instr = config.buffer[index - 1]
    suffix = config.buffer[index:]
    trho = transient_map(config.vars, prefix)

    def resolve(new_instr: Instruction) -> Config:
        return replace(config, buffer=prefix + (new_instr,) + suffix)

    try:
        if isinstance(instr, AssignI):
            if instr.resolved:
                return Stuck("assignment already resolved")
            v = eval_expr(instr.expr, trho)
            if v is None:
                return Stuck("assignment operand is still undefined")
            return resolve(AssignI(instr.target, Lit(v))), SILENT
        if isinstance(instr, LoadI):
            if any(isinstance(i, StoreI) for i in prefix):
                return Stuck("load blocked by an earlier pending store")
            addr = eval_expr(instr.addr, trho)
            if addr is None:
                return Stuck("load address is still undefined")
            if not is_nat(addr):
                return Stuck("load address is not a natural")
            value = config.mem.get(addr, 0)
            obs = ReadObs(addr, pending_ids(prefix))
            return resolve(AssignI(instr.target, Lit(value))), obs
        if isinstance(instr, StoreI):
            if instr.resolved:
                return Stuck("store already executed")
            addr = eval_expr(instr.addr, trho)
            if addr is None:
                return Stuck("store address is still undefined")
            if not is_nat(addr):
                return Stuck("store address is not a natural")
            value = eval_expr(instr.value, trho)
            if value is None:
                return Stuck("stored value is still undefined")
            obs = WriteObs(addr, pending_ids(prefix))
            done = StoreI(instr.label, Lit(addr), Lit(value), executed=True)
            return resolve(done), obs
        if isinstance(instr, ProtectI):
            if not instr.resolved:
                v = eval_expr(instr.expr, trho)
                if v is None:
                    return Stuck("protected operand is still undefined")
                return resolve(ProtectI(instr.target, Lit(v))), SILENT
            if any(isinstance(i, GuardI) for i in prefix):
                return Stuck("protected value waits for earlier guards")
            return resolve(AssignI(instr.target, instr.expr)), SILENT
        if isinstance(instr, GuardI):
            v = eval_expr(instr.cond, trho)
            if v is None:
                return Stuck("guard condition is still undefined")
            if not isinstance(v, bool):
                return Stuck("guard condition is not a boolean")
            if v == instr.predicted:
                return resolve(Nop()), SILENT
            squashed = replace(config, buffer=prefix + (Nop(),),
                               stack=instr.rollback)
            return squashed, RollbackObs(instr.pred)
    except EvalError as exc:
        return Stuck(f"operands do not evaluate: {exc}")
    return Stuck("instruction is not executable")


def _retire(config: Config):
    if not config.buffer:
        return Stuck("retire on an empty reorder buffer")
    head, rest = config.buffer[0], config.buffer[1:]
    if isinstance(head, Nop):
        return replace(config, buffer=rest), SILENT
    if isinstance(head, AssignI) and head.resolved:
        new_vars = dict(config.vars)
        new_vars[head.target] = head.expr.value
        return replace(config, buffer=rest, vars=new_vars), SILENT
    if isinstance(head, StoreI) and head.resolved:
        new_mem = dict(config.mem)
        new_mem[head.addr.value] = head.value.value
        return replace(config, buffer=rest, mem=new_mem), SILENT
    if isinstance(head, FailInstr):
        halted = replace(config, buffer=(), stack=())
        return halted, FailObs(head.pred)
    return Stuck("buffer head is not ready to retire")


# ---------------------------------------------------------------------------
# Schedules
# ---------------------------------------------------------------------------


@dataclass
class RunResult:
    config: Config
    trace: list
    stuck_at: Optional[int] = None
    stuck_reason: str = ""

    @property
    def ok(self) -> bool:
        return self.stuck_at is None


def run_schedule(c: Command, mem, rho, directives, mode: str = MODE_HW,
                 config: Optional[Config] = None) -> RunResult:
    """Fold `step` over the directives; report the first stuck index."""
    if config is None:
        config = initial_config(c, mem, rho)
    trace: list = []
    for k, d in enumerate(directives):
        result = step(config, d, mode)
        if isinstance(result, Stuck):
            return RunResult(config, trace, stuck_at=k,
                             stuck_reason=result.reason)
        config, obs = result
        trace.append(obs)
    return RunResult(config, trace)


def _defined(e: Expr, trho) -> Optional[Value]:
    try:
        return eval_expr(e, trho)
    except EvalError:
        return None


def applicable_directives(config: Config, mode: str = MODE_HW) -> list:
    """Directives that do not leave the machine stuck, in a fixed
    speculate-first order: fetches (predicting true before false), data
    execs, guard execs, retire.  Deferring guard resolution makes the
    depth-first exploration of `enumerate_schedules` reach the most
    speculative interleavings early.

    This recomputes the side conditions of the step rules incrementally (one
    left-to-right pass over the buffer) instead of attempting each step, so
    random walks stay cheap; agreement with `step` is covered by tests.
    """
    out: list[Directive] = []
    if config.stack:
        if isinstance(config.stack[0], If):
            out.extend([FetchBranch(True), FetchBranch(False)])
        else:
            out.append(Fetch())
    trho = dict(config.vars)
    seen_store = False
    seen_guard = False
    data_execs: list[Directive] = []
    guard_execs: list[Directive] = []
    for idx, instr in enumerate(config.buffer, start=1):
        if isinstance(instr, AssignI):
            if not instr.resolved and _defined(instr.expr, trho) is not None:
                data_execs.append(Exec(idx))
            trho[instr.target] = instr.expr.value if instr.resolved else None
        elif isinstance(instr, LoadI):
            if not seen_store:
                addr = _defined(instr.addr, trho)
                if addr is not None and is_nat(addr):
                    data_execs.append(Exec(idx))
            trho[instr.target] = None
        elif isinstance(instr, StoreI):
            if not instr.resolved:
                addr = _defined(instr.addr, trho)
                if addr is not None and is_nat(addr) \
                        and _defined(instr.value, trho) is not None:
                    data_execs.append(Exec(idx))
            seen_store = True
        elif isinstance(instr, ProtectI):
            if not instr.resolved:
                if _defined(instr.expr, trho) is not None:
                    data_execs.append(Exec(idx))
            elif not seen_guard:
                data_execs.append(Exec(idx))
            trho[instr.target] = None
        elif isinstance(instr, GuardI):
            cond = _defined(instr.cond, trho)
            if isinstance(cond, bool):
                guard_execs.append(Exec(idx))
            seen_guard = True
    out.extend(data_execs)
    out.extend(guard_execs)
    if config.buffer:
        head = config.buffer[0]
        if isinstance(head, (Nop, FailInstr)) or \
                (isinstance(head, (AssignI, StoreI)) and head.resolved):
            out.append(Retire())
    return out


def _options(config: Config, mode: str) -> list:
    """(directive, next configuration, observation) for each applicable
    directive."""
    out = []
    for d in applicable_directives(config, mode):
        result = step(config, d, mode)
        assert not isinstance(result, Stuck), (d, result)
        out.append((d, result[0], result[1]))
    return out


def sequential_schedule(c: Command, mem, rho, mode: str = MODE_HW,
                        budget: int = 10 ** 6) -> list:
    """A schedule that executes and retires every instruction as soon as it
    is fetched, predicting each branch with its actual outcome, so the run
    mirrors the sequential semantics and never rolls back."""
    config = initial_config(c, mem, rho)
    schedule: list[Directive] = []
    steps = 0
    while not config.terminal:
        steps += 1
        if steps > budget:
            raise BudgetExceeded(
                f"sequential schedule budget of {budget} exhausted")
        if config.buffer:
            head = config.buffer[0]
            if isinstance(head, (Nop, FailInstr)):
                d: Directive = Retire()
            elif isinstance(head, (AssignI, StoreI)) and head.resolved:
                d = Retire()
            else:
                d = Exec(1)
        else:
            head = config.stack[0]
            if isinstance(head, If):
                cond = eval_expr(head.cond, transient_map(config.vars, ()))
                if not isinstance(cond, bool):
                    raise LangError("branch condition is not a boolean")
                d = FetchBranch(cond)
            else:
                d = Fetch()
        result = step(config, d, mode)
        if isinstance(result, Stuck):
            raise LangError(f"sequential driver stuck: {result.reason}")
        config, _obs = result
        schedule.append(d)
    return schedule


@dataclass
class CompletedRun:
    directives: tuple
    trace: tuple
    config: Config


def enumerate_schedules(c: Command, mem, rho, mode: str = MODE_HW,
                        max_len: int = 40, max_schedules: int = 5000,
                        max_nodes: int = 400_000) -> Iterator[CompletedRun]:
    """Depth-first stream of complete schedules reaching a terminal
    configuration within `max_len` directives.  Stuck or over-length
    branches are silently abandoned; at most `max_schedules` runs are
    yielded and at most `max_nodes` configurations explored."""
    produced = 0
    explored = 0
    start = initial_config(c, mem, rho)
    stack: list[tuple[Config, tuple, tuple]] = [(start, (), ())]
    while stack:
        config, directives, trace = stack.pop()
        explored += 1
        if explored > max_nodes:
            return
        if config.terminal:
            yield CompletedRun(directives, trace, config)
            produced += 1
            if produced >= max_schedules:
                return
            continue
        if len(directives) >= max_len:
            continue
        options = [(cfg, directives + (d,), trace + (obs,))
                   for d, cfg, obs in _options(config, mode)]
        stack.extend(reversed(options))


def exhaustive_runs(c: Command, mem, rho, mode: str = MODE_HW,
                    max_len: int = 40, limit: int = 5000,
                    max_nodes: int = 400_000) -> Optional[list]:
    """The complete schedule space as a list, or None when it does not fit
    under `limit` schedules / `max_nodes` explored configurations."""
    runs: list[CompletedRun] = []
    explored = 0
    start = initial_config(c, mem, rho)
    stack: list[tuple[Config, tuple, tuple]] = [(start, (), ())]
    while stack:
        config, directives, trace = stack.pop()
        explored += 1
        if explored > max_nodes:
            return None
        if config.terminal:
            runs.append(CompletedRun(directives, trace, config))
            if len(runs) > limit:
                return None
            continue
        if len(directives) >= max_len:
            # an unfinished branch: the space within max_len is not complete
            return None
        options = [(cfg, directives + (d,), trace + (obs,))
                   for d, cfg, obs in _options(config, mode)]
        stack.extend(reversed(options))
    return runs


def count_schedules(c: Command, mem, rho, mode: str = MODE_HW,
                    max_len: int = 40, limit: int = 5000) -> Optional[int]:
    """Number of complete schedules, or None if it exceeds the caps."""
    runs = exhaustive_runs(c, mem, rho, mode, max_len, limit)
    return None if runs is None else len(runs)


def random_schedule(c: Command, mem, rho, mode: str = MODE_HW,
                    rng: Optional[random.Random] = None,
                    max_len: int = 400) -> Optional[CompletedRun]:
    """A uniformly random walk over applicable directives; None if no
    terminal configuration is reached within `max_len` steps."""
    rng = rng or random.Random()
    config = initial_config(c, mem, rho)
    directives: list = []
    trace: list = []
    while not config.terminal:
        if len(directives) >= max_len:
            return None
        options = applicable_directives(config, mode)
        if not options:
            return None
        d = rng.choice(options)
        result = step(config, d, mode)
        assert not isinstance(result, Stuck), (d, result)
        config, obs = result
        directives.append(d)
        trace.append(obs)
    return CompletedRun(tuple(directives), tuple(trace), config)


# ---------------------------------------------------------------------------
# Trace filtering and comparison
# ---------------------------------------------------------------------------


def filter_trace(trace) -> list:
    """Project a speculative trace onto its architectural content: rollbacks
    vanish, reads and writes pending on a rolled-back or failed prediction
    vanish, fail identifiers are erased, and silent steps are dropped.
    Already-filtered (sequential) observations pass through unchanged."""
    squashed: set[int] = set()
    for o in trace:
        if isinstance(o, (RollbackObs, FailObs)):
            squashed.add(o.pred)
    out: list = []
    for o in trace:
        if isinstance(o, Silent) or isinstance(o, RollbackObs):
            continue
        if isinstance(o, FailObs):
            out.append(SeqFail())
        elif isinstance(o, ReadObs):
            if not squashed.intersection(o.pending):
                out.append(SeqRead(o.addr))
        elif isinstance(o, WriteObs):
            if not squashed.intersection(o.pending):
                out.append(SeqWrite(o.addr))
        else:
            out.append(o)
    return out


def traces_equivalent(t1, t2) -> bool:
    """Multiset equality of filtered, identifier-erased observations."""
    from collections import Counter

    return Counter(filter_trace(t1)) == Counter(filter_trace(t2))


# ---------------------------------------------------------------------------
# Text formats
# ---------------------------------------------------------------------------


def format_observation(o) -> str:
    if isinstance(o, Silent):
        return "."
    if isinstance(o, ReadObs):
        return f"read({o.addr},[{','.join(map(str, o.pending))}])"
    if isinstance(o, WriteObs):
        return f"write({o.addr},[{','.join(map(str, o.pending))}])"
    if isinstance(o, FailObs):
        return f"fail({o.pred})"
    if isinstance(o, RollbackObs):
        return f"rollback({o.pred})"
    raise LangError(f"cannot format {o!r}")


def format_directive(d) -> str:
    if isinstance(d, Fetch):
        return "fetch"
    if isinstance(d, FetchBranch):
        return f"fetch {'true' if d.prediction else 'false'}"
    if isinstance(d, Exec):
        return f"exec {d.index}"
    if isinstance(d, Retire):
        return "retire"
    raise LangError(f"cannot format {d!r}")


def parse_schedule(text: str) -> list:
    """One directive per line: `fetch`, `fetch true`, `fetch false`,
    `exec N`, `retire`.  Blank lines and `#` comments are skipped."""
    directives: list[Directive] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if parts == ["fetch"]:
            directives.append(Fetch())
        elif parts == ["fetch", "true"]:
            directives.append(FetchBranch(True))
        elif parts == ["fetch", "false"]:
            directives.append(FetchBranch(False))
        elif len(parts) == 2 and parts[0] == "exec" and parts[1].isdigit():
            directives.append(Exec(int(parts[1])))
        elif parts == ["retire"]:
            directives.append(Retire())
        else:
            raise LangError(f"schedule line {lineno}: cannot parse {raw!r}")
    return directives
