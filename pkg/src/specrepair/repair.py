"""Program repair: rewrite cut-set assignments into protected assignments.

The inference pipeline strings everything together: generate constraints,
find a minimum cut over the allowed candidates, rewrite the program, and
re-check the result.  Baseline repairs (protect every read, or every read
with a non-constant address) exist only for protect-count comparisons.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .lang import (
    ArrayRead,
    Assign,
    Command,
    If,
    LangError,
    is_constant_expr,
    Protect,
    PtrRead,
    Seq,
    While,
    check_ssa,
)
from .graphcut import build_graph, extract_env, min_cut
from .typesys import ConstraintSet, Mode, generate_constraints, \
    typecheck_transient


class RepairError(LangError):
    pass


def repair(c: Command, cut) -> Command:
    """Replace the unique assignment of every cut variable with a protected
    assignment.  Requires the single-assignment discipline, and every cut
    variable must actually be assigned somewhere."""
    violations = check_ssa(c)
    if violations:
        raise RepairError(
            f"program is not single-assignment: {sorted(violations)}")
    cut_set = set(cut)
    rewritten: set[str] = set()

    def walk(cmd: Command) -> Command:
        if isinstance(cmd, Assign) and cmd.target in cut_set:
            rewritten.add(cmd.target)
            return Protect(cmd.target, cmd.rhs)
        if isinstance(cmd, Protect) and cmd.target in cut_set:
            rewritten.add(cmd.target)  # already protected
            return cmd
        if isinstance(cmd, Seq):
            return Seq(walk(cmd.first), walk(cmd.second))
        if isinstance(cmd, If):
            return If(cmd.cond, walk(cmd.then), walk(cmd.other))
        if isinstance(cmd, While):
            return While(cmd.cond, walk(cmd.body))
        return cmd

    result = walk(c)
    missing = cut_set - rewritten
    if missing:
        raise RepairError(
            f"cut names variables with no assignment: {sorted(missing)}")
    return result


def count_protects(c: Command) -> int:
    if isinstance(c, Protect):
        return 1
    if isinstance(c, Seq):
        return count_protects(c.first) + count_protects(c.second)
    if isinstance(c, If):
        return count_protects(c.then) + count_protects(c.other)
    if isinstance(c, While):
        return count_protects(c.body)
    return 0


def baseline_repair(c: Command, mode: Mode = Mode()) -> Command:
    """Protect every read (v1.1), or every read with a non-constant address
    (v1).  Deliberately blunt; used as the comparison point for counts."""
    if check_ssa(c):
        raise RepairError("program is not single-assignment")

    def needs_protect(rhs) -> bool:
        if isinstance(rhs, ArrayRead):
            return mode.spectre_v1_1 or not is_constant_expr(rhs.index)
        if isinstance(rhs, PtrRead):
            return mode.spectre_v1_1 or not is_constant_expr(rhs.addr)
        return False

    def walk(cmd: Command) -> Command:
        if isinstance(cmd, Assign) and needs_protect(cmd.rhs):
            return Protect(cmd.target, cmd.rhs)
        if isinstance(cmd, Seq):
            return Seq(walk(cmd.first), walk(cmd.second))
        if isinstance(cmd, If):
            return If(cmd.cond, walk(cmd.then), walk(cmd.other))
        if isinstance(cmd, While):
            return While(cmd.cond, walk(cmd.body))
        return cmd

    return walk(c)


@dataclass
class PipelineReport:
    repaired: Command
    cut: list[str]
    gamma: dict[str, str]
    constraints: ConstraintSet
    protect_count: int
    baseline_count: int
    original_accepts: bool
    repaired_accepts: bool
    violations: list = field(default_factory=list)


def pipeline(c: Command, mode: Mode = Mode(),
             variables: list[str] | None = None) -> PipelineReport:
    """Infer a minimum cut, repair, and re-check.

    The returned environment together with the cut accepts the original
    program, and the repaired program type-checks under an empty protected
    set.  Both verdicts are recomputed here rather than assumed.
    """
    from .lang import command_vars

    if variables is None:
        variables = sorted(command_vars(c))
    k = generate_constraints(c, mode)
    g = build_graph(k, mode)
    cut = min_cut(g)
    gamma = extract_env(g, cut, variables)
    repaired = repair(c, cut)
    original_violations = typecheck_transient(gamma, set(cut), c, mode)
    repaired_violations = typecheck_transient(gamma, set(), repaired, mode)
    already = count_protects(c)
    return PipelineReport(
        repaired=repaired,
        cut=cut,
        gamma=gamma,
        constraints=k,
        protect_count=count_protects(repaired) - already,
        baseline_count=count_protects(baseline_repair(c, mode)) - already,
        original_accepts=not original_violations,
        repaired_accepts=not repaired_violations,
        violations=original_violations + repaired_violations,
    )
