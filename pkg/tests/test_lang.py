from __future__ import annotations

import pytest
from hypothesis import given, strategies as st

from specrepair.lang import (
    ALL_ONES,
    Add,
    ArrayDecl,
    ArrayRead,
    Assign,
    BitAnd,
    Base,
    EvalError,
    Length,
    Lit,
    Lt,
    Protect,
    Pure,
    Seq,
    Ternary,
    Var,
    While,
    WORD_MASK,
    check_ssa,
    eval_expr,
)

A = ArrayDecl("a", 1, 2, "L")

nats = st.integers(min_value=0, max_value=WORD_MASK)


def test_eval_constant_fold():
    assert eval_expr(Add(Lit(1), Lit(2)), {}) == 3


def test_eval_bottom_propagates():
    assert eval_expr(Var("x"), {"x": None}) is None
    assert eval_expr(Add(Var("x"), Lit(1)), {"x": None}) is None


def test_eval_base_plus_index():
    # resolving a load address: base(a) + i1 with i1 = 1 and a at base 1
    assert eval_expr(Add(Base(Lit(A)), Var("i1")), {"i1": 1}) == 2


def test_eval_bitand_zero_mask():
    assert eval_expr(BitAnd(Lit(6), Lit(0)), {}) == 0


def test_eval_projections():
    assert eval_expr(Length(Lit(A)), {}) == 2
    assert eval_expr(Base(Lit(A)), {}) == 1


def test_eval_ternary_selects_lazily():
    # only the selected branch matters once the condition is defined
    assert eval_expr(Ternary(Lit(True), Lit(5), Var("u")), {"u": None}) == 5
    assert eval_expr(Ternary(Var("c"), Lit(1), Lit(2)), {"c": None}) is None


def test_eval_type_errors():
    with pytest.raises(EvalError):
        eval_expr(Add(Lit(True), Lit(1)), {})
    with pytest.raises(EvalError):
        eval_expr(Lt(Lit(True), Lit(False)), {})
    with pytest.raises(EvalError):
        eval_expr(Length(Lit(3)), {})
    with pytest.raises(EvalError):
        eval_expr(Var("nope"), {})


@given(nats)
def test_bitand_all_ones_is_unit(n):
    assert eval_expr(BitAnd(Lit(n), Lit(ALL_ONES)), {}) == n
    assert eval_expr(BitAnd(Lit(ALL_ONES), Lit(n)), {}) == n


@given(nats)
def test_bitand_all_zeros_absorbs(n):
    assert eval_expr(BitAnd(Lit(n), Lit(0)), {}) == 0
    assert eval_expr(BitAnd(Lit(0), Lit(n)), {}) == 0


@given(nats, nats)
def test_add_wraps_at_word_width(a, b):
    assert eval_expr(Add(Lit(a), Lit(b)), {}) == (a + b) & WORD_MASK


@given(nats, nats, st.booleans())
def test_eval_total_when_vars_defined(a, b, c):
    e = Ternary(Var("c"), Add(Var("a"), Var("b")), BitAnd(Var("a"), Var("b")))
    rho = {"a": a, "b": b, "c": c}
    assert eval_expr(e, rho) is not None
    assert eval_expr(e, rho) == eval_expr(e, rho)


def test_check_ssa_accepts_ex1(ex1):
    assert check_ssa(ex1.command) == []


def test_check_ssa_reports_double_assignment():
    c = Seq(Assign("x", Pure(Lit(1))), Assign("x", Pure(Lit(2))))
    assert check_ssa(c) == ["x"]


def test_check_ssa_counts_protect_nodes():
    c = Seq(Assign("x", Pure(Lit(1))), Protect("x", Pure(Lit(2))))
    assert check_ssa(c) == ["x"]


def test_check_ssa_loop_body_counts_once():
    # one syntactic assignment inside a loop is fine
    c = While(Lt(Var("i"), Lit(3)), Assign("x", ArrayRead(A, Var("i"))))
    assert check_ssa(c) == []


def test_kind_check_flags_boolean_comparison():
    from specrepair.lang import kind_check
    from specrepair.parser import parse_program

    program = parse_program(
        "var b = true;\npublic b, x;\nx := (b < true) ? 1 : 0;\n")
    problems = kind_check(program.command, program.init_vars)
    assert any("<" in p for p in problems)


def test_kind_check_accepts_corpus(corpus):
    from specrepair.lang import kind_check

    for name, program in corpus:
        assert kind_check(program.command, program.init_vars) == [], name


def test_kind_check_flags_bool_into_nat_variable():
    from specrepair.lang import kind_check
    from specrepair.parser import parse_program

    program = parse_program("public x;\nx := true;\n")
    problems = kind_check(program.command, program.init_vars)
    assert any("assigned" in p for p in problems)
