from __future__ import annotations

import pytest

from specrepair.corpus import load_program
from specrepair.harness import (
    consistency_suite,
    gen_lequiv_pairs,
    l_equivalent,
    sct_fuzz,
)
from specrepair.machine import MODE_HW, MODE_SLH, run_schedule
from specrepair.parser import parse_program
from specrepair.repair import pipeline
from specrepair.typesys import Mode


def test_pairs_satisfy_equivalence(corpus):
    for name, program in corpus:
        for pair in gen_lequiv_pairs(program, count=5, seed=9):
            assert l_equivalent(program.policy, program, pair.mem1, pair.rho1,
                                pair.mem2, pair.rho2), name


def test_pairs_all_public_means_identical():
    program = parse_program(
        "array a base=1 len=2 label=L;\nvar i = 1;\npublic i, x, a;\n"
        "x := a[i];\n")
    for pair in gen_lequiv_pairs(program, count=4, seed=2):
        assert pair.mem1 == pair.mem2 and pair.rho1 == pair.rho2


def test_pairs_differ_only_in_secrets(ex1):
    pairs = gen_lequiv_pairs(ex1, count=4, seed=5)
    secret_cells = {3}  # the one secret array cell
    for pair in pairs:
        assert pair.rho1 == pair.rho2  # every variable of ex1 is public
        diff = {addr for addr in pair.mem1 if pair.mem1[addr] !=
                pair.mem2[addr]}
        assert diff <= secret_cells
    # the sampling does vary the secret across pairs
    assert any(p.mem1[3] != p.mem2[3] for p in pairs)


def test_first_pair_uses_declared_state(ex1):
    pair = gen_lequiv_pairs(ex1, count=1, seed=0)[0]
    assert pair.rho1["i1"] == 1 and pair.rho1["i2"] == 2
    assert pair.mem1[0] == 0 and pair.mem2[0] == 0


def test_zero_pairs():
    program = parse_program("skip;")
    assert gen_lequiv_pairs(program, count=0, seed=0) == []


def test_pairs_reproducible(ex1):
    a = gen_lequiv_pairs(ex1, count=6, seed=42)
    b = gen_lequiv_pairs(ex1, count=6, seed=42)
    assert [(p.mem1, p.rho1, p.mem2, p.rho2) for p in a] == \
        [(p.mem1, p.rho1, p.mem2, p.rho2) for p in b]


def test_unrepaired_ex1_has_counterexample(ex1):
    result = sct_fuzz(ex1, mode=MODE_HW, schedules="exhaustive", pairs=2,
                      seed=7)
    assert not result.passed
    ce = result.counterexample
    assert ce.kind == "trace"
    # the counterexample replays: same directives, different raw traces
    pair = gen_lequiv_pairs(ex1, count=ce.pair_index + 1, seed=7)[ce.pair_index]
    r1 = run_schedule(ex1.command, pair.mem1, pair.rho1, ce.directives)
    r2 = run_schedule(ex1.command, pair.mem2, pair.rho2, ce.directives)
    assert r1.ok and r2.ok
    assert list(r1.trace) != list(r2.trace)


def test_skip_trivially_sct():
    program = parse_program("skip;")
    result = sct_fuzz(program, schedules="exhaustive", pairs=2, seed=1)
    assert result.passed and result.trials == 2


def test_repaired_ex1_passes_exhaustively(ex1):
    report = pipeline(ex1.command, Mode(), ex1.variables())
    result = sct_fuzz(ex1, command=report.repaired, mode=MODE_HW,
                      schedules="exhaustive", pairs=2, seed=7)
    assert result.passed and result.trials > 0


def test_sct_fuzz_reproducible(ex1):
    a = sct_fuzz(ex1, schedules="random", schedule_count=40, pairs=4, seed=13)
    b = sct_fuzz(ex1, schedules="random", schedule_count=40, pairs=4, seed=13)
    assert a.passed == b.passed and a.trials == b.trials
    if a.counterexample:
        assert a.counterexample.directives == b.counterexample.directives


def test_consistency_on_corpus_sample(corpus):
    sample = [p for p in corpus
              if p[0] in {"skip", "fail", "ex1", "oob_read", "guard_chain"}]
    report = consistency_suite(sample, per_program_schedules=30, seed=3)
    assert report.ok and report.checked == 5
    assert report.schedules >= 5 * 30


@pytest.mark.parametrize("mode", [MODE_HW, MODE_SLH])
def test_consistency_both_modes(mode):
    sample = [("ex1_patched_slh", load_program("ex1_patched_slh")),
              ("protect_array_slh", load_program("protect_array_slh")),
              ("protect_ptr", load_program("protect_ptr"))]
    report = consistency_suite(sample, per_program_schedules=40, seed=5,
                               mode=mode)
    assert report.ok


def test_divergent_stuckness_is_a_violation():
    # branch on a secret: the same schedule resolves differently across the
    # pair, so one side goes down a path where some directive is inapplicable
    program = parse_program(
        "array a base=1 len=2 label=L;\nvar s = 0;\npublic x, a;\n"
        "if ((s & 1) < 1) { x := a[0]; } else { skip; }\n")
    result = sct_fuzz(program, schedules="exhaustive", pairs=6, seed=21)
    assert not result.passed
    assert result.counterexample.kind in {"stuck", "trace", "state"}


def test_already_safe_programs_are_sct(corpus):
    # programs that pass both checkers with nothing promised are already
    # speculatively constant-time; a single failure here is a build stopper
    from specrepair.typesys import generate_constraints, least_type_env, \
        typecheck_ct, typecheck_transient

    covered = 0
    for name, program in corpus:
        if typecheck_ct(program.policy, program.command, program.arrays,
                        program.variables()):
            continue
        k = generate_constraints(program.command)
        gamma = least_type_env(k, program.variables())
        if typecheck_transient(gamma, set(), program.command):
            continue
        covered += 1
        for mode in (MODE_HW, MODE_SLH):
            result = sct_fuzz(program, mode=mode, schedules="random",
                              schedule_count=40, pairs=5, seed=19)
            assert result.passed, (name, mode, result.counterexample)
    assert covered >= 10
