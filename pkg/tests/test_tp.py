import pytest

from matedrip import (
    Bounds,
    EMPTY,
    FormatError,
    Multiset,
    TissueSystem,
    TPRule,
    initial_state,
    parse_rule,
    parse_tp,
    render_tp,
    tp_run,
    tp_step,
    validate_tp,
)


def ms(text):
    return Multiset.parse(text)


def fs(*vesicles):
    return frozenset(vesicles)


def system_of(cells, axioms, rules, alphabet, terminal=frozenset(), output=1):
    ax = {i: set() for i in range(1, cells + 1)}
    for i, v in axioms:
        ax[i].add(v)
    return TissueSystem(
        alphabet=frozenset(alphabet),
        terminal=frozenset(terminal),
        cells=cells,
        axioms=tuple(frozenset(ax[i]) for i in range(1, cells + 1)),
        rules=tuple(rules),
        output_cell=output,
    )


def test_step_regeneration_pattern():
    # cell 1 holds {B}; the splitting rule sends {R} and {P B} to cell 2
    system = system_of(
        2,
        [(1, ms("B"))],
        [TPRule(1, parse_rule("DRIP (. | B | . ; R , P B)"), 2)],
        {"B", "P", "R"},
    )
    state = tp_step(system, initial_state(system, Bounds()), Bounds())
    assert state.contents[0] == frozenset()
    assert state.contents[1] == fs(ms("R"), ms("B P"))


def test_step_vesicle_feeding_two_rules():
    # one vesicle matches two rules: both fire, the operand is removed once
    system = system_of(
        2,
        [(1, ms("s t"))],
        [
            TPRule(1, parse_rule("DRIP (. | s | . ; p , .)"), 2),
            TPRule(1, parse_rule("DRIP (. | t | . ; q ,.)"), 2),
        ],
        {"p", "q", "s", "t"},
    )
    state = tp_step(system, initial_state(system, Bounds()), Bounds())
    assert state.contents[0] == frozenset()
    # s-rule: residual {t} splits to either side; t-rule symmetric
    assert ms("p t") in state.contents[1]
    assert ms("q s") in state.contents[1]
    assert EMPTY in state.contents[1]


def test_step_unmatched_vesicle_persists():
    system = system_of(
        2,
        [(1, ms("quiet")), (1, ms("s"))],
        [TPRule(1, parse_rule("DRIP (. | s | . ; p , .)"), 2)],
        {"p", "quiet", "s"},
    )
    state = tp_step(system, initial_state(system, Bounds()), Bounds())
    assert state.contents[0] == fs(ms("quiet"))
    state = tp_step(system, state, Bounds())
    assert state.contents[0] == fs(ms("quiet"))


def test_step_mate_pair_consumed():
    system = system_of(
        2,
        [(1, ms("X")), (1, ms("Y w"))],
        [TPRule(1, parse_rule("MATE (X | . , Y | . ; .)"), 2)],
        {"X", "Y", "w"},
    )
    state = tp_step(system, initial_state(system, Bounds()), Bounds())
    assert state.contents[0] == frozenset()
    assert state.contents[1] == fs(ms("X w"))


def test_run_zero_steps_reads_output_cell():
    system = system_of(1, [(1, ms("a")), (1, ms("a b"))], [], {"a", "b"},
                       terminal={"a"}, output=1)
    result_set, trace = tp_run(system, 0, Bounds())
    assert result_set == {ms("a")}
    assert trace.steps == 0 and not trace.pruned


def test_run_no_rules_contents_constant():
    system = system_of(2, [(1, ms("a")), (2, ms("b"))], [], {"a", "b"})
    state = initial_state(system, Bounds())
    for _ in range(5):
        nxt = tp_step(system, state, Bounds())
        assert nxt.contents == state.contents
        state = nxt


def test_results_accumulate_across_steps():
    # a result visits the output cell once and is logged forever
    system = system_of(
        2,
        [(1, ms("s"))],
        [
            TPRule(1, parse_rule("DRIP (. | s | . ; a , t)"), 2),
            TPRule(2, parse_rule("MATE (a | . , t | . ; s)"), 1),
        ],
        {"a", "s", "t"},
        terminal={"a"},
        output=2,
    )
    result_set, trace = tp_run(system, 4, Bounds())
    assert ms("a") in result_set


def test_oversize_arrival_sets_pruned():
    system = system_of(
        2,
        [(1, ms("s"))],
        [TPRule(1, parse_rule("DRIP (. | s | . ; p^9 , .)"), 2)],
        {"p", "s"},
    )
    _, trace = tp_run(system, 1, Bounds(max_size=4))
    assert trace.pruned


def test_keep_empty_false():
    system = system_of(
        2,
        [(1, ms("s"))],
        [TPRule(1, parse_rule("DRIP (. | s | . ; p , .)"), 2)],
        {"p", "s"},
    )
    _, _ = tp_run(system, 1, Bounds())
    state = tp_step(system, initial_state(system, Bounds(keep_empty=False)),
                    Bounds(keep_empty=False))
    assert EMPTY not in state.contents[1]


def test_tp_run_repeatable(even):
    from matedrip.compilers import compile_thm4

    system = compile_thm4(even)
    bounds = Bounds(max_size=12, max_population=10000, max_iterations=100)
    first_results, first_trace = tp_run(system, 24, bounds)
    second_results, second_trace = tp_run(system, 24, bounds)
    assert first_results == second_results
    assert first_trace == second_trace


def test_validate_tp():
    good = system_of(2, [(1, ms("a"))], [TPRule(1, parse_rule("MATE (a | . , a | . ; .)"), 2)],
                     {"a"})
    problems, warnings = validate_tp(good)
    assert problems == [] and warnings == []

    bad = system_of(2, [(1, ms("a"))], [TPRule(1, parse_rule("MATE (a | . , a | . ; .)"), 0)],
                    {"a"})
    problems, _ = validate_tp(bad)
    assert any("out of range" in p for p in problems)

    selfloop = system_of(2, [(1, ms("a"))], [TPRule(1, parse_rule("MATE (a | . , a | . ; .)"), 1)],
                         {"a"})
    problems, warnings = validate_tp(selfloop)
    assert problems == [] and len(warnings) == 1

    stray = system_of(1, [(1, ms("zz"))], [], {"a"})
    problems, _ = validate_tp(stray)
    assert any("outside the alphabet" in p for p in problems)


def test_format_roundtrip():
    system = system_of(
        3,
        [(1, ms("B")), (3, ms("E l3"))],
        [
            TPRule(1, parse_rule("DRIP (. | B | . ; B , s)"), 2),
            TPRule(2, parse_rule("MATE (B | . , R | . ; .)"), 1),
        ],
        {"B", "E", "R", "l3", "s"},
        terminal={"s"},
        output=3,
    )
    text = render_tp(system)
    back = parse_tp(text)
    assert render_tp(back) == text
    assert back.axioms == system.axioms
    assert set(back.rules) == set(system.rules)
    assert back.output_cell == 3


def test_format_errors():
    with pytest.raises(FormatError):
        parse_tp("SYSTEM TP\nALPHABET a\nCELLS 1\n")  # missing OUTPUT
    with pytest.raises(FormatError, match="line"):
        parse_tp("SYSTEM TP\nALPHABET a\nCELLS 1\nOUTPUT 1\nRULE 1 MATE (a | . , a | . ; .)\n")
    with pytest.raises(FormatError):
        parse_tp("SYSTEM TTS\nALPHABET a\nCELLS 1\nOUTPUT 1\n")
