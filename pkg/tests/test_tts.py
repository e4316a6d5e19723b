import pytest

from matedrip import (
    Bounds,
    EMPTY,
    FormatError,
    MateRule,
    Multiset,
    SupportFilter,
    TestTubeSystem,
    TubeFilter,
    closure,
    is_fixpoint,
    parse_rule,
    parse_tts,
    render_tts,
    results,
    results_of_state,
    validate_tts,
)


def ms(text):
    return Multiset.parse(text)


def fs(*vesicles):
    return frozenset(vesicles)


def one_tube(rules, axioms, alphabet, terminal=frozenset(), outputs=frozenset({1})):
    return TestTubeSystem(
        alphabet=frozenset(alphabet),
        terminal=frozenset(terminal),
        tubes=1,
        axioms=(frozenset(axioms),),
        rules=(tuple(rules),),
        filters=(),
        outputs=frozenset(outputs),
    )


def test_filter_pass_examples():
    filt = TubeFilter((SupportFilter(frozenset({"a1", "a2"})),))
    assert filt.passes(ms("a1^3"))
    assert not filt.passes(ms("a1 b1"))
    assert filt.passes(EMPTY)


def test_filter_union():
    filt = TubeFilter((SupportFilter(frozenset({"a"})), SupportFilter(frozenset({"b"}))))
    assert filt.passes(ms("a^2"))
    assert filt.passes(ms("b"))
    assert not filt.passes(ms("a b"))


def test_closure_one_step_example():
    # one tube, axioms {X} and {Z l0}, rule (X|.,Z|l0;.)
    system = one_tube(
        [parse_rule("MATE (X | . , Z | l0 ; .)")],
        [ms("X"), ms("Z l0")],
        {"X", "Z", "l0"},
    )
    bounds = Bounds(max_size=8, max_population=100, max_iterations=20)
    state = closure(system, bounds)
    # both axioms are retained and the fused vesicle appears
    assert fs(ms("X"), ms("Z l0"), ms("X l0")).issubset(state.contents[0])
    assert is_fixpoint(system, state, bounds)


def test_closure_no_rules_is_fixpoint():
    system = one_tube([], [ms("p"), ms("q r")], {"p", "q", "r"})
    state = closure(system, Bounds())
    assert state.contents[0] == fs(ms("p"), ms("q r"))
    assert not state.pruned


def test_closure_axiom_persistence():
    # rules keep firing, axioms never disappear
    system = one_tube(
        [parse_rule("MATE (s | . , . | s ; .)")],
        [ms("s"), ms("s t")],
        {"s", "t"},
    )
    bounds = Bounds(max_size=6, max_population=1000, max_iterations=50)
    state = closure(system, bounds)
    assert fs(ms("s"), ms("s t")).issubset(state.contents[0])


def test_closure_size_bound_sets_pruned():
    system = one_tube(
        [parse_rule("MATE (s | . , . | s ; .)")],
        [ms("s")],
        {"s"},
    )
    state = closure(system, Bounds(max_size=4, max_population=100, max_iterations=50))
    assert state.pruned
    assert state.contents[0] == fs(ms("s"), ms("s^2"), ms("s^3"), ms("s^4"))


def test_closure_population_bound_sets_pruned():
    system = one_tube(
        [parse_rule("DRIP (. | s | . ; s s , .)")],
        [ms("s")],
        {"s"},
    )
    state = closure(system, Bounds(max_size=50, max_population=5, max_iterations=100))
    assert state.pruned
    assert state.population <= 5


def test_closure_iteration_bound_sets_pruned():
    system = one_tube(
        [parse_rule("MATE (s | . , . | s ; .)")],
        [ms("s")],
        {"s"},
    )
    state = closure(system, Bounds(max_size=100, max_population=10000, max_iterations=3))
    assert state.pruned
    assert state.iterations == 3


def test_closure_monotone_in_bounds():
    system = one_tube(
        [parse_rule("MATE (s | . , . | s ; .)")],
        [ms("s")],
        {"s"},
    )
    tight = closure(system, Bounds(max_size=4, max_population=1000, max_iterations=100))
    loose = closure(system, Bounds(max_size=8, max_population=1000, max_iterations=100))
    assert tight.contents[0] <= loose.contents[0]


def test_filters_move_copies():
    system = TestTubeSystem(
        alphabet=frozenset({"a", "b"}),
        terminal=frozenset({"a"}),
        tubes=2,
        axioms=(fs(ms("a"), ms("a b")), frozenset()),
        rules=((), ()),
        filters=((1, TubeFilter((SupportFilter(frozenset({"a"})),)), 2),),
        outputs=frozenset({2}),
    )
    state = closure(system, Bounds())
    assert state.contents[0] == fs(ms("a"), ms("a b"))  # original remains
    assert state.contents[1] == fs(ms("a"))
    assert results_of_state(system, state) == {ms("a")}
    assert not state.pruned


def test_results_respects_terminal_support():
    system = one_tube([], [ms("a1 b1")], {"a1", "b1"}, terminal={"a1"})
    assert results(system, Bounds()) == set()


def test_keep_empty_false_drops_empty_results():
    drip = parse_rule("DRIP (. | c | . ; a , .)")
    system = one_tube([drip], [ms("c")], {"a", "c"}, terminal={"a"})
    with_empty = closure(system, Bounds())
    assert EMPTY in with_empty.contents[0]
    without = closure(system, Bounds(keep_empty=False))
    assert EMPTY not in without.contents[0]
    assert not without.pruned


def test_drip1_in_engine():
    system = one_tube(
        [parse_rule("DRIP1 (. | c | . ; a , b)")],
        [ms("c p")],
        {"a", "b", "c", "p"},
    )
    state = closure(system, Bounds())
    assert ms("a p") in state.contents[0]
    assert ms("b") in state.contents[0]


def test_self_pairing_allowed():
    system = one_tube(
        [parse_rule("MATE (s | . , . | s ; .)")],
        [ms("s")],
        {"s"},
    )
    state = closure(system, Bounds(max_size=2, max_population=10, max_iterations=5))
    assert ms("s^2") in state.contents[0]


def test_validate_tts():
    good = one_tube([], [ms("a")], {"a"})
    assert validate_tts(good) == []

    bad_filter = TestTubeSystem(
        alphabet=frozenset({"a"}),
        terminal=frozenset(),
        tubes=2,
        axioms=(frozenset(), frozenset()),
        rules=((), ()),
        filters=((1, TubeFilter((SupportFilter(frozenset({"zz"})),)), 1),),
        outputs=frozenset(),
    )
    problems = validate_tts(bad_filter)
    assert any("distinct" in p for p in problems)
    assert any("outside the alphabet" in p for p in problems)

    stray = one_tube([], [ms("q")], {"a"})
    assert any("outside the alphabet" in p for p in validate_tts(stray))
    bad_terminal = TestTubeSystem(
        alphabet=frozenset({"a"}), terminal=frozenset({"zz"}), tubes=1,
        axioms=(frozenset(),), rules=((),), filters=(), outputs=frozenset(),
    )
    assert any("terminal" in p for p in validate_tts(bad_terminal))


def test_format_roundtrip():
    system = TestTubeSystem(
        alphabet=frozenset({"X", "Z", "l0", "a1"}),
        terminal=frozenset({"a1"}),
        tubes=2,
        axioms=(fs(ms("X"), ms("Z l0")), frozenset()),
        rules=((parse_rule("MATE (X | . , Z | l0 ; .)"),), ()),
        filters=((1, TubeFilter((SupportFilter(frozenset({"a1"})),
                                 SupportFilter(frozenset({"X", "a1"})))), 2),),
        outputs=frozenset({2}),
    )
    text = render_tts(system)
    back = parse_tts(text)
    assert render_tts(back) == text
    assert back.alphabet == system.alphabet
    assert back.axioms == system.axioms
    assert back.rules == system.rules
    assert back.outputs == system.outputs
    assert {f[1] for f in back.filters} == {TubeFilter(tuple(sorted(
        system.filters[0][1].branches, key=lambda b: " ".join(sorted(b.allowed)))))}


def _naive_closure_contents(system, bounds):
    """Reference saturation: recompute every production from scratch each
    round.  Independent of the frontier-driven engine's bookkeeping."""
    from matedrip.tts import _productions

    contents = [set() for _ in range(system.tubes)]
    population = 0
    for t in range(system.tubes):
        for v in system.axioms[t]:
            if len(v) <= bounds.max_size and (len(v) > 0 or bounds.keep_empty):
                contents[t].add(v)
                population += 1
    for _ in range(bounds.max_iterations + 1):
        fresh = [
            (t, v)
            for t, v in _productions(system, contents)
            if v not in contents[t]
            and len(v) <= bounds.max_size
            and (len(v) > 0 or bounds.keep_empty)
        ]
        if not fresh:
            break
        for t, v in sorted(fresh, key=lambda tv: (tv[0], tv[1].render())):
            if population >= bounds.max_population:
                return contents
            contents[t].add(v)
            population += 1
    return contents


def test_closure_matches_naive_reference(even):
    from matedrip.compilers import compile_thm1, compile_cor2, compile_cor3

    bounds = Bounds(max_size=9, max_population=4000, max_iterations=100)
    for build in (compile_thm1, compile_cor2, compile_cor3):
        system = build(even)
        state = closure(system, bounds)
        reference = _naive_closure_contents(system, bounds)
        assert [set(c) for c in state.contents] == reference


def test_format_errors():
    with pytest.raises(FormatError, match="line"):
        parse_tts("SYSTEM TTS\nTUBES x\n")
    with pytest.raises(FormatError):
        parse_tts("SYSTEM TTS\nALPHABET a\nTUBES 1\nAXIOM 1 a\n")
    with pytest.raises(FormatError):
        parse_tts("ALPHABET a\n")
    with pytest.raises(FormatError):
        parse_tts("SYSTEM TTS\nALPHABET a\nTUBES 1\nFILTER 1 -> 1 SUPPORT {a}\n")
