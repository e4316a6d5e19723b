"""Cross-check a compiled system against the register machine it came from.

The machine interpreter enumerates the accepted vectors up to a bound; the
compiled system is explored under explicit bounds and its terminal results
are read back as vectors over a1..ak.  The comparison is restricted to the
bound box.  Because these systems grow vesicles without limit, any bounded
exploration truncates somewhere; the report's `pruned` flag therefore means
something sharper than raw truncation: the boxed result set changed when the
exploration was re-run under strictly looser bounds.  A match with
pruned=false is stable evidence, not an artifact of the chosen bounds.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .compilers import CompileOptions, compile_machine, term_symbol
from .multiset import Multiset
from .regmach import RegisterMachine, enumerate_accepted
from .tp import TissueSystem, tp_run
from .tts import Bounds, closure, results_of_state

Vector = tuple[int, ...]

DEFAULT_MAX_STEPS = 60


@dataclass
class VerifyReport:
    machine: str
    construction: str
    fidelity: str
    normalized: bool
    k: int
    bound: int
    fuel: int
    engine_bounds: Bounds
    max_steps: int | None  # tissue runs only
    oracle: frozenset[Vector]
    system: frozenset[Vector]          # results with every coordinate <= bound
    beyond: frozenset[Vector]          # results outside the box (informational)
    excluded: frozenset[Vector]        # ignored on both sides (zero vector for cor2/cor3)
    engine_truncated: bool             # raw truncation flag of the base run
    pruned: bool                       # boxed results unstable under looser bounds
    verdict: str                       # "match" | "mismatch"
    missing: frozenset[Vector] = field(default_factory=frozenset)
    unexpected: frozenset[Vector] = field(default_factory=frozenset)

    @property
    def matched(self) -> bool:
        return self.verdict == "match"


def vector_of(vesicle: Multiset, k: int) -> Vector:
    return tuple(vesicle.count(term_symbol(i)) for i in range(1, k + 1))


def _system_vectors(system, k: int, bounds: Bounds, max_steps: int) -> tuple[set[Vector], bool]:
    """(vectors, raw truncation flag) for one exploration of the system."""
    if isinstance(system, TissueSystem):
        result_set, trace = tp_run(system, max_steps, bounds)
        return {vector_of(v, k) for v in result_set}, trace.pruned
    state = closure(system, bounds)
    return {vector_of(v, k) for v in results_of_state(system, state)}, state.pruned


def render_vector(vec: Vector) -> str:
    return ",".join(str(c) for c in vec)


def render_vector_set(vectors) -> str:
    if not vectors:
        return "(none)"
    return " ".join(render_vector(v) for v in sorted(vectors))


def run_verify(
    machine: RegisterMachine,
    machine_name: str,
    construction: str,
    *,
    bound: int,
    fuel: int,
    bounds: Bounds,
    max_steps: int = DEFAULT_MAX_STEPS,
    opts: CompileOptions = CompileOptions(),
    check_stability: bool = True,
) -> VerifyReport:
    k = machine.inputs
    system = compile_machine(machine, construction, opts)
    oracle = frozenset(enumerate_accepted(machine, bound, fuel))

    raw, truncated = _system_vectors(system, k, bounds, max_steps)
    boxed = {v for v in raw if all(c <= bound for c in v)}
    beyond = raw - boxed

    pruned = False
    if check_stability:
        loose_raw, _ = _system_vectors(system, k, bounds.loosened(), max_steps + 10)
        loose_boxed = {v for v in loose_raw if all(c <= bound for c in v)}
        pruned = boxed != loose_boxed

    excluded: frozenset[Vector] = frozenset()
    if construction in ("cor2", "cor3"):
        excluded = frozenset({(0,) * k})

    effective_system = frozenset(boxed) - excluded
    effective_oracle = oracle - excluded
    missing = effective_oracle - effective_system
    unexpected = effective_system - effective_oracle
    verdict = "match" if not missing and not unexpected else "mismatch"

    return VerifyReport(
        machine=machine_name,
        construction=construction,
        fidelity=opts.fidelity,
        normalized=opts.normalize,
        k=k,
        bound=bound,
        fuel=fuel,
        engine_bounds=bounds,
        max_steps=max_steps if isinstance(system, TissueSystem) else None,
        oracle=oracle,
        system=frozenset(boxed),
        beyond=frozenset(beyond),
        excluded=excluded,
        engine_truncated=truncated,
        pruned=pruned,
        verdict=verdict,
        missing=frozenset(missing),
        unexpected=frozenset(unexpected),
    )


def format_report(report: VerifyReport) -> str:
    b = report.engine_bounds
    lines = [
        f"machine: {report.machine}",
        f"construction: {report.construction} ({report.fidelity}"
        + (", normalized)" if report.normalized else ", as written)"),
        f"bound: {report.bound}  fuel: {report.fuel}",
        f"engine bounds: size={b.max_size} pop={b.max_population} iter={b.max_iterations}"
        + (f" steps={report.max_steps}" if report.max_steps is not None else "")
        + f" keep-empty={'yes' if b.keep_empty else 'no'}",
        f"oracle:  {render_vector_set(report.oracle)}",
        f"system:  {render_vector_set(report.system)}",
    ]
    if report.beyond:
        lines.append(f"beyond bound: {render_vector_set(report.beyond)}")
    if report.excluded:
        lines.append(f"excluded: {render_vector_set(report.excluded)}")
    if report.missing:
        lines.append(f"missing: {render_vector_set(report.missing)}")
    if report.unexpected:
        lines.append(f"unexpected: {render_vector_set(report.unexpected)}")
    lines.append(f"engine truncated: {'yes' if report.engine_truncated else 'no'}")
    lines.append(f"pruned: {'yes' if report.pruned else 'no'}")
    lines.append(f"verdict: {report.verdict.upper()}")
    return "\n".join(lines)
