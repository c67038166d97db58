"""Level-by-level affine scheduling.

Each level solves for one transform row per statement: the row must carry
every live dependence forward (difference non-negative on the dependence
polyhedron) while a parametric bound on the differences is minimized
lexicographically, then per-statement trivial solutions and linearly dependent
rows are excluded.  The integer and rational variants share everything but
the final solve; rational solutions are rescaled to integers afterwards.

When no row exists the scheduler first retires dependences already satisfied
at an earlier level, and failing that distributes the strongly connected
components apart with a constant level.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from math import lcm
from typing import Mapping, Sequence

from . import ratlp
from .farkas import (
    EQ, GE, ZERO, ConstraintSystem,
    bounding_constraints, coefficient_variables, legality_constraints,
)
from .model import (
    AffineTransform, Band, Cut, DDG, DependencePolyhedron, Program,
    SchedulingError, Statement, satisfaction_level, scc_decompose,
)

LP = "lp"
ILP = "ilp"

#: Joint axis assignments tried before giving up in the no-skew mode.
MAX_AXIS_COMBOS = 4096


@dataclass(frozen=True)
class SchedulerConfig:
    mode: str = LP
    lexmin: str = "staged"  # or "weighted"
    weight_base: int = 1000
    allow_shift: bool = True
    allow_parametric_shift: bool = True
    allow_skew: bool = True
    node_limit: int = 100_000


DEFAULT = SchedulerConfig()


# -- exact linear algebra over rows -------------------------------------------


def rref(rows: Sequence[Sequence[Fraction]]):
    """Reduced row echelon form; returns (nonzero rows, pivot columns)."""
    mat = [list(map(Fraction, r)) for r in rows]
    pivots: list[int] = []
    r = 0
    ncols = len(mat[0]) if mat else 0
    for col in range(ncols):
        pivot = next((i for i in range(r, len(mat)) if mat[i][col]), None)
        if pivot is None:
            continue
        mat[r], mat[pivot] = mat[pivot], mat[r]
        lead = mat[r][col]
        mat[r] = [x / lead for x in mat[r]]
        for i in range(len(mat)):
            if i != r and mat[i][col]:
                f = mat[i][col]
                mat[i] = [x - f * y for x, y in zip(mat[i], mat[r])]
        pivots.append(col)
        r += 1
        if r == len(mat):
            break
    return mat[:r], pivots


def row_rank(rows: Sequence[Sequence[Fraction]]) -> int:
    return len(rref(rows)[0])


def nullspace_basis(rows: Sequence[Sequence[Fraction]], ncols: int):
    """Integral basis of the right null space of the row span.

    Each vector's leading nonzero entry is made positive; with non-negative
    coefficient variables the summed independence constraint would otherwise
    often point away from the feasible orthant.
    """
    red, pivots = rref(rows)
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for fc in free:
        vec = [ZERO] * ncols
        vec[fc] = Fraction(1)
        for r, pc in enumerate(pivots):
            vec[pc] = -red[r][fc]
        den = lcm(*(x.denominator for x in vec))
        vec = [x * den for x in vec]
        lead = next(x for x in vec if x)
        if lead < 0:
            vec = [-x for x in vec]
        basis.append(tuple(vec))
    return basis


def independence_vector(rows: Sequence[Sequence[Fraction]], ncols: int):
    """Sum of the null-space basis of the rows found so far.

    Requiring a positive product with this vector forces the next row out of
    the span.  The converse does not hold: some independent rows violate it,
    a deliberate single-row under-approximation that keeps the system linear.
    Returns None when the rows already have full rank.
    """
    basis = nullspace_basis(rows, ncols)
    if not basis:
        return None
    return tuple(sum(col) for col in zip(*basis))


# -- constraint assembly ------------------------------------------------------


class DependenceSystems:
    """Per-dependence legality and bounding rows, derived once and reused."""

    def __init__(self, program: Program):
        self._stmts = {s.id: s for s in program.statements}
        self._legal: dict[int, ConstraintSystem] = {}
        self._bound: dict[int, ConstraintSystem] = {}

    def legality(self, dep: DependencePolyhedron) -> ConstraintSystem:
        if id(dep) not in self._legal:
            self._legal[id(dep)] = legality_constraints(
                dep, self._stmts[dep.src], self._stmts[dep.dst])
        return self._legal[id(dep)]

    def bounding(self, dep: DependencePolyhedron) -> ConstraintSystem:
        if id(dep) not in self._bound:
            self._bound[id(dep)] = bounding_constraints(
                dep, self._stmts[dep.src], self._stmts[dep.dst])
        return self._bound[id(dep)]


def bound_variables(program: Program) -> list[str]:
    return [f"u.{p}" for p in program.params] + ["w"]


def base_system(program: Program, statements: Sequence[Statement],
                free_shifts: bool = False) -> ConstraintSystem:
    """Empty system over the scheduling variables in canonical order.

    All variables are non-negative; `free_shifts` lifts that for constant and
    parametric shifts, which the shift pass needs to move in both directions.
    """
    variables = list(bound_variables(program))
    lower: dict[str, Fraction | None] = {}
    for s in statements:
        names = coefficient_variables(s, program.params)
        variables += names
        if free_shifts:
            for v in names:
                if v.startswith(("d.", "c0.")):
                    lower[v] = None
    return ConstraintSystem(variables, (), lower)


def absorb(base: ConstraintSystem, donors: Sequence[ConstraintSystem]) -> ConstraintSystem:
    """Copy rows of the donor systems into `base`'s variable space.

    Donor bounds are ignored: legality and bounding rows are valid whatever
    bounds the assembled problem chooses for the coefficients.
    """
    rows = []
    for s in donors:
        for r in s.rows:
            rows.append(base.row_from(
                {v: c for v, c in zip(s.variables, r.coeffs) if c}, r.const, r.kind))
    return base.with_rows(rows)


# -- one level ----------------------------------------------------------------


@dataclass(frozen=True)
class Hyperplane:
    raw: Mapping[str, Fraction]
    scaled: Mapping[str, Fraction]
    factor: int
    objective: tuple[Fraction, ...]


def _lexmin_solve(system: ConstraintSystem, config: SchedulerConfig) -> ratlp.LPResult:
    objectives = [{v: 1} for v in system.variables]
    if config.mode == ILP:
        problem = ratlp.LPProblem.of(system, objectives, system.variables)
        return ratlp.solve_ilp(problem, config.node_limit)
    problem = ratlp.LPProblem.of(system, objectives)
    return ratlp.solve_lexmin(problem, config.lexmin, config.weight_base)


def _statement_state(statements: Sequence[Statement], prior: Mapping[str, Sequence]):
    """Iterator parts of the rows found so far and completion per statement."""
    parts = {}
    complete = {}
    for s in statements:
        rows = [r[: s.dim] for r in prior.get(s.id, ())]
        nonzero = [r for r in rows if any(r)]
        parts[s.id] = nonzero
        complete[s.id] = s.dim == 0 or row_rank(nonzero) == s.dim
    return parts, complete


def find_hyperplane(program: Program, statements: Sequence[Statement],
                    deps: Sequence[DependencePolyhedron],
                    prior: Mapping[str, Sequence], config: SchedulerConfig,
                    systems: DependenceSystems,
                    record: list | None = None) -> Hyperplane | None:
    """One more transform row per statement, or None when none exists.

    Statements whose rows already span their iteration space get zero rows
    and stop influencing the problem.
    """
    parts, complete = _statement_state(statements, prior)
    if all(complete.values()):
        return None

    base = base_system(program, statements)
    donors = []
    for dep in deps:
        donors.append(systems.legality(dep))
        donors.append(systems.bounding(dep))
    system = absorb(base, donors)

    rows = []
    active = []
    for s in statements:
        names = coefficient_variables(s, program.params)
        if complete[s.id]:
            rows += [system.row_from({v: 1}, 0, EQ) for v in names]
            continue
        active.append(s)
        rows.append(system.row_from(
            {f"c.{s.id}.{it}": 1 for it in s.domain.iterators}, -1))
        guide = independence_vector(parts[s.id], s.dim) if parts[s.id] else None
        if guide is not None:
            rows.append(system.row_from(
                {f"c.{s.id}.{it}": a for it, a in zip(s.domain.iterators, guide) if a},
                -1))
    if not config.allow_shift:
        rows += [system.row_from({f"c0.{s.id}": 1}, 0, EQ) for s in statements]
    if not config.allow_parametric_shift:
        rows += [system.row_from({f"d.{s.id}.{p}": 1}, 0, EQ)
                 for s in statements for p in program.params]
    system = system.with_rows(rows)

    if config.allow_skew:
        result = _lexmin_solve(system, config)
        if not result:
            return None
        chosen = system
    else:
        result, chosen = _best_axis_solve(system, active, parts, config)
        if result is None:
            return None
    if record is not None:
        record.append((chosen, dict(result.assignment)))

    scaled = ratlp.scale_to_integral(result.assignment,
                                     groups=[list(result.assignment)])
    return Hyperplane(dict(result.assignment), scaled.values, scaled.factor,
                      result.objective)


def _best_axis_solve(system: ConstraintSystem, active: Sequence[Statement],
                     parts: Mapping[str, Sequence], config: SchedulerConfig):
    """No-skew search: each statement's row must be a scaled unit vector on an
    axis its earlier rows leave untouched.  All joint axis assignments are
    tried and the lexicographically best outcome wins; ties cannot occur since
    the objective covers every variable."""
    choices = []
    for s in active:
        used = [k for k in range(s.dim) if any(r[k] for r in parts[s.id])]
        axes = [k for k in range(s.dim) if k not in used]
        choices.append([(s, k) for k in axes])
    total = 1
    for c in choices:
        total *= len(c)
    if total > MAX_AXIS_COMBOS:
        raise SchedulingError(f"axis search space too large ({total} assignments)")

    best = None
    best_sys = None
    for combo in itertools.product(*choices):
        pinned = system
        bounds = {}
        pins = []
        for s, axis in combo:
            for k, it in enumerate(s.domain.iterators):
                var = f"c.{s.id}.{it}"
                if k == axis:
                    bounds[var] = Fraction(1)
                else:
                    pins.append(pinned.row_from({var: 1}, 0, EQ))
        pinned = pinned.with_rows(pins).with_lower(bounds)
        result = _lexmin_solve(pinned, config)
        if result and (best is None or result.objective < best.objective):
            best, best_sys = result, pinned
    return best, best_sys


# -- the full scheduler -------------------------------------------------------


@dataclass(frozen=True)
class LevelStep:
    """What happened at one schedule level of one component."""

    component: int
    level: int
    kind: str  # "loop", "cut" or "component-cut"
    statements: tuple[str, ...]
    raw: Mapping[str, Fraction] | None = None
    scaled: Mapping[str, Fraction] | None = None
    factor: int = 1
    parallel: bool = False


@dataclass(frozen=True)
class ScheduleResult:
    program: Program
    config: SchedulerConfig
    transform: AffineTransform
    steps: tuple[LevelStep, ...]
    components: tuple[tuple[str, ...], ...]


def _constant_row(stmt: Statement, nparams: int, value: int):
    return (ZERO,) * (stmt.dim + nparams) + (Fraction(value),)


def _partial_transform(program: Program, rows: Mapping[str, list]) -> AffineTransform:
    dims = {s.id: s.domain.iterators for s in program.statements}
    return AffineTransform(program.params,
                           dims, {sid: tuple(r) for sid, r in rows.items()})


def _is_parallel(program: Program, assignment: Mapping[str, Fraction]) -> bool:
    return all(not assignment.get(v) for v in bound_variables(program))


def schedule(program: Program, deps: Sequence[DependencePolyhedron],
             config: SchedulerConfig = DEFAULT,
             record: list | None = None) -> ScheduleResult:
    """Full transform: weakly connected components are scheduled separately
    (each with its own bound minimization) under an outer distribution level
    when there is more than one."""
    deps = tuple(d for d in deps if d.ordering)
    by_id = {s.id: s for s in program.statements}
    ordered = sorted(program.statements, key=lambda s: s.textual_order)
    ddg = DDG(tuple(s.id for s in ordered), deps)
    components = ddg.components()
    systems = DependenceSystems(program)

    rows: dict[str, list] = {s.id: [] for s in ordered}
    bands: list[Band] = []
    cuts: list[Cut] = []
    steps: list[LevelStep] = []

    start = 1
    if len(components) > 1:
        for ci, comp in enumerate(components):
            for sid in comp:
                rows[sid].append(_constant_row(by_id[sid], len(program.params), ci))
        cuts.append(Cut(1, components))
        steps.append(LevelStep(-1, 1, "component-cut",
                               tuple(ddg.vertices)))
        start = 2

    for ci, comp in enumerate(components):
        stmts = [by_id[sid] for sid in comp]
        live = [d for d in deps if d.src in comp]
        _schedule_component(program, ci, stmts, live, config, systems,
                            rows, bands, cuts, steps, start, record)

    transform = AffineTransform(
        program.params,
        {s.id: s.domain.iterators for s in ordered},
        {sid: tuple(r) for sid, r in rows.items()},
        tuple(bands),
        tuple(sorted(cuts, key=lambda c: c.level)),
    )
    return ScheduleResult(program, config, transform,
                          tuple(steps), components)


def _schedule_component(program, ci, stmts, live, config, systems,
                        rows, bands, cuts, steps, start, record):
    comp = tuple(s.id for s in stmts)
    nparams = len(program.params)
    level = start
    band_start = start
    band_parallel = False

    def close_band(end):
        nonlocal band_start
        if end >= band_start:
            bands.append(Band(band_start, end, True, band_parallel, comp))

    while True:
        _, complete = _statement_state(stmts, rows)
        if all(complete.values()):
            close_band(level - 1)
            return

        hp = find_hyperplane(program, stmts, live, rows, config, systems, record)
        if hp is not None:
            for s in stmts:
                if complete[s.id]:
                    continue
                names = coefficient_variables(s, program.params)
                rows[s.id].append(tuple(hp.scaled[v] for v in names))
            parallel = _is_parallel(program, hp.scaled)
            if level == band_start:
                band_parallel = parallel
            steps.append(LevelStep(ci, level, "loop", comp, hp.raw, hp.scaled,
                                   hp.factor, parallel))
            level += 1
            continue

        # No row at this level: retire satisfied dependences, else distribute.
        close_band(level - 1)
        band_start = level
        current = _partial_transform(program, rows)
        satisfied = [d for d in live
                     if satisfaction_level(d, current, level - 1) is not None]
        if satisfied:
            dropped = set(map(id, satisfied))
            live[:] = [d for d in live if id(d) not in dropped]
            continue

        sccs = scc_decompose(DDG(comp, tuple(live)))
        if len(sccs) <= 1:
            raise SchedulingError(
                f"no transformation row exists for {comp} and nothing to distribute")
        ordinal = {sid: k for k, group in enumerate(sccs) for sid in group}
        for s in stmts:
            rows[s.id].append(_constant_row(s, nparams, ordinal[s.id]))
        cuts.append(Cut(level, sccs))
        steps.append(LevelStep(ci, level, "cut", comp))
        current = _partial_transform(program, rows)
        before = len(live)
        live[:] = [d for d in live
                   if satisfaction_level(d, current, level) is None]
        if len(live) == before:
            raise SchedulingError(
                f"distribution of {comp} made no progress at level {level}")
        level += 1
        band_start = level
