"""Passes that turn a 0/1 permutation into the final schedule.

`scale_and_shift` re-solves every loop level of a permutation as a small
rational LP: the permuted coefficient may grow past 1 and the shifts are
free, so fused statements can slide against each other; results are scaled
to integers per connected component.  `introduce_skew` then repairs levels
with a negative dependence component by replacing the level's row with a
non-negative combination of itself and the rows above it.  `dfp_schedule`
chains the conflict-graph coloring with both passes.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Mapping, Optional, Sequence

from . import ratlp
from .farkas import ConstraintSystem
from .fcg import Coloring, color_fcg, permute_and_fuse
from .model import (
    DDG,
    AffineTransform,
    Band,
    DependencePolyhedron,
    Program,
    SchedulingError,
    component_range,
    satisfaction_level,
)
from .pluto import DependenceSystems, absorb, base_system, bound_variables

ZERO = Fraction(0)


@dataclass(frozen=True)
class ScaleStep:
    """Outcome of one level's solve: integer factors per component and the
    parallelism of the level (no parametric or constant bound needed)."""

    level: int
    kind: str  # "loop" or "cut"
    factors: tuple[int, ...]
    parallel: bool
    raw: Optional[Mapping[str, Fraction]]


def _split_shift_names(sid: str, params: Sequence[str]):
    """Free shifts enter the lexmin order as (positive, negative) halves, so
    minimizing both in turn lands on the smallest-magnitude shift."""
    pairs = {}
    for p in params:
        pairs[f"d.{sid}.{p}"] = (f"dp.{sid}.{p}", f"dn.{sid}.{p}")
    pairs[f"c0.{sid}"] = (f"c0p.{sid}", f"c0n.{sid}")
    return pairs


def _component_groups(program: Program, deps: Sequence[DependencePolyhedron],
                      names_of) -> tuple[tuple[tuple[str, ...], ...], list[list[str]]]:
    ddg = DDG(tuple(s.id for s in program.statements), tuple(deps))
    components = ddg.components()
    by_id = {s.id: s for s in program.statements}
    groups = [[v for sid in comp for v in names_of(by_id[sid])] for comp in components]
    return components, groups


def _level_system(program: Program, systems: DependenceSystems,
                  live: Sequence[DependencePolyhedron],
                  active: Mapping[str, int]):
    """Legality and bounding of `live` with the permuted dimension of every
    active statement at least 1, everything else zero, shifts split free.

    Variables that are forced to zero (non-permuted coefficients, and the
    shifts of statements that do not loop at this level) are left out of the
    system entirely rather than pinned with equality rows; their terms in the
    donor rows vanish, which keeps the tableau small.
    """
    variables = list(bound_variables(program))
    split: dict[str, tuple[str, str]] = {}
    dead: set[str] = set()
    lower = {}
    for s in program.statements:
        k = active.get(s.id)
        pairs = _split_shift_names(s.id, program.params)
        for i, it in enumerate(s.domain.iterators):
            var = f"c.{s.id}.{it}"
            if i == k:
                variables.append(var)
                lower[var] = Fraction(1)
            else:
                dead.add(var)
        if k is None:
            # the statement does not loop here, so its whole row is zero
            dead.update(pairs)
        else:
            split.update(pairs)
            for pos, neg in pairs.values():
                variables += [pos, neg]
    system = ConstraintSystem(variables)

    rows = []
    for d in live:
        for donor in (systems.legality(d), systems.bounding(d)):
            for r in donor.rows:
                acc: dict[str, Fraction] = {}
                for v, c in zip(donor.variables, r.coeffs):
                    if not c or v in dead:
                        continue
                    if v in split:
                        pos, neg = split[v]
                        acc[pos] = acc.get(pos, ZERO) + c
                        acc[neg] = acc.get(neg, ZERO) - c
                    else:
                        acc[v] = acc.get(v, ZERO) + c
                rows.append(system.row_from(acc, r.const, r.kind))
    return system.with_rows(rows).with_lower(lower), split


def _merge_shifts(assignment: Mapping[str, Fraction],
                  split: Mapping[str, tuple[str, str]]) -> dict[str, Fraction]:
    out = {v: x for v, x in assignment.items()}
    for var, (pos, neg) in split.items():
        if pos in out or neg in out:
            out[var] = out.pop(pos, ZERO) - out.pop(neg, ZERO)
    return out


def _unit_index(part) -> Optional[int]:
    hot = [i for i, x in enumerate(part) if x]
    return hot[0] if hot else None


def scale_and_shift(program: Program, deps: Sequence[DependencePolyhedron],
                    permutation: AffineTransform,
                    systems: Optional[DependenceSystems] = None,
                    record: Optional[list] = None):
    """Re-solve each loop level of the permutation with free shifts.

    Levels are handled outermost first; a dependence already satisfied by the
    scaled rows above (cuts included) no longer constrains deeper levels.
    Returns the scaled transform and one `ScaleStep` per level.
    """
    systems = systems or DependenceSystems(program)
    ordering = [d for d in deps if d.ordering]

    def names_of(s):
        names = [f"c.{s.id}.{it}" for it in s.domain.iterators]
        for pos, neg in _split_shift_names(s.id, program.params).values():
            names += [pos, neg]
        return names

    components, groups = _component_groups(program, deps, names_of)
    cut_levels = {c.level for c in permutation.cuts}
    dims = {s.id: s.domain.iterators for s in program.statements}
    acc: dict[str, list] = {s.id: [] for s in program.statements}
    steps = []

    for level in range(1, permutation.levels + 1):
        if level in cut_levels:
            for s in program.statements:
                row = permutation.row(s.id, level)
                if row is not None:
                    acc[s.id].append(row)
            steps.append(ScaleStep(level, "cut", (), False, None))
            continue

        partial = AffineTransform(program.params, dims,
                                  {sid: tuple(rows) for sid, rows in acc.items()})
        live = [d for d in ordering if satisfaction_level(d, partial) is None]
        active = {}
        for s in program.statements:
            part = permutation.iterator_part(s.id, level)
            if part is not None and any(part):
                active[s.id] = _unit_index(part)

        system, split = _level_system(program, systems, live, active)
        result = ratlp.solve_lexmin(
            ratlp.LPProblem.of(system, [{v: 1} for v in system.variables]))
        if not result:
            raise SchedulingError(
                f"no legal scaling and shifting exists at level {level}")
        if record is not None:
            record.append((system, dict(result.assignment)))
        scaled = ratlp.scale_to_integral(result.assignment, groups)
        merged = _merge_shifts(scaled.values, split)

        for s in program.statements:
            if s.id in active:
                k = active[s.id]
                row = [ZERO] * s.dim
                row[k] = merged[f"c.{s.id}.{s.domain.iterators[k]}"]
                row += [merged[f"d.{s.id}.{p}"] for p in program.params]
                row.append(merged[f"c0.{s.id}"])
                acc[s.id].append(tuple(row))
            elif permutation.row(s.id, level) is not None:
                acc[s.id].append(permutation.row(s.id, level))
        parallel = all(not result.assignment.get(v, ZERO)
                       for v in bound_variables(program))
        steps.append(ScaleStep(level, "loop", scaled.group_factors, parallel,
                               _merge_shifts(result.assignment, split)))

    final = AffineTransform(program.params, dims,
                            {sid: tuple(rows) for sid, rows in acc.items()},
                            (), permutation.cuts)
    return final, tuple(steps)


# -- skewing -------------------------------------------------------------------


@dataclass(frozen=True)
class SkewOutcome:
    """`transform` is the input object itself when no level needed a skew."""

    transform: AffineTransform
    skewed: tuple[int, ...]
    updates: Mapping[int, ScaleStep]
    diagnostics: tuple[str, ...]


def _negative_deps(deps, transform, level):
    bad = []
    for d in deps:
        m = component_range(d, transform, level)
        if m is None or m < 0:
            bad.append(d)
    return bad


def _skew_level(program: Program, systems: DependenceSystems,
                ordering: Sequence[DependencePolyhedron],
                transform: AffineTransform, level: int, groups_of):
    """Replace the level's rows by non-negative combinations with outer rows.

    Each statement present at the level gets a weight of at least 1 on its
    own row (keeping the rows linearly independent) and free non-negative
    weights on every outer row.  Legality over all ordering dependences and
    the usual bounding make this the same lexmin shape as the scheduler.
    """
    base = base_system(program, program.statements, free_shifts=True)
    donors = []
    for d in ordering:
        donors.append(systems.legality(d))
        donors.append(systems.bounding(d))
    base = absorb(base, donors)

    mapping: dict[str, object] = {}
    extra: list[str] = []
    extra_lower: dict[str, Fraction] = {}
    rows_of: dict[str, list[tuple[int, tuple]]] = {}
    for s in program.statements:
        own = transform.row(s.id, level)
        outer = [(k, transform.row(s.id, k)) for k in range(1, level)]
        outer = [(k, r) for k, r in outer if r is not None and any(r)]
        names = [f"c.{s.id}.{it}" for it in s.domain.iterators] \
            + [f"d.{s.id}.{p}" for p in program.params] + [f"c0.{s.id}"]
        if own is None or not any(own):
            for v in names:
                mapping[v] = 0
            continue
        rows_of[s.id] = outer
        alpha = f"a.{s.id}"
        extra.append(alpha)
        extra_lower[alpha] = Fraction(1)
        betas = []
        for k, _ in outer:
            b = f"b.{s.id}.{k}"
            extra.append(b)
            betas.append(b)
        for j, v in enumerate(names):
            form = {alpha: own[j]}
            for (k, r), b in zip(outer, betas):
                form[b] = r[j]
            mapping[v] = {tv: tc for tv, tc in form.items() if tc}

    system = base.compose(mapping, extra, extra_lower)
    result = ratlp.solve_lexmin(
        ratlp.LPProblem.of(system, [{v: 1} for v in system.variables]))
    if not result:
        return None, system

    comps, groups = groups_of(lambda s: [f"a.{s.id}"] +
                              [f"b.{s.id}.{k}" for k, _ in rows_of.get(s.id, ())])
    scaled = ratlp.scale_to_integral(result.assignment, groups)

    new_rows = dict(transform.rows)
    for s in program.statements:
        if s.id not in rows_of:
            continue
        own = transform.row(s.id, level)
        combo = [scaled.values.get(f"a.{s.id}", ZERO) * x for x in own]
        for k, r in rows_of[s.id]:
            weight = scaled.values.get(f"b.{s.id}.{k}", ZERO)
            if weight:
                combo = [c + weight * x for c, x in zip(combo, r)]
        rows = list(new_rows[s.id])
        rows[level - 1] = tuple(combo)
        new_rows[s.id] = tuple(rows)
    out = AffineTransform(transform.params, transform.dims, new_rows,
                          transform.bands, transform.cuts)
    parallel = all(not result.assignment.get(v, ZERO)
                   for v in bound_variables(program))
    step = ScaleStep(level, "loop", scaled.group_factors, parallel,
                     dict(result.assignment))
    return (out, step), system


def introduce_skew(program: Program, deps: Sequence[DependencePolyhedron],
                   transform: AffineTransform,
                   systems: Optional[DependenceSystems] = None,
                   record: Optional[list] = None) -> SkewOutcome:
    """Fix levels whose dependence components go negative.

    Scans outermost first; each offending level is replaced before deeper
    ones are examined.  When some level admits no legal combination the nest
    is not tileable as permuted: the input transform is returned untouched
    with a diagnostic.  With no negative component anywhere the input object
    itself is returned.
    """
    systems = systems or DependenceSystems(program)
    ordering = [d for d in deps if d.ordering]

    def groups_of(names):
        return _component_groups(program, deps, names)

    current = transform
    skewed: list[int] = []
    updates: dict[int, ScaleStep] = {}
    for level in range(1, transform.levels + 1):
        bad = _negative_deps(ordering, current, level)
        if not bad:
            continue
        solved, system = _skew_level(program, systems, ordering, current,
                                     level, groups_of)
        if solved is None:
            labels = ", ".join(d.label for d in bad)
            return SkewOutcome(
                transform, (), {},
                (f"level {level} has a negative component ({labels}) "
                 f"but no legal skew exists; the nest is not tileable",))
        current, step = solved
        if record is not None:
            record.append((system, dict(step.raw)))
        skewed.append(level)
        updates[level] = step
    if not skewed:
        return SkewOutcome(transform, (), {}, ())
    return SkewOutcome(current, tuple(skewed), updates, ())


# -- the full pipeline ---------------------------------------------------------


@dataclass(frozen=True)
class DfpResult:
    program: Program
    coloring: Coloring
    permutation: AffineTransform
    scaled: AffineTransform
    transform: AffineTransform
    steps: tuple[ScaleStep, ...]
    skew: SkewOutcome


def _band_permutable(ordering, transform, start, end):
    for d in ordering:
        sat = satisfaction_level(d, transform, start - 1)
        if sat is not None:
            continue
        for level in range(start, end + 1):
            m = component_range(d, transform, level)
            if m is None or m < 0:
                return False
    return True


def _bands(program: Program, deps: Sequence[DependencePolyhedron],
           transform: AffineTransform, steps: Sequence[ScaleStep]) -> tuple[Band, ...]:
    ordering = [d for d in deps if d.ordering]
    by_level = {s.level: s for s in steps}
    cut_levels = {c.level for c in transform.cuts}
    bands = []
    start = None
    for level in range(1, transform.levels + 2):
        is_loop = level <= transform.levels and level not in cut_levels
        if is_loop and start is None:
            start = level
        elif not is_loop and start is not None:
            stmts = tuple(s.id for s in program.statements
                          if len(transform.rows[s.id]) >= start)
            first = by_level.get(start)
            bands.append(Band(
                start, level - 1,
                _band_permutable(ordering, transform, start, level - 1),
                bool(first and first.parallel), stmts))
            start = None
    return tuple(bands)


def dfp_schedule(program: Program, deps: Sequence[DependencePolyhedron],
                 systems: Optional[DependenceSystems] = None,
                 record: Optional[list] = None) -> DfpResult:
    """Conflict-graph coloring, then scaling/shifting, then skewing."""
    systems = systems or DependenceSystems(program)
    coloring = color_fcg(program, deps, systems)
    permutation = permute_and_fuse(program, coloring)
    scaled, steps = scale_and_shift(program, deps, permutation, systems, record)
    skew = introduce_skew(program, deps, scaled, systems, record)
    merged = tuple(skew.updates.get(s.level, s) for s in steps)
    final = replace(skew.transform,
                    bands=_bands(program, deps, skew.transform, merged),
                    cuts=skew.transform.cuts)
    return DfpResult(program, coloring, permutation, scaled, final,
                     merged, skew)
