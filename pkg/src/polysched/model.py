"""Program representation: iteration domains, dependences, transforms.

Statements are perfectly nested loops executed one nest after another in
textual order.  A dependence is a polyhedron of (source instance, target
instance, parameters) points; the dependence graph caches its strongly
connected components.  An affine transform is a list of rows per statement,
each row giving iterator coefficients, parameter-shift coefficients and a
constant shift.  All types are immutable after construction.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Mapping, Sequence

from .farkas import EQ, GE, ConstraintSystem, ZERO
from . import ratlp

RAW = "RAW"
WAR = "WAR"
WAW = "WAW"
RAR = "RAR"

#: Dependence kinds that constrain execution order.  Read-read pairs are kept
#: in the graph for fusion analysis but can never be violated.
ORDERING_KINDS = (RAW, WAR, WAW)


class SchedulingError(RuntimeError):
    """An impossible state: progress guarantees or proved properties failed."""


@dataclass(frozen=True)
class IndexSet:
    """Affine iteration domain over iterators and program parameters."""

    iterators: tuple[str, ...]
    params: tuple[str, ...]
    system: ConstraintSystem

    def __post_init__(self):
        expect = tuple(self.iterators) + tuple(self.params)
        if self.system.variables != expect:
            raise ValueError(f"domain variables {self.system.variables} != {expect}")

    @property
    def dim(self) -> int:
        return len(self.iterators)


@dataclass(frozen=True)
class AccessFunction:
    """One array reference: affine map from iterators and parameters to cells."""

    array: str
    kind: str  # "read" or "write"
    rows: tuple[tuple[int, ...], ...]


@dataclass(frozen=True)
class Statement:
    id: str
    domain: IndexSet
    accesses: tuple[AccessFunction, ...]
    textual_order: int

    @property
    def dim(self) -> int:
        return self.domain.dim


@dataclass(frozen=True)
class Program:
    params: tuple[str, ...]
    statements: tuple[Statement, ...]

    def __post_init__(self):
        ids = [s.id for s in self.statements]
        if len(set(ids)) != len(ids):
            raise ValueError("duplicate statement ids")

    def statement(self, sid: str) -> Statement:
        for s in self.statements:
            if s.id == sid:
                return s
        raise KeyError(sid)

    def coefficient_order(self) -> list[str]:
        """Canonical variable order for scheduling systems: bounding
        coefficients first, then per statement its iterator coefficients,
        parameter shifts and constant shift."""
        out = [f"u.{p}" for p in self.params] + ["w"]
        for s in self.statements:
            out += [f"c.{s.id}.{it}" for it in s.domain.iterators]
            out += [f"d.{s.id}.{p}" for p in self.params]
            out.append(f"c0.{s.id}")
        return out


@dataclass(frozen=True, eq=False)
class DependencePolyhedron:
    """Instance-pair polyhedron between a source and a target statement.

    The relation's variables are the source instance coordinates, the target
    instance coordinates, then the parameters, all unbounded (domain rows and
    explicit parameter non-negativity carry the bounds).
    """

    src: str
    dst: str
    kind: str
    src_vars: tuple[str, ...]
    dst_vars: tuple[str, ...]
    params: tuple[str, ...]
    relation: ConstraintSystem
    label: str = ""

    def __post_init__(self):
        expect = self.src_vars + self.dst_vars + self.params
        if self.relation.variables != expect:
            raise ValueError("relation variables out of order")

    def __repr__(self):
        return f"<{self.kind} {self.src}->{self.dst} {self.label}>"

    @property
    def ordering(self) -> bool:
        return self.kind in ORDERING_KINDS


@dataclass(frozen=True)
class DDG:
    """Data dependence graph over statement ids."""

    vertices: tuple[str, ...]
    edges: tuple[DependencePolyhedron, ...]

    def outgoing(self, sid: str):
        return [e for e in self.edges if e.src == sid]

    def between(self, a: str, b: str):
        return [e for e in self.edges if {e.src, e.dst} == {a, b} or
                (a == b and e.src == a and e.dst == a)]

    def without(self, drop) -> "DDG":
        dropped = set(id(e) for e in drop)
        return DDG(self.vertices, tuple(e for e in self.edges if id(e) not in dropped))

    def sccs(self) -> tuple[tuple[str, ...], ...]:
        return scc_decompose(self)

    def components(self) -> tuple[tuple[str, ...], ...]:
        """Weakly connected components, ordered by first vertex appearance."""
        index = {v: i for i, v in enumerate(self.vertices)}
        parent = list(range(len(self.vertices)))

        def find(i):
            while parent[i] != i:
                parent[i] = parent[parent[i]]
                i = parent[i]
            return i

        for e in self.edges:
            a, b = find(index[e.src]), find(index[e.dst])
            if a != b:
                parent[max(a, b)] = min(a, b)
        groups: dict[int, list[str]] = {}
        for v in self.vertices:
            groups.setdefault(find(index[v]), []).append(v)
        return tuple(tuple(groups[r]) for r in sorted(groups))


def scc_decompose(ddg: DDG) -> tuple[tuple[str, ...], ...]:
    """Strongly connected components in topological order of the condensation.

    Components and their members follow the graph's vertex order, so repeated
    runs agree exactly.
    """
    order = {v: i for i, v in enumerate(ddg.vertices)}
    succ: dict[str, list[str]] = {v: [] for v in ddg.vertices}
    for e in ddg.edges:
        if e.dst not in succ[e.src]:
            succ[e.src].append(e.dst)
    for v in succ:
        succ[v].sort(key=order.__getitem__)

    index: dict[str, int] = {}
    low: dict[str, int] = {}
    on_stack: set[str] = set()
    stack: list[str] = []
    components: list[tuple[str, ...]] = []
    counter = 0

    for root in ddg.vertices:
        if root in index:
            continue
        work = [(root, iter(succ[root]))]
        index[root] = low[root] = counter
        counter += 1
        stack.append(root)
        on_stack.add(root)
        while work:
            v, it = work[-1]
            advanced = False
            for nxt in it:
                if nxt not in index:
                    index[nxt] = low[nxt] = counter
                    counter += 1
                    stack.append(nxt)
                    on_stack.add(nxt)
                    work.append((nxt, iter(succ[nxt])))
                    advanced = True
                    break
                if nxt in on_stack:
                    low[v] = min(low[v], index[nxt])
            if advanced:
                continue
            work.pop()
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[v])
            if low[v] == index[v]:
                comp = []
                while True:
                    w = stack.pop()
                    on_stack.discard(w)
                    comp.append(w)
                    if w == v:
                        break
                comp.sort(key=order.__getitem__)
                components.append(tuple(comp))

    # Tarjan emits components in reverse topological order.
    components.reverse()
    return tuple(components)


# -- transforms ---------------------------------------------------------------


@dataclass(frozen=True)
class Band:
    """A run of consecutive levels found against one fixed legality system."""

    start: int
    end: int
    permutable: bool
    parallel: bool
    statements: tuple[str, ...]


@dataclass(frozen=True)
class Cut:
    """A constant distribution level: statements grouped by emitted ordinal."""

    level: int
    groups: tuple[tuple[str, ...], ...]


@dataclass(frozen=True)
class AffineTransform:
    """Per-statement schedule rows plus band and distribution structure.

    A row has one coefficient per iterator of its statement, one per program
    parameter, and a trailing constant; rows of different statements at the
    same position form one schedule level.  Statements may own fewer rows than
    the deepest one (a missing row behaves like the zero function).
    """

    params: tuple[str, ...]
    dims: Mapping[str, tuple[str, ...]]
    rows: Mapping[str, tuple[tuple[Fraction, ...], ...]]
    bands: tuple[Band, ...] = ()
    cuts: tuple[Cut, ...] = ()

    @property
    def levels(self) -> int:
        return max((len(r) for r in self.rows.values()), default=0)

    def row(self, sid: str, level: int):
        """Row of `sid` at 1-based `level`, or None past its depth."""
        rows = self.rows[sid]
        return rows[level - 1] if level <= len(rows) else None

    def iterator_part(self, sid: str, level: int):
        r = self.row(sid, level)
        return None if r is None else r[: len(self.dims[sid])]

    def to_json(self) -> dict:
        def fmt(x: Fraction) -> str:
            x = Fraction(x)
            return f"{x.numerator}/{x.denominator}"

        return {
            "params": list(self.params),
            "statements": {
                sid: {
                    "iterators": list(self.dims[sid]),
                    "rows": [[fmt(x) for x in row] for row in rows],
                }
                for sid, rows in self.rows.items()
            },
            "bands": [
                {
                    "start": b.start,
                    "end": b.end,
                    "permutable": b.permutable,
                    "parallel": b.parallel,
                    "statements": list(b.statements),
                }
                for b in self.bands
            ],
            "cuts": [
                {"level": c.level, "groups": [list(g) for g in c.groups]}
                for c in self.cuts
            ],
        }

    @staticmethod
    def from_json(data: Mapping) -> "AffineTransform":
        dims = {sid: tuple(st["iterators"]) for sid, st in data["statements"].items()}
        rows = {
            sid: tuple(tuple(Fraction(x) for x in row) for row in st["rows"])
            for sid, st in data["statements"].items()
        }
        bands = tuple(
            Band(b["start"], b["end"], b["permutable"], b["parallel"],
                 tuple(b["statements"]))
            for b in data.get("bands", ())
        )
        cuts = tuple(
            Cut(c["level"], tuple(tuple(g) for g in c["groups"]))
            for c in data.get("cuts", ())
        )
        return AffineTransform(tuple(data["params"]), dims, rows, bands, cuts)


def identity_transform(program: Program) -> AffineTransform:
    """Original loop order: unit iterator rows, no shifts."""
    rows = {}
    dims = {}
    np = len(program.params)
    for s in program.statements:
        m = s.dim
        dims[s.id] = s.domain.iterators
        rows[s.id] = tuple(
            tuple(Fraction(int(i == k)) for i in range(m)) + (ZERO,) * (np + 1)
            for k in range(m)
        )
    band = Band(1, max((s.dim for s in program.statements), default=0),
                True, False, tuple(s.id for s in program.statements))
    return AffineTransform(program.params, dims, rows, (band,) if band.end else ())


# -- dependence components ----------------------------------------------------


def dependence_difference(dep: DependencePolyhedron,
                          src_row: Sequence[Fraction] | None,
                          dst_row: Sequence[Fraction] | None):
    """phi_dst - phi_src over the dependence space as (objective, constant)."""
    np = len(dep.params)
    obj: dict[str, Fraction] = {}
    const = ZERO

    def accumulate(row, vars_, sign):
        nonlocal const
        if row is None:
            return
        m = len(vars_)
        for v, c in zip(vars_, row[:m]):
            if c:
                obj[v] = obj.get(v, ZERO) + sign * c
        for p, c in zip(dep.params, row[m: m + np]):
            if c:
                obj[p] = obj.get(p, ZERO) + sign * c
        const += sign * row[m + np]

    accumulate(dst_row, dep.dst_vars, Fraction(1))
    accumulate(src_row, dep.src_vars, Fraction(-1))
    return obj, const


def min_dependence_component(dep: DependencePolyhedron,
                             src_row, dst_row) -> Fraction | None:
    """Exact minimum of phi_dst - phi_src over the dependence polyhedron,
    None when unbounded below."""
    obj, const = dependence_difference(dep, src_row, dst_row)
    if not obj:
        return const
    res = ratlp.solve_lp(ratlp.LPProblem.of(dep.relation, [obj]))
    if res.status == ratlp.UNBOUNDED:
        return None
    if res.status != ratlp.OPTIMAL:
        raise SchedulingError(f"dependence polyhedron became empty: {dep!r}")
    return res.objective[0] + const


def component_range(dep: DependencePolyhedron, transform: AffineTransform,
                    level: int) -> Fraction | None:
    return min_dependence_component(
        dep, transform.row(dep.src, level), transform.row(dep.dst, level))


def satisfaction_level(dep: DependencePolyhedron, transform: AffineTransform,
                       up_to: int | None = None) -> int | None:
    """First level whose component is >= 1 on the whole dependence.

    A rational minimum of at least 1 certifies the integer minimum too, so
    this never claims satisfaction early.
    """
    limit = transform.levels if up_to is None else up_to
    for level in range(1, limit + 1):
        m = component_range(dep, transform, level)
        if m is not None and m >= 1:
            return level
    return None


def remove_satisfied_deps(ddg: DDG, transform: AffineTransform,
                          level: int | None = None):
    """Split the graph's edges into still-live and satisfied-by-now.

    Returns (pruned graph, {satisfied dependence: level}).
    """
    satisfied: dict[DependencePolyhedron, int] = {}
    for dep in ddg.edges:
        at = satisfaction_level(dep, transform, level)
        if at is not None:
            satisfied[dep] = at
    return ddg.without(satisfied), satisfied
