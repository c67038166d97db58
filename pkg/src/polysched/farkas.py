"""Affine constraint systems over named rational variables.

The scheduler needs conditions of the form "phi_dst(t) - phi_src(s) >= 0 for
every point of a dependence polyhedron".  Such universally quantified
conditions are linearized with non-negative multipliers over the polyhedron's
constraints, the coefficients of each iterator, parameter and the constant are
equated, and the multipliers are projected out again.  Everything here is
exact: coefficients are `fractions.Fraction` (or int), no floating point.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd, lcm
from typing import TYPE_CHECKING, Iterable, Mapping, Sequence

if TYPE_CHECKING:
    from .model import DependencePolyhedron, Statement

ZERO = Fraction(0)

GE = "ge"
EQ = "eq"


@dataclass(frozen=True)
class LinearRow:
    """One affine constraint: coeffs . x + const >= 0 (ge) or == 0 (eq)."""

    coeffs: tuple[Fraction, ...]
    const: Fraction
    kind: str

    def evaluate(self, point: Sequence[Fraction]) -> Fraction:
        acc = self.const
        for c, x in zip(self.coeffs, point):
            if c:
                acc += c * x
        return acc

    def holds(self, point: Sequence[Fraction]) -> bool:
        v = self.evaluate(point)
        return v == 0 if self.kind == EQ else v >= 0


def _normalize_row(coeffs, const, kind):
    """Canonical integer form: clear denominators, divide by the gcd.

    Equality rows additionally get a canonical sign (first nonzero positive)
    so that duplicates collapse.
    """
    if not isinstance(coeffs, tuple):
        coeffs = tuple(coeffs)
    if any(type(c) is not Fraction for c in coeffs):
        coeffs = tuple(Fraction(c) for c in coeffs)
    if type(const) is not Fraction:
        const = Fraction(const)
    den = const.denominator
    for c in coeffs:
        if c.denominator != 1:
            den = lcm(den, c.denominator)
    if den != 1:
        coeffs = tuple(c * den for c in coeffs)
        const = const * den
    g = abs(const.numerator)
    for c in coeffs:
        if g == 1:
            break
        g = gcd(g, c.numerator)
    if g > 1:
        coeffs = tuple(Fraction(c.numerator // g) for c in coeffs)
        const = Fraction(const.numerator // g)
    if kind == EQ:
        lead = next((c for c in coeffs if c), const)
        if lead < 0:
            coeffs = tuple(-c for c in coeffs)
            const = -const
    return LinearRow(coeffs, const, kind)


class ConstraintSystem:
    """An ordered set of affine rows over named variables with lower bounds.

    A lower bound of None marks a free variable.  The default bound is 0,
    matching the non-negativity restriction on transformation coefficients.
    Instances are not mutated after construction; all editing operations
    return new systems.
    """

    __slots__ = ("variables", "rows", "lower", "_index")

    def __init__(self, variables, rows=(), lower=None):
        self.variables: tuple[str, ...] = tuple(variables)
        if len(set(self.variables)) != len(self.variables):
            raise ValueError("duplicate variable names")
        self._index = {v: i for i, v in enumerate(self.variables)}
        bounds = dict.fromkeys(self.variables, ZERO)
        if lower:
            for v, b in lower.items():
                if v not in self._index:
                    raise KeyError(v)
                bounds[v] = None if b is None else Fraction(b)
        self.lower: dict[str, Fraction | None] = bounds
        # LinearRow instances are trusted to be normalized already (they all
        # come out of `_normalize_row`); raw (coeffs, const, kind) triples are
        # normalized here.
        self.rows: tuple[LinearRow, ...] = _prune(
            r if isinstance(r, LinearRow) else _normalize_row(*r) for r in rows
        )

    def index(self, var: str) -> int:
        return self._index[var]

    def __len__(self):
        return len(self.rows)

    def __repr__(self):
        return f"ConstraintSystem({len(self.variables)} vars, {len(self.rows)} rows)"

    def pretty(self) -> str:
        out = []
        for row in self.rows:
            terms = [
                f"{'' if c == 1 else str(c) + '*'}{v}"
                for c, v in zip(row.coeffs, self.variables)
                if c
            ]
            expr = " + ".join(terms).replace("+ -", "- ") or "0"
            if row.const:
                expr += f" + {row.const}" if row.const > 0 else f" - {-row.const}"
            out.append(f"{expr} {'== 0' if row.kind == EQ else '>= 0'}")
        return "\n".join(out)

    # -- construction helpers -------------------------------------------------

    def row_from(self, coeffs: Mapping[str, Fraction | int], const=0, kind=GE) -> LinearRow:
        vec = [ZERO] * len(self.variables)
        for v, c in coeffs.items():
            vec[self._index[v]] = Fraction(c)
        return _normalize_row(vec, const, kind)

    def with_rows(self, extra: Iterable[LinearRow]) -> "ConstraintSystem":
        return ConstraintSystem(self.variables, self.rows + tuple(extra), self.lower)

    def with_lower(self, bounds: Mapping[str, Fraction | int | None]) -> "ConstraintSystem":
        merged = dict(self.lower)
        merged.update({v: b for v, b in bounds.items()})
        return ConstraintSystem(self.variables, self.rows, merged)

    def conjoin(self, *others: "ConstraintSystem") -> "ConstraintSystem":
        """Union of rows over the union of variables (first-seen order)."""
        variables = list(self.variables)
        lower = dict(self.lower)
        for other in others:
            for v in other.variables:
                if v not in lower:
                    variables.append(v)
                    lower[v] = other.lower[v]
                elif lower[v] != other.lower[v]:
                    raise ValueError(f"conflicting bounds for {v}")
        out = ConstraintSystem(variables, (), lower)
        rows = [out.row_from(dict(zip(s.variables, r.coeffs)), r.const, r.kind)
                for s in (self, *others) for r in s.rows]
        return out.with_rows(rows)

    def compose(self, mapping: Mapping[str, "Fraction | int | Mapping[str, Fraction | int]"],
                extra_vars: Sequence[str] = (), extra_lower=None) -> "ConstraintSystem":
        """Substitute each mapped variable by an affine form of other variables.

        Values are either constants or coefficient mappings over the target
        variables ("" keys a constant term).  Lower bounds of substituted
        variables are kept as explicit rows so no feasible-set slack is lost.
        """
        keep = [v for v in self.variables if v not in mapping]
        variables = list(keep)
        lower = {v: self.lower[v] for v in keep}
        if extra_lower is None:
            extra_lower = {}
        for v in extra_vars:
            if v not in lower:
                variables.append(v)
                lower[v] = extra_lower.get(v, ZERO)
        for form in mapping.values():
            if isinstance(form, Mapping):
                for v in form:
                    if v and v not in lower:
                        variables.append(v)
                        lower[v] = extra_lower.get(v, ZERO)
        out = ConstraintSystem(variables, (), lower)

        def translate(coeffs, const):
            acc = dict()
            c_const = Fraction(const)
            for c, v in zip(coeffs, self.variables):
                if not c:
                    continue
                form = mapping.get(v)
                if form is None:
                    acc[v] = acc.get(v, ZERO) + c
                elif isinstance(form, Mapping):
                    for tv, tc in form.items():
                        if tv == "":
                            c_const += c * Fraction(tc)
                        else:
                            acc[tv] = acc.get(tv, ZERO) + c * Fraction(tc)
                else:
                    c_const += c * Fraction(form)
            return acc, c_const

        rows = []
        for r in self.rows:
            acc, const = translate(r.coeffs, r.const)
            rows.append(out.row_from(acc, const, r.kind))
        for v, form in mapping.items():
            b = self.lower[v]
            if b is None:
                continue
            if isinstance(form, Mapping):
                acc = {tv: Fraction(tc) for tv, tc in form.items() if tv != ""}
                const = Fraction(form.get("", 0)) - b
                rows.append(out.row_from(acc, const, GE))
            elif Fraction(form) < b:
                rows.append(LinearRow((ZERO,) * len(variables), Fraction(-1), GE))
        return out.with_rows(rows)

    def restricted(self, pins: Mapping[str, Fraction | int]) -> "ConstraintSystem":
        """Pin variables to constants (bounds re-checked as rows)."""
        return self.compose(dict(pins))

    def drop_unused(self, keep: Iterable[str] = ()) -> "ConstraintSystem":
        """Remove variables that occur in no row and are not explicitly kept."""
        keep = set(keep)
        used = set(keep)
        for r in self.rows:
            for c, v in zip(r.coeffs, self.variables):
                if c:
                    used.add(v)
        variables = [v for v in self.variables if v in used]
        if len(variables) == len(self.variables):
            return self
        out = ConstraintSystem(variables, (), {v: self.lower[v] for v in variables})
        rows = [out.row_from({v: c for c, v in zip(r.coeffs, self.variables) if c}, r.const, r.kind)
                for r in self.rows]
        return out.with_rows(rows)

    # -- checking -------------------------------------------------------------

    def point(self, assignment: Mapping[str, Fraction | int]) -> tuple[Fraction, ...]:
        return tuple(Fraction(assignment.get(v, self.lower[v] or 0)) for v in self.variables)

    def satisfied_by(self, assignment: Mapping[str, Fraction | int]) -> bool:
        pt = self.point(assignment)
        for v, x in zip(self.variables, pt):
            b = self.lower[v]
            if b is not None and x < b:
                return False
        return all(r.holds(pt) for r in self.rows)

    def violations(self, assignment: Mapping[str, Fraction | int]) -> list[str]:
        pt = self.point(assignment)
        out = []
        for v, x in zip(self.variables, pt):
            b = self.lower[v]
            if b is not None and x < b:
                out.append(f"{v} = {x} < {b}")
        for r in self.rows:
            if not r.holds(pt):
                out.append(f"row {r.coeffs} + {r.const} {r.kind} fails at {r.evaluate(pt)}")
        return out


def _row_key(coeffs) -> tuple:
    # Hashing a Fraction costs a modular inverse; normalized rows are almost
    # always integral, so key on the numerators and let the rare fractional
    # entry fall back to the Fraction itself.
    return tuple(c.numerator if c.denominator == 1 else c for c in coeffs)


def _prune(rows: Iterable[LinearRow]) -> tuple[LinearRow, ...]:
    """Drop tautologies and rows dominated by an earlier row.

    Only single-row implications are checked: identical coefficient vectors
    where one constant implies the other, plus exact duplicates of equalities.
    """
    best_ge: dict[tuple, int] = {}
    seen_eq: set[tuple] = set()
    kept: list[LinearRow] = []
    for row in rows:
        if not any(row.coeffs):
            if row.kind == GE and row.const >= 0:
                continue
            if row.kind == EQ and row.const == 0:
                continue
            # Trivially false row: keep one witness so solvers report it.
        if row.kind == EQ:
            key = (_row_key(row.coeffs), row.const.numerator, row.const.denominator)
            if key in seen_eq:
                continue
            seen_eq.add(key)
            kept.append(row)
        else:
            key = _row_key(row.coeffs)
            prev = best_ge.get(key)
            if prev is not None:
                if kept[prev].const <= row.const:
                    continue
                kept[prev] = row
            else:
                best_ge[key] = len(kept)
                kept.append(row)
    return tuple(kept)


# -- elimination --------------------------------------------------------------


def eliminate(system: ConstraintSystem, kill: Sequence[str]) -> ConstraintSystem:
    """Project the named variables out of the system, exactly.

    Equalities are used first (Gaussian substitution), remaining occurrences
    go through Fourier-Motzkin pairing.  Lower bounds of killed variables are
    materialized as rows before projection.  The result's feasible set is the
    exact shadow of the input's on the surviving variables.
    """
    kill_set = set(kill)
    bound_rows = []
    n = len(system.variables)
    for v in kill:
        b = system.lower[v]
        if b is not None:
            vec = [ZERO] * n
            vec[system.index(v)] = Fraction(1)
            bound_rows.append(LinearRow(tuple(vec), -b, GE))
    rows = list(system.rows) + bound_rows

    for v in kill:
        col = system.index(v)
        rows = _eliminate_one(rows, col)

    survivors = [v for v in system.variables if v not in kill_set]
    out = ConstraintSystem(survivors, (), {v: system.lower[v] for v in survivors})
    idx = [system.index(v) for v in survivors]
    return out.with_rows(
        _normalize_row(tuple(r.coeffs[i] for i in idx), r.const, r.kind) for r in rows
    )


def _eliminate_one(rows: list[LinearRow], col: int) -> list[LinearRow]:
    pivot = None
    for i, r in enumerate(rows):
        if r.kind == EQ and r.coeffs[col]:
            pivot = i
            break
    if pivot is not None:
        p = rows[pivot]
        out = []
        for i, r in enumerate(rows):
            if i == pivot or not r.coeffs[col]:
                if i != pivot:
                    out.append(r)
                continue
            f = r.coeffs[col] / p.coeffs[col]
            coeffs = tuple(rc - f * pc for rc, pc in zip(r.coeffs, p.coeffs))
            out.append(_normalize_row(coeffs, r.const - f * p.const, r.kind))
        return list(_prune(out))

    upper, lower_rows, rest = [], [], []
    for r in rows:
        c = r.coeffs[col]
        if not c:
            rest.append(r)
        elif c > 0:
            lower_rows.append(r)  # c*v >= -(rest): bounds v from below
        else:
            upper.append(r)
    for lo in lower_rows:
        for hi in upper:
            a, b = lo.coeffs[col], -hi.coeffs[col]
            coeffs = tuple(b * lc + a * hc for lc, hc in zip(lo.coeffs, hi.coeffs))
            rest.append(_normalize_row(coeffs, b * lo.const + a * hi.const, GE))
    return list(_prune(rest))


# -- scheduling constraint generators ----------------------------------------


def coefficient_variables(statement: "Statement", params: Sequence[str]) -> list[str]:
    """Transform-row variable names for one statement: iterators, parameter
    shifts, constant shift."""
    sid = statement.id
    names = [f"c.{sid}.{it}" for it in statement.domain.iterators]
    names += [f"d.{sid}.{p}" for p in params]
    names.append(f"c0.{sid}")
    return names


def _difference_form(dep: "DependencePolyhedron", src: "Statement", dst: "Statement"):
    """phi_dst(t) - phi_src(s) as {dep-space var: {coeff var: weight}} pieces.

    Returns (linear, const) where `linear` maps each dependence-space variable
    to the coefficient variables weighting it and `const` collects the pieces
    that do not involve dependence-space variables.
    """
    params = dep.params
    linear: dict[str, dict[str, Fraction]] = {}
    for it, var in zip(dst.domain.iterators, dep.dst_vars):
        linear.setdefault(var, {})[f"c.{dst.id}.{it}"] = Fraction(1)
    for it, var in zip(src.domain.iterators, dep.src_vars):
        linear.setdefault(var, {})[f"c.{src.id}.{it}"] = Fraction(-1)
    for p in params:
        cell = linear.setdefault(p, {})
        cell[f"d.{dst.id}.{p}"] = cell.get(f"d.{dst.id}.{p}", ZERO) + 1
        cell[f"d.{src.id}.{p}"] = cell.get(f"d.{src.id}.{p}", ZERO) - 1
    const = {f"c0.{dst.id}": Fraction(1), f"c0.{src.id}": Fraction(-1)}
    if src.id == dst.id:
        # Self-dependence: shifts and parameter shifts cancel exactly.
        const = {}
        for p in params:
            linear[p] = {v: c for v, c in linear[p].items() if c}
    return linear, const


def _farkas_system(dep, src, dst, extra_linear, extra_const, coeff_vars):
    """Constraint system stating: the given affine form of the dependence-space
    variables is non-negative on the whole dependence polyhedron.

    The form is described per dependence-space variable by a mapping from
    coefficient variables to weights (plus a pure-constant part).  Multiplier
    variables are introduced, coefficients equated per dependence-space
    variable and per constant, then the multipliers are eliminated.
    """
    relation = dep.relation
    ineqs: list[LinearRow] = []
    for r in relation.rows:
        if r.kind == EQ:
            ineqs.append(LinearRow(r.coeffs, r.const, GE))
            ineqs.append(LinearRow(tuple(-c for c in r.coeffs), -r.const, GE))
        else:
            ineqs.append(r)

    lam = [f"_l{k}" for k in range(len(ineqs) + 1)]  # lam[0] is the affine slack
    variables = list(coeff_vars) + lam
    sys0 = ConstraintSystem(variables)

    rows = []
    for j, var in enumerate(relation.variables):
        lhs = dict(extra_linear.get(var, {}))
        for k, row in enumerate(ineqs):
            if row.coeffs[j]:
                lhs[lam[k + 1]] = lhs.get(lam[k + 1], ZERO) - row.coeffs[j]
        rows.append(sys0.row_from(lhs, 0, EQ))
    lhs = dict(extra_const)
    lhs[lam[0]] = Fraction(-1)
    for k, row in enumerate(ineqs):
        if row.const:
            lhs[lam[k + 1]] = lhs.get(lam[k + 1], ZERO) - row.const
    rows.append(sys0.row_from(lhs, 0, EQ))

    return eliminate(sys0.with_rows(rows), lam)


def legality_constraints(dep: "DependencePolyhedron", src: "Statement",
                         dst: "Statement") -> ConstraintSystem:
    """Rows over the two statements' coefficient variables that hold exactly
    when phi_dst - phi_src is non-negative on every point of the dependence."""
    linear, const = _difference_form(dep, src, dst)
    coeff_vars = list(dict.fromkeys(
        coefficient_variables(src, dep.params) + coefficient_variables(dst, dep.params)))
    return _farkas_system(dep, src, dst, linear, const, coeff_vars)


def bounding_constraints(dep: "DependencePolyhedron", src: "Statement",
                         dst: "Statement") -> ConstraintSystem:
    """Rows stating u.p + w - (phi_dst - phi_src) >= 0 on the dependence."""
    linear, const = _difference_form(dep, src, dst)
    neg_linear = {v: {cv: -w for cv, w in form.items()} for v, form in linear.items()}
    for p in dep.params:
        cell = neg_linear.setdefault(p, {})
        cell[f"u.{p}"] = cell.get(f"u.{p}", ZERO) + 1
    neg_const = {cv: -w for cv, w in const.items()}
    neg_const["w"] = Fraction(1)
    coeff_vars = [f"u.{p}" for p in dep.params] + ["w"]
    coeff_vars += list(dict.fromkeys(
        coefficient_variables(src, dep.params) + coefficient_variables(dst, dep.params)))
    return _farkas_system(dep, src, dst, neg_linear, neg_const, coeff_vars)
