from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from polysched.farkas import (
    EQ, GE, ConstraintSystem, LinearRow, _normalize_row, eliminate,
    legality_constraints, bounding_constraints,
)
from polysched.frontend import analyze

F = Fraction


def rows_as_tuples(system):
    return [(r.coeffs, r.const, r.kind) for r in system.rows]


class TestNormalizeRow:
    def test_clears_denominators(self):
        row = _normalize_row([F(1, 2), F(1, 3)], F(1, 6), GE)
        assert row.coeffs == (F(3), F(2)) and row.const == F(1)

    def test_divides_by_gcd(self):
        row = _normalize_row([F(4), F(-6)], F(2), GE)
        assert row.coeffs == (F(2), F(-3)) and row.const == F(1)

    def test_equality_sign_is_canonical(self):
        a = _normalize_row([F(-2), F(4)], F(0), EQ)
        b = _normalize_row([F(1), F(-2)], F(0), EQ)
        assert a == b

    def test_inequality_sign_is_kept(self):
        row = _normalize_row([F(-1)], F(0), GE)
        assert row.coeffs == (F(-1),)

    def test_idempotent(self):
        row = _normalize_row([F(9, 4), F(0), F(-3)], F(6), EQ)
        again = _normalize_row(row.coeffs, row.const, row.kind)
        assert again == row

    def test_all_zero_row(self):
        row = _normalize_row([F(0), F(0)], F(0), EQ)
        assert row.coeffs == (F(0), F(0)) and row.const == 0


class TestConstraintSystem:
    def test_duplicate_variables_rejected(self):
        with pytest.raises(ValueError):
            ConstraintSystem(["x", "x"])

    def test_default_lower_bound_is_zero(self):
        s = ConstraintSystem(["x", "y"], (), {"y": None})
        assert s.lower["x"] == 0 and s.lower["y"] is None

    def test_row_from_orders_coefficients(self):
        s = ConstraintSystem(["x", "y", "z"])
        row = s.row_from({"z": 2, "x": 1}, -1)
        assert row.coeffs == (F(1), F(0), F(2)) and row.const == F(-1)

    def test_prune_drops_duplicate_and_dominated(self):
        s = ConstraintSystem(["x"])
        rows = [s.row_from({"x": 1}, -1), s.row_from({"x": 1}, 0),
                s.row_from({"x": 1}, -1)]
        out = s.with_rows(rows)
        # x - 1 >= 0 implies x >= 0; the duplicate collapses too.
        assert rows_as_tuples(out) == [((F(1),), F(-1), GE)]

    def test_prune_keeps_tighter_late_row(self):
        s = ConstraintSystem(["x"])
        out = s.with_rows([s.row_from({"x": 1}, 0), s.row_from({"x": 1}, -5)])
        assert rows_as_tuples(out) == [((F(1),), F(-5), GE)]

    def test_prune_drops_tautologies_keeps_contradiction(self):
        s = ConstraintSystem(["x"])
        out = s.with_rows([s.row_from({}, 3, GE), s.row_from({}, 0, EQ),
                           s.row_from({}, -1, GE)])
        assert rows_as_tuples(out) == [((F(0),), F(-1), GE)]

    def test_conjoin_unions_variables(self):
        a = ConstraintSystem(["x"], (), {"x": None})
        a = a.with_rows([a.row_from({"x": 1}, -1)])
        b = ConstraintSystem(["y"])
        b = b.with_rows([b.row_from({"y": 1}, -2)])
        joint = a.conjoin(b)
        assert joint.variables == ("x", "y")
        assert joint.lower == {"x": None, "y": F(0)}
        assert len(joint.rows) == 2

    def test_conjoin_rejects_conflicting_bounds(self):
        a = ConstraintSystem(["x"], (), {"x": None})
        b = ConstraintSystem(["x"])
        with pytest.raises(ValueError):
            a.conjoin(b)

    def test_compose_substitutes_affine_forms(self):
        s = ConstraintSystem(["x", "y"])
        s = s.with_rows([s.row_from({"x": 1, "y": 1}, -2)])
        out = s.compose({"x": {"a": 1, "": 1}}, extra_vars=["a"])
        # x := a + 1 turns x + y - 2 >= 0 into a + y - 1 >= 0; x's own lower
        # bound comes back as the explicit row a + 1 >= 0.
        assert out.variables == ("y", "a")
        assert rows_as_tuples(out) == [((F(1), F(1)), F(-1), GE),
                                       ((F(0), F(1)), F(1), GE)]

    def test_compose_pin_below_bound_is_infeasible(self):
        s = ConstraintSystem(["x"])  # x >= 0
        out = s.restricted({"x": -1})
        assert any(not any(r.coeffs) and r.const < 0 for r in out.rows)

    def test_satisfied_by_checks_bounds_and_rows(self):
        s = ConstraintSystem(["x", "y"])
        s = s.with_rows([s.row_from({"x": 1, "y": -1}, 0)])
        assert s.satisfied_by({"x": 2, "y": 1})
        assert not s.satisfied_by({"x": 1, "y": 2})
        assert not s.satisfied_by({"x": -1, "y": -1})

    def test_drop_unused(self):
        s = ConstraintSystem(["x", "y", "z"])
        s = s.with_rows([s.row_from({"y": 1}, -1)])
        out = s.drop_unused(keep=["z"])
        assert out.variables == ("y", "z")


class TestEliminate:
    def test_gaussian_substitution(self):
        s = ConstraintSystem(["x", "y"], (), {"x": None, "y": None})
        s = s.with_rows([s.row_from({"x": 1, "y": -1}, 0, EQ),
                         s.row_from({"y": 1}, -2)])
        out = eliminate(s, ["y"])
        assert out.variables == ("x",)
        assert rows_as_tuples(out) == [((F(1),), F(-2), GE)]

    def test_fourier_motzkin_pairing(self):
        s = ConstraintSystem(["x", "y", "z"], (), dict.fromkeys("xyz", None))
        s = s.with_rows([s.row_from({"y": 1, "x": -1}),   # y >= x
                         s.row_from({"z": 1, "y": -1})])  # z >= y
        out = eliminate(s, ["y"])
        assert rows_as_tuples(out) == [((F(-1), F(1)), F(0), GE)]  # z >= x

    def test_lower_bounds_materialize(self):
        s = ConstraintSystem(["x", "y"])  # both >= 0
        s = s.with_rows([s.row_from({"x": 1, "y": 1}, -3)])
        out = eliminate(s, ["y"])
        # y <= anything has no upper row, so only x >= 0 remains implicit;
        # the shadow keeps no row at all.
        assert out.variables == ("x",)
        assert out.rows == ()

    @settings(max_examples=60, deadline=None)
    @given(st.lists(st.tuples(st.integers(-3, 3), st.integers(-3, 3),
                              st.integers(-4, 4)),
                    min_size=1, max_size=4),
           st.integers(0, 4), st.integers(0, 4))
    def test_projection_is_sound(self, rows, px, py):
        """Any feasible point of the original casts a feasible shadow."""
        s = ConstraintSystem(["x", "y"])
        s = s.with_rows([s.row_from({"x": a, "y": b}, c) for a, b, c in rows])
        if not s.satisfied_by({"x": px, "y": py}):
            return
        out = eliminate(s, ["y"])
        assert out.satisfied_by({"x": px})


@pytest.fixture(scope="module")
def uniform_pair():
    program, deps = analyze({
        "params": ["N"],
        "statements": [
            {"id": "P", "iterators": ["i"],
             "domain": [[1, 0, 0, ">="], [-1, 1, -1, ">="]],
             "accesses": [{"array": "a", "kind": "write", "map": [[1, 0, 0]]}],
             "order": 0},
            {"id": "Q", "iterators": ["i"],
             "domain": [[1, 0, 0, ">="], [-1, 1, -1, ">="]],
             "accesses": [{"array": "a", "kind": "read", "map": [[1, 0, -1]]}],
             "order": 1},
        ],
    })
    (dep,) = [d for d in deps if d.kind == "RAW"]
    return program, dep


class TestSchedulingConstraints:
    def test_legality_admits_forward_schedules(self, uniform_pair):
        program, dep = uniform_pair
        src = program.statement("P")
        dst = program.statement("Q")
        system = legality_constraints(dep, src, dst)
        good = {"c.P.i": 1, "c.Q.i": 1, "c0.P": 0, "c0.Q": 0, "d.P.N": 0,
                "d.Q.N": 0}
        assert system.satisfied_by(good)
        # Q shifted one more step back would execute its reader first.
        assert not system.satisfied_by({**good, "c0.P": 2})
        assert system.satisfied_by({**good, "c0.Q": 2})

    def test_bounding_limits_the_difference(self, uniform_pair):
        program, dep = uniform_pair
        system = bounding_constraints(
            dep, program.statement("P"), program.statement("Q"))
        assert set(system.variables) >= {"u.N", "w"}
        base = {"c.P.i": 1, "c.Q.i": 1}
        # The dependence distance is 1, so w = 1 suffices and w = 0 does not.
        assert system.satisfied_by({**base, "w": 1})
        assert not system.satisfied_by({**base, "w": 0})
        assert system.satisfied_by({**base, "u.N": 1})
