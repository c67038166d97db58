from fractions import Fraction

import pytest

from polysched.model import AffineTransform, Band, Cut, SchedulingError
from polysched.pluto import DependenceSystems
from polysched.postpass import (
    _merge_shifts, dfp_schedule, introduce_skew, scale_and_shift,
)

F = Fraction


def R(*xs):
    return tuple(F(x) for x in xs)


class TestMergeShifts:
    split = {"c0.P": ("c0p.P", "c0n.P"), "d.P.N": ("dp.P.N", "dn.P.N")}

    def test_positive_half(self):
        out = _merge_shifts({"c0p.P": F(2), "c0n.P": F(0)}, self.split)
        assert out == {"c0.P": F(2)}

    def test_negative_half(self):
        out = _merge_shifts({"c0p.P": F(0), "c0n.P": F(3)}, self.split)
        assert out == {"c0.P": F(-3)}

    def test_untouched_variables_pass_through(self):
        out = _merge_shifts({"c.P.i": F(1), "dp.P.N": F(1), "dn.P.N": F(0)},
                            self.split)
        assert out == {"c.P.i": F(1), "d.P.N": F(1)}


class TestScaleAndShift:
    def test_shifts_the_consumer_backwards(self, by_name, dfp_results):
        # The scheduler proper shifts P forward by 2; with both directions
        # open the lexmin prefers leaving P alone and pulling Q back.
        out = dfp_results["shift_pair"]
        assert out.permutation.rows["P"] == (R(1, 0, 0),)
        assert out.permutation.rows["Q"] == (R(1, 0, 0),)
        assert out.scaled.rows["P"] == (R(1, 0, 0),)
        assert out.scaled.rows["Q"] == (R(1, 0, -2),)
        (step,) = out.steps
        assert step.kind == "loop" and step.parallel
        assert step.factors == (1,)
        assert step.raw["c0.Q"] == -2

    def test_scales_rational_alignment_to_integers(self, dfp_results):
        out = dfp_results["scaling_pair"]
        assert out.scaled.rows["P"] == (R(2, 0, 0),)
        assert out.scaled.rows["Q"] == (R(3, 0, 0),)
        (step,) = out.steps
        assert step.factors == (2,) and step.parallel
        assert step.raw["c.Q.i"] == F(3, 2)

    def test_cut_levels_pass_through(self, dfp_results):
        out = dfp_results["distribution_forced"]
        assert out.steps[0].kind == "cut"
        assert out.steps[0].factors == () and out.steps[0].raw is None
        assert out.scaled.rows["P"] == (R(0, 0, 0), R(1, 0, 0))
        assert out.scaled.rows["Q"] == (R(0, 0, 1), R(1, 0, 0))
        assert out.scaled.cuts == (Cut(1, (("P",), ("Q",))),)

    def test_illegal_permutation_is_rejected(self, by_name):
        # Space outermost on the stencil: the +1/-1 reaches cannot be carried
        # by any scaling, and a self-dependence offers no shift to hide in.
        inst = by_name["stencil1d"]
        space_first = AffineTransform(
            inst.program.params,
            {"S": ("t", "i")},
            {"S": (R(0, 1, 0, 0, 0), R(1, 0, 0, 0, 0))})
        with pytest.raises(SchedulingError, match="no legal scaling"):
            scale_and_shift(inst.program, inst.deps, space_first)

    def test_record_collects_level_systems(self, by_name):
        inst = by_name["fig1"]
        record = []
        dfp_schedule(inst.program, inst.deps,
                     DependenceSystems(inst.program), record)
        assert len(record) == 2  # one loop solve per level, nothing skewed
        for system, assignment in record:
            assert system.satisfied_by(assignment)


class TestIntroduceSkew:
    def test_no_op_returns_the_input_object(self, dfp_results):
        out = dfp_results["fig1"]
        assert out.skew.transform is out.scaled
        assert out.skew.skewed == () and out.skew.diagnostics == ()
        assert out.skew.updates == {}

    def test_stencil_space_level_gets_time_added(self, dfp_results):
        out = dfp_results["stencil1d"]
        assert out.scaled.rows["S"] == (R(1, 0, 0, 0, 0), R(0, 1, 0, 0, 0))
        assert out.skew.skewed == (2,)
        assert out.transform.rows["S"] == (R(1, 0, 0, 0, 0), R(1, 1, 0, 0, 0))
        step = out.skew.updates[2]
        assert step.kind == "loop" and not step.parallel
        assert out.steps[1] is step

    def test_reversal_is_diagnosed_not_skewed(self, dfp_results):
        out = dfp_results["distribution_forced"]
        assert out.skew.skewed == ()
        assert out.skew.diagnostics == (
            "level 2 has a negative component (b:0->1) but no legal skew "
            "exists; the nest is not tileable",)
        assert out.skew.transform is out.scaled

    def test_skew_direct_call_matches_pipeline(self, by_name, dfp_results):
        inst = by_name["stencil1d"]
        out = dfp_results["stencil1d"]
        redo = introduce_skew(inst.program, inst.deps, out.scaled)
        assert redo.transform.rows == out.transform.rows
        assert redo.skewed == (2,)


class TestPipeline:
    def test_transposed_chain_full_run(self, dfp_results):
        out = dfp_results["fig1"]
        assert out.transform.rows["S1"] == (R(1, 0, 0, 0), R(0, 1, 0, 0))
        assert out.transform.rows["S2"] == (R(0, 1, 0, 0), R(1, 0, 0, 0))
        assert out.transform.rows["S3"] == (R(1, 0, 0, 0), R(0, 1, 0, 0))
        assert out.transform.bands == (
            Band(1, 2, True, True, ("S1", "S2", "S3")),)
        assert out.transform.cuts == ()
        assert [s.parallel for s in out.steps] == [True, True]

    def test_permutation_survives_when_already_aligned(self, dfp_results):
        out = dfp_results["transpose_chain"]
        assert out.transform.rows["S1"] == (R(1, 0, 0, 0), R(0, 1, 0, 0))
        assert out.transform.rows["S2"] == (R(0, 1, 0, 0), R(1, 0, 0, 0))
        assert out.transform.bands[0].parallel

    def test_matmul_band_spans_all_levels(self, dfp_results):
        out = dfp_results["matmul"]
        assert out.transform.rows["Upd"] == (
            R(1, 0, 0, 0, 0), R(0, 1, 0, 0, 0), R(0, 0, 1, 0, 0))
        assert out.transform.bands == (
            Band(1, 3, True, True, ("Init", "Upd")),)
        assert [s.parallel for s in out.steps] == [True, True, False]

    def test_skewed_band_remains_permutable(self, dfp_results):
        out = dfp_results["stencil1d"]
        assert out.transform.bands == (Band(1, 2, True, False, ("S",)),)

    def test_cut_narrows_the_band(self, dfp_results):
        out = dfp_results["distribution_forced"]
        assert out.transform.bands == (Band(2, 2, True, True, ("P", "Q")),)
        assert out.transform.cuts == (Cut(1, (("P",), ("Q",))),)
