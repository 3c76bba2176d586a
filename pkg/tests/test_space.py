from __future__ import annotations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from scenfuzz.space import Origin, Scenario, ScenarioSpace, clip, distance, validate

from conftest import UNIT_SQUARE, make_scenario


class TestScenarioSpace:
    def test_basic_construction(self):
        space = ScenarioSpace((0, -1), (1, 1), ("a", "b"))
        assert space.dims == 2
        assert space.ranges == (1.0, 2.0)

    def test_rejects_inverted_bounds(self):
        with pytest.raises(ValueError, match="not below"):
            ScenarioSpace((1.0,), (0.0,), ("a",))

    def test_rejects_empty(self):
        with pytest.raises(ValueError):
            ScenarioSpace((), (), ())

    def test_rejects_mismatched_lengths(self):
        with pytest.raises(ValueError, match="mismatched"):
            ScenarioSpace((0.0,), (1.0, 2.0), ("a", "b"))

    def test_rejects_duplicate_names(self):
        with pytest.raises(ValueError, match="unique"):
            ScenarioSpace((0.0, 0.0), (1.0, 1.0), ("a", "a"))


class TestValidate:
    def test_interior_point_is_valid(self):
        assert validate(UNIT_SQUARE, (0.5, 0.5)) is None

    def test_above_upper_bound(self):
        reason = validate(UNIT_SQUARE, (1.5, 0.5))
        assert reason is not None
        assert "dim 0" in reason and "above upper bound" in reason

    def test_below_lower_bound(self):
        reason = validate(UNIT_SQUARE, (0.5, -0.1))
        assert "dim 1" in reason and "below lower bound" in reason

    def test_arity_mismatch(self):
        assert validate(UNIT_SQUARE, (0.5,)) == "length 1 != 2"

    def test_non_finite(self):
        assert "not a finite number" in validate(UNIT_SQUARE, (float("nan"), 0.5))

    def test_constraint_hook_runs_after_bounds(self):
        hook = lambda p: "hook says no" if p[0] > 0.5 else None
        assert validate(UNIT_SQUARE, (0.6, 0.5), hook) == "hook says no"
        assert validate(UNIT_SQUARE, (0.4, 0.5), hook) is None
        # out-of-bounds reported before the hook fires
        assert "above upper bound" in validate(UNIT_SQUARE, (1.5, 0.5), hook)

    def test_accepts_scenario_objects(self):
        assert validate(UNIT_SQUARE, make_scenario((0.2, 0.2))) is None


class TestClip:
    def test_clamps_above(self):
        assert clip(ScenarioSpace((0.0,), (1.0,), ("a",)), (1.05,)) == (1.0,)

    def test_clamps_below(self):
        assert clip(ScenarioSpace((0.0,), (1.0,), ("a",)), (-0.2,)) == (0.0,)

    def test_interior_unchanged(self):
        assert clip(ScenarioSpace((0.0,), (1.0,), ("a",)), (0.4,)) == (0.4,)

    def test_arity_mismatch_raises(self):
        with pytest.raises(ValueError):
            clip(UNIT_SQUARE, (0.1,))


class TestDistance:
    def test_identical_scenarios(self):
        s = make_scenario((0.3, 0.7))
        assert distance(UNIT_SQUARE, s, s) == 0.0

    def test_hand_computed_value(self):
        # sqrt((3/10)^2 + (4/10)^2) = 0.5 on a [0,10]^2 space
        space = ScenarioSpace((0.0, 0.0), (10.0, 10.0), ("a", "b"))
        d = distance(space, (0.0, 0.0), (3.0, 4.0))
        assert abs(d - 0.5) < 1e-12

    def test_full_range_displacement(self):
        space = ScenarioSpace((0.0,), (1.0,), ("a",))
        assert distance(space, (0.0,), (1.0,)) == 1.0

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError, match="dimension mismatch"):
            distance(UNIT_SQUARE, (0.0,), (0.0, 0.0))

    def test_linf_norm_takes_largest_component(self):
        space = ScenarioSpace((0.0, 0.0), (10.0, 10.0), ("a", "b"))
        assert distance(space, (0.0, 0.0), (3.0, 4.0), norm="linf") == 4.0 / 10.0

    def test_unknown_norm_rejected(self):
        with pytest.raises(ValueError, match="unknown norm"):
            distance(UNIT_SQUARE, (0.0, 0.0), (0.1, 0.1), norm="l7")


# rounding keeps coordinate differences well above the underflow scale, where
# squaring a subnormal difference would flush the distance to zero
coords = st.floats(min_value=0.0, max_value=1.0, allow_nan=False).map(
    lambda v: round(v, 6)
)
points = st.tuples(coords, coords)


@given(points, points)
@settings(max_examples=200)
def test_distance_symmetry(a, b):
    assert distance(UNIT_SQUARE, a, b) == distance(UNIT_SQUARE, b, a)


@given(points, points)
@settings(max_examples=200)
def test_distance_identity_of_indiscernibles(a, b):
    d = distance(UNIT_SQUARE, a, b)
    if a == b:
        assert d == 0.0
    else:
        assert d > 0.0


@given(points, points, points)
@settings(max_examples=200)
def test_distance_triangle_inequality(a, b, c):
    assert distance(UNIT_SQUARE, a, c) <= (
        distance(UNIT_SQUARE, a, b) + distance(UNIT_SQUARE, b, c) + 1e-9
    )


@given(st.tuples(st.floats(-5, 5, allow_nan=False), st.floats(-5, 5, allow_nan=False)))
@settings(max_examples=200)
def test_clip_then_validate_is_valid(p):
    assert validate(UNIT_SQUARE, clip(UNIT_SQUARE, p)) is None


def test_scenario_coerces_params_to_floats():
    s = Scenario(id=3, params=(1, 0), origin=Origin.RANDOM_MUTATION)
    assert s.params == (1.0, 0.0)
    assert isinstance(s.params[0], float)
