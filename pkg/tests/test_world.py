from dataclasses import replace
from pathlib import Path

import pytest
from hypothesis import given
from hypothesis import strategies as st

from feedback_tamp.actions import UnknownObject, make_action
from feedback_tamp.bench.scenarios import make_scenario
from feedback_tamp.geometry import BoxShape, OrientedBox2, Pose2
from feedback_tamp.world import (
    HOME_POSE,
    SUCCESS_TEXT,
    Basket,
    GoalSpec,
    InvalidState,
    ObjectState,
    PreconditionViolated,
    WorldState,
    goal_satisfied,
    textualize_state,
    transition,
)

GOLDEN = Path(__file__).parent / "golden"
BASKET = Basket(OrientedBox2(Pose2(0.5, 0.0), 0.2, 0.2))
SHAPE = BoxShape(0.10, 0.10, 0.06)


def world(**poses):
    return WorldState({n: ObjectState(n, SHAPE, p) for n, p in poses.items()}, BASKET)


def place(name, x, y, theta=0.0):
    return make_action("place", [name], {"x": x, "y": y, "theta": theta})


def pick(name):
    return make_action("pick", [name])


def test_pick_sets_holding():
    s = world(red_box=Pose2(0.2, 0.5))
    t = transition(s, pick("red_box"))
    assert t.holding == "red_box" and t.objects["red_box"].held
    assert t.objects["red_box"].pose == s.objects["red_box"].pose
    assert t.effector == s.objects["red_box"].pose
    t.validate()


def test_place_prompt_example():
    s = transition(world(red_box=Pose2(0.2, 0.5)), pick("red_box"))
    t = transition(s, place("red_box", 0.51, 0.02, 0.00))
    assert t.holding is None
    assert t.objects["red_box"].pose == Pose2(0.51, 0.02, 0.0)
    assert not t.objects["red_box"].held


def test_transition_does_not_mutate_input():
    s = world(a=Pose2(0.2, 0.5), b=Pose2(0.2, -0.5))
    before = (dict(s.objects), s.holding, s.effector)
    transition(s, pick("a"))
    assert (dict(s.objects), s.holding, s.effector) == before
    assert s.effector == HOME_POSE


def test_transition_precondition():
    s = transition(world(a=Pose2(0.2, 0.5), b=Pose2(0.2, -0.5)), pick("a"))
    with pytest.raises(PreconditionViolated, match="gripper occupied"):
        transition(s, pick("b"))
    with pytest.raises(PreconditionViolated):
        transition(world(a=Pose2(0.2, 0.5)), place("a", 0.5, 0.0))


@given(st.floats(0.15, 0.85), st.floats(-0.6, 0.6), st.floats(-3.14, 3.14))
def test_pick_place_same_pose_is_identity(x, y, theta):
    s = world(a=Pose2(x, y, theta))
    t = transition(transition(s, pick("a")), place("a", *s.objects["a"].pose.as_tuple()))
    assert dict(t.objects) == dict(s.objects)
    assert t.holding is None


def test_state_invariants_checked():
    s = world(a=Pose2(0.2, 0.5), b=Pose2(0.25, 0.5))
    with pytest.raises(InvalidState, match="a overlaps b"):
        s.validate()
    s = world(a=Pose2(0.2, 0.5))
    with pytest.raises(InvalidState):
        replace(s, holding="a").validate()


def test_goal_all_inside():
    s = world(a=Pose2(0.42, 0.0), b=Pose2(0.58, 0.0))
    ok, fb = goal_satisfied(s, GoalSpec(("a", "b")))
    assert ok and fb.satisfied and fb.text == SUCCESS_TEXT
    assert goal_satisfied(s, GoalSpec(("a", "b"))) == (ok, fb)


def test_goal_one_outside():
    s = world(a=Pose2(0.42, 0.0), b=Pose2(0.2, 0.6))
    ok, fb = goal_satisfied(s, GoalSpec(("a", "b")))
    assert not ok
    assert fb.text == "Goal not satisfied: b not fully inside the basket."
    assert fb.offending == ("b",)


def test_goal_protrusion_by_one_centimetre():
    # basket spans x in [0.3, 0.7]; a 0.10 box centred at 0.66 reaches 0.71
    ok, fb = goal_satisfied(world(a=Pose2(0.66, 0.0)), GoalSpec(("a",)))
    assert not ok and fb.offending == ("a",)
    assert goal_satisfied(world(a=Pose2(0.65, 0.0)), GoalSpec(("a",)))[0]


def test_goal_held_object_not_satisfied():
    s = transition(world(a=Pose2(0.5, 0.0)), pick("a"))
    assert not goal_satisfied(s, GoalSpec(("a",)))[0]


def test_goal_overlapping_targets_fail():
    s = WorldState({
        "a": ObjectState("a", SHAPE, Pose2(0.5, 0.0)),
        "b": ObjectState("b", SHAPE, Pose2(0.52, 0.0)),
    }, BASKET)
    ok, fb = goal_satisfied(s, GoalSpec(("a", "b")))
    assert not ok and fb.offending == ("a", "b")


def test_goal_unknown_object():
    with pytest.raises(UnknownObject):
        goal_satisfied(world(a=Pose2(0.5, 0.0)), GoalSpec(("ghost",)))


def test_goal_spec_nonempty():
    with pytest.raises(ValueError):
        GoalSpec(())


def test_textualize_empty_world():
    lines = textualize_state(WorldState({}, BASKET)).splitlines()
    assert len(lines) == 3
    assert lines[0].startswith("robot base at (0.00, 0.00)")


def test_textualize_single_object_stable():
    s = WorldState({"unit": ObjectState("unit", BoxShape(1, 1, 1), Pose2(0, 0, 0))}, BASKET)
    text = textualize_state(s)
    assert text == textualize_state(s)
    assert text.splitlines()[-1] == "unit: size (1.00, 1.00, 1.00), pose (x=0.00, y=0.00, theta=0.00), on table"


def test_textualize_no_negative_zero():
    s = world(a=Pose2(0.2, -0.001, -0.001))
    assert "-0.00" not in textualize_state(s)


def test_textualize_golden_setting1_easy():
    text = textualize_state(make_scenario("setting1-easy", 0).initial_state())
    assert text + "\n" == (GOLDEN / "setting1_easy_seed0.txt").read_text()
    assert text == textualize_state(make_scenario("setting1-easy", 0).initial_state())


def test_basket_walls_surround_interior():
    walls = dict(BASKET.walls())
    assert list(walls) == ["basket_wall_N", "basket_wall_S", "basket_wall_E", "basket_wall_W"]
    n = walls["basket_wall_N"]
    assert n.center.y == pytest.approx(0.21) and n.half_x == pytest.approx(0.22)
    total = sum(w.area for w in walls.values()) + BASKET.interior.area
    assert total == pytest.approx(BASKET.outer.area)
