import pytest

from helpers import FIXTURES, oracle_model, random_treelike_model, same_model

import random

from treelogic import (BiFrame, FrameError, TOP, bi_satisfies, check_frame,
                       class_order, formula_pool, induced_frame, load_frame,
                       load_model, parse, unfold)


def test_closure_from_generators(fig_frame):
    nonreflexive = {(a, b) for a, b in fig_frame.box if a != b}
    assert nonreflexive == {
        ("r1", "t1"), ("r2", "t2"), ("r3", "s1"), ("r3", "t1"),
        ("r4", "s2"), ("r4", "t2"), ("r5", "s3"), ("s1", "t1"), ("s2", "t2")}
    assert fig_frame.k_class("r1") == frozenset(
        {"r1", "r2", "r3", "r4", "r5", "r6"})
    assert fig_frame.k_class("t2") == frozenset({"t1", "t2"})


def test_check_frame_passes_on_fixture(fig_frame):
    report = check_frame(fig_frame)
    assert report.ok, report.failures()
    names = {r.name for r in report.results}
    assert names == {"box_reflexive", "box_transitive", "box_antisymmetric",
                     "box_connected", "k_equivalence", "cross_property",
                     "box_k_identity", "atom_persistence"}


def test_check_frame_flags_asymmetric_k():
    frame = BiFrame(["a", "b"], k_pairs=[("a", "b")], close=False)
    report = check_frame(frame)
    assert not report.result("k_equivalence").passed
    assert report.result("k_equivalence").witness is not None


def test_check_frame_flags_cross_violation():
    # a refines into b, b epistemically sees c, but a's class never
    # refines into c
    frame = BiFrame(["a", "b", "c"], box_pairs=[("a", "b")],
                    k_pairs=[("b", "c")])
    report = check_frame(frame)
    assert not report.result("cross_property").passed
    s, s2, t = report.result("cross_property").witness
    assert (s, s2) in frame.box and t in frame.k_class(s2)


def test_check_frame_flags_identity_and_persistence():
    twisted = BiFrame(["a", "b"], box_pairs=[("a", "b")],
                      k_pairs=[("a", "b")])
    assert not check_frame(twisted).result("box_k_identity").passed
    fading = BiFrame(["a", "b"], box_pairs=[("a", "b")],
                     valuation={"P": {"a"}})
    assert not check_frame(fading).result("atom_persistence").passed


def test_class_order(fig_frame):
    order = class_order(fig_frame)
    assert [sorted(c)[0] for c in order.classes] == ["r1", "s1", "t1"]
    assert order.is_partial_order()
    top = fig_frame.k_class("r1")
    assert order.greatest() == top
    assert order.le(fig_frame.k_class("t1"), fig_frame.k_class("s1"))
    assert order.le(fig_frame.k_class("s1"), top)
    assert not order.le(top, fig_frame.k_class("t1"))


def test_unfold_matches_golden(fig_frame):
    result = unfold(fig_frame, "r1")
    model = result.model
    assert sorted(map(len, model.space.opens), reverse=True) == [6, 3, 2, 2]
    golden = load_model(FIXTURES / "frame_two_level_unfolded.json")
    assert same_model(model, golden)
    assert set(model.space.names) == {"cls(r1,r1)", "cls(s1,r3)",
                                      "cls(t1,r1)", "cls(t1,r3)"}
    assert model.space.is_treelike()


def test_unfold_single_state():
    result = unfold(BiFrame(["a"]), "a")
    assert result.model.space.opens == (frozenset({"a"}),)


def test_unfold_requires_generated_frame(fig_frame):
    with pytest.raises(FrameError, match="not generated"):
        unfold(fig_frame, "s1")
    with pytest.raises(FrameError, match="unknown root"):
        unfold(fig_frame, "zz")


def test_unfold_rejects_failing_frame():
    frame = BiFrame(["a", "b", "c"], box_pairs=[("a", "b")],
                    k_pairs=[("b", "c")])
    with pytest.raises(FrameError, match="structural checks"):
        unfold(frame, "a")


def test_bi_satisfies(fig_frame):
    assert bi_satisfies(fig_frame, "r1", parse("<>P"))
    assert bi_satisfies(fig_frame, "r6", TOP)
    # reflexivity of the refinement relation
    for f in formula_pool(("P",), 2)[:40]:
        inst = parse(f"[]({f}) -> ({f})")
        assert all(bi_satisfies(fig_frame, s, inst) for s in fig_frame.states)


def test_unfold_equivalence_on_fixture(fig_frame):
    result = unfold(fig_frame, "r1")
    model = result.model
    pool = formula_pool(("P",), 2)
    for t in sorted(fig_frame.k_class("r1")):
        for s in fig_frame.states:
            if (t, s) not in fig_frame.box:
                continue
            u = result.open_for(t, s)
            for f in pool:
                assert bi_satisfies(fig_frame, s, f) == model.satisfies(t, u, f)


def test_unfold_equivalence_on_induced_frames():
    rng = random.Random(29)
    for _ in range(12):
        base = random_treelike_model(rng, max_points=4, max_opens=6)
        frame = induced_frame(base)
        assert check_frame(frame).ok
        root = next(f"{x}@{name}" for name, u in
                    zip(base.space.names, base.space.opens)
                    if u == base.space.full for x in sorted(u))
        result = unfold(frame, root)
        for f in formula_pool(("A", "B"), 1):
            for t in sorted(result.x_class):
                for s in frame.states:
                    if (t, s) in frame.box:
                        assert bi_satisfies(frame, s, f) == \
                            result.model.satisfies(t, result.open_for(t, s), f)


def test_induced_frame_roundtrip(m1):
    frame = induced_frame(m1)
    assert check_frame(frame).ok
    result = unfold(frame, "q1@top")
    recovered = {frozenset(x.split("@")[0] for x in u)
                 for u in result.model.space.opens}
    # the empty open has no neighborhoods, so it cannot reappear
    assert recovered == {u for u in m1.space.opens if u}
    assert {frozenset(x.split("@")[0] for x in v)
            for v in result.model.valuation.values()} == \
        {v for v in m1.valuation.values()}


def test_load_frame_rejects_garbage(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{"states": ["a"], "box": [["a", "zz"]]}')
    with pytest.raises(FrameError):
        load_frame(bad)
    bad.write_text("not json")
    with pytest.raises(FrameError):
        load_frame(bad)
