"""Finite birelational frames and their unfolding into treelike models.

A frame carries an S4-style refinement relation (box) and an epistemic
equivalence (k).  ``check_frame`` verifies the structural properties a
frame needs for the unfolding; ``unfold`` turns a frame generated from a
maximal state into an equivalent treelike subset-space model by tracing
every k-class back to the top class and splitting it along the classes
it can reach.
"""

from __future__ import annotations

import json

from .formula import Formula
from .model import Model, ModelError, SubsetSpace

__all__ = [
    "FrameError", "BiFrame", "CheckResult", "FrameReport", "check_frame",
    "ClassOrder", "class_order", "bi_satisfies", "UnfoldResult", "unfold",
    "induced_frame", "load_frame", "frame_from_dict", "frame_to_dict",
]


class FrameError(ValueError):
    """Ill-formed frame or an unfolding precondition failure."""


class BiFrame:
    """Finite Kripke structure with a box relation and a k relation.

    By default the constructor closes the given generator pairs:
    reflexive-transitive closure for box, full equivalence closure for k.
    Pass ``close=False`` to keep raw relations (used by fixtures that
    document property failures).
    """

    def __init__(self, states, box_pairs=(), k_pairs=(), valuation=None,
                 close: bool = True):
        self.states = tuple(sorted(states))
        if not self.states:
            raise FrameError("a frame needs at least one state")
        if len(set(self.states)) != len(self.states):
            raise FrameError("duplicate state ids")
        known = set(self.states)
        box = set(map(tuple, box_pairs))
        k = set(map(tuple, k_pairs))
        for pair in box | k:
            if len(pair) != 2:
                raise FrameError(f"relations are lists of pairs, got {pair!r}")
            if pair[0] not in known or pair[1] not in known:
                raise FrameError(f"relation mentions unknown state {pair!r}")
        if close:
            box |= {(s, s) for s in self.states}
            box = _transitive_closure(box)
            k |= {(s, s) for s in self.states}
            k |= {(b, a) for a, b in k}
            k = _transitive_closure(k)
        self.box = frozenset(box)
        self.k = frozenset(k)
        val = {}
        for name, members in (valuation or {}).items():
            members = frozenset(members)
            if not members <= known:
                raise FrameError(f"valuation of {name!r} mentions unknown states")
            val[name] = members
        self.valuation = val
        self._box_succ = {s: frozenset(t for a, t in self.box if a == s)
                          for s in self.states}
        self._k_succ = {s: frozenset(t for a, t in self.k if a == s)
                        for s in self.states}

    def box_successors(self, s) -> frozenset:
        return self._box_succ[s]

    def k_class(self, s) -> frozenset:
        return self._k_succ[s]

    def __repr__(self):
        return (f"BiFrame({len(self.states)} states, {len(self.box)} box pairs, "
                f"{len(self.k)} k pairs)")


def _transitive_closure(pairs: set) -> set:
    succ = {}
    for a, b in pairs:
        succ.setdefault(a, set()).add(b)
    changed = True
    while changed:
        changed = False
        for a, outs in succ.items():
            extra = set()
            for b in outs:
                extra |= succ.get(b, set())
            if not extra <= outs:
                outs |= extra
                changed = True
    return {(a, b) for a, outs in succ.items() for b in outs}


# ---------------------------------------------------------------------------
# structural checks

class CheckResult:
    __slots__ = ("name", "passed", "witness")

    def __init__(self, name, passed, witness=None):
        self.name = name
        self.passed = passed
        self.witness = witness

    def __repr__(self):
        status = "pass" if self.passed else f"FAIL {self.witness}"
        return f"<{self.name}: {status}>"


class FrameReport:
    def __init__(self, results):
        self.results = list(results)

    @property
    def ok(self) -> bool:
        return all(r.passed for r in self.results)

    def failures(self):
        return [r for r in self.results if not r.passed]

    def result(self, name) -> CheckResult:
        for r in self.results:
            if r.name == name:
                return r
        raise KeyError(name)

    def to_dict(self):
        return {r.name: {"passed": r.passed, "witness": r.witness}
                for r in self.results}


def check_frame(frame: BiFrame) -> FrameReport:
    """Verify the structural properties needed by the unfolding.

    Report-valued on purpose: fixtures documenting failures are data,
    not exceptions.
    """
    results = []

    def check(name, witness):
        results.append(CheckResult(name, witness is None, witness))

    box = sorted(frame.box)
    check("box_reflexive", next(
        ((s,) for s in frame.states if (s, s) not in frame.box), None))
    check("box_transitive", next(
        ((a, b, c) for a, b in box for c in sorted(frame.box_successors(b))
         if (a, c) not in frame.box), None))
    check("box_antisymmetric", next(
        ((a, b) for a, b in box
         if a != b and (b, a) in frame.box), None))
    check("box_connected", next(
        ((s, t, r) for s in frame.states
         for t in sorted(frame.box_successors(s))
         for r in sorted(frame.box_successors(s))
         if (t, r) not in frame.box and (r, t) not in frame.box), None))

    k_witness = next(((s,) for s in frame.states if (s, s) not in frame.k), None)
    if k_witness is None:
        k_witness = next(((a, b) for a, b in sorted(frame.k)
                          if (b, a) not in frame.k), None)
    if k_witness is None:
        k_witness = next(((a, b, c) for a, b in sorted(frame.k)
                          for c in sorted(frame._k_succ.get(b, ()))
                          if (a, c) not in frame.k), None)
    check("k_equivalence", k_witness)

    check("cross_property", next(
        ((s, s2, t) for s, s2 in box for t in sorted(frame.k_class(s2))
         if not any((t2, t) in frame.box for t2 in frame.k_class(s))), None))
    check("box_k_identity", next(
        ((a, b) for a, b in box
         if a != b and (a, b) in frame.k), None))
    check("atom_persistence", next(
        ((a, b, atom) for a, b in box
         for atom, members in sorted(frame.valuation.items())
         if (a in members) != (b in members)), None))
    return FrameReport(results)


# ---------------------------------------------------------------------------
# class order and unfolding

class ClassOrder:
    """K-classes of a frame with the induced order between them.

    One class sits below another when some state of the upper class
    refines into a state of the lower one.
    """

    def __init__(self, classes, le_pairs):
        self.classes = tuple(classes)
        self._le = frozenset(le_pairs)

    def le(self, c1: frozenset, c2: frozenset) -> bool:
        return (c1, c2) in self._le

    def is_partial_order(self) -> bool:
        for c in self.classes:
            if not self.le(c, c):
                return False
        for c1 in self.classes:
            for c2 in self.classes:
                if c1 != c2 and self.le(c1, c2) and self.le(c2, c1):
                    return False
                for c3 in self.classes:
                    if self.le(c1, c2) and self.le(c2, c3) and not self.le(c1, c3):
                        return False
        return True

    def greatest(self):
        for c in self.classes:
            if all(self.le(d, c) for d in self.classes):
                return c
        return None


def class_order(frame: BiFrame) -> ClassOrder:
    classes = sorted({frame.k_class(s) for s in frame.states}, key=min)
    le = set()
    for c1 in classes:
        for c2 in classes:
            if any((s2, s1) in frame.box for s1 in c1 for s2 in c2):
                le.add((c1, c2))
    return ClassOrder(classes, le)


class UnfoldResult:
    """Treelike model produced from a frame, with its bookkeeping.

    ``model`` is the subset-space model; points are the states of the
    root's k-class.  ``open_for(t, s)`` returns the open obtained from
    state ``s``'s class that contains point ``t``.
    """

    def __init__(self, model, root, x_class, carriers, class_opens, order):
        self.model = model
        self.root = root
        self.x_class = x_class
        self._carriers = carriers          # k-class -> carrier subset of X
        self._class_opens = class_opens    # k-class -> {point -> open frozenset}
        self.order = order

    def _class_of(self, s) -> frozenset:
        for c in self._class_opens:
            if s in c:
                return c
        raise FrameError(f"unknown state {s!r}")

    def carrier(self, s) -> frozenset:
        return self._carriers[self._class_of(s)]

    def open_for(self, t, s) -> frozenset:
        try:
            return self._class_opens[self._class_of(s)][t]
        except KeyError:
            raise FrameError(
                f"point {t!r} lies outside the carrier of {s!r}'s class") from None


def unfold(frame: BiFrame, root) -> UnfoldResult:
    """Unfold a generated frame into an equivalent treelike model.

    Requires: the structural checks pass, every state is reachable from
    ``root`` along box/k edges, and the root's k-class is the top of the
    class order.
    """
    if root not in set(frame.states):
        raise FrameError(f"unknown root state {root!r}")
    report = check_frame(frame)
    if not report.ok:
        bad = ", ".join(f"{r.name} {r.witness}" for r in report.failures())
        raise FrameError(f"frame fails structural checks: {bad}")

    reached = {root}
    frontier = [root]
    while frontier:
        s = frontier.pop()
        for t in frame.box_successors(s) | frame.k_class(s):
            if t not in reached:
                reached.add(t)
                frontier.append(t)
    if reached != set(frame.states):
        missing = sorted(set(frame.states) - reached)
        raise FrameError(f"frame is not generated by {root!r}; "
                         f"unreachable states: {missing}")

    order = class_order(frame)
    if not order.is_partial_order():
        raise FrameError("class order is not a partial order")
    x_class = frame.k_class(root)
    if order.greatest() != x_class:
        raise FrameError(f"root {root!r}'s class is not the top of the class order")

    carriers = {}
    for cls in order.classes:
        carriers[cls] = frozenset(
            t for t in x_class
            if any((t, t2) in frame.box for t2 in cls))

    class_opens = {}
    opens = {}          # open frozenset -> (source class min, min member)
    for cls in order.classes:
        ups = [c for c in order.classes if order.le(cls, c)]
        groups = {}
        for t in sorted(carriers[cls]):
            sig = tuple(t in carriers[c] for c in ups)
            groups.setdefault(sig, []).append(t)
        point_to_open = {}
        for members in groups.values():
            u = frozenset(members)
            for t in members:
                point_to_open[t] = u
            name_key = (min(cls), min(u))
            if u not in opens or name_key < opens[u]:
                opens[u] = name_key
        class_opens[cls] = point_to_open

    # each point of an open refines into exactly one state of the source class
    for cls, point_to_open in class_opens.items():
        for t in point_to_open:
            hits = [u for u in cls if (t, u) in frame.box]
            if len(hits) != 1:
                raise FrameError(
                    f"canonical representation not unique: {t!r} reaches "
                    f"{hits} in class of {min(cls)!r}")

    names = {u: f"cls({src},{member})" for u, (src, member) in opens.items()}
    space = SubsetSpace(x_class, list(opens), [names[u] for u in opens])
    valuation = {a: members & x_class
                 for a, members in frame.valuation.items()}
    model = Model(space, valuation)
    if not space.is_treelike():
        raise FrameError("unfolding produced a non-treelike space")
    return UnfoldResult(model, root, x_class, carriers, class_opens, order)


# ---------------------------------------------------------------------------
# evaluation on frames

def bi_satisfies(frame: BiFrame, s, f: Formula) -> bool:
    """Standard birelational Kripke truth: box over box, K over k."""
    if s not in set(frame.states):
        raise FrameError(f"unknown state {s!r}")
    return s in _frame_truth(frame, f, {})


def _frame_truth(frame: BiFrame, f: Formula, memo) -> frozenset:
    hit = memo.get(id(f))
    if hit is not None:
        return hit
    k = f.kind
    if k == "atom":
        out = frame.valuation.get(f.name, frozenset())
    elif k == "top":
        out = frozenset(frame.states)
    elif k == "bot":
        out = frozenset()
    elif k == "not":
        out = frozenset(frame.states) - _frame_truth(frame, f.left, memo)
    elif k == "and":
        out = (_frame_truth(frame, f.left, memo)
               & _frame_truth(frame, f.right, memo))
    elif k == "know":
        t = _frame_truth(frame, f.left, memo)
        out = frozenset(s for s in frame.states if frame.k_class(s) <= t)
    else:  # box
        t = _frame_truth(frame, f.left, memo)
        out = frozenset(s for s in frame.states
                        if frame.box_successors(s) <= t)
    memo[id(f)] = out
    return out


def induced_frame(model: Model) -> BiFrame:
    """The subset frame of a model: one state per neighborhood.

    Box relates (x, U) to (x, V) when V refines U around x; k relates
    neighborhoods sharing their open.  State ids are "point@open-name".
    """
    space = model.space
    ids = {}
    for name, u in zip(space.names, space.opens):
        for x in u:
            ids[(x, u)] = f"{x}@{name}"
    box = []
    k = []
    for (x, u), sid in ids.items():
        for (y, v), tid in ids.items():
            if x == y and v <= u:
                box.append((sid, tid))
            if u == v:
                k.append((sid, tid))
    valuation = {a: frozenset(sid for (x, _), sid in ids.items() if x in members)
                 for a, members in model.valuation.items()}
    return BiFrame(ids.values(), box, k, valuation, close=True)


# ---------------------------------------------------------------------------
# files

def frame_from_dict(data: dict) -> BiFrame:
    try:
        states = data["states"]
    except (TypeError, KeyError):
        raise FrameError("frame file needs a states list") from None
    return BiFrame(states, data.get("box", ()), data.get("k", ()),
                   data.get("valuation", {}),
                   close=data.get("close", True))


def frame_to_dict(frame: BiFrame) -> dict:
    return {
        "states": list(frame.states),
        "box": sorted([a, b] for a, b in frame.box if a != b),
        "k": sorted([a, b] for a, b in frame.k if a != b),
        "valuation": {a: sorted(v) for a, v in sorted(frame.valuation.items())},
        "close": True,
    }


def load_frame(path) -> BiFrame:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise FrameError(f"not valid JSON: {exc}") from None
    return frame_from_dict(data)
