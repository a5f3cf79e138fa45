"""Finite subset-space models and the satisfaction relation.

A subset space is a finite point set X together with a family of opens
O containing X; formulas are evaluated at neighborhoods (x, U) with
x in U in O.  K quantifies over the points of the current open, [] over
the opens shrinking the current one around the current point.

Two evaluators live here: ``Model.satisfies`` is the direct recursive
reading of the semantic clauses (the reference), and the mask engine at
the bottom is a bitset evaluator used by the enumeration suites.  Tests
cross-check them against each other.
"""

from __future__ import annotations

import json

from .formula import ATOM_RE, RESERVED, Formula

__all__ = [
    "ModelError", "SubsetSpace", "Model",
    "build_question_tree", "build_stream_space",
    "load_model", "dump_model", "model_from_dict", "model_to_dict",
    "MaskContext",
]


class ModelError(ValueError):
    """Ill-formed space, model file, or evaluation request."""


def _check_atom_name(name: str):
    if not ATOM_RE.match(name) or name in RESERVED:
        raise ModelError(f"invalid atom name in valuation: {name!r}")


def _open_sort_key(u: frozenset):
    return (-len(u), tuple(sorted(u)))


class SubsetSpace:
    """Finite point set with a family of opens containing the whole set.

    Opens are extensional: two opens with the same members are the same
    open, and the constructor rejects duplicate member sets.  Names are
    aliases used by files and the CLI.
    """

    def __init__(self, points, opens, names=None):
        self.points = tuple(sorted(points))
        if not self.points:
            raise ModelError("a subset space needs at least one point")
        if len(set(self.points)) != len(self.points):
            raise ModelError("duplicate point ids")
        full = frozenset(self.points)
        sets = [frozenset(u) for u in opens]
        order = sorted(range(len(sets)), key=lambda i: _open_sort_key(sets[i]))
        self.opens = tuple(sets[i] for i in order)
        if names is None:
            gen = ("top" if u == full else f"U{i}"
                   for i, u in enumerate(self.opens))
            self.names = tuple(gen)
        else:
            names = list(names)
            if len(names) != len(sets):
                raise ModelError("one name per open required")
            self.names = tuple(names[i] for i in order)
        seen = set()
        for name, u in zip(self.names, self.opens):
            if not u <= full:
                raise ModelError(f"open {name!r} contains unknown points")
            if u in seen:
                raise ModelError(f"open {name!r} duplicates another open's members")
            seen.add(u)
        if len(set(self.names)) != len(self.names):
            raise ModelError("duplicate open names")
        if full not in seen:
            raise ModelError("the full point set must be one of the opens")
        self.full = full
        self._by_name = dict(zip(self.names, self.opens))
        self._open_set = frozenset(self.opens)

    def open_named(self, name: str) -> frozenset:
        try:
            return self._by_name[name]
        except KeyError:
            raise ModelError(f"unknown open {name!r}") from None

    def name_of(self, u: frozenset) -> str:
        for name, v in zip(self.names, self.opens):
            if v == u:
                return name
        raise ModelError("unknown open")

    def is_treelike(self) -> bool:
        """Every pair of opens is nested or disjoint."""
        for i, u in enumerate(self.opens):
            for v in self.opens[i + 1:]:
                if not (u <= v or v <= u or not (u & v)):
                    return False
        return True

    def down_set(self, u) -> frozenset:
        """All opens contained in ``u`` (an open, by name or by set)."""
        u = self._resolve(u)
        if u not in self._open_set:
            raise ModelError("down_set expects a member of the open family")
        return frozenset(v for v in self.opens if v <= u)

    def _resolve(self, u) -> frozenset:
        if isinstance(u, str):
            return self.open_named(u)
        return frozenset(u)

    def __eq__(self, other):
        return (isinstance(other, SubsetSpace)
                and self.points == other.points
                and set(self.opens) == set(other.opens))

    def __hash__(self):
        return hash((self.points, frozenset(self.opens)))

    def __repr__(self):
        return f"SubsetSpace({len(self.points)} points, {len(self.opens)} opens)"


class Model:
    """Subset space plus an interpretation of atoms as point sets.

    Unknown atoms evaluate to the empty set unless ``strict_atoms`` is
    passed to the evaluation entry points.  Models are never mutated
    after construction and evaluation is pure, so they can be shared
    across threads and worker processes freely.
    """

    def __init__(self, space: SubsetSpace, valuation=None):
        self.space = space
        val = {}
        for name, members in (valuation or {}).items():
            _check_atom_name(name)
            members = frozenset(members)
            if not members <= space.full:
                raise ModelError(f"valuation of {name!r} contains unknown points")
            val[name] = members
        self.valuation = val

    # -- evaluation (reference semantics) ---------------------------------

    def _atom_set(self, name: str, strict: bool) -> frozenset:
        if strict and name not in self.valuation:
            raise ModelError(f"unknown atom {name!r}")
        return self.valuation.get(name, frozenset())

    def _holds(self, x, u: frozenset, f: Formula, strict: bool, memo) -> bool:
        key = (id(f), u, x)
        hit = memo.get(key)
        if hit is not None:
            return hit
        k = f.kind
        if k == "atom":
            out = x in self._atom_set(f.name, strict)
        elif k == "top":
            out = True
        elif k == "bot":
            out = False
        elif k == "not":
            out = not self._holds(x, u, f.left, strict, memo)
        elif k == "and":
            out = (self._holds(x, u, f.left, strict, memo)
                   and self._holds(x, u, f.right, strict, memo))
        elif k == "know":
            out = all(self._holds(y, u, f.left, strict, memo) for y in u)
        else:  # box: shrink the open, keep the point
            out = all(self._holds(x, v, f.left, strict, memo)
                      for v in self.space.opens if v <= u and x in v)
        memo[key] = out
        return out

    def satisfies(self, x, u, f: Formula, strict_atoms: bool = False) -> bool:
        """Truth of ``f`` at the neighborhood ``(x, u)``; ``u`` in O."""
        u = self.space._resolve(u)
        if u not in self.space._open_set:
            raise ModelError("not an open of this model")
        if x not in u:
            raise ModelError(f"point {x!r} does not belong to the open")
        return self._holds(x, u, f, strict_atoms, {})

    def truth_set(self, u, f: Formula, strict_atoms: bool = False) -> frozenset:
        """Points of the open ``u`` where ``f`` holds at fixed ``u``."""
        u = self.space._resolve(u)
        if u not in self.space._open_set:
            raise ModelError("truth_set expects a member of the open family")
        memo = {}
        return frozenset(x for x in u if self._holds(x, u, f, strict_atoms, memo))

    def truth_in(self, carrier, f: Formula) -> frozenset:
        """Truth set over an arbitrary carrier set, not necessarily open.

        K quantifies over the carrier; [] quantifies over the genuine
        opens inside the carrier around the point.  For carriers that are
        opens this agrees with ``truth_set``.
        """
        carrier = frozenset(carrier)
        if not carrier <= self.space.full:
            raise ModelError("carrier contains unknown points")
        memo = {}
        return frozenset(x for x in carrier
                         if self._holds(x, carrier, f, False, memo))

    def neighborhoods(self):
        for u in self.space.opens:
            for x in sorted(u):
                yield x, u

    def is_valid(self, f: Formula, strict_atoms: bool = False) -> bool:
        """True when ``f`` holds at every neighborhood of the model."""
        memo = {}
        return all(self._holds(x, u, f, strict_atoms, memo)
                   for x, u in self.neighborhoods())

    def __eq__(self, other):
        return (isinstance(other, Model) and self.space == other.space
                and self.valuation == other.valuation)

    def __hash__(self):
        return hash((self.space, tuple(sorted(self.valuation.items()))))

    def __repr__(self):
        return (f"Model({len(self.space.points)} points, "
                f"{len(self.space.opens)} opens, "
                f"{sorted(self.valuation)} atoms)")


# ---------------------------------------------------------------------------
# builders

def build_question_tree(points, questions) -> Model:
    """Iterated yes/no refinements of a point set.

    ``questions`` is an ordered list of (name, yes_set) pairs.  Level 0
    is the whole set; each question splits every cell of the previous
    level in two.  Empty cells are kept as opens; the valuation maps each
    question name to its yes-set.
    """
    points = frozenset(points)
    opens = {points}
    level = [points]
    names = []
    valuation = {}
    for name, yes in questions:
        yes = frozenset(yes)
        if not yes <= points:
            raise ModelError(f"yes-set of {name!r} is not a subset of the points")
        if name in valuation:
            raise ModelError(f"duplicate question name {name!r}")
        names.append(name)
        valuation[name] = yes
        level = [cell for prev in level for cell in (prev & yes, prev - yes)]
        opens.update(level)
    space = SubsetSpace(points, opens)
    return Model(space, valuation)


def build_stream_space(depth: int) -> Model:
    """Binary strings of a fixed length with their prefix cylinders.

    A finite stand-in for observing a machine emit one bit at a time:
    points are the possible complete emissions, the cylinder of a prefix
    collects the points still compatible with what has been seen.
    """
    if depth < 1:
        raise ModelError("depth must be at least 1")
    points = ["".join(bits) for bits in _bit_strings(depth)]
    opens = {frozenset(points)}
    for plen in range(1, depth + 1):
        for prefix in ("".join(bits) for bits in _bit_strings(plen)):
            opens.add(frozenset(w for w in points if w.startswith(prefix)))
    return Model(SubsetSpace(points, opens), {})


def _bit_strings(n: int):
    if n == 0:
        yield ()
        return
    for rest in _bit_strings(n - 1):
        yield ("0",) + rest
        yield ("1",) + rest


# ---------------------------------------------------------------------------
# files

def model_from_dict(data: dict) -> Model:
    try:
        points = data["points"]
        raw_opens = data["opens"]
    except (TypeError, KeyError) as exc:
        raise ModelError(f"model file missing field: {exc}") from None
    names = []
    sets = []
    for entry in raw_opens:
        try:
            names.append(entry["name"])
            sets.append(frozenset(entry["members"]))
        except (TypeError, KeyError):
            raise ModelError("each open needs a name and a members list") from None
    space = SubsetSpace(points, sets, names)
    return Model(space, data.get("valuation", {}))


def model_to_dict(model: Model) -> dict:
    return {
        "points": list(model.space.points),
        "opens": [{"name": name, "members": sorted(u)}
                  for name, u in zip(model.space.names, model.space.opens)],
        "valuation": {a: sorted(v) for a, v in sorted(model.valuation.items())},
    }


def load_model(path) -> Model:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ModelError(f"not valid JSON: {exc}") from None
    return model_from_dict(data)


def dump_model(model: Model, path):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(model_to_dict(model), fh, indent=2, sort_keys=False)
        fh.write("\n")


# ---------------------------------------------------------------------------
# mask engine (bitset evaluator for the enumeration suites)

class MaskContext:
    """Bitset view of a model: point i <-> bit i, opens and truth sets as ints."""

    __slots__ = ("n", "points", "opens", "full", "vals", "cache")

    def __init__(self, n: int, opens, vals):
        self.n = n
        self.points = None
        self.opens = tuple(opens)
        self.full = (1 << n) - 1
        self.vals = dict(vals)
        self.cache = {}

    @classmethod
    def from_model(cls, model: Model) -> "MaskContext":
        points = model.space.points
        index = {p: i for i, p in enumerate(points)}
        opens = [_mask(u, index) for u in model.space.opens]
        vals = {a: _mask(s, index) for a, s in model.valuation.items()}
        ctx = cls(len(points), opens, vals)
        ctx.points = points
        return ctx

    def truth(self, f: Formula, u_mask: int) -> int:
        key = (id(f), u_mask)
        hit = self.cache.get(key)
        if hit is not None:
            return hit
        k = f.kind
        if k == "atom":
            out = self.vals.get(f.name, 0) & u_mask
        elif k == "top":
            out = u_mask
        elif k == "bot":
            out = 0
        elif k == "not":
            out = u_mask & ~self.truth(f.left, u_mask)
        elif k == "and":
            out = self.truth(f.left, u_mask) & self.truth(f.right, u_mask)
        elif k == "know":
            out = u_mask if self.truth(f.left, u_mask) == u_mask else 0
        else:  # box
            out = u_mask
            for v in self.opens:
                if v & ~u_mask == 0 and v:
                    out &= ~(v & ~self.truth(f.left, v))
        self.cache[key] = out
        return out

    def is_valid(self, f: Formula) -> bool:
        return all(self.truth(f, u) == u for u in self.opens if u)

    def first_failure(self, f: Formula):
        """Deterministically first neighborhood falsifying ``f``, or None."""
        for u in self.opens:
            t = self.truth(f, u)
            if t != u:
                missing = u & ~t
                bit = (missing & -missing).bit_length() - 1
                return bit, u
        return None


def _mask(subset, index) -> int:
    m = 0
    for p in subset:
        m |= 1 << index[p]
    return m
