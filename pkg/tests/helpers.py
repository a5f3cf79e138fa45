"""Shared test utilities: an independent evaluator and corpus generators."""

import random
from pathlib import Path

from treelogic import (Model, SubsetSpace, atom, box, conj, diamond, disj,
                       implies, know, neg, parse, poss)

FIXTURES = Path(__file__).parent / "fixtures"


def naive_satisfies(model, x, u, f):
    """Word-for-word reading of the satisfaction clauses, no sharing.

    Kept deliberately separate from the package evaluators so frozen
    expectations rest on an independent code path.
    """
    kind = f.kind
    if kind == "atom":
        return x in model.valuation.get(f.name, frozenset())
    if kind == "top":
        return True
    if kind == "bot":
        return False
    if kind == "not":
        return not naive_satisfies(model, x, u, f.left)
    if kind == "and":
        return (naive_satisfies(model, x, u, f.left)
                and naive_satisfies(model, x, u, f.right))
    if kind == "know":
        return all(naive_satisfies(model, y, u, f.left) for y in u)
    if kind == "box":
        return all(naive_satisfies(model, x, v, f.left)
                   for v in model.space.opens if v <= u and x in v)
    raise AssertionError(f"unknown kind {kind}")


def naive_valid(model, f):
    return all(naive_satisfies(model, x, u, f)
               for u in model.space.opens for x in u)


def oracle_model():
    """Four worlds, two questions: the running example model."""
    points = ["q1", "q2", "q3", "q4"]
    opens = [frozenset(points), frozenset({"q1", "q2"}), frozenset({"q3", "q4"}),
             frozenset({"q3"}), frozenset({"q4"}), frozenset()]
    return Model(SubsetSpace(points, opens),
                 {"Q1": {"q1", "q2"}, "Q2": {"q1", "q2", "q3"}})


def random_treelike_model(rng, max_points=6, max_opens=10, atoms=("A", "B")):
    n = rng.randint(1, max_points)
    points = [f"x{i}" for i in range(1, n + 1)]
    opens = {frozenset(points)}
    for _ in range(rng.randint(0, max_opens + 2)):
        if len(opens) >= max_opens:
            break
        base = rng.choice(sorted(opens, key=sorted))
        sub = frozenset(rng.sample(sorted(base), rng.randint(0, len(base))))
        if all(sub <= v or v <= sub or not (sub & v) for v in opens):
            opens.add(sub)
    valuation = {a: frozenset(p for p in points if rng.random() < 0.5)
                 for a in atoms}
    return Model(SubsetSpace(points, opens), valuation)


_UNARY = [neg, box, know, diamond, poss]
_BINARY = [conj, disj, implies]


def random_formula(rng, atoms, depth):
    if depth == 0 or rng.random() < 0.2:
        r = rng.random()
        if r < 0.85:
            return atom(rng.choice(list(atoms)))
        return parse("true") if r < 0.93 else parse("false")
    if rng.random() < 0.55:
        return rng.choice(_UNARY)(random_formula(rng, atoms, depth - 1))
    op = rng.choice(_BINARY)
    return op(random_formula(rng, atoms, depth - 1),
              random_formula(rng, atoms, depth - 1))


def corpus(seed, count, max_points=6, max_opens=10, depth=3, atoms=("A", "B")):
    rng = random.Random(seed)
    for _ in range(count):
        yield (random_treelike_model(rng, max_points, max_opens, atoms),
               random_formula(rng, atoms, depth))


def same_model(m1, m2):
    """Extensional equality: points, open family, valuation (names ignored)."""
    return (m1.space.points == m2.space.points
            and set(m1.space.opens) == set(m2.space.opens)
            and m1.valuation == m2.valuation)
