"""Stable partitions, remainders, filtration and finite-model extraction.

The pipeline: for a treelike model and a formula, build an
intersection-closed family of subsets whose remainders are stable for
every subformula; collapse the open family along the remainder classes
(filtration); then collapse points that the surviving opens and the
formula's atoms cannot tell apart.  The result is a finite treelike
model satisfying the same subformulas at corresponding neighborhoods.
"""

from __future__ import annotations

from .decide import complexity_bound
from .formula import Formula, atom_names, render, subformulas
from .model import Model, SubsetSpace

__all__ = [
    "PartitionError", "closure_intersection", "remainder", "is_stable",
    "PartitionTable", "build_stable_partitions",
    "FiltrationResult", "filtrate",
    "point_quotient", "ExtractResult", "extract_finite_model",
    "ordered_family",
]


class PartitionError(ValueError):
    """Violated precondition or internal inconsistency in the pipeline."""


def ordered_family(family) -> tuple:
    """Deterministic member order: big to small, then lexicographic."""
    return tuple(sorted(family, key=lambda u: (-len(u), tuple(sorted(u)))))


def closure_intersection(members) -> frozenset:
    """Smallest superset of ``members`` closed under pairwise intersection."""
    closed = set(frozenset(u) for u in members)
    frontier = list(closed)
    while frontier:
        u = frontier.pop()
        for v in list(closed):
            w = u & v
            if w not in closed:
                closed.add(w)
                frontier.append(w)
    return frozenset(closed)


def _down(model: Model, w: frozenset) -> frozenset:
    """Opens of the model contained in ``w`` (any subset of X)."""
    return frozenset(v for v in model.space.opens if v <= w)


def remainder(model: Model, family, u) -> frozenset:
    """Opens below ``u`` that lie below no family member not above ``u``.

    ``family`` is a collection of subsets of X (members need not be
    opens); the result is a set of opens.
    """
    family = set(frozenset(f) for f in family)
    u = frozenset(u)
    if u not in family:
        raise PartitionError("remainder expects a member of the family")
    out = set(_down(model, u))
    for other in family:
        if not u <= other:
            out -= _down(model, other)
    return frozenset(out)


def is_stable(model: Model, opens_subset, f: Formula) -> bool:
    """No point flips its verdict on ``f`` across the given opens.

    Quantifies over the opens of the group that contain the point;
    points lying in none of them are vacuously stable.
    """
    group = [frozenset(v) for v in opens_subset]
    for v in group:
        if v not in model.space._open_set:
            raise PartitionError("is_stable expects a set of opens of the model")
    truths = [model.truth_set(v, f) for v in group]
    for i in range(len(group)):
        for j in range(i + 1, len(group)):
            if truths[i] & group[j] != truths[j] & group[i]:
                return False
    return True


class PartitionTable:
    """Per-subformula stable partitions for one formula.

    ``families`` maps each subformula to its intersection-closed family;
    ``family`` is the top formula's.  ``remainders`` and ``truth`` are
    taken with respect to the top family: ``truth[(psi, u)]`` is the set
    of points of the member ``u`` where ``psi`` holds with ``u`` as the
    current view.
    """

    def __init__(self, model, formula, families):
        self.model = model
        self.formula = formula
        self.families = families
        self.family = families[formula]
        self.members = ordered_family(self.family)
        self.remainders = {u: remainder(model, self.family, u)
                           for u in self.members}
        self.truth = {}
        for psi in subformulas(formula):
            for u in self.members:
                self.truth[(psi, u)] = model.truth_in(u, psi)

    def family_sizes(self) -> dict:
        return {render(psi): len(fam) for psi, fam in self.families.items()}


def build_stable_partitions(model: Model, formula: Formula) -> PartitionTable:
    """Families of subsets whose remainders are stable per subformula.

    Built bottom-up over the subformulas: atoms need only the whole
    space; conjunction merges and recloses; the knowledge case recloses
    with the truth sets of the child over the child's family members.
    Negation and the refinement modality reuse the child's family.
    """
    if not model.space.is_treelike():
        raise PartitionError("stable partitions are built over treelike models")
    full = frozenset(model.space.full)
    families: dict[Formula, frozenset] = {}
    for psi in subformulas(formula):
        k = psi.kind
        if k in ("atom", "top", "bot"):
            fam = frozenset([full])
        elif k in ("not", "box"):
            fam = families[psi.left]
        elif k == "and":
            fam = closure_intersection(families[psi.left] | families[psi.right])
        else:  # know
            base = families[psi.left]
            truths = {model.truth_in(u, psi.left) for u in base}
            fam = closure_intersection(base | truths)
        families[psi] = fam
    return PartitionTable(model, formula, families)


class FiltrationResult:
    """Open-family collapse of a model along the stable partition.

    ``surviving`` lists the family members whose remainder covers at
    least one point; ``bars[u]`` is that covered region; ``lt`` is the
    strict relation between members whose regions meet; ``classes`` maps
    (member, point) to the point's class, which is an open of ``output``.
    """

    def __init__(self, table, surviving, bars, lt, classes, owner, output):
        self.table = table
        self.formula = table.formula
        self.surviving = surviving
        self.bars = bars
        self.lt = lt
        self.classes = classes
        self.owner = owner
        self.output = output

    def le(self, u1, u2) -> bool:
        return u1 == u2 or (u1, u2) in self.lt

    def image(self, x, v):
        """Image neighborhood in the output of the input neighborhood (x, v)."""
        v = frozenset(v)
        owner = self.owner.get(v)
        if owner is None:
            raise PartitionError("not an open of the filtrated model")
        cls = self.classes.get((owner, x))
        if cls is None:
            raise PartitionError(f"point {x!r} does not belong to the open")
        return x, cls


def filtrate(model: Model, formula: Formula) -> FiltrationResult:
    """Collapse the open family to the classes induced by the partition."""
    table = build_stable_partitions(model, formula)
    members = table.members
    rem = table.remainders

    bars = {u: frozenset().union(*rem[u]) if rem[u] else frozenset()
            for u in members}
    surviving = tuple(u for u in members if bars[u])

    # owner: every open falls in exactly one remainder
    owner = {}
    for v in model.space.opens:
        holders = [u for u in members if v in rem[u]]
        if len(holders) != 1:
            raise PartitionError(
                f"open {sorted(v)} should lie in exactly one remainder, "
                f"found {len(holders)}")
        owner[v] = holders[0]

    lt = set()
    for u1 in surviving:
        for u2 in surviving:
            if u1 == u2 or not bars[u1] & bars[u2]:
                continue
            strict = True
            for x in bars[u1] & bars[u2]:
                for v1 in rem[u1]:
                    if x not in v1:
                        continue
                    for v2 in rem[u2]:
                        if x in v2 and not (v1 <= v2 and v1 != v2):
                            strict = False
            if strict:
                lt.add((u1, u2))

    for u1, u2 in lt:
        if (u2, u1) in lt:
            raise PartitionError("strict remainder relation is not asymmetric")

    def le(u1, u2):
        return u1 == u2 or (u1, u2) in lt

    classes = {}
    opens_out = set()
    for ui in surviving:
        ups = [uj for uj in surviving if le(ui, uj)]
        groups = {}
        for x in sorted(bars[ui]):
            sig = tuple(x in bars[uj] for uj in ups)
            groups.setdefault(sig, []).append(x)
        for group in groups.values():
            cls = frozenset(group)
            opens_out.add(cls)
            for x in group:
                classes[(ui, x)] = cls

    # class-nesting side conditions mirroring the lt relation
    for uk in surviving:
        for ul in surviving:
            if uk == ul or not bars[uk] & bars[ul]:
                continue
            for x in bars[uk] & bars[ul]:
                ck, cl = classes[(uk, x)], classes[(ul, x)]
                if le(uk, ul) and not ck <= cl:
                    raise PartitionError("classes do not respect the relation")
                if (uk, ul) in lt and not (ck <= cl and ck != cl):
                    raise PartitionError("strictly related members must give "
                                         "strictly nested classes")
                if ck < cl and (uk, ul) not in lt:
                    raise PartitionError("strictly nested classes require "
                                         "strictly related members")

    full = frozenset(model.space.full)
    if full not in opens_out:
        raise PartitionError("filtration lost the full point set")
    names = [f"cls({min(u)},{len(u)})" for u in opens_out]
    space = SubsetSpace(model.space.points, opens_out, names)
    output = Model(space, model.valuation)
    if not space.is_treelike():
        raise PartitionError("filtration produced a non-treelike space")
    return FiltrationResult(table, surviving, bars, frozenset(lt),
                            classes, owner, output)


def _quotient_parts(model: Model, atoms):
    atoms = sorted(atoms)
    sig = {}
    for x in model.space.points:
        sig[x] = (tuple(x in u for u in model.space.opens),
                  tuple(x in model.valuation.get(a, frozenset()) for a in atoms))
    groups: dict[tuple, list] = {}
    for x in model.space.points:
        groups.setdefault(sig[x], []).append(x)
    point_map = {}
    for members in groups.values():
        rep = min(members)
        for x in members:
            point_map[x] = rep
    new_points = sorted(set(point_map.values()))
    # every open is a union of classes, so images of distinct opens stay
    # distinct and the constructor's duplicate check cannot fire
    new_opens = [frozenset(point_map[x] for x in u)
                 for u in model.space.opens]
    new_val = {a: frozenset(point_map[x] for x in members)
               for a, members in model.valuation.items()}
    space = SubsetSpace(new_points, new_opens)
    return Model(space, new_val), point_map


def point_quotient(model: Model, atoms) -> Model:
    """Identify points that agree on every open and on the given atoms.

    The whole valuation is carried over member-wise; only the atoms in
    ``atoms`` are guaranteed to keep their meaning across the quotient.
    """
    return _quotient_parts(model, atoms)[0]


class ExtractResult:
    """Finite model extracted for one formula, with the size report."""

    def __init__(self, model, report, filtration, point_map):
        self.model = model
        self.report = report
        self.filtration = filtration
        self.table = filtration.table
        self.point_map = point_map

    def image(self, x, v):
        """Output neighborhood corresponding to the input neighborhood (x, v)."""
        x2, cls = self.filtration.image(x, v)
        return (self.point_map[x2],
                frozenset(self.point_map[y] for y in cls))


def extract_finite_model(model: Model, formula: Formula) -> ExtractResult:
    """Stable partition, filtration, then point quotient over the atoms."""
    filt = filtrate(model, formula)
    quotient, point_map = _quotient_parts(filt.output, atom_names(formula))
    bound = complexity_bound(formula)
    report = {
        "family_sizes": {render(psi): len(filt.table.families[psi])
                         for psi in subformulas(formula)},
        "output_points": len(quotient.space.points),
        "output_opens": len(quotient.space.opens),
        "bound_points": "astronomical" if bound.saturated else bound.max_points,
        "bound_opens": "astronomical" if bound.saturated else bound.max_opens,
    }
    return ExtractResult(quotient, report, filt, point_map)
