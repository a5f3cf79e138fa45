import random

import pytest

from treelogic import (BOT, TOP, ParseError, SchemaError, ast_dump, atom,
                       atom_names, box, conj, diamond, disj, implies,
                       instantiate, know, neg, parse, poss, render, size,
                       subformulas)


def test_parse_desugars_diamond():
    assert parse("<>K A") is neg(box(neg(know(atom("A")))))


def test_parse_arrow_right_associative():
    assert parse("A -> B -> C") is implies(atom("A"),
                                           implies(atom("B"), atom("C")))
    assert parse("(A -> B) -> C") is implies(implies(atom("A"), atom("B")),
                                             atom("C"))


def test_parse_matches_connectedness_scheme():
    f = parse("[](([]A -> B)) | []([]B -> A)")
    assert f is instantiate(11, {"phi": atom("A"), "psi": atom("B")})


def test_parse_precedence():
    assert parse("A & B | C") is disj(conj(atom("A"), atom("B")), atom("C"))
    assert parse("~A & B") is conj(neg(atom("A")), atom("B"))
    assert parse("[]A & B") is conj(box(atom("A")), atom("B"))
    assert parse("L A | B") is disj(poss(atom("A")), atom("B"))


def test_parse_constants():
    assert parse("true") is TOP
    assert parse("false") is BOT
    assert parse("K true") is know(TOP)


@pytest.mark.parametrize("text", ["A &", "(A", "A | | B", "K", "-> A", ""])
def test_parse_errors_carry_position(text):
    with pytest.raises(ParseError) as err:
        parse(text)
    assert err.value.position >= 1


def test_reserved_words_are_not_atoms():
    for word in ("K", "L", "true", "false"):
        with pytest.raises(ValueError):
            atom(word)
    with pytest.raises(ValueError):
        atom("9bad")
    with pytest.raises(ParseError):
        parse("A & L")          # L with no operand


def test_render_resugars():
    assert render(neg(box(neg(atom("A"))))) == "<>A"
    assert render(atom("A")) == "A"
    assert render(neg(know(neg(atom("A"))))) == "L A"
    assert render(disj(atom("A"), atom("B"))) == "A | B"
    assert render(implies(atom("A"), atom("B"))) == "A -> B"


def test_render_scheme_twelve_instance():
    inst = instantiate(12, {"phi": atom("A"), "psi": atom("B")})
    assert render(inst) == "[]K A & K([]A -> []B) -> []K([]A -> []B)"


def test_roundtrip_random_asts():
    rng = random.Random(7)

    def rand(depth):
        if depth == 0:
            return rng.choice([atom("A"), atom("B_2"), TOP, BOT])
        op = rng.randrange(8)
        if op < 4:
            return [neg, box, know, diamond][op](rand(depth - 1))
        if op == 4:
            return poss(rand(depth - 1))
        return [conj, disj, implies][op - 5](rand(depth - 1), rand(depth - 1))

    for _ in range(2000):
        f = rand(rng.randrange(1, 7))
        assert parse(render(f)) is f


def test_subformulas_postorder():
    got = [render(g) for g in subformulas(parse("<>K A"))]
    assert got == ["A", "K A", "~K A", "[]~K A", "<>K A"]


def test_subformulas_dedup():
    f = conj(atom("A"), atom("A"))
    assert [render(g) for g in subformulas(f)] == ["A", "A & A"]


def test_subformulas_are_subtrees():
    rng = random.Random(3)
    for _ in range(200):
        f = None
        for _ in range(5):
            g = atom(rng.choice("AB"))
            f = g if f is None else conj(box(f), know(g))
        subs = subformulas(f)
        assert subs[-1] is f
        assert len(subs) <= size(f)
        whole = set(map(id, subs))
        for g in subs:
            if g.left is not None:
                assert id(g.left) in whole


def test_instantiate_basics():
    assert render(instantiate(7, {"phi": atom("A")})) == "K A -> A"
    assert instantiate(2, {"A": atom("P")}) is parse("(P -> []P) & (~P -> []~P)")


def test_instantiate_rejects_bad_substitutions():
    with pytest.raises(SchemaError):
        instantiate(2, {"A": know(atom("P"))})
    with pytest.raises(SchemaError):
        instantiate(2, {"A": TOP})
    with pytest.raises(SchemaError):
        instantiate(7, {})
    with pytest.raises(SchemaError):
        instantiate(7, {"phi": atom("A"), "zeta": atom("B")})
    with pytest.raises(SchemaError):
        instantiate(1, {"phi": atom("A")})


def test_instantiate_compositional():
    s1 = {"phi": conj(atom("A"), atom("B")), "psi": box(atom("A"))}
    s2 = {"phi": conj(atom("A"), atom("B")), "psi": box(atom("A"))}
    assert instantiate(12, s1) is instantiate(12, s2)


def test_size_and_atoms():
    f = parse("<>A")            # ~[]~A
    assert size(f) == 4
    assert atom_names(parse("K A & ~B -> C_1")) == {"A", "B", "C_1"}


def test_ast_dump_shape():
    lines = ast_dump(parse("<>A")).splitlines()
    assert lines[0] == "not"
    assert lines[1].strip() == "box"
    assert lines[-1].strip() == "atom A"
