import pytest

from ckstar.oracle import (
    EnumSpec,
    ModelBank,
    brute_force_decide,
    enumerate_formulas,
    enumerate_models,
    random_formula,
    random_model,
    random_pdl_model,
)
from ckstar.relmodel import dump_model, validate
from ckstar.semantics import falsifying_world
from ckstar.syntax import (
    FragmentError,
    FragmentTag,
    check_fragment,
    formula_size,
    iter_nodes,
    parse_formula,
    parse_pdl,
)


def test_enumeration_hand_counts():
    assert sum(1 for _ in enumerate_models(EnumSpec(1, (), "wk"))) == 2
    assert sum(1 for _ in enumerate_models(EnumSpec(1, (), "ck"))) == 3
    # Both the infallible and the fallible one-world bi-preorders qualify.
    assert sum(1 for _ in enumerate_models(EnumSpec(1, (), "cs4"))) == 2
    assert sum(1 for _ in enumerate_models(EnumSpec(1, (), "ws4"))) == 1


def test_enumerated_models_validate():
    for kind in ("ck", "wk", "cs4", "ws4"):
        for m in enumerate_models(EnumSpec(2, ("p",), kind)):
            assert validate(m, kind) == []


def test_enumeration_guard():
    with pytest.raises(ValueError):
        EnumSpec(5, (), "ck")
    EnumSpec(5, (), "ck", allow_large=True)


def test_brute_force_goldens():
    spec = EnumSpec(2, ("p",))
    assert brute_force_decide("ck_star", parse_formula("p->p"), spec).valid_up_to_bound
    v = brute_force_decide("ck_star", parse_formula("~<>false"), EnumSpec(2, ()))
    assert not v.valid_up_to_bound
    assert v.model.worlds == 2 and v.model.bot
    assert falsifying_world(v.model, parse_formula("~<>false")) == v.world
    w = brute_force_decide("wk_star", parse_formula("~<>false"), EnumSpec(2, ()))
    assert w.valid_up_to_bound


def test_brute_force_fragment_checks():
    with pytest.raises(FragmentError):
        brute_force_decide("cs4", parse_formula("[*]p"), EnumSpec(2, ("p",)))
    with pytest.raises(ValueError):
        brute_force_decide("ck_star", parse_formula("p"), EnumSpec(2, ()))
    with pytest.raises(FragmentError):
        brute_force_decide("k_star", parse_pdl("[i]p"), EnumSpec(2, ("p",)))


def test_brute_force_pdl():
    v = brute_force_decide("k_star", parse_pdl("[a*]p -> [a][a*]p"), EnumSpec(2, ("p",)))
    assert v.valid_up_to_bound
    w = brute_force_decide("k_star", parse_pdl("[a]p -> p"), EnumSpec(2, ("p",)))
    assert not w.valid_up_to_bound


def test_random_model_determinism_and_validity():
    spec = EnumSpec(4, ("p", "q"), "ck")
    assert dump_model(random_model(7, spec)) == dump_model(random_model(7, spec))
    for kind in ("ck", "wk", "cs4", "ws4"):
        s = EnumSpec(4, ("p", "q"), kind)
        for seed in range(150):
            m = random_model(seed, s)
            assert validate(m, kind) == []
            assert 1 <= m.worlds <= 4


def test_random_pdl_model_determinism():
    a = random_pdl_model(3, 3)
    b = random_pdl_model(3, 3)
    assert a == b


def test_random_formula_determinism_and_coverage():
    f = random_formula(5, 3, ("p", "q"))
    assert f == random_formula(5, 3, ("p", "q"))
    for fragment, names in (
        (FragmentTag.LSTAR, {"Bot", "Atom", "And", "Or", "Imp",
                             "Box", "Dia", "BoxStar", "DiaStar"}),
        (FragmentTag.LSTAR_BOX, {"Box", "BoxStar"}),
        (FragmentTag.L, {"Box", "Dia"}),
        (FragmentTag.LK_STAR, {"PdlAtom", "Neg", "PdlAnd", "PdlOr", "BoxP"}),
    ):
        seen = set()
        for seed in range(1000):
            g = random_formula(seed, 3, ("p", "q"), fragment)
            assert check_fragment(g, fragment)
            seen |= {type(node).__name__ for node in iter_nodes(g)}
        assert names <= seen


def test_enumerate_formulas_counts_and_order():
    corpus = enumerate_formulas(5, ("p", "q"))
    assert len(corpus) == 4452
    sizes = [formula_size(f) for f in corpus]
    assert sizes == sorted(sizes)
    assert len(set(corpus)) == len(corpus)
    small = enumerate_formulas(3, ("p",), FragmentTag.LK_STAR)
    assert all(check_fragment(f, FragmentTag.LK_STAR) for f in small)
    assert parse_pdl("[a]p") in small


def test_bank_matches_reference_enumeration():
    spec = EnumSpec(2, ("p", "q"), "ck")
    bank = ModelBank(spec)
    models = list(enumerate_models(spec))
    assert bank.count == len(models)
    for i in (0, 1, len(models) // 2, len(models) - 1):
        assert bank.model_at(i) == models[i]


def test_bank_first_violation_matches_brute_force():
    spec = EnumSpec(2, ("p", "q"), "ck")
    bank = ModelBank(spec)
    formulas = [parse_formula(s) for s in
                ("p->p", "p", "~<>false", "[]p -> p", "[*]p -> []p",
                 "p|q", "p->q", "<>p -> <*>p", "[*](p&q) -> [*]p")]
    for f in formulas:
        ref = brute_force_decide("ck_star", f, spec)
        got = bank.first_violation(f)
        if ref.valid_up_to_bound:
            assert got is None
        else:
            i, w = got
            assert bank.model_at(i) == ref.model
            assert w == ref.world


def test_bank_chunked_scan_consistency():
    spec = EnumSpec(2, ("p",), "wk")
    bank = ModelBank(spec)
    f = parse_formula("[]p -> [][]p")
    assert bank.first_violation(f, chunk=7) == bank.first_violation(f)
