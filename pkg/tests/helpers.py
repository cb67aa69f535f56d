"""Shared test utilities: seeded AST generators and a naive evaluator.

The naive evaluator follows the satisfaction clauses literally with
world-by-world recursion and explicit path search, so it is independent of
the extension-set implementation it cross-checks.
"""

from __future__ import annotations

import random

from ckstar.syntax import (
    Atom,
    And,
    Bot,
    Box,
    BoxP,
    BoxStar,
    Comp,
    Dia,
    DiaStar,
    Formula,
    Imp,
    Neg,
    Or,
    PAtom,
    PdlAnd,
    PdlAtom,
    PdlFormula,
    PdlOr,
    Program,
    Star,
)


def random_lstar(rng: random.Random, depth: int, atoms=("p", "q")) -> Formula:
    leaves = [Bot()] + [Atom(a) for a in atoms]
    if depth <= 0:
        return rng.choice(leaves)
    kind = rng.randrange(10)
    if kind == 0:
        return rng.choice(leaves)
    if kind == 1:
        return And(random_lstar(rng, depth - 1, atoms), random_lstar(rng, depth - 1, atoms))
    if kind == 2:
        return Or(random_lstar(rng, depth - 1, atoms), random_lstar(rng, depth - 1, atoms))
    if kind == 3:
        return Imp(random_lstar(rng, depth - 1, atoms), random_lstar(rng, depth - 1, atoms))
    if kind == 4:
        return Box(random_lstar(rng, depth - 1, atoms))
    if kind == 5:
        return Dia(random_lstar(rng, depth - 1, atoms))
    if kind == 6:
        return BoxStar(random_lstar(rng, depth - 1, atoms))
    if kind == 7:
        return DiaStar(random_lstar(rng, depth - 1, atoms))
    return rng.choice(leaves)


def random_program(rng: random.Random, depth: int, atoms=("i", "m", "a")) -> Program:
    if depth <= 0 or rng.random() < 0.4:
        return PAtom(rng.choice(atoms))
    if rng.random() < 0.5:
        return Comp(random_program(rng, depth - 1, atoms), random_program(rng, depth - 1, atoms))
    return Star(random_program(rng, depth - 1, atoms))


def random_lkstar(rng: random.Random, depth: int, atoms=("p", "q")) -> PdlFormula:
    """Classical formulas whose only programs are a and a*."""
    if depth <= 0:
        return PdlAtom(rng.choice(atoms))
    kind = rng.randrange(7)
    if kind == 0:
        return PdlAtom(rng.choice(atoms))
    if kind == 1:
        return Neg(random_lkstar(rng, depth - 1, atoms))
    if kind == 2:
        return PdlAnd(random_lkstar(rng, depth - 1, atoms), random_lkstar(rng, depth - 1, atoms))
    if kind == 3:
        return PdlOr(random_lkstar(rng, depth - 1, atoms), random_lkstar(rng, depth - 1, atoms))
    if kind == 4:
        return BoxP(PAtom("a"), random_lkstar(rng, depth - 1, atoms))
    return BoxP(Star(PAtom("a")), random_lkstar(rng, depth - 1, atoms))


def random_pdl(rng: random.Random, depth: int, atoms=("p", "q"), prog_atoms=("i", "m", "a")) -> PdlFormula:
    if depth <= 0:
        return PdlAtom(rng.choice(atoms))
    kind = rng.randrange(6)
    if kind == 0:
        return PdlAtom(rng.choice(atoms))
    if kind == 1:
        return Neg(random_pdl(rng, depth - 1, atoms, prog_atoms))
    if kind == 2:
        return PdlAnd(random_pdl(rng, depth - 1, atoms, prog_atoms), random_pdl(rng, depth - 1, atoms, prog_atoms))
    if kind == 3:
        return PdlOr(random_pdl(rng, depth - 1, atoms, prog_atoms), random_pdl(rng, depth - 1, atoms, prog_atoms))
    return BoxP(random_program(rng, 2, prog_atoms), random_pdl(rng, depth - 1, atoms, prog_atoms))


def rand_ck_model(rng: random.Random, max_worlds: int = 4, atoms=("p", "q"),
                  fallible: bool = True):
    """Random validated CK model (WK when fallible=False)."""
    from ckstar.relmodel import BiModel, Relation, mask_of, rel_star, validate

    n = rng.randrange(1, max_worlds + 1)
    pre = rel_star(Relation.from_pairs(
        n, [(w, v) for w in range(n) for v in range(n) if rng.random() < 0.3]))
    mod = Relation.from_pairs(
        n, [(w, v) for w in range(n) for v in range(n) if rng.random() < 0.3])
    bot = 0
    if fallible:
        bot = mask_of(w for w in range(n) if rng.random() < 0.2)
        bot = pre.union(mod).forward_closure(bot)
        rows = list(mod.rows)
        for w in range(n):
            if bot >> w & 1 and rows[w] == 0:
                rows[w] |= 1 << w
        mod = Relation(n, tuple(rows))
        bot = pre.union(mod).forward_closure(bot)
    val = {}
    for a in atoms:
        base = bot | mask_of(w for w in range(n) if rng.random() < 0.4)
        closed = base
        for w in range(n):
            if base >> w & 1:
                closed |= pre.rows[w]
        val[a] = frozenset(w for w in range(n) if closed >> w & 1)
    kind = "ck" if bot else "wk"
    m = BiModel(n, pre, mod, val,
                frozenset(w for w in range(n) if bot >> w & 1), kind)
    assert validate(m, kind) == []
    return m


def rand_pdl_model(rng: random.Random, max_worlds: int = 4,
                   prog_atoms=("i", "m"), atoms=("p", "q")):
    from ckstar.relmodel import Relation, PdlModel

    n = rng.randrange(1, max_worlds + 1)
    rho = {a: Relation.from_pairs(
        n, [(w, v) for w in range(n) for v in range(n) if rng.random() < 0.3])
        for a in prog_atoms}
    val = {a: frozenset(w for w in range(n) if rng.random() < 0.4) for a in atoms}
    return PdlModel(n, rho, val)


def naive_satisfies(m, w: int, f: Formula) -> bool:
    """Direct recursive reading of the satisfaction clauses."""
    pre = set(m.pre.pairs())
    mod = set(m.mod.pairs())
    n = m.worlds

    def star(rel):
        reach = {v: {v} for v in range(n)}
        changed = True
        while changed:
            changed = False
            for (x, y) in rel:
                for s in reach.values():
                    if x in s and y not in s:
                        s.add(y)
                        changed = True
        return {(x, y) for x, s in reach.items() for y in s}

    pre_r = {(x, y) for x in range(n) for y in range(n) if (x, y) in pre}
    comp = {(x, z) for (x, y) in pre_r for (y2, z) in mod if y == y2}
    comp_star = star(comp)
    mod_star = star(mod)

    def val(name):
        if name in m.val:
            return set(m.val[name])
        return set(m.bot)

    def sat(v, g) -> bool:
        if isinstance(g, Bot):
            return v in m.bot
        if isinstance(g, Atom):
            return v in val(g.name)
        if isinstance(g, And):
            return sat(v, g.left) and sat(v, g.right)
        if isinstance(g, Or):
            return sat(v, g.left) or sat(v, g.right)
        if isinstance(g, Imp):
            return all(not sat(u, g.left) or sat(u, g.right)
                       for u in range(n) if (v, u) in pre)
        if isinstance(g, Box):
            return all(sat(u, g.body) for u in range(n) if (v, u) in comp)
        if isinstance(g, Dia):
            return all(any((u, t) in mod and sat(t, g.body) for t in range(n))
                       for u in range(n) if (v, u) in pre)
        if isinstance(g, BoxStar):
            return all(sat(u, g.body) for u in range(n) if (v, u) in comp_star)
        if isinstance(g, DiaStar):
            return all(any((u, t) in mod_star and sat(t, g.body) for t in range(n))
                       for u in range(n) if (v, u) in pre)
        raise TypeError(g)

    return sat(w, f)
