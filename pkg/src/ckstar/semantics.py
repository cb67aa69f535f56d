"""Satisfaction over finite models.

Extensions are computed bottom-up per subformula as world bitmasks, which
makes truth persistence and validity checks set operations.  `satisfies_alt`
differs from `satisfies` only in the master-box clause and exists for
differential testing of the equivalence between the two readings.
"""

from __future__ import annotations

from .relmodel import (
    BiModel,
    ModelViolation,
    PdlModel,
    Relation,
    rel_compose,
    rel_star,
    validate,
)
from .syntax import (
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
    subformulas,
)


class InvalidModelError(ValueError):
    def __init__(self, violations: list[ModelViolation]):
        super().__init__(f"model violates {violations[0].condition} "
                         f"(and {len(violations) - 1} more)" if len(violations) > 1
                         else f"model violates {violations[0].condition}")
        self.violations = violations


class UnknownProgramAtomError(ValueError):
    pass


def _subset_rows(rows: tuple[int, ...], target: int, n: int) -> int:
    out = 0
    for w in range(n):
        if rows[w] & ~target == 0:
            out |= 1 << w
    return out


def _nonempty_meet(rows: tuple[int, ...], target: int, n: int) -> int:
    out = 0
    for w in range(n):
        if rows[w] & target:
            out |= 1 << w
    return out


def extension(m: BiModel, f: Formula, *, alt_boxstar: bool = False) -> int:
    """Bitmask of worlds satisfying f, computed per subformula."""
    n = m.worlds
    bot = 0
    for w in m.bot:
        bot |= 1 << w
    pre = m.pre.rows
    cache: dict[str, Relation] = {}

    def rows_for(key: str) -> tuple[int, ...]:
        if key not in cache:
            if key == "pre_mod":
                cache[key] = rel_compose(m.pre, m.mod)
            elif key == "mod_star":
                cache[key] = rel_star(m.mod)
            elif key == "box_star":
                if alt_boxstar:
                    cache[key] = rel_star(rel_compose(m.pre, rows_rel("mod_star")))
                else:
                    cache[key] = rel_star(rows_rel("pre_mod"))
            else:
                raise KeyError(key)
        return cache[key].rows

    def rows_rel(key: str) -> Relation:
        rows_for(key)
        return cache[key]

    ext: dict[Formula, int] = {}
    for g in subformulas(f):
        if isinstance(g, Bot):
            e = bot
        elif isinstance(g, Atom):
            e = m.val_mask(g.name)
        elif isinstance(g, And):
            e = ext[g.left] & ext[g.right]
        elif isinstance(g, Or):
            e = ext[g.left] | ext[g.right]
        elif isinstance(g, Imp):
            bad = ext[g.left] & ~ext[g.right]
            e = _subset_rows(pre, ~bad, n)
        elif isinstance(g, Box):
            e = _subset_rows(rows_for("pre_mod"), ext[g.body], n)
        elif isinstance(g, BoxStar):
            e = _subset_rows(rows_for("box_star"), ext[g.body], n)
        elif isinstance(g, Dia):
            good = _nonempty_meet(m.mod.rows, ext[g.body], n)
            e = _subset_rows(pre, good, n)
        elif isinstance(g, DiaStar):
            # The clause takes a single intuitionistic step, then R*.
            good = _nonempty_meet(rows_for("mod_star"), ext[g.body], n)
            e = _subset_rows(pre, good, n)
        else:
            raise TypeError(f"not a constructive formula: {type(g).__name__}")
        ext[g] = e
    return ext[f]


def _check_bimodel(m: BiModel, w: int) -> None:
    violations = validate(m, "ck")
    if violations:
        raise InvalidModelError(violations)
    if not 0 <= w < m.worlds:
        raise IndexError(f"world {w} out of range for {m.worlds} worlds")


def satisfies(m: BiModel, w: int, f: Formula) -> bool:
    _check_bimodel(m, w)
    return bool(extension(m, f) >> w & 1)


def satisfies_alt(m: BiModel, w: int, f: Formula) -> bool:
    """Master-box read over the coarser iterated relation; agrees with
    `satisfies` on every valid model."""
    _check_bimodel(m, w)
    return bool(extension(m, f, alt_boxstar=True) >> w & 1)


def program_relation(m: PdlModel, p: Program,
                     memo: "dict[Program, Relation] | None" = None) -> Relation:
    """rho extended homomorphically to compound programs."""
    if memo is None:
        memo = {}
    if p in memo:
        return memo[p]
    if isinstance(p, PAtom):
        try:
            r = m.rho[p.name]
        except KeyError:
            raise UnknownProgramAtomError(
                f"model does not interpret program atom {p.name!r}") from None
    elif isinstance(p, Comp):
        r = rel_compose(program_relation(m, p.left, memo),
                        program_relation(m, p.right, memo))
    elif isinstance(p, Star):
        r = rel_star(program_relation(m, p.body, memo))
    else:
        raise TypeError(f"unknown program node {type(p).__name__}")
    memo[p] = r
    return r


def pdl_extension(m: PdlModel, f: PdlFormula) -> int:
    n = m.worlds
    full = m.full_mask()
    memo: dict[Program, Relation] = {}
    ext: dict[PdlFormula, int] = {}
    for g in subformulas(f):
        if isinstance(g, PdlAtom):
            e = m.val_mask(g.name)
        elif isinstance(g, Neg):
            e = full & ~ext[g.body]
        elif isinstance(g, PdlAnd):
            e = ext[g.left] & ext[g.right]
        elif isinstance(g, PdlOr):
            e = ext[g.left] | ext[g.right]
        elif isinstance(g, BoxP):
            rel = program_relation(m, g.prog, memo)
            e = _subset_rows(rel.rows, ext[g.body], n)
        else:
            raise TypeError(f"not a PDL formula: {type(g).__name__}")
        ext[g] = e
    return ext[f]


def pdl_satisfies(m: PdlModel, w: int, f: PdlFormula) -> bool:
    if not 0 <= w < m.worlds:
        raise IndexError(f"world {w} out of range for {m.worlds} worlds")
    return bool(pdl_extension(m, f) >> w & 1)


def valid_in_model(m, f) -> bool:
    """True iff f holds at every world of m."""
    return falsifying_world(m, f) is None


def falsifying_world(m, f) -> "int | None":
    """Least world where f fails, or None if f is valid in m."""
    if isinstance(m, PdlModel):
        e = pdl_extension(m, f)
    else:
        violations = validate(m, "ck")
        if violations:
            raise InvalidModelError(violations)
        e = extension(m, f)
    missing = m.full_mask() & ~e
    if missing == 0:
        return None
    return (missing & -missing).bit_length() - 1
