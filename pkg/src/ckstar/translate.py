"""Formula translations between the logics and the matching model moves.

Four formula maps: `omega` eliminates falsum into the infallible language,
`tau` is the Gödel-Tarski map into test-free PDL, `iota` embeds the
classical single-program fragment into the diamond-free constructive
language, and `kappa` reads transitive-logic modalities as master
modalities.  Each model construction here is the companion of one of the
truth-preservation facts exercised in the test suite.
"""

from __future__ import annotations

from dataclasses import dataclass

from .relmodel import (
    BiModel,
    PdlModel,
    Relation,
    mask_of,
    rel_compose,
    rel_star,
    validate,
    worlds_of,
)
from .semantics import InvalidModelError, extension
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
    FragmentError,
    FragmentTag,
    Imp,
    Neg,
    Or,
    PAtom,
    PdlAnd,
    PdlAtom,
    PdlFormula,
    PdlOr,
    P_BOT,
    Star,
    check_fragment,
    subformulas,
    variables,
)


class TranslationError(ValueError):
    pass


_I = PAtom("i")
_M = PAtom("m")
_I_STAR = Star(_I)


@dataclass(frozen=True)
class TranslationEnv:
    """Atom universe for falsum elimination; p_bot is always last."""

    atoms: tuple[str, ...]
    fresh: str = P_BOT

    @staticmethod
    def for_formula(f: Formula) -> "TranslationEnv":
        return TranslationEnv(tuple(variables(f)) + (P_BOT,))


def _conjunction(atoms: tuple[str, ...]) -> Formula:
    out: Formula = Atom(atoms[-1])
    for name in reversed(atoms[:-1]):
        out = And(Atom(name), out)
    return out


def omega(f: Formula, env: "TranslationEnv | None" = None) -> Formula:
    """Replace every falsum leaf by the master-boxed full conjunction plus a
    seriality witness; identity elsewhere."""
    if env is None:
        env = TranslationEnv.for_formula(f)
    if P_BOT in variables(f):
        raise TranslationError(f"{P_BOT!r} must not occur in the input formula")
    missing = set(variables(f)) - set(env.atoms)
    if missing or env.fresh not in env.atoms:
        raise TranslationError("environment does not cover the formula's atoms")
    ordered = tuple(sorted(a for a in env.atoms if a != env.fresh)) + (env.fresh,)
    replacement = BoxStar(And(_conjunction(ordered), Dia(Atom(env.fresh))))

    def walk(g: Formula) -> Formula:
        if isinstance(g, Bot):
            return replacement
        if isinstance(g, Atom):
            return g
        if isinstance(g, And):
            return And(walk(g.left), walk(g.right))
        if isinstance(g, Or):
            return Or(walk(g.left), walk(g.right))
        if isinstance(g, Imp):
            return Imp(walk(g.left), walk(g.right))
        if isinstance(g, Box):
            return Box(walk(g.body))
        if isinstance(g, Dia):
            return Dia(walk(g.body))
        if isinstance(g, BoxStar):
            return BoxStar(walk(g.body))
        if isinstance(g, DiaStar):
            return DiaStar(walk(g.body))
        raise TypeError(f"unknown formula node {type(g).__name__}")

    return walk(f)


def tau(f: Formula) -> PdlFormula:
    """Gödel-Tarski translation into test-free PDL over programs i and m."""
    if isinstance(f, Bot):
        return PdlAnd(PdlAtom(P_BOT), Neg(PdlAtom(P_BOT)))
    if isinstance(f, Atom):
        return BoxP(_I_STAR, PdlAtom(f.name))
    if isinstance(f, And):
        return PdlAnd(tau(f.left), tau(f.right))
    if isinstance(f, Or):
        return PdlOr(tau(f.left), tau(f.right))
    if isinstance(f, Imp):
        return BoxP(_I_STAR, PdlOr(Neg(tau(f.left)), tau(f.right)))
    if isinstance(f, Box):
        return BoxP(Comp(_I_STAR, _M), tau(f.body))
    if isinstance(f, BoxStar):
        return BoxP(Star(Comp(_I_STAR, _M)), tau(f.body))
    if isinstance(f, Dia):
        return BoxP(_I_STAR, Neg(BoxP(_M, Neg(tau(f.body)))))
    if isinstance(f, DiaStar):
        return BoxP(_I_STAR, Neg(BoxP(Star(_M), Neg(tau(f.body)))))
    raise TypeError(f"unknown formula node {type(f).__name__}")


def kstar_to_lstar(f: PdlFormula) -> Formula:
    """Read a single-program classical formula in the diamond-free
    constructive language: [a] becomes box, [a*] the master box, and
    negation becomes implication into falsum."""
    if isinstance(f, PdlAtom):
        return Atom(f.name)
    if isinstance(f, Neg):
        return Imp(kstar_to_lstar(f.body), Bot())
    if isinstance(f, PdlAnd):
        return And(kstar_to_lstar(f.left), kstar_to_lstar(f.right))
    if isinstance(f, PdlOr):
        return Or(kstar_to_lstar(f.left), kstar_to_lstar(f.right))
    if isinstance(f, BoxP):
        if f.prog == PAtom("a"):
            return Box(kstar_to_lstar(f.body))
        if f.prog == Star(PAtom("a")):
            return BoxStar(kstar_to_lstar(f.body))
        raise FragmentError("program outside the single-program fragment")
    raise TypeError(f"unknown PDL node {type(f).__name__}")


def iota_antecedent(f: PdlFormula) -> Formula:
    """Excluded middle, master-boxed, for every subformula of f (read
    constructively), in deterministic subformula order."""
    conjuncts = []
    for sub in subformulas(f):
        mapped = kstar_to_lstar(sub)
        conjuncts.append(Or(mapped, Imp(mapped, Bot())))
    out = conjuncts[-1]
    for c in reversed(conjuncts[:-1]):
        out = And(c, out)
    return BoxStar(out)


def iota(f: PdlFormula) -> Formula:
    """Embed the classical single-program fragment into the diamond-free
    constructive language."""
    if not check_fragment(f, FragmentTag.LK_STAR):
        raise FragmentError("formula is not in the single-program fragment")
    return Imp(iota_antecedent(f), kstar_to_lstar(f))


def kappa(f: Formula) -> Formula:
    """Replace each box by the master box and each diamond by the master
    diamond."""
    if not check_fragment(f, FragmentTag.L):
        raise FragmentError("formula is not in the iteration-free fragment")

    def walk(g: Formula) -> Formula:
        if isinstance(g, (Bot, Atom)):
            return g
        if isinstance(g, And):
            return And(walk(g.left), walk(g.right))
        if isinstance(g, Or):
            return Or(walk(g.left), walk(g.right))
        if isinstance(g, Imp):
            return Imp(walk(g.left), walk(g.right))
        if isinstance(g, Box):
            return BoxStar(walk(g.body))
        if isinstance(g, Dia):
            return DiaStar(walk(g.body))
        raise TypeError(f"unknown formula node {type(g).__name__}")

    return walk(f)


# ---------------------------------------------------------------------------
# Model constructions


def _validated(m: BiModel, kind: str) -> None:
    violations = validate(m, kind)
    if violations:
        raise InvalidModelError(violations)


def ck_model_to_wk(m: BiModel) -> BiModel:
    """Same frame; p_bot takes over the fallible set, which empties."""
    _validated(m, "ck")
    val = dict(m.val)
    val[P_BOT] = frozenset(m.bot)
    return BiModel(m.worlds, m.pre, m.mod, val, frozenset(), "wk")


def wk_model_to_ck(m: BiModel, f: Formula) -> BiModel:
    """Fallible companion: worlds where the falsum image of f's environment
    holds become the new fallible set; only f's own atoms keep their
    valuation, everything else defaults to that set."""
    _validated(m, "wk")
    env = TranslationEnv.for_formula(f)
    bot_mask = extension(m, omega(Bot(), env))
    val = {name: m.val.get(name, frozenset()) for name in variables(f)}
    return BiModel(m.worlds, m.pre, m.mod, val,
                   frozenset(worlds_of(bot_mask)), "ck")


def wk_model_to_pdl(m: BiModel) -> PdlModel:
    """Interpret the preorder as program i and the modal relation as m."""
    _validated(m, "wk")
    return PdlModel(m.worlds, {"i": m.pre, "m": m.mod}, dict(m.val))


def pdl_model_to_wk(m: PdlModel) -> BiModel:
    """Preorder is the starred i-relation; an atom holds where it holds
    along every i*-path."""
    for name in ("i", "m"):
        if name not in m.rho:
            raise TranslationError(f"model does not interpret program atom {name!r}")
    pre = rel_star(m.rho["i"])
    val = {}
    for name, ws in m.val.items():
        target = mask_of(ws)
        val[name] = frozenset(w for w in range(m.worlds)
                              if pre.rows[w] & ~target == 0)
    return BiModel(m.worlds, pre, m.rho["m"], val, frozenset(), "wk")


def k_model_to_ck(m: PdlModel) -> BiModel:
    """Classical model as a constructive one over the identity preorder."""
    if "a" not in m.rho:
        raise TranslationError("model does not interpret program atom 'a'")
    return BiModel(m.worlds, Relation.identity(m.worlds), m.rho["a"],
                   dict(m.val), frozenset(), "ck")


def wk_generated_classical(
    m: BiModel, f: PdlFormula
) -> tuple[BiModel, PdlModel, frozenset[int]]:
    """Submodel generated by the worlds forcing excluded middle for f's
    subformulas, paired with its classical companion over the composed
    relation.  Returns (submodel, classical model, generating set), all in
    the submodel's indexing."""
    _validated(m, "wk")
    if not check_fragment(f, FragmentTag.LK_STAR):
        raise FragmentError("formula is not in the single-program fragment")
    u_mask = extension(m, iota_antecedent(f))
    generated = m.pre.union(m.mod).forward_closure(u_mask)
    keep = worlds_of(generated)
    idx = {w: i for i, w in enumerate(keep)}
    val = {name: frozenset(idx[w] for w in ws if w in idx)
           for name, ws in m.val.items()}
    sub = BiModel(len(keep), m.pre.restrict(keep), m.mod.restrict(keep),
                  val, frozenset(), "wk")
    classical = PdlModel(len(keep),
                         {"a": rel_compose(m.pre, m.mod).restrict(keep)},
                         val)
    u_new = frozenset(idx[w] for w in worlds_of(u_mask))
    return sub, classical, u_new


def ck_model_to_cs4(m: BiModel) -> tuple[BiModel, tuple[tuple[int, int], ...]]:
    """Duplicate every world; index-1 copies get the iterated accessibility,
    making the frame confluent.  Returns the model and the projection
    array mapping new worlds to (old world, copy index)."""
    _validated(m, "ck")
    n = m.worlds
    n2 = 2 * n
    mod_star = rel_star(m.mod)
    iter_star = rel_star(rel_compose(m.pre, mod_star))

    def spread(mask: int) -> int:
        out = 0
        for v in worlds_of(mask):
            out |= 0b11 << (2 * v)
        return out

    pre_rows = []
    mod_rows = []
    for w in range(n):
        both = spread(m.pre.rows[w])
        pre_rows.append(both)
        pre_rows.append(both)
        mod_rows.append(mask_of(2 * v for v in worlds_of(mod_star.rows[w])))
        mod_rows.append(spread(iter_star.rows[w]))
    val = {name: frozenset(2 * w + i for w in ws for i in (0, 1))
           for name, ws in m.val.items()}
    bot = frozenset(2 * w + i for w in m.bot for i in (0, 1))
    kind = "ws4" if not bot else "cs4"
    model = BiModel(n2, Relation(n2, tuple(pre_rows)), Relation(n2, tuple(mod_rows)),
                    val, bot, kind)
    pi = tuple((w, i) for w in range(n) for i in (0, 1))
    return model, pi
