"""Brute-force ground truth: exhaustive small-model search and seeded
random generators for property testing.

`enumerate_models` streams every validated model of a class up to a world
bound, in a fixed deterministic order.  `brute_force_decide` scans that
stream with the extension evaluator.  `ModelBank` packs the same stream
(same order) into numpy arrays so the acceptance suite can scan thousands
of formulas against a million-model universe in bounded time; a dedicated
test pins the bank's verdicts to the reference scan.
"""

from __future__ import annotations

import itertools
import random
from array import array
from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .relmodel import BiModel, PdlModel, Relation, mask_of, validate, worlds_of
from .semantics import extension, pdl_extension
from .syntax import (
    Atom,
    And,
    Bot,
    Box,
    BoxP,
    BoxStar,
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
    Star,
    check_fragment,
    variables,
)
from .translate import ck_model_to_cs4

ENUM_KINDS = ("ck", "wk", "cs4", "ws4")
MAX_ENUM_WORLDS = 4


@dataclass(frozen=True)
class EnumSpec:
    max_worlds: int
    atoms: tuple[str, ...] = ()
    kind: str = "ck"
    allow_large: bool = False

    def __post_init__(self):
        if self.kind not in ENUM_KINDS:
            raise ValueError(f"unknown model kind {self.kind!r}")
        if self.max_worlds > MAX_ENUM_WORLDS and not self.allow_large:
            raise ValueError(
                f"max_worlds {self.max_worlds} exceeds the enumeration guard "
                f"of {MAX_ENUM_WORLDS}; set allow_large to override")


def _preorders(n: int) -> Iterator[tuple[int, ...]]:
    """All preorders on n worlds as row tuples, ascending in the
    off-diagonal bit pattern."""
    cells = [(w, v) for w in range(n) for v in range(n) if w != v]
    for bits in range(1 << len(cells)):
        rows = [1 << w for w in range(n)]
        for i, (w, v) in enumerate(cells):
            if bits >> i & 1:
                rows[w] |= 1 << v
        ok = True
        for w in range(n):
            reach = 0
            row = rows[w]
            for v in range(n):
                if row >> v & 1:
                    reach |= rows[v]
            if reach & ~row:
                ok = False
                break
        if ok:
            yield tuple(rows)


def _relations(n: int) -> Iterator[tuple[int, ...]]:
    full = (1 << n) - 1
    for bits in range(1 << (n * n)):
        yield tuple(bits >> (n * w) & full for w in range(n))


def _is_closed(rows_pre, rows_mod, bot: int, n: int) -> bool:
    for w in range(n):
        if bot >> w & 1 and (rows_pre[w] | rows_mod[w]) & ~bot:
            return False
    return True


def _is_serial_at(rows_mod, bot: int, n: int) -> bool:
    return all(rows_mod[w] != 0 for w in range(n) if bot >> w & 1)


def _upsets(rows_pre, n: int, superset_of: int) -> list[int]:
    out = []
    for mask in range(1 << n):
        if mask & superset_of != superset_of:
            continue
        if all(not (mask >> w & 1) or rows_pre[w] & ~mask == 0 for w in range(n)):
            out.append(mask)
    return out


def _confluent(rows_pre, rows_mod, n: int) -> bool:
    for w in range(n):
        for v in worlds_of(rows_mod[w]):
            for vp in worlds_of(rows_pre[v]):
                if not any(rows_mod[wp] >> vp & 1 for wp in worlds_of(rows_pre[w])):
                    return False
    return True


def _enumerate_raw(spec: EnumSpec) -> Iterator[tuple]:
    """(n, pre_rows, mod_rows, bot_mask, val_masks) in deterministic order."""
    infallible = spec.kind in ("wk", "ws4")
    preorder_mod = spec.kind in ("cs4", "ws4")
    for n in range(1, spec.max_worlds + 1):
        for pre in _preorders(n):
            upsets_all = _upsets(pre, n, 0)
            mods = _preorders(n) if preorder_mod else _relations(n)
            for mod in mods:
                if preorder_mod and not _confluent(pre, mod, n):
                    continue
                if infallible:
                    bots: list[int] = [0]
                else:
                    bots = [b for b in range(1 << n)
                            if _is_closed(pre, mod, b, n)
                            and _is_serial_at(mod, b, n)]
                for bot in bots:
                    choices = (upsets_all if bot == 0
                               else [u for u in upsets_all if u & bot == bot])
                    for vals in itertools.product(choices, repeat=len(spec.atoms)):
                        yield n, pre, mod, bot, vals


def enumerate_models(spec: EnumSpec) -> Iterator[BiModel]:
    """Every validated model of the class with at most max_worlds worlds,
    valuations over spec.atoms, no isomorphism reduction."""
    kind = spec.kind
    for n, pre, mod, bot, vals in _enumerate_raw(spec):
        val = {a: frozenset(worlds_of(vals[i])) for i, a in enumerate(spec.atoms)}
        yield BiModel(n, Relation(n, pre), Relation(n, mod), val,
                      frozenset(worlds_of(bot)), kind)


def enumerate_pdl_models(max_worlds: int, prog_atoms: tuple[str, ...],
                         atoms: tuple[str, ...]) -> Iterator[PdlModel]:
    """All classical models up to the bound; relations unconstrained."""
    if max_worlds > MAX_ENUM_WORLDS:
        raise ValueError("bound exceeds the enumeration guard")
    for n in range(1, max_worlds + 1):
        rel_list = list(_relations(n))
        for rels in itertools.product(rel_list, repeat=len(prog_atoms)):
            rho = {a: Relation(n, rels[i]) for i, a in enumerate(prog_atoms)}
            for vals in itertools.product(range(1 << n), repeat=len(atoms)):
                val = {a: frozenset(worlds_of(vals[i])) for i, a in enumerate(atoms)}
                yield PdlModel(n, rho, val)


# ---------------------------------------------------------------------------
# Bounded decisions


@dataclass
class BoundedVerdict:
    valid_up_to_bound: bool
    max_worlds: int
    model: "BiModel | PdlModel | None" = None
    world: "int | None" = None


_LOGIC_TO_KIND = {
    "ck_star": "ck",
    "wk_star": "wk",
    "ck_star_box": "ck",
    "cs4": "cs4",
    "ws4": "ws4",
}

_LOGIC_FRAGMENT = {
    "ck_star": FragmentTag.LSTAR,
    "wk_star": FragmentTag.LSTAR,
    "ck_star_box": FragmentTag.LSTAR_BOX,
    "cs4": FragmentTag.L,
    "ws4": FragmentTag.L,
}


def brute_force_decide(logic: str, f, spec: EnumSpec) -> BoundedVerdict:
    """First falsifying (model, world) in enumeration order, or validity up
    to the bound.  The model class is the one matching the logic, not the
    one named in `spec`."""
    if logic in ("k_star", "pdl"):
        if logic == "k_star" and not check_fragment(f, FragmentTag.LK_STAR):
            raise FragmentError("formula is not in the single-program fragment")
        if not isinstance(f, PdlFormula):
            raise FragmentError(f"logic {logic} expects a PDL formula")
        prog_atoms = ("a",) if logic == "k_star" else ("i", "m", "a")
        for m in enumerate_pdl_models(spec.max_worlds, prog_atoms,
                                      tuple(variables(f))):
            ext = pdl_extension(m, f)
            if ext != m.full_mask():
                missing = m.full_mask() & ~ext
                return BoundedVerdict(False, spec.max_worlds, m,
                                      (missing & -missing).bit_length() - 1)
        return BoundedVerdict(True, spec.max_worlds)
    if logic not in _LOGIC_TO_KIND:
        raise ValueError(f"unknown logic {logic!r}")
    if not check_fragment(f, _LOGIC_FRAGMENT[logic]):
        raise FragmentError(f"formula is outside the fragment of {logic}")
    if not set(variables(f)) <= set(spec.atoms):
        raise ValueError("spec.atoms must cover the formula's atoms")
    scan = EnumSpec(spec.max_worlds, spec.atoms, _LOGIC_TO_KIND[logic],
                    spec.allow_large)
    for m in enumerate_models(scan):
        ext = extension(m, f)
        if ext != m.full_mask():
            missing = m.full_mask() & ~ext
            return BoundedVerdict(False, spec.max_worlds, m,
                                  (missing & -missing).bit_length() - 1)
    return BoundedVerdict(True, spec.max_worlds)


# ---------------------------------------------------------------------------
# Random generators (repair-based; deterministic from the seed)


def random_model(seed: int, spec: EnumSpec) -> BiModel:
    rng = random.Random(seed)
    kind = spec.kind
    if kind in ("cs4", "ws4"):
        base_spec = EnumSpec(max(1, spec.max_worlds // 2), spec.atoms,
                             "ck" if kind == "cs4" else "wk", spec.allow_large)
        base = _random_ck(rng, base_spec)
        doubled, _ = ck_model_to_cs4(base)
        return doubled
    return _random_ck(rng, spec)


def _random_ck(rng: random.Random, spec: EnumSpec) -> BiModel:
    from .relmodel import rel_star

    n = rng.randint(1, spec.max_worlds)
    density = 0.35
    pre = rel_star(Relation.from_pairs(
        n, [(w, v) for w in range(n) for v in range(n) if rng.random() < density]))
    mod_pairs = [(w, v) for w in range(n) for v in range(n)
                 if rng.random() < density]
    mod = Relation.from_pairs(n, mod_pairs)
    bot = 0
    if spec.kind == "ck":
        bot = mask_of(w for w in range(n) if rng.random() < 0.25)
        bot = pre.union(mod).forward_closure(bot)
        rows = list(mod.rows)
        for w in range(n):
            if bot >> w & 1 and rows[w] == 0:
                rows[w] |= 1 << w  # patch falsum seriality
        mod = Relation(n, tuple(rows))
        bot = pre.union(mod).forward_closure(bot)
    val = {}
    for a in spec.atoms:
        base = bot | mask_of(w for w in range(n) if rng.random() < 0.45)
        closed = base
        for w in range(n):
            if base >> w & 1:
                closed |= pre.rows[w]
        val[a] = frozenset(worlds_of(closed))
    m = BiModel(n, pre, mod, val, frozenset(worlds_of(bot)), spec.kind)
    assert validate(m, spec.kind) == []
    return m


def random_pdl_model(seed: int, max_worlds: int,
                     prog_atoms: tuple[str, ...] = ("i", "m"),
                     atoms: tuple[str, ...] = ("p", "q")) -> PdlModel:
    rng = random.Random(seed)
    n = rng.randint(1, max_worlds)
    rho = {a: Relation.from_pairs(
        n, [(w, v) for w in range(n) for v in range(n) if rng.random() < 0.35])
        for a in prog_atoms}
    val = {a: frozenset(w for w in range(n) if rng.random() < 0.45)
           for a in atoms}
    return PdlModel(n, rho, val)


_UNARY = {
    FragmentTag.LSTAR: (Box, Dia, BoxStar, DiaStar),
    FragmentTag.LSTAR_BOX: (Box, BoxStar),
    FragmentTag.L: (Box, Dia),
}
_BINARY = (And, Or, Imp)


def random_formula(seed: int, depth: int, atoms: tuple[str, ...],
                   fragment: FragmentTag = FragmentTag.LSTAR):
    """Uniform over the fragment's constructors down to the depth bound."""
    rng = random.Random(seed)

    def leaf():
        picks = [Bot()] + [Atom(a) for a in atoms]
        return rng.choice(picks)

    def go(d: int):
        if d <= 0:
            return leaf()
        ops = ["leaf"] + list(_UNARY[fragment]) + list(_BINARY)
        op = rng.choice(ops)
        if op == "leaf":
            return leaf()
        if op in _BINARY:
            return op(go(d - 1), go(d - 1))
        return op(go(d - 1))

    def go_k(d: int):
        if d <= 0:
            return PdlAtom(rng.choice(atoms))
        ops = ["leaf", "neg", "and", "or", "box", "boxstar"]
        op = rng.choice(ops)
        if op == "leaf":
            return PdlAtom(rng.choice(atoms))
        if op == "neg":
            return Neg(go_k(d - 1))
        if op == "and":
            return PdlAnd(go_k(d - 1), go_k(d - 1))
        if op == "or":
            return PdlOr(go_k(d - 1), go_k(d - 1))
        if op == "box":
            return BoxP(PAtom("a"), go_k(d - 1))
        return BoxP(Star(PAtom("a")), go_k(d - 1))

    if fragment is FragmentTag.LK_STAR:
        return go_k(depth)
    return go(depth)


# ---------------------------------------------------------------------------
# Exhaustive formula corpus


def enumerate_formulas(max_size: int, atoms: tuple[str, ...],
                       fragment: FragmentTag = FragmentTag.LSTAR) -> list:
    """Every formula of the fragment with at most max_size AST nodes, in
    deterministic size-then-structure order."""
    if fragment is FragmentTag.LK_STAR:
        return _enumerate_kstar(max_size, atoms)
    unary = _UNARY[fragment]
    by_size: dict[int, list[Formula]] = {1: [Bot()] + [Atom(a) for a in atoms]}
    for s in range(2, max_size + 1):
        layer: list[Formula] = []
        for op in unary:
            layer.extend(op(f) for f in by_size[s - 1])
        for op in _BINARY:
            for i in range(1, s - 1):
                for left in by_size[i]:
                    for right in by_size[s - 1 - i]:
                        layer.append(op(left, right))
        by_size[s] = layer
    out: list[Formula] = []
    for s in range(1, max_size + 1):
        out.extend(by_size[s])
    return out


def _enumerate_kstar(max_size: int, atoms: tuple[str, ...]) -> list:
    box_a, box_star = PAtom("a"), Star(PAtom("a"))
    by_size: dict[int, list[PdlFormula]] = {1: [PdlAtom(a) for a in atoms]}
    for s in range(2, max_size + 1):
        layer: list[PdlFormula] = []
        layer.extend(Neg(f) for f in by_size.get(s - 1, []))
        layer.extend(BoxP(box_a, f) for f in by_size.get(s - 2, []))
        layer.extend(BoxP(box_star, f) for f in by_size.get(s - 3, []))
        for op in (PdlAnd, PdlOr):
            for i in range(1, s - 1):
                for left in by_size.get(i, []):
                    for right in by_size.get(s - 1 - i, []):
                        layer.append(op(left, right))
        by_size[s] = layer
    out: list[PdlFormula] = []
    for s in range(1, max_size + 1):
        out.extend(by_size.get(s, []))
    return out


# ---------------------------------------------------------------------------
# Vectorized scan bank


class ModelBank:
    """The enumeration stream packed into numpy row arrays for bulk scans.

    Row order matches `enumerate_models(spec)` exactly; bits above a
    model's world count are zero and masked by `full`.
    """

    def __init__(self, spec: EnumSpec):
        if spec.max_worlds > 7:
            raise ValueError("bank rows are uint8; at most 7 worlds")
        self.spec = spec
        w_max = spec.max_worlds
        ns = array("B")
        bots = array("B")
        pre_cols = [array("B") for _ in range(w_max)]
        mod_cols = [array("B") for _ in range(w_max)]
        val_cols = {a: array("B") for a in spec.atoms}
        for n, pre, mod, bot, vals in _enumerate_raw(spec):
            ns.append(n)
            bots.append(bot)
            for w in range(w_max):
                pre_cols[w].append(pre[w] if w < n else 0)
                mod_cols[w].append(mod[w] if w < n else 0)
            for i, a in enumerate(spec.atoms):
                val_cols[a].append(vals[i])
        self.count = len(ns)
        self.n = np.frombuffer(ns, dtype=np.uint8)
        self.full = ((1 << self.n.astype(np.uint16)) - 1).astype(np.uint8)
        self.bot = np.frombuffer(bots, dtype=np.uint8)
        self.pre = np.stack([np.frombuffer(c, dtype=np.uint8) for c in pre_cols],
                            axis=1) if self.count else np.zeros((0, w_max), np.uint8)
        self.mod = np.stack([np.frombuffer(c, dtype=np.uint8) for c in mod_cols],
                            axis=1) if self.count else np.zeros((0, w_max), np.uint8)
        self.val = {a: np.frombuffer(c, dtype=np.uint8) for a, c in val_cols.items()}
        self.pre_mod = self._compose(self.pre, self.mod)
        self.box_star = self._star(self.pre_mod)
        self.mod_star = self._star(self.mod)

    def _compose(self, left: np.ndarray, right: np.ndarray) -> np.ndarray:
        w_max = left.shape[1]
        out = np.zeros_like(left)
        for w in range(w_max):
            acc = np.zeros(self.count, np.uint8)
            row = left[:, w]
            for v in range(w_max):
                acc |= np.where((row >> v) & 1 == 1, right[:, v], 0)
            out[:, w] = acc
        return out

    def _star(self, rel: np.ndarray) -> np.ndarray:
        w_max = rel.shape[1]
        out = rel.copy()
        for w in range(w_max):
            out[:, w] |= np.uint8(1 << w)
        for k in range(w_max):
            col_k = out[:, k].copy()
            for w in range(w_max):
                grow = np.where((out[:, w] >> k) & 1 == 1, col_k, 0)
                out[:, w] |= grow
        # Rows past a model's world count must stay empty.
        for w in range(w_max):
            out[:, w] = np.where(w < self.n, out[:, w] & self.full, 0)
        return out

    def _forall(self, rows: np.ndarray, target: np.ndarray,
                lo: int, hi: int) -> np.ndarray:
        miss = self.full[lo:hi] & ~target
        out = np.zeros(hi - lo, np.uint8)
        for w in range(rows.shape[1]):
            ok = (rows[lo:hi, w] & miss) == 0
            out |= ok.astype(np.uint8) << w
        return out & self.full[lo:hi]

    def _exists(self, rows: np.ndarray, target: np.ndarray,
                lo: int, hi: int) -> np.ndarray:
        out = np.zeros(hi - lo, np.uint8)
        for w in range(rows.shape[1]):
            hit = (rows[lo:hi, w] & target) != 0
            out |= hit.astype(np.uint8) << w
        return out & self.full[lo:hi]

    def extension(self, f: Formula, lo: int = 0, hi: "int | None" = None) -> np.ndarray:
        if hi is None:
            hi = self.count
        from .syntax import subformulas

        full = self.full[lo:hi]
        ext: dict[Formula, np.ndarray] = {}
        for g in subformulas(f):
            if isinstance(g, Bot):
                e = self.bot[lo:hi].copy()
            elif isinstance(g, Atom):
                e = self.val[g.name][lo:hi] if g.name in self.val else self.bot[lo:hi]
                e = e.copy()
            elif isinstance(g, And):
                e = ext[g.left] & ext[g.right]
            elif isinstance(g, Or):
                e = ext[g.left] | ext[g.right]
            elif isinstance(g, Imp):
                bad = ext[g.left] & ~ext[g.right] & full
                e = self._forall(self.pre, full & ~bad, lo, hi)
            elif isinstance(g, Box):
                e = self._forall(self.pre_mod, ext[g.body], lo, hi)
            elif isinstance(g, BoxStar):
                e = self._forall(self.box_star, ext[g.body], lo, hi)
            elif isinstance(g, Dia):
                good = self._exists(self.mod, ext[g.body], lo, hi)
                e = self._forall(self.pre, good, lo, hi)
            elif isinstance(g, DiaStar):
                good = self._exists(self.mod_star, ext[g.body], lo, hi)
                e = self._forall(self.pre, good, lo, hi)
            else:
                raise TypeError(f"not a constructive formula: {type(g).__name__}")
            ext[g] = e
        return ext[f]

    def first_violation(self, f: Formula,
                        chunk: int = 1 << 14) -> "tuple[int, int] | None":
        """(model index, least falsifying world) of the first falsifier in
        enumeration order, scanning in chunks for early exit."""
        for lo in range(0, self.count, chunk):
            hi = min(lo + chunk, self.count)
            ext = self.extension(f, lo, hi)
            miss = self.full[lo:hi] & ~ext
            idx = np.flatnonzero(miss)
            if idx.size:
                i = int(idx[0])
                m = int(miss[i])
                return lo + i, (m & -m).bit_length() - 1
        return None

    def model_at(self, i: int) -> BiModel:
        n = int(self.n[i])
        pre = Relation(n, tuple(int(self.pre[i, w]) for w in range(n)))
        mod = Relation(n, tuple(int(self.mod[i, w]) for w in range(n)))
        val = {a: frozenset(worlds_of(int(col[i]))) for a, col in self.val.items()}
        return BiModel(n, pre, mod, val,
                       frozenset(worlds_of(int(self.bot[i]))), self.spec.kind)
