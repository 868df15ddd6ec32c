"""Predicative games: families of deterministic trees probed to a bound.

A predicative game couples a set of deterministic trees over one arena with
an identification of their plays.  Rather than materialising the set, each
kind here decides membership of a candidate oracle by bounded probing: the
oracle is driven over the game's arena and every reached play is checked
against the positional discipline of the kind, plus whatever extra clause
the kind carries (fibre conditions for dependent sums and products, slice
conditions for function spaces, code validity for universes).

Dependent games are families of games indexed by the winning strategies of
a base; they only ever inspect their index by playing against it, which is
what makes equal-up-to-identification indices give identical fibres.
"""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Iterable, Iterator, Optional

from .arena import (
    Arena,
    Code,
    EnumCaps,
    LollipopArena,
    Move,
    OQ,
    PA,
    QUESTION,
    retag,
    untag,
)
from .game import (
    Game,
    construct,
    deterministic_trees,
    family_is_consistent,
    game_text,
    nat,
    one,
    ref_expr,
    parse_game,
    tensor_expr,
    prod_expr,
    lollipop_expr,
    bang_expr,
    zero,
)
from .position import JSeq, equivalent, is_legal
from .skeleton import (
    ChatterError,
    ExplorationBound,
    Exploration,
    EquivReport,
    Skeleton,
    SkeletonError,
    Verdict,
    candidate_extensions,
    compose,
    equiv_report,
    pairing,
    pca_apply,
    relabel,
    saturate,
    seq_text,
    tensor as tree_tensor,
    tree_form,
)


class PGameError(ValueError):
    """A malformed predicative game or an operation outside its domain."""


class RankError(PGameError):
    """The game admits no code at the requested universe level."""


class UndecidedError(RuntimeError):
    """A fibre needed a strategy equality the bound could not settle."""


# ---------------------------------------------------------------------------
# probing an oracle over an explicit arena

def probe(
    skel: Skeleton,
    arena: Arena,
    bound: Optional[ExplorationBound] = None,
    member: Optional[Callable[[JSeq], bool]] = None,
) -> Exploration:
    """Breadth-first search of the oracle's plays over the given arena.

    Unlike exploration over a skeleton's own arena, the candidates come from
    the arena under test, so a composite oracle living on the universal arena
    is probed exactly where the game has moves.  A member predicate narrows
    the offers further, to the positions of a game over the arena: an oracle
    denotes a tree of the game through the plays reachable that way, and its
    behaviour on offers the game never makes is unobservable.
    """

    bound = bound or ExplorationBound()
    caps = bound.caps()
    evens = [JSeq.empty()]
    stuck = []
    truncated = False
    queue = deque([JSeq.empty()])
    while queue:
        s = queue.popleft()
        if len(s) >= bound.max_len:
            truncated = True
            continue
        if arena.open_ended(None) or any(arena.open_ended(m) for m in s.moves):
            truncated = True
        cands = []
        for m, p in candidate_extensions(arena, s, caps):
            odd = s.snoc(m, p)
            if not is_legal(odd, arena).ok:
                continue
            if member is not None and not member(odd):
                continue
            try:
                if skel.accepts_o(s, m, p):
                    cands.append(odd)
            except SkeletonError:
                continue
        if len(cands) > bound.max_branch:
            truncated = True
            cands = cands[: bound.max_branch]
        for odd in cands:
            try:
                r = skel.respond(odd)
            except SkeletonError:
                r = None
            if r is None:
                stuck.append(odd)
                continue
            t = odd.snoc(*r)
            evens.append(t)
            queue.append(t)
    return Exploration(tuple(evens), tuple(stuck), truncated)


# ---------------------------------------------------------------------------
# the predicative game interface

class PGame:
    """One kind of predicative game: an arena, a positional discipline, and
    an optional extra membership clause probed against candidate oracles."""

    kind = "pgame"

    def __init__(self, arena: Arena, text: str):
        self.arena = arena
        self.text = text

    def __repr__(self) -> str:
        return f"PGame({self.text})"

    # structural identity: the text is a canonical description
    def __eq__(self, other) -> bool:
        return isinstance(other, PGame) and self.text == other.text

    def __hash__(self) -> int:
        return hash(self.text)

    def position_member(self, s: JSeq) -> bool:
        raise NotImplementedError

    def contains(self, s: JSeq) -> bool:
        return self.position_member(s)

    def skeleton_member(
        self, skel: Skeleton, bound: Optional[ExplorationBound] = None
    ) -> Verdict:
        """Decide whether the oracle plays inside this game, to the bound."""

        bound = bound or ExplorationBound()
        ex = probe(skel, self.arena, bound, member=self.position_member)
        for s in ex.evens:
            if not self.position_member(s):
                return Verdict("violated", s)
        extra = self._extra(skel, ex, bound)
        if extra is not None:
            return extra
        return Verdict("holds", None)

    def _extra(
        self, skel: Skeleton, ex: Exploration, bound: ExplorationBound
    ) -> Optional[Verdict]:
        return None

    def winning(self, bound: Optional[ExplorationBound] = None) -> list["PStrategy"]:
        """A canonical enumeration of winning strategies, possibly partial;
        kinds without a known enumeration yield nothing."""

        return []

    def winning_exhaustive(self, bound: Optional[ExplorationBound] = None) -> bool:
        """True when winning() is known to list every winning strategy."""

        return False

    def rank(self) -> int:
        return 0


@dataclass(frozen=True, eq=False)
class PStrategy:
    """A realizing tree together with the predicative game it inhabits.

    The denoted strategy is the saturation of the realizer; two handles
    denote the same strategy exactly when their realizers are equivalent up
    to the identification of copy indices.
    """

    realizer: Skeleton
    game: PGame

    def validate(self, bound: Optional[ExplorationBound] = None) -> Verdict:
        return self.game.skeleton_member(self.realizer, bound)

    def saturated(self) -> Skeleton:
        return saturate(self.realizer)


def strategies_equal(
    x: PStrategy, y: PStrategy, bound: Optional[ExplorationBound] = None
) -> EquivReport:
    """Equality of the denoted strategies, probed on the game's arena."""

    return equiv_report(x.realizer, y.realizer, bound, arena=x.game.arena)


def is_winning(
    g: PGame, skel: Skeleton, bound: Optional[ExplorationBound] = None
) -> bool:
    """Bounded winning check: the oracle refuses no legal question, leaves
    no reached question unanswered, and never escapes the game."""

    bound = bound or ExplorationBound()
    caps = bound.caps()
    ex = probe(skel, g.arena, bound, member=g.position_member)
    # every stuck offer is a game question left unanswered
    if ex.stuck_odd:
        return False
    evens = set(ex.evens)
    for s in ex.evens:
        if not g.position_member(s):
            return False
        for m, p in candidate_extensions(g.arena, s, caps):
            odd = s.snoc(m, p)
            if not is_legal(odd, g.arena).ok or not g.position_member(odd):
                continue
            try:
                accepted = skel.accepts_o(s, m, p)
            except SkeletonError:
                accepted = False
            if not accepted:
                return False
        is_leaf = not any(len(t) == len(s) + 2 and t.prefix(len(s)) == s for t in evens)
        if is_leaf and _pending_question(s):
            return False
    return True


def _pending_question(s: JSeq) -> bool:
    answered = set()
    for i, m, p in s.steps():
        if m.is_answer:
            answered.add(p)
    return any(m.is_question and i not in answered for i, m, _ in s.steps())


# ---------------------------------------------------------------------------
# the embedding of standard games

class LiftedPGame(PGame):
    """A standard game seen as the predicative game of all its trees."""

    kind = "lifted"

    def __init__(self, game: Game):
        super().__init__(game.arena, _game_name(game))
        self.game = game

    def position_member(self, s: JSeq) -> bool:
        return self.game.contains(s)

    def winning(self, bound: Optional[ExplorationBound] = None) -> list[PStrategy]:
        bound = bound or ExplorationBound()
        return [PStrategy(t, self) for t in _lifted_winners(self.game, bound.caps())]

    def winning_exhaustive(self, bound: Optional[ExplorationBound] = None) -> bool:
        return _finite_alphabet(self.game)


def _game_name(game: Game) -> str:
    return game_text(game.expr)


def _finite_alphabet(game: Game) -> bool:
    e = game.expr
    if e.kind in ("one", "zero", "two", "flat"):
        return True
    if e.kind in ("tensor", "prod"):
        children = [construct(p) for p in e.parts]
        return all(_finite_alphabet(c) for c in children)
    return False


def _lifted_winners(game: Game, caps: EnumCaps) -> list[Skeleton]:
    e = game.expr
    if e.kind == "one":
        return [tree_form({JSeq.empty()}, game.arena)]
    if e.kind == "zero":
        return []
    if e.kind in ("two", "flat", "nat"):
        if e.kind == "two":
            answers = ("tt", "ff")
        elif e.kind == "nat":
            answers = tuple(range(caps.max_flat))
        else:
            answers = e.symbols
        out = []
        q = Move(QUESTION, "", (), OQ)
        for a in answers:
            play = JSeq.empty().snoc(q, 0).snoc(Move(a, "", (), PA), 1)
            out.append(tree_form({JSeq.empty(), play}, game.arena))
        return out
    if e.kind in ("tensor", "prod"):
        left, right = construct(e.parts[0]), construct(e.parts[1])
        combine = tree_tensor if e.kind == "tensor" else pairing
        return [
            combine(x, y)
            for x in _lifted_winners(left, caps)
            for y in _lifted_winners(right, caps)
        ]
    return []


def lift(game: Game) -> PGame:
    return LiftedPGame(game)


def lifted(text: str) -> PGame:
    """The lifted game a descriptor denotes."""

    return lift(construct(parse_game(text)))


def forget(g: PGame) -> Game:
    """The underlying standard game: the union of trees with its plays."""

    if isinstance(g, LiftedPGame):
        return g.game
    return construct(ref_expr(g.text, g))


# ---------------------------------------------------------------------------
# positional constructions

class _CarrierPGame(PGame):
    """Shared base for kinds whose positional discipline is that of a
    standard-game construction over the children's position sets."""

    def __init__(self, carrier: Game, text: str):
        super().__init__(carrier.arena, text)
        self.carrier = carrier

    def position_member(self, s: JSeq) -> bool:
        return self.carrier.membership(s)


class TensorPGame(_CarrierPGame):
    kind = "tensor"

    def __init__(self, left: PGame, right: PGame):
        carrier = construct(
            tensor_expr(ref_expr(left.text, left), ref_expr(right.text, right))
        )
        super().__init__(carrier, _game_name(carrier))
        self.left = left
        self.right = right

    def winning(self, bound: Optional[ExplorationBound] = None) -> list[PStrategy]:
        return [
            PStrategy(tree_tensor(x.realizer, y.realizer), self)
            for x in self.left.winning(bound)
            for y in self.right.winning(bound)
        ]

    def winning_exhaustive(self, bound: Optional[ExplorationBound] = None) -> bool:
        return self.left.winning_exhaustive(bound) and self.right.winning_exhaustive(bound)

    def rank(self) -> int:
        return max(self.left.rank(), self.right.rank())


class ProductPGame(_CarrierPGame):
    kind = "product"

    def __init__(self, left: PGame, right: PGame):
        carrier = construct(
            prod_expr(ref_expr(left.text, left), ref_expr(right.text, right))
        )
        super().__init__(carrier, _game_name(carrier))
        self.left = left
        self.right = right

    def winning(self, bound: Optional[ExplorationBound] = None) -> list[PStrategy]:
        return [
            PStrategy(pairing(x.realizer, y.realizer), self)
            for x in self.left.winning(bound)
            for y in self.right.winning(bound)
        ]

    def winning_exhaustive(self, bound: Optional[ExplorationBound] = None) -> bool:
        return self.left.winning_exhaustive(bound) and self.right.winning_exhaustive(bound)

    def rank(self) -> int:
        return max(self.left.rank(), self.right.rank())


class BangPGame(_CarrierPGame):
    kind = "bang"

    def __init__(self, inner: PGame):
        carrier = construct(bang_expr(ref_expr(inner.text, inner)))
        super().__init__(carrier, _game_name(carrier))
        self.inner = inner

    def rank(self) -> int:
        return self.inner.rank()


class LollipopPGame(_CarrierPGame):
    kind = "lollipop"

    def __init__(self, dom: PGame, cod: PGame):
        carrier = construct(
            lollipop_expr(ref_expr(dom.text, dom), ref_expr(cod.text, cod))
        )
        super().__init__(carrier, _game_name(carrier))
        self.dom = dom
        self.cod = cod

    def rank(self) -> int:
        return max(self.dom.rank(), self.cod.rank())


class ArrowPGame(_CarrierPGame):
    kind = "arrow"

    def __init__(self, dom: PGame, cod: PGame):
        carrier = construct(
            lollipop_expr(bang_expr(ref_expr(dom.text, dom)), ref_expr(cod.text, cod))
        )
        super().__init__(carrier, f"({dom.text} -> {cod.text})")
        self.dom = dom
        self.cod = cod

    def rank(self) -> int:
        return max(self.dom.rank(), self.cod.rank())


def tensor(left: PGame, right: PGame) -> PGame:
    return TensorPGame(left, right)


def product(left: PGame, right: PGame) -> PGame:
    return ProductPGame(left, right)


def bang(inner: PGame) -> PGame:
    return BangPGame(inner)


def lollipop(dom: PGame, cod: PGame) -> PGame:
    return LollipopPGame(dom, cod)


def arrow(dom: PGame, cod: PGame) -> PGame:
    return ArrowPGame(dom, cod)


def reseat(skel: Skeleton, arena: Arena) -> Skeleton:
    """The same oracle presented as living on the given arena."""

    return relabel(skel, lambda m: m, lambda m: m, arena)


class GuardedSkeleton(Skeleton):
    """An oracle that refuses every offer outside the given game.

    Membership probing already confines its offers to the game under test;
    the guard expresses commitment beyond that, as when the right half of a
    dependent pair must refuse the threads of every fibre other than the
    one its left half selected.
    """

    def __init__(self, base: Skeleton, game: PGame):
        self.base = base
        self.game = game
        self.arena = game.arena

    def accepts_o(self, s: JSeq, m: Move, ptr: int) -> bool:
        if not self.game.position_member(s.snoc(m, ptr)):
            return False
        try:
            return self.base.accepts_o(s, m, ptr)
        except SkeletonError:
            return False

    def respond(self, s: JSeq) -> Optional[tuple[Move, int]]:
        return self.base.respond(s)


def guard(base: Skeleton, game: PGame) -> Skeleton:
    return GuardedSkeleton(base, game)


def side_slice(skel: Skeleton, side: str, arena: Arena) -> Skeleton:
    """The one-sided component of an oracle on a two-sided arena."""

    def into(m: Move) -> Optional[Move]:
        return retag(m, side)

    def out_of(m: Move) -> Optional[Move]:
        try:
            inner, bit = untag(m)
        except ValueError:
            return None
        return inner if bit == side else None

    return relabel(skel, out_of, into, arena)


# ---------------------------------------------------------------------------
# dependent games and integration

@dataclass(frozen=True)
class DepPGame:
    """A family of predicative games over the winning strategies of a base.

    The fibre function receives a strategy handle and may only interrogate
    it by play, so handles equal up to identification induce the same fibre.
    `ambient`, when given, is an arena containing every fibre's moves;
    otherwise integration unions the arenas of the enumerated fibres.
    """

    base: PGame
    fiber_fn: Callable[[PStrategy], PGame] = field(compare=False)
    text: str = ""
    witness: Optional[PStrategy] = field(default=None, compare=False)
    ambient: Optional[Arena] = field(default=None, compare=False)
    constant: Optional[PGame] = field(default=None, compare=False)
    rank_hint: Optional[int] = field(default=None, compare=False)

    def fiber(self, a: PStrategy) -> PGame:
        if self.constant is not None:
            return self.constant
        return self.fiber_fn(a)

    def enumerate_fibers(
        self, bound: Optional[ExplorationBound] = None
    ) -> list[tuple[PStrategy, PGame]]:
        winners = self.base.winning(bound)
        if not winners and self.witness is not None:
            winners = [self.witness]
        return [(a, self.fiber(a)) for a in winners]

    def rank(self) -> int:
        if self.rank_hint is not None:
            return self.rank_hint
        if self.constant is not None:
            return self.constant.rank()
        pairs = self.enumerate_fibers()
        if not pairs:
            raise RankError(f"no fibre of {self.text or 'the family'} to rank")
        return max(g.rank() for _, g in pairs)


def constant_family(base: PGame, target: PGame) -> DepPGame:
    return DepPGame(
        base, lambda a: target, text=target.text, constant=target
    )


class UnionArena(Arena):
    """The arenas of finitely many fibres, overlaid; moves shared between
    fibres must agree on enabling, which holds for fibres built from one
    another by extension."""

    def __init__(self, parts: tuple[Arena, ...]):
        self.parts = parts
        bounds = [p.depth_bound for p in parts]
        self.depth_bound = None if (not bounds or None in bounds) else max(bounds)

    def contains(self, m: Move) -> bool:
        return any(p.contains(m) for p in self.parts)

    def is_initial(self, m: Move) -> bool:
        return any(p.is_initial(m) for p in self.parts)

    def enables(self, m: Optional[Move], n: Move) -> bool:
        if m is None:
            return self.is_initial(n)
        return any(p.contains(m) and p.contains(n) and p.enables(m, n) for p in self.parts)

    def initial_moves(self, caps: EnumCaps) -> Iterator[Move]:
        seen = set()
        for p in self.parts:
            for m in p.initial_moves(caps):
                if m not in seen:
                    seen.add(m)
                    yield m

    def moves_enabled_by(self, m: Move, caps: EnumCaps) -> Iterator[Move]:
        seen = set()
        for p in self.parts:
            if not p.contains(m):
                continue
            for n in p.moves_enabled_by(m, caps):
                if n not in seen:
                    seen.add(n)
                    yield n

    def is_empty(self) -> bool:
        return all(p.is_empty() for p in self.parts)

    def open_ended(self, m: Optional[Move] = None) -> bool:
        return any(p.open_ended(m) for p in self.parts if m is None or p.contains(m))


class IntegratedPGame(PGame):
    """The deterministic-join union of all fibres of a family: an oracle
    belongs when each of its plays lies in some fibre."""

    kind = "integral"

    def __init__(
        self,
        family: DepPGame,
        fibers: tuple[PGame, ...],
        arena: Arena,
        complete: bool,
    ):
        text = f"Integral(x:{family.base.text}).{family.text}"
        super().__init__(arena, text)
        self.family = family
        self.fibers = fibers
        self.complete = complete

    def position_member(self, s: JSeq) -> bool:
        return any(g.position_member(s) for g in self.fibers)

    def rank(self) -> int:
        return self.family.rank()


def integrate(family: DepPGame, bound: Optional[ExplorationBound] = None) -> PGame:
    """The union of a family's fibres, closed under deterministic joins.

    A constant family integrates to its fibre on the nose.
    """

    if family.constant is not None:
        return family.constant
    bound = bound or ExplorationBound()
    pairs = family.enumerate_fibers(bound)
    if not pairs and family.ambient is None:
        raise PGameError(
            f"cannot integrate {family.text or 'the family'}: "
            "no fibre enumerable and no ambient arena declared"
        )
    fibers = tuple(g for _, g in pairs)
    arena = family.ambient or UnionArena(tuple(g.arena for g in fibers))
    complete = family.base.winning_exhaustive(bound) and family.ambient is None
    return IntegratedPGame(family, fibers, arena, complete)


# ---------------------------------------------------------------------------
# dependent sums and products

class SigmaPGame(_CarrierPGame):
    """Pairs: a choice-side position discipline over base and integrated
    family, plus the fibre clause tying the right side to the left."""

    kind = "sigma"

    def __init__(self, base: PGame, family: DepPGame, bound: Optional[ExplorationBound] = None):
        integral = integrate(family, bound)
        carrier = construct(
            prod_expr(ref_expr(base.text, base), ref_expr(integral.text, integral))
        )
        super().__init__(carrier, f"Sigma(x:{base.text}).{family.text}")
        self.base = base
        self.family = family
        self.integral = integral

    def _extra(
        self, skel: Skeleton, ex: Exploration, bound: ExplorationBound
    ) -> Optional[Verdict]:
        alpha = side_slice(skel, "left", self.base.arena)
        if not is_winning(self.base, alpha, bound):
            return None
        fib = self.family.fiber(PStrategy(alpha, self.base))
        beta = side_slice(skel, "right", self.integral.arena)
        bx = probe(beta, self.integral.arena, bound)
        for s in bx.evens:
            if not fib.position_member(s):
                return Verdict("violated", s)
        return None

    def winning(self, bound: Optional[ExplorationBound] = None) -> list[PStrategy]:
        out = []
        for a in self.base.winning(bound):
            for b in self.family.fiber(a).winning(bound):
                out.append(PStrategy(pairing(a.realizer, b.realizer), self))
        return out

    def winning_exhaustive(self, bound: Optional[ExplorationBound] = None) -> bool:
        if not self.base.winning_exhaustive(bound):
            return False
        return all(
            g.winning_exhaustive(bound) for _, g in self.family.enumerate_fibers(bound)
        )

    def rank(self) -> int:
        return max(self.base.rank(), self.family.rank())


class PiPGame(_CarrierPGame):
    """Dependent functions: a function-space position discipline into the
    integrated family, plus the clause that applying the oracle to each
    enumerable winning argument lands in that argument's fibre."""

    kind = "pi"

    def __init__(
        self,
        base: PGame,
        family: DepPGame,
        bound: Optional[ExplorationBound] = None,
        linear: bool = False,
    ):
        integral = integrate(family, bound)
        dom = ref_expr(base.text, base)
        if not linear:
            dom = bang_expr(dom)
        carrier = construct(
            lollipop_expr(dom, ref_expr(integral.text, integral))
        )
        shape = "LinearPi" if linear else "Pi"
        super().__init__(carrier, f"{shape}(x:{base.text}).{family.text}")
        self.base = base
        self.family = family
        self.integral = integral
        self.linear = linear

    def _extra(
        self, skel: Skeleton, ex: Exploration, bound: ExplorationBound
    ) -> Optional[Verdict]:
        for a in self.base.winning(bound):
            if self.linear:
                if not isinstance(self.arena, LollipopArena):
                    continue
                h = compose(a.realizer, reseat(skel, self.arena))
            else:
                h = pca_apply(skel, a.realizer)
            sub = self.family.fiber(a).skeleton_member(h, bound)
            if sub.status == "violated":
                return sub
        return None

    def rank(self) -> int:
        return max(self.base.rank(), self.family.rank())


def pi(base: PGame, family: DepPGame, bound: Optional[ExplorationBound] = None) -> PGame:
    return PiPGame(base, family, bound)


def linear_pi(base: PGame, family: DepPGame, bound: Optional[ExplorationBound] = None) -> PGame:
    return PiPGame(base, family, bound, linear=True)


def sigma(base: PGame, family: DepPGame, bound: Optional[ExplorationBound] = None) -> PGame:
    return SigmaPGame(base, family, bound)


# ---------------------------------------------------------------------------
# identity games

class IdPGame(PGame):
    """The game of proofs that two strategy handles are equal: the one-play
    game when they are, the empty-protocol game when they differ."""

    kind = "id"

    def __init__(self, over: PGame, labels: tuple[str, str], inner: PGame, report: EquivReport):
        super().__init__(inner.arena, f"Id({over.text}; {labels[0]}; {labels[1]})")
        self.over = over
        self.inner = inner
        self.report = report

    def position_member(self, s: JSeq) -> bool:
        return self.inner.position_member(s)

    def winning(self, bound: Optional[ExplorationBound] = None) -> list[PStrategy]:
        return [PStrategy(w.realizer, self) for w in self.inner.winning(bound)]

    def winning_exhaustive(self, bound: Optional[ExplorationBound] = None) -> bool:
        return self.inner.winning_exhaustive(bound)

    def rank(self) -> int:
        raise RankError("identity games admit no universe code")


def id_fiber(
    over: PGame,
    x: PStrategy,
    y: PStrategy,
    bound: Optional[ExplorationBound] = None,
    labels: Optional[tuple[str, str]] = None,
) -> PGame:
    """The identity game on two handles: equality settled by joint probing.

    Equality that holds throughout the probe gives the unit game even when
    the probe was truncated; a discovered disagreement gives the empty game;
    a probe that cannot run to a verdict raises rather than guessing.
    """

    bound = bound or ExplorationBound()
    try:
        rep = equiv_report(x.realizer, y.realizer, bound, arena=over.arena)
    except (ChatterError, RecursionError) as err:
        raise UndecidedError(
            f"equality over {over.text} is undecided at this bound: {err}"
        ) from err
    inner = lifted("1") if rep.equal else lifted("0")
    return IdPGame(over, labels or ("l", "r"), inner, rep)


# ---------------------------------------------------------------------------
# universes

class UniverseArena(Arena):
    """One question; the answers are codes of games of rank at most k."""

    depth_bound = 2

    def __init__(self, level: int):
        self.level = level
        self.question = Move(QUESTION, "", (), OQ)

    def _is_code(self, m: Move) -> bool:
        if m.label != PA or not isinstance(m.core, Code):
            return False
        try:
            g = decode(m.core.text)
            return g.rank() <= self.level
        except PGameError:
            return False

    def contains(self, m: Move) -> bool:
        if m.dtag or m.etag:
            return False
        return m == self.question or self._is_code(m)

    def is_initial(self, m: Move) -> bool:
        return m == self.question

    def enables(self, m: Optional[Move], n: Move) -> bool:
        if m is None:
            return self.is_initial(n)
        return m == self.question and self._is_code(n)

    def initial_moves(self, caps: EnumCaps) -> Iterator[Move]:
        yield self.question

    def moves_enabled_by(self, m: Move, caps: EnumCaps) -> Iterator[Move]:
        if m != self.question:
            return
        for text in _canonical_codes(self.level)[: caps.max_flat]:
            yield Move(Code(text), "", (), PA)

    def open_ended(self, m: Optional[Move] = None) -> bool:
        return m == self.question


def _canonical_codes(level: int) -> list[str]:
    return ["1", "0", "N"] + [f"U{i}" for i in range(level)]


class UniversePGame(PGame):
    """The game answering codes of games one rank down."""

    kind = "universe"

    def __init__(self, level: int):
        super().__init__(UniverseArena(level), f"U{level}")
        self.level = level

    def position_member(self, s: JSeq) -> bool:
        return len(s) <= 2 and is_legal(s, self.arena).ok

    def winning(self, bound: Optional[ExplorationBound] = None) -> list[PStrategy]:
        bound = bound or ExplorationBound()
        q = Move(QUESTION, "", (), OQ)
        out = []
        for text in _canonical_codes(self.level)[: bound.caps().max_flat]:
            play = JSeq.empty().snoc(q, 0).snoc(Move(Code(text), "", (), PA), 1)
            out.append(PStrategy(tree_form({JSeq.empty(), play}, self.arena), self))
        return out

    def rank(self) -> int:
        return self.level + 1


def universe(level: int) -> PGame:
    return UniversePGame(level)


def decode(text: str) -> PGame:
    """The game a code text denotes.

    The code grammar is deliberately small: units, the empty game, the
    naturals, universes below the current one, and dependent sums and
    products of codes.  Identity games are absent by design.
    """

    text = text.strip()
    if text == "1":
        return lift(construct(one()))
    if text == "0":
        return lift(construct(zero()))
    if text == "N":
        return lift(construct(nat()))
    if text.startswith("U") and text[1:].isdigit():
        return universe(int(text[1:]))
    for head, former in (("Pi(x:", pi), ("Sigma(x:", sigma)):
        if not text.startswith(head):
            continue
        depth = 1
        for i in range(len(head), len(text)):
            if text[i] == "(":
                depth += 1
            elif text[i] == ")":
                depth -= 1
                if depth == 0:
                    if i + 1 >= len(text) or text[i + 1] != ".":
                        break
                    base = decode(text[len(head): i])
                    fib = decode(text[i + 2:])
                    return former(base, constant_family(base, fib))
        raise PGameError(f"unbalanced code text: {text!r}")
    raise PGameError(f"unreadable code text: {text!r}")


def code(g: PGame) -> Code:
    """The code answering for a game in a universe."""

    if g.kind == "id" or "Id(" in g.text:
        raise RankError(
            "identity games admit no universe code: deciding them would "
            "take an infinitary comparison of strategies"
        )
    try:
        back = decode(g.text)
    except PGameError as err:
        raise RankError(f"outside the code grammar: {g.text}") from err
    if back != g:
        raise RankError(f"the code for {g.text} decodes to {back.text}")
    return Code(g.text)


def el(u: PStrategy) -> PGame:
    """Decode the game a universe strategy answers."""

    q = Move(QUESTION, "", (), OQ)
    try:
        r = u.realizer.respond(JSeq.empty().snoc(q, 0))
    except SkeletonError as err:
        raise PGameError(f"the handle cannot be interrogated: {err}") from err
    if r is None:
        raise PGameError("the handle refuses the universe question")
    m = r[0]
    if not isinstance(m.core, Code):
        raise PGameError(f"the handle answers no code: {m.text}")
    return decode(m.core.text)


def numeral_value(a: PStrategy) -> int:
    """Interrogate a handle on the naturals by playing its question."""

    q = Move(QUESTION, "", (), OQ)
    r = a.realizer.respond(JSeq.empty().snoc(q, 0))
    if r is None or not isinstance(r[0].core, int):
        raise PGameError("the handle answers no numeral")
    return r[0].core


# ---------------------------------------------------------------------------
# the running family of tensor powers

def tens_power(n: int) -> PGame:
    """The n-fold tensor power of the naturals, seeded with the unit."""

    g = lifted("1")
    for _ in range(n):
        g = tensor(g, lifted("N"))
    return g


def tens_nat_family() -> DepPGame:
    """Tensor powers of the naturals, indexed by an interrogated numeral."""

    base = lifted("N")
    cache: dict[int, PGame] = {}

    def fib(a: PStrategy) -> PGame:
        n = numeral_value(a)
        if n not in cache:
            cache[n] = tens_power(n)
        return cache[n]

    witness = base.winning(ExplorationBound())[0]
    return DepPGame(base, fib, text="Tens_N", witness=witness)


# ---------------------------------------------------------------------------
# finite games given by explicit tree data

class FinitePGame(PGame):
    """A game listed tree by tree; the form the axiom checker consumes."""

    kind = "finite"

    def __init__(self, members: Iterable[frozenset], arena: Arena, text: str = "finite"):
        members = tuple(members)
        if not members:
            raise PGameError("a predicative game needs at least one tree")
        if len(members) > 32:
            raise PGameError("explicit games are capped at 32 trees")
        super().__init__(arena, text)
        self.members = members
        self.union = frozenset().union(*members)

    def position_member(self, s: JSeq) -> bool:
        return s in self.union

    def _extra(
        self, skel: Skeleton, ex: Exploration, bound: ExplorationBound
    ) -> Optional[Verdict]:
        for member in self.members:
            if all(s in member for s in ex.evens):
                return None
        return Verdict("violated", None)

    def winning(self, bound: Optional[ExplorationBound] = None) -> list[PStrategy]:
        out = []
        for member in self.members:
            evens = {s for s in member if len(s) % 2 == 0}
            skel = tree_form(evens, self.arena)
            if is_winning(self, skel, bound):
                out.append(PStrategy(skel, self))
        return out


def position_set_member(
    g: PGame, positions: Iterable[JSeq], bound: Optional[ExplorationBound] = None
) -> Verdict:
    """Decide membership for a tree given as an even-position set.

    A set that fails to be a deterministic tree is rejected outright; this
    is the gate that turns away unions of slice families with conflicting
    responses.
    """

    try:
        skel = tree_form(positions, g.arena)
    except SkeletonError as err:
        return Verdict("violated", str(err))
    return g.skeleton_member(skel, bound)


# ---------------------------------------------------------------------------
# the three completeness axioms, checked exhaustively

def _tree_responses(positions: Iterable[JSeq]) -> Optional[dict]:
    responses: dict = {}
    for s in positions:
        if len(s) % 2 or not s:
            continue
        odd = s.prefix(len(s) - 1)
        tail = (s.move_at(len(s)), s.ptr_at(len(s)))
        if responses.setdefault(odd, tail) != tail:
            return None
    return responses


def _sub_trees(positions: Iterable[JSeq]) -> list[frozenset]:
    """Every deterministic prefix-closed subset of the given tree data:
    odd children are optional, and each kept odd node keeps at most one of
    its even children."""

    store = set(positions)
    children: dict = {}
    for s in store:
        if s:
            children.setdefault(s.prefix(len(s) - 1), []).append(s)
    for kids in children.values():
        kids.sort(key=seq_text)

    def grow(even: JSeq) -> list[frozenset]:
        options_per_child = []
        for o in children.get(even, []):
            keep = [frozenset({o})]
            for c in children.get(o, []):
                keep.extend(frozenset({o}) | t for t in grow(c))
            options_per_child.append([None] + keep)
        out = []
        for combo in itertools.product(*options_per_child):
            chosen = [t for t in combo if t is not None]
            out.append(frozenset({even}).union(*chosen) if chosen else frozenset({even}))
        return out

    if JSeq.empty() not in store:
        return []
    return grow(JSeq.empty())


def _precedes(a: frozenset, b: frozenset, arena: Arena, eq) -> bool:
    if family_is_consistent((a, b), arena).status != "holds":
        return False
    b_odds = [t for t in b if len(t) % 2 == 1]
    b_evens = [t for t in b if len(t) % 2 == 0 and t]
    for smn in a:
        if len(smn) % 2 or not smn:
            continue
        sm = smn.prefix(len(smn) - 1)
        for tm in b_odds:
            if not eq(sm, tm):
                continue
            if not any(
                eq(smn, tmn)
                for tmn in b_evens
                if tmn.prefix(len(tmn) - 1) == tm
            ):
                return False
    return True


def _identified(a: frozenset, b: frozenset, arena: Arena, eq) -> bool:
    return _precedes(a, b, arena, eq) or _precedes(b, a, arena, eq)


def _maximal_consistent(members: tuple, arena: Arena) -> list[set]:
    n = len(members)
    adj = {
        i: {
            j
            for j in range(n)
            if j != i
            and family_is_consistent((members[i], members[j]), arena).status == "holds"
        }
        for i in range(n)
    }
    cliques: list[set] = []

    def extend(r: set, p: set, x: set) -> None:
        if not p and not x:
            cliques.append(r)
            return
        for v in sorted(p):
            extend(r | {v}, p & adj[v], x & adj[v])
            p = p - {v}
            x = x | {v}

    extend(set(), set(range(n)), set())
    return [{members[i] for i in c} for c in cliques]


def check_pgame_axioms(g: FinitePGame, eq=None) -> Verdict:
    """Exhaustive closure checks on an explicitly listed game.

    Verifies that consistent deterministic joins of listed trees are listed,
    that every deterministic subtree of a listed tree is listed, that trees
    identified with a listed tree are listed, and that each maximal
    consistent subset unions to legal, prefix-closed position data.
    """

    eq = eq or equivalent
    members = set(g.members)
    for s in g.union:
        if not is_legal(s, g.arena).ok:
            return Verdict("violated", s)

    # closure under joins: binary joins generate all finite consistent ones
    for a, b in itertools.combinations(g.members, 2):
        if family_is_consistent((a, b), g.arena).status != "holds":
            continue
        join = a | b
        if _tree_responses(join) is None:
            continue
        if join not in members:
            return Verdict("violated", _join_witness(a, b))

    for member in g.members:
        for sub in deterministic_trees(member):
            if sub not in members:
                return Verdict("violated", _tree_witness("downward", sub))

    candidates = _sub_trees(g.union)
    for member in g.members:
        for cand in candidates:
            if cand in members:
                continue
            if _identified(member, cand, g.arena, eq):
                return Verdict("violated", _tree_witness("horizontal", cand))

    for subset in _maximal_consistent(g.members, g.arena):
        union = frozenset().union(*subset)
        for s in union:
            if s and s.prefix(len(s) - 1) not in union:
                return Verdict("violated", s)
    return Verdict("holds", None)


def _tree_witness(clause: str, tree: frozenset):
    return (clause, tuple(sorted(seq_text(s) for s in tree)))


def _join_witness(a: frozenset, b: frozenset):
    return ("det-j", tuple(sorted(seq_text(s) for s in a | b)))
