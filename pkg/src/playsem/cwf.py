"""Contexts, dependent types, and terms over predicative games.

A context is a predicative game grown from the unit game by repeated
extension with a dependent type; a type in context is a family of games
over the context's winning strategies; a term is an oracle on the
function space from the context into the family's fibres, and a context
morphism is an oracle between two context games.  Substitution is
composition against a promoted oracle, and every judgemental equality on
offer here is bounded equivalence of the strategies denoted.

The formers come in two model flavours: one admits universes and the
other identity types, and each former checks it is on its own side.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

from .arena import (
    Arena,
    Code,
    LollipopArena,
    Move,
    OQ,
    PA,
    QUESTION,
    bang_arena,
    bang_tag,
    flip_op,
    lollipop_arena,
    retag,
    untag,
    untag_exponential,
)
from .game import game_positions
from .position import JSeq, is_legal
from .skeleton import (
    EquivReport,
    ExplorationBound,
    MirrorSkeleton,
    Skeleton,
    SkeletonError,
    Verdict,
    compose,
    dereliction,
    equiv_report,
    pairing,
    pca_apply,
    promotion,
    tree_form,
)
from .pgame import (
    DepPGame,
    PGame,
    PGameError,
    PiPGame,
    PStrategy,
    RankError,
    SigmaPGame,
    arrow,
    constant_family,
    decode,
    el,
    forget,
    guard,
    id_fiber,
    integrate,
    lifted,
    side_slice,
    universe,
)
from .pgame import code as code_of


class JudgementError(PGameError):
    """An operation was fed judgements that do not fit together."""


class VariantError(PGameError):
    """A former was used in the model flavour that excludes it."""


# ---------------------------------------------------------------------------
# model flavours

@dataclass(frozen=True)
class Variant:
    """Which optional formers a model admits; universes and identity types
    exclude one another, so each model commits to one side."""

    name: str
    universes: bool
    identity: bool


MU = Variant("mu", True, False)
WPG = Variant("wpg", False, True)


def variant_named(name: str) -> Variant:
    for v in (MU, WPG):
        if v.name == name:
            return v
    raise PGameError(f"unknown model variant: {name!r}")


# ---------------------------------------------------------------------------
# judgements

class Ctx:
    """A semantic context: the unit game extended finitely many times."""

    __slots__ = ("game", "variant", "parent", "ty")

    def __init__(
        self,
        game: PGame,
        variant: Variant,
        parent: Optional["Ctx"] = None,
        ty: Optional["SemTy"] = None,
    ):
        self.game = game
        self.variant = variant
        self.parent = parent
        self.ty = ty

    @property
    def text(self) -> str:
        return self.game.text

    def __repr__(self) -> str:
        return f"Ctx({self.text})"

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Ctx)
            and self.game == other.game
            and self.variant == other.variant
        )

    def __hash__(self) -> int:
        return hash((self.game, self.variant))


def empty_ctx(variant: Variant = WPG) -> Ctx:
    """The terminal context: the game with no moves."""

    return Ctx(lifted("1"), variant)


class SemTy:
    """A dependent type in context: a family of predicative games over the
    context, remembering how it was formed so that recursors and codes can
    work by structural induction."""

    __slots__ = (
        "ctx", "family", "shape", "parts",
        "_extended", "_tm_game", "_fam_arena", "_id_family",
    )

    def __init__(self, ctx: Ctx, family: DepPGame, shape: str, parts: tuple = ()):
        self.ctx = ctx
        self.family = family
        self.shape = shape  # "const" | "pi" | "sigma" | "id" | "el" | "subst"
        self.parts = parts
        self._extended: Optional[Ctx] = None
        self._tm_game: Optional[PGame] = None
        self._fam_arena: Optional[Arena] = None
        self._id_family: Optional["SemTy"] = None

    @property
    def text(self) -> str:
        return self.family.text

    @property
    def extended(self) -> Ctx:
        """The context this type extends its own context to."""

        if self._extended is None:
            self._extended = Ctx(
                SigmaPGame(self.ctx.game, self.family),
                self.ctx.variant,
                parent=self.ctx,
                ty=self,
            )
        return self._extended

    def tm_game(self) -> PGame:
        """The game whose winning oracles are the terms of this type."""

        if self._tm_game is None:
            self._tm_game = PiPGame(self.ctx.game, self.family)
        return self._tm_game

    def __repr__(self) -> str:
        return f"SemTy({self.text} over {self.ctx.text})"


class SemTm:
    """A term: an oracle playing from the context into the type's fibres."""

    __slots__ = ("ctx", "ty", "skel")

    def __init__(self, ctx: Ctx, ty: SemTy, skel: Skeleton):
        self.ctx = ctx
        self.ty = ty
        self.skel = skel

    def validate(self, bound: Optional[ExplorationBound] = None) -> Verdict:
        return self.ty.tm_game().skeleton_member(self.skel, bound)

    def __repr__(self) -> str:
        return f"SemTm(: {self.ty.text} over {self.ctx.text})"


class Morphism:
    """A context morphism: an oracle between two context games, applied to
    points of the source by replication."""

    __slots__ = ("src", "dst", "skel")

    def __init__(self, src: Ctx, dst: Ctx, skel: Skeleton):
        self.src = src
        self.dst = dst
        self.skel = skel

    def __repr__(self) -> str:
        return f"Morphism({self.src.text} -> {self.dst.text})"


# ---------------------------------------------------------------------------
# carriers and move dressing

def _arrow(src_arena: Arena, cod_arena: Arena) -> Arena:
    return lollipop_arena(bang_arena(src_arena), cod_arena)


def _silent(arena: Arena) -> Skeleton:
    return tree_form({JSeq.empty()}, arena)


def _family_arena(A: SemTy) -> Arena:
    """An arena containing every fibre of the type."""

    if A._fam_arena is None:
        fam = A.family
        if fam.constant is not None:
            A._fam_arena = fam.constant.arena
        elif fam.ambient is not None:
            A._fam_arena = fam.ambient
        else:
            A._fam_arena = integrate(fam).arena
    return A._fam_arena


def _dress_dom(raw: Move, thread: int = 0) -> Move:
    """How a move of the source game appears on the left of the arrow."""

    return retag(flip_op(bang_tag(raw, thread)), "left")


def _strip_dom(m: Move) -> tuple[Move, int]:
    """Invert the dressing; raises ValueError off its image."""

    inner, side = untag(m)
    if side != "left":
        raise ValueError(f"not a source move: {m.text}")
    return untag_exponential(flip_op(inner))


def _mirror_ptr(s: JSeq, p: int) -> int:
    if p == 0:
        return len(s)
    return p + 1 if p % 2 else p - 1


# ---------------------------------------------------------------------------
# identity, composition, application to points

def identity(ctx: Ctx) -> Morphism:
    arena = _arrow(ctx.game.arena, ctx.game.arena)
    if not isinstance(arena, LollipopArena):
        return Morphism(ctx, ctx, _silent(arena))
    return Morphism(ctx, ctx, dereliction(ctx.game.arena))


class _DeafDomain(Skeleton):
    """An arrow oracle that ignores its source: context offers are accepted
    and left unanswered, codomain play is delegated to an oracle whose own
    source has no moves."""

    def __init__(self, base: Skeleton, arena: Arena):
        self.base = base
        self.arena = arena

    def _maps(self, s: JSeq) -> tuple[JSeq, dict[int, int], dict[int, int]]:
        inner = JSeq.empty()
        fwd: dict[int, int] = {}
        back: dict[int, int] = {}
        for i, m, p in s.steps():
            if m.dtag and m.dtag[0] == "0":
                continue
            lp = fwd.get(p, 0) if p else 0
            inner = inner.snoc(m, lp)
            fwd[i] = len(inner)
            back[len(inner)] = i
        return inner, fwd, back

    def accepts_o(self, s: JSeq, m: Move, ptr: int) -> bool:
        if not is_legal(s.snoc(m, ptr), self.arena).ok:
            return False
        if m.dtag and m.dtag[0] == "0":
            return True
        inner, fwd, _ = self._maps(s)
        return self.base.accepts_o(inner, m, fwd.get(ptr, 0) if ptr else 0)

    def respond(self, s: JSeq) -> Optional[tuple[Move, int]]:
        last = s.move_at(len(s))
        if last.dtag and last.dtag[0] == "0":
            return None
        inner, _, back = self._maps(s)
        r = self.base.respond(inner)
        if r is None:
            return None
        n, lp = r
        if lp and lp not in back:
            return None
        return n, back[lp] if lp else 0


def _bullet(f_skel: Skeleton, g_skel: Skeleton, src: Ctx, cod_arena: Arena) -> Skeleton:
    """The oracle for g after f: g composed against the promotion of f."""

    out = _arrow(src.game.arena, cod_arena)
    if not isinstance(out, LollipopArena):
        # the target has no moves, so neither does the composite
        return _silent(out)
    if not isinstance(f_skel.arena, LollipopArena):
        # the middle context has no moves and is never consulted
        return _DeafDomain(g_skel, out)
    return compose(promotion(f_skel), g_skel)


def compose_morphisms(g: Morphism, f: Morphism) -> Morphism:
    if f.dst != g.src:
        raise JudgementError(
            f"morphisms do not meet: {f.dst.text} vs {g.src.text}"
        )
    skel = _bullet(f.skel, g.skel, f.src, g.dst.game.arena)
    return Morphism(f.src, g.dst, skel)


def terminal_morphism(ctx: Ctx) -> Morphism:
    """The unique morphism into the empty context."""

    dst = empty_ctx(ctx.variant)
    return Morphism(ctx, dst, _silent(_arrow(ctx.game.arena, dst.game.arena)))


def apply_point(f: Morphism, d: PStrategy) -> PStrategy:
    """The image of a point of the source under a morphism."""

    if not isinstance(f.skel.arena, LollipopArena):
        return PStrategy(_silent(f.dst.game.arena), f.dst.game)
    return PStrategy(pca_apply(f.skel, d.realizer), f.dst.game)


# ---------------------------------------------------------------------------
# substitution

def subst_ty(A: SemTy, f: Morphism) -> SemTy:
    """Reindex a type along a morphism: fibres at the translated points."""

    if A.ctx != f.dst:
        raise JudgementError("the type must live over the morphism's target")
    fam = A.family
    if fam.constant is not None:
        new = constant_family(f.src.game, fam.constant)
    else:
        def fib(d: PStrategy, _fam=fam, _f=f) -> PGame:
            return _fam.fiber(apply_point(_f, d))

        new = DepPGame(
            f.src.game,
            fib,
            text=fam.text,
            ambient=fam.ambient,
            rank_hint=fam.rank_hint,
        )
    return SemTy(f.src, new, "subst", (A, f))


def subst_tm(a: SemTm, f: Morphism) -> SemTm:
    if a.ctx != f.dst:
        raise JudgementError("the term must live over the morphism's target")
    ty = subst_ty(a.ty, f)
    skel = _bullet(f.skel, a.skel, f.src, _family_arena(ty))
    return SemTm(f.src, ty, skel)


def _retyped(a: SemTm, ty: SemTy) -> SemTm:
    # reseat a term on a type with the same fibres over the same context
    return SemTm(a.ctx, ty, a.skel)


# ---------------------------------------------------------------------------
# comprehension, projections, extension

def comprehension(gamma: Ctx, A: SemTy) -> Ctx:
    if A.ctx != gamma:
        raise JudgementError("the extension type must live over the context")
    return A.extended


def proj_p(A: SemTy) -> Morphism:
    """First projection: forget the last entry of an extended context."""

    src = A.extended
    arena = _arrow(src.game.arena, A.ctx.game.arena)
    if not isinstance(arena, LollipopArena):
        return Morphism(src, A.ctx, _silent(arena))

    def mirror(m: Move) -> Optional[Move]:
        try:
            inner, side = untag(m)
            if side == "right":
                return _dress_dom(retag(inner, "left"))
            bare, _ = _strip_dom(m)
            raw, bit = untag(bare)
        except ValueError:
            return None
        return retag(raw, "right") if bit == "left" else None

    return Morphism(src, A.ctx, MirrorSkeleton(arena, mirror))


def proj_v(A: SemTy) -> SemTm:
    """Last variable: read the final entry of an extended context."""

    src = A.extended
    vty = subst_ty(A, proj_p(A))
    arena = _arrow(src.game.arena, _family_arena(A))
    if not isinstance(arena, LollipopArena):
        return SemTm(src, vty, _silent(arena))

    def mirror(m: Move) -> Optional[Move]:
        try:
            inner, side = untag(m)
            if side == "right":
                return _dress_dom(retag(inner, "right"))
            bare, _ = _strip_dom(m)
            raw, bit = untag(bare)
        except ValueError:
            return None
        return retag(raw, "right") if bit == "right" else None

    return SemTm(src, vty, MirrorSkeleton(arena, mirror))


def _extension_type(f: Morphism, a: SemTm) -> SemTy:
    ty = a.ty
    if ty.shape == "subst" and ty.parts[1] is f:
        return ty.parts[0]
    if ty.ctx == f.dst:
        return ty
    raise JudgementError(
        "cannot infer the extension type; pass the type over the target"
    )


def _graft(base: Skeleton, arena: Arena, side: str) -> Skeleton:
    """Reuse an arrow oracle as the one live component of an extension whose
    other component has no moves."""

    def into(m: Move) -> Optional[Move]:
        if m.dtag and m.dtag[0] == "0":
            return m
        try:
            inner, _ = untag(m)
            raw, bit = untag(inner)
        except ValueError:
            return None
        return retag(raw, "right") if bit == side else None

    def out_of(m: Move) -> Optional[Move]:
        if m.dtag and m.dtag[0] == "0":
            return m
        try:
            inner, _ = untag(m)
        except ValueError:
            return None
        return retag(retag(inner, side), "right")

    from .skeleton import relabel

    return relabel(base, out_of, into, arena)


def extend(f: Morphism, a: SemTm, A: Optional[SemTy] = None) -> Morphism:
    """Pair a morphism with a section of the extension type: the universal
    map into the comprehension."""

    A = A if A is not None else _extension_type(f, a)
    if A.ctx != f.dst:
        raise JudgementError("the extension type must live over the target")
    if a.ctx != f.src:
        raise JudgementError("the section must live over the source")
    dst = A.extended
    out = _arrow(f.src.game.arena, dst.game.arena)
    if not isinstance(out, LollipopArena):
        return Morphism(f.src, dst, _silent(out))
    gamma_empty = f.dst.game.arena.is_empty()
    fam_empty = _family_arena(A).is_empty()
    if gamma_empty and not fam_empty:
        skel: Skeleton = _graft(a.skel, out, "right")
    elif fam_empty and not gamma_empty:
        skel = _graft(f.skel, out, "left")
    else:
        skel = pairing(f.skel, a.skel)
    return Morphism(f.src, dst, skel)


def point_of(a: SemTm) -> Morphism:
    """The section morphism a term induces into its comprehension."""

    return extend(identity(a.ctx), a, a.ty)


# ---------------------------------------------------------------------------
# equality of judgements

_TYPE_BOUND = ExplorationBound(max_len=8, max_copies=2, max_branch=6)


def same_morphism(
    f: Morphism, g: Morphism, bound: Optional[ExplorationBound] = None
) -> EquivReport:
    """Bounded equality of morphisms, probed inside the arrow game so both
    sides refuse the same out-of-discipline offers."""

    game = arrow(f.src.game, f.dst.game)
    return equiv_report(
        guard(f.skel, game), guard(g.skel, game), bound, arena=game.arena
    )


def same_term(
    a: SemTm, b: SemTm, bound: Optional[ExplorationBound] = None
) -> EquivReport:
    game = a.ty.tm_game()
    return equiv_report(
        guard(a.skel, game), guard(b.skel, game), bound, arena=game.arena
    )


def _same_pgame(g: PGame, h: PGame, bound: Optional[ExplorationBound]) -> bool:
    if g == h:
        return True
    if g.kind == h.kind and g.kind in ("pi", "sigma"):
        return _same_pgame(g.base, h.base, bound) and _same_family(
            g.base, g.family, h.family, bound
        )
    if g.kind == h.kind and g.kind == "id":
        return _same_pgame(g.inner, h.inner, bound)
    try:
        pg, _ = game_positions(forget(g), _TYPE_BOUND)
        ph, _ = game_positions(forget(h), _TYPE_BOUND)
    except PGameError:
        return False
    return pg == ph


def _same_family(
    base: PGame, famA: DepPGame, famB: DepPGame, bound: Optional[ExplorationBound]
) -> bool:
    if famA.text and famA.text == famB.text:
        return True
    if famA.constant is not None and famB.constant is not None:
        return _same_pgame(famA.constant, famB.constant, bound)
    pts = base.winning(bound or ExplorationBound())
    if not pts:
        pts = [w for w in (famA.witness, famB.witness) if w is not None][:1]
    if not pts:
        return True
    return all(
        _same_pgame(famA.fiber(d), famB.fiber(d), bound) for d in pts[:4]
    )


def same_type(
    A: SemTy, B: SemTy, bound: Optional[ExplorationBound] = None
) -> bool:
    """Bounded equality of types: textual identity when available, else
    fibrewise comparison at enumerable points of the context."""

    if A.ctx.game != B.ctx.game:
        return False
    return _same_family(A.ctx.game, A.family, B.family, bound)


# ---------------------------------------------------------------------------
# dependent products

def pi_form(A: SemTy, B: SemTy) -> SemTy:
    if B.ctx != A.extended:
        raise JudgementError("the fibre type must live over the extension")
    famA, famB = A.family, B.family
    text = f"Pi(x:{famA.text}).{famB.text}"
    if famA.constant is not None and famB.constant is not None:
        target = PiPGame(
            famA.constant, constant_family(famA.constant, famB.constant)
        )
        fam = constant_family(A.ctx.game, target)
    else:
        ext_game = A.extended.game

        def fib(g: PStrategy) -> PGame:
            base_g = famA.fiber(g)

            def inner_fib(x: PStrategy) -> PGame:
                pt = PStrategy(pairing(g.realizer, x.realizer), ext_game)
                return famB.fiber(pt)

            inner = DepPGame(
                base_g, inner_fib, text=famB.text, ambient=famB.ambient
            )
            return PiPGame(base_g, inner)

        fam = DepPGame(A.ctx.game, fib, text=text)
    return SemTy(A.ctx, fam, "pi", (A, B))


class _Alloc:
    """A growing bijection between packed threads (one exponential over a
    pair) and split threads (two nested exponentials), matched first come
    first assigned on both sides."""

    __slots__ = ("fwd", "rev")

    def __init__(self):
        self.fwd: dict[tuple[str, int], int] = {}
        self.rev: dict[int, tuple[str, int]] = {}

    def copy(self) -> "_Alloc":
        out = _Alloc.__new__(_Alloc)
        out.fwd = dict(self.fwd)
        out.rev = dict(self.rev)
        return out

    def sid(self, comp: str, cid: int) -> int:
        hit = self.fwd.get((comp, cid))
        if hit is not None:
            return hit
        n = 0
        while n in self.rev:
            n += 1
        self.fwd[(comp, cid)] = n
        self.rev[n] = (comp, cid)
        return n

    def cid(self, sid: int, comp: str) -> int:
        hit = self.rev.get(sid)
        if hit is not None:
            if hit[0] != comp:
                raise ValueError("a packed thread switched components")
            return hit[1]
        used = {c for (k, c) in self.fwd if k == comp}
        n = 0
        while n in used:
            n += 1
        self.fwd[(comp, n)] = sid
        self.rev[sid] = (comp, n)
        return n


def _to_packed(alloc: _Alloc, m: Move) -> Move:
    """A move of the split form rewritten to packed coordinates."""

    inner, side = untag(m)
    if side == "left":
        g, t = untag_exponential(flip_op(inner))
        return _dress_dom(retag(g, "left"), alloc.sid("ctx", t))
    y, side2 = untag(inner)
    if side2 == "right":
        return retag(y, "right")
    a, e = untag_exponential(flip_op(y))
    return _dress_dom(retag(a, "right"), alloc.sid("arg", e))


def _to_split(alloc: _Alloc, m: Move) -> Move:
    """A move of the packed form rewritten to split coordinates."""

    inner, side = untag(m)
    if side == "right":
        return retag(retag(inner, "right"), "right")
    bare, sid = untag_exponential(flip_op(inner))
    raw, bit = untag(bare)
    if bit == "left":
        return _dress_dom(raw, alloc.cid(sid, "ctx"))
    return retag(_dress_dom(raw, alloc.cid(sid, "arg")), "right")


class _CurryShuffle(Skeleton):
    """Currying as pure coordinate shuffling.

    The wrapped oracle plays the other presentation of the same function
    space; pointers carry over unchanged because corresponding openings
    hang off the same head question, and the thread bijection is rebuilt
    deterministically by replaying the position through the oracle.
    """

    def __init__(self, base: Skeleton, arena: Arena, curried: bool):
        self.base = base
        self.arena = arena
        self.curried = curried  # the presented side is the curried one
        self._rstate: Optional[tuple[JSeq, tuple[_Alloc, JSeq]]] = None

    def _inbound(self, alloc: _Alloc, m: Move) -> Move:
        return _to_packed(alloc, m) if self.curried else _to_split(alloc, m)

    def _outbound(self, alloc: _Alloc, m: Move) -> Move:
        return _to_split(alloc, m) if self.curried else _to_packed(alloc, m)

    def _replay(self, s: JSeq) -> tuple[_Alloc, JSeq]:
        state, start = None, 0
        cached = self._rstate
        if cached is not None:
            pos, cst = cached
            if (
                len(pos) <= len(s)
                and pos.moves == s.moves[: len(pos)]
                and pos.ptrs == s.ptrs[: len(pos)]
            ):
                state, start = cst, len(pos)
        if state is None:
            state = (_Alloc(), JSeq.empty())
        alloc, inner = state
        try:
            for i in range(start + 1, len(s) + 1):
                m, p = s.at(i)
                if i % 2:
                    inner = inner.snoc(self._inbound(alloc, m), p)
                else:
                    r = self.base.respond(inner)
                    if r is None:
                        raise SkeletonError("the oracle fell silent mid-replay")
                    n, lp = r
                    if lp != p or self._outbound(alloc, n) != m:
                        raise SkeletonError("replayed move disagrees with the oracle")
                    inner = inner.snoc(n, p)
        except (ValueError, KeyError):
            self._rstate = None
            raise
        self._rstate = (s, (alloc, inner))
        return alloc, inner

    def accepts_o(self, s: JSeq, m: Move, ptr: int) -> bool:
        if not is_legal(s.snoc(m, ptr), self.arena).ok:
            return False
        try:
            alloc, inner = self._replay(s)
            probe = self._inbound(alloc.copy(), m)
            return self.base.accepts_o(inner, probe, ptr)
        except (ValueError, KeyError):
            return False

    def respond(self, s: JSeq) -> Optional[tuple[Move, int]]:
        try:
            alloc, inner = self._replay(s)
        except (ValueError, KeyError):
            return None
        r = self.base.respond(inner)
        if r is None:
            return None
        n, p = r
        try:
            return self._outbound(alloc, n), p
        except ValueError:
            self._rstate = None
            return None


def lam(b: SemTm, A: SemTy) -> SemTm:
    """Abstract the last variable of a term over an extended context."""

    if b.ctx != A.extended:
        raise JudgementError("the body must live over the extension")
    k_ty = pi_form(A, b.ty)
    arena = k_ty.tm_game().arena
    if not isinstance(arena, LollipopArena):
        return SemTm(A.ctx, k_ty, _silent(arena))
    return SemTm(A.ctx, k_ty, _CurryShuffle(b.skel, arena, curried=True))


def lam_inv(k: SemTm) -> SemTm:
    """Read an abstraction back as a term over the extended context."""

    if k.ty.shape != "pi":
        raise JudgementError("only a dependent function term uncurries")
    A, B = k.ty.parts
    arena = B.tm_game().arena
    if not isinstance(arena, LollipopArena):
        return SemTm(A.extended, B, _silent(arena))
    return SemTm(A.extended, B, _CurryShuffle(k.skel, arena, curried=False))


def app(k: SemTm, a: SemTm) -> SemTm:
    """Apply a dependent function term to a term of its source type."""

    if k.ty.shape != "pi":
        raise JudgementError("application needs a dependent function term")
    A, _ = k.ty.parts
    abar = extend(identity(k.ctx), a, A)
    return subst_tm(lam_inv(k), abar)


# ---------------------------------------------------------------------------
# dependent sums

def sigma_form(A: SemTy, B: SemTy) -> SemTy:
    if B.ctx != A.extended:
        raise JudgementError("the fibre type must live over the extension")
    famA, famB = A.family, B.family
    text = f"Sigma(x:{famA.text}).{famB.text}"
    if famA.constant is not None and famB.constant is not None:
        target = SigmaPGame(
            famA.constant, constant_family(famA.constant, famB.constant)
        )
        fam = constant_family(A.ctx.game, target)
    else:
        ext_game = A.extended.game

        def fib(g: PStrategy) -> PGame:
            base_g = famA.fiber(g)

            def inner_fib(x: PStrategy) -> PGame:
                pt = PStrategy(pairing(g.realizer, x.realizer), ext_game)
                return famB.fiber(pt)

            inner = DepPGame(
                base_g, inner_fib, text=famB.text, ambient=famB.ambient
            )
            return SigmaPGame(base_g, inner)

        fam = DepPGame(A.ctx.game, fib, text=text)
    return SemTy(A.ctx, fam, "sigma", (A, B))


def pair_morphism(A: SemTy, B: SemTy) -> Morphism:
    """Regroup a two-step extension as an extension by the dependent sum."""

    if B.ctx != A.extended:
        raise JudgementError("the fibre type must live over the extension")
    src = B.extended
    dst = sigma_form(A, B).extended
    arena = _arrow(src.game.arena, dst.game.arena)
    if not isinstance(arena, LollipopArena):
        return Morphism(src, dst, _silent(arena))

    def mirror(m: Move) -> Optional[Move]:
        try:
            inner, side = untag(m)
            if side == "right":
                x, s1 = untag(inner)
                if s1 == "left":
                    return _dress_dom(retag(retag(x, "left"), "left"))
                y, s2 = untag(x)
                if s2 == "left":
                    return _dress_dom(retag(retag(y, "right"), "left"))
                return _dress_dom(retag(y, "right"))
            bare, _ = _strip_dom(m)
            z, b1 = untag(bare)
            if b1 == "right":
                return retag(retag(retag(z, "right"), "right"), "right")
            w, b2 = untag(z)
            if b2 == "left":
                return retag(retag(w, "left"), "right")
            return retag(retag(retag(w, "left"), "right"), "right")
        except ValueError:
            return None

    return Morphism(src, dst, MirrorSkeleton(arena, mirror))


def pair_inverse(A: SemTy, B: SemTy) -> Morphism:
    """Split an extension by a dependent sum into two extension steps."""

    if B.ctx != A.extended:
        raise JudgementError("the fibre type must live over the extension")
    src = sigma_form(A, B).extended
    dst = B.extended
    arena = _arrow(src.game.arena, dst.game.arena)
    if not isinstance(arena, LollipopArena):
        return Morphism(src, dst, _silent(arena))

    def mirror(m: Move) -> Optional[Move]:
        try:
            inner, side = untag(m)
            if side == "right":
                x, s1 = untag(inner)
                if s1 == "left":
                    z, s2 = untag(x)
                    if s2 == "left":
                        return _dress_dom(retag(z, "left"))
                    return _dress_dom(retag(retag(z, "left"), "right"))
                return _dress_dom(retag(retag(x, "right"), "right"))
            bare, _ = _strip_dom(m)
            z, b1 = untag(bare)
            if b1 == "left":
                return retag(retag(retag(z, "left"), "left"), "right")
            y, b2 = untag(z)
            if b2 == "left":
                return retag(retag(retag(y, "right"), "left"), "right")
            return retag(retag(y, "right"), "right")
        except ValueError:
            return None

    return Morphism(src, dst, MirrorSkeleton(arena, mirror))


def rec_sigma(h: SemTm, A: SemTy, B: SemTy) -> SemTm:
    """Eliminate a dependent sum by splitting it into its two entries."""

    return subst_tm(h, pair_inverse(A, B))


# ---------------------------------------------------------------------------
# natural numbers

def nat_form(ctx: Ctx) -> SemTy:
    return SemTy(ctx, constant_family(ctx.game, lifted("N")), "const", ())


def zero_term(ctx: Ctx) -> SemTm:
    ty = nat_form(ctx)
    arena = _arrow(ctx.game.arena, lifted("N").arena)

    def mirror(m: Move) -> Optional[Move]:
        try:
            inner, side = untag(m)
        except ValueError:
            return None
        if side == "right" and inner.is_question:
            return retag(Move(0, "", (), PA), "right")
        return None

    return SemTm(ctx, ty, MirrorSkeleton(arena, mirror))


def _shift_step(ctx_n: Ctx, delta: int) -> SemTm:
    """Ask the last variable for its numeral and answer a shifted one."""

    ty = nat_form(ctx_n)
    arena = _arrow(ctx_n.game.arena, lifted("N").arena)

    def mirror(m: Move) -> Optional[Move]:
        try:
            inner, side = untag(m)
            if side == "right":
                if inner.is_question:
                    return _dress_dom(retag(Move(QUESTION, "", (), OQ), "right"))
                return None
            bare, _ = _strip_dom(m)
            raw, bit = untag(bare)
        except ValueError:
            return None
        if bit == "right" and raw.is_answer and isinstance(raw.core, int):
            return retag(Move(max(raw.core + delta, 0), "", (), PA), "right")
        return None

    return SemTm(ctx_n, ty, MirrorSkeleton(arena, mirror))


def zero_morphism(ctx: Ctx) -> Morphism:
    return extend(identity(ctx), zero_term(ctx), nat_form(ctx))


def succ_morphism(ctx: Ctx) -> Morphism:
    """Shift the last numeral of an extended context up by one."""

    N = nat_form(ctx)
    return extend(proj_p(N), _shift_step(N.extended, 1), N)


def pred_morphism(ctx: Ctx) -> Morphism:
    """Shift the last numeral down by one, stopping at zero."""

    N = nat_form(ctx)
    return extend(proj_p(N), _shift_step(N.extended, -1), N)


def succ_of(t: SemTm) -> SemTm:
    """The successor of a natural number term, taken the official way: the
    last variable read back along the successor of the term's section."""

    ctx = t.ctx
    N = nat_form(ctx)
    step = compose_morphisms(succ_morphism(ctx), extend(identity(ctx), t, N))
    return subst_tm(proj_v(N), step)


def numeral_term(ctx: Ctx, n: int) -> SemTm:
    t = zero_term(ctx)
    for _ in range(n):
        t = succ_of(t)
    return t


def closed_numeral(t: SemTm) -> int:
    """Interrogate a closed natural number term for its value."""

    q = retag(Move(QUESTION, "", (), OQ), "right")
    r = t.skel.respond(JSeq.empty().snoc(q, 0))
    if r is None or not isinstance(r[0].core, int):
        raise PGameError("the term answers no numeral")
    return r[0].core


def _rethread(m: Move, delta: int) -> Optional[Move]:
    # move a domain move's head copy index; occurrence ids stay put
    if not (m.dtag and m.dtag[0] == "0" and m.etag):
        return None
    (t, occ), rest = m.etag[0], m.etag[1:]
    if t + delta < 0:
        return None
    return Move(m.core, m.dtag, ((t + delta, occ),) + rest, m.label)


class _CaseNatSkeleton(Skeleton):
    """Recursion on an interrogated numeral: ask the input first, then play
    on as the branch the answer picks, with the interrogation spliced out
    of the play handed to the branch.

    The scrutinee lives in domain thread 0; every branch thread is shifted
    up by one so a branch reading other context entries never lands in the
    pocket the interrogation already committed."""

    def __init__(self, arena: Arena):
        self.arena = arena
        self._zero_fn: Optional[Callable[[], Skeleton]] = None
        self._succ_fn: Optional[Callable[[], Skeleton]] = None
        self._zero: Optional[Skeleton] = None
        self._succ: Optional[Skeleton] = None

    def bind(self, zero_fn: Callable[[], Skeleton], succ_fn: Callable[[], Skeleton]) -> None:
        self._zero_fn = zero_fn
        self._succ_fn = succ_fn

    def _branch(self, n: int) -> Skeleton:
        if n == 0:
            if self._zero is None:
                self._zero = self._zero_fn()
            return self._zero
        if self._succ is None:
            self._succ = self._succ_fn()
        return self._succ

    def _question(self) -> Move:
        return _dress_dom(retag(Move(QUESTION, "", (), OQ), "right"))

    def _numeral(self, s: JSeq) -> Optional[int]:
        try:
            bare, thread = _strip_dom(s.move_at(3))
            raw, bit = untag(bare)
        except ValueError:
            return None
        if thread != 0 or bit != "right":
            return None
        if not raw.is_answer or not isinstance(raw.core, int):
            return None
        return raw.core

    def _inner(self, s: JSeq) -> Optional[JSeq]:
        out = JSeq.empty()
        for i, m, p in s.steps():
            if i in (2, 3):
                continue
            if p in (2, 3):
                return None
            if m.dtag and m.dtag[0] == "0":
                shifted = _rethread(m, -1)
                if shifted is None:
                    return None
                m = shifted
            out = out.snoc(m, p if p <= 1 else p - 2)
        return out

    def accepts_o(self, s: JSeq, m: Move, ptr: int) -> bool:
        if not is_legal(s.snoc(m, ptr), self.arena).ok:
            return False
        if len(s) == 0:
            return True
        if len(s) == 2:
            if ptr != 2:
                return False
            try:
                bare, thread = _strip_dom(m)
                raw, bit = untag(bare)
            except ValueError:
                return False
            return (
                thread == 0
                and bit == "right"
                and raw.is_answer
                and isinstance(raw.core, int)
            )
        if ptr in (2, 3):
            return False
        n = self._numeral(s)
        if n is None:
            return False
        inner = self._inner(s)
        if inner is None:
            return False
        if m.dtag and m.dtag[0] == "0":
            probe = _rethread(m, -1)
            if probe is None:
                return False
            m = probe
        return self._branch(n).accepts_o(inner, m, ptr if ptr <= 1 else ptr - 2)

    def respond(self, s: JSeq) -> Optional[tuple[Move, int]]:
        if len(s) == 1:
            return self._question(), 1
        if len(s) < 3:
            return None
        n = self._numeral(s)
        if n is None:
            return None
        inner = self._inner(s)
        if inner is None:
            return None
        r = self._branch(n).respond(inner)
        if r is None:
            return None
        mv, lp = r
        if mv.dtag and mv.dtag[0] == "0":
            shifted = _rethread(mv, 1)
            if shifted is None:
                return None
            mv = shifted
        return mv, lp if lp <= 1 else lp + 2


def rec_nat(P: SemTy, c_z: SemTm, c_s: SemTm) -> SemTm:
    """The recursor on naturals, demand driven: the numeral is interrogated
    once and the play continues as the selected branch, entering the step
    branch through the predecessor so recursion bottoms out."""

    ctx_n = P.ctx
    if ctx_n.ty is None or ctx_n.ty.family.text != "N":
        raise JudgementError("recursion needs a context extended by the naturals")
    gamma = ctx_n.parent
    if c_z.ctx != gamma:
        raise JudgementError("the zero branch must live over the base context")
    if c_s.ctx != P.extended:
        raise JudgementError("the step branch must live over the motive's extension")
    arena = _arrow(ctx_n.game.arena, _family_arena(P))
    if not isinstance(arena, LollipopArena):
        return SemTm(ctx_n, P, _silent(arena))

    case = _CaseNatSkeleton(arena)

    def zero_branch() -> Skeleton:
        return _bullet(
            proj_p(ctx_n.ty).skel, c_z.skel, ctx_n, _family_arena(c_z.ty)
        )

    def succ_branch() -> Skeleton:
        paired = pairing(dereliction(ctx_n.game.arena), case)
        inner = compose(promotion(paired), c_s.skel)
        return compose(promotion(pred_morphism(gamma).skel), inner)

    case.bind(zero_branch, succ_branch)
    return SemTm(ctx_n, P, case)


# ---------------------------------------------------------------------------
# unit and empty types

def unit_form(ctx: Ctx) -> SemTy:
    return SemTy(ctx, constant_family(ctx.game, lifted("1")), "const", ())


def star_term(ctx: Ctx) -> SemTm:
    ty = unit_form(ctx)
    return SemTm(ctx, ty, _silent(_arrow(ctx.game.arena, lifted("1").arena)))


def rec_unit(a: SemTm, t: SemTm) -> SemTm:
    """Eliminating the unit is the identity on the branch: every inhabitant
    is the trivial one, definitionally."""

    if t.ty.family.text != "1":
        raise JudgementError("the scrutinee must inhabit the unit type")
    return a


def empty_form(ctx: Ctx) -> SemTy:
    return SemTy(ctx, constant_family(ctx.game, lifted("0")), "const", ())


class _FromEmptySkeleton(Skeleton):
    """Replay a refutation of the context with our opening question standing
    in for the empty type's question; later moves pass through unchanged."""

    def __init__(self, base: Skeleton, arena: Arena, opening: Move):
        self.base = base
        self.arena = arena
        self._opening = opening

    def _inner(self, s: JSeq) -> JSeq:
        out = JSeq.empty()
        for i, m, p in s.steps():
            out = out.snoc(self._opening if i == 1 else m, p)
        return out

    def accepts_o(self, s: JSeq, m: Move, ptr: int) -> bool:
        if not is_legal(s.snoc(m, ptr), self.arena).ok:
            return False
        if len(s) == 0:
            return True
        return self.base.accepts_o(self._inner(s), m, ptr)

    def respond(self, s: JSeq) -> Optional[tuple[Move, int]]:
        r = self.base.respond(self._inner(s))
        if r is None:
            return None
        mv, p = r
        if mv.dtag and mv.dtag[0] == "1":
            # the refuter never answers its question, so nothing to translate
            return None
        return mv, p


def rec_zero(z: SemTm, A: SemTy) -> SemTm:
    """From a refutation of the context, a term of any type over it."""

    if z.ty.family.text != "0":
        raise JudgementError("the scrutinee must inhabit the empty type")
    if A.ctx != z.ctx:
        raise JudgementError("the target type must live over the same context")
    arena = _arrow(z.ctx.game.arena, _family_arena(A))
    if not isinstance(arena, LollipopArena):
        return SemTm(z.ctx, A, _silent(arena))
    opening = retag(Move(QUESTION, "", (), OQ), "right")
    return SemTm(z.ctx, A, _FromEmptySkeleton(z.skel, arena, opening))


# ---------------------------------------------------------------------------
# identity types

def id_family(A: SemTy) -> SemTy:
    """The family of equality games over a doubly extended context."""

    if not A.ctx.variant.identity:
        raise VariantError("identity types live in the model without universes")
    if A._id_family is not None:
        return A._id_family
    a_plus = subst_ty(A, proj_p(A))
    ctx2 = a_plus.extended
    pair_arena = A.extended.game.arena
    gamma_game = A.ctx.game
    fam_arena = _family_arena(A)
    fam = A.family

    def fib(d: PStrategy) -> PGame:
        left = side_slice(d.realizer, "left", pair_arena)
        second = side_slice(d.realizer, "right", fam_arena)
        first = side_slice(left, "right", fam_arena)
        g = side_slice(left, "left", gamma_game.arena)
        over = fam.fiber(PStrategy(g, gamma_game))
        return id_fiber(over, PStrategy(first, over), PStrategy(second, over))

    family = DepPGame(
        ctx2.game, fib, text=f"Id({fam.text})", ambient=lifted("0").arena
    )
    out = SemTy(ctx2, family, "id", (A,))
    A._id_family = out
    return out


def id_form(A: SemTy, a: SemTm, b: SemTm) -> SemTy:
    """The equality type of two terms, as the family pulled back along their
    sections."""

    fam = id_family(A)
    a_plus = fam.ctx.ty
    into_a = extend(identity(A.ctx), a, A)
    second = _retyped(b, subst_ty(a_plus, into_a))
    into_aa = extend(into_a, second, a_plus)
    return subst_ty(fam, into_aa)


class _ReflSkeleton(Skeleton):
    """The diagonal into an equality context: both copies of the extension
    mirror the same source entry, replies routed by the copy the play
    opened; the equality leaf itself has nothing to answer."""

    def __init__(self, arena: Arena):
        self.arena = arena

    @staticmethod
    def _opened_copy(s: JSeq) -> Optional[str]:
        for _, m, _ in s.steps():
            if not (m.dtag and m.dtag[0] == "1"):
                continue
            try:
                x, _ = untag(m)
                y, s1 = untag(x)
                if s1 == "right":
                    return None
                z, s2 = untag(y)
                if s2 == "right":
                    return "outer"
                _, s3 = untag(z)
            except ValueError:
                return None
            return "inner" if s3 == "right" else "base"
        return None

    def _mirror(self, s: JSeq, m: Move) -> Optional[Move]:
        try:
            if m.dtag and m.dtag[0] == "1":
                x, _ = untag(m)
                y, s1 = untag(x)
                if s1 == "right":
                    return None
                z, s2 = untag(y)
                if s2 == "right":
                    return _dress_dom(retag(z, "right"))
                return _dress_dom(z)
            bare, _ = _strip_dom(m)
            raw, bit = untag(bare)
            if bit == "left":
                return retag(
                    retag(retag(retag(raw, "left"), "left"), "left"), "right"
                )
            copy = self._opened_copy(s)
            if copy == "outer":
                return retag(retag(retag(raw, "right"), "left"), "right")
            if copy == "inner":
                return retag(
                    retag(retag(retag(raw, "right"), "left"), "left"), "right"
                )
            return None
        except ValueError:
            return None

    def respond(self, s: JSeq) -> Optional[tuple[Move, int]]:
        m, p = s.at(len(s))
        out = self._mirror(s, m)
        if out is None:
            return None
        return out, _mirror_ptr(s, p)


def refl_morphism(A: SemTy) -> Morphism:
    """The diagonal section: an extended context mapped into the equality
    context over its own last entry, twice."""

    fam = id_family(A)
    src = A.extended
    dst = fam.extended
    arena = _arrow(src.game.arena, dst.game.arena)
    if not isinstance(arena, LollipopArena):
        return Morphism(src, dst, _silent(arena))
    return Morphism(src, dst, _ReflSkeleton(arena))


def refl_inverse(A: SemTy) -> Morphism:
    """Collapse the equality context back onto the diagonal, reading the
    canonical copy of the duplicated entry."""

    fam = id_family(A)
    src = fam.extended
    dst = A.extended
    arena = _arrow(src.game.arena, dst.game.arena)
    if not isinstance(arena, LollipopArena):
        return Morphism(src, dst, _silent(arena))

    def mirror(m: Move) -> Optional[Move]:
        try:
            inner, side = untag(m)
            if side == "right":
                x, s1 = untag(inner)
                if s1 == "left":
                    return _dress_dom(retag(retag(retag(x, "left"), "left"), "left"))
                return _dress_dom(retag(retag(retag(x, "right"), "left"), "left"))
            bare, _ = _strip_dom(m)
            y, s1 = untag(bare)
            if s1 == "right":
                return None
            z, s2 = untag(y)
            if s2 == "right":
                return None
            w, s3 = untag(z)
        except ValueError:
            return None
        return retag(retag(w, s3), "right")

    return Morphism(src, dst, MirrorSkeleton(arena, mirror))


def rec_id(b: SemTm, A: SemTy) -> SemTm:
    """Eliminate an equality proof by collapsing onto the diagonal."""

    return subst_tm(b, refl_inverse(A))


# ---------------------------------------------------------------------------
# universes

def universe_form(ctx: Ctx, level: int) -> SemTy:
    if not ctx.variant.universes:
        raise VariantError("universes live in the model without identity types")
    return SemTy(ctx, constant_family(ctx.game, universe(level)), "const", ())


def _mentions_id(A: SemTy) -> bool:
    if A.shape == "id":
        return True
    if A.shape in ("pi", "sigma"):
        return _mentions_id(A.parts[0]) or _mentions_id(A.parts[1])
    if A.shape == "subst":
        return _mentions_id(A.parts[0])
    return "Id(" in A.family.text


def _code_term(ctx: Ctx, text: str) -> SemTm:
    g = decode(text)
    ty = universe_form(ctx, g.rank())
    arena = _arrow(ctx.game.arena, ty.family.constant.arena)
    answer = Move(Code(text), "", (), PA)

    def mirror(m: Move) -> Optional[Move]:
        try:
            inner, side = untag(m)
        except ValueError:
            return None
        if side == "right" and inner.is_question:
            return retag(answer, "right")
        return None

    return SemTm(ctx, ty, MirrorSkeleton(arena, mirror))


def _read_code(t: SemTm) -> str:
    q = retag(Move(QUESTION, "", (), OQ), "right")
    try:
        r = t.skel.respond(JSeq.empty().snoc(q, 0))
    except SkeletonError as err:
        raise RankError(f"the code cannot be read off: {err}") from err
    if r is None or not isinstance(r[0].core, Code):
        raise RankError("the handle answers no immediate code")
    return r[0].core.text


def en(A: SemTy) -> SemTm:
    """The code of a type, as a term of the appropriate universe."""

    if not A.ctx.variant.universes:
        raise VariantError("universes live in the model without identity types")
    if _mentions_id(A):
        raise RankError("identity games admit no universe code")
    if A.shape == "el":
        return A.parts[0]
    if A.shape == "subst":
        orig, f = A.parts
        return subst_tm(en(orig), f)
    fam = A.family
    if fam.constant is not None:
        return _code_term(A.ctx, code_of(fam.constant).text)
    if A.shape in ("pi", "sigma"):
        head = "Pi" if A.shape == "pi" else "Sigma"
        cu = _read_code(en(A.parts[0]))
        cv = _read_code(en(A.parts[1]))
        return _code_term(A.ctx, f"{head}(x:{cu}).{cv}")
    raise RankError(f"outside the code grammar: {fam.text or 'the family'}")


def el_ty(c: SemTm) -> SemTy:
    """The type a universe term codes for."""

    ctx = c.ctx
    if not ctx.variant.universes:
        raise VariantError("universes live in the model without identity types")
    try:
        text: Optional[str] = _read_code(c)
    except RankError:
        text = None
    if text is not None:
        return SemTy(ctx, constant_family(ctx.game, decode(text)), "el", (c,))

    def fib(d: PStrategy) -> PGame:
        point = PStrategy(pca_apply(c.skel, d.realizer), c.ty.family.constant)
        return el(point)

    fam = DepPGame(ctx.game, fib, text="El(..)")
    return SemTy(ctx, fam, "el", (c,))


def under_pi(u: SemTm, v: SemTm) -> SemTm:
    """Compose two universe codes into the code of a function type."""

    return _code_term(u.ctx, f"Pi(x:{_read_code(u)}).{_read_code(v)}")


def under_sigma(u: SemTm, v: SemTm) -> SemTm:
    """Compose two universe codes into the code of a pair type."""

    return _code_term(u.ctx, f"Sigma(x:{_read_code(u)}).{_read_code(v)}")


def at_level(t: SemTm, level: int) -> SemTm:
    """The same code read in a higher universe."""

    return SemTm(t.ctx, universe_form(t.ctx, level), t.skel)
