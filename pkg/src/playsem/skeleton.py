"""Deterministic strategies on arenas: trees of positions, mirrors, the
standard constructions (tensor, pairing, promotion), composition by hiding,
untyped application with its combinators, and the probing machinery that
checks constraints and equivalence up to a bound.

A skeleton answers odd positions with at most one move-with-pointer.  All
probing is bounded and reports truncation honestly, so callers can tell a
certified verdict from one that merely held as far as the search went.
"""

from __future__ import annotations

import hashlib
from collections import deque
from dataclasses import dataclass
from typing import Callable, Optional

from .arena import (
    Arena,
    BangArena,
    EnumCaps,
    LollipopArena,
    Move,
    bang_arena,
    bang_tag,
    flip_op,
    lollipop_arena,
    move_text,
    pair_nat,
    retag,
    sum_arena,
    terminal_arena,
    universal_arena,
    unpair_nat,
    untag,
    untag_exponential,
)
from .position import (
    DANGLING,
    JSeq,
    canonical_tables,
    canonicalize,
    is_legal,
    is_well_bracketed,
    p_view,
)


class SkeletonError(ValueError):
    """A position set or request does not describe a deterministic strategy."""


class ChatterError(RuntimeError):
    """Hidden interaction exceeded the step budget without surfacing."""


@dataclass(frozen=True)
class ExplorationBound:
    """Budget for bounded probing: total position length, copy indices to
    enumerate, and branches kept per frontier."""

    max_len: int = 64
    max_copies: int = 4
    max_branch: int = 8

    def caps(self) -> EnumCaps:
        return EnumCaps(self.max_copies, self.max_branch)


@dataclass(frozen=True)
class Verdict:
    status: str  # "holds-to-bound" | "violated" | "unknown"
    witness: Optional[JSeq] = None


@dataclass(frozen=True)
class ConstraintReport:
    total: Verdict
    innocent: Verdict
    well_bracketed: Verdict
    noetherian: Verdict
    bound: ExplorationBound


@dataclass(frozen=True)
class Exploration:
    evens: tuple[JSeq, ...]
    stuck_odd: tuple[JSeq, ...]
    truncated: bool


@dataclass(frozen=True)
class EquivReport:
    equal: bool
    witness: Optional[tuple[JSeq, JSeq]]
    truncated: bool


def seq_text(s: JSeq) -> str:
    if not s:
        return "(empty)"
    return "; ".join(f"{i}: {move_text(m)} -> {p}" for i, m, p in s.steps())


# ---------------------------------------------------------------------------
# the skeleton interface

class Skeleton:
    """A deterministic strategy presented as an oracle on odd positions."""

    arena: Arena

    def accepts_o(self, s: JSeq, m: Move, ptr: int) -> bool:
        """Whether the environment may extend the even position s with m."""

        return is_legal(s.snoc(m, ptr), self.arena).ok

    def respond(self, s: JSeq) -> Optional[tuple[Move, int]]:
        """The unique answer to the odd position s, or None when stuck."""

        raise NotImplementedError

    def member(self, s: JSeq) -> bool:
        """Replay s step by step and check every response along the way."""

        if len(s) % 2:
            return False
        try:
            for k in range(0, len(s), 2):
                m, p = s.at(k + 1)
                if not self.accepts_o(s.prefix(k), m, p):
                    return False
                if self.respond(s.prefix(k + 1)) != s.at(k + 2):
                    return False
        except SkeletonError:
            return False
        return True


def _guarded_response(
    skel: Skeleton, s: JSeq, m: Move, ptr: int
) -> Optional[tuple[Move, int]]:
    try:
        if not skel.accepts_o(s, m, ptr):
            return None
        return skel.respond(s.snoc(m, ptr))
    except SkeletonError:
        return None


def _accepts(skel: Skeleton, s: JSeq, m: Move, ptr: int) -> bool:
    try:
        return skel.accepts_o(s, m, ptr)
    except SkeletonError:
        return False


# ---------------------------------------------------------------------------
# trees of positions

class _TreeSkeleton(Skeleton):
    def __init__(self, responses: dict[JSeq, tuple[Move, int]], arena: Arena):
        self.arena = arena
        self._responses = responses

    def respond(self, s: JSeq) -> Optional[tuple[Move, int]]:
        return self._responses.get(s)


def tree_form(positions, arena: Arena) -> Skeleton:
    """Build the skeleton whose plays are exactly the given even positions.

    The set must contain the empty position, be closed under even prefixes,
    stay legal in the arena, and answer each odd prefix in one way.
    """

    stored = set(positions)
    if JSeq.empty() not in stored:
        raise SkeletonError("the empty position is missing")
    responses: dict[JSeq, tuple[Move, int]] = {}
    for s in stored:
        if len(s) % 2:
            raise SkeletonError(f"odd-length position stored: {seq_text(s)}")
        report = is_legal(s, arena)
        if not report.ok:
            raise SkeletonError(
                f"{report.violation} violation at {report.index}: {seq_text(s)}"
            )
        if s and s.prefix(len(s) - 2) not in stored:
            raise SkeletonError(f"not closed under even prefixes: {seq_text(s)}")
        if not s:
            continue
        odd = s.prefix(len(s) - 1)
        answer = s.at(len(s))
        old = responses.setdefault(odd, answer)
        if old != answer:
            raise SkeletonError(
                f"two answers at {seq_text(odd)}: "
                f"{move_text(old[0])} -> {old[1]} vs "
                f"{move_text(answer[0])} -> {answer[1]}"
            )
    return _TreeSkeleton(responses, arena)


# ---------------------------------------------------------------------------
# mirrors

class MirrorSkeleton(Skeleton):
    """Answers by translating the stimulus move; the default pointer rule
    pairs each response with the mirror image of the stimulus pointer."""

    def __init__(
        self,
        arena: Arena,
        mirror: Callable[[Move], Optional[Move]],
        pointer_rule: Optional[Callable[[JSeq, Move], int]] = None,
    ):
        self.arena = arena
        self.mirror = mirror
        self.pointer_rule = pointer_rule

    def respond(self, s: JSeq) -> Optional[tuple[Move, int]]:
        m, p = s.at(len(s))
        out = self.mirror(m)
        if out is None:
            return None
        if self.pointer_rule is not None:
            return out, self.pointer_rule(s, out)
        if p == 0:
            return out, len(s)
        return out, (p + 1 if p % 2 == 1 else p - 1)


def copy_cat(arena: Arena) -> Skeleton:
    """The strategy on A -o A that echoes each side into the other."""

    big = lollipop_arena(arena, arena)

    def mirror(m: Move) -> Move:
        inner, side = untag(m)
        return retag(flip_op(inner), "left" if side == "right" else "right")

    return MirrorSkeleton(big, mirror)


def dereliction(arena: Arena, index: int = 0) -> Skeleton:
    """Copy-cat between !A and A played inside one fixed copy."""

    big = lollipop_arena(bang_arena(arena), arena)

    def mirror(m: Move) -> Move:
        inner, side = untag(m)
        if side == "right":
            return retag(flip_op(bang_tag(inner, index)), "left")
        bare, _ = untag_exponential(flip_op(inner))
        return retag(bare, "right")

    return MirrorSkeleton(big, mirror)


# ---------------------------------------------------------------------------
# component-routing constructions

class _SplitSkeleton(Skeleton):
    """Base for skeletons that route each move of a compound arena to a
    component skeleton playing in its own coordinates."""

    def _route(self, comps: list, m: Move, ptr: int):
        raise NotImplementedError

    def _extract(self, key, m: Move) -> Move:
        raise NotImplementedError

    def _embed(self, key, m: Move) -> Move:
        raise NotImplementedError

    def _part(self, key) -> Skeleton:
        raise NotImplementedError

    def _replay(self, s: JSeq):
        # resume from the cached state when s extends the position it covers
        state, start = None, 0
        cached = getattr(self, "_rstate", None)
        if cached is not None:
            pos, cstate = cached
            if (
                len(pos) <= len(s)
                and pos.moves == s.moves[: len(pos)]
                and pos.ptrs == s.ptrs[: len(pos)]
            ):
                state, start = cstate, len(pos)
        if state is None:
            state = ([], {}, {})
        comps, locals_, origins = state
        try:
            for i in range(start + 1, len(s) + 1):
                m, p = s.at(i)
                key = self._route(comps, m, p)
                local = locals_.get(key, JSeq.empty())
                if p != 0 and comps[p - 1] == key:
                    lp = origins[key].index(p) + 1
                else:
                    lp = 0
                comps.append(key)
                locals_[key] = local.snoc(self._extract(key, m), lp)
                origins.setdefault(key, []).append(i)
        except (ValueError, KeyError):
            self._rstate = None
            raise
        self._rstate = (s, state)
        return comps, locals_, origins

    def accepts_o(self, s: JSeq, m: Move, ptr: int) -> bool:
        if not is_legal(s.snoc(m, ptr), self.arena).ok:
            return False
        try:
            comps, locals_, origins = self._replay(s)
            key = self._route(comps, m, ptr)
            local = locals_.get(key, JSeq.empty())
            if ptr != 0 and comps[ptr - 1] == key:
                lp = origins[key].index(ptr) + 1
            else:
                lp = 0
            return self._part(key).accepts_o(local, self._extract(key, m), lp)
        except (ValueError, KeyError):
            return False

    def respond(self, s: JSeq) -> Optional[tuple[Move, int]]:
        try:
            comps, locals_, origins = self._replay(s)
        except (ValueError, KeyError):
            return None
        key = comps[-1]
        r = self._part(key).respond(locals_[key])
        if r is None:
            return None
        n, lp = r
        gp = origins[key][lp - 1] if lp > 0 else 0
        return self._embed(key, n), gp


class _TensorSkeleton(_SplitSkeleton):
    """Interleaving of two strategies, with disjoint coordinates."""

    def __init__(self, phi: Skeleton, psi: Skeleton, arena: Arena, shaped: bool):
        self.arena = arena
        self.phi = phi
        self.psi = psi
        self.shaped = shaped  # components are -o strategies sharing the shape

    def _key_bit(self, m: Move) -> str:
        return m.dtag[1] if self.shaped else m.dtag[0]

    def _route(self, comps, m, ptr):
        return "left" if self._key_bit(m) == "0" else "right"

    def _extract(self, key, m):
        if not self.shaped:
            return untag(m)[0]
        inner, first = untag(m)
        return retag(untag(inner)[0], first)

    def _embed(self, key, m):
        if not self.shaped:
            return retag(m, key)
        inner, first = untag(m)
        return retag(retag(inner, key), first)

    def _part(self, key):
        return self.phi if key == "left" else self.psi


class _PairingSkeleton(_SplitSkeleton):
    """Offers both components but commits to the one opened first."""

    def __init__(self, phi: Skeleton, psi: Skeleton, arena: Arena, shaped: bool):
        self.arena = arena
        self.phi = phi
        self.psi = psi
        self.shaped = shaped

    def _route(self, comps, m, ptr):
        if self.shaped and m.dtag[0] == "0":
            # the shared domain belongs to whichever side was opened
            if not comps:
                raise SkeletonError("domain move before any opening")
            return comps[0]
        bit = untag(untag(m)[0])[1] if self.shaped else untag(m)[1]
        key = bit
        if comps and comps[0] != key:
            raise SkeletonError("both components of a pairing were opened")
        return key

    def _extract(self, key, m):
        if not self.shaped:
            return untag(m)[0]
        if m.dtag[0] == "0":
            return m
        inner, first = untag(m)
        return retag(untag(inner)[0], first)

    def _embed(self, key, m):
        if not self.shaped:
            return retag(m, key)
        if m.dtag[0] == "0":
            return m
        inner, first = untag(m)
        return retag(retag(inner, key), first)

    def _part(self, key):
        return self.phi if key == "left" else self.psi


class _DaggerSkeleton(_SplitSkeleton):
    """Promotion: one copy of a strategy on !A -o B per codomain thread,
    with the domain copies spread out by the pairing of naturals."""

    def __init__(self, base: Skeleton, arena: Arena):
        self.arena = arena
        self.base = base

    def _route(self, comps, m, ptr):
        if m.dtag[0] == "1":
            return untag_exponential(untag(m)[0])[1]
        _, k = untag_exponential(flip_op(untag(m)[0]))
        return unpair_nat(k)[0]

    def _extract(self, key, m):
        if m.dtag[0] == "1":
            return retag(untag_exponential(untag(m)[0])[0], "right")
        bare, k = untag_exponential(flip_op(untag(m)[0]))
        return retag(flip_op(bang_tag(bare, unpair_nat(k)[1])), "left")

    def _embed(self, key, m):
        if m.dtag[0] == "1":
            return retag(bang_tag(untag(m)[0], key), "right")
        bare, j = untag_exponential(flip_op(untag(m)[0]))
        return retag(flip_op(bang_tag(bare, pair_nat(key, j))), "left")

    def _part(self, key):
        return self.base


class _ThreadedPoint(_SplitSkeleton):
    """A strategy replicated over the threads of a right-tagged exponential;
    the shape untyped application expects of its argument."""

    def __init__(self, base: Skeleton):
        self.arena = universal_arena()
        self.base = base

    def _route(self, comps, m, ptr):
        inner, side = untag(m)
        if side != "right":
            raise SkeletonError("argument moves carry the right tag")
        return untag_exponential(inner)[1]

    def _extract(self, key, m):
        return untag_exponential(untag(m)[0])[0]

    def _embed(self, key, m):
        return retag(bang_tag(m, key), "right")

    def _part(self, key):
        return self.base


def tensor(phi: Skeleton, psi: Skeleton) -> Skeleton:
    if isinstance(phi.arena, LollipopArena) and isinstance(psi.arena, LollipopArena):
        arena = lollipop_arena(
            sum_arena(phi.arena.dom, psi.arena.dom),
            sum_arena(phi.arena.cod, psi.arena.cod),
        )
        return _TensorSkeleton(phi, psi, arena, shaped=True)
    arena = sum_arena(phi.arena, psi.arena)
    return _TensorSkeleton(phi, psi, arena, shaped=False)


def pairing(phi: Skeleton, psi: Skeleton) -> Skeleton:
    if isinstance(phi.arena, LollipopArena) and isinstance(psi.arena, LollipopArena):
        arena = lollipop_arena(
            phi.arena.dom, sum_arena(phi.arena.cod, psi.arena.cod)
        )
        return _PairingSkeleton(phi, psi, arena, shaped=True)
    arena = sum_arena(phi.arena, psi.arena)
    return _PairingSkeleton(phi, psi, arena, shaped=False)


def promotion(phi: Skeleton) -> Skeleton:
    arena = phi.arena
    if not (isinstance(arena, LollipopArena) and isinstance(arena.dom, BangArena)):
        raise SkeletonError("promotion needs a strategy on !A -o B")
    big = lollipop_arena(arena.dom, bang_arena(arena.cod))
    return _DaggerSkeleton(phi, big)


def argument_form(x: Skeleton) -> Skeleton:
    """x replicated across threads, tagged as the argument of an application."""

    return _ThreadedPoint(x)


# ---------------------------------------------------------------------------
# relabelling wrappers

class _RelabelSkeleton(Skeleton):
    """Presents a skeleton through a bijective move translation."""

    def __init__(
        self,
        base: Skeleton,
        out_of: Callable[[Move], Optional[Move]],
        into: Callable[[Move], Optional[Move]],
        arena: Arena,
    ):
        self.base = base
        self.out_of = out_of
        self.into = into
        self.arena = arena

    def _translate(self, s: JSeq) -> Optional[JSeq]:
        moves = []
        for m in s.moves:
            im = self.into(m)
            if im is None:
                return None
            moves.append(im)
        return JSeq(tuple(moves), s.ptrs)

    def accepts_o(self, s: JSeq, m: Move, ptr: int) -> bool:
        inner = self._translate(s)
        im = self.into(m)
        if inner is None or im is None:
            return False
        return self.base.accepts_o(inner, im, ptr)

    def respond(self, s: JSeq) -> Optional[tuple[Move, int]]:
        inner = self._translate(s)
        if inner is None:
            return None
        r = self.base.respond(inner)
        if r is None:
            return None
        out = self.out_of(r[0])
        if out is None:
            return None
        return out, r[1]


def relabel(
    base: Skeleton,
    out_of: Callable[[Move], Optional[Move]],
    into: Callable[[Move], Optional[Move]],
    arena: Arena,
) -> Skeleton:
    """Present a skeleton through a bijective move translation.

    `into` maps moves of the new arena to moves of the base skeleton and
    `out_of` inverts it on the base's responses; either may return None to
    refuse a move outside its half of the bijection.
    """

    return _RelabelSkeleton(base, out_of, into, arena)


def _as_point(phi: Skeleton) -> Skeleton:
    """View a strategy on A as one on T -o A by tagging every move right."""

    def into(m: Move) -> Optional[Move]:
        if not m.dtag or m.dtag[0] != "1":
            return None
        try:
            return untag(m)[0]
        except ValueError:
            return None

    return _RelabelSkeleton(
        phi,
        out_of=lambda m: retag(m, "right"),
        into=into,
        arena=lollipop_arena(terminal_arena(), phi.arena),
    )


def _unwrap_right(comp: Skeleton, arena: Arena) -> Skeleton:
    """Strip the right tag from a composite whose externals all carry it."""

    def out_of(m: Move) -> Optional[Move]:
        try:
            inner, side = untag(m)
        except ValueError:
            return None
        return inner if side == "right" else None

    return _RelabelSkeleton(
        comp, out_of=out_of, into=lambda m: retag(m, "right"), arena=arena
    )


# ---------------------------------------------------------------------------
# composition by hiding

@dataclass
class _Half:
    pos: JSeq
    glob: list  # local index -> interaction step
    ext: list  # local index -> composite index, or None for hidden moves
    partner: list  # local index -> the seam twin's local index in the other half


@dataclass
class _CState:
    phi: _Half
    psi: _Half
    comp: JSeq
    ext_owner: list  # composite index -> (side, local index)
    steps: int


def _seam_cross(m: Move) -> Move:
    """Flip the outermost side layer and the owner: how a hidden move of one
    factor reappears as the environment's move of the other."""

    inner, side = untag(m)
    return retag(flip_op(inner), "left" if side == "right" else "right")


class ComposeSkeleton(Skeleton):
    """phi then psi with the shared middle hidden; the composite replays the
    interaction on demand and caches it per reached position."""

    def __init__(self, phi: Skeleton, psi: Skeleton, arena: Arena, step_cap: int = 10000):
        self.phi = phi
        self.psi = psi
        self.arena = arena
        self.step_cap = step_cap
        self._cache: dict[JSeq, _CState] = {
            JSeq.empty(): _CState(
                _Half(JSeq.empty(), [], [], []),
                _Half(JSeq.empty(), [], [], []),
                JSeq.empty(),
                [],
                0,
            )
        }

    def _copy(self, st: _CState) -> _CState:
        return _CState(
            _Half(st.phi.pos, list(st.phi.glob), list(st.phi.ext), list(st.phi.partner)),
            _Half(st.psi.pos, list(st.psi.glob), list(st.psi.ext), list(st.psi.partner)),
            st.comp,
            list(st.ext_owner),
            st.steps,
        )

    def _state(self, s: JSeq) -> _CState:
        cached = self._cache.get(s)
        if cached is not None:
            return cached
        prev = self._state(s.prefix(len(s) - 2))
        st = self._copy(prev)
        m, p = s.at(len(s) - 1)
        side = self._inject(st, m, p)
        got = self._run(st, side) if side is not None else None
        if got != s.at(len(s)):
            raise SkeletonError(f"not a play of this composite: {seq_text(s)}")
        self._cache[s] = st
        return st

    def _half(self, st: _CState, side: str) -> tuple[_Half, Skeleton]:
        if side == "phi":
            return st.phi, self.phi
        return st.psi, self.psi

    def _lift(self, st: _CState, m: Move, p: int) -> Optional[int]:
        # an environment move in the left factor hanging off an external move
        # of the right factor: find the matching left-factor opening
        found = None
        for j, mj, pj in st.phi.pos.steps():
            if pj != 0 or not mj.dtag or mj.dtag[0] != "1":
                continue
            q = st.phi.partner[j - 1]
            if q is None:
                continue
            r = st.psi.pos.ptr_at(q)
            if r == 0 or st.psi.ext[r - 1] != p:
                continue
            if self.phi.accepts_o(st.phi.pos, m, j):
                found = j
        return found

    def _inject(self, st: _CState, m: Move, p: int) -> Optional[str]:
        if not m.dtag:
            return None
        if not is_legal(st.comp.snoc(m, p), self.arena).ok:
            return None
        side = "phi" if m.dtag[0] == "0" else "psi"
        half, skel = self._half(st, side)
        if p == 0:
            if side == "phi":
                return None
            lp = 0
        else:
            oside, oloc = st.ext_owner[p - 1]
            if oside == side:
                lp = oloc
            elif side == "phi":
                lifted = self._lift(st, m, p)
                if lifted is None:
                    return None
                lp = lifted
            else:
                return None
        if not skel.accepts_o(half.pos, m, lp):
            return None
        half.pos = half.pos.snoc(m, lp)
        st.steps += 1
        half.glob.append(st.steps)
        half.ext.append(len(st.comp) + 1)
        half.partner.append(None)
        st.comp = st.comp.snoc(m, p)
        st.ext_owner.append((side, len(half.pos)))
        return side

    def _resolve_ext(self, st: _CState, side: str, lp: int) -> int:
        # walk the justification chain across the seam until an external
        # move gives the composite pointer
        cur_side, cur = side, lp
        while cur != 0:
            half, _ = self._half(st, cur_side)
            e = half.ext[cur - 1]
            if e is not None:
                return e
            q = half.partner[cur - 1]
            other_side = "psi" if cur_side == "phi" else "phi"
            other, _ = self._half(st, other_side)
            nxt = other.pos.ptr_at(q)
            if nxt == 0:
                cur = half.pos.ptr_at(cur)
            else:
                cur_side, cur = other_side, nxt
        return 0

    def _run(self, st: _CState, side: str) -> Optional[tuple[Move, int]]:
        while True:
            if st.steps >= self.step_cap:
                raise ChatterError(
                    f"no external move after {self.step_cap} interaction steps"
                )
            half, skel = self._half(st, side)
            r = skel.respond(half.pos)
            if r is None:
                return None
            n, lp = r
            internal = (n.dtag[0] == "1") if side == "phi" else (n.dtag[0] == "0")
            half.pos = half.pos.snoc(n, lp)
            st.steps += 1
            half.glob.append(st.steps)
            if not internal:
                jext = self._resolve_ext(st, side, lp)
                half.ext.append(len(st.comp) + 1)
                half.partner.append(None)
                st.comp = st.comp.snoc(n, jext)
                st.ext_owner.append((side, len(half.pos)))
                return n, jext
            half.ext.append(None)
            crossed = _seam_cross(n)
            other_side = "psi" if side == "phi" else "phi"
            other, _ = self._half(st, other_side)
            if side == "psi" and half.pos.move_at(lp).dtag[0] == "1":
                # a fresh question for the left factor's codomain
                cp = 0
            else:
                cp = half.partner[lp - 1]
            if cp is None:
                half.partner.append(None)
                return None
            half.partner.append(len(other.pos) + 1)
            other.pos = other.pos.snoc(crossed, cp)
            st.steps += 1
            other.glob.append(st.steps)
            other.ext.append(None)
            other.partner.append(len(half.pos))
            side = other_side

    def accepts_o(self, s: JSeq, m: Move, ptr: int) -> bool:
        try:
            st = self._copy(self._state(s))
        except SkeletonError:
            return False
        return self._inject(st, m, ptr) is not None

    def respond(self, s: JSeq) -> Optional[tuple[Move, int]]:
        st = self._copy(self._state(s.prefix(len(s) - 1)))
        m, p = s.at(len(s))
        side = self._inject(st, m, p)
        if side is None:
            return None
        return self._run(st, side)

    def interaction_for(self, s: JSeq) -> JSeq:
        """The dressed interaction whose external part is s."""

        st = self._state(s)
        where: dict[int, tuple[str, int]] = {}
        for side in ("phi", "psi"):
            half, _ = self._half(st, side)
            for k, g in enumerate(half.glob):
                where[g] = (side, k + 1)
        moves, ptrs = [], []
        for g in range(1, st.steps + 1):
            side, li = where[g]
            half, _ = self._half(st, side)
            m = half.pos.move_at(li)
            lp = half.pos.ptr_at(li)
            moves.append(retag(m, "left" if side == "phi" else "right"))
            if lp != 0:
                ptrs.append(half.glob[lp - 1])
            elif side == "psi":
                ptrs.append(0)
            else:
                ptrs.append(st.psi.glob[half.partner[li - 1] - 1])
        return JSeq(tuple(moves), tuple(ptrs))


def compose(phi: Skeleton, psi: Skeleton, step_cap: int = 10000) -> Skeleton:
    """phi followed by psi, hiding the shared middle arena."""

    if not isinstance(psi.arena, LollipopArena):
        raise SkeletonError("the right factor must be a strategy on B -o C")
    if isinstance(phi.arena, LollipopArena):
        arena = lollipop_arena(phi.arena.dom, psi.arena.cod)
        return ComposeSkeleton(phi, psi, arena, step_cap)
    point = _as_point(phi)
    comp = ComposeSkeleton(
        point, psi, lollipop_arena(terminal_arena(), psi.arena.cod), step_cap
    )
    return _unwrap_right(comp, psi.arena.cod)


def compose_untyped(phi: Skeleton, psi: Skeleton, step_cap: int = 10000) -> Skeleton:
    """Composition over the permissive arena, for strategies that manage
    their own tagging; phi plays right-tagged, psi consumes left-tagged."""

    return ComposeSkeleton(phi, psi, universal_arena(), step_cap)


def kleisli(phi: Skeleton, psi: Skeleton, step_cap: int = 10000) -> Skeleton:
    """Composition through the exponential: promote phi, then run psi."""

    return compose(promotion(phi), psi, step_cap)


# ---------------------------------------------------------------------------
# untyped application and the combinators

def pca_apply(f: Skeleton, x: Skeleton, step_cap: int = 10000) -> Skeleton:
    """Apply f to x: thread x across the argument copies, compose, and strip
    the result tag."""

    comp = compose_untyped(argument_form(x), f, step_cap)
    return _unwrap_right(comp, universal_arena())


def pca_k() -> Skeleton:
    """The combinator that returns its first argument: mirrors the result
    slot into thread 0 of the first argument and back."""

    def mirror(m: Move) -> Optional[Move]:
        d = m.dtag
        if d.startswith("11"):
            v = untag(untag(m)[0])[0]
            return retag(flip_op(bang_tag(v, 0)), "left")
        if d.startswith("0"):
            bare, _ = untag_exponential(untag(m)[0])
            return retag(retag(flip_op(bare), "right"), "right")
        return None

    return MirrorSkeleton(universal_arena(), mirror)


# the slot embeddings for the substitution combinator: x sits under "0" with
# its own argument and result layers, y under "10", z under "110", and the
# overall result under "111"

def _bang_in(v: Move, i: int) -> Move:
    return retag(flip_op(bang_tag(v, i)), "left")


def _bang_out(m: Move) -> tuple[Move, int]:
    return untag_exponential(flip_op(untag(m)[0]))


def _s_res(v: Move) -> Move:
    return retag(retag(retag(v, "right"), "right"), "right")


def _s_x(v: Move) -> Move:
    return _bang_in(retag(retag(v, "right"), "right"), 0)


def _s_x_arg(v: Move, t: int) -> Move:
    return _bang_in(_bang_in(v, t), 0)


def _s_x_mid(v: Move, t: int) -> Move:
    return _bang_in(retag(_bang_in(v, t), "right"), 0)


def _s_y(v: Move, t: int) -> Move:
    return retag(_bang_in(retag(v, "right"), t), "right")


def _s_y_arg(v: Move, t: int, u: int) -> Move:
    return retag(_bang_in(_bang_in(v, u), t), "right")


def _s_z(v: Move, t: int) -> Move:
    return retag(retag(_bang_in(v, t), "right"), "right")


def _peel_res(m: Move) -> Move:
    return untag(untag(untag(m)[0])[0])[0]


def _peel_x(m: Move) -> tuple[str, Move, int]:
    w, _ = _bang_out(m)
    d = w.dtag
    if d.startswith("11"):
        return "res", untag(untag(w)[0])[0], 0
    if d.startswith("10"):
        v, t = _bang_out(untag(w)[0])
        return "mid", v, t
    v, t = _bang_out(w)
    return "arg", v, t


def _peel_y(m: Move) -> tuple[str, Move, int, int]:
    y, t = _bang_out(untag(m)[0])
    if y.dtag.startswith("1"):
        return "cod", untag(y)[0], t, 0
    v, u = _bang_out(y)
    return "arg", v, t, u


def _peel_z(m: Move) -> tuple[Move, int]:
    return _bang_out(untag(untag(m)[0])[0])


def _slot_thread(m: Move):
    d = m.dtag
    if d.startswith("110"):
        return "z", _peel_z(m)[1]
    if d.startswith("10"):
        return "y", _bang_out(untag(m)[0])[1]
    return None


def pca_s() -> Skeleton:
    """The substitution combinator: feeds the shared argument to both of its
    function arguments and relays their conversation."""

    def mirror(m: Move) -> Optional[Move]:
        d = m.dtag
        if d.startswith("111"):
            return _s_x(_peel_res(m))
        if d.startswith("110"):
            v, t = _peel_z(m)
            i, rest = unpair_nat(t)
            if i == 0:
                return _s_x_arg(v, rest)
            j, u = unpair_nat(rest)
            return _s_y_arg(v, j, u)
        if d.startswith("10"):
            kind, v, t, u = _peel_y(m)
            if kind == "cod":
                return _s_x_mid(v, t)
            return _s_z(v, pair_nat(1, pair_nat(t, u)))
        if d.startswith("0"):
            kind, v, t = _peel_x(m)
            if kind == "res":
                return _s_res(v)
            if kind == "mid":
                return _s_y(v, t)
            return _s_z(v, pair_nat(0, t))
        return None

    def pointer_rule(t: JSeq, out: Move) -> int:
        key = _slot_thread(out)
        if key is not None and all(_slot_thread(mm) != key for mm in t.moves):
            # a fresh consumer thread hangs off the opening of the view
            return p_view(t).origin[0]
        p = t.ptr_at(len(t))
        if p == 0:
            return len(t)
        return p + 1 if p % 2 == 1 else p - 1

    return MirrorSkeleton(universal_arena(), mirror, pointer_rule=pointer_rule)


# ---------------------------------------------------------------------------
# bounded exploration

def _o_candidates(skel: Skeleton, s: JSeq, caps: EnumCaps) -> list[tuple[Move, int]]:
    cands = candidate_extensions(skel.arena, s, caps)
    cands = [(m, p) for m, p in cands if skel.accepts_o(s, m, p)]
    return cands


def candidate_extensions(arena: Arena, s: JSeq, caps: EnumCaps) -> list[tuple[Move, int]]:
    """Every (move, pointer) pair the arena offers on top of s, capped and in
    a deterministic order; legality is the caller's business."""

    seen = set()
    out = []
    for m in arena.initial_moves(caps):
        if (m, 0) not in seen:
            seen.add((m, 0))
            out.append((m, 0))
    for i, mm, _ in s.steps():
        for n in arena.moves_enabled_by(mm, caps):
            if (n, i) not in seen:
                seen.add((n, i))
                out.append((n, i))
    out.sort(key=lambda mp: (mp[1], move_text(mp[0])))
    return out


def _frontier_open(arena: Arena, s: JSeq) -> bool:
    if arena.open_ended(None):
        return True
    return any(arena.open_ended(mm) for mm in s.moves)


def explore(skel: Skeleton, bound: Optional[ExplorationBound] = None) -> Exploration:
    """Breadth-first search of the skeleton's even positions up to the bound."""

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
        if _frontier_open(skel.arena, s):
            truncated = True
        cands = _o_candidates(skel, s, caps)
        if len(cands) > bound.max_branch:
            truncated = True
            cands = cands[: bound.max_branch]
        for m, p in cands:
            odd = s.snoc(m, p)
            r = skel.respond(odd)
            if r is None:
                stuck.append(odd)
                continue
            t = odd.snoc(*r)
            evens.append(t)
            queue.append(t)
    return Exploration(tuple(evens), tuple(stuck), truncated)


def even_part(skel: Skeleton, bound: Optional[ExplorationBound] = None) -> frozenset:
    return frozenset(explore(skel, bound).evens)


def bounded_legal_positions(
    arena: Arena, bound: Optional[ExplorationBound] = None
) -> frozenset:
    """All legal positions of the arena, of either parity, up to the bound."""

    bound = bound or ExplorationBound()
    caps = bound.caps()
    seen = {JSeq.empty()}
    queue = deque([JSeq.empty()])
    while queue:
        s = queue.popleft()
        if len(s) >= bound.max_len:
            continue
        for m, p in candidate_extensions(arena, s, caps):
            t = s.snoc(m, p)
            if t in seen or not is_legal(t, arena).ok:
                continue
            seen.add(t)
            queue.append(t)
    return frozenset(seen)


def trace_dump(skel: Skeleton, bound: Optional[ExplorationBound] = None) -> str:
    """One line per explored even position, in discovery order."""

    probe = explore(skel, bound)
    return "\n".join(seq_text(s) for s in probe.evens)


# ---------------------------------------------------------------------------
# constraint checking

def _view_key(view):
    if DANGLING in view.ptrs:
        return view.moves, view.ptrs
    return canonicalize(JSeq(view.moves, view.ptrs))


def check_constraints(
    skel: Skeleton, bound: Optional[ExplorationBound] = None
) -> ConstraintReport:
    """Bounded verdicts: totality, view-determined responses, bracketing, and
    whether the views stopped growing before the budget ran out."""

    bound = bound or ExplorationBound()
    probe = explore(skel, bound)

    if probe.stuck_odd:
        total = Verdict("violated", probe.stuck_odd[0])
    else:
        total = Verdict("holds-to-bound")

    innocent = Verdict("holds-to-bound")
    table: dict = {}
    for s in probe.evens:
        if not s:
            continue
        odd = s.prefix(len(s) - 1)
        n, q = s.at(len(s))
        view = p_view(odd)
        if q == 0:
            vloc = 0
        elif q in view.origin:
            vloc = view.origin.index(q) + 1
        else:
            innocent = Verdict("violated", s)
            break
        if DANGLING in view.ptrs:
            key = (view.moves, view.ptrs)
            val = (view.moves, view.ptrs, n, vloc)
        else:
            key = canonicalize(JSeq(view.moves, view.ptrs))
            val = canonicalize(JSeq(view.moves + (n,), view.ptrs + (vloc,)))
        if key in table and table[key] != val:
            innocent = Verdict("violated", s)
            break
        table.setdefault(key, val)

    well_bracketed = Verdict("holds-to-bound")
    for s in probe.evens:
        if not is_well_bracketed(s).ok:
            well_bracketed = Verdict("violated", s)
            break

    deep = any(len(p_view(s)) >= bound.max_len - 1 for s in probe.evens)
    noetherian = Verdict("unknown" if deep else "holds-to-bound")

    return ConstraintReport(total, innocent, well_bracketed, noetherian, bound)


# ---------------------------------------------------------------------------
# saturation

class _SaturationSkeleton(Skeleton):
    """Plays like the base strategy but accepts any choice of copy indices,
    maintaining a bijection between the indices seen and the base's own."""

    def __init__(self, base: Skeleton):
        self.base = base
        self.arena = base.arena

    def _map_in(self, m: Move, fwd, rev) -> Move:
        etag = []
        for idx, occ in m.etag:
            table = fwd.setdefault(occ, {})
            back = rev.setdefault(occ, {})
            if idx in table:
                ri = table[idx]
            else:
                if idx not in back:
                    ri = idx
                else:
                    ri = 0
                    while ri in back:
                        ri += 1
                table[idx] = ri
                back[ri] = idx
            etag.append((ri, occ))
        return Move(m.core, m.dtag, tuple(etag), m.label)

    def _map_out(self, n: Move, fwd, rev) -> Move:
        etag = []
        for ri, occ in n.etag:
            table = fwd.setdefault(occ, {})
            back = rev.setdefault(occ, {})
            if ri in back:
                qi = back[ri]
            else:
                qi = 0
                while qi in table:
                    qi += 1
                table[qi] = ri
                back[ri] = qi
            etag.append((qi, occ))
        return Move(n.core, n.dtag, tuple(etag), n.label)

    def _bind(self, n: Move, m: Move, fwd, rev) -> bool:
        # the base's response n must be the stored move m up to the bijection
        if (n.core, n.dtag, n.label) != (m.core, m.dtag, m.label):
            return False
        if len(n.etag) != len(m.etag):
            return False
        for (ri, occ1), (qi, occ2) in zip(n.etag, m.etag):
            if occ1 != occ2:
                return False
            table = fwd.setdefault(occ1, {})
            back = rev.setdefault(occ1, {})
            if qi in table:
                if table[qi] != ri:
                    return False
            elif ri in back:
                return False
            else:
                table[qi] = ri
                back[ri] = qi
        return True

    def _advance(self, s: JSeq, fwd, rev) -> Optional[JSeq]:
        rep = JSeq.empty()
        for i, m, p in s.steps():
            if i % 2 == 1:
                rm = self._map_in(m, fwd, rev)
                if not self.base.accepts_o(rep, rm, p):
                    return None
                rep = rep.snoc(rm, p)
            else:
                r = self.base.respond(rep)
                if r is None or r[1] != p:
                    return None
                if not self._bind(r[0], m, fwd, rev):
                    return None
                rep = rep.snoc(*r)
        return rep

    def accepts_o(self, s: JSeq, m: Move, ptr: int) -> bool:
        if not is_legal(s.snoc(m, ptr), self.arena).ok:
            return False
        fwd, rev = {}, {}
        rep = self._advance(s, fwd, rev)
        if rep is None:
            return False
        return self.base.accepts_o(rep, self._map_in(m, fwd, rev), ptr)

    def respond(self, s: JSeq) -> Optional[tuple[Move, int]]:
        fwd, rev = {}, {}
        rep = self._advance(s.prefix(len(s) - 1), fwd, rev)
        if rep is None:
            return None
        m, p = s.at(len(s))
        rm = self._map_in(m, fwd, rev)
        if not self.base.accepts_o(rep, rm, p):
            return None
        r = self.base.respond(rep.snoc(rm, p))
        if r is None:
            return None
        return self._map_out(r[0], fwd, rev), r[1]

    def member(self, s: JSeq) -> bool:
        # membership is up to re-indexing, so replay through the bijection
        # instead of demanding the canonical indices respond would pick
        if len(s) % 2:
            return False
        if not is_legal(s, self.arena).ok:
            return False
        try:
            return self._advance(s, {}, {}) is not None
        except SkeletonError:
            return False


def saturate(base: Skeleton) -> Skeleton:
    return _SaturationSkeleton(base)


# ---------------------------------------------------------------------------
# equivalence probing

def _candidate_map(pos: JSeq, probe_arena: Arena, caps: EnumCaps) -> dict:
    out: dict = {}
    for m, p in candidate_extensions(probe_arena, pos, caps):
        out.setdefault(canonicalize(pos.snoc(m, p)), (m, p))
    return out


def _realize_key(pos: JSeq, key: JSeq) -> Optional[tuple[Move, int]]:
    """Invert the canonical renumbering: a literal extension of pos whose
    canonical form is key, when one exists."""

    cm, cp = key.at(len(key))
    tables = canonical_tables(pos)
    etag = []
    for ci, occ in cm.etag:
        table = tables.get(occ, {})
        inv = {c: li for li, c in table.items()}
        if ci in inv:
            li = inv[ci]
        else:
            li = 0
            while li in table:
                li += 1
        etag.append((li, occ))
    m = Move(cm.core, cm.dtag, tuple(etag), cm.label)
    if canonicalize(pos.snoc(m, cp)) != key:
        return None
    return m, cp


def equiv_report(
    a: Skeleton,
    b: Skeleton,
    bound: Optional[ExplorationBound] = None,
    arena: Optional[Arena] = None,
) -> EquivReport:
    """Joint breadth-first probing for equivalence up to identification of
    copy indices, over the given arena (a's own by default)."""

    bound = bound or ExplorationBound()
    probe_arena = arena if arena is not None else a.arena
    caps = bound.caps()
    truncated = False
    seen = set()
    queue = deque([(JSeq.empty(), JSeq.empty())])
    while queue:
        s, t = queue.popleft()
        skey = canonicalize(s)
        if skey in seen:
            continue
        seen.add(skey)
        if len(s) >= bound.max_len:
            truncated = True
            continue
        if _frontier_open(probe_arena, s) or _frontier_open(probe_arena, t):
            truncated = True
        ka = _candidate_map(s, probe_arena, caps)
        kb = _candidate_map(t, probe_arena, caps)
        keys = list(ka)
        keys.extend(k for k in kb if k not in ka)
        playable = []
        for k in keys:
            la = ka.get(k) or _realize_key(s, k)
            lb = kb.get(k) or _realize_key(t, k)
            if (la and _accepts(a, s, *la)) or (lb and _accepts(b, t, *lb)):
                playable.append((la, lb))
        if len(playable) > bound.max_branch:
            truncated = True
            playable = playable[: bound.max_branch]
        for la, lb in playable:
            ra = _guarded_response(a, s, *la) if la else None
            rb = _guarded_response(b, t, *lb) if lb else None
            if ra is None and rb is None:
                continue
            oa = s.snoc(*la) if la else s
            ob = t.snoc(*lb) if lb else t
            if (ra is None) != (rb is None):
                pa = oa if ra is None else oa.snoc(*ra)
                pb = ob if rb is None else ob.snoc(*rb)
                return EquivReport(False, (pa, pb), truncated)
            ea, eb = oa.snoc(*ra), ob.snoc(*rb)
            if canonicalize(ea) != canonicalize(eb):
                return EquivReport(False, (ea, eb), truncated)
            queue.append((ea, eb))
    return EquivReport(True, None, truncated)


def equiv_upto(
    a: Skeleton,
    b: Skeleton,
    bound: Optional[ExplorationBound] = None,
    arena: Optional[Arena] = None,
) -> bool:
    return equiv_report(a, b, bound, arena).equal


def simulates(
    a: Skeleton,
    b: Skeleton,
    bound: Optional[ExplorationBound] = None,
    arena: Optional[Arena] = None,
) -> bool:
    """Wherever a responds within the bound, b responds identically up to the
    identification of copy indices."""

    bound = bound or ExplorationBound()
    probe_arena = arena if arena is not None else a.arena
    caps = bound.caps()
    seen = set()
    queue = deque([(JSeq.empty(), JSeq.empty())])
    while queue:
        s, t = queue.popleft()
        skey = canonicalize(s)
        if skey in seen:
            continue
        seen.add(skey)
        if len(s) >= bound.max_len:
            continue
        ka = _candidate_map(s, probe_arena, caps)
        playable = [
            (k, la) for k, la in ka.items() if _accepts(a, s, *la)
        ][: bound.max_branch]
        for k, la in playable:
            ra = _guarded_response(a, s, *la)
            if ra is None:
                continue
            lb = _realize_key(t, k)
            rb = _guarded_response(b, t, *lb) if lb else None
            if rb is None:
                return False
            ea = s.snoc(*la).snoc(*ra)
            eb = t.snoc(*lb).snoc(*rb)
            if canonicalize(ea) != canonicalize(eb):
                return False
            queue.append((ea, eb))
    return True


# ---------------------------------------------------------------------------
# seeded generation

class _RandomSkeleton(Skeleton):
    """A deterministic pseudo-random strategy: each odd position hashes, with
    the seed, to a choice among its legal responses (or silence)."""

    def __init__(self, arena: Arena, seed: int, caps: EnumCaps):
        self.arena = arena
        self.seed = seed
        self.caps = caps

    def respond(self, s: JSeq) -> Optional[tuple[Move, int]]:
        seen = set()
        cands = []
        for i, mm, _ in s.steps():
            for n in self.arena.moves_enabled_by(mm, self.caps):
                if n.owner != "P" or (n, i) in seen:
                    continue
                seen.add((n, i))
                if is_legal(s.snoc(n, i), self.arena).ok:
                    cands.append((n, i))
        cands.sort(key=lambda mp: seq_text(canonicalize(s.snoc(mp[0], mp[1]))))
        digest = hashlib.sha256(
            f"{self.seed}|{seq_text(canonicalize(s))}".encode()
        ).hexdigest()
        pick = int(digest, 16) % (len(cands) + 1)
        if pick == 0:
            return None
        return cands[pick - 1]


def random_skeleton(arena: Arena, seed: int, caps: Optional[EnumCaps] = None) -> Skeleton:
    return _RandomSkeleton(arena, seed, caps or EnumCaps(2, 3))
