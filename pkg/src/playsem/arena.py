"""Moves, tags, and arenas.

A move carries a core symbol, a disjointness tag (bit string), an exponential
tag (sequence of (index, occurrence-identifier) pairs), and an embedded
owner/kind label.  Arenas are intensional: membership and enabling are
predicates, and enumeration is explicit and capped so that infinite arenas
stay usable.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Iterator, Optional, Union

# ---------------------------------------------------------------------------
# labels

@dataclass(frozen=True)
class Label:
    """Owner (O or P) and kind (Q for question, A for answer)."""

    op: str
    qa: str

    def __post_init__(self) -> None:
        if self.op not in ("O", "P"):
            raise ValueError(f"owner must be O or P, got {self.op!r}")
        if self.qa not in ("Q", "A"):
            raise ValueError(f"kind must be Q or A, got {self.qa!r}")

    def flip_op(self) -> "Label":
        return Label("O" if self.op == "P" else "P", self.qa)

    @property
    def text(self) -> str:
        return self.op + self.qa


OQ = Label("O", "Q")
OA = Label("O", "A")
PQ = Label("P", "Q")
PA = Label("P", "A")


# ---------------------------------------------------------------------------
# core symbols

@dataclass(frozen=True)
class Code:
    """A core symbol that names a game; used as answers in universe play."""

    text: str

    def __str__(self) -> str:
        return f"#{self.text}"


Core = Union[int, str, Code]

QUESTION = "q"


def core_text(core: Core) -> str:
    if isinstance(core, Code):
        return str(core)
    return str(core)


# ---------------------------------------------------------------------------
# occurrence identifiers (bit strings attached to exponential layers)

def occ_inc(occ: str) -> str:
    """Binary increment with carry; length is kept unless the string is all
    ones, in which case it grows by one ("11" -> "100")."""

    bits = list(occ)
    i = len(bits) - 1
    while i >= 0:
        if bits[i] == "0":
            bits[i] = "1"
            return "".join(bits)
        bits[i] = "0"
        i -= 1
    return "1" + "".join(bits)


def occ_dec(occ: str) -> str:
    """Inverse of occ_inc on its image."""

    if occ == "1":
        return "0"
    if set(occ[1:]) <= {"0"} and occ[0] == "1" and len(occ) > 1:
        # undo a carry extension: "10" -> "1", "100" -> "11"
        return "1" * (len(occ) - 1)
    bits = list(occ)
    i = len(bits) - 1
    while i >= 0:
        if bits[i] == "1":
            bits[i] = "0"
            return "".join(bits)
        bits[i] = "1"
        i -= 1
    raise ValueError(f"cannot decrement occurrence identifier {occ!r}")


Etag = tuple[tuple[int, str], ...]


# ---------------------------------------------------------------------------
# moves

@dataclass(frozen=True)
class Move:
    core: Core
    dtag: str
    etag: Etag
    label: Label

    def __post_init__(self) -> None:
        if not set(self.dtag) <= {"0", "1"}:
            raise ValueError(f"dtag must be a bit string, got {self.dtag!r}")
        occs = [occ for _, occ in self.etag]
        if len(occs) != len(set(occs)):
            raise ValueError(f"etag occurrence identifiers must be distinct: {self.etag}")
        for idx, occ in self.etag:
            if idx < 0:
                raise ValueError(f"etag index must be a natural, got {idx}")
            if not occ or not set(occ) <= {"0", "1"}:
                raise ValueError(f"occurrence identifier must be a nonempty bit string, got {occ!r}")

    @property
    def is_question(self) -> bool:
        return self.label.qa == "Q"

    @property
    def is_answer(self) -> bool:
        return self.label.qa == "A"

    @property
    def owner(self) -> str:
        return self.label.op

    def with_label(self, label: Label) -> "Move":
        return Move(self.core, self.dtag, self.etag, label)

    @property
    def text(self) -> str:
        return move_text(self)

    def __str__(self) -> str:
        return move_text(self)


def move_text(m: Move) -> str:
    parts = []
    if m.dtag:
        parts.append(f"d={m.dtag}")
    if m.etag:
        parts.append("e=" + ",".join(f"({i},{occ})" for i, occ in m.etag))
    tail = f"[{'; '.join(parts)}]" if parts else ""
    return f"{core_text(m.core)}^{m.label.text}{tail}"


# -- tag algebra -------------------------------------------------------------

def retag(m: Move, side: str) -> Move:
    """Prefix the side bit ('0' for left/domain, '1' for right/codomain) to
    the dtag and to every occurrence identifier."""

    bit = {"left": "0", "right": "1"}[side]
    etag = tuple((i, bit + occ) for i, occ in m.etag)
    return Move(m.core, bit + m.dtag, etag, m.label)


def untag(m: Move) -> tuple[Move, str]:
    """Strip one side bit; returns (inner move, side)."""

    if not m.dtag:
        raise ValueError(f"move {m} has no side bit to strip")
    bit = m.dtag[0]
    side = "left" if bit == "0" else "right"
    for i, occ in m.etag:
        if not occ.startswith(bit):
            raise ValueError(f"occurrence identifier {occ!r} does not match side bit {bit!r} in {m}")
    etag = tuple((i, occ[1:]) for i, occ in m.etag)
    return Move(m.core, m.dtag[1:], etag, m.label), side


def side_of(m: Move) -> str:
    if not m.dtag:
        raise ValueError(f"move {m} has an empty dtag")
    return "left" if m.dtag[0] == "0" else "right"


def bang_tag(m: Move, index: int) -> Move:
    """Place a move into copy `index` of an exponential: insert (index, "0")
    at the head of the etag and increment the existing occurrence ids."""

    etag = ((index, "0"),) + tuple((i, occ_inc(occ)) for i, occ in m.etag)
    return Move(m.core, m.dtag, etag, m.label)


def untag_exponential(m: Move, occ: str = "0") -> tuple[Move, int]:
    """Inverse of bang_tag: remove the head etag entry (whose occurrence
    identifier must equal `occ`) and decrement the remaining ids."""

    if not m.etag:
        raise ValueError(f"move {m} carries no exponential tag")
    (index, head_occ), rest = m.etag[0], m.etag[1:]
    if head_occ != occ:
        raise ValueError(f"head occurrence identifier is {head_occ!r}, expected {occ!r} in {m}")
    etag = tuple((i, occ_dec(o)) for i, o in rest)
    return Move(m.core, m.dtag, etag, m.label), index


def copy_index(m: Move) -> int:
    """The copy index of a move of a bare exponential (head etag index)."""

    if not m.etag:
        raise ValueError(f"move {m} carries no exponential tag")
    return m.etag[0][0]


def with_copy_index(m: Move, index: int) -> Move:
    if not m.etag:
        raise ValueError(f"move {m} carries no exponential tag")
    (_, occ), rest = m.etag[0], m.etag[1:]
    return Move(m.core, m.dtag, ((index, occ),) + rest, m.label)


def flip_op(m: Move) -> Move:
    return m.with_label(m.label.flip_op())


# ---------------------------------------------------------------------------
# pairing for promotion-style copy bookkeeping

def pair_nat(x: int, y: int) -> int:
    """Cantor pairing."""

    return (x + y) * (x + y + 1) // 2 + y


def unpair_nat(z: int) -> tuple[int, int]:
    w = 0
    while (w + 1) * (w + 2) // 2 <= z:
        w += 1
    y = z - w * (w + 1) // 2
    return w - y, y


# ---------------------------------------------------------------------------
# enumeration caps

@dataclass(frozen=True)
class EnumCaps:
    """Caps used when enumerating moves of infinite arenas: copy indices are
    drawn from [0, max_index) and infinite answer alphabets from their first
    max_flat elements."""

    max_index: int = 4
    max_flat: int = 8


# ---------------------------------------------------------------------------
# arenas

NATS = "nats"


class Arena:
    """Intensional arena: membership, enabling, and capped enumeration.

    Construction-level invariants: initial moves are O-questions, answers are
    enabled only by questions, and a non-root enabler has the opposite owner.
    """

    depth_bound: Optional[int] = None

    def contains(self, m: Move) -> bool:
        raise NotImplementedError

    def is_initial(self, m: Move) -> bool:
        raise NotImplementedError

    def enables(self, m: Optional[Move], n: Move) -> bool:
        if m is None:
            return self.is_initial(n)
        raise NotImplementedError

    def initial_moves(self, caps: EnumCaps) -> Iterator[Move]:
        raise NotImplementedError

    def moves_enabled_by(self, m: Move, caps: EnumCaps) -> Iterator[Move]:
        raise NotImplementedError

    def is_empty(self) -> bool:
        """No moves at all (terminal-like)."""

        return False

    def open_ended(self, m: Optional[Move] = None) -> bool:
        """True when infinitely many moves are enabled by m (initial moves
        for None), so capped enumeration necessarily truncates."""

        return False


class TerminalArena(Arena):
    depth_bound = 0

    def contains(self, m: Move) -> bool:
        return False

    def is_initial(self, m: Move) -> bool:
        return False

    def enables(self, m: Optional[Move], n: Move) -> bool:
        return False

    def initial_moves(self, caps: EnumCaps) -> Iterator[Move]:
        return iter(())

    def moves_enabled_by(self, m: Move, caps: EnumCaps) -> Iterator[Move]:
        return iter(())

    def is_empty(self) -> bool:
        return True


class FlatArena(Arena):
    """One opening question; every answer is enabled by it.

    `answers` is either a finite collection of cores or the NATS sentinel for
    the natural numbers.
    """

    depth_bound = 2

    def __init__(self, answers) -> None:
        if answers == NATS:
            self.answers = NATS
        else:
            answers = tuple(answers)
            for a in answers:
                if a == QUESTION:
                    raise ValueError("the question symbol cannot be an answer")
                if isinstance(a, bool):
                    raise ValueError("use the tt/ff atoms for booleans, not python bools")
            self.answers = tuple(sorted(answers, key=lambda a: (isinstance(a, int), str(a))))
        self.question = Move(QUESTION, "", (), OQ)

    def _is_answer_core(self, core: Core) -> bool:
        if self.answers == NATS:
            return isinstance(core, int) and core >= 0
        return core in self.answers

    def contains(self, m: Move) -> bool:
        if m.dtag or m.etag:
            return False
        if m == self.question:
            return True
        return m.label == PA and self._is_answer_core(m.core)

    def is_initial(self, m: Move) -> bool:
        return m == self.question

    def enables(self, m: Optional[Move], n: Move) -> bool:
        if m is None:
            return self.is_initial(n)
        return m == self.question and self.contains(n) and n.label == PA

    def initial_moves(self, caps: EnumCaps) -> Iterator[Move]:
        yield self.question

    def moves_enabled_by(self, m: Move, caps: EnumCaps) -> Iterator[Move]:
        if m != self.question:
            return
        if self.answers == NATS:
            for n in range(caps.max_flat):
                yield Move(n, "", (), PA)
        else:
            for a in self.answers:
                yield Move(a, "", (), PA)

    def open_ended(self, m: Optional[Move] = None) -> bool:
        return m == self.question and self.answers == NATS


class SumArena(Arena):
    """Disjoint union with side bits; shared by the parallel and the
    one-side-only position disciplines."""

    def __init__(self, left: Arena, right: Arena) -> None:
        self.left = left
        self.right = right
        if left.depth_bound is None or right.depth_bound is None:
            self.depth_bound = None
        else:
            self.depth_bound = max(left.depth_bound, right.depth_bound)

    def _split(self, m: Move) -> Optional[tuple[Arena, Move]]:
        if not m.dtag:
            return None
        try:
            inner, side = untag(m)
        except ValueError:
            return None
        return (self.left if side == "left" else self.right), inner

    def contains(self, m: Move) -> bool:
        part = self._split(m)
        return part is not None and part[0].contains(part[1])

    def is_initial(self, m: Move) -> bool:
        part = self._split(m)
        return part is not None and part[0].is_initial(part[1])

    def enables(self, m: Optional[Move], n: Move) -> bool:
        if m is None:
            return self.is_initial(n)
        pm, pn = self._split(m), self._split(n)
        if pm is None or pn is None or pm[0] is not pn[0]:
            return False
        return pm[0].enables(pm[1], pn[1])

    def initial_moves(self, caps: EnumCaps) -> Iterator[Move]:
        for m in self.left.initial_moves(caps):
            yield retag(m, "left")
        for m in self.right.initial_moves(caps):
            yield retag(m, "right")

    def moves_enabled_by(self, m: Move, caps: EnumCaps) -> Iterator[Move]:
        part = self._split(m)
        if part is None:
            return
        arena, inner = part
        side = "left" if arena is self.left else "right"
        for n in arena.moves_enabled_by(inner, caps):
            yield retag(n, side)

    def is_empty(self) -> bool:
        return self.left.is_empty() and self.right.is_empty()

    def open_ended(self, m: Optional[Move] = None) -> bool:
        if m is None:
            return self.left.open_ended(None) or self.right.open_ended(None)
        part = self._split(m)
        return part is not None and part[0].open_ended(part[1])


class LollipopArena(Arena):
    """Function-space arena: domain on the left with owners flipped, codomain
    on the right; initial codomain moves additionally enable initial domain
    moves.  Use the lollipop_arena factory, which collapses to the terminal
    arena when the codomain has no moves."""

    def __init__(self, dom: Arena, cod: Arena) -> None:
        self.dom = dom
        self.cod = cod
        if dom.depth_bound is None or cod.depth_bound is None:
            self.depth_bound = None
        else:
            self.depth_bound = max(cod.depth_bound, 1 + dom.depth_bound)

    def _split(self, m: Move) -> Optional[tuple[str, Move]]:
        if not m.dtag:
            return None
        try:
            inner, side = untag(m)
        except ValueError:
            return None
        if side == "left":
            inner = flip_op(inner)
        return side, inner

    def contains(self, m: Move) -> bool:
        part = self._split(m)
        if part is None:
            return False
        side, inner = part
        return (self.dom if side == "left" else self.cod).contains(inner)

    def is_initial(self, m: Move) -> bool:
        part = self._split(m)
        return part is not None and part[0] == "right" and self.cod.is_initial(part[1])

    def enables(self, m: Optional[Move], n: Move) -> bool:
        if m is None:
            return self.is_initial(n)
        pm, pn = self._split(m), self._split(n)
        if pm is None or pn is None:
            return False
        if pm[0] == pn[0]:
            arena = self.dom if pm[0] == "left" else self.cod
            return arena.enables(pm[1], pn[1])
        return pm[0] == "right" and self.cod.is_initial(pm[1]) and pn[0] == "left" and self.dom.is_initial(pn[1])

    def initial_moves(self, caps: EnumCaps) -> Iterator[Move]:
        for m in self.cod.initial_moves(caps):
            yield retag(m, "right")

    def moves_enabled_by(self, m: Move, caps: EnumCaps) -> Iterator[Move]:
        part = self._split(m)
        if part is None:
            return
        side, inner = part
        if side == "left":
            for n in self.dom.moves_enabled_by(inner, caps):
                yield retag(flip_op(n), "left")
        else:
            for n in self.cod.moves_enabled_by(inner, caps):
                yield retag(n, "right")
            if self.cod.is_initial(inner):
                for n in self.dom.initial_moves(caps):
                    yield retag(flip_op(n), "left")

    def is_empty(self) -> bool:
        return self.cod.is_empty()

    def open_ended(self, m: Optional[Move] = None) -> bool:
        if m is None:
            return self.cod.open_ended(None)
        part = self._split(m)
        if part is None:
            return False
        side, inner = part
        if side == "left":
            return self.dom.open_ended(inner)
        if self.cod.is_initial(inner) and self.dom.open_ended(None):
            return True
        return self.cod.open_ended(inner)


class BangArena(Arena):
    """Countably many interleavable copies, marked by a fresh head etag entry."""

    def __init__(self, inner: Arena) -> None:
        self.inner = inner
        self.depth_bound = inner.depth_bound

    def _strip(self, m: Move) -> Optional[tuple[Move, int]]:
        if not m.etag or m.etag[0][1] != "0":
            return None
        try:
            return untag_exponential(m)[0], m.etag[0][0]
        except ValueError:
            return None

    def contains(self, m: Move) -> bool:
        part = self._strip(m)
        return part is not None and self.inner.contains(part[0])

    def is_initial(self, m: Move) -> bool:
        part = self._strip(m)
        return part is not None and self.inner.is_initial(part[0])

    def enables(self, m: Optional[Move], n: Move) -> bool:
        if m is None:
            return self.is_initial(n)
        pm, pn = self._strip(m), self._strip(n)
        if pm is None or pn is None or pm[1] != pn[1]:
            return False
        return self.inner.enables(pm[0], pn[0])

    def initial_moves(self, caps: EnumCaps) -> Iterator[Move]:
        for i in range(caps.max_index):
            for m in self.inner.initial_moves(caps):
                yield bang_tag(m, i)

    def moves_enabled_by(self, m: Move, caps: EnumCaps) -> Iterator[Move]:
        part = self._strip(m)
        if part is None:
            return
        inner, index = part
        for n in self.inner.moves_enabled_by(inner, caps):
            yield bang_tag(n, index)

    def is_empty(self) -> bool:
        return self.inner.is_empty()

    def open_ended(self, m: Optional[Move] = None) -> bool:
        if m is None:
            return not self.inner.is_empty()
        part = self._strip(m)
        return part is not None and self.inner.open_ended(part[0])


class UniversalArena(Arena):
    """The permissive arena over all well-formed moves: initial moves are the
    O-questions, and any earlier move may justify any later one.  Untyped
    strategies play here; the usual position disciplines still apply."""

    def contains(self, m: Move) -> bool:
        return True

    def is_initial(self, m: Move) -> bool:
        return m.label == OQ

    def enables(self, m: Optional[Move], n: Move) -> bool:
        if m is None:
            return self.is_initial(n)
        return True

    def initial_moves(self, caps: EnumCaps) -> Iterator[Move]:
        return iter(())

    def moves_enabled_by(self, m: Move, caps: EnumCaps) -> Iterator[Move]:
        return iter(())

    def open_ended(self, m: Optional[Move] = None) -> bool:
        return True


# ---------------------------------------------------------------------------
# factories

def terminal_arena() -> Arena:
    return TerminalArena()


def flat_arena(answers) -> Arena:
    return FlatArena(answers)


def sum_arena(left: Arena, right: Arena) -> Arena:
    return SumArena(left, right)


def lollipop_arena(dom: Arena, cod: Arena) -> Arena:
    # a function space into a move-less arena has no moves either
    if cod.is_empty():
        return TerminalArena()
    return LollipopArena(dom, cod)


def bang_arena(inner: Arena) -> Arena:
    return BangArena(inner)


def universal_arena() -> Arena:
    return UniversalArena()


def arrow_arena(dom: Arena, cod: Arena) -> Arena:
    return lollipop_arena(bang_arena(dom), cod)


# ---------------------------------------------------------------------------
# construction invariants, checked by enumeration

@dataclass
class ArenaAxiomReport:
    ok: bool
    failures: list[str] = field(default_factory=list)


def check_arena_axioms(arena: Arena, caps: EnumCaps = EnumCaps(), depth: int = 3) -> ArenaAxiomReport:
    """Walk the enabling forest to `depth` and verify: initial moves are
    O-questions; answers hang off questions only; enabler and enabled have
    opposite owners."""

    report = ArenaAxiomReport(ok=True)

    def fail(msg: str) -> None:
        report.ok = False
        report.failures.append(msg)

    seen: set[Move] = set()
    frontier: list[Move] = []
    for m in arena.initial_moves(caps):
        if m.label != OQ:
            fail(f"initial move {m} is not an O-question")
        if not arena.contains(m):
            fail(f"enumerated initial move {m} fails membership")
        frontier.append(m)
        seen.add(m)
    for _ in range(depth):
        nxt: list[Move] = []
        for m in frontier:
            for n in arena.moves_enabled_by(m, caps):
                if not arena.contains(n):
                    fail(f"enumerated move {n} fails membership")
                if n.is_answer and not m.is_question:
                    fail(f"answer {n} enabled by non-question {m}")
                if not arena.is_initial(n) and m.owner == n.owner:
                    fail(f"{m} enables {n} but owners coincide")
                if n not in seen:
                    seen.add(n)
                    nxt.append(n)
        frontier = nxt
    return report
