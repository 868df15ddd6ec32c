"""Justified sequences, legality, views, restriction, canonical forms.

Positions are immutable sequences of moves with justification pointers.
Pointers are 1-based absolute indices into the same sequence; 0 marks an
initial move.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterator, Optional

from .arena import Arena, Move, move_text


@dataclass(frozen=True)
class JSeq:
    moves: tuple[Move, ...]
    ptrs: tuple[int, ...]

    def __post_init__(self) -> None:
        if len(self.moves) != len(self.ptrs):
            raise ValueError("moves and pointers must have equal length")
        for i, p in enumerate(self.ptrs, start=1):
            if not 0 <= p < i:
                raise ValueError(f"pointer {p} at index {i} is out of range")

    @staticmethod
    def empty() -> "JSeq":
        return JSeq((), ())

    @staticmethod
    def of(*steps: tuple[Move, int]) -> "JSeq":
        return JSeq(tuple(m for m, _ in steps), tuple(p for _, p in steps))

    def snoc(self, m: Move, ptr: int) -> "JSeq":
        # self is already validated, so only the new pointer needs a check
        if not 0 <= ptr <= len(self.moves):
            raise ValueError(f"pointer {ptr} at index {len(self.moves) + 1} is out of range")
        out = object.__new__(JSeq)
        object.__setattr__(out, "moves", self.moves + (m,))
        object.__setattr__(out, "ptrs", self.ptrs + (ptr,))
        return out

    def __len__(self) -> int:
        return len(self.moves)

    def __bool__(self) -> bool:
        return bool(self.moves)

    def at(self, i: int) -> tuple[Move, int]:
        """1-based access."""

        return self.moves[i - 1], self.ptrs[i - 1]

    def move_at(self, i: int) -> Move:
        return self.moves[i - 1]

    def ptr_at(self, i: int) -> int:
        return self.ptrs[i - 1]

    def prefix(self, n: int) -> "JSeq":
        return JSeq(self.moves[:n], self.ptrs[:n])

    def steps(self) -> Iterator[tuple[int, Move, int]]:
        for i, (m, p) in enumerate(zip(self.moves, self.ptrs), start=1):
            yield i, m, p

    @property
    def last(self) -> Move:
        return self.moves[-1]

    def trace(self) -> str:
        lines = []
        for i, m, p in self.steps():
            lines.append(f"{i}: {move_text(m)} -> {p}")
        return "\n".join(lines)


DANGLING = -1


@dataclass(frozen=True)
class View:
    """A view: the retained moves, pointers re-threaded into view-local
    1-based indices (DANGLING when the justifier fell outside), and the
    original absolute indices."""

    moves: tuple[Move, ...]
    ptrs: tuple[int, ...]
    origin: tuple[int, ...]

    def __len__(self) -> int:
        return len(self.moves)


def _view(s: JSeq, jump_owner: str) -> View:
    """Shared view walk: moves of `jump_owner` jump to their justifier, the
    other owner steps back by one."""

    kept: list[int] = []
    i = len(s)
    while i >= 1:
        kept.append(i)
        m, p = s.at(i)
        if m.owner == jump_owner:
            if p == 0:
                break
            i = p
        else:
            i -= 1
    kept.reverse()
    pos_of = {orig: k + 1 for k, orig in enumerate(kept)}
    moves = tuple(s.move_at(i) for i in kept)
    ptrs = []
    for i in kept:
        p = s.ptr_at(i)
        if p == 0:
            ptrs.append(0)
        else:
            ptrs.append(pos_of.get(p, DANGLING))
    return View(moves, tuple(ptrs), tuple(kept))


def p_view(s: JSeq) -> View:
    return _view(s, "O")


def o_view(s: JSeq) -> View:
    return _view(s, "P")


# ---------------------------------------------------------------------------
# legality

@dataclass(frozen=True)
class LegalityReport:
    ok: bool
    violation: str = "none"  # alternation | visibility | pointer | wellbracketing | none
    index: int = 0

    def __bool__(self) -> bool:
        return self.ok


LEGAL = LegalityReport(True)


def is_legal(s: JSeq, arena: Arena) -> LegalityReport:
    """Justification pointers valid for the arena, owners alternate starting
    with O, and every justifier is visible in the mover's view."""

    for i, m, p in s.steps():
        if p == 0:
            if not arena.is_initial(m):
                return LegalityReport(False, "pointer", i)
        else:
            if not arena.enables(s.move_at(p), m):
                return LegalityReport(False, "pointer", i)
        expected = "O" if i % 2 == 1 else "P"
        if m.owner != expected:
            return LegalityReport(False, "alternation", i)
        if p != 0:
            before = s.prefix(i - 1)
            view = p_view(before) if m.owner == "P" else o_view(before)
            if p not in view.origin:
                return LegalityReport(False, "visibility", i)
    return LEGAL


def is_well_bracketed(s: JSeq) -> LegalityReport:
    """Last-question-first-answered: when an answer at i is justified by the
    question at q, every question in the view segment strictly between them
    must already justify an answer in that segment."""

    for i, m, p in s.steps():
        if not m.is_answer or p == 0:
            continue
        view = p_view(s.prefix(i - 1))
        if p not in view.origin:
            continue  # visibility failures are reported by is_legal
        start = view.origin.index(p)
        segment = view.origin[start + 1:]
        answered = {s.ptr_at(j) for j in segment if s.move_at(j).is_answer}
        for q_idx in segment:
            if s.move_at(q_idx).is_question and q_idx not in answered:
                return LegalityReport(False, "wellbracketing", i)
    return LEGAL


# ---------------------------------------------------------------------------
# restriction (j-subsequences)

def map_restrict(s: JSeq, f: Callable[[Move], Optional[Move]]) -> tuple[JSeq, dict[int, int]]:
    """Keep the moves where f returns a move (possibly translated), re-thread
    pointers through the deleted ones.  Returns the j-subsequence and the map
    from original to new 1-based indices."""

    new_moves: list[Move] = []
    new_ptrs: list[int] = []
    index_map: dict[int, int] = {}
    for i, m, p in s.steps():
        image = f(m)
        if image is None:
            continue
        j = p
        while j != 0 and j not in index_map:
            j = s.ptr_at(j)
        new_moves.append(image)
        new_ptrs.append(index_map.get(j, 0) if j != 0 else 0)
        index_map[i] = len(new_moves)
    return JSeq(tuple(new_moves), tuple(new_ptrs)), index_map


def restrict(s: JSeq, keep: Callable[[int, Move], bool]) -> tuple[JSeq, dict[int, int]]:
    """Positional restriction without translation."""

    selected = {i for i, m, _ in s.steps() if keep(i, m)}
    new_moves: list[Move] = []
    new_ptrs: list[int] = []
    index_map: dict[int, int] = {}
    for i, m, p in s.steps():
        if i not in selected:
            continue
        j = p
        while j != 0 and j not in index_map:
            j = s.ptr_at(j)
        new_moves.append(m)
        new_ptrs.append(index_map.get(j, 0) if j != 0 else 0)
        index_map[i] = len(new_moves)
    return JSeq(tuple(new_moves), tuple(new_ptrs)), index_map


# ---------------------------------------------------------------------------
# canonical forms under the universal identification

def canonical_tables(s: JSeq) -> dict[str, dict[int, int]]:
    """Per occurrence identifier, the renaming that sends each copy index to
    its rank of first appearance in s."""

    tables: dict[str, dict[int, int]] = {}
    for m in s.moves:
        for idx, occ in m.etag:
            table = tables.setdefault(occ, {})
            if idx not in table:
                table[idx] = len(table)
    return tables


def canonicalize(s: JSeq) -> JSeq:
    """Renumber etag copy indices, per occurrence identifier, by order of
    first appearance.  Two positions are universally identified iff their
    canonical forms are equal."""

    tables = canonical_tables(s)
    new_moves = []
    for m in s.moves:
        if not m.etag:
            new_moves.append(m)
            continue
        etag = tuple((tables[occ][idx], occ) for idx, occ in m.etag)
        new_moves.append(Move(m.core, m.dtag, etag, m.label))
    return JSeq(tuple(new_moves), s.ptrs)


def equivalent(s: JSeq, t: JSeq) -> bool:
    """The universal identification: equal labels, pointers, cores and dtags,
    etag indices equal up to a per-occurrence-identifier renaming."""

    return canonicalize(s) == canonicalize(t)
