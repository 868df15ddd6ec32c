"""Game descriptors: constructor trees, position membership, subgames, and
the characterization of a finite game by its family of deterministic trees.

A game refines an arena: the arena says which moves exist and who may justify
whom, the game says which legal positions actually belong to the protocol.
Membership is a predicate, not a stored set; only the toy-scale helpers at the
bottom enumerate positions outright.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional

from .arena import (
    NATS,
    Arena,
    LollipopArena,
    Move,
    bang_arena,
    flat_arena,
    flip_op,
    lollipop_arena,
    sum_arena,
    terminal_arena,
    untag,
    untag_exponential,
)
from .position import JSeq, is_legal, map_restrict
from .skeleton import (
    ExplorationBound,
    Verdict,
    candidate_extensions,
    seq_text,
)


# ---------------------------------------------------------------------------
# descriptor trees

@dataclass(frozen=True)
class GameExpr:
    """A closed constructor tree denoting a game."""

    kind: str
    parts: tuple["GameExpr", ...] = ()
    symbols: tuple = ()
    ref: Optional[object] = field(default=None, compare=False)

    def __repr__(self) -> str:
        return f"GameExpr({game_text(self)!r})"


def one() -> GameExpr:
    return GameExpr("one")


def zero() -> GameExpr:
    return GameExpr("zero")


def two() -> GameExpr:
    return GameExpr("two")


def nat() -> GameExpr:
    return GameExpr("nat")


def flat(symbols) -> GameExpr:
    if symbols == NATS:
        return nat()
    return GameExpr("flat", symbols=tuple(symbols))


def tensor_expr(left: GameExpr, right: GameExpr) -> GameExpr:
    return GameExpr("tensor", (left, right))


def lollipop_expr(dom: GameExpr, cod: GameExpr) -> GameExpr:
    return GameExpr("lollipop", (dom, cod))


def prod_expr(left: GameExpr, right: GameExpr) -> GameExpr:
    return GameExpr("prod", (left, right))


def bang_expr(inner: GameExpr) -> GameExpr:
    return GameExpr("bang", (inner,))


def arrow_expr(dom: GameExpr, cod: GameExpr) -> GameExpr:
    return GameExpr("arrow", (dom, cod))


def ref_expr(name: str, provider: object) -> GameExpr:
    """Wrap an external membership provider (anything with .arena and
    .contains) as a leaf descriptor."""

    return GameExpr("ref", symbols=(name,), ref=provider)


_BINOP = {"tensor": "⊗", "lollipop": "-o", "prod": "&", "arrow": "->"}


def game_text(e: GameExpr) -> str:
    if e.kind == "one":
        return "1"
    if e.kind == "zero":
        return "0"
    if e.kind == "two":
        return "2"
    if e.kind == "nat":
        return "N"
    if e.kind == "flat":
        return "Flat{" + ",".join(str(s) for s in e.symbols) + "}"
    if e.kind == "bang":
        return "!" + game_text(e.parts[0])
    if e.kind == "ref":
        return str(e.symbols[0])
    op = _BINOP[e.kind]
    return f"({game_text(e.parts[0])} {op} {game_text(e.parts[1])})"


# ---------------------------------------------------------------------------
# textual grammar
#
#   G ::= 1 | 0 | 2 | N | Flat{a,b,c} | (G (x) H) | (G -o H) | (G & H)
#       | !G | (G -> H)
#
# the tensor sign may be written as the unicode circled times or as "*"

class GameSyntaxError(ValueError):
    pass


def _tokenize(text: str) -> list[str]:
    out = []
    i = 0
    while i < len(text):
        c = text[i]
        if c.isspace():
            i += 1
            continue
        if c in "(){},&!*⊗":
            out.append(c)
            i += 1
            continue
        if text.startswith("-o", i):
            out.append("-o")
            i += 2
            continue
        if text.startswith("->", i):
            out.append("->")
            i += 2
            continue
        if c.isalnum() or c == "_":
            j = i
            while j < len(text) and (text[j].isalnum() or text[j] == "_"):
                j += 1
            out.append(text[i:j])
            i = j
            continue
        raise GameSyntaxError(f"unexpected character {c!r} at offset {i}")
    return out


class _GameParser:
    def __init__(self, tokens: list[str]):
        self.tokens = tokens
        self.pos = 0

    def peek(self) -> Optional[str]:
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def take(self, expected: Optional[str] = None) -> str:
        tok = self.peek()
        if tok is None:
            raise GameSyntaxError("unexpected end of input")
        if expected is not None and tok != expected:
            raise GameSyntaxError(f"expected {expected!r}, found {tok!r}")
        self.pos += 1
        return tok

    def expr(self) -> GameExpr:
        tok = self.peek()
        if tok == "!":
            self.take()
            return bang_expr(self.expr())
        if tok == "(":
            self.take()
            left = self.expr()
            op = self.take()
            right = self.expr()
            self.take(")")
            if op in ("⊗", "*"):
                return tensor_expr(left, right)
            if op == "-o":
                return lollipop_expr(left, right)
            if op == "&":
                return prod_expr(left, right)
            if op == "->":
                return arrow_expr(left, right)
            raise GameSyntaxError(f"unknown connective {op!r}")
        if tok == "1":
            self.take()
            return one()
        if tok == "0":
            self.take()
            return zero()
        if tok == "2":
            self.take()
            return two()
        if tok == "N":
            self.take()
            return nat()
        if tok == "Flat":
            self.take()
            self.take("{")
            symbols = []
            if self.peek() != "}":
                while True:
                    sym = self.take()
                    symbols.append(int(sym) if sym.isdigit() else sym)
                    if self.peek() == ",":
                        self.take()
                    else:
                        break
            self.take("}")
            return flat(symbols)
        raise GameSyntaxError(f"unexpected token {tok!r}")


def parse_game(text: str) -> GameExpr:
    parser = _GameParser(_tokenize(text))
    e = parser.expr()
    if parser.peek() is not None:
        raise GameSyntaxError(f"trailing input from {parser.peek()!r}")
    return e


# ---------------------------------------------------------------------------
# games proper

@dataclass(frozen=True)
class Game:
    """A game: its descriptor, its arena, and the position predicate."""

    expr: GameExpr
    arena: Arena
    membership: Callable[[JSeq], bool] = field(compare=False)

    def contains(self, s: JSeq) -> bool:
        return self.membership(s)

    def __repr__(self) -> str:
        return f"Game({game_text(self.expr)!r})"


def _side_part(s: JSeq, side: str, flip_dom: bool) -> JSeq:
    def pick(m: Move) -> Optional[Move]:
        inner, sd = untag(m)
        if sd != side:
            return None
        return flip_op(inner) if flip_dom and side == "left" else inner

    return map_restrict(s, pick)[0]


def _thread_part(s: JSeq, index: int) -> JSeq:
    def pick(m: Move) -> Optional[Move]:
        bare, i = untag_exponential(m)
        return bare if i == index else None

    return map_restrict(s, pick)[0]


def _thread_indices(s: JSeq) -> set[int]:
    return {m.etag[0][0] for m in s.moves}


def construct(e: GameExpr) -> Game:
    """Build the game a descriptor denotes.

    Membership composes legality in the constructed arena with the positional
    discipline of each constructor: flat protocols stop after the answer,
    parallel sides must each restrict to member plays, a choice of sides
    excludes the other, and every exponential thread replays the inner game.
    """

    if e.kind == "one":
        return Game(e, terminal_arena(), lambda s: len(s) == 0)
    if e.kind in ("zero", "two", "nat", "flat"):
        answers = {"zero": (), "two": ("tt", "ff"), "nat": NATS}.get(e.kind, e.symbols)
        arena = flat_arena(answers)
        return Game(e, arena, lambda s: len(s) <= 2 and is_legal(s, arena).ok)
    if e.kind == "tensor":
        left, right = construct(e.parts[0]), construct(e.parts[1])
        arena = sum_arena(left.arena, right.arena)

        def in_tensor(s: JSeq) -> bool:
            if not is_legal(s, arena).ok:
                return False
            return (left.contains(_side_part(s, "left", False))
                    and right.contains(_side_part(s, "right", False)))

        return Game(e, arena, in_tensor)
    if e.kind == "prod":
        left, right = construct(e.parts[0]), construct(e.parts[1])
        arena = sum_arena(left.arena, right.arena)

        def in_prod(s: JSeq) -> bool:
            if not is_legal(s, arena).ok:
                return False
            sl = _side_part(s, "left", False)
            sr = _side_part(s, "right", False)
            if sl and sr:
                return False
            return left.contains(sl) and right.contains(sr)

        return Game(e, arena, in_prod)
    if e.kind == "lollipop":
        dom, cod = construct(e.parts[0]), construct(e.parts[1])
        arena = lollipop_arena(dom.arena, cod.arena)
        if not isinstance(arena, LollipopArena):
            # a function space into a move-less game collapses to it
            return Game(e, arena, lambda s: len(s) == 0)

        def in_lollipop(s: JSeq) -> bool:
            if not is_legal(s, arena).ok:
                return False
            return (dom.contains(_side_part(s, "left", True))
                    and cod.contains(_side_part(s, "right", False)))

        return Game(e, arena, in_lollipop)
    if e.kind == "bang":
        inner = construct(e.parts[0])
        arena = bang_arena(inner.arena)

        def in_bang(s: JSeq) -> bool:
            if not is_legal(s, arena).ok:
                return False
            return all(inner.contains(_thread_part(s, i))
                       for i in _thread_indices(s))

        return Game(e, arena, in_bang)
    if e.kind == "arrow":
        base = construct(lollipop_expr(bang_expr(e.parts[0]), e.parts[1]))
        return Game(e, base.arena, base.membership)
    if e.kind == "ref":
        provider = e.ref
        return Game(e, provider.arena, provider.contains)
    raise ValueError(f"unknown game constructor {e.kind!r}")


# ---------------------------------------------------------------------------
# bounded enumeration

def game_positions(
    game: Game, bound: Optional[ExplorationBound] = None
) -> tuple[frozenset, bool]:
    """All positions of the game up to the bound, with a truncation flag."""

    bound = bound or ExplorationBound()
    caps = bound.caps()
    seen = {JSeq.empty()}
    queue = [JSeq.empty()]
    truncated = False
    while queue:
        s = queue.pop()
        if len(s) >= bound.max_len:
            truncated = True
            continue
        if game.arena.open_ended(None) or any(
            game.arena.open_ended(m) for m in s.moves
        ):
            truncated = True
        for m, p in candidate_extensions(game.arena, s, caps):
            t = s.snoc(m, p)
            if t in seen or not game.contains(t):
                continue
            seen.add(t)
            queue.append(t)
    return frozenset(seen), truncated


def is_subgame(
    sub: Game, sup: Game, bound: Optional[ExplorationBound] = None
) -> Verdict:
    """Position containment, checked on the bounded enumeration.

    Both games restrict the one universal identification of positions, so
    agreement of the identifications needs no separate check.
    """

    positions, truncated = game_positions(sub, bound)
    for s in sorted(positions, key=seq_text):
        if not sup.contains(s):
            return Verdict("violated", s)
    return Verdict("unknown" if truncated else "holds", None)


# ---------------------------------------------------------------------------
# deterministic trees of a finite game
#
# a t-skeleton contains every game extension for the environment and at most
# one for the player; a finite game is recovered from its family of
# t-skeletons, and the family is closed under patchworks: any subset of the
# union satisfying the same three closure rules is itself in the family

def _children_maps(positions: Iterable[JSeq]):
    kids: dict[JSeq, list[JSeq]] = {}
    for s in positions:
        if len(s) > 0:
            kids.setdefault(s.prefix(len(s) - 1), []).append(s)
    for v in kids.values():
        v.sort(key=seq_text)
    return kids


def deterministic_trees(positions: Iterable[JSeq]) -> list[frozenset]:
    """All subsets of the given prefix-closed set that keep every odd
    extension, at most one even extension per odd node, and the root."""

    kids = _children_maps(positions)

    def from_even(s: JSeq) -> list[frozenset]:
        options_per_odd = []
        for o in kids.get(s, ()):
            opts = [frozenset({o})]
            for even_child in kids.get(o, ()):
                for sub in from_even(even_child):
                    opts.append(frozenset({o}) | sub)
            options_per_odd.append(opts)
        return [
            frozenset({s}).union(*combo)
            for combo in itertools.product(*options_per_odd)
        ]

    return from_even(JSeq.empty())


def t_skeletons(
    game: Game, bound: Optional[ExplorationBound] = None
) -> tuple[frozenset, ...]:
    """Every deterministic tree of the game, odd frontier included."""

    positions, truncated = game_positions(game, bound)
    if truncated:
        raise ValueError("the game is not finite within the bound")
    return tuple(deterministic_trees(positions))


def family_is_consistent(
    family: Iterable[frozenset], arena: Arena
) -> Verdict:
    """Two clauses: every sequence of every tree is legal in the one shared
    arena, and trees agree on the odd extensions of their common nodes."""

    trees = list(family)
    for tree in trees:
        for s in tree:
            if not is_legal(s, arena).ok:
                return Verdict("violated", s)
    for a, b in itertools.combinations(trees, 2):
        both = a & b
        for s in a | b:
            if len(s) % 2 == 1 and s.prefix(len(s) - 1) in both and s not in both:
                return Verdict("violated", s)
    return Verdict("holds", None)


def family_is_complete(family: Iterable[frozenset]) -> Verdict:
    """Patchwork closure: every deterministic tree carved out of the union
    must already be in the family.  The witness lists the missing trees."""

    trees = set(family)
    union = set().union(*trees) if trees else {frozenset()}
    missing = [t for t in deterministic_trees(union) if t not in trees]
    if missing:
        missing.sort(key=lambda t: sorted(seq_text(s) for s in t))
        return Verdict("violated", tuple(missing))
    return Verdict("holds", None)


def complete_pair_roundtrip(
    game: Game, bound: Optional[ExplorationBound] = None
) -> Verdict:
    """Check that the family of deterministic trees determines the game:
    the family is consistent and complete, and its union gives back exactly
    the game's positions."""

    positions, truncated = game_positions(game, bound)
    if truncated:
        return Verdict("unknown", None)
    trees = tuple(deterministic_trees(positions))
    consistent = family_is_consistent(trees, game.arena)
    if consistent.status != "holds":
        return consistent
    complete = family_is_complete(trees)
    if complete.status != "holds":
        return complete
    union = set().union(*trees) if trees else set()
    if union != set(positions):
        extra = union.symmetric_difference(positions)
        return Verdict("violated", min(extra, key=seq_text))
    return Verdict("holds", None)
