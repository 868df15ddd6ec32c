"""Tag algebra and arena constructions.

The nested-exponential expected values are frozen by hand from the tagging
rules: side bits prefix both the dtag and every occurrence identifier, and
an exponential inserts a fresh head entry while incrementing the existing
identifiers.
"""

import pytest
from hypothesis import given, strategies as st

from playsem.arena import (
    EnumCaps, Move, OA, OQ, PA, PQ, bang_arena, bang_tag, check_arena_axioms,
    copy_index, flat_arena, lollipop_arena, move_text, occ_dec, occ_inc,
    pair_nat, retag, sum_arena, terminal_arena, unpair_nat, untag,
    untag_exponential, NATS,
)


def test_occ_increment_chain():
    assert occ_inc("0") == "1"
    assert occ_inc("1") == "10"
    assert occ_inc("10") == "11"
    assert occ_inc("11") == "100"
    assert occ_inc("00") == "01"


@given(st.text(alphabet="01", min_size=1, max_size=8))
def test_occ_dec_inverts_inc(occ):
    image = occ_inc(occ)
    two_preimages = (
        len(image) >= 2
        and image[0] == "1"
        and set(image[1:]) <= {"0"}
        and occ != "1" * (len(image) - 1)
    )
    if two_preimages:
        # "01" and "1" both increment to "10"; decrement resolves to the
        # carry chain, which is the only shape the constructions produce
        assert occ_dec(image) == "1" * (len(image) - 1)
    else:
        assert occ_dec(image) == occ


def test_retag_prefixes_dtag_and_occurrences():
    m = Move("q", "1", ((2, "0"),), PQ)
    left = retag(m, "left")
    assert left.dtag == "01"
    assert left.etag == ((2, "00"),)
    inner, side = untag(left)
    assert side == "left" and inner == m


def test_bang_tag_inserts_head_and_increments():
    m = Move("q", "", ((3, "0"), (1, "10")), OQ)
    tagged = bang_tag(m, 7)
    assert tagged.etag == ((7, "0"), (3, "1"), (1, "11"))
    inner, index = untag_exponential(tagged)
    assert index == 7 and inner == m


def test_nested_exponential_move_shapes():
    # !(0 (x) !0): left opening questions carry one head entry; right opening
    # questions carry the outer head plus the inner identifier shifted to 11.
    zero = flat_arena([])
    arena = bang_arena(sum_arena(zero, bang_arena(zero)))
    caps = EnumCaps(max_index=2, max_flat=2)
    initials = list(arena.initial_moves(caps))
    lefts = [m for m in initials if m.dtag == "0"]
    rights = [m for m in initials if m.dtag == "1"]
    assert {m.etag for m in lefts} == {((0, "0"),), ((1, "0"),)}
    assert {m.etag for m in rights} == {
        ((0, "0"), (0, "11")),
        ((0, "0"), (1, "11")),
        ((1, "0"), (0, "11")),
        ((1, "0"), (1, "11")),
    }
    for m in initials:
        assert arena.contains(m)
        assert arena.is_initial(m)
        assert m.label == OQ


def test_move_text_forms():
    assert move_text(Move("q", "", (), OQ)) == "q^OQ"
    assert move_text(Move(3, "", (), PA)) == "3^PA"
    assert move_text(Move("q", "0", ((0, "00"),), PQ)) == "q^PQ[d=0; e=(0,00)]"
    assert move_text(Move("tt", "01", (), PA)) == "tt^PA[d=01]"


def test_flat_arena_rejects_question_symbol():
    with pytest.raises(ValueError):
        flat_arena(["q"])


def test_flat_arena_shape():
    two = flat_arena(["tt", "ff"])
    assert two.depth_bound == 2
    caps = EnumCaps()
    q = next(two.initial_moves(caps))
    answers = list(two.moves_enabled_by(q, caps))
    assert {m.core for m in answers} == {"tt", "ff"}
    assert all(m.label == PA for m in answers)
    assert not list(two.moves_enabled_by(answers[0], caps))


def test_nat_arena_enumeration_caps():
    nat = flat_arena(NATS)
    caps = EnumCaps(max_flat=3)
    q = next(nat.initial_moves(caps))
    assert [m.core for m in nat.moves_enabled_by(q, caps)] == [0, 1, 2]
    assert nat.contains(Move(999, "", (), PA))


def test_terminal_arena_is_empty():
    t = terminal_arena()
    assert t.is_empty()
    assert t.depth_bound == 0
    assert not list(t.initial_moves(EnumCaps()))


def test_lollipop_collapses_on_empty_codomain():
    a = flat_arena(["x"])
    assert lollipop_arena(a, terminal_arena()).is_empty()


def test_lollipop_flips_domain_owners():
    nat = flat_arena(NATS)
    imp = lollipop_arena(nat, nat)
    caps = EnumCaps(max_flat=2)
    cod_q = next(imp.initial_moves(caps))
    assert cod_q.dtag == "1" and cod_q.label == OQ
    enabled = list(imp.moves_enabled_by(cod_q, caps))
    dom_qs = [m for m in enabled if m.dtag == "0"]
    assert len(dom_qs) == 1 and dom_qs[0].label == PQ
    dom_answers = list(imp.moves_enabled_by(dom_qs[0], caps))
    assert all(m.label == OA and m.dtag == "0" for m in dom_answers)
    assert imp.enables(cod_q, dom_qs[0])
    assert not imp.enables(dom_qs[0], cod_q)


def test_axiom_walk_on_constructed_arenas():
    nat = flat_arena(NATS)
    two = flat_arena(["tt", "ff"])
    caps = EnumCaps(max_index=2, max_flat=2)
    for arena in [
        nat,
        sum_arena(nat, two),
        lollipop_arena(nat, nat),
        bang_arena(lollipop_arena(bang_arena(nat), nat)),
        lollipop_arena(bang_arena(nat), bang_arena(two)),
    ]:
        report = check_arena_axioms(arena, caps, depth=4)
        assert report.ok, report.failures


def test_depth_bounds():
    nat = flat_arena(NATS)
    assert lollipop_arena(nat, nat).depth_bound == 3
    assert bang_arena(nat).depth_bound == 2
    assert sum_arena(nat, terminal_arena()).depth_bound == 2


@given(st.integers(0, 200), st.integers(0, 200))
def test_cantor_pairing_roundtrip(x, y):
    assert unpair_nat(pair_nat(x, y)) == (x, y)
