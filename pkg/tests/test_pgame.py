"""Predicative games: membership probing, winning enumeration, dependent
sums and products, identity fibres, universes, and the closure axioms.

Member trees for rule-described strategies are built by guarding a mirror
oracle with the game under test; the guard is what turns "answer zero
wherever asked" into a tree whose plays stay inside the game.  Expected
verdicts for the tensor-power family are fixed by hand from the thread
dressing: the n-th power carries its naturals at d = 1, 01, ..., 0..01.
"""

import pytest

from playsem.arena import Code, Move, OQ, PA, QUESTION, sum_arena, universal_arena
from playsem.game import construct, flat, parse_game, t_skeletons
from playsem.position import JSeq
from playsem.skeleton import (
    ChatterError,
    ExplorationBound,
    MirrorSkeleton,
    Skeleton,
    compose,
    copy_cat,
    dereliction,
    pairing,
    tree_form,
)
from playsem.pgame import (
    DepPGame,
    FinitePGame,
    PStrategy,
    RankError,
    UndecidedError,
    arrow,
    bang,
    check_pgame_axioms,
    code,
    constant_family,
    decode,
    el,
    guard,
    id_fiber,
    integrate,
    lift,
    lifted,
    linear_pi,
    lollipop,
    numeral_value,
    pi,
    position_set_member,
    product,
    sigma,
    strategies_equal,
    tens_nat_family,
    tens_power,
    tensor,
    universe,
)

BOUND = ExplorationBound(max_len=10, max_copies=2, max_branch=8)
TIGHT = ExplorationBound(max_len=10, max_copies=2, max_branch=3)

NAT = lifted("N")
TWO = lifted("2")


def q(dtag="", etag=()):
    return Move(QUESTION, dtag, etag, OQ)


def ans(core, dtag="", etag=()):
    return Move(core, dtag, etag, PA)


def play(*steps):
    s = JSeq.empty()
    for m, p in steps:
        s = s.snoc(m, p)
    return s


def numeral_tree(n):
    return tree_form({play(), play((q(), 0), (ans(n), 1))}, NAT.arena)


def numeral(n):
    return PStrategy(numeral_tree(n), NAT)


def answer_mirror(reply):
    def f(m):
        if m.is_question:
            return Move(reply(m), m.dtag, m.etag, PA)
        return None

    return MirrorSkeleton(universal_arena(), f)


def zeros():
    return answer_mirror(lambda m: 0)


def parity_family():
    """Fibres alternate: the two-valued game over even indices, the empty
    game over odd ones.  Only a strategy that interrogates its argument can
    stay inside every fibre."""

    base = lifted("N")

    def fib(a):
        return lifted("2") if numeral_value(a) % 2 == 0 else lifted("0")

    return DepPGame(base, fib, text="Parity")


# ---------------------------------------------------------------------------
# lifted games

def test_numeral_is_a_member_of_the_naturals():
    assert NAT.skeleton_member(numeral_tree(2), BOUND).status == "holds"


def test_oracles_are_probed_only_along_game_positions():
    # "answer zero wherever asked" denotes the zero numeral here: what the
    # mirror would do on offers the game never makes is unobservable
    assert NAT.skeleton_member(zeros(), BOUND).status == "holds"
    assert NAT.skeleton_member(guard(zeros(), NAT), BOUND).status == "holds"


def test_winning_enumeration_of_flat_games():
    wins = TWO.winning(BOUND)
    cores = {w.realizer.respond(play((q(), 0)))[0].core for w in wins}
    assert cores == {"tt", "ff"}
    assert TWO.winning_exhaustive(BOUND)

    nats = NAT.winning(BOUND)
    assert len(nats) == BOUND.max_branch
    assert not NAT.winning_exhaustive(BOUND)

    unit = lifted("1")
    assert len(unit.winning(BOUND)) == 1
    assert unit.winning_exhaustive(BOUND)
    assert lifted("0").winning(BOUND) == []


def test_lift_keeps_the_game_text():
    assert lift(construct(parse_game("2"))).text == "2"
    assert NAT.position_member(play((q(), 0), (ans(3), 1)))
    assert not NAT.position_member(play((q(), 0), (ans("tt"), 1)))


# ---------------------------------------------------------------------------
# positional constructions

def test_tensor_membership_allows_interleaving():
    g = tensor(TWO, TWO)
    one_side = play((q("0"), 0), (ans("tt", "0"), 1))
    both = play((q("0"), 0), (ans("tt", "0"), 1), (q("1"), 0), (ans("ff", "1"), 3))
    tree = tree_form({play(), one_side, both}, g.arena)
    assert g.skeleton_member(tree, BOUND).status == "holds"


def test_tensor_rejects_a_response_outside_the_component():
    g = tensor(TWO, TWO)
    junk = play((q("0"), 0), (ans("boom", "0"), 1))
    tree = tree_form({play(), junk}, universal_arena())
    v = g.skeleton_member(tree, BOUND)
    assert v.status == "violated"
    assert v.witness == junk


def test_product_winning_pairs_and_one_side_discipline():
    g = product(TWO, TWO)
    wins = g.winning(BOUND)
    assert len(wins) == 4
    assert g.winning_exhaustive(BOUND)
    for w in wins:
        assert g.skeleton_member(w.realizer, BOUND).status == "holds"

    # an answer on the other side of the pair is not a position
    astray = play((q("0"), 0), (ans("ff", "1"), 1))
    tree = tree_form({play(), astray}, universal_arena())
    assert g.skeleton_member(tree, BOUND).status == "violated"


def test_bang_membership_across_threads():
    g = bang(TWO)
    tt = guard(answer_mirror(lambda m: "tt"), g)
    assert g.skeleton_member(tt, BOUND).status == "holds"
    sevens = answer_mirror(lambda m: 7)
    assert g.skeleton_member(sevens, BOUND).status == "violated"


def test_copycat_inhabits_the_linear_function_space():
    g = lollipop(TWO, TWO)
    cc = copy_cat(TWO.arena)
    assert g.skeleton_member(cc, BOUND).status == "holds"
    # composition stays inside the function space
    assert g.skeleton_member(compose(cc, cc), BOUND).status == "holds"


def test_a_wrong_value_in_the_function_space_is_rejected():
    from playsem.arena import flip_op, retag, untag

    g = lollipop(TWO, TWO)

    def garble(m):
        inner, side = untag(m)
        if side == "right" and inner.is_question:
            return retag(flip_op(inner), "left")
        if side == "left" and inner.is_answer:
            return retag(Move(7, inner.dtag, inner.etag, PA), "right")
        return None

    v = g.skeleton_member(MirrorSkeleton(universal_arena(), garble), BOUND)
    assert v.status == "violated"


def test_dereliction_inhabits_the_function_space():
    g = arrow(TWO, TWO)
    der = dereliction(TWO.arena)
    assert g.skeleton_member(der, BOUND).status == "holds"


# ---------------------------------------------------------------------------
# dependent formers

def test_constant_product_has_the_function_space_positions():
    p = pi(TWO, constant_family(TWO, TWO))
    a = arrow(TWO, TWO)
    assert p.text == "Pi(x:2).2"
    assert a.text == "(2 -> 2)"
    from playsem.game import game_positions

    pp, _ = game_positions(p.carrier, BOUND)
    ap, _ = game_positions(a.carrier, BOUND)
    assert pp == ap
    der = dereliction(TWO.arena)
    assert p.skeleton_member(der, BOUND).status == "holds"


def test_integral_of_a_constant_family_is_its_target():
    assert integrate(constant_family(NAT, TWO), BOUND) is TWO


def test_integral_of_the_tensor_powers_unites_the_fibres():
    ig = integrate(tens_nat_family(), BOUND)
    assert ig.text.startswith("Integral(x:N).")
    assert ig.position_member(play((q("1"), 0), (ans(0, "1"), 1)))
    assert not ig.position_member(play((q("1"), 0), (ans("tt", "1"), 1)))


def test_sigma_over_tensor_powers_accepts_a_matching_pair():
    fam = tens_nat_family()
    g = sigma(NAT, fam)
    assert g.text == "Sigma(x:N).Tens_N"
    three = numeral_tree(3)
    fib3 = fam.fiber(PStrategy(three, NAT))
    assert fib3 == tens_power(3)
    pair = pairing(three, guard(zeros(), fib3))
    assert g.skeleton_member(pair, BOUND).status == "holds"
    # without the commitment to the selected fibre, the right half also
    # answers threads of wider fibres, and the dependency clause objects
    loose = pairing(three, zeros())
    assert g.skeleton_member(loose, TIGHT).status == "violated"


def test_sigma_over_tensor_powers_rejects_a_mismatched_pair():
    g = sigma(NAT, tens_nat_family())
    one_on_thread = tree_form(
        {play(), play((q("1"), 0), (ans(1, "1"), 1))}, universal_arena()
    )
    v = g.skeleton_member(pairing(numeral_tree(0), one_on_thread), BOUND)
    assert v.status == "violated"
    assert [m.core for m in v.witness.moves] == [QUESTION, 1]


def test_sigma_winning_obeys_the_fibres():
    g = sigma(NAT, parity_family())
    wins = g.winning(TIGHT)
    # indices 0 and 2 contribute two answers each, index 1 contributes none
    assert len(wins) == 4
    for w in wins:
        assert g.skeleton_member(w.realizer, TIGHT).status == "holds"
    assert not g.winning_exhaustive(TIGHT)


def test_sigma_membership_does_not_require_totality():
    g = sigma(NAT, parity_family())
    silent = tree_form({play()}, universal_arena())
    pair = pairing(numeral_tree(1), silent)
    assert g.skeleton_member(pair, BOUND).status == "holds"


def test_pi_over_tensor_powers_accepts_uniform_zeros():
    g = pi(NAT, tens_nat_family())
    assert g.skeleton_member(zeros(), TIGHT).status == "holds"


def test_pi_applies_its_candidate_to_every_index():
    g = pi(NAT, parity_family())
    # answering the result question without consulting the argument lands
    # outside the empty fibre over 1
    konst = answer_mirror(lambda m: "tt")
    assert g.skeleton_member(konst, BOUND).status == "violated"


def test_pi_accepts_a_strategy_that_consults_its_argument():
    from playsem.arena import bang_tag, flip_op, retag, untag, untag_exponential

    g = pi(NAT, parity_family())

    def consult(m):
        inner, side = untag(m)
        if side == "right" and inner.is_question:
            return retag(flip_op(bang_tag(inner, 0)), "left")
        if side == "left" and inner.is_answer:
            bare, _ = untag_exponential(flip_op(inner))
            if isinstance(bare.core, int) and bare.core % 2 == 0:
                return Move("tt", "1", (), PA)
            return None
        return None

    cand = MirrorSkeleton(universal_arena(), consult)
    assert g.skeleton_member(cand, BOUND).status == "holds"


def test_linear_pi_accepts_copycat():
    g = linear_pi(NAT, constant_family(NAT, NAT))
    assert g.text == "LinearPi(x:N).N"
    assert g.skeleton_member(copy_cat(NAT.arena), BOUND).status == "holds"


# ---------------------------------------------------------------------------
# handles and equality

def test_strategy_equality_probes_the_game_arena():
    assert strategies_equal(numeral(2), numeral(2), BOUND).equal
    rep = strategies_equal(numeral(2), numeral(3), BOUND)
    assert not rep.equal
    assert rep.witness is not None


def test_position_set_membership_rejects_forked_answers():
    forked = {
        play(),
        play((q(), 0), (ans("tt"), 1)),
        play((q(), 0), (ans("ff"), 1)),
    }
    v = position_set_member(TWO, forked, BOUND)
    assert v.status == "violated"
    assert "two answers" in v.witness


# ---------------------------------------------------------------------------
# identity fibres

def test_identity_fibre_of_equal_handles_is_the_unit():
    g = id_fiber(NAT, numeral(2), numeral(2), BOUND)
    assert g.text == "Id(N; l; r)"
    assert len(g.winning(BOUND)) == 1


def test_identity_fibre_of_distinct_handles_is_empty():
    g = id_fiber(NAT, numeral(1), numeral(2), BOUND)
    assert g.winning(BOUND) == []
    assert g.report.witness is not None


def test_identity_games_admit_no_code():
    g = id_fiber(NAT, numeral(2), numeral(2), BOUND)
    with pytest.raises(RankError):
        g.rank()
    with pytest.raises(RankError):
        code(g)


def test_an_unprobeable_handle_leaves_equality_undecided():
    class Hanger(Skeleton):
        def __init__(self):
            self.arena = universal_arena()

        def accepts_o(self, s, m, ptr):
            raise ChatterError("interaction does not surface")

        def respond(self, s):
            raise ChatterError("interaction does not surface")

    with pytest.raises(UndecidedError):
        id_fiber(NAT, PStrategy(Hanger(), NAT), numeral(2), BOUND)


# ---------------------------------------------------------------------------
# universes

def test_universe_answers_exactly_the_small_codes():
    u0 = universe(0)
    texts = set()
    for w in u0.winning(BOUND):
        m, _ = w.realizer.respond(play((q(), 0)))
        texts.add(m.core.text)
    assert texts == {"1", "0", "N"}
    assert u0.rank() == 1


def test_codes_decode_back_to_their_games():
    assert code(NAT) == Code("N")
    assert decode("N") == NAT
    s = sigma(NAT, constant_family(NAT, NAT))
    assert s.text == "Sigma(x:N).N"
    assert code(s) == Code("Sigma(x:N).N")
    assert decode("Pi(x:N).N").text == "Pi(x:N).N"


def test_el_reads_the_code_a_handle_answers():
    u0 = universe(0)
    for w in u0.winning(BOUND):
        m, _ = w.realizer.respond(play((q(), 0)))
        if m.core.text == "N":
            assert el(w) == NAT
            return
    raise AssertionError("no handle answered the naturals")


def test_universes_are_stratified_and_cumulative():
    u0, u1 = universe(0), universe(1)
    own_code = play((q(), 0), (ans(Code("U0")), 1))
    assert not u0.position_member(own_code)
    assert u1.position_member(own_code)
    for w in u0.winning(BOUND):
        m, _ = w.realizer.respond(play((q(), 0)))
        assert u1.position_member(play((q(), 0), (Move(m.core, "", (), PA), 1)))


def test_games_outside_the_grammar_have_no_code():
    with pytest.raises(RankError):
        code(TWO)
    with pytest.raises(RankError):
        code(sigma(NAT, tens_nat_family()))


# ---------------------------------------------------------------------------
# explicit games and the closure axioms

def test_finite_game_membership_is_subset_of_a_listed_tree():
    tt_tree = frozenset({play(), play((q(), 0)), play((q(), 0), (ans("tt"), 1))})
    g = FinitePGame([tt_tree], TWO.arena, "tt-only")
    yes = tree_form({play(), play((q(), 0), (ans("tt"), 1))}, TWO.arena)
    assert g.skeleton_member(yes, BOUND).status == "holds"
    no = tree_form({play(), play((q(), 0), (ans("ff"), 1))}, TWO.arena)
    assert g.skeleton_member(no, BOUND).status == "violated"


def test_axioms_hold_for_a_two_tree_game():
    arena = construct(flat(())).arena
    star = frozenset({play()})
    bullet = frozenset({play(), play((q(), 0))})
    g = FinitePGame([star, bullet], arena, "point")
    assert check_pgame_axioms(g).status == "holds"


def test_axioms_catch_a_missing_deterministic_subtree():
    arena = sum_arena(construct(flat(("a",))).arena, construct(flat(())).arena)
    qa = play((q("0"), 0), (ans("a", "0"), 1))
    members = [
        frozenset({play()}),
        frozenset({play(), play((q("1"), 0))}),
        frozenset({play(), qa.prefix(1), qa}),
        frozenset({play(), qa.prefix(1), qa, qa.snoc(q("1"), 0)}),
    ]
    g = FinitePGame(members, arena, "gappy")
    v = check_pgame_axioms(g)
    assert v.status == "violated"
    assert v.witness[0] == "downward"


def test_axioms_hold_for_the_trees_of_a_finite_product():
    game = construct(parse_game("(2 & 2)"))
    trees = t_skeletons(game, BOUND)
    assert len(trees) == 9
    g = FinitePGame(trees, game.arena, "(2 & 2)")
    assert check_pgame_axioms(g).status == "holds"
