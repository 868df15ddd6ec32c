"""The model layer: contexts, dependent types, terms, and context morphisms
over predicative games, with the substitution calculus and the formers for
functions, pairs, naturals, unit, empty, equality, and universes.

Equalities of morphisms and terms are bounded strategy comparisons probed
inside the relevant arrow game; type equality compares fibres at enumerable
points of the context.  Two laws are stated at closed instances or on points
rather than as raw strategy equations, because their sides differ by play
that is visible only in open contexts: the successor equation for the
natural recursor (the recursor interrogates its input through the successor,
the unfolded branch only when consulted) and the right inverse of the
diagonal into an equality context (the collapse reads the canonical copy of
a duplicated entry, the identity reads the copy that was asked).  Both hold
on every point, where the extra interrogations are sealed inside the seam.
"""

import pytest

from playsem.arena import Move, OQ, QUESTION
from playsem.game import game_positions
from playsem.position import JSeq
from playsem.skeleton import ExplorationBound, SkeletonError
from playsem.pgame import (
    DepPGame,
    PStrategy,
    RankError,
    forget,
    lifted,
    numeral_value,
    side_slice,
    tens_power,
)
from playsem.cwf import (
    MU,
    WPG,
    Ctx,
    JudgementError,
    Morphism,
    SemTm,
    SemTy,
    VariantError,
    app,
    apply_point,
    at_level,
    closed_numeral,
    compose_morphisms,
    el_ty,
    empty_ctx,
    empty_form,
    en,
    extend,
    id_family,
    id_form,
    identity,
    lam,
    lam_inv,
    nat_form,
    numeral_term,
    pair_inverse,
    pair_morphism,
    pi_form,
    point_of,
    pred_morphism,
    proj_p,
    proj_v,
    rec_id,
    rec_nat,
    rec_sigma,
    rec_unit,
    rec_zero,
    refl_inverse,
    refl_morphism,
    same_morphism,
    same_term,
    same_type,
    sigma_form,
    star_term,
    subst_tm,
    subst_ty,
    succ_morphism,
    succ_of,
    terminal_morphism,
    under_pi,
    under_sigma,
    unit_form,
    universe_form,
    variant_named,
    zero_morphism,
    zero_term,
)

BOUND = ExplorationBound(max_len=24, max_copies=2, max_branch=5)
SLIM = ExplorationBound(max_len=16, max_copies=2, max_branch=4)

T = empty_ctx(WPG)
N = nat_form(T)
TN = N.extended
NN = nat_form(TN)

TU = empty_ctx(MU)
NU = nat_form(TU)


def closed_point(n: int) -> Morphism:
    """The section of the naturals over the empty context picking n."""

    return extend(identity(T), numeral_term(T, n), N)


def weaken_along(f: Morphism, A: SemTy) -> Morphism:
    """Lift a morphism to the contexts extended by A and its pullback."""

    Af = subst_ty(A, f)
    return extend(compose_morphisms(f, proj_p(Af)), proj_v(Af), A)


def powers_over(ctx: Ctx) -> SemTy:
    # a genuinely dependent family: the fibre reads the last numeral entry
    nar = lifted("N").arena

    def fib(d: PStrategy):
        handle = PStrategy(side_slice(d.realizer, "right", nar), lifted("N"))
        return tens_power(numeral_value(handle))

    return SemTy(ctx, DepPGame(ctx.game, fib, text=""), "const", ())


def entry_value(f: Morphism) -> int:
    """Read the numeral entry of a point of the singly extended context."""

    pt = apply_point(f, PStrategy(identity(T).skel, T.game))
    handle = PStrategy(
        side_slice(pt.realizer, "right", lifted("N").arena), lifted("N")
    )
    return numeral_value(handle)


# ---------------------------------------------------------------------------
# the category of contexts

def test_identity_laws():
    f = closed_point(2)
    s = succ_morphism(T)
    for g in (f, s):
        assert same_morphism(compose_morphisms(identity(g.dst), g), g, BOUND).equal
        assert same_morphism(compose_morphisms(g, identity(g.src)), g, BOUND).equal


def test_composition_associative():
    f = closed_point(1)
    s = succ_morphism(T)
    lhs = compose_morphisms(compose_morphisms(s, s), f)
    rhs = compose_morphisms(s, compose_morphisms(s, f))
    assert same_morphism(lhs, rhs, BOUND).equal
    assert entry_value(lhs) == 3


def test_terminal_morphism_unique():
    # the empty context is terminal: both candidate collapses are silent
    assert same_morphism(terminal_morphism(TN), proj_p(N), BOUND).equal


def test_points_compose_with_morphisms():
    two = closed_point(2)
    assert entry_value(compose_morphisms(succ_morphism(T), two)) == 3
    assert entry_value(point_of(numeral_term(T, 4))) == 4


# ---------------------------------------------------------------------------
# substitution of types and terms

def test_ty_subst_identity():
    P = powers_over(TN)
    assert same_type(subst_ty(P, identity(TN)), P, SLIM)
    assert same_type(subst_ty(NN, identity(TN)), NN, SLIM)


def test_ty_subst_composition():
    P = powers_over(TN)
    f = succ_morphism(T)
    g = closed_point(1)
    lhs = subst_ty(subst_ty(P, f), g)
    rhs = subst_ty(P, compose_morphisms(f, g))
    assert same_type(lhs, rhs, SLIM)
    # the common fibre really moved: successor of 1 gives the square
    pt = PStrategy(identity(T).skel, T.game)
    assert lhs.family.fiber(pt) == tens_power(2)


def test_tm_subst_identity():
    v = proj_v(N)
    assert same_term(subst_tm(v, identity(TN)), v, BOUND).equal


def test_tm_subst_composition():
    v = proj_v(N)
    f = succ_morphism(T)
    g = closed_point(2)
    lhs = subst_tm(subst_tm(v, f), g)
    rhs = subst_tm(v, compose_morphisms(f, g))
    assert same_term(lhs, rhs, BOUND).equal
    assert closed_numeral(lhs) == 3
    assert closed_numeral(rhs) == 3


# ---------------------------------------------------------------------------
# comprehension

def test_extension_left_projection():
    m = extend(zero_morphism(T), numeral_term(T, 5), NN)
    assert same_morphism(compose_morphisms(proj_p(NN), m), zero_morphism(T), BOUND).equal


def test_extension_right_projection():
    m = extend(zero_morphism(T), numeral_term(T, 5), NN)
    got = subst_tm(proj_v(NN), m)
    assert closed_numeral(got) == 5
    assert same_term(got, numeral_term(T, 5), BOUND).equal


def test_extension_naturality():
    t = succ_of(proj_v(N))
    m = extend(proj_p(N), t, N)
    g = closed_point(4)
    lhs = compose_morphisms(m, g)
    rhs = extend(compose_morphisms(proj_p(N), g), subst_tm(t, g), N)
    assert same_morphism(lhs, rhs, BOUND).equal
    assert closed_numeral(subst_tm(proj_v(N), lhs)) == 5


def test_extension_of_projections_is_identity():
    assert same_morphism(extend(proj_p(N), proj_v(N), N), identity(TN), BOUND).equal


# ---------------------------------------------------------------------------
# dependent functions

def test_function_beta():
    b = succ_of(proj_v(N))
    k = lam(b, N)
    got = app(k, numeral_term(T, 3))
    assert closed_numeral(got) == 4
    assert same_term(got, subst_tm(b, closed_point(3)), BOUND).equal


def test_function_eta():
    k = lam(succ_of(proj_v(N)), N)
    assert same_term(lam(lam_inv(k), N), k, BOUND).equal


def test_abstraction_commutes_with_substitution():
    b = succ_of(proj_v(NN))
    f = closed_point(2)
    lhs = subst_tm(lam(b, NN), f)
    rhs = lam(subst_tm(b, weaken_along(f, NN)), subst_ty(NN, f))
    assert same_term(lhs, rhs, BOUND).equal


def test_application_commutes_with_substitution():
    b = succ_of(proj_v(NN))
    k = lam(b, NN)
    a = proj_v(N)
    f = closed_point(3)
    lhs = subst_tm(subst_tm(lam_inv(k), extend(identity(TN), a, NN)), f)
    rhs = subst_tm(lam_inv(k), extend(f, subst_tm(a, f), NN))
    assert same_term(lhs, rhs, BOUND).equal
    assert closed_numeral(lhs) == 4


def test_function_type_substitution():
    B = nat_form(NN.extended)
    f = closed_point(2)
    lhs = subst_ty(pi_form(NN, B), f)
    rhs = pi_form(subst_ty(NN, f), subst_ty(B, weaken_along(f, NN)))
    assert same_type(lhs, rhs, SLIM)
    pt = PStrategy(identity(T).skel, T.game)
    pa, _ = game_positions(forget(lhs.family.fiber(pt)), SLIM)
    pb, _ = game_positions(forget(rhs.family.fiber(pt)), SLIM)
    assert pa == pb


# ---------------------------------------------------------------------------
# dependent pairs

def test_pair_context_iso():
    B = nat_form(TN)
    fwd = pair_morphism(N, B)
    bwd = pair_inverse(N, B)
    assert same_morphism(compose_morphisms(bwd, fwd), identity(B.extended), SLIM).equal
    assert same_morphism(compose_morphisms(fwd, bwd), identity(fwd.dst), SLIM).equal


def test_pair_computation():
    B = nat_form(TN)
    h = succ_of(proj_v(B))
    r = rec_sigma(h, N, B)
    # feed the packed pair back through the regrouping
    got = subst_tm(r, pair_morphism(N, B))
    assert same_term(got, h, SLIM).equal


def test_pair_uniqueness():
    B = nat_form(TN)
    Sg = sigma_form(N, B)
    h = subst_tm(numeral_term(T, 6), proj_p(Sg))
    split = subst_tm(h, pair_morphism(N, B))
    assert same_term(rec_sigma(split, N, B), h, SLIM).equal


def test_pair_type_substitution():
    B = nat_form(NN.extended)
    f = closed_point(1)
    lhs = subst_ty(sigma_form(NN, B), f)
    rhs = sigma_form(subst_ty(NN, f), subst_ty(B, weaken_along(f, NN)))
    assert same_type(lhs, rhs, SLIM)
    pt = PStrategy(identity(T).skel, T.game)
    pa, _ = game_positions(forget(lhs.family.fiber(pt)), SLIM)
    pb, _ = game_positions(forget(rhs.family.fiber(pt)), SLIM)
    assert pa == pb


def test_pair_eliminator_commutes_with_substitution():
    A = nat_form(T)
    B = nat_form(A.extended)
    h = succ_of(proj_v(B))
    r = rec_sigma(h, A, B)
    f = proj_p(nat_form(T))
    f1 = weaken_along(f, A)
    f2 = weaken_along(f1, B)
    Sg = sigma_form(A, B)
    fS = weaken_along(f, Sg)
    lhs = subst_tm(r, fS)
    rhs = rec_sigma(subst_tm(h, f2), subst_ty(A, f), subst_ty(B, f1))
    assert same_term(lhs, rhs, SLIM).equal


# ---------------------------------------------------------------------------
# natural numbers

def recursor_add_two():
    """A recursor instance: start at seven, add one per step."""

    P = nat_form(TN)
    cz = numeral_term(T, 7)
    cs = succ_of(proj_v(P))
    return rec_nat(P, cz, cs)


def test_nat_zero_computation():
    r = recursor_add_two()
    got = subst_tm(r, extend(identity(T), zero_term(T), N))
    assert same_term(got, numeral_term(T, 7), SLIM).equal
    assert closed_numeral(got) == 7


def test_nat_successor_computation_on_points():
    r = recursor_add_two()
    cs = succ_of(proj_v(nat_form(TN)))
    lhs = subst_tm(r, succ_morphism(T))
    rhs = subst_tm(cs, extend(identity(TN), r, nat_form(TN)))
    for n, want in ((0, 8), (1, 9), (2, 10)):
        sec = closed_point(n)
        assert closed_numeral(subst_tm(lhs, sec)) == want
        assert closed_numeral(subst_tm(rhs, sec)) == want
    one = closed_point(1)
    assert same_term(subst_tm(lhs, one), subst_tm(rhs, one), SLIM).equal


def test_nat_recursor_commutes_with_substitution():
    P = nat_form(NN.extended)
    cz = proj_v(N)
    cs = succ_of(proj_v(P))
    r = rec_nat(P, cz, cs)
    f = closed_point(2)
    fp = weaken_along(f, NN)
    lhs = subst_tm(r, fp)
    Pf = subst_ty(P, fp)
    rhs = rec_nat(
        nat_form(subst_ty(NN, f).extended),
        subst_tm(cz, f),
        subst_tm(cs, weaken_along(fp, P)),
    )
    three = extend(identity(T), numeral_term(T, 3), subst_ty(NN, f))
    assert closed_numeral(subst_tm(lhs, three)) == 5
    assert closed_numeral(subst_tm(rhs, three)) == 5
    assert same_term(subst_tm(lhs, three), subst_tm(rhs, three), SLIM).equal
    assert Pf.family.text == "N"


def test_predecessor_equations():
    assert same_morphism(
        compose_morphisms(pred_morphism(T), succ_morphism(T)), identity(TN), BOUND
    ).equal
    assert same_morphism(
        compose_morphisms(pred_morphism(T), zero_morphism(T)), zero_morphism(T), BOUND
    ).equal


def test_doubling_by_recursion():
    P = nat_form(TN)
    cz = zero_term(T)
    cs = succ_of(succ_of(proj_v(P)))
    dbl = rec_nat(P, cz, cs)
    assert closed_numeral(subst_tm(dbl, closed_point(3))) == 6
    assert closed_numeral(subst_tm(dbl, closed_point(0))) == 0


# ---------------------------------------------------------------------------
# unit and empty

def test_star_unique():
    # every inhabitant of the unit collapses to the canonical one
    moved = subst_tm(star_term(TN), closed_point(3))
    assert same_term(moved, star_term(T), SLIM).equal
    c = numeral_term(T, 2)
    assert rec_unit(c, star_term(T)) is c


def test_empty_eliminator_substitution():
    E1 = empty_form(T)
    E2 = empty_form(TN)
    z = proj_v(E2)
    r = rec_zero(z, nat_form(E2.extended))
    g = compose_morphisms(zero_morphism(T), proj_p(E1))
    f = extend(g, SemTm(E1.extended, subst_ty(E2, g), proj_v(E1).skel), E2)
    lhs = subst_tm(r, f)
    rhs = rec_zero(subst_tm(z, f), subst_ty(nat_form(E2.extended), f))
    assert same_term(lhs, rhs, SLIM).equal
    assert lhs.validate(SLIM).status != "violated"


# ---------------------------------------------------------------------------
# equality types

def test_equality_formation():
    eq = id_form(N, numeral_term(T, 0), numeral_term(T, 0))
    ne = id_form(N, zero_term(T), succ_of(zero_term(T)))
    pt = T.game.winning(SLIM)[0]
    assert eq.family.fiber(pt).winning(SLIM)
    assert not ne.family.fiber(pt).winning(SLIM)


def test_diagonal_left_inverse():
    rm = refl_morphism(N)
    ri = refl_inverse(N)
    assert same_morphism(compose_morphisms(ri, rm), identity(TN), SLIM).equal


def test_diagonal_right_inverse_on_points():
    rm = refl_morphism(N)
    ri = refl_inverse(N)
    around = compose_morphisms(rm, ri)
    for n in (0, 2):
        pt = compose_morphisms(rm, closed_point(n))
        assert same_morphism(compose_morphisms(around, pt), pt, SLIM).equal


def test_equality_computation():
    for b, want in ((succ_of(proj_v(N)), 3), (proj_v(N), 2)):
        r = rec_id(b, N)
        back = subst_tm(r, refl_morphism(N))
        assert same_term(back, b, SLIM).equal
        assert closed_numeral(subst_tm(back, closed_point(2))) == want


def test_diagonal_commutes_with_substitution():
    A = nat_form(TN)
    f = closed_point(2)
    fp = weaken_along(f, A)
    A2 = subst_ty(A, proj_p(A))
    fpp = weaken_along(fp, A2)
    fppp = weaken_along(fpp, id_family(A))
    lhs = compose_morphisms(refl_morphism(A), fp)
    rhs = compose_morphisms(fppp, refl_morphism(subst_ty(A, f)))
    assert same_morphism(lhs, rhs, SLIM).equal


def test_equality_type_substitution():
    A = nat_form(TN)
    f = closed_point(1)
    fp = weaken_along(f, A)
    fpp = weaken_along(fp, subst_ty(A, proj_p(A)))
    lhs = subst_ty(id_family(A), fpp)
    rhs = id_family(subst_ty(A, f))
    assert same_type(lhs, rhs, SLIM)
    assert lhs.ctx == rhs.ctx


def test_equality_needs_identity_variant():
    with pytest.raises(VariantError):
        id_family(NU)


# ---------------------------------------------------------------------------
# universes

def test_code_decode_roundtrip():
    c = en(NU)
    assert same_type(el_ty(c), NU, SLIM)
    assert same_term(en(el_ty(c)), c, SLIM).equal


def test_codes_of_compound_types():
    NNu = nat_form(NU.extended)
    k = en(pi_form(NU, NNu))
    s = en(sigma_form(NU, NNu))
    assert same_term(k, under_pi(en(NU), en(NNu)), SLIM).equal
    assert same_term(s, under_sigma(en(NU), en(NNu)), SLIM).equal
    assert same_type(el_ty(k), pi_form(NU, NNu), SLIM)


def test_code_commutes_with_substitution():
    g = extend(identity(TU), numeral_term(TU, 2), NU)
    NNu = nat_form(NU.extended)
    lhs = en(subst_ty(NNu, g))
    rhs = subst_tm(en(NNu), g)
    assert same_term(lhs, rhs, SLIM).equal


def test_cumulativity():
    c = en(NU)
    up = at_level(c, 1)
    assert up.ty.family.constant.rank() == 1
    assert same_type(el_ty(up), NU, SLIM)
    assert universe_form(TU, 1).family.constant.rank() == 1


def test_universes_need_their_variant():
    with pytest.raises(VariantError):
        universe_form(T, 0)
    with pytest.raises(VariantError):
        en(N)


# ---------------------------------------------------------------------------
# judgement discipline

def test_variant_registry():
    assert variant_named("wpg") is WPG
    assert variant_named("mu") is MU
    with pytest.raises(VariantError):
        variant_named("between")


def test_context_mismatches_are_rejected():
    with pytest.raises(JudgementError):
        subst_ty(NN, closed_point(2).skel and identity(T))
    with pytest.raises(JudgementError):
        extend(identity(T), numeral_term(TU, 1), N)
    with pytest.raises(JudgementError):
        rec_nat(nat_form(T), numeral_term(T, 0), numeral_term(T, 0))
    with pytest.raises(JudgementError):
        app(numeral_term(T, 1), numeral_term(T, 1))
