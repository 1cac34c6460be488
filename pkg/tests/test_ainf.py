"""Structure layer: brackets, residual checks, homotopies, transports."""

import random

from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from necklace.ainf import (
    AInfMorphismData,
    AInfStructure,
    BigBracket,
    CheckReport,
    FixedBracket,
    antisymmetry_residual,
    arity_part,
    big_bracket,
    chain_homotopy_extract,
    compose_morphisms,
    contractible_homotopy,
    direct_sum_structure,
    fixed_bracket,
    flow_homotopy,
    gerstenhaber_bracket,
    homotopy_check,
    identity_morphism,
    insert_compose,
    jacobi_residual,
    mc_residual,
    morphism_residual,
    quasi_iso_check,
    stasheff_residual,
    summand_inclusion,
    summand_projection,
    transport_homotopy,
    weak_endpoints,
    weak_family,
)
from necklace.quivers import (
    ArgumentError,
    DegreeError,
    GradedQuiver,
    MultiMap,
    PolyFamily,
    TriplePoint,
    TruncationError,
    identity_object_map,
)

from fixtures import (
    contractible_pair,
    dual_numbers,
    dual_numbers_m2,
    dual_numbers_m2_shifted,
    random_endo_map,
    two_object_m2,
    two_object_quiver,
)

F = Fraction


def base_structure():
    return AInfStructure(dual_numbers_m2_shifted())


def sum_fixture():
    """Base structure extended by a contractible two-arrow summand."""
    base = base_structure()
    ext, d, h = contractible_pair()
    total = direct_sum_structure(base, ext, d)
    return base, ext, d, h, total


def diag_morphism(quiver, scales, window=4):
    comps = {}
    for name in quiver.all_arrow_names():
        src, tgt = quiver.ends(name)
        comps.setdefault((tgt, src), {})[(name,)] = {name: scales[name]}
    return AInfMorphismData(
        MultiMap(quiver, quiver, identity_object_map(quiver), comps, 0, window)
    )


class TestInsertCompose:
    def test_arity_one_is_plain_composition(self):
        q = dual_numbers()
        ident = identity_object_map(q)
        f = MultiMap(q, q, ident,
                     {("*", "*"): {("one",): {"one": F(2)}, ("x",): {"x": F(3)}}},
                     0, 2)
        g = MultiMap(q, q, ident,
                     {("*", "*"): {("one",): {"one": F(5)}, ("x",): {"x": F(7)}}},
                     0, 2)
        got = insert_compose(f, g)
        assert got.components == {
            ("*", "*"): {("one",): {"one": F(10)}, ("x",): {"x": F(21)}}
        }
        assert got.intrinsic_degree == 0

    def test_twisted_product_self_insertion_vanishes(self):
        m = dual_numbers_m2_shifted()
        assert insert_compose(m, m).is_zero()

    def test_plain_product_self_insertion_localises(self):
        m = dual_numbers_m2()
        got = insert_compose(m, m)
        assert got.components == {
            ("*", "*", "*", "*"): {("x", "one", "one"): {"x": F(2)}}
        }

    def test_zero_inner_gives_zero(self):
        m = dual_numbers_m2_shifted()
        assert insert_compose(m, m.scale(F(0))).is_zero()

    def test_wide_outer_needs_matching_sources(self):
        q = dual_numbers()
        other = two_object_quiver()
        f = dual_numbers_m2_shifted()
        g = MultiMap(other, q, {"u": "*", "v": "*"},
                     {("u", "u"): {("r",): {"x": F(1)}}}, 0, 2)
        with pytest.raises(ArgumentError):
            insert_compose(f, g)

    def test_arity_one_outer_composes_across_quivers(self):
        q = dual_numbers()
        other = two_object_quiver()
        f = MultiMap(q, q, identity_object_map(q),
                     {("*", "*"): {("x",): {"x": F(2)}}}, 0, 1)
        g = MultiMap(other, q, {"u": "*", "v": "*"},
                     {("u", "u"): {("r",): {"x": F(3)}}}, 0, 2)
        got = insert_compose(f, g)
        assert got.components == {("u", "u"): {("r",): {"x": F(6)}}}


class TestStructureType:
    def test_twisted_product_accepted(self):
        m = base_structure()
        assert m.max_arity == 4
        assert m.quiver == dual_numbers()

    def test_two_object_product_accepted(self):
        AInfStructure(two_object_m2())

    def test_zero_structure_accepted(self):
        m = dual_numbers_m2_shifted().scale(F(0))
        AInfStructure(m)

    def test_plain_product_rejected_with_location(self):
        with pytest.raises(ArgumentError) as err:
            AInfStructure(dual_numbers_m2())
        assert "('*', '*', '*', '*')" in str(err.value)

    def test_unverified_flag_stores_broken_table(self):
        m = AInfStructure(dual_numbers_m2(), verify=False)
        assert not stasheff_residual(m).passed()

    def test_residual_report_locates_support(self):
        report = stasheff_residual(dual_numbers_m2())
        assert report.verdict == "fail"
        assert report.residual_support == [
            (("*", "*", "*", "*"), (("x", "one", "one"), ("x",)), F(2))
        ]
        assert report.bounds_used == {"max_arity": 4}

    def test_wrong_intrinsic_degree_rejected(self):
        q = dual_numbers()
        m = MultiMap(q, q, identity_object_map(q), {}, 0, 2)
        with pytest.raises(DegreeError):
            AInfStructure(m)

    def test_cross_quiver_rejected(self):
        q = dual_numbers()
        other = two_object_quiver()
        m = MultiMap(other, q, {"u": "*", "v": "*"}, {}, 1, 2)
        with pytest.raises(ArgumentError):
            AInfStructure(m)


class TestMorphismResidual:
    def test_identity_passes(self):
        m = base_structure()
        report = morphism_residual(m, m, identity_morphism(m))
        assert report.passed()

    def test_arity_one_non_chain_map_fails_at_arity_one(self):
        base, ext, d, h, total = sum_fixture()
        q = total.quiver
        scales = {n: F(1) for n in q.all_arrow_names()}
        scales["u"] = F(2)
        f = diag_morphism(q, scales)
        report = morphism_residual(total, total, f)
        assert report.verdict == "fail"
        assert all(len(loc) == 2 for loc, _, _ in report.residual_support)
        assert (("*", "*"), (("u",), ("v",)), F(1)) in report.residual_support

    def test_summand_inclusion_passes(self):
        base, ext, d, h, total = sum_fixture()
        report = morphism_residual(base, total, summand_inclusion(base, total))
        assert report.passed()

    def test_degree_guard(self):
        m = base_structure()
        with pytest.raises(DegreeError):
            morphism_residual(m, m, m.underlying)

    def test_quiver_mismatch_rejected(self):
        m = base_structure()
        t = AInfStructure(two_object_m2())
        with pytest.raises(ArgumentError):
            morphism_residual(m, t, identity_morphism(m))


class TestComposeMorphisms:
    def test_identity_is_neutral(self):
        base, ext, d, h, total = sum_fixture()
        ident = identity_morphism(total)
        scales = {n: F(1) for n in total.quiver.all_arrow_names()}
        scales["u"] = F(2)
        scales["v"] = F(2)
        f = diag_morphism(total.quiver, scales)
        assert compose_morphisms(ident, f).underlying == f.underlying
        assert compose_morphisms(f, ident).underlying == f.underlying

    def test_arity_one_parts_multiply_as_matrices(self):
        rng = random.Random(21)
        q = dual_numbers()
        f = arity_part(random_endo_map(rng, q, 0, entries=3, max_arity=1), 1)
        g = arity_part(random_endo_map(rng, q, 0, entries=3, max_arity=1), 1)
        got = compose_morphisms(AInfMorphismData(f), AInfMorphismData(g))
        assert got.underlying.components == insert_compose(f, g).components

    def test_composite_of_verified_morphisms_verifies(self):
        base, ext, d, h, total = sum_fixture()
        inc = summand_inclusion(base, total)
        proj = summand_projection(total, base)
        both = compose_morphisms(inc, proj)
        assert morphism_residual(total, total, both).passed()
        back = compose_morphisms(proj, inc)
        assert morphism_residual(base, base, back).passed()
        assert back.underlying == identity_morphism(base).underlying

    def test_mismatched_quivers_rejected(self):
        m = base_structure()
        t = AInfStructure(two_object_m2())
        with pytest.raises(ArgumentError):
            compose_morphisms(identity_morphism(m), identity_morphism(t))


class TestFixedBracket:
    def test_single_argument_matches_residual_at_arity_one(self):
        base, ext, d, h, total = sum_fixture()
        rng = random.Random(5)
        f = random_endo_map(rng, total.quiver, 0, entries=4, max_arity=1)
        bracket = FixedBracket(total, total)
        got = arity_part(bracket.apply([f]), 1)
        d1 = arity_part(total.underlying, 1)
        f1 = arity_part(f, 1)
        want = insert_compose(d1, f1).add(insert_compose(f1, d1), F(-1))
        assert got.components == want.components

    def test_zero_argument_gives_zero(self):
        m = base_structure()
        rng = random.Random(6)
        f = random_endo_map(rng, m.quiver, 0)
        zero = f.scale(F(0))
        assert fixed_bracket(m, m, [f, zero]).is_zero()
        assert fixed_bracket(m, m, [zero]).is_zero()

    def test_pair_values_are_generically_nonzero(self):
        base, ext, d, h, total = sum_fixture()
        rng = random.Random(7)
        found = False
        for _ in range(20):
            f = random_endo_map(rng, total.quiver, 0, entries=3)
            g = random_endo_map(rng, total.quiver, 1, entries=3)
            if not fixed_bracket(total, total, [f, g]).is_zero():
                found = True
                break
        assert found

    def test_arity_beyond_structure_bound_raises(self):
        m = base_structure()
        zero = m.underlying.zero_like(0)
        with pytest.raises(TruncationError):
            fixed_bracket(m, m, [zero] * 5)

    def test_dropped_commutator_term_breaks_antisymmetry(self):
        base, ext, d, h, total = sum_fixture()
        bracket = FixedBracket(total, total)

        class DroppedTermBracket:
            """Pair bracket keeping only one insertion order.

            Negative control: without the commutator's second term the
            graded swap law must fail on generic arguments.
            """

            def carrier_degree(self, element):
                return element.intrinsic_degree

            def apply(self, args):
                if len(args) == 2:
                    return insert_compose(args[1], args[0])
                total_deg = sum(a.intrinsic_degree for a in args)
                return args[0].zero_like(total_deg)

        rng = random.Random(9)
        found = False
        for _ in range(20):
            f = random_endo_map(rng, total.quiver, 1, entries=3)
            g = random_endo_map(rng, total.quiver, 1, entries=3)
            good = antisymmetry_residual(bracket, [f, g], 0)
            assert good.is_zero()
            bad = antisymmetry_residual(DroppedTermBracket(), [f, g], 0)
            if not bad.is_zero():
                found = True
                break
        assert found

    def test_swap_position_validated(self):
        m = base_structure()
        f = m.underlying.zero_like(0)
        with pytest.raises(ArgumentError):
            antisymmetry_residual(FixedBracket(m, m), [f, f], 1)


@settings(max_examples=20, deadline=None)
@given(st.integers(min_value=0, max_value=2**32 - 1))
def test_bracket_antisymmetry_randomized(seed):
    rng = random.Random(seed)
    base = AInfStructure(dual_numbers_m2_shifted())
    ext, d, h = contractible_pair()
    total = direct_sum_structure(base, ext, d)
    bracket = FixedBracket(total, total)
    degrees = [rng.choice([-1, 0, 1]) for _ in range(3)]
    args = [random_endo_map(rng, total.quiver, dg, entries=3) for dg in degrees]
    for i in range(2):
        assert antisymmetry_residual(bracket, args, i).is_zero()


@settings(max_examples=20, deadline=None)
@given(st.integers(min_value=0, max_value=2**32 - 1))
def test_bracket_jacobi_randomized(seed):
    rng = random.Random(seed)
    base = AInfStructure(dual_numbers_m2_shifted())
    ext, d, h = contractible_pair()
    total = direct_sum_structure(base, ext, d)
    bracket = FixedBracket(total, total)
    n = rng.choice([2, 3])
    degrees = [rng.choice([-1, 0, 1]) for _ in range(n)]
    args = [random_endo_map(rng, total.quiver, dg, entries=3) for dg in degrees]
    assert jacobi_residual(bracket, args).is_zero()


def test_jacobi_bound_enforced():
    m = base_structure()
    zero = m.underlying.zero_like(0)
    with pytest.raises(ArgumentError):
        jacobi_residual(FixedBracket(m, m), [zero] * 4)


class PairOnlyBracket:
    """Insertion-commutator bracket family: binary term only.

    Its pair bracket satisfies the Jacobi identity for structural reasons,
    which makes it an independent witness for the unshuffle signs used by
    jacobi_residual.
    """

    def carrier_degree(self, element):
        return element.intrinsic_degree

    def apply(self, args):
        if len(args) == 2:
            return gerstenhaber_bracket(args[1], args[0])
        total = sum(a.intrinsic_degree for a in args)
        return args[0].zero_like(total)


class TestPairOnlyBracketLaws:
    def test_antisymmetry_all_degrees(self):
        rng = random.Random(13)
        q = dual_numbers()
        bracket = PairOnlyBracket()
        for _ in range(10):
            x = random_endo_map(rng, q, rng.choice([-1, 0, 1, 2]), entries=3)
            y = random_endo_map(rng, q, rng.choice([-1, 0, 1, 2]), entries=3)
            assert antisymmetry_residual(bracket, [x, y], 0).is_zero()

    def test_jacobi_three_arguments(self):
        rng = random.Random(17)
        q = dual_numbers()
        bracket = PairOnlyBracket()
        for _ in range(10):
            args = [
                random_endo_map(rng, q, rng.choice([-1, 0, 1]), entries=3)
                for _ in range(3)
            ]
            assert jacobi_residual(bracket, args).is_zero()


class TestMcResidual:
    def test_verified_morphism_passes(self):
        base, ext, d, h, total = sum_fixture()
        inc = summand_inclusion(base, total)
        proj = summand_projection(total, base)
        both = compose_morphisms(inc, proj)
        assert mc_residual(total, total, both).passed()

    def test_zero_map_passes(self):
        m = base_structure()
        zero = m.underlying.zero_like(0)
        assert mc_residual(m, m, zero).passed()

    def test_non_morphism_fails_on_matching_support(self):
        base, ext, d, h, total = sum_fixture()
        rng = random.Random(31)
        for _ in range(5):
            f = random_endo_map(rng, total.quiver, 0, entries=5)
            mc = mc_residual(total, total, f)
            mr = morphism_residual(total, total, f)
            assert mc.verdict == mr.verdict
            assert mc.residual_support == mr.residual_support
            if not mc.passed():
                return
        raise AssertionError("random sampling produced only morphisms")

    def test_degree_guard(self):
        m = base_structure()
        with pytest.raises(DegreeError):
            mc_residual(m, m, m.underlying.zero_like(1))


class TestBigBracket:
    def mk_points(self):
        base, ext, d, h, total = sum_fixture()
        mm = total.underlying
        f = identity_morphism(total).underlying
        return mm, f

    def test_mixed_sides_vanish(self):
        mm, f = self.mk_points()
        a = TriplePoint(None, None, mm, "ainf")
        b = TriplePoint(mm, None, None, "ainf")
        assert big_bracket([a, b]).is_zero()

    def test_all_middles_vanish(self):
        mm, f = self.mk_points()
        pt = TriplePoint(None, f, None, "ainf")
        assert big_bracket([pt, pt]).is_zero()
        assert big_bracket([pt, pt, pt]).is_zero()

    def test_single_argument_vanishes(self):
        mm, f = self.mk_points()
        assert big_bracket([TriplePoint(mm, None, None, "ainf")]).is_zero()

    def test_wide_brackets_with_outer_slots_vanish(self):
        mm, f = self.mk_points()
        mid = TriplePoint(None, f, None, "ainf")
        src = TriplePoint(None, None, mm, "ainf")
        tgt = TriplePoint(mm, None, None, "ainf")
        assert big_bracket([mid, mid, src]).is_zero()
        assert big_bracket([mid, tgt, tgt]).is_zero()

    def test_same_side_pair_is_insertion_commutator(self):
        mm, f = self.mk_points()
        a = TriplePoint(mm, None, None, "ainf")
        got = big_bracket([a, a])
        want = gerstenhaber_bracket(mm, mm)
        assert got.target_structure == want
        assert got.middle is None and got.source_structure is None

    def test_source_structure_insertion_is_symmetric_for_odd_pairs(self):
        mm, f = self.mk_points()
        src = TriplePoint(None, None, mm, "ainf")
        mid = TriplePoint(None, f, None, "ainf")
        lead = big_bracket([src, mid])
        trail = big_bracket([mid, src])
        base_val = insert_compose(f, mm)
        assert lead.middle == base_val.scale(F(-1))
        assert trail.middle == base_val.scale(F(-1))
        assert lead.target_structure is None and lead.source_structure is None

    def test_carrier_homogeneity_enforced(self):
        mm, f = self.mk_points()
        bad = TriplePoint(mm, mm, None, "ainf")
        with pytest.raises(DegreeError):
            big_bracket([bad, bad])

    def test_laws_on_mixed_points(self):
        base, ext, d, h, total = sum_fixture()
        q = total.quiver
        bracket = BigBracket()
        rng = random.Random(41)
        for _ in range(4):
            p1 = random_endo_map(rng, q, 1, entries=3)
            p2 = random_endo_map(rng, q, 0, entries=3)
            f = random_endo_map(rng, q, 0, entries=3)
            pts = [
                TriplePoint(None, f, None, "ainf"),
                TriplePoint(p2, None, None, "ainf"),
                TriplePoint(p1, None, None, "ainf"),
            ]
            assert jacobi_residual(bracket, pts).is_zero()
            assert antisymmetry_residual(bracket, pts, 1).is_zero()
            low = [
                TriplePoint(None, f, None, "ainf"),
                TriplePoint(None, None, p2, "ainf"),
                TriplePoint(None, None, p1, "ainf"),
            ]
            assert jacobi_residual(bracket, low).is_zero()


class TestHomotopyCheck:
    def test_constant_family_passes(self):
        base, ext, d, h, total = sum_fixture()
        ident = identity_morphism(total)
        fam = PolyFamily([ident.underlying], [ident.underlying.zero_like(-1)])
        bracket = FixedBracket(total, total)
        report = homotopy_check(bracket, fam, (ident, ident))
        assert report.passed()

    def test_contraction_family_passes(self):
        base, ext, d, h, total = sum_fixture()
        fam = contractible_homotopy(base, ext, d, h)
        inc = summand_inclusion(base, total)
        proj = summand_projection(total, base)
        both = compose_morphisms(inc, proj)
        ident = identity_morphism(total)
        bracket = FixedBracket(total, total)
        report = homotopy_check(bracket, fam, (both, ident))
        assert report.passed()
        assert report.bounds_used["max_arity"] == 4

    def test_zeroed_direction_fails_at_flow(self):
        base, ext, d, h, total = sum_fixture()
        fam = contractible_homotopy(base, ext, d, h)
        broken = PolyFamily(
            list(fam.a_coeffs), [fam.b_coeffs[0].scale(F(0))]
        )
        inc = summand_inclusion(base, total)
        proj = summand_projection(total, base)
        both = compose_morphisms(inc, proj)
        ident = identity_morphism(total)
        report = homotopy_check(FixedBracket(total, total), broken, (both, ident))
        assert report.verdict == "fail"
        conditions = {row[0][0] for row in report.residual_support}
        assert conditions == {"flow"}

    def test_wrong_endpoint_fails_at_endpoint(self):
        base, ext, d, h, total = sum_fixture()
        fam = contractible_homotopy(base, ext, d, h)
        ident = identity_morphism(total)
        report = homotopy_check(FixedBracket(total, total), fam, (ident, ident))
        conditions = {row[0][0] for row in report.residual_support}
        assert "endpoint-0" in conditions

    def test_direction_degree_guard(self):
        base, ext, d, h, total = sum_fixture()
        ident = identity_morphism(total)
        fam = PolyFamily([ident.underlying], [ident.underlying])
        with pytest.raises(DegreeError):
            homotopy_check(FixedBracket(total, total), fam, (ident, ident))

    def test_wrapped_family_passes_weak_mode(self):
        base, ext, d, h, total = sum_fixture()
        fam = contractible_homotopy(base, ext, d, h)
        inc = summand_inclusion(base, total)
        proj = summand_projection(total, base)
        both = compose_morphisms(inc, proj)
        ident = identity_morphism(total)
        wrapped = weak_family(total, total, fam)
        ends = weak_endpoints(total, total, both, ident)
        report = homotopy_check(BigBracket(), wrapped, ends)
        assert report.passed()


class TestContractibleHomotopy:
    def test_two_dimensional_extension(self):
        base, ext, d, h, total = sum_fixture()
        fam = contractible_homotopy(base, ext, d, h)
        assert [c.intrinsic_degree for c in fam.a_coeffs] == [0, 0]
        assert [c.intrinsic_degree for c in fam.b_coeffs] == [-1]

    def test_empty_extension_gives_constant_family(self):
        base = base_structure()
        ext = GradedQuiver(["*"], {})
        zero = MultiMap(ext, ext, identity_object_map(ext), {}, 1, 4)
        zero_h = MultiMap(ext, ext, identity_object_map(ext), {}, -1, 4)
        fam = contractible_homotopy(base, ext, zero, zero_h)
        total = direct_sum_structure(base, ext, zero)
        ident = identity_morphism(total)
        assert fam.a_at(0) == ident.underlying
        assert fam.a_at(1) == ident.underlying
        report = homotopy_check(
            FixedBracket(total, total), fam, (ident, ident)
        )
        assert report.passed()

    def test_scaled_contraction_rejected(self):
        base = base_structure()
        ext, d, h = contractible_pair()
        with pytest.raises(ArgumentError):
            contractible_homotopy(base, ext, d, h.scale(F(2)))

    def test_non_square_differential_rejected(self):
        base = base_structure()
        ext = GradedQuiver(["*"], {("*", "*"): [("u", 0), ("v", 1), ("w", 2)]})
        ident = identity_object_map(ext)
        d = MultiMap(ext, ext, ident,
                     {("*", "*"): {("u",): {"v": F(1)}, ("v",): {"w": F(1)}}},
                     1, 4)
        h = MultiMap(ext, ext, ident,
                     {("*", "*"): {("v",): {"u": F(1)}, ("w",): {"v": F(1)}}},
                     -1, 4)
        with pytest.raises(ArgumentError):
            contractible_homotopy(base, ext, d, h)


class TestFlowHomotopy:
    def test_generated_family_passes_and_ends_on_morphism(self):
        base, ext, d, h, total = sum_fixture()
        q = total.quiver
        ident = identity_morphism(total)
        direction = MultiMap(
            q, q, identity_object_map(q),
            {("*", "*"): {("v",): {"u": F(3)}},
             ("*", "*", "*"): {("x", "v"): {"one": F(2), "u": F(1)}}},
            -1, 4,
        )
        bracket = FixedBracket(total, total)
        fam = flow_homotopy(bracket, ident, direction)
        report = homotopy_check(bracket, fam, (fam.a_at(0), fam.a_at(1)))
        assert report.passed()
        end = fam.a_at(1)
        assert morphism_residual(total, total, end).passed()
        assert mc_residual(total, total, end).passed()

    def test_zero_direction_returns_constant(self):
        m = base_structure()
        ident = identity_morphism(m)
        zero = ident.underlying.zero_like(-1)
        fam = flow_homotopy(FixedBracket(m, m), ident, zero)
        assert fam.a_at(0) == ident.underlying
        assert fam.a_at(1) == ident.underlying


class TestTransportHomotopy:
    def iso_fixture(self):
        base, ext, d, h, total = sum_fixture()
        q = total.quiver
        scales = {"u": F(2), "v": F(2), "x": F(-1), "one": F(1)}
        iso = diag_morphism(q, scales)
        assert morphism_residual(total, total, iso).passed()
        fam = contractible_homotopy(base, ext, d, h)
        return total, iso, fam

    def test_identity_transport_keeps_family(self):
        total, iso, fam = self.iso_fixture()
        ident = identity_morphism(total)
        for side in ("left", "right"):
            moved = transport_homotopy(ident, fam, side)
            assert [c.components for c in moved.a_coeffs] == [
                c.components for c in fam.a_coeffs
            ]
            assert [c.components for c in moved.b_coeffs] == [
                c.components for c in fam.b_coeffs
            ]

    def test_left_transport_passes_checker(self):
        total, iso, fam = self.iso_fixture()
        moved = transport_homotopy(iso, fam, "left")
        ends = tuple(
            compose_morphisms(iso, AInfMorphismData(fam.a_at(t)))
            for t in (0, 1)
        )
        report = homotopy_check(FixedBracket(total, total), moved, ends)
        assert report.passed()

    def test_right_transport_passes_checker(self):
        total, iso, fam = self.iso_fixture()
        moved = transport_homotopy(iso, fam, "right")
        ends = tuple(
            compose_morphisms(AInfMorphismData(fam.a_at(t)), iso)
            for t in (0, 1)
        )
        report = homotopy_check(FixedBracket(total, total), moved, ends)
        assert report.passed()

    def test_diagonal_transport_rescales_direction_entries(self):
        total, iso, fam = self.iso_fixture()
        scales = {"u": F(2), "v": F(2), "x": F(-1), "one": F(1)}
        right = transport_homotopy(iso, fam, "right")
        left = transport_homotopy(iso, fam, "left")
        for k, source in enumerate(fam.b_coeffs):
            for x, ins, outs, coeff in source.entries():
                out = outs[0]
                factor = F(1)
                for name in ins:
                    factor *= scales[name]
                assert right.b_coeffs[k].components[x][ins][out] == coeff * factor
                assert (left.b_coeffs[k].components[x][ins][out]
                        == coeff * scales[out])

    def test_unknown_side_rejected(self):
        total, iso, fam = self.iso_fixture()
        with pytest.raises(ArgumentError):
            transport_homotopy(iso, fam, "middle")

    def test_degree_guard(self):
        total, iso, fam = self.iso_fixture()
        with pytest.raises(DegreeError):
            transport_homotopy(iso.underlying.zero_like(1), fam, "left")


class TestQuasiIso:
    def test_identity_is_quasi_iso(self):
        base, ext, d, h, total = sum_fixture()
        got = quasi_iso_check(total, total, identity_morphism(total))
        assert got == {("*", "*"): True}

    def test_summand_inclusion_is_quasi_iso(self):
        base, ext, d, h, total = sum_fixture()
        inc = summand_inclusion(base, total)
        got = quasi_iso_check(base, total, inc)
        assert got == {("*", "*"): True}

    def test_zero_map_between_nontrivial_complexes_is_not(self):
        m = base_structure()
        zero = m.underlying.zero_like(0)
        got = quasi_iso_check(m, m, zero)
        assert got == {("*", "*"): False}

    def test_non_square_differential_rejected(self):
        q = GradedQuiver(["*"], {("*", "*"): [("a", 0), ("b", 1), ("c", 2)]})
        ident = identity_object_map(q)
        m = MultiMap(q, q, ident,
                     {("*", "*"): {("a",): {"b": F(1)}, ("b",): {"c": F(1)}}},
                     1, 2)
        zero = m.zero_like(0)
        with pytest.raises(ArgumentError):
            quasi_iso_check(m, m, zero)

    def test_non_chain_map_rejected(self):
        base, ext, d, h, total = sum_fixture()
        q = total.quiver
        scales = {n: F(1) for n in q.all_arrow_names()}
        scales["u"] = F(2)
        f = diag_morphism(q, scales)
        with pytest.raises(ArgumentError):
            quasi_iso_check(total, total, f)


class TestChainHomotopyExtract:
    def test_constant_family_extracts_zero(self):
        base, ext, d, h, total = sum_fixture()
        ident = identity_morphism(total)
        fam = PolyFamily([ident.underlying], [ident.underlying.zero_like(-1)])
        K, report = chain_homotopy_extract(total, total, fam)
        assert K.is_zero()
        assert report.passed()

    def test_contraction_family_extracts_the_contraction(self):
        base, ext, d, h, total = sum_fixture()
        fam = contractible_homotopy(base, ext, d, h)
        K, report = chain_homotopy_extract(total, total, fam)
        assert K.components == {("*", "*"): {("v",): {"u": F(1)}}}
        assert report.passed()

    def test_linear_direction_integrates_to_half(self):
        base, ext, d, h, total = sum_fixture()
        ident = identity_morphism(total)
        q = total.quiver
        c = MultiMap(q, q, identity_object_map(q),
                     {("*", "*"): {("v",): {"u": F(1)}}}, -1, 4)
        fam = PolyFamily(
            [ident.underlying], [c.scale(F(0)), c]
        )
        K, report = chain_homotopy_extract(total, total, fam)
        assert K.components == {("*", "*"): {("v",): {"u": F(1, 2)}}}


class TestEndpointInvariants:
    def test_homotopic_endpoints_share_quasi_iso_verdicts(self):
        base, ext, d, h, total = sum_fixture()
        q = total.quiver
        ident = identity_morphism(total)
        direction = MultiMap(
            q, q, identity_object_map(q),
            {("*", "*"): {("v",): {"u": F(1)}},
             ("*", "*", "*"): {("x", "v"): {"u": F(2)}}},
            -1, 4,
        )
        bracket = FixedBracket(total, total)
        fam = flow_homotopy(bracket, ident, direction)
        report = homotopy_check(bracket, fam, (fam.a_at(0), fam.a_at(1)))
        assert report.passed()
        K, extract = chain_homotopy_extract(total, total, fam)
        assert extract.passed()
        left = quasi_iso_check(total, total, fam.a_at(0))
        right = quasi_iso_check(total, total, fam.a_at(1))
        assert left == right


class TestCheckReport:
    def test_text_rendering_is_stable(self):
        report = CheckReport(
            [(("*", "*"), ((("u",), ("v",))), F(2))], {"max_arity": 3}
        )
        text = report.to_text()
        assert text.splitlines()[0] == "verdict: fail"
        assert "max_arity=3" in text
        assert text.splitlines()[2] == "residual_support: 1"

    def test_pass_report(self):
        report = CheckReport([], {"max_arity": 2})
        assert report.passed()
        assert "verdict: pass" in report.to_text()
