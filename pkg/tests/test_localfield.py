from fractions import Fraction

import pytest

from drinfeldlab.base import RPoly
from drinfeldlab.drinfeld import DrinfeldModule
from drinfeldlab.kfield import KElem, kelem_parse
from drinfeldlab.localfield import (
    DivisionByZeroToPrecision,
    LocalElem,
    NoResidueRoot,
    PrecisionUnderflow,
    embed,
    fv_pth_root,
    hensel_solve,
    local_to_str,
    nearest_torsion_distance,
    residue_solve,
    tp_eval_local,
)
from drinfeldlab.places import FvElem, Place, residue_reduce, valuation
from drinfeldlab.twisted import tp_eval

P = 3


def k(text):
    return kelem_parse(P, text)


def vft():
    return Place.parse(P, "finite:theta+t")


def carlitz():
    return DrinfeldModule.parse(P, "[t, 1]")


def psi():
    return DrinfeldModule.parse(P, "[0, theta, 1]")


def phi3():
    return DrinfeldModule.parse(P, "[t, (2*t)/(theta^2)]")


T_OP = RPoly.monomial(P, 1)


class TestEmbed:
    def test_theta_at_linear_place(self):
        z = embed(k("theta"), vft(), 3)
        assert local_to_str(z) == "[2*t] + u*[1] + O(u^3)"

    def test_inverse_uniformizer(self):
        z = embed(k("theta+t").inverse(), vft(), 2)
        assert local_to_str(z) == "u^(-1)*[1] + O(u^2)"
        assert z.val() == -1

    def test_zero(self):
        z = embed(KElem.zero(P), vft(), 5)
        assert z.is_zero_to_precision()
        assert local_to_str(z) == "O(u^5)"

    def test_deep_value_truncates_to_zero(self):
        z = embed(k("theta+t") ** 4, vft(), 3)
        assert z.is_zero_to_precision()

    def test_valuation_agrees_with_places(self):
        v = vft()
        samples = [k("theta"), k("t*theta+1"), k("(theta^2+1)/(theta+t)"),
                   k("theta+t") ** 2 * k("t+1")]
        for x in samples:
            assert embed(x, v, 6).val() == valuation(x, v)

    def test_ring_homomorphism_window(self):
        v = vft()
        a = k("theta^2 + t*theta + 1")
        b = k("(theta+t) * (theta + 2*t + 1)")
        assert (embed(a, v, 6) + embed(b, v, 6)).agrees(embed(a + b, v, 6), 6)
        prod = embed(a, v, 6) * embed(b, v, 6)
        n = prod.precision
        assert prod.agrees(embed(a * b, v, int(n)), n)

    def test_quadratic_place(self):
        v = Place.parse(P, "finite:theta^2+t")
        z = embed(k("theta^2"), v, 2)
        # theta^2 = -t + pi, so the residue digit is -t and the next is 1
        assert z.terms[Fraction(0)] == residue_reduce(k("2*t"), v)
        assert z.terms[Fraction(1)] == FvElem.one(v)
        assert embed(k("theta^2+t"), v, 3).val() == 1

    def test_infinite_place(self):
        vi = Place.infinite(P)
        z = embed(k("(theta^2+1)/(theta^3+t)"), vi, 7)
        assert z.val() == 1
        assert local_to_str(z) == \
            "u*[1] + u^3*[1] + u^4*[2*t] + u^6*[2*t] + O(u^7)"

    def test_infinite_product_consistency(self):
        vi = Place.infinite(P)
        x = k("(theta^2+1)/(theta^3+t)")
        back = embed(k("theta^3+t"), vi, 9) * embed(x, vi, 7)
        assert back.agrees(embed(k("theta^2+1"), vi, int(back.precision)),
                           back.precision)

    def test_big_sparse_element(self):
        v = vft()
        x = k("theta") ** (3 ** 9) + k("theta+t")
        z = embed(x, v, 2)
        # theta^(3^9) reduces to (-t)^(3^9) at this place, plus u from the tail
        assert z.val() == 0
        assert z.terms[Fraction(0)].lift() == (-k("t")) ** (3 ** 9)


class TestLocalArithmetic:
    def test_add_precision_is_min(self):
        v = vft()
        a = embed(k("theta"), v, 5)
        b = embed(k("t"), v, 3)
        assert (a + b).precision == 3

    def test_mul_precision_shifts_by_valuation(self):
        v = vft()
        a = embed(k("theta+t"), v, 5)      # val 1, known to 5
        b = embed(k("theta"), v, 4)        # val 0, known to 4
        assert (a * b).precision == 5      # min(5 + 0, 4 + 1)

    def test_invert_zero_to_precision(self):
        with pytest.raises(DivisionByZeroToPrecision):
            LocalElem.zero_to(vft(), 4).invert()

    def test_invert_roundtrip(self):
        v = vft()
        b = embed(k("theta+t") ** 2 + k("theta"), v, 6)
        one = b * b.invert()
        assert one.terms == {Fraction(0): FvElem.one(v)}

    def test_truncate_cannot_gain_precision(self):
        z = embed(k("theta"), vft(), 3)
        with pytest.raises(PrecisionUnderflow):
            z.truncate(5)

    def test_frobenius_scales_exponents_and_precision(self):
        z = embed(k("theta"), vft(), 3)
        w = z.frobenius(1)
        assert w.precision == 9
        assert w.agrees(embed(k("theta") ** 3, vft(), 9), 9)

    def test_pth_root_relabels_onto_finer_grid(self):
        z = embed(k("theta"), vft(), 3)
        r = z.pth_root()
        assert r.grid == 1
        assert r.precision == Fraction(1)
        assert sorted(r.terms) == [Fraction(0), Fraction(1, 3)]
        # digits are carried unchanged by the relabeling
        assert r.terms[Fraction(0)] == z.terms[Fraction(0)]
        assert r.frobenius(1).agrees(z.refine(1), 3)

    def test_fractional_rendering(self):
        r = embed(k("theta"), vft(), 3).pth_root()
        assert local_to_str(r) == "[2*t] + u^(1/3)*[1] + O(u^1)"

    def test_grid_mixing_refines_automatically(self):
        z = embed(k("theta"), vft(), 3)
        r = z.pth_root()
        d = z - r.frobenius(1)
        assert d.is_zero_to_precision()
        assert d.grid == 1

    def test_refine_preserves_value(self):
        z = embed(k("theta") + k("t") ** 2, vft(), 4)
        w = z.refine(2)
        assert w.grid == 2
        assert w.pth_root().pth_root().reduce_grid().grid >= 0
        assert (w - z).is_zero_to_precision()

    def test_reduce_grid_drops_stale_tag(self):
        z = embed(k("theta"), vft(), 3)
        lifted = z.refine(1)
        assert lifted.grid == 1
        assert lifted.reduce_grid() == z

    def test_off_lattice_exponent_rejected(self):
        v = vft()
        with pytest.raises(ValueError):
            LocalElem(v, {Fraction(1, 3): FvElem.one(v)}, 2, grid=0)


class TestFvPthRoot:
    def test_linear_place_roundtrip(self):
        c = residue_reduce(k("t^2+1"), vft())
        assert fv_pth_root(c ** 3) == c

    def test_t_has_no_root(self):
        assert fv_pth_root(residue_reduce(k("t"), vft())) is None

    def test_quadratic_place(self):
        v = Place.parse(P, "finite:theta^2+t")
        c = residue_reduce(k("theta+1"), v)
        assert fv_pth_root(c ** 3) == c
        # theta-bar is a cube root of -t here, so -t must have a root
        assert fv_pth_root(residue_reduce(k("2*t^3"), v)) is not None


class TestResidueSolve:
    def test_certified_kernel_at_linear_place(self):
        v = vft()
        gbar = [residue_reduce(c, v) for c in phi3().phi_t_power(1).coeffs]
        roots, certified = residue_solve(gbar, FvElem.zero(v), v)
        assert certified
        assert [str(r) for r in roots] == ["0", "t", "2*t"]

    def test_certified_no_root(self):
        v = vft()
        gbar = [residue_reduce(c, v) for c in carlitz().phi_t_power(1).coeffs]
        roots, certified = residue_solve(gbar, residue_reduce(k("t^2"), v), v)
        assert certified and roots == ()

    def test_particular_plus_kernel(self):
        v = vft()
        gbar = [residue_reduce(c, v) for c in phi3().phi_t_power(1).coeffs]
        y = gbar[0] + gbar[1]  # the image of 1 under the map
        roots, certified = residue_solve(gbar, y, v)
        assert certified and len(roots) == 3
        for r in roots:
            img = gbar[0] * r + gbar[1] * r ** P
            assert img == y
        assert FvElem.one(v) in roots

    def test_quadratic_place_kernel_found(self):
        # over F_3(t)[g]/(g^2+t) the kernel of tX + X^3 is {0, g, -g}
        v = Place.parse(P, "finite:theta^2+t")
        gbar = [residue_reduce(c, v) for c in carlitz().phi_t_power(1).coeffs]
        roots, certified = residue_solve(gbar, FvElem.zero(v), v)
        assert not certified
        assert len(roots) == 3
        gbar_elem = residue_reduce(k("theta"), v)
        assert gbar_elem in roots


class TestHensel:
    def test_separable_recovers_known_root(self):
        phi = carlitz()
        v = vft()
        y = embed(tp_eval(phi.phi_t_power(1), k("theta")), v, 6)
        x = hensel_solve(phi, T_OP, y, 6)
        assert x.agrees(embed(k("theta"), v, 6), 6)

    def test_residual_meets_target(self):
        phi = carlitz()
        v = vft()
        data = tp_eval(phi.phi_t_power(1), k("theta")) \
            + k("theta+t") ** 5 * k("t+1")
        y = embed(data, v, 8)
        x = hensel_solve(phi, T_OP, y, 8)
        residual = tp_eval_local(phi.phi_t_power(1), x) - y
        assert residual.is_zero_to_precision()
        assert residual.precision >= 8
        # the correction away from theta sits at depth 5 - v(t) = 5
        assert (x - embed(k("theta"), v, 8)).val() == 5

    def test_certified_obstruction(self):
        with pytest.raises(NoResidueRoot) as info:
            hensel_solve(carlitz(), T_OP, embed(k("t^2"), vft(), 4), 4)
        assert info.value.certified

    def test_inseparable_lands_on_refined_grid(self):
        phi = psi()
        v = vft()
        y = embed(tp_eval(phi.phi_t_power(1), k("theta")), v, 6)
        x = hensel_solve(phi, T_OP, y, 6)
        assert x.grid == 1
        assert x.precision == Fraction(2)
        assert x.agrees(embed(k("theta"), v, 6).refine(1), 2)

    def test_inseparable_square_operator(self):
        phi = psi()
        v = vft()
        a = RPoly.monomial(P, 2)  # t^2: root depth two, grid 1/9
        y = embed(tp_eval(phi.phi_t_power(2), k("theta")), v, 9)
        x = hensel_solve(phi, a, y, 9)
        assert x.grid == 2
        assert x.agrees(embed(k("theta"), v, 9).refine(2), x.precision)

    def test_shallow_target_rejected(self):
        phi = carlitz()
        y = embed(k("theta"), vft(), 2)
        with pytest.raises(PrecisionUnderflow):
            hensel_solve(phi, T_OP, y, 5)

    def test_nonintegral_target_rejected(self):
        with pytest.raises(ValueError):
            hensel_solve(carlitz(), T_OP,
                         embed(k("theta+t").inverse(), vft(), 3), 3)

    def test_quadratic_place_lift(self):
        phi = carlitz()
        v = Place.parse(P, "finite:theta^2+t")
        y = embed(tp_eval(phi.phi_t_power(1), k("theta")), v, 4)
        x = hensel_solve(phi, T_OP, y, 4)
        residual = tp_eval_local(phi.phi_t_power(1), x) - y
        assert residual.is_zero_to_precision()


class TestNearestTorsion:
    def test_separable_distance_equality(self):
        phi = phi3()
        v = vft()
        z = embed(k("theta") + k("theta") * k("theta+t") ** 2, v, 6)
        image_val = tp_eval_local(phi.phi_t_power(1), z).val()
        res = nearest_torsion_distance(phi, T_OP, z)
        assert res.regime == "separable-equality"
        assert res.distance == 2 == image_val
        assert res.approximant.agrees(embed(k("theta"), v, 6), 4)

    def test_torsion_point_is_at_infinite_distance(self):
        res = nearest_torsion_distance(phi3(), T_OP, embed(k("theta"), vft(), 5))
        assert res.distance is None
        assert res.regime == "torsion-to-precision"

    def test_unit_image_means_distance_zero(self):
        res = nearest_torsion_distance(phi3(), T_OP, embed(k("1"), vft(), 5))
        assert res.distance == Fraction(0)
        assert res.approximant is None
        assert res.regime == "unit-image"

    def test_inseparable_module(self):
        phi = psi()
        v = vft()
        z = embed(k("theta+t") ** 2, v, 6)
        res = nearest_torsion_distance(phi, T_OP, z)
        # only local t-torsion near z is 0, so the distance is v(z) itself
        assert res.regime == "inseparable"
        assert res.distance == 2
        assert res.approximant.is_zero_to_precision()
