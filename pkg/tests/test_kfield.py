import random

import pytest

from drinfeldlab.base import RPoly
from drinfeldlab.kfield import (
    BiPoly,
    KElem,
    Coordinates,
    bi_divexact,
    bi_gcd,
    common_denominator,
    coordinates,
    frobenius_power,
    height,
    kelem_parse,
    kelem_to_str,
)


def rnd_bipoly(rng, p, tdeg, thdeg, nonzero=False):
    while True:
        d = {}
        for e in range(thdeg + 1):
            f = RPoly.from_coeffs(p, [rng.randrange(p) for _ in range(tdeg + 1)])
            if not f.is_zero():
                d[e] = f
        f = BiPoly(p, d)
        if not nonzero or not f.is_zero():
            return f


def rnd_kelem(rng, p, deg=2):
    num = rnd_bipoly(rng, p, deg, deg)
    den = rnd_bipoly(rng, p, deg, deg, nonzero=True)
    return KElem(num, den)


class TestBiPoly:
    def test_gcd_and_divexact(self):
        rng = random.Random(31)
        for p in (2, 3, 5):
            for _ in range(15):
                a = rnd_bipoly(rng, p, 2, 2, nonzero=True)
                b = rnd_bipoly(rng, p, 2, 2, nonzero=True)
                g = rnd_bipoly(rng, p, 1, 1, nonzero=True)
                gg = bi_gcd(a * g, b * g)
                # g divides the gcd of (ag, bg)
                assert bi_divexact(gg, bi_gcd(g, gg)) is not None
                assert bi_divexact(a * b, b) == a

    def test_divexact_rejects_nondivisor(self):
        p = 3
        th = BiPoly.theta(p)
        one = BiPoly.one(p)
        with pytest.raises(ValueError):
            bi_divexact(th + one, th * th)

    def test_stretch_is_frobenius(self):
        rng = random.Random(32)
        for p in (2, 3):
            f = rnd_bipoly(rng, p, 2, 2)
            assert f ** p == f.stretch(p)


def _canon(a):
    from drinfeldlab.kfield import _canonical_scale
    return _canonical_scale(a)


class TestKElem:
    def test_addition_shared_denominator_example(self):
        # theta^2/(theta+t) + (t*theta+t^2)/(theta+t) keeps the denominator:
        # the numerator theta^2+t*theta+t^2 has no root at theta = -t
        p = 3
        a = kelem_parse(p, "(theta^2)/(theta+t)")
        b = kelem_parse(p, "(t*theta+t^2)/(theta+t)")
        s = a + b
        assert s == kelem_parse(p, "(theta^2+t*theta+t^2)/(theta+t)")
        assert s.den == kelem_parse(p, "theta+t").num

    def test_cancellation(self):
        p = 3
        x = kelem_parse(p, "(2*theta^2+2*t*theta)/(2*theta+2*t)")
        assert x == KElem.theta(p)

    def test_canonical_invariants_random(self):
        rng = random.Random(33)
        for p in (2, 3, 5):
            for _ in range(20):
                x = rnd_kelem(rng, p)
                if x.is_zero():
                    assert x.den.is_one()
                    continue
                assert bi_gcd(x.num, x.den).is_one()
                assert x.den.lead_theta_coeff().lead == 1

    def test_field_laws_random(self):
        rng = random.Random(34)
        for p in (2, 3, 5):
            for _ in range(15):
                a = rnd_kelem(rng, p)
                b = rnd_kelem(rng, p)
                c = rnd_kelem(rng, p)
                assert a * (b + c) == a * b + a * c
                assert (a - b) + b == a
                if not b.is_zero():
                    assert (a / b) * b == a

    def test_frobenius_power(self):
        rng = random.Random(35)
        p = 3
        x = rnd_kelem(rng, p, deg=2)
        assert frobenius_power(x, 1) == x ** p
        assert frobenius_power(x, 2) == x ** (p * p)
        y = kelem_parse(p, "theta+t")
        assert frobenius_power(y, 1) == kelem_parse(p, "theta^3+t^3")

    def test_frobenius_huge_stays_sparse(self):
        p = 3
        x = kelem_parse(p, "theta+t")
        big = frobenius_power(x, 20)
        assert big.num.term_count() == 2
        assert big.num.theta_degree == 3 ** 20

    def test_height(self):
        p = 3
        assert height(kelem_parse(p, "(theta^3+t)/(theta+1)")) == 3
        assert height(KElem.zero(p)) == 0
        assert height(kelem_parse(p, "(t^2*theta)/(theta^4+t)")) == 4

    def test_mixed_modulus_rejected(self):
        with pytest.raises(ValueError):
            KElem.theta(3) + KElem.theta(5)


class TestCoordinates:
    def test_polynomial_family(self):
        p = 3
        xs = [kelem_parse(p, "theta+t"), kelem_parse(p, "theta+2*t")]
        co = coordinates(xs)
        assert co.den.is_one()
        assert co.basis == ((0, 1), (1, 0))  # t, theta
        assert co.matrix == ((1, 1), (2, 1))

    def test_denominator_family(self):
        p = 3
        xs = [kelem_parse(p, "theta/t"), kelem_parse(p, "1/t")]
        co = coordinates(xs)
        assert co.den == kelem_parse(p, "t").num
        assert co.basis == ((0, 0), (1, 0))  # 1, theta
        assert co.matrix == ((0, 1), (1, 0))

    def test_reconstruction_random(self):
        rng = random.Random(36)
        p = 3
        xs = [rnd_kelem(rng, p, deg=2) for _ in range(4)]
        co = coordinates(xs)
        den = KElem.from_bipoly(co.den)
        for row, x in zip(co.matrix, xs):
            acc = KElem.zero(p)
            for c, (the, te) in zip(row, co.basis):
                if c:
                    acc = acc + KElem.from_bipoly(
                        BiPoly.monomial(p, the, te, c))
            assert acc / den == x

    def test_common_denominator_lcm(self):
        p = 3
        xs = [kelem_parse(p, "1/(theta+t)"), kelem_parse(p, "1/(theta^2+t^2)")]
        d = common_denominator(xs)
        # theta^2+t^2 is not divisible by theta+t over F_3 (only theta-t is),
        # so the lcm is the product
        assert d.theta_degree == 3


class TestGrammar:
    def test_spec_example(self):
        p = 3
        x = kelem_parse(p, "((t+1)*theta^2 + t)/(theta + t^2)")
        assert x.num.theta_degree == 2
        assert str(x) == "((t+1)*theta^2+t)/(theta+t^2)"

    def test_unicode_theta_accepted(self):
        p = 3
        assert kelem_parse(p, "θ^2+t") == kelem_parse(p, "theta^2+t")

    def test_roundtrip_random(self):
        rng = random.Random(37)
        for p in (2, 3, 5):
            for _ in range(20):
                x = rnd_kelem(rng, p)
                assert kelem_parse(p, kelem_to_str(x)) == x

    def test_rejects_garbage(self):
        for bad in ("", "theta^", "x+1", "(theta", "theta)/(", "t//t"):
            with pytest.raises((ValueError, ZeroDivisionError)):
                kelem_parse(3, bad)

    def test_nested_parens_and_signs(self):
        p = 5
        x = kelem_parse(p, "-(theta+t)*(theta-t)+theta^2")
        assert x == kelem_parse(p, "t^2")
