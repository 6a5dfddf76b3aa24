"""Drinfeld modules over K and their torsion / division-point solvers.

A module is determined by the image of t: a twisted polynomial with
differential t (generic characteristic) or 0 (special characteristic, where
the lowest surviving tau-index is the inseparability depth d).  The action
of any operator a(t) follows by composition, so solving Phi_a(X) = y is an
F_p-linear problem once a search space is fixed.  The search space is where
honesty lives: the denominator profile of a solution is pinned down exactly
by Newton-polygon balancing at the finitely many relevant places, while the
numerator degrees get a derived bound plus a hard cap.  Every returned point
is re-verified, so false positives are impossible and completeness claims
are always relative to the reported bounds.
"""

from __future__ import annotations

import itertools
import warnings
from dataclasses import dataclass

from .base import RPoly, fp_nullspace, fp_solve_many
from .factor import factor_bipoly
from .kfield import KElem, coordinates, height, kelem_sort_key, kelem_to_str
from .places import Place, valuation
from .twisted import TwistedPoly, tp_add, tp_compose, tp_eval, tp_parse, tp_scale, tp_to_str

GENERIC = "generic"
SPECIAL = "special"

_FACTOR_DEG_CAP = 8


class BoundTooSmallWarning(UserWarning):
    """A user-supplied search bound is below the derived default."""


class DrinfeldModule:
    """phi: F_p[t] -> K{tau}, pinned down by phi_t."""

    __slots__ = ("phi_t", "characteristic", "_t_powers")

    def __init__(self, phi_t: TwistedPoly):
        if phi_t.grid != 0:
            raise ValueError("phi_t must live on the base grid")
        if phi_t.tau_degree < 1:
            raise ValueError("phi_t must have positive tau-degree")
        c0 = phi_t.coeff(0)
        if c0 == KElem.t(phi_t.p):
            self.characteristic = GENERIC
        elif c0.is_zero():
            self.characteristic = SPECIAL
        else:
            raise ValueError("differential must be t (generic) or 0 (special)")
        self.phi_t = phi_t
        self._t_powers = [TwistedPoly.identity(phi_t.p), phi_t]

    @classmethod
    def from_coeffs(cls, p: int, coeffs) -> "DrinfeldModule":
        return cls(TwistedPoly(p, coeffs))

    @classmethod
    def parse(cls, p: int, text: str, characteristic: str | None = None) -> "DrinfeldModule":
        phi = cls(tp_parse(p, text))
        if characteristic is not None and characteristic != phi.characteristic:
            raise ValueError(
                f"declared characteristic {characteristic!r} but phi_t is {phi.characteristic}")
        return phi

    @property
    def p(self) -> int:
        return self.phi_t.p

    @property
    def rank_degree(self) -> int:
        """tau-degree of phi_t (the D of the defining polynomial)."""
        return self.phi_t.tau_degree

    def phi_t_power(self, j: int) -> TwistedPoly:
        """Phi_{t^j}, cached."""
        if j < 0:
            raise ValueError("negative operator power")
        while len(self._t_powers) <= j:
            self._t_powers.append(tp_compose(self.phi_t, self._t_powers[-1]))
        return self._t_powers[j]

    def __eq__(self, other):
        return isinstance(other, DrinfeldModule) and self.phi_t == other.phi_t

    def __repr__(self):
        return f"DrinfeldModule({tp_to_str(self.phi_t)}, {self.characteristic})"


def phi_action(phi: DrinfeldModule, a: RPoly) -> TwistedPoly:
    """Phi_a = a(Phi_t)."""
    if a.p != phi.p:
        raise ValueError("modulus mismatch")
    acc = TwistedPoly.zero(phi.p)
    for j, e in a.c.items():
        acc = tp_add(acc, tp_scale(phi.phi_t_power(j), KElem.const(phi.p, e)))
    return acc


def conjugate(phi: DrinfeldModule, gamma: KElem) -> TwistedPoly:
    """gamma^{-1} * phi_t(gamma x): coefficients gamma^{p^i - 1} c_i."""
    if gamma.is_zero():
        raise ZeroDivisionError("conjugation by zero")
    coeffs = []
    for i, c in enumerate(phi.phi_t.coeffs):
        coeffs.append(c * gamma ** (phi.p ** i - 1))
    return TwistedPoly(phi.p, coeffs)


@dataclass(frozen=True)
class ProbeReport:
    """Outcome of the monomial conjugation scan.

    degree_zero_witness: some gamma = t^i theta^j makes every coefficient of
    the conjugate constant.  inconclusive_positive: no monomial works inside
    the range; the probe cannot decide anything stronger.
    """
    verdict: str
    witness: KElem | None
    scanned: int
    max_exponent: int


def modular_transcendence_probe(phi: DrinfeldModule, max_exponent: int = 2) -> ProbeReport:
    p = phi.p
    candidates = sorted(
        ((i, j) for i in range(-max_exponent, max_exponent + 1)
         for j in range(-max_exponent, max_exponent + 1)),
        key=lambda ij: (abs(ij[0]) + abs(ij[1]), ij[0], ij[1]))
    scanned = 0
    for i, j in candidates:
        gamma = KElem.t(p) ** i * KElem.theta(p) ** j
        scanned += 1
        psi = conjugate(phi, gamma)
        if all(c.is_constant() for c in psi.coeffs):
            return ProbeReport("degree_zero_witness", gamma, scanned, max_exponent)
    return ProbeReport("inconclusive_positive", None, scanned, max_exponent)


# -- the bounded F_p-linear division solver ----------------------------------


@dataclass(frozen=True)
class HeightProfile:
    """Search bounds for division solving.

    None fields are derived from the data (degrees of y and of the
    coefficients, plus the denominator profile), then clipped at hard_cap.
    Supplying an explicit bound below the derived one trips
    BoundTooSmallWarning: returned points stay sound, completeness shrinks.
    """
    theta_deg: int | None = None
    t_deg: int | None = None
    hard_cap: int = 24
    enum_cap: int = 7000


@dataclass(frozen=True)
class SolveInfo:
    theta_bound: int
    t_bound: int
    denominator: str
    kernel_dim: int
    flags: tuple = ()


@dataclass(frozen=True)
class DivisionResult:
    points: tuple
    info: SolveInfo


def _solution_denominator(f: TwistedPoly, ys, flags):
    """Exact pole profile for X with f(X) = y, from valuation balancing.

    At a place where X has a pole of order e, either a unique term
    c_i X^{p^i} realises the minimum valuation (then e is pinned by v(y))
    or two terms tie (then e is pinned by a coefficient-valuation ratio).
    Both bounds are enumerable over the places in the data's support.
    """
    p = f.p
    nz = [(i, c) for i, c in enumerate(f.coeffs) if not c.is_zero()]
    prims = {}

    def collect(part):
        if part.theta_degree < 1 and part.term_count() <= 1:
            return
        if part.theta_degree > _FACTOR_DEG_CAP:
            flags.add("denominator-profile-truncated")
            return
        _, _tf, thf = factor_bipoly(part)
        for prim, _m in thf:
            prims[prim.key()] = prim

    for _i, c in nz:
        collect(c.den)
        collect(c.num)
    for y in ys:
        if not y.is_zero():
            collect(y.den)

    den = KElem.one(p)
    for key in sorted(prims):
        v = Place(p, prims[key], _checked=True)
        vals = [(i, valuation(c, v)) for i, c in nz]
        vy = min((valuation(y, v) for y in ys if not y.is_zero()), default=0)
        vy = min(vy, 0)
        e = 0
        for i, vi in vals:
            e = max(e, -(-(vi - vy) // p ** i))   # ceil
        for (i, vi), (j, vj) in itertools.combinations(vals, 2):
            if vj - vi > 0:
                e = max(e, (vj - vi) // (p ** j - p ** i))
        if e >= 1:
            den = den * v.monic_pi() ** e
    return den


def solve_additive_many(f: TwistedPoly, ys, bounds: HeightProfile | None = None):
    """All bounded X with f(X) = y, for each y, sharing one elimination.

    Returns a list of DivisionResult in the order of ys.  Soundness is
    absolute (every point re-verified); completeness is relative to the
    reported bounds and denominator profile.
    """
    if f.grid != 0:
        raise ValueError("the division solver works on the base grid")
    if f.is_zero():
        raise ValueError("cannot divide by the zero map")
    bounds = bounds or HeightProfile()
    p = f.p
    ys = list(ys)
    flags = set()

    den = _solution_denominator(f, ys, flags)
    data = [c for c in f.coeffs if not c.is_zero()] + [y for y in ys if not y.is_zero()]
    d_theta = max(max(x.num.theta_degree, x.den.theta_degree) for x in data)
    d_t = max(max(x.num.t_degree, x.den.t_degree) for x in data)
    derived_theta = d_theta + den.num.theta_degree
    derived_t = d_t + den.num.t_degree

    def pick(user, derived, name):
        if user is None:
            if derived > bounds.hard_cap:
                flags.add(f"{name}-bound-capped")
            return min(derived, bounds.hard_cap)
        if user < derived:
            warnings.warn(f"{name} bound {user} is below the derived {derived}",
                          BoundTooSmallWarning, stacklevel=3)
            flags.add("user-bound-below-derived")
        return user

    b_theta = pick(bounds.theta_deg, derived_theta, "theta")
    b_t = pick(bounds.t_deg, derived_t, "t")

    inv_den = den.inverse()
    basis_elems = []
    images = []
    theta = KElem.theta(p)
    t = KElem.t(p)
    for b in range(b_theta + 1):
        for a in range(b_t + 1):
            m = t ** a * theta ** b * inv_den
            basis_elems.append(m)
            images.append(tp_eval(f, m))

    coords = coordinates(images + ys)
    n_basis = len(images)
    length = len(coords.basis)
    rows = [[coords.matrix[k][l] for k in range(n_basis)] for l in range(length)]
    rhss = [[coords.matrix[n_basis + idx][l] for l in range(length)]
            for idx in range(len(ys))]
    sols = fp_solve_many(rows, rhss, p) if rhss else []
    null = fp_nullspace(rows, p)

    if p ** len(null) > bounds.enum_cap:
        raise RuntimeError(
            f"solution space too large to enumerate (p^{len(null)})")
    kernel_offsets = []
    for combo in itertools.product(range(p), repeat=len(null)):
        x = KElem.zero(p)
        for c, vec in zip(combo, null):
            if c:
                for u, m in zip(vec, basis_elems):
                    if u:
                        x = x + KElem.const(p, (c * u) % p) * m
        kernel_offsets.append(x)

    info_base = SolveInfo(b_theta, b_t, kelem_to_str(den), len(null),
                          tuple(sorted(flags)))
    out = []
    for y, sol in zip(ys, sols):
        if sol is None:
            out.append(DivisionResult((), info_base))
            continue
        x0 = KElem.zero(p)
        for u, m in zip(sol, basis_elems):
            if u:
                x0 = x0 + KElem.const(p, u) * m
        points = []
        seen = set()
        for off in kernel_offsets:
            x = x0 + off
            key = kelem_to_str(x)
            if key in seen:
                continue
            seen.add(key)
            if tp_eval(f, x) == y:
                points.append(x)
        points.sort(key=kelem_sort_key)
        out.append(DivisionResult(tuple(points), info_base))
    return out


def division_points(phi: DrinfeldModule, a: RPoly, y: KElem,
                    bounds: HeightProfile | None = None) -> DivisionResult:
    """All bounded X in K with Phi_a(X) = y."""
    if a.is_zero():
        raise ValueError("division by the zero operator")
    return solve_additive_many(phi_action(phi, a), [y], bounds)[0]


# -- torsion -----------------------------------------------------------------


@dataclass(frozen=True)
class TorsionCertificate:
    """Either a verified annihilator or a bounded non-torsion verdict.

    The not-torsion branch carries the height trace of the iterates as an
    auditable escape note; there is no effective global torsion bound to
    appeal to.
    """
    kind: str                       # "torsion" | "not_torsion_up_to"
    annihilator: RPoly | None
    degree_bound: int
    height_trace: tuple = ()

    @classmethod
    def torsion(cls, phi: DrinfeldModule, x: KElem, a: RPoly,
                degree_bound: int) -> "TorsionCertificate":
        if not tp_eval(phi_action(phi, a), x).is_zero():
            raise AssertionError("annihilator fails its defining identity")
        return cls("torsion", a, degree_bound)

    @classmethod
    def not_torsion(cls, degree_bound: int, trace) -> "TorsionCertificate":
        return cls("not_torsion_up_to", None, degree_bound, tuple(trace))

    @property
    def is_torsion(self) -> bool:
        return self.kind == "torsion"


def torsion_annihilator(phi: DrinfeldModule, x: KElem,
                        max_deg: int = 8) -> TorsionCertificate:
    """Search an F_p[t]-annihilator of x of degree <= max_deg.

    Iterates x_j = Phi_{t^j}(x) are tested for F_p-linear dependence; the
    first dependence gives the monic minimal annihilator directly.
    """
    if max_deg < 1:
        raise ValueError("max_deg must be >= 1")
    if x.p != phi.p:
        raise ValueError("modulus mismatch")
    p = phi.p
    if x.is_zero():
        return TorsionCertificate.torsion(phi, x, RPoly.one(p), max_deg)
    iterates = [x]
    for j in range(1, max_deg + 1):
        iterates.append(tp_eval(phi.phi_t, iterates[-1]))
    for j in range(1, max_deg + 1):
        coords = coordinates(iterates[: j + 1])
        length = len(coords.basis)
        rows = [[coords.matrix[k][l] for k in range(j)] for l in range(length)]
        rhs = [coords.matrix[j][l] for l in range(length)]
        sol = fp_solve_many(rows, [rhs], p)[0]
        if sol is not None:
            a = RPoly(p, {j: 1})
            for i, e in enumerate(sol):
                if e:
                    a = a + RPoly.monomial(p, i, (-e) % p)
            return TorsionCertificate.torsion(phi, x, a, max_deg)
    return TorsionCertificate.not_torsion(max_deg, (height(z) for z in iterates))


def k_rational_torsion(phi: DrinfeldModule, a: RPoly,
                       bounds: HeightProfile | None = None) -> DivisionResult:
    """Phi[a](K) within bounds; closure laws are re-checked exhaustively."""
    if a.is_zero():
        raise ValueError("torsion of the zero operator")
    res = division_points(phi, a, KElem.zero(phi.p), bounds)
    pts = set(kelem_to_str(x) for x in res.points)
    for u in res.points:
        for v in res.points:
            if kelem_to_str(u + v) not in pts:
                raise AssertionError("torsion set is not additively closed")
        if kelem_to_str(tp_eval(phi.phi_t, u)) not in pts:
            raise AssertionError("torsion set is not an operator module")
    return res


@dataclass(frozen=True)
class TorsionLevelReport:
    m: int
    inconclusive: bool
    kernel_sizes: tuple


def estimate_torsion_level_m(phi: DrinfeldModule, m_max: int,
                             bounds: HeightProfile | None = None) -> TorsionLevelReport:
    """Smallest m with Phi[t^{m+1}](K) = Phi[t^m](K), or m_max inconclusive.

    K-rational proxy: the stabilisation statement lives over the separable
    closure, which no bounded K-side search can certify.
    """
    if phi.characteristic != SPECIAL:
        raise ValueError("torsion level estimation applies to special characteristic")
    p = phi.p
    t = RPoly.t(p)
    prev = {kelem_to_str(x) for x in
            k_rational_torsion(phi, RPoly.one(p), bounds).points}
    sizes = [len(prev)]
    for m in range(m_max + 1):
        cur = {kelem_to_str(x) for x in
               k_rational_torsion(phi, t ** (m + 1), bounds).points}
        sizes.append(len(cur))
        if cur == prev:
            return TorsionLevelReport(m, False, tuple(sizes))
        prev = cur
    return TorsionLevelReport(m_max, True, tuple(sizes))
