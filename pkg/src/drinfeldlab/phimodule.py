"""Finitely generated operator-submodules of K^g.

A module is presented by its generators; the operator ring acts diagonally
through the Drinfeld structure.  Everything linear over F_p[t] is pushed
down to F_p linear algebra on coordinate vectors of the bounded iterate
family {Phi_{t^j}(x_i)}, so syzygies, membership, quotients, and torsion all
ride on fp_nullspace / fp_solve_many plus Smith reduction over F_p[t].

No operation here is complete in an absolute sense: the ring is infinite
and the underlying search spaces are degree-bounded, so every negative
verdict is tagged with the bound it holds up to.  Positive answers are
always re-verified by exact evaluation before they are returned.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from .base import RMatrix, RPoly, fp_nullspace, fp_solve_many, smith_normal_form
from .drinfeld import (DrinfeldModule, HeightProfile, phi_action,
                       solve_additive_many, torsion_annihilator)
from .factor import iter_irreducible_rpolys, rpoly_code
from .kfield import KElem, coordinates, kelem_parse, kelem_sort_key, kelem_to_str
from .localfield import _fv_linearize
from .places import FvElem, Place, residue_reduce
from .twisted import _split_top_level, tp_eval, tp_parse, tp_to_str

_REP_ENUM_CAP = 6561
_HULL_TARGET_CAP = 729
_DEFAULT_BOUND = 8


# -- points of K^g ------------------------------------------------------------


def point_is_zero(x) -> bool:
    return all(c.is_zero() for c in x)


def point_add(x, y):
    return tuple(a + b for a, b in zip(x, y))


def point_neg(x):
    return tuple(-a for a in x)


def point_apply(f, x):
    """Coordinatewise twisted-polynomial action on a point."""
    return tuple(tp_eval(f, c) for c in x)


def point_sort_key(x):
    return tuple(kelem_sort_key(c) for c in x)


def point_to_str(x) -> str:
    return "(" + ", ".join(kelem_to_str(c) for c in x) + ")"


def point_parse(p: int, text: str):
    text = text.strip()
    if not (text.startswith("(") and text.endswith(")")):
        raise ValueError(f"point must be parenthesized: {text!r}")
    return tuple(kelem_parse(p, part) for part in _split_top_level(text[1:-1]))


def _rpoly_from_code(p: int, code: int) -> RPoly:
    f = RPoly.zero(p)
    i = 0
    while code:
        code, digit = divmod(code, p)
        if digit:
            f = f + RPoly.monomial(p, i, digit)
        i += 1
    return f


def _iter_rpolys_below(p: int, deg: int):
    """All operator polynomials of degree < deg, in code order."""
    for code in range(p ** max(deg, 0)):
        yield _rpoly_from_code(p, code)


# -- the module type ----------------------------------------------------------


class PhiModule:
    """Submodule of K^g spanned by finitely many points.

    The presentation cache is write-once per bound: the first computation
    at a given (or larger) syzygy bound is kept, later calls reuse it.
    Assignment is atomic, so a concurrent first computation is merely
    redundant, never inconsistent.
    """

    __slots__ = ("phi", "g", "gens", "notes", "_presentation")

    def __init__(self, phi: DrinfeldModule, g: int, gens, notes=()):
        if g < 1:
            raise ValueError("ambient power must be positive")
        clean = []
        for x in gens:
            x = tuple(x)
            if len(x) != g:
                raise ValueError("generator of the wrong ambient power")
            for c in x:
                if not isinstance(c, KElem) or c.p != phi.p:
                    raise ValueError("generator coordinates must live in K")
            if not point_is_zero(x):
                clean.append(x)
        self.phi = phi
        self.g = g
        self.gens = tuple(clean)
        self.notes = tuple(notes)
        self._presentation = None

    @property
    def p(self) -> int:
        return self.phi.p

    @property
    def rank(self) -> int:
        return len(self.gens)

    def zero_point(self):
        return tuple(KElem.zero(self.p) for _ in range(self.g))

    def presentation(self, deg_bound: int = _DEFAULT_BOUND):
        cached = self._presentation
        if cached is not None and cached[0] >= deg_bound:
            return cached[1]
        rel = syzygies(self, deg_bound)
        self._presentation = (deg_bound, rel)
        return rel

    def __eq__(self, other):
        return (isinstance(other, PhiModule) and self.phi == other.phi
                and self.g == other.g and self.gens == other.gens)

    def __repr__(self):
        return f"PhiModule({module_to_str(self)})"


def module_to_str(gamma: PhiModule) -> str:
    pts = "; ".join(point_to_str(x) for x in gamma.gens)
    return f"{tp_to_str(gamma.phi.phi_t)} :: {gamma.g} :: {pts}"


def module_parse(p: int, text: str) -> PhiModule:
    parts = text.split("::")
    if len(parts) != 3:
        raise ValueError("expected '<phi_t> :: <g> :: <points>'")
    phi = DrinfeldModule.parse(p, parts[0].strip())
    g = int(parts[1].strip())
    body = parts[2].strip()
    gens = []
    if body:
        for chunk in body.split(";"):
            gens.append(point_parse(p, chunk))
    return PhiModule(phi, g, gens)


# -- linearization ------------------------------------------------------------


def _iterate_family(gamma: PhiModule, deg_bound: int):
    """Points Phi_{t^j}(x_i) for all generators, j = 0..deg_bound."""
    family = []
    for x in gamma.gens:
        for j in range(deg_bound + 1):
            family.append(point_apply(gamma.phi.phi_t_power(j), x))
    return family


def _linearize_points(p: int, g: int, family, targets):
    """Stacked F_p rows for sum_k u_k family[k] = target, per target."""
    rows = []
    rhs = [[] for _ in targets]
    for s in range(g):
        col = [x[s] for x in family] + [y[s] for y in targets]
        coords = coordinates(col) if col else None
        if coords is None:
            continue
        width = len(coords.basis)
        n = len(family)
        for l in range(width):
            rows.append([coords.matrix[k][l] for k in range(n)])
        for m in range(len(targets)):
            row = coords.matrix[n + m]
            for l in range(width):
                rhs[m].append(row[l])
    return rows, rhs


def _weights_to_operators(weights, rank: int, deg_bound: int, p: int):
    ops = []
    width = deg_bound + 1
    for i in range(rank):
        a = RPoly.zero(p)
        for j in range(width):
            e = weights[i * width + j]
            if e:
                a = a + RPoly.monomial(p, j, e)
        ops.append(a)
    return tuple(ops)


def _apply_operators(gamma: PhiModule, ops):
    acc = gamma.zero_point()
    for a, x in zip(ops, gamma.gens):
        if not a.is_zero():
            acc = point_add(acc, point_apply(phi_action(gamma.phi, a), x))
    return acc


# -- syzygies and membership --------------------------------------------------


def syzygies(gamma: PhiModule, deg_bound: int = _DEFAULT_BOUND) -> RMatrix:
    """All relations sum Phi_{b_i}(x_i) = 0 with deg b_i <= deg_bound.

    The rows are an F_p-basis of the bounded relation space, each row
    normalized so its first nonzero operator is monic and re-verified by
    exact evaluation.
    """
    if deg_bound < 1:
        raise ValueError("deg_bound must be >= 1")
    p = gamma.p
    if gamma.rank == 0:
        return RMatrix(p, [])
    family = _iterate_family(gamma, deg_bound)
    rows, _ = _linearize_points(p, gamma.g, family, [])
    relations = []
    for vec in fp_nullspace(rows, p):
        ops = _weights_to_operators(vec, gamma.rank, deg_bound, p)
        lead = next(a for a in ops if not a.is_zero())
        scale = pow(lead.lead, p - 2, p)
        if scale != 1:
            ops = tuple(a * RPoly.const(p, scale) for a in ops)
        if not point_is_zero(_apply_operators(gamma, ops)):
            raise AssertionError("syzygy fails its defining identity")
        relations.append(ops)
    relations.sort(key=lambda ops: tuple(rpoly_code(a) for a in ops))
    return RMatrix(p, relations)


@dataclass(frozen=True)
class MemberCertificate:
    """Either exact operators writing y in the module, or a bounded miss."""
    kind: str                    # "certificate" | "not_found_up_to"
    operators: tuple | None
    bound: int

    @property
    def found(self) -> bool:
        return self.kind == "certificate"

    def __str__(self):
        if self.found:
            return "Certificate(" + ", ".join(str(a) for a in self.operators) + ")"
        return f"NotFoundUpTo({self.bound})"


def member(gamma: PhiModule, y, deg_bound: int = _DEFAULT_BOUND) -> MemberCertificate:
    """Bounded search for operators with sum Phi_{a_i}(x_i) = y."""
    y = tuple(y)
    if len(y) != gamma.g:
        raise ValueError("point of the wrong ambient power")
    p = gamma.p
    if point_is_zero(y):
        zero = tuple(RPoly.zero(p) for _ in range(gamma.rank))
        return MemberCertificate("certificate", zero, deg_bound)
    if gamma.rank == 0:
        return MemberCertificate("not_found_up_to", None, deg_bound)
    family = _iterate_family(gamma, deg_bound)
    rows, rhs = _linearize_points(p, gamma.g, family, [y])
    sol = fp_solve_many(rows, rhs, p)[0]
    if sol is None:
        return MemberCertificate("not_found_up_to", None, deg_bound)
    ops = _weights_to_operators(sol, gamma.rank, deg_bound, p)
    if _apply_operators(gamma, ops) != y:
        raise AssertionError("membership certificate fails its identity")
    return MemberCertificate("certificate", ops, deg_bound)


# -- quotients ----------------------------------------------------------------


@dataclass(frozen=True)
class QuotientStructure:
    """Gamma / Phi_a(Gamma) as invariant factors plus realized cosets."""
    invariant_factors: tuple
    reps: tuple
    rep_operators: tuple
    order: int
    flags: tuple = ()


def _coset_key(ops, v_mat: RMatrix, diag):
    p = v_mat.p
    key = []
    r = len(ops)
    for i in range(r):
        acc = RPoly.zero(p)
        for k in range(r):
            acc = acc + ops[k] * v_mat.rows[k][i]
        d = diag[i]
        if d.degree >= 1:
            acc = acc % d
        else:
            acc = RPoly.zero(p)
        key.append(acc.key())
    return tuple(key)


def quotient(gamma: PhiModule, a: RPoly,
             deg_bound: int = _DEFAULT_BOUND) -> QuotientStructure:
    """Structure of Gamma / Phi_a(Gamma) from the bounded presentation."""
    if a.is_zero():
        raise ValueError("quotient by the zero operator")
    p = gamma.p
    r = gamma.rank
    if r == 0:
        return QuotientStructure((), (gamma.zero_point(),),
                                 ((),), 1)
    syz = gamma.presentation(deg_bound)
    a_block = [[a if i == j else RPoly.zero(p) for j in range(r)]
               for i in range(r)]
    stacked = RMatrix(p, list(syz.rows) + a_block)
    snf = smith_normal_form(stacked)
    diag = snf.invariant_factors
    if any(d.is_zero() for d in diag):
        raise AssertionError("quotient by a nonzero operator must be finite")
    order = p ** sum(d.degree for d in diag if d.degree >= 1)
    flags = []
    da = a.degree
    if da == 0 or order == 1:
        reps = (gamma.zero_point(),)
        ops = (tuple(RPoly.zero(p) for _ in range(r)),)
        return QuotientStructure(diag, reps, ops, order)

    if p ** (r * da) <= _REP_ENUM_CAP:
        seen = {}
        for combo in itertools.product(_iter_rpolys_below(p, da), repeat=r):
            key = _coset_key(combo, snf.v, diag)
            if key not in seen:
                seen[key] = combo
            if len(seen) == order:
                break
        if len(seen) != order:
            raise AssertionError("coset enumeration missed the computed order")
        rep_ops = tuple(seen[k] for k in sorted(seen))
    else:
        # canonical residues mapped back through V^{-1}, reduced mod a
        residues = [list(_iter_rpolys_below(p, d.degree)) if d.degree >= 1
                    else [RPoly.zero(p)] for d in diag]
        total = 1
        for res in residues:
            total *= len(res)
        if total > _REP_ENUM_CAP:
            flags.append("representatives-omitted")
            rep_ops = ()
        else:
            rep_ops = []
            for rho in itertools.product(*residues):
                ops = []
                for j in range(r):
                    acc = RPoly.zero(p)
                    for i in range(r):
                        acc = acc + rho[i] * snf.vinv.rows[i][j]
                    ops.append(acc % a)
                rep_ops.append(tuple(ops))
            rep_ops = tuple(sorted(
                rep_ops, key=lambda t: tuple(rpoly_code(x) for x in t)))
    reps = tuple(_apply_operators(gamma, ops) for ops in rep_ops)
    return QuotientStructure(diag, reps, rep_ops, order, tuple(flags))


# -- torsion ------------------------------------------------------------------


def torsion_submodule(gamma: PhiModule,
                      deg_bound: int = _DEFAULT_BOUND):
    """Explicit points of the torsion part seen by the bounded presentation."""
    p = gamma.p
    zero = gamma.zero_point()
    if gamma.rank == 0:
        return (zero,)
    syz = gamma.presentation(deg_bound)
    if not syz.rows:
        return (zero,)
    snf = smith_normal_form(syz)
    diag = list(snf.invariant_factors)
    torsion_idx = [i for i, d in enumerate(diag)
                   if not d.is_zero() and d.degree >= 1]
    if not torsion_idx:
        return (zero,)
    total = p ** sum(diag[i].degree for i in torsion_idx)
    if total > _REP_ENUM_CAP:
        raise RuntimeError("torsion enumeration beyond the desk cap")
    base_points = {}
    for i in torsion_idx:
        ops = tuple(snf.vinv.rows[i])
        base_points[i] = _apply_operators(gamma, ops)
    points = {}
    residues = [list(_iter_rpolys_below(p, diag[i].degree)) for i in torsion_idx]
    for rho in itertools.product(*residues):
        acc = zero
        for c, i in zip(rho, torsion_idx):
            if not c.is_zero():
                acc = point_add(acc, point_apply(
                    phi_action(gamma.phi, c), base_points[i]))
        points[point_to_str(acc)] = acc
    out = sorted(points.values(), key=point_sort_key)
    for x in out:
        for c in x:
            if not torsion_annihilator(gamma.phi, c, max_deg=deg_bound).is_torsion:
                raise AssertionError("enumerated torsion point fails verification")
    return tuple(out)


# -- divisible hulls and fullness ----------------------------------------------


def _primes_up_to(p: int, prime_bound: int):
    out = []
    for q in iter_irreducible_rpolys(p):
        if q.degree > prime_bound:
            break
        out.append(q)
    return out


def _hull_scan(gamma: PhiModule, prime_bound: int,
               height_bounds: HeightProfile | None,
               member_bound: int, notes: set):
    """First module point x not in gamma with Phi_q(x) in gamma, or None."""
    p = gamma.p
    r = gamma.rank
    for q in _primes_up_to(p, prime_bound):
        dq = q.degree
        tuples = itertools.product(_iter_rpolys_below(p, dq), repeat=r)
        count = p ** (r * dq)
        if count > _HULL_TARGET_CAP:
            notes.add("hull-targets-truncated")
            tuples = itertools.islice(tuples, _HULL_TARGET_CAP)
        targets = []
        seen = set()
        for rem in tuples:
            y = _apply_operators(gamma, rem)
            key = point_to_str(y)
            if key not in seen:
                seen.add(key)
                targets.append(y)
        f = phi_action(gamma.phi, q)
        per_slot = []
        for s in range(gamma.g):
            results = solve_additive_many(f, [y[s] for y in targets],
                                          height_bounds)
            per_slot.append(results)
            for res in results:
                notes.update(res.info.flags)
        for m in range(len(targets)):
            slot_points = [per_slot[s][m].points for s in range(gamma.g)]
            for combo in itertools.product(*slot_points):
                x = tuple(combo)
                if point_is_zero(x):
                    continue
                if not member(gamma, x, member_bound).found:
                    return x, q
    return None, None


def divisible_hull(gamma: PhiModule, prime_bound: int = 2,
                   height_bounds: HeightProfile | None = None,
                   member_bound: int = _DEFAULT_BOUND,
                   max_rounds: int = 4) -> PhiModule:
    """Close gamma under division by primes of degree <= prime_bound.

    Each round reduces operator coefficients mod q, so only finitely many
    division targets arise per prime; new points are adjoined until a
    fixpoint or the round cap.  Bounds travel in the module notes.
    """
    if prime_bound < 1 or max_rounds < 1:
        raise ValueError("bounds must be positive")
    notes = set(gamma.notes)
    current = gamma
    for _ in range(max_rounds):
        x, q = _hull_scan(current, prime_bound, height_bounds,
                          member_bound, notes)
        if x is None:
            return PhiModule(current.phi, current.g, current.gens,
                             tuple(sorted(notes)))
        current = PhiModule(current.phi, current.g,
                            current.gens + (x,))
    notes.add("hull-rounds-capped")
    return PhiModule(current.phi, current.g, current.gens,
                     tuple(sorted(notes)))


@dataclass(frozen=True)
class FullnessReport:
    """Bounded fullness verdict; a NotFull witness is certified both ways."""
    kind: str                    # "full_up_to_bounds" | "not_full"
    witness: tuple | None
    prime: RPoly | None
    prime_bound: int
    member_bound: int
    notes: tuple = ()


def is_full(gamma: PhiModule, prime_bound: int = 2,
            height_bounds: HeightProfile | None = None,
            member_bound: int = _DEFAULT_BOUND) -> FullnessReport:
    """Does gamma already contain every bounded division point?"""
    notes = set()
    x, q = _hull_scan(gamma, prime_bound, height_bounds, member_bound, notes)
    if x is None:
        return FullnessReport("full_up_to_bounds", None, None,
                              prime_bound, member_bound, tuple(sorted(notes)))
    image = point_apply(phi_action(gamma.phi, q), x)
    if not member(gamma, image, member_bound).found:
        raise AssertionError("fullness witness image left the module")
    return FullnessReport("not_full", x, q, prime_bound, member_bound,
                          tuple(sorted(notes)))


# -- reduction-based decomposition --------------------------------------------


def fv_torsion_annihilator(phi: DrinfeldModule, v: Place, xbar: FvElem,
                           max_deg: int = _DEFAULT_BOUND):
    """Bounded annihilator search for a residue point of the reduced module."""
    p = phi.p
    if xbar.is_zero():
        return RPoly.one(p)
    cbar = [residue_reduce(c, v) for c in phi.phi_t.coeffs]

    def step(z):
        acc = FvElem.zero(v)
        for i, c in enumerate(cbar):
            if not c.is_zero():
                acc = acc + c * z ** (p ** i)
        return acc

    iterates = [xbar]
    for _ in range(max_deg):
        iterates.append(step(iterates[-1]))
    for j in range(1, max_deg + 1):
        rows, rhs = _fv_linearize(iterates[:j], [iterates[j]])
        sol = fp_solve_many(rows, rhs, p)[0]
        if sol is not None:
            a = RPoly(p, {j: 1})
            for i, e in enumerate(sol):
                if e:
                    a = a + RPoly.monomial(p, i, (-e) % p)
            return a
    return None


def _point_reduction_is_torsion(phi, v, x, max_deg):
    for c in x:
        xbar = residue_reduce(c, v)
        if fv_torsion_annihilator(phi, v, xbar, max_deg) is None:
            return False
    return True


@dataclass(frozen=True)
class Decomposition:
    """gamma = torsion-at-witnesses part plus a free complement."""
    gamma0: PhiModule
    gamma1: PhiModule
    witness_places: tuple
    bound: int


def decompose(gamma: PhiModule, witness_places,
              deg_bound: int = _DEFAULT_BOUND) -> Decomposition:
    """Split off the part whose witness reductions are torsion.

    Structural generators come from the Smith form of the presentation:
    the finite invariant factors seed gamma0 outright, the free ones are
    routed by a bounded torsion test on their reductions.  The direct-sum
    identity and the disjointness of the two parts are verified on
    generators before returning.
    """
    witness_places = tuple(witness_places)
    p = gamma.p
    if gamma.rank == 0:
        empty = PhiModule(gamma.phi, gamma.g, ())
        return Decomposition(empty, empty, witness_places, deg_bound)
    syz = gamma.presentation(deg_bound)
    r = gamma.rank
    if syz.rows:
        snf = smith_normal_form(syz)
        diag = list(snf.invariant_factors)
        vinv_rows = [tuple(snf.vinv.rows[i]) for i in range(r)]
    else:
        diag = []
        vinv_rows = [tuple(RPoly.one(p) if i == j else RPoly.zero(p)
                           for j in range(r)) for i in range(r)]
    while len(diag) < r:
        diag.append(RPoly.zero(p))
    struct_gens = [_apply_operators(gamma, vinv_rows[i]) for i in range(r)]

    gens0, gens1 = [], []
    member_bound = max(deg_bound,
                       2 + max((e.degree for row in vinv_rows for e in row),
                               default=0))
    for i in range(r):
        x = struct_gens[i]
        if point_is_zero(x):
            continue
        if not diag[i].is_zero() and diag[i].degree >= 1:
            gens0.append(x)
        elif diag[i].is_zero():
            if witness_places and _point_reduction_is_torsion(
                    gamma.phi, witness_places[0], x, deg_bound) \
                    and all(_point_reduction_is_torsion(gamma.phi, v, x, deg_bound)
                            for v in witness_places[1:]):
                gens0.append(x)
            else:
                gens1.append(x)
        # unit factors contribute nothing

    gamma0 = PhiModule(gamma.phi, gamma.g, gens0)
    gamma1 = PhiModule(gamma.phi, gamma.g, gens1)
    combined = PhiModule(gamma.phi, gamma.g, tuple(gens0) + tuple(gens1))
    for x in gamma.gens:
        if not member(combined, x, member_bound).found:
            raise AssertionError("decomposition lost a generator")
    for x in gamma1.gens:
        if member(gamma0, x, member_bound).found:
            raise AssertionError("free part meets the torsion part")
    for x in gamma0.gens:
        if gamma1.rank and member(gamma1, x, member_bound).found:
            raise AssertionError("torsion part meets the free part")
    if syzygies(gamma1, deg_bound).rows:
        raise AssertionError("free complement has bounded relations")
    return Decomposition(gamma0, gamma1, witness_places, deg_bound)
