"""Desk-scale closure experiments: exact K-side enumeration against
bound-qualified adelic certificates.

Two theorem pipelines (generic characteristic via discreteness, special
characteristic for zero-dimensional varieties via torsion snapping), an
image-chain uniformity probe, and the reduction of a hypersurface instance
to a zero-dimensional one through quotient cosets.  Every verdict is
derived from certified sub-results and carries its bounds; varieties are
K-rational by construction (zero-dimensional input with coordinates
outside K is not representable and therefore out of scope).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from .adelic import (
    closure_member,
    closure_torsion_check,
    discreteness_certificate,
    quotient_iso_check,
    standard_tracked_places,
)
from .base import RPoly
from .drinfeld import (
    GENERIC,
    SPECIAL,
    estimate_torsion_level_m,
    modular_transcendence_probe,
    solve_additive_many,
    torsion_annihilator,
)
from .kfield import KElem, kelem_parse, kelem_to_str
from .phimodule import (
    PhiModule,
    is_full,
    member,
    point_add,
    point_neg,
    point_sort_key,
    point_to_str,
    quotient,
)
from .places import place_to_str, residue_reduce
from .twisted import TwistedPoly, tp_compose, tp_eval

SCHEMA = "drinfeldlab.experiments/1"

CONFIRMED = "TheoremConfirmed"
INCONCLUSIVE = "BoundInconclusive"
COUNTEREXAMPLE = "CounterexampleCandidate"

_ENUM_CAP = 3 ** 9


# -- multivariate polynomials over K ------------------------------------------


class MultiPoly:
    """Polynomial over K in g variables, stored as exponent-tuple terms."""

    __slots__ = ("p", "g", "terms")

    def __init__(self, p: int, g: int, terms=None):
        self.p = p
        self.g = g
        clean = {}
        for exps, c in (terms or {}).items():
            exps = tuple(int(e) for e in exps)
            if len(exps) != g or any(e < 0 for e in exps):
                raise ValueError("malformed exponent vector")
            if not c.is_zero():
                clean[exps] = clean[exps] + c if exps in clean else c
        self.terms = {e: c for e, c in clean.items() if not c.is_zero()}

    @classmethod
    def constant(cls, p: int, g: int, c: KElem) -> "MultiPoly":
        return cls(p, g, {(0,) * g: c})

    @classmethod
    def variable(cls, p: int, g: int, i: int) -> "MultiPoly":
        if not 0 <= i < g:
            raise ValueError(f"variable index {i} outside width {g}")
        exps = tuple(1 if j == i else 0 for j in range(g))
        return cls(p, g, {exps: KElem.one(p)})

    def is_zero(self) -> bool:
        return not self.terms

    def __add__(self, other: "MultiPoly") -> "MultiPoly":
        out = dict(self.terms)
        for e, c in other.terms.items():
            out[e] = out[e] + c if e in out else c
        return MultiPoly(self.p, self.g, out)

    def __neg__(self) -> "MultiPoly":
        zero = KElem.zero(self.p)
        return MultiPoly(self.p, self.g,
                         {e: zero - c for e, c in self.terms.items()})

    def __sub__(self, other: "MultiPoly") -> "MultiPoly":
        return self + (-other)

    def __mul__(self, other: "MultiPoly") -> "MultiPoly":
        out = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                c = c1 * c2
                out[e] = out[e] + c if e in out else c
        return MultiPoly(self.p, self.g, out)

    def __pow__(self, n: int) -> "MultiPoly":
        if n < 0:
            raise ValueError("negative polynomial power")
        acc = MultiPoly.constant(self.p, self.g, KElem.one(self.p))
        for _ in range(n):
            acc = acc * self
        return acc

    def evaluate(self, point) -> KElem:
        if len(point) != self.g:
            raise ValueError("point width disagrees with the polynomial")
        acc = KElem.zero(self.p)
        for exps, c in self.terms.items():
            term = c
            for x, e in zip(point, exps):
                for _ in range(e):
                    term = term * x
            acc = acc + term
        return acc

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for exps in sorted(self.terms, reverse=True):
            c = self.terms[exps]
            mono = "*".join(f"x{i}" if e == 1 else f"x{i}^{e}"
                            for i, e in enumerate(exps) if e)
            ctext = kelem_to_str(c)
            if not mono:
                parts.append(f"({ctext})")
            elif ctext == "1":
                parts.append(mono)
            else:
                parts.append(f"({ctext})*{mono}")
        return " + ".join(parts)


_VAR_NAMES = {"x": 0, "y": 1, "z": 2}


def _poly_tokens(text: str):
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch.isspace():
            i += 1
            continue
        if text.startswith("theta", i):
            yield ("elem", "theta")
            i += 5
        elif ch == "x" and i + 1 < n and text[i + 1].isdigit():
            j = i + 1
            while j < n and text[j].isdigit():
                j += 1
            yield ("var", int(text[i + 1:j]))
            i = j
        elif ch in _VAR_NAMES:
            yield ("var", _VAR_NAMES[ch])
            i += 1
        elif ch == "t":
            yield ("elem", "t")
            i += 1
        elif ch.isdigit():
            j = i
            while j < n and text[j].isdigit():
                j += 1
            yield ("int", text[i:j])
            i = j
        elif ch in "+-*^()":
            yield ("op", ch)
            i += 1
        else:
            raise ValueError(f"unexpected character {ch!r} at position {i}")


class _PolyParser:
    def __init__(self, p: int, g: int, text: str):
        self.p = p
        self.g = g
        self.tokens = list(_poly_tokens(text))
        self.pos = 0

    def peek(self):
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def take(self):
        tok = self.peek()
        if tok is None:
            raise ValueError("unexpected end of polynomial text")
        self.pos += 1
        return tok

    def parse(self) -> MultiPoly:
        out = self.expr()
        if self.peek() is not None:
            raise ValueError(f"trailing tokens from position {self.pos}")
        return out

    def expr(self) -> MultiPoly:
        negate = False
        tok = self.peek()
        if tok == ("op", "-"):
            self.take()
            negate = True
        elif tok == ("op", "+"):
            self.take()
        acc = self.term()
        if negate:
            acc = -acc
        while self.peek() in (("op", "+"), ("op", "-")):
            _, op = self.take()
            nxt = self.term()
            acc = acc + nxt if op == "+" else acc - nxt
        return acc

    def term(self) -> MultiPoly:
        acc = self.factor()
        while self.peek() == ("op", "*"):
            self.take()
            acc = acc * self.factor()
        return acc

    def factor(self) -> MultiPoly:
        base = self.atom()
        if self.peek() == ("op", "^"):
            self.take()
            kind, val = self.take()
            if kind != "int":
                raise ValueError("exponent must be a nonnegative integer")
            base = base ** int(val)
        return base

    def atom(self) -> MultiPoly:
        kind, val = self.take()
        if kind == "var":
            return MultiPoly.variable(self.p, self.g, val)
        if kind in ("elem", "int"):
            return MultiPoly.constant(self.p, self.g,
                                      kelem_parse(self.p, val))
        if (kind, val) == ("op", "("):
            inner = self.expr()
            if self.take() != ("op", ")"):
                raise ValueError("unbalanced parenthesis")
            return inner
        raise ValueError(f"unexpected token {val!r}")


def poly_parse(p: int, g: int, text: str) -> MultiPoly:
    """Parse a polynomial in x0..x{g-1} (aliases x, y, z) over K."""
    return _PolyParser(p, g, text).parse()


# -- variety specifications ----------------------------------------------------


@dataclass(frozen=True)
class ZeroDim:
    """Finitely many K-rational points, pairwise distinct."""
    g: int
    points: tuple

    def __post_init__(self):
        pts = tuple(tuple(x) for x in self.points)
        for x in pts:
            if len(x) != self.g:
                raise ValueError("point width disagrees with g")
        keys = [point_to_str(x) for x in pts]
        if len(set(keys)) != len(keys):
            raise ValueError("zero-dimensional points must be distinct")
        object.__setattr__(self, "points", pts)

    def to_json_dict(self):
        return {"kind": "zero-dim", "g": self.g,
                "points": sorted(point_to_str(x) for x in self.points)}


@dataclass(frozen=True)
class Hypersurface:
    poly: MultiPoly

    def __post_init__(self):
        if self.poly.is_zero():
            raise ValueError("hypersurface polynomial must be nonzero")

    @property
    def g(self) -> int:
        return self.poly.g

    def to_json_dict(self):
        return {"kind": "hypersurface", "g": self.g, "poly": str(self.poly)}


def variety_contains(spec, x) -> bool:
    if isinstance(spec, ZeroDim):
        key = point_to_str(tuple(x))
        return any(point_to_str(q) == key for q in spec.points)
    return spec.poly.evaluate(x).is_zero()


# -- shared report shape -------------------------------------------------------


@dataclass(frozen=True)
class ExperimentReport:
    kind: str
    verdict: str
    k_side: tuple
    adelic_side: tuple | None
    certificates: tuple           # ((label, json-able dict), ...)
    bounds: tuple                 # ((name, value), ...)
    assumptions: tuple
    trace: tuple
    notes: tuple = ()

    def to_json_dict(self):
        return {
            "schema": SCHEMA,
            "kind": self.kind,
            "verdict": self.verdict,
            "k_side": [point_to_str(x) for x in self.k_side],
            "adelic_side": None if self.adelic_side is None
            else [point_to_str(x) for x in self.adelic_side],
            "certificates": [[label, payload]
                             for label, payload in self.certificates],
            "bounds": {name: value for name, value in self.bounds},
            "assumptions": list(self.assumptions),
            "trace": list(self.trace),
            "notes": list(self.notes),
        }


def _sorted_points(points):
    return tuple(sorted({point_to_str(x): tuple(x)
                         for x in points}.values(), key=point_sort_key))


def _bounded_elements(gamma: PhiModule, enum_deg: int):
    """All Phi_c(gens) combinations with operator degrees <= enum_deg."""
    p = gamma.p
    width = enum_deg + 1
    if gamma.rank and p ** (gamma.rank * width) > _ENUM_CAP:
        raise ValueError("enumeration bound too large for an exact sweep")
    iterates = []
    for x in gamma.gens:
        row = [tuple(x)]
        for _ in range(enum_deg):
            row.append(tuple(tp_eval(gamma.phi.phi_t, c) for c in row[-1]))
        iterates.append(row)
    zero = tuple(KElem.zero(p) for _ in range(gamma.g))
    consts = [KElem.from_rpoly(RPoly.from_coeffs(p, [c])) for c in range(p)]
    out = []
    for codes in itertools.product(range(p ** width), repeat=gamma.rank):
        acc = zero
        for i, code in enumerate(codes):
            for j in range(width):
                digit = (code // p ** j) % p
                if digit:
                    scaled = tuple(consts[digit] * c for c in iterates[i][j])
                    acc = point_add(acc, scaled)
        out.append(acc)
    return out


def _minimize_generators(gamma: PhiModule, deg_bound: int) -> PhiModule:
    """Drop generators that the remaining ones already produce."""
    kept = list(gamma.gens)
    i = 0
    while i < len(kept):
        rest = kept[:i] + kept[i + 1:]
        if rest and member(PhiModule(gamma.phi, gamma.g, rest),
                           kept[i], deg_bound).found:
            kept = rest
        else:
            i += 1
    if len(kept) == len(gamma.gens):
        return gamma
    return PhiModule(gamma.phi, gamma.g, kept, gamma.notes)


# -- generic characteristic ----------------------------------------------------


def generic_char_experiment(gamma: PhiModule, variety,
                            tracked_places=None,
                            deg_bound: int = 8, cutoff: int = 10,
                            precision: int = 10,
                            enum_deg: int = 3) -> ExperimentReport:
    """Generic-characteristic closure theorem on one instance.

    Discreteness certificates at the tracked places pin the closure to the
    module itself inside the bounded window, so the K-side intersection is
    the whole answer; zero-dimensional instances get closure-membership
    spot checks on top.
    """
    if gamma.phi.characteristic != GENERIC:
        raise ValueError("generic-characteristic module required")
    if variety.g != gamma.g:
        raise ValueError("variety width disagrees with the module")
    if tracked_places is None:
        tracked_places = standard_tracked_places(gamma)

    certificates = []
    notes = []
    discrete_ok = True
    for v in tracked_places:
        cert = discreteness_certificate(gamma, v, deg_bound, cutoff)
        certificates.append((f"discreteness:{place_to_str(v)}",
                             cert.to_json_dict()))
        if "cutoff-reached" in cert.notes:
            discrete_ok = False
            notes.append(f"discreteness-open-at-{place_to_str(v)}")

    trace = []
    inconclusive = not discrete_ok
    if isinstance(variety, ZeroDim):
        k_side = [x for x in variety.points
                  if member(gamma, x, deg_bound).found]
        adelic = []
        for x in variety.points:
            rep = closure_member(gamma, x, tracked_places, precision,
                                 deg_bound)
            certificates.append((f"closure:{point_to_str(x)}",
                                 rep.to_json_dict()))
            if rep.in_gamma:
                adelic.append(x)
            elif not rep.conclusive:
                inconclusive = True
                notes.append(f"closure-open-at-{point_to_str(x)}")
            elif discrete_ok and any(point_to_str(x) == point_to_str(y)
                                     for y in k_side):
                trace.append(f"member {point_to_str(x)} rejected adelically")
    else:
        k_side = [x for x in _bounded_elements(gamma, enum_deg)
                  if variety_contains(variety, x)]
        adelic = list(k_side) if discrete_ok else None
        notes.append(f"hypersurface-swept-to-operator-degree-{enum_deg}")

    k_side = _sorted_points(k_side)
    adelic_side = None if adelic is None else _sorted_points(adelic)
    if adelic_side is not None:
        k_keys = {point_to_str(x) for x in k_side}
        if not k_keys <= {point_to_str(x) for x in adelic_side}:
            raise AssertionError("K-side escaped the adelic side")

    if trace:
        verdict = COUNTEREXAMPLE
    elif inconclusive:
        verdict = INCONCLUSIVE
    else:
        verdict = CONFIRMED
    bounds = (("deg_bound", deg_bound), ("cutoff", cutoff),
              ("precision", precision), ("enum_deg", enum_deg))
    return ExperimentReport("generic-characteristic", verdict, k_side,
                            adelic_side, tuple(certificates), bounds,
                            ("module-discrete-at-tracked-places",),
                            tuple(trace), tuple(notes))


# -- special characteristic, zero-dimensional ----------------------------------


def _torsion_reduction_injective(gamma: PhiModule, torsion_points, v) -> bool:
    keys = set()
    for x in torsion_points:
        keys.add(tuple(str(residue_reduce(c, v)) for c in x))
    return len(keys) == len(torsion_points)


def zero_dim_intersection(gamma: PhiModule, variety: ZeroDim,
                          tracked_places=None, precision: int = 10,
                          deg_bound: int = 8) -> ExperimentReport:
    """Special-characteristic closure theorem for finite point sets.

    Mixed limit assignments (different variety points at different places)
    are ruled out pairwise: a non-torsion difference is rejected by the
    bounded annihilator search, a torsion difference by injectivity of the
    reduction on the finite torsion set.  What survives is per-point
    closure membership, so the two sides are compared point by point.
    """
    if gamma.phi.characteristic != SPECIAL:
        raise ValueError("special-characteristic module required")
    if not isinstance(variety, ZeroDim):
        raise ValueError("zero-dimensional variety required")
    if variety.g != gamma.g:
        raise ValueError("variety width disagrees with the module")
    full = is_full(gamma, member_bound=deg_bound)
    if full.kind != "full_up_to_bounds":
        raise ValueError("module not full up to the stated bounds")
    gamma = _minimize_generators(gamma, deg_bound)
    if tracked_places is None:
        tracked_places = standard_tracked_places(gamma)

    notes = []
    assumptions = ["full-up-to-bounds"]
    m_rep = estimate_torsion_level_m(gamma.phi, 4)
    assumptions.append(f"t-power-torsion-level-m<={m_rep.m}")
    if m_rep.inconclusive:
        notes.append("m-estimate-inconclusive")
    probe = modular_transcendence_probe(gamma.phi)
    assumptions.append(f"modular-transcendence:{probe.verdict}")

    certificates = []
    inconclusive = m_rep.inconclusive
    trace = []

    ctc = closure_torsion_check(gamma, tracked_places, deg_bound)
    certificates.append(("closure-torsion", ctc.to_json_dict()))
    if ctc.kind != "confirmed":
        trace.append("adelic torsion escaped the K-rational torsion")
    if "pseudo-torsion-enumeration-capped" in ctc.notes:
        inconclusive = True

    injective_at = [v for v in tracked_places
                    if _torsion_reduction_injective(gamma, ctc.torsion_points,
                                                    v)]
    pts = variety.points
    for i in range(len(pts)):
        for j in range(i + 1, len(pts)):
            diff = point_add(pts[i], point_neg(pts[j]))
            torsion = all(torsion_annihilator(gamma.phi, c,
                                              max_deg=deg_bound).is_torsion
                          for c in diff)
            pair = f"{point_to_str(pts[i])}-{point_to_str(pts[j])}"
            if not torsion:
                notes.append(f"mixed-assignment-rejected-nontorsion:{pair}")
            elif injective_at:
                notes.append(f"mixed-assignment-rejected-reduction:{pair}")
            else:
                inconclusive = True
                notes.append(f"mixed-assignment-unresolved:{pair}")

    k_side = []
    adelic = []
    for x in pts:
        found = member(gamma, x, deg_bound).found
        if found:
            k_side.append(x)
        rep = closure_member(gamma, x, tracked_places, precision, deg_bound)
        certificates.append((f"closure:{point_to_str(x)}",
                             rep.to_json_dict()))
        if rep.in_gamma:
            adelic.append(x)
            if not found:
                trace.append(f"closure certificate without K-side membership"
                             f" at {point_to_str(x)}")
        elif not rep.conclusive:
            inconclusive = True
            notes.append(f"closure-open-at-{point_to_str(x)}")
        elif found:
            trace.append(f"member {point_to_str(x)} rejected adelically")

    k_side = _sorted_points(k_side)
    adelic_side = _sorted_points(adelic)
    if not {point_to_str(x) for x in k_side} <= \
            {point_to_str(x) for x in adelic_side}:
        raise AssertionError("K-side escaped the adelic side")

    if trace:
        verdict = COUNTEREXAMPLE
    elif inconclusive:
        verdict = INCONCLUSIVE
    else:
        verdict = CONFIRMED
    bounds = (("deg_bound", deg_bound), ("precision", precision),
              ("prime_bound", full.prime_bound))
    return ExperimentReport("zero-dimensional", verdict, k_side, adelic_side,
                            tuple(certificates), bounds, tuple(assumptions),
                            tuple(trace), tuple(notes))


# -- uniformity probe -----------------------------------------------------------


@dataclass(frozen=True)
class UniformityTable:
    psi: str
    variety: dict
    translates: tuple
    rows: tuple                   # ((translate_index, m, count), ...)
    max_counts: tuple             # ((m, max over translates), ...)
    certified: bool
    flags: tuple
    notes: tuple = ()

    def to_json_dict(self):
        return {
            "schema": SCHEMA,
            "kind": "uniformity-table",
            "psi": self.psi,
            "variety": self.variety,
            "translates": list(self.translates),
            "rows": [list(r) for r in self.rows],
            "max_counts": [list(r) for r in self.max_counts],
            "certified": self.certified,
            "flags": list(self.flags),
            "notes": list(self.notes),
        }


def theta_box(p: int, g: int, theta_degree: int):
    """All points whose coordinates are theta-polynomials with F_p digits."""
    theta = KElem.theta(p)
    consts = [KElem.from_rpoly(RPoly.from_coeffs(p, [c])) for c in range(p)]
    pool = []
    for codes in itertools.product(range(p), repeat=theta_degree + 1):
        acc = KElem.zero(p)
        power = KElem.one(p)
        for c in codes:
            if c:
                acc = acc + consts[c] * power
            power = power * theta
        pool.append(acc)
    return tuple(itertools.product(pool, repeat=g))


def _reject_parametrized_lines(spec, hits, p: int):
    """Refutation probe: a full F_p-line inside the variety that also
    survives two transcendental direction probes is treated as a line."""
    if not isinstance(spec, Hypersurface) or len(hits) < p:
        return
    probes = [kelem_parse(p, "theta"), kelem_parse(p, "t")]
    consts = [KElem.from_rpoly(RPoly.from_coeffs(p, [c])) for c in range(p)]
    for base, other in itertools.combinations(hits[:12], 2):
        direction = point_add(other, point_neg(base))
        scalars = consts[1:] + probes
        on_line = True
        for s in scalars:
            shifted = point_add(base, tuple(s * c for c in direction))
            if not spec.poly.evaluate(shifted).is_zero():
                on_line = False
                break
        if on_line:
            raise ValueError("variety contains an additively parametrized"
                             " line inside the box")


def uniformity_probe(psi: TwistedPoly, variety, translates, m_range,
                     box) -> UniformityTable:
    """Counts of (a + X) inside successive images psi^m within a box.

    Membership in psi^m(K^g) is decided coordinate-wise by the bounded
    division solver; the image chain is verified to nest exactly, which
    certifies the non-increasing counts rather than merely observing them.
    """
    if psi.is_zero() or psi.tau_valuation < 1:
        raise ValueError("probe wants an inseparable additive map")
    if psi.grid != 0:
        raise ValueError("the probe works on the base grid")
    p = psi.p
    g = variety.g
    translates = [tuple(a) for a in translates]
    for a in translates:
        if len(a) != g:
            raise ValueError("translate width disagrees with the variety")
    ms = sorted(set(int(m) for m in m_range))
    if ms and ms[0] < 0:
        raise ValueError("negative iterate")
    box = [tuple(x) for x in box]

    powers = {}
    acc = None
    for level in range(1, (ms[-1] if ms else 0) + 1):
        acc = psi if acc is None else tp_compose(acc, psi)
        powers[level] = acc

    rows = []
    flags = set()
    notes = []
    certified = True
    per_m_max = {m: 0 for m in ms}
    for idx, a in enumerate(translates):
        neg_a = point_neg(a)
        hits = sorted(
            {point_to_str(x): x for x in box
             if variety_contains(variety, point_add(x, neg_a))}.items())
        if idx == 0:
            _reject_parametrized_lines(variety, [x for _, x in hits], p)
        # each level is solved independently from the full hit list, so
        # the nesting check below cross-examines the solver rather than
        # restating the construction
        level_sets = {}
        for m in ms:
            if m == 0:
                level_sets[0] = {key for key, _ in hits}
            else:
                targets = []
                for _, x in hits:
                    targets.extend(x)
                results = solve_additive_many(powers[m], targets) \
                    if targets else []
                survivors = set()
                for which, (key, _) in enumerate(hits):
                    coords = results[which * g:(which + 1) * g]
                    for r in coords:
                        flags.update(r.info.flags)
                    if all(r.points for r in coords):
                        survivors.add(key)
                level_sets[m] = survivors
            rows.append((idx, m, len(level_sets[m])))
            per_m_max[m] = max(per_m_max[m], len(level_sets[m]))
        for lo, hi in zip(ms, ms[1:]):
            if not level_sets[hi] <= level_sets[lo]:
                certified = False
                notes.append(f"nesting-violated-by-bounds:translate-{idx}"
                             f":m-{lo}-to-{hi}")

    return UniformityTable(
        str(psi), variety.to_json_dict(),
        tuple(point_to_str(a) for a in translates), tuple(rows),
        tuple((m, per_m_max[m]) for m in ms), certified,
        tuple(sorted(flags)), tuple(notes))


# -- reduction of a hypersurface instance to a zero-dimensional one -------------


def uniform_dml_reduce(gamma: PhiModule, variety: Hypersurface, m: int,
                       tracked_places=None, precision: int = 10,
                       deg_bound: int = 8, box_degree: int = 2,
                       enum_deg: int = 3):
    """Replace a hypersurface instance by a finite candidate set W.

    Coset representatives of the quotient by Phi_{t^m} tile the module, so
    the variety meets each tile in the points enumerated here; W collects
    them and the zero-dimensional pipeline finishes the job.  Candidate
    windows are bounded, and a bounded module point on the variety that
    escapes W downgrades the verdict instead of being absorbed.
    """
    if gamma.phi.characteristic != SPECIAL:
        raise ValueError("special-characteristic module required")
    if not isinstance(variety, Hypersurface):
        raise ValueError("hypersurface instance required")
    if variety.g != gamma.g:
        raise ValueError("variety width disagrees with the module")
    if m < 0:
        raise ValueError("negative power of t")
    full = is_full(gamma, member_bound=deg_bound)
    if full.kind != "full_up_to_bounds":
        raise ValueError("module not full up to the stated bounds")
    gamma = _minimize_generators(gamma, deg_bound)
    if tracked_places is None:
        tracked_places = standard_tracked_places(gamma)
    p = gamma.p

    certificates = []
    notes = []
    inconclusive = False

    a = RPoly.from_coeffs(p, [0] * m + [1])
    q = quotient(gamma, a, deg_bound)
    iso = quotient_iso_check(gamma, a, tracked_places, precision, deg_bound)
    certificates.append(("quotient-iso", iso.to_json_dict()))
    if iso.kind != "confirmed":
        inconclusive = True
        notes.append("quotient-separation-open")

    box = theta_box(p, gamma.g, box_degree)
    power_map = gamma.phi.phi_t_power(m)
    w_points = {}
    for rep in q.reps:
        for z in box:
            candidate = point_add(rep, tuple(tp_eval(power_map, c)
                                             for c in z))
            if variety.poly.evaluate(candidate).is_zero():
                w_points[point_to_str(candidate)] = candidate
    w = ZeroDim(gamma.g, _sorted_points(w_points.values()))
    for x in w.points:
        if not variety.poly.evaluate(x).is_zero():
            raise AssertionError("W left the variety")
    _reject_parametrized_lines(variety, list(w.points), p)

    sub = zero_dim_intersection(gamma, w, tracked_places, precision,
                                deg_bound) if w.points else None
    if sub is not None:
        certificates.append(("zero-dim", sub.to_json_dict()))
        k_side = sub.k_side
        adelic_side = sub.adelic_side
    else:
        k_side = ()
        adelic_side = ()
        notes.append("empty-candidate-set")

    trace = []
    for x in _bounded_elements(gamma, enum_deg):
        if variety.poly.evaluate(x).is_zero():
            key = point_to_str(x)
            if not any(point_to_str(y) == key for y in w.points):
                inconclusive = True
                notes.append(f"module-point-outside-window:{key}")
            elif not any(point_to_str(y) == key for y in k_side):
                trace.append(f"swept point {key} missing from the K side")

    if sub is not None and sub.verdict == COUNTEREXAMPLE:
        trace.extend(sub.trace)
    if sub is not None and sub.verdict == INCONCLUSIVE:
        inconclusive = True

    if trace:
        verdict = COUNTEREXAMPLE
    elif inconclusive:
        verdict = INCONCLUSIVE
    else:
        verdict = CONFIRMED
    bounds = (("deg_bound", deg_bound), ("precision", precision),
              ("box_degree", box_degree), ("enum_deg", enum_deg),
              ("m", m), ("quotient_order", q.order))
    report = ExperimentReport("uniform-reduction", verdict, k_side,
                              adelic_side, tuple(certificates), bounds,
                              ("full-up-to-bounds",
                               "no-parametrized-line-found-in-window"),
                              tuple(trace), tuple(notes))
    return w, report
