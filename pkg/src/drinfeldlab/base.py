"""Exact base arithmetic for the workbench.

Implements F_p scalar helpers, the polynomial ring R = F_p[t], its fraction
field F = F_p(t), small matrices over R, Smith normal form, and the F_p
linear algebra (row reduction, nullspaces) everything downstream leans on.

R-polynomials are sparse maps {exponent: coefficient} with coefficients in
1..p-1; zero coefficients are never stored.  Exponents are plain Python ints
and may be astronomically large -- Frobenius-heavy callers depend on that, so
nothing here ever materialises a dense coefficient list.  The modulus p
travels with every element and mixing moduli is a hard error.

Text grammar (ASCII, whitespace ignored): ``t^2+2*t+1`` for R,
``(t^2+2*t+1)/(t^3+1)`` for F.  Printing is canonical: descending exponents,
monic denominators, ``*`` between coefficient and power.
"""

from __future__ import annotations

from dataclasses import dataclass

_PRIME_CAP = 251


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    d = 2
    while d * d <= n:
        if n % d == 0:
            return False
        d += 1
    return True


_PRIMES = frozenset(n for n in range(2, _PRIME_CAP + 1) if _is_prime(n))


def check_modulus(p) -> int:
    """Validate a session modulus: a prime with 2 <= p <= 251."""
    if not isinstance(p, int) or isinstance(p, bool) or p not in _PRIMES:
        raise ValueError(f"modulus must be a prime in [2, {_PRIME_CAP}], got {p!r}")
    return p


def inv_mod(c: int, p: int) -> int:
    c %= p
    if c == 0:
        raise ZeroDivisionError("inverse of 0 in F_p")
    return pow(c, p - 2, p)


def _require_same_p(a, b):
    if a.p != b.p:
        raise ValueError(f"modulus mismatch: F_{a.p} vs F_{b.p}")


class RPoly:
    """Element of R = F_p[t], stored sparsely."""

    __slots__ = ("p", "c", "_key")

    def __init__(self, p: int, coeffs: dict):
        # Private: use from_coeffs / parse / zero / one / t.  `coeffs` must
        # already be reduced mod p with no zero entries.
        self.p = p
        self.c = coeffs
        self._key = None

    # -- construction -------------------------------------------------

    @classmethod
    def zero(cls, p: int) -> "RPoly":
        return cls(check_modulus(p), {})

    @classmethod
    def one(cls, p: int) -> "RPoly":
        return cls.const(p, 1)

    @classmethod
    def t(cls, p: int) -> "RPoly":
        return cls(check_modulus(p), {1: 1})

    @classmethod
    def const(cls, p: int, c: int) -> "RPoly":
        check_modulus(p)
        c %= p
        return cls(p, {0: c} if c else {})

    @classmethod
    def monomial(cls, p: int, exp: int, c: int = 1) -> "RPoly":
        check_modulus(p)
        if exp < 0:
            raise ValueError("negative exponent in R")
        c %= p
        return cls(p, {exp: c} if c else {})

    @classmethod
    def from_coeffs(cls, p: int, coeffs) -> "RPoly":
        """Build from an ascending coefficient list [c0, c1, ...]."""
        check_modulus(p)
        d = {}
        for e, c in enumerate(coeffs):
            c %= p
            if c:
                d[e] = c
        return cls(p, d)

    # -- basic structure ----------------------------------------------

    @property
    def degree(self) -> int:
        """Degree, with deg 0 = -1."""
        return max(self.c) if self.c else -1

    @property
    def lead(self) -> int:
        if not self.c:
            raise ValueError("zero polynomial has no leading coefficient")
        return self.c[max(self.c)]

    def is_zero(self) -> bool:
        return not self.c

    def is_one(self) -> bool:
        return self.c == {0: 1}

    def is_constant(self) -> bool:
        return self.degree <= 0

    def constant_coeff(self) -> int:
        return self.c.get(0, 0)

    def coeff(self, e: int) -> int:
        return self.c.get(e, 0)

    def key(self):
        if self._key is None:
            self._key = tuple(sorted(self.c.items()))
        return self._key

    def __hash__(self):
        return hash((self.p, self.key()))

    def __eq__(self, other):
        if isinstance(other, int):
            other = RPoly.const(self.p, other)
        if not isinstance(other, RPoly):
            return NotImplemented
        return self.p == other.p and self.c == other.c

    def __bool__(self):
        return bool(self.c)

    # -- ring operations ----------------------------------------------

    def _coerce(self, other):
        if isinstance(other, int):
            return RPoly.const(self.p, other)
        if isinstance(other, RPoly):
            _require_same_p(self, other)
            return other
        return None

    def __add__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        p = self.p
        d = dict(self.c)
        for e, c in other.c.items():
            s = (d.get(e, 0) + c) % p
            if s:
                d[e] = s
            elif e in d:
                del d[e]
        return RPoly(p, d)

    __radd__ = __add__

    def __neg__(self):
        p = self.p
        return RPoly(p, {e: p - c for e, c in self.c.items()})

    def __sub__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        p = self.p
        if not self.c or not other.c:
            return RPoly(p, {})
        d = {}
        for e1, c1 in self.c.items():
            for e2, c2 in other.c.items():
                e = e1 + e2
                s = (d.get(e, 0) + c1 * c2) % p
                if s:
                    d[e] = s
                elif e in d:
                    del d[e]
        return RPoly(p, d)

    __rmul__ = __mul__

    def scale(self, c: int) -> "RPoly":
        c %= self.p
        if c == 0:
            return RPoly(self.p, {})
        return RPoly(self.p, {e: (c0 * c) % self.p for e, c0 in self.c.items()})

    def __pow__(self, n: int) -> "RPoly":
        # base-p digit decomposition: the p^i-th power is a termwise stretch,
        # so sparse polynomials never pass through dense intermediates
        if n < 0:
            raise ValueError("negative power of an R-polynomial")
        p = self.p
        small = [RPoly.one(p), self]
        result = RPoly.one(p)
        i = 0
        while n:
            d = n % p
            if d:
                while len(small) <= d:
                    small.append(small[-1] * self)
                result = result * small[d].stretch(p ** i)
            n //= p
            i += 1
        return result

    def __divmod__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        if other.is_zero():
            raise ZeroDivisionError("polynomial division by zero")
        p = self.p
        db = other.degree
        inv_lead = inv_mod(other.lead, p)
        q = {}
        r = dict(self.c)

        def deg(d):
            return max(d) if d else -1

        while True:
            dr = deg(r)
            if dr < db:
                break
            shift = dr - db
            coef = (r[dr] * inv_lead) % p
            q[shift] = coef
            for e, c in other.c.items():
                ee = e + shift
                s = (r.get(ee, 0) - coef * c) % p
                if s:
                    r[ee] = s
                elif ee in r:
                    del r[ee]
        return RPoly(p, q), RPoly(p, r)

    def __floordiv__(self, other):
        return divmod(self, other)[0]

    def __mod__(self, other):
        return divmod(self, other)[1]

    def monic(self) -> "RPoly":
        if self.is_zero() or self.lead == 1:
            return self
        return self.scale(inv_mod(self.lead, self.p))

    def gcd(self, other: "RPoly") -> "RPoly":
        """Monic gcd via Euclid's algorithm."""
        _require_same_p(self, other)
        a, b = self, other
        while not b.is_zero():
            a, b = b, a % b
        return a.monic()

    def evaluate(self, x: int) -> int:
        """Evaluate at x in F_p; exponents may be huge, so use modular pow."""
        p = self.p
        x %= p
        acc = 0
        for e, c in self.c.items():
            acc = (acc + c * pow(x, e, p)) % p
        return acc

    def stretch(self, k: int) -> "RPoly":
        """Exponent dilation t -> t^k.

        Since F_p coefficients are Frobenius-fixed, f^(p^e) == f.stretch(p^e);
        callers use this to take p-power powers in O(#terms).
        """
        if k < 1:
            raise ValueError("stretch factor must be >= 1")
        return RPoly(self.p, {e * k: c for e, c in self.c.items()})

    def compress(self, k: int) -> "RPoly":
        """Inverse of stretch: t^k -> t; errors unless every exponent divides."""
        d = {}
        for e, c in self.c.items():
            if e % k:
                raise ValueError(f"exponent {e} not divisible by {k}")
            d[e // k] = c
        return RPoly(self.p, d)

    def derivative(self) -> "RPoly":
        p = self.p
        d = {}
        for e, c in self.c.items():
            ce = (c * (e % p)) % p
            if e >= 1 and ce:
                d[e - 1] = ce
        return RPoly(p, d)

    # -- text ----------------------------------------------------------

    def __str__(self):
        return rpoly_to_str(self)

    def __repr__(self):
        return f"RPoly(p={self.p}, {rpoly_to_str(self)})"


def rpoly_to_str(f: RPoly, var: str = "t") -> str:
    if f.is_zero():
        return "0"
    parts = []
    for e in sorted(f.c, reverse=True):
        c = f.c[e]
        if e == 0:
            parts.append(str(c))
        else:
            power = var if e == 1 else f"{var}^{e}"
            parts.append(power if c == 1 else f"{c}*{power}")
    return "+".join(parts)


def rpoly_parse(p: int, text: str, var: str = "t") -> RPoly:
    """Parse the ASCII grammar for R = F_p[t]; accepts leading minus signs."""
    check_modulus(p)
    s = "".join(text.split())
    if not s:
        raise ValueError("empty polynomial text")
    # split into signed terms
    terms = []
    buf = ""
    sign = 1
    i = 0
    if s[0] in "+-":
        sign = -1 if s[0] == "-" else 1
        i = 1
    start_sign = sign
    for ch in s[i:]:
        if ch in "+-":
            terms.append((start_sign, buf))
            buf = ""
            start_sign = -1 if ch == "-" else 1
        else:
            buf += ch
    terms.append((start_sign, buf))
    acc = RPoly.zero(p)
    for sgn, term in terms:
        if not term:
            raise ValueError(f"malformed polynomial text: {text!r}")
        coef = 1
        exp = 0
        for factor in term.split("*"):
            if not factor:
                raise ValueError(f"malformed term {term!r}")
            if factor[0].isdigit():
                if not factor.isdigit():
                    raise ValueError(f"malformed term {term!r}")
                coef *= int(factor)
            elif factor.startswith(var):
                rest = factor[len(var):]
                if rest == "":
                    exp += 1
                elif rest.startswith("^") and rest[1:].isdigit():
                    exp += int(rest[1:])
                else:
                    raise ValueError(f"malformed term {term!r}")
            else:
                raise ValueError(f"unknown factor {factor!r} in {text!r}")
        acc = acc + RPoly.monomial(p, exp, sgn * coef)
    return acc


class FElem:
    """Element of F = F_p(t) as a canonical num/den pair (den monic, coprime)."""

    __slots__ = ("num", "den")

    def __init__(self, num: RPoly, den: RPoly, _canonical: bool = False):
        _require_same_p(num, den)
        if den.is_zero():
            raise ZeroDivisionError("zero denominator in F_p(t)")
        if not _canonical:
            g = num.gcd(den)
            if not g.is_one():
                num = num // g
                den = den // g
            if den.lead != 1:
                c = inv_mod(den.lead, den.p)
                num = num.scale(c)
                den = den.scale(c)
        self.num = num
        self.den = den

    @property
    def p(self):
        return self.num.p

    @classmethod
    def from_rpoly(cls, f: RPoly) -> "FElem":
        return cls(f, RPoly.one(f.p), _canonical=True)

    @classmethod
    def zero(cls, p: int) -> "FElem":
        return cls.from_rpoly(RPoly.zero(p))

    @classmethod
    def one(cls, p: int) -> "FElem":
        return cls.from_rpoly(RPoly.one(p))

    @classmethod
    def const(cls, p: int, c: int) -> "FElem":
        return cls.from_rpoly(RPoly.const(p, c))

    def is_zero(self) -> bool:
        return self.num.is_zero()

    def is_one(self) -> bool:
        return self.num.is_one() and self.den.is_one()

    def is_polynomial(self) -> bool:
        return self.den.is_one()

    def __hash__(self):
        return hash((self.num.key(), self.den.key()))

    def __eq__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return self.num == other.num and self.den == other.den

    def __bool__(self):
        return not self.num.is_zero()

    def _coerce(self, other):
        if isinstance(other, FElem):
            _require_same_p(self.num, other.num)
            return other
        if isinstance(other, RPoly):
            _require_same_p(self.num, other)
            return FElem.from_rpoly(other)
        if isinstance(other, int):
            return FElem.const(self.p, other)
        return None

    def __add__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return FElem(self.num * other.den + other.num * self.den,
                     self.den * other.den)

    __radd__ = __add__

    def __neg__(self):
        return FElem(-self.num, self.den, _canonical=True)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        if self.is_zero() or other.is_zero():
            return FElem.zero(self.p)
        if self.den.is_one() and other.den.is_one():
            return FElem(self.num * other.num, self.den, _canonical=True)
        return FElem(self.num * other.num, self.den * other.den)

    __rmul__ = __mul__

    def inverse(self) -> "FElem":
        if self.is_zero():
            raise ZeroDivisionError("inverse of 0 in F_p(t)")
        num, den = self.den, self.num
        if den.lead != 1:
            c = inv_mod(den.lead, den.p)
            num = num.scale(c)
            den = den.scale(c)
        return FElem(num, den, _canonical=True)

    def __truediv__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return self * other.inverse()

    def __rtruediv__(self, other):
        other = self._coerce(other)
        return other * self.inverse()

    def __pow__(self, n: int) -> "FElem":
        # coprimality and the monic denominator survive powering, so this
        # needs no re-reduction
        if n < 0:
            return self.inverse() ** (-n)
        if n == 0:
            return FElem.one(self.p)
        if self.is_zero():
            return self
        return FElem(self.num ** n, self.den ** n, _canonical=True)

    def frob(self, e: int) -> "FElem":
        """The p^e-th power, done termwise (coprimality is preserved)."""
        k = self.p ** e
        return FElem(self.num.stretch(k), self.den.stretch(k), _canonical=True)

    def __str__(self):
        if self.den.is_one():
            return rpoly_to_str(self.num)
        return f"({rpoly_to_str(self.num)})/({rpoly_to_str(self.den)})"

    def __repr__(self):
        return f"FElem(p={self.p}, {self})"


def felem_parse(p: int, text: str) -> FElem:
    s = "".join(text.split())
    num, den = _split_fraction(s)
    return FElem(rpoly_parse(p, num), rpoly_parse(p, den) if den is not None
                 else RPoly.one(p))


def _split_fraction(s: str):
    """Split 'a/b' at the single top-level slash, tolerating parentheses."""
    depth = 0
    for i, ch in enumerate(s):
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        elif ch == "/" and depth == 0:
            return _strip_parens(s[:i]), _strip_parens(s[i + 1:])
    return _strip_parens(s), None


def _strip_parens(s: str) -> str:
    while s.startswith("(") and s.endswith(")"):
        depth = 0
        ok = True
        for i, ch in enumerate(s):
            if ch == "(":
                depth += 1
            elif ch == ")":
                depth -= 1
                if depth == 0 and i != len(s) - 1:
                    ok = False
                    break
        if not ok:
            break
        s = s[1:-1]
    return s


# -- matrices over R -------------------------------------------------------


class RMatrix:
    """Immutable small matrix over R = F_p[t]."""

    __slots__ = ("p", "rows")

    def __init__(self, p: int, rows):
        check_modulus(p)
        self.p = p
        self.rows = tuple(tuple(entry for entry in row) for row in rows)
        width = {len(r) for r in self.rows}
        if len(width) > 1:
            raise ValueError("ragged matrix")
        for row in self.rows:
            for entry in row:
                if not isinstance(entry, RPoly) or entry.p != p:
                    raise ValueError("matrix entries must be RPoly over the same F_p")

    @classmethod
    def identity(cls, p: int, n: int) -> "RMatrix":
        one, zero = RPoly.one(p), RPoly.zero(p)
        return cls(p, [[one if i == j else zero for j in range(n)] for i in range(n)])

    @property
    def shape(self):
        return (len(self.rows), len(self.rows[0]) if self.rows else 0)

    def __eq__(self, other):
        return isinstance(other, RMatrix) and self.p == other.p and self.rows == other.rows

    def __matmul__(self, other: "RMatrix") -> "RMatrix":
        if self.p != other.p:
            raise ValueError("modulus mismatch in matrix product")
        n, k = self.shape
        k2, m = other.shape
        if k != k2:
            raise ValueError("shape mismatch in matrix product")
        zero = RPoly.zero(self.p)
        out = []
        for i in range(n):
            row = []
            for j in range(m):
                acc = zero
                for s in range(k):
                    acc = acc + self.rows[i][s] * other.rows[s][j]
                row.append(acc)
            out.append(row)
        return RMatrix(self.p, out)

    def det(self) -> RPoly:
        n, m = self.shape
        if n != m:
            raise ValueError("determinant of a non-square matrix")
        if n == 0:
            return RPoly.one(self.p)
        if n == 1:
            return self.rows[0][0]
        acc = RPoly.zero(self.p)
        for j in range(n):
            entry = self.rows[0][j]
            if entry.is_zero():
                continue
            minor = RMatrix(self.p, [
                [self.rows[i][jj] for jj in range(n) if jj != j]
                for i in range(1, n)
            ])
            term = entry * minor.det()
            acc = acc + (term if j % 2 == 0 else -term)
        return acc

    def is_unimodular(self) -> bool:
        d = self.det()
        return d.is_constant() and not d.is_zero()

    def __str__(self):
        return "[" + "; ".join(", ".join(str(e) for e in row) for row in self.rows) + "]"


@dataclass(frozen=True)
class SmithForm:
    """U @ A @ V == D with U, V unimodular and D diagonal, d1 | d2 | ..."""
    u: RMatrix
    d: RMatrix
    v: RMatrix
    vinv: RMatrix

    @property
    def invariant_factors(self):
        n, m = self.d.shape
        return tuple(self.d.rows[i][i] for i in range(min(n, m)))


def smith_normal_form(a: RMatrix) -> SmithForm:
    """Smith normal form over R = F_p[t].

    Pivots are chosen by minimal degree, ties broken by lowest row index then
    lowest column index, so the reduction (and the returned transforms) are
    deterministic.  Invariant factors come out monic.
    """
    p = a.p
    n, m = a.shape
    rows = [list(r) for r in a.rows]
    u = [list(r) for r in RMatrix.identity(p, n).rows]
    v = [list(r) for r in RMatrix.identity(p, m).rows]
    vinv = [list(r) for r in RMatrix.identity(p, m).rows]

    def swap_rows(i, j):
        if i != j:
            rows[i], rows[j] = rows[j], rows[i]
            u[i], u[j] = u[j], u[i]

    def addmul_row(dst, src, q):
        # row_dst -= q * row_src
        for col in range(m):
            rows[dst][col] = rows[dst][col] - q * rows[src][col]
        for col in range(n):
            u[dst][col] = u[dst][col] - q * u[src][col]

    def swap_cols(i, j):
        if i != j:
            for r in rows:
                r[i], r[j] = r[j], r[i]
            for r in v:
                r[i], r[j] = r[j], r[i]
            vinv[i], vinv[j] = vinv[j], vinv[i]

    def addmul_col(dst, src, q):
        # col_dst -= q * col_src;  inverse: row_src += q * row_dst (on vinv)
        for r in rows:
            r[dst] = r[dst] - q * r[src]
        for r in v:
            r[dst] = r[dst] - q * r[src]
        for col in range(m):
            vinv[src][col] = vinv[src][col] + q * vinv[dst][col]

    def scale_row(i, c):
        for col in range(m):
            rows[i][col] = rows[i][col].scale(c)
        for col in range(n):
            u[i][col] = u[i][col].scale(c)

    k = 0
    while k < min(n, m):
        # locate minimal-degree nonzero pivot in the trailing submatrix
        pivot = None
        for i in range(k, n):
            for j in range(k, m):
                e = rows[i][j]
                if e.is_zero():
                    continue
                if pivot is None or e.degree < rows[pivot[0]][pivot[1]].degree:
                    pivot = (i, j)
        if pivot is None:
            break
        swap_rows(k, pivot[0])
        swap_cols(k, pivot[1])
        while True:
            # clear column k below the pivot
            dirty = False
            for i in range(k + 1, n):
                if rows[i][k].is_zero():
                    continue
                q, r = divmod(rows[i][k], rows[k][k])
                addmul_row(i, k, q)
                if not r.is_zero():
                    # remainder has smaller degree: promote it to pivot
                    swap_rows(k, i)
                    dirty = True
            for j in range(k + 1, m):
                if rows[k][j].is_zero():
                    continue
                q, r = divmod(rows[k][j], rows[k][k])
                addmul_col(j, k, q)
                if not r.is_zero():
                    swap_cols(k, j)
                    dirty = True
            if dirty:
                continue
            # pivot divides every remaining entry?
            offender = None
            for i in range(k + 1, n):
                for j in range(k + 1, m):
                    if not (rows[i][j] % rows[k][k]).is_zero():
                        offender = i
                        break
                if offender is not None:
                    break
            if offender is None:
                break
            # fold the offending row into row k and keep reducing
            addmul_row(k, offender, RPoly.const(p, -1))
        if rows[k][k].lead != 1:
            scale_row(k, inv_mod(rows[k][k].lead, p))
        k += 1

    return SmithForm(RMatrix(p, u), RMatrix(p, rows), RMatrix(p, v), RMatrix(p, vinv))


# -- F_p linear algebra ----------------------------------------------------


def fp_rref(rows, p):
    """Reduced row echelon form over F_p.

    Returns (rref, pivot_cols).  `rows` is a list of equal-length int lists;
    the input is not modified.
    """
    mat = [[x % p for x in row] for row in rows]
    n = len(mat)
    m = len(mat[0]) if n else 0
    pivots = []
    r = 0
    for col in range(m):
        sel = None
        for i in range(r, n):
            if mat[i][col]:
                sel = i
                break
        if sel is None:
            continue
        mat[r], mat[sel] = mat[sel], mat[r]
        inv = inv_mod(mat[r][col], p)
        mat[r] = [(x * inv) % p for x in mat[r]]
        for i in range(n):
            if i != r and mat[i][col]:
                f = mat[i][col]
                mat[i] = [(a - f * b) % p for a, b in zip(mat[i], mat[r])]
        pivots.append(col)
        r += 1
        if r == n:
            break
    return mat, pivots


def fp_nullspace(rows, p):
    """Deterministic kernel basis of a matrix over F_p.

    Basis vectors correspond to free columns in ascending order; each has a 1
    in its free coordinate.  Returns a list of int lists.
    """
    check_modulus(p)
    if not rows:
        return []
    m = len(rows[0])
    rref, pivots = fp_rref(rows, p)
    pivot_set = set(pivots)
    free_cols = [j for j in range(m) if j not in pivot_set]
    basis = []
    for fc in free_cols:
        vec = [0] * m
        vec[fc] = 1
        for r, pc in enumerate(pivots):
            vec[pc] = (-rref[r][fc]) % p
        basis.append(vec)
    return basis


def fp_solve(rows, rhs, p):
    """One solution of A x = b over F_p, or None if inconsistent."""
    return fp_solve_many(rows, [list(rhs)], p)[0]


def fp_solve_many(rows, rhs_list, p):
    """Solve A x = b for many right-hand sides with one elimination.

    Pivots are restricted to the coefficient block.  Returns a list whose
    entries are a solution vector or None (inconsistent system).
    """
    if not rows:
        return [([] if not any(x % p for x in rhs) else None) for rhs in rhs_list]
    m = len(rows[0])
    n = len(rows)
    mat = [[x % p for x in rows[i]] + [rhs[i] % p for rhs in rhs_list]
           for i in range(n)]
    pivots = []
    r = 0
    for col in range(m):
        sel = None
        for i in range(r, n):
            if mat[i][col]:
                sel = i
                break
        if sel is None:
            continue
        mat[r], mat[sel] = mat[sel], mat[r]
        inv = inv_mod(mat[r][col], p)
        mat[r] = [(x * inv) % p for x in mat[r]]
        for i in range(n):
            if i != r and mat[i][col]:
                f = mat[i][col]
                mat[i] = [(a - f * b) % p for a, b in zip(mat[i], mat[r])]
        pivots.append(col)
        r += 1
        if r == n:
            break
    zero_rows = [i for i in range(len(pivots), n)]
    out = []
    for s, _rhs in enumerate(rhs_list):
        col = m + s
        if any(mat[i][col] for i in zero_rows):
            out.append(None)
            continue
        sol = [0] * m
        for rr, pc in enumerate(pivots):
            sol[pc] = mat[rr][col]
        out.append(sol)
    return out
