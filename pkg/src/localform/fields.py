"""Local fields as explicit towers over Q_p, with precision-tracked arithmetic.

A tower is Q_p followed by at most one unramified step and at most one
Eisenstein step (in that order), total degree <= DEGREE_CAP.  Elements are
stored as coefficient vectors over the monomial basis u^i * pi^j (u a lift
of a residue-field generator, pi the uniformizer), with coefficients kept
modulo p^pcap and an explicit absolute pi-adic precision.  Square-class
decisions downstream require relative precision >= 2e+1; any operation that
cannot certify its output raises PrecisionExhausted instead of guessing.
"""

from __future__ import annotations

import math
import os
from fractions import Fraction

from .errors import (
    DivisionByZero,
    InvalidPolynomial,
    PrecisionExhausted,
    TowerMismatch,
    UnsupportedDegree,
    UnsupportedExtension,
)
from .extvals import INF, Ext

DEGREE_CAP = 6


# ---------------------------------------------------------------------------
# residue fields GF(p^f)


class ResidueField:
    """GF(p^f) with elements as integer tuples modulo the residue polynomial."""

    def __init__(self, p, poly):
        # poly: monic residue polynomial as tuple of length f (low coeffs
        # first, leading 1 omitted), entries in [0, p)
        self.p = p
        self.f = len(poly)
        self.poly = tuple(c % p for c in poly)
        self.q = p**self.f
        self.zero = (0,) * self.f
        self.one = tuple([1] + [0] * (self.f - 1))
        self._sqrt_cache = {}

    def elems(self):
        out = []
        for code in range(self.q):
            v = []
            c = code
            for _ in range(self.f):
                v.append(c % self.p)
                c //= self.p
            out.append(tuple(v))
        return out

    def add(self, a, b):
        return tuple((x + y) % self.p for x, y in zip(a, b))

    def neg(self, a):
        return tuple((-x) % self.p for x in a)

    def mul(self, a, b):
        p, f = self.p, self.f
        prod = [0] * (2 * f - 1)
        for i, x in enumerate(a):
            if x:
                for j, y in enumerate(b):
                    prod[i + j] = (prod[i + j] + x * y) % p
        # reduce x^f = -poly
        for k in range(2 * f - 2, f - 1, -1):
            c = prod[k]
            if c:
                prod[k] = 0
                for t in range(f):
                    prod[k - f + t] = (prod[k - f + t] - c * self.poly[t]) % p
        return tuple(prod[:f])

    def pow(self, a, n):
        out = self.one
        base = a
        while n:
            if n & 1:
                out = self.mul(out, base)
            base = self.mul(base, base)
            n >>= 1
        return out

    def is_zero(self, a):
        return all(x == 0 for x in a)

    def sqrt(self, a):
        """A square root, or None if a is a non-square (p odd)."""
        if self.is_zero(a):
            return self.zero
        if self.p == 2:
            # Frobenius is bijective; inverse is x -> x^(q/2)
            return self.pow(a, self.q // 2)
        if a in self._sqrt_cache:
            return self._sqrt_cache[a]
        for x in self.elems():
            self._sqrt_cache[self.mul(x, x)] = x
        return self._sqrt_cache.get(a)

    def artin_schreier_solve(self, w):
        """Solve z^2 + z = w over GF(2^f), or None if insoluble."""
        for z in self.elems():
            if self.add(self.mul(z, z), z) == w:
                return z
        return None


def _poly_irreducible(p, poly):
    """Irreducibility of a monic poly (tuple, leading 1 omitted) over F_p."""
    f = len(poly)
    if f == 1:
        return True
    full = list(poly) + [1]

    def poly_mod(a, b):
        a = list(a)
        db, da = len(b) - 1, len(a) - 1
        while da >= db and any(a):
            c = a[da] * pow(b[db], -1, p) % p
            if c:
                for t in range(db + 1):
                    a[da - db + t] = (a[da - db + t] - c * b[t]) % p
            da -= 1
            while da >= 0 and a[da] == 0:
                da -= 1
            if da < 0:
                break
            a = a[: da + 1]
        return [x % p for x in a]

    # trial division by all monic polynomials of degree 1..f//2
    for d in range(1, f // 2 + 1):
        for code in range(p**d):
            g = []
            c = code
            for _ in range(d):
                g.append(c % p)
                c //= p
            g.append(1)
            r = poly_mod(full, g)
            if not any(r):
                return False
    return True


def _smallest_irreducible(p, f):
    """Lexicographically smallest monic irreducible of degree f over F_p."""
    if f == 1:
        return (0,)
    for code in range(p**f):
        poly = []
        c = code
        for _ in range(f):
            poly.append(c % p)
            c //= p
        if _poly_irreducible(p, tuple(poly)):
            return tuple(poly)
    raise InvalidPolynomial(f"no irreducible of degree {f} over F_{p}")


# ---------------------------------------------------------------------------
# tower steps


class Unramified:
    def __init__(self, deg):
        if deg < 1:
            raise InvalidPolynomial("unramified degree must be >= 1")
        self.deg = deg

    def __repr__(self):
        return f"Unramified({self.deg})"


class Eisenstein:
    """Monic Eisenstein polynomial x^e + c_{e-1} x^{e-1} + ... + c_0.

    Coefficients are rationals (or elements of the field below); each must
    have positive order and the constant term order exactly 1.
    """

    def __init__(self, coeffs):
        if not coeffs:
            raise InvalidPolynomial("eisenstein step needs coefficients")
        self.coeffs = list(coeffs)
        self.deg = len(coeffs)

    def __repr__(self):
        return f"Eisenstein({self.coeffs})"


def _is_prime(n):
    if n < 2:
        return False
    d = 2
    while d * d <= n:
        if n % d == 0:
            return False
        d += 1
    return True


# ---------------------------------------------------------------------------
# the tower


class FieldTower:
    """A non-archimedean local field presented as a tower over Q_p.

    Immutable after construction; per-field tables (class enumeration,
    Hilbert pairing, quotient rings) are cached on the instance and shared
    read-only.
    """

    def __init__(self, p, steps, name=None, precision=None):
        if not _is_prime(p):
            raise InvalidPolynomial(f"{p} is not prime")
        self.residue_char = self.p = p
        self.name = name
        self.is_dyadic = p == 2

        f_abs, e_abs = 1, 1
        unram = None
        eis = None
        for step in steps:
            if isinstance(step, Unramified):
                if unram is not None or eis is not None:
                    raise InvalidPolynomial(
                        "tower must be one unramified step then one eisenstein step"
                    )
                unram = step
                f_abs = step.deg
            elif isinstance(step, Eisenstein):
                if eis is not None:
                    raise InvalidPolynomial("at most one eisenstein step")
                eis = step
                e_abs = step.deg
            else:
                raise InvalidPolynomial(f"unknown step {step!r}")
        self.steps = tuple(steps)
        self.e_abs = e_abs
        self.f_abs = f_abs
        self.degree = e_abs * f_abs
        if self.degree > DEGREE_CAP:
            raise UnsupportedDegree(
                f"degree {self.degree} exceeds cap {DEGREE_CAP}"
            )
        self.e2 = e_abs if p == 2 else 0

        if precision is None:
            precision = os.environ.get("LOCALFORM_PRECISION")
            precision = int(precision) if precision else None
        # working precision in pi-adic digits
        self.work_prec = precision if precision else 6 * e_abs + 12
        # stored p-adic coefficient width; generous so that exact desk-scale
        # rational arithmetic never silently wraps
        self.pcap = max(-(-self.work_prec // e_abs) + 2 * e_abs + 8, 64)
        self.P = p**self.pcap
        self._exact_bound = p ** (6 * self.pcap)

        self.respoly = _smallest_irreducible(p, f_abs)
        self.residue_field = ResidueField(p, self.respoly)

        self._init_eisenstein(eis)
        self._build_product_table()

        self.n = self.degree
        self.zero = PadicElement(self, 0, (0,) * self.n, None)
        self.one = self.unit_vector(0)
        if e_abs > 1:
            self.pi = self.unit_vector(self._basis_index(0, 1))
        else:
            self.pi = PadicElement(self, -1, self.one.coeffs, None)
        self._pi_pows = {0: self.one, 1: self.pi}
        self._init_pi_division()
        self._caches = {}

    # -- construction internals ------------------------------------------

    def _basis_index(self, i, j):
        return j * self.f_abs + i

    def _init_eisenstein(self, eis):
        p, f = self.p, self.f_abs
        P = self.P
        self.exact_ok = True
        if eis is None:
            self.eis_coeffs = None
            return
        coeffs = []
        for c in eis.coeffs:
            if not isinstance(c, (int, Fraction)):
                raise InvalidPolynomial(
                    "eisenstein coefficients must be rationals"
                )
            fr = Fraction(c)
            num, den = fr.numerator, fr.denominator
            a = 0
            while num and num % p == 0:
                num //= p
                a += 1
            if den % p == 0:
                raise InvalidPolynomial("eisenstein coefficient has a pole at p")
            if fr == 0:
                vec = [0] * f
            elif den == 1:
                vec = [num * p**a] + [0] * (f - 1)
            else:
                # p-free denominator: representable only as a truncated
                # expansion, so exact arithmetic is off for this tower
                self.exact_ok = False
                vec = [num * pow(den, -1, P) * p**a % P] + [0] * (f - 1)
            ordc = INF if fr == 0 else Ext.whole(a)
            coeffs.append((vec, ordc))
        # validity: ord >= 1 for all, ord == 1 for the constant term
        if coeffs[0][1] != Ext.whole(1):
            raise InvalidPolynomial("constant term must have order exactly 1")
        for _, o in coeffs[1:]:
            if o < Ext.whole(1):
                raise InvalidPolynomial(
                    "eisenstein coefficients must have positive order"
                )
        self.eis_coeffs = [vec for vec, _ in coeffs]

    def _u_reduce(self, upoly):
        """Reduce a u-polynomial (list of ints, any length) to length f.

        Exact integer arithmetic; no modular reduction happens here.
        """
        f = self.f_abs
        c = list(upoly)
        lift = list(self.respoly)
        for k in range(len(c) - 1, f - 1, -1):
            h = c[k]
            if h:
                c[k] = 0
                for t in range(f):
                    c[k - f + t] = c[k - f + t] - h * lift[t]
        out = c[:f]
        return out + [0] * (f - len(out))

    def _build_product_table(self):
        """Coefficient expansion of products of basis monomials (exact)."""
        f, e = self.f_abs, self.e_abs
        n = f * e

        # u^a for a = 0..2f-2, as length-f vectors
        upows = []
        for a in range(2 * f - 1):
            vec = [0] * (a + 1)
            vec[a] = 1
            upows.append(self._u_reduce(vec))

        # pi^b for b = 0..2e-2, as e-vectors of u-vectors
        pipows = []
        for b in range(e):
            mat = [[0] * f for _ in range(e)]
            mat[b][0] = 1
            pipows.append(mat)
        for b in range(e, 2 * e - 1):
            prev = pipows[b - 1]
            mat = [[0] * f for _ in range(e)]
            for j in range(e - 1):
                mat[j + 1] = list(prev[j])
            top = prev[e - 1]
            if any(top):
                for k in range(e):
                    ck = self.eis_coeffs[k]
                    prod = [0] * (2 * f - 1)
                    for i, x in enumerate(top):
                        if x:
                            for i2, y in enumerate(ck):
                                if y:
                                    prod[i + i2] += x * y
                    red = self._u_reduce(prod)
                    for t in range(f):
                        mat[k][t] -= red[t]
            pipows.append(mat)

        table = [[None] * n for _ in range(n)]
        for j1 in range(e):
            for i1 in range(f):
                k1 = self._basis_index(i1, j1)
                for j2 in range(e):
                    for i2 in range(f):
                        k2 = self._basis_index(i2, j2)
                        ured = upows[i1 + i2]
                        pimat = pipows[j1 + j2]
                        vec = [0] * n
                        for j in range(e):
                            row = pimat[j]
                            if not any(row):
                                continue
                            prod = [0] * (2 * f - 1)
                            for a, x in enumerate(ured):
                                if x:
                                    for b2, y in enumerate(row):
                                        if y:
                                            prod[a + b2] += x * y
                            red = self._u_reduce(prod)
                            for i in range(f):
                                vec[self._basis_index(i, j)] += red[i]
                        table[k1][k2] = tuple(vec)
        self._bpt = table

    def _init_pi_division(self):
        """Precompute p * pi^{-1}, certifying exactness when possible."""
        if self.e_abs == 1:
            self._p_over_pi = self.one
            self._pi_div_exact = True
            return
        self._p_over_pi = None  # normalize must not need it before this
        self._pi_div_exact = False
        p_elt = PadicElement(self, -1, self.one.coeffs, None)
        approx = p_elt * self.pi.inverse()
        # try a small balanced lift and verify pi * z == p exactly
        bound = self.p ** (self.pcap // 4)
        lift = []
        ok = approx.pexp <= 0
        if ok:
            m = self.p ** (-approx.pexp) if approx.pexp < 0 else 1
            for c in approx.coeffs:
                c = (c * m) % self.P
                if c > self.P // 2:
                    c -= self.P
                if abs(c) > bound:
                    ok = False
                    break
                lift.append(c)
        if ok:
            prod = _vec_mul(self, tuple(lift), self.pi.coeffs)
            target = [self.p] + [0] * (self.degree - 1)
            if list(prod) == target:
                self._p_over_pi = PadicElement(self, 0, tuple(lift), None)
                self._pi_div_exact = True
                return
        self._p_over_pi = approx

    # -- element factories -------------------------------------------------

    def unit_vector(self, k):
        vec = [0] * self.degree
        vec[k] = 1
        return PadicElement(self, 0, tuple(vec), None)

    def elem(self, v):
        """Element from an int, Fraction or 'num/den' string.

        Exact (infinite-precision) when the denominator is a power of p and
        the tower's tables are exact; otherwise carries working precision.
        """
        if isinstance(v, PadicElement):
            if v.tower is not self:
                raise TowerMismatch("element from a different tower")
            return v
        fr = Fraction(v)
        if fr == 0:
            return self.zero
        p, P = self.p, self.P
        num, den = fr.numerator, fr.denominator
        a = 0
        while num % p == 0:
            num //= p
            a += 1
        b = 0
        while den % p == 0:
            den //= p
            b += 1
        vec = [0] * self.degree
        if den == 1 and self.exact_ok:
            vec[0] = num
            prec = None
        else:
            vec[0] = num * pow(den, -1, P) % P
            prec = self.e_abs * (self.pcap - max(b - a, 0) - 2)
        return PadicElement(self, b - a, tuple(vec), prec)

    def from_coeff_ints(self, ints, pexp=0, prec=None):
        """Exact element with the given monomial-basis integer coefficients."""
        vec = tuple(int(c) for c in ints)
        return PadicElement(self, pexp, vec, prec)

    def pi_pow(self, k):
        if k in self._pi_pows:
            return self._pi_pows[k]
        if k < 0:
            if self._pi_div_exact:
                # pi^-k = (p/pi)^k * p^-k stays exact
                q = self._p_over_pi ** (-k)
                out = PadicElement(self, q.pexp - k, q.coeffs, q.prec)
            else:
                out = self.pi_pow(-k).inverse()
        else:
            out = self.pi_pow(k - 1) * self.pi
        self._pi_pows[k] = out
        return out

    def residue_lift(self, rf_elem):
        """Exact integral lift of a residue-field element."""
        vec = [0] * self.degree
        for i, c in enumerate(rf_elem):
            vec[self._basis_index(i, 0)] = c
        return PadicElement(self, 0, tuple(vec), None)

    # -- misc ---------------------------------------------------------------

    @property
    def uniformizer(self):
        return self.pi

    @property
    def delta(self):
        """A unit generating the unramified quadratic extension."""
        from .squares import class_table

        return class_table(self).delta_element

    def cache(self, key, builder):
        if key not in self._caches:
            self._caches[key] = builder()
        return self._caches[key]

    def __repr__(self):
        nm = self.name or f"Q{self.p}+{list(self.steps)}"
        return f"FieldTower({nm}, e={self.e_abs}, f={self.f_abs})"


def _solve_linear(tower, a, b):
    """Solve a*z = b exactly over the coefficient lattice (a a unit times a
    power of pi, with integral quotient)."""
    n, P, p = tower.degree, tower.P, tower.p
    cols = []
    for k in range(n):
        prod = _vec_mul(tower, a.coeffs, tower.unit_vector(k).coeffs)
        cols.append(prod)
    # scale b to a's pexp
    shift = a.pexp - b.pexp
    bvec = list(b.coeffs)
    if shift > 0:
        bvec = [c * p**shift % P for c in bvec]
    elif shift < 0:
        acols = []
        for col in cols:
            acols.append([c * p ** (-shift) % P for c in col])
        cols = acols
    mat = [[cols[k][r] for k in range(n)] for r in range(n)]
    rhs = list(bvec)
    # gaussian elimination mod P with unit pivots
    for col in range(n):
        piv = None
        for r in range(col, n):
            if mat[r][col] % p != 0:
                piv = r
                break
        if piv is None:
            raise PrecisionExhausted("linear solve: no unit pivot")
        mat[col], mat[piv] = mat[piv], mat[col]
        rhs[col], rhs[piv] = rhs[piv], rhs[col]
        inv = pow(mat[col][col], -1, P)
        mat[col] = [x * inv % P for x in mat[col]]
        rhs[col] = rhs[col] * inv % P
        for r in range(n):
            if r != col and mat[r][col]:
                c = mat[r][col]
                mat[r] = [(x - c * y) % P for x, y in zip(mat[r], mat[col])]
                rhs[r] = (rhs[r] - c * rhs[col]) % P
    return PadicElement(tower, 0, tuple(rhs), None)


def _vec_mul(tower, c1, c2):
    """Exact coefficient-vector product over the monomial basis."""
    n = tower.degree
    bpt = tower._bpt
    out = [0] * n
    for k1 in range(n):
        x = c1[k1]
        if not x:
            continue
        row = bpt[k1]
        for k2 in range(n):
            y = c2[k2]
            if not y:
                continue
            xy = x * y
            vec = row[k2]
            for t in range(n):
                v = vec[t]
                if v:
                    out[t] += xy * v
    return out


# ---------------------------------------------------------------------------
# elements


def _vp(x, p, cap):
    """p-adic valuation of an integer representative, capped."""
    if x == 0:
        return cap
    v = 0
    while x % p == 0 and v < cap:
        x //= p
        v += 1
    return v


class PadicElement:
    """Value p^{-pexp} * sum(coeffs[k] * basis_k), known modulo pi^prec.

    prec is the absolute pi-adic precision; None marks an exact element,
    whose coefficients are kept as unbounded integers.  Finite-precision
    coefficients are reduced modulo p^pcap.  Exact zero is the distinguished
    value with all-zero coefficients and prec None; its valuation is +oo.
    """

    __slots__ = ("tower", "pexp", "coeffs", "prec", "_ord")

    def __init__(self, tower, pexp, coeffs, prec):
        self.tower = tower
        self.pexp = pexp
        self.coeffs = coeffs
        self.prec = prec
        self._ord = None
        self._normalize()

    # -- normalization ------------------------------------------------------

    def _normalize(self):
        t = self.tower
        p, e = t.p, t.e_abs
        if self.prec is None and any(
            abs(c) > t._exact_bound for c in self.coeffs
        ):
            # safety valve: demote runaway exact values to finite precision
            self.prec = e * (t.pcap - max(self.pexp, 0) - 2)
        if self.prec is not None:
            self.coeffs = tuple(c % t.P for c in self.coeffs)
        if all(c == 0 for c in self.coeffs):
            self.pexp = 0
            if self.prec is not None:
                self.prec = min(self.prec, e * (t.pcap - 2))
            return
        # strip common powers of p into pexp
        while all(c % p == 0 for c in self.coeffs):
            self.coeffs = tuple(c // p for c in self.coeffs)
            self.pexp -= 1
        # clear positive denominators when the value is integral
        while self.pexp > 0:
            if self.prec is None and not t._pi_div_exact:
                break
            v = self._stored_ord()
            if v is None or v < e:
                break
            vec = self.coeffs
            for _ in range(e):
                vec = _div_pi_vec(t, vec)
            self.coeffs = tuple(vec)
            self.pexp -= 1
            while all(c % p == 0 for c in self.coeffs) and any(self.coeffs):
                self.coeffs = tuple(c // p for c in self.coeffs)
                self.pexp -= 1
        if self.prec is not None:
            # clamp to what the stored representative can support
            self.prec = min(self.prec, e * (t.pcap - max(self.pexp, 0) - 2))

    def _stored_ord(self):
        """pi-order of the stored integral vector, None if all digits gone."""
        t = self.tower
        if all(c == 0 for c in self.coeffs):
            return None
        f, e, p = t.f_abs, t.e_abs, t.p
        cap = t.pcap if self.prec is not None else 6 * t.pcap
        best = None
        for j in range(e):
            col = [self.coeffs[t._basis_index(i, j)] for i in range(f)]
            vj = min(_vp(c, p, cap) for c in col)
            if vj < cap:
                cand = e * vj + j
                if best is None or cand < best:
                    best = cand
        return best

    # -- basic queries --------------------------------------------------------

    @property
    def is_exact(self):
        return self.prec is None

    @property
    def is_zero(self):
        return self.prec is None and all(c == 0 for c in self.coeffs)

    def vanishes_to(self, level):
        """True when the element is 0 modulo pi^min(level, known precision)."""
        if self.is_zero:
            return True
        try:
            v = self.valuation
        except PrecisionExhausted:
            return True
        return v >= level

    @property
    def valuation(self):
        """ord(x) as an Ext; infinity only for the exact zero."""
        if self._ord is not None:
            return self._ord
        if self.is_zero:
            self._ord = INF
            return INF
        v = self._stored_ord()
        e = self.tower.e_abs
        if v is None:
            if self.prec is None:
                self._ord = INF
                return INF
            raise PrecisionExhausted(
                "all stored digits vanish but the element is not exact zero"
            )
        o = v - e * self.pexp
        if self.prec is not None and o >= self.prec:
            raise PrecisionExhausted(
                f"order {o} not below precision {self.prec}"
            )
        self._ord = Ext.whole(o)
        return self._ord

    def ord(self):
        return self.valuation

    @property
    def abs_precision(self):
        if self.prec is not None:
            return self.prec
        return self.tower.e_abs * (self.tower.pcap - self.pexp)

    @property
    def rel_precision(self):
        return self.abs_precision - self.valuation.as_int()

    @property
    def digits(self):
        return self.coeffs

    # -- arithmetic -----------------------------------------------------------

    def _check(self, other):
        if not isinstance(other, PadicElement):
            other = self.tower.elem(other)
        if other.tower is not self.tower:
            raise TowerMismatch("elements from different towers")
        return other

    def __add__(self, other):
        other = self._check(other)
        t = self.tower
        p = t.p
        pe = max(self.pexp, other.pexp)
        c1 = self.coeffs
        c2 = other.coeffs
        if self.pexp < pe:
            m = p ** (pe - self.pexp)
            c1 = tuple(c * m for c in c1)
        if other.pexp < pe:
            m = p ** (pe - other.pexp)
            c2 = tuple(c * m for c in c2)
        vec = tuple(a + b for a, b in zip(c1, c2))
        prec = _min_prec(self.prec, other.prec)
        return PadicElement(t, pe, vec, prec)

    __radd__ = __add__

    def __neg__(self):
        return PadicElement(
            self.tower, self.pexp, tuple(-c for c in self.coeffs), self.prec
        )

    def __sub__(self, other):
        return self + (-self._check(other))

    def __rsub__(self, other):
        return self._check(other) - self

    def __mul__(self, other):
        other = self._check(other)
        t = self.tower
        if self.is_zero or other.is_zero:
            return t.zero
        vec = _vec_mul(t, self.coeffs, other.coeffs)
        prec = None
        if self.prec is not None or other.prec is not None:
            cands = []
            if other.prec is not None:
                cands.append(self.valuation + Ext.whole(other.prec))
            if self.prec is not None:
                cands.append(other.valuation + Ext.whole(self.prec))
            m = min(cands)
            prec = None if m.is_inf else m.as_int()
        return PadicElement(t, self.pexp + other.pexp, tuple(vec), prec)

    __rmul__ = __mul__

    def inverse(self):
        t = self.tower
        if self.is_zero:
            raise DivisionByZero("inverse of exact zero")
        v = self.valuation  # raises if indeterminate
        e, p, P = t.e_abs, t.p, t.P
        vy = v.as_int() + e * self.pexp  # order of the stored vector
        c = -((-vy) // e)  # ceil(vy/e)
        w = self.tower.pi_pow(e * c - vy) if e * c - vy else None
        yvec = self.coeffs
        if w is not None:
            yvec = _vec_mul(t, yvec, w.coeffs)
        m = p**c
        # ord(w) = e*c forces every stored coefficient divisible by p^c
        u0 = tuple((x // m) % P for x in yvec)
        # u0 is now a unit: invert by linear solve
        u0e = PadicElement(t, 0, u0, None)
        inv = _solve_linear(t, u0e, t.one)
        res = inv * t.pi_pow(e * c - vy)
        if self.prec is not None:
            rel = self.prec - v.as_int()
        else:
            rel = e * t.pcap  # clamped to representational cap by normalize
        out = PadicElement(
            t,
            res.pexp + (c - self.pexp),
            res.coeffs,
            -v.as_int() + rel,
        )
        return out

    def __truediv__(self, other):
        other = self._check(other)
        return self * other.inverse()

    def __rtruediv__(self, other):
        return self._check(other) * self.inverse()

    def __pow__(self, k):
        if k < 0:
            return self.inverse() ** (-k)
        out = self.tower.one
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def with_prec(self, prec):
        return PadicElement(self.tower, self.pexp, self.coeffs, prec)

    def at_working_precision(self):
        """A finite-precision copy (clamped to the representational cap)."""
        if self.prec is not None:
            return self
        t = self.tower
        return PadicElement(t, self.pexp, self.coeffs, t.e_abs * t.pcap)

    # -- residue and square roots ----------------------------------------------

    def residue(self):
        """Image in the residue field (element must be integral)."""
        t = self.tower
        x = self
        if x.pexp > 0:
            x = x.at_working_precision()
            if x.pexp > 0:
                raise PrecisionExhausted("residue of a non-integral element")
        m = t.p ** (-x.pexp) if x.pexp < 0 else 1
        return tuple(
            x.coeffs[t._basis_index(i, 0)] * m % t.p for i in range(t.f_abs)
        )

    def unit_part(self):
        """x / pi^ord(x)."""
        v = self.valuation
        if v.is_inf:
            raise DivisionByZero("unit part of zero")
        k = v.as_int()
        if k == 0:
            return self
        return self * self.tower.pi_pow(-k)

    def sqrt_try(self):
        """A square root at working precision, or None when there is none.

        Requires relative precision >= 2*ord(2)+1 on nonzero input.
        """
        t = self.tower
        if self.is_zero:
            return t.zero
        v = self.valuation
        k = v.as_int()
        if k % 2 != 0:
            return None
        w = self.unit_part()
        need = 2 * t.e2 + 1
        if w.prec is not None and w.prec < need:
            raise PrecisionExhausted(
                f"square decision needs relative precision >= {need}"
            )
        root = _unit_sqrt(t, w)
        if root is None:
            return None
        out = root * t.pi_pow(k // 2)
        if self.prec is not None:
            rel = self.prec - k
            out = out.with_prec(k // 2 + max(rel - t.e2, 1))
        return out

    def is_square(self):
        try:
            return self.sqrt_try() is not None
        except PrecisionExhausted:
            raise

    def __repr__(self):
        t = self.tower
        if self.is_zero:
            return "0"
        try:
            v = self.valuation
            vs = repr(v)
        except PrecisionExhausted:
            vs = "?"
        return (
            f"<{t.name or 'elt'} pexp={self.pexp} ord={vs} "
            f"coeffs={self.coeffs[:4]}{'...' if len(self.coeffs) > 4 else ''}>"
        )


def _min_prec(p1, p2):
    if p1 is None:
        return p2
    if p2 is None:
        return p1
    return min(p1, p2)


def _div_pi_vec(tower, vec):
    """Divide an integral vector of pi-order >= 1 by pi (exact)."""
    t = tower
    f, e, p, P = t.f_abs, t.e_abs, t.p, t.P
    if e == 1:
        # pi = p: all coefficients divisible by p
        return [c // p for c in vec]
    a0 = [vec[t._basis_index(i, 0)] for i in range(f)]
    shifted = [0] * (f * e)
    for j in range(1, e):
        for i in range(f):
            shifted[t._basis_index(i, j - 1)] = vec[t._basis_index(i, j)]
    if any(a0):
        # a0 is divisible by p since ord >= 1
        a0p = [0] * (f * e)
        for i in range(f):
            a0p[t._basis_index(i, 0)] = (a0[i] // p) % P
        term = _vec_mul(t, tuple(a0p), t._p_over_pi.coeffs)
        shifted = [(x + y) % P for x, y in zip(shifted, term)]
    return shifted


def _unit_sqrt(tower, w):
    """Square root of a unit, or None; digit-improvement plus Newton."""
    t = tower
    rf = t.residue_field
    if not t.is_dyadic:
        r = rf.sqrt(w.residue())
        if r is None:
            return None
        z = t.residue_lift(r)
        return _newton_sqrt(t, w, z)

    e = t.e_abs
    s = t.residue_lift(rf.sqrt(w.residue()))
    for _ in range(2 * e + 4):
        r = w - s * s
        if r.is_zero:
            return s
        try:
            tv = r.valuation
        except PrecisionExhausted:
            # vanishes beyond working depth: square at working precision
            return _newton_sqrt(t, w, s)
        tt = tv.as_int()
        if tt > 2 * e:
            return _newton_sqrt(t, w, s)
        if tt % 2 != 0:
            return None
        if tt == 2 * e:
            # w = s^2 (1 + r/s^2) with ord(r/s^2) = 2e: Artin-Schreier test
            tau = (r / (s * s)) / t.elem(4)
            zr = rf.artin_schreier_solve(tau.residue())
            if zr is None:
                return None
            s = s * (t.one + t.elem(2) * t.residue_lift(zr))
            return _newton_sqrt(t, w, s)
        dbar = rf.sqrt((r * t.pi_pow(-tt)).residue())
        s = s + t.residue_lift(dbar) * t.pi_pow(tt // 2)
    raise PrecisionExhausted("square root improvement did not terminate")


def _newton_sqrt(tower, w, z):
    """Newton iteration z <- (z^2+w)/(2z), started past the Hensel barrier."""
    steps = max(6, tower.pcap.bit_length() + 3)
    for _ in range(steps):
        r = w - z * z
        if r.is_zero:
            return z
        try:
            tv = r.valuation
        except PrecisionExhausted:
            return z
        if tv.is_inf or tv.as_int() >= tower.work_prec + 2 * tower.e2:
            return z
        z = (z * z + w) / (tower.elem(2) * z)
    return z


def improve_to_level(tower, c, level):
    """Best integral-digit approximation s with ord(c - s^2) >= level.

    c must have even order (or be zero).  Returns s, or None when the
    quadratic defect of c obstructs reaching the level.  Same digit loop
    as the square-root search, stopped early.
    """
    t = tower
    v = c.valuation
    if v.is_inf:
        return t.zero
    k = v.as_int()
    target = level - k
    if target <= 0:
        return t.zero
    if k % 2 != 0:
        return None
    w = c.unit_part()
    rf = t.residue_field
    e2 = t.e2
    if not t.is_dyadic:
        r0 = rf.sqrt(w.residue())
        if r0 is None:
            return None
        return _newton_sqrt(t, w, t.residue_lift(r0)) * t.pi_pow(k // 2)
    if target > 2 * e2:
        root = c.sqrt_try()
        return root  # None when c is a non-square
    s = t.residue_lift(rf.sqrt(w.residue()))
    while True:
        r = w - s * s
        if r.is_zero:
            break
        try:
            tv = r.valuation
        except PrecisionExhausted:
            break
        tt = tv.as_int()
        if tt >= target:
            break
        if tt % 2 != 0 or tt >= 2 * e2:
            return None
        dbar = rf.sqrt((r * t.pi_pow(-tt)).residue())
        s = s + t.residue_lift(dbar) * t.pi_pow(tt // 2)
    return s * t.pi_pow(k // 2)


# ---------------------------------------------------------------------------
# quotient rings O/pi^K


class QuotRing:
    """The finite ring O/pi^K with integer codes and numpy value tables."""

    def __init__(self, tower, K):
        import numpy as np

        self.tower = tower
        self.K = K
        t = tower
        f, e, p = t.f_abs, t.e_abs, t.p
        prof = []
        for j in range(e):
            m = max(-(-(K - j) // e), 0)
            prof.extend([m] * f)
        self.profile = tuple(prof)  # per-coefficient p-exponent
        self.moduli = tuple(p**m for m in prof)
        self.size = 1
        radix = []
        for m in self.moduli:
            radix.append(self.size)
            self.size *= m
        self.radix = np.array(radix, dtype=np.int64)
        self.mods = np.array(self.moduli, dtype=np.int64)
        n = t.degree
        codes = np.arange(self.size, dtype=np.int64)
        coeffs = np.zeros((self.size, n), dtype=np.int64)
        rem = codes.copy()
        for k in range(n):
            coeffs[:, k] = rem % self.moduli[k]
            rem //= self.moduli[k]
        self.coeffs = coeffs
        # pi-order of each code (K for the zero class)
        ords = np.full(self.size, K, dtype=np.int64)
        for j in range(e):
            colmin = np.full(self.size, t.pcap, dtype=np.int64)
            for i in range(f):
                k = t._basis_index(i, j)
                col = coeffs[:, k].copy()
                v = np.zeros(self.size, dtype=np.int64)
                alive = col != 0
                v[~alive] = self.profile[k]
                work = col.copy()
                for _ in range(self.profile[k]):
                    m = alive & (work % p == 0) & (work != 0)
                    v[m] += 1
                    work[m] //= p
                colmin = np.minimum(colmin, v)
            cand = e * colmin + j
            ok = colmin < self.profile[t._basis_index(0, j)]
            ords[ok] = np.minimum(ords[ok], cand[ok])
        self.ords = np.minimum(ords, K)
        self.unit_mask = self.ords == 0
        self._sq = None
        self._mulmat_cache = {}

    def encode(self, x):
        """Code of an integral element known at least modulo pi^K."""
        if x.pexp > 0:
            x = x.at_working_precision()
            if x.pexp > 0:
                raise PrecisionExhausted("encode of a non-integral element")
        if x.prec is not None and x.prec < self.K:
            raise PrecisionExhausted(
                f"encoding mod pi^{self.K} needs that much precision"
            )
        t = self.tower
        m = t.p ** (-x.pexp) if x.pexp < 0 else 1
        code = 0
        for k in range(t.degree):
            c = (x.coeffs[k] * m) % self.moduli[k]
            code += int(c) * int(self.radix[k])
        return code

    def decode(self, code):
        t = self.tower
        vec = []
        rem = int(code)
        for k in range(t.degree):
            vec.append(rem % self.moduli[k])
            rem //= self.moduli[k]
        return t.from_coeff_ints(vec)

    def encode_rows(self, rows):
        import numpy as np

        rows = rows % self.mods
        return rows @ self.radix

    def add_codes(self, ca, cb):
        """All pairwise sums (broadcast), returned as unique codes."""
        import numpy as np

        A = self.coeffs[ca]
        B = self.coeffs[cb]
        S = (A[:, None, :] + B[None, :, :]).reshape(-1, A.shape[1])
        return np.unique(self.encode_rows(S))

    def squares_table(self):
        import numpy as np

        if self._sq is None:
            out = np.zeros(self.size, dtype=np.int64)
            for code in range(self.size):
                x = self.decode(code)
                out[code] = self.encode(x * x)
            self._sq = out
        return self._sq

    def mul_by(self, a, codes):
        """Codes of a*x over an array of codes, a an integral element."""
        import numpy as np

        key = (a.pexp, a.coeffs)
        mat = self._mulmat_cache.get(key)
        if mat is None:
            t = self.tower
            n = t.degree
            cols = []
            for k in range(n):
                prod = a * t.unit_vector(k)
                if prod.pexp > 0:
                    raise PrecisionExhausted("mul_by with non-integral scalar")
                m = t.p ** (-prod.pexp) if prod.pexp < 0 else 1
                cols.append([int(prod.coeffs[r]) * m % int(self.mods[r]) for r in range(n)])
            mat = np.array(cols, dtype=np.int64).T  # rows: output coeff index
            self._mulmat_cache[key] = mat
        vecs = self.coeffs[codes]
        out = vecs @ mat.T
        return self.encode_rows(out)


def quot_ring(tower, K):
    return tower.cache(("quot", K), lambda: QuotRing(tower, K))


# ---------------------------------------------------------------------------
# extensions and norms


class ExtensionEmbedding:
    """An inclusion of local fields F -> E with one prime above.

    Supported base: the prime field Q_p (every catalog extension is a tower
    over its prime field, so this covers the acceptance corpus); other bases
    raise UnsupportedExtension.
    """

    def __init__(self, base: FieldTower, ext: FieldTower):
        if base.p != ext.p:
            raise UnsupportedExtension("different residue characteristics")
        if base.degree != 1:
            raise UnsupportedExtension(
                "embeddings are computed from the prime field only"
            )
        if ext.e_abs % base.e_abs or ext.f_abs % base.f_abs:
            raise UnsupportedExtension("incompatible ramification/inertia")
        self.base = base
        self.ext = ext
        self.e_rel = ext.e_abs // base.e_abs
        self.f_rel = ext.f_abs // base.f_abs
        self.degree = self.e_rel * self.f_rel

    def embed(self, x: PadicElement) -> PadicElement:
        if x.tower is not self.base:
            raise TowerMismatch("element not in the base field")
        E = self.ext
        vec = [0] * E.degree
        vec[0] = x.coeffs[0] % E.P
        prec = None if x.prec is None else x.prec * E.e_abs
        return PadicElement(E, x.pexp, tuple(vec), prec)

    def norm(self, x: PadicElement) -> PadicElement:
        """N_{E/F}(x) as the determinant of multiplication by x."""
        if x.tower is not self.ext:
            raise TowerMismatch("element not in the extension field")
        F, E = self.base, self.ext
        if x.is_zero:
            return F.zero
        n = E.degree
        cols = []
        for k in range(n):
            prod = _vec_mul(E, x.coeffs, E.unit_vector(k).coeffs)
            cols.append([int(c) for c in prod])
        mat = [[cols[k][r] for k in range(n)] for r in range(n)]
        det = _bareiss_det(mat)
        out = F.elem(Fraction(det) * Fraction(F.p) ** (-x.pexp * n))
        if x.prec is not None:
            relE = x.prec - x.valuation.as_int()
            relF = max(relE // self.e_rel, 1)
            try:
                out = out.with_prec(out.valuation.as_int() + relF)
            except PrecisionExhausted:
                pass
        return out


def _bareiss_det(mat):
    """Exact integer determinant (fraction-free elimination)."""
    n = len(mat)
    m = [row[:] for row in mat]
    sign = 1
    prev = 1
    for k in range(n - 1):
        if m[k][k] == 0:
            piv = None
            for r in range(k + 1, n):
                if m[r][k] != 0:
                    piv = r
                    break
            if piv is None:
                return 0
            m[k], m[piv] = m[piv], m[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) // prev
        prev = m[k][k]
    return sign * m[n - 1][n - 1]


# ---------------------------------------------------------------------------
# catalog & JSON construction

_CATALOG_SPECS = {
    "Q2": {"p": 2, "steps": []},
    "Q2u2": {"p": 2, "steps": [{"kind": "unramified", "deg": 2}]},
    "Q2u3": {"p": 2, "steps": [{"kind": "unramified", "deg": 3}]},
    # x^2 - 2
    "Q2r2": {"p": 2, "steps": [{"kind": "eisenstein", "coeffs": ["-2", "0"]}]},
    # x^2 + 2
    "Q2rm2": {"p": 2, "steps": [{"kind": "eisenstein", "coeffs": ["2", "0"]}]},
    # Q2(i): i = y - 1 with y^2 - 2y + 2 = 0 (Eisenstein form of x^2 + 1)
    "Q2i": {"p": 2, "steps": [{"kind": "eisenstein", "coeffs": ["2", "-2"]}]},
    # x^3 - 2
    "Q2r3": {
        "p": 2,
        "steps": [{"kind": "eisenstein", "coeffs": ["-2", "0", "0"]}],
    },
    "Q3": {"p": 3, "steps": []},
    "Q3u2": {"p": 3, "steps": [{"kind": "unramified", "deg": 2}]},
    "Q3r2": {"p": 3, "steps": [{"kind": "eisenstein", "coeffs": ["-3", "0"]}]},
    "Q5": {"p": 5, "steps": []},
}

_tower_cache = {}


def construct_field(spec, name=None) -> FieldTower:
    """Build a tower from {"p": int, "steps": [...]} (see module docstring)."""
    p = spec["p"]
    steps = []
    for s in spec.get("steps", []):
        kind = s.get("kind")
        if kind == "unramified":
            steps.append(Unramified(int(s["deg"])))
        elif kind == "eisenstein":
            steps.append(Eisenstein([Fraction(str(c)) for c in s["coeffs"]]))
        else:
            raise InvalidPolynomial(f"unknown step kind {kind!r}")
    return FieldTower(p, steps, name=name)


def field_by_name(name: str) -> FieldTower:
    if name not in _CATALOG_SPECS:
        raise InvalidPolynomial(
            f"unknown catalog field {name!r}; known: {sorted(_CATALOG_SPECS)}"
        )
    if name not in _tower_cache:
        _tower_cache[name] = construct_field(_CATALOG_SPECS[name], name=name)
    return _tower_cache[name]


def catalog_names():
    return sorted(_CATALOG_SPECS)


def embedding(base_name_or_tower, ext_name_or_tower) -> ExtensionEmbedding:
    base = (
        base_name_or_tower
        if isinstance(base_name_or_tower, FieldTower)
        else field_by_name(base_name_or_tower)
    )
    ext = (
        ext_name_or_tower
        if isinstance(ext_name_or_tower, FieldTower)
        else field_by_name(ext_name_or_tower)
    )
    return ExtensionEmbedding(base, ext)
