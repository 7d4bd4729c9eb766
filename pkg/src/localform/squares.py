"""The finite group F*/F*^2: quadratic defect, Hilbert symbol, subgroups.

Unit square classes are enumerated once per tower by classifying the units
of O/pi^(2e+1) up to squares (the local square theorem makes this level
sufficient); a square class is (parity of the order, unit class).  Subgroups
are bitmasks over the class enumeration.  The Hilbert symbol is computed by
primitive-zero enumeration of the ternary form ax^2 + by^2 - z^2 modulo
pi^(2e+1), accepting exactly the candidates that Hensel lifting certifies.
"""

from __future__ import annotations

import numpy as np

from .errors import (
    DomainError,
    NonDyadicField,
    PrecisionExhausted,
    TowerMismatch,
)
from .extvals import INF, Ext, ext_min
from .fields import FieldTower, PadicElement, quot_ring


# ---------------------------------------------------------------------------
# quadratic defect


def defect_order_element(x: PadicElement) -> Ext:
    """Order of the relative quadratic defect d(x) (dyadic towers only).

    Values lie in {0} + {odd h : 1 <= h <= 2e-1} + {2e, oo}; depends only on
    the square class.  Digit-improvement algorithm: repeatedly solve the
    leading digit of x - s^2 while the gap is even and below 2e; stop at an
    odd gap, at gap 2e with the Artin-Schreier residue test, or at a square.
    """
    t = x.tower
    if not t.is_dyadic:
        raise NonDyadicField("quadratic defect order needs a dyadic tower")
    if x.is_zero:
        return INF
    v = x.valuation
    if v.as_int() % 2 != 0:
        return Ext.whole(0)
    w = x.unit_part()
    need = 2 * t.e2 + 1
    if w.prec is not None and w.prec < need:
        raise PrecisionExhausted(f"defect needs relative precision >= {need}")
    e = t.e2
    rf = t.residue_field
    s = t.residue_lift(rf.sqrt(w.residue()))
    for _ in range(2 * e + 4):
        r = w - s * s
        if r.is_zero:
            return INF
        try:
            tv = r.valuation
        except PrecisionExhausted:
            return INF  # square at every known digit
        tt = tv.as_int()
        if tt > 2 * e:
            return INF
        if tt % 2 != 0:
            return Ext.whole(tt)
        if tt == 2 * e:
            tau = (r / (s * s)) / t.elem(4)
            if rf.artin_schreier_solve(tau.residue()) is None:
                return Ext.whole(2 * e)
            return INF
        dbar = rf.sqrt((r * t.pi_pow(-tt)).residue())
        s = s + t.residue_lift(dbar) * t.pi_pow(tt // 2)
    raise PrecisionExhausted("defect improvement did not terminate")


def brute_defect_oracle(tower: FieldTower, x: PadicElement, K=None) -> Ext:
    """Independent exhaustive defect oracle.

    Enumerates x - s^2 over all s mod pi^(K+2) and takes the largest order
    of the relative defect, requiring the answer to stabilize at levels K,
    K+1, K+2.  Exponential in the level; used to cross-check the digit
    algorithm.
    """
    t = tower
    if not t.is_dyadic:
        raise NonDyadicField("defect oracle needs a dyadic tower")
    if x.is_zero:
        return INF
    v = x.valuation.as_int()
    if v % 2 != 0:
        return Ext.whole(0)
    if K is None:
        K = 2 * t.e2 + 4
    w = x.unit_part()
    vals = []
    for lvl in (K, K + 1, K + 2):
        vals.append(_defect_sup(t, w, lvl))
    if vals[0] >= K and vals[1] >= K + 1 and vals[2] >= K + 2:
        return INF
    if not (vals[0] == vals[1] == vals[2]):
        raise PrecisionExhausted(f"defect oracle did not stabilize: {vals}")
    return Ext.whole(vals[0])


def _defect_sup(tower, w, lvl):
    """max over s mod pi^lvl of ord(w - s^2), capped at lvl (numpy sweep)."""
    t = tower
    ring = quot_ring(t, lvl)
    n = t.degree
    wcode = ring.encode(w)
    wrow = ring.coeffs[wcode]
    X = ring.coeffs
    N = X.shape[0]
    sq = np.zeros((N, n), dtype=np.int64)
    for k1 in range(n):
        for k2 in range(n):
            vec = t._bpt[k1][k2]
            prod = X[:, k1] * X[:, k2]
            for tt in range(n):
                v = vec[tt]
                if v:
                    sq[:, tt] += prod * int(v)
    diff = wrow[None, :] - sq
    o = _row_orders(t, diff, lvl)
    return int(o.max())


def _row_orders(tower, rows, cap):
    """pi-order of each coefficient-row, capped."""
    t = tower
    f, e, p = t.f_abs, t.e_abs, t.p
    N = rows.shape[0]
    out = np.full(N, cap, dtype=np.int64)
    for j in range(e):
        colmin = np.full(N, cap, dtype=np.int64)
        for i in range(f):
            col = rows[:, t._basis_index(i, j)]
            v = np.zeros(N, dtype=np.int64)
            work = col.copy()
            alive = work != 0
            v[~alive] = cap
            for _ in range(cap):
                m = alive & (work % p == 0)
                if not m.any():
                    break
                v[m] += 1
                work[m] //= p
                alive = alive & (v < cap)
            colmin = np.minimum(colmin, v)
        cand = e * colmin + j
        out = np.minimum(out, cand)
    return np.minimum(out, cap)


# ---------------------------------------------------------------------------
# class tables


class SquareClass:
    """A canonical element of F*/F*^2: (order parity, unit class index)."""

    __slots__ = ("tower", "index")

    def __init__(self, tower, index):
        self.tower = tower
        self.index = index

    @property
    def parity(self):
        return self.index // class_table(self.tower).U

    @property
    def unit_part(self):
        return self.index % class_table(self.tower).U

    @property
    def rep(self) -> PadicElement:
        return class_table(self.tower).reps[self.index]

    @property
    def d(self) -> Ext:
        """Defect order of the class (dyadic towers)."""
        return class_table(self.tower).d_class[self.index]

    @property
    def label(self) -> str:
        return class_table(self.tower).labels[self.index]

    def __mul__(self, other):
        if not isinstance(other, SquareClass):
            return NotImplemented
        if other.tower is not self.tower:
            raise TowerMismatch("classes from different towers")
        ct = class_table(self.tower)
        return SquareClass(self.tower, ct.mul[self.index][other.index])

    def __eq__(self, other):
        return (
            isinstance(other, SquareClass)
            and self.tower is other.tower
            and self.index == other.index
        )

    def __hash__(self):
        return hash((id(self.tower), self.index))

    @property
    def is_trivial(self):
        return self.index == 0

    def __repr__(self):
        return f"cls[{self.label}]"


class ClassTable:
    """Per-tower enumeration of F*/F*^2 with all derived tables."""

    def __init__(self, tower: FieldTower):
        self.tower = tower
        t = tower
        K = 2 * t.e2 + 1
        self.level = K
        ring = quot_ring(t, K)
        self.ring = ring
        sq = ring.squares_table()
        unit_codes = np.nonzero(ring.unit_mask)[0]
        sq_unit = np.unique(sq[unit_codes])

        # greedy classification of unit codes modulo squares
        code_to_unit_class = {}
        unit_reps = []
        for code in unit_codes:
            code = int(code)
            if code in code_to_unit_class:
                continue
            idx = len(unit_reps)
            orbit = np.unique(ring.mul_by(ring.decode(code), sq_unit))
            for oc in orbit:
                code_to_unit_class[int(oc)] = idx
            unit_reps.append(ring.decode(code))
        self.U = len(unit_reps)
        self.count = 2 * self.U
        self._code_to_unit_class = code_to_unit_class

        # canonical representatives: unit classes then pi * unit classes
        self.reps = [u for u in unit_reps] + [t.pi * u for u in unit_reps]

        # defect of each class
        d_units = [defect_order_element(u) if t.is_dyadic else None
                   for u in unit_reps]
        if t.is_dyadic:
            self.d_class = d_units + [Ext.whole(0)] * self.U
        else:
            # convention off the dyadic case: oo for squares, else 0
            self.d_class = [
                INF if i == 0 else Ext.whole(0) for i in range(self.U)
            ] + [Ext.whole(0)] * self.U

        # delta: dyadic -> the unit class of defect 2e; non-dyadic -> the
        # non-square unit class
        if t.is_dyadic:
            target = Ext.whole(2 * t.e2)
            delta_idx = next(
                i for i, d in enumerate(d_units) if d == target
            )
        else:
            rf = t.residue_field
            delta_idx = next(
                i
                for i, u in enumerate(unit_reps)
                if i != 0 and rf.sqrt(u.residue()) is None
            )
        self.delta_unit_index = delta_idx
        self.delta_element = unit_reps[delta_idx]

        # multiplication table on class indices
        U = self.U
        mul = [[0] * (2 * U) for _ in range(2 * U)]
        for i in range(U):
            for j in range(i, U):
                prod = unit_reps[i] * unit_reps[j]
                k = code_to_unit_class[ring.encode(prod)]
                mul[i][j] = mul[j][i] = k
        for i in range(2 * U):
            for j in range(2 * U):
                pi_, ui = divmod(i, U)
                pj, uj = divmod(j, U)
                mul[i][j] = ((pi_ + pj) % 2) * U + mul[ui][uj]
        self.mul = mul

        # labels: small-integer style for prime-degree-1 towers
        self.labels = [self._label(i) for i in range(2 * U)]

        self._hilbert_memo = {}
        self._class_memo = {}

    def _label(self, idx):
        t = self.tower
        par, ui = divmod(idx, self.U)
        if t.degree == 1:
            m = t.p ** (2 * t.e2 + 1)
            u = int(self.reps[ui].coeffs[0]) % m
            return str(u * (t.p if par else 1))
        tag = f"u{ui}"
        return f"pi*{tag}" if par else tag

    # -- canonicalization ---------------------------------------------------

    def class_of(self, x: PadicElement) -> SquareClass:
        if x.is_zero:
            raise DomainError("zero has no square class")
        v = x.valuation
        key = None
        par = v.as_int() % 2
        w = x.unit_part()
        need = 2 * self.tower.e2 + 1
        if w.prec is not None and w.prec < need:
            raise PrecisionExhausted(
                f"square class needs relative precision >= {need}"
            )
        code = self.ring.encode(w)
        key = (par, code)
        memo = self._class_memo.get(key)
        if memo is not None:
            return memo
        ui = self._code_to_unit_class[code]
        out = SquareClass(self.tower, par * self.U + ui)
        self._class_memo[key] = out
        return out

    def by_index(self, idx) -> SquareClass:
        return SquareClass(self.tower, idx)

    def class_of_value(self, v) -> SquareClass:
        return self.class_of(self.tower.elem(v))

    @property
    def minus_one(self) -> SquareClass:
        return self.class_of_value(-1)

    @property
    def delta_class(self) -> SquareClass:
        return SquareClass(self.tower, self.delta_unit_index)

    @property
    def pi_class(self) -> SquareClass:
        return SquareClass(self.tower, self.U)

    def all_classes(self):
        return [SquareClass(self.tower, i) for i in range(self.count)]

    # -- Hilbert pairing ------------------------------------------------------

    def hilbert(self, ia: int, ib: int) -> int:
        if ia == 0 or ib == 0:
            return 1
        if ia > ib:
            ia, ib = ib, ia
        memo = self._hilbert_memo.get((ia, ib))
        if memo is not None:
            return memo
        U = self.U
        if ia >= U and ib >= U:
            # both orders odd: (a,b) = (a,-ab) since (a,-a) = 1
            ic = self.mul[ia][self.mul[self.class_of_value(-1).index][ib]]
            out = self.hilbert(ia, ic) if ic != 0 else 1
        else:
            if ia >= U:  # keep the odd-order argument first
                ia, ib = ib, ia
            out = self._hilbert_enumerate(ib, ia)
        self._hilbert_memo[(min(ia, ib), max(ia, ib))] = out
        return out

    def _hilbert_enumerate(self, ia, ib):
        """Primitive-zero search for a*x^2 + b*y^2 = z^2 mod pi^(2e+1).

        ib indexes a unit class; ia may have odd order.  A candidate counts
        exactly when some unit coordinate sits at a unit diagonal entry, the
        case quadratic Hensel lifting certifies at this depth.
        """
        t = self.tower
        ring = self.ring
        a = self.reps[ia]
        b = self.reps[ib]
        sq = ring.squares_table()
        codes = np.arange(ring.size, dtype=np.int64)
        unit = ring.unit_mask
        sq_any = np.unique(sq)
        sq_unit = np.unique(sq[codes[unit]])
        A_any = np.unique(ring.mul_by(a, sq_any))
        B_any = np.unique(ring.mul_by(b, sq_any))
        B_unit = np.unique(ring.mul_by(b, sq_unit))
        in_sq_any = np.zeros(ring.size, dtype=bool)
        in_sq_any[sq_any] = True
        in_sq_unit = np.zeros(ring.size, dtype=bool)
        in_sq_unit[sq_unit] = True

        s1 = ring.add_codes(A_any, B_unit)
        if in_sq_any[s1].any():
            return 1
        s2 = ring.add_codes(A_any, B_any)
        if in_sq_unit[s2].any():
            return 1
        if ia < self.U:  # entry a is a unit: x may carry the unit coordinate
            A_unit = np.unique(ring.mul_by(a, sq_unit))
            s3 = ring.add_codes(A_unit, B_any)
            if in_sq_any[s3].any():
                return 1
        return -1


def class_table(tower: FieldTower) -> ClassTable:
    return tower.cache("class_table", lambda: ClassTable(tower))


# ---------------------------------------------------------------------------
# public operations


def canonical_square_class(x: PadicElement) -> SquareClass:
    """The catalog class c with x/c a square (x nonzero)."""
    return class_table(x.tower).class_of(x)


def square_class_of(tower: FieldTower, v) -> SquareClass:
    return class_table(tower).class_of(tower.elem(v))


def defect_order(c) -> Ext:
    """d(c) for a SquareClass or a PadicElement (dyadic towers)."""
    if isinstance(c, SquareClass):
        if not c.tower.is_dyadic:
            raise NonDyadicField("defect order needs a dyadic tower")
        return c.d
    return canonical_square_class(c).d if c.tower.is_dyadic else defect_order_element(c)


def hilbert_symbol(a, b) -> int:
    """(a, b): +1 iff z^2 = a x^2 + b y^2 has a nontrivial solution."""
    if isinstance(a, PadicElement):
        a = canonical_square_class(a)
    if isinstance(b, PadicElement):
        b = canonical_square_class(b)
    if a.tower is not b.tower:
        raise TowerMismatch("Hilbert symbol needs a common tower")
    return class_table(a.tower).hilbert(a.index, b.index)


class Subgroup:
    """A subgroup of F*/F*^2 stored as a bitmask over class indices."""

    __slots__ = ("tower", "mask")

    def __init__(self, tower, mask):
        self.tower = tower
        self.mask = mask

    # -- constructors -------------------------------------------------------

    @staticmethod
    def generate(tower, classes) -> "Subgroup":
        ct = class_table(tower)
        members = {0}
        frontier = [0]
        gens = [c.index if isinstance(c, SquareClass) else c for c in classes]
        while frontier:
            cur = frontier.pop()
            for g in gens:
                nxt = ct.mul[cur][g]
                if nxt not in members:
                    members.add(nxt)
                    frontier.append(nxt)
        mask = 0
        for m in members:
            mask |= 1 << m
        return Subgroup(tower, mask)

    @staticmethod
    def trivial(tower) -> "Subgroup":
        return Subgroup(tower, 1)

    @staticmethod
    def full(tower) -> "Subgroup":
        return Subgroup(tower, (1 << class_table(tower).count) - 1)

    @staticmethod
    def units(tower) -> "Subgroup":
        U = class_table(tower).U
        return Subgroup(tower, (1 << U) - 1)

    @staticmethod
    def from_indices(tower, indices) -> "Subgroup":
        mask = 0
        for i in indices:
            mask |= 1 << i
        return Subgroup(tower, mask)

    # -- queries --------------------------------------------------------------

    def __contains__(self, c) -> bool:
        idx = c.index if isinstance(c, SquareClass) else c
        return bool(self.mask >> idx & 1)

    def indices(self):
        ct = class_table(self.tower)
        return [i for i in range(ct.count) if self.mask >> i & 1]

    def members(self):
        ct = class_table(self.tower)
        return [ct.by_index(i) for i in self.indices()]

    def __len__(self):
        return bin(self.mask).count("1")

    def __eq__(self, other):
        return (
            isinstance(other, Subgroup)
            and self.tower is other.tower
            and self.mask == other.mask
        )

    def __hash__(self):
        return hash((id(self.tower), self.mask))

    def issubset(self, other) -> bool:
        self._same(other)
        return self.mask & ~other.mask == 0

    def _same(self, other):
        if not isinstance(other, Subgroup) or other.tower is not self.tower:
            raise TowerMismatch("subgroups over different towers")

    # -- algebra ----------------------------------------------------------------

    def product(self, other) -> "Subgroup":
        self._same(other)
        ct = class_table(self.tower)
        out = 0
        for i in self.indices():
            row = ct.mul[i]
            for j in other.indices():
                out |= 1 << row[j]
        return Subgroup(self.tower, out)

    def intersect(self, other) -> "Subgroup":
        self._same(other)
        return Subgroup(self.tower, self.mask & other.mask)

    def complement(self) -> "Subgroup":
        """Orthogonal complement under the Hilbert pairing."""
        ct = class_table(self.tower)
        mine = self.indices()
        out = 0
        for c in range(ct.count):
            if all(ct.hilbert(c, h) == 1 for h in mine):
                out |= 1 << c
        return Subgroup(self.tower, out)

    def scaled(self, c: SquareClass) -> "Subgroup":
        """The coset-closure <c> * self (a subgroup since c^2 = 1)."""
        return self.product(Subgroup.generate(self.tower, [c]))

    def __repr__(self):
        ct = class_table(self.tower)
        return "{" + ", ".join(ct.labels[i] for i in self.indices()) + "}"


def subgroup_algebra(op, h1: Subgroup, h2: Subgroup = None):
    """Dispatch: product | intersect | complement | contains | equals."""
    if op == "complement":
        return h1.complement()
    if h2 is None:
        raise DomainError(f"operation {op!r} needs two subgroups")
    if op == "product":
        return h1.product(h2)
    if op == "intersect":
        return h1.intersect(h2)
    if op == "contains":
        return h2.issubset(h1)
    if op == "equals":
        return h1 == h2
    raise DomainError(f"unknown subgroup operation {op!r}")


def radical_group(tower: FieldTower, h) -> Subgroup:
    """(1 + p^h) F*^2 = {classes a with d(a) >= h}; full group for h <= 0."""
    if not tower.is_dyadic:
        raise NonDyadicField("the defect filtration needs a dyadic tower")
    if isinstance(h, int):
        h = Ext.whole(h)
    if not h.is_inf and h <= 0:
        return Subgroup.full(tower)
    ct = class_table(tower)
    mask = 0
    for i in range(ct.count):
        if ct.d_class[i] >= h:
            mask |= 1 << i
    return Subgroup(tower, mask)


def radical_units(tower: FieldTower, h) -> Subgroup:
    """(1 + p^h) O*^2 modulo squares: the unit part of the filtration."""
    return radical_group(tower, h).intersect(Subgroup.units(tower))


def hsharp(tower: FieldTower, h) -> Ext:
    """The duality index h# with (1+p^(h#))F*^2 the complement of (1+p^h)F*^2."""
    if not tower.is_dyadic:
        raise NonDyadicField("hsharp needs a dyadic tower")
    e = tower.e2
    if isinstance(h, Ext):
        if h.is_inf:
            return Ext.whole(0)
        h = h.as_int() if h.is_integer else None
    if h is None or not (0 <= h <= 2 * e):
        raise DomainError(f"hsharp defined on integers 0..{2*e} and oo")
    if h == 0:
        return INF
    if h == 1:
        return Ext.whole(2 * e)
    if h == 2 * e:
        return Ext.whole(1)
    if h % 2 == 1:
        return Ext.whole(2 * e + 2 - h)
    return Ext.whole(2 * e + 1 - h)


def norm_group(a) -> Subgroup:
    """N(a) = norms of F(sqrt(a))/F = the Hilbert kernel of a."""
    if isinstance(a, PadicElement):
        a = canonical_square_class(a)
    ct = class_table(a.tower)
    mask = 0
    for c in range(ct.count):
        if ct.hilbert(c, a.index) == 1:
            mask |= 1 << c
    return Subgroup(a.tower, mask)


def span_class(a: SquareClass) -> Subgroup:
    """<a> F*^2 as a subgroup (trivial when a is a square)."""
    return Subgroup.generate(a.tower, [a])
