"""Quadratic lattices: good-BONG diagonals, invariant tables, Jordan data.

A dyadic lattice is carried as a validated good BONG (basis of norm
generators) together with its cached invariants: the orders R_i, the
second-order invariants alpha_i computed from the full T-grid, defect
values of adjacent products, and prefix product classes.  Non-dyadic
lattices are carried as diagonalized Jordan profiles.
"""

from __future__ import annotations

from fractions import Fraction

from .errors import (
    IndexOutOfRange,
    LawViolation,
    NonDyadicExpected,
    NonDyadicField,
    NotAGoodBong,
    NotIntegral,
    PhiUndefined,
    UnsupportedLattice,
)
from .extvals import INF, Ext, ext_min
from .fields import FieldTower, PadicElement, field_by_name, improve_to_level
from .squares import SquareClass, canonical_square_class, class_table


# ---------------------------------------------------------------------------
# scalar profile: membership in the admissible families and phi


class ScalarProfile:
    """Membership data of a nonzero scalar in the binary-lattice families.

    R = ord(a); S = e - R/2; alpha(a) = min(R/2 + e, R + d(-a)).
    in_A:  a is an admissible binary norm-quotient (4a integral, defect
           ideal of -a integral), equivalently alpha(a) >= 0.
    in_H:  the hyperbolic-plane class (-1/4) O*^2.
    in_S:  the large-defect subfamily d(-a) > S, where phi is defined.
    """

    __slots__ = (
        "tower", "R", "S", "d_minus", "alpha", "in_A", "in_H", "in_S",
        "s_parity", "_phi", "alpha_phi",
    )

    def __init__(self, a: PadicElement):
        t = a.tower
        if not t.is_dyadic:
            raise NonDyadicField("scalar profile needs a dyadic tower")
        self.tower = t
        e = t.e2
        self.R = a.valuation.as_int()
        R = self.R
        self.S = Ext.half(2 * e - R)
        ct = class_table(t)
        minus_a = ct.class_of(-a)
        self.d_minus = minus_a.d
        self.alpha = ext_min(Ext.half(R + 2 * e), Ext.whole(R) + self.d_minus)
        self.in_A = self.alpha >= 0
        self.in_H = R == -2 * e and self.d_minus.is_inf
        self.in_S = self.in_A and self.d_minus > self.S
        self._phi = None
        self.alpha_phi = None
        self.s_parity = None
        if self.in_S:
            if R > 2 * e:
                self._phi = a * t.pi_pow(-2 * e)
            else:
                # R <= 2e inside the family forces R even and S in [0, 2e]
                s_int = self.S.as_int()
                self.s_parity = s_int % 2
                self._phi = a * t.pi_pow(-R - 2 * (s_int // 2))
            pphi = self._phi.valuation.as_int()
            self.alpha_phi = ext_min(
                Ext.half(pphi + 2 * e), Ext.whole(pphi) + self.d_minus
            )

    @property
    def phi(self) -> PadicElement:
        if self._phi is None:
            raise PhiUndefined("phi is defined only on the large-defect family")
        return self._phi


def scalar_alpha_phi(a: PadicElement) -> ScalarProfile:
    if a.is_zero:
        raise PhiUndefined("scalar profile of zero")
    return ScalarProfile(a)


# ---------------------------------------------------------------------------
# dyadic lattices from good BONGs


class Lattice:
    """A dyadic lattice presented by a validated good BONG.

    Immutable; all invariants are computed at construction.
    """

    __slots__ = (
        "tower", "diag", "R", "classes", "prefix", "d_adj", "alpha",
        "rank", "_gram",
    )

    def __init__(self, tower, diag, _validated=False):
        self.tower = tower
        self.diag = tuple(diag)
        self.rank = len(diag)
        self._gram = None
        if not _validated:
            _check_good(tower, self.diag)
        ct = class_table(tower)
        self.R = [a.valuation.as_int() for a in self.diag]
        self.classes = [ct.class_of(a) for a in self.diag]
        pre = [ct.by_index(0)]
        for c in self.classes:
            pre.append(pre[-1] * c)
        self.prefix = pre  # prefix[i] = class of a_1 ... a_i
        minus = ct.minus_one
        self.d_adj = [
            (minus * self.classes[i] * self.classes[i + 1]).d
            for i in range(self.rank - 1)
        ]
        self.alpha = [self._alpha_from_grid(i) for i in range(1, self.rank)]
        self._crosscheck_alpha()

    # -- invariants -----------------------------------------------------------

    def _T(self, i, j):
        """T_j^(i), 1-based i in 1..m-1, j in 0..m-1."""
        e = self.tower.e2
        R = self.R
        if j == 0:
            return Ext.half(R[i] - R[i - 1] + 2 * e)
        if j <= i:
            return Ext.whole(R[i] - R[j - 1]) + self.d_adj[j - 1]
        return Ext.whole(R[j] - R[i - 1]) + self.d_adj[j - 1]

    def _alpha_from_grid(self, i):
        return ext_min(*(self._T(i, j) for j in range(self.rank)))

    def _crosscheck_alpha(self):
        """The T-grid minimum must agree with the two-term closed form."""
        e = self.tower.e2
        for i in range(1, self.rank):
            diff = self.R[i] - self.R[i - 1]
            db = self.d_bracket_minus_adjacent(i)
            two_term = ext_min(Ext.half(diff + 2 * e), Ext.whole(diff) + db)
            if two_term != self.alpha[i - 1]:
                raise LawViolation(
                    f"alpha_{i} grid/closed-form mismatch: "
                    f"{self.alpha[i-1]} vs {two_term}"
                )

    def alpha_at(self, i) -> Ext:
        """alpha_i, 1-based."""
        return self.alpha[i - 1]

    def product_class(self, i, j) -> SquareClass:
        """Class of a_i * ... * a_j (empty product when j = i-1)."""
        if not (1 <= i <= j + 1 and j <= self.rank):
            raise IndexOutOfRange(f"product a_{i},{j} out of range")
        return self.prefix[j] * self.prefix[i - 1]

    def d_bracket(self, c: SquareClass, i, j) -> Ext:
        """d[c a_{i,j}] = min(d(c a_i...a_j), alpha_{i-1}, alpha_j).

        alpha_{i-1} is dropped when i-1 in {0, m}; alpha_j when j in {0, m}.
        """
        m = self.rank
        if not (0 <= i - 1 <= j <= m):
            raise IndexOutOfRange(f"d-bracket indices ({i},{j})")
        vals = [(c * self.product_class(i, j)).d]
        if i - 1 not in (0, m):
            vals.append(self.alpha_at(i - 1))
        if j not in (0, m):
            vals.append(self.alpha_at(j))
        return ext_min(*vals)

    def d_bracket_minus_adjacent(self, i) -> Ext:
        """d[-a_i a_{i+1}] (1-based i <= m-1)."""
        ct = class_table(self.tower)
        return self.d_bracket(ct.minus_one, i, i + 1)

    @property
    def norm_ord(self):
        return self.R[0]

    @property
    def volume_ord(self):
        return sum(self.R)

    @property
    def scale_ord(self):
        vals = []
        for i in range(self.rank):
            if i + 1 < self.rank and self.R[i + 1] < self.R[i]:
                vals.append((self.R[i] + self.R[i + 1]) // 2)
            else:
                vals.append(self.R[i])
        return min(vals)

    @property
    def disc_class(self) -> SquareClass:
        return self.prefix[self.rank]

    @property
    def is_integral(self):
        return self.R[0] >= 0

    def has_property_A(self) -> bool:
        """Rank <= 2 Jordan blocks with strict scale interleaving; in BONG
        terms R_i < R_{i+2} for every i."""
        return all(self.R[i] < self.R[i + 2] for i in range(self.rank - 2))

    def unit_part_class(self, i) -> SquareClass:
        """Square class of the unit part a_i / pi^{R_i} (1-based)."""
        ct = class_table(self.tower)
        pi_cls = ct.pi_class
        c = self.classes[i - 1]
        return c * pi_cls if self.R[i - 1] % 2 else c

    # -- structure ------------------------------------------------------------

    def scaled(self, c: PadicElement) -> "Lattice":
        return Lattice(self.tower, [c * a for a in self.diag])

    def sublattice_front(self, k) -> "Lattice":
        """The lattice of the first k BONG vectors."""
        return Lattice(self.tower, self.diag[:k], _validated=True)

    def gram(self):
        if self._gram is None:
            self._gram = gram_from_bong(self.tower, self.diag)
        return self._gram

    def key(self):
        return (self.tower.name, tuple(self.R),
                tuple(c.index for c in self.classes))

    def __eq__(self, other):
        return isinstance(other, Lattice) and self.key() == other.key()

    def __hash__(self):
        return hash(self.key())

    def __repr__(self):
        return f"Lattice(R={self.R}, classes={[c.label for c in self.classes]})"


def _check_good(tower, diag):
    e = tower.e2
    if not tower.is_dyadic:
        raise NonDyadicField("BONG lattices are for dyadic towers")
    if any(a.is_zero for a in diag):
        raise NotAGoodBong(0, "zero entry")
    R = [a.valuation.as_int() for a in diag]
    ct = class_table(tower)
    for i in range(len(diag) - 1):
        if R[i + 1] - R[i] + 2 * e < 0:
            raise NotAGoodBong(i + 1, f"R_{i+2}-R_{i+1}+2e = "
                               f"{R[i+1]-R[i]+2*e} < 0")
        d = (ct.class_of(-(diag[i] * diag[i + 1]))).d
        if Ext.whole(R[i + 1] - R[i]) + d < 0:
            raise NotAGoodBong(
                i + 1, f"R_{i+2}-R_{i+1}+d(-a a') = {Ext.whole(R[i+1]-R[i])+d} < 0"
            )
    for i in range(len(diag) - 2):
        if not R[i] <= R[i + 2]:
            raise NotAGoodBong(i + 1, f"R_{i+1} > R_{i+3}")


def validate_good_bong(tower, diag) -> Lattice:
    """Accept a diagonal iff it satisfies the good-BONG conditions; returns
    the lattice with its full invariant table."""
    return Lattice(tower, [tower.elem(a) if not isinstance(a, PadicElement)
                           else a for a in diag])


# ---------------------------------------------------------------------------
# block forms


class Unary:
    def __init__(self, c):
        self.c = c

    def entries(self, t):
        return [t.elem(self.c) if not isinstance(self.c, PadicElement) else self.c]

    def scale_key(self, t):
        return self.entries(t)[0].valuation.as_int()


class Hplane:
    """Norm-unimodular hyperbolic plane scaled by pi^r: BONG <pi^r, -pi^r/4>."""

    def __init__(self, scale=0):
        self.scale = scale

    def entries(self, t):
        s = t.pi_pow(self.scale)
        return [s, s * t.elem(Fraction(-1, 4))]

    def scale_key(self, t):
        return self.scale


class Aplane:
    """The anisotropic-unit plane scaled by pi^r: BONG <pi^r, -Delta pi^r/4>."""

    def __init__(self, scale=0):
        self.scale = scale

    def entries(self, t):
        s = t.pi_pow(self.scale)
        return [s, s * t.delta * t.elem(Fraction(-1, 4))]

    def scale_key(self, t):
        return self.scale


class Ablock:
    """Binary block with Gram pi^scale * [[a, 1], [1, b]]."""

    def __init__(self, a, b, scale=0):
        self.a, self.b, self.scale = a, b, scale

    def entries(self, t):
        s = t.pi_pow(self.scale)
        g = [[s * t.elem(self.a), s], [s, s * t.elem(self.b)]]
        return list(bong_from_gram(t, g).diag)

    def scale_key(self, t):
        return self.scale


def lattice_from_blocks(tower, blocks) -> Lattice:
    """Concatenate block BONGs sorted by scale; retry orderings on failure."""
    import itertools

    blocks = sorted(blocks, key=lambda b: b.scale_key(tower))
    orders = [blocks]
    if len(blocks) <= 4:
        orders = [list(o) for o in itertools.permutations(blocks)]
        orders.sort(key=lambda o: [b.scale_key(tower) for b in o])
    last_err = None
    for order in orders:
        diag = []
        for b in order:
            diag.extend(b.entries(tower))
        try:
            return Lattice(tower, diag)
        except NotAGoodBong as err:
            last_err = err
    raise UnsupportedLattice(
        f"no ordering of the block BONGs validates (last: {last_err})"
    )


# ---------------------------------------------------------------------------
# Gram matrices


def gram_eval(G, v):
    """Q(v) = v^T G v for a list-of-lists Gram and coefficient list."""
    n = len(G)
    out = None
    for i in range(n):
        for j in range(n):
            term = G[i][j] * v[i] * v[j]
            out = term if out is None else out + term
    return out


def gram_bilinear(G, v, w):
    n = len(G)
    out = None
    for i in range(n):
        for j in range(n):
            term = G[i][j] * v[i] * w[j]
            out = term if out is None else out + term
    return out


def _gram_det_class(tower, G):
    """Determinant as an element (exact cofactor expansion)."""
    n = len(G)
    if n == 1:
        return G[0][0]
    det = None
    import itertools

    for perm in itertools.permutations(range(n)):
        sign = 1
        seen = list(perm)
        # compute permutation sign
        visited = [False] * n
        for s in range(n):
            if visited[s]:
                continue
            length = 0
            cur = s
            while not visited[cur]:
                visited[cur] = True
                cur = seen[cur]
                length += 1
            if length % 2 == 0:
                sign = -sign
        term = tower.elem(sign)
        for i in range(n):
            term = term * G[i][perm[i]]
        det = term if det is None else det + term
    return det


def _norm_min_ord(tower, G):
    """ord of the norm ideal: min over ord(G_ii) and ord(2 G_ij)."""
    from .errors import PrecisionExhausted

    e = tower.e2
    n = len(G)
    best = None
    for i in range(n):
        for j in range(n):
            x = G[i][j]
            if x.is_zero:
                continue
            try:
                o = x.valuation.as_int() + (0 if i == j else e)
            except PrecisionExhausted:
                continue  # zero at every known digit: no contribution
            if best is None or o < best:
                best = o
    return best


def _norm_generator_candidates(tower, G):
    """Cheap norm-generator candidates, then a bounded exhaustive sweep."""
    n = len(G)
    target = _norm_min_ord(tower, G)
    if target is None:
        raise UnsupportedLattice("degenerate Gram")
    out = []
    basis = []
    for i in range(n):
        v = [tower.elem(0)] * n
        v[i] = tower.one
        basis.append(v)
    for i in range(n):
        if not G[i][i].is_zero and G[i][i].valuation.as_int() == target:
            out.append(basis[i])
    for i in range(n):
        for j in range(i + 1, n):
            x = G[i][j]
            if x.is_zero:
                continue
            if x.valuation.as_int() + tower.e2 == target:
                v = [tower.elem(0)] * n
                v[i] = tower.one
                v[j] = tower.one
                q = gram_eval(G, v)
                if not q.is_zero and q.valuation.as_int() == target:
                    out.append(v)
                w = list(v)
                w[j] = -tower.one
                q = gram_eval(G, w)
                if not q.is_zero and q.valuation.as_int() == target:
                    out.append(w)
    if out:
        return out, target
    # bounded exhaustive search (desk scale): primitive vectors mod pi^(2e+2)
    h = 2 * tower.e2 + 2
    ring_sz = tower.p ** (tower.f_abs * h)
    if ring_sz**n > 400000:
        raise UnsupportedLattice(
            "norm generator search space exceeds the desk-scale bound"
        )
    from .fields import quot_ring

    ring = quot_ring(tower, h)
    import itertools

    for codes in itertools.product(range(ring.size), repeat=n):
        if all(not ring.unit_mask[c] for c in codes):
            continue
        v = [ring.decode(c) for c in codes]
        q = gram_eval(G, v)
        if q.is_zero:
            continue
        try:
            if q.valuation.as_int() == target:
                out.append(v)
        except Exception:
            continue
    if not out:
        raise UnsupportedLattice("no norm generator found at the stated bound")
    return out, target


def bong_from_gram(tower, G) -> Lattice:
    """Extract a good BONG from a Gram matrix (rank <= 4).

    Depth-first search over norm-generating vectors (cheap structural
    candidates first, bounded exhaustive sweep as fallback), validated at
    the end; backtracks until a good ordering appears.
    """
    n = len(G)
    if n > 4:
        raise UnsupportedLattice("Gram extraction caps at rank 4")
    det = _gram_det_class(tower, G)
    if det.is_zero or det.vanishes_to(tower.work_prec):
        raise UnsupportedLattice("Gram matrix is degenerate at working precision")
    budget = [600]

    def extract(Gcur):
        """Yield candidate BONG diagonals for Gcur (may be non-good)."""
        r = len(Gcur)
        if r == 0:
            yield []
            return
        cands, _ = _norm_generator_candidates(tower, Gcur)
        for v in cands:
            if budget[0] <= 0:
                return
            budget[0] -= 1
            q = gram_eval(Gcur, v)
            k = None
            for idx, c in enumerate(v):
                if not c.is_zero and c.valuation == Ext.whole(0):
                    k = idx
                    break
            if k is None:
                continue
            rest = [i for i in range(r) if i != k]
            bvals = []
            for s in rest:
                es = [tower.one if u == s else tower.elem(0) for u in range(r)]
                bvals.append(gram_bilinear(Gcur, v, es))
            Gnew = [[None] * (r - 1) for _ in range(r - 1)]
            for si in range(r - 1):
                for ti in range(r - 1):
                    Gnew[si][ti] = (
                        Gcur[rest[si]][rest[ti]] - bvals[si] * bvals[ti] / q
                    )
            for tail in extract(Gnew):
                yield [q] + tail

    for diag in extract(G):
        try:
            return Lattice(tower, diag)
        except NotAGoodBong:
            continue
    raise UnsupportedLattice("no good BONG found from bounded Gram search")


def gram_from_bong(tower, diag):
    """A Gram matrix (over a genuine lattice basis) realizing the BONG.

    Recursive lifting construction; the result is verified by re-extraction
    of the invariants.
    """
    t = tower
    m = len(diag)
    if m == 1:
        return [[diag[0]]]
    sub = gram_from_bong(t, diag[1:])
    a1 = diag[0]
    taus = []
    for j in range(m - 1):
        c = -(sub[j][j] / a1)
        tau = improve_to_level(t, c, 0)
        if tau is None:
            raise UnsupportedLattice(
                "BONG lifting failed: no integral completion digit"
            )
        taus.append(tau)
    G = [[None] * m for _ in range(m)]
    G[0][0] = a1
    for j in range(m - 1):
        G[0][j + 1] = G[j + 1][0] = taus[j] * a1
    for i in range(m - 1):
        for j in range(m - 1):
            G[i + 1][j + 1] = sub[i][j] + taus[i] * taus[j] * a1
    return G


# ---------------------------------------------------------------------------
# non-dyadic lattices: Jordan profiles


class JordanComponent:
    __slots__ = ("scale", "rank", "disc", "kind")

    def __init__(self, scale, rank, disc, kind):
        self.scale = scale
        self.rank = rank
        self.disc = disc  # SquareClass of the component determinant
        self.kind = kind  # 'H' | 'A' | None for rank-2/4 unimodular-scaled

    def __repr__(self):
        k = f", {self.kind}" if self.kind else ""
        return f"J(scale={self.scale}, rank={self.rank}{k})"


class JordanProfile:
    """Diagonalized Jordan decomposition of a non-dyadic lattice."""

    __slots__ = ("tower", "diag", "components")

    def __init__(self, tower, diag):
        if tower.is_dyadic:
            raise NonDyadicExpected("Jordan profiles are the non-dyadic path")
        self.tower = tower
        self.diag = tuple(diag)
        ct = class_table(tower)
        groups = {}
        for a in diag:
            groups.setdefault(a.valuation.as_int(), []).append(a)
        comps = []
        for s in sorted(groups):
            entries = groups[s]
            disc = ct.by_index(0)
            for a in entries:
                disc = disc * ct.class_of(a * tower.pi_pow(-s))
            kind = None
            if len(entries) in (2, 4):
                key = disc if len(entries) == 4 else disc * ct.minus_one
                if key.index == 0:
                    kind = "H"
                elif key == ct.delta_class:
                    kind = "A"
            comps.append(JordanComponent(s, len(entries), disc, kind))
        self.components = comps

    @property
    def rank(self):
        return len(self.diag)

    @property
    def is_integral(self):
        return all(a.valuation >= 0 for a in self.diag)

    def component(self, scale) -> JordanComponent:
        for c in self.components:
            if c.scale == scale:
                return c
        return JordanComponent(scale, 0, class_table(self.tower).by_index(0), None)

    def scaled_rank(self, scale) -> int:
        return self.component(scale).rank

    def __repr__(self):
        return f"JordanProfile({self.components})"


def diagonalize_gram(tower, G):
    """Orthogonal diagonalization over the ring (non-dyadic towers)."""
    if tower.is_dyadic:
        raise NonDyadicExpected("gram diagonalization is the non-dyadic path")
    n = len(G)
    M = [[x for x in row] for row in G]
    basis_rows = list(range(n))
    diag = []
    while basis_rows:
        k = len(M)
        best = None
        for i in range(k):
            for j in range(i, k):
                x = M[i][j]
                if x.is_zero:
                    continue
                o = x.valuation.as_int()
                if best is None or o < best[0]:
                    best = (o, i, j)
        if best is None:
            raise UnsupportedLattice("degenerate Gram")
        _, i, j = best
        if i != j:
            # move the minimum onto the diagonal: v_i += v_j (2 is a unit)
            for tdx in range(k):
                M[i][tdx] = M[i][tdx] + M[j][tdx]
            for tdx in range(k):
                M[tdx][i] = M[tdx][i] + M[tdx][j]
        piv = M[i][i]
        diag.append(piv)
        rest = [r for r in range(k) if r != i]
        Mn = [[None] * (k - 1) for _ in range(k - 1)]
        for si, s in enumerate(rest):
            for ti, u in enumerate(rest):
                Mn[si][ti] = M[s][u] - M[s][i] * M[u][i] / piv
        M = Mn
        basis_rows.pop()
    return diag


def jordan_profile_nondyadic(tower, form) -> JordanProfile:
    """Jordan data of a non-dyadic lattice given as Gram or diagonal."""
    if tower.is_dyadic:
        raise NonDyadicExpected("called on a dyadic tower")
    if form and isinstance(form[0], list):
        diag = diagonalize_gram(tower, form)
    else:
        diag = [tower.elem(x) if not isinstance(x, PadicElement) else x
                for x in form]
    return JordanProfile(tower, diag)


# ---------------------------------------------------------------------------
# JSON form


def lattice_from_json(obj):
    """{"field": name|spec, "form": {"bong": [...]|"blocks": [...]|"gram": [[..]]}}"""
    from .fields import construct_field

    fld = obj["field"]
    tower = field_by_name(fld) if isinstance(fld, str) else construct_field(fld)
    form = obj["form"]
    if "bong" in form:
        vals = [tower.elem(Fraction(str(v))) for v in form["bong"]]
        if tower.is_dyadic:
            return Lattice(tower, vals)
        return JordanProfile(tower, vals)
    if "gram" in form:
        G = [[tower.elem(Fraction(str(v))) for v in row] for row in form["gram"]]
        if tower.is_dyadic:
            return bong_from_gram(tower, G)
        return jordan_profile_nondyadic(tower, G)
    if "blocks" in form:
        blocks = []
        for b in form["blocks"]:
            kind = b["kind"]
            if kind == "unary":
                blocks.append(Unary(Fraction(str(b["c"]))))
            elif kind == "hplane":
                blocks.append(Hplane(int(b.get("scale", 0))))
            elif kind == "aplane":
                blocks.append(Aplane(int(b.get("scale", 0))))
            elif kind == "a":
                blocks.append(
                    Ablock(Fraction(str(b["a"])), Fraction(str(b["b"])),
                           int(b.get("scale", 0)))
                )
            else:
                raise UnsupportedLattice(f"unknown block kind {kind!r}")
        if tower.is_dyadic:
            return lattice_from_blocks(tower, blocks)
        diag = []
        for blk in blocks:
            if isinstance(blk, Unary):
                diag.append(tower.elem(blk.c))
            else:
                raise UnsupportedLattice(
                    "non-dyadic block input supports unary blocks"
                )
        return JordanProfile(tower, diag)
    raise UnsupportedLattice("lattice form needs bong|gram|blocks")


def hyperbolic_plane(tower, scale=0) -> Lattice:
    return lattice_from_blocks(tower, [Hplane(scale)])


def anisotropic_plane(tower, scale=0) -> Lattice:
    return lattice_from_blocks(tower, [Aplane(scale)])
