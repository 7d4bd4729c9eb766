"""Extended half-integer values.

Valuations, defect orders and the second-order lattice invariants live in
(1/2)Z together with +infinity.  Values are stored as doubled integers
(2*value), with None playing the role of the infinite sentinel, so that
comparisons, minima and floors stay exact.
"""

from __future__ import annotations


class Ext:
    """An element of (1/2)Z + {+oo}, stored as a doubled integer."""

    __slots__ = ("n2",)

    def __init__(self, n2):
        # n2 is 2*value, or None for +infinity
        self.n2 = n2

    @staticmethod
    def whole(n: int) -> "Ext":
        return Ext(2 * n)

    @staticmethod
    def half(n2: int) -> "Ext":
        return Ext(n2)

    @property
    def is_inf(self) -> bool:
        return self.n2 is None

    @property
    def is_integer(self) -> bool:
        return self.n2 is not None and self.n2 % 2 == 0

    def as_int(self) -> int:
        if self.n2 is None or self.n2 % 2 != 0:
            raise ValueError(f"{self} is not a finite integer")
        return self.n2 // 2

    def floor(self) -> "Ext":
        if self.n2 is None:
            return INF
        return Ext(2 * (self.n2 // 2))

    def parity(self) -> int:
        """Parity of a finite integer value."""
        return self.as_int() % 2

    def __add__(self, other):
        other = _coerce(other)
        if self.n2 is None or other.n2 is None:
            return INF
        return Ext(self.n2 + other.n2)

    __radd__ = __add__

    def __sub__(self, other):
        other = _coerce(other)
        if self.n2 is None:
            if other.n2 is None:
                raise ValueError("oo - oo is undefined")
            return INF
        if other.n2 is None:
            raise ValueError("subtracting infinity")
        return Ext(self.n2 - other.n2)

    def __rsub__(self, other):
        return _coerce(other).__sub__(self)

    def __neg__(self):
        if self.n2 is None:
            raise ValueError("negating infinity")
        return Ext(-self.n2)

    def __mul__(self, k: int):
        if not isinstance(k, int):
            return NotImplemented
        if self.n2 is None:
            return INF
        return Ext(self.n2 * k)

    __rmul__ = __mul__

    def _cmp(self, other):
        other = _coerce(other)
        a = self.n2
        b = other.n2
        if a is None and b is None:
            return 0
        if a is None:
            return 1
        if b is None:
            return -1
        return (a > b) - (a < b)

    def __eq__(self, other):
        try:
            return self._cmp(other) == 0
        except TypeError:
            return NotImplemented

    def __lt__(self, other):
        return self._cmp(other) < 0

    def __le__(self, other):
        return self._cmp(other) <= 0

    def __gt__(self, other):
        return self._cmp(other) > 0

    def __ge__(self, other):
        return self._cmp(other) >= 0

    def __hash__(self):
        return hash(("Ext", self.n2))

    def __repr__(self):
        if self.n2 is None:
            return "oo"
        if self.n2 % 2 == 0:
            return str(self.n2 // 2)
        return f"{self.n2}/2"


INF = Ext(None)


def _coerce(v) -> Ext:
    if isinstance(v, Ext):
        return v
    if isinstance(v, int):
        return Ext(2 * v)
    raise TypeError(f"cannot compare Ext with {type(v).__name__}")


def ext_min(*vals) -> Ext:
    """Minimum of extended values (ints are coerced)."""
    vs = [_coerce(v) for v in vals]
    out = vs[0]
    for v in vs[1:]:
        if v < out:
            out = v
    return out


def ext_max(*vals) -> Ext:
    vs = [_coerce(v) for v in vals]
    out = vs[0]
    for v in vs[1:]:
        if v > out:
            out = v
    return out
