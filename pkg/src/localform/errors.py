"""Error taxonomy shared by all modules."""


class LocalformError(Exception):
    """Base class for all library errors."""


class PrecisionExhausted(LocalformError):
    """An operation needed more p-adic precision than the operand carries."""


class DivisionByZero(LocalformError):
    pass


class InvalidPolynomial(LocalformError):
    """A tower step is neither unramified-irreducible nor Eisenstein."""


class UnsupportedDegree(LocalformError):
    """Total extension degree exceeds the desk-scale cap."""


class UnsupportedExtension(LocalformError):
    """No computable embedding between the two towers."""


class NonDyadicField(LocalformError):
    """Operation requires residue characteristic 2."""


class NonDyadicExpected(LocalformError):
    """Operation requires odd residue characteristic."""


class TowerMismatch(LocalformError):
    """Operands belong to different field towers."""


class DomainError(LocalformError):
    """Argument outside the documented domain of a table or map."""


class IndexOutOfRange(LocalformError):
    pass


class NotAGoodBong(LocalformError):
    """Diagonal fails the good-BONG validity conditions.

    Carries ``index`` (first violated position, 1-based) and ``condition``.
    """

    def __init__(self, index, condition):
        self.index = index
        self.condition = condition
        super().__init__(f"not a good BONG at i={index}: {condition}")


NotGoodBong = NotAGoodBong


class UnsupportedLattice(LocalformError):
    """No ordering of the block BONGs validates, or rank cap exceeded."""


class NotInA(LocalformError):
    """Scalar is not an admissible binary norm-quotient class."""


class PhiUndefined(LocalformError):
    """phi is only defined on the large-defect subfamily."""


class NotRepresented(LocalformError):
    pass


class RankOrder(LocalformError):
    """Rank of the represented lattice exceeds the representing one."""


class DegenerateForm(LocalformError):
    pass


class OracleInconclusive(LocalformError):
    """Enumeration oracle verdicts disagree across the stabilization window."""


class LawViolation(LocalformError):
    """A proved law failed computationally; indicates a library bug."""


class OddDegreeRequired(LocalformError):
    pass


class NotIntegral(LocalformError):
    """Lattice norm is not contained in the ring of integers."""


class VerdictMismatch(LocalformError):
    """Witness search invoked although the universality verdict is true."""


class InternalBranchGap(LocalformError):
    """Relative spinor norm branch analysis reached a state the formulas
    do not cover; surfaced for audit instead of guessing."""


class UsageError(LocalformError):
    """Bad CLI invocation."""
