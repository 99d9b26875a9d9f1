"""Exception hierarchy shared by every module of the package."""


class LresError(Exception):
    """Base class for all errors raised by :mod:`lres`."""

    code = "LresError"

    def record(self):
        """Structured form used by the command-line emitters."""
        return {"error": self.code, "message": str(self)}


class SchemaError(LresError):
    code = "SchemaError"


class InvariantViolation(LresError):
    """A structural invariant of an input object does not hold.

    ``kind`` is one of ``"J-structure"``, ``"Hermiticity"``,
    ``"H-negativity"``, ``"definiteness"`` or ``"pair"``; ``segment`` is the
    zero-based index of the offending coefficient segment when applicable.
    """

    code = "InvariantViolation"

    def __init__(self, kind, message, segment=None):
        self.kind = kind
        self.segment = segment
        where = "" if segment is None else f" (segment {segment})"
        super().__init__(f"{kind}{where}: {message}")

    def record(self):
        rec = super().record()
        rec["kind"] = self.kind
        if self.segment is not None:
            rec["segment"] = self.segment
        return rec


class NonHermitian(LresError):
    code = "NonHermitian"

    def __init__(self, residual):
        self.residual = residual
        super().__init__(f"matrix is not Hermitian (residual {residual:.3e})")


class NonFinite(LresError):
    code = "NonFinite"


class SpectrumOfA0(LresError):
    """``lambda`` is (numerically) an eigenvalue of the extension ``ker Gamma_0``."""

    code = "SpectrumOfA0"

    def __init__(self, lam, measure):
        self.lam = lam
        self.measure = measure
        super().__init__(f"I + U({lam}) is singular (relative sigma_min {measure:.3e})")


class SingularDenominator(LresError):
    code = "SingularDenominator"

    def __init__(self, lam, measure, what="denominator"):
        self.lam = lam
        self.measure = measure
        super().__init__(f"{what} singular at lambda={lam} (relative sigma_min {measure:.3e})")


class ConfluentPoint(LresError):
    code = "ConfluentPoint"


class ConditionViolated(LresError):
    """One of the admissibility conditions (a), (b), (c) of an (A, B) pair fails."""

    code = "ConditionViolated"

    def __init__(self, which, message):
        self.which = which
        super().__init__(f"condition ({which}): {message}")

    def record(self):
        rec = super().record()
        rec["condition"] = self.which
        return rec


class RankDeficient(LresError):
    code = "RankDeficient"
