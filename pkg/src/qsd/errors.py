"""Exception hierarchy shared by every module."""


class QsdError(Exception):
    """Base class for all errors raised by :mod:`qsd`."""


class InvalidDimensionError(QsdError, ValueError):
    pass


class DimensionMismatchError(QsdError, ValueError):
    pass


class BasisError(QsdError, ValueError):
    """The supplied basis is dependent or not closed under the algebra operations."""


class MissingUnitError(QsdError, ValueError):
    pass


class NotSelfAdjointError(QsdError, ValueError):
    def __init__(self, asymmetry, what="generator"):
        self.asymmetry = float(asymmetry)
        super().__init__(f"{what} is not self-adjoint: max |H - H*| = {self.asymmetry:.3e}")


class IndefiniteFunctionalError(QsdError, ValueError):
    def __init__(self, min_eigenvalue):
        self.min_eigenvalue = float(min_eigenvalue)
        super().__init__(f"functional is not positive: Gram eigenvalue {self.min_eigenvalue:.3e}")


class DegenerateSpaceError(QsdError, ValueError):
    pass


class DerivationAxiomError(QsdError, ValueError):
    def __init__(self, report):
        self.report = report
        super().__init__(f"map fails the *-derivation axioms: {report.summary()}")


class NotSpatialError(QsdError, ValueError):
    """Riesz functional is inconsistent on the pair subspace; ``witness`` is the offending element."""

    def __init__(self, witness, inconsistency):
        self.witness = witness
        self.inconsistency = float(inconsistency)
        super().__init__(f"functional unbounded on pair subspace (inconsistency {self.inconsistency:.3e})")


class InducedMapUndefinedError(QsdError, ValueError):
    def __init__(self, witness, image_norm):
        self.witness = witness
        self.image_norm = float(image_norm)
        super().__init__(f"pi(x) = 0 but ||pi(delta(x))|| = {self.image_norm:.3e}")


class NotConvergedError(QsdError, RuntimeError):
    def __init__(self, increments, tol):
        self.increments = list(increments)
        self.tol = tol
        tail = ", ".join(f"{v:.3e}" for v in self.increments[-4:])
        super().__init__(f"increments not below {tol:g} (last: {tail})")


class DimensionCapError(QsdError, ValueError):
    pass


class MissingLimitError(QsdError, ValueError):
    pass


class InstanceError(QsdError, ValueError):
    """Malformed instance file; ``path`` names the offending JSON location."""

    def __init__(self, path, message):
        self.path = path
        super().__init__(f"{path}: {message}")
