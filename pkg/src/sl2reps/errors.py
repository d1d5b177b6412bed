"""Exception hierarchy.

Every error carries the name of the module that raised it so the CLI can
print module-qualified messages.
"""


class Sl2RepsError(Exception):
    module = "sl2reps"

    def __str__(self):
        return f"{self.module}: {super().__str__()}"


class PresentationError(Sl2RepsError):
    module = "presentation"


class PresentationSyntaxError(PresentationError):
    def __init__(self, message, position):
        super().__init__(f"{message} (at position {position})")
        self.position = position


class BudgetExceededError(PresentationError):
    pass


class NumericDegradationError(Sl2RepsError):
    module = "linalg2"


class RepresentationError(Sl2RepsError):
    module = "repvar"


class ConvergenceError(RepresentationError):
    pass


class ContinuousFamilyError(RepresentationError):
    def __init__(self, torus_dimension):
        super().__init__(
            f"continuous family (torus of dimension {torus_dimension}) "
            "-- enumeration refused"
        )
        self.torus_dimension = torus_dimension


class CohomologyError(Sl2RepsError):
    module = "cohomology"


class DeformationError(Sl2RepsError):
    module = "deformation"


class AdmissibilityError(Sl2RepsError):
    module = "admissibility"
