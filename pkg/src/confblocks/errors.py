"""Exception hierarchy.

``InputError`` subclasses signal bad input (CLI exit code 2);
``InvariantError`` signals an internal consistency breach (exit code 3).
"""


class ConfBlocksError(Exception):
    pass


class InputError(ConfBlocksError, ValueError):
    pass


class LevelViolation(InputError):
    pass


class GraphError(InputError):
    pass


class InstabilityError(GraphError):
    pass


class NonzeroWeightLeg(GraphError):
    pass


class UnlabeledLeg(GraphError):
    pass


class WeightError(InputError):
    pass


class NotDestabilizing(WeightError):
    pass


class NonGeneralWeight(WeightError):
    pass


class CannotPerturb(WeightError):
    pass


class OutOfScope(InputError):
    pass


class NotBig(InputError):
    pass


class NotOnBoundary(InputError):
    pass


class MismatchedType(InputError):
    pass


class InvariantError(ConfBlocksError, RuntimeError):
    pass
