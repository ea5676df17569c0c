"""Exception types raised by critset."""


class CritsetError(Exception):
    """Base class for all critset errors."""


class InvalidParameter(CritsetError, ValueError):
    pass


class InvalidGrid(CritsetError, ValueError):
    pass


class DirichletViolation(CritsetError, ValueError):
    pass


class GridMismatch(CritsetError, ValueError):
    pass


class NotPositive(CritsetError, ValueError):
    pass


class NonFiniteState(CritsetError, ArithmeticError):
    pass


class NonFiniteValue(CritsetError, ArithmeticError):
    pass


class NotApplicable(CritsetError):
    """The nonlinearity does not satisfy the convexity hypotheses required."""


class RangeUnattainable(CritsetError):
    """No point of the line reaches the requested level within the bracket limit."""


class EmptyScanRange(CritsetError, ValueError):
    pass
