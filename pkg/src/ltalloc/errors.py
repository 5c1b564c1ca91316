"""Exception types raised by the library.

Every error derives from :class:`ModelError` so callers (and the CLI) can
catch the whole family at once.
"""


class ModelError(ValueError):
    """Base class for all domain errors."""


class InvalidParams(ModelError):
    """A parameter set violates one of its invariants."""

    def __init__(self, reason, field=None):
        self.reason = reason
        self.field = field
        super().__init__(reason if field is None else f"{field}: {reason}")


class NonPositiveCount(ModelError):
    pass


class DegenerateDistribution(ModelError):
    pass


class NonNormalRegime(ModelError):
    """Discriminant D <= 0: the normal closed-form branch does not apply."""

    def __init__(self, discriminant, gamma):
        self.discriminant = discriminant
        self.gamma = gamma
        super().__init__(
            f"discriminant D = {discriminant:.6g} <= 0 for gamma = {gamma:g}; "
            "normal solution undefined"
        )


class SingularDenominator(ModelError):
    pass


class NonPositiveWealth(ModelError):
    pass


class BudgetExceeded(ModelError):
    def __init__(self, required, allowed):
        self.required = required
        self.allowed = allowed
        super().__init__(
            f"exhaustive search needs {required} strategies, budget is {allowed}"
        )
