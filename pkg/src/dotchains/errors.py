class DotChainsError(ValueError):
    """Invalid input: bad structure, element, point set or parameter."""


class BudgetExceeded(DotChainsError):
    """An exhaustive computation would exceed its configured budget."""

    def __init__(self, required: int, budget: int, what: str = "tuple visits"):
        self.required = required
        self.budget = budget
        super().__init__(f"{what} required: {required} > budget {budget}")
