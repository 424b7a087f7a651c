"""Exception types shared across the solvers."""


class InstanceError(ValueError):
    """Input text or an instance violates the instance format or its invariants."""


class NegativeCycleError(Exception):
    def __init__(self, cycle, weight):
        self.cycle = tuple(cycle)
        self.weight = weight
        super().__init__(f"negative cycle {list(self.cycle)} of weight {weight}")


class UnreachableError(Exception):
    def __init__(self, vertices, message="unreachable"):
        self.vertices = tuple(vertices)
        super().__init__(f"{message}: {list(self.vertices)}")


class NoPerfectMatchingError(Exception):
    """Carries a Hall violator: ``deficient`` has fewer than ``len(deficient)`` neighbours."""

    def __init__(self, deficient, neighbours):
        self.deficient = tuple(deficient)
        self.neighbours = tuple(neighbours)
        super().__init__(
            f"no perfect matching: {list(self.deficient)} has only neighbours {list(self.neighbours)}"
        )


class TruncatedFamilyError(Exception):
    def __init__(self, cap):
        self.cap = cap
        super().__init__(f"family truncated at {cap} members")


class IterationLimitError(RuntimeError):
    pass
