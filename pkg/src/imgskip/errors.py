"""Exception types shared across the library."""


class DivergenceError(RuntimeError):
    """A solver produced a non-finite iterate."""

    def __init__(self, iteration, algorithm=""):
        self.iteration = iteration
        self.algorithm = algorithm
        name = algorithm or "solver"
        super().__init__(f"{name} diverged: non-finite iterate at iteration {iteration}")


class ReferenceRejectedError(RuntimeError):
    """A candidate reference solution failed its self-consistency check."""

    def __init__(self, self_consistency_error, required):
        self.self_consistency_error = self_consistency_error
        self.required = required
        super().__init__(
            "reference rejected: half- vs full-budget relative error "
            f"{self_consistency_error:.3e} exceeds required {required:.3e}"
        )
