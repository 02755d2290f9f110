"""Exception types shared across the package."""


class BlowupError(RuntimeError):
    """A trajectory left the representable range in finite time."""

    def __init__(self, time: float, message: str | None = None):
        self.time = time
        super().__init__(message or f"finite-time blowup detected at t = {time:.6g}")


class NonConvergenceError(RuntimeError):
    """A run failed to reach its quasi-steady stopping criterion in the allotted time."""

    def __init__(self, time: float, message: str | None = None):
        self.time = time
        super().__init__(message or f"no quasi-steady state reached by t = {time:.6g}")


class ResonanceError(ValueError):
    """The requested frequency sits on (or too close to) the spectrum."""


class DegenerateBifurcationError(ValueError):
    """The cubic coefficient vanishes; the cubic truncation cannot classify the branch."""
