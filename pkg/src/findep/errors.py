"""Exception types shared across the package."""


class CapacityError(Exception):
    """An exact enumeration would exceed its configured guard.

    Factorial and exponential supports must fail loudly instead of silently
    truncating; the message always names the offending size and the bound.
    """

    def __init__(self, what: str, size: int, bound: int):
        self.what = what
        self.size = size
        self.bound = bound
        super().__init__(f"{what}: required size {size} exceeds guard {bound}")


class WitnessIntegrityError(Exception):
    """A witness failed re-verification against its own site source."""
