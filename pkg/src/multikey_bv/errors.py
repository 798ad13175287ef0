"""Error types shared across the package."""


class InputError(ValueError):
    """Malformed or out-of-contract input: bad key strings, length
    mismatches, invalid indices, unsatisfiable parameters."""


class CapacityError(RuntimeError):
    """Request exceeds a configured resource bound: qubit cap,
    enumeration work bound, or exact-arithmetic range."""
