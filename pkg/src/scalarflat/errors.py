"""Exception types shared across the package."""


class ScalarFlatError(Exception):
    """Base class for all errors raised by this package."""


class DimensionMismatchError(ScalarFlatError, ValueError):
    """A homology-class vector has the wrong length for its surface model."""

    def __init__(self, name, expected, got):
        self.name = name
        self.expected = expected
        self.got = got
        super().__init__(
            f"vector {name!r} has length {got}, expected {expected} "
            f"(blow-up count + 2)"
        )


class ConfigError(ScalarFlatError, ValueError):
    """Malformed or inconsistent run configuration."""


class QuantizationError(ScalarFlatError, ValueError):
    """Weight sum is not an integer, so no compact circle bundle exists."""


class GridExclusionError(ScalarFlatError, ValueError):
    """A grid point fell inside the exclusion ball of a charged point."""

    def __init__(self, point, charge_index, distance, radius):
        self.point = point
        self.charge_index = charge_index
        self.distance = distance
        self.radius = radius
        x, y, t = point
        super().__init__(
            f"grid point (x={x:.6g}, y={y:.6g}, t={t:.6g}) lies within the "
            f"exclusion ball of charge {charge_index} "
            f"(distance {distance:.3e} < radius {radius:.3e}); "
            f"shrink the box or move the charge"
        )
