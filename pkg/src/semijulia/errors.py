"""Exception types shared across the package."""


class DynamicsError(Exception):
    """Base class for all structured errors raised by this package."""


class InvalidIndexError(DynamicsError):
    """A word references a generator index that does not exist."""

    def __init__(self, index, count):
        self.index = index
        self.count = count
        super().__init__(f"generator index {index} out of range for {count} generators")


class RootSolveError(DynamicsError):
    """Root solver failed to converge; carries the best residual reached."""

    def __init__(self, message, residual):
        self.residual = residual
        super().__init__(f"{message} (best residual {residual:.3e})")


class ResourceBudgetError(DynamicsError):
    """A computation exceeded its configured budget."""


class RasterError(DynamicsError):
    """Invalid raster input (empty set, grid mismatch, window too small...)."""


class AnchorError(DynamicsError):
    """Ordering anchor lies outside the polynomial hull of a component."""

    def __init__(self, component_id):
        self.component_id = component_id
        super().__init__(f"anchor is not inside the hull of component {component_id}")


class StructureError(DynamicsError):
    """A structural identification failed (jmin/jmax, g*, order totality...)."""


class ConstructionError(DynamicsError):
    """A parameterized construction failed one of its assumption checks."""

    def __init__(self, message, check=None, margin=None):
        self.check = check
        self.margin = margin
        super().__init__(message)


class ConfigError(DynamicsError):
    """Malformed suite or CLI configuration; carries the offending location."""

    def __init__(self, message, location=""):
        self.location = location
        super().__init__(f"{message}" + (f" (at {location})" if location else ""))
