"""Exception types shared across the library."""


class RieszLabError(Exception):
    """Base class for all library-specific errors."""


class DimensionMismatch(RieszLabError):
    """Vector or point dimensions are inconsistent with the object they index."""


class IndeterminateValue(RieszLabError):
    """A potential evaluates to an undefined infinity minus infinity."""


class DegenerateNodes(RieszLabError):
    """Two nodes of a Gram node set are closer than the distinctness tolerance."""


class CenterInversion(RieszLabError):
    """Attempt to invert the center of the inversion sphere."""


class CenterCharged(RieszLabError):
    """A measure charges the center of the inversion sphere."""


class IllConditioned(RieszLabError):
    """An active-set linear solve detected a condition estimate beyond the cutoff."""


class SolverFailure(RieszLabError):
    """A cone-constrained solve did not produce a usable solution."""


class NodesOutsideDomain(RieszLabError):
    """A node list contains points outside the open domain D."""


class PointOutsideDomain(RieszLabError):
    """An evaluation point lies outside the open domain D."""


class EmptyShellRun(RieszLabError):
    """Too many consecutive Wiener shells contain no part of the target set."""


class SchemaError(RieszLabError):
    """A scenario document violates the schema."""
