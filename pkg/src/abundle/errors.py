"""Exception hierarchy.

Verification routines report failures as data; these exceptions are for
violated preconditions and malformed inputs only.
"""

from __future__ import annotations


class AbundleError(Exception):
    """Base class for all errors raised by this package."""


class NotPositive(AbundleError):
    pass


class NotInvertible(AbundleError):
    pass


class DomainEscape(AbundleError):
    """A finite-difference stencil left the domain of the map."""


class MalformedIdempotent(AbundleError):
    pass


class NotMember(AbundleError):
    """Coordinates do not lie in the range of the module idempotent."""


class IllDefinedMap(AbundleError):
    pass


class NotHermitian(AbundleError):
    pass


class ModuleMismatch(AbundleError):
    pass


class Degenerate(AbundleError):
    pass


class PivotNotInvertible(AbundleError):
    def __init__(self, step: int, pivot_min: float):
        super().__init__(f"pivot at step {step} is not invertible (min |pivot| = {pivot_min:.3e})")
        self.step = step
        self.pivot_min = pivot_min


class NotAutomorphism(AbundleError):
    pass


class NormalizerNotInvertible(AbundleError):
    def __init__(self, point_index: int | None, grid_points):
        where = "" if point_index is None else f" at sample {point_index}"
        super().__init__(f"bump normalizer vanishes{where} on grid points {list(grid_points)}")
        self.point_index = point_index
        self.grid_points = tuple(grid_points)


class NotReduced(AbundleError):
    def __init__(self, i: int, j: int, point_index: int, residual: float):
        super().__init__(
            f"transition g[{i},{j}] at sample {point_index} does not preserve the form "
            f"(residual {residual:.3e})"
        )
        self.i = i
        self.j = j
        self.point_index = point_index
        self.residual = residual


class ChartMismatch(AbundleError):
    pass


class FrameUnavailable(AbundleError):
    pass


class UnknownFixture(AbundleError):
    pass


class ParseError(AbundleError):
    pass
