"""Exception types raised across the package."""


class ParameterError(ValueError):
    """Invalid distribution or model parameter."""


class QuadratureError(ArithmeticError):
    """Adaptive quadrature failed to reach the requested tolerance."""


class SamplerStallError(RuntimeError):
    """Rejection sampler exceeded its iteration cap."""

    def __init__(self, iterations: int, pending: int):
        super().__init__(
            f"rejection sampler stalled after {iterations} iterations "
            f"with {pending} draw(s) still pending"
        )
        self.iterations = iterations
        self.pending = pending


class BracketError(ValueError):
    """Bisection bracket does not contain the calibration target."""


class DegenerateSampleError(ValueError):
    """Sample statistics are degenerate (e.g. zero variance)."""


class GraphError(ValueError):
    """Malformed embedded graph (self-loop, duplicate edge, bad coordinates)."""


class SpectrumError(ValueError):
    """Invalid matrix or spectrum input."""


class NormalizationError(ArithmeticError):
    """Spectral distance normalisation is zero."""


class ConstructionError(ValueError):
    """A derived matrix decomposition violated its structural invariant."""


class CatalogueError(ValueError):
    """Motif degree outside the planar catalogue."""


class ExtremalityAssumptionError(ValueError):
    """Kernel is not nondecreasing and convex."""


class DisjointnessError(ValueError):
    """Motif tiling is not vertex-disjoint."""


class DenseViolationError(RuntimeError):
    """Repair left the sparse-violation regime (blow-up or collapse)."""


class ReliabilityError(RuntimeError):
    """Too many degenerate Monte Carlo runs were dropped."""
