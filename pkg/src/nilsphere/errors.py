"""Exception taxonomy shared across the package.

Geometry errors signal configurations the algorithms deliberately refuse
(near-identity maps never produce them); budget errors signal that a finite
search ran out before the property of interest was observed.
"""


class NilsphereError(Exception):
    """Base class for all package-specific errors."""


# -- geometry ---------------------------------------------------------------

class AntipodalEndpoints(NilsphereError):
    """Minimal geodesic arc requested between (near-)antipodal points."""


class AntipodalOrbitStep(NilsphereError):
    """Consecutive orbit points are near-antipodal; the curve is undefined."""


class DegenerateLoop(NilsphereError):
    """A closed loop encloses (numerically) zero area on one side."""


class FixedBasePoint(NilsphereError):
    """Character curve requested at a point the map does not move."""


class GeometryError(NilsphereError):
    """A geometric classification could not be resolved robustly."""


# -- map expressions --------------------------------------------------------

class UnknownGenerator(NilsphereError):
    """A word references a generator id missing from its table."""


class UnknownField(NilsphereError):
    """A flow map references a vector field that was never registered."""


# -- budget / search --------------------------------------------------------

class NoRecurrenceFound(NilsphereError):
    """Return-time scan failed at the given (N, delta) budget."""

    def __init__(self, message, min_return_distance=None, witness_index=None):
        super().__init__(message)
        self.min_return_distance = min_return_distance
        self.witness_index = witness_index


class NoFixedPointsFound(NilsphereError):
    """No numerical common fixed points located at the given tolerance."""


class TruncationBeforeClosure(NilsphereError):
    """Segment budget exhausted before the orbit polyline closed up."""


class NoConvergence(NilsphereError):
    """Solver budget exhausted; carries the best candidate found."""

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


# -- hypothesis checks ------------------------------------------------------

class NotInV1(NilsphereError):
    """Map fails the C1 smallness bound required by the curve lemmas."""


class NotNilpotent(NilsphereError):
    """Lower central series stabilized above the trivial group."""


class HypothesisViolation(NilsphereError):
    """Action spec fails its membership or nilpotency certificate."""


class OrbitNotFinite(NilsphereError):
    """Group orbit closure scan exceeded the orbit cap."""


class OrbitTrivial(NilsphereError):
    """The base point is already fixed by every generator."""


# -- scenario ingestion -----------------------------------------------------

class ScenarioError(NilsphereError):
    """Base for scenario-file problems; carries a field path diagnostic."""

    def __init__(self, message, where=None):
        super().__init__(message if where is None else f"{where}: {message}")
        self.where = where


class ParseError(ScenarioError):
    pass


class SchemaError(ScenarioError):
    pass


class DanglingReference(ScenarioError):
    pass
