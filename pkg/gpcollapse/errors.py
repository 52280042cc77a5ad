class GPCollapseError(Exception):
    """Base class of every error raised by gpcollapse."""
    pass


class ConfigError(GPCollapseError):
    """Error raised when a configuration file or option is invalid."""
    def __init__(self, msg, field=None, lineno=None):
        self.field = field
        self.lineno = lineno
        where = []
        if field is not None:
            where.append('field %r' % field)
        if lineno is not None:
            where.append('line %d' % lineno)
        if where:
            msg = '%s (%s)' % (msg, ', '.join(where))
        super(ConfigError, self).__init__(msg)


class InvalidParameter(GPCollapseError, ValueError):
    """Error raised when a numeric argument is outside its range."""
    pass


class NumericError(GPCollapseError):
    """Error raised when a numerical procedure fails."""
    pass


class BracketError(NumericError):
    """Error raised when a shooting bracket does not straddle the root."""
    def __init__(self, lo, hi, kind):
        self.lo = lo
        self.hi = hi
        self.kind = kind
        super(BracketError, self).__init__(
            'bracket [%r, %r] does not straddle the ground state: '
            'both endpoints %s' % (lo, hi, kind))


class ConvergenceError(NumericError):
    """Error raised when an iteration runs out of steps."""
    pass


class QuadratureInconsistency(NumericError):
    """Error raised when the Townes identities disagree."""
    def __init__(self, mass, kinetic, quartic):
        self.mass = mass
        self.kinetic = kinetic
        self.quartic = quartic
        super(QuadratureInconsistency, self).__init__(
            'identities violated: mass=%r kinetic=%r quartic/2=%r'
            % (mass, kinetic, quartic / 2.))


class ResolutionError(NumericError):
    """Error raised when a grid cannot resolve the collapsing state."""
    pass


class FieldError(GPCollapseError, ValueError):
    """Error raised when a field violates its invariants."""
    pass


class NormalizationError(FieldError):
    """Error raised when a normalized field is expected."""
    pass


class GridMismatchError(FieldError):
    """Error raised when two fields do not share a grid."""
    pass


class WindowError(FieldError):
    """Error raised when a rescaling window leaves the source domain."""
    pass


class SingularPointError(GPCollapseError, ValueError):
    """Error raised when evaluating an unregularized potential at one of
    its singular points."""
    def __init__(self, point):
        self.point = point
        super(SingularPointError, self).__init__(
            'potential is singular at %r' % (tuple(point),))


class HypothesisError(GPCollapseError):
    """Error raised when a potential does not satisfy the collapse
    hypotheses."""
    pass


class NoNegativeWellError(HypothesisError):
    """Error raised when no singularity has a negative depth."""
    pass
