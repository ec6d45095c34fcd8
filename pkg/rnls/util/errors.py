"""
Exception hierarchy of the package. Every error names the module and the rule it enforces.
"""


class RNLSError(Exception):
    """Base class for all errors raised by rnls."""

    module = 'rnls'

    def __init__(self, message: str, rule: str = None, module: str = None):
        self.rule = rule
        if module is not None:
            self.module = module
        prefix = '[{0}]'.format(self.module)
        if rule is not None:
            prefix += ' rule "{0}":'.format(rule)
        super().__init__('{0} {1}'.format(prefix, message))


class InvalidFieldError(RNLSError, ValueError):
    module = 'spectral_grid'


class GridMismatchError(RNLSError, ValueError):
    module = 'spectral_grid'


class GridAxisError(RNLSError, IndexError):
    module = 'spectral_grid'


class ParameterDomainError(RNLSError, ValueError):
    module = 'physics'


class DivergenceError(RNLSError, RuntimeError):
    module = 'solver'


class UnboundedActionError(DivergenceError):
    """The flow grows without bound, i.e. the functional has no minimizer."""


class InsufficientDataError(RNLSError, ValueError):
    module = 'analysis'


class ConfigError(RNLSError, ValueError):
    module = 'cli_io'


class FieldFileError(RNLSError, ValueError):
    module = 'cli_io'


class OutputLockedError(RNLSError, RuntimeError):
    module = 'cli_io'
