"""Exception types shared across the package."""


class DmcError(Exception):
    """Base class for all errors raised by this package."""


class ModelFormatError(DmcError):
    """Raised when a model file or structure cannot be parsed at all."""


class DomainError(DmcError):
    """An argument violates an operation's precondition (wrong agent, state, ...)."""


class NotEnabledError(DmcError):
    """An event or step was fired at a state where it is not enabled."""


class InvalidPathError(DmcError):
    """A state sequence is not a valid path of the global chain."""


class StateSpaceOverflow(DmcError):
    """Exploration exceeded its state budget; no partial result is returned."""

    def __init__(self, message: str, explored: int):
        super().__init__(message)
        self.explored = explored


class DeadlockReached(DmcError):
    """The sampler hit a deadlock in a model that was assumed deadlock-free."""

    def __init__(self, message: str, state: tuple):
        super().__init__(message)
        self.state = state


class SampleCapExceeded(DmcError):
    """A single sample exceeded the per-sample event cap."""


class SpecError(DmcError):
    """Syntax or type error in a property specification, with a position."""

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at offset {position})")
        self.position = position
