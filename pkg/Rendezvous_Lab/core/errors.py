"""
Exception types for Rendezvous Lab.

Library code raises these; only the command-line layer turns them into
exit codes.
"""


class RendezvousLabError(Exception):
    """Base class for every error raised by Rendezvous Lab."""


class PreconditionError(RendezvousLabError, ValueError):
    """An operation was called outside its documented domain."""


class ConfigError(RendezvousLabError, ValueError):
    """A scenario, label file or command-line value is invalid."""


class LabelWindowError(PreconditionError):
    """A label was requested outside a finite materialised line."""


class ResourceLimitError(RendezvousLabError, ValueError):
    """A value too large to materialise was requested."""


class NonTerminationError(RendezvousLabError, RuntimeError):
    """A colouring run exceeded its round budget."""


class ColouringInvariantError(RendezvousLabError, RuntimeError):
    """Two neighbouring nodes held the same Phase-1 colour in some round."""


class InternalDesyncError(RendezvousLabError, RuntimeError):
    """An agent observed something its own bookkeeping rules out."""
