"""Exception hierarchy shared by every module."""


class NetR0Error(Exception):
    """Base class for all package errors."""


class ParameterError(NetR0Error, ValueError):
    """An argument is outside its documented domain."""


class GraphError(NetR0Error, ValueError):
    """A graph violates the simple undirected graph invariants."""


class DisconnectedGraphError(NetR0Error):
    """An operation that needs a single component got several."""


class GenerationError(NetR0Error):
    """A generator spec failed to produce a connected graph within the retry budget."""

    def __init__(self, spec, attempts):
        self.spec = spec
        self.attempts = attempts
        super().__init__(f"no connected graph after {attempts} attempts for {spec}")


class ParseError(NetR0Error, ValueError):
    """Malformed input file."""

    def __init__(self, message, path=None, line=None):
        self.path = path
        self.line = line
        where = ""
        if path is not None:
            where += f"{path}"
        if line is not None:
            where += f":{line}"
        super().__init__(f"{where}: {message}" if where else message)


class DivergenceError(NetR0Error, ArithmeticError):
    """Training produced a non-finite loss."""

    def __init__(self, epoch, loss):
        self.epoch = epoch
        self.loss = loss
        super().__init__(f"training diverged at epoch {epoch} (loss={loss})")
