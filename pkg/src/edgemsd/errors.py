"""Exception hierarchy shared by the library and the CLI."""


class MSDError(Exception):
    """Base class for all errors raised by edgemsd."""

    #: pipeline stage the error belongs to, used by the CLI for exit codes
    stage = "pipeline"


class EdgeListError(MSDError, ValueError):
    stage = "input"

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class GraphError(MSDError, ValueError):
    stage = "graph"


class DiffusionError(MSDError, ValueError):
    stage = "diffusion"


class ClusteringError(MSDError):
    stage = "clustering"


class ConvergenceError(MSDError, ArithmeticError):
    stage = "propagation"

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class DetectionError(MSDError):
    """A detection stage failed; ``stage`` names which one."""

    def __init__(self, message, stage="detection"):
        super().__init__(f"[{stage}] {message}")
        self.stage = stage


class ConfigError(MSDError, ValueError):
    stage = "config"

    def __init__(self, problems):
        if isinstance(problems, str):
            problems = [problems]
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))
