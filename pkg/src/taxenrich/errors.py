class DataError(ValueError):
    """Input data violates a file format or a structural invariant."""

    def __init__(self, message, path=None, line=None):
        self.path = path
        self.line = line
        where = ""
        if path is not None:
            where = f"{path}:{line}: " if line is not None else f"{path}: "
        super().__init__(where + message)


class PipelineError(RuntimeError):
    """A pipeline stage failed. ``stage`` names the failing step, e.g. ``concept_kb.load``."""

    def __init__(self, stage, cause):
        self.stage = stage
        self.cause = cause
        super().__init__(f"[{stage}] {cause}")
