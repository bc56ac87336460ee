"""Exception hierarchy. Each class carries the CLI exit code for its failure class."""


class LabError(Exception):
    exit_code = 1


class InputError(LabError):
    """Unreadable file, malformed record or invalid configuration."""

    exit_code = 3


class BackendError(LabError):
    """LLM transport failure or cache miss in replay-only mode."""

    exit_code = 4


class ParseError(LabError):
    """An LLM response could not be parsed into headlines or labels."""

    exit_code = 5

    def __init__(self, message, raw_response=None, index=None):
        super().__init__(message)
        self.raw_response = raw_response
        self.index = index


class ComputationError(LabError):
    """A numerical stage could not produce a result (empty overlap, no defined cells...)."""

    exit_code = 6


class StageError(LabError):
    """Wraps a failure inside run_pipeline with the stage that raised it."""

    def __init__(self, stage, cause):
        super().__init__(f"stage '{stage}' failed: {cause}")
        self.stage = stage
        self.cause = cause
        self.exit_code = getattr(cause, "exit_code", 1)
