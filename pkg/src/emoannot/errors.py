"""Exception types shared across the toolkit."""


class EmoannotError(Exception):
    """Base class for all toolkit errors."""


# --- CSV ingest ---

class MalformedHeaderError(EmoannotError):
    """Header is missing required columns or names an unknown AU code."""


class RowArityError(EmoannotError):
    def __init__(self, row: int, expected: int, got: int):
        super().__init__(f"row {row}: expected {expected} fields, got {got}")
        self.row = row


class NonNumericFieldError(EmoannotError):
    def __init__(self, row: int, column: str, value: str):
        super().__init__(f"row {row}: column {column!r} has non-numeric value {value!r}")
        self.row = row
        self.column = column


class TraceOrderError(EmoannotError):
    """Frame indices not strictly increasing or timestamps decreasing."""

    def __init__(self, row: int, message: str):
        super().__init__(f"row {row}: {message}")
        self.row = row


class EmptyAfterFilterError(EmoannotError):
    """No frame survived the validity filter."""


class EmptyTraceError(EmoannotError):
    """Operation requires at least one frame."""


# --- text generation backend ---

class BackendUnavailableError(EmoannotError):
    """Backend could not be reached after all retries."""


class EmptyCompletionError(EmoannotError):
    """Backend returned a blank answer."""


# --- instruction builder ---

class EmptyInstructionError(EmoannotError):
    """Instruction text must be nonempty."""


# --- dataset store ---

class DuplicateSampleIdError(EmoannotError):
    def __init__(self, sample_id: str):
        super().__init__(f"duplicate sample_id {sample_id!r}")
        self.sample_id = sample_id


class IoFailureError(EmoannotError):
    """Filesystem read or write failed."""


class SchemaViolationError(EmoannotError):
    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


# --- metrics ---

class NoSamplesError(EmoannotError):
    """Every class has zero ground-truth samples."""


# --- judge ---

class EmptyDescriptionError(EmoannotError):
    """Both descriptions must be nonempty."""


class NoScoreFoundError(EmoannotError):
    """No score marker found in a judge response."""


class ScoreOutOfRangeError(EmoannotError):
    """Score lies outside its documented range."""


# --- review service ---

class MissingRefinementError(EmoannotError):
    """Record lacks a candidate refined description."""


class UnknownSampleError(EmoannotError):
    def __init__(self, sample_id: str):
        super().__init__(f"unknown sample {sample_id!r}")
        self.sample_id = sample_id


class DecisionConflictError(EmoannotError):
    """Sample already decided and the service does not allow reopening."""


# --- pipeline / CLI ---

class ConfigInvalidError(EmoannotError):
    """Pipeline configuration failed validation."""


class AllSamplesFailedError(EmoannotError):
    """No sample made it through the pipeline."""
