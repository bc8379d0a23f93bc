"""Exception hierarchy. Each class carries the CLI exit code it maps to."""


class CurriculumError(Exception):
    exit_code = 3


class ConfigError(CurriculumError):
    """Bad configuration value, unknown key, or missing resource."""

    exit_code = 1


class DataError(CurriculumError):
    """Input data failed to load or validate."""

    exit_code = 2


class CorpusLoadError(DataError):
    pass


class AnnotationError(DataError):
    pass


class CheckpointError(DataError):
    pass


class DegenerateBatchError(CurriculumError):
    """A batch or dataset has no position the model can score."""


class EligibilityViolation(CurriculumError):
    """A drawn sample was harder than the competence allowed at that step."""
