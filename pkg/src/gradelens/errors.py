"""Exception types shared across the package."""


class GradeLensError(Exception):
    """Base class for every error this package raises deliberately."""


class InvalidScale(GradeLensError):
    """A grade scale violates its own invariants."""


class MalformedRow(GradeLensError):
    """A record line has the wrong arity or an unparsable field."""


class UnknownGradeSymbol(GradeLensError):
    """A grade token is neither a scale symbol nor a numeral on the scale."""


class DuplicateRecord(GradeLensError):
    """The same (student, course) pair appears more than once."""


class InconsistentCourseTerm(GradeLensError):
    """Two rows place the same course in different terms."""


class UnknownStudent(GradeLensError):
    """Student id not present in the matrix."""


class UnknownCourse(GradeLensError):
    """Course id not present in the matrix."""


class SelfSimilarityRequested(GradeLensError):
    """Pairwise similarity asked for an entity against itself."""


class DegenerateMatrix(GradeLensError):
    """Operation requires a matrix with at least one rating."""


class InsufficientStudents(GradeLensError):
    """Not enough students have ratings in the held-out term."""


class UnknownTerm(GradeLensError):
    """No course belongs to the requested term."""


class EmptyPairList(GradeLensError):
    """MAE requested over zero prediction pairs."""


class EmptyReport(GradeLensError):
    """Report emission requested for a report with no rows."""


class DestinationUnwritable(GradeLensError):
    """Report destination cannot be created or written."""


class UnknownDataset(GradeLensError):
    """Dataset id not present in the store."""


class UnknownModel(GradeLensError):
    """Model id not present in the store."""


class FingerprintMismatch(GradeLensError):
    """Model was built from a different dataset version than the one in use."""
