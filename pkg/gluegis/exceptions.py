from typing import FrozenSet, Optional, Text


class GisError(Exception):
    """Base class for every error raised by gluegis."""


class InvalidIdError(GisError):
    def __init__(self, uri: Text, reason: Text):
        super().__init__(f'invalid entity id {uri!r}: {reason}')
        self.uri = uri
        self.reason = reason


class ValidationFailed(GisError):
    """An entity violates one or more of its invariants."""

    def __init__(self, report, subject: Text = ''):
        lines = '; '.join(str(v) for v in report)
        prefix = f'{subject}: ' if subject else ''
        super().__init__(f'{prefix}{lines}')
        self.report = report
        self.subject = subject


class DanglingReference(GisError):
    def __init__(self, missing_id: Text, referrer: Text = ''):
        suffix = f' (referenced by {referrer})' if referrer else ''
        super().__init__(f'unknown entity {missing_id}{suffix}')
        self.missing_id = missing_id
        self.referrer = referrer


class PartitionError(GisError):
    pass


class FactsFormatError(GisError):
    def __init__(self, line: int, message: Text):
        super().__init__(f'line {line}: {message}')
        self.line = line


class SnapshotFormatError(GisError):
    def __init__(self, message: Text, line: Optional[int] = None):
        where = f'line {line}: ' if line is not None else ''
        super().__init__(f'{where}{message}')
        self.line = line


class ExprSyntaxError(GisError):
    def __init__(self, offset: int, expected: FrozenSet[Text], found: Text):
        if expected:
            expected_text = ', '.join(sorted(expected))
            detail = f'expected one of [{expected_text}], found {found}'
        else:
            detail = found
        super().__init__(f'syntax error at byte {offset}: {detail}')
        self.offset = offset
        self.expected = expected
        self.found = found


class IntegrityError(GisError):
    """A snapshot fails referential integrity where validity is required."""

    def __init__(self, report):
        lines = '; '.join(str(v) for v in report)
        super().__init__(f'snapshot integrity check failed: {lines}')
        self.report = report


class XmlImportError(GisError):
    def __init__(self, message: Text, line: Optional[int] = None,
                 column: Optional[int] = None):
        where = ''
        if line is not None:
            where = f'line {line}, column {column}: '
        super().__init__(f'{where}{message}')
        self.line = line
        self.column = column


class RemoteError(GisError):
    """An error response received from a registry server."""

    def __init__(self, code: Text, message: Text):
        super().__init__(f'{code}: {message}')
        self.code = code
        self.message = message
