from typing import Text

from pydantic import ValidationError


def describe_validation_error(error: ValidationError) -> Text:
    """One-line summary of a pydantic error: ``loc: msg; loc: msg``."""
    parts = []
    for err in error.errors():
        loc = '.'.join(str(part) for part in err['loc']) or '<root>'
        parts.append(f"{loc}: {err['msg']}")
    return '; '.join(parts)
