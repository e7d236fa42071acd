"""Entity identifiers of the form ``glue:<site>/<kind>/<local-path>``."""
import re
from enum import Enum
from typing import NamedTuple, Text

from gluegis.exceptions import InvalidIdError

SCHEME = 'glue'

SITE_PATTERN = re.compile(r'^[A-Za-z0-9._-]+$')
LOCAL_SEGMENT = r'[A-Za-z0-9._@-]+'
ID_PATTERN = re.compile(
    rf'^{SCHEME}:(?P<site>[A-Za-z0-9._-]+)/(?P<kind>[a-z]+)/'
    rf'(?P<local>{LOCAL_SEGMENT}(?:/{LOCAL_SEGMENT})*)$')


class EntityKind(str, Enum):
    CLUSTER = 'cluster'
    SUBCLUSTER = 'subcluster'
    HOST = 'host'
    CE = 'ce'
    SL = 'sl'
    SS = 'ss'
    SPACE = 'space'


class ParsedId(NamedTuple):
    site: Text
    kind: EntityKind
    local: Text


def make_id(site: Text, kind: EntityKind, local: Text) -> Text:
    uri = f'{SCHEME}:{site}/{EntityKind(kind).value}/{local}'
    parse_id(uri)
    return uri


def parse_id(uri: Text) -> ParsedId:
    if not isinstance(uri, str) or not uri:
        raise InvalidIdError(str(uri), 'empty')
    match = ID_PATTERN.match(uri)
    if match is None:
        raise InvalidIdError(uri, f'does not match {SCHEME}:<site>/<kind>/<local>')
    try:
        kind = EntityKind(match.group('kind'))
    except ValueError:
        raise InvalidIdError(uri, f'unknown kind {match.group("kind")!r}')
    return ParsedId(match.group('site'), kind, match.group('local'))


def is_valid_id(uri: Text) -> bool:
    try:
        parse_id(uri)
    except InvalidIdError:
        return False
    return True


def kind_of(uri: Text) -> EntityKind:
    return parse_id(uri).kind


def site_of(uri: Text) -> Text:
    return parse_id(uri).site


def sanitize_local(text: Text) -> Text:
    """Maps every character outside ``[a-z0-9._-]`` to ``-``."""
    return re.sub(r'[^a-z0-9._-]', '-', text)
