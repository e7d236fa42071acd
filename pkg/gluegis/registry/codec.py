"""Native snapshot format (``*.glue.json``).

One JSON object: ``format``, ``generated_at`` and one array per entity
kind, each sorted by entity id. Sets are written as sorted arrays, so equal
snapshots produce byte-identical files.
"""
import json
import logging
import os
import tempfile
from typing import Any, Dict, Text

from pydantic import ValidationError

from gluegis.constants import SNAPSHOT_FORMAT
from gluegis.exceptions import SnapshotFormatError
from gluegis.model.entities import (ENTITY_TYPES, SNAPSHOT_FIELDS, Snapshot,
                                    entity_id)
from gluegis.utils import describe_validation_error

_KIND_BY_FIELD = {name: kind for kind, name in SNAPSHOT_FIELDS.items()}
_HEADER_KEYS = ('format', 'generated_at')


def snapshot_document(s: Snapshot) -> Dict[Text, Any]:
    doc: Dict[Text, Any] = {
        'format': SNAPSHOT_FORMAT,
        'generated_at': s.generated_at,
    }
    for kind, name in SNAPSHOT_FIELDS.items():
        mapping = s.entity_map(kind)
        doc[name] = [mapping[key].model_dump(mode='json')
                     for key in sorted(mapping)]
    return doc


def snapshot_from_document(doc: Any) -> Snapshot:
    if not isinstance(doc, dict):
        raise SnapshotFormatError('top level must be a JSON object')
    fmt = doc.get('format', SNAPSHOT_FORMAT)
    if fmt != SNAPSHOT_FORMAT:
        raise SnapshotFormatError(f'unsupported format {fmt!r}')
    generated_at = doc.get('generated_at', 0)
    if not isinstance(generated_at, int) or isinstance(generated_at, bool):
        raise SnapshotFormatError('generated_at must be an integer')

    entities = []
    seen = set()
    for key, items in doc.items():
        if key in _HEADER_KEYS:
            continue
        kind = _KIND_BY_FIELD.get(key)
        if kind is None:
            raise SnapshotFormatError(f'unknown entity kind {key!r}')
        if not isinstance(items, list):
            raise SnapshotFormatError(f'{key} must be an array')
        model_cls = ENTITY_TYPES[kind]
        for index, item in enumerate(items):
            try:
                entity = model_cls.model_validate(item)
            except ValidationError as e:
                raise SnapshotFormatError(
                    f'{key}[{index}]: {describe_validation_error(e)}')
            uri = entity_id(entity)
            if uri in seen:
                raise SnapshotFormatError(f'duplicate id {uri}')
            seen.add(uri)
            entities.append(entity)
    return Snapshot.from_entities(entities, generated_at=generated_at)


def dump_snapshot(s: Snapshot) -> Text:
    return json.dumps(snapshot_document(s), indent=2,
                      ensure_ascii=False) + '\n'


def parse_snapshot(text: Text) -> Snapshot:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise SnapshotFormatError(e.msg, line=e.lineno)
    except RecursionError:
        raise SnapshotFormatError('document nested too deeply')
    return snapshot_from_document(doc)


def save_snapshot(s: Snapshot, path: Text):
    directory = os.path.dirname(os.path.abspath(path))
    # write then rename so readers never see a half-written file
    fd, tmp_path = tempfile.mkstemp(dir=directory, suffix='.tmp')
    try:
        with os.fdopen(fd, 'w', encoding='utf-8') as f:
            f.write(dump_snapshot(s))
        os.replace(tmp_path, path)
    except BaseException:
        if os.path.exists(tmp_path):
            os.unlink(tmp_path)
        raise
    logging.debug(f'Saved snapshot with {s.entity_count()} entities '
                  f'to {path}')


def load_snapshot(path: Text) -> Snapshot:
    with open(path, 'r', encoding='utf-8') as f:
        return parse_snapshot(f.read())
