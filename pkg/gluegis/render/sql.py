"""Relational rendering: standard-SQL DDL plus INSERT rows.

The schema is declared once as SQLAlchemy ``Table`` metadata and compiled
with the default dialect, which sticks to ``INTEGER``, ``VARCHAR(255)``,
``PRIMARY KEY`` and ``FOREIGN KEY`` clauses. Each entity kind has a table
whose columns are its scalar leaf paths (``common.`` dropped, dots turned
into underscores). Set-valued paths live in link tables; sequences and
the downward id listings are stored as JSON array text.
"""
import json
import logging
from typing import Any, Dict, List, NamedTuple, Optional, Text, Tuple

from sqlalchemy import Column, ForeignKey, Integer, MetaData, String, Table
from sqlalchemy.engine.default import DefaultDialect
from sqlalchemy.schema import CreateTable

from gluegis.model.entities import (ENTITY_TYPES, AccessProtocol, AccessRule,
                                    Snapshot, entity_id, entity_kind)
from gluegis.model.flatten import LeafKind, flatten_attributes, leaf_specs
from gluegis.model.ids import EntityKind
from gluegis.render.tree import require_integrity

TABLE_ORDER = (
    'cluster', 'subcluster', 'host', 'computing_element', 'ce_acl',
    'ce_assigned_subcluster', 'storage_library', 'storage_service', 'ss_acl',
    'storage_protocol', 'storage_space', 'space_acl', 'software_tag',
)

ENTITY_TABLES = {
    EntityKind.CLUSTER: 'cluster',
    EntityKind.SUBCLUSTER: 'subcluster',
    EntityKind.HOST: 'host',
    EntityKind.CE: 'computing_element',
    EntityKind.SL: 'storage_library',
    EntityKind.SS: 'storage_service',
    EntityKind.SPACE: 'storage_space',
}

# entity-table foreign keys: (kind, column) -> referenced table
FOREIGN_KEYS = {
    (EntityKind.SUBCLUSTER, 'cluster_id'): 'cluster',
    (EntityKind.HOST, 'subcluster_id'): 'subcluster',
    (EntityKind.CE, 'cluster_id'): 'cluster',
    (EntityKind.SS, 'library_id'): 'storage_library',
    (EntityKind.SPACE, 'service_id'): 'storage_service',
}

# set-valued paths kept inline as JSON text instead of a link table
JSON_SET_PATHS = frozenset({'subcluster_ids', 'space_ids'})


class LinkTable(NamedTuple):
    """A set-valued path stored one element per row."""
    table: Text
    owner_column: Text
    columns: Tuple[Text, ...]
    element: Optional[type] = None
    references: Optional[Dict[Text, Text]] = None


_ACL_COLUMNS = ('vo', 'capability')

LINK_TABLES = {
    EntityKind.HOST: {
        'software_tags': LinkTable('software_tag', 'owner_id', ('tag',)),
    },
    EntityKind.SUBCLUSTER: {
        'aggregates.common_software_tags':
            LinkTable('software_tag', 'owner_id', ('tag',)),
    },
    EntityKind.CE: {
        'common.acl': LinkTable('ce_acl', 'ce_id', _ACL_COLUMNS, AccessRule),
        'assigned_subcluster_ids': LinkTable(
            'ce_assigned_subcluster', 'ce_id', ('subcluster_id',),
            references={'subcluster_id': 'subcluster'}),
    },
    EntityKind.SS: {
        'common.acl': LinkTable('ss_acl', 'ss_id', _ACL_COLUMNS, AccessRule),
        'protocols': LinkTable(
            'storage_protocol', 'ss_id',
            ('protocol', 'endpoint', 'max_streams'), AccessProtocol),
    },
    EntityKind.SPACE: {
        'acl': LinkTable('space_acl', 'space_id', _ACL_COLUMNS, AccessRule),
    },
}

# software_tag owners may be hosts or subclusters, so it has no foreign key
_LINK_OWNERS = {
    'ce_acl': 'computing_element',
    'ce_assigned_subcluster': 'computing_element',
    'ss_acl': 'storage_service',
    'storage_protocol': 'storage_service',
    'space_acl': 'storage_space',
}

_INTEGER_LINK_COLUMNS = frozenset({'max_streams'})


def column_name(path: Text) -> Text:
    return path.removeprefix('common.').replace('.', '_')


def _scalar_is_integer(annotation) -> bool:
    return annotation is int


def _build_column_paths() -> Dict[Text, Dict[Text, Text]]:
    paths = {}
    for kind, table in ENTITY_TABLES.items():
        columns = {}
        for path, spec in leaf_specs(ENTITY_TYPES[kind]).items():
            if spec.kind is LeafKind.SET and path not in JSON_SET_PATHS:
                continue
            columns[column_name(path)] = path
        paths[table] = columns
    return paths


# entity table -> column -> flattened path
COLUMN_PATHS = _build_column_paths()

_KIND_BY_TABLE = {table: kind for kind, table in ENTITY_TABLES.items()}


def _entity_table(metadata: MetaData, kind: EntityKind) -> Table:
    table = ENTITY_TABLES[kind]
    specs = leaf_specs(ENTITY_TYPES[kind])
    columns = []
    for name, path in COLUMN_PATHS[table].items():
        spec = specs[path]
        column_type = Integer() if spec.kind is LeafKind.SCALAR \
            and _scalar_is_integer(spec.element) else String(255)
        args = [name, column_type]
        target = FOREIGN_KEYS.get((kind, name))
        if target is not None:
            args.append(ForeignKey(f'{target}.id'))
        nullable = path.endswith('measured_at')
        columns.append(Column(*args, primary_key=(name == 'id'),
                              nullable=nullable))
    return Table(table, metadata, *columns)


def _link_table(metadata: MetaData, link: LinkTable) -> Table:
    owner = _LINK_OWNERS.get(link.table)
    owner_args = [ForeignKey(f'{owner}.id')] if owner else []
    columns = [Column(link.owner_column, String(255), *owner_args,
                      primary_key=True)]
    for name in link.columns:
        column_type = Integer() if name in _INTEGER_LINK_COLUMNS \
            else String(255)
        args = [name, column_type]
        target = (link.references or {}).get(name)
        if target is not None:
            args.append(ForeignKey(f'{target}.id'))
        columns.append(Column(*args, primary_key=True))
    return Table(link.table, metadata, *columns)


def _build_metadata() -> MetaData:
    metadata = MetaData()
    links = {link.table: link for per_kind in LINK_TABLES.values()
             for link in per_kind.values()}
    for table in TABLE_ORDER:
        if table in _KIND_BY_TABLE:
            _entity_table(metadata, _KIND_BY_TABLE[table])
        else:
            _link_table(metadata, links[table])
    return metadata


SQL_METADATA = _build_metadata()
SQL_TABLES: Dict[Text, Table] = {name: SQL_METADATA.tables[name]
                                 for name in TABLE_ORDER}


def sql_literal(value: Any) -> Text:
    if value is None:
        return 'NULL'
    if isinstance(value, bool):
        return 'TRUE' if value else 'FALSE'
    if isinstance(value, int):
        return str(value)
    text = str(value).replace("'", "''")
    return f"'{text}'"


def json_text(values) -> Text:
    return json.dumps(list(values), ensure_ascii=False,
                      separators=(',', ':'))


def link_values(link: LinkTable, element_text: Text) -> Tuple[Any, ...]:
    """Row values (without the owner) for one flattened set element."""
    if link.element is AccessRule:
        rule = AccessRule.decode(element_text)
        return rule.vo, rule.capability.value
    if link.element is AccessProtocol:
        protocol = AccessProtocol.decode(element_text)
        return (protocol.protocol.value, protocol.endpoint,
                protocol.max_streams)
    return (element_text,)


def link_element(link: LinkTable, values: Tuple[Any, ...]) -> Text:
    """Inverse of ``link_values``: the flattened set element of a row."""
    if link.element is AccessRule:
        vo, capability = values
        return f'{vo}:{capability}'
    if link.element is AccessProtocol:
        protocol, endpoint, max_streams = values
        return f'{protocol}|{max_streams}|{endpoint}'
    return str(values[0])


def _entity_row(kind: EntityKind, flat: Dict[Text, Any]) -> Tuple[Any, ...]:
    row = []
    for path in COLUMN_PATHS[ENTITY_TABLES[kind]].values():
        value = flat.get(path)
        if isinstance(value, frozenset):
            value = json_text(sorted(value))
        elif isinstance(value, tuple):
            value = json_text(value)
        row.append(value)
    return tuple(row)


def table_rows(s: Snapshot) -> Dict[Text, List[Tuple[Any, ...]]]:
    """Every table's rows, sorted by primary key."""
    rows: Dict[Text, List[Tuple[Any, ...]]] = {t: [] for t in TABLE_ORDER}
    for entity in s.entities():
        kind = entity_kind(entity)
        flat = flatten_attributes(entity)
        rows[ENTITY_TABLES[kind]].append(_entity_row(kind, flat))
        for path, link in LINK_TABLES.get(kind, {}).items():
            for text in flat.get(path, ()):
                rows[link.table].append(
                    (entity_id(entity),) + link_values(link, text))
    for table, entries in rows.items():
        if table in _KIND_BY_TABLE:
            index = list(COLUMN_PATHS[table]).index('id')
            entries.sort(key=lambda r: r[index])
        else:
            entries.sort()
    return rows


def create_statements() -> List[Text]:
    dialect = DefaultDialect()
    return [str(CreateTable(SQL_TABLES[t]).compile(dialect=dialect)).strip()
            + ';' for t in TABLE_ORDER]


def render_sql(s: Snapshot) -> Text:
    require_integrity(s)
    statements = create_statements()
    count = 0
    for table, rows in table_rows(s).items():
        columns = ', '.join(c.name for c in SQL_TABLES[table].columns)
        for row in rows:
            values = ', '.join(sql_literal(v) for v in row)
            statements.append(
                f'INSERT INTO {table} ({columns}) VALUES ({values});')
            count += 1
    logging.debug(f'Rendered {len(TABLE_ORDER)} tables and {count} rows')
    return '\n\n'.join(statements) + '\n'
