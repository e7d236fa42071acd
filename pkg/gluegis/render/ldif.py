"""Directory information tree rendering in LDIF.

The tree is rooted at ``o=grid`` with one ``site=<name>`` entry per site.
Attribute names are the flattened dotted paths of each entity. Values that
are not LDIF safe strings are written base64-encoded with ``attr::``.
"""
import base64
import logging
import re
from typing import Any, Dict, Iterator, List, Text, Tuple

from gluegis.model.entities import Snapshot, entity_kind
from gluegis.model.flatten import flatten_attributes
from gluegis.render.tree import (OBJECT_CLASSES, TreeNode, build_tree,
                                 require_integrity)

ROOT_DN = 'o=grid'
ROOT_OBJECT_CLASS = 'glueGrid'
SITE_OBJECT_CLASS = 'glueSite'

# printable ASCII, not starting with space, colon or '<', no trailing space
_SAFE_STRING = re.compile(r'^(?:[\x21-\x39\x3b\x3d-\x7e][\x20-\x7e]*)?$')


def value_text(value: Any) -> Text:
    if isinstance(value, bool):
        return 'true' if value else 'false'
    return str(value)


def attribute_line(name: Text, value: Text) -> Text:
    if _SAFE_STRING.match(value) and not value.endswith(' '):
        return f'{name}: {value}' if value else f'{name}:'
    encoded = base64.b64encode(value.encode('utf-8')).decode('ascii')
    return f'{name}:: {encoded}'


def attribute_values(flat: Dict[Text, Any]) -> List[Tuple[Text, Text]]:
    """(name, value) pairs: names sorted, set values sorted by text,
    sequence values kept in sequence order."""
    pairs = []
    for name in sorted(flat):
        value = flat[name]
        if isinstance(value, frozenset):
            pairs.extend((name, v) for v in sorted(value_text(v)
                                                   for v in value))
        elif isinstance(value, tuple):
            pairs.extend((name, value_text(v)) for v in value)
        else:
            pairs.append((name, value_text(value)))
    return pairs


def _entity_entries(node: TreeNode, parent_dn: Text) -> Iterator[List[Text]]:
    dn = f'{node.rdn},{parent_dn}'
    lines = [f'dn: {dn}',
             f'objectclass: {OBJECT_CLASSES[entity_kind(node.entity)]}']
    lines.extend(attribute_line(name, value) for name, value
                 in attribute_values(flatten_attributes(node.entity)))
    yield lines
    for child in node.children:
        yield from _entity_entries(child, dn)


def render_ldif(s: Snapshot) -> Text:
    require_integrity(s)
    entries = [[f'dn: {ROOT_DN}', f'objectclass: {ROOT_OBJECT_CLASS}',
                'o: grid']]
    for site in build_tree(s):
        site_dn = f'{site.rdn},{ROOT_DN}'
        entries.append([f'dn: {site_dn}',
                        f'objectclass: {SITE_OBJECT_CLASS}',
                        attribute_line('site', site.name)])
        for node in site.children:
            entries.extend(_entity_entries(node, site_dn))
    logging.debug(f'Rendered {len(entries)} LDIF entries')
    return '\n\n'.join('\n'.join(lines) for lines in entries) + '\n'
