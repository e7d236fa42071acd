"""XML rendering and import.

::

    <glue generated_at="0">
      <site name="CERN">
        <cluster id="glue:CERN/cluster/lxbatch">
          <batch_system>lxbatch</batch_system>
          ...
          <subcluster id="glue:CERN/subcluster/lxbatch-0">
          ...

Entity elements carry their id as an attribute and one child element per
flattened leaf (sets as repeated elements); nested entities and leaf
elements share one ordering by element name.
"""
import logging
from typing import Any, Dict, List, Optional, Text, Tuple
from xml.etree import ElementTree
from xml.sax.saxutils import escape, quoteattr

from pydantic import ValidationError

from gluegis.exceptions import ValidationFailed, XmlImportError
from gluegis.model.entities import (ENTITY_TYPES, Entity, Snapshot,
                                    entity_id, entity_kind)
from gluegis.model.flatten import (LeafKind, flatten_attributes, leaf_specs,
                                   unflatten_attributes)
from gluegis.model.ids import EntityKind, is_valid_id, parse_id
from gluegis.model.validation import (ValidationReport, Violation,
                                      validate_entity)
from gluegis.render.ldif import value_text
from gluegis.render.tree import (CHILD_KINDS, PARENT_FIELDS, SITE_KINDS,
                                 TreeNode, build_tree, require_integrity)

XML_DECLARATION = '<?xml version="1.0" encoding="UTF-8"?>'
INDENT = '  '

# a literal carriage return would be read back as a newline
_ENTITIES = {'"': '&quot;', "'": '&apos;', '\r': '&#13;'}


def xml_text(text: Text) -> Text:
    return escape(text, _ENTITIES)


def id_path(kind: EntityKind) -> Text:
    return 'common.id' if 'common.id' in leaf_specs(ENTITY_TYPES[kind]) \
        else 'id'


def _leaf_elements(entity: Entity) -> List[Tuple[Text, Any, Text]]:
    """(name, order, line) for every leaf element of ``entity``."""
    skip = id_path(entity_kind(entity))
    elements = []
    for name, value in flatten_attributes(entity).items():
        if name == skip:
            continue
        if isinstance(value, frozenset):
            texts = sorted(value_text(v) for v in value)
        elif isinstance(value, tuple):
            texts = [value_text(v) for v in value]
        else:
            texts = [value_text(value)]
        for index, text in enumerate(texts):
            elements.append((name, index, f'<{name}>{xml_text(text)}</{name}>'))
    return elements


def _entity_lines(node: TreeNode, depth: int) -> List[Text]:
    pad = INDENT * depth
    kind = entity_kind(node.entity).value
    children: List[Tuple[Text, Any, List[Text]]] = [
        (name, index, [f'{pad}{INDENT}{line}'])
        for name, index, line in _leaf_elements(node.entity)]
    children.extend((child.kind.value, entity_id(child.entity),
                     _entity_lines(child, depth + 1))
                    for child in node.children)
    # ties only occur within one element name, where order keys agree
    children.sort(key=lambda c: (c[0], c[1]))
    lines = [f'{pad}<{kind} id={quoteattr(entity_id(node.entity), _ENTITIES)}>']
    for _, _, child_lines in children:
        lines.extend(child_lines)
    lines.append(f'{pad}</{kind}>')
    return lines


def render_xml(s: Snapshot) -> Text:
    require_integrity(s)
    sites = build_tree(s)
    root = f'<glue generated_at="{s.generated_at}"'
    if not sites:
        return f'{XML_DECLARATION}\n{root}/>\n'
    lines = [XML_DECLARATION, f'{root}>']
    for site in sites:
        lines.append(f'{INDENT}<site name={quoteattr(site.name, _ENTITIES)}>')
        nodes = sorted(site.children,
                       key=lambda n: (n.kind.value, entity_id(n.entity)))
        for node in nodes:
            lines.extend(_entity_lines(node, 2))
        lines.append(f'{INDENT}</site>')
    lines.append('</glue>')
    logging.debug(f'Rendered XML for {len(sites)} sites')
    return '\n'.join(lines) + '\n'


def _report_of(error: ValidationError) -> ValidationReport:
    return ValidationReport.of(
        Violation('.'.join(str(part) for part in e['loc']) or '<entity>',
                  e['msg'])
        for e in error.errors())


class _Importer:
    def __init__(self):
        self.entities: Dict[Text, Entity] = {}

    def site(self, element: ElementTree.Element):
        name = element.get('name')
        if not name:
            raise XmlImportError('site element without a name')
        for child in element:
            if child.tag not in {k.value for k in SITE_KINDS}:
                raise XmlImportError(
                    f"unknown element '{child.tag}' in site {name}")
            self.entity(child, EntityKind(child.tag), name, None)

    def entity(self, element: ElementTree.Element, kind: EntityKind,
               site: Text, parent_id: Optional[Text]):
        uri = element.get('id')
        if uri is None or not is_valid_id(uri):
            raise XmlImportError(f'{kind.value} element with invalid id '
                                 f'{uri!r}')
        parsed = parse_id(uri)
        if parsed.kind is not kind:
            raise XmlImportError(f'{kind.value} element carries '
                                 f'{parsed.kind.value} id {uri}')
        if parent_id is None and parsed.site != site:
            raise XmlImportError(f'{uri} listed under site {site}')
        if uri in self.entities:
            raise XmlImportError(f'duplicate id {uri}')

        cls = ENTITY_TYPES[kind]
        specs = leaf_specs(cls)
        child_kinds = {k.value for k in CHILD_KINDS.get(kind, ())}
        nested = []
        flat: Dict[Text, Any] = {id_path(kind): uri}
        for child in element:
            if child.tag in child_kinds:
                nested.append(child)
            elif child.tag in specs and child.tag != id_path(kind):
                text = child.text or ''
                if specs[child.tag].kind is LeafKind.SCALAR:
                    if child.tag in flat:
                        raise XmlImportError(
                            f"repeated element '{child.tag}' in {uri}")
                    flat[child.tag] = text
                else:
                    flat.setdefault(child.tag, []).append(text)
            else:
                raise XmlImportError(
                    f"unknown element '{child.tag}' in {uri}")

        try:
            entity = unflatten_attributes(cls, flat)
        except ValidationError as e:
            raise ValidationFailed(_report_of(e), uri) from e
        report = validate_entity(entity)
        if not report.ok:
            raise ValidationFailed(report, uri)
        if parent_id is not None:
            declared = getattr(entity, PARENT_FIELDS[kind])
            if declared != parent_id:
                raise XmlImportError(f'{uri} nested under {parent_id} but '
                                     f'references {declared}')
        self.entities[uri] = entity
        for child in nested:
            self.entity(child, EntityKind(child.tag), site, uri)


def parse_xml(text: Text) -> Snapshot:
    """Inverse of ``render_xml``."""
    try:
        root = ElementTree.fromstring(text)
    except ElementTree.ParseError as e:
        line, column = e.position
        raise XmlImportError(f'malformed XML: {e}', line, column) from e
    if root.tag != 'glue':
        raise XmlImportError(f"unknown element '{root.tag}', expected 'glue'")
    try:
        generated_at = int(root.get('generated_at', '0'))
    except ValueError:
        raise XmlImportError('generated_at must be an integer')

    importer = _Importer()
    for child in root:
        if child.tag != 'site':
            raise XmlImportError(f"unknown element '{child.tag}'")
        importer.site(child)
    snapshot = Snapshot.from_entities(importer.entities.values(),
                                      generated_at=generated_at)
    require_integrity(snapshot)
    logging.debug(f'Imported {snapshot.entity_count()} entities from XML')
    return snapshot
