from gluegis.render.ldif import render_ldif
from gluegis.render.sql import (COLUMN_PATHS, ENTITY_TABLES, LINK_TABLES,
                                SQL_TABLES, TABLE_ORDER, link_element,
                                render_sql)
from gluegis.render.tree import build_tree
from gluegis.render.xml import parse_xml, render_xml

RENDERERS = {
    'ldif': render_ldif,
    'sql': render_sql,
    'xml': render_xml,
}
