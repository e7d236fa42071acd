from gluegis.constants import __version__
from gluegis.model import EntityKind, Snapshot
from gluegis.partition import PartitionKey, derive_hierarchy
from gluegis.query import MatchRequest, match_services, parse_expr
from gluegis.registry import Registry, RegistryConfig
from gluegis.render import parse_xml, render_ldif, render_sql, render_xml
