"""Containment hierarchy shared by the directory and XML renderings.

Hosts nest under their subcluster, subclusters under their cluster and
spaces under their storage service. Clusters, computing elements, storage
libraries and storage services sit directly under their site.
"""
from dataclasses import dataclass, field
from typing import List, Optional, Text

from gluegis.exceptions import IntegrityError
from gluegis.model.entities import (Entity, Host, Snapshot, StorageSpace,
                                    SubCluster, entity_id, entity_kind)
from gluegis.model.ids import EntityKind, parse_id
from gluegis.model.validation import check_referential_integrity

OBJECT_CLASSES = {
    EntityKind.CLUSTER: 'glueCluster',
    EntityKind.SUBCLUSTER: 'glueSubCluster',
    EntityKind.HOST: 'glueHost',
    EntityKind.CE: 'glueCE',
    EntityKind.SL: 'glueSL',
    EntityKind.SS: 'glueSS',
    EntityKind.SPACE: 'glueSpace',
}

# kind -> kinds that nest directly inside it
CHILD_KINDS = {
    EntityKind.CLUSTER: (EntityKind.SUBCLUSTER,),
    EntityKind.SUBCLUSTER: (EntityKind.HOST,),
    EntityKind.SS: (EntityKind.SPACE,),
}

SITE_KINDS = (EntityKind.CLUSTER, EntityKind.CE, EntityKind.SL,
              EntityKind.SS)

# field holding the id of the containing entity
PARENT_FIELDS = {
    EntityKind.SUBCLUSTER: 'cluster_id',
    EntityKind.HOST: 'subcluster_id',
    EntityKind.SPACE: 'service_id',
}


@dataclass
class TreeNode:
    rdn: Text
    entity: Optional[Entity] = None
    children: List['TreeNode'] = field(default_factory=list)

    @property
    def kind(self) -> Optional[EntityKind]:
        return None if self.entity is None else entity_kind(self.entity)


@dataclass
class SiteNode:
    name: Text
    children: List[TreeNode] = field(default_factory=list)

    @property
    def rdn(self) -> Text:
        return f'site={self.name}'


def require_integrity(s: Snapshot):
    report = check_referential_integrity(s)
    if not report.ok:
        raise IntegrityError(report)


def rdn(entity: Entity) -> Text:
    parsed = parse_id(entity_id(entity))
    return f'{parsed.kind.value}={parsed.local}'


def parent_of(entity: Entity, s: Snapshot) -> Optional[Entity]:
    if isinstance(entity, SubCluster):
        return s.clusters[entity.cluster_id]
    if isinstance(entity, Host):
        return s.subclusters[entity.subcluster_id]
    if isinstance(entity, StorageSpace):
        return s.storage_services[entity.service_id]
    return None


def build_tree(s: Snapshot) -> List[SiteNode]:
    """Sites sorted by name; every level's children sorted by RDN.

    Requires a snapshot that passes the referential integrity check.
    """
    nodes = {entity_id(e): TreeNode(rdn(e), e) for e in s.entities()}
    sites = {}
    for uri, node in nodes.items():
        parent = parent_of(node.entity, s)
        if parent is not None:
            nodes[entity_id(parent)].children.append(node)
            continue
        site = parse_id(uri).site
        sites.setdefault(site, SiteNode(site)).children.append(node)
    for node in nodes.values():
        node.children.sort(key=lambda n: n.rdn)
    for site in sites.values():
        site.children.sort(key=lambda n: n.rdn)
    return [sites[name] for name in sorted(sites)]
