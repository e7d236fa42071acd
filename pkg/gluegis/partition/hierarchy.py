"""Cluster / subcluster / host derivation from raw host facts.

A cluster is every node managed by one batch-system instance at a site.
Inside a cluster, nodes are partitioned into subclusters: the equivalence
classes of "equal values on every key attribute".
"""
import logging
from collections import defaultdict
from dataclasses import dataclass
from functools import reduce
from typing import Dict, List, Optional, Sequence, Text, Tuple

from gluegis.constants import DEFAULT_TTL_S
from gluegis.exceptions import PartitionError
from gluegis.model.entities import (PARTITION_ATTRIBUTES, Cluster,
                                    FreshnessMeta, Host, HostFact, Snapshot,
                                    SubCluster, SubClusterAggregates)
from gluegis.model.ids import EntityKind, make_id, parse_id, sanitize_local


@dataclass(frozen=True)
class PartitionKey:
    attribute_names: Tuple[Text, ...]

    def __post_init__(self):
        names = tuple(self.attribute_names)
        object.__setattr__(self, 'attribute_names', names)
        if not names:
            raise PartitionError('partition key must name an attribute')
        for name in names:
            if name not in PARTITION_ATTRIBUTES:
                raise PartitionError(
                    f'{name!r} is not a partition attribute (allowed: '
                    f'{", ".join(PARTITION_ATTRIBUTES)})')
        if len(set(names)) != len(names):
            raise PartitionError(f'repeated attribute in key {names}')

    @classmethod
    def parse(cls, text: Text) -> 'PartitionKey':
        return cls(tuple(part.strip() for part in text.split(',')
                         if part.strip()))

    def values_of(self, fact: HostFact) -> tuple:
        return tuple(getattr(fact, name) for name in self.attribute_names)


def cluster_id_for(site: Text, batch_system: Text) -> Text:
    return make_id(site, EntityKind.CLUSTER, sanitize_local(batch_system))


def _freshness(members: Sequence[HostFact]) -> FreshnessMeta:
    # a system is as fresh as its most recently reported member
    measured = [m.fresh.measured_at for m in members
                if m.fresh.measured_at is not None]
    return FreshnessMeta(
        measured_at=max(measured) if measured else None,
        ttl_s=max(m.fresh.ttl_s for m in members))


def derive_clusters(
        facts: Sequence[HostFact]) -> List[Tuple[Cluster, List[HostFact]]]:
    """Groups facts by (site, batch_system). Output is ordered by cluster id;
    the member list of each cluster is ordered by hostname."""
    seen = set()
    groups: Dict[Tuple[Text, Text], List[HostFact]] = defaultdict(list)
    for fact in facts:
        if (fact.site, fact.hostname) in seen:
            raise PartitionError(
                f'duplicate host {fact.hostname} at site {fact.site}')
        seen.add((fact.site, fact.hostname))
        groups[(fact.site, fact.batch_system)].append(fact)

    derived: Dict[Text, Tuple[Cluster, List[HostFact]]] = {}
    for (site, batch_system), members in groups.items():
        cluster_id = cluster_id_for(site, batch_system)
        if cluster_id in derived:
            other = derived[cluster_id][0].batch_system
            raise PartitionError(
                f'batch systems {other!r} and {batch_system!r} both map to '
                f'cluster id {cluster_id}')
        members = sorted(members, key=lambda f: f.hostname)
        cluster = Cluster(
            id=cluster_id,
            site=site,
            name=batch_system,
            batch_system=batch_system,
            fresh=_freshness(members),
        )
        derived[cluster_id] = (cluster, members)
        logging.debug(f'Derived cluster {cluster_id} with '
                      f'{len(members)} hosts')
    return [derived[cluster_id] for cluster_id in sorted(derived)]


def summarize(members: Sequence[HostFact]) -> SubClusterAggregates:
    if not members:
        raise PartitionError('cannot summarize an empty host set')
    return SubClusterAggregates(
        total_cpus=sum(m.physical_cpus for m in members),
        min_ram_mb=min(m.ram_mb for m in members),
        max_ram_mb=max(m.ram_mb for m in members),
        min_clock_mhz=min(m.cpu_clock_mhz for m in members),
        max_clock_mhz=max(m.cpu_clock_mhz for m in members),
        common_software_tags=reduce(
            frozenset.intersection,
            (frozenset(m.software_tags) for m in members)),
    )


def partition_hosts(member_facts: Sequence[HostFact], key: PartitionKey,
                    cluster_id: Text) -> Tuple[List[SubCluster], List[Host]]:
    if not member_facts:
        raise PartitionError('empty cluster')
    # re-check keys that bypassed the constructor
    PartitionKey(key.attribute_names)
    site, _, cluster_local = parse_id(cluster_id)

    classes: Dict[tuple, List[HostFact]] = defaultdict(list)
    for fact in member_facts:
        classes[key.values_of(fact)].append(fact)

    subclusters: List[SubCluster] = []
    hosts: List[Host] = []
    for index, values in enumerate(sorted(classes)):
        members = sorted(classes[values], key=lambda f: f.hostname)
        subcluster_id = make_id(site, EntityKind.SUBCLUSTER,
                                f'{cluster_local}-{index}')
        subclusters.append(SubCluster(
            id=subcluster_id,
            cluster_id=cluster_id,
            key_attributes=key.attribute_names,
            key_values=values,
            host_count=len(members),
            aggregates=summarize(members),
            fresh=_freshness(members),
        ))
        for fact in members:
            fields = {name: getattr(fact, name)
                      for name in HostFact.model_fields}
            hosts.append(Host(
                id=make_id(site, EntityKind.HOST, fact.hostname),
                subcluster_id=subcluster_id,
                **fields))
    logging.debug(f'Partitioned {len(member_facts)} hosts of {cluster_id} '
                  f'into {len(subclusters)} subclusters')
    return subclusters, hosts


def derive_hierarchy(facts: Sequence[HostFact], key: PartitionKey,
                     now: Optional[int] = None,
                     default_ttl_s: int = DEFAULT_TTL_S) -> Snapshot:
    """Runs cluster derivation and partitioning over a whole fact set.

    Facts without ``measured_at`` are stamped with ``now`` when given; the
    default TTL applies to facts that did not carry their own ``fresh``.
    """
    stamped = []
    for fact in facts:
        fresh = fact.fresh
        if 'fresh' not in fact.model_fields_set:
            fresh = FreshnessMeta(ttl_s=default_ttl_s)
        if fresh.measured_at is None and now is not None:
            fresh = fresh.model_copy(update={'measured_at': now})
        stamped.append(fact.model_copy(update={'fresh': fresh}))

    entities = []
    for cluster, members in derive_clusters(stamped):
        subclusters, hosts = partition_hosts(members, key, cluster.id)
        entities.append(cluster.model_copy(update={
            'subcluster_ids': frozenset(sc.id for sc in subclusters)}))
        entities.extend(subclusters)
        entities.extend(hosts)
    return Snapshot.from_entities(entities, generated_at=now or 0)
