"""Invariant checks. Violations are returned as data, never raised."""
import re
from collections import Counter
from dataclasses import dataclass
from functools import singledispatch
from typing import Any, Iterable, Iterator, List, Optional, Text, Tuple

from gluegis.model.entities import (PARTITION_ATTRIBUTES, NUMERIC_ATTRIBUTES,
                                    AccessProtocol, AccessRule, CePolicy,
                                    CeState, Cluster, ComputingElement,
                                    FreshnessMeta, Host, HostFact,
                                    ServiceCommon, Snapshot, StorageLibrary,
                                    StorageService, StorageSpace, SubCluster,
                                    SubClusterAggregates, SNAPSHOT_FIELDS,
                                    entity_id, references)
from gluegis.model.flatten import flatten_attributes
from gluegis.model.ids import SITE_PATTERN, EntityKind, parse_id
from gluegis.exceptions import InvalidIdError

VO_PATTERN = re.compile(r'^[a-z0-9._-]+$')
HOSTNAME_PATTERN = re.compile(r'^[A-Za-z0-9._-]+$')
# C0 controls other than tab, newline and carriage return, surrogates and
# the two non-characters XML 1.0 forbids
CONTROL_CHARACTERS = re.compile(
    r'[\x00-\x08\x0b\x0c\x0e-\x1f\ud800-\udfff\ufffe\uffff]')


@dataclass(frozen=True)
class Violation:
    field: Text
    rule: Text

    def __str__(self):
        return f'{self.field}: {self.rule}'


@dataclass(frozen=True)
class ValidationReport:
    violations: Tuple[Violation, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.violations

    @property
    def fields(self) -> List[Text]:
        return [v.field for v in self.violations]

    def __iter__(self) -> Iterator[Violation]:
        return iter(self.violations)

    def __len__(self) -> int:
        return len(self.violations)

    @classmethod
    def of(cls, violations: Iterable[Violation]) -> 'ValidationReport':
        # stable: several rules on one field keep their check order
        return cls(tuple(sorted(violations, key=lambda v: v.field)))


class _Checker:
    def __init__(self, prefix: Text = ''):
        self.prefix = prefix
        self.found: List[Violation] = []

    def path(self, field: Text) -> Text:
        return f'{self.prefix}{field}'

    def require(self, condition: bool, field: Text, rule: Text):
        if not condition:
            self.found.append(Violation(self.path(field), rule))

    def non_empty(self, field: Text, value: Text):
        self.require(bool(value and value.strip()), field, 'must be non-empty')

    def plain_text(self, entity):
        """Every text leaf must be representable in XML 1.0."""
        for field, value in flatten_attributes(entity).items():
            items = value if isinstance(value, (frozenset, tuple)) \
                else (value,)
            if any(isinstance(item, str) and CONTROL_CHARACTERS.search(item)
                   for item in items):
                self.require(False, field,
                             'must not contain control characters')

    def positive(self, field: Text, value: int):
        self.require(value > 0, field, 'must be strictly positive')

    def non_negative(self, field: Text, value: int):
        self.require(value >= 0, field, 'must be >= 0')

    def entity_id(self, field: Text, value: Text, kind: EntityKind,
                  site: Optional[Text] = None):
        try:
            parsed = parse_id(value)
        except InvalidIdError as e:
            self.require(False, field, e.reason)
            return
        self.require(parsed.kind is kind, field,
                     f'must be a {kind.value} id, got {parsed.kind.value}')
        if site is not None:
            self.require(parsed.site == site, field,
                         f'must belong to site {site!r}')

    def nested(self, prefix: Text, report: 'ValidationReport'):
        for v in report:
            self.found.append(Violation(self.path(f'{prefix}.{v.field}'),
                                        v.rule))

    def report(self) -> ValidationReport:
        return ValidationReport.of(self.found)


@singledispatch
def validate_entity(entity: Any) -> ValidationReport:
    """Returns every violated invariant of ``entity``, ordered by field."""
    raise TypeError(f'cannot validate {type(entity).__name__}')


@validate_entity.register
def _(fresh: FreshnessMeta) -> ValidationReport:
    check = _Checker()
    check.positive('ttl_s', fresh.ttl_s)
    if fresh.measured_at is not None:
        check.non_negative('measured_at', fresh.measured_at)
    return check.report()


@validate_entity.register
def _(rule: AccessRule) -> ValidationReport:
    check = _Checker()
    check.require(bool(VO_PATTERN.match(rule.vo)), 'vo',
                  f'must match {VO_PATTERN.pattern}')
    return check.report()


def _check_acl(check: _Checker, field: Text, acl):
    for rule in sorted(acl, key=lambda r: r.encode()):
        for v in validate_entity(rule):
            check.require(False, field, f'{rule.encode()}: {v.rule}')


def _check_common(check: _Checker, common: ServiceCommon, kind: EntityKind):
    check.nested('common', validate_entity(common))
    try:
        parsed = parse_id(common.id)
    except InvalidIdError:
        return
    check.require(parsed.kind is kind, 'common.id',
                  f'must be a {kind.value} id, got {parsed.kind.value}')


@validate_entity.register
def _(common: ServiceCommon) -> ValidationReport:
    check = _Checker()
    check.non_empty('name', common.name)
    _check_acl(check, 'acl', common.acl)
    check.nested('fresh', validate_entity(common.fresh))
    try:
        parse_id(common.id)
    except InvalidIdError as e:
        check.require(False, 'id', e.reason)
    return check.report()


def _check_host_fact(check: _Checker, fact: HostFact):
    check.require(bool(HOSTNAME_PATTERN.match(fact.hostname)), 'hostname',
                  f'must match {HOSTNAME_PATTERN.pattern}')
    check.require(bool(SITE_PATTERN.match(fact.site)), 'site',
                  f'must match {SITE_PATTERN.pattern}')
    check.non_empty('batch_system', fact.batch_system)
    check.positive('cpu_clock_mhz', fact.cpu_clock_mhz)
    check.positive('physical_cpus', fact.physical_cpus)
    check.positive('ram_mb', fact.ram_mb)
    check.require(all(tag for tag in fact.software_tags), 'software_tags',
                  'tags must be non-empty')
    check.nested('fresh', validate_entity(fact.fresh))
    check.plain_text(fact)


@validate_entity.register
def _(fact: HostFact) -> ValidationReport:
    check = _Checker()
    _check_host_fact(check, fact)
    return check.report()


@validate_entity.register
def _(host: Host) -> ValidationReport:
    check = _Checker()
    _check_host_fact(check, host)
    check.entity_id('id', host.id, EntityKind.HOST, host.site)
    try:
        check.require(parse_id(host.id).local == host.hostname, 'id',
                      'local part must equal hostname')
    except InvalidIdError:
        pass
    check.entity_id('subcluster_id', host.subcluster_id,
                    EntityKind.SUBCLUSTER, host.site)
    return check.report()


@validate_entity.register
def _(aggregates: SubClusterAggregates) -> ValidationReport:
    check = _Checker()
    check.positive('total_cpus', aggregates.total_cpus)
    check.positive('min_ram_mb', aggregates.min_ram_mb)
    check.positive('min_clock_mhz', aggregates.min_clock_mhz)
    check.require(aggregates.min_ram_mb <= aggregates.max_ram_mb,
                  'max_ram_mb', 'must be >= min_ram_mb')
    check.require(aggregates.min_clock_mhz <= aggregates.max_clock_mhz,
                  'max_clock_mhz', 'must be >= min_clock_mhz')
    return check.report()


@validate_entity.register
def _(subcluster: SubCluster) -> ValidationReport:
    check = _Checker()
    site = None
    try:
        site = parse_id(subcluster.id).site
    except InvalidIdError:
        pass
    check.entity_id('id', subcluster.id, EntityKind.SUBCLUSTER)
    check.entity_id('cluster_id', subcluster.cluster_id, EntityKind.CLUSTER,
                    site)
    names = subcluster.key_attributes
    check.require(len(names) > 0, 'key_attributes', 'must be non-empty')
    check.require(len(set(names)) == len(names), 'key_attributes',
                  'names must be distinct')
    for name in names:
        check.require(name in PARTITION_ATTRIBUTES, 'key_attributes',
                      f'{name!r} is not a partition attribute')
    check.require(len(subcluster.key_values) == len(names), 'key_values',
                  'must be parallel to key_attributes')
    for name, value in zip(names, subcluster.key_values):
        expected = int if name in NUMERIC_ATTRIBUTES else str
        check.require(type(value) is expected, 'key_values',
                      f'value for {name} must be {expected.__name__}')
    check.positive('host_count', subcluster.host_count)
    check.nested('aggregates', validate_entity(subcluster.aggregates))
    check.nested('fresh', validate_entity(subcluster.fresh))
    check.plain_text(subcluster)
    return check.report()


@validate_entity.register
def _(cluster: Cluster) -> ValidationReport:
    check = _Checker()
    check.require(bool(SITE_PATTERN.match(cluster.site)), 'site',
                  f'must match {SITE_PATTERN.pattern}')
    check.entity_id('id', cluster.id, EntityKind.CLUSTER, cluster.site)
    check.non_empty('name', cluster.name)
    check.non_empty('batch_system', cluster.batch_system)
    for sc in sorted(cluster.subcluster_ids):
        check.entity_id('subcluster_ids', sc, EntityKind.SUBCLUSTER,
                        cluster.site)
    check.nested('fresh', validate_entity(cluster.fresh))
    check.plain_text(cluster)
    return check.report()


@validate_entity.register
def _(policy: CePolicy) -> ValidationReport:
    check = _Checker()
    check.non_negative('max_wall_time_s', policy.max_wall_time_s)
    check.non_negative('max_cpu_time_s', policy.max_cpu_time_s)
    check.non_negative('max_total_jobs', policy.max_total_jobs)
    check.non_negative('max_running_jobs', policy.max_running_jobs)
    if policy.max_running_jobs and policy.max_total_jobs:
        check.require(policy.max_running_jobs <= policy.max_total_jobs,
                      'max_running_jobs', 'must be <= max_total_jobs')
    return check.report()


@validate_entity.register
def _(state: CeState) -> ValidationReport:
    check = _Checker()
    check.non_negative('total_jobs', state.total_jobs)
    check.non_negative('running_jobs', state.running_jobs)
    check.non_negative('waiting_jobs', state.waiting_jobs)
    check.non_negative('free_slots', state.free_slots)
    check.non_negative('estimated_response_time_s',
                       state.estimated_response_time_s)
    check.require(
        state.total_jobs == state.running_jobs + state.waiting_jobs,
        'total_jobs', 'must equal running_jobs + waiting_jobs')
    return check.report()


@validate_entity.register
def _(ce: ComputingElement) -> ValidationReport:
    check = _Checker()
    _check_common(check, ce.common, EntityKind.CE)
    check.entity_id('cluster_id', ce.cluster_id, EntityKind.CLUSTER)
    check.non_empty('queue_name', ce.queue_name)
    check.nested('policy', validate_entity(ce.policy))
    check.nested('state', validate_entity(ce.state))
    for sc in sorted(ce.assigned_subcluster_ids):
        check.entity_id('assigned_subcluster_ids', sc, EntityKind.SUBCLUSTER)
    check.plain_text(ce)
    return check.report()


@validate_entity.register
def _(library: StorageLibrary) -> ValidationReport:
    check = _Checker()
    check.require(bool(SITE_PATTERN.match(library.site)), 'site',
                  f'must match {SITE_PATTERN.pattern}')
    check.entity_id('id', library.id, EntityKind.SL, library.site)
    check.non_empty('name', library.name)
    check.non_negative('architecture.capacity_gb',
                       library.architecture.capacity_gb)
    fs = library.filesystem
    check.non_empty('filesystem.fs_name', fs.fs_name)
    check.non_negative('filesystem.total_bytes', fs.total_bytes)
    check.non_negative('filesystem.free_bytes', fs.free_bytes)
    check.require(fs.free_bytes <= fs.total_bytes, 'filesystem.free_bytes',
                  'must be <= total_bytes')
    perf = library.performance
    check.non_negative('performance.read_mbps', perf.read_mbps)
    check.non_negative('performance.write_mbps', perf.write_mbps)
    check.positive('performance.max_streams', perf.max_streams)
    check.nested('fresh', validate_entity(library.fresh))
    check.plain_text(library)
    return check.report()


@validate_entity.register
def _(protocol: AccessProtocol) -> ValidationReport:
    check = _Checker()
    check.non_empty('endpoint', protocol.endpoint)
    check.positive('max_streams', protocol.max_streams)
    return check.report()


@validate_entity.register
def _(service: StorageService) -> ValidationReport:
    check = _Checker()
    _check_common(check, service.common, EntityKind.SS)
    check.entity_id('library_id', service.library_id, EntityKind.SL)
    check.require(len(service.protocols) > 0, 'protocols',
                  'must be non-empty')
    check.require(len({p.encode() for p in service.protocols})
                  == len(service.protocols), 'protocols', 'must not repeat')
    for protocol in service.protocols:
        check.nested('protocols', validate_entity(protocol))
    for space in sorted(service.space_ids):
        check.entity_id('space_ids', space, EntityKind.SPACE)
    check.plain_text(service)
    return check.report()


@validate_entity.register
def _(space: StorageSpace) -> ValidationReport:
    check = _Checker()
    check.entity_id('id', space.id, EntityKind.SPACE)
    check.entity_id('service_id', space.service_id, EntityKind.SS)
    check.require(bool(VO_PATTERN.match(space.owner_vo)), 'owner_vo',
                  f'must match {VO_PATTERN.pattern}')
    check.non_negative('total_bytes', space.total_bytes)
    check.non_negative('used_bytes', space.used_bytes)
    check.require(space.used_bytes <= space.total_bytes, 'used_bytes',
                  'must be <= total_bytes')
    _check_acl(check, 'acl', space.acl)
    check.non_negative('lifetime_s', space.lifetime_s)
    check.nested('fresh', validate_entity(space.fresh))
    check.plain_text(space)
    return check.report()


@validate_entity.register
def _(snapshot: Snapshot) -> ValidationReport:
    check = _Checker()
    for entity in snapshot.entities():
        check.nested(entity_id(entity), validate_entity(entity))
    return check.report()


def queue_conflicts(ces: Iterable[ComputingElement]) -> List[Violation]:
    """A queue of a cluster is served by at most one CE."""
    owners = {}
    found = []
    for ce in sorted(ces, key=lambda c: c.common.id):
        key = (ce.cluster_id, ce.queue_name)
        owner = owners.setdefault(key, ce.common.id)
        if owner != ce.common.id:
            found.append(Violation(
                f'{ce.common.id}.queue_name',
                f'queue {ce.queue_name!r} of {ce.cluster_id} is already '
                f'served by {owner}'))
    return found


def check_referential_integrity(s: Snapshot) -> ValidationReport:
    """Lists dangling references, duplicate or misfiled ids and CEs sharing
    a queue."""
    check = _Checker()
    seen = Counter()
    for kind, name in SNAPSHOT_FIELDS.items():
        for key, entity in getattr(s, name).items():
            uri = entity_id(entity)
            seen[uri] += 1
            check.require(key == uri, key, f'stored under key {key!r} but '
                                           f'has id {uri!r}')
            try:
                parsed = parse_id(uri)
            except InvalidIdError as e:
                check.require(False, uri, e.reason)
                continue
            check.require(parsed.kind is kind, uri,
                          f'{parsed.kind.value} id filed as {kind.value}')
    for uri, count in seen.items():
        check.require(count == 1, uri, f'duplicate id ({count} entities)')

    for entity in s.entities():
        uri = entity_id(entity)
        for ref in references(entity):
            target = s.entity_map(ref.kind).get(ref.target)
            check.require(target is not None, f'{uri}.{ref.field}',
                          f'dangling reference to {ref.target}')
    for ce in s.computing_elements.values():
        for sc_id in sorted(ce.assigned_subcluster_ids):
            sc = s.subclusters.get(sc_id)
            if sc is not None:
                check.require(sc.cluster_id == ce.cluster_id,
                              f'{ce.common.id}.assigned_subcluster_ids',
                              f'{sc_id} belongs to another cluster')
    check.found.extend(queue_conflicts(s.computing_elements.values()))
    return check.report()


def check_hierarchy(s: Snapshot) -> ValidationReport:
    """Partition invariants: host_count, homogeneity, batch-system agreement
    and agreement between cluster listings and subcluster parents."""
    check = _Checker()
    members = {sc_id: [] for sc_id in s.subclusters}
    for host in s.hosts.values():
        if host.subcluster_id in members:
            members[host.subcluster_id].append(host)
    for sc_id, sc in sorted(s.subclusters.items()):
        hosts = members[sc_id]
        check.require(sc.host_count == len(hosts), f'{sc_id}.host_count',
                      f'{sc.host_count} recorded, {len(hosts)} hosts')
        for host in hosts:
            values = tuple(getattr(host, a) for a in sc.key_attributes)
            check.require(values == tuple(sc.key_values), f'{host.id}',
                          f'not homogeneous with {sc_id}')
        cluster = s.clusters.get(sc.cluster_id)
        if cluster is None:
            continue
        check.require(sc_id in cluster.subcluster_ids,
                      f'{cluster.id}.subcluster_ids', f'missing {sc_id}')
        for host in hosts:
            check.require(host.batch_system == cluster.batch_system,
                          f'{host.id}.batch_system',
                          f'differs from cluster {cluster.id}')
    for cluster in s.clusters.values():
        for sc_id in sorted(cluster.subcluster_ids):
            sc = s.subclusters.get(sc_id)
            if sc is not None:
                check.require(sc.cluster_id == cluster.id,
                              f'{cluster.id}.subcluster_ids',
                              f'{sc_id} has parent {sc.cluster_id}')
    return check.report()
