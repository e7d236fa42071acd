"""GLUE entities: systems (cluster, subcluster, host, storage library) and
services (computing element, storage service) plus storage spaces.

All models are frozen. Invariants beyond plain typing are not enforced at
construction; ``gluegis.model.validation`` reports them as data.
"""
import json
from enum import Enum
from typing import (Annotated, Any, Dict, FrozenSet, Iterator, List,
                    NamedTuple, Optional, Text, Tuple, Union)

from pydantic import (BaseModel, ConfigDict, Field, WrapSerializer,
                      field_validator, model_validator)

from gluegis.constants import DEFAULT_TTL_S
from gluegis.model.ids import EntityKind, is_valid_id, parse_id


def _sorted_json(value, handler):
    items = handler(value)
    return sorted(items, key=lambda item: json.dumps(item, sort_keys=True))


# sets serialize as sorted arrays so that native files diff cleanly
SORTED = WrapSerializer(_sorted_json, when_used='json')


class GlueModel(BaseModel):
    model_config = ConfigDict(frozen=True, extra='forbid')


class Capability(str, Enum):
    SUBMIT = 'submit'
    READ = 'read'
    WRITE = 'write'
    MANAGE = 'manage'


class ServiceStatus(str, Enum):
    PRODUCTION = 'production'
    DRAINING = 'draining'
    CLOSED = 'closed'


class LrmsType(str, Enum):
    PBS = 'pbs'
    LSF = 'lsf'
    CONDOR = 'condor'
    OTHER = 'other'


class StorageArchitectureKind(str, Enum):
    DISK = 'disk'
    TAPE = 'tape'
    HIERARCHICAL = 'hierarchical'


class StorageFlavor(str, Enum):
    TRIVIAL_FS = 'trivial_fs'
    SRM = 'srm'
    EDG_SE = 'edg_se'


class ProtocolType(str, Enum):
    GRIDFTP = 'gridftp'
    RFIO = 'rfio'
    FILE = 'file'
    DCAP = 'dcap'


class FreshnessMeta(GlueModel):
    measured_at: Optional[int] = None
    ttl_s: int = DEFAULT_TTL_S

    def is_stale(self, now: int) -> bool:
        if self.measured_at is None:
            return False
        return now > self.measured_at + self.ttl_s


class AccessRule(GlueModel):
    vo: Text
    capability: Capability

    def encode(self) -> Text:
        return f'{self.vo}:{self.capability.value}'

    @classmethod
    def decode(cls, text: Text) -> 'AccessRule':
        vo, _, capability = text.rpartition(':')
        return cls(vo=vo, capability=capability)


IdSet = Annotated[FrozenSet[Text], SORTED]
TagSet = Annotated[FrozenSet[Text], SORTED]
Acl = Annotated[FrozenSet[AccessRule], SORTED]


class ServiceCommon(GlueModel):
    id: Text
    name: Text
    acl: Acl = frozenset()
    status: ServiceStatus = ServiceStatus.PRODUCTION
    fresh: FreshnessMeta = FreshnessMeta()


class HostFact(GlueModel):
    hostname: Text
    site: Text
    batch_system: Text
    architecture: Text
    os_name: Text
    os_release: Text
    cpu_model: Text
    cpu_clock_mhz: int
    physical_cpus: int
    ram_mb: int
    software_tags: TagSet = frozenset()
    fresh: FreshnessMeta = FreshnessMeta()


# HostFact scalars a subcluster may be keyed on
PARTITION_ATTRIBUTES = (
    'architecture', 'os_name', 'os_release', 'cpu_model', 'cpu_clock_mhz',
    'physical_cpus', 'ram_mb',
)
NUMERIC_ATTRIBUTES = frozenset({'cpu_clock_mhz', 'physical_cpus', 'ram_mb'})


class Host(HostFact):
    id: Text
    subcluster_id: Text


class SubClusterAggregates(GlueModel):
    total_cpus: int
    min_ram_mb: int
    max_ram_mb: int
    min_clock_mhz: int
    max_clock_mhz: int
    common_software_tags: TagSet = frozenset()


class SubCluster(GlueModel):
    id: Text
    cluster_id: Text
    key_attributes: Tuple[Text, ...]
    key_values: Tuple[Union[int, Text], ...]
    host_count: int
    aggregates: SubClusterAggregates
    fresh: FreshnessMeta = FreshnessMeta()

    @model_validator(mode='before')
    @classmethod
    def _coerce_numeric_keys(cls, data: Any) -> Any:
        if not isinstance(data, dict):
            return data
        names = data.get('key_attributes')
        values = data.get('key_values')
        if not isinstance(names, (list, tuple)) \
                or not isinstance(values, (list, tuple)):
            return data
        coerced = []
        for name, value in zip(names, values):
            if name in NUMERIC_ATTRIBUTES and isinstance(value, str) \
                    and value.lstrip('-').isdigit():
                value = int(value)
            coerced.append(value)
        coerced.extend(values[len(coerced):])
        return {**data, 'key_values': tuple(coerced)}


class Cluster(GlueModel):
    id: Text
    site: Text
    name: Text
    batch_system: Text
    subcluster_ids: IdSet = frozenset()
    fresh: FreshnessMeta = FreshnessMeta()


class CePolicy(GlueModel):
    max_wall_time_s: int = 0
    max_cpu_time_s: int = 0
    max_total_jobs: int = 0
    max_running_jobs: int = 0
    priority: int = 0


class CeState(GlueModel):
    total_jobs: int = 0
    running_jobs: int = 0
    waiting_jobs: int = 0
    free_slots: int = 0
    estimated_response_time_s: int = 0


class ComputingElement(GlueModel):
    common: ServiceCommon
    cluster_id: Text
    queue_name: Text
    lrms_type: LrmsType
    policy: CePolicy = CePolicy()
    state: CeState = CeState()
    assigned_subcluster_ids: IdSet = frozenset()


class StorageArchitecture(GlueModel):
    kind: StorageArchitectureKind
    capacity_gb: int


class StorageFilesystem(GlueModel):
    fs_name: Text
    root_path: Text
    total_bytes: int
    free_bytes: int


class StoragePerformance(GlueModel):
    read_mbps: int = 0
    write_mbps: int = 0
    max_streams: int = 1


class StorageLibrary(GlueModel):
    id: Text
    site: Text
    name: Text
    architecture: StorageArchitecture
    filesystem: StorageFilesystem
    performance: StoragePerformance = StoragePerformance()
    fresh: FreshnessMeta = FreshnessMeta()


class AccessProtocol(GlueModel):
    protocol: ProtocolType
    endpoint: Text
    max_streams: int = 1

    def encode(self) -> Text:
        return f'{self.protocol.value}|{self.max_streams}|{self.endpoint}'

    @classmethod
    def decode(cls, text: Text) -> 'AccessProtocol':
        protocol, max_streams, endpoint = text.split('|', 2)
        return cls(protocol=protocol, max_streams=max_streams,
                   endpoint=endpoint)


class StorageService(GlueModel):
    common: ServiceCommon
    flavor: StorageFlavor
    library_id: Text
    protocols: Tuple[AccessProtocol, ...]
    space_ids: IdSet = frozenset()

    @field_validator('protocols', mode='after')
    @classmethod
    def _canonical_order(cls, protocols):
        return tuple(sorted(
            protocols,
            key=lambda p: (p.protocol.value, p.endpoint, p.max_streams)))


class StorageSpace(GlueModel):
    id: Text
    service_id: Text
    owner_vo: Text
    total_bytes: int
    used_bytes: int = 0
    acl: Acl = frozenset()
    lifetime_s: int = 0
    fresh: FreshnessMeta = FreshnessMeta()


Entity = Union[Cluster, SubCluster, Host, ComputingElement, StorageLibrary,
               StorageService, StorageSpace]

ENTITY_TYPES = {
    EntityKind.CLUSTER: Cluster,
    EntityKind.SUBCLUSTER: SubCluster,
    EntityKind.HOST: Host,
    EntityKind.CE: ComputingElement,
    EntityKind.SL: StorageLibrary,
    EntityKind.SS: StorageService,
    EntityKind.SPACE: StorageSpace,
}
_KIND_BY_TYPE = {cls: kind for kind, cls in ENTITY_TYPES.items()}

# Snapshot attribute holding each kind, in dependency order
SNAPSHOT_FIELDS = {
    EntityKind.CLUSTER: 'clusters',
    EntityKind.SUBCLUSTER: 'subclusters',
    EntityKind.HOST: 'hosts',
    EntityKind.CE: 'computing_elements',
    EntityKind.SL: 'storage_libraries',
    EntityKind.SS: 'storage_services',
    EntityKind.SPACE: 'storage_spaces',
}


def entity_kind(entity: Any) -> EntityKind:
    try:
        return _KIND_BY_TYPE[type(entity)]
    except KeyError:
        raise TypeError(f'not a stored entity: {type(entity).__name__}')


def entity_id(entity: Entity) -> Text:
    common = getattr(entity, 'common', None)
    if common is not None:
        return common.id
    return entity.id


def freshness_of(entity: Entity) -> FreshnessMeta:
    common = getattr(entity, 'common', None)
    if common is not None:
        return common.fresh
    return entity.fresh


def with_freshness(entity: Entity, fresh: FreshnessMeta) -> Entity:
    common = getattr(entity, 'common', None)
    if common is not None:
        return entity.model_copy(
            update={'common': common.model_copy(update={'fresh': fresh})})
    return entity.model_copy(update={'fresh': fresh})


class Reference(NamedTuple):
    field: Text
    target: Text
    kind: EntityKind


def references(entity: Entity) -> List[Reference]:
    """Upward references: the systems or services an entity depends on.

    Downward id sets (``Cluster.subcluster_ids``, ``StorageService.space_ids``)
    are listings, not dependencies, and are not returned.
    """
    if isinstance(entity, Host):
        return [Reference('subcluster_id', entity.subcluster_id,
                          EntityKind.SUBCLUSTER)]
    if isinstance(entity, SubCluster):
        return [Reference('cluster_id', entity.cluster_id,
                          EntityKind.CLUSTER)]
    if isinstance(entity, ComputingElement):
        refs = [Reference('cluster_id', entity.cluster_id,
                          EntityKind.CLUSTER)]
        refs.extend(Reference('assigned_subcluster_ids', sc,
                              EntityKind.SUBCLUSTER)
                    for sc in sorted(entity.assigned_subcluster_ids))
        return refs
    if isinstance(entity, StorageService):
        return [Reference('library_id', entity.library_id, EntityKind.SL)]
    if isinstance(entity, StorageSpace):
        return [Reference('service_id', entity.service_id, EntityKind.SS)]
    return []


class Snapshot(GlueModel):
    clusters: Dict[Text, Cluster] = Field(default_factory=dict)
    subclusters: Dict[Text, SubCluster] = Field(default_factory=dict)
    hosts: Dict[Text, Host] = Field(default_factory=dict)
    computing_elements: Dict[Text, ComputingElement] = Field(
        default_factory=dict)
    storage_libraries: Dict[Text, StorageLibrary] = Field(
        default_factory=dict)
    storage_services: Dict[Text, StorageService] = Field(default_factory=dict)
    storage_spaces: Dict[Text, StorageSpace] = Field(default_factory=dict)
    generated_at: int = 0

    @classmethod
    def from_entities(cls, entities, generated_at: int = 0) -> 'Snapshot':
        maps: Dict[Text, Dict[Text, Entity]] = {
            name: {} for name in SNAPSHOT_FIELDS.values()}
        for entity in entities:
            name = SNAPSHOT_FIELDS[entity_kind(entity)]
            maps[name][entity_id(entity)] = entity
        return cls(generated_at=generated_at, **maps)

    def entity_map(self, kind: EntityKind) -> Dict[Text, Entity]:
        return getattr(self, SNAPSHOT_FIELDS[EntityKind(kind)])

    def entities(self) -> Iterator[Entity]:
        for kind in SNAPSHOT_FIELDS:
            mapping = self.entity_map(kind)
            for key in sorted(mapping):
                yield mapping[key]

    def lookup(self, uri: Text) -> Optional[Entity]:
        if not is_valid_id(uri):
            return None
        return self.entity_map(parse_id(uri).kind).get(uri)

    def entity_count(self) -> int:
        return sum(len(self.entity_map(kind)) for kind in SNAPSHOT_FIELDS)

    def sites(self) -> List[Text]:
        return sorted({parse_id(entity_id(e)).site for e in self.entities()
                       if is_valid_id(entity_id(e))})

    def subclusters_of(self, cluster_id: Text) -> List[SubCluster]:
        return [sc for key, sc in sorted(self.subclusters.items())
                if sc.cluster_id == cluster_id]

    def spaces_of(self, service_id: Text) -> List[StorageSpace]:
        return [sp for key, sp in sorted(self.storage_spaces.items())
                if sp.service_id == service_id]
