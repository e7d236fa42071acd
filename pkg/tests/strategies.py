"""Hypothesis strategies producing valid host facts and snapshots."""
import os

import hypothesis.strategies as st

from factories import NOW
from gluegis.model import (AccessProtocol, AccessRule, Capability, CePolicy,
                           CeState, ComputingElement, FreshnessMeta,
                           HostFact, LrmsType, PARTITION_ATTRIBUTES,
                           ProtocolType, ServiceCommon, ServiceStatus,
                           StorageArchitecture, StorageArchitectureKind,
                           StorageFilesystem, StorageFlavor, StorageLibrary,
                           StoragePerformance, StorageService, StorageSpace,
                           make_id)
from gluegis.model.entities import Snapshot
from gluegis.model.ids import EntityKind
from gluegis.partition import PartitionKey, derive_hierarchy

SITES = ('CERN', 'RAL', 'FNAL')
VOS = ('cms', 'atlas', 'lhcb', 'dteam')
TAGS = ('VO-cms-sw', 'VO-atlas-sw', 'LCG-2_6', 'R_GMA')

# the acceptance profile also grows the generated grids
LARGE = os.getenv('HYPOTHESIS_PROFILE') == 'acceptance'
MAX_FACTS = 500 if LARGE else 60
MAX_SNAPSHOT_HOSTS = 500 if LARGE else 12
MAX_CES = 90 if LARGE else 4
MAX_STORAGE = 10 if LARGE else 3

# free text with markup, line breaks and directory-unsafe characters mixed in
names = st.text(
    alphabet=st.sampled_from('abcXYZ09 -_:<>&"\'éß/\t\n\r'),
    min_size=1, max_size=12).filter(lambda t: t.strip())

freshness = st.builds(
    FreshnessMeta,
    measured_at=st.one_of(st.none(), st.integers(0, NOW)),
    ttl_s=st.integers(1, 10_000))

access_rules = st.builds(AccessRule, vo=st.sampled_from(VOS),
                         capability=st.sampled_from(list(Capability)))
acls = st.frozensets(access_rules, max_size=4)


@st.composite
def host_facts(draw, hostname, site=None, batch_system=None):
    return HostFact(
        hostname=hostname,
        site=site or draw(st.sampled_from(SITES)),
        batch_system=batch_system or draw(
            st.sampled_from(('pbs', 'lsf', 'condor'))),
        architecture=draw(st.sampled_from(('x86_64', 'i686'))),
        os_name=draw(st.sampled_from(('linux', 'solaris'))),
        os_release=draw(st.sampled_from(('3', '4', '3.0.5'))),
        cpu_model=draw(st.sampled_from(('Xeon', 'Opteron'))),
        cpu_clock_mhz=draw(st.sampled_from((2000, 2400, 2800))),
        physical_cpus=draw(st.sampled_from((1, 2, 4))),
        ram_mb=draw(st.sampled_from((1024, 2048, 4096))),
        software_tags=draw(st.frozensets(st.sampled_from(TAGS))),
        fresh=draw(freshness))


@st.composite
def host_fact_sets(draw, min_size=0, max_size=30):
    """Hosts copied from a handful of drawn profiles, so large sets stay
    within the example budget."""
    profiles = draw(st.lists(host_facts('profile'), min_size=1, max_size=12))
    count = draw(st.integers(min_size, max_size))
    return [draw(st.sampled_from(profiles)).model_copy(
                update={'hostname': f'wn{index:03d}'})
            for index in range(count)]


partition_keys = st.lists(
    st.sampled_from(PARTITION_ATTRIBUTES), min_size=1, max_size=3,
    unique=True).map(lambda names: PartitionKey(tuple(names)))


@st.composite
def ce_states(draw):
    running = draw(st.integers(0, 50))
    waiting = draw(st.integers(0, 50))
    return CeState(total_jobs=running + waiting, running_jobs=running,
                   waiting_jobs=waiting, free_slots=draw(st.integers(0, 20)),
                   estimated_response_time_s=draw(st.integers(0, 3600)))


@st.composite
def ce_policies(draw):
    total = draw(st.integers(0, 100))
    return CePolicy(max_wall_time_s=draw(st.integers(0, 86400)),
                    max_cpu_time_s=draw(st.integers(0, 86400)),
                    max_total_jobs=total,
                    max_running_jobs=draw(st.integers(0, total)),
                    priority=draw(st.integers(-10, 10)))


def _common(draw, uri):
    return ServiceCommon(
        id=uri, name=draw(names), acl=draw(acls),
        status=draw(st.sampled_from(list(ServiceStatus))),
        fresh=draw(freshness))


@st.composite
def computing_elements(draw, base: Snapshot, index: int):
    cluster_id = draw(st.sampled_from(sorted(base.clusters)))
    site = base.clusters[cluster_id].site
    subclusters = [sc.id for sc in base.subclusters_of(cluster_id)]
    assigned = draw(st.frozensets(st.sampled_from(subclusters))) \
        if subclusters else frozenset()
    return ComputingElement(
        common=_common(draw, make_id(site, EntityKind.CE, f'ce{index}')),
        cluster_id=cluster_id,
        queue_name=draw(st.sampled_from(('short', 'long', 'infinite'))),
        lrms_type=draw(st.sampled_from(list(LrmsType))),
        policy=draw(ce_policies()), state=draw(ce_states()),
        assigned_subcluster_ids=assigned)


protocols = st.builds(
    AccessProtocol, protocol=st.sampled_from(list(ProtocolType)),
    endpoint=st.sampled_from(('gsiftp://se.example.org:2811',
                              'rfio://se.example.org/', '/storage')),
    max_streams=st.integers(1, 8))


@st.composite
def storage_elements(draw, index: int):
    site = draw(st.sampled_from(SITES))
    total = draw(st.integers(0, 10 ** 12))
    library = StorageLibrary(
        id=make_id(site, EntityKind.SL, f'sl{index}'), site=site,
        name=draw(names),
        architecture=StorageArchitecture(
            kind=draw(st.sampled_from(list(StorageArchitectureKind))),
            capacity_gb=draw(st.integers(0, 10 ** 5))),
        filesystem=StorageFilesystem(
            fs_name=draw(names), root_path='/data',
            total_bytes=total, free_bytes=draw(st.integers(0, total))),
        performance=StoragePerformance(
            read_mbps=draw(st.integers(0, 1000)),
            write_mbps=draw(st.integers(0, 1000)),
            max_streams=draw(st.integers(1, 16))),
        fresh=draw(freshness))
    service_id = make_id(site, EntityKind.SS, f'ss{index}')
    spaces = []
    for space_index in range(draw(st.integers(0, 3))):
        space_total = draw(st.integers(0, 10 ** 9))
        spaces.append(StorageSpace(
            id=make_id(site, EntityKind.SPACE, f'ss{index}/sp{space_index}'),
            service_id=service_id, owner_vo=draw(st.sampled_from(VOS)),
            total_bytes=space_total,
            used_bytes=draw(st.integers(0, space_total)), acl=draw(acls),
            lifetime_s=draw(st.integers(0, 10 ** 6)), fresh=draw(freshness)))
    service = StorageService(
        common=_common(draw, service_id),
        flavor=draw(st.sampled_from(list(StorageFlavor))),
        library_id=library.id,
        protocols=tuple(draw(st.lists(protocols, min_size=1, max_size=3,
                                      unique_by=lambda p: p.encode()))),
        space_ids=frozenset(sp.id for sp in spaces))
    return [library, service] + spaces


@st.composite
def placed_ce(draw, template: ComputingElement, base: Snapshot, index: int):
    """``template`` moved to a drawn cluster under a fresh id and queue."""
    cluster_id = draw(st.sampled_from(sorted(base.clusters)))
    site = base.clusters[cluster_id].site
    subclusters = [sc.id for sc in base.subclusters_of(cluster_id)]
    assigned = draw(st.frozensets(st.sampled_from(subclusters))) \
        if subclusters else frozenset()
    common = template.common.model_copy(
        update={'id': make_id(site, EntityKind.CE, f'ce{index}')})
    state = template.state.model_copy(
        update={'free_slots': draw(st.integers(0, 20))})
    return template.model_copy(update={
        'common': common, 'cluster_id': cluster_id,
        # one CE per queue of a cluster
        'queue_name': f'{template.queue_name}-{index}', 'state': state,
        'assigned_subcluster_ids': assigned})


@st.composite
def snapshots(draw, max_hosts=MAX_SNAPSHOT_HOSTS, max_ces=MAX_CES,
              max_storage=MAX_STORAGE):
    """Valid snapshots: derived systems plus services that reference them."""
    facts = draw(host_fact_sets(max_size=max_hosts))
    base = derive_hierarchy(facts, draw(partition_keys), now=NOW)
    entities = list(base.entities())
    if base.clusters:
        templates = draw(st.lists(computing_elements(base, 0), min_size=1,
                                  max_size=4))
        for index in range(draw(st.integers(0, max_ces))):
            template = draw(st.sampled_from(templates))
            entities.append(draw(placed_ce(template, base, index)))
    for index in range(draw(st.integers(0, max_storage))):
        entities.extend(draw(storage_elements(index)))
    return Snapshot.from_entities(entities, generated_at=NOW)
