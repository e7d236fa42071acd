import logging

import pytest
from hypothesis import given
import hypothesis.strategies as st
from pydantic import ValidationError

from factories import make_ce
from gluegis.exceptions import ExprSyntaxError
from gluegis.model import (AccessRule, Capability, ComputingElement,
                           StorageService, flatten_attributes)
from gluegis.model.entities import Snapshot
from gluegis.query import (Match, MatchRequest, ServiceKind, TriState,
                           aggregate_ce_capacity, aggregate_storage_capacity,
                           authorize, eval_expr, match_services, parse_expr)
from strategies import VOS, access_rules, snapshots

CE_PBS = 'glue:CERN/ce/ce-pbs'
CE_LSF = 'glue:CERN/ce/ce-lsf'


def _ce_request(requirements, vo='cms', capability='submit', **kwargs):
    return MatchRequest(kind='ce', requirements=requirements, vo=vo,
                        capability=capability, **kwargs)


def test_ranked_by_free_slots(grid):
    matches = match_services(grid, _ce_request('system.max_ram_mb >= 1024'))
    assert matches == [Match(CE_PBS, 10), Match(CE_LSF, 3)]


def test_requirements_filter(grid):
    matches = match_services(grid, _ce_request('system.max_ram_mb >= 4096'))
    assert matches == [Match(CE_PBS, 10)]


def test_manage_grants_submit(grid):
    matches = match_services(
        grid, _ce_request('defined(queue_name)', vo='atlas'))
    assert [m.id for m in matches] == [CE_PBS]


def test_unknown_vo_matches_nothing(grid):
    assert match_services(grid, _ce_request('defined(queue_name)',
                                            vo='lhcb')) == []


def test_undefined_requirement_does_not_match(grid):
    assert match_services(grid, _ce_request('no.such.path > 1')) == []


def test_custom_rank_path(grid):
    matches = match_services(grid, _ce_request(
        'defined(queue_name)', rank_path='system.total_cpus'))
    assert matches == [Match(CE_PBS, 6), Match(CE_LSF, 2)]


def test_non_integer_rank_sorts_by_id(grid):
    matches = match_services(grid, _ce_request(
        'defined(queue_name)', rank_path='queue_name'))
    assert matches == [Match(CE_LSF, None), Match(CE_PBS, None)]


def test_ce_capacity_view(grid):
    attrs = aggregate_ce_capacity(grid.computing_elements[CE_PBS], grid)
    assert attrs['system.subcluster_count'] == 2
    assert attrs['system.host_count'] == 3
    assert attrs['system.total_cpus'] == 6
    assert (attrs['system.min_ram_mb'], attrs['system.max_ram_mb']) == \
        (2048, 4096)
    assert attrs['system.architectures'] == frozenset({'x86_64'})
    assert attrs['system.common_software_tags'] == frozenset({'VO-cms-sw'})
    assert attrs['state.free_slots'] == 10


def test_ce_capacity_honours_assigned_subclusters(grid):
    ce = make_ce('ce-big', 'glue:CERN/cluster/pbs',
                 assigned=['glue:CERN/subcluster/pbs-1'])
    attrs = aggregate_ce_capacity(ce, grid)
    assert attrs['system.host_count'] == 1
    assert attrs['system.min_ram_mb'] == 4096


def test_storage_capacity_view(grid):
    service = grid.storage_services['glue:CERN/ss/se1']
    attrs = aggregate_storage_capacity(service, grid)
    assert attrs['spaces.count'] == 2
    assert attrs['spaces.total_bytes'] == 1500
    assert attrs['spaces.free_bytes'] == 1250
    assert attrs['spaces.owner_vos'] == frozenset({'cms', 'atlas'})
    assert attrs['library.filesystem.free_bytes'] == 4000
    assert attrs['protocols'] == frozenset(
        {'gridftp|1|gsiftp://se1.cern.ch:2811'})


def test_storage_query(grid):
    request = MatchRequest(
        kind=ServiceKind('storage'), vo='cms', capability='read',
        requirements='spaces.free_bytes > 1000 && '
                     'member(spaces.owner_vos, "cms")')
    assert request.kind is ServiceKind.STORAGE_SERVICE
    assert match_services(grid, request) == [Match('glue:CERN/ss/se1', None)]


def test_storage_write_denied(grid):
    request = MatchRequest(kind='storage_service', vo='cms',
                           capability='write',
                           requirements='defined(flavor)')
    assert match_services(grid, request) == []


def test_dangling_service_skipped(grid, caplog):
    orphan = make_ce('ce-orphan', 'glue:CERN/cluster/gone', free_slots=50)
    s = Snapshot.from_entities(list(grid.entities()) + [orphan])
    with caplog.at_level(logging.WARNING):
        matches = match_services(s, _ce_request('defined(queue_name)'))
    assert [m.id for m in matches] == [CE_PBS, CE_LSF]
    assert 'ce-orphan' in caplog.text


def test_request_rejects_bad_input():
    with pytest.raises(ExprSyntaxError):
        _ce_request('state.free_slots >')
    with pytest.raises(ValidationError):
        _ce_request('defined(a)', vo='CMS users')
    with pytest.raises(ValidationError):
        _ce_request('defined(a)', rank_path='State.Free')
    with pytest.raises(ValidationError):
        _ce_request('defined(a)', capability='delete')


@pytest.mark.parametrize('granted', list(Capability))
@pytest.mark.parametrize('requested', list(Capability))
def test_authorize_table(granted, requested):
    acl = frozenset({AccessRule(vo='cms', capability=granted)})
    assert authorize(acl, 'cms', requested) == \
        (granted is requested or granted is Capability.MANAGE)
    assert not authorize(acl, 'atlas', requested)
    assert not authorize(frozenset(), 'cms', requested)


CE_REQUIREMENTS = [
    'defined(queue_name)',
    'state.free_slots > 5',
    'system.max_ram_mb >= 2048 || state.waiting_jobs == 0',
    'member(system.architectures, "x86_64") && !lrms_type == "lsf"',
    'policy.priority < 0',
    'system.host_count >= 2 && !member(system.common_software_tags, "R_GMA")',
]
STORAGE_REQUIREMENTS = [
    'defined(flavor)',
    'spaces.free_bytes > 100000000',
    'member(spaces.owner_vos, "cms") || library.performance.read_mbps >= 500',
    '!common.status == "closed"',
    'spaces.count == 0 && member(protocols, "file|1|/storage")',
]
QUERIES = {
    ServiceKind.CE: (CE_REQUIREMENTS, [
        None, 'state.free_slots', 'system.total_cpus', 'policy.priority',
        'queue_name', 'no.such.path']),
    ServiceKind.STORAGE_SERVICE: (STORAGE_REQUIREMENTS, [
        None, 'spaces.free_bytes', 'library.performance.read_mbps',
        'spaces.count', 'flavor']),
}


def _allowed(acl, vo, capability):
    return any(rule.vo == vo and rule.capability in (capability,
                                                     Capability.MANAGE)
               for rule in acl)


def _system_view(ce, s):
    """CE attributes plus system.* folded straight from the hosts."""
    if ce.assigned_subcluster_ids:
        served = set(ce.assigned_subcluster_ids)
    else:
        served = {sc.id for sc in s.subclusters.values()
                  if sc.cluster_id == ce.cluster_id}
    hosts = [h for h in s.hosts.values() if h.subcluster_id in served]
    attrs = flatten_attributes(ce)
    attrs['system.subcluster_count'] = len(served)
    attrs['system.host_count'] = len(hosts)
    attrs['system.total_cpus'] = sum(h.physical_cpus for h in hosts)
    attrs['system.architectures'] = frozenset(h.architecture for h in hosts)
    attrs['system.common_software_tags'] = frozenset()
    if hosts:
        attrs['system.min_ram_mb'] = min(h.ram_mb for h in hosts)
        attrs['system.max_ram_mb'] = max(h.ram_mb for h in hosts)
        attrs['system.min_clock_mhz'] = min(h.cpu_clock_mhz for h in hosts)
        attrs['system.max_clock_mhz'] = max(h.cpu_clock_mhz for h in hosts)
        attrs['system.common_software_tags'] = frozenset.intersection(
            *(frozenset(h.software_tags) for h in hosts))
    return attrs


def _storage_view(service, s):
    attrs = flatten_attributes(service)
    library = s.storage_libraries[service.library_id]
    attrs.update((f'library.{path}', value)
                 for path, value in flatten_attributes(library).items())
    spaces = [sp for sp in s.storage_spaces.values()
              if sp.service_id == service.common.id]
    attrs['spaces.count'] = len(spaces)
    attrs['spaces.total_bytes'] = sum(sp.total_bytes for sp in spaces)
    attrs['spaces.free_bytes'] = sum(sp.total_bytes - sp.used_bytes
                                     for sp in spaces)
    attrs['spaces.owner_vos'] = frozenset(sp.owner_vo for sp in spaces)
    return attrs


def _brute_force(s, kind, vo, capability, requirements, rank_path):
    if kind is ServiceKind.CE:
        services, view = s.computing_elements, _system_view
        rank_path = rank_path or 'state.free_slots'
    else:
        services, view = s.storage_services, _storage_view
    expr = parse_expr(requirements)
    ranked, unranked = [], []
    for uri, service in services.items():
        if not _allowed(service.common.acl, vo, capability):
            continue
        attrs = view(service, s)
        if eval_expr(expr, attrs) is not TriState.TRUE:
            continue
        rank = attrs.get(rank_path) if rank_path else None
        if isinstance(rank, int) and not isinstance(rank, bool):
            ranked.append(Match(uri, rank))
        else:
            unranked.append(Match(uri, None))
    ranked.sort(key=lambda m: (-m.rank, m.id))
    unranked.sort(key=lambda m: m.id)
    return ranked + unranked


@given(snapshots())
def test_ce_capacity_equals_host_fold(s):
    for ce in s.computing_elements.values():
        assert aggregate_ce_capacity(ce, s) == _system_view(ce, s)


@given(snapshots())
def test_storage_capacity_equals_space_fold(s):
    for service in s.storage_services.values():
        assert aggregate_storage_capacity(service, s) == \
            _storage_view(service, s)


@given(snapshots(), st.sampled_from(list(ServiceKind)), st.sampled_from(VOS),
       st.sampled_from(list(Capability)), st.data())
def test_matches_equal_filter_then_sort(s, kind, vo, capability, data):
    requirements, rank_paths = QUERIES[kind]
    text = data.draw(st.sampled_from(requirements))
    rank_path = data.draw(st.sampled_from(rank_paths))
    request = MatchRequest(kind=kind, requirements=text, vo=vo,
                           capability=capability, rank_path=rank_path)
    assert match_services(s, request) == \
        _brute_force(s, kind, vo, capability, text, rank_path)


@given(snapshots(), st.sampled_from(list(ServiceKind)), st.sampled_from(VOS),
       st.data())
def test_adding_a_conjunct_never_adds_matches(s, kind, vo, data):
    requirements, _ = QUERIES[kind]
    first = data.draw(st.sampled_from(requirements))
    second = data.draw(st.sampled_from(requirements))
    capability = data.draw(st.sampled_from(list(Capability)))

    def ids(text):
        request = MatchRequest(kind=kind, requirements=text, vo=vo,
                               capability=capability)
        return {m.id for m in match_services(s, request)}

    assert ids(f'({first}) && ({second})') <= ids(first) & ids(second)


def _with_acl(service, acl):
    return service.model_copy(
        update={'common': service.common.model_copy(update={'acl': acl})})


@given(snapshots(), st.sampled_from(VOS), st.sampled_from(list(Capability)),
       st.data())
def test_other_vos_rules_do_not_change_results(s, vo, capability, data):
    others = st.frozensets(access_rules.filter(lambda r: r.vo != vo),
                           max_size=4)
    entities = []
    for entity in s.entities():
        if isinstance(entity, (ComputingElement, StorageService)):
            own = {r for r in entity.common.acl if r.vo == vo}
            entity = _with_acl(entity, frozenset(own) | data.draw(others))
        entities.append(entity)
    changed = Snapshot.from_entities(entities, generated_at=s.generated_at)
    for kind, (requirements, _) in QUERIES.items():
        for text in requirements:
            request = MatchRequest(kind=kind, requirements=text, vo=vo,
                                   capability=capability)
            assert match_services(changed, request) == \
                match_services(s, request)


@given(snapshots(), st.integers(2, 5),
       st.sampled_from([r for r in CE_REQUIREMENTS if 'free_slots' not in r]))
def test_scaling_ranks_keeps_order(s, factor, requirements):
    scaled = []
    for entity in s.entities():
        if isinstance(entity, ComputingElement):
            state = entity.state.model_copy(
                update={'free_slots': entity.state.free_slots * factor})
            entity = entity.model_copy(update={'state': state})
        scaled.append(entity)
    request = _ce_request(requirements)
    before = match_services(s, request)
    after = match_services(
        Snapshot.from_entities(scaled, generated_at=s.generated_at), request)
    assert [m.id for m in after] == [m.id for m in before]
    assert [m.rank for m in after] == [m.rank * factor for m in before]


@given(snapshots())
def test_empty_acl_never_matches(s):
    open_ids = {ce.common.id for ce in s.computing_elements.values()
                if not ce.common.acl}
    for vo in VOS:
        for capability in Capability:
            matches = match_services(
                s, _ce_request('defined(queue_name)', vo=vo,
                               capability=capability))
            assert not open_ids & {m.id for m in matches}
