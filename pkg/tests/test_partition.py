import json
from collections import defaultdict

import pytest
from hypothesis import given

from factories import NOW, make_fact
from gluegis.exceptions import FactsFormatError, PartitionError
from gluegis.model import check_hierarchy, check_referential_integrity
from gluegis.partition import (PartitionKey, cluster_id_for, derive_clusters,
                               derive_hierarchy, parse_host_facts,
                               partition_hosts, summarize)
from strategies import MAX_FACTS, host_fact_sets, partition_keys


def _classes(subclusters, hosts):
    members = defaultdict(set)
    for host in hosts:
        members[host.subcluster_id].add(host.hostname)
    return {sc.id: frozenset(members[sc.id]) for sc in subclusters}


def test_partition_key_rejects_bad_names():
    with pytest.raises(PartitionError):
        PartitionKey(())
    with pytest.raises(PartitionError):
        PartitionKey(('hostname',))
    with pytest.raises(PartitionError):
        PartitionKey(('ram_mb', 'ram_mb'))


def test_partition_key_parse():
    assert PartitionKey.parse('os_name, ram_mb').attribute_names == \
        ('os_name', 'ram_mb')


def test_single_class():
    facts = [make_fact(f'wn{i}') for i in range(5)]
    s = derive_hierarchy(facts, PartitionKey(('os_name',)), now=NOW)
    assert (len(s.clusters), len(s.subclusters), len(s.hosts)) == (1, 1, 5)
    sc = s.subclusters['glue:CERN/subcluster/pbs-0']
    assert sc.key_values == ('linux',)
    assert sc.host_count == 5
    assert sc.aggregates.total_cpus == 10


def test_two_batch_systems_two_clusters():
    facts = [make_fact('a'), make_fact('b', batch_system='lsf')]
    clusters = derive_clusters(facts)
    assert [c.id for c, _ in clusters] == ['glue:CERN/cluster/lsf',
                                           'glue:CERN/cluster/pbs']


def test_classes_ordered_by_key_values():
    facts = [make_fact('a', ram_mb=4096), make_fact('b', ram_mb=1024),
             make_fact('c', ram_mb=2048)]
    subclusters, hosts = partition_hosts(
        facts, PartitionKey(('ram_mb',)), 'glue:CERN/cluster/pbs')
    assert [sc.key_values for sc in subclusters] == [(1024,), (2048,),
                                                     (4096,)]
    assert [sc.id for sc in subclusters] == [
        'glue:CERN/subcluster/pbs-0', 'glue:CERN/subcluster/pbs-1',
        'glue:CERN/subcluster/pbs-2']
    assert {h.hostname: h.subcluster_id for h in hosts}['a'] == \
        'glue:CERN/subcluster/pbs-2'


def test_summary_intersects_tags():
    facts = [make_fact('a', tags=('x', 'y'), ram_mb=1024),
             make_fact('b', tags=('y', 'z'), ram_mb=4096)]
    summary = summarize(facts)
    assert summary.common_software_tags == frozenset({'y'})
    assert (summary.min_ram_mb, summary.max_ram_mb) == (1024, 4096)


def test_duplicate_host_rejected():
    with pytest.raises(PartitionError):
        derive_clusters([make_fact('a'), make_fact('a', ram_mb=1024)])


def test_same_hostname_at_two_sites_allowed():
    clusters = derive_clusters([make_fact('a'), make_fact('a', site='RAL')])
    assert len(clusters) == 2


def test_empty_cluster_rejected():
    with pytest.raises(PartitionError):
        partition_hosts([], PartitionKey(('os_name',)),
                        'glue:CERN/cluster/pbs')


def test_colliding_cluster_ids_rejected():
    facts = [make_fact('a', batch_system='PBS'),
             make_fact('b', batch_system='pbs')]
    assert cluster_id_for('CERN', 'PBS') == 'glue:CERN/cluster/---'
    facts.append(make_fact('c', batch_system='SGE'))
    with pytest.raises(PartitionError):
        derive_clusters(facts)


def test_derived_freshness_uses_newest_member():
    facts = [make_fact('a', fresh={'measured_at': 10, 'ttl_s': 60}),
             make_fact('b', fresh={'measured_at': 50, 'ttl_s': 30})]
    s = derive_hierarchy(facts, PartitionKey(('os_name',)))
    cluster = s.clusters['glue:CERN/cluster/pbs']
    assert (cluster.fresh.measured_at, cluster.fresh.ttl_s) == (50, 60)


def test_parse_host_facts_reports_line():
    good = make_fact('wn01').model_dump_json()
    bad = json.dumps({'hostname': 'wn02'})
    with pytest.raises(FactsFormatError) as info:
        parse_host_facts([good, '', bad])
    assert info.value.line == 3


def test_parse_host_facts_runs_invariants():
    line = make_fact('wn01', ram_mb=0).model_dump_json()
    with pytest.raises(FactsFormatError, match='ram_mb'):
        parse_host_facts([line])


@given(host_fact_sets(max_size=MAX_FACTS), partition_keys)
def test_partition_properties(facts, key):
    for cluster, members in derive_clusters(facts):
        subclusters, hosts = partition_hosts(members, key, cluster.id)
        classes = _classes(subclusters, hosts)
        names = [h.hostname for h in hosts]
        # coverage and disjointness
        assert sorted(names) == sorted(m.hostname for m in members)
        assert len(set(names)) == len(names)
        assert all(classes.values())
        # homogeneity
        by_name = {m.hostname: m for m in members}
        for sc in subclusters:
            for name in classes[sc.id]:
                assert key.values_of(by_name[name]) == sc.key_values
        # equals the pairwise-equivalence oracle
        oracle = set()
        for m in members:
            oracle.add(frozenset(o.hostname for o in members
                                 if key.values_of(o) == key.values_of(m)))
        assert set(classes.values()) == oracle
        # deterministic under reordering
        again = partition_hosts(list(reversed(members)), key, cluster.id)
        assert again == (subclusters, hosts)


@given(host_fact_sets(max_size=MAX_FACTS), partition_keys, partition_keys)
def test_refinement_is_monotone(facts, key, extra):
    names = tuple(dict.fromkeys(key.attribute_names + extra.attribute_names))
    finer = PartitionKey(names)
    for cluster, members in derive_clusters(facts):
        coarse = _classes(*partition_hosts(members, key, cluster.id))
        fine = _classes(*partition_hosts(members, finer, cluster.id))
        for cls in fine.values():
            assert any(cls <= parent for parent in coarse.values())


@given(host_fact_sets(max_size=MAX_FACTS))
def test_clusters_equal_group_by(facts):
    oracle = defaultdict(set)
    for fact in facts:
        oracle[cluster_id_for(fact.site, fact.batch_system)].add(
            fact.hostname)
    derived = {cluster.id: {m.hostname for m in members}
               for cluster, members in derive_clusters(facts)}
    assert derived == dict(oracle)


@given(host_fact_sets(max_size=30), partition_keys)
def test_derived_hierarchy_is_consistent(facts, key):
    s = derive_hierarchy(facts, key, now=NOW)
    assert check_referential_integrity(s).ok
    assert check_hierarchy(s).ok
    assert len(s.hosts) == len(facts)

