import os
from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings

from factories import NOW, make_ce, make_fact, make_storage
from gluegis.model.entities import Snapshot
from gluegis.partition import PartitionKey, derive_hierarchy

settings.register_profile(
    'default', max_examples=50, deadline=None,
    suppress_health_check=[HealthCheck.too_slow])
settings.register_profile(
    'acceptance', max_examples=1000, deadline=None,
    suppress_health_check=[HealthCheck.too_slow,
                           HealthCheck.data_too_large])
settings.load_profile(os.getenv('HYPOTHESIS_PROFILE', 'default'))

TESTDATA = Path(__file__).resolve().parent.parent / 'testdata'


@pytest.fixture
def now():
    return NOW


@pytest.fixture
def testdata():
    return TESTDATA


@pytest.fixture
def facts():
    return [
        make_fact('wn01', ram_mb=2048),
        make_fact('wn02', ram_mb=2048, tags=('VO-cms-sw', 'LCG-2_6')),
        make_fact('wn03', ram_mb=4096),
        make_fact('lx01', batch_system='lsf', ram_mb=1024),
        make_fact('wn01', site='RAL', ram_mb=1024),
    ]


@pytest.fixture
def grid(facts):
    """CERN pbs and lsf clusters and a RAL cluster, one CE per CERN
    cluster and a CERN storage element with two spaces."""
    base = derive_hierarchy(facts, PartitionKey(('ram_mb',)), now=NOW)
    entities = list(base.entities())
    entities.append(make_ce('ce-pbs', 'glue:CERN/cluster/pbs',
                            acl=(('cms', 'submit'), ('atlas', 'manage')),
                            free_slots=10))
    entities.append(make_ce('ce-lsf', 'glue:CERN/cluster/lsf',
                            acl=(('cms', 'submit'),), free_slots=3))
    entities.extend(make_storage(spaces=[('cms-disk', 'cms', 1000, 250),
                                         ('atlas-disk', 'atlas', 500, 0)]))
    return Snapshot.from_entities(entities, generated_at=NOW)
