"""Service selection: VO authorization, requirements, ranking.

Computing elements are matched against their own attributes merged with an
aggregate view of the subclusters that serve them (``system.*``); storage
services against theirs merged with the library they run on (``library.*``)
and the spaces they manage (``spaces.*``).
"""
import logging
import re
from enum import Enum
from functools import reduce
from typing import Any, Dict, List, NamedTuple, Optional, Text

from pydantic import BaseModel, ConfigDict, field_validator

from gluegis.exceptions import DanglingReference
from gluegis.model.entities import (Capability, ComputingElement, Snapshot,
                                    StorageService)
from gluegis.model.flatten import flatten_attributes
from gluegis.model.validation import VO_PATTERN
from gluegis.query.authz import authorize
from gluegis.query.evaluator import eval_expr
from gluegis.query.expr import TriState
from gluegis.query.parser import parse_expr

PATH_PATTERN = re.compile(r'^[a-z_][a-z0-9_]*(\.[a-z_][a-z0-9_]*)*$')


class ServiceKind(str, Enum):
    CE = 'ce'
    STORAGE_SERVICE = 'storage_service'

    @classmethod
    def _missing_(cls, value):
        if value == 'storage':
            return cls.STORAGE_SERVICE
        return None


DEFAULT_RANK_PATHS = {
    ServiceKind.CE: 'state.free_slots',
    ServiceKind.STORAGE_SERVICE: None,
}


class MatchRequest(BaseModel):
    model_config = ConfigDict(frozen=True)

    kind: ServiceKind
    requirements: Any
    vo: Text
    capability: Capability
    rank_path: Optional[Text] = None

    @field_validator('requirements', mode='before')
    @classmethod
    def _parse_text(cls, value):
        # ExprSyntaxError is not a ValueError and propagates unwrapped
        if isinstance(value, str):
            return parse_expr(value)
        return value

    @field_validator('vo')
    @classmethod
    def _vo_syntax(cls, value):
        if not VO_PATTERN.match(value):
            raise ValueError(f'vo must match {VO_PATTERN.pattern}')
        return value

    @field_validator('rank_path')
    @classmethod
    def _path_syntax(cls, value):
        if value is not None and not PATH_PATTERN.match(value):
            raise ValueError(f'rank path must match {PATH_PATTERN.pattern}')
        return value

    @property
    def effective_rank_path(self) -> Optional[Text]:
        if self.rank_path is not None:
            return self.rank_path
        return DEFAULT_RANK_PATHS[self.kind]


class Match(NamedTuple):
    id: Text
    rank: Optional[int]


def _architectures(subcluster, s: Snapshot) -> frozenset:
    if 'architecture' in subcluster.key_attributes:
        index = subcluster.key_attributes.index('architecture')
        return frozenset({subcluster.key_values[index]})
    return frozenset(h.architecture for h in s.hosts.values()
                     if h.subcluster_id == subcluster.id)


def aggregate_ce_capacity(ce: ComputingElement,
                          s: Snapshot) -> Dict[Text, Any]:
    """Flattened CE attributes plus ``system.*`` over its effective
    subclusters (the assigned ones, or all of the cluster's when none are
    assigned)."""
    cluster = s.clusters.get(ce.cluster_id)
    if cluster is None:
        raise DanglingReference(ce.cluster_id, ce.common.id)
    if ce.assigned_subcluster_ids:
        subclusters = []
        for sc_id in sorted(ce.assigned_subcluster_ids):
            sc = s.subclusters.get(sc_id)
            if sc is None:
                raise DanglingReference(sc_id, ce.common.id)
            subclusters.append(sc)
    else:
        subclusters = s.subclusters_of(cluster.id)

    attrs = flatten_attributes(ce)
    aggregates = [sc.aggregates for sc in subclusters]
    attrs['system.subcluster_count'] = len(subclusters)
    attrs['system.host_count'] = sum(sc.host_count for sc in subclusters)
    attrs['system.total_cpus'] = sum(a.total_cpus for a in aggregates)
    attrs['system.architectures'] = frozenset().union(
        *(_architectures(sc, s) for sc in subclusters))
    if aggregates:
        attrs['system.min_ram_mb'] = min(a.min_ram_mb for a in aggregates)
        attrs['system.max_ram_mb'] = max(a.max_ram_mb for a in aggregates)
        attrs['system.min_clock_mhz'] = min(
            a.min_clock_mhz for a in aggregates)
        attrs['system.max_clock_mhz'] = max(
            a.max_clock_mhz for a in aggregates)
        attrs['system.common_software_tags'] = reduce(
            frozenset.intersection,
            (frozenset(a.common_software_tags) for a in aggregates))
    else:
        attrs['system.common_software_tags'] = frozenset()
    return attrs


def aggregate_storage_capacity(service: StorageService,
                               s: Snapshot) -> Dict[Text, Any]:
    library = s.storage_libraries.get(service.library_id)
    if library is None:
        raise DanglingReference(service.library_id, service.common.id)
    attrs = flatten_attributes(service)
    for path, value in flatten_attributes(library).items():
        attrs[f'library.{path}'] = value
    spaces = s.spaces_of(service.common.id)
    attrs['spaces.count'] = len(spaces)
    attrs['spaces.total_bytes'] = sum(sp.total_bytes for sp in spaces)
    attrs['spaces.free_bytes'] = sum(sp.total_bytes - sp.used_bytes
                                     for sp in spaces)
    attrs['spaces.owner_vos'] = frozenset(sp.owner_vo for sp in spaces)
    return attrs


def _rank_value(attrs: Dict[Text, Any], path: Optional[Text]) -> Optional[int]:
    if path is None:
        return None
    value = attrs.get(path)
    if isinstance(value, bool) or not isinstance(value, int):
        return None
    return value


def match_services(s: Snapshot, req: MatchRequest) -> List[Match]:
    """Authorized services whose requirements evaluate to true, by rank
    descending (no rank sorts last), ties by id ascending."""
    if req.kind is ServiceKind.CE:
        candidates = s.computing_elements
        view = aggregate_ce_capacity
    else:
        candidates = s.storage_services
        view = aggregate_storage_capacity

    rank_path = req.effective_rank_path
    matches = []
    for service_id in sorted(candidates):
        service = candidates[service_id]
        if not authorize(service.common.acl, req.vo, req.capability):
            continue
        try:
            attrs = view(service, s)
        except DanglingReference as e:
            logging.warning(f'Skipping {service_id} during matchmaking: {e}')
            continue
        if eval_expr(req.requirements, attrs) is not TriState.TRUE:
            continue
        matches.append(Match(service_id, _rank_value(attrs, rank_path)))
    matches.sort(key=lambda m: (m.rank is None, -(m.rank or 0), m.id))
    return matches
