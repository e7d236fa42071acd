import logging
import time
from enum import Enum
from typing import Dict, Iterable, List, Optional, Text

from pydantic import Field

from gluegis.constants import DEFAULT_TTL_S
from gluegis.exceptions import (DanglingReference, IntegrityError,
                                ValidationFailed)
from gluegis.model.entities import (ComputingElement, Entity, GlueModel,
                                    Snapshot, entity_id, freshness_of,
                                    references, with_freshness)
from gluegis.model.validation import (ValidationReport, queue_conflicts,
                                     validate_entity)
from gluegis.registry.codec import load_snapshot, save_snapshot
from gluegis.registry.locks import ReadWriteLock


class RegistryConfig(GlueModel):
    default_ttl_s: int = Field(DEFAULT_TTL_S, ge=1)
    persist_path: Optional[Text] = None


class PublishResult(str, Enum):
    CREATED = 'created'
    REPLACED = 'replaced'


class Registry:
    """Freshness-aware store of GLUE entities.

    Readers (``get``, ``snapshot``) run concurrently; writers (``publish``,
    ``prune_stale``, ``load``) are exclusive. Entities are immutable, so the
    values handed out are never views into live state.
    """

    def __init__(self, config: Optional[RegistryConfig] = None):
        self.config = config or RegistryConfig()
        self._entities: Dict[Text, Entity] = {}
        self._lock = ReadWriteLock()

    @classmethod
    def from_snapshot(cls, s: Snapshot,
                      config: Optional[RegistryConfig] = None) -> 'Registry':
        registry = cls(config)
        registry._replace_content(s)
        return registry

    def __len__(self):
        with self._lock.read():
            return len(self._entities)

    def _stamp(self, entity: Entity, now: int) -> Entity:
        fresh = freshness_of(entity)
        update = {}
        if fresh.measured_at is None:
            update['measured_at'] = now
        if 'ttl_s' not in fresh.model_fields_set:
            update['ttl_s'] = self.config.default_ttl_s
        if not update:
            return entity
        return with_freshness(entity, fresh.model_copy(update=update))

    def publish(self, entity: Entity, now: int) -> PublishResult:
        return self.publish_batch([entity], now)[0]

    def publish_batch(self, entities: Iterable[Entity],
                      now: int) -> List[PublishResult]:
        """Publishes all entities or none.

        References may resolve against current content or against other
        entities of the same batch. Two CEs may not serve the same queue of
        a cluster, stale or not.
        """
        stamped = [self._stamp(e, now) for e in entities]
        for entity in stamped:
            report = validate_entity(entity)
            if not report.ok:
                raise ValidationFailed(report, entity_id(entity))

        batch = {entity_id(e): e for e in stamped}
        results = []
        with self._lock.write():
            for entity in stamped:
                for ref in references(entity):
                    if ref.target not in batch \
                            and ref.target not in self._entities:
                        raise DanglingReference(ref.target,
                                                entity_id(entity))
            ces = {uri: e for uri, e in self._entities.items()
                   if isinstance(e, ComputingElement)}
            ces.update((uri, e) for uri, e in batch.items()
                       if isinstance(e, ComputingElement))
            conflicts = queue_conflicts(ces.values())
            if conflicts:
                raise IntegrityError(ValidationReport.of(conflicts))
            for entity in stamped:
                uri = entity_id(entity)
                if uri in self._entities:
                    results.append(PublishResult.REPLACED)
                else:
                    results.append(PublishResult.CREATED)
                self._entities[uri] = entity
        logging.debug(f'Published {len(stamped)} entities at {now}')
        return results

    def get(self, uri: Text, now: int,
            include_stale: bool = False) -> Optional[Entity]:
        with self._lock.read():
            entity = self._entities.get(uri)
        if entity is None:
            return None
        if not include_stale and freshness_of(entity).is_stale(now):
            return None
        return entity

    def prune_stale(self, now: int) -> int:
        """Removes stale entities and, transitively, everything whose upward
        references no longer resolve. Returns the number removed."""
        with self._lock.write():
            removed = {uri for uri, e in self._entities.items()
                       if freshness_of(e).is_stale(now)}
            changed = True
            while changed:
                changed = False
                for uri, entity in self._entities.items():
                    if uri in removed:
                        continue
                    for ref in references(entity):
                        if ref.target in removed \
                                or ref.target not in self._entities:
                            removed.add(uri)
                            changed = True
                            break
            for uri in removed:
                del self._entities[uri]
        logging.debug(f'Pruned {len(removed)} entities at {now}')
        return len(removed)

    def snapshot(self, now: int, include_stale: bool = False) -> Snapshot:
        with self._lock.read():
            entities = list(self._entities.values())
        if not include_stale:
            entities = [e for e in entities
                        if not freshness_of(e).is_stale(now)]
        return Snapshot.from_entities(entities, generated_at=now)

    def _replace_content(self, s: Snapshot):
        with self._lock.write():
            self._entities = {entity_id(e): e for e in s.entities()}

    def save(self, path: Text, now: Optional[int] = None):
        if now is None:
            now = int(time.time())
        save_snapshot(self.snapshot(now, include_stale=True), path)

    def load(self, path: Text) -> Snapshot:
        s = load_snapshot(path)
        self._replace_content(s)
        logging.info(f'Loaded {s.entity_count()} entities from {path}')
        return s

    def flush(self, now: Optional[int] = None):
        if self.config.persist_path:
            self.save(self.config.persist_path, now)
            logging.info(f'Registry persisted to {self.config.persist_path}')
