from gluegis.registry.codec import (dump_snapshot, load_snapshot,
                                    parse_snapshot, save_snapshot,
                                    snapshot_document, snapshot_from_document)
from gluegis.registry.locks import ReadWriteLock
from gluegis.registry.store import PublishResult, Registry, RegistryConfig
