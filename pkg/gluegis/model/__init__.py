from gluegis.model.entities import (AccessProtocol, AccessRule, Capability,
                                    CePolicy, CeState, Cluster,
                                    ComputingElement, Entity, ENTITY_TYPES,
                                    FreshnessMeta, Host, HostFact, LrmsType,
                                    NUMERIC_ATTRIBUTES, PARTITION_ATTRIBUTES,
                                    ProtocolType, ServiceCommon,
                                    ServiceStatus, Snapshot,
                                    StorageArchitecture,
                                    StorageArchitectureKind,
                                    StorageFilesystem, StorageFlavor,
                                    StorageLibrary, StoragePerformance,
                                    StorageService, StorageSpace, SubCluster,
                                    SubClusterAggregates, entity_id,
                                    entity_kind, freshness_of, references,
                                    with_freshness)
from gluegis.model.flatten import (flatten_attributes, leaf_specs,
                                   unflatten_attributes)
from gluegis.model.ids import (EntityKind, is_valid_id, kind_of, make_id,
                               parse_id, sanitize_local, site_of)
from gluegis.model.validation import (ValidationReport, Violation,
                                      check_hierarchy,
                                      check_referential_integrity,
                                      queue_conflicts,
                                      validate_entity)
