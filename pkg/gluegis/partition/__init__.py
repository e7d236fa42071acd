from gluegis.partition.facts import load_host_facts, parse_host_facts
from gluegis.partition.hierarchy import (PartitionKey, cluster_id_for,
                                         derive_clusters, derive_hierarchy,
                                         partition_hosts, summarize)
