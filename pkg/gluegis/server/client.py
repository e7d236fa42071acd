import json
import socket
from typing import Any, Dict, Iterable, List, Optional, Text, Tuple

from gluegis.exceptions import RemoteError
from gluegis.model.entities import Entity, Snapshot, entity_kind
from gluegis.registry.codec import snapshot_from_document


def envelope(entity: Entity) -> Dict[Text, Any]:
    return {'entity_kind': entity_kind(entity).value,
            'entity': entity.model_dump(mode='json')}


class GisClient:
    """Blocking client for the line-delimited JSON protocol."""

    def __init__(self, address: Tuple[Text, int], timeout: float = 10.0):
        self.address = address
        self._sock = socket.create_connection(address, timeout=timeout)
        self._file = self._sock.makefile('rwb')

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()

    def close(self):
        self._file.close()
        self._sock.close()

    def request(self, payload: Dict[Text, Any]) -> Dict[Text, Any]:
        """Sends one request and returns the raw response object."""
        self._file.write(json.dumps(payload).encode('utf-8') + b'\n')
        self._file.flush()
        line = self._file.readline()
        if not line:
            raise ConnectionError('server closed the connection')
        return json.loads(line)

    def call(self, payload: Dict[Text, Any]) -> Any:
        response = self.request(payload)
        if response.get('status') != 'ok':
            raise RemoteError(response.get('code', ''),
                              response.get('message', ''))
        return response.get('data')

    def publish(self, entity: Entity) -> Text:
        return self.call({'op': 'publish', **envelope(entity)})['result']

    def publish_batch(self, entities: Iterable[Entity]) -> List[Text]:
        data = self.call({'op': 'publish_batch',
                          'entities': [envelope(e) for e in entities]})
        return data['results']

    def get(self, uri: Text, include_stale: bool = False) -> Dict[Text, Any]:
        return self.call({'op': 'get', 'id': uri,
                          'include_stale': include_stale})

    def query(self, kind: Text, vo: Text, capability: Text,
              requirements: Text,
              rank_path: Optional[Text] = None) -> List[Dict[Text, Any]]:
        return self.call({'op': 'query', 'kind': kind, 'vo': vo,
                          'capability': capability,
                          'requirements': requirements,
                          'rank_path': rank_path})

    def render(self, fmt: Text) -> Text:
        return self.call({'op': 'render', 'format': fmt})

    def prune(self) -> int:
        return self.call({'op': 'prune'})['removed']

    def snapshot(self, include_stale: bool = False) -> Snapshot:
        return snapshot_from_document(self.call(
            {'op': 'snapshot', 'include_stale': include_stale}))
