"""Line-delimited JSON request handling.

Each request is one JSON object selected by its ``op`` member; each
response is ``{"status": "ok", "data": ...}`` or
``{"status": "error", "code": ..., "message": ...}``.
"""
import json
import logging
import time
from typing import (Annotated, Any, Callable, Dict, List, Literal, Optional,
                    Text, Union)

from pydantic import BaseModel, Field, TypeAdapter, ValidationError

from gluegis.exceptions import (DanglingReference, ExprSyntaxError, GisError,
                                IntegrityError, InvalidIdError,
                                ValidationFailed)
from gluegis.model.entities import ENTITY_TYPES, Entity, entity_kind
from gluegis.model.ids import EntityKind
from gluegis.query.matchmaking import (MatchRequest, ServiceKind,
                                       match_services)
from gluegis.registry.codec import snapshot_document
from gluegis.registry.store import Registry
from gluegis.render import RENDERERS
from gluegis.utils import describe_validation_error


class ErrorCode:
    VALIDATION = 'validation'
    NOT_FOUND = 'not_found'
    SYNTAX = 'syntax'
    INTEGRITY = 'integrity'
    BAD_REQUEST = 'bad_request'


class EntityEnvelope(BaseModel):
    entity_kind: EntityKind
    entity: Dict[Text, Any]


class PublishRequest(EntityEnvelope):
    op: Literal['publish']


class PublishBatchRequest(BaseModel):
    op: Literal['publish_batch']
    entities: List[EntityEnvelope]


class GetRequest(BaseModel):
    op: Literal['get']
    id: Text
    include_stale: bool = False


class QueryRequest(BaseModel):
    op: Literal['query']
    kind: ServiceKind
    vo: Text
    capability: Text
    requirements: Text
    rank_path: Optional[Text] = None


class RenderRequest(BaseModel):
    op: Literal['render']
    format: Literal['ldif', 'sql', 'xml']


class PruneRequest(BaseModel):
    op: Literal['prune']


class SnapshotRequest(BaseModel):
    op: Literal['snapshot']
    include_stale: bool = False


Request = Annotated[
    Union[PublishRequest, PublishBatchRequest, GetRequest, QueryRequest,
          RenderRequest, PruneRequest, SnapshotRequest],
    Field(discriminator='op')]

REQUEST_ADAPTER = TypeAdapter(Request)


class RequestError(GisError):
    def __init__(self, code: Text, message: Text):
        super().__init__(message)
        self.code = code


def ok(data: Any = None) -> Dict[Text, Any]:
    return {'status': 'ok', 'data': data}


def error(code: Text, message: Text) -> Dict[Text, Any]:
    return {'status': 'error', 'code': code, 'message': message}


def encode_response(response: Dict[Text, Any]) -> bytes:
    # json.dumps escapes newlines inside strings, so this is one line
    return (json.dumps(response, ensure_ascii=False) + '\n').encode('utf-8')


def decode_entity(kind: EntityKind, data: Dict[Text, Any]) -> Entity:
    try:
        return ENTITY_TYPES[kind].model_validate(data)
    except ValidationError as e:
        raise RequestError(ErrorCode.VALIDATION,
                           describe_validation_error(e))


def _code_of(e: GisError) -> Text:
    if isinstance(e, RequestError):
        return e.code
    if isinstance(e, (ValidationFailed, InvalidIdError)):
        return ErrorCode.VALIDATION
    if isinstance(e, ExprSyntaxError):
        return ErrorCode.SYNTAX
    if isinstance(e, (IntegrityError, DanglingReference)):
        return ErrorCode.INTEGRITY
    return ErrorCode.BAD_REQUEST


class RequestHandler:
    """Executes wire requests against a registry.

    The server clock is the only clock source: every request is handled at
    ``clock()`` seconds.
    """

    def __init__(self, registry: Registry,
                 clock: Callable[[], float] = time.time):
        self.registry = registry
        self.clock = clock

    def now(self) -> int:
        return int(self.clock())

    def handle_line(self, line: Union[bytes, Text]) -> Dict[Text, Any]:
        try:
            document = json.loads(line)
        except (ValueError, UnicodeDecodeError) as e:
            return error(ErrorCode.BAD_REQUEST, f'malformed JSON: {e}')
        except RecursionError:
            return error(ErrorCode.BAD_REQUEST, 'JSON nested too deeply')
        return self.handle(document)

    def handle(self, document: Any) -> Dict[Text, Any]:
        try:
            request = REQUEST_ADAPTER.validate_python(document)
        except ValidationError as e:
            return error(ErrorCode.BAD_REQUEST, describe_validation_error(e))
        except RecursionError:
            return error(ErrorCode.BAD_REQUEST, 'request nested too deeply')
        try:
            return ok(getattr(self, f'_{request.op}')(request))
        except GisError as e:
            logging.debug(f'Request {request.op} failed: {e}')
            return error(_code_of(e), str(e))
        except OSError as e:
            logging.exception(f'Request {request.op} failed')
            return error(ErrorCode.BAD_REQUEST, f'server I/O error: {e}')
        except Exception as e:
            # the connection must survive whatever a request does
            logging.exception(f'Request {request.op} failed unexpectedly')
            return error(ErrorCode.BAD_REQUEST, f'internal error: {e!r}')

    def _publish(self, request: PublishRequest):
        entity = decode_entity(request.entity_kind, request.entity)
        result = self.registry.publish(entity, self.now())
        return {'result': result.value}

    def _publish_batch(self, request: PublishBatchRequest):
        entities = [decode_entity(e.entity_kind, e.entity)
                    for e in request.entities]
        results = self.registry.publish_batch(entities, self.now())
        return {'results': [r.value for r in results]}

    def _get(self, request: GetRequest):
        entity = self.registry.get(request.id, self.now(),
                                   include_stale=request.include_stale)
        if entity is None:
            raise RequestError(ErrorCode.NOT_FOUND,
                               f'no entity with id {request.id}')
        return {'entity_kind': entity_kind(entity).value,
                'entity': entity.model_dump(mode='json')}

    def _query(self, request: QueryRequest):
        try:
            match_request = MatchRequest(
                kind=request.kind, requirements=request.requirements,
                vo=request.vo, capability=request.capability,
                rank_path=request.rank_path)
        except ValidationError as e:
            raise RequestError(ErrorCode.VALIDATION,
                               describe_validation_error(e))
        snapshot = self.registry.snapshot(self.now())
        return [{'id': m.id, 'rank': m.rank}
                for m in match_services(snapshot, match_request)]

    def _render(self, request: RenderRequest):
        return RENDERERS[request.format](self.registry.snapshot(self.now()))

    def _prune(self, request: PruneRequest):
        now = self.now()
        removed = self.registry.prune_stale(now)
        self.registry.flush(now)
        return {'removed': removed}

    def _snapshot(self, request: SnapshotRequest):
        return snapshot_document(self.registry.snapshot(
            self.now(), include_stale=request.include_stale))
