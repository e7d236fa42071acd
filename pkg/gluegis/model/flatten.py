"""Dotted-path attribute maps for entities.

``flatten_attributes`` turns an entity into ``{'state.free_slots': 4,
'common.acl': {'cms:submit'}, ...}``; the query evaluator and all three
renderers work on this form. ``unflatten_attributes`` is its inverse.
"""
import inspect
import typing
from enum import Enum
from functools import lru_cache
from typing import Any, Dict, NamedTuple, Optional, Text, Type

from pydantic import BaseModel


class LeafKind(str, Enum):
    SCALAR = 'scalar'
    SET = 'set'
    SEQUENCE = 'sequence'


class LeafSpec(NamedTuple):
    kind: LeafKind
    element: Optional[type] = None


def _unwrap(annotation):
    if typing.get_origin(annotation) is typing.Annotated:
        annotation = typing.get_args(annotation)[0]
    if typing.get_origin(annotation) is typing.Union:
        args = [a for a in typing.get_args(annotation) if a is not type(None)]
        if len(args) == 1:
            return _unwrap(args[0])
    return annotation


def _is_model(annotation) -> bool:
    return inspect.isclass(annotation) and issubclass(annotation, BaseModel)


@lru_cache(maxsize=None)
def leaf_specs(model_cls: Type[BaseModel]) -> Dict[Text, LeafSpec]:
    """Every flattened leaf path of ``model_cls``, in field order."""
    specs: Dict[Text, LeafSpec] = {}
    for name, field in model_cls.model_fields.items():
        annotation = _unwrap(field.annotation)
        origin = typing.get_origin(annotation)
        if _is_model(annotation):
            for path, spec in leaf_specs(annotation).items():
                specs[f'{name}.{path}'] = spec
        elif origin in (frozenset, set):
            specs[name] = LeafSpec(LeafKind.SET,
                                   typing.get_args(annotation)[0])
        elif origin is tuple:
            element = typing.get_args(annotation)[0]
            # tuples of models are kept in canonical order: set-like
            if _is_model(element):
                specs[name] = LeafSpec(LeafKind.SET, element)
            else:
                specs[name] = LeafSpec(LeafKind.SEQUENCE, element)
        else:
            specs[name] = LeafSpec(LeafKind.SCALAR, annotation)
    return specs


def _resolve(model: BaseModel, path: Text) -> Any:
    value = model
    for part in path.split('.'):
        value = getattr(value, part)
    return value


def _scalar(value: Any) -> Any:
    if isinstance(value, Enum):
        return value.value
    return value


def _element_text(value: Any) -> Text:
    if isinstance(value, BaseModel):
        return value.encode()
    if isinstance(value, Enum):
        return value.value
    return str(value)


def flatten_attributes(entity: BaseModel) -> Dict[Text, Any]:
    flat: Dict[Text, Any] = {}
    for path, spec in leaf_specs(type(entity)).items():
        value = _resolve(entity, path)
        if spec.kind is LeafKind.SET:
            flat[path] = frozenset(_element_text(v) for v in value)
        elif spec.kind is LeafKind.SEQUENCE:
            flat[path] = tuple(_scalar(v) for v in value)
        elif value is not None:
            flat[path] = _scalar(value)
    return flat


def _decode_element(element: Optional[type], text: Any) -> Any:
    if _is_model(element) and isinstance(text, str):
        return element.decode(text)
    return text


def unflatten_attributes(model_cls: Type[BaseModel],
                         flat: Dict[Text, Any]) -> BaseModel:
    """Rebuilds an entity from a flattened map.

    Scalars may be given as text; pydantic coerces them to the field type.
    Missing set and sequence paths decode as empty.
    """
    nested: Dict[Text, Any] = {}
    for path, spec in leaf_specs(model_cls).items():
        if spec.kind is LeafKind.SCALAR:
            if path not in flat:
                continue
            value = flat[path]
        elif spec.kind is LeafKind.SET:
            value = [_decode_element(spec.element, v)
                     for v in sorted(flat.get(path, ()), key=str)]
        else:
            value = list(flat.get(path, ()))
        parts = path.split('.')
        node = nested
        for part in parts[:-1]:
            node = node.setdefault(part, {})
        node[parts[-1]] = value
    return model_cls.model_validate(nested)
