"""Kleene three-valued evaluation over flattened attribute maps.

Missing paths and comparisons between mismatched types are ``UNDEF``;
``defined()`` is the only way to test for presence and is never undefined.
"""
import operator
from typing import Any, Dict, Optional, Text

from gluegis.query.expr import (And, Compare, Defined, Expr, Member, Not, Or,
                                TriState)

_OPS = {
    '==': operator.eq,
    '!=': operator.ne,
    '<': operator.lt,
    '<=': operator.le,
    '>': operator.gt,
    '>=': operator.ge,
}


def _type_tag(value: Any) -> Optional[Text]:
    # bool before int: bool is an int subclass
    if isinstance(value, bool):
        return 'bool'
    if isinstance(value, int):
        return 'int'
    if isinstance(value, str):
        return 'str'
    return None


def _compare(e: Compare, attrs: Dict[Text, Any]) -> TriState:
    if e.path not in attrs:
        return TriState.UNDEF
    value = attrs[e.path]
    tag = _type_tag(value)
    if tag is None or tag != _type_tag(e.literal):
        return TriState.UNDEF
    left, right = value, e.literal
    if tag == 'str':
        # raw byte order, independent of locale
        left, right = left.encode('utf-8'), right.encode('utf-8')
    return TriState.of(_OPS[e.op](left, right))


def _member(e: Member, attrs: Dict[Text, Any]) -> TriState:
    value = attrs.get(e.path)
    if not isinstance(value, (frozenset, set, tuple)):
        return TriState.UNDEF
    return TriState.of(any(str(item) == e.value for item in value))


def eval_expr(e: Expr, attrs: Dict[Text, Any]) -> TriState:
    if isinstance(e, Or):
        return eval_expr(e.left, attrs) | eval_expr(e.right, attrs)
    if isinstance(e, And):
        return eval_expr(e.left, attrs) & eval_expr(e.right, attrs)
    if isinstance(e, Not):
        return ~eval_expr(e.operand, attrs)
    if isinstance(e, Compare):
        return _compare(e, attrs)
    if isinstance(e, Member):
        return _member(e, attrs)
    if isinstance(e, Defined):
        return TriState.of(e.path in attrs)
    raise TypeError(f'not an expression: {e!r}')
