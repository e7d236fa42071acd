"""Requirements-expression AST and three-valued truth."""
from dataclasses import dataclass
from enum import Enum
from typing import Text, Union

Literal = Union[bool, int, Text]

COMPARE_OPS = ('==', '!=', '<', '<=', '>', '>=')


class TriState(Enum):
    TRUE = 'true'
    FALSE = 'false'
    UNDEF = 'undef'

    @classmethod
    def of(cls, value: bool) -> 'TriState':
        return cls.TRUE if value else cls.FALSE

    def __and__(self, other: 'TriState') -> 'TriState':
        if self is TriState.FALSE or other is TriState.FALSE:
            return TriState.FALSE
        if self is TriState.UNDEF or other is TriState.UNDEF:
            return TriState.UNDEF
        return TriState.TRUE

    def __or__(self, other: 'TriState') -> 'TriState':
        if self is TriState.TRUE or other is TriState.TRUE:
            return TriState.TRUE
        if self is TriState.UNDEF or other is TriState.UNDEF:
            return TriState.UNDEF
        return TriState.FALSE

    def __invert__(self) -> 'TriState':
        if self is TriState.UNDEF:
            return TriState.UNDEF
        return TriState.FALSE if self is TriState.TRUE else TriState.TRUE


@dataclass(frozen=True)
class Or:
    left: 'Expr'
    right: 'Expr'


@dataclass(frozen=True)
class And:
    left: 'Expr'
    right: 'Expr'


@dataclass(frozen=True)
class Not:
    operand: 'Expr'


@dataclass(frozen=True)
class Compare:
    path: Text
    op: Text
    literal: Literal


@dataclass(frozen=True)
class Member:
    path: Text
    value: Text


@dataclass(frozen=True)
class Defined:
    path: Text


Expr = Union[Or, And, Not, Compare, Member, Defined]


def quote(text: Text) -> Text:
    escaped = text.replace('\\', '\\\\').replace('"', '\\"')
    return f'"{escaped}"'


def _literal_text(value: Literal) -> Text:
    if isinstance(value, bool):
        return 'true' if value else 'false'
    if isinstance(value, int):
        return str(value)
    return quote(value)


def _operand(e: 'Expr') -> Text:
    text = unparse_expr(e)
    if isinstance(e, (Or, And)):
        return f'({text})'
    return text


def unparse_expr(e: 'Expr') -> Text:
    """Canonical text; parsing it yields an AST equal to ``e``."""
    if isinstance(e, Or):
        return f'{_operand(e.left)} || {_operand(e.right)}'
    if isinstance(e, And):
        return f'{_operand(e.left)} && {_operand(e.right)}'
    if isinstance(e, Not):
        return f'!{_operand(e.operand)}'
    if isinstance(e, Compare):
        return f'{e.path} {e.op} {_literal_text(e.literal)}'
    if isinstance(e, Member):
        return f'member({e.path}, {quote(e.value)})'
    if isinstance(e, Defined):
        return f'defined({e.path})'
    raise TypeError(f'not an expression: {e!r}')

