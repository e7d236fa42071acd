"""Recursive-descent parser for requirements expressions.

Grammar (precedence low to high)::

    expr   := or
    or     := and ('||' and)*
    and    := unary ('&&' unary)*
    unary  := '!' unary | atom
    atom   := '(' expr ')'
            | 'member' '(' path ',' string ')'
            | 'defined' '(' path ')'
            | path cmpop literal
    literal := integer | string | 'true' | 'false'

Binary operators associate to the left and trees deeper than
MAX_EXPR_DEPTH are rejected. Errors carry the byte offset of
the offending token and the set of tokens that would have been accepted.
"""
import re
from typing import FrozenSet, List, NamedTuple, Text, Tuple

from gluegis.constants import MAX_EXPR_DEPTH
from gluegis.exceptions import ExprSyntaxError
from gluegis.query.expr import (And, Compare, Defined, Expr, Literal, Member,
                                Not, Or)

_TOKEN = re.compile(r'''
    (?P<ws>\s+)
  | (?P<or>\|\|)
  | (?P<and>&&)
  | (?P<cmp>==|!=|<=|>=|<|>)
  | (?P<not>!)
  | (?P<lparen>\()
  | (?P<rparen>\))
  | (?P<comma>,)
  | (?P<int>-?[0-9]+)
  | (?P<string>"(?:[^"\\]|\\["\\])*")
  | (?P<path>[a-z_][a-z0-9_]*(?:\.[a-z_][a-z0-9_]*)*)
''', re.VERBOSE)

_ESCAPE = re.compile(r'\\(["\\])')

ATOM_START = frozenset({'(', '!', 'path', 'member', 'defined'})
LITERAL_START = frozenset({'integer', 'string', 'true', 'false'})
CMP_OPS = frozenset({'==', '!=', '<', '<=', '>', '>='})


class Token(NamedTuple):
    kind: Text
    text: Text
    offset: int

    def describe(self) -> Text:
        if self.kind == 'eof':
            return 'end of input'
        if self.kind == 'error':
            return f'invalid input {self.text!r}'
        return repr(self.text)


def _tokenize(text: Text) -> List[Token]:
    tokens = []
    pos = 0
    byte_offset = 0
    while pos < len(text):
        match = _TOKEN.match(text, pos)
        if match is None:
            # lexing stops here; the parser reports it with its expected set
            tokens.append(Token('error', text[pos:pos + 10], byte_offset))
            return tokens
        kind = match.lastgroup
        if kind != 'ws':
            tokens.append(Token(kind, match.group(), byte_offset))
        byte_offset += len(match.group().encode('utf-8'))
        pos = match.end()
    tokens.append(Token('eof', '', byte_offset))
    return tokens


class _Parser:
    """Each ``parse_*`` method returns the node and the depth of its tree.

    ``nesting`` counts the open parentheses and negations above the current
    token, which bounds recursion before the tree depth is known.
    """

    def __init__(self, text: Text):
        self.tokens = _tokenize(text)
        self.pos = 0
        self.nesting = 0

    def peek(self, ahead: int = 0) -> Token:
        index = min(self.pos + ahead, len(self.tokens) - 1)
        return self.tokens[index]

    def advance(self) -> Token:
        token = self.peek()
        if token.kind not in ('eof', 'error'):
            self.pos += 1
        return token

    def fail(self, expected: FrozenSet[Text]):
        token = self.peek()
        raise ExprSyntaxError(token.offset, frozenset(expected),
                              token.describe())

    def too_deep(self, token: Token):
        raise ExprSyntaxError(
            token.offset, frozenset(),
            f'expression nested deeper than {MAX_EXPR_DEPTH} levels')

    def deeper(self, depth: int, token: Token) -> int:
        if depth + 1 > MAX_EXPR_DEPTH:
            self.too_deep(token)
        return depth + 1

    def enter(self, token: Token):
        self.nesting += 1
        if self.nesting > MAX_EXPR_DEPTH:
            self.too_deep(token)

    def expect(self, kind: Text, label: Text) -> Token:
        if self.peek().kind != kind:
            self.fail(frozenset({label}))
        return self.advance()

    def parse(self) -> Expr:
        e, _ = self.parse_or()
        if self.peek().kind != 'eof':
            self.fail(frozenset({'||', '&&', 'end of input'}))
        return e

    def parse_or(self) -> Tuple[Expr, int]:
        left, depth = self.parse_and()
        while self.peek().kind == 'or':
            token = self.advance()
            right, right_depth = self.parse_and()
            left = Or(left, right)
            depth = self.deeper(max(depth, right_depth), token)
        return left, depth

    def parse_and(self) -> Tuple[Expr, int]:
        left, depth = self.parse_unary()
        while self.peek().kind == 'and':
            token = self.advance()
            right, right_depth = self.parse_unary()
            left = And(left, right)
            depth = self.deeper(max(depth, right_depth), token)
        return left, depth

    def parse_unary(self) -> Tuple[Expr, int]:
        if self.peek().kind == 'not':
            token = self.advance()
            self.enter(token)
            operand, depth = self.parse_unary()
            self.nesting -= 1
            return Not(operand), self.deeper(depth, token)
        return self.parse_atom()

    def parse_atom(self) -> Tuple[Expr, int]:
        token = self.peek()
        if token.kind == 'lparen':
            self.advance()
            self.enter(token)
            result = self.parse_or()
            if self.peek().kind != 'rparen':
                self.fail(frozenset({')', '||', '&&'}))
            self.advance()
            self.nesting -= 1
            return result
        if token.kind != 'path':
            self.fail(ATOM_START)
        if token.text in ('member', 'defined') \
                and self.peek(1).kind == 'lparen':
            return self.parse_call(), 1
        path = self.advance().text
        if self.peek().kind != 'cmp':
            self.fail(CMP_OPS)
        op = self.advance().text
        return Compare(path, op, self.parse_literal()), 1

    def parse_call(self) -> Expr:
        name = self.advance().text
        self.expect('lparen', '(')
        path = self.expect('path', 'path').text
        if name == 'defined':
            self.expect('rparen', ')')
            return Defined(path)
        self.expect('comma', ',')
        value = self.expect('string', 'string').text
        self.expect('rparen', ')')
        return Member(path, _unquote(value))

    def parse_literal(self) -> Literal:
        token = self.peek()
        if token.kind == 'int':
            self.advance()
            return int(token.text)
        if token.kind == 'string':
            self.advance()
            return _unquote(token.text)
        if token.kind == 'path' and token.text in ('true', 'false'):
            self.advance()
            return token.text == 'true'
        self.fail(LITERAL_START)


def _unquote(token_text: Text) -> Text:
    return _ESCAPE.sub(r'\1', token_text[1:-1])


def parse_expr(text: Text) -> Expr:
    return _Parser(text).parse()
