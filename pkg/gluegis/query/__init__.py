from gluegis.query.authz import authorize
from gluegis.query.evaluator import eval_expr
from gluegis.query.expr import (And, Compare, Defined, Expr, Member, Not, Or,
                                TriState, unparse_expr)
from gluegis.query.matchmaking import (Match, MatchRequest, ServiceKind,
                                       aggregate_ce_capacity,
                                       aggregate_storage_capacity,
                                       match_services)
from gluegis.query.parser import parse_expr
