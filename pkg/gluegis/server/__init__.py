from gluegis.server.client import GisClient
from gluegis.server.protocol import ErrorCode, RequestHandler
from gluegis.server.tcp import (GisServer, ServerConfig, create_server,
                                parse_address, serve)
