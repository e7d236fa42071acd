import logging
import os
import signal
import socketserver
import threading
from typing import Optional, Text, Tuple

from pydantic import BaseModel, Field, field_validator

from gluegis.constants import DEFAULT_LISTEN, DEFAULT_TTL_S, MAX_LINE_BYTES
from gluegis.registry.store import Registry, RegistryConfig
from gluegis.server.protocol import (ErrorCode, RequestHandler,
                                     encode_response, error)


def parse_address(text: Text) -> Tuple[Text, int]:
    host, sep, port = text.rpartition(':')
    if not sep or not host or not port.isdigit() or int(port) > 65535:
        raise ValueError(f'expected <host>:<port>, got {text!r}')
    return host, int(port)


class ServerConfig(BaseModel):
    listen: Text = DEFAULT_LISTEN
    ttl_s: int = Field(DEFAULT_TTL_S, ge=1)
    persist_path: Optional[Text] = None

    @field_validator('listen')
    @classmethod
    def _address(cls, value):
        parse_address(value)
        return value

    @property
    def address(self) -> Tuple[Text, int]:
        return parse_address(self.listen)


class LineHandler(socketserver.StreamRequestHandler):
    """Requests on one connection are answered in order, one line each."""

    def handle(self):
        peer = '%s:%s' % self.client_address[:2]
        logging.debug(f'Connection from {peer}')
        while True:
            line = self.rfile.readline(MAX_LINE_BYTES + 1)
            if not line:
                break
            if len(line) > MAX_LINE_BYTES and not line.endswith(b'\n'):
                logging.warning(f'Closing {peer}: request line too long')
                self.wfile.write(encode_response(error(
                    ErrorCode.BAD_REQUEST,
                    f'request line exceeds {MAX_LINE_BYTES} bytes')))
                break
            if not line.strip():
                continue
            response = self.server.request_handler.handle_line(line)
            self.wfile.write(encode_response(response))
        logging.debug(f'Connection from {peer} closed')


class GisServer(socketserver.ThreadingTCPServer):
    allow_reuse_address = True
    daemon_threads = True

    def __init__(self, address: Tuple[Text, int],
                 request_handler: RequestHandler):
        self.request_handler = request_handler
        super().__init__(address, LineHandler)


def create_server(config: ServerConfig) -> GisServer:
    registry = Registry(RegistryConfig(default_ttl_s=config.ttl_s,
                                       persist_path=config.persist_path))
    if config.persist_path and os.path.exists(config.persist_path):
        registry.load(config.persist_path)
    return GisServer(config.address, RequestHandler(registry))


def serve(config: ServerConfig):
    """Serves until SIGINT or SIGTERM, then flushes persistence."""
    server = create_server(config)
    host, port = server.server_address[:2]
    logging.info(f'Serving GLUE registry on {host}:{port}')

    def _stop(signum, frame):
        # shutdown() blocks until serve_forever returns, so not from here
        threading.Thread(target=server.shutdown, daemon=True).start()

    signal.signal(signal.SIGTERM, _stop)
    signal.signal(signal.SIGINT, _stop)
    try:
        server.serve_forever()
    finally:
        server.server_close()
        server.request_handler.registry.flush()
        logging.info('Registry server stopped')
