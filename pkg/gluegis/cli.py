"""``gluegis`` command line.

Exit codes: 0 on success (including empty query results), 2 on usage,
parse or validation errors, 3 on I/O errors. Diagnostics go to standard
error; verbosity follows ``GLUE_GIS_LOG`` (error, info or debug).
"""
import argparse
import json
import logging
import sys
from typing import List, Optional, Text

from pydantic import ValidationError

from gluegis.constants import (APP_NAME, DEFAULT_LISTEN, DEFAULT_TTL_S,
                               EXIT_IO, EXIT_OK, EXIT_USAGE, GLUE_GIS_LOG,
                               __version__)
from gluegis.exceptions import GisError
from gluegis.partition import PartitionKey, derive_hierarchy, load_host_facts
from gluegis.query import MatchRequest, ServiceKind, match_services
from gluegis.registry import load_snapshot, save_snapshot
from gluegis.render import RENDERERS, parse_xml
from gluegis.server import GisClient, ServerConfig, parse_address, serve
from gluegis.utils import describe_validation_error

LOG_LEVELS = {
    'error': logging.ERROR,
    'info': logging.INFO,
    'debug': logging.DEBUG,
}


def configure_logging(level_name: Text = GLUE_GIS_LOG):
    level = LOG_LEVELS.get(level_name.lower(), logging.INFO)
    logging.basicConfig(
        level=level, stream=sys.stderr,
        format='%(asctime)s %(levelname)s %(name)s: %(message)s')


def cmd_derive(args) -> int:
    facts = load_host_facts(args.facts)
    key = PartitionKey.parse(args.key)
    snapshot = derive_hierarchy(facts, key, now=args.now)
    save_snapshot(snapshot, args.out)
    print(f'clusters={len(snapshot.clusters)} '
          f'subclusters={len(snapshot.subclusters)} '
          f'hosts={len(snapshot.hosts)}')
    return EXIT_OK


def cmd_query(args) -> int:
    snapshot = load_snapshot(args.snapshot)
    request = MatchRequest(kind=ServiceKind(args.kind),
                           requirements=args.require, vo=args.vo,
                           capability=args.cap, rank_path=args.rank)
    matches = match_services(snapshot, request)
    if args.json:
        print(json.dumps([{'id': m.id, 'rank': m.rank} for m in matches]))
        return EXIT_OK
    for m in matches:
        rank = 'undef' if m.rank is None else m.rank
        print(f'{m.id}\t{rank}')
    return EXIT_OK


def cmd_render(args) -> int:
    snapshot = load_snapshot(args.snapshot)
    sys.stdout.write(RENDERERS[args.format](snapshot))
    return EXIT_OK


def cmd_import(args) -> int:
    with open(args.xml, 'r', encoding='utf-8') as f:
        snapshot = parse_xml(f.read())
    save_snapshot(snapshot, args.out)
    logging.info(f'Imported {snapshot.entity_count()} entities')
    return EXIT_OK


def cmd_serve(args) -> int:
    config = ServerConfig(listen=args.listen, ttl_s=args.ttl,
                          persist_path=args.persist)
    serve(config)
    return EXIT_OK


def cmd_publish(args) -> int:
    snapshot = load_snapshot(args.snapshot)
    with GisClient(parse_address(args.server)) as client:
        results = client.publish_batch(snapshot.entities())
    created = results.count('created')
    print(f'published={len(results)} created={created} '
          f'replaced={len(results) - created}')
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog=APP_NAME, description='GLUE grid information service')
    parser.add_argument('--version', action='version',
                        version=f'%(prog)s {__version__}')
    sub = parser.add_subparsers(dest='command', required=True)

    derive = sub.add_parser('derive', help='derive the cluster hierarchy '
                                           'from a host-facts file')
    derive.add_argument('--facts', required=True)
    derive.add_argument('--key', required=True,
                        help='comma-separated partition attributes')
    derive.add_argument('--out', required=True)
    derive.add_argument('--now', type=int, default=None,
                        help='stamp facts without measured_at with this '
                             'time')
    derive.set_defaults(func=cmd_derive)

    query = sub.add_parser('query', help='select services for a VO')
    query.add_argument('--snapshot', required=True)
    query.add_argument('--kind', required=True, choices=['ce', 'storage'])
    query.add_argument('--vo', required=True)
    query.add_argument('--cap', required=True,
                       choices=['submit', 'read', 'write', 'manage'])
    query.add_argument('--require', required=True)
    query.add_argument('--rank', default=None)
    query.add_argument('--json', action='store_true')
    query.set_defaults(func=cmd_query)

    render = sub.add_parser('render', help='render a snapshot')
    render.add_argument('--snapshot', required=True)
    render.add_argument('--format', required=True, choices=sorted(RENDERERS))
    render.set_defaults(func=cmd_render)

    import_ = sub.add_parser('import', help='import an XML rendering')
    import_.add_argument('--xml', required=True)
    import_.add_argument('--out', required=True)
    import_.set_defaults(func=cmd_import)

    serve_ = sub.add_parser('serve', help='run the registry server')
    serve_.add_argument('--listen', default=DEFAULT_LISTEN)
    serve_.add_argument('--ttl', type=int, default=DEFAULT_TTL_S)
    serve_.add_argument('--persist', default=None)
    serve_.set_defaults(func=cmd_serve)

    publish = sub.add_parser('publish', help='push a snapshot to a server')
    publish.add_argument('--snapshot', required=True)
    publish.add_argument('--server', required=True)
    publish.set_defaults(func=cmd_publish)
    return parser


def main(argv: Optional[List[Text]] = None) -> int:
    configure_logging()
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code == 0 else EXIT_USAGE
    try:
        return args.func(args)
    except ValidationError as e:
        print(f'{APP_NAME}: {describe_validation_error(e)}', file=sys.stderr)
        return EXIT_USAGE
    except (GisError, ValueError) as e:
        print(f'{APP_NAME}: {e}', file=sys.stderr)
        return EXIT_USAGE
    except OSError as e:
        print(f'{APP_NAME}: {e}', file=sys.stderr)
        return EXIT_IO


if __name__ == '__main__':
    sys.exit(main())
