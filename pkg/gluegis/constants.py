import os

__version__ = '0.1.0'

APP_NAME = 'gluegis'
GLUE_GIS_LOG = os.getenv('GLUE_GIS_LOG', 'info')

DEFAULT_TTL_S = 600

# wire protocol
MAX_LINE_BYTES = 1024 * 1024
DEFAULT_LISTEN = '127.0.0.1:2170'

SNAPSHOT_FORMAT = 'glue-gis/1'

# requirements expressions
MAX_EXPR_DEPTH = 100

# exit codes
EXIT_OK = 0
EXIT_USAGE = 2
EXIT_IO = 3
