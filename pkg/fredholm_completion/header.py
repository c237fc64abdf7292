"""
Package logger and the environment variables the package reads.
"""

import logging

THREADS_ENV = "FREDHOLM_THREADS"
LOG_FILE_ENV = "FREDHOLM_LOG_FILE"

# Only a NullHandler here; __main__ attaches the real handlers.
logger = logging.getLogger('fredholm_completion')
logger.addHandler(logging.NullHandler())
