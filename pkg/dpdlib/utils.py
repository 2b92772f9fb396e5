"""
Utility functions for dpdlib
"""

import math
import logging

import pandas as pd

from .config import TRANSPORT_SETTINGS
from .errors import ConfigError

logger = logging.getLogger(__name__)


def ceil_log2(n):
    """Number of recursive-doubling rounds for a group of n members (0 for n <= 1)."""
    if n <= 1:
        return 0
    return (n - 1).bit_length()


def words_of(nbytes):
    """Charge a payload as whole words, rounding fractional words up."""
    return math.ceil(nbytes / TRANSPORT_SETTINGS['word_bytes'])


def parse_hosts_file(path):
    """
    Read a hosts file: one "address port" pair per line, line index = rank.
    Blank lines are ignored.
    """
    try:
        table = pd.read_csv(path, sep=r'\s+', header=None, names=['address', 'port'],
                            dtype={'address': str}, skip_blank_lines=True)
    except (OSError, pd.errors.ParserError, pd.errors.EmptyDataError) as e:
        raise ConfigError(f"Could not read hosts file {path}: {str(e)}")

    if table['port'].isnull().any():
        raise ConfigError(f"Hosts file {path} has a line without a port")

    hosts = [(row.address, int(row.port)) for row in table.itertuples(index=False)]
    logger.debug(f"Parsed {len(hosts)} hosts from {path}")
    return hosts


def write_hosts_file(path, hosts):
    """Write (address, port) pairs in hosts file format."""
    with open(path, 'w') as f:
        for address, port in hosts:
            f.write(f"{address} {port}\n")
