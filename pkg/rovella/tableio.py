import io
import logging
import os
import tempfile

import numpy as np
import yaml
from astropy.io import ascii

from . import __version__

__all__ = ["header_line", "write_table", "write_yaml", "read_table"]


def header_line(digest):
    """ '# rovella <version> config_sha256=<digest>' """
    return "# rovella {} config_sha256={}".format(__version__, digest)


def _atomic_write(fp, text):
    """ write text to a temporary file next to fp, then rename it onto fp """
    dirname = os.path.dirname(os.path.abspath(fp))
    os.makedirs(dirname, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=dirname, prefix=".rovella-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as f:
            f.write(text)
        os.replace(tmp, fp)
    except BaseException:
        if os.path.exists(tmp):
            os.remove(tmp)
        raise


def write_table(table, fp, digest):
    """ Write an astropy Table as CSV with the header comment line.

    Float columns are written with 17 significant digits.
    """
    formats = {name: "%.17g" for name in table.colnames if np.issubdtype(table[name].dtype, np.floating)}
    buf = io.StringIO()
    ascii.write(table, buf, format="csv", formats=formats)
    _atomic_write(fp, header_line(digest) + "\n" + buf.getvalue())
    logging.info("@tableio: {} rows written to {}".format(len(table), fp))


def write_yaml(d, fp, digest):
    """ Write a report mapping as a YAML document with the header comment line. """
    text = yaml.safe_dump(_plain(d), sort_keys=False, default_flow_style=False)
    _atomic_write(fp, header_line(digest) + "\n" + text)
    logging.info("@tableio: report written to {}".format(fp))


def read_table(fp):
    """ Read a CSV written by write_table. """
    return ascii.read(fp, format="csv", comment="#")


def _plain(obj):
    """ numpy scalars and tuples to built-in types, infinities to strings """
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [_plain(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        if np.isposinf(v):
            return "inf"
        if np.isneginf(v):
            return "-inf"
        return v
    return obj
