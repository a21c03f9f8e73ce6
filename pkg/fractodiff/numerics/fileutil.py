"""Directory and file helpers for report output.

Reports are written to a temporary file next to their destination and moved
into place once complete, so an interrupted run never leaves a truncated
table behind.
"""
import os
import tempfile
from contextlib import contextmanager

DIR_MODE = 0o755
FILE_MODE = 0o644


def makedirs(path):
    """Create ``path`` and its parents with mode 0o755; existing directories are fine."""
    os.makedirs(path, DIR_MODE, exist_ok=True)
    return path


@contextmanager
def write_atomic(filename, newline=None):
    """Text handle whose contents replace ``filename`` when the block exits cleanly.

    The parent directory is created if needed and the result gets mode 0o644.
    """
    directory = os.path.dirname(os.path.abspath(filename))
    makedirs(directory)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix='.' + os.path.basename(filename), suffix='.tmp')
    try:
        with os.fdopen(fd, 'w', newline=newline) as f:
            yield f
        os.chmod(tmp, FILE_MODE)
        os.replace(tmp, filename)
    except BaseException:
        if os.path.exists(tmp):
            os.remove(tmp)
        raise
