"""Writers for CSV tables and JSON summaries.

Tables are written with 17 significant digits and LF line endings so that
reruns with the same configuration are byte-identical.
"""
import json
import math
import os

import numpy as np
import pandas as pd

from . import fileutil

FLOAT_FORMAT = '%.17g'


def to_builtin(value):
    """Convert numpy scalars and arrays into JSON-ready Python objects.

    Non-finite floats become the strings ``'nan'``, ``'inf'`` and ``'-inf'``.
    """
    if isinstance(value, dict):
        return dict((str(k), to_builtin(v)) for k, v in value.items())
    if isinstance(value, (list, tuple)):
        return [to_builtin(v) for v in value]
    if isinstance(value, np.ndarray):
        return [to_builtin(v) for v in value.tolist()]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if math.isfinite(value):
            return value
        return 'nan' if math.isnan(value) else ('inf' if value > 0 else '-inf')
    return value


def write_json(path, data):
    with fileutil.write_atomic(path) as f:
        json.dump(to_builtin(data), f, indent=2, sort_keys=True)
        f.write('\n')
    return path


def write_csv(path, table):
    """Write a DataFrame (or a list of row dicts) without its index."""
    if not isinstance(table, pd.DataFrame):
        table = pd.DataFrame(list(table))
    with fileutil.write_atomic(path, newline='') as f:
        table.to_csv(f, float_format=FLOAT_FORMAT, lineterminator='\n', na_rep='nan', index=False)
    return path


def sidecar_path(path):
    return os.path.splitext(path)[0] + '.json'
