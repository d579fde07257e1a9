import hashlib
import json
from functools import wraps

import numpy as np

from .const import GRID_TOLERANCE


class TimeOrderError(ValueError):
    pass


def positive_part(x):
    # X+ = max(X, 0)
    return np.maximum(x, 0.0)


def negative_part(x):
    # X- = min(X, 0), so that X = X+ + X-
    return np.minimum(x, 0.0)


def time_check(strict=False, position=1):
    def decorator(function):
        @wraps(function)
        def check_times(*args, **kwargs):
            t = kwargs.get("t", args[position] if len(args) > position else None)
            T = kwargs.get("T", args[position + 1] if len(args) > position + 1 else None)
            if t is not None and T is not None:
                t_arr, T_arr = np.asarray(t, dtype=float), np.asarray(T, dtype=float)
                if strict and np.any(T_arr <= t_arr):
                    raise TimeOrderError("%s requires t < T, got t=%s T=%s" % (function.__name__, t, T))
                if np.any(T_arr < t_arr - GRID_TOLERANCE):
                    raise TimeOrderError("%s requires t <= T, got t=%s T=%s" % (function.__name__, t, T))
            return function(*args, **kwargs)
        return check_times
    return decorator


def canonical_json(document):
    return json.dumps(document, sort_keys=True, separators=(",", ":"))


def config_hash(document):
    return hashlib.sha256(canonical_json(document).encode()).hexdigest()


def as_float_array(values):
    return np.atleast_1d(np.asarray(values, dtype=float))
