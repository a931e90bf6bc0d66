import numpy as np


def like_input(reference, values):
    """Returns a float when the reference argument was a scalar, the array otherwise."""
    if np.ndim(reference) == 0:
        return float(values)
    return values


def wrap_val(v):
    return "'{}'".format(v) if isinstance(v, str) else v
