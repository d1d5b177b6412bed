"""JSON encoding shared by every report.

Complex numbers are ``[re, im]`` pairs and 2x2 matrices are row-major lists
of four such pairs.  :func:`dumps` is canonical: sorted keys, fixed
indentation and floats printed with 17 significant digits, so equal inputs
give byte-identical text.
"""

import json
import math

import numpy as np

SCHEMA_VERSION = "1.0.0"


def report_schema_version():
    return SCHEMA_VERSION


def encode_complex(z):
    z = complex(z)
    return [z.real, z.imag]


def decode_complex(pair):
    if isinstance(pair, (int, float)):
        return complex(pair)
    re, im = pair
    return complex(re, im)


def encode_matrix(g):
    return [encode_complex(z) for z in np.asarray(g).ravel()]


def decode_matrix(data):
    """Accept four row-major pairs or a nested 2x2 list of pairs."""
    if len(data) == 2 and len(data[0]) == 2 and isinstance(data[0][0], list):
        flat = [data[0][0], data[0][1], data[1][0], data[1][1]]
    else:
        flat = data
    if len(flat) != 4:
        raise ValueError("a matrix needs four entries")
    return np.array([decode_complex(z) for z in flat], dtype=complex).reshape(2, 2)


def encode_vector(v):
    return [encode_complex(z) for z in np.asarray(v).ravel()]


def _to_plain(obj):
    if isinstance(obj, dict):
        return {str(k): _to_plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_to_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _to_plain(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return encode_complex(obj)
    return obj


def _format_float(x):
    if math.isnan(x):
        return '"nan"'
    if math.isinf(x):
        return '"inf"' if x > 0 else '"-inf"'
    if x == 0:
        return "0.0"
    return format(x, ".17g")


def _emit(obj, indent, out):
    pad = "  " * indent
    if isinstance(obj, dict):
        if not obj:
            out.append("{}")
            return
        out.append("{\n")
        items = sorted(obj.items())
        for k, (key, val) in enumerate(items):
            out.append(f'{pad}  "{key}": ')
            _emit(val, indent + 1, out)
            out.append(",\n" if k < len(items) - 1 else "\n")
        out.append(pad + "}")
    elif isinstance(obj, list):
        if not obj:
            out.append("[]")
            return
        if all(not isinstance(v, (dict, list)) for v in obj):
            out.append("[")
            for k, v in enumerate(obj):
                _emit(v, indent, out)
                if k < len(obj) - 1:
                    out.append(", ")
            out.append("]")
            return
        out.append("[\n")
        for k, v in enumerate(obj):
            out.append(pad + "  ")
            _emit(v, indent + 1, out)
            out.append(",\n" if k < len(obj) - 1 else "\n")
        out.append(pad + "]")
    elif obj is None:
        out.append("null")
    elif obj is True:
        out.append("true")
    elif obj is False:
        out.append("false")
    elif isinstance(obj, int):
        out.append(str(obj))
    elif isinstance(obj, float):
        out.append(_format_float(obj))
    elif isinstance(obj, str):
        out.append(json.dumps(obj))
    else:
        raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj):
    out = []
    _emit(_to_plain(obj), 0, out)
    return "".join(out) + "\n"
