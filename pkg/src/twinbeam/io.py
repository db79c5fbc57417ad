"""CSV and JSON exports.

CSV files start with ``#``-prefixed metadata lines (``# key: value``), including the
configuration digest and column units, followed by a header row.  Numbers are
written with 17 significant digits so reruns are byte-identical and values
round-trip exactly.
"""

from __future__ import annotations

import json
import platform
from dataclasses import asdict, dataclass, field

import numpy as np


def write_csv(path, columns, meta=None, units=None):
    """Write equal-length ``columns`` (name -> 1D array) with metadata lines.

    Parameters
    ----------
    path : path-like
    columns : dict
        Column name to 1D array; integer arrays are written as integers.
    meta : dict, optional
        Written as ``# key: value`` lines in insertion order.
    units : dict, optional
        Column name to unit string, written as one ``# units:`` line.
    """
    names = list(columns)
    arrays = [np.asarray(columns[n]) for n in names]
    lengths = {a.shape[0] for a in arrays}
    if len(lengths) > 1:
        raise ValueError(f"columns differ in length: {sorted(lengths)}")
    lines = []
    for key, value in (meta or {}).items():
        lines.append(f"# {key}: {value}")
    if units:
        lines.append("# units: " + ", ".join(f"{n}={units[n]}" for n in names if n in units))
    lines.append(",".join(names))
    n = lengths.pop() if lengths else 0
    is_int = [np.issubdtype(a.dtype, np.integer) for a in arrays]
    for i in range(n):
        lines.append(",".join(str(int(a[i])) if it else format(float(a[i]), ".17g")
                              for a, it in zip(arrays, is_int)))
    with open(path, "w", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")
    return path


def read_csv(path):
    """Read a file written by :func:`write_csv`; returns ``(meta, columns)``."""
    meta = {}
    with open(path) as fh:
        lines = fh.read().splitlines()
    i = 0
    while i < len(lines) and lines[i].startswith("#"):
        key, _, value = lines[i][1:].strip().partition(":")
        meta[key.strip()] = value.strip()
        i += 1
    names = lines[i].split(",")
    data = [row.split(",") for row in lines[i + 1:] if row]
    columns = {}
    for j, name in enumerate(names):
        raw = [row[j] for row in data]
        try:
            columns[name] = np.array([int(v) for v in raw], dtype=np.int64)
        except ValueError:
            columns[name] = np.array([float(v) for v in raw])
    return meta, columns


def write_json(path, obj):
    with open(path, "w", newline="\n") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True, default=_json_default)
        fh.write("\n")
    return path


def _json_default(o):
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    raise TypeError(f"not serializable: {type(o).__name__}")


def versions():
    import scipy

    from . import __version__
    return {"twinbeam": __version__, "numpy": np.__version__, "scipy": scipy.__version__,
            "python": platform.python_version()}


@dataclass
class RunManifest:
    """Record of one command-line run; every listed output exists on success."""

    config_hash: str
    subcommand: str
    outputs: list = field(default_factory=list)
    versions: dict = field(default_factory=versions)
    timings: dict = field(default_factory=dict)

    def to_dict(self):
        return asdict(self)


def write_spectral_eigenvalues(path, decomp, meta):
    q = np.arange(decomp.eigenvalues.size, dtype=np.int64)
    return write_csv(path, {"q": q, "lambda_par": decomp.eigenvalues}, meta,
                     {"q": "index", "lambda_par": "1"})


def write_transverse_eigenvalues(path, modes, meta):
    m, l, lam = modes.expanded()
    return write_csv(path, {"m": m.astype(np.int64), "l": l.astype(np.int64), "lambda_perp": lam}, meta,
                     {"m": "index", "l": "index", "lambda_perp": "1"})


def write_cuts(path, coordinate, cuts, meta, coordinate_name, unit):
    """Write several cuts sharing one coordinate axis."""
    columns = {coordinate_name: np.asarray(coordinate)}
    columns.update({name: np.asarray(values) for name, values in cuts.items()})
    units = {coordinate_name: unit}
    units.update({name: "normalized" for name in cuts})
    return write_csv(path, columns, meta, units)


def save_transverse_eigenvalues(path, modes, digest, cut=None):
    """Store eigenvalue-only transverse modes (and an optional cut) as ``.npz``."""
    extra = {}
    if cut is not None:
        extra = {"cut_coordinate": cut.coordinate, "cut_values": cut.values,
                 "cut_reference": np.float64(cut.reference)}
    np.savez(path, digest=np.array(digest), m=modes.m, l=modes.l, eigenvalues=modes.eigenvalues,
             grid_nodes=modes.grid.nodes, grid_weights=modes.grid.weights,
             grid_kind=np.array(modes.grid.axis_kind), grid_panel_nodes=np.int64(modes.grid.panel_nodes),
             truncation_loss=np.float64(modes.truncation_loss),
             norm_t_perp=np.float64(modes.norm_t_perp), **extra)
    return path


def load_transverse_eigenvalues(path, digest=None):
    """Inverse of :func:`save_transverse_eigenvalues`; returns ``(modes, cut or None)``.

    Returns ``None`` when ``digest`` is given and does not match the stored one.
    """
    from .correlations import Cut
    from .grids import QuadratureGrid
    from .schmidt import TransverseModes

    with np.load(path) as z:
        if digest is not None and str(z["digest"]) != digest:
            return None
        grid = QuadratureGrid(z["grid_nodes"], z["grid_weights"], str(z["grid_kind"]),
                              int(z["grid_panel_nodes"]))
        modes = TransverseModes(z["m"], z["l"], z["eigenvalues"], None, None, grid,
                                float(z["truncation_loss"]), float(z["norm_t_perp"]))
        cut = None
        if "cut_values" in z:
            cut = Cut(z["cut_coordinate"], z["cut_values"], float(z["cut_reference"]),
                      "A_a_s_r_low_gain")
    return modes, cut
