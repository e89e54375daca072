"""Handle CSV table output with a reproducibility header
"""
import csv
import enum
import sys
import logging
import numpy as np
from mpi4py import MPI
from .logger import Logger
from .version import __version__


def format_value(value):
    """Text of one CSV cell or metadata value

    Floats are written with :code:`repr`, which round-trips exactly, so that
    tables from identical runs are byte-identical.
    """
    if isinstance(value, enum.Enum):
        return str(value.value)
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if value is None:
        return ""
    return str(value)


def metadata_lines(config, extra=None):
    """:code:`#`-prefixed header lines describing a run

    Parameters
    ----------
    config : Config
        Configuration object, all model and numerics fields are dumped.
    extra : dict, optional
        Additional :code:`key = value` pairs, e.g. figure axes or the PHP
        retention verdict.

    Returns
    -------
    lines : list[str]
    """
    lines = [
        f"# emfhole {__version__}",
        f"# command = {config.command_line_full or ''}",
    ]
    for key, value in config.metadata().items():
        lines.append(f"# {key} = {format_value(value)}")
    for key, value in (extra or {}).items():
        if isinstance(value, (list, tuple, np.ndarray)):
            value = " ".join(format_value(v) for v in value)
        else:
            value = format_value(value)
        lines.append(f"# {key} = {value}")
    return lines


def _write(out_file, header, rows, lines):
    for line in lines:
        out_file.write(line + "\n")
    writer = csv.writer(out_file, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([format_value(v) for v in row])


def write_table(header, rows, config, out=None, extra=None,
                comm=MPI.COMM_WORLD):
    """Write a CSV table preceded by the metadata block

    Only the root rank writes.

    Parameters
    ----------
    header : list[str]
        Column names.
    rows : iterable of sequence
        Table rows, written in the given order.
    config : Config
        Configuration object recorded in the metadata block.
    out : str, optional
        Output file path. Standard output is used if not given.
    extra : dict, optional
        Additional metadata.
    comm : mpi4py.Comm, optional
        MPI communicator to use for rank commuication.
    """
    if comm.Get_rank() != 0:
        return
    rows = list(rows)
    lines = metadata_lines(config, extra)
    if out is None:
        _write(sys.stdout, header, rows, lines)
        sys.stdout.flush()
    else:
        with open(out, "w", newline="") as out_file:
            _write(out_file, header, rows, lines)
    Logger.rank0.log(
        logging.INFO,
        f"Wrote {len(rows)} rows to {out if out is not None else 'stdout'}",
    )


def write_pattern_csv(bs, holes, config, out=None, extra=None,
                      comm=MPI.COMM_WORLD):
    """Write one network realization as rows of :code:`(x, y, kind)`

    Parameters
    ----------
    bs : PointPattern
        Retained BSs, written with kind :code:`bs`.
    holes : PointPattern
        Exclusion zone centers, written with kind :code:`hole`.
    config : Config
    out : str, optional
    extra : dict, optional
    comm : mpi4py.Comm, optional
    """
    rows = [(x, y, "bs") for x, y in bs.points]
    rows += [(x, y, "hole") for x, y in holes.points]
    extra = dict(extra or {})
    extra.update(
        window_radius=bs.window_radius, n_bs=len(bs), n_holes=len(holes),
    )
    write_table(("x", "y", "kind"), rows, config, out, extra, comm)
