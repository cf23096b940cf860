"""Snapshot writers: CSV for 1-D fields, legacy ASCII VTK for 2-D fields.

Every file starts with the run configuration as ``key=value`` comment lines
so a snapshot can be interpreted without the command that produced it.
Numbers are written with 12 significant digits.
"""

import os

import numpy as np

from .diagnostics import mach_field
from .fluid import to_moments
from .velocity import heat_flux, moments


def snapshot_name(t, ext):
    return f"snap_t{t:.6g}.{ext}"


def _fmt(v):
    return f"{v:.12g}"


def write_snapshot(out_dir, t, f, setup, cfg):
    if setup.sgrid.d_x == 1:
        return write_csv_snapshot(os.path.join(out_dir, snapshot_name(t, "csv")), t, f, setup, cfg)
    return write_vtk_snapshot(os.path.join(out_dir, snapshot_name(t, "vtk")), t, f, setup, cfg)


def write_csv_snapshot(path, t, f, setup, cfg):
    vgrid = setup.vgrid
    m = moments(f, vgrid)
    q = heat_flux(f, m, vgrid, cfg.eps)
    x = setup.sgrid.centers()
    u = m.u
    uy = u[:, 1] if u.shape[1] > 1 else np.zeros_like(x)
    cols = [x, m.rho, u[:, 0], uy, m.T, q[:, 0]]
    _write_table(path, t, cfg, ("x", "rho", "u_x", "u_y", "T", "Q1_x"), cols)
    return path


def write_fluid_snapshot(out_dir, t, U, setup, cfg):
    """Reference-solver profile written next to the kinetic snapshots."""
    path = os.path.join(out_dir, "ref_" + snapshot_name(t, "csv"))
    m = to_moments(U)
    x = setup.sgrid.centers()
    u = m.u
    uy = u[:, 1] if u.shape[1] > 1 else np.zeros_like(x)
    _write_table(path, t, cfg, ("x", "rho", "u_x", "u_y", "T"), [x, m.rho, u[:, 0], uy, m.T])
    return path


def _write_table(path, t, cfg, names, cols):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"# t={_fmt(t)}\n")
        for line in cfg.echo():
            fh.write(f"# {line}\n")
        fh.write(",".join(names) + "\n")
        for row in zip(*cols):
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def write_vtk_snapshot(path, t, f, setup, cfg):
    sgrid, vgrid = setup.sgrid, setup.vgrid
    fluid = sgrid.fluid
    m = moments(f, vgrid)
    with np.errstate(invalid="ignore", divide="ignore"):
        mach = np.where(fluid, mach_field(m), 0.0)
    rho = np.where(fluid, m.rho, 0.0)
    T = np.where(fluid, m.T, 0.0)
    nx, ny = sgrid.n
    npts = nx * ny
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("# vtk DataFile Version 3.0\n")
        # the title line must be a single line of at most 256 characters
        fh.write(f"esbgk {cfg.scenario} t={_fmt(t)} eps={_fmt(cfg.eps)} nu={_fmt(cfg.nu)}"[:255] + "\n")
        fh.write("ASCII\nDATASET STRUCTURED_POINTS\n")
        fh.write(f"DIMENSIONS {nx} {ny} 1\n")
        x0, y0 = sgrid.centers(0)[0], sgrid.centers(1)[0]
        fh.write(f"ORIGIN {_fmt(x0)} {_fmt(y0)} 0\n")
        fh.write(f"SPACING {_fmt(sgrid.dx[0])} {_fmt(sgrid.dx[1])} 1\n")
        fh.write(f"POINT_DATA {npts}\n")
        for name, arr in (("rho", rho), ("mach", mach), ("T", T), ("solid", (~fluid).astype(float))):
            fh.write(f"SCALARS {name} double 1\nLOOKUP_TABLE default\n")
            # VTK orders points with x varying fastest
            for v in arr.T.ravel():
                fh.write(_fmt(v) + "\n")
        fh.write("FIELD config 1\n")
        echo = ";".join(cfg.echo()).replace(" ", "_")
        fh.write(f"config_echo 1 1 string\n{echo}\n")
    return path


def read_table(path):
    """Load a CSV table written by this package into ``{column: array}``."""
    with open(path, encoding="utf-8") as fh:
        lines = [ln for ln in fh if not ln.startswith("#")]
    names = lines[0].strip().split(",")
    data = np.loadtxt(lines[1:], delimiter=",", ndmin=2)
    return {n: data[:, k] for k, n in enumerate(names)}
