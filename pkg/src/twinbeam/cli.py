"""Command-line runner: ``twinbeam SUBCOMMAND --config PATH --out DIR``.

Exit codes: 0 success, 2 configuration error, 3 numeric error, 4 I/O error.
Outputs of a failed run are removed.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
import time
from pathlib import Path

import numpy as np

SUBCOMMANDS = ("schmidt", "spectrum", "temporal", "farfield", "nearfield", "dimensionality", "sweep",
               "all")
CUT_POWERS = (1e-7, 2e-2)
EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_IO = 0, 2, 3, 4
NEEDS_MODES = {"farfield", "nearfield", "dimensionality", "all"}


def _power_tag(p):
    return f"{p:.0e}W".replace("+", "")


class Runner:
    """Runs subcommands for one configuration and records written files."""

    def __init__(self, cfg, out_dir, subcommand, progress=None):
        from . import io, pipeline

        self.cfg = cfg
        self.out = Path(out_dir)
        self.io = io
        self.pipeline = pipeline
        self.manifest = io.RunManifest(cfg.digest(), subcommand)
        self.progress = progress
        self._analysis = None
        self._reports = {}
        self.modes = subcommand in NEEDS_MODES

    # infrastructure ---------------------------------------------------------
    @property
    def analysis(self):
        if self._analysis is None:
            t0 = time.perf_counter()
            model = self.pipeline.build_model(self.cfg, compute_modes=self.modes)
            self.manifest.timings["build_model"] = time.perf_counter() - t0
            self._analysis = self.pipeline.Analysis(model)
        return self._analysis

    def meta(self, **extra):
        c = self.cfg
        out = {"config_hash": c.digest(), "pump_beam_radius_m": repr(c.pump.beam_radius_wp),
               "crystal_length_m": repr(c.crystal.length_L)}
        out.update(extra)
        return out

    def path(self, name):
        p = self.out / name
        self.manifest.outputs.append(str(p))
        return p

    def write(self, name, columns, units, **meta):
        return self.io.write_csv(self.path(name), columns, self.meta(**meta), units)

    def stage(self, name, fn):
        t0 = time.perf_counter()
        try:
            fn()
        except Exception as exc:
            exc.args = (f"[{name}] " + (str(exc.args[0]) if exc.args else type(exc).__name__),) + exc.args[1:]
            raise
        self.manifest.timings[name] = time.perf_counter() - t0

    def powers(self):
        return self.cfg.sweep.powers()

    def report(self, power, **kw):
        key = (float(power), tuple(sorted(kw.items())))
        if key not in self._reports:
            self._reports[key] = self.analysis.report(power, **kw)
        return self._reports[key]

    # subcommands -----------------------------------------------------------
    def schmidt(self):
        a = self.analysis
        m = a.model
        self.io.write_spectral_eigenvalues(self.path("spectral_eigenvalues.csv"), m.spectral, self.meta(
            schmidt_number=repr(m.spectral.schmidt_number)))
        modes = m.transverse
        self.io.write_transverse_eigenvalues(self.path("transverse_eigenvalues.csv"), modes, self.meta(
            truncation_loss=repr(modes.truncation_loss)))
        d = m.density
        centers = 0.5 * (d.bin_edges[:-1] + d.bin_edges[1:])
        counts = np.rint(d.density * np.diff(d.bin_edges)).astype(np.int64)
        self.write("eigenvalue_density.csv", {"lambda_perp": centers, "rho": d.density, "count": counts},
                   {"lambda_perp": "1", "rho": "modes per unit eigenvalue", "count": "modes"},
                   total_mode_count=d.total_mode_count)

    def spectrum(self):
        a = self.analysis
        omega0 = float(a.model.spectral.grid_s.nodes[a.spectral_ref])
        rows = {k: [] for k in ("P_p_watts", "g", "n_fwhm", "A_fwhm", "C_fwhm", "A_a_fwhm")}
        for p in self.powers():
            c = a.spectral_cuts(p)
            rows["P_p_watts"].append(p)
            rows["g"].append(a.model.state(p).top_gain)
            rows["n_fwhm"].append(c["n_s_omega"].fwhm())
            rows["A_fwhm"].append(c["A_s_omega"].fwhm(anchored=True))
            rows["C_fwhm"].append(c["C_omega"].fwhm(anchored=True))
            rows["A_a_fwhm"].append(c["A_a_s_omega"].fwhm(anchored=True))
        self.write("spectral_widths.csv", rows, {"P_p_watts": "W", "g": "1", "n_fwhm": "rad/s",
                                                 "A_fwhm": "rad/s", "C_fwhm": "rad/s",
                                                 "A_a_fwhm": "rad/s"})
        for p in CUT_POWERS:
            c = a.spectral_cuts(p)
            x = c["n_s_omega"].coordinate - omega0
            self.io.write_cuts(self.path(f"spectral_cuts_{_power_tag(p)}.csv"), x,
                               {k: _ref_normalized(v) for k, v in c.items()},
                               self.meta(pump_power_W=repr(p)), "omega_offset", "rad/s")

    def temporal(self):
        a = self.analysis
        rows = {k: [] for k in ("P_p_watts", "g", "I_fwhm", "A_fwhm", "C_fwhm", "A_a_fwhm", "peak_time")}
        for p in self.powers():
            c = a.temporal_cuts(p)
            rows["P_p_watts"].append(p)
            rows["g"].append(a.model.state(p).top_gain)
            rows["I_fwhm"].append(c["I_s_t"].fwhm())
            rows["A_fwhm"].append(c["A_s_t"].fwhm(anchored=True))
            rows["C_fwhm"].append(c["C_t"].fwhm(anchored=True))
            rows["A_a_fwhm"].append(c["A_a_s_t"].fwhm(anchored=True))
            rows["peak_time"].append(c["A_s_t"].reference)
        self.write("temporal_widths.csv", rows, {"P_p_watts": "W", "g": "1", "I_fwhm": "s", "A_fwhm": "s",
                                                 "C_fwhm": "s", "A_a_fwhm": "s", "peak_time": "s"})
        for p in CUT_POWERS:
            c = a.temporal_cuts(p)
            self.io.write_cuts(self.path(f"temporal_cuts_{_power_tag(p)}.csv"), c["I_s_t"].coordinate,
                               {k: _ref_normalized(v) for k, v in c.items()},
                               self.meta(pump_power_W=repr(p)), "t", "s")

    def farfield(self):
        a = self.analysis
        names = ("n_fwhm", "A_fwhm", "C_fwhm", "A_a_fwhm", "A_phi_fwhm", "C_phi_fwhm", "A_a_phi_fwhm")
        rows = {k: [] for k in ("P_p_watts", "g") + names}
        two_pi = 2 * math.pi
        for p in self.powers():
            c = a.farfield_cuts(p)
            rows["P_p_watts"].append(p)
            rows["g"].append(a.model.state(p).top_gain)
            rows["n_fwhm"].append(c["n_s_k"].fwhm())
            rows["A_fwhm"].append(c["A_s_k"].fwhm(anchored=True))
            rows["C_fwhm"].append(c["C_s_k"].fwhm(anchored=True))
            rows["A_a_fwhm"].append(c["A_a_s_k"].fwhm(anchored=True))
            rows["A_phi_fwhm"].append(c["A_s_phi"].fwhm(anchored=True, period=two_pi))
            rows["C_phi_fwhm"].append(c["C_s_phi"].fwhm(anchored=True, period=two_pi))
            rows["A_a_phi_fwhm"].append(c["A_a_s_phi"].fwhm(anchored=True, period=two_pi))
        units = {k: "1/m" for k in names[:4]}
        units.update({k: "rad" for k in names[4:]})
        units.update({"P_p_watts": "W", "g": "1"})
        self.write("farfield_widths.csv", rows, units)
        for p in CUT_POWERS:
            c = a.farfield_cuts(p)
            radial = {"n_s_k": c["n_s_k"].values}
            radial.update({k: _ref_normalized(c[k]) for k in ("A_s_k", "C_s_k", "A_a_s_k")})
            self.io.write_cuts(self.path(f"farfield_radial_cuts_{_power_tag(p)}.csv"),
                               c["n_s_k"].coordinate, radial, self.meta(pump_power_W=repr(p)), "k_perp", "1/m")
            az = {k: _ref_normalized(c[k]) for k in ("A_s_phi", "C_s_phi", "A_a_s_phi")}
            self.io.write_cuts(self.path(f"farfield_azimuthal_cuts_{_power_tag(p)}.csv"),
                               c["A_s_phi"].coordinate, az, self.meta(pump_power_W=repr(p)), "dphi", "rad")

    def nearfield(self):
        from .correlations import first_moment_width

        a = self.analysis
        names = ("I_fwhm", "A_fwhm", "C_fwhm", "A_first_moment", "C_first_moment", "A_a_fwhm",
                 "A_a_first_moment", "A_psi_fwhm", "C_psi_fwhm", "A_a_psi_fwhm")
        rows = {k: [] for k in ("P_p_watts", "g") + names}
        two_pi = 2 * math.pi
        for p in self.powers():
            c = a.nearfield_cuts(p)
            rows["P_p_watts"].append(p)
            rows["g"].append(a.model.state(p).top_gain)
            rows["I_fwhm"].append(c["I_s_r"].fwhm(origin_symmetric=True))
            for key, name in (("A_s_r", "A"), ("C_s_r", "C"), ("A_a_s_r", "A_a")):
                cut = c[key]
                rows[f"{name}_fwhm"].append(cut.fwhm(anchored=True))
                if name != "A_a":
                    rows[f"{name}_first_moment"].append(
                        first_moment_width(cut.coordinate, cut.values, cut.reference))
            cut = c["A_a_s_r"]
            rows["A_a_first_moment"].append(first_moment_width(cut.coordinate, cut.values, cut.reference))
            rows["A_psi_fwhm"].append(c["A_s_psi"].fwhm(anchored=True, period=two_pi))
            rows["C_psi_fwhm"].append(c["C_s_psi"].fwhm(anchored=True, period=two_pi))
            rows["A_a_psi_fwhm"].append(c["A_a_s_psi"].fwhm(anchored=True, period=two_pi))
        units = {k: "m" for k in names[:7]}
        units.update({k: "rad" for k in names[7:]})
        units.update({"P_p_watts": "W", "g": "1"})
        self.write("nearfield_widths.csv", rows, units)
        disc, _, _ = a.nearfield_modes()
        for p in CUT_POWERS:
            c = a.nearfield_cuts(p)
            self.io.write_cuts(self.path(f"nearfield_intensity_{_power_tag(p)}.csv"),
                               c["I_s_r"].coordinate, {"I_s_r": c["I_s_r"].values},
                               self.meta(pump_power_W=repr(p), normalization="int r I dr = 1/2"), "r", "m")
            radial = {k: _ref_normalized(c[k]) for k in ("A_s_r", "C_s_r", "A_a_s_r")}
            self.io.write_cuts(self.path(f"nearfield_radial_cuts_{_power_tag(p)}.csv"),
                               c["A_s_r"].coordinate, radial, self.meta(pump_power_W=repr(p)), "r", "m")
            az = {k: _ref_normalized(c[k]) for k in ("A_s_psi", "C_s_psi", "A_a_s_psi")}
            self.io.write_cuts(self.path(f"nearfield_azimuthal_cuts_{_power_tag(p)}.csv"),
                               c["A_s_psi"].coordinate, az, self.meta(pump_power_W=repr(p)), "dpsi", "rad")
        modes = a.model.transverse
        cols = {}
        for m in (0, 1):
            for l in range(4):
                sel = np.nonzero((modes.m == m) & (modes.l == l))[0]
                if sel.size:
                    cols[f"u_tilde_m{m}_l{l}"] = np.abs(disc.radial_modes[sel[0]]) ** 2
        self.io.write_cuts(self.path("nearfield_modes.csv"), disc.radius_grid.nodes, cols,
                           self.meta(normalization="int r |u|^2 dr = 1"), "r", "m")

    def dimensionality(self):
        rows = None
        for p in self.powers():
            r = self.report(p).row()
            if rows is None:
                rows = {k: [] for k in r}
            for k, v in r.items():
                rows[k].append(v)
        units = {k: "modes" for k in rows}
        units.update({"P_p_watts": "W", "g": "1", "N_s": "photons"})
        self.write("dimensionality.csv", rows, units)

    def sweep(self):
        from .gain import fit_gain

        powers = self.powers()
        reports = [self.report(p, spectral_widths=False, temporal_widths=False, transverse_widths=False)
                   for p in powers]
        n = np.array([r.photon_number for r in reports])
        fit = fit_gain(powers, n)
        cols = {"P_p_watts": powers, "g": fit.g(powers), "N_s": n,
                "N_s_per_mode_Kn": n / np.array([r.K_n for r in reports]),
                "N_s_per_mode_K": n / np.array([r.K for r in reports])}
        self.write("sweep.csv", cols, {"P_p_watts": "W", "g": "1", "N_s": "photons",
                                       "N_s_per_mode_Kn": "photons", "N_s_per_mode_K": "photons"},
                   fit_N_s0=repr(fit.N_s0), fit_g0=repr(fit.g0), fit_residual=repr(fit.residual),
                   fit_max_deviation=repr(fit.max_deviation))

    def run(self, subcommand):
        order = SUBCOMMANDS[:-1] if subcommand == "all" else (subcommand,)
        for name in order:
            self.stage(name, getattr(self, name))
        self.manifest.timings.update({f"model_{k}": v for k, v in self.analysis.model.timings.items()})
        path = self.out / "manifest.json"
        self.manifest.outputs.append(str(path))
        self.io.write_json(path, self.manifest.to_dict())
        return self.manifest


def _ref_normalized(cut):
    """Values divided by the value at the cut's reference point (or the peak)."""
    v = np.abs(cut.values)
    if math.isnan(cut.reference):
        return v / np.max(v)
    return v / v[int(np.argmin(np.abs(cut.coordinate - cut.reference)))]


def build_parser():
    ap = argparse.ArgumentParser(prog="twinbeam", description="Intense twin-beam mode simulations.")
    ap.add_argument("subcommand", choices=SUBCOMMANDS)
    ap.add_argument("--config", required=True, help="configuration file (INI)")
    ap.add_argument("--out", required=True, help="output directory")
    ap.add_argument("--threads", type=int, default=0, help="BLAS threads, 0 = all cores")
    ap.add_argument("--grid-scale", type=float, default=1.0,
                    help="multiplies all grid resolutions (convergence studies)")
    return ap


def _numeric_errors():
    from .dimensionality import VacuumStateError
    from .dispersion import DispersionRangeError, PhaseMatchingError
    from .gain import GainRangeError
    from .kernels import GridCoverageError, HarmonicTruncationError
    from .temporal import TimeWindowError
    return (GridCoverageError, HarmonicTruncationError, TimeWindowError, GainRangeError,
            PhaseMatchingError, DispersionRangeError, VacuumStateError, FloatingPointError,
            np.linalg.LinAlgError, ArithmeticError)


def main(argv=None):
    args = build_parser().parse_args(argv)
    from threadpoolctl import threadpool_limits

    from .config import ConfigError, load_config_file

    try:
        cfg = load_config_file(args.config)
        if args.grid_scale <= 0:
            raise ConfigError("--grid-scale", "must be positive")
        if args.grid_scale != 1.0:
            cfg = cfg.with_grids(grid_scale=cfg.grids.grid_scale * args.grid_scale)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"cannot read configuration: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    out = Path(args.out)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    runner = Runner(cfg, out, args.subcommand)
    code = EXIT_OK
    try:
        with threadpool_limits(limits=args.threads or os.cpu_count()):
            manifest = runner.run(args.subcommand)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        code = EXIT_CONFIG
    except _numeric_errors() as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        code = EXIT_NUMERIC
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        code = EXIT_IO
    if code != EXIT_OK:
        for p in runner.manifest.outputs:
            try:
                os.remove(p)
            except FileNotFoundError:
                pass
        return code
    for p in manifest.outputs:
        print(p)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
