"""
Command-line front end.

    linsta design         robust (or unconstrained) oscillator drive -> JSON report
    linsta simulate       integrate a drive on a system -> CSV t,x1,...
    linsta sweep-spectrum residual energy vs trap frequency -> CSV omega,deltaE
    linsta sweep-cost     energy cost vs protocol duration -> CSV tf,E1
    linsta dissipative    lossy / Brownian transport -> CSV t,x1[,x2] or t,re_alpha,im_alpha
    linsta sense          two-frequency fingerprint drive -> CSV omega,x_f,v_f or JSON

Parameters come from flags, optionally on top of a JSON file given with
``--config``; flags win.  Output goes to ``--out``, else to
``$LINSTA_OUTPUT_DIR/<command>.<ext>`` when that variable is set, else stdout.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import List, Optional

import numpy as np

from . import __version__
from .dissipative import (
    BrownianBead,
    LindbladOscillator,
    alpha_csv,
    coherent_alpha,
    lindblad_to_lti,
    overdamped_to_lti,
    underdamped_to_lti,
)
from .errors import LinstaError
from .ltidyn import LtiSystem, format_float, min_energy_drive, simulate
from .oscillator import RobustnessSpec, Target, e1_min, excitation_spectrum
from .sensing import (
    SensingEntry,
    SensingSpec,
    design_sensing_drive,
    drive_json,
    frequency_sweep,
    regime_warning,
    sweep_csv,
)
from .signal import PolyExpSignal
from .superosc import design_report, design_robust_transport, report_json

COMMANDS = ("design", "simulate", "sweep-spectrum", "sweep-cost", "dissipative", "sense")
OUTPUT_ENV = "LINSTA_OUTPUT_DIR"


@dataclass
class RunConfig:
    command: str = "design"
    omega0: float = 1.0
    tf: float = 10.0
    r: float = 1.0
    phi: float = 0.0
    p: Optional[int] = None
    boundary: bool = False
    realify: str = "mirror"
    normalization: str = "derived"
    # dissipative
    model: str = "lindblad"
    Gamma: float = 0.0
    gamma: float = 1.0
    m: float = 1.0
    D: float = 1.0
    a0_length: float = 1.0
    alpha: bool = False
    # sensing
    frequencies: List[float] = field(default_factory=list)
    r1: float = 1.0
    phi1: float = float(np.pi / 2)
    r2: float = 1.0
    phi2: float = 0.0
    method: str = "ansatz"
    sweep_points: int = 51
    # sweeps and simulation
    tf_range: Optional[str] = None
    omega_range: Optional[str] = None
    steps: int = 1000
    x0: Optional[List[float]] = None
    drive: Optional[str] = None
    system: Optional[str] = None
    design: Optional[str] = None
    # output
    out: Optional[str] = None
    format: str = "csv"


@dataclass(frozen=True)
class Diagnostic:
    level: str  # "error" or "warning"
    field: str
    message: str

    def __str__(self):
        return f"{self.level}: {self.field}: {self.message}"


# ---------------------------------------------------------------------------
# parsing helpers
# ---------------------------------------------------------------------------


def parse_range(text: str) -> np.ndarray:
    """``"start:stop:step"`` -> inclusive grid ``start + k step``."""
    parts = [float(x) for x in text.split(":")]
    if len(parts) != 3:
        raise ValueError("range must be start:stop:step")
    a, b, h = parts
    if h <= 0 or b < a:
        raise ValueError("range needs step > 0 and stop >= start")
    n = int(np.floor((b - a) / h + 1e-9)) + 1
    return a + h * np.arange(n)


def _float_list(text: str) -> List[float]:
    return [float(x) for x in text.split(",") if x.strip()]


def _check_range(diags, name, text):
    try:
        parse_range(text)
    except ValueError as exc:
        diags.append(Diagnostic("error", name, str(exc)))


def validate(config: RunConfig) -> List[Diagnostic]:
    """Diagnostics for ``config``; ``run`` rejects any of level ``error``."""
    d: List[Diagnostic] = []
    c = config
    if c.command not in COMMANDS:
        return [Diagnostic("error", "command", f"unknown command {c.command!r}")]
    if c.format not in ("csv", "json"):
        d.append(Diagnostic("error", "format", "must be csv or json"))

    def positive(name):
        v = getattr(c, name)
        if v is None or not np.isfinite(v) or not v > 0:
            d.append(Diagnostic("error", name, f"must be positive, got {v}"))

    if c.command in ("design", "sweep-spectrum", "sweep-cost", "dissipative", "simulate"):
        positive("omega0")
    if c.command in ("design", "sweep-spectrum", "dissipative", "sense"):
        positive("tf")
    if c.command in ("design", "sweep-spectrum", "sweep-cost", "dissipative"):
        if c.r is None or not c.r >= 0:
            d.append(Diagnostic("error", "r", f"must be nonnegative, got {c.r}"))
    if c.p is not None and not 0 <= c.p <= 4:
        d.append(Diagnostic("error", "p", f"robustness order must lie in 0..4, got {c.p}"))
    if c.realify not in ("mirror", "average"):
        d.append(Diagnostic("error", "realify", "must be mirror or average"))
    if c.normalization not in ("derived", "paper"):
        d.append(Diagnostic("error", "normalization", "must be derived or paper"))
    if c.steps < 2:
        d.append(Diagnostic("error", "steps", "must be at least 2"))

    if c.command == "sweep-cost":
        if not c.tf_range:
            d.append(Diagnostic("error", "tf_range", "required for sweep-cost"))
        else:
            try:
                if parse_range(c.tf_range)[0] <= 0:
                    d.append(Diagnostic("error", "tf_range", "durations must be positive"))
            except ValueError as exc:
                d.append(Diagnostic("error", "tf_range", str(exc)))
    if c.omega_range:
        _check_range(d, "omega_range", c.omega_range)
    if c.command == "simulate" and not c.drive and not c.design:
        d.append(Diagnostic("error", "drive", "simulate needs --drive or --design"))
    for name in ("drive", "system", "design"):
        path = getattr(c, name)
        if path and not Path(path).is_file():
            d.append(Diagnostic("error", name, f"file not found: {path}"))
    if c.command == "dissipative":
        if c.model not in ("lindblad", "overdamped", "underdamped"):
            d.append(Diagnostic("error", "model", "must be lindblad, overdamped or underdamped"))
        if c.Gamma < 0:
            d.append(Diagnostic("error", "Gamma", f"must be nonnegative, got {c.Gamma}"))
        for name in ("gamma", "m", "D", "a0_length"):
            positive(name)
    if c.command == "sense":
        freqs = c.frequencies
        if len(freqs) < 2:
            d.append(Diagnostic("error", "frequencies", "sensing needs at least two frequencies"))
        elif any(not w > 0 for w in freqs):
            d.append(Diagnostic("error", "frequencies", "must be positive"))
        elif len(set(freqs)) != len(freqs):
            d.append(Diagnostic("error", "frequencies", "must be distinct"))
        if c.method not in ("ansatz", "least_norm"):
            d.append(Diagnostic("error", "method", "must be ansatz or least_norm"))
        if c.sweep_points < 2:
            d.append(Diagnostic("error", "sweep_points", "must be at least 2"))
        if not d:
            msg = regime_warning(_sensing_spec(c))
            if msg:
                d.append(Diagnostic("warning", "tf", msg))
    return d


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def _robust_spec(c: RunConfig, p: int, tf: float) -> RobustnessSpec:
    return RobustnessSpec(p, c.omega0, Target(c.r, c.phi, c.omega0), tf, c.boundary)


def _design(c: RunConfig, tf: float = None):
    spec = _robust_spec(c, c.p or 0, c.tf if tf is None else tf)
    return spec, design_robust_transport(spec, c.realify, c.normalization)


def _sensing_spec(c: RunConfig) -> SensingSpec:
    freqs = c.frequencies
    targets = [(c.r1, c.phi1), (c.r2, c.phi2)] + [(c.r2, c.phi2)] * (len(freqs) - 2)
    return SensingSpec(
        tuple(SensingEntry(w, Target(r, phi, w)) for w, (r, phi) in zip(freqs, targets)), c.tf
    )


def _csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([format_float(v) for v in row])
    return buf.getvalue()


def _load_drive(path: str) -> PolyExpSignal:
    data = json.loads(Path(path).read_text())
    if "drive" in data and "terms" not in data:
        data = data["drive"]
    return PolyExpSignal.from_dict(data)


def cmd_design(c: RunConfig) -> str:
    spec, drive = _design(c)
    traj = simulate(LtiSystem.oscillator(c.omega0), drive.signal, steps=c.steps)
    return report_json(design_report(drive, spec, traj.final))


def cmd_simulate(c: RunConfig) -> str:
    drive = _load_drive(c.drive or c.design)
    if c.system:
        sys_ = LtiSystem.from_json(Path(c.system).read_text())
    else:
        sys_ = LtiSystem.oscillator(c.omega0)
    traj = simulate(sys_, drive, x0=c.x0, steps=c.steps)
    if c.format == "json":
        return json.dumps({"t": traj.times.tolist(), "states": traj.states.tolist()})
    return traj.to_csv()


def cmd_sweep_spectrum(c: RunConfig) -> str:
    if c.design:
        data = json.loads(Path(c.design).read_text())
        s = data["spec"]
        target = Target(s["r"], s["phi"], s["omega0"])
        x0 = PolyExpSignal.from_dict(data["trap_position"])
        omega0 = s["omega0"]
    else:
        spec, drive = _design(c)
        target, x0, omega0 = spec.target, drive.trap_position, c.omega0
    omegas = parse_range(c.omega_range) if c.omega_range else omega0 * (0.5 + 0.01 * np.arange(101))
    dE = excitation_spectrum(x0, target, omegas)
    return _csv(["omega", "deltaE"], zip(omegas, dE))


def cmd_sweep_cost(c: RunConfig) -> str:
    tfs = parse_range(c.tf_range)
    if c.p is None:
        target = Target(c.r, c.phi, c.omega0)
        costs = [e1_min(target, tf) for tf in tfs]
    else:
        costs = [_design(c, tf)[1].energy for tf in tfs]
    return _csv(["tf", "E1"], zip(tfs, costs))


def cmd_dissipative(c: RunConfig) -> str:
    target = Target(c.r, c.phi, c.omega0)
    if c.model == "lindblad":
        osc = LindbladOscillator(c.omega0, c.Gamma, c.a0_length)
        sys_ = lindblad_to_lti(osc)
        xf = target.state
    elif c.model == "underdamped":
        sys_ = underdamped_to_lti(BrownianBead(c.m, c.omega0, c.gamma, c.D))
        xf = target.state
    else:
        sys_ = overdamped_to_lti(BrownianBead(c.m, c.omega0, c.gamma, c.D))
        xf = [target.x_f]
    drive = min_energy_drive(sys_, np.zeros(sys_.n), xf, c.tf)[0]
    traj = simulate(sys_, drive, steps=c.steps)
    if c.model == "lindblad" and c.alpha:
        return alpha_csv(traj.times, coherent_alpha(osc, drive, traj.times))
    return traj.to_csv()


def cmd_sense(c: RunConfig) -> str:
    spec = _sensing_spec(c)
    drive = design_sensing_drive(spec, c.method, warn=False)
    if c.format == "json":
        return drive_json(drive)
    if c.omega_range:
        omegas = parse_range(c.omega_range)
    else:
        omegas = np.linspace(spec.omegas.min(), spec.omegas.max(), c.sweep_points)
    return sweep_csv(omegas, frequency_sweep(drive, omegas))


HANDLERS = {
    "design": cmd_design,
    "simulate": cmd_simulate,
    "sweep-spectrum": cmd_sweep_spectrum,
    "sweep-cost": cmd_sweep_cost,
    "dissipative": cmd_dissipative,
    "sense": cmd_sense,
}


def _output_path(c: RunConfig) -> Optional[Path]:
    if c.out:
        return Path(c.out)
    base = os.environ.get(OUTPUT_ENV)
    if base:
        ext = "json" if c.command == "design" or c.format == "json" else "csv"
        return Path(base) / f"{c.command}.{ext}"
    return None


def run(config: RunConfig, stdout=None, stderr=None) -> int:
    """Execute ``config``; returns 0 on success, 2 on invalid config, 3 on numerical failure."""
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    diags = validate(config)
    for dg in diags:
        print(dg, file=stderr)
    if any(dg.level == "error" for dg in diags):
        return 2
    try:
        text = HANDLERS[config.command](config)
    except LinstaError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=stderr)
        return 3
    path = _output_path(config)
    if path is None:
        stdout.write(text)
        return 0
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)
    meta = {"linsta_version": __version__, "config": asdict(config)}
    path.with_name(path.name + ".meta.json").write_text(json.dumps(meta, indent=2, sort_keys=True))
    return 0


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="linsta", description=__doc__.split("\n\n")[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--config", help="JSON file of parameters (flags override)")
        sp.add_argument("--out", help="output file")
        sp.add_argument("--format", choices=("csv", "json"))
        sp.add_argument("--omega0", type=float)
        sp.add_argument("--tf", type=float)
        sp.add_argument("--steps", type=int)

    def target(sp):
        sp.add_argument("--r", "--d", dest="r", type=float, help="target amplitude (d for transport)")
        sp.add_argument("--phi", type=float)

    def design_opts(sp):
        sp.add_argument("--p", type=int, help="robustness order 0..4")
        sp.add_argument("--boundary", action="store_const", const=True, help="impose trap endpoint conditions")
        sp.add_argument("--realify", choices=("mirror", "average"))
        sp.add_argument("--normalization", choices=("derived", "paper"))

    sp = sub.add_parser("design", help="design a robust drive")
    common(sp), target(sp), design_opts(sp)

    sp = sub.add_parser("simulate", help="simulate a stored drive")
    common(sp)
    sp.add_argument("--drive", help="signal JSON (or design report)")
    sp.add_argument("--design", help="design report JSON")
    sp.add_argument("--system", help='system JSON {"A": [[...]], "B": [[...]]}')
    sp.add_argument("--x0", type=_float_list, help="initial state, comma separated")

    sp = sub.add_parser("sweep-spectrum", help="residual energy vs frequency")
    common(sp), target(sp), design_opts(sp)
    sp.add_argument("--design", help="design report JSON to sweep instead of designing inline")
    sp.add_argument("--omega-range", dest="omega_range")

    sp = sub.add_parser("sweep-cost", help="energy cost vs duration")
    common(sp), target(sp), design_opts(sp)
    sp.add_argument("--tf-range", dest="tf_range")

    sp = sub.add_parser("dissipative", help="lossy and Brownian transport")
    common(sp), target(sp)
    sp.add_argument("--model", choices=("lindblad", "overdamped", "underdamped"))
    sp.add_argument("--Gamma", type=float, help="Lindblad loss rate")
    sp.add_argument("--gamma", type=float, help="friction coefficient")
    sp.add_argument("--m", type=float)
    sp.add_argument("--D", type=float)
    sp.add_argument("--a0-length", dest="a0_length", type=float)
    sp.add_argument("--alpha", action="store_const", const=True, help="write coherent amplitude instead")

    sp = sub.add_parser("sense", help="fingerprint sensing drive")
    common(sp)
    sp.add_argument("--omega1", type=float)
    sp.add_argument("--omega2", type=float)
    sp.add_argument("--frequencies", type=_float_list)
    sp.add_argument("--r1", type=float)
    sp.add_argument("--phi1", type=float)
    sp.add_argument("--r2", type=float)
    sp.add_argument("--phi2", type=float)
    sp.add_argument("--method", choices=("ansatz", "least_norm"))
    sp.add_argument("--sweep-points", dest="sweep_points", type=int)
    sp.add_argument("--omega-range", dest="omega_range")
    return parser


def config_from_args(argv=None) -> RunConfig:
    args = vars(build_parser().parse_args(argv))
    values = {}
    if args.get("config"):
        values.update(json.loads(Path(args["config"]).read_text()))
    known = {f.name for f in fields(RunConfig)}
    unknown = set(values) - known - {"omega1", "omega2", "d"}
    if unknown:
        raise SystemExit(f"unknown config keys: {sorted(unknown)}")
    if "d" in values:
        values.setdefault("r", values.pop("d"))
    for key, val in args.items():
        if val is not None and key != "config":
            values[key] = val
    w1, w2 = values.pop("omega1", None), values.pop("omega2", None)
    if w1 is not None or w2 is not None:
        values["frequencies"] = [w for w in (w1, w2) if w is not None]
    return RunConfig(**{k: v for k, v in values.items() if k in known})


def main(argv=None) -> int:
    return run(config_from_args(argv))


if __name__ == "__main__":
    sys.exit(main())
