"""Build models from a :class:`RunConfig`, run them and write the requested outputs."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .config import RunConfig
from .contact import ContactLaw
from .energy import EnergyLedger, record
from .exceptions import ConfigError
from .io import snapshot_path, write_audio, write_ledger, write_snapshot
from .lumped import LumpedSpec, energy_row, init_lumped, step_lumped
from .membrane import (MalletMembraneModel, MalletSpec, MembraneSpec, StringMembraneModel, StringMembraneSpec,
                       bilinear_sampling, energy_2d, init_mallet_membrane, init_string_membrane,
                       stable_grid_spacing_membrane, step_mallet_membrane, step_string_membrane)
from .reed import (BoreProfile, ReedBoreModel, ReedSpec, energy_reed_bore, init_reed_bore, ramped_pressure,
                   stable_grid_spacing_bore, step_reed_bore)
from .strings import (BarrierSpec, HammerSpec, StringSpec, energy_string, hammer_distribution, init_hammer_string,
                      init_string_barrier, make_grid, parabolic_barrier, readout, stable_grid_spacing_string,
                      step_hammer_string, step_hammer_string_nonconservative, step_string_barrier, triangle_shape)

__all__ = ["Simulation", "RunResult", "build", "check", "simulate", "run"]


@dataclass
class Simulation:
    """A configured model: ``advance`` steps the state, ``row``/``sample``/``field`` observe it."""

    cfg: RunConfig
    info: dict
    state: object
    advance: callable = field(repr=False)
    row: callable = field(repr=False)
    sample: callable = field(repr=False)
    field: callable = field(repr=False)


def _law(p, beta=0.0) -> ContactLaw:
    return ContactLaw.power_law(p["contact.K"], p["contact.alpha"], beta)


def _string_spec(p, k) -> StringSpec:
    return StringSpec(rho=p["string.rho"], T=p["string.T"], E=p["string.E"], r=p["string.r"],
                      sigma0=p["string.sigma0"], sigma1=p["string.sigma1"], L=p["string.L"], k=k)


def _membrane_spec(p, k) -> MembraneSpec:
    return MembraneSpec(rho=p["membrane.rho"], T=p["membrane.T"], sigma0=p["membrane.sigma0"], L=p["membrane.L"], k=k)


def _point_reader(N, h, L, x, y):
    if not (0.0 <= x <= 1.0 and 0.0 <= y <= 1.0):
        raise ConfigError("readout point must lie on the membrane")
    row = bilinear_sampling(N, h, np.array([[x * L, y * L]]))
    return lambda w: float((row @ w.ravel())[0])


def _build_lumped(cfg: RunConfig) -> Simulation:
    p = cfg.params
    spec = LumpedSpec(M=p["mass.M"], u0=p["mass.u0"], v0=p["mass.v0"], law=_law(p, p["contact.beta"]),
                      k=cfg.k, steps=cfg.steps)
    info = {"dof": 1}
    return Simulation(cfg, info, init_lumped(spec), lambda s: step_lumped(spec, s), lambda s: energy_row(spec, s),
                      lambda s: s.u_now, lambda s: (np.array([s.u_now]), math.nan))


def _build_hammer(cfg: RunConfig) -> Simulation:
    p = cfg.params
    spec = _string_spec(p, cfg.k)
    grid = make_grid(spec, p["string.N"] or None)
    hammer = HammerSpec(M=p["hammer.M"], position=p["hammer.position"], v_in=p["hammer.v"], law=_law(p),
                        width=p["hammer.width"])
    g = hammer_distribution(grid, spec.L, hammer.position, hammer.width)
    schemes = {"conservative": step_hammer_string, "explicit": step_hammer_string_nonconservative}
    if p["hammer.scheme"] not in schemes:
        raise ConfigError(f"hammer.scheme must be one of {', '.join(schemes)}, got {p['hammer.scheme']!r}")
    stepper = schemes[p["hammer.scheme"]]
    info = {"h_min": stable_grid_spacing_string(spec), "N": grid.N, "h": grid.h, "dof": grid.N + 3}
    x = p["readout.x"]
    return Simulation(cfg, info, init_hammer_string(spec, hammer, grid),
                      lambda s: stepper(spec, hammer, grid, g, s), lambda s: energy_string(spec, grid, hammer, s, g),
                      lambda s: readout(grid, s.u, x), lambda s: (s.u, grid.h))


def _build_barrier(cfg: RunConfig) -> Simulation:
    p = cfg.params
    spec = _string_spec(p, cfg.k)
    grid = make_grid(spec, p["string.N"] or None)
    barrier = BarrierSpec(parabolic_barrier(grid, spec.L, p["barrier.peak"], p["barrier.drop"]), _law(p))
    u0 = triangle_shape(grid, spec.L, p["init.position"], p["init.amplitude"])
    info = {"h_min": stable_grid_spacing_string(spec), "N": grid.N, "h": grid.h, "dof": grid.N + 1}
    x = p["readout.x"]
    return Simulation(cfg, info, init_string_barrier(grid, u0, barrier),
                      lambda s: step_string_barrier(spec, barrier, grid, s),
                      lambda s: energy_string(spec, grid, barrier, s), lambda s: readout(grid, s.u, x),
                      lambda s: (s.u, grid.h))


def _build_reed(cfg: RunConfig) -> Simulation:
    p = cfg.params
    k = cfg.k
    reed = ReedSpec(M_r=p["reed.M"], S_r=p["reed.S"], sigma_r=p["reed.sigma"], omega_r=p["reed.omega"],
                    H=p["reed.H"], w=p["reed.w"], law=_law(p), rho=p["air.rho"], c=p["air.c"])
    xb, rb = p["bore.x"], p["bore.r"]
    if len(xb) != len(rb) or len(xb) < 2 or np.any(np.diff(xb) <= 0) or xb[0] != 0.0:
        raise ConfigError("bore.x must start at 0, increase strictly and match bore.r in length")
    h_min = stable_grid_spacing_bore(reed.c, k)
    N = int(math.floor(xb[-1] / h_min))
    if N < 2:
        raise ConfigError(f"bore is too short for the stability limit h_min = {h_min:.6g} m")
    bore = BoreProfile.from_radii(xb, rb, xb[-1], N)
    model = ReedBoreModel.build(reed, bore, k)
    pressure = ramped_pressure(p["mouth.p"], k, cfg.steps + 1, p["mouth.attack"])
    info = {"h_min": h_min, "N": N, "h": bore.h, "dof": N + 2}

    def advance(s):
        return step_reed_bore(model, s, pressure[s.step])

    return Simulation(cfg, info, init_reed_bore(model), advance, lambda s: energy_reed_bore(model, s),
                      lambda s: s.p_in, lambda s: (s.Psi, bore.h))


def _build_mallet(cfg: RunConfig) -> Simulation:
    p = cfg.params
    mem = _membrane_spec(p, cfg.k)
    mallet = MalletSpec(M=p["mallet.M"], x=p["mallet.x"], y=p["mallet.y"], v_in=p["mallet.v"], law=_law(p),
                        radius=p["mallet.radius"])
    model = MalletMembraneModel.build(mem, mallet, p["membrane.N"] or None)
    read = _point_reader(model.N, model.h, mem.L, p["readout.x"], p["readout.y"])
    info = {"h_min": stable_grid_spacing_membrane(mem), "N": model.N, "h": model.h, "dof": (model.N + 1) ** 2 + 1}
    return Simulation(cfg, info, init_mallet_membrane(model), lambda s: step_mallet_membrane(model, s),
                      lambda s: energy_2d(model, s), lambda s: read(s.w), lambda s: (s.w, model.h))


def _build_string_membrane(cfg: RunConfig) -> Simulation:
    p = cfg.params
    spec = StringMembraneSpec(_string_spec(p, cfg.k), _membrane_spec(p, cfg.k), _law(p),
                              start=(p["coupling.x0"], p["coupling.y0"]), angle=p["coupling.angle"],
                              gap=p["coupling.gap"], attached=p["coupling.attached"])
    model = StringMembraneModel.build(spec, p["string.N"] or None, p["membrane.N"] or None)
    x = model.sgrid.x
    v0 = p["init.v"] * np.sin(np.pi * x / spec.string.L)
    state = init_string_membrane(model, v0=v0)
    read = _point_reader(model.N, model.h, spec.membrane.L, p["readout.x"], p["readout.y"])
    info = {"h_min": stable_grid_spacing_membrane(spec.membrane), "N": model.N, "h": model.h,
            "h_min_string": stable_grid_spacing_string(spec.string), "N_string": model.sgrid.N,
            "dof": (model.N + 1) ** 2 + model.sgrid.N + 1 + model.M.size}
    return Simulation(cfg, info, state, lambda s: step_string_membrane(model, s), lambda s: energy_2d(model, s),
                      lambda s: read(s.w), lambda s: (s.w, model.h))


_BUILDERS = {
    "lumped": _build_lumped,
    "hammer_string": _build_hammer,
    "string_barrier": _build_barrier,
    "reed_bore": _build_reed,
    "mallet_membrane": _build_mallet,
    "string_membrane": _build_string_membrane,
}


def build(cfg: RunConfig) -> Simulation:
    """Validate ``cfg`` against every model invariant (stability limits included) and set up the run."""
    return _BUILDERS[cfg.model](cfg)


def check(cfg: RunConfig) -> dict:
    """Grid summary and a rough memory estimate in bytes, without stepping."""
    sim = build(cfg)
    info = dict(sim.info)
    ncols = len(sim.row(sim.state).components) + 6
    info["steps"] = cfg.steps
    info["memory_bytes"] = int(8 * (4 * sim.info["dof"] + cfg.steps * (ncols + 1)))
    return info


@dataclass
class RunResult:
    status: int
    ledger: EnergyLedger
    audio: np.ndarray
    info: dict
    files: list = field(default_factory=list)
    gain: float = 1.0


def simulate(cfg: RunConfig, snapshot=None) -> tuple[EnergyLedger, np.ndarray, dict]:
    """Step ``cfg.steps`` times from the two-level start; ``snapshot(step, t, field, h)`` is called at the stride."""
    sim = build(cfg)
    state = sim.state
    ledger = EnergyLedger(cfg.k)
    record(ledger, sim.row(state))
    audio = np.empty(cfg.steps)
    stride = cfg.output.snapshot_stride
    for n in range(cfg.steps):
        if n > 0:
            state = sim.advance(state)
            record(ledger, sim.row(state))
        audio[n] = sim.sample(state)
        if snapshot is not None and stride > 0 and n % stride == 0:
            fld, h = sim.field(state)
            snapshot(state.step, state.step * cfg.k, fld, h)
    return ledger, audio, sim.info


def _resolve(path: str, out_dir) -> Path | None:
    if not path:
        return None
    p = Path(path)
    if out_dir is not None and not p.is_absolute():
        p = Path(out_dir) / p
    p.parent.mkdir(parents=True, exist_ok=True)
    return p


def run(cfg: RunConfig, out_dir=None, normalize: bool | None = None) -> RunResult:
    """Run and write the configured outputs; identical configs give byte-identical files."""
    normalize = cfg.output.normalize if normalize is None else normalize
    files = []
    snap = _resolve(cfg.output.snapshot, out_dir)

    def on_snapshot(step, t, fld, h):
        files.append(write_snapshot(snapshot_path(snap, step), fld, step, t, h))

    ledger, audio, info = simulate(cfg, on_snapshot if snap is not None else None)
    gain = 1.0
    if normalize:
        peak = float(np.max(np.abs(audio), initial=0.0))
        gain = 1.0 / peak if peak > 0 else 1.0
    audio_path = _resolve(cfg.output.audio, out_dir)
    if audio_path is not None:
        files.append(write_audio(audio_path, audio * gain, cfg.sample_rate))
    ledger_path = _resolve(cfg.output.ledger, out_dir)
    if ledger_path is not None:
        files.append(write_ledger(ledger_path, ledger, {"normalize_gain": gain} if normalize else None))
    return RunResult(0, ledger, audio, info, files, gain)
