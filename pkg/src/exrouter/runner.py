"""Run configuration, engine dispatch and parameter sweeps."""

from __future__ import annotations

import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import fermion, spin
from .errors import ValidationError
from .network import NetworkSpec, ReceiverSpec, check

ENGINES = ("fermion", "spin")
SWEEP_PARAMETERS = ("contact", "J_s")


@dataclass(frozen=True)
class Sweep:
    parameter: str
    values: tuple[float, ...]
    tie_jr: bool = True  # J_s sweeps also retune the target receiver


@dataclass(frozen=True)
class RunConfig:
    network: NetworkSpec
    engine: str = "fermion"
    t_max: float | None = None  # defaults to 50 / J0
    samples: int = 2001
    sweep: Sweep | None = None
    output: str | None = None
    tol: float = spin.DEFAULT_TOL
    target: int | None = None

    @property
    def horizon(self) -> float:
        return 50.0 / self.network.J0 if self.t_max is None else self.t_max

    def times(self) -> np.ndarray:
        return np.linspace(0.0, self.horizon, self.samples)

    def validate(self) -> list[str]:
        problems = []
        if self.engine not in ENGINES:
            problems.append(f"engine must be one of {ENGINES}, got {self.engine!r}")
        if self.samples < 2:
            problems.append("samples must be >= 2")
        if not self.horizon > 0:
            problems.append("t_max must be > 0")
        if not 0 < self.tol <= 1e-4:
            problems.append("tol must lie in (0, 1e-4]")
        if self.sweep is not None:
            sw = self.sweep
            if sw.parameter not in SWEEP_PARAMETERS:
                problems.append(f"sweep parameter must be one of {SWEEP_PARAMETERS}")
            if not sw.values:
                problems.append("sweep values list is empty")
            for v in sw.values:
                if sw.parameter == "contact" and not (float(v).is_integer() and 1 <= v <= self.network.n_w):
                    problems.append(f"contact {v} outside 1..{self.network.n_w}")
                if sw.parameter == "J_s" and not np.isfinite(v):
                    problems.append(f"J_s value {v} is not finite")
        return problems

    def check(self) -> "RunConfig":
        problems = self.validate()
        if problems:
            raise ValidationError(problems)
        return self

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        allowed = {"network", "engine", "time_grid", "sweep", "output", "tol", "target"}
        unknown = set(d) - allowed
        if unknown:
            raise ValidationError([f"unknown key(s): {sorted(unknown)}"])
        if "network" not in d:
            raise ValidationError(["missing key: network"])
        grid = d.get("time_grid", {})
        sweep = d.get("sweep")
        if sweep is not None:
            sweep = Sweep(sweep["parameter"], tuple(sweep.get("values", ())), bool(sweep.get("tie_jr", True)))
        return cls(
            network=NetworkSpec.from_dict(d["network"]),
            engine=d.get("engine", "fermion"),
            t_max=grid.get("t_max"),
            samples=int(grid.get("samples", 2001)),
            sweep=sweep,
            output=d.get("output"),
            tol=float(d.get("tol", spin.DEFAULT_TOL)),
            target=d.get("target"),
        )

    @classmethod
    def load(cls, path) -> "RunConfig":
        """Read a run config, or a bare network document, from JSON."""
        try:
            d = json.loads(Path(path).read_text(encoding="utf-8"))
        except (OSError, UnicodeDecodeError, json.JSONDecodeError) as exc:
            raise ValidationError([f"cannot read config {path}: {exc}"]) from None
        if not isinstance(d, dict):
            raise ValidationError(["config must be a JSON object"])
        try:
            if "network" in d:
                return cls.from_dict(d)
            return cls(network=NetworkSpec.from_dict(d))
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, ValidationError):
                raise
            raise ValidationError([f"malformed config: {exc}"]) from None


def retarget(spec: NetworkSpec, target: int | None = None, contact=None, J_r=None) -> NetworkSpec:
    """Move or retune the target receiver, creating one if none exists."""
    receivers = list(spec.receivers)
    if not receivers:
        receivers.append(ReceiverSpec(spec.n_w, spec.J_s, True))
    if target is None:
        coupled = spec.coupled_receivers()
        target = coupled[-1] if coupled else len(receivers) - 1
    r = receivers[target]
    receivers[target] = replace(
        r,
        contact=r.contact if contact is None else int(contact),
        J_r=r.J_r if J_r is None else float(J_r),
    )
    return replace(spec, receivers=tuple(receivers))


def simulate(spec: NetworkSpec, engine: str, times, target=None, tol=spin.DEFAULT_TOL):
    check(spec)
    if engine == "fermion":
        return fermion.transfer_fidelity(spec, times, target)
    if engine == "spin":
        return spin.spin_transfer_probability(spec, times, target, tol)
    raise ValueError(f"unknown engine {engine!r}")


def sweep_point(config: RunConfig, value) -> NetworkSpec:
    sw = config.sweep
    spec = config.network
    if sw.parameter == "contact":
        return retarget(spec, config.target, contact=value)
    spec = replace(spec, J_s=float(value))
    return retarget(spec, config.target, J_r=value if sw.tie_jr else None)


def run_sweep(config: RunConfig, threads: int | None = None) -> list[tuple[float, float, float]]:
    """Rows ``(value, peak, t_peak)`` in the order of ``config.sweep.values``."""
    config.check()
    if config.sweep is None:
        raise ValidationError(["config has no sweep"])
    times = config.times()

    def one(value):
        series = simulate(sweep_point(config, value), config.engine, times, config.target, config.tol)
        peak, t_peak = series.peak()
        return float(value), peak, t_peak

    workers = threads or os.cpu_count() or 1
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(one, config.sweep.values))


def sweep_csv(rows) -> str:
    lines = ["value,peak,t_peak"]
    lines += [f"{v:.12g},{p:.12g},{t:.12g}" for v, p, t in rows]
    return "\n".join(lines) + "\n"
