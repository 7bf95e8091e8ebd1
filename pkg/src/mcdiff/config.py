"""JSON experiment configuration."""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .errors import ConfigError, MixtureError
from .harness import STANDARD_EPS, Profile, standard_spec
from .mixture import MixtureSpec, PressureLaw

PROFILE_KINDS = ("sine-mixture", "gaussian-bump", "uniform")


def _section(data: dict, name: str) -> dict:
    sec = data.get(name)
    if not isinstance(sec, dict):
        raise ConfigError(f"missing or invalid section {name!r}")
    return sec


def _get(sec: dict, key: str, where: str):
    if key not in sec:
        raise ConfigError(f"missing key {where}.{key}")
    return sec[key]


@dataclass
class ExperimentConfig:
    mixture: dict
    grid: dict
    time: dict
    initial: dict
    sweep: dict = field(default_factory=lambda: {"eps_list": list(STANDARD_EPS),
                                                 "order_band": [1.6, 2.4]})
    check: dict = field(default_factory=lambda: {"samples": 100})
    output: dict = field(default_factory=lambda: {"directory": "out"})

    def __post_init__(self):
        self.validate()

    # construction

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        if not isinstance(data, dict):
            raise ConfigError("config root must be a JSON object")
        kw = {name: _section(data, name) for name in ("mixture", "grid", "time", "initial")}
        for name in ("sweep", "check", "output"):
            if name in data:
                kw[name] = _section(data, name)
        unknown = set(data) - {"mixture", "grid", "time", "initial", "sweep", "check", "output"}
        if unknown:
            raise ConfigError(f"unknown config sections: {sorted(unknown)}")
        return cls(**kw)

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        path = Path(path)
        try:
            text = path.read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: malformed JSON at line {exc.lineno}, column {exc.colno}: "
                              f"{exc.msg}") from exc
        return cls.from_dict(data)

    @classmethod
    def standard(cls) -> "ExperimentConfig":
        spec = standard_spec(0.01)
        prof = Profile()
        return cls(
            mixture=mixture_to_dict(spec),
            grid={"M": 1024, "length": 1.0},
            time={"T_end": 0.05, "cfl": 0.5, "snapshot_times": [0.0, 0.025, 0.05]},
            initial={"kind": prof.kind, "means": list(prof.means),
                     "amplitudes": list(prof.amplitudes), "phases": list(prof.phases),
                     "velocity_amplitude": prof.velocity_amplitude, "width": prof.width},
        )

    def to_dict(self) -> dict:
        return json.loads(json.dumps(asdict(self)))

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    # validation and typed views

    def validate(self) -> None:
        self.mixture_spec()
        M = _get(self.grid, "M", "grid")
        if not isinstance(M, int) or M < 16:
            raise ConfigError("grid.M must be an integer >= 16")
        if not float(_get(self.grid, "length", "grid")) > 0:
            raise ConfigError("grid.length must be > 0")
        t_end = float(_get(self.time, "T_end", "time"))
        if not t_end > 0:
            raise ConfigError("time.T_end must be > 0")
        cfl = float(_get(self.time, "cfl", "time"))
        if not 0 < cfl <= 1:
            raise ConfigError("time.cfl must lie in (0, 1]")
        snaps = self.time.get("snapshot_times", [])
        if any(not 0 <= float(t) <= t_end for t in snaps):
            raise ConfigError("time.snapshot_times must lie in [0, T_end]")
        prof = self.profile()
        if prof.kind not in PROFILE_KINDS:
            raise ConfigError(f"initial.kind must be one of {PROFILE_KINDS}")
        n = self.mixture["N"]
        for key in ("means", "amplitudes", "phases"):
            if len(getattr(prof, key)) != n:
                raise ConfigError(f"initial.{key} needs {n} entries")
        try:
            prof.build(M, float(self.grid["length"]))
        except MixtureError as exc:
            raise ConfigError(f"initial profile invalid: {exc}") from exc
        eps = [float(e) for e in _get(self.sweep, "eps_list", "sweep")]
        if len(eps) < 3 or any(e <= 0 for e in eps) or any(b >= a for a, b in zip(eps, eps[1:])):
            raise ConfigError("sweep.eps_list needs >= 3 positive, strictly decreasing values")
        band = self.sweep.get("order_band", [1.6, 2.4])
        if len(band) != 2 or not band[0] < band[1]:
            raise ConfigError("sweep.order_band must be [low, high]")
        if int(self.check.get("samples", 100)) < 100:
            raise ConfigError("check.samples must be >= 100")
        if not isinstance(self.output.get("directory", "out"), str):
            raise ConfigError("output.directory must be a string")

    def mixture_spec(self) -> MixtureSpec:
        m = self.mixture
        try:
            n = int(_get(m, "N", "mixture"))
            laws = tuple(PressureLaw.from_dict(law) for law in _get(m, "laws", "mixture"))
            if len(laws) != n:
                raise ConfigError(f"mixture.laws needs {n} entries")
            return MixtureSpec(laws, np.asarray(_get(m, "refDensities", "mixture"), dtype=float),
                               np.asarray(_get(m, "sigma", "mixture"), dtype=float),
                               float(_get(m, "epsilon", "mixture")), int(m.get("d", 1)))
        except ConfigError:
            raise
        except (MixtureError, KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"invalid mixture: {exc}") from exc

    def profile(self) -> Profile:
        i = self.initial
        try:
            return Profile(
                kind=str(_get(i, "kind", "initial")),
                means=tuple(float(v) for v in _get(i, "means", "initial")),
                amplitudes=tuple(float(v) for v in i.get("amplitudes", [0.0] * len(i["means"]))),
                phases=tuple(float(v) for v in i.get("phases", [0.0] * len(i["means"]))),
                velocity_amplitude=float(i.get("velocity_amplitude", 0.0)),
                width=float(i.get("width", 0.1)),
            )
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"invalid initial section: {exc}") from exc

    @property
    def output_dir(self) -> Path:
        return Path(self.output.get("directory", "out"))


def mixture_to_dict(spec: MixtureSpec) -> dict:
    if spec.state_dependent:
        raise ConfigError("state-dependent sigma cannot be serialised")
    return {
        "N": spec.N,
        "laws": [law.to_dict() for law in spec.laws],
        "refDensities": spec.ref_densities.tolist(),
        "sigma": np.asarray(spec.sigma).tolist(),
        "epsilon": spec.epsilon,
        "d": spec.d,
    }
