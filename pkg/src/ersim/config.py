"""Run configuration: INI-style sections of flat key = value pairs.

Example::

    [grid]
    n = 2
    m = 32

    [solver]
    N = 198
    dt = 1e-4
    T = 0.1
    mu = 0.1

    [exponent]
    model = constant
    p_minus = 2
    p_plus = 2
    regime = martingale

    [run]
    seed = 1
"""
from __future__ import annotations

import configparser
import io
import os
from dataclasses import dataclass, field

from .exponent import MODELS, ExponentBounds, check_admissibility
from .noise import FAMILIES, PROFILES, NoiseModel
from .problem import (ExponentSpec, FieldData, FourierForcing, Models, RandomDivFree,
                      TaylorGreen)
from .solver import INTEGRATORS, SolverConfig
from .spectral import Grid


class ConfigError(ValueError):
    """Malformed or inconsistent configuration."""


# section -> key -> (type, default); default None marks a required key
_SCHEMA: dict[str, dict[str, tuple[type, object]]] = {
    "grid": {"n": (int, 2), "m": (int, 32), "dealias_fraction": (float, 2.0 / 3.0)},
    "solver": {
        "N": (int, None), "dt": (float, None), "T": (float, None), "mu": (float, 1.0),
        "integrator": (str, "euler_maruyama"), "dealias": (bool, True), "cadence": (int, 1),
    },
    "exponent": {
        "model": (str, "constant"), "p_minus": (float, 2.0), "p_plus": (float, 2.0),
        "c_p": (float, 0.0), "amplitude": (float, 1.0), "bandwidth": (int, 2),
        "relaxation": (float, 1.0), "regime": (str, None), "override": (bool, False),
    },
    "noise": {
        "family": (str, "none"), "K": (int, 4), "a": (float, 1.0), "gamma": (float, 1.0),
        "profile": (str, "modes"), "coefficients": (str, ""), "L": (float, 0.0),
    },
    "forcing": {"kind": (str, "zero"), "amplitude": (float, 1.0), "mode": (int, 0), "path": (str, "")},
    "initial": {
        "kind": (str, "taylor_green"), "amplitude": (float, 1.0), "energy": (float, 1.0),
        "modes": (int, 8), "path": (str, ""),
    },
    "run": {"seed": (int, None), "paths": (int, 1), "out": (str, "ersim-out"), "snapshots": (bool, False)},
}

_CHOICES = {
    ("solver", "integrator"): INTEGRATORS,
    ("exponent", "model"): MODELS,
    ("exponent", "regime"): ("martingale", "strong", "pathwise"),
    ("noise", "family"): ("none",) + FAMILIES,
    ("noise", "profile"): PROFILES,
    ("forcing", "kind"): ("zero", "fourier", "file"),
    ("initial", "kind"): ("taylor_green", "random_divfree", "file"),
}


@dataclass
class RunConfig:
    values: dict = field(default_factory=dict)
    source: str = "<string>"

    def __getitem__(self, section: str) -> dict:
        return self.values[section]

    # --- parsing -------------------------------------------------------------
    @classmethod
    def from_text(cls, text: str, source: str = "<string>", base_dir: str | None = None) -> "RunConfig":
        cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
        cp.optionxform = str
        try:
            cp.read_string(text, source=source)
        except configparser.Error as exc:
            raise ConfigError(f"{source}: {exc}") from None
        for sec in cp.sections():
            if sec not in _SCHEMA:
                raise ConfigError(f"{source}: unknown section [{sec}]")
        values = {}
        for sec, keys in _SCHEMA.items():
            got = dict(cp[sec]) if cp.has_section(sec) else {}
            unknown = set(got) - set(keys)
            if unknown:
                raise ConfigError(f"{source}: [{sec}] unknown key(s) {', '.join(sorted(unknown))}")
            values[sec] = {}
            for key, (typ, default) in keys.items():
                if key not in got:
                    if default is None:
                        raise ConfigError(f"{source}: [{sec}] {key} is required")
                    values[sec][key] = default
                    continue
                values[sec][key] = _convert(got[key], typ, f"{source}: [{sec}] {key}")
        cfg = cls(values, source)
        cfg._validate(base_dir)
        return cfg

    @classmethod
    def load(cls, path) -> "RunConfig":
        path = os.fspath(path)
        try:
            with open(path) as fh:
                text = fh.read()
        except OSError as exc:
            raise ConfigError(f"{path}: {exc.strerror}") from None
        return cls.from_text(text, path, os.path.dirname(os.path.abspath(path)))

    def _validate(self, base_dir):
        src = self.source
        for (sec, key), allowed in _CHOICES.items():
            if self.values[sec][key] not in allowed:
                raise ConfigError(f"{src}: [{sec}] {key} = {self.values[sec][key]!r}; "
                                  f"expected one of {', '.join(allowed)}")
        for sec, key in (("forcing", "path"), ("initial", "path")):
            kind = self.values[sec]["kind"]
            if kind == "file":
                p = self.values[sec][key]
                if not p:
                    raise ConfigError(f"{src}: [{sec}] path is required for kind = file")
                if base_dir and not os.path.isabs(p):
                    p = os.path.join(base_dir, p)
                    self.values[sec][key] = p
                if not os.path.exists(p):
                    raise ConfigError(f"{src}: [{sec}] path {p!r} does not exist")
        try:
            self.grid()
            self.solver()
            self.models()
        except ConfigError:
            raise
        except ValueError as exc:
            raise ConfigError(f"{src}: {exc}") from None
        e = self.values["exponent"]
        report = check_admissibility(self._bounds(), e["regime"])
        if not report.admissible and not e["override"]:
            raise ConfigError(f"{src}: [exponent] {report}")

    # --- serialization -------------------------------------------------------
    def to_text(self) -> str:
        cp = configparser.ConfigParser(interpolation=None)
        cp.optionxform = str
        for sec, keys in _SCHEMA.items():
            cp[sec] = {k: _format(self.values[sec][k]) for k in keys}
        buf = io.StringIO()
        cp.write(buf)
        return buf.getvalue()

    # --- object construction ---------------------------------------------------
    def grid(self) -> Grid:
        g = self.values["grid"]
        return Grid(g["n"], g["m"], g["dealias_fraction"])

    def solver(self, **overrides) -> SolverConfig:
        s = self.values["solver"]
        kw = dict(N=s["N"], grid=self.grid(), dt=s["dt"], T=s["T"], integrator=s["integrator"],
                  dealias=s["dealias"], cadence=s["cadence"])
        kw.update(overrides)
        return SolverConfig(**kw)

    def _bounds(self) -> ExponentBounds:
        e = self.values["exponent"]
        return ExponentBounds(e["p_minus"], e["p_plus"], self.values["grid"]["n"], e["c_p"] or None)

    def models(self) -> Models:
        e, nz = self.values["exponent"], self.values["noise"]
        f, ini = self.values["forcing"], self.values["initial"]
        n = self.values["grid"]["n"]
        bounds = self._bounds()
        if e["model"] == "constant" and bounds.p_minus == bounds.p_plus:
            exponent = float(bounds.p_minus)
        else:
            exponent = ExponentSpec(e["model"], bounds, e["amplitude"], e["bandwidth"], e["relaxation"])
        noise = None
        if nz["family"] != "none":
            L = nz["L"] or None
            if nz["coefficients"].strip():
                coeffs = _float_list(nz["coefficients"], f"{self.source}: [noise] coefficients")
                noise = NoiseModel(nz["family"], coeffs, n=n, L=L, profile=nz["profile"])
            else:
                noise = NoiseModel.power_law(nz["family"], nz["K"], nz["a"], nz["gamma"],
                                             n=n, L=L, profile=nz["profile"])
        forcing = {"zero": None,
                   "fourier": FourierForcing(f["amplitude"], f["mode"]),
                   "file": FieldData(path=f["path"])}[f["kind"]]
        initial = {"taylor_green": TaylorGreen(ini["amplitude"]),
                   "random_divfree": RandomDivFree(ini["energy"], ini["modes"]),
                   "file": FieldData(path=ini["path"])}[ini["kind"]]
        return Models(exponent, self.values["solver"]["mu"], noise, initial, forcing)


def _convert(raw: str, typ: type, where: str):
    raw = raw.strip()
    try:
        if typ is bool:
            low = raw.lower()
            if low in ("1", "true", "yes", "on"):
                return True
            if low in ("0", "false", "no", "off"):
                return False
            raise ValueError(raw)
        return typ(raw)
    except ValueError:
        raise ConfigError(f"{where}: cannot read {raw!r} as {typ.__name__}") from None


def _float_list(raw: str, where: str) -> list[float]:
    try:
        return [float(x) for x in raw.replace(",", " ").split()]
    except ValueError:
        raise ConfigError(f"{where}: expected a list of numbers, got {raw!r}") from None


def _format(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)
