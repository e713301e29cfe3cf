"""Study configuration: a sectioned key-value (INI) file with environment overrides.

Schema (version 1)::

    [study]
    schema_version = 1
    seed = 12345
    n_grid = 1000, 10000          ; increasing sample sizes
    m_rule = 0.4                  ; m = ceil(n ** rho), 0 < rho < 1
    m_list = 8, 16, 32            ; and/or explicit cell counts
    C_R = 1.0
    out = results
    workers = 1

    [measure]
    family = uniform              ; uniform | power_law | exponential | tabulated
    a = 0                         ; uniform: a, b
    b = 1                         ; power_law: shape, length; exponential: rate
                                  ; tabulated: points = x:g, x:g, ...
    [member.NAME]                 ; one section per battery member
    family = sinusoidal           ; constant | sinusoidal | exp_tilt | truncated_gamma | quadratic
    amplitude = 0.3               ; family parameters, plus optional overrides
    kappa = 0.7                   ; kappa, M, gamma, K of the declared constants

    [battery]                     ; optional generated batteries
    holder = 20                   ; number of generated Holder members
    sinusoidal = yes              ; add the six-member sinusoidal battery

    [verify] / [kernel_demo]      ; replicate counts, see DEFAULTS

Every key can be overridden by ``DENSEQUIV_<SECTION>_<KEY>`` (section dots
become underscores, all upper case).
"""
from __future__ import annotations

import configparser
import dataclasses
import math
import os
import re
from dataclasses import dataclass, field

from .. import families
from ..measure import DensityParameter, exponential, power_law, tabulated, uniform

SCHEMA_VERSION = 1
ENV_PREFIX = "DENSEQUIV_"

DEFAULTS = {
    "verify": {
        "mc_reps": 20000, "paths": 20000, "kernel_draws": 20000, "gof_draws": 100000,
        "tv_points": 1000, "step1_n": 50, "step1_m": 32, "ystar_n": 100, "ystar_m": 8,
        "kernel_n": 200, "kernel_m": 8,
    },
    "kernel_demo": {
        "n": 200, "m": 8, "draws": 100000, "paths": 200000, "times": "0.25, 0.5, 0.75, 1.0",
        "ystar_n": 100,
    },
}


class ConfigError(ValueError):
    """Invalid configuration; ``where`` names the section/key and line if known."""

    def __init__(self, message, where=None):
        super().__init__(f"{where}: {message}" if where else message)
        self.where = where


@dataclass(frozen=True)
class MemberSpec:
    name: str
    family: str
    params: dict = field(default_factory=dict)
    overrides: dict = field(default_factory=dict)

    def build(self, measure):
        f = families.build_member(measure, self.family, **self.params)
        changes = {}
        for key in ("kappa", "M"):
            if key in self.overrides:
                changes[key] = self.overrides[key]
        if "gamma" in self.overrides or "K" in self.overrides:
            g0, K0 = f.holder if f.holder else (1.0, 0.0)
            changes["holder"] = (self.overrides.get("gamma", g0), self.overrides.get("K", K0))
        changes["name"] = self.name
        return dataclasses.replace(f, **changes)


@dataclass(frozen=True)
class StudyConfig:
    schema_version: int
    seed: int
    n_grid: tuple
    m_rule: float | None
    m_list: tuple
    C_R: float
    out: str
    workers: int
    measure_family: str
    measure_params: dict
    members: tuple
    holder_battery: int = 0
    sinusoidal_battery: bool = False
    verify: dict = field(default_factory=lambda: dict(DEFAULTS["verify"]))
    kernel_demo: dict = field(default_factory=lambda: dict(DEFAULTS["kernel_demo"]))

    def build_measure(self):
        fam, p = self.measure_family, self.measure_params
        if fam == "uniform":
            return uniform(p.get("a", 0.0), p.get("b", 1.0))
        if fam == "power_law":
            return power_law(p.get("shape", 1.0), p.get("length", 1.0))
        if fam == "exponential":
            return exponential(p.get("rate", 1.0))
        if fam == "tabulated":
            xs, gs = zip(*p["points"])
            return tabulated(xs, gs)
        raise ConfigError(f"unknown measure family {fam!r}", "[measure] family")

    def build_battery(self, measure):
        out = [spec.build(measure) for spec in self.members]
        if self.sinusoidal_battery:
            out += families.sinusoidal_battery(measure)
        if self.holder_battery:
            out += families.holder_battery(measure, self.holder_battery, seed=self.seed % (1 << 32))
        return out

    def schedule(self):
        """``(n, m)`` pairs: every listed ``m`` at every ``n``, then the rule-based ``m``."""
        pairs = [(n, m) for n in self.n_grid for m in self.m_list]
        if self.m_rule is not None:
            pairs += [(n, m_from_rule(n, self.m_rule)) for n in self.n_grid]
        seen, out = set(), []
        for p in pairs:
            if p not in seen:
                seen.add(p)
                out.append(p)
        return out


def m_from_rule(n, rho):
    """``ceil(n ** rho)``, immune to round-off just above an integer."""
    v = n ** rho
    r = round(v)
    return max(2, int(r if abs(v - r) < 1e-9 * max(1.0, v) else math.ceil(v)))


def _line_of(text, section, key):
    cur = None
    for i, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        m = re.match(r"\[(.+)\]", line)
        if m:
            cur = m.group(1).strip()
            continue
        if cur == section and re.match(rf"{re.escape(key)}\s*[=:]", line, re.IGNORECASE):
            return i
    return None


def _env_key(section, key):
    return ENV_PREFIX + re.sub(r"[^A-Za-z0-9]", "_", f"{section}_{key}").upper()


def _apply_env(cp, env):
    for section in cp.sections():
        for key in list(cp[section].keys()):
            v = env.get(_env_key(section, key))
            if v is not None:
                cp[section][key] = v
    # keys absent from the file: match against known sections
    known = {s: s for s in cp.sections()}
    for s in ("study", "measure", "battery", "verify", "kernel_demo"):
        known.setdefault(s, s)
    for var, value in env.items():
        if not var.startswith(ENV_PREFIX):
            continue
        rest = var[len(ENV_PREFIX):]
        for section in sorted(known, key=len, reverse=True):
            tag = re.sub(r"[^A-Za-z0-9]", "_", section).upper() + "_"
            if rest.startswith(tag):
                key = rest[len(tag):].lower()
                if not cp.has_section(section):
                    cp.add_section(section)
                if key not in cp[section]:
                    cp[section][key] = value
                break


def load_config(path=None, text=None, env=None):
    """Parse a study configuration from ``path`` or ``text``."""
    env = os.environ if env is None else env
    if text is None:
        if path is None:
            text = DEFAULT_CONFIG
        else:
            try:
                with open(path) as fh:
                    text = fh.read()
            except OSError as exc:
                raise ConfigError(f"cannot read config: {exc}") from None
    cp = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    cp.optionxform = str
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"malformed config: {exc}") from None
    _apply_env(cp, env)

    def where(section, key):
        line = _line_of(text, section, key)
        return f"[{section}] {key}" + (f" (line {line})" if line else "")

    def get(section, key, conv, default=None, required=False):
        if not cp.has_section(section) or key not in cp[section]:
            if required:
                raise ConfigError("missing required key", where(section, key))
            return default
        raw = cp[section][key]
        try:
            return conv(raw)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad value {raw!r}: {exc}", where(section, key)) from None

    def floats(raw):
        return tuple(float(v) for v in raw.replace(",", " ").split())

    def ints(raw):
        return tuple(int(float(v)) for v in raw.replace(",", " ").split())

    def boolean(raw):
        low = raw.strip().lower()
        if low in ("1", "yes", "true", "on"):
            return True
        if low in ("0", "no", "false", "off"):
            return False
        raise ValueError("expected yes/no")

    version = get("study", "schema_version", int, required=True)
    if version != SCHEMA_VERSION:
        raise ConfigError(f"unsupported schema_version {version} (expected {SCHEMA_VERSION})",
                          where("study", "schema_version"))
    n_grid = get("study", "n_grid", ints, required=True)
    if not n_grid or any(n < 1 for n in n_grid) or any(b <= a for a, b in zip(n_grid, n_grid[1:])):
        raise ConfigError("n_grid must be positive and strictly increasing", where("study", "n_grid"))
    m_rule = get("study", "m_rule", float)
    if m_rule is not None and not 0 < m_rule < 1:
        raise ConfigError("m_rule must lie in (0, 1)", where("study", "m_rule"))
    m_list = get("study", "m_list", ints, default=())
    if any(m < 2 for m in m_list):
        raise ConfigError("m_list entries must be >= 2", where("study", "m_list"))
    if m_rule is None and not m_list:
        raise ConfigError("give m_rule and/or m_list", "[study]")
    C_R = get("study", "C_R", float, default=1.0)
    if C_R <= 0:
        raise ConfigError("C_R must be positive", where("study", "C_R"))
    workers = get("study", "workers", int, default=1)
    if workers < 1:
        raise ConfigError("workers must be >= 1", where("study", "workers"))

    fam = get("measure", "family", str, default="uniform").strip()
    mparams = {}
    if cp.has_section("measure"):
        for key, raw in cp["measure"].items():
            if key == "family":
                continue
            if key == "points":
                try:
                    pts = [tuple(float(v) for v in item.split(":")) for item in raw.split(",")]
                except ValueError as exc:
                    raise ConfigError(f"bad points: {exc}", where("measure", key)) from None
                mparams[key] = pts
            else:
                mparams[key] = get("measure", key, float)
    if fam not in ("uniform", "power_law", "exponential", "tabulated"):
        raise ConfigError(f"unknown measure family {fam!r}", where("measure", "family"))

    members = []
    for section in cp.sections():
        if not section.startswith("member."):
            continue
        name = section.split(".", 1)[1]
        family = get(section, "family", str, required=True).strip()
        if family not in families.MEMBER_FAMILIES:
            raise ConfigError(f"unknown member family {family!r}", where(section, "family"))
        params, overrides = {}, {}
        for key in cp[section]:
            if key == "family":
                continue
            val = get(section, key, float)
            (overrides if key in ("kappa", "M", "gamma", "K") else params)[key] = val
        members.append(MemberSpec(name, family, params, overrides))
    holder = get("battery", "holder", int, default=0)
    sinus = get("battery", "sinusoidal", boolean, default=False)
    if not members and not holder and not sinus:
        raise ConfigError("battery is empty: add [member.*] sections or [battery] entries", "[battery]")

    sections = {}
    for sec, defaults in DEFAULTS.items():
        vals = dict(defaults)
        if cp.has_section(sec):
            for key in cp[sec]:
                if key not in defaults:
                    raise ConfigError("unknown key", where(sec, key))
                conv = str if isinstance(defaults[key], str) else type(defaults[key])
                vals[key] = get(sec, key, (lambda r, c=conv: c(float(r)) if c is int else c(r)))
        sections[sec] = vals

    return StudyConfig(
        schema_version=version, seed=get("study", "seed", int, default=0), n_grid=n_grid,
        m_rule=m_rule, m_list=m_list, C_R=C_R, out=get("study", "out", str, default="results"),
        workers=workers, measure_family=fam, measure_params=mparams, members=tuple(members),
        holder_battery=holder, sinusoidal_battery=sinus,
        verify=sections["verify"], kernel_demo=sections["kernel_demo"])


DEFAULT_CONFIG = """\
[study]
schema_version = 1
seed = 20240601
n_grid = 1000, 10000, 100000, 1000000
m_rule = 0.4
m_list = 8, 16, 32, 64, 128
C_R = 1.0
out = results

[measure]
family = uniform
a = 0
b = 1

[member.sin]
family = sinusoidal
amplitude = 0.3
frequency = 1

[battery]
sinusoidal = yes
"""


def with_overrides(config, **changes):
    return dataclasses.replace(config, **changes)


def member_names(battery):
    return [f.name for f in battery]


__all__ = ["ConfigError", "MemberSpec", "StudyConfig", "load_config", "m_from_rule",
           "DEFAULT_CONFIG", "DEFAULTS", "SCHEMA_VERSION", "with_overrides", "DensityParameter"]
