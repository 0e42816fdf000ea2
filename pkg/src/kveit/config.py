"""Run configuration in a sectioned ``key = value`` (INI) format.

Every experiment constant is a key; omitted keys take the defaults of the
reference experiments.  Unknown sections or keys are rejected.
"""
import configparser
import dataclasses
from dataclasses import dataclass, field
import hashlib

from .errors import ConfigError

COMMANDS = ("mesh-info", "forward", "reconstruct", "example")


def _ints(text):
    return tuple(int(v) for v in str(text).replace(",", " ").split())


def _floats(text):
    return tuple(float(v) for v in str(text).replace(",", " ").split())


def _currents(text):
    """``"1 2 3 4; 2 1 3 4"`` -> ((1, 2, 3, 4), (2, 1, 3, 4)); empty means the default set."""
    out = tuple(tuple(float(v) for v in part.replace(",", " ").split())
                for part in str(text).split(";") if part.strip())
    if any(len(c) != 4 for c in out):
        raise ValueError("each measurement needs four coefficients A B C D")
    return out


def _bool(text):
    t = str(text).strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


@dataclass(frozen=True)
class RunSection:
    command: str = "reconstruct"
    example: int = 1
    levels: tuple = (4, 8, 16, 32, 64)
    data_level: int = 128
    seed: int = 0
    solver: str = "cg"


@dataclass(frozen=True)
class ProblemSection:
    lower: float = 0.05
    upper: float = 10.0
    rho_scale: float = 0.01
    eps: float = None  # None: eps equals rho on every level
    q_init: float = 1.5
    q_file: str = ""  # forward only: VTK file with a point scalar ``q``; empty uses the phantom


@dataclass(frozen=True)
class NoiseSection:
    mode: str = "level"
    theta: float = 0.0
    measurements: int = 1
    currents: tuple = ()  # explicit (A, B, C, D) per measurement; overrides ``measurements``
    thetas: tuple = (0.005, 0.01, 0.05, 0.1)
    sizes: tuple = (1, 6, 16)
    example3_theta: float = 0.1


@dataclass(frozen=True)
class ArmijoSection:
    beta0: float = 0.75
    tau: float = 1e-4
    max_iter: int = 1000
    tol1_scale: float = 1e-3
    tol2_scale: float = 1e-2
    reset_beta: bool = False


@dataclass(frozen=True)
class OutputSection:
    directory: str = "output"
    vtk: bool = True
    csv: bool = True


@dataclass(frozen=True)
class RunConfig:
    run: RunSection = field(default_factory=RunSection)
    problem: ProblemSection = field(default_factory=ProblemSection)
    noise: NoiseSection = field(default_factory=NoiseSection)
    armijo: ArmijoSection = field(default_factory=ArmijoSection)
    output: OutputSection = field(default_factory=OutputSection)

    def to_ini(self):
        lines = []
        for sec in dataclasses.fields(self):
            lines.append(f"[{sec.name}]")
            for f in dataclasses.fields(sec.type):
                lines.append(f"{f.name} = {_render(getattr(getattr(self, sec.name), f.name))}")
            lines.append("")
        return "\n".join(lines)

    def digest(self):
        return hashlib.sha256(self.to_ini().encode()).hexdigest()

    def replace(self, section, **changes):
        new = dataclasses.replace(getattr(self, section), **changes)
        cfg = dataclasses.replace(self, **{section: new})
        validate(cfg)
        return cfg


def _render(value):
    if value is None:
        return "auto"
    if isinstance(value, tuple) and value and isinstance(value[0], tuple):
        return "; ".join(" ".join(repr(float(v)) for v in c) for c in value)
    if isinstance(value, tuple):
        return ", ".join(repr(v) if isinstance(v, float) else str(v) for v in value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


_PARSERS = {
    "levels": _ints, "sizes": _ints, "thetas": _floats, "currents": _currents,
    "reset_beta": _bool, "vtk": _bool, "csv": _bool,
}


def _convert(name, default, text):
    text = text.strip()
    if name in _PARSERS:
        return _PARSERS[name](text)
    if name == "eps":
        return None if text.lower() in ("auto", "none", "") else float(text)
    if isinstance(default, bool):
        return _bool(text)
    if isinstance(default, int):
        return int(text)
    if isinstance(default, float):
        return float(text)
    return text


def validate(cfg):
    def need(ok, key, msg):
        if not ok:
            raise ConfigError(key, msg)

    r, p, n, a = cfg.run, cfg.problem, cfg.noise, cfg.armijo
    need(r.command in COMMANDS, "run.command", f"must be one of {COMMANDS}")
    need(r.example in (1, 2, 3), "run.example", "must be 1, 2 or 3")
    need(len(r.levels) > 0 and all(l >= 1 for l in r.levels), "run.levels", "need positive levels")
    need(r.data_level % 4 == 0, "run.data_level", "must be divisible by 4")
    if r.command in ("reconstruct", "example"):
        need(all(b > a and b % a == 0 for a, b in zip(r.levels, r.levels[1:])), "run.levels",
             "levels must be increasing nested refinements")
        need(all(r.data_level % l == 0 for l in r.levels), "run.data_level",
             "every level must divide the data level")
    need(r.solver in ("cg", "direct"), "run.solver", "must be 'cg' or 'direct'")
    need(p.lower > 0, "problem.lower", "must be positive")
    need(p.upper > p.lower, "problem.upper", "must exceed problem.lower")
    need(p.rho_scale >= 0, "problem.rho_scale", "must be non-negative")
    need(p.eps is None or p.eps > 0, "problem.eps", "must be positive or 'auto'")
    need(p.lower <= p.q_init <= p.upper, "problem.q_init", "must lie within the bounds")
    need(n.mode in ("level", "fixed"), "noise.mode", "must be 'level' or 'fixed'")
    need(n.theta >= 0, "noise.theta", "must be non-negative")
    need(1 <= n.measurements <= 24, "noise.measurements", "must be between 1 and 24")
    need(all(len(c) == 4 for c in n.currents), "noise.currents", "need four coefficients per measurement")
    need(all(t >= 0 for t in n.thetas), "noise.thetas", "must be non-negative")
    need(all(1 <= s <= 24 for s in n.sizes), "noise.sizes", "must be between 1 and 24")
    need(0 < a.beta0 < 1, "armijo.beta0", "must lie in (0, 1)")
    need(a.tau > 0, "armijo.tau", "must be positive")
    need(a.max_iter >= 0, "armijo.max_iter", "must be non-negative")
    return cfg


def parse_config(text=None, path=None, overrides=None):
    """Build a :class:`RunConfig` from INI text or a file, then apply ``overrides``.

    ``overrides`` maps ``"section.key"`` to already typed values (as produced
    by command-line flags).  A ``[meta]`` section, as written into run
    manifests, is ignored.
    """
    cp = configparser.ConfigParser(interpolation=None)
    cp.optionxform = str
    try:
        if path is not None:
            with open(path) as fh:
                cp.read_file(fh)
        elif text:
            cp.read_string(text)
    except (configparser.Error, UnicodeDecodeError) as exc:
        raise ConfigError("<file>", f"malformed configuration: {exc}") from exc
    except OSError as exc:
        raise ConfigError("<file>", f"cannot read configuration: {exc}") from exc

    sections = {f.name: f.type for f in dataclasses.fields(RunConfig)}
    values = {name: {} for name in sections}
    for sec in cp.sections():
        if sec == "meta":
            continue
        if sec not in sections:
            raise ConfigError(sec, "unknown section")
        known = {f.name: f.default for f in dataclasses.fields(sections[sec])}
        for key, text in cp.items(sec):
            if key not in known:
                raise ConfigError(f"{sec}.{key}", "unknown key")
            try:
                values[sec][key] = _convert(key, known[key], text)
            except ValueError as exc:
                raise ConfigError(f"{sec}.{key}", str(exc)) from exc
    for dotted, value in (overrides or {}).items():
        sec, _, key = dotted.partition(".")
        if sec not in sections or key not in {f.name for f in dataclasses.fields(sections[sec])}:
            raise ConfigError(dotted, "unknown key")
        values[sec][key] = value
    cfg = RunConfig(**{name: cls(**values[name]) for name, cls in sections.items()})
    return validate(cfg)
