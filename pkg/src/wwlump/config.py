"""Run configuration: plain ``key = value`` files with command-line overrides.

Lines starting with ``#`` and blank lines are ignored.  Keys use the flag
names with dashes or underscores (``tol-outer`` and ``tol_outer`` are the
same key).  Unknown keys are rejected so that typos cannot silently fall
back to defaults.
"""

from dataclasses import dataclass, fields, replace
from pathlib import Path

from .dno import DNO_MODES, OracleConfig
from .errors import ConfigurationError
from .lump import LUMP_SOURCES
from .nonlinear import EPS_MAX, SolverConfig
from .spectral import GridSpec

__all__ = ["RunConfig", "parse_config", "read_config_file", "DEFAULTS"]


@dataclass(frozen=True)
class RunConfig:
    """Validated settings for one command-line run."""

    eps: float = 0.1
    sigma: float = 1.0
    lx: float = 30.0
    ly: float = 30.0
    nx: int = 256
    ny: int = 256
    tol_outer: float = 1e-9
    tol_inner: float = 1e-12
    tol_linear: float = 1e-12
    max_iter: int = 50
    dno: str = "exact"
    nz: int = 16
    oracle_tol: float = 1e-11
    lump_source: str = "petviashvili"
    out: str = "."
    seed: int = 0
    force: bool = False

    def __post_init__(self):
        if self.dno not in DNO_MODES:
            raise ConfigurationError(f"dno must be one of {DNO_MODES}, got {self.dno!r}", field="dno")
        if self.lump_source not in LUMP_SOURCES:
            raise ConfigurationError(
                f"lump_source must be one of {LUMP_SOURCES}, got {self.lump_source!r}",
                field="lump_source")
        if self.eps > EPS_MAX and not self.force:
            raise ConfigurationError(
                f"eps = {self.eps} exceeds the validity cap {EPS_MAX}; use --force to override",
                field="eps")
        # Delegate the remaining range checks to the objects that own them.
        self.grid()
        self.solver()

    def grid(self):
        return GridSpec(Lx=self.lx, Ly=self.ly, Nx=self.nx, Ny=self.ny, eps=self.eps,
                        sigma=self.sigma)

    def oracle(self):
        return OracleConfig(nz=self.nz, tol=self.oracle_tol)

    def solver(self):
        return SolverConfig(grid=self.grid(), tol_outer=self.tol_outer, tol_inner=self.tol_inner,
                            tol_linear=self.tol_linear, maxiter=self.max_iter, dno_mode=self.dno,
                            oracle=self.oracle(), lump_source=self.lump_source, force=self.force)

    def with_eps(self, eps):
        return replace(self, eps=eps)

    def as_dict(self):
        return {f.name: getattr(self, f.name) for f in fields(self)}


DEFAULTS = RunConfig()
_TYPES = {f.name: type(getattr(DEFAULTS, f.name)) for f in fields(RunConfig)}


def _normalise(key):
    return key.strip().lower().replace("-", "_")


def _coerce(key, raw):
    kind = _TYPES[key]
    if isinstance(raw, kind) and not (kind is int and isinstance(raw, bool)):
        return raw
    text = str(raw).strip()
    try:
        if kind is bool:
            low = text.lower()
            if low in ("1", "true", "yes", "on"):
                return True
            if low in ("0", "false", "no", "off"):
                return False
            raise ValueError(text)
        if kind is int:
            val = float(text)
            if val != int(val):
                raise ValueError(text)
            return int(val)
        if kind is float:
            return float(text)
        return text
    except ValueError:
        raise ConfigurationError(f"{key}: cannot parse {text!r} as {kind.__name__}",
                                 field=key) from None


def read_config_file(path):
    """Parse a ``key = value`` file into a dict of raw strings."""
    p = Path(path)
    if not p.is_file():
        raise ConfigurationError(f"config file {path} does not exist", field="config")
    out = {}
    for lineno, line in enumerate(p.read_text().splitlines(), 1):
        text = line.split("#", 1)[0].strip()
        if not text:
            continue
        if "=" not in text:
            raise ConfigurationError(f"{path}:{lineno}: expected key = value", field="config")
        key, value = text.split("=", 1)
        key = _normalise(key)
        if key not in _TYPES:
            raise ConfigurationError(f"{path}:{lineno}: unknown key {key!r}", field=key)
        out[key] = value.strip()
    return out


def parse_config(path=None, overrides=None):
    """Build a :class:`RunConfig` from defaults, an optional file and overrides.

    ``overrides`` maps keys to values (``None`` entries are ignored); they
    take precedence over the file.
    """
    values = {}
    if path is not None:
        values.update(read_config_file(path))
    for key, val in (overrides or {}).items():
        if val is None:
            continue
        k = _normalise(key)
        if k not in _TYPES:
            raise ConfigurationError(f"unknown configuration key {key!r}", field=k)
        values[k] = val
    kwargs = {k: _coerce(k, v) for k, v in values.items()}
    return RunConfig(**kwargs)
