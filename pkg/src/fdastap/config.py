"""TOML experiment configuration.

A scenario file has an ``[array]`` table (geometry and RF constants), a
``[scene]`` table, optional ``[target]`` and ``[interference]`` tables, a
``[run]`` table, and one table per experiment verb. Unknown keys and bad types
are rejected with the line where they appear.
"""
from __future__ import annotations

import dataclasses
import re
import sys
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover
    import tomli as tomllib

from .errors import ConfigError
from .scene import (
    SPEED_OF_LIGHT,
    CCubeConfig,
    ClutterScene,
    InterferenceSpec,
    RegionSpec,
    TargetSpec,
    reference_config,
    uniform_ring_scene,
)


@dataclass
class ArraySection:
    m_s: int = 2
    n_s: int = 3
    m_t: int = 2
    n_t: int = 3
    beta: float = 1.0
    d_over_lambda: float | None = None
    v_p: float | None = None
    f_b: float = 1.0e9
    pri: float = 0.5e-3
    pulse_width: float = 1.0e-6
    height: float = 6000.0

    def build(self) -> CCubeConfig:
        """Spacing defaults to the exact-rank choice where 2d/lambda equals the beta denominator; the
        platform speed is solved from ``beta`` unless given."""
        kw = dict(f_b=self.f_b, pri=self.pri, pulse_width=self.pulse_width, height=self.height)
        if self.d_over_lambda is not None:
            kw["spacing"] = self.d_over_lambda * SPEED_OF_LIGHT / self.f_b
        if self.v_p is not None:
            kw["v_p"] = self.v_p
        return reference_config(self.beta, self.m_s, self.n_s, self.m_t, self.n_t, **kw)


@dataclass
class SceneSection:
    n_ambiguities: int = 3
    n_patches: int = 181
    cnr_db: float | None = 40.0
    noise_power: float = 1.0
    empty: bool = False


@dataclass
class TargetSection:
    p_0: int = 1
    cos_psi: float = 0.0
    nu_0: float = 0.0
    power: float = 1.0


@dataclass
class InterferenceSection:
    center: list = field(default_factory=lambda: [0.1, -0.3, 0.3])
    widths: list | None = None  # default: one coarray resolution cell
    inr_db: float = 30.0
    n_components: int = 64
    seed: int = 7


@dataclass
class RunSection:
    seed: int = 0
    n_samples: int = 500
    threads: int = 1


@dataclass
class SpectrumSection:
    n_f_T: int = 96
    n_f_R: int = 97
    n_f_d: int = 65
    drop_db: float = 10.0
    covariance: str = "sample"


@dataclass
class SinrSection:
    doppler_points: int = 101
    trials: int = 10
    notch_half_width: float = 0.05
    bandlimit: str = "grid"
    clairvoyant: bool = True


@dataclass
class RankTableSection:
    betas: list = field(default_factory=lambda: [1.0, 0.5])
    n_ambiguities: list = field(default_factory=lambda: list(range(2, 11)))
    threshold: float = 1e-6


@dataclass
class RejectSection:
    ranks: object = "tail"  # "time-bandwidth", "tail" or [K1, K2, K3]
    covariance: str = "exact"
    grid_points: int = 9
    doppler_points: int = 21
    reweight: bool = False
    n_residue_draws: int = 10_000


@dataclass
class BenchSection:
    sensor_pairs: list = field(default_factory=lambda: [[1, 2], [2, 3], [3, 4]])
    repeats: int = 3
    n_samples: int = 500


_SECTIONS = {
    "array": ArraySection,
    "scene": SceneSection,
    "target": TargetSection,
    "interference": InterferenceSection,
    "run": RunSection,
    "spectrum": SpectrumSection,
    "sinr": SinrSection,
    "rank_table": RankTableSection,
    "reject": RejectSection,
    "bench": BenchSection,
}
_OPTIONAL = {"target", "interference"}


@dataclass
class ExperimentConfig:
    source: str
    array: ArraySection
    scene: SceneSection
    target: TargetSection | None
    interference: InterferenceSection | None
    run: RunSection
    spectrum: SpectrumSection
    sinr: SinrSection
    rank_table: RankTableSection
    reject: RejectSection
    bench: BenchSection
    out_dir: Path | None = None

    @property
    def seed(self) -> int:
        return self.run.seed

    def as_dict(self) -> dict:
        d = {}
        for name in _SECTIONS:
            sec = getattr(self, name)
            if sec is not None:
                d[name] = dataclasses.asdict(sec)
        return d

    def ccube(self) -> CCubeConfig:
        return self.array.build()

    def region(self, L_s: int, L_t: int) -> RegionSpec | None:
        if self.interference is None:
            return None
        widths = self.interference.widths
        if widths is None:
            widths = [1 / (L_s + 1), 1 / (L_t + 1), 1 / (L_s + 1)]
        return RegionSpec(tuple(self.interference.center), tuple(widths))

    def clutter_scene(self, cfg: CCubeConfig | None = None, with_interference: bool = True) -> ClutterScene:
        cfg = cfg or self.ccube()
        s = self.scene
        kw = {}
        if self.target is not None:
            t = self.target
            kw["target"] = TargetSpec(t.p_0, float(np.arccos(t.cos_psi)), t.nu_0, t.power)
        if with_interference and self.interference is not None:
            i = self.interference
            kw["interference"] = InterferenceSpec(self.region(cfg.L_s, cfg.L_t), i.inr_db,
                                                  i.n_components, i.seed)
        if s.empty:
            return ClutterScene(s.n_ambiguities, np.empty((0, 3)), s.noise_power, self.seed, **kw)
        return uniform_ring_scene(s.n_ambiguities, s.n_patches, s.cnr_db, s.noise_power,
                                  self.seed, **kw)


def _line_of(text: str, table: str | None, key: str | None) -> int | None:
    """1-based line of ``key`` inside ``[table]`` (or of the table header)."""
    lines = text.splitlines()
    current = None
    for no, line in enumerate(lines, 1):
        m = re.match(r"\s*\[([^\]]+)\]", line)
        if m:
            current = m.group(1).strip()
            if key is None and current == table:
                return no
            continue
        if current == table and key is not None and re.match(rf"\s*{re.escape(key)}\s*=", line):
            return no
    return None


def _where(source: str, text: str, table, key=None) -> str:
    line = _line_of(text, table, key)
    return f"{source}:{line}" if line else source


_TYPE_OK = {
    int: lambda v: isinstance(v, int) and not isinstance(v, bool),
    float: lambda v: isinstance(v, (int, float)) and not isinstance(v, bool),
    str: lambda v: isinstance(v, str),
    bool: lambda v: isinstance(v, bool),
    list: lambda v: isinstance(v, list),
}


def _check_type(annotation: str, value) -> bool:
    if value is None:
        return "None" in annotation
    if annotation == "object":
        return True
    for name, check in (("int", int), ("float", float), ("str", str), ("bool", bool), ("list", list)):
        if re.search(rf"\b{name}\b", annotation) and _TYPE_OK[check](value):
            return True
    return False


def _build_section(cls, values: dict, table: str, source: str, text: str):
    known = {f.name: f for f in dataclasses.fields(cls)}
    kwargs = {}
    for key, value in values.items():
        if key not in known:
            raise ConfigError(f"{_where(source, text, table, key)}: unknown key '{key}' in [{table}]")
        if not _check_type(str(known[key].type), value):
            raise ConfigError(
                f"{_where(source, text, table, key)}: [{table}].{key} has type "
                f"{type(value).__name__}, expected {known[key].type}"
            )
        if "float" in str(known[key].type) and isinstance(value, int):
            value = float(value)
        kwargs[key] = value
    return cls(**kwargs)


def parse_config(text: str, source: str = "<config>") -> ExperimentConfig:
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{source}: {exc}") from None
    for table in data:
        if table not in _SECTIONS:
            raise ConfigError(f"{_where(source, text, table)}: unknown table [{table}]")
        if not isinstance(data[table], dict):
            raise ConfigError(f"{_where(source, text, None, table)}: '{table}' must be a table")
    built = {}
    for name, cls in _SECTIONS.items():
        if name in _OPTIONAL and name not in data:
            built[name] = None
        else:
            built[name] = _build_section(cls, data.get(name, {}), name, source, text)
    exp = ExperimentConfig(source=source, **built)
    _validate(exp, source, text)
    return exp


def _validate(exp: ExperimentConfig, source: str, text: str) -> None:
    def fail(table, key, msg):
        raise ConfigError(f"{_where(source, text, table, key)}: {msg}")

    if exp.scene.n_ambiguities < 1:
        fail("scene", "n_ambiguities", "n_ambiguities must be >= 1")
    if exp.scene.n_patches < 1:
        fail("scene", "n_patches", "n_patches must be >= 1")
    if exp.run.n_samples < 1:
        fail("run", "n_samples", "n_samples must be >= 1")
    if exp.run.threads < 1:
        fail("run", "threads", "threads must be >= 1")
    if exp.spectrum.covariance not in ("sample", "exact"):
        fail("spectrum", "covariance", "covariance must be 'sample' or 'exact'")
    if exp.reject.covariance not in ("sample", "exact"):
        fail("reject", "covariance", "covariance must be 'sample' or 'exact'")
    if exp.sinr.bandlimit not in ("grid", "nominal"):
        fail("sinr", "bandlimit", "bandlimit must be 'grid' or 'nominal'")
    r = exp.reject.ranks
    if not (r in ("tail", "time-bandwidth") or (isinstance(r, list) and len(r) == 3
                                               and all(isinstance(x, int) for x in r))):
        fail("reject", "ranks", "ranks must be 'tail', 'time-bandwidth' or three integers")
    if exp.interference is not None:
        i = exp.interference
        if len(i.center) != 3 or (i.widths is not None and len(i.widths) != 3):
            fail("interference", "center", "center and widths need three entries")
    if exp.target is not None and not -1 <= exp.target.cos_psi <= 1:
        fail("target", "cos_psi", "cos_psi must lie in [-1, 1]")
    try:
        exp.ccube()
    except ConfigError as exc:
        fail("array", None, str(exc))


PRESETS = ("spectrum_np3", "spectrum_np6", "rank_table", "sinr_comparison",
           "bench_sweep", "reject_cluster")


def preset_text(name: str) -> str:
    return resources.files("fdastap.presets").joinpath(f"{name}.toml").read_text()


def load_config(path_or_preset: str | Path) -> ExperimentConfig:
    """Read a TOML file, or a shipped preset by name."""
    p = Path(path_or_preset)
    if p.exists():
        return parse_config(p.read_text(), str(p))
    name = str(path_or_preset)
    if name in PRESETS:
        return parse_config(preset_text(name), f"preset:{name}")
    raise ConfigError(f"no config file or preset named '{path_or_preset}'")
