"""Sweep configuration: flat key-value config files and their validation.

A config file is ASCII text, one ``key = value`` pair per line, ``#``
comments allowed.  ``bc``, ``probe``, ``mesh.cavity`` and ``signal.*``
keys may repeat.  See the package README for the full key reference; the
shipped configs/ directory has working examples.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .assembly import DIRICHLET, NEUMANN, BoundaryConditionSet
from .material import Material
from .mesh import (
    BOX_FACE_NAMES,
    TriangleMesh,
    generate_box_mesh,
    generate_icosphere,
    load_mesh,
    merge_meshes,
)
from .transform import TimeSignal, WINDOW_KINDS

WORKERS_ENV_VAR = "EWBEM_WORKERS"

_COMPONENTS = {"x": (0,), "y": (1,), "z": (2,), "all": (0, 1, 2)}
_KIND_NAMES = {
    "displacement": DIRICHLET, "dirichlet": DIRICHLET,
    "traction": NEUMANN, "neumann": NEUMANN,
}
_QUANTITIES = ("displacement", "traction")


class ConfigError(ValueError):
    """Malformed or inconsistent sweep configuration."""


@dataclass(frozen=True)
class Probe:
    """One recorded DOF: quantity is 'displacement' or 'traction'."""

    name: str
    element: int
    component: int
    quantity: str

    @property
    def dof(self) -> int:
        return 3 * self.element + self.component


@dataclass
class SweepConfig:
    """Everything run_sweep needs, fully resolved and validated."""

    mesh: TriangleMesh
    material: Material
    bcs: BoundaryConditionSet
    signals: list[TimeSignal]          # index 0 is always the zero signal
    signal_names: list[str]
    probes: list[Probe]
    period: float                      # response period T [s]
    n_omega: int                       # samples per period, even
    kappa: float = 4.0                 # damping coefficient
    window: str = "hanning"
    sem_enabled: bool = True
    sem_depth: int = 4                 # history length K
    tol: float = 1e-5
    restart: int = 60
    maxiter: int = 1000
    output_dir: Path = Path("out")
    figures: bool = True
    workers: int = 1
    allow_floating: bool = False
    raw: list = field(default_factory=list)  # (key, value) echo for the manifest

    def __post_init__(self):
        if self.period <= 0:
            raise ConfigError("period must be positive")
        if self.n_omega < 4 or self.n_omega % 2:
            raise ConfigError("n_omega must be even and >= 4")
        if self.kappa < 0:
            raise ConfigError("kappa must be >= 0")
        if self.sem_depth < 1:
            raise ConfigError("sem depth must be >= 1")
        if self.window not in WINDOW_KINDS:
            raise ConfigError(f"window must be one of {WINDOW_KINDS}")
        if not 0 < self.tol < 1:
            raise ConfigError("solver tol must be in (0, 1)")
        n_dofs = self.mesh.n_dofs
        for p in self.probes:
            if not 0 <= p.dof < n_dofs:
                raise ConfigError(f"probe {p.name} references DOF {p.dof} "
                                  f"outside 0..{n_dofs - 1}")
            if p.quantity not in _QUANTITIES:
                raise ConfigError(f"probe {p.name}: bad quantity {p.quantity}")
        self.bcs.validate(allow_floating=self.allow_floating)
        env = os.environ.get(WORKERS_ENV_VAR)
        if env:
            try:
                self.workers = max(1, int(env))
            except ValueError as exc:
                raise ConfigError(f"bad {WORKERS_ENV_VAR}={env!r}") from exc


# ----------------------------------------------------------------------
# Parsing
# ----------------------------------------------------------------------
def _read_pairs(path: Path) -> list[tuple[str, str]]:
    pairs = []
    with path.open("r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
            key, value = line.split("=", 1)
            pairs.append((key.strip(), value.strip()))
    return pairs


def _region_tag(mesh: TriangleMesh, token: str) -> int:
    if token in BOX_FACE_NAMES:
        return BOX_FACE_NAMES.index(token)
    try:
        return int(token)
    except ValueError as exc:
        raise ConfigError(f"unknown region {token!r}") from exc


def _pick_element(mesh: TriangleMesh, token: str) -> int:
    """Element index, or @region for the element nearest that region's centroid."""
    if token.startswith("@"):
        tag = _region_tag(mesh, token[1:])
        members = np.flatnonzero(mesh.region_tag == tag)
        if members.size == 0:
            raise ConfigError(f"region {token[1:]!r} has no elements")
        center = mesh.centroids[members].mean(axis=0)
        dist = np.linalg.norm(mesh.centroids[members] - center, axis=1)
        return int(members[np.argmin(dist)])
    try:
        return int(token)
    except ValueError as exc:
        raise ConfigError(f"bad element selector {token!r}") from exc


def _build_mesh(values: dict, cavities: list[str], base: Path) -> TriangleMesh:
    has_file = "mesh.file" in values
    has_box = "mesh.box.lengths" in values or "mesh.box.divisions" in values
    if has_file == has_box:
        raise ConfigError("specify exactly one of mesh.file or mesh.box.*")
    if has_file:
        mesh = load_mesh(base / values["mesh.file"])
    else:
        try:
            lengths = [float(v) for v in values["mesh.box.lengths"].split()]
            divisions = [int(v) for v in values["mesh.box.divisions"].split()]
        except (KeyError, ValueError) as exc:
            raise ConfigError("mesh.box.lengths and mesh.box.divisions must "
                              "both be given as three numbers") from exc
        if len(lengths) != 3 or len(divisions) != 3:
            raise ConfigError("mesh.box.* need exactly three values")
        mesh = generate_box_mesh(lengths, divisions)
    if cavities:
        parts = [mesh]
        for idx, spec in enumerate(cavities):
            tokens = spec.split()
            if len(tokens) != 5:
                raise ConfigError("mesh.cavity needs: cx cy cz radius subdivisions")
            center = [float(t) for t in tokens[:3]]
            radius = float(tokens[3])
            subdiv = int(tokens[4])
            parts.append(
                generate_icosphere(center, radius, subdiv, flip=True,
                                   region_tag=6 + idx)
            )
        mesh = merge_meshes(parts)
    return mesh


def _build_material(values: dict) -> Material:
    rho = float(values.get("material.rho", "0") or 0)
    if rho <= 0:
        raise ConfigError("material.rho must be given and positive")
    has_lame = "material.lambda" in values and "material.mu" in values
    has_young = "material.E" in values and "material.nu" in values
    if has_lame == has_young:
        raise ConfigError("give either material.lambda+material.mu or "
                          "material.E+material.nu")
    if has_lame:
        return Material.from_lame(float(values["material.lambda"]),
                                  float(values["material.mu"]), rho)
    return Material.from_young_poisson(float(values["material.E"]),
                                       float(values["material.nu"]), rho)


def _build_signal(spec: str, base: Path) -> TimeSignal:
    tokens = spec.split()
    if not tokens:
        raise ConfigError("empty signal definition")
    kind = tokens[0]
    if kind == "zero":
        return TimeSignal.zero()
    if kind == "heaviside":
        if len(tokens) != 2:
            raise ConfigError("signal: heaviside <amplitude>")
        return TimeSignal.heaviside(float(tokens[1]))
    if kind == "file":
        if len(tokens) != 2:
            raise ConfigError("signal: file <csv-path>")
        data = np.loadtxt(base / tokens[1], delimiter=",", ndmin=2)
        return TimeSignal.tabulated(data[:, 0], data[:, 1])
    raise ConfigError(f"unknown signal kind {kind!r}")


def parse_config(path) -> SweepConfig:
    """Parse and validate a sweep config file."""
    path = Path(path)
    base = path.parent
    pairs = _read_pairs(path)

    values: dict[str, str] = {}
    bc_lines: list[str] = []
    probe_lines: list[str] = []
    cavity_lines: list[str] = []
    signal_specs: dict[str, str] = {}
    for key, value in pairs:
        if key == "bc":
            bc_lines.append(value)
        elif key == "probe":
            probe_lines.append(value)
        elif key == "mesh.cavity":
            cavity_lines.append(value)
        elif key.startswith("signal."):
            signal_specs[key[len("signal."):]] = value
        else:
            values[key] = value

    mesh = _build_mesh(values, cavity_lines, base)
    material = _build_material(values)

    signals = [TimeSignal.zero()]
    signal_names = ["zero"]
    for name, spec in signal_specs.items():
        if name == "zero":
            raise ConfigError("signal name 'zero' is reserved")
        signals.append(_build_signal(spec, base))
        signal_names.append(name)

    bcs = BoundaryConditionSet.traction_free(mesh.n_elements)
    for line in bc_lines:
        tokens = line.split()
        if len(tokens) != 4:
            raise ConfigError(f"bc needs 'region component kind signal': {line!r}")
        region, component, kind, signal = tokens
        if component not in _COMPONENTS:
            raise ConfigError(f"bc component must be x/y/z/all: {line!r}")
        if kind not in _KIND_NAMES:
            raise ConfigError(f"bc kind must be displacement/traction: {line!r}")
        if signal not in signal_names:
            raise ConfigError(f"bc references unknown signal {signal!r}")
        bcs.set_region(mesh, _region_tag(mesh, region), _COMPONENTS[component],
                       _KIND_NAMES[kind], signal_names.index(signal))

    probes = []
    for line in probe_lines:
        tokens = line.split()
        if len(tokens) != 4:
            raise ConfigError(f"probe needs 'name element component quantity': {line!r}")
        name, element, component, quantity = tokens
        if component not in _COMPONENTS or component == "all":
            raise ConfigError(f"probe component must be x/y/z: {line!r}")
        probes.append(Probe(name, _pick_element(mesh, element),
                            _COMPONENTS[component][0], quantity))

    def flag(key: str, default: bool) -> bool:
        raw = values.get(key)
        if raw is None:
            return default
        if raw.lower() in ("true", "yes", "on", "1"):
            return True
        if raw.lower() in ("false", "no", "off", "0"):
            return False
        raise ConfigError(f"{key} must be boolean, got {raw!r}")

    try:
        cfg = SweepConfig(
            mesh=mesh,
            material=material,
            bcs=bcs,
            signals=signals,
            signal_names=signal_names,
            probes=probes,
            period=float(values["time.period"]),
            n_omega=int(values["time.samples"]),
            kappa=float(values.get("damping.kappa", "4")),
            window=values.get("window", "hanning"),
            sem_enabled=flag("sem.enabled", True),
            sem_depth=int(values.get("sem.depth", "4")),
            tol=float(values.get("solver.tol", "1e-5")),
            restart=int(values.get("solver.restart", "60")),
            maxiter=int(values.get("solver.maxiter", "1000")),
            # input paths resolve against the config file; output paths
            # resolve against the working directory, as usual for CLIs
            output_dir=Path(values.get("output.dir", "out")),
            figures=flag("output.figures", True),
            workers=int(values.get("workers", "1")),
            allow_floating=flag("bc.allow_floating", False),
            raw=list(pairs),
        )
    except KeyError as exc:
        raise ConfigError(f"missing required config key {exc.args[0]!r}") from exc
    return cfg
