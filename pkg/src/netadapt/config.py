"""Experiment configuration files.

An INI-style file with flat sections::

    [experiment]
    algorithm = net            ; net | jda | tca | kpca  (run)
    algorithms = net, jda, kpca  ; compare
    profile = twomoon          ; optional named parameter preset
    seed = 0
    seeds = 0, 1, 2            ; compare: one experiment per seed
    output = report.jsonl

    [source]                   ; either a CSV path or the generator
    path = source.csv          ; last column holds integer labels
    generator = two_moon

    [target]
    path = target.csv
    has_labels = true          ; labels are used for scoring only

    [generator]
    n_per_class = 100
    noise_sd = 0.1
    rotation_deg = 30
    translation = 0, 0

    [kernel]
    kind = gaussian            ; gaussian | linear
    bandwidth = median         ; median | positive number (sigma^2)

    [params]                   ; a single fit ...
    alpha = 1.0
    beta = 0.01
    gamma = 1.0
    k = 20
    iterations = 10
    ridge = auto

    [grid]                     ; ... or a parameter grid, never both
    k_values = 2, 5, 10
    alpha_values = 0.1, 1
    beta_values = 0.01, 1
    gamma_values = 0.01, 1

    [kmm]
    b_cap = 10
    epsilon = auto
    fraction = 0.1
    max_iters = 5000
    step_tol = 1e-10

    [preprocess]
    pca_dim = 500              ; optional PCA on the combined data
"""
import configparser
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from .errors import ConfigError
from .kernel import KernelSpec
from .selection import KmmConfig, ParamGrid
from .solver import HyperParams

ALGORITHMS = ("net", "jda", "tca", "kpca")

# NET parameters (alpha, beta, gamma, k) per dataset family; "twomoon" is
# the toy preset used by the synthetic experiments.
PROFILES = {
    "digit": HyperParams(alpha=1.0, beta=0.01, gamma=1.0, k=20),
    "face": HyperParams(alpha=0.01, beta=0.01, gamma=1.0, k=20),
    "coil": HyperParams(alpha=1.0, beta=1.0, gamma=1.0, k=60),
    "pie": HyperParams(alpha=10.0, beta=0.001, gamma=0.005, k=200),
    "office-surf": HyperParams(alpha=1.0, beta=1.0, gamma=1.0, k=20),
    "office-deep": HyperParams(alpha=1.0, beta=1.0, gamma=1.0, k=20),
    "twomoon": HyperParams(alpha=1.0, beta=0.01, gamma=0.01, k=2),
}

KNOWN_SECTIONS = {
    "experiment", "source", "target", "generator", "kernel", "params", "grid", "kmm", "preprocess",
}


@dataclass(frozen=True)
class GeneratorSpec:
    n_per_class: int = 100
    noise_sd: float = 0.1
    rotation_deg: float = 30.0
    translation: tuple = (0.0, 0.0)


@dataclass(frozen=True)
class DataSpec:
    path: Optional[Path] = None
    generator: Optional[str] = None
    has_labels: bool = False


@dataclass(frozen=True)
class ExperimentConfig:
    source: DataSpec
    target: Optional[DataSpec]
    algorithm: str = "net"
    algorithms: tuple = ()
    kernel: KernelSpec = KernelSpec()
    params: Optional[HyperParams] = None
    grid: Optional[ParamGrid] = None
    kmm: KmmConfig = KmmConfig()
    fraction: float = 0.1
    generator: GeneratorSpec = GeneratorSpec()
    seed: int = 0
    seeds: tuple = ()
    profile: Optional[str] = None
    output: Optional[Path] = None
    pca_dim: Optional[int] = None
    raw: dict = field(default_factory=dict, compare=False)

    def seed_list(self):
        return list(self.seeds) if self.seeds else [self.seed]

    def echo(self):
        """Plain-data view of the configuration for reports."""
        return {
            "algorithm": self.algorithm,
            "algorithms": list(self.algorithms),
            "profile": self.profile,
            "seed": self.seed,
            "seeds": list(self.seeds),
            "source": _data_echo(self.source),
            "target": _data_echo(self.target) if self.target else None,
            "generator": {
                "n_per_class": self.generator.n_per_class,
                "noise_sd": self.generator.noise_sd,
                "rotation_deg": self.generator.rotation_deg,
                "translation": list(self.generator.translation),
            },
            "kernel": {"kind": self.kernel.kind, "bandwidth": self.kernel.bandwidth},
            "params": _params_echo(self.params),
            "grid": {
                "k_values": list(self.grid.k_values),
                "alpha_values": list(self.grid.alpha_values),
                "beta_values": list(self.grid.beta_values),
                "gamma_values": list(self.grid.gamma_values),
            }
            if self.grid
            else None,
            "kmm": {
                "b_cap": self.kmm.b_cap,
                "epsilon": self.kmm.epsilon,
                "max_iters": self.kmm.max_iters,
                "step_tol": self.kmm.step_tol,
                "fraction": self.fraction,
            },
            "pca_dim": self.pca_dim,
        }


def _data_echo(spec):
    return {
        "path": str(spec.path) if spec.path else None,
        "generator": spec.generator,
        "has_labels": spec.has_labels,
    }


def _params_echo(hp):
    if hp is None:
        return None
    return {
        "alpha": hp.alpha,
        "beta": hp.beta,
        "gamma": hp.gamma,
        "k": hp.k,
        "iterations": hp.iterations,
        "ridge": hp.ridge,
    }


def _number(section, key, value, kind=float):
    try:
        return kind(value)
    except (TypeError, ValueError):
        raise ConfigError(f"[{section}] {key}: expected {kind.__name__}, got {value!r}") from None


def _list(section, key, value, kind=float):
    items = [v.strip() for v in value.split(",") if v.strip()]
    if not items:
        raise ConfigError(f"[{section}] {key}: empty list")
    return tuple(_number(section, key, v, kind) for v in items)


def _bool(section, key, value):
    lowered = value.strip().lower()
    if lowered in ("1", "true", "yes", "on"):
        return True
    if lowered in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"[{section}] {key}: expected a boolean, got {value!r}")


def _auto(section, key, value, kind=float):
    if value is None or value.strip().lower() in ("auto", "none", "median", ""):
        return None
    return _number(section, key, value, kind)


def _data_spec(cp, name, base_dir, required):
    if not cp.has_section(name):
        if required:
            raise ConfigError(f"missing [{name}] section")
        return None
    sec = cp[name]
    path = sec.get("path")
    gen = sec.get("generator")
    if bool(path) == bool(gen):
        raise ConfigError(f"[{name}] needs exactly one of 'path' or 'generator'")
    if gen and gen != "two_moon":
        raise ConfigError(f"[{name}] unknown generator {gen!r}")
    resolved = None
    if path:
        resolved = Path(path)
        if not resolved.is_absolute():
            resolved = base_dir / resolved
        if not resolved.is_file():
            raise ConfigError(f"[{name}] path does not exist: {resolved}")
    default_labels = name == "source" or bool(gen)
    has_labels = _bool(name, "has_labels", sec.get("has_labels", str(default_labels)))
    if name == "source" and not has_labels:
        raise ConfigError("[source] data must carry labels")
    return DataSpec(resolved, gen, has_labels)


def parse_config(text, base_dir=Path("."), profile=None, seed=None):
    """Parse configuration text; ``profile`` and ``seed`` override the file."""
    cp = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"malformed config: {exc}") from None
    unknown = set(cp.sections()) - KNOWN_SECTIONS
    if unknown:
        raise ConfigError(f"unknown section(s): {', '.join(sorted(unknown))}")

    exp = cp["experiment"] if cp.has_section("experiment") else {}
    algorithm = exp.get("algorithm", "net").strip()
    if algorithm not in ALGORITHMS:
        raise ConfigError(f"unknown algorithm {algorithm!r}; choose from {ALGORITHMS}")
    algorithms = ()
    if exp.get("algorithms"):
        algorithms = tuple(a.strip() for a in exp["algorithms"].split(",") if a.strip())
        bad = [a for a in algorithms if a not in ALGORITHMS]
        if bad:
            raise ConfigError(f"unknown algorithm(s) {bad}; choose from {ALGORITHMS}")
    profile = profile or exp.get("profile")
    if profile is not None and profile not in PROFILES:
        raise ConfigError(f"unknown profile {profile!r}; choose from {sorted(PROFILES)}")
    cfg_seed = _number("experiment", "seed", exp.get("seed", "0"), int)
    seeds = _list("experiment", "seeds", exp["seeds"], int) if exp.get("seeds") else ()
    if seed is not None:
        cfg_seed, seeds = seed, ()
    output = Path(exp["output"]) if exp.get("output") else None

    kernel = KernelSpec()
    if cp.has_section("kernel"):
        ks = cp["kernel"]
        try:
            kernel = KernelSpec(
                kind=ks.get("kind", "gaussian").strip(),
                bandwidth=_auto("kernel", "bandwidth", ks.get("bandwidth")),
            )
        except ValueError as exc:
            raise ConfigError(f"[kernel] {exc}") from None

    if cp.has_section("params") and cp.has_section("grid"):
        raise ConfigError("[params] and [grid] are mutually exclusive")

    params = PROFILES[profile] if profile else None
    if cp.has_section("params"):
        ps = cp["params"]
        base = params or HyperParams()
        try:
            params = HyperParams(
                alpha=_number("params", "alpha", ps.get("alpha", str(base.alpha))),
                beta=_number("params", "beta", ps.get("beta", str(base.beta))),
                gamma=_number("params", "gamma", ps.get("gamma", str(base.gamma))),
                k=_number("params", "k", ps.get("k", str(base.k)), int),
                iterations=_number(
                    "params", "iterations", ps.get("iterations", str(base.iterations)), int
                ),
                ridge=_auto("params", "ridge", ps.get("ridge")),
            )
        except ValueError as exc:
            raise ConfigError(f"[params] {exc}") from None

    grid = None
    if cp.has_section("grid"):
        gs = cp["grid"]
        defaults = ParamGrid()
        try:
            grid = ParamGrid(
                k_values=_list("grid", "k_values", gs["k_values"], int)
                if "k_values" in gs
                else defaults.k_values,
                alpha_values=_list("grid", "alpha_values", gs["alpha_values"])
                if "alpha_values" in gs
                else defaults.alpha_values,
                beta_values=_list("grid", "beta_values", gs["beta_values"])
                if "beta_values" in gs
                else defaults.beta_values,
                gamma_values=_list("grid", "gamma_values", gs["gamma_values"])
                if "gamma_values" in gs
                else defaults.gamma_values,
            )
        except ValueError as exc:
            raise ConfigError(f"[grid] {exc}") from None
        params = None

    kmm, fraction = KmmConfig(), 0.1
    if cp.has_section("kmm"):
        km = cp["kmm"]
        try:
            kmm = KmmConfig(
                b_cap=_number("kmm", "b_cap", km.get("b_cap", "10")),
                epsilon=_auto("kmm", "epsilon", km.get("epsilon")),
                max_iters=_number("kmm", "max_iters", km.get("max_iters", "5000"), int),
                step_tol=_number("kmm", "step_tol", km.get("step_tol", "1e-10")),
            )
        except ValueError as exc:
            raise ConfigError(f"[kmm] {exc}") from None
        fraction = _number("kmm", "fraction", km.get("fraction", "0.1"))
        if not 0 < fraction < 1:
            raise ConfigError("[kmm] fraction must lie in (0, 1)")

    generator = GeneratorSpec()
    if cp.has_section("generator"):
        gs = cp["generator"]
        generator = GeneratorSpec(
            n_per_class=_number("generator", "n_per_class", gs.get("n_per_class", "100"), int),
            noise_sd=_number("generator", "noise_sd", gs.get("noise_sd", "0.1")),
            rotation_deg=_number("generator", "rotation_deg", gs.get("rotation_deg", "30")),
            translation=_list("generator", "translation", gs.get("translation", "0, 0")),
        )
        if len(generator.translation) != 2:
            raise ConfigError("[generator] translation needs two values")

    pca_dim = None
    if cp.has_section("preprocess") and cp["preprocess"].get("pca_dim"):
        pca_dim = _number("preprocess", "pca_dim", cp["preprocess"]["pca_dim"], int)

    source = _data_spec(cp, "source", base_dir, required=True)
    target = _data_spec(cp, "target", base_dir, required=False)
    if target is not None and (source.generator is None) != (target.generator is None):
        raise ConfigError("source and target must both be generated or both be files")

    return ExperimentConfig(
        source=source,
        target=target,
        algorithm=algorithm,
        algorithms=algorithms,
        kernel=kernel,
        params=params,
        grid=grid,
        kmm=kmm,
        fraction=fraction,
        generator=generator,
        seed=cfg_seed,
        seeds=seeds,
        profile=profile,
        output=output,
        pca_dim=pca_dim,
        raw={s: dict(cp[s]) for s in cp.sections()},
    )


def load_config(path, profile=None, seed=None):
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    return parse_config(text, path.parent, profile=profile, seed=seed)
