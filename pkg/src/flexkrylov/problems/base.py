"""Test problem container, noise model and on-disk format."""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any

import numpy as np

from ..linop import LinearOperator
from ..transforms import HaarTransform

RNG_ALGORITHM = "numpy.random.PCG64"


@dataclass
class TestProblem:
    """``b = A x_true + e``.

    ``spec`` records the generator id and parameters so that the operator can
    be rebuilt from disk; ``image_shape`` is set for 2D problems.
    """

    __test__ = False  # not a pytest class

    a: LinearOperator
    x_true: np.ndarray
    b_true: np.ndarray
    b: np.ndarray = None
    e: np.ndarray = None
    noise_level: float = 0.0
    psi: HaarTransform | None = None
    image_shape: tuple[int, int] | None = None
    spec: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        self.x_true = np.asarray(self.x_true, dtype=np.float64).ravel()
        self.b_true = np.asarray(self.b_true, dtype=np.float64).ravel()
        if self.e is None:
            self.e = np.zeros_like(self.b_true)
        if self.b is None:
            self.b = self.b_true + self.e


def make_problem(a: LinearOperator, x_true, spec: dict, image_shape=None) -> TestProblem:
    x_true = np.asarray(x_true, dtype=np.float64).ravel()
    return TestProblem(a=a, x_true=x_true, b_true=a.apply(x_true), spec=dict(spec), image_shape=image_shape)


def add_noise(p: TestProblem, level: float, seed: int = 0) -> TestProblem:
    """White Gaussian noise scaled so that ``||e|| / ||b_true|| = level`` exactly."""
    if level < 0:
        raise ValueError("noise level must be nonnegative")
    if level == 0:
        e = np.zeros_like(p.b_true)
    else:
        g = np.random.Generator(np.random.PCG64(seed)).standard_normal(p.b_true.size)
        e = level * np.linalg.norm(p.b_true) * g / np.linalg.norm(g)
    spec = dict(p.spec, noise_level=level, seed=seed, rng=RNG_ALGORITHM)
    return replace(p, e=e, b=p.b_true + e, noise_level=float(level), spec=spec)


def _write_vector(directory: Path, role: str, v: np.ndarray, shape=None):
    v = np.ascontiguousarray(v, dtype="<f8")
    (directory / f"{role}.raw").write_bytes(v.tobytes())
    meta = {"role": role, "dtype": "float64", "byteorder": "little", "shape": list(shape or v.shape)}
    (directory / f"{role}.json").write_text(json.dumps(meta, indent=2) + "\n")


def read_vector(directory, role: str) -> np.ndarray:
    directory = Path(directory)
    meta = json.loads((directory / f"{role}.json").read_text())
    v = np.frombuffer((directory / f"{role}.raw").read_bytes(), dtype="<f8").astype(np.float64)
    return v.reshape(meta["shape"]).ravel() if len(meta["shape"]) > 1 else v


def save_problem(p: TestProblem, directory) -> Path:
    """Write ``operator.json`` plus raw little-endian float64 vectors with JSON sidecars."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    spec = dict(p.spec)
    if p.psi is not None:
        spec["transform"] = p.psi.to_dict()
    (directory / "operator.json").write_text(json.dumps(spec, indent=2, sort_keys=True) + "\n")
    shape = p.image_shape
    _write_vector(directory, "x_true", p.x_true, shape)
    _write_vector(directory, "b_true", p.b_true)
    _write_vector(directory, "e", p.e)
    _write_vector(directory, "b", p.b)
    return directory


def load_problem(directory) -> TestProblem:
    """Rebuild the operator from ``operator.json`` and read the stored vectors."""
    from .registry import generate

    directory = Path(directory)
    spec = json.loads((directory / "operator.json").read_text())
    p = generate(spec["generator"], **spec.get("params", {}))
    if "transform" in spec:
        t = spec["transform"]
        p.psi = HaarTransform(t["shape"], t["levels"])
    p.x_true = read_vector(directory, "x_true")
    p.b_true = read_vector(directory, "b_true")
    p.e = read_vector(directory, "e")
    p.b = read_vector(directory, "b")
    p.noise_level = float(spec.get("noise_level", 0.0))
    p.spec = spec
    return p
