"""First-passage Monte Carlo for the planar absorbing receiver.

Each trajectory starts at ``[0, ..., 0, lam]`` and follows the Euler-Maruyama chain
``X <- X + v dt + sqrt(sigma^2 dt) Z`` (``sigma^2 = 2 D_coef``) until the vertical
coordinate first goes negative.  Two engines produce that same chain:

* ``"levy"`` (default) draws the vertical walk at geometrically growing block
  ends and bisects a block with Brownian-bridge midpoints only when a crossing
  inside it is plausible.  Cost grows like log(steps), which matters because
  zero-drift passage times are heavy-tailed.
* ``"stepwise"`` walks every step; it is the reference implementation.

Randomness: trajectory ``i`` owns the Philox stream keyed by ``(seed, i)``, so
samples do not depend on how trajectories are spread over worker processes.
"""

from __future__ import annotations

import math
import os
import time
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Optional, Sequence

import numpy as np

from ._kernels import levy_trajectory, stepwise_trajectory
from .channel import VdfapParams
from .errors import DimensionError, ParameterError

CROSSING_MODES = ("step", "bridge")
ENGINES = ("levy", "stepwise")
NORMALIZATIONS = ("density", "relative-frequency")
WORKERS_ENV = "FAPCHAN_WORKERS"
TRUNCATION_LEVEL = 1e-3
# trajectories per scheduling unit; fixed so chunk boundaries never depend on worker count
CHUNK = 2048
_SEED_LIMIT = 1 << 64
_EXACT_TAG = 0x56444641  # separates exact-sampler streams from trajectory streams


def _check_seed(seed) -> int:
    if isinstance(seed, bool) or not isinstance(seed, (int, np.integer)):
        raise ParameterError(f"seed must be an integer, got {seed!r}")
    seed = int(seed)
    if not 0 <= seed < _SEED_LIMIT:
        raise ParameterError(f"seed must lie in [0, 2^64), got {seed}")
    return seed


def default_workers() -> int:
    env = os.environ.get(WORKERS_ENV)
    if env:
        try:
            n = int(env)
        except ValueError:
            raise ParameterError(f"{WORKERS_ENV} must be a positive integer, got {env!r}") from None
        if n < 1:
            raise ParameterError(f"{WORKERS_ENV} must be a positive integer, got {env!r}")
        return n
    return os.cpu_count() or 1


@dataclass(frozen=True)
class SimConfig:
    """Monte Carlo run description.

    Give the drift either physically as ``v`` (um/s) or normalized as ``u``
    (1/um); ``u = v / (2 D_coef)``.  The last component is vertical.
    ``workers`` only affects speed, never the samples.
    """

    ambient_dim: int
    D_coef: float
    dt: float
    lam: float
    M: int
    seed: int
    v: Optional[tuple] = None
    u: Optional[tuple] = None
    max_steps: int = 10**7
    crossing_mode: str = "step"
    engine: str = "levy"
    workers: Optional[int] = None

    def __post_init__(self):
        D = self.ambient_dim
        if isinstance(D, bool) or not isinstance(D, (int, np.integer)) or D < 2:
            raise ParameterError(f"ambient_dim must be an integer >= 2, got {D!r}")
        object.__setattr__(self, "ambient_dim", int(D))
        for name in ("D_coef", "dt", "lam"):
            val = float(getattr(self, name))
            if not math.isfinite(val) or val <= 0:
                raise ParameterError(f"{name} must be finite and > 0, got {val}")
            object.__setattr__(self, name, val)
        if (self.v is None) == (self.u is None):
            raise ParameterError("give exactly one of v (physical) or u (normalized) drift")
        for name in ("v", "u"):
            val = getattr(self, name)
            if val is None:
                continue
            arr = np.atleast_1d(np.asarray(val, dtype=float))
            if arr.ndim != 1 or arr.size != D:
                raise DimensionError(f"{name} must have {D} components, got shape {arr.shape}")
            if not np.all(np.isfinite(arr)):
                raise ParameterError(f"{name} must be finite")
            object.__setattr__(self, name, tuple(float(c) for c in arr))
        for name in ("M", "max_steps"):
            val = getattr(self, name)
            if isinstance(val, bool) or not isinstance(val, (int, np.integer)):
                raise ParameterError(f"{name} must be an integer, got {val!r}")
            object.__setattr__(self, name, int(val))
        if self.M < 0:
            raise ParameterError(f"M must be >= 0, got {self.M}")
        if self.max_steps < 1:
            raise ParameterError(f"max_steps must be >= 1, got {self.max_steps}")
        object.__setattr__(self, "seed", _check_seed(self.seed))
        if self.crossing_mode not in CROSSING_MODES:
            raise ParameterError(f"crossing_mode must be one of {CROSSING_MODES}, got {self.crossing_mode!r}")
        if self.engine not in ENGINES:
            raise ParameterError(f"engine must be one of {ENGINES}, got {self.engine!r}")
        if self.workers is not None and (not isinstance(self.workers, (int, np.integer)) or self.workers < 1):
            raise ParameterError(f"workers must be a positive integer, got {self.workers!r}")

    @property
    def d(self) -> int:
        return self.ambient_dim - 1

    @property
    def sigma2(self) -> float:
        return 2.0 * self.D_coef

    @property
    def velocity(self) -> np.ndarray:
        if self.v is not None:
            return np.asarray(self.v, dtype=float)
        return np.asarray(self.u, dtype=float) * self.sigma2

    @property
    def normalized_drift(self) -> np.ndarray:
        if self.u is not None:
            return np.asarray(self.u, dtype=float)
        return np.asarray(self.v, dtype=float) / self.sigma2


@dataclass(frozen=True)
class FapSampleSet:
    """Absorbed landing offsets (shape ``(absorbed, d)``) plus bookkeeping."""

    samples: np.ndarray
    absorbed: int
    escaped: int
    config_echo: Any
    wall_time: float
    steps: Optional[np.ndarray] = field(default=None, repr=False)

    @property
    def M(self) -> int:
        return self.absorbed + self.escaped

    @property
    def d(self) -> int:
        return self.samples.shape[1]

    @property
    def all_escaped(self) -> bool:
        """Warning flag: trajectories were run but none was absorbed."""
        return self.M > 0 and self.absorbed == 0


def _trajectory_chunk(args):
    """Run trajectories ``start .. stop - 1``; returns (positions, steps) with step 0 = escaped."""
    seed, start, stop, lam, mu_vert, mu_par, s, max_steps, bridge, engine = args
    kernel = levy_trajectory if engine == "levy" else stepwise_trajectory
    n = stop - start
    pos = np.zeros((n, mu_par.shape[0]))
    steps = np.zeros(n, dtype=np.int64)
    base = seed << 64
    for t in range(n):
        rng = np.random.Generator(np.random.Philox(key=base | (start + t)))
        steps[t] = kernel(rng, lam, mu_vert, mu_par, s, max_steps, bridge, pos[t])
    return pos, steps


def simulate_fap(config: SimConfig) -> FapSampleSet:
    """Simulate ``config.M`` trajectories and collect their first-arrival positions.

    Escaped trajectories (no crossing within ``max_steps``) are dropped from the
    samples and counted.  The result depends only on ``config`` minus ``workers``.
    """
    t0 = time.perf_counter()
    vel = config.velocity
    s = math.sqrt(config.sigma2 * config.dt)
    mu_par = np.ascontiguousarray(vel[:-1] * config.dt)
    mu_vert = float(vel[-1] * config.dt)
    bridge = config.crossing_mode == "bridge"
    jobs = [
        (config.seed, lo, min(lo + CHUNK, config.M), config.lam, mu_vert, mu_par, s,
         config.max_steps, bridge, config.engine)
        for lo in range(0, config.M, CHUNK)
    ]
    workers = config.workers if config.workers is not None else default_workers()
    workers = max(1, min(workers, len(jobs)))
    if workers == 1:
        parts = [_trajectory_chunk(job) for job in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_trajectory_chunk, jobs))
    if parts:
        pos = np.concatenate([p for p, _ in parts])
        steps = np.concatenate([k for _, k in parts])
    else:
        pos = np.zeros((0, config.d))
        steps = np.zeros(0, dtype=np.int64)
    hit = steps > 0
    out = FapSampleSet(
        samples=pos[hit],
        absorbed=int(hit.sum()),
        escaped=int((~hit).sum()),
        config_echo=config,
        wall_time=time.perf_counter() - t0,
        steps=steps[hit],
    )
    if out.all_escaped:
        warnings.warn(f"all {config.M} trajectories escaped within max_steps={config.max_steps}",
                      RuntimeWarning, stacklevel=2)
    return out


def vdfap_rng(seed: int, stream: int = 0) -> np.random.Generator:
    """Generator for the exact sampler; distinct ``stream`` values give independent draws."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([_check_seed(seed), int(stream), _EXACT_TAG])))


def inverse_gaussian(rng: np.random.Generator, mean: float, shape: float, size: int) -> np.ndarray:
    """Inverse-Gaussian draws by the Michael-Schucany-Haas transformation.

    The smaller root is formed as ``mean^2 / larger_root`` instead of by
    subtraction, which keeps it accurate when ``mean / shape`` is huge.
    """
    y = rng.standard_normal(size) ** 2
    my = mean * y
    big = mean + mean * my / (2.0 * shape) + (mean / (2.0 * shape)) * np.sqrt(4.0 * shape * my + my * my)
    small = mean * mean / big
    pick_small = rng.random(size) * (mean + small) <= mean
    return np.where(pick_small, small, big)


def sample_vdfap_exact(params: VdfapParams, M: int, seed: int, stream: int = 0) -> FapSampleSet:
    """Draw ``M`` exact VDFAP(u, lam) samples without time stepping.

    In units with unit diffusion, the passage time of the vertical coordinate is
    inverse Gaussian with mean ``lam / |u|`` and shape ``lam^2``; given that time
    ``T`` the parallel offset is ``N(0, T I_d)``.
    """
    if not isinstance(params, VdfapParams):
        raise ParameterError("sample_vdfap_exact needs VdfapParams (vertical drift u < 0)")
    if isinstance(M, bool) or not isinstance(M, (int, np.integer)) or M < 0:
        raise ParameterError(f"M must be a non-negative integer, got {M!r}")
    t0 = time.perf_counter()
    rng = vdfap_rng(seed, stream)
    M = int(M)
    T = inverse_gaussian(rng, params.lam / params.abs_u, params.lam ** 2, M)
    z = rng.standard_normal((M, params.d))
    samples = np.sqrt(T)[:, None] * z
    return FapSampleSet(samples=samples, absorbed=M, escaped=0, config_echo=params,
                        wall_time=time.perf_counter() - t0)


@dataclass(frozen=True)
class GridAxis:
    lo: float
    hi: float
    bins: int

    def __post_init__(self):
        if isinstance(self.bins, bool) or not isinstance(self.bins, (int, np.integer)) or self.bins < 1:
            raise ParameterError(f"bins must be a positive integer, got {self.bins!r}")
        lo, hi = float(self.lo), float(self.hi)
        if not (math.isfinite(lo) and math.isfinite(hi)) or not hi > lo:
            raise ParameterError(f"axis needs finite lo < hi (zero-width bins), got [{lo}, {hi}]")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)
        object.__setattr__(self, "bins", int(self.bins))

    @property
    def width(self) -> float:
        return (self.hi - self.lo) / self.bins

    @property
    def edges(self) -> np.ndarray:
        return np.linspace(self.lo, self.hi, self.bins + 1)

    @property
    def centers(self) -> np.ndarray:
        return self.lo + self.width * (np.arange(self.bins) + 0.5)


@dataclass(frozen=True)
class DensityGrid:
    """Values on a rectangular grid, ``values.shape == tuple(a.bins for a in axes)``.

    ``M`` is the number of trajectories behind an empirical grid (None for grids
    filled from a formula); ``out_of_grid`` counts absorbed samples outside the box.
    """

    axes: tuple
    values: np.ndarray
    normalization: str = "density"
    M: Optional[int] = None
    out_of_grid: int = 0
    truncated: bool = False

    def __post_init__(self):
        if self.normalization not in NORMALIZATIONS:
            raise ParameterError(f"normalization must be one of {NORMALIZATIONS}, got {self.normalization!r}")
        object.__setattr__(self, "axes", tuple(self.axes))
        shape = tuple(a.bins for a in self.axes)
        if np.shape(self.values) != shape:
            raise DimensionError(f"values shape {np.shape(self.values)} does not match axes {shape}")

    @property
    def d(self) -> int:
        return len(self.axes)

    @property
    def cell_volume(self) -> float:
        return float(np.prod([a.width for a in self.axes]))

    def centers(self) -> np.ndarray:
        """Cell centers, shape ``bins_1 x ... x bins_d x d`` (row-major)."""
        mesh = np.meshgrid(*[a.centers for a in self.axes], indexing="ij")
        return np.stack(mesh, axis=-1)

    def mass(self) -> float:
        total = float(np.sum(self.values))
        return total * self.cell_volume if self.normalization == "density" else total


def build_histogram(samples: FapSampleSet, axes: Sequence[GridAxis], normalization: str = "density",
                    truncate: bool = False) -> DensityGrid:
    """Bin the absorbed samples; counts are divided by ``M`` (or ``M * cell_volume``).

    Escaped trajectories count in ``M``, so their mass is simply missing.
    ``truncate`` zeroes cells below 1e-3, a display convenience only.
    """
    axes = tuple(axes)
    if normalization not in NORMALIZATIONS:
        raise ParameterError(f"normalization must be one of {NORMALIZATIONS}, got {normalization!r}")
    if len(axes) != samples.d:
        raise DimensionError(f"{len(axes)} axes for {samples.d}-dimensional samples")
    counts, _ = np.histogramdd(samples.samples, bins=[a.edges for a in axes])
    inside = int(counts.sum())
    M = samples.M
    scale = float(M) if normalization == "relative-frequency" else M * float(np.prod([a.width for a in axes]))
    values = counts / scale if M > 0 else counts
    if truncate:
        values = np.where(values < TRUNCATION_LEVEL, 0.0, values)
    return DensityGrid(axes, values, normalization, M=M, out_of_grid=samples.absorbed - inside, truncated=truncate)
