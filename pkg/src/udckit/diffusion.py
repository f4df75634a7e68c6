"""DDPM schedule, forward/reverse maths and a sampler driven by any noise
predictor, plus the losses and [0, 1] <-> [-1, 1] normalizations used around
the generative models.

Steps are 1-based: ``t = 1 .. T``, and ``schedule.beta[t - 1]`` is beta_t.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Dict, Sequence, Tuple

import numpy as np

from .core import UdcField
from .mesh_io import make_rng

LATENT_SHAPE = (64, 16, 16, 16)
DEFAULT_STEPS = 1000

# (z_t, t) -> predicted noise, same shape as z_t
Denoiser = Callable[[np.ndarray, int], np.ndarray]


@dataclass(frozen=True, eq=False)
class NoiseSchedule:
    beta: np.ndarray
    beta_start: float
    beta_end: float
    kind: str = "linear"

    def __post_init__(self):
        beta = np.array(self.beta, dtype=np.float64).reshape(-1)
        if not len(beta) or np.any(beta <= 0) or np.any(beta >= 1):
            raise ValueError("every beta must lie in (0, 1)")
        beta.setflags(write=False)
        object.__setattr__(self, "beta", beta)
        alpha = 1.0 - beta
        alpha.setflags(write=False)
        object.__setattr__(self, "alpha", alpha)
        alpha_bar = np.cumprod(alpha)
        alpha_bar.setflags(write=False)
        object.__setattr__(self, "alpha_bar", alpha_bar)

    @property
    def T(self) -> int:
        return len(self.beta)

    def to_dict(self) -> Dict:
        return {"T": self.T, "beta_start": self.beta_start, "beta_end": self.beta_end, "kind": self.kind}

    @classmethod
    def from_dict(cls, d: Dict) -> "NoiseSchedule":
        if d.get("kind", "linear") != "linear":
            raise ValueError(f"unsupported schedule kind {d.get('kind')!r}")
        return make_schedule(int(d["T"]), float(d["beta_start"]), float(d["beta_end"]))

    def _check_t(self, t: int) -> int:
        t = int(t)
        if not 1 <= t <= self.T:
            raise ValueError(f"step {t} outside 1..{self.T}")
        return t


def make_schedule(T: int = DEFAULT_STEPS, beta_start: float = 1e-4, beta_end: float = 0.02) -> NoiseSchedule:
    """Linear beta schedule over ``T`` steps."""
    if T < 1:
        raise ValueError("T must be >= 1")
    if not 0 < beta_start <= beta_end < 1:
        raise ValueError("need 0 < beta_start <= beta_end < 1")
    return NoiseSchedule(np.linspace(beta_start, beta_end, T), beta_start, beta_end)


def _same_shape(*arrays):
    arrays = [np.asarray(a, dtype=np.float64) for a in arrays]
    if any(a.shape != arrays[0].shape for a in arrays[1:]):
        raise ValueError(f"shape mismatch: {[a.shape for a in arrays]}")
    return arrays


def forward_sample(z0, t: int, eps, s: NoiseSchedule) -> np.ndarray:
    """z_t = sqrt(abar_t) z0 + sqrt(1 - abar_t) eps."""
    z0, eps = _same_shape(z0, eps)
    ab = s.alpha_bar[s._check_t(t) - 1]
    return np.sqrt(ab) * z0 + np.sqrt(1.0 - ab) * eps


def forward_step(z_prev, t: int, noise, s: NoiseSchedule) -> np.ndarray:
    """One draw of q(z_t | z_{t-1}) = N(sqrt(alpha_t) z_{t-1}, beta_t I)."""
    z_prev, noise = _same_shape(z_prev, noise)
    t = s._check_t(t)
    return np.sqrt(s.alpha[t - 1]) * z_prev + np.sqrt(s.beta[t - 1]) * noise


def reverse_mean(z_t, t: int, eps_pred, s: NoiseSchedule) -> np.ndarray:
    """mu(z_t, t) = (z_t - beta_t / sqrt(1 - abar_t) * eps_pred) / sqrt(alpha_t)."""
    z_t, eps_pred = _same_shape(z_t, eps_pred)
    t = s._check_t(t)
    beta, alpha, ab = s.beta[t - 1], s.alpha[t - 1], s.alpha_bar[t - 1]
    return (z_t - beta / np.sqrt(1.0 - ab) * eps_pred) / np.sqrt(alpha)


def ddpm_sample(denoiser: Denoiser, shape: Sequence[int], seed, s: NoiseSchedule) -> np.ndarray:
    """Ancestral sampling from z_T ~ N(0, I) down to z_0.

    Each step adds sqrt(beta_t) * N(0, I) noise except the last (t = 1).
    The random stream is PCG64 seeded with ``seed``.
    """
    rng = make_rng(seed)
    shape = tuple(int(n) for n in shape)
    z = rng.standard_normal(shape)
    for t in range(s.T, 0, -1):
        eps = np.asarray(denoiser(z, t), dtype=np.float64)
        if eps.shape != shape:
            raise ValueError(f"denoiser returned shape {eps.shape}, expected {shape}")
        z_mean = reverse_mean(z, t, eps, s)
        if t > 1:
            z = z_mean + np.sqrt(s.beta[t - 1]) * rng.standard_normal(shape)
        else:
            z = z_mean
    return z


class OracleDenoiser:
    """Exact noise predictor for a data distribution concentrated on one
    datum: eps(z_t, t) = (z_t - sqrt(abar_t) z*) / sqrt(1 - abar_t)."""

    def __init__(self, datum, schedule: NoiseSchedule):
        self.datum = np.asarray(datum, dtype=np.float64)
        self.schedule = schedule

    def __call__(self, z_t, t):
        ab = self.schedule.alpha_bar[t - 1]
        return (np.asarray(z_t) - np.sqrt(ab) * self.datum) / np.sqrt(1.0 - ab)


class ZeroDenoiser:
    def __call__(self, z_t, t):
        return np.zeros_like(np.asarray(z_t, dtype=np.float64))


def dm_loss(eps, eps_pred) -> float:
    """Mean absolute error between true and predicted noise."""
    eps, eps_pred = _same_shape(eps, eps_pred)
    return float(np.mean(np.abs(eps - eps_pred)))


def vae_loss(recon, target, mu, sigma) -> float:
    """MSE reconstruction plus the mean closed-form KL(N(mu, sigma) || N(0, 1))."""
    recon, target, mu, sigma = _same_shape(recon, target, mu, sigma)
    if np.any(sigma <= 0):
        raise ValueError("sigma must be positive")
    mse = np.mean((recon - target) ** 2)
    kl = np.mean(0.5 * (mu ** 2 + sigma ** 2 - 1.0 - 2.0 * np.log(sigma)))
    return float(mse + kl)


def refiner_loss(v_gt, v_pred) -> float:
    v_gt, v_pred = _same_shape(v_gt, v_pred)
    return float(np.mean((v_gt - v_pred) ** 2))


def normalize_parts(udc: UdcField) -> Tuple[np.ndarray, Tuple[np.ndarray, np.ndarray, np.ndarray]]:
    """Vertex part mapped [0, 1] -> [-1, 1], flags mapped {False, True} -> {-1, +1}."""
    v = 2.0 * udc.vertex_part.astype(np.float64) - 1.0
    f = tuple(np.where(flags, 1.0, -1.0) for flags in udc.face_part)
    return v, f


def denormalize_parts(grid, vertex, faces) -> UdcField:
    """Inverse of :func:`normalize_parts`: flags are ``value > 0``, vertices
    are clamped to [0, 1]."""
    v = np.clip((np.asarray(vertex, dtype=np.float64) + 1.0) * 0.5, 0.0, 1.0)
    f = tuple(np.asarray(x) > 0 for x in faces)
    return UdcField(grid, v, f)


@dataclass(frozen=True)
class MinMaxNormalizer:
    """Affine map of ``[lo, hi]`` onto ``[-1, 1]``, e.g. for latent codes."""

    lo: float
    hi: float

    @classmethod
    def fit(cls, data) -> "MinMaxNormalizer":
        data = np.asarray(data, dtype=np.float64)
        lo, hi = float(data.min()), float(data.max())
        if not hi > lo:
            raise ValueError("data has zero range")
        return cls(lo, hi)

    def normalize(self, x) -> np.ndarray:
        return 2.0 * (np.asarray(x, dtype=np.float64) - self.lo) / (self.hi - self.lo) - 1.0

    def denormalize(self, x) -> np.ndarray:
        return (np.asarray(x, dtype=np.float64) + 1.0) * 0.5 * (self.hi - self.lo) + self.lo

    def to_dict(self) -> Dict:
        return {"min": self.lo, "max": self.hi}

    @classmethod
    def from_dict(cls, d: Dict) -> "MinMaxNormalizer":
        return cls(float(d["min"]), float(d["max"]))


def flatten_parts(vertex, faces) -> np.ndarray:
    return np.concatenate([np.ravel(vertex)] + [np.ravel(f) for f in faces])


def unflatten_parts(flat, grid):
    flat = np.asarray(flat)
    n = 3 * grid.cube_count
    vertex = flat[:n].reshape(grid.vertex_shape)
    faces, pos = [], n
    for shape in grid.face_shapes:
        size = int(np.prod(shape))
        faces.append(flat[pos:pos + size].reshape(shape))
        pos += size
    if pos != len(flat):
        raise ValueError("flat vector does not match the grid")
    return vertex, tuple(faces)
