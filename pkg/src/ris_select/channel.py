"""Cascaded Rayleigh fading and network configuration.

Each surface has N elements; with ideal phase alignment the end-to-end
amplitude gain is Z = sum_n a_n * b_n where a_n, b_n are independent
Rayleigh amplitudes with scale 1/sqrt(2), i.e. E[a^2] = 1 (unit-variance
complex Gaussian channels).  Only the link actually selected carries a
fading draw, so no per-node fading state is kept anywhere.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

_RAYLEIGH_SCALE = 1.0 / math.sqrt(2.0)
_PI2 = math.pi * math.pi


class PathLossModel(Enum):
    POWER_LAW = "power"
    EXP_LAW = "exp"


@dataclass(frozen=True)
class GammaApprox:
    """Moment-matched gamma approximation (shape k, scale theta) of Z."""

    k: float
    theta: float

    def __post_init__(self) -> None:
        if self.k <= 0.0 or self.theta <= 0.0:
            raise ValueError(f"shape and scale must be > 0, got k={self.k}, theta={self.theta}")


@dataclass
class NetworkConfig:
    """Scenario parameters, all in linear scale.

    d               half the TX-RX separation (units)
    intensity       node density (nodes/units^2)
    n_elements      reflecting elements per surface
    model           path-loss law: power d^eta or exponential exp(alpha*d)
    eta             power-law exponent (> 2)
    alpha           exponential-law rate (1/units)
    avg_snr         transmit SNR gamma-bar (linear)
    target_snr      outage threshold rho (linear)
    """

    d: float
    intensity: float
    n_elements: int
    model: PathLossModel
    eta: float = 4.0
    alpha: float = 1.037
    avg_snr: float = 1.0
    target_snr: float = 10.0 ** 0.5

    def __post_init__(self) -> None:
        if self.d <= 0.0:
            raise ValueError(f"d must be > 0, got {self.d}")
        if self.intensity <= 0.0:
            raise ValueError(f"intensity must be > 0, got {self.intensity}")
        if int(self.n_elements) != self.n_elements or self.n_elements < 1:
            raise ValueError(f"n_elements must be a positive integer, got {self.n_elements}")
        self.n_elements = int(self.n_elements)
        if self.model is PathLossModel.POWER_LAW and not self.eta > 2.0:
            raise ValueError(f"power law requires eta > 2, got {self.eta}")
        if self.model is PathLossModel.EXP_LAW and not self.alpha > 0.0:
            raise ValueError(f"exponential law requires alpha > 0, got {self.alpha}")
        if self.avg_snr <= 0.0:
            raise ValueError(f"avg_snr must be > 0, got {self.avg_snr}")
        if self.target_snr < 0.0:
            raise ValueError(f"target_snr must be >= 0, got {self.target_snr}")


def sample_z(n_elements: int, rng: np.random.Generator, size=None):
    """Draw the aligned fading gain Z = sum of N Rayleigh-product terms.

    Returns a float when ``size`` is None, otherwise an array of that shape.
    """
    if n_elements < 1:
        raise ValueError(f"n_elements must be >= 1, got {n_elements}")
    shape = (n_elements,) if size is None else tuple(np.atleast_1d(size)) + (n_elements,)
    a = rng.rayleigh(_RAYLEIGH_SCALE, shape)
    b = rng.rayleigh(_RAYLEIGH_SCALE, shape)
    z = (a * b).sum(axis=-1)
    return float(z) if size is None else z


def ez2(n_elements: int) -> float:
    """Exact second moment E[Z^2] = N + N(N-1) pi^2 / 16."""
    n = float(n_elements)
    if n < 1:
        raise ValueError(f"n_elements must be >= 1, got {n_elements}")
    return n + n * (n - 1.0) * _PI2 / 16.0


def gamma_params(n_elements: int) -> GammaApprox:
    """Gamma shape/scale matching the mean N*pi/4 and variance N(16-pi^2)/16.

    k = N pi^2 / (16 - pi^2) grows linearly with N; theta = (16 - pi^2)/(4 pi)
    does not depend on N.
    """
    if n_elements < 1:
        raise ValueError(f"n_elements must be >= 1, got {n_elements}")
    k = n_elements * _PI2 / (16.0 - _PI2)
    theta = (16.0 - _PI2) / (4.0 * math.pi)
    return GammaApprox(k=k, theta=theta)


def pathloss_product(cfg: NetworkConfig, score: float) -> float:
    """Two-hop path-loss product G(d_s) * G(d_d) from the model's score.

    Under the power law the product of the hop losses depends on the node
    only through the distance product (score^eta); under the exponential law
    only through the distance sum (exp(alpha * score)).
    """
    if cfg.model is PathLossModel.POWER_LAW:
        return float(score) ** cfg.eta
    return math.exp(cfg.alpha * float(score))


def mean_snr(cfg: NetworkConfig, pathloss_product: float) -> float:
    """SNR averaged over fading: avg_snr * E[Z^2] / (G(d_s) G(d_d))."""
    if pathloss_product <= 0.0:
        raise ValueError(f"pathloss_product must be > 0, got {pathloss_product}")
    return cfg.avg_snr * ez2(cfg.n_elements) / pathloss_product
