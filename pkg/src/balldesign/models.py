"""Intensity functions for the elemental information ``lambda(eta) f f'``.

Each built-in model carries its intensity, first derivative, the second
derivative of ``u = 1/lambda`` and the location of its mode. The solver
works almost exclusively with ``log lambda`` and the score ``lambda'/lambda``
so the probit tails never have to be formed explicitly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.special import erfcx, ndtr

__all__ = [
    "DomainError",
    "IntensityModel",
    "ShiftedIntensity",
    "LOGIT",
    "PROBIT",
    "EXPONENTIAL",
    "MODELS",
    "get_model",
    "lam",
    "lam_prime",
    "u_second",
    "q_bundle",
]

_LOG_2PI = math.log(2.0 * math.pi)
_SQRT2 = math.sqrt(2.0)
_SQRT_2_OVER_PI = math.sqrt(2.0 / math.pi)
_SQRT_PI_OVER_2 = math.sqrt(math.pi / 2.0)


class DomainError(ValueError):
    """Raised when an intensity is evaluated at a non-finite argument."""


def _check_finite(x):
    arr = np.asarray(x, dtype=float)
    if not np.isfinite(arr).all():
        raise DomainError(f"intensity argument must be finite, got {x!r}")
    return arr


def _scalar_or_array(arr):
    return float(arr) if np.ndim(arr) == 0 else arr


@dataclass(frozen=True)
class IntensityModel:
    """An intensity function together with its analytic companions.

    Parameters
    ----------
    name : str
        Identifier used by the CLI and problem files.
    intensity, intensity_prime, u2 : callable
        ``lambda``, ``lambda'`` and ``(1/lambda)''``; all must accept numpy
        arrays.
    mode : float
        ``c_lambda``. ``+inf`` for strictly increasing intensities,
        ``-inf`` for strictly decreasing ones.
    log_intensity_fn, score_fn : callable, optional
        Stable versions of ``log lambda`` and ``lambda'/lambda``. Derived
        from the plain intensity when omitted.

    The ``satisfies_*`` flags are declared, never detected: injectivity of
    ``u''`` is analytic knowledge.
    """

    name: str
    intensity: Callable
    intensity_prime: Callable
    u2: Callable
    mode: float = math.inf
    log_intensity_fn: Optional[Callable] = field(default=None, repr=False)
    score_fn: Optional[Callable] = field(default=None, repr=False)
    satisfies_A2: bool = False
    satisfies_A2prime: bool = False
    satisfies_A3: bool = False
    satisfies_A3prime: bool = False
    satisfies_A4: bool = False
    satisfies_A5: bool = False

    def log_intensity(self, x):
        x = _check_finite(x)
        if self.log_intensity_fn is not None:
            return _scalar_or_array(self.log_intensity_fn(x))
        return _scalar_or_array(np.log(self.intensity(x)))

    def score(self, x):
        """``lambda'(x) / lambda(x)``."""
        x = _check_finite(x)
        if self.score_fn is not None:
            return _scalar_or_array(self.score_fn(x))
        return _scalar_or_array(self.intensity_prime(x) / self.intensity(x))

    @property
    def unimodal(self) -> bool:
        return math.isfinite(self.mode)


# -- logit -------------------------------------------------------------------


def _logit_log(x):
    a = np.abs(x)
    return -a - 2.0 * np.log1p(np.exp(-a))


def _logit_score(x):
    return -np.tanh(0.5 * x)


LOGIT = IntensityModel(
    name="logit",
    intensity=lambda x: np.exp(_logit_log(x)),
    intensity_prime=lambda x: np.exp(_logit_log(x)) * _logit_score(x),
    u2=lambda x: 2.0 * np.cosh(x),
    mode=0.0,
    log_intensity_fn=_logit_log,
    score_fn=_logit_score,
    satisfies_A2prime=True,
    satisfies_A3prime=True,
    satisfies_A4=True,
    satisfies_A5=True,
)


# -- probit ------------------------------------------------------------------
# Upper tails are written with erfcx: 1 - Phi(t) = 0.5 erfcx(t/sqrt2) exp(-t^2/2),
# which keeps every quantity finite in log space for all |x|.


def _probit_log(x):
    t = np.abs(x)
    return (-0.5 * t * t - _LOG_2PI - np.log(ndtr(t))
            - np.log(0.5 * erfcx(t / _SQRT2)))


def _probit_score(x):
    t = np.abs(x)
    pdf = np.exp(-0.5 * t * t) / math.sqrt(2.0 * math.pi)
    val = -2.0 * t - pdf / ndtr(t) + _SQRT_2_OVER_PI / erfcx(t / _SQRT2)
    return np.sign(x) * val


def _probit_u2(x):
    t = np.abs(x)
    mills = _SQRT_PI_OVER_2 * erfcx(t / _SQRT2)
    with np.errstate(over="ignore"):
        cdf_over_pdf = ndtr(t) * math.sqrt(2.0 * math.pi) * np.exp(0.5 * t * t)
    return cdf_over_pdf * ((2.0 + 4.0 * t * t) * mills - 3.0 * t) + 3.0 * t * mills - 2.0


PROBIT = IntensityModel(
    name="probit",
    intensity=lambda x: np.exp(_probit_log(x)),
    intensity_prime=lambda x: np.exp(_probit_log(x)) * _probit_score(x),
    u2=_probit_u2,
    mode=0.0,
    log_intensity_fn=_probit_log,
    score_fn=_probit_score,
    satisfies_A2prime=True,
    satisfies_A3prime=True,
    satisfies_A4=True,
    satisfies_A5=True,
)


# -- exponential (Poisson-type) ---------------------------------------------

EXPONENTIAL = IntensityModel(
    name="exponential",
    intensity=np.exp,
    intensity_prime=np.exp,
    u2=lambda x: np.exp(-x),
    mode=math.inf,
    log_intensity_fn=lambda x: np.asarray(x, dtype=float),
    score_fn=lambda x: np.ones_like(np.asarray(x, dtype=float)),
    satisfies_A2=True,
    satisfies_A3=True,
    satisfies_A4=True,
)

MODELS = {m.name: m for m in (LOGIT, PROBIT, EXPONENTIAL)}


def get_model(model) -> IntensityModel:
    """Look up a built-in model by name; pass through ``IntensityModel``s."""
    if isinstance(model, IntensityModel):
        return model
    try:
        return MODELS[str(model).lower()]
    except KeyError:
        raise ValueError(
            f"unknown model {model!r}; choose from {sorted(MODELS)}") from None


def lam(model, x):
    """Intensity ``lambda(x)``.

    Probit values below the float64 range (|x| > ~38.4) underflow to zero;
    use ``model.log_intensity`` there.
    """
    model = get_model(model)
    x = _check_finite(x)
    return _scalar_or_array(model.intensity(x))


def lam_prime(model, x):
    model = get_model(model)
    x = _check_finite(x)
    return _scalar_or_array(model.intensity_prime(x))


def u_second(model, x):
    """Second derivative of ``u = 1/lambda``."""
    model = get_model(model)
    x = _check_finite(x)
    return _scalar_or_array(model.u2(x))


@dataclass(frozen=True)
class ShiftedIntensity:
    """``q(x1) = lambda(beta0 + beta1 * x1)`` for a canonical problem."""

    model: IntensityModel
    beta0: float
    beta1: float

    def __post_init__(self):
        object.__setattr__(self, "model", get_model(self.model))
        if not (math.isfinite(self.beta0) and math.isfinite(self.beta1)):
            raise DomainError("beta0 and beta1 must be finite")
        if self.beta1 < 0:
            raise ValueError("beta1 must be >= 0; canonicalize the parameters first")

    def _eta(self, x1):
        return self.beta0 + self.beta1 * np.asarray(x1, dtype=float)

    def q(self, x1):
        return lam(self.model, self._eta(x1))

    def q_prime(self, x1):
        return self.beta1 * lam_prime(self.model, self._eta(x1))

    def log_q(self, x1):
        return self.model.log_intensity(self._eta(x1))

    def score(self, x1):
        """``q'(x1) / q(x1)``."""
        return self.beta1 * self.model.score(self._eta(x1))

    @property
    def mode(self) -> float:
        """``c_q = (c_lambda - beta0) / beta1``; infinite for monotone models."""
        if self.beta1 == 0:
            raise ValueError("c_q is undefined for beta1 = 0")
        c = self.model.mode
        if math.isinf(c):
            return c
        return (c - self.beta0) / self.beta1


def q_bundle(s: ShiftedIntensity, x1):
    """Return ``(q(x1), q'(x1))``."""
    return s.q(x1), s.q_prime(x1)
