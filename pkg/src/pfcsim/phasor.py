"""Complex rms phasors, three-phase containers, and synchronous-frame transforms.

Conventions used throughout the package:

* Phasors are rms quantities stored as complex numbers.
* d-q samples use peak (amplitude-invariant) scaling; the sqrt(2) factor is
  applied exactly once, at the phasor <-> time-domain boundary
  (:func:`phasor_to_dq` / :func:`dq_to_phasor`).
* The quadrature companion of a signal lags it by 90 degrees at the
  fundamental frequency.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

TWO_PI = 2.0 * math.pi
SQRT2 = math.sqrt(2.0)


def normalize_angle(theta: float) -> float:
    """Wrap an angle to (-pi, pi]; a tie at -pi maps to +pi."""
    wrapped = math.fmod(theta, TWO_PI)
    if wrapped > math.pi:
        wrapped -= TWO_PI
    elif wrapped <= -math.pi:
        wrapped += TWO_PI
    return wrapped


@dataclass(frozen=True)
class Phasor:
    """An rms phasor stored in rectangular form."""

    rect: complex

    @classmethod
    def from_polar(cls, magnitude: float, angle: float) -> "Phasor":
        if magnitude < 0.0:
            raise ValueError("phasor magnitude must be >= 0")
        return cls(cmath.rect(magnitude, angle))

    @property
    def magnitude(self) -> float:
        return abs(self.rect)

    @property
    def angle(self) -> float:
        return normalize_angle(cmath.phase(self.rect))

    def conjugate(self) -> "Phasor":
        return Phasor(self.rect.conjugate())

    def instantaneous(self, theta: float) -> float:
        """Time-domain value sqrt(2)*|X|*cos(theta + angle) at frame angle theta."""
        return SQRT2 * (self.rect * cmath.exp(1j * theta)).real

    def __add__(self, other: "Phasor | complex") -> "Phasor":
        return Phasor(self.rect + _as_complex(other))

    def __sub__(self, other: "Phasor | complex") -> "Phasor":
        return Phasor(self.rect - _as_complex(other))

    def __mul__(self, other: "Phasor | complex | float") -> "Phasor":
        return Phasor(self.rect * _as_complex(other))

    def __truediv__(self, other: "Phasor | complex | float") -> "Phasor":
        return Phasor(self.rect / _as_complex(other))

    def __neg__(self) -> "Phasor":
        return Phasor(-self.rect)

    def __complex__(self) -> complex:
        return self.rect


def _as_complex(value: "Phasor | complex | float") -> complex:
    if isinstance(value, Phasor):
        return value.rect
    return complex(value)


@dataclass(frozen=True)
class Impedance:
    """Series R + jX at a stated angular frequency."""

    resistance: float
    reactance: float
    omega: float

    def __post_init__(self) -> None:
        if self.resistance < 0.0:
            raise ValueError("resistance must be >= 0")
        if self.omega <= 0.0:
            raise ValueError("omega must be > 0")

    @property
    def z(self) -> complex:
        return complex(self.resistance, self.reactance)

    @property
    def magnitude(self) -> float:
        return abs(self.z)

    @property
    def angle(self) -> float:
        return cmath.phase(self.z)

    @property
    def inductance(self) -> float:
        return self.reactance / self.omega


@dataclass(frozen=True)
class ThreePhaseSet:
    """Exactly three per-phase entries; no balance is assumed."""

    a: object
    b: object
    c: object

    def __iter__(self):
        return iter((self.a, self.b, self.c))

    def map(self, fn) -> "ThreePhaseSet":
        return ThreePhaseSet(fn(self.a), fn(self.b), fn(self.c))


@dataclass(frozen=True)
class DqSample:
    """Synchronous-frame pair with the frame angle it was taken at."""

    d: float
    q: float
    theta: float = 0.0

    @property
    def as_complex(self) -> complex:
        return complex(self.d, self.q)

    @property
    def magnitude(self) -> float:
        return math.hypot(self.d, self.q)


def to_dq(direct: float, quadrature: float, theta: float) -> DqSample:
    """Rotate a stationary (direct, quadrature) pair into the frame at angle theta.

    A pure sinusoid at the frame frequency maps to constant d-q values.
    """
    c = math.cos(theta)
    s = math.sin(theta)
    return DqSample(direct * c + quadrature * s, -direct * s + quadrature * c, theta)


def from_dq(sample: DqSample) -> tuple[float, float]:
    """Inverse of :func:`to_dq`; returns the stationary (direct, quadrature) pair."""
    c = math.cos(sample.theta)
    s = math.sin(sample.theta)
    return (sample.d * c - sample.q * s, sample.d * s + sample.q * c)


def phasor_to_dq(ph: "Phasor | complex", frame_offset: float) -> DqSample:
    """Peak-scaled d-q representation of an rms phasor in a frame offset by frame_offset."""
    z = SQRT2 * _as_complex(ph) * cmath.exp(-1j * frame_offset)
    return DqSample(z.real, z.imag, frame_offset)


def dq_to_phasor(sample: DqSample, frame_offset: float = 0.0) -> Phasor:
    """Inverse of :func:`phasor_to_dq`."""
    return Phasor(sample.as_complex * cmath.exp(1j * frame_offset) / SQRT2)


def dq_power(v: DqSample, i: DqSample) -> complex:
    """Per-phase complex power P + jQ from peak-scaled voltage and current samples."""
    s = 0.5 * v.as_complex * i.as_complex.conjugate()
    return s


class QuadratureDelay:
    """Quarter-period delay line producing the 90-degree-lagging companion signal.

    Exact in steady state when a quarter period is an integer number of
    samples; the first quarter period after start-up is a transient.
    """

    def __init__(self, omega: float, dt: float):
        if omega <= 0.0 or dt <= 0.0:
            raise ValueError("omega and dt must be > 0")
        period = TWO_PI / omega
        self.n_delay = max(1, round(period / 4.0 / dt))
        self._buf = [0.0] * self.n_delay
        self._idx = 0

    def step(self, x: float) -> float:
        out = self._buf[self._idx]
        self._buf[self._idx] = x
        self._idx += 1
        if self._idx == self.n_delay:
            self._idx = 0
        return out

    def reset(self) -> None:
        self._buf = [0.0] * self.n_delay
        self._idx = 0


def quadrature_of(samples, omega: float, dt: float) -> list[float]:
    """Delay a sample stream by a quarter period of the fundamental at omega."""
    delay = QuadratureDelay(omega, dt)
    return [delay.step(x) for x in samples]
