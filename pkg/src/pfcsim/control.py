"""Discrete PI regulation shared by the series, shunt, and router stages."""

from __future__ import annotations

import math
from dataclasses import dataclass, field


@dataclass
class PiController:
    """Discrete PI with conditional-integration anti-windup.

    Output is k_p*error + integral state; the integral advances by
    k_p*t_s/tau_i * error per step and is frozen while the output
    saturates (either against the scalar limits configured here, or
    externally via the ``freeze`` argument when the caller clamps a
    vector of outputs).
    """

    k_p: float
    tau_i: float
    t_s: float
    u_min: float | None = None
    u_max: float | None = None
    integral: float = field(default=0.0)
    saturated: bool = field(default=False)

    def step(self, error: float, freeze: bool = False) -> float:
        gain_int = self.k_p * self.t_s / self.tau_i
        tentative = self.integral + gain_int * error
        u = self.k_p * error + tentative
        clamped = u
        if self.u_max is not None and clamped > self.u_max:
            clamped = self.u_max
        if self.u_min is not None and clamped < self.u_min:
            clamped = self.u_min
        self.saturated = clamped != u
        if not (freeze or self.saturated):
            self.integral = tentative
        return clamped

    def reset(self) -> None:
        self.integral = 0.0
        self.saturated = False


def crossover_and_margin(loop_response, w_lo: float, w_hi: float, n: int = 4000):
    """Locate the gain crossover of ``loop_response(w)`` and its phase margin.

    Scans a log grid for |G| crossing unity, then bisects. Returns
    (w_c, margin_rad); raises ValueError when no crossover lies in range.
    The phase is accumulated by unwrapping along the grid so delays with
    more than pi of lag are handled.
    """
    ws = [w_lo * (w_hi / w_lo) ** (k / (n - 1)) for k in range(n)]
    mags = [abs(loop_response(w)) for w in ws]
    idx = None
    for k in range(n - 1):
        if (mags[k] - 1.0) * (mags[k + 1] - 1.0) <= 0.0 and mags[k] != mags[k + 1]:
            idx = k
            break
    if idx is None:
        raise ValueError("no gain crossover in the scanned range")
    lo, hi = ws[idx], ws[idx + 1]
    for _ in range(80):
        mid = math.sqrt(lo * hi)
        if (abs(loop_response(lo)) - 1.0) * (abs(loop_response(mid)) - 1.0) <= 0.0:
            hi = mid
        else:
            lo = mid
    w_c = math.sqrt(lo * hi)
    # unwrap phase from the low end of the grid up to the crossover
    phase = 0.0
    prev = loop_response(ws[0])
    prev_arg = math.atan2(prev.imag, prev.real)
    phase = prev_arg
    for w in ws[1:]:
        if w > w_c:
            break
        g = loop_response(w)
        arg = math.atan2(g.imag, g.real)
        delta = arg - prev_arg
        while delta > math.pi:
            delta -= 2.0 * math.pi
        while delta < -math.pi:
            delta += 2.0 * math.pi
        phase += delta
        prev_arg = arg
    g = loop_response(w_c)
    arg = math.atan2(g.imag, g.real)
    delta = arg - prev_arg
    while delta > math.pi:
        delta -= 2.0 * math.pi
    while delta < -math.pi:
        delta += 2.0 * math.pi
    phase += delta
    return w_c, phase + math.pi
