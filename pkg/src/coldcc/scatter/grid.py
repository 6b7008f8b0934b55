"""Two-zone fixed-step radial grid for the log-derivative propagation."""
import dataclasses
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class PropagationGrid:
    r_start: float = 4.1
    r_switch: float = 24.0
    r_max: float = 450.0
    h_inner: float = 0.01
    h_outer: float = 0.1
    y0: float = 1.0e8   # hard-wall log-derivative seed at r_start, bohr^-1

    def __post_init__(self):
        if not (0.0 < self.r_start < self.r_switch < self.r_max):
            raise ValueError("need 0 < r_start < r_switch < r_max")
        if self.h_inner <= 0 or self.h_outer <= 0:
            raise ValueError("step sizes must be positive")
        if self.y0 <= 0:
            raise ValueError("wall seed must be positive")

    def zones(self) -> list:
        """[(step, points), ...]; each zone gets an even step count.

        The Simpson-weighted update needs an even number of steps per zone,
        so counts are rounded up and the step adjusted to keep the zone
        boundaries exact.
        """
        out = []
        for lo, hi, h in ((self.r_start, self.r_switch, self.h_inner),
                          (self.r_switch, self.r_max, self.h_outer)):
            m = max(2, int(round((hi - lo) / h)))
            if m % 2:
                m += 1
            out.append(((hi - lo) / m, np.linspace(lo, hi, m + 1)))
        return out

    def halved(self) -> "PropagationGrid":
        return dataclasses.replace(self, h_inner=self.h_inner / 2.0,
                                   h_outer=self.h_outer / 2.0)

    def extended(self, r_max: float) -> "PropagationGrid":
        return dataclasses.replace(self, r_max=r_max)
