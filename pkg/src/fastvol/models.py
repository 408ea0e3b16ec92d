"""Contract descriptions: option flag, pricing model, per-contract inputs."""

import enum
import math
from dataclasses import dataclass
from typing import Optional

from .errors import DomainError

CALL = 1
PUT = -1


def parse_flag(flag) -> int:
    """Map 'c'/'C' -> +1 and 'p'/'P' -> -1; anything else is rejected."""
    if flag == "c" or flag == "C":
        return CALL
    if flag == "p" or flag == "P":
        return PUT
    raise DomainError(f"option flag must be 'c' or 'p', got {flag!r}")


def flag_char(theta: int) -> str:
    return "c" if theta > 0 else "p"


class Model(enum.Enum):
    BLACK76 = "black"
    BLACK_SCHOLES = "bs"
    BLACK_SCHOLES_MERTON = "bsm"

    @property
    def is_forward(self) -> bool:
        """Black-76 reads the underlying input as a forward F."""
        return self is Model.BLACK76

    @classmethod
    def parse(cls, name: str) -> "Model":
        aliases = {
            "black": cls.BLACK76, "black76": cls.BLACK76, "b76": cls.BLACK76,
            "bs": cls.BLACK_SCHOLES, "black_scholes": cls.BLACK_SCHOLES,
            "bsm": cls.BLACK_SCHOLES_MERTON,
            "black_scholes_merton": cls.BLACK_SCHOLES_MERTON,
        }
        key = str(name).lower()
        if key not in aliases:
            raise DomainError(f"unknown model {name!r}")
        return aliases[key]


@dataclass(frozen=True)
class PricingInputs:
    """One contract's inputs.  ``underlying`` is the forward F for Black-76
    and the spot S otherwise; ``q`` must be 0 unless the model is BSM."""

    model: Model
    underlying: float
    strike: float
    t: float
    r: float
    q: float = 0.0
    sigma: Optional[float] = None

    def validate(self, need_sigma: bool = True) -> None:
        if not (math.isfinite(self.underlying) and self.underlying > 0.0):
            raise DomainError(f"underlying must be positive, got {self.underlying!r}")
        if not (math.isfinite(self.strike) and self.strike > 0.0):
            raise DomainError(f"strike must be positive, got {self.strike!r}")
        if not (math.isfinite(self.t) and self.t >= 0.0):
            raise DomainError(f"t must be >= 0, got {self.t!r}")
        if not math.isfinite(self.r):
            raise DomainError(f"r must be finite, got {self.r!r}")
        if not math.isfinite(self.q):
            raise DomainError(f"q must be finite, got {self.q!r}")
        if need_sigma:
            if self.sigma is None or not (math.isfinite(self.sigma) and self.sigma >= 0.0):
                raise DomainError(f"sigma must be >= 0, got {self.sigma!r}")

    @property
    def forward(self) -> float:
        if self.model.is_forward:
            return self.underlying
        return self.underlying * math.exp((self.r - self.q) * self.t)

    @property
    def discount(self) -> float:
        return math.exp(-self.r * self.t)
