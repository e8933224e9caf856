"""Scenario parameterization for the underlay estimation-throughput model.

All quantities are stored in linear units (mW, linear power gains, seconds,
Hz).  Decibels only appear when reading/writing scenario files and on the
command line.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, fields, replace
from pathlib import Path


class ChannelModel(enum.Enum):
    """Which small-scale channel the analysis assumes."""

    PATH_LOSS = "pathloss"
    FADING = "fading"

    @classmethod
    def parse(cls, text: str) -> "ChannelModel":
        key = text.strip().lower()
        aliases = {"pathloss": cls.PATH_LOSS, "path_loss": cls.PATH_LOSS,
                   "fading": cls.FADING, "rayleigh": cls.FADING}
        try:
            return aliases[key]
        except KeyError:
            raise ValueError(f"unknown channel model {text!r}") from None


class ParamsError(ValueError):
    """Raised with every violated invariant, not just the first."""

    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("invalid parameters: " + "; ".join(self.errors))


def db_to_linear(x_db):
    return 10.0 ** (x_db / 10.0)


def linear_to_db(x):
    if x <= 0:
        raise ValueError(f"linear value must be positive, got {x!r}")
    return 10.0 * math.log10(x)


@dataclass(frozen=True)
class SystemParams:
    """Full scenario in linear units.

    ``alpha_p`` and ``alpha_s`` are power *gains*, so a 100 dB path loss is
    stored as ``1e-10``.
    """

    p_tran: float = 1.0            # mW
    theta_i: float = 1e-11         # mW
    f_s: float = 1e6               # Hz
    alpha_p: float = 1e-10
    alpha_s: float = 1e-8
    frame_t: float = 0.1           # s
    sigma2_s: float = 1e-10        # mW
    sigma2_p: float = 1e-10        # mW
    mu: float = 0.025
    pc_bar: float = 0.95
    delta_sigma_db: float = 0.0
    channel: ChannelModel = ChannelModel.PATH_LOSS

    @property
    def gamma(self) -> float:
        """Received SNR at the secondary transmitter (linear)."""
        return self.alpha_p * self.p_tran / self.sigma2_s

    @property
    def max_samples(self) -> int:
        """Largest sample count that still leaves time for data."""
        return int(math.ceil(self.frame_t * self.f_s)) - 1

    def with_(self, **changes) -> "SystemParams":
        return replace(self, **changes)

    @classmethod
    def from_db(cls, *, p_tran_dbm=0.0, theta_i_dbm=-110.0, f_s_mhz=1.0,
                alpha_p_loss_db=100.0, alpha_s_loss_db=80.0, frame_ms=100.0,
                sigma2_s_dbm=-100.0, sigma2_p_dbm=-100.0, mu=0.025,
                pc_bar=0.95, delta_sigma_db=0.0,
                channel=ChannelModel.PATH_LOSS) -> "SystemParams":
        return cls(
            p_tran=db_to_linear(p_tran_dbm),
            theta_i=db_to_linear(theta_i_dbm),
            f_s=f_s_mhz * 1e6,
            alpha_p=db_to_linear(-alpha_p_loss_db),
            alpha_s=db_to_linear(-alpha_s_loss_db),
            frame_t=frame_ms * 1e-3,
            sigma2_s=db_to_linear(sigma2_s_dbm),
            sigma2_p=db_to_linear(sigma2_p_dbm),
            mu=mu,
            pc_bar=pc_bar,
            delta_sigma_db=delta_sigma_db,
            channel=channel,
        )

    def to_db(self) -> dict:
        """Scenario-file view of the parameters (dB / dBm / ms / MHz)."""
        return {
            "p_tran_dbm": linear_to_db(self.p_tran),
            "theta_i_dbm": linear_to_db(self.theta_i),
            "f_s_mhz": self.f_s / 1e6,
            "alpha_p_loss_db": -linear_to_db(self.alpha_p),
            "alpha_s_loss_db": -linear_to_db(self.alpha_s),
            "frame_ms": self.frame_t * 1e3,
            "sigma2_s_dbm": linear_to_db(self.sigma2_s),
            "sigma2_p_dbm": linear_to_db(self.sigma2_p),
            "mu": self.mu,
            "pc_bar": self.pc_bar,
            "delta_sigma_db": self.delta_sigma_db,
            "channel": self.channel.value,
        }


DEFAULTS = SystemParams()


def validate(params: SystemParams) -> SystemParams:
    """Return ``params`` unchanged if every invariant holds.

    Raises
    ------
    ParamsError
        Listing all violated invariants together.
    """
    errors = []
    positive = ("p_tran", "theta_i", "f_s", "alpha_p", "alpha_s", "frame_t",
                "sigma2_s", "sigma2_p")
    for name in positive:
        value = getattr(params, name)
        if not (isinstance(value, (int, float)) and math.isfinite(value) and value > 0):
            errors.append(f"{name} must be finite and > 0 (got {value!r})")
    if not 0.0 < params.mu < 1.0:
        errors.append(f"mu must lie in (0, 1) (got {params.mu!r})")
    if not 0.0 < params.pc_bar < 1.0:
        errors.append(f"pc_bar must lie in (0, 1) (got {params.pc_bar!r})")
    if not -10.0 <= params.delta_sigma_db <= 10.0:
        errors.append(f"delta_sigma_db must lie in [-10, 10] dB (got {params.delta_sigma_db!r})")
    if not isinstance(params.channel, ChannelModel):
        errors.append(f"channel must be a ChannelModel (got {params.channel!r})")
    if not errors:
        gamma = params.gamma
        if not (math.isfinite(gamma) and gamma > 0):
            errors.append(f"derived SNR gamma is not finite and positive (got {gamma!r})")
        if params.max_samples < 3:
            errors.append("frame_t * f_s must allow at least 3 estimation samples")
    if errors:
        raise ParamsError(errors)
    return params


def effective_noise(params: SystemParams) -> float:
    """Estimation noise variance shifted by the noise-uncertainty offset.

    The offset is applied multiplicatively in the dB domain, so -3 dB halves
    (approximately) and +3 dB doubles the nominal variance.
    """
    return params.sigma2_s * db_to_linear(params.delta_sigma_db)


@dataclass(frozen=True)
class EstimationConfig:
    """Estimation window: duration ``tau`` (s) and its sample count ``n``."""

    tau: float
    n: int

    @classmethod
    def from_tau(cls, tau: float, params: SystemParams) -> "EstimationConfig":
        est = cls(tau=tau, n=int(round(tau * params.f_s)))
        est.check(params)
        return est

    @classmethod
    def from_n(cls, n: int, params: SystemParams) -> "EstimationConfig":
        est = cls(tau=n / params.f_s, n=int(n))
        est.check(params)
        return est

    def check(self, params: SystemParams) -> None:
        errors = []
        if not 0.0 < self.tau < params.frame_t:
            errors.append(f"tau must lie in (0, T={params.frame_t}) s (got {self.tau!r})")
        if self.n < 3:
            errors.append(f"estimation needs n >= 3 samples (got {self.n})")
        if abs(self.n - self.tau * params.f_s) > 1.0:
            errors.append("n and tau * f_s disagree by more than one sample")
        if errors:
            raise ParamsError(errors)


# -- scenario files -----------------------------------------------------------

_SCENARIO_KEYS = {f.name for f in fields(SystemParams)}  # linear names, for errors only
_DB_KEYS = {
    "p_tran_dbm", "theta_i_dbm", "f_s_mhz", "alpha_p_loss_db", "alpha_s_loss_db",
    "frame_ms", "sigma2_s_dbm", "sigma2_p_dbm", "mu", "pc_bar", "delta_sigma_db",
    "channel",
}


def parse_scenario(text: str) -> SystemParams:
    """Parse ``key = value`` lines (``#`` starts a comment) into params.

    Powers are in dBm, path losses in dB, the frame in ms and the sampling
    rate in MHz.  Missing keys fall back to the defaults.
    """
    values = {}
    errors = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            errors.append(f"line {lineno}: expected 'key = value'")
            continue
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in _DB_KEYS:
            hint = " (scenario files use dB-unit keys)" if key in _SCENARIO_KEYS else ""
            errors.append(f"line {lineno}: unknown key {key!r}{hint}")
            continue
        if key == "channel":
            try:
                values[key] = ChannelModel.parse(value)
            except ValueError as exc:
                errors.append(f"line {lineno}: {exc}")
            continue
        try:
            values[key] = float(value)
        except ValueError:
            errors.append(f"line {lineno}: {key} is not a number ({value!r})")
    if errors:
        raise ParamsError(errors)
    return validate(SystemParams.from_db(**values))


def load_scenario(path) -> SystemParams:
    return parse_scenario(Path(path).read_text())


def format_scenario(params: SystemParams) -> str:
    lines = []
    for key, value in params.to_db().items():
        lines.append(f"{key} = {value if isinstance(value, str) else format(value, '.12g')}")
    return "\n".join(lines) + "\n"
