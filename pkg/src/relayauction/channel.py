"""Single-cell geometry, channel gains, link budgets and interference costs.

All gains and SINRs are linear. Rates are in bit/s unless a name says Mbps.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

MBPS = 1e6

COST_MODELS = ("linear", "rate_delta")
RATE_UNITS = ("bps_per_hz", "mbps")


class ConfigError(ValueError):
    """Raised when a configuration violates its invariants."""


@dataclass(frozen=True)
class CellConfig:
    cell_radius: float = 300.0
    path_loss_exponent: float = 3.3
    shadow_sigma_db: float = 8.0
    noise_psd: float = 10 ** (-174 / 10) * 1e-3  # -174 dBm/Hz in W/Hz
    bandwidth_w: float = 10e6
    bs_power_ps: float = 4.0
    uplink_power_pu: float = 0.25
    num_destinations_d: int = 10
    num_relays_r: int = 20
    processing_coeff_k: float = 0.0
    seed: int = 0
    rayleigh_fading: bool = True
    min_distance: float = 1.0
    # fraction of the uplink slot during which relay interference is charged
    interference_duty: float = 1.0
    # unit of the uplink-rate loss priced by the rate_delta cost model
    interference_rate_unit: str = "bps_per_hz"

    def validate(self) -> None:
        if not self.cell_radius > 0:
            raise ConfigError("cell_radius must be positive")
        if not self.bandwidth_w > 0:
            raise ConfigError("bandwidth_w must be positive")
        for name in ("noise_psd", "bs_power_ps", "uplink_power_pu",
                     "processing_coeff_k", "shadow_sigma_db"):
            if getattr(self, name) < 0:
                raise ConfigError(f"{name} must be non-negative")
        if self.num_destinations_d < 0:
            raise ConfigError("num_destinations_d must be non-negative")
        if self.num_relays_r < self.num_destinations_d + 1:
            raise ConfigError(
                "num_relays_r must be at least num_destinations_d + 1 "
                f"(got R={self.num_relays_r}, D={self.num_destinations_d})")
        if not 0 < self.interference_duty <= 1:
            raise ConfigError("interference_duty must lie in (0, 1]")
        if not self.min_distance > 0:
            raise ConfigError("min_distance must be positive")
        if self.interference_rate_unit not in RATE_UNITS:
            raise ConfigError(
                f"interference_rate_unit must be one of {sorted(RATE_UNITS)}")

    @property
    def rate_loss_scale(self) -> float:
        """Divisor turning an uplink rate loss in bit/s into the priced unit."""
        if self.interference_rate_unit == "mbps":
            return MBPS
        return self.bandwidth_w

    @property
    def noise_power(self) -> float:
        return self.noise_psd * self.bandwidth_w


@dataclass(frozen=True, eq=False)
class Scenario:
    """One sampled cell.

    Gain arrays are indexed by relay ``i`` and destination ``j``; the uplink
    user ``n_j`` shares destination ``j``'s channel.
    """

    config: CellConfig
    g_si: np.ndarray       # (R,)   BS -> relay
    g_sj: np.ndarray       # (D,)   BS -> destination
    g_ij: np.ndarray       # (R, D) relay -> destination
    g_ibs: np.ndarray      # (R,)   relay -> BS
    g_nbs: np.ndarray      # (D,)   uplink user n_j -> BS
    g_nj: np.ndarray       # (D,)   uplink user n_j -> destination j
    g_ni: np.ndarray       # (R, D) uplink user n_j -> relay i
    battery: np.ndarray    # (R,)
    positions: dict = field(default_factory=dict)
    trial_index: int = 0

    def __post_init__(self):
        for name in ("g_si", "g_sj", "g_ij", "g_ibs", "g_nbs", "g_nj",
                     "g_ni", "battery"):
            arr = np.array(getattr(self, name), dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def num_relays(self) -> int:
        return self.g_si.shape[0]

    @property
    def num_destinations(self) -> int:
        return self.g_sj.shape[0]

    @property
    def alphas(self) -> np.ndarray:
        return 1.0 / self.battery

    @property
    def noise(self) -> float:
        return self.config.noise_power

    def processing_power(self) -> np.ndarray:
        """P_c per relay: k times the interference-free BS->relay rate (bit/s)."""
        k = self.config.processing_coeff_k
        if k == 0:
            return np.zeros(self.num_relays)
        snr = self.config.bs_power_ps * self.g_si / self.noise
        return k * 0.5 * self.config.bandwidth_w * np.log2(1 + snr)

    def same_as(self, other: "Scenario") -> bool:
        names = ("g_si", "g_sj", "g_ij", "g_ibs", "g_nbs", "g_nj", "g_ni",
                 "battery")
        return self.config == other.config and all(
            np.array_equal(getattr(self, n), getattr(other, n)) for n in names)


def build_scenario(config: CellConfig, *, g_si, g_sj, g_ij, g_ibs=None,
                   g_nbs=None, g_nj=None, g_ni=None, battery=None) -> Scenario:
    """Hand-build a scenario from explicit gains (fixtures and tests).

    Missing uplink-user gains default to 1 and are harmless when
    ``uplink_power_pu`` is 0.
    """
    g_si = np.atleast_1d(np.asarray(g_si, dtype=float))
    g_sj = np.atleast_1d(np.asarray(g_sj, dtype=float))
    R, D = g_si.size, g_sj.size
    g_ij = np.asarray(g_ij, dtype=float).reshape(R, D)
    ones_r, ones_d = np.ones(R), np.ones(D)
    return Scenario(
        config=config,
        g_si=g_si,
        g_sj=g_sj,
        g_ij=g_ij,
        g_ibs=ones_r if g_ibs is None else g_ibs,
        g_nbs=ones_d if g_nbs is None else g_nbs,
        g_nj=ones_d if g_nj is None else g_nj,
        g_ni=np.ones((R, D)) if g_ni is None else np.asarray(g_ni).reshape(R, D),
        battery=ones_r if battery is None else battery,
    )


def _sample_hexagon(rng: np.random.Generator, n: int, radius: float) -> np.ndarray:
    """Uniform points in a regular hexagon (circumradius ``radius``) centred at 0."""
    out = np.empty((0, 2))
    half_h = radius * math.sqrt(3) / 2
    while out.shape[0] < n:
        m = max(2 * (n - out.shape[0]), 8)
        pts = rng.uniform([-radius, -half_h], [radius, half_h], size=(m, 2))
        x, y = np.abs(pts[:, 0]), np.abs(pts[:, 1])
        inside = (y <= half_h) & (math.sqrt(3) * x + y <= math.sqrt(3) * radius)
        out = np.vstack([out, pts[inside]])
    return out[:n]


def in_hexagon(points: np.ndarray, radius: float, atol: float = 1e-9) -> np.ndarray:
    x, y = np.abs(points[..., 0]), np.abs(points[..., 1])
    half_h = radius * math.sqrt(3) / 2
    return (y <= half_h + atol) & (math.sqrt(3) * x + y <= math.sqrt(3) * radius + atol)


def _gain(rng, config: CellConfig, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Path loss x lognormal shadowing x Rayleigh power fading between point sets."""
    d = np.linalg.norm(a - b, axis=-1)
    d = np.maximum(d, config.min_distance)
    g = d ** (-config.path_loss_exponent)
    if config.shadow_sigma_db > 0:
        g = g * 10 ** (rng.normal(0.0, config.shadow_sigma_db, size=d.shape) / 10)
    if config.rayleigh_fading:
        g = g * rng.exponential(1.0, size=d.shape)
    return g


def sample_scenario(config: CellConfig, trial_index: int) -> Scenario:
    config.validate()
    rng = np.random.default_rng(
        [config.seed, config.num_relays_r, config.num_destinations_d, trial_index])
    R, D = config.num_relays_r, config.num_destinations_d
    bs = np.zeros(2)
    relays = _sample_hexagon(rng, R, config.cell_radius)
    dests = _sample_hexagon(rng, D, config.cell_radius)
    uplink = _sample_hexagon(rng, D, config.cell_radius)

    g_si = _gain(rng, config, relays, bs)
    g_sj = _gain(rng, config, dests, bs)
    g_ij = _gain(rng, config, relays[:, None, :], dests[None, :, :])
    g_ibs = _gain(rng, config, relays, bs)
    g_nbs = _gain(rng, config, uplink, bs)
    g_nj = _gain(rng, config, uplink, dests)
    g_ni = _gain(rng, config, relays[:, None, :], uplink[None, :, :])
    battery = rng.integers(1, 11, size=R) / 10.0

    return Scenario(
        config=config, g_si=g_si, g_sj=g_sj, g_ij=g_ij, g_ibs=g_ibs,
        g_nbs=g_nbs, g_nj=g_nj, g_ni=g_ni, battery=battery,
        positions={"bs": bs, "relays": relays, "destinations": dests,
                   "uplink": uplink},
        trial_index=trial_index,
    )


@dataclass(frozen=True)
class LinkBudget:
    """SINR terms for relay ``i`` serving destination ``j``.

    Fields broadcast: scalars for one link, arrays for many.
    """

    sinr_si: np.ndarray | float
    sinr_sj: np.ndarray | float
    gamma_ij: np.ndarray | float
    gamma_sj: np.ndarray | float
    bandwidth_w: float
    noise_relay: np.ndarray | float = 0.0
    noise_destination: np.ndarray | float = 0.0

    def sinr_ij(self, p):
        return p * self.gamma_ij


def link_budget(s: Scenario, i=None, j=None) -> LinkBudget:
    """Link budget for (i, j); with i and j omitted, the full (R, D) grid."""
    cfg = s.config
    N = cfg.noise_power
    Pu = cfg.uplink_power_pu
    if i is None and j is None:
        ii, jj = np.arange(s.num_relays)[:, None], np.arange(s.num_destinations)[None, :]
    else:
        ii, jj = np.asarray(i), np.asarray(j)
        if np.any(ii < 0) or np.any(ii >= s.num_relays):
            raise IndexError("relay index out of range")
        if np.any(jj < 0) or np.any(jj >= s.num_destinations):
            raise IndexError("destination index out of range")
    ni_relay = N + Pu * s.g_ni[ii, jj]
    ni_dest = N + Pu * s.g_nj[jj]
    sinr_si = cfg.bs_power_ps * s.g_si[ii] / ni_relay
    gamma_sj = s.g_sj[jj] / ni_dest
    gamma_ij = s.g_ij[ii, jj] / ni_dest
    shape = np.broadcast(sinr_si, gamma_ij).shape

    def _out(x):
        x = np.broadcast_to(x, shape)
        return float(x) if x.ndim == 0 else np.array(x)

    return LinkBudget(
        sinr_si=_out(sinr_si),
        sinr_sj=_out(cfg.bs_power_ps * gamma_sj),
        gamma_ij=_out(gamma_ij),
        gamma_sj=_out(gamma_sj),
        bandwidth_w=cfg.bandwidth_w,
        noise_relay=_out(ni_relay),
        noise_destination=_out(ni_dest),
    )


def uplink_rate(s: Scenario, j, interferer_gain=0.0, p=0.0):
    """Uplink rate (bit/s) of user n_j, optionally with a relay interfering."""
    cfg = s.config
    N = cfg.noise_power
    signal = cfg.uplink_power_pu * s.g_nbs[j]
    return cfg.bandwidth_w * np.log2(1 + signal / (N + p * interferer_gain))


def interference_cost(s: Scenario, i, j, p, model: str = "linear", c_i=1.0):
    """Cost charged to the BS for relay ``i`` transmitting at ``p`` on ``j``'s channel.

    ``linear``: ``c_i * p`` with ``c_i`` in cost per W.
    ``rate_delta``: ``c_i`` times the loss of n_j's uplink rate, measured in
    ``config.interference_rate_unit`` (bit/s/Hz by default, or Mbps).
    """
    p = np.asarray(p, dtype=float)
    if model == "linear":
        out = np.asarray(c_i) * p
    elif model == "rate_delta":
        clean = uplink_rate(s, j)
        hit = uplink_rate(s, j, s.g_ibs[i], p)
        scale = s.config.interference_duty / s.config.rate_loss_scale
        out = np.asarray(c_i) * scale * (clean - hit)
        out = np.maximum(out, 0.0)
    else:
        raise ValueError(f"unknown cost model {model!r}")
    return float(out) if out.ndim == 0 else out


def power_at_cost(s: Scenario, i, j, cost_cap, model: str = "linear", c_i=1.0):
    """Largest power whose interference cost does not exceed ``cost_cap``.

    Returns ``inf`` where the cost never reaches the cap.
    """
    c_i = np.asarray(c_i, dtype=float)
    cap = np.asarray(cost_cap, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        if model == "linear":
            out = np.where(c_i > 0, cap / c_i, np.inf)
        elif model == "rate_delta":
            cfg = s.config
            N = cfg.noise_power
            W = cfg.bandwidth_w
            signal = cfg.uplink_power_pu * s.g_nbs[j]
            clean = uplink_rate(s, j)
            allowed_loss = cap / (c_i * cfg.interference_duty) * cfg.rate_loss_scale
            floor = clean - allowed_loss
            # rate with interference == floor  <=>  N + pG = signal / (2^(floor/W) - 1)
            denom = np.exp2(floor / W) - 1
            p = (signal / denom - N) / s.g_ibs[i]
            out = np.where((c_i <= 0) | (floor <= 0), np.inf, np.maximum(p, 0.0))
        else:
            raise ValueError(f"unknown cost model {model!r}")
    return float(out) if np.ndim(out) == 0 else out
