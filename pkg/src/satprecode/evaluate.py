"""SINR and rate evaluation plus the Monte Carlo experiment runner.

The channel is pre-normalized to the receiver noise, so SINRs use unit
noise power. A beam's rate is set by its worst served user through the
threshold table of the broadcast standard: symbol rate times the
spectral efficiency of the highest threshold the minimum SINR clears.
"""

from __future__ import annotations

import concurrent.futures
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np

from . import grouping as grouping_mod
from .channel import (
    BeamLayout,
    ChannelMatrix,
    LinkBudget,
    PerturbationBounds,
    PhaseModel,
    assemble_channel,
    build_gain_matrix,
    build_phase_matrix,
    extract_users,
    hex_layout,
    perturb_channel,
    place_users,
)
from .config import ScenarioConfig, config_echo
from .exceptions import ConfigError
from .gateway import assemble_multigateway_precoder, make_plan, share_csi
from .precoding import baseline_avg_mmse, baseline_four_color, two_stage
from .robust import robust_two_stage

__all__ = [
    "ModcodTable",
    "modcod_lookup",
    "sinr",
    "sinr_matrix",
    "beam_rate",
    "TrialResult",
    "MonteCarloResult",
    "run_monte_carlo",
    "bootstrap_mean_diff_quantiles",
]

# Coarse fallback table (a subset of the shipped standard data) so the
# package works without its data file.
_FALLBACK_ROWS = (
    (-2.85, 0.434841),
    (0.22, 0.889135),
    (4.73, 1.647211),
    (6.55, 2.104850),
    (8.43, 2.635236),
    (10.65, 3.077225),
    (12.73, 3.620536),
    (15.87, 4.735354),
)


@dataclass(frozen=True)
class ModcodTable:
    """Monotone SNIR-threshold to spectral-efficiency lookup.

    Thresholds (dB) are strictly increasing, efficiencies (bit/symbol)
    nondecreasing; below the lowest threshold the link is in outage and
    the efficiency is zero.
    """

    thresholds_db: np.ndarray
    efficiencies: np.ndarray

    def __post_init__(self):
        thr = np.asarray(self.thresholds_db, dtype=float)
        eff = np.asarray(self.efficiencies, dtype=float)
        object.__setattr__(self, "thresholds_db", thr)
        object.__setattr__(self, "efficiencies", eff)
        if thr.ndim != 1 or thr.shape != eff.shape or thr.size == 0:
            raise ConfigError("table needs matching nonempty threshold/efficiency rows")
        if np.any(np.diff(thr) <= 0.0):
            raise ConfigError("thresholds must be strictly increasing")
        if np.any(np.diff(eff) < 0.0) or np.any(eff < 0.0):
            raise ConfigError("efficiencies must be nonnegative and nondecreasing")
        thr.flags.writeable = False
        eff.flags.writeable = False

    def efficiency(self, snir_db):
        """Spectral efficiency at the given SNIR (scalar or array), dB."""
        snir_db = np.asarray(snir_db, dtype=float)
        idx = np.searchsorted(self.thresholds_db, snir_db, side="right") - 1
        eff = np.where(idx >= 0, self.efficiencies[np.maximum(idx, 0)], 0.0)
        return eff if eff.ndim else float(eff)

    @classmethod
    def from_rows(cls, rows) -> "ModcodTable":
        rows = sorted(rows)
        return cls(
            thresholds_db=np.array([r[0] for r in rows]),
            efficiencies=np.array([r[1] for r in rows]),
        )

    @classmethod
    def from_file(cls, path) -> "ModcodTable":
        """Parse a plain-text table: two columns, '#' comments."""
        rows = []
        for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
            body = line.split("#", 1)[0].strip()
            if not body:
                continue
            parts = body.split()
            if len(parts) != 2:
                raise ConfigError(
                    f"{path}:{lineno}: expected 'threshold_db efficiency'"
                )
            rows.append((float(parts[0]), float(parts[1])))
        if not rows:
            raise ConfigError(f"{path}: no table rows found")
        return cls.from_rows(rows)

    @classmethod
    def fallback(cls) -> "ModcodTable":
        return cls.from_rows(_FALLBACK_ROWS)

    @classmethod
    def default(cls) -> "ModcodTable":
        """The packaged standard table, or the fallback if missing."""
        try:
            ref = resources.files("satprecode.data").joinpath("dvbs2x_modcod.txt")
            with resources.as_file(ref) as path:
                return cls.from_file(path)
        except (FileNotFoundError, ModuleNotFoundError):
            return cls.fallback()


def modcod_lookup(snir_db: float, table: ModcodTable) -> float:
    """Efficiency of the highest threshold at or below `snir_db`."""
    return table.efficiency(snir_db)


def sinr_matrix(ch: ChannelMatrix, w: np.ndarray) -> np.ndarray:
    """Linear SINR of every user under precoder W, as a (K, Q) array.

    Signal is the user's own beam column, interference the other beams'
    columns, noise power one (the channel is noise-normalized).
    """
    amps = np.abs(ch.h @ w) ** 2                     # (KQ, K)
    beam_of_row = np.repeat(np.arange(ch.beams), ch.users_per_beam)
    signal = amps[np.arange(amps.shape[0]), beam_of_row]
    interference = amps.sum(axis=1) - signal
    return (signal / (interference + 1.0)).reshape(ch.beams, ch.users_per_beam)


def sinr(ch: ChannelMatrix, w: np.ndarray, k: int, q: int) -> float:
    """Linear SINR of user q in beam k."""
    return float(sinr_matrix(ch, w)[k, q])


def beam_rate(sinrs, table: ModcodTable, budget: LinkBudget,
              bandwidth_factor: float = 1.0) -> float:
    """Rate of one beam in bit/s: worst user picks the efficiency.

    `bandwidth_factor` scales the usable band (1/4 for the four-coloring
    baseline).
    """
    sinrs = np.asarray(sinrs, dtype=float)
    if sinrs.size < 1:
        raise ConfigError("need at least one SINR")
    worst_db = 10.0 * np.log10(max(float(np.min(sinrs)), 1e-300))
    symbol_rate = bandwidth_factor * budget.bandwidth_hz / (1.0 + budget.rolloff)
    return symbol_rate * table.efficiency(worst_db)


@dataclass(frozen=True)
class TrialResult:
    """Per-trial evaluation of one scenario at one power point."""

    scenario: str
    p_total_dbw: float
    sinr: np.ndarray            # (K, Q) linear
    min_sinr: np.ndarray        # (K,)
    rate_bps: np.ndarray        # (K,) full-band rate
    throughput_bps: np.ndarray  # (K,) after the bandwidth factor
    rng_seed: int

    def __post_init__(self):
        if np.any(self.min_sinr > np.min(self.sinr, axis=1) * (1 + 1e-12)):
            raise ConfigError("min_sinr must not exceed any member SINR")


def _trial_result(scenario: str, p_dbw: float, sinrs: np.ndarray,
                  table: ModcodTable, budget: LinkBudget,
                  bandwidth_factor: float, seed: int) -> TrialResult:
    min_sinr = np.min(sinrs, axis=1)
    full = np.array([beam_rate(s, table, budget) for s in sinrs])
    thr = np.array(
        [beam_rate(s, table, budget, bandwidth_factor) for s in sinrs]
    )
    return TrialResult(
        scenario=scenario,
        p_total_dbw=p_dbw,
        sinr=sinrs,
        min_sinr=min_sinr,
        rate_bps=full,
        throughput_bps=thr,
        rng_seed=seed,
    )


@dataclass
class MonteCarloResult:
    """Aggregated Monte Carlo output.

    `throughput[scenario][p_dbw]` is a (trials, K) array of per-beam
    throughput with NaN rows for skipped trials; `selected_members` logs
    which pool users each trial served, per beam (the first entry of a
    grouped selection is its seed user).
    """

    scenarios: tuple[str, ...]
    power_dbw: tuple[float, ...]
    beams: int
    trials: int
    throughput: dict
    skipped: dict
    echo: list[str]
    selected_members: np.ndarray | None = None

    def trial_means(self, scenario: str, p_dbw: float) -> np.ndarray:
        """Per-trial mean over beams (NaN where the trial was skipped)."""
        arr = self.throughput[scenario][p_dbw]
        valid = ~np.all(np.isnan(arr), axis=1)
        out = np.full(arr.shape[0], np.nan)
        if np.any(valid):
            out[valid] = np.nanmean(arr[valid], axis=1)
        return out

    def mean_per_beam(self, scenario: str, p_dbw: float) -> np.ndarray:
        with np.errstate(invalid="ignore"):
            return np.nanmean(self.throughput[scenario][p_dbw], axis=0)

    def std_per_beam(self, scenario: str, p_dbw: float) -> np.ndarray:
        with np.errstate(invalid="ignore"):
            return np.nanstd(self.throughput[scenario][p_dbw], axis=0)

    def total_cells(self) -> int:
        return len(self.scenarios) * len(self.power_dbw) * max(self.trials, 1)

    def total_skipped(self) -> int:
        return sum(self.skipped.values())

    def csv_rows(self):
        """Rows (scenario, p_dbw, beam, mean, std, trials, skipped)."""
        rows = []
        for name in self.scenarios:
            for p in self.power_dbw:
                skipped = self.skipped[(name, p)]
                used = self.trials - skipped
                if used > 0:
                    mean = self.mean_per_beam(name, p)
                    std = self.std_per_beam(name, p)
                else:
                    mean = std = np.full(self.beams, np.nan)
                for k in range(self.beams):
                    rows.append((name, p, k, mean[k], std[k], used, skipped))
        return rows


def _build_layout(cfg: ScenarioConfig, budget: LinkBudget) -> BeamLayout:
    return hex_layout(
        beams=cfg.beams,
        center_lat=cfg.center_lat,
        center_lon=cfg.center_lon,
        beam_radius_3db_deg=cfg.beam_radius_3db_deg,
        spacing_deg=cfg.beam_spacing_deg,
        feeds_per_beam=cfg.feeds_per_beam,
        budget=budget,
    )


def _build_budget(cfg: ScenarioConfig) -> LinkBudget:
    return LinkBudget(
        satellite_longitude_deg=cfg.satellite_longitude_deg,
        satellite_height_m=cfg.satellite_height_m,
        earth_radius_m=cfg.earth_radius_m,
        carrier_freq_hz=cfg.carrier_freq_hz,
        bandwidth_hz=cfg.bandwidth_hz,
        rolloff=cfg.rolloff,
        user_antenna_gain_db=cfg.user_antenna_gain_db,
        g_over_t_db=cfg.g_over_t_db,
    )


def _gateway_plans(cfg: ScenarioConfig, layout: BeamLayout) -> dict:
    plans = {}
    for name in cfg.scenarios:
        base = name.split(":")[0]
        if not base.startswith("gw_"):
            continue
        if base == "gw_ref":
            plans[name] = make_plan(
                cfg.beams, layout.feeds, cfg.users_per_beam, 1, "ref"
            )
        elif base == "gw_icp":
            plans[name] = make_plan(
                cfg.beams, layout.feeds, cfg.users_per_beam, cfg.gateways, "icp"
            )
        elif base == "gw_msvdgc":
            plans[name] = make_plan(
                cfg.beams, layout.feeds, cfg.users_per_beam, cfg.gateways, "msvdgc"
            )
        else:
            c = int(name.split(":")[1]) if ":" in name else cfg.closest_c
            plans[name] = make_plan(
                cfg.beams, layout.feeds, cfg.users_per_beam, cfg.gateways,
                "closest", closest_c=c, beam_centers=layout.beam_centers,
            )
    return plans


def _select_members(cfg: ScenarioConfig, pool_est: ChannelMatrix,
                    gamma_user: np.ndarray | None, seed) -> np.ndarray:
    q = cfg.users_per_beam
    if cfg.grouping == "nominal":
        return grouping_mod.members_array(
            grouping_mod.group_users(pool_est, q, seed)
        )
    if cfg.grouping == "robust":
        if gamma_user is None:
            gamma_user = np.zeros((pool_est.beams, pool_est.users_per_beam))
        return grouping_mod.members_array(
            grouping_mod.robust_group_users(pool_est, gamma_user, q, seed)
        )
    rng = np.random.default_rng(seed)
    return np.array(
        [
            np.sort(rng.choice(pool_est.users_per_beam, size=q, replace=False))
            for _ in range(pool_est.beams)
        ]
    )


def _run_trial(index: int, trial_seed: np.random.SeedSequence,
               cfg: ScenarioConfig, layout: BeamLayout, budget: LinkBudget,
               table: ModcodTable, plans: dict):
    """One channel realization evaluated under every scenario and power."""
    users_seed, phase_seed, perturb_seed, select_seed = trial_seed.spawn(4)
    users = place_users(layout, cfg.pool_per_beam, users_seed, budget=budget)
    gain = build_gain_matrix(layout, users, budget)
    phase = build_phase_matrix(
        PhaseModel(variant=cfg.phase_model, chi_deg=cfg.phase_sigma_deg,
                   rng_seed=phase_seed),
        gain.shape[0],
        gain.shape[1],
    )
    pool_true = assemble_channel(gain, phase, cfg.beams, cfg.pool_per_beam)

    gamma_user = None
    if cfg.csi_error_ratio > 0.0:
        pool_est, delta_pool, _ = perturb_channel(
            pool_true, cfg.csi_error_ratio, perturb_seed
        )
        gamma_user = (
            np.sum(np.abs(delta_pool) ** 2, axis=1)
            .reshape(cfg.beams, cfg.pool_per_beam)
        )
    else:
        pool_est, delta_pool = pool_true, None

    members = _select_members(cfg, pool_est, gamma_user, select_seed)
    ch_true = extract_users(pool_true, members)
    ch_est = extract_users(pool_est, members)
    if delta_pool is not None:
        delta = np.vstack(
            [delta_pool[k * cfg.pool_per_beam + members[k]] for k in range(cfg.beams)]
        )
        bounds = PerturbationBounds.from_delta(
            delta, cfg.beams, cfg.users_per_beam
        ).with_lower(cfg.gamma_lower)
    else:
        bounds = PerturbationBounds.zero(cfg.beams)

    out = {}
    for p_dbw in cfg.power_sweep_dbw:
        p_w = 10.0 ** (p_dbw / 10.0)
        for name in cfg.scenarios:
            try:
                sinrs, factor = _scenario_sinrs(
                    name, ch_true, ch_est, bounds, p_w, cfg, layout, plans
                )
                result = _trial_result(
                    name, p_dbw, sinrs, table, budget, factor, index
                )
                out[(name, p_dbw)] = result.throughput_bps
            except Exception:
                out[(name, p_dbw)] = None
    return out, members


def _scenario_sinrs(name: str, ch_true: ChannelMatrix, ch_est: ChannelMatrix,
                    bounds: PerturbationBounds, p_w: float,
                    cfg: ScenarioConfig, layout: BeamLayout, plans: dict):
    base = name.split(":")[0]
    if base == "mbim" or base == "rzf":
        pre = two_stage(ch_est, p_w, cfg.power_mode, interbeam=base)
        return sinr_matrix(ch_true, pre.w), 1.0
    if base == "avg_mmse":
        pre = baseline_avg_mmse(ch_est, p_w, cfg.power_mode)
        return sinr_matrix(ch_true, pre.w), 1.0
    if base == "four_color":
        return baseline_four_color(ch_true, layout, p_w), 0.25
    if base == "robust":
        pre = robust_two_stage(ch_est, bounds, p_w, cfg.power_mode)
        return sinr_matrix(ch_true, pre.w), 1.0
    if base.startswith("gw_"):
        plan = plans[name]
        views = share_csi(ch_est, plan)
        pre = assemble_multigateway_precoder(
            views, plan, p_w, precoder_kind="mbim", mode=cfg.power_mode
        )
        return sinr_matrix(ch_true, pre.w), 1.0
    raise ConfigError(f"unknown scenario {name!r}")


def run_monte_carlo(cfg: ScenarioConfig) -> MonteCarloResult:
    """Run the configured scenario suite over seeded channel realizations.

    Deterministic for a fixed master seed: each trial owns spawned seed
    streams, so results do not depend on execution order or thread count.
    Per-trial failures are recorded and skipped.
    """
    cfg.validate()
    budget = _build_budget(cfg)
    layout = _build_layout(cfg, budget)
    table = (
        ModcodTable.from_file(cfg.modcod_file)
        if cfg.modcod_file
        else ModcodTable.default()
    )
    plans = _gateway_plans(cfg, layout)

    cells = {
        (name, p): np.full((cfg.trials, cfg.beams), np.nan)
        for name in cfg.scenarios
        for p in cfg.power_sweep_dbw
    }
    skipped = {key: 0 for key in cells}
    selected = np.zeros((cfg.trials, cfg.beams, cfg.users_per_beam), dtype=int)

    trial_seeds = np.random.SeedSequence(cfg.seed).spawn(max(cfg.trials, 0))

    def work(t):
        return t, _run_trial(t, trial_seeds[t], cfg, layout, budget, table, plans)

    if cfg.threads > 1 and cfg.trials > 1:
        with concurrent.futures.ThreadPoolExecutor(cfg.threads) as pool:
            results = list(pool.map(work, range(cfg.trials)))
    else:
        results = [work(t) for t in range(cfg.trials)]

    for t, (per_cell, members) in sorted(results):
        selected[t] = members
        for key, value in per_cell.items():
            if value is None:
                skipped[key] += 1
            else:
                cells[key][t] = value

    throughput = {name: {} for name in cfg.scenarios}
    for (name, p), arr in cells.items():
        arr.flags.writeable = False
        throughput[name][p] = arr
    selected.flags.writeable = False
    return MonteCarloResult(
        scenarios=cfg.scenarios,
        power_dbw=cfg.power_sweep_dbw,
        beams=cfg.beams,
        trials=cfg.trials,
        throughput=throughput,
        skipped=skipped,
        echo=config_echo(cfg),
        selected_members=selected,
    )


def bootstrap_mean_diff_quantiles(a: np.ndarray, b: np.ndarray,
                                  quantiles=(0.05, 0.95), n_boot: int = 2000,
                                  seed: int = 0) -> np.ndarray:
    """Paired bootstrap quantiles of mean(a - b) over trials.

    Rows where either input is NaN are dropped jointly, keeping the
    pairing intact.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    ok = ~(np.isnan(a) | np.isnan(b))
    diff = a[ok] - b[ok]
    if diff.size == 0:
        raise ConfigError("no jointly valid trials to bootstrap")
    rng = np.random.default_rng(seed)
    idx = rng.integers(0, diff.size, size=(n_boot, diff.size))
    means = diff[idx].mean(axis=1)
    return np.quantile(means, quantiles)
