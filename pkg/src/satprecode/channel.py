"""Multibeam downlink channel model.

The channel matrix is the entrywise product of a real gain matrix (link
budget, feed radiation pattern, optional fading) and a unit-modulus phase
matrix. Rows are stacked beam-major: row ``k*Q + q`` belongs to user q of
beam k. All objects are immutable after construction and safe to share
across parallel workers.

The feed radiation pattern is a synthetic circular tapered-aperture model
``a(theta) = G_max * |2*J1(u)/u|**2`` with ``u = k_a * sin(theta)``,
calibrated so the pattern is exactly 3 dB below peak at the configured
beam radius. The peak gain follows the uniform-aperture relation
``G_max = k_a**2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.optimize import brentq
from scipy.special import j1

from . import geometry
from .exceptions import ConfigError, GeometryError

__all__ = [
    "LinkBudget",
    "BeamLayout",
    "UserSet",
    "PhaseModel",
    "ChannelMatrix",
    "PerturbationBounds",
    "hex_layout",
    "place_users",
    "feed_gain",
    "build_gain_matrix",
    "build_phase_matrix",
    "assemble_channel",
    "extract_users",
    "perturb_channel",
]

BOLTZMANN = 1.380649e-23

# Argument of |2*J1(u)/u|**2 at the -3 dB point, solved once at import.
_U_HALF = brentq(lambda u: (2.0 * j1(u) / u) ** 2 - 10.0 ** (-0.3), 1.0, 2.0)


@dataclass(frozen=True)
class LinkBudget:
    """User-link budget of a geostationary multibeam system.

    `receiver_noise_temp_k` may be omitted, in which case it is derived
    from ``g_over_t_db`` and ``user_antenna_gain_db``. When both are given
    they must agree: G/T = gain - 10*log10(T_R).
    """

    satellite_longitude_deg: float = 10.0
    satellite_height_m: float = 35_786_000.0
    earth_radius_m: float = 6_378_137.0
    carrier_freq_hz: float = 20e9
    bandwidth_hz: float = 500e6
    rolloff: float = 0.25
    user_antenna_gain_db: float = 41.7
    g_over_t_db: float = 17.68
    receiver_noise_temp_k: float | None = None
    boltzmann: float = BOLTZMANN
    total_power_w: float = 100.0

    def __post_init__(self):
        positive = {
            "satellite_height_m": self.satellite_height_m,
            "earth_radius_m": self.earth_radius_m,
            "carrier_freq_hz": self.carrier_freq_hz,
            "bandwidth_hz": self.bandwidth_hz,
            "boltzmann": self.boltzmann,
            "total_power_w": self.total_power_w,
        }
        for name, value in positive.items():
            if not value > 0.0:
                raise ConfigError(f"{name} must be strictly positive, got {value!r}")
        if not 0.0 <= self.rolloff < 1.0:
            raise ConfigError(f"rolloff must lie in [0, 1), got {self.rolloff!r}")
        derived = 10.0 ** ((self.user_antenna_gain_db - self.g_over_t_db) / 10.0)
        if self.receiver_noise_temp_k is None:
            object.__setattr__(self, "receiver_noise_temp_k", derived)
        else:
            if self.receiver_noise_temp_k <= 0.0:
                raise ConfigError("receiver_noise_temp_k must be strictly positive")
            got = self.user_antenna_gain_db - 10.0 * math.log10(self.receiver_noise_temp_k)
            if abs(got - self.g_over_t_db) > 0.02:
                raise ConfigError(
                    "receiver_noise_temp_k inconsistent with g_over_t_db: "
                    f"gain - 10*log10(T_R) = {got:.3f} dB/K vs {self.g_over_t_db} dB/K"
                )

    @property
    def wavelength_m(self) -> float:
        return 299_792_458.0 / self.carrier_freq_hz

    @property
    def noise_amplitude(self) -> float:
        """sqrt(K_B * T_R * B_W); the channel is normalized by this term."""
        return math.sqrt(self.boltzmann * self.receiver_noise_temp_k * self.bandwidth_hz)

    def satellite_position(self) -> np.ndarray:
        return geometry.geo_satellite_position(
            self.satellite_longitude_deg, self.satellite_height_m, self.earth_radius_m
        )


@dataclass(frozen=True)
class BeamLayout:
    """Beam centers, feed boresights and the reuse-4 coloring.

    Feed boresights are stored beam-major: feeds ``k*F .. (k+1)*F - 1``
    belong to beam k, so N = K*F.
    """

    beam_centers: np.ndarray          # (K, 2) lat, lon degrees
    feed_boresights: np.ndarray       # (N, 2)
    feeds_per_beam: int
    beam_radius_3db_deg: float
    color_of_beam: np.ndarray         # (K,) ints in {0,1,2,3}

    def __post_init__(self):
        centers = np.asarray(self.beam_centers, dtype=float)
        feeds = np.asarray(self.feed_boresights, dtype=float)
        colors = np.asarray(self.color_of_beam, dtype=int)
        object.__setattr__(self, "beam_centers", centers)
        object.__setattr__(self, "feed_boresights", feeds)
        object.__setattr__(self, "color_of_beam", colors)
        if centers.ndim != 2 or centers.shape[1] != 2 or centers.shape[0] < 1:
            raise ConfigError("beam_centers must be a (K, 2) array with K >= 1")
        if self.feeds_per_beam < 1:
            raise ConfigError("feeds_per_beam must be >= 1")
        if feeds.shape != (centers.shape[0] * self.feeds_per_beam, 2):
            raise ConfigError("feed_boresights must be (K*feeds_per_beam, 2)")
        if self.beam_radius_3db_deg <= 0.0:
            raise ConfigError("beam_radius_3db_deg must be strictly positive")
        if colors.shape != (centers.shape[0],) or colors.min() < 0 or colors.max() > 3:
            raise ConfigError("color_of_beam must hold one color in {0,1,2,3} per beam")
        for a in (centers, feeds, colors):
            a.flags.writeable = False

    @property
    def beams(self) -> int:
        return self.beam_centers.shape[0]

    @property
    def feeds(self) -> int:
        return self.feed_boresights.shape[0]

    def feed_slice(self, k: int) -> slice:
        f = self.feeds_per_beam
        return slice(k * f, (k + 1) * f)

    def validate_geometry(self, budget: LinkBudget) -> None:
        """Check visibility and the reuse-4 coloring against actual angles.

        No two beams whose center separation (angle at the satellite) is
        below twice the beam radius may share a color.
        """
        sat = budget.satellite_position()
        elev = geometry.elevation_deg(
            sat, self.beam_centers[:, 0], self.beam_centers[:, 1], budget.earth_radius_m
        )
        if np.any(elev <= 0.0):
            bad = int(np.argmin(elev))
            raise GeometryError(f"beam {bad} center is below the horizon")
        for k in range(self.beams):
            sep = geometry.off_axis_angle_deg(
                sat,
                self.beam_centers[k, 0],
                self.beam_centers[k, 1],
                self.beam_centers[:, 0],
                self.beam_centers[:, 1],
                budget.earth_radius_m,
            )
            close = (sep < 2.0 * self.beam_radius_3db_deg) & (np.arange(self.beams) != k)
            if np.any(close & (self.color_of_beam == self.color_of_beam[k])):
                other = int(np.nonzero(close & (self.color_of_beam == self.color_of_beam[k]))[0][0])
                raise ConfigError(
                    f"beams {k} and {other} are closer than twice the beam radius "
                    "but share a color"
                )


def _hex_spiral(count: int) -> list[tuple[int, int]]:
    """First `count` axial coordinates of a hexagonal spiral around (0, 0)."""
    coords = [(0, 0)]
    # Walk each ring from its western corner, six straight sides around.
    directions = [(1, 0), (1, -1), (0, -1), (-1, 0), (-1, 1), (0, 1)]
    ring = 1
    while len(coords) < count:
        a, b = -ring, ring
        for d in directions:
            for _ in range(ring):
                if len(coords) == count:
                    return coords
                coords.append((a, b))
                a, b = a + d[0], b + d[1]
        ring += 1
    return coords


def hex_layout(beams: int, center_lat: float, center_lon: float,
               beam_radius_3db_deg: float, spacing_deg: float,
               feeds_per_beam: int = 1,
               budget: LinkBudget | None = None) -> BeamLayout:
    """Hexagonal-lattice beam layout around a coverage center.

    `spacing_deg` is the center-to-center distance between adjacent beams
    in ground latitude degrees; longitude offsets are stretched by
    1/cos(lat) so the lattice is approximately isometric on the ground.
    Colors follow the lattice parity pattern (reuse 4). When `budget` is
    given the resulting layout is validated against the actual satellite
    geometry.

    For multiple feeds per beam the boresights sit on a small ring around
    the beam center (a triangle for F=3); a single feed points at the
    center itself.
    """
    if beams < 1:
        raise ConfigError("beams must be >= 1")
    if spacing_deg <= 0.0:
        raise ConfigError("spacing_deg must be strictly positive")
    coords = _hex_spiral(beams)
    centers = np.empty((beams, 2))
    colors = np.empty(beams, dtype=int)
    cos_lat = math.cos(math.radians(center_lat))
    for i, (a, b) in enumerate(coords):
        x = spacing_deg * (a + 0.5 * b)
        y = spacing_deg * (math.sqrt(3.0) / 2.0) * b
        centers[i] = (center_lat + y, center_lon + x / cos_lat)
        colors[i] = (a % 2) + 2 * (b % 2)

    if feeds_per_beam == 1:
        feeds = centers.copy()
    else:
        ring = 0.35 * spacing_deg
        offsets = np.array(
            [
                (
                    ring * math.cos(2.0 * math.pi * f / feeds_per_beam),
                    ring * math.sin(2.0 * math.pi * f / feeds_per_beam) / cos_lat,
                )
                for f in range(feeds_per_beam)
            ]
        )
        feeds = (centers[:, None, :] + offsets[None, :, :]).reshape(-1, 2)

    layout = BeamLayout(
        beam_centers=centers,
        feed_boresights=feeds,
        feeds_per_beam=feeds_per_beam,
        beam_radius_3db_deg=beam_radius_3db_deg,
        color_of_beam=colors,
    )
    if budget is not None:
        layout.validate_geometry(budget)
    return layout


@dataclass(frozen=True)
class UserSet:
    """Candidate users per beam; `q_served` of them are active at a time."""

    positions: np.ndarray   # (K, pool, 2) lat, lon degrees
    q_served: int

    def __post_init__(self):
        pos = np.asarray(self.positions, dtype=float)
        object.__setattr__(self, "positions", pos)
        if pos.ndim != 3 or pos.shape[2] != 2:
            raise ConfigError("positions must be a (K, pool, 2) array")
        if not 1 <= self.q_served <= pos.shape[1]:
            raise ConfigError(
                f"q_served ({self.q_served}) must lie in [1, pool size {pos.shape[1]}]"
            )
        pos.flags.writeable = False

    @property
    def beams(self) -> int:
        return self.positions.shape[0]

    @property
    def pool_size(self) -> int:
        return self.positions.shape[1]

    def flat_positions(self) -> np.ndarray:
        return self.positions.reshape(-1, 2)


def place_users(layout: BeamLayout, q_sched: int, rng_seed,
                budget: LinkBudget | None = None,
                q_served: int | None = None) -> UserSet:
    """Draw `q_sched` users uniformly inside each beam's 3 dB contour.

    The contour is the set of ground points whose off-axis angle from the
    beam center direction, seen from the satellite, is at most the beam
    radius. Sampling is by rejection from a bounding box; deterministic
    for a fixed seed.
    """
    if q_sched < 1:
        raise ConfigError("q_sched must be >= 1")
    budget = budget or LinkBudget()
    sat = budget.satellite_position()
    rng = np.random.default_rng(rng_seed)
    radius = layout.beam_radius_3db_deg

    positions = np.empty((layout.beams, q_sched, 2))
    for k in range(layout.beams):
        lat0, lon0 = layout.beam_centers[k]
        half = _ground_halfwidth_deg(sat, lat0, lon0, radius, budget.earth_radius_m)
        cos_lat = math.cos(math.radians(lat0))
        if cos_lat <= 0.0:
            raise GeometryError(f"beam {k} center at the pole is unsupported")
        got = 0
        attempts = 0
        while got < q_sched:
            attempts += 1
            if attempts > 200:
                raise GeometryError(
                    f"beam {k} contour accepts no samples (degenerate contour?)"
                )
            n_draw = max(4 * (q_sched - got), 16)
            lat = lat0 + rng.uniform(-half, half, n_draw)
            lon = lon0 + rng.uniform(-half, half, n_draw) / cos_lat
            ang = geometry.off_axis_angle_deg(
                sat, lat0, lon0, lat, lon, budget.earth_radius_m
            )
            ok = ang <= radius
            take = min(int(np.count_nonzero(ok)), q_sched - got)
            if take:
                idx = np.nonzero(ok)[0][:take]
                positions[k, got:got + take, 0] = lat[idx]
                positions[k, got:got + take, 1] = lon[idx]
                got += take
    return UserSet(positions=positions, q_served=q_served or q_sched)


def _ground_halfwidth_deg(sat: np.ndarray, lat0: float, lon0: float,
                          radius_deg: float, earth_radius_m: float) -> float:
    """Half-width (ground degrees) of a box certain to cover the contour."""
    if radius_deg <= 0.0:
        raise GeometryError("beam radius must be strictly positive")
    step = 1e-3
    for _ in range(40):
        a_lat = geometry.off_axis_angle_deg(
            sat, lat0, lon0, lat0 + step, lon0, earth_radius_m
        )
        if a_lat >= radius_deg:
            break
        step *= 2.0
    else:
        raise GeometryError("beam contour does not close on the visible Earth")
    # 1.6 margin covers the obliquity stretch of the footprint ellipse.
    return 1.6 * step


def feed_gain(feed_boresight, user_position, layout: BeamLayout,
              budget: LinkBudget):
    """Feed radiation pattern gain toward a user (linear, power-like).

    Tapered-aperture model: peak ``k_a**2`` at boresight, exactly 3 dB
    down at the beam radius, Airy-type sidelobes beyond the first null.
    Defined for every angle; scalars or arrays of positions are accepted.
    """
    sat = budget.satellite_position()
    bore = np.asarray(feed_boresight, dtype=float)
    user = np.asarray(user_position, dtype=float)
    theta = geometry.off_axis_angle_deg(
        sat, bore[0], bore[1], user[..., 0], user[..., 1], budget.earth_radius_m
    )
    return pattern_gain(theta, layout.beam_radius_3db_deg)


def pattern_gain(theta_deg, radius_3db_deg: float):
    """Evaluate the aperture pattern at off-axis angles in degrees."""
    k_a = _U_HALF / math.sin(math.radians(radius_3db_deg))
    u = k_a * np.sin(np.radians(np.asarray(theta_deg, dtype=float)))
    safe = np.where(u == 0.0, 1.0, u)
    taper = np.where(u == 0.0, 1.0, (2.0 * j1(safe) / safe) ** 2)
    return k_a**2 * taper


def build_gain_matrix(layout: BeamLayout, users: UserSet, budget: LinkBudget,
                      fading: np.ndarray | None = None) -> np.ndarray:
    """Real gain matrix F = A*G of shape (K*pool, N).

    Entry (kq, n) is ``G_R * a_kqn / (4*pi*(d_kq/lambda) * sqrt(K_B*T_R*B_W))``
    scaled by the user's fading term: receive antenna amplitude gain, feed
    amplitude gain, spreading loss at the per-user slant range, all
    normalized to the receiver noise. The entries are amplitudes (the
    squared gains are the power gains), so the feed term is the square
    root of the power pattern. `fading` is a per-user vector (default all
    ones, clear sky).
    """
    if users.beams != layout.beams:
        raise ConfigError("users and layout disagree on the number of beams")
    sat = budget.satellite_position()
    flat = users.flat_positions()
    rows = flat.shape[0]
    d = geometry.slant_range_m(sat, flat[:, 0], flat[:, 1], budget.earth_radius_m)
    g_r = 10.0 ** (budget.user_antenna_gain_db / 20.0)
    denom = 4.0 * math.pi * (d / budget.wavelength_m) * budget.noise_amplitude

    gains = np.empty((rows, layout.feeds))
    for n in range(layout.feeds):
        bore = layout.feed_boresights[n]
        theta = geometry.off_axis_angle_deg(
            sat, bore[0], bore[1], flat[:, 0], flat[:, 1], budget.earth_radius_m
        )
        gains[:, n] = pattern_gain(theta, layout.beam_radius_3db_deg)
    g = g_r * np.sqrt(gains) / denom[:, None]

    if fading is None:
        return g
    fading = np.asarray(fading, dtype=float)
    if fading.shape != (rows,):
        raise ConfigError(f"fading must have one entry per user, shape ({rows},)")
    return fading[:, None] * g


def rain_fade(rows: int, std_db: float, rng_seed) -> np.ndarray:
    """Log-normal clear-air/rain attenuation factors, one per user."""
    rng = np.random.default_rng(rng_seed)
    return 10.0 ** (-np.abs(rng.normal(0.0, std_db, rows)) / 20.0)


@dataclass(frozen=True)
class PhaseModel:
    """Phase-variation model for the feed-to-user paths.

    `uniform` draws every entry phase independently; `ultra_stable` uses a
    common random phase per user plus a small Gaussian spread of
    `chi_deg` degrees (standard deviation) across feeds.
    """

    variant: str = "ultra_stable"
    chi_deg: float = 10.0
    rng_seed: int = 0

    def __post_init__(self):
        if self.variant not in ("uniform", "ultra_stable"):
            raise ConfigError(f"unknown phase model variant {self.variant!r}")
        if self.chi_deg < 0.0:
            raise ConfigError("chi_deg must be >= 0")


def build_phase_matrix(model: PhaseModel, rows: int, feeds: int) -> np.ndarray:
    """Unit-modulus phase matrix of shape (rows, feeds)."""
    rng = np.random.default_rng(model.rng_seed)
    if model.variant == "uniform":
        theta = rng.uniform(0.0, 2.0 * math.pi, (rows, feeds))
    else:
        phi = rng.uniform(0.0, 2.0 * math.pi, (rows, 1))
        spread = rng.normal(0.0, math.radians(model.chi_deg), (rows, feeds))
        theta = phi + spread
    return np.exp(1j * theta)


@dataclass(frozen=True)
class ChannelMatrix:
    """Complex channel matrix with beam-major row blocks.

    Row ``k*Q + q`` holds the path coefficients of user q in beam k; the
    received amplitude for a transmit vector x is ``h @ x``. The user
    channel vector of the rate formulas is the conjugate of the stored
    row, so inner products ``h_vec^H x`` equal ``row @ x``.
    """

    h: np.ndarray
    beams: int
    users_per_beam: int

    def __post_init__(self):
        h = np.asarray(self.h)
        if not np.iscomplexobj(h):
            h = h.astype(complex)
        object.__setattr__(self, "h", h)
        if h.ndim != 2 or h.shape[0] != self.beams * self.users_per_beam:
            raise ConfigError(
                f"channel must have K*Q = {self.beams * self.users_per_beam} rows, "
                f"got shape {h.shape}"
            )
        if not np.all(np.isfinite(h)):
            raise ConfigError("channel matrix contains non-finite entries")
        h.flags.writeable = False

    @property
    def feeds(self) -> int:
        return self.h.shape[1]

    def beam_rows(self, k: int) -> slice:
        q = self.users_per_beam
        return slice(k * q, (k + 1) * q)

    def beam(self, k: int) -> np.ndarray:
        """Q x N channel block of beam k."""
        return self.h[self.beam_rows(k)]

    def user_row(self, k: int, q: int) -> np.ndarray:
        """Stored row of user q in beam k (received amplitude = row @ x)."""
        return self.h[k * self.users_per_beam + q]

    def user_vector(self, k: int, q: int) -> np.ndarray:
        """User channel vector h with h^H x giving the received amplitude."""
        return self.user_row(k, q).conj()

    def excluding(self, k: int) -> np.ndarray:
        """(K-1)Q x N matrix of every other beam's rows."""
        return np.delete(self.h, self.beam_rows(k), axis=0)


def assemble_channel(gain: np.ndarray, phase: np.ndarray, beams: int,
                     users_per_beam: int) -> ChannelMatrix:
    """Entrywise product of gain and phase matrices as a ChannelMatrix."""
    gain = np.asarray(gain)
    phase = np.asarray(phase)
    if gain.shape != phase.shape:
        raise ConfigError(
            f"gain and phase shapes differ: {gain.shape} vs {phase.shape}"
        )
    return ChannelMatrix(h=gain * phase, beams=beams, users_per_beam=users_per_beam)


def extract_users(pool: ChannelMatrix, members: np.ndarray) -> ChannelMatrix:
    """Channel of the served users only.

    `members` is a (K, Q) integer array of per-beam indices into each
    beam's pool rows.
    """
    members = np.asarray(members, dtype=int)
    if members.ndim != 2 or members.shape[0] != pool.beams:
        raise ConfigError("members must be a (K, Q) index array")
    rows = [pool.beam(k)[members[k]] for k in range(pool.beams)]
    return ChannelMatrix(
        h=np.vstack(rows), beams=pool.beams, users_per_beam=members.shape[1]
    )


@dataclass(frozen=True)
class PerturbationBounds:
    """Norm bounds on a channel perturbation, per beam and in total.

    `gamma_k` bounds ``||Delta_k||_F**2`` per beam, `gamma_tilde_k` is the
    complement sum over the other beams, `gamma_lower_k` a lower bound on
    the per-beam perturbation energy. `epsilon_k` / `nu_k` hold derived
    worst-case scalars once a robust design has been evaluated.
    """

    gamma_total: float
    gamma_k: np.ndarray
    gamma_tilde_k: np.ndarray
    gamma_lower_k: np.ndarray
    epsilon_k: np.ndarray | None = None
    nu_k: np.ndarray | None = None

    def __post_init__(self):
        gk = np.asarray(self.gamma_k, dtype=float)
        gt = np.asarray(self.gamma_tilde_k, dtype=float)
        gl = np.asarray(self.gamma_lower_k, dtype=float)
        for name, a in (("gamma_k", gk), ("gamma_tilde_k", gt), ("gamma_lower_k", gl)):
            object.__setattr__(self, name, a)
            if a.ndim != 1 or a.shape != gk.shape:
                raise ConfigError(f"{name} must be a length-K vector")
            if np.any(a < 0.0):
                raise ConfigError(f"{name} must be nonnegative")
            a.flags.writeable = False
        if self.gamma_total < 0.0:
            raise ConfigError("gamma_total must be nonnegative")
        if np.any(gl > gk * (1.0 + 1e-12) + 1e-300):
            raise ConfigError("gamma_lower_k may not exceed gamma_k")

    @property
    def beams(self) -> int:
        return self.gamma_k.shape[0]

    @classmethod
    def zero(cls, beams: int) -> "PerturbationBounds":
        z = np.zeros(beams)
        return cls(gamma_total=0.0, gamma_k=z, gamma_tilde_k=z.copy(),
                   gamma_lower_k=z.copy())

    @classmethod
    def from_delta(cls, delta: np.ndarray, beams: int,
                   users_per_beam: int) -> "PerturbationBounds":
        """Tight bounds realized by a concrete perturbation matrix."""
        q = users_per_beam
        gamma_k = np.array(
            [np.sum(np.abs(delta[k * q:(k + 1) * q]) ** 2) for k in range(beams)]
        )
        # Complement sums are formed literally so the identity is exact.
        gamma_tilde = np.array(
            [np.sum(np.delete(gamma_k, k)) for k in range(beams)]
        )
        return cls(
            gamma_total=float(np.sum(gamma_k)),
            gamma_k=gamma_k,
            gamma_tilde_k=gamma_tilde,
            gamma_lower_k=gamma_k.copy(),
        )

    def with_lower(self, value: float) -> "PerturbationBounds":
        """Override the lower bounds, clipped so they stay below gamma_k."""
        if value < 0.0:
            raise ConfigError("lower bound must be nonnegative")
        return replace(self, gamma_lower_k=np.minimum(value, self.gamma_k))

    def with_derived(self, epsilon_k: np.ndarray,
                     nu_k: np.ndarray) -> "PerturbationBounds":
        return replace(self, epsilon_k=np.asarray(epsilon_k, dtype=float),
                       nu_k=np.asarray(nu_k, dtype=float))


def perturb_channel(ch: ChannelMatrix, ratio: float, rng_seed):
    """Additive complex-Gaussian perturbation scaled to a Frobenius ratio.

    Returns ``(perturbed_channel, delta, bounds)`` with
    ``||delta||_F = ratio * ||H||_F`` exactly and per-beam bounds set to
    the realized energies (tight).
    """
    if ratio < 0.0:
        raise ConfigError("ratio must be >= 0")
    if ratio == 0.0:
        delta = np.zeros_like(ch.h)
        return ch, delta, PerturbationBounds.zero(ch.beams)
    rng = np.random.default_rng(rng_seed)
    delta = rng.standard_normal(ch.h.shape) + 1j * rng.standard_normal(ch.h.shape)
    delta *= ratio * np.linalg.norm(ch.h) / np.linalg.norm(delta)
    perturbed = ChannelMatrix(
        h=ch.h + delta, beams=ch.beams, users_per_beam=ch.users_per_beam
    )
    bounds = PerturbationBounds.from_delta(delta, ch.beams, ch.users_per_beam)
    return perturbed, delta, bounds
