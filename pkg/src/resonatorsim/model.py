"""System parameters, unit conversions, and derived dispersive quantities.

Unit conventions: configuration values are ordinary frequencies (GHz for
resonator frequencies, MHz for couplings); every internal frequency is
angular, in rad/us.  Decay rates kappa are plain rates in 1/us with no 2*pi,
so kappa = 0.5 MHz corresponds to a 2 us photon lifetime.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

TWO_PI = 2.0 * np.pi

#: g/|Delta| above which the dispersive approximation is flagged.
DISPERSIVE_WARN_RATIO = 0.1


def ghz_to_angular(freq_ghz: float) -> float:
    """Ordinary GHz -> angular rad/us."""
    return TWO_PI * 1.0e3 * freq_ghz


def mhz_to_angular(freq_mhz: float) -> float:
    """Ordinary MHz -> angular rad/us."""
    return TWO_PI * freq_mhz


@dataclass(frozen=True)
class ResonatorSpec:
    """One distant resonator: frequency (GHz), bus coupling g (MHz), decay (MHz)."""

    freq_ghz: float
    g_mhz: float
    kappa_mhz: float = 0.0

    def __post_init__(self):
        if self.freq_ghz <= 0:
            raise ValueError(f"resonator frequency must be positive, got {self.freq_ghz} GHz")
        if self.g_mhz < 0:
            raise ValueError(f"coupling g must be nonnegative, got {self.g_mhz} MHz")
        if self.kappa_mhz < 0:
            raise ValueError(f"decay rate must be nonnegative, got {self.kappa_mhz} MHz")

    @property
    def omega(self) -> float:
        return ghz_to_angular(self.freq_ghz)

    @property
    def g(self) -> float:
        return mhz_to_angular(self.g_mhz)

    @property
    def kappa(self) -> float:
        return float(self.kappa_mhz)


@dataclass(frozen=True)
class SystemSpec:
    """Bus resonator plus n distant resonators, optionally with a direct
    nearest-neighbour resonator-resonator coupling G_M."""

    bus_freq_ghz: float
    bus_kappa_mhz: float
    resonators: tuple[ResonatorSpec, ...]
    gm_mhz: float = 0.0

    def __post_init__(self):
        if self.bus_freq_ghz <= 0:
            raise ValueError(f"bus frequency must be positive, got {self.bus_freq_ghz} GHz")
        if self.bus_kappa_mhz < 0:
            raise ValueError(f"bus decay rate must be nonnegative, got {self.bus_kappa_mhz} MHz")
        if len(self.resonators) < 2:
            raise ValueError(f"need at least 2 distant resonators, got {len(self.resonators)}")
        if self.gm_mhz < 0:
            raise ValueError(f"direct coupling G_M must be nonnegative, got {self.gm_mhz} MHz")
        object.__setattr__(self, "resonators", tuple(self.resonators))

    @property
    def n(self) -> int:
        return len(self.resonators)

    @property
    def bus_omega(self) -> float:
        return ghz_to_angular(self.bus_freq_ghz)

    @property
    def bus_kappa(self) -> float:
        return float(self.bus_kappa_mhz)

    @property
    def gm(self) -> float:
        return mhz_to_angular(self.gm_mhz)

    @property
    def omegas(self) -> np.ndarray:
        return np.array([r.omega for r in self.resonators])

    @property
    def couplings(self) -> np.ndarray:
        return np.array([r.g for r in self.resonators])

    @property
    def kappas(self) -> np.ndarray:
        return np.array([r.kappa for r in self.resonators])

    @property
    def detunings(self) -> np.ndarray:
        """Delta_j = Omega_0 - omega_j, in rad/us."""
        return self.bus_omega - self.omegas


@dataclass(frozen=True)
class DispersiveModel:
    """Second-order quantities of the bus-eliminated model.

    chi[i, j] is the bus-mediated hopping rate between distant resonators i
    and j (rad/us, zero diagonal); delta_ij[i, j] is the splitting of their
    Lamb-shifted frequencies.
    """

    delta: np.ndarray
    lamb_shifted_omega: np.ndarray
    lamb_shifted_bus: float
    chi: np.ndarray
    delta_ij: np.ndarray

    @property
    def n(self) -> int:
        return len(self.delta)

    def is_resonant(self, atol: float = 1.0e-9) -> bool:
        """True when all Lamb-shifted splittings vanish."""
        return bool(np.all(np.abs(self.delta_ij) <= atol))

    def is_homogeneous(self, rtol: float = 1.0e-12) -> bool:
        """True when all pairwise chi agree and the model is resonant."""
        off = self.chi[~np.eye(self.n, dtype=bool)]
        return self.is_resonant() and bool(
            np.all(np.abs(off - off[0]) <= rtol * max(1.0, abs(off[0])))
        )

    @property
    def chi_homogeneous(self) -> float:
        """The common chi of a homogeneous model."""
        if not self.is_homogeneous():
            raise ValueError("model is not homogeneous; use the full chi matrix")
        return float(self.chi[0, 1])


def derive_dispersive(spec: SystemSpec) -> DispersiveModel:
    """Detunings, Lamb shifts, and the pairwise chi matrix.

    chi_ij = (g_i g_j / 2)(1/Delta_i + 1/Delta_j); Lamb-shifted frequencies
    omega'_j = omega_j + g_j^2/Delta_j and Omega_0' = Omega_0 - sum g_j^2/Delta_j.
    Requires every detuning nonzero.
    """
    delta = spec.detunings
    for j, d in enumerate(delta):
        if d == 0.0:
            raise ValueError(
                f"resonator {j + 1} is resonant with the bus "
                f"({spec.resonators[j].freq_ghz} GHz): dispersive model undefined"
            )
    g = spec.couplings
    shift = g**2 / delta
    omega_p = spec.omegas + shift
    bus_p = spec.bus_omega - float(np.sum(shift))
    inv = 1.0 / delta
    chi = 0.5 * np.outer(g, g) * (inv[:, None] + inv[None, :])
    np.fill_diagonal(chi, 0.0)
    delta_ij = omega_p[:, None] - omega_p[None, :]
    for arr in (delta, omega_p, chi, delta_ij):
        arr.setflags(write=False)
    return DispersiveModel(delta, omega_p, bus_p, chi, delta_ij)


def dispersive_validity(spec: SystemSpec) -> list[tuple[float, str]]:
    """Per-resonator ratios g_j/|Delta_j| with a pass/warn flag each."""
    out = []
    for j, (g, d) in enumerate(zip(spec.couplings, spec.detunings)):
        if d == 0.0:
            raise ValueError(f"resonator {j + 1} has zero detuning; validity ratio undefined")
        ratio = float(g / abs(d))
        out.append((ratio, "warn" if ratio > DISPERSIVE_WARN_RATIO else "pass"))
    return out


def lifetime_from_q(q_factor: float, freq_ghz: float) -> float:
    """Photon lifetime in us of a resonator with quality factor Q at freq_ghz."""
    if q_factor <= 0:
        raise ValueError(f"quality factor must be positive, got {q_factor}")
    if freq_ghz <= 0:
        raise ValueError(f"frequency must be positive, got {freq_ghz} GHz")
    return q_factor / ghz_to_angular(freq_ghz)


def lifetime_from_kappa(kappa_mhz: float) -> float:
    """Photon lifetime in us for a plain decay rate in MHz (= 1/us)."""
    if kappa_mhz <= 0:
        raise ValueError(f"decay rate must be positive, got {kappa_mhz} MHz")
    return 1.0 / kappa_mhz


# --- JSON configuration -----------------------------------------------------

_TOP_KEYS = {"bus", "resonators", "gm_mhz"}
_BUS_KEYS = {"freq_ghz", "kappa_mhz"}
_RES_KEYS = {"freq_ghz", "g_mhz", "kappa_mhz"}


def spec_from_dict(cfg: dict) -> SystemSpec:
    """Build a SystemSpec from a configuration mapping; unknown keys rejected."""
    if not isinstance(cfg, dict):
        raise ValueError(f"config root must be an object, got {type(cfg).__name__}")
    _reject_unknown(cfg, _TOP_KEYS, "config")
    for key in ("bus", "resonators"):
        if key not in cfg:
            raise ValueError(f"config is missing required key '{key}'")
    bus = cfg["bus"]
    if not isinstance(bus, dict):
        raise ValueError("config 'bus' must be an object")
    _reject_unknown(bus, _BUS_KEYS, "bus")
    if "freq_ghz" not in bus:
        raise ValueError("bus entry is missing 'freq_ghz'")
    entries = cfg["resonators"]
    if not isinstance(entries, list) or not entries:
        raise ValueError("config 'resonators' must be a non-empty list")
    resonators = []
    for j, entry in enumerate(entries):
        if not isinstance(entry, dict):
            raise ValueError(f"resonator {j + 1} entry must be an object")
        _reject_unknown(entry, _RES_KEYS, f"resonator {j + 1}")
        for key in ("freq_ghz", "g_mhz"):
            if key not in entry:
                raise ValueError(f"resonator {j + 1} entry is missing '{key}'")
        resonators.append(
            ResonatorSpec(
                freq_ghz=float(entry["freq_ghz"]),
                g_mhz=float(entry["g_mhz"]),
                kappa_mhz=float(entry.get("kappa_mhz", 0.0)),
            )
        )
    return SystemSpec(
        bus_freq_ghz=float(bus["freq_ghz"]),
        bus_kappa_mhz=float(bus.get("kappa_mhz", 0.0)),
        resonators=tuple(resonators),
        gm_mhz=float(cfg.get("gm_mhz", 0.0)),
    )


def spec_to_dict(spec: SystemSpec) -> dict:
    """Round-trippable configuration mapping for a SystemSpec."""
    return {
        "bus": {"freq_ghz": spec.bus_freq_ghz, "kappa_mhz": spec.bus_kappa_mhz},
        "resonators": [
            {"freq_ghz": r.freq_ghz, "g_mhz": r.g_mhz, "kappa_mhz": r.kappa_mhz}
            for r in spec.resonators
        ],
        "gm_mhz": spec.gm_mhz,
    }


def load_spec(path) -> SystemSpec:
    """Read and validate a JSON system configuration file."""
    p = Path(path)
    if not p.is_file():
        raise FileNotFoundError(f"config file not found: {p}")
    try:
        cfg = json.loads(p.read_text())
    except json.JSONDecodeError as err:
        raise ValueError(f"config file {p} is not valid JSON: {err}") from None
    return spec_from_dict(cfg)


def _reject_unknown(mapping: dict, allowed: set, where: str) -> None:
    unknown = sorted(set(mapping) - allowed)
    if unknown:
        raise ValueError(f"unknown {where} keys: {', '.join(unknown)}")
