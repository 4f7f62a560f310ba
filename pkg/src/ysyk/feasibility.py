"""Cavity-QED experimental-design calculator.

Order-of-magnitude estimates for realizing the boson-mediated random-hopping
model with ultracold fermions in a multimode optical cavity: energy-scale
hierarchies, effective Yukawa and quartic coupling scales, dressed
dissipation rates, cooperativity figures of merit, and trap/waist geometry.

Unit conventions: every frequency-like quantity is stored as an angular
frequency in rad/s.  The parameter-file front end accepts ordinary
frequencies with units (``2.6 MHz`` means nu, multiplied by 2 pi on input)
and every report echoes both conventions, which keeps factor-of-2-pi
mistakes visible.  The spatially varying detuning of the disordered drive
collapses to a scalar magnitude here; this is an estimator, not an optics
simulation.  Two-tone cancellation of the residual disordered Stark shift
and the mode-overlap integrals behind the coupling tensors are part of the
proposal but outside this calculator's scope.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field

import numpy as np
from scipy.constants import atomic_mass, hbar

__all__ = [
    "CavityParams",
    "HierarchyCheck",
    "FeasibilityReport",
    "LI6_MASS_KG",
    "ZETA_WINDOW",
    "check_hierarchy",
    "effective_couplings",
    "dissipation",
    "geometry",
    "feasibility_report",
    "parse_parameter_file",
    "parse_quantity",
]

TWO_PI = 2.0 * np.pi
LI6_MASS_KG = 6.0151228874 * atomic_mass
# transverse-size window in which the atomic cloud resolves speckle structure
ZETA_WINDOW = (0.65, 0.98)


@dataclass(frozen=True)
class CavityParams:
    """Operating point; frequencies angular (rad/s), lengths in meters,
    masses in kilograms."""

    omega_d: float  # drive Rabi frequency
    omega_m: float  # single-photon Rabi frequency
    delta_da: float  # drive-atom detuning
    delta_cd: float  # cavity-drive detuning
    kappa: float  # cavity linewidth
    gamma: float  # atomic linewidth
    trap_freq: float = 0.0
    waist: float = 0.0
    mass: float = LI6_MASS_KG

    def __post_init__(self):
        for name in ("omega_d", "omega_m", "delta_da", "delta_cd", "kappa", "gamma"):
            if abs(getattr(self, name)) <= 0:
                raise ValueError(f"{name} must be non-zero")


@dataclass(frozen=True)
class HierarchyCheck:
    name: str
    ratio: float
    margin: float

    @property
    def passed(self) -> bool:
        return self.ratio >= self.margin


def check_hierarchy(p: CavityParams, regime: str = "ysyk", margin: float = 5.0) -> list[HierarchyCheck]:
    """Energy-scale hierarchy checks with achieved ratios.

    The boson-mediated regime needs ``|delta_da| >> |omega_d| >> |omega_m|``;
    the quartic regime additionally needs the cavity detuning to dominate the
    induced coupling, ``|delta_cd| >> |omega_d omega_m / delta_da|``.
    """
    if margin < 1:
        raise ValueError("margin must be >= 1")
    checks = [
        HierarchyCheck("delta_da_over_omega_d", abs(p.delta_da) / abs(p.omega_d), margin),
        HierarchyCheck("omega_d_over_omega_m", abs(p.omega_d) / abs(p.omega_m), margin),
    ]
    if regime == "syk4":
        induced = abs(p.omega_d) * abs(p.omega_m) / abs(p.delta_da)
        checks.append(HierarchyCheck("delta_cd_over_induced_coupling", abs(p.delta_cd) / induced, margin))
    elif regime != "ysyk":
        raise ValueError(f"unknown regime {regime!r}")
    return checks


@dataclass(frozen=True)
class CouplingScales:
    """Effective interaction scales (angular frequencies)."""

    yukawa_scale: float  # g / sqrt(2 omega0) ~ |omega_d||omega_m| / |delta_da|
    j_lossless: float  # |omega_d|^2 |omega_m|^2 / (delta_da^2 |delta_cd|)
    j_dissipative: float  # same with |delta_cd + i kappa/2| in the denominator


def effective_couplings(p: CavityParams) -> CouplingScales:
    """Yukawa and quartic coupling scales; computed regardless of whether the
    hierarchy holds (pair with :func:`check_hierarchy`)."""
    yukawa = abs(p.omega_d) * abs(p.omega_m) / abs(p.delta_da)
    denom_lossless = p.delta_da ** 2 * abs(p.delta_cd)
    j_lossless = (abs(p.omega_d) * abs(p.omega_m)) ** 2 / denom_lossless
    denom_diss = p.delta_da ** 2 * abs(p.delta_cd + 1j * p.kappa / 2.0)
    j_diss = (abs(p.omega_d) * abs(p.omega_m)) ** 2 / denom_diss
    return CouplingScales(yukawa_scale=yukawa, j_lossless=j_lossless, j_dissipative=float(j_diss))


@dataclass(frozen=True)
class DissipationReport:
    gamma_tilde: float
    kappa_tilde: float
    eta: float  # single-atom cooperativity 4 |omega_m|^2 / (kappa gamma)
    merit_yukawa: float  # g_eff^2 / (kappa gamma_tilde)
    merit_quartic: float  # j_dissipative^2 / (kappa_tilde gamma_tilde)


def dissipation(p: CavityParams) -> DissipationReport:
    """Dressed decay rates and cooperativity figures of merit.

    The excited-state decay is suppressed by the dispersive dressing to the
    Lorentzian form ``Gamma |omega_d|^2 / (delta_da^2 + (Gamma/2)^2)``; the
    photon loss inherited by the ground-state fermions is
    ``kappa |omega_d omega_m|^2 / (delta_da^2 (delta_cd^2 + kappa^2/4))``.
    Both merit ratios reduce to ``eta / 4`` (they agree identically; the
    common value picks up a relative ``Gamma^2 / 4 delta_da^2`` correction
    from the Lorentzian denominator, negligible in the dispersive regime),
    and the dissipative couplings reduce to the lossless ones as
    ``kappa, Gamma -> 0``.
    """
    gamma_tilde = p.gamma * p.omega_d ** 2 / (p.delta_da ** 2 + (p.gamma / 2.0) ** 2)
    kappa_tilde = (
        p.kappa
        * (p.omega_d * p.omega_m) ** 2
        / (p.delta_da ** 2 * (p.delta_cd ** 2 + p.kappa ** 2 / 4.0))
    )
    eta = 4.0 * p.omega_m ** 2 / (p.kappa * p.gamma)
    scales = effective_couplings(p)
    merit_yukawa = scales.yukawa_scale ** 2 / (p.kappa * gamma_tilde)
    merit_quartic = scales.j_dissipative ** 2 / (kappa_tilde * gamma_tilde)
    return DissipationReport(
        gamma_tilde=gamma_tilde,
        kappa_tilde=kappa_tilde,
        eta=eta,
        merit_yukawa=merit_yukawa,
        merit_quartic=merit_quartic,
    )


@dataclass(frozen=True)
class GeometryReport:
    oscillator_length: float  # x0 = sqrt(hbar / (m omega_trap))
    zeta: float  # sqrt(2) x0 / w0
    in_window: bool


def geometry(p: CavityParams) -> GeometryReport:
    """Transverse-size ratio of the trapped cloud to the cavity waist;
    values inside ``ZETA_WINDOW`` resolve the speckle disorder."""
    if p.trap_freq <= 0 or p.waist <= 0:
        raise ValueError("geometry needs trap_freq and waist")
    x0 = float(np.sqrt(hbar / (p.mass * p.trap_freq)))
    zeta = float(np.sqrt(2.0) * x0 / p.waist)
    return GeometryReport(
        oscillator_length=x0, zeta=zeta, in_window=ZETA_WINDOW[0] <= zeta <= ZETA_WINDOW[1]
    )


@dataclass
class FeasibilityReport:
    params: CavityParams
    regime: str
    margin: float
    hierarchy: list[HierarchyCheck] = field(default_factory=list)
    couplings: CouplingScales | None = None
    dissipation: DissipationReport | None = None
    geom: GeometryReport | None = None

    @property
    def hierarchy_passed(self) -> bool:
        return all(c.passed for c in self.hierarchy)

    def to_dict(self) -> dict:
        def cyc(x):  # echo angular value and ordinary-frequency value
            return {"rad_per_s": x, "over_2pi_hz": x / TWO_PI}

        out = {
            "regime": self.regime,
            "margin": self.margin,
            "hierarchy": [
                {"name": c.name, "ratio": c.ratio, "margin": c.margin, "passed": c.passed}
                for c in self.hierarchy
            ],
            "hierarchy_passed": self.hierarchy_passed,
            "couplings": {
                "yukawa_scale": cyc(self.couplings.yukawa_scale),
                "j_lossless": cyc(self.couplings.j_lossless),
                "j_dissipative": cyc(self.couplings.j_dissipative),
            },
            "dissipation": {
                "gamma_tilde": cyc(self.dissipation.gamma_tilde),
                "kappa_tilde": cyc(self.dissipation.kappa_tilde),
                "eta": self.dissipation.eta,
                "merit_yukawa": self.dissipation.merit_yukawa,
                "merit_quartic": self.dissipation.merit_quartic,
            },
        }
        if self.geom is not None:
            out["geometry"] = {
                "oscillator_length_m": self.geom.oscillator_length,
                "zeta": self.geom.zeta,
                "zeta_window": list(ZETA_WINDOW),
                "in_window": self.geom.in_window,
            }
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1)

    def table(self) -> str:
        rows = [f"regime: {self.regime}   margin: {self.margin:g}"]
        for c in self.hierarchy:
            mark = "pass" if c.passed else "FAIL"
            rows.append(f"  {c.name:32s} ratio {c.ratio:10.3g}  [{mark}]")
        co, di = self.couplings, self.dissipation
        rows.append(f"  yukawa scale / 2pi   {co.yukawa_scale / TWO_PI:12.6g} Hz")
        rows.append(f"  J (lossless) / 2pi   {co.j_lossless / TWO_PI:12.6g} Hz")
        rows.append(f"  J (dissipative)/2pi  {co.j_dissipative / TWO_PI:12.6g} Hz")
        rows.append(f"  gamma_tilde / 2pi    {di.gamma_tilde / TWO_PI:12.6g} Hz")
        rows.append(f"  kappa_tilde / 2pi    {di.kappa_tilde / TWO_PI:12.6g} Hz")
        rows.append(f"  cooperativity eta    {di.eta:12.6g}")
        rows.append(f"  merit (yukawa)       {di.merit_yukawa:12.6g}")
        rows.append(f"  merit (quartic)      {di.merit_quartic:12.6g}")
        if self.geom is not None:
            rows.append(f"  oscillator length    {self.geom.oscillator_length * 1e6:12.4g} um")
            rows.append(
                f"  zeta                 {self.geom.zeta:12.4g}  "
                f"(window {ZETA_WINDOW[0]}..{ZETA_WINDOW[1]}: "
                f"{'inside' if self.geom.in_window else 'outside'})"
            )
        return "\n".join(rows)


def feasibility_report(p: CavityParams, regime: str = "ysyk", margin: float = 5.0) -> FeasibilityReport:
    report = FeasibilityReport(params=p, regime=regime, margin=margin)
    report.hierarchy = check_hierarchy(p, regime, margin)
    report.couplings = effective_couplings(p)
    report.dissipation = dissipation(p)
    if p.trap_freq > 0 and p.waist > 0:
        report.geom = geometry(p)
    return report


_UNIT_SCALE = {
    "hz": TWO_PI,
    "khz": TWO_PI * 1e3,
    "mhz": TWO_PI * 1e6,
    "ghz": TWO_PI * 1e9,
    "rad/s": 1.0,
    "m": 1.0,
    "mm": 1e-3,
    "um": 1e-6,
    "nm": 1e-9,
    "kg": 1.0,
    "u": atomic_mass,
}


def parse_quantity(text: str) -> float:
    """Parse ``value [unit]``; plain-frequency units convert to angular."""
    parts = text.strip().split()
    if len(parts) == 1:
        return float(parts[0])
    if len(parts) != 2:
        raise ValueError(f"cannot parse quantity {text!r}")
    value, unit = float(parts[0]), parts[1].lower()
    if unit not in _UNIT_SCALE:
        raise ValueError(f"unknown unit {parts[1]!r} in {text!r}")
    return value * _UNIT_SCALE[unit]


def parse_parameter_file(path) -> CavityParams:
    """Read a ``key = value unit`` file (``#`` comments allowed) into
    :class:`CavityParams`.

    Keys: omega_d, omega_m, delta_da, delta_cd, kappa, gamma, and optional
    trap_freq, waist, mass (``mass = 6Li`` selects the lithium-6 mass).
    """
    values: dict = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            m = re.match(r"(\w+)\s*=\s*(.+)", line)
            if not m:
                raise ValueError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
            key, text = m.group(1), m.group(2)
            if key == "mass" and text.strip().lower() in ("6li", "li6"):
                values[key] = LI6_MASS_KG
            else:
                values[key] = parse_quantity(text)
    required = ("omega_d", "omega_m", "delta_da", "delta_cd", "kappa", "gamma")
    missing = [k for k in required if k not in values]
    if missing:
        raise ValueError(f"parameter file {path} is missing keys: {missing}")
    known = set(required) | {"trap_freq", "waist", "mass"}
    unknown = set(values) - known
    if unknown:
        raise ValueError(f"parameter file {path} has unknown keys: {sorted(unknown)}")
    return CavityParams(**values)
