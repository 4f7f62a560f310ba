"""Diagonalization and spectral chaos markers.

Covers the density of states with its Gaussian envelope fit, gap-ratio
statistics against the Poisson and Wigner-Dyson references, the spectral form
factor with its plateau and ramp detectors, and cluster segmentation of
spectra that fragment into boson-occupation bands.

Detector conventions: the plateau onset is the left edge of the earliest
contiguous window (of fixed width, in the same time units as the curve) on
which the curve stays within a relative tolerance of the plateau value; the
ramp onset is the earliest time at which the curve matches a power-law
reference fit within a tight relative tolerance.  Both operate on whatever
time axis the curve carries, so rescaled-time conventions are applied by the
caller.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.integrate import quad
from scipy.optimize import curve_fit
from scipy.sparse.linalg import ArpackNoConvergence, eigsh

from .hamiltonian import SparseHamiltonian

__all__ = [
    "Spectrum",
    "SffCurve",
    "GapRatioStats",
    "SffFeatures",
    "Curve",
    "diagonalize",
    "dos",
    "gap_ratios",
    "reference_gap_distribution",
    "POISSON_MEAN_R",
    "GUE_MEAN_R",
    "sff",
    "sff_double_sum",
    "segment_clusters",
    "lowest_cluster",
    "heisenberg_time",
    "fit_power_law",
    "detect_plateau",
    "detect_ramp",
    "log_grid",
]

POISSON_MEAN_R = 2.0 * np.log(2.0) - 1.0
GUE_MEAN_R = 0.5996  # large-matrix unitary-class mean; the surmise integral gives 0.6027


@dataclass
class Spectrum:
    """Sorted eigenvalues, optional eigenvectors, and cluster metadata."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray | None = None
    model: str = ""
    clusters: list[tuple[int, int]] | None = None

    @property
    def dim(self) -> int:
        return len(self.eigenvalues)


@dataclass
class Curve:
    """Generic diagnostic curve on a time or bin grid."""

    grid: np.ndarray
    values: np.ndarray
    stderr: np.ndarray | None = None
    n_samples: int = 1
    meta: dict = field(default_factory=dict)


@dataclass
class SffCurve:
    """Spectral form factor ``K(t)`` on a time grid at inverse temperature
    ``beta``; normalized so ``K(0) = 1`` at ``beta = 0``."""

    times: np.ndarray
    values: np.ndarray
    beta: float = 0.0
    n_realizations: int = 1
    stderr: np.ndarray | None = None

    def rescaled(self, alpha: float) -> "SffCurve":
        return SffCurve(self.times * alpha, self.values, self.beta, self.n_realizations, self.stderr)


@dataclass
class GapRatioStats:
    """Consecutive-spacing ratios ``r_n = min(s_n, s_{n-1}) / max(...)``."""

    ratios: np.ndarray
    mean: float
    histogram: Curve | None = None


@dataclass
class SffFeatures:
    """Detector outputs on a form-factor curve; times are absent (None) when
    no qualifying window or crossing exists."""

    t_plateau: float | None
    t_ramp: float | None
    k_plateau: float
    ramp_exponent: float | None = None


def log_grid(start: float, stop: float, num: int) -> np.ndarray:
    return np.logspace(np.log10(start), np.log10(stop), num)


def diagonalize(
    h: SparseHamiltonian | np.ndarray,
    mode: str = "full",
    k: int | None = None,
    dense_budget: int = 4096,
    keep_vectors: bool = False,
) -> Spectrum:
    """Diagonalize a Hermitian operator.

    ``mode='full'`` uses dense Hermitian routines and requires the dimension
    to fit the dense budget.  ``mode='lowest_k'`` returns the ``k`` smallest
    eigenvalues: through a dense subset solver within the budget, otherwise
    through a Lanczos iteration whose non-convergence is reported with the
    iteration count.
    """
    if isinstance(h, SparseHamiltonian):
        matrix, model = h.matrix, h.model
    else:
        matrix, model = h, ""
    dim = matrix.shape[0]

    if mode == "full":
        if dim > dense_budget:
            raise ValueError(
                f"dimension {dim} exceeds the dense budget {dense_budget}; "
                "use mode='lowest_k' or raise the budget"
            )
        dense = matrix.toarray() if sp.issparse(matrix) else np.asarray(matrix)
        if keep_vectors:
            vals, vecs = np.linalg.eigh(dense)
            return Spectrum(vals, vecs, model=model)
        return Spectrum(np.linalg.eigvalsh(dense), model=model)

    if mode != "lowest_k":
        raise ValueError(f"unknown mode {mode!r}")
    if k is None or k < 1:
        raise ValueError("mode='lowest_k' requires k >= 1")
    if dim <= dense_budget:
        from scipy.linalg import eigh as dense_eigh

        dense = matrix.toarray() if sp.issparse(matrix) else np.asarray(matrix)
        if keep_vectors:
            vals, vecs = dense_eigh(dense, subset_by_index=(0, k - 1))
            return Spectrum(vals, vecs, model=model)
        vals = dense_eigh(dense, subset_by_index=(0, k - 1), eigvals_only=True)
        return Spectrum(vals, model=model)
    try:
        vals, vecs = eigsh(matrix.tocsc() if sp.issparse(matrix) else matrix, k=k, which="SA")
    except ArpackNoConvergence as err:
        raise RuntimeError(
            f"Lanczos failed to converge: {len(err.eigenvalues)} of {k} eigenvalues "
            "converged; consider more iterations or a smaller k"
        ) from err
    order = np.argsort(vals)
    return Spectrum(vals[order], vecs[:, order] if keep_vectors else None, model=model)


@dataclass
class GaussianFit:
    mean: float
    sigma: float
    residual: float  # l2 norm of (histogram - fit) over the bin centers


def dos(spectra, bins: int = 80) -> tuple[Curve, GaussianFit]:
    """Disorder-averaged density of states as a normalized histogram, plus a
    least-squares Gaussian envelope fit.

    ``spectra`` is an iterable of :class:`Spectrum` or eigenvalue arrays; all
    realizations are pooled with equal weight.
    """
    arrays = [s.eigenvalues if isinstance(s, Spectrum) else np.asarray(s) for s in spectra]
    if not arrays or any(len(a) == 0 for a in arrays):
        raise ValueError("need at least one non-empty spectrum")
    pooled = np.concatenate(arrays)
    density, edges = np.histogram(pooled, bins=bins, density=True)
    centers = 0.5 * (edges[:-1] + edges[1:])

    def gauss(e, mean, sigma):
        return np.exp(-0.5 * ((e - mean) / sigma) ** 2) / (np.sqrt(2.0 * np.pi) * sigma)

    p0 = (pooled.mean(), pooled.std() if pooled.std() > 0 else 1.0)
    try:
        popt, _ = curve_fit(gauss, centers, density, p0=p0, maxfev=5000)
        mean, sigma = float(popt[0]), float(abs(popt[1]))
    except RuntimeError:
        mean, sigma = float(p0[0]), float(p0[1])
    residual = float(np.linalg.norm(density - gauss(centers, mean, sigma)))
    curve = Curve(grid=centers, values=density, n_samples=len(arrays), meta={"bin_edges": edges})
    return curve, GaussianFit(mean=mean, sigma=sigma, residual=residual)


def count_peaks(curve: Curve, rel_height: float = 0.05) -> int:
    """Local maxima of a histogram above ``rel_height`` of its global max;
    used to count boson-occupation bands in a clustered density of states."""
    v = curve.values
    floor = rel_height * v.max()
    peaks = 0
    for k in range(len(v)):
        left = v[k - 1] if k > 0 else -np.inf
        right = v[k + 1] if k < len(v) - 1 else -np.inf
        if v[k] > floor and v[k] >= left and v[k] > right:
            peaks += 1
    return peaks


def gap_ratios(spectrum: Spectrum | np.ndarray, bins: int = 40) -> GapRatioStats:
    """Gap-ratio statistics of a sorted spectrum.

    Exact ties are handled as follows: a pair with exactly one vanishing
    spacing contributes ``r = 0``; a pair with both spacings vanishing is
    skipped.  A spectrum whose spacings all vanish raises, since no ratio is
    defined.
    """
    evals = spectrum.eigenvalues if isinstance(spectrum, Spectrum) else np.asarray(spectrum)
    if len(evals) < 3:
        raise ValueError("gap ratios need at least 3 levels")
    evals = np.sort(evals)
    s = np.diff(evals)
    s_prev, s_next = s[:-1], s[1:]
    both_zero = (s_prev == 0) & (s_next == 0)
    if np.all(both_zero):
        raise ValueError("all spacings vanish; gap ratios undefined")
    keep = ~both_zero
    s_prev, s_next = s_prev[keep], s_next[keep]
    denom = np.maximum(s_prev, s_next)
    ratios = np.where(denom > 0, np.minimum(s_prev, s_next) / np.where(denom > 0, denom, 1.0), 0.0)
    density, edges = np.histogram(ratios, bins=bins, range=(0.0, 1.0), density=True)
    hist = Curve(grid=0.5 * (edges[:-1] + edges[1:]), values=density, meta={"bin_edges": edges})
    return GapRatioStats(ratios=ratios, mean=float(ratios.mean()), histogram=hist)


def _wd_norm(beta: int) -> float:
    val, _ = quad(lambda r: (r + r * r) ** beta / (1 + r + r * r) ** (1 + 1.5 * beta), 0.0, 1.0)
    return val


def reference_gap_distribution(kind: str, r, beta: int = 2):
    """Reference gap-ratio densities on the folded interval [0, 1].

    ``kind='poisson'`` gives ``2 (1+r)^-2``; ``kind='wigner_dyson'`` the
    surmise ``(r + r^2)^beta / (1 + r + r^2)^(1 + 3 beta/2)`` normalized to
    unit mass on [0, 1] (the surmise is self-dual under r -> 1/r, so folding
    amounts to the restriction).
    """
    r = np.asarray(r, dtype=float)
    if np.any(r < 0) or np.any(r > 1):
        raise ValueError("gap ratios live in [0, 1] under the min/max convention")
    if kind == "poisson":
        return 2.0 / (1.0 + r) ** 2
    if kind == "wigner_dyson":
        if beta not in (1, 2, 4):
            raise ValueError(f"Dyson index must be 1, 2 or 4, got {beta}")
        return (r + r * r) ** beta / (1 + r + r * r) ** (1 + 1.5 * beta) / _wd_norm(beta)
    raise ValueError(f"unknown reference class {kind!r}")


def sff(spectra, beta: float, times: np.ndarray) -> SffCurve:
    """Disorder-averaged spectral form factor
    ``K(t) = mean_realizations |Z(beta + it)|^2 / Z(beta)^2``.

    The average is quenched (per-realization ratio, then mean).  Energies are
    shifted by their minimum before exponentiation; the ratio is exactly
    invariant under the shift, which guards against overflow at beta > 0.
    """
    times = np.asarray(times, dtype=float)
    if np.any(times < 0):
        raise ValueError("times must be non-negative")
    arrays = [s.eigenvalues if isinstance(s, Spectrum) else np.asarray(s) for s in spectra]
    if not arrays:
        raise ValueError("need at least one spectrum")
    acc = np.zeros((len(arrays), len(times)))
    for idx, evals in enumerate(arrays):
        shifted = evals - evals.min()
        weights = np.exp(-beta * shifted)
        z_beta = weights.sum()
        zt = np.exp(-1j * np.outer(times, shifted)) @ weights
        acc[idx] = np.abs(zt) ** 2 / z_beta ** 2
    mean = acc.mean(axis=0)
    stderr = acc.std(axis=0, ddof=1) / np.sqrt(len(arrays)) if len(arrays) > 1 else None
    return SffCurve(times=times, values=mean, beta=beta, n_realizations=len(arrays), stderr=stderr)


def sff_double_sum(evals: np.ndarray, beta: float, times: np.ndarray) -> np.ndarray:
    """Brute-force double sum over level pairs; oracle for :func:`sff`."""
    evals = np.asarray(evals, dtype=float)
    shifted = evals - evals.min()
    z_beta = np.exp(-beta * shifted).sum()
    out = np.empty(len(times))
    for idx, t in enumerate(np.asarray(times, dtype=float)):
        phase = np.exp(-beta * (shifted[:, None] + shifted[None, :]) - 1j * t * (shifted[:, None] - shifted[None, :]))
        out[idx] = phase.sum().real / z_beta ** 2
    return out


def segment_clusters(spectrum: Spectrum | np.ndarray, gap_threshold: float = 500.0) -> list[tuple[int, int]]:
    """Split a sorted spectrum where a consecutive gap exceeds
    ``gap_threshold`` times the median gap; returns half-open index ranges.

    Boson-occupation bands are separated by the boson frequency while
    intra-band spacings sit three or more orders of magnitude below.  Band
    edges of a single cluster can stretch to ~80x the median spacing, so the
    default threshold sits well above edge outliers and well below band
    separations; a threshold producing a single cluster is valid.
    """
    evals = spectrum.eigenvalues if isinstance(spectrum, Spectrum) else np.asarray(spectrum)
    if len(evals) < 2:
        return [(0, len(evals))]
    gaps = np.diff(evals)
    median = np.median(gaps)
    cut = np.nonzero(gaps > gap_threshold * median)[0] if median > 0 else np.array([], dtype=int)
    bounds = [0, *(cut + 1), len(evals)]
    return [(bounds[i], bounds[i + 1]) for i in range(len(bounds) - 1)]


def lowest_cluster(spectrum: Spectrum | np.ndarray, gap_threshold: float = 500.0) -> tuple[int, int]:
    return segment_clusters(spectrum, gap_threshold)[0]


def heisenberg_time(evals: np.ndarray, window: tuple[float, float] | None = None) -> float:
    """``2 pi / (mean level spacing)``; the averaging window is not pinned by
    any convention here, so it defaults to the full spectral range and can be
    restricted explicitly."""
    evals = np.sort(np.asarray(evals, dtype=float))
    if window is not None:
        evals = evals[(evals >= window[0]) & (evals <= window[1])]
    if len(evals) < 2:
        raise ValueError("need at least two levels for a mean spacing")
    spacing = (evals[-1] - evals[0]) / (len(evals) - 1)
    return 2.0 * np.pi / spacing


def fit_power_law(curve: SffCurve, window: tuple[float, float]) -> tuple[float, float]:
    """Least-squares fit ``K = A t^beta`` in log-log over a time window;
    returns ``(A, beta)``."""
    t, k = curve.times, curve.values
    sel = (t >= window[0]) & (t <= window[1]) & (k > 0) & (t > 0)
    if sel.sum() < 2:
        raise ValueError("fit window contains fewer than 2 usable points")
    slope, intercept = np.polyfit(np.log(t[sel]), np.log(k[sel]), 1)
    return float(np.exp(intercept)), float(slope)


def detect_plateau(
    curve: SffCurve,
    k_plateau: float,
    delta: float = 0.1,
    window: float = 1.9,
    search_start: float | None = None,
) -> float | None:
    """Earliest left edge of a contiguous window of width ``window`` (same
    units as the curve's time axis) on which ``|K - k_plateau| / k_plateau``
    stays below ``delta``; None when no window qualifies.

    ``search_start`` restricts the scan to later times (conventionally
    ``sqrt(N)`` in rescaled units, to skip the early-time slope).
    """
    t, k = curve.times, curve.values
    within = np.abs(k - k_plateau) / k_plateau < delta
    start = search_start if search_start is not None else t[0]
    for idx in range(len(t)):
        if t[idx] < start or not within[idx]:
            continue
        span = (t >= t[idx]) & (t <= t[idx] + window)
        if span.sum() >= 2 and np.all(within[span]):
            return float(t[idx])
    return None


def detect_ramp(
    curve: SffCurve,
    reference: tuple[float, float],
    window: tuple[float, float],
    delta: float = 5e-3,
) -> float | None:
    """Earliest time in ``window`` at which the curve matches the power-law
    reference ``(A, beta)`` within relative tolerance ``delta``; None when the
    curve never comes that close (no crossing of the reference within the
    window)."""
    a_ref, b_ref = reference
    t, k = curve.times, curve.values
    sel = (t >= window[0]) & (t <= window[1])
    k_ref = a_ref * t[sel] ** b_ref
    rel = np.abs(k[sel] - k_ref) / k_ref
    hits = np.nonzero(rel < delta)[0]
    if len(hits) == 0:
        # a sign change of K - K_ref between grid points still marks a
        # crossing; report the first bracketing point
        diff = k[sel] - k_ref
        cross = np.nonzero(np.sign(diff[:-1]) != np.sign(diff[1:]))[0]
        if len(cross) == 0:
            return None
        return float(t[sel][cross[0] + 1])
    return float(t[sel][hits[0]])
