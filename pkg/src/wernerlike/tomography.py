"""Forward model and linear inversion for hybrid-state tomography.

Measurement model: rotate the spin by U(theta, phi), displace the oscillator
by beta = |beta| e^{i phase}, then count (spin outcome s, excitation number n).
The marginal

    w(s, n; theta, phi, beta) = Tr[rho . D U (|s><s| (x) |n><n|) U+ D+]

is sampled on a uniform phase grid at fixed |beta|.  Writing
<k|D(|b|e^{i p})|n> = f_kn(|b|) e^{i(k-n)p} with real f, the phase-Fourier
coefficient of order r of w picks out the r-th lower diagonal of the
spin-collapsed block:

    w_hat(n; r) = sum_m G^(r)_nm <m+r| rho_Q |m>,   G^(r)_nm = f_(m+r)n f_mn

which is inverted per order by the least-squares pseudo-inverse
M = (G^T G)^-1 G^T.  Detector efficiency eta < 1 folds a binomial smearing
matrix into the system before inversion, so the estimator stays unbiased.

Per-order systems whose singular values fall below an absolute floor are
truncated: a uniformly tiny G (e.g. the far off-diagonal orders at small
|beta|) has condition number near 1 yet amplifies data noise by 1/|G|, so a
relative rcond cannot catch it.  Dropped directions are reported per order.
"""

import json
from dataclasses import dataclass, replace
from functools import lru_cache

import numpy as np
from scipy.special import gammaln

from .fock import (
    SPIN_DOWN,
    SPIN_UP,
    displaced_support,
    displacement_amplitudes,
    displacement_matrix,
    spin_rotation,
)
from .states import HybridState

__all__ = [
    "SingularSystemError",
    "TomographySettings",
    "standard_setting_angles",
    "MarginalData",
    "BlockEstimate",
    "HybridEstimate",
    "spin_projector",
    "collapse_spin",
    "marginal_w",
    "ideal_marginal_tables",
    "smeared_marginal_tables",
    "exact_marginal_data",
    "fourier_coefficients",
    "binomial_matrix",
    "efficiency_smear",
    "build_G",
    "pseudo_inverse_M",
    "inversion_systems",
    "propagate_errors",
    "reconstruct_hermitian",
    "reconstruct_block_diagonal",
    "reconstruct_block_offdiagonal",
    "reconstruct_full",
    "scalar_parts",
    "error_report",
    "estimate_to_json_dict",
    "estimate_from_json_dict",
]

CONDITION_LIMIT = 1e12
SINGULAR_FLOOR = 1e-9

#: (theta, phi) presets: diagonal blocks, real part, imaginary part
DIAGONAL_ANGLES = (0.0, 0.0)
REAL_PART_ANGLES = (np.pi / 4.0, -np.pi / 2.0)
IMAG_PART_ANGLES = (np.pi / 4.0, 0.0)


def standard_setting_angles():
    """The three (theta, phi) groups a full reconstruction needs."""
    return (DIAGONAL_ANGLES, REAL_PART_ANGLES, IMAG_PART_ANGLES)


class SingularSystemError(RuntimeError):
    """The least-squares system is numerically singular."""


@dataclass(frozen=True)
class TomographySettings:
    """One measurement-setting group plus the inversion window.

    n_max is the top measured excitation (histogram over 0..n_max), n_cutoff
    the reconstruction cutoff; n_phases must exceed 2*n_cutoff so no Fourier
    order up to n_cutoff aliases on the discrete phase grid.
    """

    theta: float
    phi_spin: float
    beta_abs: float
    n_phases: int
    n_max: int
    n_cutoff: int
    eta: float = 1.0

    def __post_init__(self):
        if self.beta_abs <= 0:
            raise ValueError("beta_abs must be positive")
        if self.n_cutoff < 0 or self.n_max < self.n_cutoff:
            raise ValueError("need n_max >= n_cutoff >= 0")
        if self.n_phases <= 2 * self.n_cutoff:
            raise ValueError(
                f"n_phases={self.n_phases} must exceed 2*n_cutoff={2 * self.n_cutoff}"
                " to resolve all Fourier orders"
            )
        if not 0.0 < self.eta <= 1.0:
            raise ValueError("eta must lie in (0, 1]")

    @property
    def phases(self):
        return 2.0 * np.pi * np.arange(self.n_phases) / self.n_phases

    def with_angles(self, theta, phi_spin):
        return replace(self, theta=float(theta), phi_spin=float(phi_spin))


@dataclass
class MarginalData:
    """Estimated (or exact) marginals for one setting group.

    w and variance have shape (2, n_phases, n_max+1); spin axis uses the
    package convention 0 = down, 1 = up.  events_per_phase is None for exact
    marginals (zero variance).
    """

    theta: float
    phi_spin: float
    beta_abs: float
    n_phases: int
    w: np.ndarray
    variance: np.ndarray
    events_per_phase: int | None = None

    @property
    def n_max(self):
        return self.w.shape[-1] - 1

    def check_matches(self, settings):
        problems = []
        for name, mine, theirs in (
            ("theta", self.theta, settings.theta),
            ("phi_spin", self.phi_spin, settings.phi_spin),
            ("beta_abs", self.beta_abs, settings.beta_abs),
        ):
            if abs(mine - theirs) > 1e-9:
                problems.append(f"{name}: data {mine!r} vs settings {theirs!r}")
        if self.n_phases != settings.n_phases:
            problems.append(f"n_phases: data {self.n_phases} vs settings {settings.n_phases}")
        if self.n_max != settings.n_max:
            problems.append(f"n_max: data {self.n_max} vs settings {settings.n_max}")
        if problems:
            raise ValueError("marginal data inconsistent with settings: " + "; ".join(problems))
        return self


# ----------------------------------------------------------------------
# forward model
# ----------------------------------------------------------------------

def spin_projector(theta, phi_spin, outcome):
    """U |s><s| U+ for the rotated spin measurement."""
    col = spin_rotation(theta, phi_spin)[:, outcome]
    return np.outer(col, col.conj())


def collapse_spin(state, projector):
    """Oscillator operator Tr_spin[(Q (x) 1) rho] for a 2x2 projector Q."""
    q = np.asarray(projector, dtype=complex)
    return (
        q[SPIN_UP, SPIN_UP] * state.uu
        + q[SPIN_DOWN, SPIN_DOWN] * state.dd
        + q[SPIN_DOWN, SPIN_UP] * state.ud
        + q[SPIN_UP, SPIN_DOWN] * state.du
    )


def marginal_w(state, spin_outcome, n, theta, phi_spin, beta):
    """Single ideal marginal probability via the rank-1 projector route."""
    if not 0 <= n < state.dim:
        raise ValueError("count index n must satisfy 0 <= n < state dim")
    chi_spin = spin_rotation(theta, phi_spin)[:, spin_outcome]
    chi_osc = displacement_matrix(beta, state.dim, n + 1)[:, n]
    w = 0.0j
    for s in (SPIN_DOWN, SPIN_UP):
        for sp in (SPIN_DOWN, SPIN_UP):
            w += (
                np.conj(chi_spin[s])
                * chi_spin[sp]
                * (chi_osc.conj() @ state.block(s, sp) @ chi_osc)
            )
    return float(w.real)


def ideal_marginal_tables(state, settings, rows=None):
    """Ideal (eta = 1) marginals w[s, j, n] for n < rows on the phase grid."""
    if rows is None:
        rows = displaced_support(state.dim - 1, settings.beta_abs)
    f = displacement_amplitudes(settings.beta_abs, state.dim, rows)
    phase_factors = np.exp(1j * np.outer(settings.phases, np.arange(state.dim)))
    out = np.empty((2, settings.n_phases, rows))
    for s in (SPIN_DOWN, SPIN_UP):
        rho_q = collapse_spin(state, spin_projector(settings.theta, settings.phi_spin, s))
        for j in range(settings.n_phases):
            e = phase_factors[j]
            d = e.conj()[:, None] * rho_q * e[None, :]
            out[s, j] = np.einsum("kn,km,mn->n", f, d, f, optimize=True).real
    return out


def smeared_marginal_tables(state, settings):
    """Detected-count marginals in the measured window plus the overflow mass.

    Returns (window, overflow): window[s, j, n] for n <= n_max after binomial
    smearing with eta, overflow[s, j] the detected mass beyond n_max.
    """
    rows = displaced_support(state.dim - 1, settings.beta_abs)
    wide = ideal_marginal_tables(state, settings, rows)
    win = settings.n_max + 1
    if settings.eta < 1.0:
        b = binomial_matrix(settings.eta, win, rows)
        window = wide @ b.T
    else:
        window = wide[..., :win].copy()
    total = wide.sum(axis=-1)
    overflow = np.clip(total - window.sum(axis=-1), 0.0, None)
    return window, overflow


def exact_marginal_data(state, settings):
    """Infinite-statistics marginals (zero variance) for noiseless inversion."""
    window, _ = smeared_marginal_tables(state, settings)
    return MarginalData(
        theta=settings.theta,
        phi_spin=settings.phi_spin,
        beta_abs=settings.beta_abs,
        n_phases=settings.n_phases,
        w=window,
        variance=np.zeros_like(window),
        events_per_phase=None,
    )


# ----------------------------------------------------------------------
# Fourier extraction and the linear system
# ----------------------------------------------------------------------

def fourier_coefficients(w_of_phase, order):
    """(1/N) sum_j w(phase_j) e^{i r phase_j} on the uniform phase grid.

    Discrete realization of the phase-average Fourier integral; ``order``
    must stay below half the number of phases.
    """
    w = np.asarray(w_of_phase)
    n = w.shape[-1]
    if order < 0:
        raise ValueError("order must be nonnegative")
    if 2 * order >= n:
        raise ValueError(f"order {order} needs more than {n} phases")
    phases = 2.0 * np.pi * np.arange(n) / n
    return w @ np.exp(1j * order * phases) / n


def binomial_matrix(eta, n_out, n_in):
    """B[n, k] = C(k, n) eta^n (1-eta)^(k-n): ideal counts -> detected counts."""
    if not 0.0 < eta <= 1.0:
        raise ValueError("eta must lie in (0, 1]")
    if eta == 1.0:
        return np.eye(n_out, n_in)
    n = np.arange(n_out)[:, None].astype(float)
    k = np.arange(n_in)[None, :].astype(float)
    valid = k >= n
    with np.errstate(invalid="ignore", divide="ignore"):
        logb = (
            gammaln(k + 1.0)
            - gammaln(n + 1.0)
            - gammaln(k - n + 1.0)
            + n * np.log(eta)
            + (k - n) * np.log1p(-eta)
        )
    return np.where(valid, np.exp(np.where(valid, logb, -np.inf)), 0.0)


def efficiency_smear(w, eta):
    """Apply the binomial detection response along the last axis."""
    w = np.asarray(w, dtype=float)
    if float(w.sum(axis=-1).max()) > 1.0 + 1e-8:
        raise ValueError("input exceeds unit total probability")
    b = binomial_matrix(eta, w.shape[-1], w.shape[-1])
    return w @ b.T


def build_G(r, beta_abs, n_max, n_cutoff, rows=None):
    """Order-r system matrix G^(r)_nm = f_(m+r)n(|b|) f_mn(|b|).

    Shape (rows, n_cutoff+1-r); rows defaults to the measured window
    n_max+1.  At |b| = 0 this is the identity block for r = 0 and zero for
    r >= 1: a vanishing displacement cannot reach off-diagonals.
    """
    if not 0 <= r <= n_cutoff:
        raise ValueError("need 0 <= r <= n_cutoff")
    if n_max < n_cutoff:
        raise ValueError("need n_max >= n_cutoff")
    if rows is None:
        rows = n_max + 1
    cdim = n_cutoff + 1
    f = displacement_amplitudes(beta_abs, cdim, rows)
    return (f[r:cdim, :] * f[: cdim - r, :]).T


def pseudo_inverse_M(g, context=None):
    """Least-squares pseudo-inverse M = (G^T G)^-1 G^T via SVD.

    Returns (M, condition number of G^T G); raises SingularSystemError when
    the condition number exceeds 1e12.
    """
    g = np.asarray(g, dtype=float)
    s = np.linalg.svd(g, compute_uv=False)
    if s[-1] == 0.0 or not np.isfinite(s).all():
        cond = np.inf
    else:
        cond = float((s[0] / s[-1]) ** 2)
    if cond > CONDITION_LIMIT:
        where = f" at {context}" if context else ""
        raise SingularSystemError(
            f"normal-equation condition number {cond:.3e} exceeds {CONDITION_LIMIT:.0e}{where}"
        )
    return np.linalg.pinv(g), cond


@dataclass(frozen=True)
class OrderSystem:
    """Pseudo-inverse and diagnostics of one Fourier-order system."""

    r: int
    m: np.ndarray
    sigma_max: float
    cond: float
    dropped: int


@lru_cache(maxsize=None)
def inversion_systems(settings):
    """Per-order folded systems for the given settings (cached).

    For eta < 1 the system is B(eta) G evaluated on an extended ideal-count
    range, so the detected-count rows are exact.  Singular values below
    SINGULAR_FLOOR are truncated; the per-order diagnostics record how many.
    """
    cdim = settings.n_cutoff + 1
    if settings.eta < 1.0:
        kext = max(displaced_support(settings.n_cutoff, settings.beta_abs), settings.n_max + 1)
        f = displacement_amplitudes(settings.beta_abs, cdim, kext)
        b = binomial_matrix(settings.eta, settings.n_max + 1, kext)
    else:
        f = displacement_amplitudes(settings.beta_abs, cdim, settings.n_max + 1)
        b = None
    systems = []
    for r in range(cdim):
        g = (f[r:cdim, :] * f[: cdim - r, :]).T
        if b is not None:
            g = b @ g
        u, s, vt = np.linalg.svd(g, full_matrices=False)
        keep = s > SINGULAR_FLOOR
        if keep.any():
            m = (vt[keep].T / s[keep]) @ u[:, keep].T
            cond = float((s[0] / s[keep][-1]) ** 2)
        else:
            m = np.zeros((g.shape[1], g.shape[0]))
            cond = np.inf
        systems.append(
            OrderSystem(r=r, m=m, sigma_max=float(s[0]), cond=cond, dropped=int((~keep).sum()))
        )
    return tuple(systems)


# ----------------------------------------------------------------------
# error propagation
# ----------------------------------------------------------------------

def _second_moments(m, phases, order, variance):
    """Variances of Re/Im and their covariance for one order's estimates.

    variance: per-cell (n_phases, n_rows) variances of the estimated
    marginals, treated as independent; the linear coefficients are the
    composition of the discrete Fourier weights with M.
    """
    nphi = len(phases)
    c = np.cos(order * phases)
    s = np.sin(order * phases)
    m2 = m * m
    var_re = m2 @ ((c * c) @ variance) / nphi**2
    var_im = m2 @ ((s * s) @ variance) / nphi**2
    cov = m2 @ ((c * s) @ variance) / nphi**2
    return var_re, var_im, cov


def propagate_errors(m, phases, order, variance):
    """Standard deviations (real, imaginary) of the order-r diagonal estimate."""
    var_re, var_im, _ = _second_moments(np.asarray(m, float), np.asarray(phases, float),
                                        order, np.asarray(variance, float))
    return np.sqrt(var_re), np.sqrt(var_im)


# ----------------------------------------------------------------------
# reconstruction
# ----------------------------------------------------------------------

@dataclass
class BlockEstimate:
    """Reconstructed block with per-element uncertainty moments.

    values is (n_cutoff+1)^2 complex; sigma_re/sigma_im are the standard
    deviations of the real/imaginary parts, cov_reim their covariance.
    orders carries (r, sigma_max, cond, dropped) diagnostics per system.
    """

    values: np.ndarray
    sigma_re: np.ndarray
    sigma_im: np.ndarray
    cov_reim: np.ndarray
    orders: tuple

    @property
    def var_re(self):
        return self.sigma_re**2

    @property
    def var_im(self):
        return self.sigma_im**2


def reconstruct_hermitian(w, variance, settings, systems=None):
    """Invert one retained-outcome marginal table into a Hermitian operator.

    w, variance: (n_phases, n_max+1).  The order-r Fourier data determine the
    r-th lower diagonal; the upper triangle is the conjugate transpose, which
    for real phase data equals the estimate the negative orders would give.
    """
    w = np.asarray(w, dtype=float)
    variance = np.asarray(variance, dtype=float)
    if w.shape != (settings.n_phases, settings.n_max + 1):
        raise ValueError(
            f"marginal table shape {w.shape} does not cover the settings grid "
            f"({settings.n_phases} phases x {settings.n_max + 1} counts)"
        )
    if systems is None:
        systems = inversion_systems(settings)
    phases = settings.phases
    cdim = settings.n_cutoff + 1
    values = np.zeros((cdim, cdim), dtype=complex)
    var_re = np.zeros((cdim, cdim))
    var_im = np.zeros((cdim, cdim))
    cov = np.zeros((cdim, cdim))
    diagnostics = []
    for sys_r in systems:
        r = sys_r.r
        what = fourier_coefficients(w.T, r)  # (n_max+1,) complex
        est = sys_r.m @ what
        vr, vi, cv = _second_moments(sys_r.m, phases, r, variance)
        idx = np.arange(cdim - r)
        values[idx + r, idx] = est
        var_re[idx + r, idx] = vr
        var_im[idx + r, idx] = vi
        cov[idx + r, idx] = cv
        if r > 0:
            values[idx, idx + r] = est.conj()
            var_re[idx, idx + r] = vr
            var_im[idx, idx + r] = vi
            cov[idx, idx + r] = -cv
        diagnostics.append(
            {"r": r, "sigma_max": sys_r.sigma_max, "cond": sys_r.cond, "dropped": sys_r.dropped}
        )
    return BlockEstimate(
        values=values,
        sigma_re=np.sqrt(var_re),
        sigma_im=np.sqrt(var_im),
        cov_reim=cov,
        orders=tuple(diagnostics),
    )


def _require_angles(data, theta, phi_spin):
    if abs(data.theta - theta) > 1e-9 or abs(data.phi_spin - phi_spin) > 1e-9:
        raise ValueError(
            f"record group at (theta, phi_spin) = ({data.theta:.6g}, {data.phi_spin:.6g})"
            f" does not match the required ({theta:.6g}, {phi_spin:.6g})"
        )


def reconstruct_block_diagonal(data, which, settings, systems=None):
    """rho_uu (which='up') or rho_dd (which='down') from the unrotated group."""
    _require_angles(data, *DIAGONAL_ANGLES)
    data.check_matches(settings.with_angles(*DIAGONAL_ANGLES))
    row = SPIN_UP if which == "up" else SPIN_DOWN
    return reconstruct_hermitian(data.w[row], data.variance[row], settings, systems)


def _combine_mean(est_a, est_b):
    """(A + B)/2 for independent Hermitian block estimates."""
    return BlockEstimate(
        values=0.5 * (est_a.values + est_b.values),
        sigma_re=0.5 * np.sqrt(est_a.var_re + est_b.var_re),
        sigma_im=0.5 * np.sqrt(est_a.var_im + est_b.var_im),
        cov_reim=0.25 * (est_a.cov_reim + est_b.cov_reim),
        orders=est_a.orders,
    )


def reconstruct_block_offdiagonal(data_real, data_imag, diagonal_estimates, settings,
                                  systems=None):
    """rho_ud from the two rotated-setting groups.

    The retained up outcome projects onto (1 - sigma1)/2 at (pi/4, -pi/2)
    and (1 - sigma2)/2 at (pi/4, 0); subtracting the diagonal-block mean
    recovers the Hermitian and anti-Hermitian parts of rho_ud.
    """
    _require_angles(data_real, *REAL_PART_ANGLES)
    _require_angles(data_imag, *IMAG_PART_ANGLES)
    data_real.check_matches(settings.with_angles(*REAL_PART_ANGLES))
    data_imag.check_matches(settings.with_angles(*IMAG_PART_ANGLES))
    est_uu, est_dd = diagonal_estimates
    mean = _combine_mean(est_uu, est_dd)
    q1 = reconstruct_hermitian(data_real.w[SPIN_UP], data_real.variance[SPIN_UP],
                               settings, systems)
    q2 = reconstruct_hermitian(data_imag.w[SPIN_UP], data_imag.variance[SPIN_UP],
                               settings, systems)
    herm = mean.values - q1.values          # (rho_ud + rho_du)/2
    anti = q2.values - mean.values          # (rho_ud - rho_du)/(2i)
    values = herm + 1j * anti
    var_re = mean.var_re + mean.var_im + 2.0 * mean.cov_reim + q1.var_re + q2.var_im
    var_im = mean.var_re + mean.var_im - 2.0 * mean.cov_reim + q1.var_im + q2.var_re
    cov = mean.var_im - mean.var_re + q1.cov_reim - q2.cov_reim
    return BlockEstimate(
        values=values,
        sigma_re=np.sqrt(np.clip(var_re, 0.0, None)),
        sigma_im=np.sqrt(np.clip(var_im, 0.0, None)),
        cov_reim=cov,
        orders=q1.orders,
    )


@dataclass
class HybridEstimate:
    """Raw linear-inversion estimate of all four blocks (positivity is not
    enforced)."""

    uu: BlockEstimate
    dd: BlockEstimate
    ud: BlockEstimate
    settings: TomographySettings

    def du_values(self):
        return self.ud.values.conj().T

    def to_state(self):
        return HybridState(
            uu=self.uu.values,
            ud=self.ud.values,
            du=self.du_values(),
            dd=self.dd.values,
        )


def _find_group(datas, angles):
    theta, phi = angles
    for d in datas:
        if abs(d.theta - theta) <= 1e-9 and abs(d.phi_spin - phi) <= 1e-9:
            return d
    raise ValueError(
        f"missing record group with (theta, phi_spin) = ({theta:.6g}, {phi:.6g})"
    )


def reconstruct_full(datas, settings, systems=None):
    """Assemble all four blocks from the three setting groups."""
    datas = list(datas)
    data_diag = _find_group(datas, DIAGONAL_ANGLES)
    data_real = _find_group(datas, REAL_PART_ANGLES)
    data_imag = _find_group(datas, IMAG_PART_ANGLES)
    if systems is None:
        systems = inversion_systems(settings.with_angles(*DIAGONAL_ANGLES))
    est_uu = reconstruct_block_diagonal(data_diag, "up", settings, systems)
    est_dd = reconstruct_block_diagonal(data_diag, "down", settings, systems)
    est_ud = reconstruct_block_offdiagonal(data_real, data_imag, (est_uu, est_dd),
                                           settings, systems)
    return HybridEstimate(uu=est_uu, dd=est_dd, ud=est_ud,
                          settings=settings.with_angles(*DIAGONAL_ANGLES))


# ----------------------------------------------------------------------
# comparison and serialization
# ----------------------------------------------------------------------

def scalar_parts(estimate, truth, hermitian):
    """Independent scalar degrees of freedom as (error, sigma) pairs.

    Hermitian blocks contribute the lower triangle (real parts everywhere,
    imaginary parts strictly below the diagonal); a general block contributes
    every entry's real and imaginary part.
    """
    err = estimate.values - np.asarray(truth, dtype=complex)
    n = err.shape[0]
    pairs = []
    if hermitian:
        for i in range(n):
            for j in range(i + 1):
                pairs.append((err[i, j].real, estimate.sigma_re[i, j]))
                if i != j:
                    pairs.append((err[i, j].imag, estimate.sigma_im[i, j]))
    else:
        for i in range(n):
            for j in range(n):
                pairs.append((err[i, j].real, estimate.sigma_re[i, j]))
                pairs.append((err[i, j].imag, estimate.sigma_im[i, j]))
    return pairs


def error_report(estimate, truth_state):
    """Per-block max |error| and 3-sigma containment against a known state."""
    cdim = estimate.settings.n_cutoff + 1

    def window(block):
        return np.asarray(block, dtype=complex)[:cdim, :cdim]

    report = {}
    pooled_hits = pooled_total = 0
    for name, est, truth, herm in (
        ("uu", estimate.uu, window(truth_state.uu), True),
        ("dd", estimate.dd, window(truth_state.dd), True),
        ("ud", estimate.ud, window(truth_state.ud), False),
    ):
        parts = scalar_parts(est, truth, herm)
        errs = np.array([abs(e) for e, _ in parts])
        sig = np.array([s for _, s in parts])
        mask = sig > 0
        hits = int(np.sum(errs[mask] <= 3.0 * sig[mask]))
        total = int(mask.sum())
        pooled_hits += hits
        pooled_total += total
        report[name] = {
            "max_abs_error": float(np.max(np.abs(est.values - truth))),
            "within_3sigma": hits / total if total else 1.0,
            "parts": total,
        }
    report["pooled_within_3sigma"] = pooled_hits / pooled_total if pooled_total else 1.0
    return report


def _complex_to_pairs(arr):
    a = np.asarray(arr, dtype=complex)
    return np.stack([a.real, a.imag], axis=-1).tolist()


def _pairs_to_complex(obj):
    a = np.asarray(obj, dtype=float)
    return a[..., 0] + 1j * a[..., 1]


def estimate_to_json_dict(estimate):
    """JSON-ready dict; complex values as [re, im] pairs, sigma arrays parallel."""
    def block(est):
        return {
            "values": _complex_to_pairs(est.values),
            "sigma_re": est.sigma_re.tolist(),
            "sigma_im": est.sigma_im.tolist(),
        }

    s = estimate.settings
    return {
        "settings": {
            "beta_abs": s.beta_abs,
            "n_phases": s.n_phases,
            "n_max": s.n_max,
            "n_cutoff": s.n_cutoff,
            "eta": s.eta,
        },
        "blocks": {"uu": block(estimate.uu), "dd": block(estimate.dd), "ud": block(estimate.ud)},
        "orders": list(estimate.uu.orders),
    }


def estimate_from_json_dict(payload):
    s = payload["settings"]
    settings = TomographySettings(
        theta=0.0,
        phi_spin=0.0,
        beta_abs=float(s["beta_abs"]),
        n_phases=int(s["n_phases"]),
        n_max=int(s["n_max"]),
        n_cutoff=int(s["n_cutoff"]),
        eta=float(s["eta"]),
    )
    orders = tuple(payload.get("orders", ()))

    def block(obj):
        values = _pairs_to_complex(obj["values"])
        return BlockEstimate(
            values=values,
            sigma_re=np.asarray(obj["sigma_re"], dtype=float),
            sigma_im=np.asarray(obj["sigma_im"], dtype=float),
            cov_reim=np.zeros_like(values, dtype=float),
            orders=orders,
        )

    blocks = payload["blocks"]
    return HybridEstimate(
        uu=block(blocks["uu"]), dd=block(blocks["dd"]), ud=block(blocks["ud"]),
        settings=settings,
    )


def write_estimate_json(path, estimate, extra=None):
    payload = estimate_to_json_dict(estimate)
    if extra:
        payload.update(extra)
    with open(path, "w") as fh:
        json.dump(payload, fh)


def load_estimate_json(path):
    with open(path) as fh:
        payload = json.load(fh)
    return estimate_from_json_dict(payload), payload
