"""Complex-valued numerical integration.

Adaptive Gauss-Kronrod (7/15 embedded pair) line integrals drive the
nonlinear convolution; plain tensor trapezoid rules handle the outer 2D
integrals, which reuse one uniform grid across emission, spectral
analysis, and probabilities.  All routines are stateless; integrand
closures must be pure and accept ndarray arguments.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import NoConvergence, ShapeMismatch
from .model import (
    FrequencyGrid,
    NetworkParams,
    SampledPulse,
    TwoPhotonInput,
    pulse_amplitude,
    pulse_center,
    pulse_support,
    pulse_width,
)

# Gauss-Kronrod 7/15 nodes and weights on [-1, 1] (positive half; the rule
# is symmetric).  Kronrod nodes exclude the interval endpoints, which lets
# mapped half-line integrands avoid their singular endpoint.
_KRONROD_NODES = np.array(
    [
        0.991455371120812639206854697526329,
        0.949107912342758524526189684047851,
        0.864864423359769072789712788640926,
        0.741531185599394439863864773280788,
        0.586087235467691130294144838258730,
        0.405845151377397166906606412076961,
        0.207784955007898467600689403773245,
        0.0,
    ]
)
_KRONROD_WEIGHTS = np.array(
    [
        0.022935322010529224963732008058970,
        0.063092092629978553290700663189204,
        0.104790010322250183839876322541518,
        0.140653259715525918745189590510238,
        0.169004726639267902826583426598550,
        0.190350578064785409913256402421014,
        0.204432940075298892414161999234649,
        0.209482141084727828012999174891714,
    ]
)
_GAUSS_WEIGHTS = np.array(
    [
        0.129484966168869693270611432679082,
        0.279705391489276667901467771423780,
        0.381830050505118944950369775488975,
        0.417959183673469387755102040816327,
    ]
)

_NODES = np.concatenate([-_KRONROD_NODES[:-1], _KRONROD_NODES[::-1]])  # ascending, 15
_WK = np.concatenate([_KRONROD_WEIGHTS[:-1], _KRONROD_WEIGHTS[::-1]])
# Gauss-7 nodes sit at the odd Kronrod positions.
_GAUSS_IDX = np.arange(1, 15, 2)
_WG = np.concatenate([_GAUSS_WEIGHTS[:-1], _GAUSS_WEIGHTS[::-1]])


@dataclass(frozen=True)
class QuadConfig:
    """Tolerances and budget for the adaptive line integrals."""

    rel_tol: float = 1e-8
    abs_tol: float = 1e-12
    max_subdivisions: int = 2000
    window_halfwidth: float | None = None  # None means automatic

    def __post_init__(self):
        if self.rel_tol <= 0 or self.abs_tol <= 0:
            raise ValueError("tolerances must be > 0")
        if self.max_subdivisions < 1:
            raise ValueError("max_subdivisions must be >= 1")


@dataclass(frozen=True)
class QuadResult:
    value: complex
    abs_error_estimate: float
    evaluations: int


def _gk_panel(f, a: float, b: float):
    """One Gauss-Kronrod 7/15 panel; returns (value, error_estimate)."""
    c = 0.5 * (a + b)
    h = 0.5 * (b - a)
    fx = np.asarray(f(c + h * _NODES))
    val = h * np.sum(_WK * fx)
    err = abs(val - h * np.sum(_WG * fx[_GAUSS_IDX]))
    return complex(val), float(err)


def integrate_line(f, a: float, b: float, cfg: QuadConfig | None = None, seeds=()) -> QuadResult:
    """Adaptively integrate a complex-valued f over [a, b].

    ``f`` must accept an ndarray of abscissae and return an ndarray.
    Optional ``seeds`` are interior break points used for the initial
    subdivision (placing them on known features avoids blind bisection).
    Converged means the summed panel error is below
    max(abs_tol, rel_tol * |value|); otherwise NoConvergence carries the
    partial result.
    """
    cfg = cfg or QuadConfig()
    if not (a < b):
        raise ValueError(f"need a < b, got [{a}, {b}]")
    breaks = [a] + sorted(x for x in set(float(s) for s in seeds) if a < x < b) + [b]
    heap = []
    total = 0.0 + 0.0j
    total_err = 0.0
    evals = 0
    tie = 0
    for lo, hi in zip(breaks[:-1], breaks[1:]):
        val, err = _gk_panel(f, lo, hi)
        evals += 15
        total += val
        total_err += err
        heapq.heappush(heap, (-err, tie, lo, hi, val, err))
        tie += 1
    splits = len(breaks) - 2
    while total_err > max(cfg.abs_tol, cfg.rel_tol * abs(total)):
        if splits >= cfg.max_subdivisions:
            raise NoConvergence(
                f"line integral did not converge after {splits} subdivisions "
                f"(error estimate {total_err:.3e})",
                partial=QuadResult(total, total_err, evals),
            )
        _, _, lo, hi, val, err = heapq.heappop(heap)
        mid = 0.5 * (lo + hi)
        vl, el = _gk_panel(f, lo, mid)
        vr, er = _gk_panel(f, mid, hi)
        evals += 30
        total += vl + vr - val
        total_err += el + er - err
        heapq.heappush(heap, (-el, tie, lo, mid, vl, el))
        heapq.heappush(heap, (-er, tie + 1, mid, hi, vr, er))
        tie += 2
        splits += 1
    return QuadResult(total, total_err, evals)


def _gk_panel_multi(f, a: float, b: float):
    """Gauss-Kronrod panel for an f returning one row of k values per node;
    the error estimate is the max-norm difference of the embedded rules."""
    c = 0.5 * (a + b)
    h = 0.5 * (b - a)
    fx = np.asarray(f(c + h * _NODES))
    val = h * (_WK @ fx)
    err = float(np.max(np.abs(val - h * (_WG @ fx[_GAUSS_IDX]))))
    return val, err


def integrate_line_multi(f, a: float, b: float, cfg: QuadConfig | None = None, seeds=()):
    """Adaptive integral of a vector-valued integrand over [a, b].

    ``f`` maps an (m,) abscissa array to an (m, k) value array; all k
    components share one panel subdivision driven by the worst component.
    Returns (values (k,), error, evaluations).
    """
    cfg = cfg or QuadConfig()
    if not (a < b):
        raise ValueError(f"need a < b, got [{a}, {b}]")
    breaks = [a] + sorted(x for x in set(float(s) for s in seeds) if a < x < b) + [b]
    heap = []
    total = None
    total_err = 0.0
    evals = 0
    tie = 0
    for lo, hi in zip(breaks[:-1], breaks[1:]):
        val, err = _gk_panel_multi(f, lo, hi)
        evals += 15
        total = val if total is None else total + val
        total_err += err
        heapq.heappush(heap, (-err, tie, lo, hi, val, err))
        tie += 1
    splits = len(breaks) - 2
    while total_err > max(cfg.abs_tol, cfg.rel_tol * float(np.max(np.abs(total)))):
        if splits >= cfg.max_subdivisions:
            raise NoConvergence(
                f"vector line integral did not converge after {splits} subdivisions "
                f"(error estimate {total_err:.3e})",
                partial=QuadResult(complex(np.sum(total)), total_err, evals),
            )
        _, _, lo, hi, val, err = heapq.heappop(heap)
        mid = 0.5 * (lo + hi)
        vl, el = _gk_panel_multi(f, lo, mid)
        vr, er = _gk_panel_multi(f, mid, hi)
        evals += 30
        total = total + vl + vr - val
        total_err += el + er - err
        heapq.heappush(heap, (-el, tie, lo, mid, vl, el))
        heapq.heappush(heap, (-er, tie + 1, mid, hi, vr, er))
        tie += 2
        splits += 1
    return total, total_err, evals


def integrate_half_line_multi(f, edge: float, direction: int, scale: float, cfg: QuadConfig, seeds=()):
    """Vector-valued analogue of integrate_half_line."""
    if direction not in (+1, -1):
        raise ValueError("direction must be +1 or -1")

    def mapped(u):
        u = np.asarray(u, dtype=float)
        x = edge + direction * scale * (1.0 - u) / u
        return np.asarray(f(x)) * (scale / u**2)[:, None]

    useeds = [scale / (scale + abs(s - edge)) for s in seeds]
    return integrate_line_multi(mapped, 0.0, 1.0, cfg, seeds=useeds)


def integrate_half_line(f, edge: float, direction: int, scale: float, cfg: QuadConfig) -> QuadResult:
    """Integrate f over (edge, +inf) or (-inf, edge) via u = scale/(scale+|x-edge|).

    Requires |f| to decay at least ~1/x^2 so the mapped integrand stays
    bounded toward u -> 0 (the Kronrod rule never evaluates u = 0 itself).
    """
    if direction not in (+1, -1):
        raise ValueError("direction must be +1 or -1")

    def mapped(u):
        u = np.asarray(u, dtype=float)
        x = edge + direction * scale * (1.0 - u) / u
        return np.asarray(f(x)) * (scale / u**2)

    # With this substitution du carries +scale/u^2 for either direction, so
    # the mapped result already equals the half-line integral.
    return integrate_line(mapped, 0.0, 1.0, cfg)


def trapezoid_weights(grid: FrequencyGrid) -> np.ndarray:
    """Composite trapezoid weights for the grid (half weight at the ends)."""
    w = np.full(grid.n, grid.spacing)
    w[0] *= 0.5
    w[-1] *= 0.5
    return w


def integrate_grid_2d(values: np.ndarray, grid1: FrequencyGrid, grid2: FrequencyGrid) -> complex:
    """Tensor composite trapezoid rule over grid1 x grid2."""
    values = np.asarray(values)
    if values.shape != (grid1.n, grid2.n):
        raise ShapeMismatch(
            f"values shape {values.shape} does not match grids ({grid1.n}, {grid2.n})"
        )
    w1 = trapezoid_weights(grid1)
    w2 = trapezoid_weights(grid2)
    return complex(w1 @ values @ w2)


def convolution_window(omega_sum: float, inp: TwoPhotonInput, params: NetworkParams, cfg: QuadConfig):
    """Integration window and feature seeds for the nonlinear convolution.

    The integrand peaks where either pulse factor is centered and has
    kernel structure of width ~kappa at -omega_c and omega_sum + omega_c.
    The window covers all four features with a half-width of
    max(50 * max pulse width, 50 * kappa, 10 * |omega_c|) (or the
    configured override) and is clipped to the pulses' compact supports
    when they have any.  Returns (lo, hi, seeds) or None when the
    product of supports is empty.
    """
    features = [
        pulse_center(inp.left),
        omega_sum - pulse_center(inp.right),
        -params.omega_c,
        omega_sum + params.omega_c,
    ]
    half = cfg.window_halfwidth
    if half is None:
        half = max(
            50.0 * max(pulse_width(inp.left), pulse_width(inp.right)),
            50.0 * params.kappa,
            10.0 * abs(params.omega_c),
        )
    lo = min(features) - half
    hi = max(features) + half
    sup_l = pulse_support(inp.left)
    if sup_l is not None:
        lo, hi = max(lo, sup_l[0]), min(hi, sup_l[1])
    sup_r = pulse_support(inp.right)
    if sup_r is not None:
        lo, hi = max(lo, omega_sum - sup_r[1]), min(hi, omega_sum - sup_r[0])
    if not lo < hi:
        return None
    seeds = [x for x in features if lo < x < hi]
    # Sampled pulses are piecewise linear; seeding every interpolation
    # kink keeps the panels smooth instead of letting adaptivity chase
    # the kinks one bisection at a time.
    if isinstance(inp.left, SampledPulse):
        seeds.extend(float(x) for x in inp.left.grid.points)
    if isinstance(inp.right, SampledPulse):
        seeds.extend(float(omega_sum - x) for x in inp.right.grid.points)
    return lo, hi, seeds


def _line_with_tails(integrand, lo: float, hi: float, seeds, compact: bool, cfg: QuadConfig) -> QuadResult:
    """Windowed adaptive integral plus numerically integrated tails.

    The convolution integrands decay like 1/nu^4, so a bare window leaves
    an O(W^-3) truncation error that can exceed the requested relative
    tolerance; mapping each tail onto (0, 1] and integrating it removes
    that error instead of merely bounding it.  Compact-support integrands
    skip the tails.
    """
    res = integrate_line(integrand, lo, hi, cfg, seeds=seeds)
    if compact:
        return res
    tail_cfg = QuadConfig(
        rel_tol=cfg.rel_tol, abs_tol=cfg.abs_tol, max_subdivisions=min(cfg.max_subdivisions, 50)
    )
    scale_lo = max(abs(lo), 10.0)
    scale_hi = max(abs(hi), 10.0)
    left = integrate_half_line(integrand, lo, -1, scale_lo, tail_cfg)
    right = integrate_half_line(integrand, hi, +1, scale_hi, tail_cfg)
    return QuadResult(
        res.value + left.value + right.value,
        res.abs_error_estimate + left.abs_error_estimate + right.abs_error_estimate,
        res.evaluations + left.evaluations + right.evaluations,
    )


def convolve_g(
    omega1: float,
    omega2: float,
    inp: TwoPhotonInput,
    params: NetworkParams,
    cfg: QuadConfig | None = None,
) -> QuadResult:
    """Nonlinear convolution integral shared by all three output channels.

    Integrates amplitude_L(nu) * amplitude_R(omega1+omega2-nu) *
    g_kernel(omega1, omega2, nu, omega1+omega2-nu) over the real line,
    without the channel prefactor applied by the amplitude assembly.
    Returns exactly zero for kappa = 0.
    """
    cfg = cfg or QuadConfig()
    if params.kappa == 0.0:
        return QuadResult(0.0j, 0.0, 0)
    omega_sum = omega1 + omega2
    win = convolution_window(omega_sum, inp, params, cfg)
    if win is None:
        return QuadResult(0.0j, 0.0, 0)
    lo, hi, seeds = win

    def integrand(nu):
        nu = np.asarray(nu, dtype=float)
        return (
            pulse_amplitude(inp.left, nu)
            * pulse_amplitude(inp.right, omega_sum - nu)
            * kernels.g_kernel(omega1, omega2, nu, omega_sum - nu, params)
        )

    compact = pulse_support(inp.left) is not None or pulse_support(inp.right) is not None
    return _line_with_tails(integrand, lo, hi, seeds, compact, cfg)


def j_line(
    omega_sum: float,
    inp: TwoPhotonInput,
    params: NetworkParams,
    cfg: QuadConfig | None = None,
) -> QuadResult:
    """Reduced convolution over nu of
    amplitude_L(nu) * amplitude_R(omega_sum-nu) /
    ((nu + omega_c - 2i kappa)(omega_sum - nu + omega_c - 2i kappa)).

    The full convolution factors as a rational prefactor in
    (omega1, omega2) times this integral, which depends on the node only
    through omega1 + omega2; grid fills exploit that by computing one
    j_line per distinct frequency sum.
    """
    cfg = cfg or QuadConfig()
    if params.kappa == 0.0:
        return QuadResult(0.0j, 0.0, 0)
    win = convolution_window(omega_sum, inp, params, cfg)
    if win is None:
        return QuadResult(0.0j, 0.0, 0)
    lo, hi, seeds = win
    wc = params.omega_c
    two_ik = 2j * params.kappa

    def integrand(nu):
        nu = np.asarray(nu, dtype=float)
        return (
            pulse_amplitude(inp.left, nu)
            * pulse_amplitude(inp.right, omega_sum - nu)
            / ((nu + wc - two_ik) * (omega_sum - nu + wc - two_ik))
        )

    compact = pulse_support(inp.left) is not None or pulse_support(inp.right) is not None
    return _line_with_tails(integrand, lo, hi, seeds, compact, cfg)
