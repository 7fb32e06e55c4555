"""Radial ground state of the whole-space quasilinear problem.

Solves (|w'|^{m-2} w')' + (N-1)/r |w'|^{m-2} w' - w^{m-1} + f(w) = 0 by
shooting on the initial height d = w(0), and extracts the constants that
drive the boundary-spike energy expansion: the decay rate mu, the decay
amplitude C0, the whole-space least energy c_star and the curvature
coefficient gamma.

The shooting variable is s = |w'|^{m-2} w', which stays smooth through
points where w' vanishes for m > 2.  A single bisection from r = 0 can
only track the decaying tail to moderate radii before the exponentially
growing mode (relative error ~ exp(2 mu r) * eps) swamps it, so the
ground-state solver restarts the bisection at a ladder of radii: at each
restart the stored state is re-projected onto the stable manifold by
bisecting a multiplicative tweak of w.  The assembled profile is genuine
ODE data over almost the whole grid; only below w = 1e-12 is the tail
replaced by the asymptotic form C0 r^{-beta} exp(-mu r).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import BracketNotFound, IntegrationError, WindowTooNoisy
from .nonlinearity import NonlinearitySpec, eval_F, eval_f, find_uc, pure_power

__all__ = [
    "RadialProfile",
    "ShotOutcome",
    "GroundStateConstants",
    "GammaCrossCheck",
    "decay_rate",
    "compensation_power",
    "shoot",
    "find_ground_state",
    "ground_state_cached",
    "decay_diagnostics",
    "ground_state_constants",
    "gamma_crosscheck",
    "moment_identity_check",
    "ode_residual",
    "half_sphere_moment",
    "profile_eval",
]

# profile values below this are replaced by the asymptotic tail
TAIL_FLOOR = 1e-12
# target relative accuracy of accepted trajectory data; sets the
# restart ladder spacing ln(budget/eps)/(2 mu)
_ERR_BUDGET = 1e-8

CROSSING = "crossing"
REBOUND = "rebound"
DECAY = "decay"


def decay_rate(m: float) -> float:
    """Exponential tail rate mu = (1/(m-1))^(1/m)."""
    return (1.0 / (m - 1.0)) ** (1.0 / m)


def compensation_power(m: float, N: int) -> float:
    """Algebraic tail power beta = (N-1)/(m(m-1))."""
    return (N - 1.0) / (m * (m - 1.0))


@dataclass
class ShotOutcome:
    classification: str
    r: np.ndarray
    w: np.ndarray
    dw: np.ndarray
    s: np.ndarray
    shoot_height: float


@dataclass
class RadialProfile:
    """Ground-state samples on a uniform radial grid.

    Entries with index >= tail_start come from the asymptotic tail form
    rather than integrated data.
    """

    r: np.ndarray
    w: np.ndarray
    dw: np.ndarray
    m: float
    N: int
    shoot_height: float
    h_r: float
    tail_start: int
    classification: str = DECAY

    @property
    def r_max(self) -> float:
        return float(self.r[-1])

    @property
    def r_data_max(self) -> float:
        """Last radius backed by integrated (non-asymptotic) data."""
        return float(self.r[self.tail_start - 1])


@dataclass
class GroundStateConstants:
    mu: float
    C0: float
    c_star: float
    gamma: float
    C_star_half: float
    tail_fraction_c_star: float = 0.0
    tail_fraction_gamma: float = 0.0
    tail_warning: bool = False

    def as_dict(self) -> dict:
        return {
            "mu": self.mu,
            "C0": self.C0,
            "c_star": self.c_star,
            "gamma": self.gamma,
            "C_star_half": self.C_star_half,
            "tail_fraction_c_star": self.tail_fraction_c_star,
            "tail_fraction_gamma": self.tail_fraction_gamma,
            "tail_warning": self.tail_warning,
        }


@dataclass
class GammaCrossCheck:
    gamma_direct: float
    gamma_radial: float
    relative_gap: float
    angular_constant_mc: float
    angular_constant_exact: float
    mc_standard_error: float


def _integrate(spec: NonlinearitySpec, w0: float, s0: float, i0: int, n: int,
               h: float, tail_tol: float, record_w: np.ndarray,
               record_s: np.ndarray) -> tuple[str, int]:
    """RK4 march of (w, s) from grid index i0 (radius i0*h > 0) to index n.

    Fills record_w/record_s in place and returns (classification, last
    index written).  Classification is CROSSING when w hits 0, REBOUND
    when s turns >= 0 while w stays positive, DECAY when w falls below
    tail_tol or the grid ends with w still positive and decreasing.
    """
    m, N = spec.m, spec.N
    mm1 = m - 1.0
    inv = 1.0 / mm1
    nm1 = N - 1.0
    power = spec.kind == "pure_power"
    p = spec.p if power else None
    fcall = None if power else spec.f

    w, s = w0, s0
    r = i0 * h
    record_w[i0] = w
    record_s[i0] = s
    i = i0
    half = 0.5 * h
    sixth = h / 6.0
    while i < n:
        # RK4 on  w' = sign(s)|s|^{1/(m-1)},  s' = w^{m-1} - f(w) - (N-1)s/r
        rw, rs = w, s
        rr = r
        if power:
            k1w = rs ** inv if rs > 0 else -((-rs) ** inv) if rs < 0 else 0.0
            k1s = (rw ** mm1 - rw ** p if rw > 0 else
                   -((-rw) ** mm1) if rw < 0 else 0.0) - nm1 * rs / rr
            aw = rw + half * k1w
            as_ = rs + half * k1s
            ar = rr + half
            k2w = as_ ** inv if as_ > 0 else -((-as_) ** inv) if as_ < 0 else 0.0
            k2s = (aw ** mm1 - aw ** p if aw > 0 else
                   -((-aw) ** mm1) if aw < 0 else 0.0) - nm1 * as_ / ar
            bw = rw + half * k2w
            bs = rs + half * k2s
            k3w = bs ** inv if bs > 0 else -((-bs) ** inv) if bs < 0 else 0.0
            k3s = (bw ** mm1 - bw ** p if bw > 0 else
                   -((-bw) ** mm1) if bw < 0 else 0.0) - nm1 * bs / ar
            cw = rw + h * k3w
            cs = rs + h * k3s
            cr = rr + h
            k4w = cs ** inv if cs > 0 else -((-cs) ** inv) if cs < 0 else 0.0
            k4s = (cw ** mm1 - cw ** p if cw > 0 else
                   -((-cw) ** mm1) if cw < 0 else 0.0) - nm1 * cs / cr
        else:
            def rhs(rr_, ww_, ss_):
                dw_ = ss_ ** inv if ss_ > 0 else -((-ss_) ** inv) if ss_ < 0 else 0.0
                if ww_ > 0:
                    ds_ = ww_ ** mm1 - fcall(ww_)
                elif ww_ < 0:
                    ds_ = -((-ww_) ** mm1)
                else:
                    ds_ = 0.0
                return dw_, ds_ - nm1 * ss_ / rr_

            k1w, k1s = rhs(rr, rw, rs)
            k2w, k2s = rhs(rr + half, rw + half * k1w, rs + half * k1s)
            k3w, k3s = rhs(rr + half, rw + half * k2w, rs + half * k2s)
            k4w, k4s = rhs(rr + h, rw + h * k3w, rs + h * k3s)

        w = rw + sixth * (k1w + 2.0 * (k2w + k3w) + k4w)
        s = rs + sixth * (k1s + 2.0 * (k2s + k3s) + k4s)
        r = rr + h
        i += 1
        if not (math.isfinite(w) and math.isfinite(s)):
            raise IntegrationError(r)
        record_w[i] = w
        record_s[i] = s
        if w <= 0.0:
            return CROSSING, i
        if s >= 0.0:
            return REBOUND, i
        if w < tail_tol:
            return DECAY, i
    return DECAY, n


def _series_start(spec: NonlinearitySpec, d: float, h: float) -> tuple[float, float]:
    """State (w, s) at r = h from the regular series through the origin.

    Near r = 0 the flux satisfies s ~ g(d) r / N with g(w) = w^{m-1} - f(w),
    which integrates to w(r) = d + sgn(g) |g/N|^{1/(m-1)} (m-1)/m r^{m/(m-1)}.
    """
    m, N = spec.m, spec.N
    g0 = d ** (m - 1.0) - eval_f(spec, d)
    s_h = g0 * h / N
    amp = abs(g0 / N) ** (1.0 / (m - 1.0)) * (m - 1.0) / m * h ** (m / (m - 1.0))
    w_h = d + math.copysign(amp, g0) if g0 != 0.0 else d
    return w_h, s_h


def _dw_from_s(s: np.ndarray, m: float) -> np.ndarray:
    return np.sign(s) * np.abs(s) ** (1.0 / (m - 1.0))


def shoot(spec: NonlinearitySpec, d: float, h_r: float = 1e-3,
          r_max: float = 30.0, tail_tol: float | None = None) -> ShotOutcome:
    """Integrate the radial equation from w(0) = d and classify the shot."""
    if d <= 0:
        raise ValueError("shoot height d must be positive")
    if tail_tol is None:
        tail_tol = 1e-8 * d
    n = int(round(r_max / h_r))
    w_arr = np.empty(n + 1)
    s_arr = np.empty(n + 1)
    w_arr[0] = d
    s_arr[0] = 0.0
    w1, s1 = _series_start(spec, d, h_r)
    w_arr[1] = w1
    s_arr[1] = s1
    if s1 >= 0.0 and w1 >= d:
        # subcritical height: the profile turns up immediately
        cls, last = REBOUND, 1
    else:
        cls, last = _integrate(spec, w1, s1, 1, n, h_r, tail_tol, w_arr, s_arr)
    r = np.arange(last + 1) * h_r
    return ShotOutcome(cls, r, w_arr[: last + 1].copy(),
                       _dw_from_s(s_arr[: last + 1], spec.m),
                       s_arr[: last + 1].copy(), d)


def _classify_from(spec, w0, s0, i0, n, h, tail_tol, scratch_w, scratch_s):
    cls, last = _integrate(spec, w0, s0, i0, n, h, tail_tol, scratch_w, scratch_s)
    return cls, last


def find_ground_state(spec: NonlinearitySpec, h_r: float = 1e-3,
                      r_max: float = 30.0,
                      bisect_tol: float = 1e-12) -> RadialProfile:
    """Ground state profile by staged shooting.

    Bisects the shoot height between a rebounding and a crossing
    trajectory down to machine resolution, then restarts the bisection
    on a multiplicative tweak of w at a ladder of radii so the accepted
    data stays on the stable manifold all the way to r_max (or to the
    w < 1e-12 floor, beyond which the asymptotic tail is substituted).
    """
    mu = decay_rate(spec.m)
    beta = compensation_power(spec.m, spec.N)
    n = int(round(r_max / h_r))
    u_c = find_uc(spec)
    # internal runs use no decay floor: near-critical crossing shots pass
    # through arbitrarily small w before crossing, so any positive floor
    # would blur the crossing/rebound dichotomy the bisection relies on
    tiny_tol = 0.0

    scratch_w = np.empty(n + 1)
    scratch_s = np.empty(n + 1)

    def classify_height(d: float) -> tuple[str, int]:
        scratch_w[0] = d
        scratch_s[0] = 0.0
        w1, s1 = _series_start(spec, d, h_r)
        if s1 >= 0.0:
            return REBOUND, 1
        scratch_w[1] = w1
        scratch_s[1] = s1
        return _integrate(spec, w1, s1, 1, n, h_r, tiny_tol, scratch_w, scratch_s)

    # bracket by doubling from u_c
    d_lo = u_c
    cls, _ = classify_height(d_lo)
    if cls == CROSSING:
        raise BracketNotFound(f"trajectory at u_c = {u_c:.6g} already crosses")
    d_hi = d_lo
    while True:
        d_hi *= 2.0
        if d_hi > 1e6 * u_c:
            raise BracketNotFound(
                f"no crossing found doubling the shoot height up to 1e6 u_c"
            )
        cls, _ = classify_height(d_hi)
        if cls == CROSSING:
            break
        d_lo = d_hi

    # bisect to the requested width, but not past machine resolution
    floor = np.spacing(d_hi) * 4.0
    target = max(bisect_tol * d_hi, floor)
    while d_hi - d_lo > target:
        mid = 0.5 * (d_lo + d_hi)
        if mid <= d_lo or mid >= d_hi:
            break
        cls, _ = classify_height(mid)
        if cls == CROSSING:
            d_hi = mid
        else:  # rebound or full decay both mean "not yet crossed"
            d_lo = mid
    d_star = 0.5 * (d_lo + d_hi)

    # accepted profile arrays
    w_all = np.full(n + 1, np.nan)
    s_all = np.full(n + 1, np.nan)
    cls, last = classify_height(d_star)
    trust_len = max(2, int(math.log(_ERR_BUDGET / 1e-16) / (2.0 * mu) / h_r))
    accept = min(last - 1 if cls != DECAY else last, trust_len)
    w_all[: accept + 1] = scratch_w[: accept + 1]
    s_all[: accept + 1] = scratch_s[: accept + 1]
    i_cur = accept

    # restart ladder: re-project onto the stable manifold by bisecting a
    # multiplicative tweak of w at the current trust edge
    while i_cur < n and w_all[i_cur] > TAIL_FLOOR:
        w_c, s_c = w_all[i_cur], s_all[i_cur]

        def classify_theta(theta: float) -> str:
            c, _ = _integrate(spec, theta * w_c, s_c, i_cur, n, h_r,
                              tiny_tol, scratch_w, scratch_s)
            return c

        base = classify_theta(1.0)
        if base == DECAY:
            _, last = _integrate(spec, w_c, s_c, i_cur, n, h_r, tiny_tol,
                                 scratch_w, scratch_s)
            stop = min(last, i_cur + trust_len)
            w_all[i_cur: stop + 1] = scratch_w[i_cur: stop + 1]
            s_all[i_cur: stop + 1] = scratch_s[i_cur: stop + 1]
            i_cur = stop
            if last <= i_cur:
                break
            continue
        # expand a symmetric bracket around theta = 1; the width needed
        # grows with the bisect_tol slack in the shoot height, so the cap
        # is generous
        delta = 4e-16
        t_lo = t_hi = None
        while delta < 0.5:
            c_minus = classify_theta(1.0 - delta)
            c_plus = classify_theta(1.0 + delta)
            if c_minus != c_plus or c_minus == DECAY or c_plus == DECAY:
                if c_plus in (REBOUND, DECAY) and c_minus == CROSSING:
                    t_lo, t_hi = 1.0 - delta, 1.0 + delta
                    lo_is_cross = True
                elif c_minus in (REBOUND, DECAY) and c_plus == CROSSING:
                    t_lo, t_hi = 1.0 - delta, 1.0 + delta
                    lo_is_cross = False
                else:
                    delta *= 4.0
                    continue
                break
            delta *= 4.0
        if t_lo is None:
            raise BracketNotFound(
                f"stable-manifold re-projection failed at r = {i_cur * h_r:.3g}"
            )
        while t_hi - t_lo > np.spacing(1.0) * 4.0:
            t_mid = 0.5 * (t_lo + t_hi)
            if t_mid <= t_lo or t_mid >= t_hi:
                break
            c = classify_theta(t_mid)
            if (c == CROSSING) == lo_is_cross:
                t_lo = t_mid
            else:
                t_hi = t_mid
        theta = 0.5 * (t_lo + t_hi)
        cls, last = _integrate(spec, theta * w_c, s_c, i_cur, n, h_r,
                               tiny_tol, scratch_w, scratch_s)
        stop = min(last - 1 if cls != DECAY else last, i_cur + trust_len)
        if stop <= i_cur:
            break
        w_all[i_cur: stop + 1] = scratch_w[i_cur: stop + 1]
        s_all[i_cur: stop + 1] = scratch_s[i_cur: stop + 1]
        i_cur = stop

    # asymptotic tail beyond the last accepted / above-floor sample
    tail_start = i_cur + 1
    r = np.arange(n + 1) * h_r
    dw_all = _dw_from_s(np.nan_to_num(s_all, nan=0.0), spec.m)
    if tail_start <= n:
        r_a = r[i_cur]
        c_ext = w_all[i_cur] * r_a ** beta * math.exp(mu * r_a)
        rt = r[tail_start:]
        w_all[tail_start:] = c_ext * rt ** (-beta) * np.exp(-mu * rt)
        dw_all[tail_start:] = -(mu + beta / rt) * w_all[tail_start:]
    return RadialProfile(r=r, w=w_all, dw=dw_all, m=spec.m, N=spec.N,
                         shoot_height=d_star, h_r=h_r,
                         tail_start=tail_start, classification=DECAY)


@lru_cache(maxsize=32)
def _ground_state_cached(m: float, N: int, p: float, h_r: float, r_max: float,
                         bisect_tol: float) -> RadialProfile:
    return find_ground_state(pure_power(m, N, p), h_r=h_r, r_max=r_max,
                             bisect_tol=bisect_tol)


def ground_state_cached(spec: NonlinearitySpec, h_r: float = 1e-3,
                        r_max: float = 30.0,
                        bisect_tol: float = 1e-12) -> RadialProfile:
    """find_ground_state with memoization for pure-power specs."""
    if spec.kind == "pure_power":
        return _ground_state_cached(spec.m, spec.N, spec.p, h_r, r_max,
                                    bisect_tol)
    return find_ground_state(spec, h_r=h_r, r_max=r_max, bisect_tol=bisect_tol)


def profile_eval(profile: RadialProfile, r) -> np.ndarray:
    """Ground-state value w(r) at arbitrary radii.

    Linear interpolation on the profile grid; past r_max the asymptotic
    form w ~ r^{-beta} e^{-mu r} is continued from the last grid value.
    """
    r = np.asarray(r, dtype=float)
    out = np.interp(r, profile.r, profile.w)
    beyond = r > profile.r_max
    if np.any(beyond):
        mu = decay_rate(profile.m)
        beta = compensation_power(profile.m, profile.N)
        rm = profile.r_max
        wm = profile.w[-1]
        rb = r[beyond]
        out[beyond] = wm * (rb / rm) ** (-beta) * np.exp(-mu * (rb - rm))
    return out


def decay_diagnostics(profile: RadialProfile) -> tuple[float, float, float, float]:
    """Tail diagnostics on the window [0.5 r_max, 0.8 r_max].

    Returns (mu_fit, C0_fit, plateau_error, slope_gap) where mu_fit is
    the fitted exponential rate of the power-compensated profile
    w r^beta, C0_fit the window mean of the fully compensated quantity
    q(r) = w r^beta exp(mu r), plateau_error its maximal relative
    deviation from C0_fit, and slope_gap = |slope + mu|.
    """
    if profile.r_max < 20.0:
        raise ValueError("decay diagnostics need r_max >= 20")
    mu = decay_rate(profile.m)
    beta = compensation_power(profile.m, profile.N)
    r_hi = profile.r_max
    mask = (profile.r >= 0.5 * r_hi) & (profile.r <= 0.8 * r_hi)
    r = profile.r[mask]
    w = profile.w[mask]
    if np.any(~np.isfinite(w)) or np.any(w < 1e-300):
        raise WindowTooNoisy("profile underflows inside the fit window")
    q = w * r ** beta * np.exp(mu * r)
    C0_fit = float(np.mean(q))
    plateau_error = float(np.max(np.abs(q - C0_fit)) / C0_fit)
    # exponential rate of the power-compensated profile
    logw = np.log(w) + beta * np.log(r)
    slope = float(np.polyfit(r, logw, 1)[0])
    mu_fit = -slope
    return mu_fit, C0_fit, plateau_error, abs(slope + mu)


def half_sphere_moment(N: int) -> float:
    """Integral of (z_N)_+ over the unit sphere S^{N-1}.

    Equals the volume of the unit ball in R^{N-1}; this is the angular
    constant that turns the half-space integrals with weight z_N into
    radial ones.
    """
    return math.pi ** ((N - 1) / 2.0) / math.gamma((N + 1) / 2.0)


def sphere_area(N: int) -> float:
    """Surface area of the unit sphere S^{N-1}."""
    return 2.0 * math.pi ** (N / 2.0) / math.gamma(N / 2.0)


def _energy_density(profile: RadialProfile, spec: NonlinearitySpec) -> np.ndarray:
    w, dw, m = profile.w, profile.dw, profile.m
    F = np.array([eval_F(spec, t) for t in w]) if spec.kind != "pure_power" \
        else np.where(w > 0, w, 0.0) ** (spec.p + 1.0) / (spec.p + 1.0)
    return (np.abs(dw) ** m + np.abs(w) ** m) / m - F


def _radial_integral(profile: RadialProfile, integrand: np.ndarray,
                     power: int) -> tuple[float, float]:
    """Composite-Simpson integral of integrand * r^power over the grid,
    extended by the analytic tail beyond r_max.

    Returns (value, tail_fraction) where tail_fraction includes both the
    substituted-asymptotic part of the grid and the beyond-grid
    remainder (integrated on an extended geometric grid).
    """
    from scipy.integrate import simpson

    r = profile.r
    total_grid = simpson(integrand * r ** power, x=r)
    # beyond-grid remainder from the asymptotic forms of w and w'
    mu = decay_rate(profile.m)
    beta = compensation_power(profile.m, profile.N)
    r_end = profile.r_max
    w_end = profile.w[-1]
    # integrand decays at least like w^m ~ exp(-m mu r); bound the
    # remainder by continuing the dominant exponential decay
    tail_rate = profile.m * mu
    rem = abs(integrand[-1]) * r_end ** power / tail_rate
    on_grid_tail = 0.0
    if profile.tail_start <= len(r) - 1:
        on_grid_tail = abs(
            simpson(integrand[profile.tail_start:] * r[profile.tail_start:] ** power,
                    x=r[profile.tail_start:])
        )
    value = total_grid + rem
    tail_fraction = (on_grid_tail + rem) / abs(value) if value != 0 else 0.0
    return float(value), float(tail_fraction)


def ground_state_constants(profile: RadialProfile,
                           spec: NonlinearitySpec) -> GroundStateConstants:
    """Extract mu, C0, c_star, gamma and C_star = c_star/2.

    c_star is the whole-space energy of w; gamma is the half-space
    moment (1/(N+1)) int |w'|^m z_N dz reduced to a radial integral via
    the half-sphere moment of z_N (cross-checked by Monte Carlo in
    gamma_crosscheck).
    """
    mu = decay_rate(profile.m)
    _, C0_fit, _, _ = decay_diagnostics(profile)
    E = _energy_density(profile, spec)
    m = profile.m
    c_int, tail_c = _radial_integral(profile, E, profile.N - 1)
    c_star = sphere_area(profile.N) * c_int
    g_int, tail_g = _radial_integral(profile, np.abs(profile.dw) ** m, profile.N)
    gamma = half_sphere_moment(profile.N) / (profile.N + 1.0) * g_int
    return GroundStateConstants(
        mu=mu, C0=C0_fit, c_star=c_star, gamma=gamma,
        C_star_half=c_star / 2.0,
        tail_fraction_c_star=tail_c, tail_fraction_gamma=tail_g,
        tail_warning=(tail_c > 0.01 or tail_g > 0.01),
    )


def gamma_crosscheck(profile: RadialProfile, spec: NonlinearitySpec,
                     sample_count: int = 1_000_000,
                     seed: int = 0) -> GammaCrossCheck:
    """Compare the two integral representations of gamma.

    gamma_direct reduces (1/(N+1)) int_{R^N_+} |w'|^m z_N dz to a radial
    integral times the Monte-Carlo estimate of the half-sphere moment of
    z_N; gamma_radial does the same with the energy-density form
    (1/2) int E z_N dz.  Their relative gap is pure numerical error and
    simultaneously pins down which closed-form angular constant is the
    correct gamma normalization.
    """
    N = profile.N
    rng = np.random.default_rng(seed)
    # uniform points on S^{N-1}; E[(z_N)_+] * |S^{N-1}| is the moment
    chunk = 200_000
    total = 0.0
    total_sq = 0.0
    done = 0
    while done < sample_count:
        k = min(chunk, sample_count - done)
        pts = rng.standard_normal((k, N))
        pts /= np.linalg.norm(pts, axis=1, keepdims=True)
        vals = np.maximum(pts[:, -1], 0.0)
        total += float(np.sum(vals))
        total_sq += float(np.sum(vals * vals))
        done += k
    mean = total / sample_count
    var = total_sq / sample_count - mean * mean
    area = sphere_area(N)
    a_mc = area * mean
    a_se = area * math.sqrt(max(var, 0.0) / sample_count)

    m = profile.m
    g_int, _ = _radial_integral(profile, np.abs(profile.dw) ** m, N)
    e_int, _ = _radial_integral(profile, _energy_density(profile, spec), N)
    gamma_direct = a_mc / (N + 1.0) * g_int
    gamma_radial = a_mc / 2.0 * e_int
    gap = abs(gamma_direct - gamma_radial) / abs(gamma_direct)
    return GammaCrossCheck(
        gamma_direct=gamma_direct, gamma_radial=gamma_radial,
        relative_gap=gap, angular_constant_mc=a_mc,
        angular_constant_exact=half_sphere_moment(N),
        mc_standard_error=a_se,
    )


def moment_identity_check(profile: RadialProfile, spec: NonlinearitySpec,
                          hessian: np.ndarray,
                          angular_points: int = 4096) -> float:
    """Residual of the second-moment identity against 2 trace(hessian) gamma.

    The left side sum_ij G_ij int y_i y_j E(w, y') dy' over R^{N-1}
    splits into a radial factor int E r^N dr and angular second moments
    of S^{N-2}, which are evaluated numerically (so off-diagonal
    cancellation is measured, not assumed).  Returns the relative
    residual, or the absolute value of the left side when the trace
    vanishes.
    """
    N = profile.N
    hessian = np.asarray(hessian, dtype=float)
    if hessian.shape != (N - 1, N - 1):
        raise ValueError(f"hessian must be {(N - 1, N - 1)}, got {hessian.shape}")
    e_int, _ = _radial_integral(profile, _energy_density(profile, spec), N)
    if N == 2:
        S = np.array([[2.0]])  # S^0 = {-1, +1}
    elif N == 3:
        theta = np.linspace(0.0, 2.0 * math.pi, angular_points, endpoint=False)
        c, s = np.cos(theta), np.sin(theta)
        dtheta = 2.0 * math.pi / angular_points
        S = np.array([
            [np.sum(c * c), np.sum(c * s)],
            [np.sum(s * c), np.sum(s * s)],
        ]) * dtheta
    else:
        rng = np.random.default_rng(12345)
        pts = rng.standard_normal((angular_points * 64, N - 1))
        pts /= np.linalg.norm(pts, axis=1, keepdims=True)
        S = sphere_area(N - 1) * (pts[:, :, None] * pts[:, None, :]).mean(axis=0)
    lhs = float(np.sum(hessian * S) * e_int)
    gamma = ground_state_constants(profile, spec).gamma
    trace = float(np.trace(hessian))
    rhs = 2.0 * trace * gamma
    if trace == 0.0:
        return abs(lhs)
    return abs(lhs - rhs) / abs(rhs)


def ode_residual(profile: RadialProfile, spec: NonlinearitySpec) -> float:
    """Max pointwise residual of the radial equation on the data part.

    Uses fourth-order central differences of the flux s = |w'|^{m-2} w'
    on the interior of the integrated grid.
    """
    m = profile.m
    i1 = 4
    i2 = profile.tail_start - 3
    w = profile.w[: profile.tail_start]
    dw = profile.dw[: profile.tail_start]
    r = profile.r[: profile.tail_start]
    s = np.sign(dw) * np.abs(dw) ** (m - 1.0)
    h = profile.h_r
    idx = np.arange(i1, i2)
    ds = (-s[idx + 2] + 8 * s[idx + 1] - 8 * s[idx - 1] + s[idx - 2]) / (12 * h)
    f = np.array([eval_f(spec, t) for t in w[idx]]) if spec.kind != "pure_power" \
        else np.where(w[idx] > 0, w[idx], 0.0) ** spec.p
    res = ds + (spec.N - 1.0) / r[idx] * s[idx] - w[idx] ** (m - 1.0) + f
    return float(np.max(np.abs(res)))
