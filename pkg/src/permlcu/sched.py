"""Adaptive time partitioning of [0, T] and truncation-order selection.

Each non-final step solves Gamma(t_w) * (e^{lam*dt} - 1)/lam = ln 2, which
keeps the per-segment LCU normalization near 2.  The closed form is
dt = ln(1 + lam*ln2/Gamma(t_w))/lam; three regimes follow from the sign of
lam (constant steps, saturating step count, shrinking steps).  When the
proposed step overshoots T, vanishes, or the logarithm argument turns
negative, the final step is clamped to T - t_w.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from scipy.special import lambertw

from . import pham

LN2 = math.log(2.0)

MODE_EXACT = "exact"
MODE_UNIFORM = "uniform"


class InteractionVanished(Exception):
    """Gamma(t_w) <= 0: no interaction left, the caller must clamp the final step."""


@dataclass(frozen=True)
class Schedule:
    """Ordered partition of [0, T] with per-step left-endpoint norm bounds."""
    steps: tuple[tuple[float, float], ...]   # (t_w, dt_w)
    gammas: tuple[float, ...]                # Gamma(t_w) used to set each step
    r: int
    lam: float
    final_step_clamped: bool
    l1_like: float
    total_time: float
    mode: str = MODE_EXACT
    Q: int | None = None
    eps: float | None = None

    def dt_tilde(self, w: int) -> float:
        """Effective step weight (e^{lam*dt_w} - 1)/lam (dt_w in the lam->0 limit)."""
        return _dt_tilde(self.steps[w][1], self.lam)

    @property
    def gamma_tilde_final(self) -> float | None:
        """Replacement bound ln2/dt_tilde implied by a clamped final step.

        Reported for diagnostics only; it never feeds back into Q or the
        partition itself.
        """
        if not self.final_step_clamped:
            return None
        return LN2 / self.dt_tilde(self.r - 1)


def _dt_tilde(dt: float, lam: float) -> float:
    if lam == 0.0:
        return dt
    return math.expm1(lam * dt) / lam


def next_step(gamma_tw: float, lam: float) -> float:
    """Step length solving Gamma(t_w)*(e^{lam*dt}-1)/lam = ln 2.

    Returns math.inf when the logarithm argument 1 + lam*ln2/Gamma is
    non-positive (decaying interaction that can never accumulate ln 2);
    raises InteractionVanished when Gamma <= 0.
    """
    if gamma_tw <= 0.0:
        raise InteractionVanished(f"gamma(t_w) = {gamma_tw} <= 0")
    u = lam * LN2 / gamma_tw
    if abs(u) < 1e-9:
        return LN2 / gamma_tw * (1.0 - u / 2.0)
    if 1.0 + u <= 0.0:
        return math.inf
    return math.log1p(u) / lam


def gamma_function(h: pham.PermExpHamiltonian, mode: str = MODE_EXACT):
    """Left-endpoint norm bound used by the partitioning rule."""
    if mode == MODE_EXACT:
        return lambda t: pham.gamma_bound(h, t)
    if mode == MODE_UNIFORM:
        return lambda t: pham.gamma_bound_uniform(h, t)
    raise ValueError(f"unknown mode {mode!r}")


def build_schedule(h: pham.PermExpHamiltonian, t_total: float,
                   eps: float | None = None, mode: str = MODE_EXACT) -> Schedule:
    """Partition [0, T] by iterating the step rule from t=0.

    The final step is clamped to T - t_w whenever the rule overshoots T,
    returns the negative-argument signal, or the interaction vanished.  When
    eps is given, the truncation order Q for |s - 2| <= eps/r is attached.
    """
    if not (t_total > 0.0 and math.isfinite(t_total)):
        raise ValueError("total time must be positive and finite")
    gamma = gamma_function(h, mode)
    lam = pham.lambda_max(h)
    steps: list[tuple[float, float]] = []
    gammas: list[float] = []
    clamped = False
    t = 0.0
    while t < t_total:
        g = gamma(t)
        try:
            dt = next_step(g, lam)
        except InteractionVanished:
            dt = math.inf
        if not math.isfinite(dt) or t + dt > t_total:
            steps.append((t, t_total - t))
            gammas.append(g)
            clamped = True
            break
        steps.append((t, dt))
        gammas.append(g)
        t += dt

    r = len(steps)
    l1 = sum(g * _dt_tilde(dt, lam) for (_, dt), g in zip(steps, gammas))
    return Schedule(steps=tuple(steps), gammas=tuple(gammas), r=r, lam=lam,
                    final_step_clamped=clamped, l1_like=l1, total_time=t_total,
                    mode=mode, Q=truncation_order(r, eps) if eps is not None else None,
                    eps=eps)


def l1_like_norm(schedule: Schedule) -> float:
    """Discretized L1-type norm sum_w Gamma(t_w) * dt_tilde_w.

    Every non-final step contributes exactly ln 2; for a pure-exponential
    Gamma the sum equals the integral of Gamma over [0, T].
    """
    return schedule.l1_like


def s_tail(q_order: int) -> float:
    """Residual 2 - sum_{q<=Q} (ln2)^q / q! of the truncated expansion of 2."""
    partial = 0.0
    term = 1.0
    for q in range(q_order + 1):
        partial += term
        term *= LN2 / (q + 1)
    return 2.0 - partial


def truncation_order_lambert(r: int, eps: float) -> int | None:
    """Closed-form sufficient order ceil(ln(2r/eps)/W(ln(2r/eps)/(e ln2)) - 1)."""
    arg = math.log(2.0 * r / eps)
    if arg <= 0.0:
        return None
    w = float(lambertw(arg / (math.e * LN2)).real)
    return math.ceil(arg / w - 1.0)


def truncation_order(r: int, eps: float) -> int:
    """Smallest Q with 2 - sum_{q<=Q} (ln2)^q/q! <= eps/r.

    The Lambert-W closed form is evaluated as a cross-check upper bound.
    """
    if not isinstance(r, int) or r < 1:
        raise ValueError("r must be a positive integer")
    if not (eps > 0.0):
        raise ValueError("eps must be positive")
    target = eps / r
    q_order = 0
    while s_tail(q_order) > target:
        q_order += 1
        if q_order > 200:
            raise ValueError(f"eps/r = {target} below achievable truncation residual")
    upper = truncation_order_lambert(r, eps)
    if upper is not None and q_order > upper:
        raise AssertionError(
            f"searched order {q_order} exceeds closed-form bound {upper} (r={r}, eps={eps})")
    return q_order
