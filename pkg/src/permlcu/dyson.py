"""Truncated integral-free Dyson segment operators.

A segment operator over [t_w, t_w + dt_w] in the interaction frame is the
order-Q truncation of

    sum_q sum_{i_q} sum_{k_q} (-i)^q  e^{-i t_w (E_z - E_{z_q})}
        e^{t_w sum_l rate_l}  e^{dt_w [x_1,...,x_q, 0]}  d_coeff  P_{i_q} |z><z|

where the inputs x_j combine static-energy gaps along the permutation path
with the exponential rates, and the divided difference replaces the nested
time-ordered integrals.  Every scalar coefficient is bounded by
(dt_tilde^q / q!) * Gamma_term, which fixes the phase pair (phi, theta)
consumed by the LCU simulator.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import product

import numpy as np

from . import dd, pham
from .sched import MODE_UNIFORM, Schedule

ENUMERATION_GUARD = 100_000_000
BOUND_CLAMP_TOL = 1e-9


class TermBoundError(RuntimeError):
    """A coefficient exceeded its norm bound by more than roundoff: internal bug."""


class EnumerationLimitError(ValueError):
    """The exhaustive multi-index enumeration would exceed the term guard."""


@dataclass(frozen=True)
class DysonTerm:
    """One (q, i_q, k_q, z) summand of a segment operator."""
    q: int
    iq: tuple[int, ...]
    kq: tuple[int, ...]
    z: int
    z_path: tuple[int, ...]
    xj: tuple[complex, ...]
    coeff: complex
    gamma_term: float
    phi: float
    theta: float


@dataclass(frozen=True)
class TermBlock:
    """All z-components of one ancilla term (q, i_q, k_q), vectorized."""
    q: int
    iq: tuple[int, ...]
    kq: tuple[int, ...]
    cum_mask: int
    coeff: np.ndarray      # (2^n,)
    phi: np.ndarray        # (2^n,)
    theta: np.ndarray      # (2^n,)
    gamma_term: float
    bound: float           # dt_tilde^q/q! * gamma bound used for the phases


@dataclass(frozen=True)
class SegmentOperator:
    """Truncated Dyson expansion of U_I(t_w + dt_w, t_w) plus its LCU data."""
    h: pham.PermExpHamiltonian
    w: int
    t_w: float
    dt_w: float
    dt_tilde: float
    q_max: int
    s: float
    gamma_step: float
    mode: str
    clamped: bool
    blocks: tuple[TermBlock, ...]

    def matrix(self) -> np.ndarray:
        """Dense segment operator; deterministic block-ordered accumulation."""
        dim = self.h.dim
        z = np.arange(dim)
        out = np.zeros((dim, dim), dtype=complex)
        for blk in self.blocks:
            out[z ^ blk.cum_mask, z] += (-1j) ** blk.q * blk.coeff
        return out

    def terms(self):
        """Per-(term, z) DysonTerm views, recomputing inputs on demand."""
        for blk in self.blocks:
            for z in range(self.h.dim):
                xj, z_path, _ = interaction_inputs(self.h, blk.iq, blk.kq, z)
                yield DysonTerm(q=blk.q, iq=blk.iq, kq=blk.kq, z=z,
                                z_path=z_path, xj=xj,
                                coeff=complex(blk.coeff[z]),
                                gamma_term=blk.gamma_term,
                                phi=float(blk.phi[z]), theta=float(blk.theta[z]))


def interaction_inputs(h: pham.PermExpHamiltonian, iq, kq, z: int):
    """Divided-difference inputs, permuted-state path, and static d-product.

    x_j = i(E_{z_q} - E_{z_{j-1}}) + sum_{l=j..q} rate_{i_l,k_l}[z_l], with
    z_l the state after the first l permutations and z_0 = z.
    """
    iq, kq = tuple(iq), tuple(kq)
    q = len(iq)
    if len(kq) != q:
        raise ValueError("i and k multi-indices must have equal order")
    energies = h.h0_diag
    z_path = []
    cur = z
    for i in iq:
        cur ^= h.vterms[i].mask
        z_path.append(cur)
    d_coeff = 1.0 + 0.0j
    rates = []
    for j in range(q):
        et = h.vterms[iq[j]].exp_terms[kq[j]]
        d_coeff *= et.amp[z_path[j]]
        rates.append(complex(et.rate[z_path[j]]))
    e_final = energies[z_path[-1]] if q else energies[z]
    suffix = 0.0 + 0.0j
    xj = [0.0 + 0.0j] * q
    for j in range(q - 1, -1, -1):
        suffix += rates[j]
        e_prev = energies[z_path[j - 1]] if j > 0 else energies[z]
        xj[j] = 1j * (e_final - e_prev) + suffix
    return tuple(xj), tuple(z_path), complex(d_coeff)


def term_coefficient(h: pham.PermExpHamiltonian, t_w: float, dt_w: float,
                     iq, kq, z: int) -> complex:
    """Scalar coefficient of P_{i_q}|z><z| in the segment expansion (reference path)."""
    xj, z_path, d_coeff = interaction_inputs(h, iq, kq, z)
    q = len(xj)
    if q == 0:
        return complex(dd.exp_dd_scaled(dt_w, [0.0]))
    rates_sum = sum(
        complex(h.vterms[iq[j]].exp_terms[kq[j]].rate[z_path[j]]) for j in range(q))
    energies = h.h0_diag
    phase = np.exp(-1j * t_w * (energies[z] - energies[z_path[-1]]))
    divided = dd.exp_dd_scaled(dt_w, list(xj) + [0.0])
    return complex(phase * np.exp(t_w * rates_sum) * divided * d_coeff)


def phase_angles(coeff: complex, bound: float) -> tuple[float, float]:
    """(phi, theta) with coeff = bound * cos(phi) * e^{i theta}, phi in [0, pi/2].

    A zero bound is only legal for a zero coefficient (zero-padded exponential
    terms); a ratio above 1 + 1e-9 indicates a bound violation, not roundoff.
    """
    mag = abs(coeff)
    if bound <= 0.0:
        if mag > 0.0 or bound < 0.0:
            raise TermBoundError(f"coefficient {coeff} with non-positive bound {bound}")
        return math.pi / 2.0, 0.0
    ratio = mag / bound
    if ratio > 1.0 + BOUND_CLAMP_TOL:
        raise TermBoundError(f"|coeff|/bound = {ratio} exceeds 1 beyond roundoff")
    phi = math.acos(min(ratio, 1.0))
    theta = math.atan2(coeff.imag, coeff.real) if mag > 0.0 else 0.0
    return phi, theta


def _lookup_tables(h: pham.PermExpHamiltonian):
    """Stacked (i, k) -> vector tables for vectorized enumeration."""
    n_i, n_k = len(h.vterms), h.num_exp_terms
    dim = h.dim
    amp = np.zeros((n_i, n_k, dim), dtype=complex)
    rate = np.zeros((n_i, n_k, dim), dtype=complex)
    amp_scale = np.zeros((n_i, n_k))
    masks = np.zeros(n_i, dtype=np.int64)
    for i, term in enumerate(h.vterms):
        masks[i] = term.mask
        for k, et in enumerate(term.exp_terms):
            amp[i, k] = et.amp
            rate[i, k] = et.rate
            amp_scale[i, k] = et.amp_max
    return amp, rate, amp_scale, masks


def count_terms(h: pham.PermExpHamiltonian, q_max: int) -> int:
    """Enumerated (q, i_q, k_q, z) tuples up to order q_max."""
    base = len(h.vterms) * h.num_exp_terms
    return h.dim * sum(base**q for q in range(q_max + 1))


def build_segment(h: pham.PermExpHamiltonian, schedule: Schedule, w: int,
                  q_max: int | None = None) -> SegmentOperator:
    """Enumerate all Dyson terms of segment w up to the truncation order.

    The mode is inherited from the schedule: exact per-term Gamma bounds or
    the uniform (larger, state-preparation-cheap) bound.
    """
    if q_max is None:
        q_max = schedule.Q
    if q_max is None:
        raise ValueError("truncation order missing: build the schedule with eps or pass q_max")
    if count_terms(h, q_max) > ENUMERATION_GUARD:
        raise EnumerationLimitError(
            f"{count_terms(h, q_max)} terms exceed the enumeration guard {ENUMERATION_GUARD}")
    t_w, dt_w = schedule.steps[w]
    dt_tilde = schedule.dt_tilde(w)
    gamma_step = schedule.gammas[w]
    mode = schedule.mode
    dim = h.dim
    z = np.arange(dim)
    energies = h.h0_diag
    clamped = schedule.final_step_clamped and w == schedule.r - 1

    blocks = [TermBlock(q=0, iq=(), kq=(), cum_mask=0,
                        coeff=np.ones(dim, dtype=complex),
                        phi=np.zeros(dim), theta=np.zeros(dim),
                        gamma_term=1.0, bound=1.0)]
    n_i, n_k = len(h.vterms), h.num_exp_terms
    if n_i and n_k:
        amp, rate, amp_scale, masks = _lookup_tables(h)
        lam_ik = rate.real.max(axis=2)           # per-(i,k) growth exponent
        gmax = amp_scale.max()
        lam_global = schedule.lam
        for q in range(1, q_max + 1):
            i_tuples = np.array(list(product(range(n_i), repeat=q)), dtype=np.int64)
            k_tuples = np.array(list(product(range(n_k), repeat=q)), dtype=np.int64)
            n_it, n_kt = len(i_tuples), len(k_tuples)
            # combined enumeration: i-tuples outer, k-tuples inner
            big_i = np.repeat(i_tuples, n_kt, axis=0)            # (B, q)
            big_k = np.tile(k_tuples, (n_it, 1))                 # (B, q)
            nb = n_it * n_kt

            cum = np.zeros((nb, q), dtype=np.int64)
            acc = np.zeros(nb, dtype=np.int64)
            for j in range(q):
                acc = acc ^ masks[big_i[:, j]]
                cum[:, j] = acc
            zp = cum[:, :, None] ^ z[None, None, :]              # (B, q, dim)

            rates = rate[big_i[:, :, None], big_k[:, :, None], zp]
            amps = amp[big_i[:, :, None], big_k[:, :, None], zp]
            d_coeff = amps.prod(axis=1)                          # (B, dim)
            rates_sum = rates.sum(axis=1)
            suffix = np.flip(np.cumsum(np.flip(rates, axis=1), axis=1), axis=1)

            e_prev = np.concatenate(
                [np.broadcast_to(energies[z], (nb, 1, dim)),
                 energies[zp[:, :-1, :]]], axis=1)               # E_{z_{j-1}}
            e_final = energies[zp[:, -1, :]]                     # (B, dim)
            xrows = 1j * (e_final[:, None, :] - e_prev) + suffix  # (B, q, dim)

            flat = np.concatenate(
                [xrows.transpose(0, 2, 1).reshape(nb * dim, q),
                 np.zeros((nb * dim, 1), dtype=complex)], axis=1)
            divided = dd.exp_dd_scaled_batch(dt_w, flat).reshape(nb, dim)

            phase = np.exp(-1j * t_w * (energies[z][None, :] - e_final))
            coeff = phase * np.exp(t_w * rates_sum) * divided * d_coeff

            gamma_terms = np.exp(t_w * lam_ik[big_i, big_k]).prod(axis=1) \
                * amp_scale[big_i, big_k].prod(axis=1)           # (B,)
            scale = dt_tilde**q / math.factorial(q)
            if mode == MODE_UNIFORM:
                bounds = np.full(nb, scale * (gmax * np.exp(t_w * lam_global))**q)
            else:
                bounds = scale * gamma_terms

            mag = np.abs(coeff)
            with np.errstate(divide="ignore", invalid="ignore"):
                ratio = np.where(bounds[:, None] > 0, mag / bounds[:, None], 0.0)
            if (mag[bounds == 0.0] > 0).any() or ratio.max(initial=0.0) > 1.0 + BOUND_CLAMP_TOL:
                raise TermBoundError(
                    f"segment {w} order {q}: coefficient bound violated "
                    f"(max ratio {ratio.max(initial=0.0)})")
            phi = np.arccos(np.minimum(ratio, 1.0))
            phi[bounds == 0.0] = math.pi / 2.0
            theta = np.where(mag > 0, np.angle(coeff), 0.0)

            for b in range(nb):
                blocks.append(TermBlock(
                    q=q, iq=tuple(int(v) for v in big_i[b]),
                    kq=tuple(int(v) for v in big_k[b]),
                    cum_mask=int(cum[b, -1]), coeff=coeff[b],
                    phi=phi[b], theta=theta[b],
                    gamma_term=float(gamma_terms[b]), bound=float(bounds[b])))

    s = sum((gamma_step * dt_tilde)**q / math.factorial(q) for q in range(q_max + 1))
    return SegmentOperator(h=h, w=w, t_w=t_w, dt_w=dt_w, dt_tilde=dt_tilde,
                           q_max=q_max, s=s, gamma_step=gamma_step, mode=mode,
                           clamped=clamped, blocks=tuple(blocks))


def build_segment_unitary(h: pham.PermExpHamiltonian, schedule: Schedule, w: int,
                          q_max: int | None = None) -> np.ndarray:
    """Dense truncated U_I(t_w + dt_w, t_w)."""
    return build_segment(h, schedule, w, q_max=q_max).matrix()


def alt_segment_unitary(h: pham.PermExpHamiltonian, schedule: Schedule, w: int,
                        q_max: int | None = None) -> np.ndarray:
    """Dense Schroedinger-frame segment with the static phases absorbed.

    Built from the shifted inputs y_j = -i(E_{z_{j-1}} - E_z) - sum_{l<j} rate_l
    (y_1 = 0) and a trailing diagonal e^{-i H0 dt_w}; satisfies
    e^{-i H0 t_{w+1}} U_I = U_alt e^{-i H0 t_w} segment by segment.
    """
    if q_max is None:
        q_max = schedule.Q
    if q_max is None:
        raise ValueError("truncation order missing: build the schedule with eps or pass q_max")
    if count_terms(h, q_max) > ENUMERATION_GUARD:
        raise EnumerationLimitError("term guard exceeded")
    t_w, dt_w = schedule.steps[w]
    dim = h.dim
    z = np.arange(dim)
    energies = h.h0_diag
    out = np.zeros((dim, dim), dtype=complex)
    out[z, z] = 1.0  # q = 0
    n_i, n_k = len(h.vterms), h.num_exp_terms
    if n_i and n_k:
        amp, rate, _, masks = _lookup_tables(h)
        for q in range(1, q_max + 1):
            i_tuples = np.array(list(product(range(n_i), repeat=q)), dtype=np.int64)
            k_tuples = np.array(list(product(range(n_k), repeat=q)), dtype=np.int64)
            big_i = np.repeat(i_tuples, len(k_tuples), axis=0)
            big_k = np.tile(k_tuples, (len(i_tuples), 1))
            nb = len(big_i)

            cum = np.zeros((nb, q), dtype=np.int64)
            acc = np.zeros(nb, dtype=np.int64)
            for j in range(q):
                acc = acc ^ masks[big_i[:, j]]
                cum[:, j] = acc
            zp = cum[:, :, None] ^ z[None, None, :]

            rates = rate[big_i[:, :, None], big_k[:, :, None], zp]
            d_coeff = amp[big_i[:, :, None], big_k[:, :, None], zp].prod(axis=1)
            rates_sum = rates.sum(axis=1)

            e_prev = np.concatenate(
                [np.broadcast_to(energies[z], (nb, 1, dim)),
                 energies[zp[:, :-1, :]]], axis=1)
            prefix = np.concatenate(
                [np.zeros((nb, 1, dim), dtype=complex),
                 np.cumsum(rates, axis=1)[:, :-1, :]], axis=1)   # sum_{l<j} rate_l
            yrows = -1j * (e_prev - energies[z][None, None, :]) - prefix  # (B, q, dim)
            y_last = (-1j * (energies[zp[:, -1, :]] - energies[z][None, :])
                      - rates_sum)                               # j = q + 1
            flat = np.concatenate(
                [yrows.transpose(0, 2, 1).reshape(nb * dim, q),
                 y_last.reshape(nb * dim, 1)], axis=1)
            divided = dd.exp_dd_scaled_batch(dt_w, flat).reshape(nb, dim)

            coeff = np.exp((t_w + dt_w) * rates_sum) * divided * d_coeff
            vals = (-1j) ** q * coeff
            for b in range(nb):
                out[z ^ int(cum[b, -1]), z] += vals[b]
    return out * np.exp(-1j * energies * dt_w)[None, :]
