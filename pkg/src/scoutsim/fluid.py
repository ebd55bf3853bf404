"""Fluid (ODE) model of the probe-driven decrease law and its stability.

Two-phase dynamics in packet units, with w the per-flow window, q the
bottleneck queue, N flows, C the service rate in packets/s, tau the base
RTT, BDP = tau*C:

  increase:  w' = (1 + S/L) / tau          (one data segment plus one
                                            probe grant per RTT)
  decrease:  w' = -beta * w * k_bar / (tau * BDP)
  both:      q' = N * w / tau - C, clipped so q never goes negative

k_bar is the observed busyness (packets served ahead of a probe). The
default integrator treats it as a fixed parameter, matching the
linearization that yields the quadratic

  lambda^2 + lambda * beta*k_bar/(tau*BDP) + beta*w*N/(tau^2*BDP) = 0

whose roots are a stable spiral iff beta*k_bar^2 < 4*w*N*BDP; at the
equilibrium w = BDP/N this reduces to k_bar < 2*BDP/sqrt(beta). The
q-coupled variant (k_bar tracks q) is available behind a flag; it is the
reading under which (BDP/N, 0) is an exact fixed point.
"""

import csv
import math
from dataclasses import dataclass, field

import numpy as np

INCREASE = "increase"
DECREASE = "decrease"

STABLE_SPIRAL = "stable_spiral"
NON_SPIRAL = "non_spiral"


class FluidDivergenceError(RuntimeError):
    def __init__(self, t, w, q):
        super().__init__(f"nonfinite fluid state at t={t}: w={w}, q={q}")
        self.t, self.w, self.q = t, w, q


@dataclass
class FluidParams:
    beta: float                  # decrease gain
    tau: float                   # base RTT, seconds
    C: float                     # service rate, packets/second
    N: int                       # flow count
    k_bar: float                 # observed busyness, packets
    k: float = 0.0               # target busyness
    L: int = 1500                # data segment bytes
    S: int = 64                  # probe bytes
    BDP: float = field(default=None)  # packets; tau*C unless overridden

    def __post_init__(self):
        if self.BDP is None:
            self.BDP = self.tau * self.C
        if self.beta <= 0 or self.tau <= 0 or self.C <= 0 or self.N <= 0 \
                or self.BDP <= 0 or self.L <= 0 or self.S <= 0:
            raise ValueError("fluid parameters must be strictly positive")
        if not self.k_bar > self.k >= 0:
            raise ValueError("requires k_bar > k >= 0")

    @property
    def w_eq(self) -> float:
        return self.BDP / self.N


@dataclass
class FluidTrajectory:
    t: np.ndarray
    w: np.ndarray
    q: np.ndarray

    def write_csv(self, path):
        with open(path, "w", newline="") as fh:
            out = csv.writer(fh)
            out.writerow(["t", "w_pkts", "q_pkts"])
            for row in zip(self.t, self.w, self.q):
                out.writerow([repr(float(v)) for v in row])


def fluid_step(params: FluidParams, w, q, phase, dt):
    """Realized derivative pair for one explicit step: the new state is
    (w + dt*w_rate, q + dt*q_rate), with the queue rate already limited
    by the q >= 0 clip."""
    if phase == INCREASE:
        w_rate = (1.0 + params.S / params.L) / params.tau
    else:
        w_rate = -params.beta * w * params.k_bar / (params.tau * params.BDP)
    q_rate = params.N * w / params.tau - params.C
    if q + dt * q_rate < 0.0:
        q_rate = -q / dt
    return w_rate, q_rate


def default_phase_rule(w, q, params) -> str:
    """Queue presence means the modeled probe delay exceeds its target
    (the k = 0 reading), so any backlog switches to decrease."""
    return DECREASE if q > 0.0 else INCREASE


def integrate(params: FluidParams, w0, q0, dt=None, horizon=None,
              phase_rule=None, sample_every=None, stop_within=None,
              couple_k_to_q=False) -> FluidTrajectory:
    """Fixed-step explicit Euler integration.

    stop_within, when given as (w_target, q_target, radius), ends the run
    early once the state enters that ball. couple_k_to_q replaces the
    fixed k_bar with the instantaneous queue. Nonfinite state raises
    FluidDivergenceError.
    """
    if dt is None:
        dt = params.tau / 100.0
    if horizon is None:
        horizon = 10_000 * params.tau
    if phase_rule is None:
        phase_rule = default_phase_rule
    n_steps = int(round(horizon / dt))
    if sample_every is None:
        sample_every = max(1, n_steps // 100_000)

    inc_rate = (1.0 + params.S / params.L) / params.tau
    dec_gain = params.beta / (params.tau * params.BDP)
    n_over_tau = params.N / params.tau
    cap = params.C
    k_fixed = params.k_bar

    w, q = float(w0), float(q0)
    ts, ws, qs = [0.0], [w], [q]
    stop = None
    if stop_within is not None:
        sw, sq, rad = stop_within
        stop = (sw, sq, rad * rad)

    t = 0.0
    for i in range(1, n_steps + 1):
        if phase_rule(w, q, params) == DECREASE:
            kb = q if couple_k_to_q else k_fixed
            w_rate = -dec_gain * w * kb
        else:
            w_rate = inc_rate
        q_new = q + dt * (n_over_tau * w - cap)
        if q_new < 0.0:
            q_new = 0.0
        w += dt * w_rate
        q = q_new
        t = i * dt
        if not (math.isfinite(w) and math.isfinite(q)):
            raise FluidDivergenceError(t, w, q)
        if i % sample_every == 0 or i == n_steps:
            ts.append(t)
            ws.append(w)
            qs.append(q)
        if stop is not None:
            dw = w - stop[0]
            dq = q - stop[1]
            if dw * dw + dq * dq <= stop[2]:
                if ts[-1] != t:
                    ts.append(t)
                    ws.append(w)
                    qs.append(q)
                break
    return FluidTrajectory(np.asarray(ts), np.asarray(ws), np.asarray(qs))


def stability_bound(bdp_pkts: float, beta: float) -> float:
    """Largest observed busyness that keeps the decrease-phase spiral
    stable at the equilibrium window: 2*BDP/sqrt(beta)."""
    return 2.0 * bdp_pkts / math.sqrt(beta)


def suggested_beta(bdp_pkts: float, n_flows: int) -> float:
    """Gain preset 1/(2*sqrt(BDP/N))."""
    return 1.0 / (2.0 * math.sqrt(bdp_pkts / n_flows))


def eigenvalues(params: FluidParams, w_at_eq: float, phase=DECREASE):
    """Roots of the linearized dynamics at window w_at_eq.

    Decrease phase: the quadratic above, solved via the companion
    matrix (numpy.roots), not the closed form, so the classifier and the
    analytic bound are independent routes. Increase phase: {0, N/tau},
    never stable.
    """
    if phase == INCREASE:
        return complex(0.0), complex(params.N / params.tau)
    a = params.beta * params.k_bar / (params.tau * params.BDP)
    b = params.beta * w_at_eq * params.N / (params.tau ** 2 * params.BDP)
    r1, r2 = np.roots([1.0, a, b])
    return complex(r1), complex(r2)


def classify(params: FluidParams, w_at_eq: float) -> str:
    l1, l2 = eigenvalues(params, w_at_eq)
    if l1.real < 0 and l2.real < 0 and l1.imag != 0:
        return STABLE_SPIRAL
    return NON_SPIRAL


def sweep(points) -> list:
    """Evaluate classification at w = BDP/N for FluidParams points.

    Returns rows ready for the sweep CSV: beta, k_bar, BDP, N,
    classification, re_lambda, im_lambda, bound_2bdp_sqrtbeta.
    """
    rows = []
    for p in points:
        l1, _ = eigenvalues(p, p.w_eq)
        rows.append({
            "beta": p.beta,
            "k_bar": p.k_bar,
            "BDP": p.BDP,
            "N": p.N,
            "classification": classify(p, p.w_eq),
            "re_lambda": l1.real,
            "im_lambda": abs(l1.imag),
            "bound_2bdp_sqrtbeta": stability_bound(p.BDP, p.beta),
        })
    return rows


def write_sweep_csv(rows, path):
    cols = ["beta", "k_bar", "BDP", "N", "classification",
            "re_lambda", "im_lambda", "bound_2bdp_sqrtbeta"]
    with open(path, "w", newline="") as fh:
        out = csv.DictWriter(fh, fieldnames=cols)
        out.writeheader()
        out.writerows(rows)
