"""Forward integration of sampled characteristics and their variational flow.

Along a characteristic (R, W)(s) the pair

    xi  = e^(lambda-mu) dR,      eta = dW + V e^(lambda-mu) lambda_dot dR

(for the derivative d = d/dr of the starting point) obeys the closed linear
system

    dxi/ds  = (W^2 V^-2 lambda_dot - mu_dot) xi + (1 + F/s^2) V^-3 eta
    deta/ds = { V [ (Lambda - 4 pi q) e^(2 mu) + (mu_dot - lambda_dot)/s ]
                - lambda_dot F / (V s^3) } xi
              - W V^-1 ( e^(mu-lambda) mu' + W V^-1 lambda_dot ) eta.

In normal form (xi' = s^-1 (1+c1) xi + (1+c2) eta, ...) the four correction
coefficients c_i measure the distance to the exact expanding background; the
solver records s^2 sum |c_i| along every trajectory.  With eta_hat = s eta
the monitor energy E = s^-4 (xi + eta_hat)^2 + (xi - eta_hat)^2 is slowly
varying, which is what bounds |dR/dr| and s |dW/dr|.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .kinematics import v_factor

__all__ = [
    "MetricHistory",
    "AnalyticDeSitter",
    "char_rhs",
    "variational_rhs",
    "normal_form_coefficients",
    "CharTrajectory",
    "integrate_characteristic",
    "write_trajectory_csv",
]


@dataclass
class MetricHistory:
    """Metric fields (plus the tangential-pressure moment) at output cadence.

    Linear interpolation in time between stored levels and periodic-linear
    interpolation in r; the coefficients the characteristic system needs all
    decay, so the interpolation error is subdominant to the integrator's.
    """

    Lambda: float
    r_nodes: np.ndarray
    times: list = field(default_factory=list)
    lam: list = field(default_factory=list)
    mu: list = field(default_factory=list)
    lam_dot: list = field(default_factory=list)
    mu_dot: list = field(default_factory=list)
    mu_prime: list = field(default_factory=list)
    q: list = field(default_factory=list)

    FIELDS = ("lam", "mu", "lam_dot", "mu_dot", "mu_prime", "q")

    def append(self, metric, q_arr):
        self.times.append(metric.t)
        self.lam.append(np.array(metric.lam))
        self.mu.append(np.array(metric.mu))
        self.lam_dot.append(np.array(metric.lam_dot))
        self.mu_dot.append(np.array(metric.mu_dot))
        self.mu_prime.append(np.array(metric.mu_prime))
        self.q.append(np.array(q_arr))

    @property
    def t_min(self):
        return self.times[0]

    @property
    def t_max(self):
        return self.times[-1]

    def _interp_r(self, arr, r):
        """Periodic linear interpolation of one stored level at positions r."""
        n = len(self.r_nodes)
        dr = 1.0 / n
        fr = np.asarray(r, dtype=float) / dr
        i0 = np.floor(fr).astype(np.int64)
        a = fr - i0
        i0 %= n
        i1 = (i0 + 1) % n
        return (1.0 - a) * arr[i0] + a * arr[i1]

    def fields_at(self, s, r):
        """Interpolated (lam, mu, lam_dot, mu_dot, mu_prime, q) at (s, r)."""
        times = self.times
        if not (times[0] - 1e-12 <= s <= times[-1] + 1e-12):
            raise ValueError(
                f"requested time s = {s} outside stored range [{times[0]}, {times[-1]}]"
            )
        k = int(np.searchsorted(times, s, side="right")) - 1
        k = min(max(k, 0), len(times) - 2) if len(times) > 1 else 0
        out = {}
        if len(times) == 1:
            for name in self.FIELDS:
                out[name] = self._interp_r(getattr(self, name)[0], r)
            return out
        t0, t1 = times[k], times[k + 1]
        a = (s - t0) / (t1 - t0)
        for name in self.FIELDS:
            levels = getattr(self, name)
            v0 = self._interp_r(levels[k], r)
            v1 = self._interp_r(levels[k + 1], r)
            out[name] = (1.0 - a) * v0 + a * v1
        return out

    def save(self, path):
        np.savez(
            path,
            Lambda=self.Lambda,
            r_nodes=self.r_nodes,
            times=np.asarray(self.times),
            **{name: np.asarray(getattr(self, name)) for name in self.FIELDS},
        )
        return path

    @classmethod
    def load(cls, path):
        data = np.load(path)
        hist = cls(Lambda=float(data["Lambda"]), r_nodes=data["r_nodes"])
        hist.times = list(data["times"])
        for name in cls.FIELDS:
            setattr(hist, name, list(data[name]))
        return hist


class AnalyticDeSitter:
    """Exact expanding vacuum background; drop-in for MetricHistory in tests."""

    def __init__(self, Lambda=3.0, lambda0=0.0):
        self.Lambda = Lambda
        self.lambda0 = lambda0
        self.t_min = 0.0
        self.t_max = math.inf

    def fields_at(self, s, r):
        r = np.asarray(r, dtype=float)
        shape = r.shape
        return {
            "lam": np.full(shape, math.log(s) + self.lambda0),
            "mu": np.full(shape, 0.5 * math.log(3.0 / (self.Lambda * s**2))),
            "lam_dot": np.full(shape, 1.0 / s),
            "mu_dot": np.full(shape, -1.0 / s),
            "mu_prime": np.zeros(shape),
            "q": np.zeros(shape),
        }


def char_rhs(provider, s, R, W, F):
    """(dR/ds, dW/ds) of the characteristic system at (s, R, W, F)."""
    fl = provider.fields_at(s, R)
    V = v_factor(s, W, F)
    eml = np.exp(fl["mu"] - fl["lam"])
    dR = eml * W / V
    dW = -fl["lam_dot"] * W - fl["mu_prime"] * eml * V
    return dR, dW


def _variational_matrix(provider, s, R, W, F):
    fl = provider.fields_at(s, R)
    V = v_factor(s, W, F)
    e2mu = np.exp(2.0 * fl["mu"])
    eml = np.exp(fl["mu"] - fl["lam"])
    a11 = (W**2 / V**2) * fl["lam_dot"] - fl["mu_dot"]
    a12 = (1.0 + F / s**2) / V**3
    a21 = V * ((provider.Lambda - 4.0 * np.pi * fl["q"]) * e2mu
               + (fl["mu_dot"] - fl["lam_dot"]) / s) \
        - fl["lam_dot"] * F / (V * s**3)
    a22 = -(W / V) * (eml * fl["mu_prime"] + (W / V) * fl["lam_dot"])
    return a11, a12, a21, a22


def variational_rhs(provider, s, R, W, F, xi, eta):
    """(dxi/ds, deta/ds) of the linear variational system."""
    a11, a12, a21, a22 = _variational_matrix(provider, s, R, W, F)
    return a11 * xi + a12 * eta, a21 * xi + a22 * eta


def normal_form_coefficients(provider, s, R, W, F):
    """The four correction coefficients (c1, c2, c3, c4) of the normal form."""
    a11, a12, a21, a22 = _variational_matrix(provider, s, R, W, F)
    return s * a11 - 1.0, a12 - 1.0, s**2 * a21 - 1.0, s * a22


@dataclass
class CharTrajectory:
    """Sampled characteristic + variational state: struct of arrays over s."""

    seed: tuple  # (t, r, w, F)
    s: np.ndarray
    R: np.ndarray
    W: np.ndarray
    xi: np.ndarray
    eta_hat: np.ndarray
    E: np.ndarray
    dRdr: np.ndarray
    sdWdr: np.ndarray
    csum: np.ndarray  # sum_i |c_i|

    @property
    def Ws(self):
        return self.W * self.s

    @property
    def s2_csum(self):
        return self.s**2 * self.csum

    def summary(self) -> dict:
        e0 = self.E[0] if self.E[0] > 0.0 else 1.0
        return {
            "t_start": float(self.s[0]),
            "r": float(self.seed[1]),
            "w": float(self.seed[2]),
            "F": float(self.seed[3]),
            "max_E_ratio": float(np.max(self.E) / e0),
            "max_dRdr": float(np.max(np.abs(self.dRdr))),
            "max_sdWdr": float(np.max(np.abs(self.sdWdr))),
            "sup_s2_csum": float(np.max(self.s2_csum)),
        }


def _joint_rhs(provider, s, y, F):
    R, W, xi, eta = y
    dR, dW = char_rhs(provider, s, R, W, F)
    dxi, deta = variational_rhs(provider, s, R, W, F, xi, eta)
    return np.array([dR, dW, dxi, deta])


def integrate_characteristic(provider, start, s_end, *, ds_factor=0.01,
                             sample_times=None) -> CharTrajectory:
    """RK4 integration of (R, W, xi, eta) from start = (t, r, w, F) to s_end.

    xi, eta start from dR/dr = 1, dW/dr = 0.  Sampling happens at
    sample_times (default: logarithmic, ~1/ds_factor points per e-fold);
    each recorded row carries the recovered dR/dr and s dW/dr and the
    normal-form coefficient sum.
    """
    t, r, w, F = start
    if sample_times is None:
        n = max(2, int(abs(math.log(s_end / t)) / ds_factor) + 1)
        sample_times = np.geomspace(t, s_end, n)
    sample_times = np.asarray(sample_times, dtype=float)

    fl = provider.fields_at(t, np.asarray(r))
    elm = np.exp(fl["lam"] - fl["mu"])
    V0 = v_factor(t, w, F)
    y = np.array([r, w, float(elm), float(V0 * elm * fl["lam_dot"])])

    rows = {k: [] for k in ("s", "R", "W", "xi", "eta_hat", "E", "dRdr", "sdWdr", "csum")}

    def record(s, y):
        R, W, xi, eta = y
        eta_hat = s * eta
        fl = provider.fields_at(s, np.asarray(R))
        V = v_factor(s, W, F)
        dRdr = float(np.exp(fl["mu"] - fl["lam"]) * xi)
        dWdr = float(eta - V * fl["lam_dot"] * xi)
        c = normal_form_coefficients(provider, s, np.asarray(R), W, F)
        rows["s"].append(s)
        rows["R"].append(R)
        rows["W"].append(W)
        rows["xi"].append(xi)
        rows["eta_hat"].append(eta_hat)
        rows["E"].append(s**-4 * (xi + eta_hat) ** 2 + (xi - eta_hat) ** 2)
        rows["dRdr"].append(dRdr)
        rows["sdWdr"].append(s * dWdr)
        rows["csum"].append(float(sum(abs(float(ci)) for ci in c)))

    s = float(sample_times[0])
    record(s, y)
    for s_target in sample_times[1:]:
        while s != s_target:
            h = math.copysign(min(ds_factor * s, abs(s_target - s)), s_target - s)
            k1 = _joint_rhs(provider, s, y, F)
            k2 = _joint_rhs(provider, s + 0.5 * h, y + 0.5 * h * k1, F)
            k3 = _joint_rhs(provider, s + 0.5 * h, y + 0.5 * h * k2, F)
            k4 = _joint_rhs(provider, s + h, y + h * k3, F)
            y = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            s = s_target if abs(s_target - (s + h)) < 1e-12 * s_target else s + h
        record(s, y)

    return CharTrajectory(
        seed=(t, r, w, F),
        **{k: np.asarray(v) for k, v in rows.items()},
    )


def write_trajectory_csv(traj: CharTrajectory, path: str) -> str:
    with open(path, "w") as fh:
        fh.write("s,R,W,Ws,xi,eta_hat,E,dRdr,sdWdr\n")
        for i in range(len(traj.s)):
            row = (traj.s[i], traj.R[i], traj.W[i], traj.Ws[i], traj.xi[i],
                   traj.eta_hat[i], traj.E[i], traj.dRdr[i], traj.sdWdr[i])
            fh.write(",".join(repr(float(v)) for v in row) + "\n")
    return path
