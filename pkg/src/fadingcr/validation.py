"""Identity suites: every closed form checked against its Gaussian oracle.

Produces the JSON validation report consumed by the CLI; each entry lists
the identity name, worst observed error, tolerance and pass/fail.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from . import ergodic, gaussian_oracle as go, rate_core as rc
from .model import ChannelParams, CodingParams, Config, Rayleigh, config_to_dict

#: (name, tolerance) of every identity, in report order.
TOLERANCES = {
    "rate-oracle-agreement": 1e-9,
    "converse-identity": 1e-12,
    "distortion-identity": 1e-12,
    "schur-var-y-given-u": 1e-10,
    "schur-var-s-given-shat-y": 1e-10,
    "assembly-var-y": 1e-10,
    "mc-var-s-given-u": 1e-2,
    "mc-plugin-rate": 1e-2,
    "quad-weight-sum": 1e-10,
    "quad-second-moment": 1e-10,
    "quad-mean": 1e-8,
    "quad-fourth-moment": 1e-8,
}


@dataclass(frozen=True)
class IdentityCheck:
    name: str
    observed: float
    tolerance: float
    passed: bool


def draw_params(rng: np.random.Generator, ch: ChannelParams,
                d_lo: float = 1e-6) -> tuple[float, float, CodingParams]:
    """One random valid (g, P, CodingParams) draw: g in [0,4], P in [0,10], disk rhos."""
    g = rng.uniform(0.0, 4.0)
    P = rng.uniform(0.0, 10.0)
    r = math.sqrt(rng.uniform(0.0, 1.0))
    th = rng.uniform(0.0, 2.0 * math.pi)
    d = rng.uniform(d_lo, ch.Q * 0.999999)
    return g, P, CodingParams(r * math.cos(th), r * math.sin(th), d)


def draw_converse_cov(rng: np.random.Generator, ch: ChannelParams,
                      boundary: bool = False) -> rc.ConverseCovariance:
    """Random PSD converse covariance with K11 + K22 = Q.

    boundary=True restricts to rho1^2 + rho2^2 = 1, the family on which the
    closed form for Var(S | S_hat, Y) is exact (in the disk interior it
    understates the conditional variance by g^2 K00 (1-rho1^2-rho2^2) K22/B).
    """
    k00 = rng.uniform(0.0, 10.0)
    k22 = rng.uniform(1e-6, ch.Q * 0.999999)
    k11 = ch.Q - k22
    r = 1.0 if boundary else math.sqrt(rng.uniform(0.0, 1.0))
    th = rng.uniform(0.0, 2.0 * math.pi)
    return rc.ConverseCovariance.from_rhos(k00, k11, k22,
                                           r * math.cos(th), r * math.sin(th))


def run_validation(cfg: Config, draws: int = 10000, samples: int = 1_000_000,
                   mc_sets: int = 20, seed: int = 42,
                   corrupt: str | None = None) -> dict:
    """Run all identity suites; deterministic given (seed, draws, samples)."""
    cfg.validate()
    if samples < 1000:
        raise ValueError("samples must be at least 1000")
    ch = cfg.channel
    base = cfg.log_base
    rng = np.random.Generator(np.random.PCG64(seed))
    checks: list[IdentityCheck] = []

    def add(name: str, observed: float) -> None:
        tol = 0.0 if corrupt == name else TOLERANCES[name]
        checks.append(IdentityCheck(name, float(observed), tol, bool(observed <= tol)))

    # (i) closed-form rate vs the log-det oracle; (ii) converse functional identity
    err_rate, err_conv = 0.0, 0.0
    for _ in range(draws):
        g, P, cp = draw_params(rng, ch)
        r_closed = rc.rate_per_state(g, P, cp, ch, base)
        err_rate = max(err_rate, abs(r_closed - go.gp_rate_oracle(g, P, cp, ch, base)))
        K = rc.ConverseCovariance.from_rhos(P, ch.Q - cp.d, cp.d, cp.rho1, cp.rho2)
        r_conv = rc.converse_rate(g, K, ch, base)
        err_conv = max(err_conv, abs(r_conv - r_closed) / max(abs(r_closed), 1e-12))
    add("rate-oracle-agreement", err_rate)
    add("converse-identity", err_conv)

    # (iii) Schur-complement oracles for the conditional variances
    err_dist, err_vyu, err_vssy, err_vy = 0.0, 0.0, 0.0, 0.0
    for _ in range(max(draws // 10, 100)):
        g, P, cp = draw_params(rng, ch)
        cov = go.build_covariance(g, P, cp, ch)
        err_dist = max(err_dist, abs(go.schur_conditional_variance(cov, "S", "U") - cp.d))
        vyu = rc.cond_var_y_given_u(g, P, cp, ch)
        err_vyu = max(err_vyu, abs(go.schur_conditional_variance(cov, "Y", "U") - vyu)
                      / max(vyu, 1e-12))
        Kb = draw_converse_cov(rng, ch, boundary=True)
        mb = go.converse_joint_covariance(g, Kb, ch)
        schur = go.schur_conditional_variance(mb, "S", ("Shat", "Y"),
                                              variables=go.CONVERSE_VARIABLES)
        closed = rc.cond_var_s_given_shat_y(g, Kb, ch)
        err_vssy = max(err_vssy, abs(schur - closed) / max(closed, 1e-12))
        K = draw_converse_cov(rng, ch)
        m = go.converse_joint_covariance(g, K, ch)
        vy = rc.var_y(g, K, ch)
        err_vy = max(err_vy, abs(m[4, 4] - vy) / max(vy, 1e-12))
    add("distortion-identity", err_dist)
    add("schur-var-y-given-u", err_vyu)
    add("schur-var-s-given-shat-y", err_vssy)
    add("assembly-var-y", err_vy)

    # (iv) Monte-Carlo consistency of the construction
    err_mc_var, err_mc_rate = 0.0, 0.0
    for i in range(mc_sets):
        g, P, cp = draw_params(rng, ch, d_lo=1e-3 * ch.Q)
        est = go.mc_estimate(g, P, cp, ch, n=samples, seed=seed + 1 + i, base=base)
        err_mc_var = max(err_mc_var, abs(est.var_s_given_u - cp.d) / cp.d)
        err_mc_rate = max(err_mc_rate, abs(est.rate - rc.rate_per_state(g, P, cp, ch, base)))
    add("mc-var-s-given-u", err_mc_var)
    add("mc-plugin-rate", err_mc_rate)

    # (v) Rayleigh quadrature moments
    rule = ergodic.make_rule(Rayleigh(), cfg.quadrature_nodes)
    w = np.array(rule.weights)
    gN = np.array(rule.nodes)
    add("quad-weight-sum", abs(float(w.sum()) - 1.0))
    add("quad-second-moment", abs(float(w @ gN ** 2) - 1.0))
    add("quad-mean", abs(float(w @ gN) - math.sqrt(math.pi) / 2.0))
    add("quad-fourth-moment", abs(float(w @ gN ** 4) - 2.0))

    return {
        "identities": [asdict(c) for c in checks],
        "passed": all(c.passed for c in checks),
        "seed": seed,
        "draws": draws,
        "samples": samples,
        "mc_sets": mc_sets,
        "prng": go.PRNG_ALGORITHM,
        "config": config_to_dict(cfg),
    }


def first_failure(report: dict) -> dict | None:
    for entry in report["identities"]:
        if not entry["passed"]:
            return entry
    return None
