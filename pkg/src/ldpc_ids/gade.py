"""Gaussian-approximation density evolution for regular LDPC ensembles.

Messages are modeled as consistent Gaussians N(mu, 2*mu). The module tracks
the mean trajectory of the decoder, evaluates the innovation ratio J(gamma)
and the error-side odds ratio F(gamma), and checks their monotonicity
numerically.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate, optimize
from scipy.stats import norm


def _phi_small(mu):
    return math.exp(-0.4527 * mu ** 0.86 + 0.0218)


def _phi_large(mu):
    return math.sqrt(math.pi / mu) * math.exp(-mu / 4.0) * (1.0 - 10.0 / (7.0 * mu))


_PHI_SPLIT = 10.0
_PHI_SMALL_AT_SPLIT = _phi_small(_PHI_SPLIT)


def phi(mu):
    """Phi(mu) = 1 - E[tanh(x/2)] under x ~ N(mu, 2 mu), two-piece fit.

    Phi(0) = 1, strictly decreasing toward 0. The small-mu branch is capped
    at 1 so the range stays in (0, 1].
    """
    if mu < 0:
        raise ValueError("phi requires mu >= 0")
    if mu == 0:
        return 1.0
    if mu < _PHI_SPLIT:
        return min(1.0, _phi_small(mu))
    return _phi_large(mu)


def phi_inv(target):
    """Inverse of phi by bracketed root finding, branch-aware at the split."""
    if not 0.0 < target <= 1.0:
        raise ValueError("phi_inv requires a value in (0, 1]")
    if target >= 1.0:
        return 0.0
    if target >= _PHI_SMALL_AT_SPLIT:
        lo, hi = 1e-12, _PHI_SPLIT
        f = lambda mu: phi(mu) - target
    else:
        lo = _PHI_SPLIT
        hi = 2.0 * _PHI_SPLIT
        while _phi_large(hi) > target:
            hi *= 2.0
        f = lambda mu: _phi_large(mu) - target
    return float(optimize.brentq(f, lo, hi, xtol=1e-12, rtol=8.9e-16))


@dataclass(frozen=True)
class EnsembleSpec:
    d_v: int
    d_c: int
    sigma: float

    def __post_init__(self):
        if self.d_v < 2 or self.d_c < 2:
            raise ValueError("regular ensemble needs d_v >= 2 and d_c >= 2")
        if not self.sigma > 0:
            raise ValueError("sigma must be positive")


@dataclass(frozen=True)
class GaDeState:
    iteration: int
    mu0: float
    mu_v: float
    mu_c: float
    mu_l: float
    mu_l_tilde: float
    mu_delta: float


def _next_mu_c(mu_v, ensemble):
    target = 1.0 - (1.0 - phi(mu_v)) ** (ensemble.d_c - 1)
    if target <= 0.0:
        raise ArithmeticError(f"phi_inv target {target} out of domain "
                              f"(mu_v={mu_v})")
    return phi_inv(target)


def ga_de_trajectory(ensemble, iterations):
    """Mean trajectory for iterations 1..iterations.

    The V2C mean starts at mu0 = 2/sigma^2. At iteration k the total-LLR
    mean is mu_l = mu0 + d_v * mu_c(k) and the precomputed-total mean uses
    the next refresh, mu_l_tilde = mu0 + d_v * mu_c(k+1).
    """
    mu0 = 2.0 / ensemble.sigma ** 2
    states = []
    mu_v = mu0
    mu_c = _next_mu_c(mu_v, ensemble)
    for k in range(1, iterations + 1):
        mu_v_next = mu0 + (ensemble.d_v - 1) * mu_c
        mu_c_next = _next_mu_c(mu_v_next, ensemble)
        mu_l = mu0 + ensemble.d_v * mu_c
        mu_l_tilde = mu0 + ensemble.d_v * mu_c_next
        states.append(GaDeState(iteration=k, mu0=mu0, mu_v=mu_v, mu_c=mu_c,
                                mu_l=mu_l, mu_l_tilde=mu_l_tilde,
                                mu_delta=mu_l_tilde - mu_l))
        mu_v = mu_v_next
        mu_c = mu_c_next
    return states


def ga_de_step(state: GaDeState, ensemble: EnsembleSpec) -> GaDeState:
    """Advance the recursion one iteration."""
    mu_v_next = state.mu0 + (ensemble.d_v - 1) * state.mu_c
    mu_c_next = _next_mu_c(mu_v_next, ensemble)
    mu_c_after = _next_mu_c(state.mu0 + (ensemble.d_v - 1) * mu_c_next,
                            ensemble)
    mu_l = state.mu0 + ensemble.d_v * mu_c_next
    mu_l_tilde = state.mu0 + ensemble.d_v * mu_c_after
    return GaDeState(iteration=state.iteration + 1, mu0=state.mu0,
                     mu_v=mu_v_next, mu_c=mu_c_next, mu_l=mu_l,
                     mu_l_tilde=mu_l_tilde, mu_delta=mu_l_tilde - mu_l)


def _logit(tau):
    return math.log(tau / (1.0 - tau))


def density_p0(tau, mu_l, jacobian=True):
    """Density of P0 = p0(L) at tau for L ~ N(mu_l, 2 mu_l).

    With jacobian=True this is the true pushforward density
    f_L(logit tau) / (tau (1 - tau)); jacobian=False drops the factor.
    """
    if not 0.0 < tau < 1.0:
        raise ValueError("tau must lie in (0, 1)")
    x = _logit(tau)
    f_l = norm.pdf(x, loc=mu_l, scale=math.sqrt(2.0 * mu_l))
    if jacobian:
        return float(f_l / (tau * (1.0 - tau)))
    return float(f_l)


def pr_d_ge_gamma_given_p0(tau, gamma, mu_delta):
    """Pr(|p0(L + dL) - tau| >= gamma) for dL ~ N(mu_delta, 2 mu_delta)."""
    if not 0.0 < tau < 1.0:
        raise ValueError("tau must lie in (0, 1)")
    if not 0.0 <= gamma < 1.0:
        raise ValueError("gamma must lie in [0, 1)")
    if mu_delta <= 0:
        raise ValueError("mu_delta must be positive")
    t = _logit(tau)
    s = math.sqrt(2.0 * mu_delta)
    lo = tau - gamma
    hi = tau + gamma
    if lo <= 0.0:
        below = 0.0
    else:
        below = 1.0 - norm.sf((_logit(lo) - t - mu_delta) / s)
    if hi >= 1.0:
        above = 0.0
    else:
        above = norm.sf((_logit(hi) - t - mu_delta) / s)
    return float(min(1.0, below + above))


_TINY = 1e-300


def j_gamma(gamma, mu_l, mu_delta, jacobian=True):
    """Conditional innovation ratio

        J(gamma) = Pr(D >= gamma | wrong decision-side numerator region)
                   over the complementary region,

    evaluated as the ratio of two integrals of
    Pr(D >= gamma | P0 = tau) f_P0(tau). With the Jacobian-corrected density
    the integrals are computed in L-space (exact change of variables); the
    literal-density variant integrates in tau-space.
    """
    if not 0.0 <= gamma < 1.0:
        raise ValueError("gamma must lie in [0, 1)")
    if gamma == 0.0:
        # Pr(D >= 0) = 1: the ratio reduces to Pr(P0 >= 1/2)/Pr(P0 < 1/2)
        s = math.sqrt(2.0 * mu_l)
        num = norm.sf(-mu_l / s)
        den = 1.0 - num
        if den < _TINY:
            return math.inf
        return float(num / den)
    num_lo, num_hi = max(gamma, 0.5), 1.0
    den_lo, den_hi = 0.0, min(1.0 - gamma, 0.5)
    if jacobian:
        s = math.sqrt(2.0 * mu_l)

        def integrand(x):
            tau = 1.0 / (1.0 + math.exp(-x)) if x >= 0 else \
                math.exp(x) / (1.0 + math.exp(x))
            if tau <= 0.0 or tau >= 1.0:
                return 0.0
            return pr_d_ge_gamma_given_p0(tau, gamma, mu_delta) * \
                norm.pdf(x, loc=mu_l, scale=s)

        num, _ = integrate.quad(integrand, _logit(num_lo) if num_lo > 0 else
                                -np.inf, np.inf, limit=200)
        den, _ = integrate.quad(integrand, -np.inf, _logit(den_hi), limit=200)
    else:
        def integrand(tau):
            return pr_d_ge_gamma_given_p0(tau, gamma, mu_delta) * \
                density_p0(tau, mu_l, jacobian=False)

        num, _ = integrate.quad(integrand, num_lo, num_hi, limit=200)
        den, _ = integrate.quad(integrand, den_lo, den_hi, limit=200)
    if den < _TINY:
        return math.inf
    return float(num / den)


def f_gamma(gamma, p0, mu_l_tilde):
    """Odds ratio F(gamma) = Q(g1)/Q(g2) for an incorrect decision at p0.

    Returns inf for gamma >= p0 (the downward band leaves (0, 1))."""
    if not 0.0 < p0 < 0.5:
        raise ValueError("p0 must lie in (0, 0.5)")
    if mu_l_tilde <= 0:
        raise ValueError("mu_l_tilde must be positive")
    if not 0.0 <= gamma < 1.0:
        raise ValueError("gamma must lie in [0, 1)")
    if gamma >= p0:
        return math.inf
    s = math.sqrt(2.0 * mu_l_tilde)
    g1 = (_logit(p0 + gamma) - mu_l_tilde) / s
    g2 = (mu_l_tilde - _logit(p0 - gamma)) / s
    q2 = norm.sf(g2)
    if q2 < _TINY:
        return math.inf
    return float(norm.sf(g1) / q2)


def verify_properties(ensemble, gamma_grid, iterations, f_ref_p0=0.3,
                      jacobian=True):
    """Run the recursion and check the two monotonicity claims numerically.

    Returns {"rows": [...], "violations": [...], "not_applicable": [...]}.
    Each row carries (iteration, gamma, J_value, F_value, mu_v, mu_c, mu_l,
    mu_delta); F uses the fixed reference p0.
    """
    states = ga_de_trajectory(ensemble, iterations)
    rows = []
    violations = []
    not_applicable = []
    for st in states:
        if st.mu_delta <= 0:
            not_applicable.append(
                f"iteration {st.iteration}: mu_delta={st.mu_delta:.3g} <= 0, "
                "J monotonicity not applicable")
            continue
        prev_j = None
        for gamma in gamma_grid:
            jv = j_gamma(gamma, st.mu_l, st.mu_delta, jacobian=jacobian)
            fv = f_gamma(gamma, f_ref_p0, st.mu_l_tilde) \
                if gamma < f_ref_p0 else math.inf
            rows.append({"iteration": st.iteration, "gamma": gamma,
                         "J_value": jv, "F_value": fv, "mu_v": st.mu_v,
                         "mu_c": st.mu_c, "mu_l": st.mu_l,
                         "mu_delta": st.mu_delta})
            if prev_j is not None and math.isfinite(jv) \
                    and math.isfinite(prev_j) and not jv < prev_j:
                violations.append(
                    f"iteration {st.iteration}: J({gamma}) = {jv:.6g} not "
                    f"below previous {prev_j:.6g}")
            prev_j = jv
        prev_f = None
        for gamma in gamma_grid:
            if gamma >= f_ref_p0:
                continue
            fv = f_gamma(gamma, f_ref_p0, st.mu_l_tilde)
            if not fv > 1.0:
                violations.append(
                    f"iteration {st.iteration}: F({gamma}) = {fv:.6g} <= 1")
            if prev_f is not None and math.isfinite(fv) and not fv > prev_f:
                violations.append(
                    f"iteration {st.iteration}: F({gamma}) = {fv:.6g} not "
                    f"above previous {prev_f:.6g}")
            prev_f = fv
    return {"rows": rows, "violations": violations,
            "not_applicable": not_applicable}
