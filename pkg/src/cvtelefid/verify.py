"""Named verification checks run by ``cvtelefid verify``.

Each check returns a ``CheckResult``; numerical-accuracy exceptions are caught
and reported as failures. Quadrature-based checks start at the configured
Gauss-Hermite order and double it (up to ``MAX_ORDER``) until successive
orders agree to a tenth of the check's tolerance, so the pass set does not
hinge on the starting order; the starting-order error estimate is reported.
"""

from __future__ import annotations

import math
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from . import analytics
from .channels import (
    GaussianNoiseChannel,
    TeleportationSetup,
    apply_noise,
    simulate_teleportation_channel,
    suggested_teleport_cutoff,
)
from .config import RunConfig
from .curves import check_curve, fig1_curve
from .entfid import (
    ecs_purification,
    entanglement_fidelity_brute,
    entanglement_fidelity_overlap,
    overlap_converged_order,
    purification_independence_check,
    qubit_purification,
)
from .errors import CVTeleFidError
from .fock import (
    DensityMatrix,
    FockSpace,
    FockVector,
    coherent_state,
    displacement_operator,
    fidelity_pure_mixed,
    trace_distance,
)

MAX_ORDER = 160
SCALING_TARGET = 0.5
SCALING_TARGET_ALT = 0.75


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str = ""
    seconds: float = 0.0
    data: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return asdict(self)


def _adaptive(fn, order: int, tol: float):
    """Evaluate ``fn(order)`` at doubling orders until successive results agree.

    Returns ``(value, order_used, first_estimate)``; values may be arrays.
    """
    value = fn(order)
    first = None
    while 2 * order <= MAX_ORDER:
        fine = fn(2 * order)
        diff = float(np.max(np.abs(np.asarray(fine) - np.asarray(value))))
        if first is None:
            first = 0.5 * diff
        order, value = 2 * order, fine
        if diff < 0.1 * tol:
            break
    return value, order, first if first is not None else 0.0


# ---------------------------------------------------------------------------
# individual checks; each returns (passed, detail, data)


def check_eq11(config: RunConfig):
    space = FockSpace(config.cutoff)
    worst, est0, orders = 0.0, 0.0, []
    for sigma in (0.01, 0.1, 0.5, 1.0):
        for alpha in (0.0, 1.0, 2.0):
            psi = coherent_state(alpha, space, tail_tol=config.tol("tail_tol"))

            def run(order, psi=psi, sigma=sigma):
                ch = GaussianNoiseChannel.gaussian(sigma, order)
                return fidelity_pure_mixed(psi, apply_noise(ch, psi.density(), trace_tol=config.tol("trace_tol")))

            value, order, est = _adaptive(run, config.gh_order, 1e-6)
            worst = max(worst, abs(value - 1.0 / (1.0 + sigma)))
            est0, orders = max(est0, est), orders + [order]
    return worst < 1e-6, f"max |F - 1/(1+sigma)| = {worst:.3g}", {"max_error": worst,
                                                                    "est_error_start": est0,
                                                                    "orders": sorted(set(orders))}


def check_ecs_three_way(config: RunConfig):
    gamma = ecs_purification(2, -2, FockSpace(config.cutoff_two_mode), tail_tol=config.tol("tail_tol"))
    spec = analytics.ECSSpec(2, -2)
    closed_tol = max(1e-4, 10 * math.exp(-16))
    rows, ok = [], True
    for sigma in (0.05, 0.1, 0.5, 1.0):
        closed = analytics.ecs_entanglement_fidelity(spec, sigma)
        exact = entanglement_fidelity_overlap(2, -2, sigma, order=config.gh_order)
        order = max(config.gh_order, overlap_converged_order(2, -2, sigma, order=config.gh_order,
                                                             tol=1e-9, max_order=MAX_ORDER))
        brute = entanglement_fidelity_brute(gamma, GaussianNoiseChannel.gaussian(sigma, order))
        good = abs(exact.value - closed) <= closed_tol and abs(brute.value - closed) <= 1e-3
        ok &= good
        rows.append({"sigma": sigma, "closed": closed, "exact": exact.value, "brute": brute.value,
                     "brute_order": order, "brute_est_error": brute.est_error})
    gap = max(max(abs(r["exact"] - r["closed"]), abs(r["brute"] - r["closed"])) for r in rows)
    return ok, f"max deviation from closed form {gap:.3g}", {"rows": rows}


def teleport_cases(cutoff_floor: int = 0):
    for eta in (0.0, 0.3, 0.5, 0.7):
        cutoff = max(suggested_teleport_cutoff(eta, 1.0), cutoff_floor)
        space = FockSpace(cutoff)
        inputs = {
            "vacuum": FockVector.fock(0, space),
            "fock1": FockVector.fock(1, space),
            "coherent1": coherent_state(1.0, space),
        }
        yield eta, cutoff, inputs


def check_teleport_oracle(config: RunConfig):
    rows, worst = [], 0.0
    for eta, cutoff, inputs in teleport_cases():
        sigma_eta = analytics.sigma_from_squeezing(eta)
        setup = TeleportationSetup(eta, cutoff, order=config.gh_order)
        for label, psi in inputs.items():
            rho = psi.density()

            def run(order, rho=rho):
                return apply_noise(GaussianNoiseChannel.gaussian(sigma_eta, order), rho,
                                   trace_tol=config.tol("trace_tol")).elements

            target, _, _ = _adaptive(run, config.gh_order, 1e-4)
            out = simulate_teleportation_channel(setup, rho, prob_tol=config.tol("prob_tol"))
            dist = trace_distance(out, DensityMatrix(rho.space, target))
            worst = max(worst, dist)
            rows.append({"eta": eta, "input": label, "trace_distance": dist,
                         "probability_deficit": out.trace_deficit})
    return worst < 1e-3, f"max trace distance to E_sigma_eta {worst:.3g}", {"rows": rows}


def check_quduty(config: RunConfig):
    sigma = analytics.sigma_from_squeezing(0.0)
    analytic = analytics.coherent_entanglement_fidelity(sigma)
    cutoff = suggested_teleport_cutoff(0.0)
    vac = FockVector.fock(0, FockSpace(cutoff))
    out = simulate_teleportation_channel(TeleportationSetup(0.0, cutoff, order=config.gh_order), vac.density())
    simulated = fidelity_pure_mixed(vac, out)
    ok = abs(sigma - 1) < 1e-6 and abs(analytic - 0.5) < 1e-6 and abs(simulated - 0.5) < 1e-3
    return ok, f"sigma_eta={sigma}, F={analytic}, simulated F={simulated:.6f}", {"simulated": simulated}


def check_thresholds(config: RunConfig):
    f1 = analytics.coherent_entanglement_fidelity(1.0)
    f2 = analytics.coherent_entanglement_fidelity(0.5)
    ok = f1 == 0.5 and abs(f2 - 2 / 3) < 1e-15
    return ok, f"F(1)={f1}, F(1/2)={f2}", {}


def _test_states(space: FockSpace):
    return {
        "fock1": FockVector.fock(1, space).density(),
        "coherent1": coherent_state(1.0, space).density(),
        "mixture": DensityMatrix.mixture(
            [FockVector.fock(0, space), coherent_state(1j, space)], [0.3, 0.7]),
    }


def check_trace_and_hermiticity(config: RunConfig):
    space = FockSpace(config.cutoff)
    worst_tr, worst_h = 0.0, 0.0
    for sigma in (0.1, 1.0, 2.0):
        ch = GaussianNoiseChannel.gaussian(sigma, config.gh_order)
        for rho in _test_states(space).values():
            out = apply_noise(ch, rho, trace_tol=config.tol("trace_tol"), renormalize=False)
            worst_tr = max(worst_tr, abs(1.0 - out.trace()))
            worst_h = max(worst_h, out.hermiticity_defect())
    ok = worst_tr <= config.tol("trace_tol") and worst_h <= config.tol("tol_herm")
    return ok, f"trace loss {worst_tr:.3g}, Hermiticity defect {worst_h:.3g}", {
        "trace_loss": worst_tr, "hermiticity_defect": worst_h}


def check_covariance(config: RunConfig):
    space = FockSpace(config.cutoff)
    w = 0.7 - 0.4j
    d = displacement_operator(w, space).elements
    rho = _test_states(space)["mixture"]
    shifted = DensityMatrix(space, d @ rho.elements @ d.conj().T)

    def run(order):
        ch = GaussianNoiseChannel.gaussian(0.5, order)
        left = apply_noise(ch, shifted, trace_tol=config.tol("trace_tol")).elements
        right = d @ apply_noise(ch, rho, trace_tol=config.tol("trace_tol")).elements @ d.conj().T
        return left - right

    gap, order, _ = _adaptive(lambda o: float(np.max(np.abs(run(o)))), config.gh_order, 1e-6)
    return gap < 1e-6, f"max |E(D rho D+) - D E(rho) D+| = {gap:.3g}", {"order": order}


def check_semigroup(config: RunConfig):
    rho = FockVector.fock(1, FockSpace(min(config.cutoff, 40))).density()

    def run(order):
        half = GaussianNoiseChannel.gaussian(0.25, order)
        twice = apply_noise(half, apply_noise(half, rho))
        once = apply_noise(GaussianNoiseChannel.gaussian(0.5, order), rho)
        split = apply_noise(GaussianNoiseChannel.gaussian(0.2, order),
                            apply_noise(GaussianNoiseChannel.gaussian(0.3, order), rho))
        return np.array([np.max(np.abs(twice.elements - once.elements)),
                         np.max(np.abs(split.elements - once.elements))])

    gaps, order, est = _adaptive(run, config.gh_order, 1e-6)
    gap = float(np.max(gaps))
    return gap < 1e-6, f"max |E_a(E_b(rho)) - E_(a+b)(rho)| = {gap:.3g}", {"order": order,
                                                                           "est_error_start": est}


def check_purification_independence(config: RunConfig):
    space = FockSpace(config.cutoff_two_mode)
    qubit = qubit_purification([2, -2], [0.5, 0.5], space, tail_tol=config.tol("tail_tol"))
    # embed the qubit ancilla into a Fock mode: |0> -> |3>, |1> -> (|1> + i|6>)/sqrt(2)
    iso = np.zeros((space.levels, 2), dtype=complex)
    iso[3, 0] = 1.0
    iso[1, 1] = 1 / math.sqrt(2)
    iso[6, 1] = 1j / math.sqrt(2)
    fock_ancilla = qubit.with_isometry(iso)
    ch = GaussianNoiseChannel.gaussian(0.3, config.gh_order)
    report = purification_independence_check(qubit.reduced_state(), [qubit, fock_ancilla], ch)
    ok = report.consistent and report.max_gap <= 1e-8
    return ok, f"F_e gap between purifications {report.max_gap:.3g}", report.as_dict()


def check_average_fidelity(config: RunConfig):
    sigma = analytics.sigma_from_average_fidelity(0.58)
    return abs(sigma - 0.724) <= 1e-3, f"F=0.58 -> sigma={sigma:.6f}", {"sigma": sigma}


def check_required_squeezing(config: RunConfig):
    s2 = analytics.required_sigma_for_ecs_fidelity(analytics.ECSSpec.symmetric(2), 0.5)
    s10 = analytics.required_sigma_for_ecs_fidelity(analytics.ECSSpec.symmetric(10), 0.5)
    db2, db10 = analytics.squeezing_db(s2), analytics.squeezing_db(s10)
    ok = abs(db2 - 8.5) <= 0.1 and abs(s10 - 0.0113) <= 5e-4
    return ok, f"alpha=2: sigma={s2:.5f} ({db2:.3f} dB); alpha=10: sigma={s10:.5f} ({db10:.3f} dB)", {
        "sigma_alpha2": s2, "db_alpha2": db2, "sigma_alpha10": s10, "db_alpha10": db10}


def scaling_products(target: float = SCALING_TARGET):
    out = {}
    for a in (2, 4, 6, 8, 10):
        sigma = analytics.required_sigma_for_ecs_fidelity(analytics.ECSSpec.symmetric(a), target)
        out[a] = sigma * a * a
    return out


def check_scaling(config: RunConfig):
    prods = scaling_products()
    ratio = max(prods.values()) / min(prods.values())
    alt = scaling_products(SCALING_TARGET_ALT)
    ratio_alt = max(alt.values()) / min(alt.values())
    return ratio < 1.6, (f"target {SCALING_TARGET}: max/min sigma*n = {ratio:.4f} "
                         f"(at target {SCALING_TARGET_ALT} the ratio is {ratio_alt:.4f})"), {
        "products": {str(k): v for k, v in prods.items()}, "ratio": ratio, "ratio_alt": ratio_alt}


def check_fig1(config: RunConfig):
    problems = []
    curves = {}
    for alpha, threshold in ((2.0, 0.3), (10.0, 0.02)):
        pts = fig1_curve(alpha, 1.0, 21 if alpha == 2 else 51, config, brute=False)
        curves[alpha] = pts
        problems += check_curve(pts)
        last = pts[-1]
        if not last.fe_coherent <= 0.55:
            problems.append(f"alpha={alpha}: coherent fidelity {last.fe_coherent} at sigma=1")
        for p in pts:
            if p.sigma >= threshold - 1e-12:
                for value in (p.fe_ecs_closed, p.fe_ecs_exact):
                    if abs(value - 0.5 * p.fe_coherent) > 0.02:
                        problems.append(f"alpha={alpha}, sigma={p.sigma}: ECS {value} not near half of CS")
    return not problems, "; ".join(problems) or "curves monotone, CS(1)=0.5, ECS -> CS/2", {}


CHECKS = {
    "eq11_coherent_fidelity": check_eq11,
    "ecs_three_way_agreement": check_ecs_three_way,
    "teleportation_channel_oracle": check_teleport_oracle,
    "quduty": check_quduty,
    "threshold_boundaries": check_thresholds,
    "fig1_qualitative": check_fig1,
    "required_squeezing": check_required_squeezing,
    "scaling_law": check_scaling,
    "channel_trace_hermiticity": check_trace_and_hermiticity,
    "displacement_covariance": check_covariance,
    "semigroup_composition": check_semigroup,
    "purification_independence": check_purification_independence,
    "average_fidelity_inversion": check_average_fidelity,
}


def run_check(name: str, config: RunConfig) -> CheckResult:
    start = time.perf_counter()
    try:
        passed, detail, data = CHECKS[name](config)
    except CVTeleFidError as exc:
        passed, detail, data = False, f"{type(exc).__name__}: {exc}", {"error": type(exc).__name__}
    return CheckResult(name, bool(passed), detail, time.perf_counter() - start, data)


def run_suite(config: RunConfig, names=None) -> list[CheckResult]:
    names = list(CHECKS) if names is None else list(names)
    unknown = [n for n in names if n not in CHECKS]
    if unknown:
        raise ValueError(f"unknown checks: {', '.join(unknown)}")
    return [run_check(name, config) for name in names]
