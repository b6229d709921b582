"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the lines as the
criteria execute. Monte Carlo criteria use common random numbers (one shared
seed per comparison) so orderings are measured, not sampled.
"""

import dataclasses
import io
import math
from contextlib import redirect_stdout

import numpy as np

from satqkd import (
    aperture_transmittance,
    average_key_rate,
    BeamVector,
    estimate_pdt,
    ext_b92_key_rate,
    ext_b92_qber,
    bb84_qber,
    Bb84Params,
    binary_entropy,
    depolarizing_stats,
    emit_records,
    eve_bound_terms,
    joint_distribution,
    max_noise,
    noise_tolerance,
    parse_config,
    run_sweep,
    scene_from_preset,
    shannon_entropy,
    theta_law,
    beam_moments,
    sample_beam_vectors,
    von_neumann_lower_bound,
)
from conftest import bb84_rate, riemann_transmittance

DIMENSIONS = (2, 4, 8, 16, 32)
SEED = 20240917


def check(criterion: str, ok: bool, detail: str) -> None:
    print(f"[{criterion}] {'PASS' if ok else 'FAIL'}: {detail}")
    assert ok, f"{criterion}: {detail}"


def test_criterion_1_ext_b92_noiseless_rate():
    rates = {d: ext_b92_key_rate(d, 0.0, 1.0) for d in DIMENSIONS}
    detail = ", ".join(f"d={d}: {r:.6f}" for d, r in rates.items())
    check("criterion 1", all(abs(r - 0.68872) <= 1e-4 for r in rates.values()),
          f"noiseless rate vs 0.68872 +- 1e-4 -> {detail}")


def test_criterion_2_bb84_noise_tolerances():
    tol2 = noise_tolerance(lambda q: bb84_rate(2, q), 2)
    tol32 = noise_tolerance(lambda q: bb84_rate(32, q), 32)
    check("criterion 2",
          abs(tol2 - 0.1100) <= 0.001 and abs(tol32 - 0.3217) <= 0.002,
          f"d=2: {tol2:.5f} (want 0.1100 +- 0.001), d=32: {tol32:.5f} (want 0.3217 +- 0.002)")


def test_criterion_3_ext_b92_tolerances():
    tols = [noise_tolerance(lambda q, d=d: ext_b92_key_rate(d, q), d) for d in DIMENSIONS]
    monotone = all(a <= b + 1e-9 for a, b in zip(tols, tols[1:]))
    detail = ", ".join(f"d={d}: {t:.4f}" for d, t in zip(DIMENSIONS, tols))
    check("criterion 3",
          monotone and 0.06 <= tols[0] <= 0.08 and 0.09 <= tols[-1] <= 0.11,
          f"monotone={monotone}; {detail} (d=2 in [0.06,0.08], d=32 in [0.09,0.11])")


def test_criterion_4_quadrature_oracle():
    # circular closed form, 20-point grid, 1e-5 relative
    width = 0.8
    worst_rel = 0.0
    for i in range(20):
        r_ap = 0.05 + 0.15 * i
        for chi in (1.0, 0.4966):
            expected = chi * (1.0 - math.exp(-2.0 * r_ap**2 / width**2))
            beam = BeamVector(x0=0.0, y0=0.0, W1=width, W2=width, phi_rel=0.1)
            value = aperture_transmittance(beam, r_ap, chi)
            worst_rel = max(worst_rel, abs(value - expected) / expected)
    # Cartesian Riemann oracle at 2000^2, 200 random elliptic beams, 1e-4
    rng = np.random.default_rng(SEED)
    worst_abs = 0.0
    for _ in range(200):
        w1, w2 = rng.uniform(0.3, 2.0, 2)
        rho0 = rng.uniform(0.0, 1.5)
        angle = rng.uniform(0.0, 2.0 * math.pi)
        x0, y0 = rho0 * math.cos(angle), rho0 * math.sin(angle)
        phi = rng.uniform(0.0, math.pi / 2.0)
        ours = aperture_transmittance(BeamVector(x0, y0, w1, w2, phi), 1.0)
        oracle = riemann_transmittance(x0, y0, w1, w2, phi, 1.0, n_grid=2000)
        worst_abs = max(worst_abs, abs(ours - oracle))
    check("criterion 4", worst_rel <= 1e-5 and worst_abs <= 1e-4,
          f"closed-form worst rel err {worst_rel:.2e} (<=1e-5); "
          f"Riemann worst abs err {worst_abs:.2e} (<=1e-4)")


def test_criterion_5_downlink_day1_rates_and_ratio():
    scene = scene_from_preset("downlink", "day1", pointing_model="off")
    pdt = estimate_pdt(scene, 10_000, 100, seed=SEED)
    rate_bb = average_key_rate(pdt, bb84_rate, 32, 0.0)
    rate_eb = average_key_rate(pdt, ext_b92_key_rate, 32, 0.0)
    ratio = rate_bb / rate_eb
    ok = (abs(rate_bb - 1.2) <= 0.2 and abs(rate_eb - 0.169) <= 0.03
          and abs(ratio - 7.26) <= 0.15)
    # the ratio must survive every pointing model and extinction choice
    ratio_details = []
    for pointing in ("off", "alpha_L_squared", "alpha_sq_L", "literal_alpha_L"):
        for beta in (0.0, 0.7, 1.4):
            variant = scene_from_preset("downlink", "day1",
                                        pointing_model=pointing, beta=beta)
            vpdt = estimate_pdt(variant, 2000, 100_000, seed=SEED)
            vratio = (average_key_rate(vpdt, bb84_rate, 32, 0.0)
                      / average_key_rate(vpdt, ext_b92_key_rate, 32, 0.0))
            ratio_details.append(vratio)
            ok = ok and abs(vratio - 7.26) <= 0.15
    check("criterion 5", ok,
          f"bb84 {rate_bb:.4f} (1.2 +- 0.2), ext_b92 {rate_eb:.4f} (0.169 +- 0.03), "
          f"ratio {ratio:.4f}; variant ratios "
          f"{min(ratio_details):.4f}..{max(ratio_details):.4f} (7.26 +- 0.15)")


def test_criterion_6_uplink_day1_rates():
    scene = scene_from_preset("uplink", "day1")
    # fine bins: up-link transmittances sit at ~2e-3, far below a 1/100 bin
    pdt = estimate_pdt(scene, 10_000, 1_000_000, seed=SEED)
    rate_bb = average_key_rate(pdt, bb84_rate, 32, 0.0)
    rate_eb = average_key_rate(pdt, ext_b92_key_rate, 32, 0.0)
    check("criterion 6",
          0.004 <= rate_bb <= 0.012 and 0.0006 <= rate_eb <= 0.0018,
          f"bb84 {rate_bb:.5f} (0.008 +- 50%), ext_b92 {rate_eb:.5f} (0.0012 +- 50%)")


def _mean_eta(direction: str, weather: str, **overrides) -> float:
    scene = scene_from_preset(direction, weather, **overrides)
    return estimate_pdt(scene, 10_000, 1_000_000, seed=SEED).mean_eta


def test_criterion_7_direction_and_uplink_weather_orderings():
    down_day1 = _mean_eta("downlink", "day1", pointing_model="off")
    up = {w: _mean_eta("uplink", w) for w in ("day1", "day2", "night2")}
    ok_direction = down_day1 > up["day1"]
    ok_uplink = up["day1"] > up["day2"] > up["night2"]
    check("criterion 7 (direction + up-link)", ok_direction and ok_uplink,
          f"down day1 {down_day1:.4f} > up day1 {up['day1']:.6f}; "
          f"up-link day1 {up['day1']:.6f} > day2 {up['day2']:.6f} > "
          f"night2 {up['night2']:.6f}")


def test_criterion_7_downlink_weather_ordering():
    # Known defect: day3 and night2 land in a statistical dead heat with
    # night2 marginally ahead (about 0.1% relative, every seed and pointing
    # model), so the asserted day3 > night2 link does not hold in this
    # model. Kept faithful to the stated ordering rather than weakened.
    order = ("day1", "night1", "day2", "day3", "night2", "night3")
    means = {w: _mean_eta("downlink", w, pointing_model="off") for w in order}
    pairs = list(zip(order, order[1:]))
    failures = [f"{a} ({means[a]:.5f}) <= {b} ({means[b]:.5f})"
                for a, b in pairs if not means[a] > means[b]]
    detail = " > ".join(f"{w}={means[w]:.5f}" for w in order)
    check("criterion 7 (down-link weather)", not failures,
          detail + (f"; violated: {', '.join(failures)}" if failures else ""))


def test_criterion_8_statistical_and_structural_suite():
    results = []

    # PDT normalization
    scene = scene_from_preset("downlink", "day1", pointing_model="off")
    pdt = estimate_pdt(scene, 4000, 100, seed=SEED)
    results.append(("pdt normalization", abs(pdt.probabilities.sum() - 1.0) <= 1e-9))

    # moment round-trip at 1e6 samples, within 3 standard errors
    moments = beam_moments(scene_from_preset("uplink", "day1"))
    law = theta_law(moments)
    n = 1_000_000
    batch = sample_beam_vectors(law, moments.var_centroid, n, np.random.default_rng(SEED))
    w1_sq = batch.W1**2
    w2_sq = batch.W2**2
    mean_ok = abs(w1_sq.mean() - moments.mean_W2) <= 3 * w1_sq.std(ddof=1) / math.sqrt(n)
    centered1 = w1_sq - w1_sq.mean()
    centered2 = w2_sq - w2_sq.mean()
    var_prod = centered1 * centered1
    cov_prod = centered1 * centered2
    var_ok = abs(var_prod.mean() - moments.cov_W2[0, 0]) <= 3 * var_prod.std(ddof=1) / math.sqrt(n)
    cov_ok = abs(cov_prod.mean() - moments.cov_W2[0, 1]) <= 3 * cov_prod.std(ddof=1) / math.sqrt(n)
    results.append(("moment round-trip (3 SE at 1e6)", mean_ok and var_ok and cov_ok))

    # seed determinism, byte-exact through emission
    config_text = (
        '{"protocol": "both", "sweep": "zenith", "d_list": [32], "q_list": [0.0],'
        ' "zenith_grid": [0.0, 30.0], "n_samples": 500, "n_bins": 1000, "seed": 77,'
        ' "scene": {"direction": "downlink", "weather": "day1",'
        ' "pointing_model": "off"}}'
    )
    payloads = []
    for _ in range(2):
        buffer = io.StringIO()
        with redirect_stdout(buffer):
            emit_records(run_sweep(parse_config(config_text)), "csv", None)
        payloads.append(buffer.getvalue())
    results.append(("seed determinism byte-exact", payloads[0] == payloads[1]))

    # monotone rate decrease in q (closed form) and in zenith angle (MC)
    q_grid = [0.0, 0.02, 0.04, 0.06, 0.08]
    eb_rates = [ext_b92_key_rate(32, q) for q in q_grid]
    bb_grid = [0.0, 0.08, 0.16, 0.24, 0.32]
    bb_rates = [bb84_rate(32, q) for q in bb_grid]
    results.append(("rate monotone in q",
                    all(a > b for a, b in zip(eb_rates, eb_rates[1:]))
                    and all(a > b for a, b in zip(bb_rates, bb_rates[1:]))))
    zenith_rates = []
    for j, zenith_deg in enumerate((0.0, 20.0, 40.0, 60.0, 80.0)):
        z_scene = dataclasses.replace(scene, zenith=math.radians(zenith_deg))
        z_pdt = estimate_pdt(z_scene, 4000, 100_000, seed=SEED)
        zenith_rates.append(average_key_rate(z_pdt, bb84_rate, 32, 0.0))
    results.append(("rate monotone in zenith",
                    all(a > b for a, b in zip(zenith_rates, zenith_rates[1:]))))

    # entropy symmetry and bound properties
    rng = np.random.default_rng(SEED)
    symmetry = all(
        abs(binary_entropy(p) - binary_entropy(1.0 - p)) <= 1e-12
        for p in rng.uniform(0.0, 1.0, 200)
    )
    two_point = all(
        abs(binary_entropy(p) - shannon_entropy((p, 1.0 - p))) <= 1e-12
        for p in rng.uniform(0.0, 1.0, 50)
    )
    bounds_ok = True
    for _ in range(200):
        d = int(rng.choice(DIMENSIONS))
        q = float(rng.uniform(0.0, max_noise(d)))
        stats = depolarizing_stats(d, q)
        bound = von_neumann_lower_bound(eve_bound_terms(stats))
        joint = joint_distribution(stats)
        total = joint.p00 + joint.p01 + joint.p10 + joint.p11
        bounds_ok = bounds_ok and 0.0 <= bound <= 1.0 and abs(total - 1.0) <= 1e-9
        bounds_ok = bounds_ok and 0.0 <= bb84_qber(Bb84Params(d, q)) <= 0.5
        bounds_ok = bounds_ok and 0.0 <= ext_b92_qber(d, q) <= 1.0
    results.append(("entropy symmetry and bound properties",
                    symmetry and two_point and bounds_ok))

    detail = "; ".join(f"{name}: {'ok' if ok else 'FAIL'}" for name, ok in results)
    check("criterion 8", all(ok for _, ok in results), detail)
