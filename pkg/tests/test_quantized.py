"""Angle-quantization estimator: scan, sign tests, elevation, worked cases."""

import cmath
import math

import numpy as np
import pytest

from ucadoa import (
    ArrayConfig,
    AzimuthBranch,
    DegenerateInputError,
    EstimationMethod,
    NoiseModel,
    SnapshotSet,
    SourceTruth,
    Waveform,
    antipodal_pair_scan,
    estimate_quantized,
    exact_covariance,
    resolve_azimuth,
    resolve_elevation,
    sample_covariance,
    synthesize_snapshots,
    wrapped_difference,
)

TAU = 2 * math.pi


def deg(x):
    return math.radians(x)


def noiseless(cfg, azimuth_deg, elevation_deg, power=1.0, waveform=Waveform.CONSTANT_AMPLITUDE):
    src = SourceTruth(deg(azimuth_deg), deg(elevation_deg), power, waveform)
    return synthesize_snapshots(src, cfg, NoiseModel.uniform(0.0, cfg.n_sensors), 1, seed=0)


def candidate_grid(cfg):
    # independent oracle: the N azimuth candidates theta_i +/- pi/2, wrapped
    thetas = TAU * np.arange(cfg.n_sensors // 2) / cfg.n_sensors
    grid = np.concatenate([thetas + math.pi / 2, thetas - math.pi / 2]) % TAU
    return np.unique(grid)


def test_scan_matches_per_pair_sample_covariances():
    cfg = ArrayConfig(16, 0.25)
    src = SourceTruth(deg(200), deg(50), 2.0)
    snaps = synthesize_snapshots(src, cfg, NoiseModel.uniform(1.0, 16), 30, seed=8)
    _, pair_covs = antipodal_pair_scan(snaps, cfg)
    assert len(pair_covs) == 8
    for k in range(1, 9):
        assert pair_covs[k - 1] == pytest.approx(
            sample_covariance(k, k + 8, snaps).value, abs=1e-12
        )


def test_scan_finds_on_grid_pair_exactly():
    # azimuth = theta_1 + pi/2 makes pair 1 exactly real (psi_1 = psi_5 bitwise)
    cfg = ArrayConfig(8, 0.25)
    snaps = noiseless(cfg, 90.0, 30.0)
    i_star, pair_covs = antipodal_pair_scan(snaps, cfg)
    assert i_star == 1
    assert pair_covs[0].imag == 0.0


def test_scan_n8_worked_case():
    # all four pair covariances evaluated exactly: theta_{1,5} midline = 90 deg
    cfg = ArrayConfig(8, 0.25)
    snaps = noiseless(cfg, 90.0, 30.0)
    i_star, pair_covs = antipodal_pair_scan(snaps, cfg)
    src = SourceTruth(deg(90), deg(30), 1.0)
    for k in range(1, 5):
        assert pair_covs[k - 1] == pytest.approx(
            exact_covariance(k, k + 4, src, cfg), abs=1e-12
        )
    assert i_star == 1


def test_scan_tie_breaks_to_smallest_index():
    # crafted single-snapshot matrix with |Im r(1)| == |Im r(2)| bit-exactly
    cfg = ArrayConfig(8, 0.25)
    c = 0.25
    phases = np.zeros(8)
    phases[0], phases[4] = +c / 2, -c / 2  # r(1) = exp(+jc)
    phases[1], phases[5] = -c / 2, +c / 2  # r(2) = exp(-jc): same |Im|
    phases[2], phases[6] = 0.7, -0.7       # |Im r(3)| large
    phases[3], phases[7] = 0.9, -0.9       # |Im r(4)| large
    snaps = SnapshotSet(np.exp(1j * phases)[:, None])
    i_star, pair_covs = antipodal_pair_scan(snaps, cfg)
    assert abs(pair_covs[0].imag) == abs(pair_covs[1].imag)
    assert i_star == 1


def test_resolve_azimuth_n8_plus_half_pi():
    # Im r(3) = sin(-2*zeta*sin 30) < 0 selects theta_1 + pi/2 = 90 deg
    cfg = ArrayConfig(8, 0.25)
    snaps = noiseless(cfg, 90.0, 30.0)
    i_star, pair_covs = antipodal_pair_scan(snaps, cfg)
    azimuth, branch, disambig = resolve_azimuth(i_star, pair_covs, cfg)
    assert disambig.imag < 0
    assert branch is AzimuthBranch.PLUS_HALF_PI
    assert azimuth == pytest.approx(math.pi / 2, abs=1e-15)


def test_resolve_azimuth_n8_mirror_case():
    # same geometry at azimuth 270 deg flips the disambiguation sign
    cfg = ArrayConfig(8, 0.25)
    snaps = noiseless(cfg, 270.0, 30.0)
    i_star, pair_covs = antipodal_pair_scan(snaps, cfg)
    assert i_star == 1
    azimuth, branch, disambig = resolve_azimuth(i_star, pair_covs, cfg)
    assert disambig.imag > 0
    assert branch is AzimuthBranch.PLUS_THREE_HALVES_PI
    assert azimuth == pytest.approx(1.5 * math.pi, abs=1e-15)


def test_resolve_azimuth_high_index_branches():
    # i* > N/4 reads the pair a quarter turn behind with opposite signs
    cfg = ArrayConfig(8, 0.25)
    for azimuth_deg, want_branch in [(180.0, AzimuthBranch.PLUS_HALF_PI), (0.0, AzimuthBranch.MINUS_HALF_PI)]:
        snaps = noiseless(cfg, azimuth_deg, 30.0)
        i_star, pair_covs = antipodal_pair_scan(snaps, cfg)
        assert i_star == 3  # theta_3 = 90 deg, candidates 0 / 180 deg
        azimuth, branch, _ = resolve_azimuth(i_star, pair_covs, cfg)
        assert branch is want_branch
        assert wrapped_difference(azimuth, deg(azimuth_deg)) == pytest.approx(0.0, abs=1e-12)


def test_resolve_azimuth_nearest_candidate_n120():
    # brute force over the exact-covariance scan: 110 deg quantizes to 111 deg
    cfg = ArrayConfig(120, 0.25)
    snaps = noiseless(cfg, 110.0, 44.0)
    i_star, pair_covs = antipodal_pair_scan(snaps, cfg)
    assert i_star == 8
    azimuth, _, _ = resolve_azimuth(i_star, pair_covs, cfg)
    assert azimuth == pytest.approx(deg(111.0), abs=1e-12)
    grid = candidate_grid(cfg)
    nearest = grid[np.argmin(np.abs([wrapped_difference(deg(110.0), g) for g in grid]))]
    assert azimuth == pytest.approx(nearest, abs=1e-12)


def test_resolve_azimuth_validates_arguments():
    cfg = ArrayConfig(8, 0.25)
    snaps = noiseless(cfg, 90.0, 30.0)
    _, pair_covs = antipodal_pair_scan(snaps, cfg)
    with pytest.raises(ValueError):
        resolve_azimuth(0, pair_covs, cfg)
    with pytest.raises(ValueError):
        resolve_azimuth(5, pair_covs, cfg)
    with pytest.raises(ValueError):
        resolve_azimuth(1, pair_covs[:3], cfg)


def test_resolve_azimuth_zero_covariance_is_degenerate():
    # pair (3,7) averages to exactly zero: no direction information
    cfg = ArrayConfig(8, 0.25)
    x = np.ones((8, 2), dtype=complex)
    x[1] = [cmath.exp(0.3j), cmath.exp(0.3j)]
    x[3] = [cmath.exp(0.4j), cmath.exp(0.4j)]
    x[6] = [1.0, -1.0]
    snaps = SnapshotSet(x)
    i_star, pair_covs = antipodal_pair_scan(snaps, cfg)
    assert i_star == 1
    assert pair_covs[2] == 0j
    with pytest.raises(DegenerateInputError):
        resolve_azimuth(i_star, pair_covs, cfg)


def test_resolve_elevation_n8_worked_case():
    # arcsin((-2*zeta*sin 30)/(-2*zeta)) = 30 deg
    cfg = ArrayConfig(8, 0.25)
    snaps = noiseless(cfg, 90.0, 30.0)
    i_star, pair_covs = antipodal_pair_scan(snaps, cfg)
    _, branch, _ = resolve_azimuth(i_star, pair_covs, cfg)
    elevation, clamped = resolve_elevation(i_star, branch, pair_covs, cfg)
    assert elevation == pytest.approx(deg(30.0), abs=1e-12)
    assert clamped is False


def test_resolve_elevation_near_vertical_operand_reaches_one():
    # elevation -> pi/2 with on-grid azimuth drives the arcsine operand to 1
    cfg = ArrayConfig(8, 0.25)
    snaps = noiseless(cfg, 90.0, 89.9999)
    i_star, pair_covs = antipodal_pair_scan(snaps, cfg)
    _, branch, _ = resolve_azimuth(i_star, pair_covs, cfg)
    elevation, clamped = resolve_elevation(i_star, branch, pair_covs, cfg)
    assert elevation == pytest.approx(deg(89.9999), abs=1e-6)
    assert clamped is False


def test_resolve_elevation_clamps_operand_above_one():
    # with 2*zeta < pi a perturbed argument can exceed the arcsine domain:
    # craft |arg| = 1.02 * 2*zeta on the disambiguation pair
    cfg = ArrayConfig(8, 0.2)  # zeta = 0.4*pi
    target = -1.02 * 2.0 * cfg.zeta
    phases = np.zeros(8)
    phases[1], phases[5] = 0.5, -0.5
    phases[3], phases[7] = 0.7, -0.7
    phases[2], phases[6] = target / 2, -target / 2  # r(3) = exp(j*target)
    snaps = SnapshotSet(np.exp(1j * phases)[:, None])
    i_star, pair_covs = antipodal_pair_scan(snaps, cfg)
    assert i_star == 1
    _, branch, _ = resolve_azimuth(i_star, pair_covs, cfg)
    assert branch is AzimuthBranch.PLUS_HALF_PI
    elevation, clamped = resolve_elevation(i_star, branch, pair_covs, cfg)
    assert clamped is True
    assert elevation == math.pi / 2


def test_resolve_elevation_clamps_negative_operand_to_zero():
    # sign-flipped argument (wrong-side noise) floors the elevation at 0
    cfg = ArrayConfig(8, 0.2)
    target = +0.3  # positive argument where the branch expects negative
    phases = np.zeros(8)
    phases[1], phases[5] = 0.5, -0.5
    phases[3], phases[7] = 0.7, -0.7
    phases[2], phases[6] = target / 2, -target / 2
    snaps = SnapshotSet(np.exp(1j * phases)[:, None])
    i_star, pair_covs = antipodal_pair_scan(snaps, cfg)
    _, branch, _ = resolve_azimuth(i_star, pair_covs, cfg)
    assert branch is AzimuthBranch.PLUS_THREE_HALVES_PI
    # that branch divides by +2*zeta; drive the -2*zeta case directly
    elevation, clamped = resolve_elevation(1, AzimuthBranch.PLUS_HALF_PI, pair_covs, cfg)
    assert clamped is True
    assert elevation == 0.0


def test_estimate_quantized_n120_noiseless():
    cfg = ArrayConfig(120, 0.25)
    snaps = noiseless(cfg, 110.0, 44.0)
    est = estimate_quantized(snaps, cfg)
    assert est.method is EstimationMethod.QUANTIZED
    assert abs(wrapped_difference(est.azimuth, deg(110.0))) <= math.pi / 120
    assert abs(est.elevation - deg(44.0)) < deg(0.2)
    assert est.diagnostics.i_star == 8
    assert est.diagnostics.clamped is False


def test_estimate_quantized_n8_exact():
    cfg = ArrayConfig(8, 0.25)
    est = estimate_quantized(noiseless(cfg, 90.0, 30.0), cfg)
    assert est.azimuth == pytest.approx(deg(90.0), abs=1e-15)
    assert est.elevation == pytest.approx(deg(30.0), abs=1e-12)


def test_estimate_quantized_on_grid_azimuth_is_exact():
    # zero quantization error case: azimuth on the candidate grid
    cfg = ArrayConfig(120, 0.25)
    est = estimate_quantized(noiseless(cfg, 111.0, 44.0), cfg)
    assert wrapped_difference(est.azimuth, deg(111.0)) == pytest.approx(0.0, abs=1e-12)
    assert est.elevation == pytest.approx(deg(44.0), abs=1e-9)


def test_estimate_uses_scanned_covariance_for_disambiguation():
    cfg = ArrayConfig(120, 0.25)
    snaps = noiseless(cfg, 110.0, 44.0)
    i_star, pair_covs = antipodal_pair_scan(snaps, cfg)
    _, _, disambig = resolve_azimuth(i_star, pair_covs, cfg)
    # i* = 8 <= N/4: the disambiguation covariance is scan entry i* + N/4
    assert disambig == complex(pair_covs[i_star + 30 - 1])


def test_azimuth_always_on_candidate_grid():
    cfg = ArrayConfig(120, 0.25)
    grid = candidate_grid(cfg)
    rng = np.random.default_rng(10)
    for _ in range(200):
        azimuth = float(rng.uniform(0, 360))
        elevation = float(rng.uniform(1, 89))
        est = estimate_quantized(noiseless(cfg, azimuth, elevation), cfg)
        assert min(abs(wrapped_difference(est.azimuth, g)) for g in grid) < 1e-9


def guaranteed_elevation_ceiling(cfg):
    """Largest elevation at which the argmin provably finds a quadrature pair.

    The pair phase difference -2*zeta*sin(el)*cos(azimuth - theta_i) stays
    below pi in magnitude, but |Im{r}| is small both near 0 and near +/-pi,
    so an axis-aligned pair can masquerade as real once
    2*zeta*sin(el)*(sin(pi/N) + cos(pi/N)) >= pi. Below the returned
    elevation the quadrature pair always wins.
    """
    n = cfg.n_sensors
    operand = math.pi / (2 * cfg.zeta * (math.sin(math.pi / n) + math.cos(math.pi / n)))
    return math.pi / 2 if operand >= 1.0 else math.asin(operand)


def test_noiseless_quantization_bound_inside_guaranteed_region():
    # |azimuth error| <= pi/N wherever the quadrature scan is guaranteed
    cfg = ArrayConfig(120, 0.25)
    ceiling = math.degrees(guaranteed_elevation_ceiling(cfg)) - 1.0
    rng = np.random.default_rng(11)
    for _ in range(400):
        azimuth = float(rng.uniform(0, 360))
        elevation = float(rng.uniform(0.5, ceiling))
        est = estimate_quantized(noiseless(cfg, azimuth, elevation), cfg)
        assert abs(wrapped_difference(est.azimuth, deg(azimuth))) <= math.pi / 120 + 1e-12


def test_noiseless_quantization_bound_all_elevations_below_quarter_ratio():
    # at R/lambda = 0.24 the ceiling exceeds pi/2: the bound holds everywhere
    cfg = ArrayConfig(120, 0.24)
    assert guaranteed_elevation_ceiling(cfg) == math.pi / 2
    rng = np.random.default_rng(13)
    for _ in range(400):
        azimuth = float(rng.uniform(0, 360))
        elevation = float(rng.uniform(0.5, 89.9))
        est = estimate_quantized(noiseless(cfg, azimuth, elevation), cfg)
        assert abs(wrapped_difference(est.azimuth, deg(azimuth))) <= math.pi / 120 + 1e-12


def test_near_vertical_scan_corruption_at_quarter_ratio():
    # known boundary behavior at zeta = pi/2: near-vertical sources make an
    # axis-aligned pair (phase difference near -pi) beat the quadrature pair,
    # so the azimuth bound genuinely fails above the ceiling
    cfg = ArrayConfig(120, 0.25)
    azimuth, elevation = 53.25, 83.1
    assert deg(elevation) > guaranteed_elevation_ceiling(cfg)
    est = estimate_quantized(noiseless(cfg, azimuth, elevation), cfg)
    assert abs(wrapped_difference(est.azimuth, deg(azimuth))) > math.pi / 120


def test_noiseless_elevation_coupling_identity():
    # sin(elevation estimate) = sin(true elevation) * cos(azimuth offset)
    cfg = ArrayConfig(120, 0.25)
    rng = np.random.default_rng(12)
    for _ in range(400):
        azimuth = float(rng.uniform(0, 360))
        elevation = float(rng.uniform(0.5, 89.5))
        est = estimate_quantized(noiseless(cfg, azimuth, elevation), cfg)
        offset = wrapped_difference(deg(azimuth), est.azimuth)
        assert math.sin(est.elevation) == pytest.approx(
            math.sin(deg(elevation)) * math.cos(offset), abs=1e-12
        )


def test_antipodal_pairs_maximize_phase_separation():
    # among pairs sharing a midline, |psi_i - psi_j| peaks at half-turn spacing
    cfg = ArrayConfig(16, 0.25)
    src = SourceTruth(deg(100.3), deg(44), 1.0)
    from ucadoa import sensor_phases

    phases = sensor_phases(src, cfg)
    # pairs (4-k, 6+k) all share the midline between sensors 4 and 6
    separations = {}
    for k in range(0, 4):
        i, j = 4 - k, 6 + k
        separations[abs(i - j)] = abs(phases[i - 1] - phases[j - 1])
    assert separations[8] == max(separations.values())  # the antipodal pair


def test_scale_invariance_power_of_two_is_bitwise():
    cfg = ArrayConfig(120, 0.25)
    src = SourceTruth(deg(110), deg(44), 10.0)
    snaps = synthesize_snapshots(src, cfg, NoiseModel.uniform(1.0, 120), 50, seed=21)
    scaled = SnapshotSet(snaps.data * 4.0)
    a = estimate_quantized(snaps, cfg)
    b = estimate_quantized(scaled, cfg)
    assert a.azimuth == b.azimuth
    assert a.elevation == b.elevation
    assert a.diagnostics.i_star == b.diagnostics.i_star
    assert a.diagnostics.branch == b.diagnostics.branch


def test_scale_invariance_generic_factor():
    cfg = ArrayConfig(120, 0.25)
    src = SourceTruth(deg(110), deg(44), 10.0)
    snaps = synthesize_snapshots(src, cfg, NoiseModel.uniform(1.0, 120), 50, seed=22)
    scaled = SnapshotSet(snaps.data * 1.7)
    a = estimate_quantized(snaps, cfg)
    b = estimate_quantized(scaled, cfg)
    assert a.diagnostics.i_star == b.diagnostics.i_star
    assert a.azimuth == b.azimuth  # grid candidate, identical selection
    assert a.elevation == pytest.approx(b.elevation, abs=1e-12)


def test_random_phase_waveform_equivalent_noiseless():
    cfg = ArrayConfig(120, 0.25)
    est_const = estimate_quantized(noiseless(cfg, 110.0, 44.0), cfg)
    est_random = estimate_quantized(
        noiseless(cfg, 110.0, 44.0, waveform=Waveform.RANDOM_PHASE), cfg
    )
    assert est_random.azimuth == est_const.azimuth
    assert est_random.elevation == pytest.approx(est_const.elevation, abs=1e-12)


def test_nonuniform_noise_median_errors_match_uniform():
    # same total noise power, strongly nonuniform split: medians within 25%
    cfg = ArrayConfig(120, 0.25)
    power = 10.0  # 10 dB
    src = SourceTruth(deg(110), deg(44), power)
    ramp = NoiseModel(tuple(0.25 + 1.5 * k / 119 for k in range(120)))
    assert np.mean(ramp.variances) == pytest.approx(1.0)
    az_errors = {"uniform": [], "ramp": []}
    el_errors = {"uniform": [], "ramp": []}
    for label, noise in [("uniform", NoiseModel.uniform(1.0, 120)), ("ramp", ramp)]:
        for run in range(500):
            snaps = synthesize_snapshots(src, cfg, noise, 200, seed=9000 + run)
            est = estimate_quantized(snaps, cfg)
            az_errors[label].append(abs(wrapped_difference(est.azimuth, src.azimuth)))
            el_errors[label].append(abs(est.elevation - src.elevation))
    for errors in (az_errors, el_errors):
        uniform = float(np.median(errors["uniform"]))
        ramp_med = float(np.median(errors["ramp"]))
        assert abs(ramp_med - uniform) <= 0.25 * uniform


def test_scan_rejects_wrong_row_count():
    cfg = ArrayConfig(8, 0.25)
    with pytest.raises(ValueError):
        antipodal_pair_scan(SnapshotSet(np.ones((6, 2), dtype=complex)), cfg)


def test_non_finite_snapshots_raise_numerical_error():
    from ucadoa import NumericalError

    cfg = ArrayConfig(8, 0.25)
    data = np.ones((8, 2), dtype=complex)
    data[2, 0] = np.nan + 0j
    with pytest.raises(NumericalError):
        estimate_quantized(SnapshotSet(data), cfg)
