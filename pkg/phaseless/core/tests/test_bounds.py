import math

import numpy as np
import pytest

import phaseless.core.bounds as bounds
import phaseless.core.measurement as measurement
import phaseless.core.witness as witness


def two_shot_ratio(d, delta, kind='Z', p=1.0, q=1.0):
    geom = measurement.validate_geometry(d, d, delta)
    family = measurement.two_shot_family(d, delta)
    return witness.certify(family, geom, witness.atoll_pq(d, delta, p, q), kind=kind).ratio


@pytest.mark.parametrize(
    'bound_id, inputs, expected',
    [
        ['thmZ', {'d': 8, 'delta': 2, 'a': 1, 'K': 3, 'p': 1, 'q': 2, 'm_inf': 1}, 1.15470],
        ['corTwoShotZ', {'d': 8, 'delta': 2, 'a': 1, 'p': 1, 'q': 2}, 2.82843],
        ['corTwoShotZ', {'d': 8, 'delta': 2, 'L': 8, 'p': 1, 'q': 2}, 2.82843],
    ]
)
def test_rhs(bound_id, inputs, expected, tol=1E-5):
    assert abs(bounds.rhs(bound_id, **inputs) - expected) <= tol * expected


def test_rhs_corTwoShotY_value(tol=1E-12):
    # q d sqrt(a) / (p delta) = 2 * 8 / 2
    assert abs(bounds.rhs('corTwoShotY', d=8, delta=2, a=1, p=1, q=2) - 8) <= tol


def test_rhs_fourier(tol=1E-12):
    expected = bounds.kb(8) * 2 * math.sqrt(8) / (3 ** 0.25 * math.sqrt(2))
    output = bounds.rhs('corFourierZ', d=8, delta=2, a=1, p=1, q=2, b=8)
    assert abs(output - expected) <= tol * expected


@pytest.mark.parametrize('b, expected', [[4, 0.28403], [8, 0.13315]])
def test_kb(b, expected, tol=1E-5):
    assert abs(bounds.kb(b) - expected) <= tol


@pytest.mark.parametrize('b', [0, -1])
def test_kb_exception(b):
    with pytest.raises(ValueError):
        bounds.kb(b)


@pytest.mark.parametrize('bound_id', bounds.BOUND_IDS)
def test_rhs_form_agreement(bound_id, tol=1E-12):
    for d, L, delta in [[64, 64, 8], [64, 32, 8], [256, 64, 16], [4096, 1024, 32], [60, 20, 7]]:
        inputs = {'d': d, 'delta': delta, 'a': d // L, 'p': 0.5, 'q': 3.0,
                  'K': 2 * delta - 1, 'm_inf': 0.8, 'b': 8.0}
        a_form, L_form = bounds.rhs_both_forms(bound_id, **inputs)
        assert a_form > 0
        assert abs(a_form - L_form) <= tol * a_form


@pytest.mark.parametrize(
    'bound_id, inputs, match',
    [
        ['thmX', {'d': 8, 'delta': 2, 'a': 1, 'p': 1, 'q': 2}, 'unsupported bound id'],
        ['thmZ', {'d': 8, 'delta': 2, 'a': 1, 'p': 1, 'q': 2}, 'requires the "K" input'],
        ['corFourierZ', {'d': 8, 'delta': 2, 'a': 1, 'p': 1, 'q': 2}, 'requires the "b" input'],
        ['corTwoShotZ', {'d': 8, 'delta': 2, 'p': 1, 'q': 2}, 'requires the "a" or "L" input'],
        ['corTwoShotZ', {'d': 8, 'delta': 2, 'a': 1, 'p': 0, 'q': 2}, 'p must be positive'],
        ['corTwoShotZ', {'d': 8, 'delta': 2, 'a': 2, 'p': 1, 'q': 2}, 'a must be less than delta'],
        ['corTwoShotZ', {'d': 8, 'delta': 3, 'a': 1, 'p': 1, 'q': 2}, 'delta must be <= d/4'],
        ['corTwoShotZ', {'d': 8, 'delta': 2, 'a': 1, 'p': 3, 'q': 2}, 'p must be <= q'],
        ['corTwoShotZ', {'d': 8, 'delta': 2, 'a': 1, 'L': 4, 'p': 1, 'q': 2}, 'inconsistent'],
    ]
)
def test_rhs_exception(bound_id, inputs, match):
    with pytest.raises(ValueError, match=match):
        bounds.rhs(bound_id, **inputs)


def test_bound_formula():
    output = bounds.bound_formula('corTwoShotZ', d=8, delta=2, a=1, p=1, q=2)
    assert output.id == 'corTwoShotZ'
    assert output.inputs == {'d': 8, 'delta': 2, 'a': 1, 'p': 1, 'q': 2}
    assert output.value == pytest.approx(2 * math.sqrt(2))


@pytest.mark.parametrize(
    'tag, kind, expected',
    [
        ['two-shot', 'Z', 'corTwoShotZ'],
        ['two-shot', 'Y', 'corTwoShotY'],
        ['windowed-fourier', 'Z', 'corFourierZ'],
        ['stft', 'Y', 'thmY'],
        ['masked-fourier', 'Z', 'thmZ'],
        ['custom', 'Z', 'thmZ'],
    ]
)
def test_matching_bound_id(tag, kind, expected):
    assert bounds.matching_bound_id(tag, kind) == expected


def test_family_bound_windowed_fourier():
    geom = measurement.validate_geometry(32, 32, 4)
    family = measurement.windowed_fourier_family(32, 4, b=6)
    output = bounds.family_bound(family, geom, 1, 2, 'Y')
    assert output.id == 'corFourierY'
    assert output.inputs['b'] == 6


def test_family_bound_theorem(rng):
    geom = measurement.validate_geometry(32, 16, 4)
    family = measurement.random_family(32, 4, 5, rng)
    output = bounds.family_bound(family, geom, 1, 2, 'Z')
    expected = bounds.rhs(
        'thmZ', d=32, delta=4, a=2, K=5, p=1, q=2, m_inf=measurement.mask_sup_norm(family))
    assert output.value == pytest.approx(expected, rel=1E-12)


def test_windowed_fourier_entry_bounds(tol=1E-12):
    family = measurement.windowed_fourier_family(16, 3, b=8)
    s = math.exp(-1 / 8)
    difference, magnitude = bounds.windowed_fourier_entry_bounds(family, 1, 2, slice(1, 3))
    expected = 2 * 5 ** -0.25 * (s ** 2 + s ** 3)
    assert np.max(np.abs(difference - expected)) <= tol
    assert abs(magnitude - 2 * 5 ** -0.25 * s / (1 - s)) <= tol


def test_windowed_fourier_entry_bounds_exception():
    with pytest.raises(ValueError):
        bounds.windowed_fourier_entry_bounds(measurement.two_shot_family(8, 2), 1, 2, slice(0, 1))


@pytest.mark.parametrize(
    'c, exponent',
    [[7, 0.5], [3, -1], [2, 0], [0.1, 1.5]]
)
def test_fit_scaling(c, exponent, tol=1E-10):
    points = [(x, c * x ** exponent) for x in [64, 128, 256, 512, 1024]]
    output = bounds.fit_scaling(points)
    assert abs(output.exponent - exponent) <= tol
    assert abs(output.r2 - 1) <= tol
    assert abs(output.intercept - math.log(c)) <= 1E-8
    assert output.axis == 'd'


@pytest.mark.parametrize(
    'points',
    [
        [(1, 1), (2, 2)],
        [(4, 1), (4, 2), (4, 3)],
        [(1, 1), (2, 0), (3, 1)],
        [(1, 1), (2, -1), (3, 1)],
        [(1, 1), (2, math.inf), (3, 1)],
    ]
)
def test_fit_scaling_exception(points):
    with pytest.raises(ValueError):
        bounds.fit_scaling(points)


def test_noise_floor_collision(rng):
    geom = measurement.validate_geometry(16, 16, 4)
    family = measurement.random_family(16, 4, 7, rng)
    pair = witness.atoll_unit(16, 4)
    expected = pair.distances.d2 / 2
    assert bounds.noise_floor(pair, family, geom, 'Z', 1E-3) == pytest.approx(expected)
    assert bounds.noise_floor(pair, family, geom, 'Y', 0.5) == pytest.approx(pair.distances.d1 / 2)


def test_noise_floor_zero_eps():
    geom = measurement.validate_geometry(8, 8, 2)
    pair = witness.atoll_pq(8, 2, 1, 2)
    assert bounds.noise_floor(pair, measurement.two_shot_family(8, 2), geom, 'Z', 0) == 0


def test_noise_floor_two_shot(tol=1E-12):
    geom = measurement.validate_geometry(8, 8, 2)
    pair = witness.atoll_pq(8, 2, 1, 2)
    output = bounds.noise_floor(pair, measurement.two_shot_family(8, 2), geom, 'Z', 2)
    assert abs(output - math.sqrt(8)) <= tol


def test_noise_floor_exception():
    geom = measurement.validate_geometry(8, 8, 2)
    with pytest.raises(ValueError):
        bounds.noise_floor(
            witness.atoll_pq(8, 2, 1, 2), measurement.two_shot_family(8, 2), geom, 'Z', -1)


def test_certificate_rhs_consistency():
    for d in [64, 256, 1024, 4096]:
        for delta in [4, 8, 16, 32]:
            if 4 * delta > d:
                continue
            ratio = two_shot_ratio(d, delta)
            rhs = bounds.rhs('corTwoShotZ', d=d, delta=delta, a=1, p=1, q=1)
            expected = math.sqrt(2 - 4 * delta / d) * delta / (2 * math.sqrt(delta * (delta - 1)))
            assert ratio / rhs == pytest.approx(expected, rel=1E-10)
            assert 0.5 <= ratio / rhs <= 1.2


def test_two_shot_z_exponent_d(tol=0.05):
    points = [(d, two_shot_ratio(d, 8)) for d in [64, 128, 256, 512, 1024, 2048, 4096]]
    assert abs(bounds.fit_scaling(points).exponent - 0.5) <= tol


def test_two_shot_z_exponent_delta(tol=0.15):
    points = [(delta, two_shot_ratio(4096, delta)) for delta in [4, 8, 16, 32]]
    assert abs(bounds.fit_scaling(points, axis='delta').exponent + 1) <= tol


def test_two_shot_y_exponent_d(tol=0.05):
    points = [(d, two_shot_ratio(d, 8, kind='Y')) for d in [64, 128, 256, 512, 1024, 2048, 4096]]
    assert abs(bounds.fit_scaling(points).exponent - 1) <= tol


def test_windowed_fourier_z_exponent_d(tol=0.05, delta=4):
    points = []
    for d in [64, 128, 256, 512, 1024, 2048, 4096]:
        geom = measurement.validate_geometry(d, d, delta)
        family = measurement.windowed_fourier_family(d, delta, b=8)
        pair = witness.atoll_pq(d, delta, 1, 1)
        points.append((d, witness.certify(family, geom, pair).ratio))
    assert abs(bounds.fit_scaling(points).exponent - 0.5) <= tol


def test_windowed_fourier_z_exponent_delta(d=4096):
    points = []
    for delta in [2, 4, 8, 16]:
        geom = measurement.validate_geometry(d, d, delta)
        family = measurement.windowed_fourier_family(d, delta, b=8)
        pair = witness.atoll_pq(d, delta, 1, 1)
        points.append((delta, witness.certify(family, geom, pair).ratio))
    assert -1.0 <= bounds.fit_scaling(points, axis='delta').exponent <= -0.5


def test_family_bound_windowed_fourier_decay():
    geom = measurement.validate_geometry(32, 32, 4)
    family = measurement.windowed_fourier_family(32, 4, decay=math.exp(-1 / 6))
    output = bounds.family_bound(family, geom, 1, 2, 'Z')
    assert output.id == 'corFourierZ'
    assert output.inputs['b'] == pytest.approx(6, rel=1E-12)


def test_family_bound_windowed_fourier_flat():
    geom = measurement.validate_geometry(32, 32, 4)
    family = measurement.windowed_fourier_family(32, 4, decay=1)
    output = bounds.family_bound(family, geom, 1, 2, 'Y')
    assert output.id == 'thmY'
    assert output.inputs['m_inf'] == measurement.mask_sup_norm(family)


@pytest.mark.parametrize(
    'params, match',
    [[{}, 'missing the "b" parameter'], [{'b': 'eight'}, 'invalid "b"'], [{'b': -2}, 'invalid "b"']]
)
def test_family_bound_windowed_fourier_exception(params, match):
    geom = measurement.validate_geometry(16, 16, 4)
    masks = measurement.windowed_fourier_family(16, 4, b=8).masks
    family = measurement.MaskFamily(masks=masks, delta=4, tag='windowed-fourier', params=params)
    with pytest.raises(ValueError, match=match):
        bounds.family_bound(family, geom, 1, 2, 'Z')
