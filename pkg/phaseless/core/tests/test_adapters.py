import numpy as np
import pytest

import phaseless.core.adapters as adapters
import phaseless.core.measurement as measurement
import phaseless.core.signals as signals


def random_signal(rng, d):
    return rng.standard_normal(d) + 1j * rng.standard_normal(d)


def test_stft_spec_exception():
    window = np.zeros(8, dtype=complex)
    window[3] = 1
    with pytest.raises(ValueError, match='window support violation'):
        adapters.StftSpec(window=window, frequencies=[1], delta=2)


@pytest.mark.parametrize('frequencies', [[], [1, 1], [0], [9]])
def test_stft_spec_frequency_exception(frequencies):
    with pytest.raises(ValueError):
        adapters.StftSpec(window=signals.unit_vector(8, 1), frequencies=frequencies, delta=2)


def test_stft_family_zero_frequency(rng):
    window = adapters.random_window(16, 4, rng)
    spec = adapters.StftSpec(window=window, frequencies=[1], delta=4)
    family = adapters.stft_family(spec)
    assert family.K == 1
    assert family.tag == 'stft'
    assert np.array_equal(family.masks[0], window)


def test_stft_family_magnitudes(rng, tol=1E-12):
    window = adapters.random_window(16, 4, rng)
    spec = adapters.StftSpec(window=window, frequencies=[1, 3, 7, 16], delta=4)
    family = adapters.stft_family(spec, d=16)
    assert family.K == 4
    assert np.max(np.abs(np.abs(family.masks) - np.abs(window)[None, :])) <= tol
    assert not np.any(family.masks[:, 4:])


def test_stft_family_d_exception(rng):
    spec = adapters.StftSpec(
        window=adapters.random_window(16, 4, rng), frequencies=[1], delta=4)
    with pytest.raises(ValueError):
        adapters.stft_family(spec, d=8)


def test_stft_spec_from_family(rng):
    spec = adapters.StftSpec(
        window=adapters.random_window(16, 4, rng), frequencies=[2, 5], delta=4)
    output = adapters.stft_spec_from_family(adapters.stft_family(spec))
    assert np.array_equal(output.window, spec.window)
    assert output.frequencies == (2, 5)


def test_stft_spec_from_family_exception():
    with pytest.raises(ValueError):
        adapters.stft_spec_from_family(measurement.two_shot_family(8, 2))


def test_verify_stft_identity_example(rng, tol=1E-10):
    geom = measurement.validate_geometry(16, 16, 4)
    spec = adapters.StftSpec(
        window=adapters.random_window(16, 4, rng), frequencies=[1, 3, 7], delta=4)
    assert adapters.verify_stft_identity(spec, geom, random_signal(rng, 16)) <= tol


def test_verify_stft_identity_zero_signal(rng):
    geom = measurement.validate_geometry(16, 8, 4)
    spec = adapters.StftSpec(
        window=adapters.random_window(16, 4, rng), frequencies=[1, 2], delta=4)
    assert adapters.verify_stft_identity(spec, geom, np.zeros(16)) == 0


def test_verify_stft_identity_point_window(rng, tol=1E-14):
    geom = measurement.validate_geometry(16, 8, 4)
    spec = adapters.StftSpec(window=signals.unit_vector(16, 1), frequencies=[1], delta=4)
    assert adapters.verify_stft_identity(spec, geom, random_signal(rng, 16)) <= tol


@pytest.mark.parametrize('d, L, delta', [[8, 8, 2], [16, 8, 4], [64, 32, 8]])
def test_verify_stft_identity_random(rng, d, L, delta):
    geom = measurement.validate_geometry(d, L, delta)
    for _ in range(100):
        count = int(rng.integers(1, d + 1))
        frequencies = rng.choice(np.arange(1, d + 1), size=count, replace=False)
        spec = adapters.StftSpec(
            window=adapters.random_window(d, delta, rng), frequencies=frequencies, delta=delta)
        x = random_signal(rng, d)
        assert (adapters.verify_stft_identity(spec, geom, x) <=
                adapters.stft_tolerance(spec, x))


def test_verify_stft_identity_dimension_exception(rng):
    geom = measurement.validate_geometry(16, 16, 4)
    spec = adapters.StftSpec(window=adapters.random_window(16, 4, rng), frequencies=[1], delta=4)
    with pytest.raises(ValueError, match='dimension mismatch'):
        adapters.verify_stft_identity(spec, geom, np.ones(8))


def test_allowed_bins():
    assert np.nonzero(adapters.allowed_bins(8, 3))[0].tolist() == [0, 6, 7]


@pytest.mark.parametrize('d, delta', [[8, 2], [16, 4], [64, 8]])
def test_random_bandlimited(rng, d, delta, tol=1E-12):
    w = adapters.random_bandlimited(d, delta, rng)
    spectrum = np.fft.fft(w)
    forbidden = ~adapters.allowed_bins(d, delta)
    assert np.max(np.abs(spectrum[forbidden])) <= tol * np.linalg.norm(spectrum)


def test_masked_fourier_spec_exception():
    # d=8, delta=3: dft nonzero at n=2
    spectrum = np.zeros(8, dtype=complex)
    spectrum[0] = 1
    spectrum[1] = 1
    with pytest.raises(ValueError, match='n=2'):
        adapters.MaskedFourierSpec(vectors=np.fft.ifft(spectrum), delta=3)


def test_masked_fourier_spec_promotes_vector():
    spec = adapters.MaskedFourierSpec(vectors=np.ones(8), delta=2)
    assert spec.K == 1
    assert spec.d == 8


def test_masked_fourier_family_constant_vector(tol=1E-12):
    spec = adapters.MaskedFourierSpec(vectors=np.ones(8), delta=2)
    family = adapters.masked_fourier_family(spec)
    assert family.tag == 'masked-fourier'
    assert np.max(np.abs(family.masks[0] - signals.unit_vector(8, 1))) <= tol


@pytest.mark.parametrize('d, delta', [[8, 2], [16, 4], [64, 8]])
def test_masked_fourier_family_support(rng, d, delta):
    vectors = np.array([adapters.random_bandlimited(d, delta, rng) for _ in range(3)])
    family = adapters.masked_fourier_family(
        adapters.MaskedFourierSpec(vectors=vectors, delta=delta), d=d)
    assert family.K == 3
    assert not np.any(family.masks[:, delta:])


def test_masked_fourier_spec_from_family(rng):
    vectors = np.array([adapters.random_bandlimited(16, 4, rng) for _ in range(2)])
    spec = adapters.MaskedFourierSpec(vectors=vectors, delta=4)
    output = adapters.masked_fourier_spec_from_family(adapters.masked_fourier_family(spec))
    assert np.array_equal(output.vectors, spec.vectors)


def test_verify_masked_fourier_identity_example(rng, tol=1E-10):
    # One admissible vector with dft supported on {1, 8}
    spectrum = np.zeros(8, dtype=complex)
    spectrum[[0, 7]] = random_signal(rng, 2)
    spec = adapters.MaskedFourierSpec(vectors=np.fft.ifft(spectrum), delta=2)
    geom = measurement.validate_geometry(8, 8, 2)
    assert adapters.verify_masked_fourier_identity(spec, geom, random_signal(rng, 8)) <= tol


def test_verify_masked_fourier_identity_zero_signal(rng):
    spec = adapters.MaskedFourierSpec(
        vectors=adapters.random_bandlimited(16, 4, rng), delta=4)
    geom = measurement.validate_geometry(16, 16, 4)
    assert adapters.verify_masked_fourier_identity(spec, geom, np.zeros(16)) == 0


def test_verify_masked_fourier_identity_constant_vector(rng, tol=1E-10):
    spec = adapters.MaskedFourierSpec(vectors=np.ones(16), delta=4)
    geom = measurement.validate_geometry(16, 8, 4)
    x = random_signal(rng, 16)
    assert adapters.verify_masked_fourier_identity(spec, geom, x) <= tol
    # m = e_1 samples the spectrum at stride a
    expected = np.abs(np.fft.fft(x))[adapters.sample_positions(geom)]
    assert np.max(np.abs(adapters.masked_fourier_measure(spec, geom, x)[0] - expected)) <= tol


@pytest.mark.parametrize('d, L, delta', [[8, 8, 2], [16, 8, 4], [64, 32, 8]])
def test_verify_masked_fourier_identity_random(rng, d, L, delta):
    geom = measurement.validate_geometry(d, L, delta)
    for _ in range(100):
        vectors = np.array([
            adapters.random_bandlimited(d, delta, rng)
            for _ in range(int(rng.integers(1, 4)))])
        spec = adapters.MaskedFourierSpec(vectors=vectors, delta=delta)
        x = random_signal(rng, d)
        assert (adapters.verify_masked_fourier_identity(spec, geom, x) <=
                adapters.masked_fourier_tolerance(spec, x))


def test_masked_fourier_pipeline_equivalence(rng, d=16, delta=4, tol=1E-10):
    geom = measurement.validate_geometry(d, 8, delta)
    vectors = np.array([adapters.random_bandlimited(d, delta, rng) for _ in range(3)])
    spec = adapters.MaskedFourierSpec(vectors=vectors, delta=delta)
    x = random_signal(rng, d)
    for kind in ['Z', 'Y']:
        masked = measurement.measure(
            adapters.masked_fourier_family(spec), geom, signals.dft(x), kind=kind).values
        direct = adapters.masked_fourier_measure(spec, geom, x, kind=kind)
        assert np.max(np.abs(masked - direct)) <= tol * max(np.max(direct), 1)


def test_masked_fourier_measure_exception(rng):
    spec = adapters.MaskedFourierSpec(vectors=np.ones(16), delta=4)
    geom = measurement.validate_geometry(16, 16, 4)
    with pytest.raises(ValueError):
        adapters.masked_fourier_measure(spec, geom, np.ones(8))
    with pytest.raises(ValueError):
        adapters.masked_fourier_measure(spec, geom, np.ones(16), kind='X')
