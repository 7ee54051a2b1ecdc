"""STFT and bandlimited masked Fourier measurements as local mask families"""
import logging
from dataclasses import dataclass

import numpy as np

from . import measurement
from . import signals
from . import utils

BANDLIMIT_TOLERANCE = 1E-12
STFT_IDENTITY_TOLERANCE = 1E-10
MASKED_FOURIER_IDENTITY_TOLERANCE = 1E-9


@dataclass(frozen=True, eq=False)
class StftSpec:
    """Window supported on [1, delta] and the measured frequencies (1-based)"""
    window: np.ndarray
    frequencies: tuple
    delta: int

    def __post_init__(self):
        window = signals.as_signal(self.window)
        d = window.size
        if not utils.is_integer(self.delta) or not 1 <= self.delta <= d:
            raise ValueError(f'delta must be an integer in [1, {d}], got {self.delta}')
        if np.any(window[self.delta:] != 0):
            raise ValueError(f'window support violation: nonzero entries outside [1, {self.delta}]')
        frequencies = tuple(int(w) for w in self.frequencies)
        if not frequencies:
            raise ValueError('at least one frequency is required')
        if len(set(frequencies)) != len(frequencies):
            raise ValueError('frequencies must be distinct')
        if min(frequencies) < 1 or max(frequencies) > d:
            raise ValueError(f'frequencies must be in [1, {d}]')
        window.setflags(write=False)
        object.__setattr__(self, 'window', window)
        object.__setattr__(self, 'frequencies', frequencies)

    @property
    def d(self):
        return self.window.size


@dataclass(frozen=True, eq=False)
class MaskedFourierSpec:
    """Bandlimited masking vectors w_k (one per row)

    dft(w_k)(n) must vanish for n outside {1} U {d - delta + 2, ..., d}.
    Bins outside that set smaller than BANDLIMIT_TOLERANCE * ||dft(w_k)||
    are treated as exact zeros.
    """
    vectors: np.ndarray
    delta: int

    def __post_init__(self):
        vectors = np.array(self.vectors, dtype=np.complex128)
        if vectors.ndim == 1:
            vectors = vectors[None, :]
        if vectors.ndim != 2 or vectors.shape[0] < 1 or vectors.shape[1] < 1:
            raise ValueError('vectors must be a nonempty K x d array')
        if not np.all(np.isfinite(vectors)):
            raise ValueError('vector entries must be finite')
        d = vectors.shape[1]
        if not utils.is_integer(self.delta) or not 1 <= self.delta <= d:
            raise ValueError(f'delta must be an integer in [1, {d}], got {self.delta}')

        spectra = np.fft.fft(vectors, axis=1)
        forbidden = ~allowed_bins(d, self.delta)
        for k, spectrum in enumerate(spectra):
            tol = BANDLIMIT_TOLERANCE * max(np.linalg.norm(spectrum), 1.0)
            bad = np.nonzero(np.abs(spectrum[forbidden]) > tol)[0]
            if bad.size:
                bins = np.arange(1, d + 1)[forbidden][bad]
                raise ValueError(
                    f'bandlimit violation: dft of vector {k + 1} is nonzero at '
                    f'n={utils.list_2_str_ranges(bins)}'
                )
        vectors.setflags(write=False)
        object.__setattr__(self, 'vectors', vectors)

    @property
    def d(self):
        return self.vectors.shape[1]

    @property
    def K(self):
        return self.vectors.shape[0]


def allowed_bins(d, delta):
    """Boolean mask of the frequency bins {1} U {d - delta + 2, ..., d}"""
    allowed = np.zeros(d, dtype=bool)
    allowed[0] = True
    allowed[d - delta + 1:] = True
    return allowed


def random_window(d, delta, rng):
    """Random complex window supported on [1, delta]"""
    window = np.zeros(d, dtype=np.complex128)
    window[:delta] = rng.standard_normal(delta) + 1j * rng.standard_normal(delta)
    return window


def random_bandlimited(d, delta, rng):
    """Random admissible masking vector

    The spectrum is drawn on the allowed bins (exact zeros elsewhere)
    and inverted.
    """
    spectrum = np.zeros(d, dtype=np.complex128)
    allowed = allowed_bins(d, delta)
    count = int(allowed.sum())
    spectrum[allowed] = rng.standard_normal(count) + 1j * rng.standard_normal(count)
    return signals.idft(spectrum)


def stft_family(spec, d=None):
    """Modulated copies of the window, m_k = W_{w_k} w

    Parameters
    ----------
    spec : StftSpec
    d : int, optional
        Signal length, checked against the window length if set.

    Returns
    -------
    MaskFamily
        Tag 'stft' with the window and frequencies stored in the parameters.

    """
    if d is not None and d != spec.d:
        raise ValueError(f'window length {spec.d} does not match d={d}')
    masks = np.array([signals.modulate(spec.window, w) for w in spec.frequencies])
    params = {
        'frequencies': list(spec.frequencies),
        'window': utils.complex_to_pairs(spec.window),
    }
    return measurement.MaskFamily(masks=masks, delta=spec.delta, tag='stft', params=params)


def stft_spec_from_family(family):
    """Recover the generating StftSpec from an 'stft' tagged family"""
    if family.tag != 'stft':
        raise ValueError(f'expected an stft family, got {family.tag}')
    try:
        window = utils.pairs_to_complex(family.params['window'])
        frequencies = family.params['frequencies']
    except KeyError as e:
        raise ValueError(f'stft family is missing the {e} parameter')
    return StftSpec(window=window, frequencies=frequencies, delta=family.delta)


def verify_stft_identity(spec, geom, x):
    """Compare the mask measurements to STFT magnitudes

    Returns the largest deviation between |<S_{la} m_k, x>| computed with
    the mask family and |<x, W_{w_k} S_{la} w>| computed directly.

    Parameters
    ----------
    spec : StftSpec
    geom : MeasurementGeometry
    x : array_like

    Returns
    -------
    float

    Notes
    -----
    The contract is a deviation <= 1e-10 * ||x||_2 * ||w||_1.

    """
    x = signals.as_signal(x)
    if x.size != geom.d or spec.d != geom.d:
        raise ValueError(
            f'dimension mismatch: window d={spec.d}, geometry d={geom.d}, signal d={x.size}'
        )
    family = stft_family(spec)
    masked = measurement.measure(family, geom, x, kind='Z').values

    direct = np.empty_like(masked)
    for l in range(1, geom.L + 1):
        shifted = signals.cyclic_shift(spec.window, l * geom.a)
        for k, w in enumerate(spec.frequencies):
            direct[k, l - 1] = abs(signals.inner(x, signals.modulate(shifted, w)))

    return float(np.max(np.abs(masked - direct)))


def stft_tolerance(spec, x):
    """Scaled deviation allowed by verify_stft_identity"""
    return STFT_IDENTITY_TOLERANCE * max(
        np.linalg.norm(x) * np.sum(np.abs(spec.window)), 1.0)


def masked_fourier_family(spec, d=None):
    """Local masks equivalent to bandlimited masked Fourier measurements

    m_k = (1/d) conj(reflect(dft(w_k)))

    Reflection maps the allowed bins {1} U {d - delta + 2, ..., d} onto
    [1, delta], so every mask is locally supported.  Bins already accepted
    as zero by the bandlimit check are set to exact zeros.

    Returns
    -------
    MaskFamily
        Tag 'masked-fourier' with the vectors stored in the parameters.

    """
    if d is not None and d != spec.d:
        raise ValueError(f'vector length {spec.d} does not match d={d}')
    spectra = np.fft.fft(spec.vectors, axis=1)
    spectra[:, ~allowed_bins(spec.d, spec.delta)] = 0
    masks = np.array([np.conj(signals.reflect(s)) / spec.d for s in spectra])
    params = {'vectors': [utils.complex_to_pairs(w) for w in spec.vectors]}
    return measurement.MaskFamily(
        masks=masks, delta=spec.delta, tag='masked-fourier', params=params)


def masked_fourier_spec_from_family(family):
    """Recover the generating MaskedFourierSpec from a 'masked-fourier' family"""
    if family.tag != 'masked-fourier':
        raise ValueError(f'expected a masked-fourier family, got {family.tag}')
    if 'vectors' not in family.params:
        raise ValueError('masked-fourier family is missing the vectors parameter')
    vectors = np.array([utils.pairs_to_complex(v) for v in family.params['vectors']])
    return MaskedFourierSpec(vectors=vectors, delta=family.delta)


def sample_positions(geom):
    """0-based frequency bins sampled by the shifts, (l a) mod d for l = 1..L

    With the right moving shift, <S_{la} m_k, dft(x)> picks up the
    frequency ((l a) mod d) + 1 of the masked spectrum.
    """
    return (geom.a * np.arange(1, geom.L + 1)) % geom.d


def masked_fourier_measure(spec, geom, x, kind='Z'):
    """Direct masked Fourier magnitudes |F Diag(w_k) x|

    Parameters
    ----------
    spec : MaskedFourierSpec
    geom : MeasurementGeometry
    x : array_like
    kind : {'Z', 'Y'}, optional

    Returns
    -------
    numpy.ndarray
        K x L array sampled at the stride positions of `sample_positions`.

    """
    x = signals.as_signal(x)
    if x.size != geom.d or spec.d != geom.d:
        raise ValueError(
            f'dimension mismatch: vectors d={spec.d}, geometry d={geom.d}, signal d={x.size}'
        )
    if kind not in measurement.MAP_KINDS:
        raise ValueError(f'unsupported map kind: {kind}')
    values = np.abs(np.fft.fft(spec.vectors * x[None, :], axis=1)[:, sample_positions(geom)])
    return values ** 2 if kind == 'Y' else values


def verify_masked_fourier_identity(spec, geom, x):
    """Compare mask measurements of dft(x) to masked Fourier magnitudes of x

    Parameters
    ----------
    spec : MaskedFourierSpec
    geom : MeasurementGeometry
    x : array_like

    Returns
    -------
    float
        Largest absolute deviation over (k, l).

    Notes
    -----
    The contract is a deviation <= 1e-9 * d * ||x||_2 * max_k ||w_k||_2.

    """
    x = signals.as_signal(x)
    if x.size != geom.d or spec.d != geom.d:
        raise ValueError(
            f'dimension mismatch: vectors d={spec.d}, geometry d={geom.d}, signal d={x.size}'
        )
    family = masked_fourier_family(spec)
    masked = measurement.measure(family, geom, signals.dft(x), kind='Z').values

    direct = np.empty_like(masked)
    for k, w in enumerate(spec.vectors):
        spectrum = signals.dft(signals.hadamard(w, x))
        direct[k, :] = np.abs(spectrum[sample_positions(geom)])

    deviation = float(np.max(np.abs(masked - direct)))
    logging.debug(f'  Masked Fourier identity deviation: {deviation}')
    return deviation


def masked_fourier_tolerance(spec, x):
    """Scaled deviation allowed by verify_masked_fourier_identity"""
    return MASKED_FOURIER_IDENTITY_TOLERANCE * spec.d * max(
        np.linalg.norm(x) * np.max(np.linalg.norm(spec.vectors, axis=1)), 1.0)
