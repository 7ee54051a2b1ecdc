import logging
import math
from dataclasses import dataclass, field

import numpy as np

from . import signals
from . import utils

FAMILY_TAGS = ['two-shot', 'windowed-fourier', 'stft', 'masked-fourier', 'custom']
MAP_KINDS = ['Y', 'Z']


@dataclass(frozen=True)
class MeasurementGeometry:
    """Signal length d, shift count L, shift stride a = d / L and support size delta"""
    d: int
    L: int
    a: int
    delta: int

    @property
    def even(self):
        return self.d % 2 == 0


@dataclass(frozen=True, eq=False)
class MaskFamily:
    """K masks of length d with all nonzero entries in [1, delta]

    Parameters
    ----------
    masks : array_like
        K x d complex array, one mask per row.
    delta : int
        Support bound.
    tag : {'two-shot', 'windowed-fourier', 'stft', 'masked-fourier', 'custom'}
        Family identifier.
    params : dict, optional
        JSON serializable family parameters.

    Raises
    ------
    ValueError
        If the family is empty, has a nonzero entry outside [1, delta],
        has an unsupported tag, or has the wrong mask count for its tag.

    """
    masks: np.ndarray
    delta: int
    tag: str = 'custom'
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        masks = np.array(self.masks, dtype=np.complex128)
        if masks.ndim != 2:
            raise ValueError(f'masks must be a K x d array, got shape {masks.shape}')
        if masks.shape[0] < 1:
            raise ValueError('mask family must have at least one mask')
        if not np.all(np.isfinite(masks)):
            raise ValueError('mask entries must be finite')
        if not utils.is_integer(self.delta):
            raise TypeError('delta must be an integer')
        if not 1 <= self.delta <= masks.shape[1]:
            raise ValueError(f'delta must be in [1, {masks.shape[1]}], got {self.delta}')
        if self.tag not in FAMILY_TAGS:
            raise ValueError(f'unsupported family tag: {self.tag}')

        outside = np.nonzero(np.any(masks[:, self.delta:] != 0, axis=0))[0]
        if outside.size:
            raise ValueError(
                f'mask support violation: nonzero entries at n='
                f'{utils.list_2_str_ranges(outside + self.delta + 1)} outside [1, {self.delta}]'
            )
        if self.tag in ['two-shot', 'windowed-fourier'] and masks.shape[0] != 2 * self.delta - 1:
            raise ValueError(
                f'{self.tag} family must have K = 2*delta-1 = {2 * self.delta - 1} '
                f'masks, got {masks.shape[0]}'
            )

        masks.setflags(write=False)
        object.__setattr__(self, 'masks', masks)
        object.__setattr__(self, 'delta', int(self.delta))
        object.__setattr__(self, 'params', dict(self.params or {}))

    @property
    def d(self):
        return self.masks.shape[1]

    @property
    def K(self):
        return self.masks.shape[0]

    def __eq__(self, other):
        if not isinstance(other, MaskFamily):
            return NotImplemented
        return (
            self.tag == other.tag and self.delta == other.delta and
            self.params == other.params and
            self.masks.shape == other.masks.shape and
            np.array_equal(self.masks, other.masks)
        )

    __hash__ = None


@dataclass(frozen=True, eq=False)
class MeasurementMatrix:
    """K x L phaseless measurements of one signal"""
    values: np.ndarray
    kind: str
    geometry: MeasurementGeometry

    @property
    def K(self):
        return self.values.shape[0]

    @property
    def L(self):
        return self.values.shape[1]


def validate_geometry(d, L, delta):
    """Build a measurement geometry from (d, L, delta)

    Parameters
    ----------
    d : int
        Signal length.
    L : int
        Number of shifts, must divide d.
    delta : int
        Mask support size.

    Returns
    -------
    MeasurementGeometry

    Raises
    ------
    TypeError
        If any parameter is not an integer.
    ValueError
        If L does not divide d, if a = d / L is not less than delta,
        or if delta is larger than d / 4.

    Notes
    -----
    Odd d is accepted here but rejected by the witness constructors.

    """
    for name, value in [('d', d), ('L', L), ('delta', delta)]:
        if not utils.is_integer(value):
            raise TypeError(f'{name} must be an integer, got {value!r}')
        if value <= 0:
            raise ValueError(f'{name} must be a positive integer, got {value}')
    if d % L != 0:
        raise ValueError(f'L must divide d (d={d}, L={L})')
    a = d // L
    if a >= delta:
        raise ValueError(f'a must be less than delta (a={a}, delta={delta})')
    if 4 * delta > d:
        raise ValueError(f'delta must be <= d/4 (d={d}, delta={delta})')
    if d % 2:
        logging.debug(f'  Odd signal length d={d}, witness pairs are not available')

    return MeasurementGeometry(d=int(d), L=int(L), a=int(a), delta=int(delta))


def shift_indices(geom, delta):
    """0-based positions covered by the shifted masks

    Row l - 1 holds the positions of entries 1..delta of S_{la} m_k for
    l = 1..L (l = L is the identity shift).

    Returns
    -------
    numpy.ndarray
        L x delta integer array.

    """
    shifts = geom.a * np.arange(1, geom.L + 1)
    return (shifts[:, None] + np.arange(delta)[None, :]) % geom.d


def measure(family, geom, x, kind='Z'):
    """Phaseless measurements of x with the shifted mask family

    Z_{k,l}(x) = |<S_{la} m_k, x>| and Y_{k,l}(x) = Z_{k,l}(x)^2
    for 1 <= k <= K and 1 <= l <= L.

    Parameters
    ----------
    family : MaskFamily
    geom : MeasurementGeometry
    x : array_like
        Signal of length geom.d.
    kind : {'Z', 'Y'}, optional
        Measurement map (the default is 'Z').

    Returns
    -------
    MeasurementMatrix

    Raises
    ------
    ValueError
        If the family, geometry and signal dimensions don't agree,
        or if `kind` is not supported.

    """
    x = signals.as_signal(x)
    if kind not in MAP_KINDS:
        raise ValueError(f'unsupported map kind: {kind}')
    if family.d != geom.d or x.size != geom.d:
        raise ValueError(
            f'dimension mismatch: family d={family.d}, geometry d={geom.d}, '
            f'signal d={x.size}'
        )
    if family.delta > geom.delta:
        raise ValueError(
            f'family delta={family.delta} exceeds geometry delta={geom.delta}'
        )

    # Only the first delta entries of each mask are nonzero
    windows = np.conj(x)[shift_indices(geom, family.delta)]
    values = np.abs(family.masks[:, :family.delta] @ windows.T)
    if kind == 'Y':
        values = values ** 2

    return MeasurementMatrix(values=values, kind=kind, geometry=geom)


def measure_yz(family, geom, x):
    """Compute both measurement maps

    Returns
    -------
    tuple of MeasurementMatrix
        (Y, Z)

    """
    z = measure(family, geom, x, kind='Z')
    y = MeasurementMatrix(values=z.values ** 2, kind='Y', geometry=geom)
    return y, z


def windowed_fourier_family(d, delta, b=8.0, decay=None):
    """Exponentially windowed Fourier masks

    m_k(n) = s^n (2 delta - 1)^(-1/4) exp(2 pi i (k-1)(n-1) / (2 delta - 1))
    for 1 <= n <= delta and 0 otherwise, with s = exp(-1/b) and
    K = 2 delta - 1.

    Parameters
    ----------
    d : int
        Signal length.
    delta : int
        Support size, at least 2.
    b : float, optional
        Window decay parameter (the default is 8.0).  The lower bounds are
        stated for b > 4 but the window constant is finite for any b > 0.
    decay : float, optional
        Override for the geometric ratio s in (0, 1].  Any truncated
        geometric progression of magnitudes can be built this way.  The
        stored b is then -1 / log(s), or None for the flat window s = 1.

    Returns
    -------
    MaskFamily

    Raises
    ------
    ValueError
        If `b` is not positive, `delta` < 2 or `decay` is outside (0, 1].

    """
    if not utils.is_integer(d) or not utils.is_integer(delta):
        raise TypeError('d and delta must be integers')
    if delta < 2:
        raise ValueError(f'delta must be at least 2, got {delta}')
    if delta > d:
        raise ValueError(f'delta must be <= d (d={d}, delta={delta})')
    if not utils.is_number(b) or b <= 0:
        raise ValueError(f'b must be positive, got {b}')
    if decay is None:
        s = float(np.exp(-1.0 / b))
    elif 0 < decay < 1:
        s = float(decay)
        b = -1.0 / math.log(s)
        logging.debug(f'  decay={s} overrides b, window parameter b={b}')
    elif decay == 1:
        # Flat window, no exponential decay to feed the windowed Fourier bounds
        s = 1.0
        b = None
        logging.debug('  decay=1 gives a flat window, b is not defined')
    else:
        raise ValueError(f'decay must be in (0, 1], got {decay}')
    if b is not None and b <= 4:
        logging.warning(f'Window parameter b={b} is outside the b > 4 regime of the bounds')

    K = 2 * delta - 1
    n = np.arange(1, delta + 1)
    k = np.arange(K)
    masks = np.zeros((K, d), dtype=np.complex128)
    masks[:, :delta] = (
        (s ** n)[None, :] * K ** -0.25 *
        np.exp(2j * np.pi * k[:, None] * (n - 1)[None, :] / K)
    )
    return MaskFamily(
        masks=masks, delta=delta, tag='windowed-fourier', params={'b': None if b is None else float(b), 's': s}
    )


def two_shot_family(d, delta):
    """Two-shot interference masks

    m_1 = e_1, m_2j = e_1 + e_{j+1} and m_2j+1 = e_1 + i e_{j+1}
    for 1 <= j <= delta - 1.

    Parameters
    ----------
    d : int
    delta : int
        Support size, at least 2.

    Returns
    -------
    MaskFamily

    """
    if not utils.is_integer(d) or not utils.is_integer(delta):
        raise TypeError('d and delta must be integers')
    if delta < 2:
        raise ValueError(f'delta must be at least 2, got {delta}')
    if delta > d:
        raise ValueError(f'delta must be <= d (d={d}, delta={delta})')

    masks = np.zeros((2 * delta - 1, d), dtype=np.complex128)
    masks[:, 0] = 1
    for j in range(1, delta):
        masks[2 * j - 1, j] = 1
        masks[2 * j, j] = 1j
    return MaskFamily(masks=masks, delta=delta, tag='two-shot')


def random_family(d, delta, K, rng, tag='custom'):
    """Random complex Gaussian masks supported on [1, delta]

    Parameters
    ----------
    d, delta, K : int
    rng : numpy.random.Generator

    Returns
    -------
    MaskFamily

    """
    masks = np.zeros((K, d), dtype=np.complex128)
    masks[:, :delta] = (
        rng.standard_normal((K, delta)) + 1j * rng.standard_normal((K, delta))
    )
    return MaskFamily(masks=masks, delta=delta, tag=tag)


def mask_sup_norm(family):
    """Largest entry magnitude over all masks, ||m||_inf"""
    return float(np.max(np.abs(family.masks)))


def window_magnitude_sum(family):
    """Per mask sum of entry magnitudes, sum_n |m_k(n)|"""
    return np.sum(np.abs(family.masks), axis=1)


def family_to_dict(family):
    """JSON container for a mask family"""
    return {
        'd': family.d,
        'delta': family.delta,
        'tag': family.tag,
        'params': family.params,
        'masks': [utils.complex_to_pairs(m) for m in family.masks],
    }


def family_from_dict(data, d=None):
    """Rebuild a mask family from its JSON container

    Parameters
    ----------
    data : dict
    d : int, optional
        Expected signal length.  A ValueError is raised if the stored
        length is different.

    Returns
    -------
    MaskFamily

    """
    if not isinstance(data, dict):
        raise ValueError('mask file must contain a JSON object')
    for key in ['d', 'delta', 'tag', 'masks']:
        if key not in data:
            raise ValueError(f'mask file is missing the "{key}" field')
    if not utils.is_integer(data['d']) or not utils.is_integer(data['delta']):
        raise ValueError('"d" and "delta" must be integers')
    if d is not None and data['d'] != d:
        raise ValueError(f'mask file d={data["d"]} does not match expected d={d}')
    if not isinstance(data['masks'], list) or not data['masks']:
        raise ValueError('mask file must contain at least one mask')

    masks = []
    for k, pairs in enumerate(data['masks']):
        mask = utils.pairs_to_complex(pairs)
        if mask.size != data['d']:
            raise ValueError(
                f'mask {k + 1} has {mask.size} entries, expected d={data["d"]}'
            )
        masks.append(mask)

    return MaskFamily(
        masks=np.array(masks), delta=data['delta'], tag=data['tag'],
        params=data.get('params', {}) or {},
    )


def save_family(family, file_path):
    """Write a mask family to a JSON file"""
    logging.debug(f'  Writing {family.tag} family (K={family.K}) to {file_path}')
    utils.write_json(family_to_dict(family), file_path)


def load_family(file_path, d=None):
    """Read a mask family from a JSON file

    The support constraint is validated again on load.

    Raises
    ------
    OSError
        If the file can't be read.
    ValueError
        If the file is malformed, violates the support constraint,
        or does not match the expected length `d`.

    """
    logging.debug(f'  Reading mask family from {file_path}')
    return family_from_dict(utils.read_json(file_path), d=d)
