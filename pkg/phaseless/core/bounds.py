"""Right hand sides of the lower Lipschitz bounds (without the universal constant)

The universal constant C of every bound is unspecified, so each formula is
evaluated without it and comparisons report certificate / rhs as an
empirical constant.

"""
import logging
import math
from dataclasses import dataclass

import numpy as np

from . import measurement
from . import signals
from . import utils

BOUND_IDS = ['thmZ', 'thmY', 'corFourierZ', 'corFourierY', 'corTwoShotZ', 'corTwoShotY']

# Inputs needed by each formula beyond (d, delta, a, p, q)
_EXTRA_INPUTS = {
    'thmZ': ['K', 'm_inf'],
    'thmY': ['K', 'm_inf'],
    'corFourierZ': ['b'],
    'corFourierY': ['b'],
    'corTwoShotZ': [],
    'corTwoShotY': [],
}


@dataclass(frozen=True)
class BoundFormula:
    """Evaluated right hand side of one theorem or corollary"""
    id: str
    inputs: dict
    value: float


@dataclass(frozen=True)
class ScalingFit:
    """Least squares power law fit in log-log space"""
    axis: str
    points: tuple
    exponent: float
    intercept: float
    r2: float


def kb(b):
    """Window constant K_b = exp(1/b) - 1"""
    if b <= 0:
        raise ValueError(f'b must be positive, got {b}')
    return math.expm1(1.0 / b)


def _check_inputs(bound_id, inputs):
    if bound_id not in BOUND_IDS:
        raise ValueError(f'unsupported bound id: {bound_id}')
    required = ['d', 'delta', 'p', 'q'] + _EXTRA_INPUTS[bound_id]
    for name in required:
        if inputs.get(name) is None:
            raise ValueError(f'{bound_id} requires the "{name}" input')
        if inputs[name] <= 0:
            raise ValueError(f'{name} must be positive, got {inputs[name]}')

    d = inputs['d']
    delta = inputs['delta']
    a = inputs.get('a')
    L = inputs.get('L')
    if a is None and L is None:
        raise ValueError(f'{bound_id} requires the "a" or "L" input')
    if a is None:
        a = d / L
    if L is None:
        L = d / a
    if not math.isclose(a * L, d, rel_tol=1E-12):
        raise ValueError(f'inconsistent geometry: a*L != d (a={a}, L={L}, d={d})')
    if a < 1:
        raise ValueError(f'a must be at least 1, got {a}')
    if a >= delta:
        raise ValueError(f'a must be less than delta (a={a}, delta={delta})')
    if 4 * delta > d:
        raise ValueError(f'delta must be <= d/4 (d={d}, delta={delta})')
    if inputs['p'] > inputs['q']:
        raise ValueError(f'p must be <= q (p={inputs["p"]}, q={inputs["q"]})')

    output = dict(inputs)
    output['a'] = a
    output['L'] = L
    return output


def rhs_both_forms(bound_id, **inputs):
    """Evaluate a bound in its stride (a) form and its shift count (L) form

    Parameters
    ----------
    bound_id : {'thmZ', 'thmY', 'corFourierZ', 'corFourierY', 'corTwoShotZ', 'corTwoShotY'}
    inputs
        d, delta, p, q and either a or L, plus K and m_inf for the theorems
        and b for the windowed Fourier corollaries.

    Returns
    -------
    tuple of float
        (a form, L form)

    Raises
    ------
    ValueError
        If an input is missing or non-positive, or the geometry constraints
        a < delta <= d/4 and p <= q are violated.

    """
    v = _check_inputs(bound_id, inputs)
    d, delta, a, L, p, q = v['d'], v['delta'], v['a'], v['L'], v['p'], v['q']

    if bound_id == 'thmZ':
        den = p * math.sqrt(v['K']) * v['m_inf'] * delta ** 1.5
        return (q * math.sqrt(d * a) / den,
                q * d / (p * math.sqrt(v['K'] * L) * v['m_inf'] * delta ** 1.5))
    elif bound_id == 'thmY':
        den = p * math.sqrt(v['K']) * v['m_inf'] ** 2 * delta ** 2.5
        return (q * d * math.sqrt(a) / den,
                q * d ** 1.5 / (p * math.sqrt(v['K'] * L) * v['m_inf'] ** 2 * delta ** 2.5))
    elif bound_id == 'corFourierZ':
        c = kb(v['b'])
        den = p * (2 * delta - 1) ** 0.25 * math.sqrt(delta)
        return (c * q * math.sqrt(d * a) / den,
                c * q * d / (math.sqrt(L) * den))
    elif bound_id == 'corFourierY':
        c = kb(v['b']) ** 2
        return (c * q * d * math.sqrt(a) / (p * math.sqrt(delta)),
                c * q * d ** 1.5 / (p * math.sqrt(L) * math.sqrt(delta)))
    elif bound_id == 'corTwoShotZ':
        return (q * math.sqrt(d * a) / (p * delta),
                q * d / (math.sqrt(L) * p * delta))
    else:
        return (q * d * math.sqrt(a) / (p * delta),
                q * d ** 1.5 / (math.sqrt(L) * p * delta))


def rhs(bound_id, **inputs):
    """Right hand side of a bound without the universal constant

    Examples
    --------
    >>> round(rhs('corTwoShotZ', d=8, delta=2, a=1, p=1, q=2), 5)
    2.82843

    """
    return rhs_both_forms(bound_id, **inputs)[0]


def bound_formula(bound_id, **inputs):
    """Evaluate a bound and keep its inputs

    Returns
    -------
    BoundFormula

    """
    return BoundFormula(id=bound_id, inputs=dict(inputs), value=rhs(bound_id, **inputs))


def matching_bound_id(tag, kind):
    """Bound that applies to a mask family tag and map kind"""
    if kind not in measurement.MAP_KINDS:
        raise ValueError(f'unsupported map kind: {kind}')
    if tag == 'two-shot':
        return f'corTwoShot{kind}'
    elif tag == 'windowed-fourier':
        return f'corFourier{kind}'
    return f'thm{kind}'


def family_bound(family, geom, p, q, kind):
    """Evaluate the bound matching a mask family

    Two-shot and windowed Fourier families use their corollaries, every
    other family uses the general theorems with its K and ||m||_inf.
    A windowed Fourier family with a flat window (b is None) has no
    exponential decay and also falls back to the general theorems.

    Returns
    -------
    BoundFormula

    Raises
    ------
    ValueError
        If a windowed Fourier family has no usable "b" parameter.

    """
    bound_id = matching_bound_id(family.tag, kind)
    if bound_id.startswith('corFourier'):
        if 'b' not in family.params:
            raise ValueError('windowed-fourier family is missing the "b" parameter')
        b = family.params['b']
        if b is None:
            logging.debug('  Flat windowed Fourier family, using the general bound')
            bound_id = f'thm{kind}'
        elif not utils.is_number(b) or isinstance(b, (bool, str)) or not b > 0:
            raise ValueError(f'windowed-fourier family has an invalid "b" parameter: {b!r}')

    inputs = {'d': geom.d, 'delta': geom.delta, 'a': geom.a, 'p': p, 'q': q}
    if bound_id.startswith('thm'):
        inputs['K'] = family.K
        inputs['m_inf'] = measurement.mask_sup_norm(family)
    elif bound_id.startswith('corFourier'):
        inputs['b'] = float(family.params['b'])
    return bound_formula(bound_id, **inputs)


def windowed_fourier_entry_bounds(family, p, q, entries):
    """Per entry bounds for exponentially windowed masks

    Parameters
    ----------
    family : MaskFamily
        Windowed Fourier family (the geometric ratio s is read from its
        parameters).
    p, q : float
    entries : slice or array_like
        0-based mask entries that fall on the p valued block of the
        witness pair at a crossing.

    Returns
    -------
    difference_bound : numpy.ndarray
        2 p sum_{n in entries} |m_k(n)| for each mask.
    magnitude_bound : float
        q (2 delta - 1)^(-1/4) s / (1 - s), bounding every |Z_{k,l}(x)|
        for x with entries of magnitude at most q.

    """
    if 's' not in family.params:
        raise ValueError('family has no geometric ratio "s" parameter')
    s = family.params['s']
    difference_bound = 2 * p * np.sum(np.abs(family.masks[:, entries]), axis=1)
    if s >= 1:
        magnitude_bound = math.inf
    else:
        magnitude_bound = q * (2 * family.delta - 1) ** -0.25 * s / (1 - s)
    return difference_bound, magnitude_bound


def fit_scaling(points, axis='d'):
    """Fit ratio = c * parameter^exponent by least squares in log-log space

    Parameters
    ----------
    points : list of (parameter, ratio) pairs
        At least three points with positive finite coordinates.
    axis : str, optional
        Name of the swept parameter (the default is 'd').

    Returns
    -------
    ScalingFit

    Raises
    ------
    ValueError
        If there are fewer than three points, a coordinate is not positive
        and finite, or all parameters are equal.

    """
    points = tuple((float(x), float(y)) for x, y in points)
    if len(points) < 3:
        raise ValueError(f'at least 3 points are needed, got {len(points)}')
    values = np.array(points)
    if not np.all(np.isfinite(values)) or np.any(values <= 0):
        raise ValueError('scaling fit points must be positive and finite')
    log_x = np.log(values[:, 0])
    log_y = np.log(values[:, 1])
    if np.ptp(log_x) == 0:
        raise ValueError('degenerate points: all parameters are equal')

    exponent, intercept = np.polyfit(log_x, log_y, 1)
    residual = log_y - (exponent * log_x + intercept)
    total = np.sum((log_y - log_y.mean()) ** 2)
    r2 = 1.0 if total == 0 else float(1 - np.sum(residual ** 2) / total)
    logging.debug(f'  Scaling fit ({axis}): exponent={exponent:.6f}, r2={r2:.6f}')

    return ScalingFit(
        axis=axis, points=points, exponent=float(exponent),
        intercept=float(intercept), r2=r2,
    )


def noise_floor(pair, family, geom, kind, eps):
    """Worst case reconstruction error forced by a witness pair

    If the pair's measurements are within 2 * eps of each other, a single
    noisy measurement is consistent with both signals, so some input must be
    reconstructed with error at least half their distance.

    Parameters
    ----------
    pair : WitnessPair
    family : MaskFamily
    geom : MeasurementGeometry
    kind : {'Z', 'Y'}
        Map kind, selecting D2 (Z) or d1 (Y) as the signal distance.
    eps : float
        Measurement noise level.

    Returns
    -------
    float

    """
    if eps < 0:
        raise ValueError(f'eps must be non-negative, got {eps}')
    plus = measurement.measure(family, geom, pair.xplus, kind=kind).values
    minus = measurement.measure(family, geom, pair.xminus, kind=kind).values
    gap = float(np.linalg.norm(plus - minus))
    if gap > 2 * eps:
        return 0.0
    if kind == 'Z':
        return signals.metric_D2(pair.xplus, pair.xminus) / 2
    return signals.metric_d1(pair.xplus, pair.xminus) / 2
