"""Atoll witness pairs and lower Lipschitz bound certificates

An atoll pair x+/x- has the block structure (q, p, +/-q, p) with block
lengths (eta, delta, eta, delta), eta = d/2 - delta.  Local measurements of
the two signals can only differ where a shifted mask straddles one of the
block boundaries d/2 and d - delta ("crossings").

"""
import logging
import math
from dataclasses import dataclass

import numpy as np

from . import bounds
from . import measurement
from . import signals
from . import utils

BOUNDARIES = ['d/2', 'd-delta']


@dataclass(frozen=True, eq=False)
class WitnessPair:
    """Two signals that are far apart but have (nearly) equal measurements

    Raises
    ------
    ValueError
        If d is odd, delta > d/4, the parameters violate 0 <= p <= q,
        an entry magnitude is outside [p, q] (p > 0), or the signals are
        equal up to a global phase.

    """
    xplus: np.ndarray
    xminus: np.ndarray
    p: float
    q: float
    delta: int

    def __post_init__(self):
        xplus = signals.as_signal(self.xplus)
        xminus = signals.as_signal(self.xminus)
        if xplus.size != xminus.size:
            raise ValueError(f'signal length mismatch: {xplus.size} != {xminus.size}')
        _check_atoll_params(xplus.size, self.delta, self.p, self.q, allow_zero_p=True)
        if self.p > 0:
            tol = signals.TOLERANCE * self.q
            for x in [xplus, xminus]:
                magnitude = np.abs(x)
                if np.any(magnitude < self.p - tol) or np.any(magnitude > self.q + tol):
                    raise ValueError(f'signal entries must have magnitude in [{self.p}, {self.q}]')
        scale = max(np.linalg.norm(xplus), 1.0)
        if signals.metric_D2(xplus, xminus) <= signals.TOLERANCE * scale:
            raise ValueError('witness signals are equal up to a global phase')
        xplus.setflags(write=False)
        xminus.setflags(write=False)
        object.__setattr__(self, 'xplus', xplus)
        object.__setattr__(self, 'xminus', xminus)
        object.__setattr__(self, 'p', float(self.p))
        object.__setattr__(self, 'q', float(self.q))

    @property
    def d(self):
        return self.xplus.size

    @property
    def eta(self):
        return self.d // 2 - self.delta

    @property
    def collision_class(self):
        """True for p = 0, where the measurements can coincide exactly"""
        return self.p == 0

    @property
    def distances(self):
        return signals.quotient_distances(self.xplus, self.xminus)


@dataclass(frozen=True)
class Certificate:
    """Lower bound on the Lipschitz constant of any inverse of one map

    `ratio` is signal_distance / measurement_distance, or +inf (with
    `infinite` set) when the measurements coincide.
    """
    kind: str
    signal_distance: float
    measurement_distance: float
    ratio: float
    rhs_no_const: float
    empirical_const: float
    bound_id: str
    infinite: bool = False
    collision_class: bool = False

    @property
    def note(self):
        if self.infinite:
            return 'collision - not Lipschitz-invertible on this class'
        if self.collision_class:
            return 'collision class - inverse not Lipschitz'
        return ''


def _check_atoll_params(d, delta, p, q, allow_zero_p=False):
    if not utils.is_integer(d) or not utils.is_integer(delta):
        raise TypeError('d and delta must be integers')
    if d % 2:
        raise ValueError(f'd must be even, got {d}')
    if delta < 1:
        raise ValueError(f'delta must be positive, got {delta}')
    if 4 * delta > d:
        raise ValueError(f'delta must be <= d/4 (d={d}, delta={delta})')
    if q <= 0:
        raise ValueError(f'q must be positive, got {q}')
    if p < 0 or (p == 0 and not allow_zero_p):
        raise ValueError(f'p must be positive, got {p}')
    if p > q:
        raise ValueError(f'p must be <= q (p={p}, q={q})')


def _atoll(d, delta, p, q):
    eta = d // 2 - delta
    blocks = [np.full(eta, q), np.full(delta, p), np.full(eta, q), np.full(delta, p)]
    xplus = np.concatenate(blocks).astype(np.complex128)
    blocks[2] = -blocks[2]
    xminus = np.concatenate(blocks).astype(np.complex128)
    return WitnessPair(xplus=xplus, xminus=xminus, p=p, q=q, delta=delta)


def atoll_unit(d, delta):
    """Unit atoll pair with exactly equal local measurements

    x+/-(n) = 1 on [1, d/2 - delta], 0 on (d/2 - delta, d/2],
    +/-1 on (d/2, d - delta] and 0 on (d - delta, d].

    Parameters
    ----------
    d : int
        Even signal length.
    delta : int
        Mask support size, delta <= d/4.

    Returns
    -------
    WitnessPair
        Pair with p = 0 and q = 1.

    """
    _check_atoll_params(d, delta, 0.0, 1.0, allow_zero_p=True)
    return _atoll(d, delta, 0.0, 1.0)


def atoll_pq(d, delta, p, q):
    """Atoll pair in the class C_{p,q}

    Blocks of value q, p, +/-q and p.

    Parameters
    ----------
    d : int
        Even signal length.
    delta : int
        Mask support size, delta <= d/4.
    p, q : float
        Magnitude bounds, 0 < p <= q.

    Returns
    -------
    WitnessPair

    """
    _check_atoll_params(d, delta, p, q)
    return _atoll(d, delta, float(p), float(q))


def atoll_d2(d, delta, q):
    """Closed form D2 distance of an atoll pair, q sqrt(2d - 4 delta)"""
    return q * math.sqrt(2 * d - 4 * delta)


def atoll_d1(d, delta, p, q):
    """Closed form d1 distance of an atoll pair, 4 q sqrt(eta^2 q^2 + 2 eta delta p^2)

    x+x+* - x-x-* is 2q times a matrix with the two nonzero singular values
    sqrt(eta^2 q^2 + 2 eta delta p^2).
    """
    eta = d // 2 - delta
    return 4 * q * math.sqrt(eta ** 2 * q ** 2 + 2 * eta * delta * p ** 2)


def _check_even_geometry(geom, delta):
    if not geom.even:
        raise ValueError(f'crossings need an even signal length, got d={geom.d}')
    if delta > geom.delta:
        raise ValueError(f'delta={delta} exceeds geometry delta={geom.delta}')


def crossing_offsets(geom, delta):
    """Shifts whose mask window straddles a block boundary

    Parameters
    ----------
    geom : MeasurementGeometry
    delta : int
        Mask support size.

    Returns
    -------
    dict
        Boundary label ('d/2' or 'd-delta') -> list of (l, j) pairs where
        j is the number of window positions on the p valued block:
        j = d/2 - l a at d/2 and j = l a + 2 delta - d at d - delta.

    """
    _check_even_geometry(geom, delta)
    d, a = geom.d, geom.a
    output = {boundary: [] for boundary in BOUNDARIES}
    for l in range(1, geom.L + 1):
        start = 1 + l * a
        stop = delta + l * a
        if start <= d // 2 < stop:
            output['d/2'].append((l, d // 2 - l * a))
        if start <= d - delta < stop:
            output['d-delta'].append((l, l * a + 2 * delta - d))
    return output


def crossing_indices(geom, delta):
    """Crossing shifts l in [1, L], labeled by boundary

    Returns
    -------
    dict
        Boundary label -> sorted list of shifts.

    """
    offsets = crossing_offsets(geom, delta)
    return {boundary: [l for l, _ in offsets[boundary]] for boundary in BOUNDARIES}


def p_block_entries(boundary, j, delta):
    """0-based mask entries that land on the p valued block at a crossing

    At d/2 these are the first j entries, at d - delta the last j.
    """
    if boundary == 'd/2':
        return slice(0, j)
    elif boundary == 'd-delta':
        return slice(delta - j, delta)
    raise ValueError(f'unsupported boundary: {boundary}')


def two_shot_crossings(geom, delta):
    """Entries (k, l) where two-shot measurements of an atoll pair differ

    Only the masks m_2j = e_1 + e_{j+1} see a difference, at shifts with
    l a + 1 <= boundary < l a + j + 1.

    Returns
    -------
    dict
        j -> {boundary label -> list of shifts l}.  The mask index is k = 2j.

    """
    _check_even_geometry(geom, delta)
    d, a = geom.d, geom.a
    output = {}
    for j in range(1, delta):
        output[j] = {boundary: [] for boundary in BOUNDARIES}
        for l in range(1, geom.L + 1):
            for boundary, position in zip(BOUNDARIES, [d // 2, d - delta]):
                if l * a + 1 <= position < l * a + j + 1:
                    output[j][boundary].append(l)
    return output


def _measurement_difference(family, geom, pair, kind):
    if family.d != pair.d:
        raise ValueError(f'dimension mismatch: family d={family.d}, pair d={pair.d}')
    plus = measurement.measure(family, geom, pair.xplus, kind=kind).values
    minus = measurement.measure(family, geom, pair.xminus, kind=kind).values
    return plus - minus


def measurement_gap(family, geom, pair, kind='Z'):
    """Frobenius norm of the measurement difference of a pair"""
    return float(np.linalg.norm(_measurement_difference(family, geom, pair, kind)))


def _signal_distance(pair, kind):
    if kind == 'Z':
        return signals.metric_D2(pair.xplus, pair.xminus)
    return signals.metric_d1(pair.xplus, pair.xminus)


def _ratio(signal_distance, gap):
    if gap > 0:
        return signal_distance / gap
    return math.inf


def certify(family, geom, pair, kind='Z'):
    """Certify a lower Lipschitz bound with a witness pair

    Any map B with B(Z(x)) = x on C_{p,q} has Lipschitz constant at least
    D2(x+, x-) / ||Z(x+) - Z(x-)||_2 (and likewise d1 with Y).

    Parameters
    ----------
    family : MaskFamily
    geom : MeasurementGeometry
    pair : WitnessPair
    kind : {'Z', 'Y'}, optional
        Map to certify (the default is 'Z').

    Returns
    -------
    Certificate

    Notes
    -----
    A pair with p = 0 is outside every C_{p,q}.  Its certificate is still
    computed but flagged as a collision class and has no matching bound.

    """
    if kind not in measurement.MAP_KINDS:
        raise ValueError(f'unsupported map kind: {kind}')
    signal_distance = _signal_distance(pair, kind)
    gap = measurement_gap(family, geom, pair, kind=kind)
    ratio = _ratio(signal_distance, gap)

    if pair.collision_class:
        logging.warning('Witness pair has p = 0: collision class, inverse not Lipschitz')
        bound_id = bounds.matching_bound_id(family.tag, kind)
        rhs_no_const = math.inf
        empirical_const = math.nan
    else:
        bound = bounds.family_bound(family, geom, pair.p, pair.q, kind)
        bound_id = bound.id
        rhs_no_const = bound.value
        empirical_const = ratio / rhs_no_const

    logging.debug(
        f'  Certificate {kind}: distance={signal_distance}, gap={gap}, ratio={ratio}'
    )
    return Certificate(
        kind=kind,
        signal_distance=signal_distance,
        measurement_distance=gap,
        ratio=ratio,
        rhs_no_const=rhs_no_const,
        empirical_const=empirical_const,
        bound_id=bound_id,
        infinite=math.isinf(ratio),
        collision_class=pair.collision_class,
    )


def entrywise_bound_check(family, geom, pair):
    """Largest violation of |Z-_{k,l} - Z+_{k,l}| <= 2 j p ||m||_inf

    Non crossing entries are held to a zero difference.

    Returns
    -------
    float
        max over (k, l) of |dZ_{k,l}| - bound_{k,l}; values <= 1e-12 (scaled
        by q ||m||_inf delta) mean the bound holds.

    """
    diff = np.abs(_measurement_difference(family, geom, pair, 'Z'))
    m_inf = measurement.mask_sup_norm(family)
    allowed = np.zeros(geom.L)
    for offsets in crossing_offsets(geom, pair.delta).values():
        for l, j in offsets:
            allowed[l - 1] = max(allowed[l - 1], 2 * j * pair.p * m_inf)
    return float(np.max(diff - allowed[None, :]))


def windowed_fourier_bound_check(family, geom, pair):
    """Largest violation of the exponential window entry bounds

    Checks |dZ_{k,l}| <= 2 p sum |m_k(n)| over the window entries on the p
    block at every crossing, and |Z+/-_{k,l}| <= q (2 delta - 1)^(-1/4) s / (1 - s)
    at every entry.

    Returns
    -------
    float
        Largest (value - bound) over all checked entries.

    """
    plus = measurement.measure(family, geom, pair.xplus, kind='Z').values
    minus = measurement.measure(family, geom, pair.xminus, kind='Z').values
    diff = np.abs(plus - minus)

    _, magnitude_bound = bounds.windowed_fourier_entry_bounds(
        family, pair.p, pair.q, slice(0, 0))
    violation = float(np.max(np.maximum(plus, minus)) - magnitude_bound)
    for boundary, offsets in crossing_offsets(geom, pair.delta).items():
        for l, j in offsets:
            difference_bound, _ = bounds.windowed_fourier_entry_bounds(
                family, pair.p, pair.q, p_block_entries(boundary, j, pair.delta))
            violation = max(violation, float(np.max(diff[:, l - 1] - difference_bound)))
    return violation


def gap_upper_bound(geom, K, m_inf, p, q, kind='Z'):
    """Upper bound on ||M(x+) - M(x-)||_2 for an atoll pair

    Sums the entrywise bound (2 j p ||m||_inf for Z, times 2 q delta ||m||_inf
    for Y) over every mask and crossing shift, without measuring.

    Returns
    -------
    float

    """
    if kind not in measurement.MAP_KINDS:
        raise ValueError(f'unsupported map kind: {kind}')
    total = 0.0
    for offsets in crossing_offsets(geom, geom.delta).values():
        for _, j in offsets:
            entry = 2 * j * p * m_inf
            if kind == 'Y':
                entry *= 2 * q * geom.delta * m_inf
            total += K * entry ** 2
    return math.sqrt(total)


def guaranteed_ratio(family, geom, p, q, kind='Z'):
    """Lower Lipschitz bound from closed forms only

    Closed form signal distance of the (p, q) atoll pair divided by
    `gap_upper_bound`.  No measurement is evaluated.
    """
    gap = gap_upper_bound(
        geom, family.K, measurement.mask_sup_norm(family), p, q, kind=kind)
    if kind == 'Z':
        distance = atoll_d2(geom.d, geom.delta, q)
    else:
        distance = atoll_d1(geom.d, geom.delta, p, q)
    return _ratio(distance, gap)


def two_shot_gap(geom, p, q, kind='Z'):
    """Exact measurement gap of an atoll pair under the two-shot masks

    Every two-shot crossing contributes 2p (Z) or 4pq (Y).
    """
    if kind not in measurement.MAP_KINDS:
        raise ValueError(f'unsupported map kind: {kind}')
    count = sum(
        len(shifts) for by_boundary in two_shot_crossings(geom, geom.delta).values()
        for shifts in by_boundary.values()
    )
    entry = 2 * p if kind == 'Z' else 4 * p * q
    return entry * math.sqrt(count)


def _pair_ratio(family, geom, xplus, xminus, kind):
    if kind == 'Z':
        distance = signals.metric_D2(xplus, xminus)
    else:
        distance = signals.metric_d1(xplus, xminus)
    plus = measurement.measure(family, geom, xplus, kind=kind).values
    minus = measurement.measure(family, geom, xminus, kind=kind).values
    return distance, _ratio(distance, float(np.linalg.norm(plus - minus)))


def improve_witness(family, geom, pair, budget, seed, kind='Z',
                    initial_step=0.5, final_step=1E-3):
    """Randomized hill climb on the certificate ratio

    Each step perturbs one entry of one signal (magnitude jitter clamped to
    [p, q] and phase jitter) and keeps the move only if the ratio increases.
    Step sizes are annealed geometrically from `initial_step` to
    `final_step` over the budget.

    Parameters
    ----------
    family : MaskFamily
    geom : MeasurementGeometry
    pair : WitnessPair
    budget : int
        Number of proposed moves.  A budget of 0 returns `pair` unchanged.
    seed : int
        Seed for numpy.random.default_rng; equal seeds give equal results.
    kind : {'Z', 'Y'}, optional
    initial_step, final_step : float, optional
        Relative step sizes (fractions of q - p for magnitudes, of pi for
        phases).

    Returns
    -------
    WitnessPair

    """
    if not utils.is_integer(budget) or budget < 0:
        raise ValueError(f'budget must be a non-negative integer, got {budget}')
    if budget == 0:
        return pair

    xs = [np.array(pair.xplus), np.array(pair.xminus)]
    _, best = _pair_ratio(family, geom, xs[0], xs[1], kind)
    if math.isinf(best):
        logging.debug('  Witness measurements already coincide, nothing to improve')
        return pair

    rng = np.random.default_rng(seed)
    start = best
    accepted = 0
    for i in range(budget):
        step = initial_step * (final_step / initial_step) ** (i / max(budget - 1, 1))
        side = int(rng.integers(2))
        n = int(rng.integers(pair.d))
        magnitude_jitter = rng.standard_normal()
        phase_jitter = rng.standard_normal()

        value = xs[side][n]
        magnitude = abs(value) + step * (pair.q - pair.p) * magnitude_jitter
        magnitude = min(max(magnitude, pair.p), pair.q)
        phase = np.angle(value) + step * np.pi * phase_jitter

        candidate = xs[side].copy()
        candidate[n] = magnitude * np.exp(1j * phase)
        trial = [candidate, xs[1]] if side == 0 else [xs[0], candidate]
        distance, ratio = _pair_ratio(family, geom, trial[0], trial[1], kind)
        if distance <= signals.TOLERANCE * pair.q or not ratio > best:
            continue
        xs = trial
        best = ratio
        accepted += 1

    logging.debug(
        f'  Witness search: {accepted}/{budget} moves accepted, ratio {start} -> {best}'
    )
    if accepted == 0:
        return pair
    return WitnessPair(xplus=xs[0], xminus=xs[1], p=pair.p, q=pair.q, delta=pair.delta)


def pair_to_dict(pair):
    """JSON container for a witness pair (the two signals are stored as masks)"""
    return {
        'd': pair.d,
        'delta': pair.delta,
        'tag': 'witness',
        'params': {'p': pair.p, 'q': pair.q},
        'masks': [utils.complex_to_pairs(pair.xplus), utils.complex_to_pairs(pair.xminus)],
    }


def pair_from_dict(data):
    """Rebuild a witness pair from its JSON container"""
    if not isinstance(data, dict) or data.get('tag') != 'witness':
        raise ValueError('not a witness container')
    try:
        params = data['params']
        xplus, xminus = [utils.pairs_to_complex(x) for x in data['masks']]
        p, q, delta, d = params['p'], params['q'], data['delta'], data['d']
    except (KeyError, TypeError, ValueError) as e:
        raise ValueError(f'malformed witness container: {e}')
    if xplus.size != d:
        raise ValueError(f'witness signals have length {xplus.size}, expected d={d}')
    return WitnessPair(xplus=xplus, xminus=xminus, p=p, q=q, delta=delta)


def save_pair(pair, file_path):
    """Write a witness pair to a JSON file"""
    utils.write_json(pair_to_dict(pair), file_path)


def load_pair(file_path):
    """Read a witness pair from a JSON file"""
    return pair_from_dict(utils.read_json(file_path))
