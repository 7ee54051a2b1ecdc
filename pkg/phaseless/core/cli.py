"""Command line front end

    phaseless verify   identity, collision and metric checks
    phaseless certify  certificate for a single geometry
    phaseless sweep    certificates over parameter grids with a scaling fit
    phaseless masks    export/import mask family files

Exit codes: 0 success, 1 check violation or failed sweep row,
2 usage/config error, 3 I/O or mask file load error.

"""
import argparse
import csv
import io
import itertools
import json
import logging
import math
import sys
import time
from dataclasses import asdict, dataclass, fields

import numpy as np

from . import adapters
from . import bounds
from . import measurement
from . import signals
from . import utils
from . import witness

EXIT_OK = 0
EXIT_VIOLATION = 1
EXIT_USAGE = 2
EXIT_IO = 3

OUTPUT_FORMATS = ['csv', 'json']

# Grid axes in grid iteration order
GRID_AXES = ['d', 'L', 'delta', 'p', 'q', 'b']

COLLISION_TOLERANCE = 1E-12
METRIC_TOLERANCE = 1E-10
THETA_GRID_SIZE = 3600


class MaskFileError(ValueError):
    """A mask family file could not be loaded"""


@dataclass
class SweepConfig:
    """Parameter grids and run options shared by every subcommand

    L is None for the full shift set (a = 1, L = d at every grid point).
    """
    d: list
    delta: list
    L: list
    p: list
    q: list
    b: list
    family: str
    map: str
    seed: int
    budget: int
    out: str
    format: str
    trials: int
    masks: str

    @classmethod
    def from_dict(cls, data):
        """Build a config, filling missing keys with defaults

        Parameters
        ----------
        data : dict
            Keys mirror the class fields.  Scalars are accepted for grid
            axes and are promoted to single element lists.

        Returns
        -------
        SweepConfig

        Raises
        ------
        ValueError
            If a grid is empty, an option is unsupported or any grid point
            fails the geometry validation.

        """
        if not isinstance(data, dict):
            raise ValueError('config must be a JSON object')
        unknown = set(data.keys()) - set(f.name for f in fields(cls))
        if unknown:
            raise ValueError(f'unsupported config keys: {", ".join(sorted(unknown))}')

        defaults = {
            'd': [8], 'delta': [2], 'L': None, 'p': [1.0], 'q': [2.0], 'b': [8.0],
            'family': 'two-shot', 'map': 'Z', 'seed': 0, 'budget': 0,
            'out': None, 'format': 'csv', 'trials': 100, 'masks': None,
        }
        values = {}
        for key, default in defaults.items():
            if data.get(key) is None:
                if default is not None:
                    logging.debug(f'  {key} was not set, default to {default}')
                values[key] = default
            else:
                values[key] = data[key]

        for key in GRID_AXES:
            if values[key] is None:
                continue
            if not isinstance(values[key], (list, tuple)):
                values[key] = [values[key]]
            values[key] = list(values[key])
            if not values[key]:
                raise ValueError(f'the {key} grid is empty')
        for key in ['d', 'delta']:
            if not all(utils.is_integer(v) for v in values[key]):
                raise ValueError(f'{key} grid values must be integers')
        if values['L'] is not None and not all(utils.is_integer(v) for v in values['L']):
            raise ValueError('L grid values must be integers')
        for key in ['p', 'q', 'b']:
            if not all(utils.is_number(v) and not isinstance(v, (bool, str))
                       for v in values[key]):
                raise ValueError(f'{key} grid values must be numbers')
            values[key] = [float(v) for v in values[key]]

        if values['family'] not in measurement.FAMILY_TAGS:
            raise ValueError(f'unsupported family: {values["family"]}')
        if values['map'] not in measurement.MAP_KINDS:
            raise ValueError(f'unsupported map kind: {values["map"]}')
        if values['format'] not in OUTPUT_FORMATS:
            raise ValueError(f'unsupported output format: {values["format"]}')
        if not utils.is_integer(values['seed']):
            raise ValueError(f'seed must be an integer, got {values["seed"]}')
        if not utils.is_integer(values['budget']) or values['budget'] < 0:
            raise ValueError(f'budget must be a non-negative integer, got {values["budget"]}')
        if not utils.is_integer(values['trials']) or values['trials'] <= 0:
            raise ValueError(f'trials must be a positive integer, got {values["trials"]}')
        if values['family'] == 'custom' and not values['masks']:
            raise ValueError('the custom family needs a mask file (--masks)')

        config = cls(**values)
        for point in config.grid():
            validate_point(point)
        return config

    def grid(self):
        """Grid points (dicts keyed by GRID_AXES) in a fixed order"""
        L_grid = self.L if self.L is not None else [None]
        for d, L, delta, p, q, b in itertools.product(
                self.d, L_grid, self.delta, self.p, self.q, self.b):
            yield {'d': d, 'L': d if L is None else L, 'delta': delta,
                   'p': p, 'q': q, 'b': b}

    def varying_axes(self):
        """Grid axes with more than one value"""
        return [key for key in GRID_AXES
                if getattr(self, key) is not None and len(getattr(self, key)) > 1]


@dataclass
class SweepRow:
    d: int
    delta: int
    a: int
    L: int
    K: int
    p: float
    q: float
    family: str
    map: str
    signal_distance: float
    measurement_distance: float
    ratio: float
    rhs_no_const: float
    empirical_const: float
    wall_time: float
    error: str = ''


def validate_point(point):
    """Check the geometry and magnitude constraints of a single grid point"""
    try:
        geom = measurement.validate_geometry(point['d'], point['L'], point['delta'])
    except TypeError as e:
        raise ValueError(str(e))
    if point['p'] < 0:
        raise ValueError(f'p must be non-negative, got {point["p"]}')
    if point['q'] <= 0:
        raise ValueError(f'q must be positive, got {point["q"]}')
    if point['p'] > point['q']:
        raise ValueError(f'p must be <= q (p={point["p"]}, q={point["q"]})')
    if point['b'] <= 0:
        raise ValueError(f'b must be positive, got {point["b"]}')
    return geom


def load_masks(file_path, d=None):
    """Load a mask family file, reporting any failure as a MaskFileError"""
    try:
        return measurement.load_family(file_path, d=d)
    except ValueError as e:
        raise MaskFileError(f'unable to load mask file {file_path}: {e}')


def spread_frequencies(d, count):
    """`count` distinct frequencies (1-based) spread evenly over [1, d]"""
    count = min(count, d)
    return [1 + (k * d) // count for k in range(count)]


def build_family(tag, d, delta, b, rng, masks_path=None):
    """Build the mask family for one grid point

    STFT families use a random window and 2 delta - 1 evenly spread
    frequencies, masked Fourier families use 2 delta - 1 random bandlimited
    vectors.  Custom families are read from `masks_path`.

    """
    if tag == 'two-shot':
        return measurement.two_shot_family(d, delta)
    elif tag == 'windowed-fourier':
        return measurement.windowed_fourier_family(d, delta, b=b)
    elif tag == 'stft':
        spec = adapters.StftSpec(
            window=adapters.random_window(d, delta, rng),
            frequencies=spread_frequencies(d, 2 * delta - 1),
            delta=delta,
        )
        return adapters.stft_family(spec)
    elif tag == 'masked-fourier':
        vectors = [adapters.random_bandlimited(d, delta, rng) for _ in range(2 * delta - 1)]
        spec = adapters.MaskedFourierSpec(vectors=np.array(vectors), delta=delta)
        return adapters.masked_fourier_family(spec)
    elif tag == 'custom':
        if not masks_path:
            raise ValueError('the custom family needs a mask file (--masks)')
        return load_masks(masks_path, d=d)
    raise ValueError(f'unsupported family: {tag}')


def build_pair(d, delta, p, q):
    """Atoll pair for a grid point (the unit pair when p = 0)"""
    if p == 0:
        if q != 1:
            logging.debug(f'  p = 0 uses the unit atoll pair, q={q} is ignored')
        return witness.atoll_unit(d, delta)
    return witness.atoll_pq(d, delta, p, q)


def certify_point(config, point, rng):
    """Build the family and witness for a grid point and certify it"""
    geom = validate_point(point)
    family = build_family(
        config.family, geom.d, geom.delta, point['b'], rng, masks_path=config.masks)
    pair = build_pair(geom.d, geom.delta, point['p'], point['q'])
    if config.budget > 0 and not pair.collision_class:
        pair = witness.improve_witness(
            family, geom, pair, budget=config.budget,
            seed=int(rng.integers(2 ** 32)), kind=config.map)
    return geom, family, pair, witness.certify(family, geom, pair, kind=config.map)


def sweep_row(config, point, index):
    """Evaluate one grid point, recording a failure in the error column"""
    rng = np.random.default_rng((config.seed, index))
    start = time.perf_counter()
    try:
        geom, family, _, cert = certify_point(config, point, rng)
    except MaskFileError:
        raise
    except ValueError as e:
        logging.warning(f'Grid point {point} failed: {e}')
        return SweepRow(
            d=point['d'], delta=point['delta'], a=point['d'] // point['L'],
            L=point['L'], K=0, p=point['p'], q=point['q'], family=config.family,
            map=config.map, signal_distance=math.nan, measurement_distance=math.nan,
            ratio=math.nan, rhs_no_const=math.nan, empirical_const=math.nan,
            wall_time=time.perf_counter() - start, error=str(e),
        )
    return SweepRow(
        d=geom.d, delta=geom.delta, a=geom.a, L=geom.L, K=family.K,
        p=point['p'], q=point['q'], family=family.tag, map=cert.kind,
        signal_distance=cert.signal_distance,
        measurement_distance=cert.measurement_distance,
        ratio=cert.ratio, rhs_no_const=cert.rhs_no_const,
        empirical_const=cert.empirical_const,
        wall_time=time.perf_counter() - start,
        error=cert.note,
    )


def sweep_fit(config, rows):
    """Scaling fit of the certificate ratio along the single varying axis

    Returns None if zero or several axes vary or fewer than three rows have
    a finite positive ratio.
    """
    axes = config.varying_axes()
    if len(axes) != 1:
        logging.info(f'No scaling fit: {len(axes)} grid axes vary')
        return None
    axis = axes[0]
    points = [
        (getattr(row, axis), row.ratio) for row in rows
        if not row.error and math.isfinite(row.ratio) and row.ratio > 0
    ]
    try:
        fit = bounds.fit_scaling(points, axis=axis)
    except ValueError as e:
        logging.info(f'No scaling fit: {e}')
        return None
    logging.info(f'Scaling fit ({axis}): exponent={fit.exponent:.6f}, r2={fit.r2:.6f}')
    return fit


def _json_value(value):
    if isinstance(value, float) and not math.isfinite(value):
        return utils.format_float(value)
    return value


def _csv_value(value):
    if isinstance(value, float):
        return utils.format_float(value)
    return value


def format_rows(rows, fit, output_format):
    """Serialize sweep rows and the fit summary as CSV or JSON text"""
    if output_format == 'json':
        data = {
            'rows': [{k: _json_value(v) for k, v in asdict(row).items()} for row in rows],
            'fit': None if fit is None else {
                'axis': fit.axis,
                'exponent': fit.exponent,
                'intercept': fit.intercept,
                'r2': fit.r2,
                'points': [list(p) for p in fit.points],
            },
        }
        return json.dumps(data, indent=2, sort_keys=True) + '\n'

    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator='\n')
    writer.writerow([f.name for f in fields(SweepRow)])
    for row in rows:
        writer.writerow([_csv_value(v) for v in asdict(row).values()])
    if fit is not None:
        buffer.write(f'# fit axis={fit.axis}\n')
        buffer.write(f'# fit exponent={utils.format_float(fit.exponent)}\n')
        buffer.write(f'# fit intercept={utils.format_float(fit.intercept)}\n')
        buffer.write(f'# fit r2={utils.format_float(fit.r2)}\n')
    return buffer.getvalue()


def emit(text, out=None):
    """Print to stdout or write to the output file"""
    if out:
        with open(out, 'w') as f:
            f.write(text)
        logging.info(f'Wrote {out}')
    else:
        sys.stdout.write(text)


def cmd_sweep(config):
    """One certificate row per grid point plus a scaling fit"""
    rows = []
    for index, point in enumerate(config.grid()):
        logging.debug(f'Grid point {index}: {point}')
        rows.append(sweep_row(config, point, index))
    fit = sweep_fit(config, rows)
    emit(format_rows(rows, fit, config.format), config.out)

    failed = sum(1 for row in rows if math.isnan(row.ratio))
    if failed:
        logging.error(f'{failed} of {len(rows)} grid points failed')
        return EXIT_VIOLATION
    return EXIT_OK


def cmd_certify(config):
    """Certificate for a single grid point"""
    points = list(config.grid())
    if len(points) != 1:
        raise ValueError(f'certify needs a single grid point, got {len(points)}')
    rng = np.random.default_rng((config.seed, 0))
    geom, family, pair, cert = certify_point(config, points[0], rng)

    report = {
        'd': geom.d, 'delta': geom.delta, 'a': geom.a, 'L': geom.L, 'K': family.K,
        'p': pair.p, 'q': pair.q, 'family': family.tag,
    }
    report.update(asdict(cert))
    report['note'] = cert.note
    if config.format == 'json':
        text = json.dumps(
            {k: _json_value(v) for k, v in report.items()}, indent=2, sort_keys=True) + '\n'
    else:
        text = ''.join(f'{k}: {_csv_value(v)}\n' for k, v in report.items())
    emit(text, config.out)
    if cert.note:
        logging.warning(cert.note)
    return EXIT_OK


@dataclass
class CheckResult:
    name: str
    deviation: float
    tolerance: float
    count: int

    @property
    def passed(self):
        return self.deviation <= self.tolerance


def _worst(name, results):
    # results are (deviation, tolerance) pairs, reduce to the largest relative deviation
    deviation, tolerance = max(results, key=lambda r: r[0] / r[1])
    return CheckResult(name=name, deviation=deviation, tolerance=tolerance, count=len(results))


def _random_signal(d, rng):
    return rng.standard_normal(d) + 1j * rng.standard_normal(d)


def _grid_d2(x, y, count=THETA_GRID_SIZE):
    """D2 by brute force minimization over a uniform grid of global phases"""
    theta = np.linspace(0, 2 * np.pi, count, endpoint=False)
    cross = np.real(np.exp(-1j * theta) * signals.inner(x, y))
    squared = np.vdot(x, x).real + np.vdot(y, y).real - 2 * cross
    return float(np.sqrt(max(np.min(squared), 0.0)))


def verify_point(config, point, rng, extra_family=None):
    """Run every check at one grid point

    Returns
    -------
    list of CheckResult

    """
    geom = validate_point(point)
    d, delta = geom.d, geom.delta
    trials = config.trials
    checks = []

    stft = []
    for _ in range(trials):
        spec = adapters.StftSpec(
            window=adapters.random_window(d, delta, rng),
            frequencies=spread_frequencies(d, 2 * delta - 1), delta=delta)
        x = _random_signal(d, rng)
        stft.append((adapters.verify_stft_identity(spec, geom, x),
                     adapters.stft_tolerance(spec, x)))
    checks.append(_worst('stft identity', stft))

    masked = []
    for _ in range(trials):
        vectors = [adapters.random_bandlimited(d, delta, rng) for _ in range(2 * delta - 1)]
        spec = adapters.MaskedFourierSpec(vectors=np.array(vectors), delta=delta)
        x = _random_signal(d, rng)
        masked.append((adapters.verify_masked_fourier_identity(spec, geom, x),
                       adapters.masked_fourier_tolerance(spec, x)))
    checks.append(_worst('masked fourier identity', masked))

    if not geom.even:
        logging.info(f'Skipping witness checks for odd d={d}')
        return checks

    families = [
        measurement.two_shot_family(d, delta),
        measurement.windowed_fourier_family(d, delta, b=point['b']),
    ]
    families.extend(measurement.random_family(d, delta, 2 * delta - 1, rng)
                    for _ in range(trials))
    if extra_family is not None:
        families.append(extra_family)
    unit = witness.atoll_unit(d, delta)
    collision = []
    for family in families:
        scale = max(measurement.mask_sup_norm(family) * delta, 1.0)
        y, z = [witness.measurement_gap(family, geom, unit, kind=kind) for kind in ['Y', 'Z']]
        collision.append((z, COLLISION_TOLERANCE * scale))
        collision.append((y, COLLISION_TOLERANCE * scale ** 2))
    checks.append(_worst('atoll collision', collision))

    q = point['q']
    p = point['p'] if point['p'] > 0 else q
    pair = witness.atoll_pq(d, delta, p, q)
    singular_values = np.linalg.svd(
        signals.outer_difference(pair.xplus, pair.xminus), compute_uv=False)
    oracle_d1 = float(np.sum(singular_values))
    closed_d1 = witness.atoll_d1(d, delta, p, q)
    closed_d2 = witness.atoll_d2(d, delta, q)
    checks.append(_worst('d1 closed form', [
        (abs(signals.metric_d1(pair.xplus, pair.xminus) - oracle_d1), METRIC_TOLERANCE * oracle_d1),
        (abs(closed_d1 - oracle_d1), METRIC_TOLERANCE * oracle_d1),
    ]))
    oracle_d2 = _grid_d2(pair.xplus, pair.xminus)
    checks.append(_worst('D2 closed form', [
        (abs(signals.metric_D2(pair.xplus, pair.xminus) - oracle_d2), METRIC_TOLERANCE * oracle_d2),
        (abs(closed_d2 - oracle_d2), METRIC_TOLERANCE * oracle_d2),
    ]))
    checks.append(_worst('entrywise bound', [
        (max(witness.entrywise_bound_check(family, geom, pair), 0.0),
         COLLISION_TOLERANCE * max(q * measurement.mask_sup_norm(family) * delta, 1.0))
        for family in families
    ]))
    return checks


def cmd_verify(config):
    """Identity, collision and metric checks over the grid"""
    extra_family = None
    results = []
    for index, point in enumerate(config.grid()):
        rng = np.random.default_rng((config.seed, index))
        if config.masks:
            extra_family = load_masks(config.masks, d=point['d'])
        for check in verify_point(config, point, rng, extra_family=extra_family):
            results.append((point, check))

    lines = []
    for point, check in results:
        status = 'ok' if check.passed else 'FAIL'
        lines.append(
            f'd={point["d"]} L={point["L"]} delta={point["delta"]} {check.name}: '
            f'max deviation {check.deviation:.3e} (tol {check.tolerance:.3e}, '
            f'{check.count} cases) {status}\n'
        )
    emit(''.join(lines), config.out)

    failed = [check.name for _, check in results if not check.passed]
    if failed:
        logging.error(f'Failed checks: {", ".join(sorted(set(failed)))}')
        return EXIT_VIOLATION
    return EXIT_OK


def cmd_masks(config, action, file_path, d=None):
    """Export a generated family to a file or import and summarize one"""
    if action == 'export':
        points = list(config.grid())
        if len(points) != 1:
            raise ValueError(f'masks export needs a single grid point, got {len(points)}')
        point = points[0]
        rng = np.random.default_rng((config.seed, 0))
        family = build_family(
            config.family, point['d'], point['delta'], point['b'], rng,
            masks_path=config.masks)
        measurement.save_family(family, file_path)
    elif action == 'import':
        family = load_masks(file_path, d=d)
    else:
        raise ValueError(f'unsupported masks action: {action}')

    support = np.nonzero(np.any(family.masks != 0, axis=0))[0] + 1
    print(f'tag: {family.tag}')
    print(f'd: {family.d}')
    print(f'delta: {family.delta}')
    print(f'K: {family.K}')
    print(f'support: {utils.list_2_str_ranges(support.tolist())}')
    print(f'sup norm: {utils.format_float(measurement.mask_sup_norm(family))}')
    return EXIT_OK


def arg_parse(argv=None):
    """Parse the command line"""
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        '--d', type=utils.arg_int_list, default=None, metavar='INTS',
        help='Signal length grid, i.e. "64,128,256" or "8-16" (rows follow the given order)')
    common.add_argument(
        '--L', type=utils.arg_int_list, default=None, metavar='INTS',
        help='Shift count grid (each value must divide d), default L = d')
    common.add_argument(
        '--delta', type=utils.arg_int_list, default=None, metavar='INTS',
        help='Mask support size grid')
    common.add_argument(
        '--p', type=utils.arg_float_list, default=None, metavar='FLOATS',
        help='Lower magnitude bound grid')
    common.add_argument(
        '--q', type=utils.arg_float_list, default=None, metavar='FLOATS',
        help='Upper magnitude bound grid')
    common.add_argument(
        '--b', type=utils.arg_float_list, default=None, metavar='FLOATS',
        help='Window decay parameter grid (windowed Fourier families)')
    common.add_argument(
        '--family', choices=measurement.FAMILY_TAGS, default=None,
        help='Mask family')
    common.add_argument(
        '--map', choices=measurement.MAP_KINDS, default=None,
        help='Measurement map (Z magnitudes or Y squared magnitudes)')
    common.add_argument('--seed', type=int, default=None, help='Random seed')
    common.add_argument(
        '--budget', type=int, default=None,
        help='Witness search budget (0 disables the search)')
    common.add_argument(
        '--trials', type=utils.arg_positive_int, default=None,
        help='Random trials per verify check')
    common.add_argument(
        '--masks', type=utils.arg_valid_file, default=None, metavar='PATH',
        help='Mask family file (custom family, extra verify family)')
    common.add_argument('--out', default=None, metavar='PATH', help='Output file')
    common.add_argument(
        '--format', choices=OUTPUT_FORMATS, default=None, help='Output format')
    common.add_argument(
        '--config', default=None, metavar='PATH',
        help='JSON config mirroring the sweep configuration')
    common.add_argument(
        '--debug', default=logging.INFO, const=logging.DEBUG,
        help='Debug level logging', action='store_const', dest='loglevel')

    parser = argparse.ArgumentParser(
        prog='phaseless',
        description='Lower Lipschitz bound certificates for local phaseless measurements',
        formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    subparsers = parser.add_subparsers(dest='command', required=True)
    subparsers.add_parser('verify', parents=[common], help='Run the identity and collision checks')
    subparsers.add_parser('certify', parents=[common], help='Certify a single geometry')
    subparsers.add_parser('sweep', parents=[common], help='Certify parameter grids')
    masks = subparsers.add_parser('masks', parents=[common], help='Export or import mask files')
    masks.add_argument('action', choices=['export', 'import'])
    masks.add_argument('path', help='Mask family JSON file')
    return parser.parse_args(argv)


def build_config(args):
    """Merge defaults, the optional config file and command line flags"""
    data = {}
    if args.config:
        data = utils.read_json(args.config)
        if not isinstance(data, dict):
            raise ValueError('config must be a JSON object')
        logging.debug(f'Read config {args.config}')
    for key in [f.name for f in fields(SweepConfig)]:
        value = getattr(args, key, None)
        if value is not None:
            data[key] = value
    return SweepConfig.from_dict(data)


def main(argv=None):
    args = arg_parse(argv)
    logging.basicConfig(level=args.loglevel, format='%(message)s')

    try:
        if args.command == 'masks' and args.action == 'import':
            return cmd_masks(None, 'import', args.path, d=args.d[0] if args.d else None)
        config = build_config(args)
        if args.command == 'verify':
            return cmd_verify(config)
        elif args.command == 'certify':
            return cmd_certify(config)
        elif args.command == 'sweep':
            return cmd_sweep(config)
        return cmd_masks(config, args.action, args.path)
    except MaskFileError as e:
        logging.error(str(e))
        return EXIT_IO
    except OSError as e:
        logging.error(f'I/O error: {e}')
        return EXIT_IO
    except (ValueError, TypeError) as e:
        logging.error(f'Invalid configuration: {e}')
        return EXIT_USAGE


if __name__ == '__main__':
    sys.exit(main())
