import argparse
import itertools
import json
import logging
import math
import os

import numpy as np


def arg_valid_file(file_path):
    """Argparse specific function for testing if file exists

    Convert relative paths to absolute paths
    """
    if os.path.isfile(os.path.abspath(os.path.realpath(file_path))):
        return os.path.abspath(os.path.realpath(file_path))
    else:
        raise argparse.ArgumentTypeError(f'{file_path} does not exist')


def arg_positive_int(input_value):
    """Argparse specific function for checking a positive integer

    Parameters
    ----------
    input_value : str

    Returns
    -------
    int

    Raises
    ------
    ArgParse ArgumentTypeError

    """
    try:
        value = int(input_value)
    except ValueError:
        raise argparse.ArgumentTypeError(f'Not an integer: "{input_value}".')
    if value <= 0:
        raise argparse.ArgumentTypeError(f'Not a positive integer: "{input_value}".')
    return value


def arg_int_list(input_value):
    """Argparse specific function for parsing an integer grid string

    Both comma separated values and dash ranges are supported,
    i.e. "4-8,16" -> [4, 5, 6, 7, 8, 16].  Values keep the order they
    are given in, repeated values are dropped with a warning.

    """
    values = []
    for token in str(input_value).split(','):
        for value in str_ranges_2_list(token):
            if value in values:
                logging.warning(f'Dropping repeated grid value {value} in "{input_value}"')
                continue
            values.append(value)
    if not values:
        raise argparse.ArgumentTypeError(f'No integers in "{input_value}".')
    return values


def arg_float_list(input_value):
    """Argparse specific function for parsing a comma separated float grid"""
    tokens = [x.strip() for x in str(input_value).split(',') if x.strip()]
    if not tokens or not all(is_number(x) for x in tokens):
        raise argparse.ArgumentTypeError(f'Not a list of numbers: "{input_value}".')
    return [float(x) for x in tokens]


def is_number(x):
    try:
        float(x)
        return True
    except (TypeError, ValueError):
        return False


def is_integer(x):
    """Check for a Python or numpy integer (bools are rejected)"""
    return isinstance(x, (int, np.integer)) and not isinstance(x, (bool, np.bool_))


def str_ranges_2_list(nputstr=""):
    """Return sorted list of integers given a string of ranges

    Tokens are comma separated and can be plain integers or dash ranges.
    Invalid tokens are logged and skipped.

    http://thoughtsbyclayg.blogspot.com/2008/10/parsing-list-of-numbers-in-python.html
    """
    selection = set()
    tokens = [x.strip() for x in str(nputstr).split(',') if x.strip()]
    for token in tokens:
        try:
            selection.add(int(token))
            continue
        except ValueError:
            pass
        try:
            bounds = sorted(int(k.strip()) for k in token.split('-'))
        except ValueError:
            logging.debug(f'  Skipping invalid range token: {token}')
            continue
        if len(bounds) > 1:
            selection.update(range(bounds[0], bounds[-1] + 1))

    return sorted(selection)


def list_2_str_ranges(i):
    """Return range strings given a list of numbers

    Modified from the example here:
    https://stackoverflow.com/questions/4628333/converting-a-list-of-integers-into-range-in-python
    """
    output = []
    for _, b in itertools.groupby(enumerate(sorted(set(i))), lambda pair: pair[1] - pair[0]):
        b = list(b)
        # Only create ranges for 3 or more numbers
        if b[0][1] != b[-1][1] and abs(b[-1][1] - b[0][1]) > 1:
            output.append('{}-{}'.format(b[0][1], b[-1][1]))
        elif b[0][1] != b[-1][1]:
            output.append('{},{}'.format(b[0][1], b[-1][1]))
        else:
            output.append('{}'.format(b[0][1]))

    return ','.join(output)


def complex_to_pairs(values):
    """Convert a complex vector to a list of [re, im] pairs for JSON

    Parameters
    ----------
    values : array_like

    Returns
    -------
    list

    """
    values = np.asarray(values, dtype=np.complex128)
    return [[float(v.real), float(v.imag)] for v in values]


def pairs_to_complex(pairs):
    """Convert a list of [re, im] pairs back to a complex vector

    Raises
    ------
    ValueError
        If any entry is not a two element numeric pair.

    """
    if not isinstance(pairs, list):
        raise ValueError('complex vector must be a list of [re, im] pairs')
    output = np.empty(len(pairs), dtype=np.complex128)
    for n, pair in enumerate(pairs):
        if (not isinstance(pair, (list, tuple)) or len(pair) != 2 or
                not all(is_number(v) and not isinstance(v, (bool, str)) for v in pair)):
            raise ValueError(f'entry {n + 1} is not a [re, im] pair: {pair}')
        output[n] = complex(float(pair[0]), float(pair[1]))
    return output


def read_json(file_path):
    """Read a JSON document

    Raises
    ------
    OSError
        If the file can't be read.
    ValueError
        If the file is not valid JSON.

    """
    with open(file_path, 'r') as f:
        try:
            return json.load(f)
        except json.JSONDecodeError as e:
            raise ValueError(f'malformed JSON in {file_path}: {e}')


def write_json(data, file_path):
    """Write a JSON document, building the parent folder if needed"""
    parent = os.path.dirname(os.path.abspath(file_path))
    if not os.path.isdir(parent):
        os.makedirs(parent)
    with open(file_path, 'w') as f:
        json.dump(data, f, indent=2, sort_keys=True)
        f.write('\n')


def format_float(value):
    """Format a float with 17 significant digits so it round trips

    Infinite values are written as "inf" and NaN as "nan".

    """
    if math.isinf(value):
        return 'inf' if value > 0 else '-inf'
    if math.isnan(value):
        return 'nan'
    return f'{value:.17g}'
