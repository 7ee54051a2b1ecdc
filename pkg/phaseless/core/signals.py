"""Complex signal helpers, elementary operators and quotient metrics

Signals are stored as 1-D complex128 numpy arrays with 0-based storage.
Documented indices (entries n, shifts l, frequencies w) are 1-based.

"""
from dataclasses import dataclass

import numpy as np

from . import utils

TOLERANCE = 1E-10


@dataclass(frozen=True)
class QuotientDistances:
    """Distances between two signals modulo a global phase"""
    d2: float
    d1: float


def as_signal(x):
    """Convert an input vector to a complex signal

    Parameters
    ----------
    x : array_like
        Sequence of (complex) numbers.

    Returns
    -------
    numpy.ndarray
        Copy of the input as a 1-D complex128 array.

    Raises
    ------
    ValueError
        If the input is empty, not 1-D, or has a NaN/Inf entry.

    """
    output = np.array(x, dtype=np.complex128)
    if output.ndim != 1:
        raise ValueError(f'signal must be 1-D, got shape {output.shape}')
    if output.size < 1:
        raise ValueError('signal must have at least one entry')
    if not np.all(np.isfinite(output)):
        raise ValueError('signal entries must be finite')
    return output


def _check_lengths(x, y):
    if x.size != y.size:
        raise ValueError(f'signal length mismatch: {x.size} != {y.size}')


def unit_vector(d, n):
    """Standard basis vector e_n of length d (n is 1-based)"""
    if not utils.is_integer(d) or not utils.is_integer(n):
        raise TypeError('d and n must be integers')
    if not 1 <= n <= d:
        raise ValueError(f'n must be in [1, {d}], got {n}')
    output = np.zeros(d, dtype=np.complex128)
    output[n - 1] = 1
    return output


def cyclic_shift(x, shift):
    """Circular shift that moves the support right by `shift`

    Parameters
    ----------
    x : array_like
    shift : int
        Any integer, reduced modulo the signal length.

    Returns
    -------
    numpy.ndarray

    Notes
    -----
    output(n) = x(((n - shift - 1) mod d) + 1), so a mask supported on
    [1, delta] is mapped to [1 + shift, delta + shift] (mod d).
    The displayed shift definition (S_l x)(n) = x((n + l - 1) mod d + 1)
    moves the support left; the support statements used for every bound
    require this orientation instead.

    """
    x = as_signal(x)
    if not utils.is_integer(shift):
        raise TypeError(f'shift must be an integer, got {shift!r}')
    return np.roll(x, int(shift) % x.size)


def modulate(x, omega):
    """Modulation operator W_omega

    output(n) = exp(2 pi i (n - 1)(omega - 1) / d) x(n)

    Parameters
    ----------
    x : array_like
    omega : int
        Frequency index in [1, d].

    Returns
    -------
    numpy.ndarray

    Raises
    ------
    ValueError
        If `omega` is outside [1, d].

    """
    x = as_signal(x)
    d = x.size
    if not utils.is_integer(omega):
        raise TypeError(f'omega must be an integer, got {omega!r}')
    if not 1 <= omega <= d:
        raise ValueError(f'omega must be in [1, {d}], got {omega}')
    n = np.arange(d)
    return np.exp(2j * np.pi * n * (omega - 1) / d) * x


def reflect(x):
    """Reflect the entries about the first entry

    output(n) = x(((1 - n) mod d) + 1)
    """
    x = as_signal(x)
    return np.roll(x[::-1], 1)


def dft(x):
    """Unnormalized discrete Fourier transform, F_jk = exp(-2 pi i (j-1)(k-1) / d)"""
    return np.fft.fft(as_signal(x))


def idft(x):
    """Inverse of dft (carries the 1/d factor)"""
    return np.fft.ifft(as_signal(x))


def circular_convolve(x, y):
    """Circular convolution

    output(m) = sum_n x(n) y(((m - n) mod d) + 1)

    Evaluated through the convolution theorem with numpy.fft.

    Raises
    ------
    ValueError
        If the signal lengths differ.

    """
    x = as_signal(x)
    y = as_signal(y)
    _check_lengths(x, y)
    return np.fft.ifft(np.fft.fft(x) * np.fft.fft(y))


def hadamard(x, y):
    """Componentwise product"""
    x = as_signal(x)
    y = as_signal(y)
    _check_lengths(x, y)
    return x * y


def inner(x, y):
    """Inner product <x, y> = sum_n x(n) conj(y(n))

    Only |<x, y>| enters any measurement or bound, so the choice of which
    argument is conjugated is not observable.
    """
    x = as_signal(x)
    y = as_signal(y)
    _check_lengths(x, y)
    return np.vdot(y, x)


def _aligned_phase(x, y):
    # Unimodular factor u minimizing ||x - u y||
    c = np.vdot(y, x)
    if c == 0:
        return 1.0
    return c / abs(c)


def metric_D2(x, y):
    """Natural quotient metric, min over theta of ||x - exp(i theta) y||_2

    Parameters
    ----------
    x, y : array_like
        Signals of equal length.

    Returns
    -------
    float

    Notes
    -----
    The minimum equals sqrt(||x||^2 + ||y||^2 - 2 |<x, y>|) and is attained at
    theta = arg <x, y>. The residual is evaluated directly at that phase,
    which avoids the cancellation in the expanded form.

    """
    x = as_signal(x)
    y = as_signal(y)
    _check_lengths(x, y)
    return float(np.linalg.norm(x - _aligned_phase(x, y) * y))


def metric_d1(x, y):
    """Trace norm of the rank two matrix xx* - yy*

    Parameters
    ----------
    x, y : array_like
        Signals of equal length.

    Returns
    -------
    float

    Notes
    -----
    Restricted to span{x, y} the matrix has trace ||x||^2 - ||y||^2 and
    determinant |<x, y>|^2 - ||x||^2 ||y||^2, so its two singular values sum
    to sqrt((||x||^2 + ||y||^2)^2 - 4 |<x, y>|^2).  With u = exp(i arg <x, y>)
    this factors as ||x - u y|| * ||x + u y||, which is evaluated here.

    """
    x = as_signal(x)
    y = as_signal(y)
    _check_lengths(x, y)
    u = _aligned_phase(x, y)
    return float(np.linalg.norm(x - u * y) * np.linalg.norm(x + u * y))


def quotient_distances(x, y):
    """Compute both quotient metrics

    Returns
    -------
    QuotientDistances

    """
    return QuotientDistances(d2=metric_D2(x, y), d1=metric_d1(x, y))


def outer_difference(x, y):
    """Dense d x d matrix xx* - yy*"""
    x = as_signal(x)
    y = as_signal(y)
    _check_lengths(x, y)
    return np.outer(x, x.conj()) - np.outer(y, y.conj())
