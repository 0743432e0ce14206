#!/usr/bin/env python3

# Copyright (C) 2021-2023 mfglab developers
# Published under the GNU GPL (Version 3), check at the LICENSE file

"""
This util files provides the tensorflow stencils used on the periodic space-time grid.
All arrays carry the spatial index on the last axis; every function works on a single
time level (shape (N,)) or on a whole trajectory (shape (M+1, N)).
"""

import numpy as np
import tensorflow as tf

# constrains wildcard imports - update if a utility is added...
__all__ = [
    "DTYPE",
    "str2bool",
    "compute_gradient_periodic",
    "compute_laplacian_periodic",
    "compute_gradient_staggered",
    "compute_gradient_time",
    "compute_divflux_periodic",
    "solve_periodic_diffusion",
    "fourier_shift",
]

DTYPE = tf.float64


def str2bool(v):
    return v.lower() in ("true", "1")


@tf.function()
def compute_gradient_periodic(s, dx):
    """
    centered first derivative (s_{i+1} - s_{i-1}) / (2 dx) with periodic wrap
    """
    return (tf.roll(s, shift=-1, axis=-1) - tf.roll(s, shift=1, axis=-1)) / (2.0 * dx)


@tf.function()
def compute_laplacian_periodic(s, dx):
    """
    centered second derivative (s_{i+1} - 2 s_i + s_{i-1}) / dx^2 with periodic wrap
    """
    return (
        tf.roll(s, shift=-1, axis=-1) - 2.0 * s + tf.roll(s, shift=1, axis=-1)
    ) / (dx * dx)


@tf.function()
def compute_gradient_staggered(s, dx):
    """
    one-sided difference (s_{i+1} - s_i) / dx, i.e. the gradient at the cell edge i+1/2
    """
    return (tf.roll(s, shift=-1, axis=-1) - s) / dx


@tf.function()
def compute_gradient_time(s, dt):
    """
    time derivative along axis 0: centered inside, second-order one-sided at both ends
    """
    first = (-3.0 * s[0:1] + 4.0 * s[1:2] - s[2:3]) / (2.0 * dt)
    inner = (s[2:] - s[:-2]) / (2.0 * dt)
    last = (3.0 * s[-1:] - 4.0 * s[-2:-1] + s[-3:-2]) / (2.0 * dt)
    return tf.concat([first, inner, last], 0)


def minmod(a, b):
    return tf.where( (tf.abs(a)<tf.abs(b))&(a*b>0.0), a, tf.where((tf.abs(a)>=tf.abs(b))&(a*b>0.0),b,tf.zeros_like(a)))


def maxmod(a, b):
    return tf.where( (tf.abs(a)<tf.abs(b))&(a*b>0.0), b, tf.where((tf.abs(a)>=tf.abs(b))&(a*b>0.0),a,tf.zeros_like(a)))


@tf.function()
def compute_divflux_periodic(v, h, dx, dt, slope_type):
    """
    upwind computation of the divergence of the flux d(v h)/dx on the periodic grid
    v is given on the staggered grid: v[i] lives on the cell edge i+1/2
    propose a slope limiter for the upwind scheme with 3 options : godunov, minmod, superbee

    With godunov the update h - dt * divflux stays nonnegative as long as
    2 dt max|v| / dx <= 1; the limited variants are TVD but have no such bound.
    The edge fluxes telescope, so sum(divflux) = 0 up to rounding.
    """

    hp = tf.roll(h, shift=-1, axis=-1)  # h_{i+1}
    hm = tf.roll(h, shift=1, axis=-1)  # h_{i-1}

    sigp = (hp - h) / dx
    sigm = (h - hm) / dx

    if slope_type == "godunov":
        slope = tf.zeros_like(h)

    elif slope_type == "minmod":
        slope = minmod(sigm, sigp)

    elif slope_type == "superbee":
        sig1 = minmod(sigp, 2.0 * sigm)
        sig2 = minmod(sigm, 2.0 * sigp)
        slope = maxmod(sig1, sig2)

    else:
        raise ValueError("slope_type must be godunov, minmod or superbee")

    w = h + 0.5 * dx * (1.0 - v * dt / dx) * slope  # left state at i+1/2
    e = hp - 0.5 * dx * (1.0 + v * dt / dx) * tf.roll(slope, shift=-1, axis=-1)

    Q = v * tf.where(v > 0, w, e)  # flux at i+1/2

    return (Q - tf.roll(Q, shift=1, axis=-1)) / dx


def solve_periodic_diffusion(rhs, coeff):
    """
    solve (I - coeff * L) s = rhs where L is the periodic (1, -2, 1) stencil,
    coeff = eps * dt / dx^2. The circulant matrix is diagonal in Fourier space
    with eigenvalues 1 + 4 coeff sin^2(pi k / N); the k = 0 eigenvalue is exactly 1,
    so sum(s) = sum(rhs).
    """
    rhs = tf.convert_to_tensor(rhs, dtype=DTYPE)
    n = rhs.shape[-1]
    k = tf.range(n, dtype=DTYPE)
    lam = 1.0 + 4.0 * coeff * tf.sin(np.pi * k / n) ** 2
    rhs_hat = tf.signal.fft(tf.complex(rhs, tf.zeros_like(rhs)))
    sol = tf.signal.ifft(rhs_hat / tf.complex(lam, tf.zeros_like(lam)))
    return tf.math.real(sol)


def fourier_shift(s, shifts, length):
    """
    periodic translation of each row: out(x) = s(x - shift) on [0, length)
    shifts has one entry per row; shifts that are whole multiples of the cell size
    are applied as exact rolls, the others by band-limited (spectral) interpolation
    """
    s = tf.convert_to_tensor(s, dtype=DTYPE)
    squeeze = len(s.shape) == 1
    if squeeze:
        s = s[tf.newaxis, :]
    n = s.shape[-1]
    dx = length / n
    shifts = np.broadcast_to(np.asarray(shifts, dtype=np.float64), (s.shape[0],))

    rows = []
    for r in range(s.shape[0]):
        cells = shifts[r] / dx
        if abs(cells - np.round(cells)) < 1e-9:
            rows.append(tf.roll(s[r], shift=int(np.round(cells)) % n, axis=0))
        else:
            k = np.arange(n // 2 + 1, dtype=np.float64)
            phase = np.exp(-2j * np.pi * k * shifts[r] / length)
            half = _rfft64(s[r]) * tf.constant(phase, dtype=tf.complex128)
            rows.append(_irfft64(half, n))
    out = tf.stack(rows, axis=0)

    return out[0] if squeeze else out


def _rfft64(s):
    full = tf.signal.fft(tf.complex(s, tf.zeros_like(s)))
    return full[: s.shape[-1] // 2 + 1]


def _irfft64(half, n):
    # rebuild the hermitian spectrum; the Nyquist mode (even n) keeps its real part only
    half = tf.convert_to_tensor(half, dtype=tf.complex128)
    if n % 2 == 0:
        nyq = tf.complex(tf.math.real(half[-1:]), tf.zeros_like(tf.math.real(half[-1:])))
        half = tf.concat([half[:-1], nyq], 0)
        tail = tf.math.conj(tf.reverse(half[1:-1], axis=[0]))
    else:
        tail = tf.math.conj(tf.reverse(half[1:], axis=[0]))
    return tf.math.real(tf.signal.ifft(tf.concat([half, tail], 0)))
