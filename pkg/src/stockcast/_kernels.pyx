# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled online-SGD kernel for sigmoid MLPs.

Parameter layout is flat: for each non-input layer, the (fan_in x units)
weight block in row-major order followed by the bias vector. Arithmetic
order matches ``stockcast._reference`` operation for operation, so both
backends produce identical bits on the same libm.
"""

from libc.math cimport exp, isfinite
from libc.stdlib cimport malloc, free

import numpy as np

cdef double ONE_MINUS = 1.0 - 2.0 ** -53
cdef double TINY = 2.2250738585072014e-308


cdef inline double _sigmoid(double x) noexcept nogil:
    cdef double e, s
    if x >= 0.0:
        e = exp(-x)
        s = 1.0 / (1.0 + e)
    else:
        e = exp(x)
        s = e / (1.0 + e)
    if s > ONE_MINUS:
        s = ONE_MINUS
    elif s < TINY:
        s = TINY
    return s


cdef long _sgd(double* params, const long* sizes, long n_layers,
               const double* X, const double* Y, long n, double rate,
               long epochs, double* mse_out, double* act, double* delta,
               const long* act_off, const long* par_off) noexcept nogil:
    cdef long n_in = sizes[0]
    cdef long n_out = sizes[n_layers - 1]
    cdef long ep, s, l, i, j, k, fan, m
    cdef double total, se, diff, o, ai, acc
    cdef double* W
    cdef double* b
    cdef double* z
    cdef double* a
    cdef double* d
    cdef double* dprev
    cdef const double* x
    cdef const double* y

    for ep in range(epochs):
        total = 0.0
        for s in range(n):
            x = X + s * n_in
            y = Y + s * n_out
            for i in range(n_in):
                act[i] = x[i]
            # forward
            for l in range(1, n_layers):
                fan = sizes[l - 1]
                m = sizes[l]
                W = params + par_off[l]
                b = W + fan * m
                a = act + act_off[l - 1]
                z = act + act_off[l]
                for j in range(m):
                    z[j] = b[j]
                for i in range(fan):
                    ai = a[i]
                    for j in range(m):
                        z[j] += ai * W[i * m + j]
                for j in range(m):
                    z[j] = _sigmoid(z[j])
            # output error
            a = act + act_off[n_layers - 1]
            d = delta + act_off[n_layers - 1]
            se = 0.0
            for k in range(n_out):
                o = a[k]
                diff = o - y[k]
                se += diff * diff
                d[k] = diff * o * (1.0 - o)
            if not isfinite(se):
                return ep
            total += se
            # backward with in-place update
            for l in range(n_layers - 1, 0, -1):
                fan = sizes[l - 1]
                m = sizes[l]
                W = params + par_off[l]
                b = W + fan * m
                a = act + act_off[l - 1]
                d = delta + act_off[l]
                if l > 1:
                    dprev = delta + act_off[l - 1]
                    for i in range(fan):
                        ai = a[i]
                        acc = 0.0
                        for j in range(m):
                            acc += W[i * m + j] * d[j]
                            W[i * m + j] -= rate * (ai * d[j])
                        dprev[i] = acc * ai * (1.0 - ai)
                else:
                    for i in range(fan):
                        ai = a[i]
                        for j in range(m):
                            W[i * m + j] -= rate * (ai * d[j])
                for j in range(m):
                    b[j] -= rate * d[j]
        mse_out[ep] = total / n
        if not isfinite(mse_out[ep]):
            return ep
    return epochs


def sgd_epochs(double[::1] params, long[::1] sizes, double[:, ::1] X,
               double[:, ::1] Y, double rate, long epochs, double[::1] mse_out):
    """Run ``epochs`` passes of per-sample SGD in place.

    Returns the number of epochs completed; fewer than ``epochs`` means a
    non-finite error appeared during the next one.
    """
    cdef long n_layers = sizes.shape[0]
    cdef long n = X.shape[0]
    cdef long total_units = 0
    cdef long l
    if n == 0 or epochs <= 0:
        return 0
    cdef long* act_off = <long*> malloc(n_layers * sizeof(long))
    cdef long* par_off = <long*> malloc(n_layers * sizeof(long))
    for l in range(n_layers):
        act_off[l] = total_units
        total_units += sizes[l]
    par_off[0] = 0
    for l in range(1, n_layers):
        if l == 1:
            par_off[l] = 0
        else:
            par_off[l] = par_off[l - 1] + sizes[l - 2] * sizes[l - 1] + sizes[l - 1]
    cdef double* act = <double*> malloc(total_units * sizeof(double))
    cdef double* delta = <double*> malloc(total_units * sizeof(double))
    cdef long done
    try:
        with nogil:
            done = _sgd(&params[0], &sizes[0], n_layers, &X[0, 0], &Y[0, 0], n,
                        rate, epochs, &mse_out[0], act, delta, act_off, par_off)
    finally:
        free(act)
        free(delta)
        free(act_off)
        free(par_off)
    return done
