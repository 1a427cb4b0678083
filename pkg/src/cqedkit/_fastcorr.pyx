# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled all-pairs coincidence counting kernel."""
import numpy as np


def pair_histogram(double[::1] a, double[::1] b, double window,
                   double bin_width, bint exclude_self):
    """Histogram of delays t_b - t_a over all pairs within +/- window.

    Inputs must be sorted ascending.  Bins are centered on multiples of
    bin_width: n_half = round(window / bin_width) bins each side plus the
    zero bin.  With exclude_self, index-equal pairs are skipped (use for
    autocorrelation where a and b are the same array).
    """
    cdef Py_ssize_t na = a.shape[0]
    cdef Py_ssize_t nb = b.shape[0]
    cdef Py_ssize_t n_half = <Py_ssize_t> (window / bin_width + 0.5)
    cdef double edge = (n_half + 0.5) * bin_width
    counts_arr = np.zeros(2 * n_half + 1, dtype=np.int64)
    cdef long long[::1] counts = counts_arr
    cdef Py_ssize_t i, j, lo = 0, k
    cdef double t, d
    for i in range(na):
        t = a[i]
        while lo < nb and b[lo] < t - edge:
            lo += 1
        j = lo
        while j < nb and b[j] < t + edge:
            if not (exclude_self and j == i):
                d = b[j] - t
                k = <Py_ssize_t> ((d + edge) / bin_width)
                if 0 <= k <= 2 * n_half:
                    counts[k] += 1
            j += 1
    return counts_arr
