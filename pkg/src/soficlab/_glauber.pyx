# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled heat-bath sweep kernel.

Must stay arithmetic-identical to _glauber_py.glauber_sweeps: same loop
structure, same multiplication order, one uniform consumed per site update,
so both backends produce bitwise-equal trajectories from the same inputs.
"""


def glauber_sweeps(
    signed char[::1] x,
    long long[:, ::1] nbr_out,
    long long[:, ::1] nbr_in,
    double[::1] wh,
    double[:, :, ::1] wj,
    unsigned char[:, :, ::1] allowed,
    double[::1] uniforms,
    int sweeps,
):
    cdef int n = x.shape[0]
    cdef int n_gen = nbr_out.shape[0]
    cdef int a = wh.shape[0]
    cdef int t, v, s, c, pick
    cdef long long o, i
    cdef signed char xo, xi
    cdef double w, total, thr, cum
    cdef double weights[64]
    cdef Py_ssize_t base = 0

    if a > 64:
        raise ValueError("alphabet too large for kernel")

    for t in range(sweeps):
        for v in range(n):
            total = 0.0
            for c in range(a):
                w = wh[c]
                for s in range(n_gen):
                    o = nbr_out[s, v]
                    if o == v:
                        w = w * wj[s, c, c]
                    else:
                        xo = x[o]
                        if not allowed[s, c, xo]:
                            w = 0.0
                            break
                        w = w * wj[s, c, xo]
                        i = nbr_in[s, v]
                        xi = x[i]
                        if not allowed[s, xi, c]:
                            w = 0.0
                            break
                        w = w * wj[s, xi, c]
                weights[c] = w
                total = total + w
            if total > 0.0:
                thr = uniforms[base] * total
                pick = a - 1
                cum = 0.0
                for c in range(a):
                    cum = cum + weights[c]
                    if thr < cum:
                        pick = c
                        break
                x[v] = <signed char>pick
            base += 1
    return None
