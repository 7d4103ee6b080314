# cython: language_level=3
"""Compiled Monte Carlo kernel.

Mirror of ``_pure.run_chunk``: same generator, same scalar special
functions, same operation order, same corner case guards.  The build
disables floating point contraction so results match the pure kernel bit
for bit; treat the two files as one unit when editing either.
"""

from libc.math cimport (
    exp, expm1, fabs, floor, log, log1p, pow, sqrt, INFINITY, M_PI,
)

BACKEND = "fast"

cdef double SQRT2 = sqrt(2.0)
cdef double SQRT_2PI = sqrt(2.0 * M_PI)
cdef double INV_SQRT_PI = 5.6418958354775628695e-1
cdef double INV_2_53 = 1.0 / 9007199254740992.0

ctypedef unsigned long long u64

cdef u64 GOLDEN = 0x9E3779B97F4A7C15ULL


# ---------------------------------------------------------------------------
# xoshiro256++ seeded through splitmix64, as in rng.RngStream.
# ---------------------------------------------------------------------------

cdef struct RngState:
    u64 s0
    u64 s1
    u64 s2
    u64 s3


cdef inline u64 _splitmix64(u64* state) noexcept nogil:
    state[0] = state[0] + GOLDEN
    cdef u64 z = state[0]
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL
    return z ^ (z >> 31)


cdef inline u64 _rotl(u64 x, int k) noexcept nogil:
    return (x << k) | (x >> (64 - k))


cdef inline void _rng_init(RngState* rng, u64 seed, u64 stream_index) noexcept nogil:
    cdef u64 sm = seed ^ ((stream_index + 1) * GOLDEN)
    rng.s0 = _splitmix64(&sm)
    rng.s1 = _splitmix64(&sm)
    rng.s2 = _splitmix64(&sm)
    rng.s3 = _splitmix64(&sm)


cdef inline u64 _rng_next(RngState* rng) noexcept nogil:
    cdef u64 result = _rotl(rng.s0 + rng.s3, 23) + rng.s0
    cdef u64 t = rng.s1 << 17
    rng.s2 ^= rng.s0
    rng.s3 ^= rng.s1
    rng.s1 ^= rng.s2
    rng.s0 ^= rng.s3
    rng.s2 ^= t
    rng.s3 = _rotl(rng.s3, 45)
    return result


cdef inline double _rng_uniform(RngState* rng) noexcept nogil:
    return (_rng_next(rng) >> 11) * INV_2_53


# ---------------------------------------------------------------------------
# Error function family (same rational approximations as numerics).
# ---------------------------------------------------------------------------

cdef double[5] ERF_A = [
    3.16112374387056560e0, 1.13864154151050156e2, 3.77485237685302021e2,
    3.20937758913846947e3, 1.85777706184603153e-1]
cdef double[4] ERF_B = [
    2.36012909523441209e1, 2.44024637934444173e2, 1.28261652607737228e3,
    2.84423683343917062e3]
cdef double[9] ERF_C = [
    5.64188496988670089e-1, 8.88314979438837594e0, 6.61191906371416295e1,
    2.98635138197400131e2, 8.81952221241769090e2, 1.71204761263407058e3,
    2.05107837782607147e3, 1.23033935479799725e3, 2.15311535474403846e-8]
cdef double[8] ERF_D = [
    1.57449261107098347e1, 1.17693950891312499e2, 5.37181101862009858e2,
    1.62138957456669019e3, 3.29079923573345963e3, 4.36261909014324716e3,
    3.43936767414372164e3, 1.23033935480374942e3]
cdef double[6] ERF_P = [
    3.05326634961232344e-1, 3.60344899949804439e-1, 1.25781726111229246e-1,
    1.60837851487422766e-2, 6.58749161529837803e-4, 1.63153871373020978e-2]
cdef double[5] ERF_Q = [
    2.56852019228982242e0, 1.87295284992346047e0, 5.27905102951428412e-1,
    6.05183413124413191e-2, 2.33520497626869185e-3]


cdef double _erf_small(double x) noexcept nogil:
    cdef double z = x * x
    cdef double xnum = ERF_A[4] * z
    cdef double xden = z
    cdef int i
    for i in range(3):
        xnum = (xnum + ERF_A[i]) * z
        xden = (xden + ERF_B[i]) * z
    return x * (xnum + ERF_A[3]) / (xden + ERF_B[3])


cdef double _erfc_large(double y, int scaled) noexcept nogil:
    cdef double xnum, xden, result, z, ysq, delta
    cdef int i
    if y <= 4.0:
        xnum = ERF_C[8] * y
        xden = y
        for i in range(7):
            xnum = (xnum + ERF_C[i]) * y
            xden = (xden + ERF_D[i]) * y
        result = (xnum + ERF_C[7]) / (xden + ERF_D[7])
    else:
        if not scaled and y > 26.6:
            return 0.0
        z = 1.0 / (y * y)
        xnum = ERF_P[5] * z
        xden = z
        for i in range(4):
            xnum = (xnum + ERF_P[i]) * z
            xden = (xden + ERF_Q[i]) * z
        result = z * (xnum + ERF_P[4]) / (xden + ERF_Q[4])
        result = (INV_SQRT_PI - result) / y
    if not scaled:
        ysq = floor(y * 16.0) / 16.0
        delta = (y - ysq) * (y + ysq)
        result = exp(-ysq * ysq) * exp(-delta) * result
    return result


cdef double _erfc(double x) noexcept nogil:
    cdef double y = fabs(x)
    if y <= 0.46875:
        return 1.0 - _erf_small(x)
    if y == INFINITY:
        return 0.0 if x > 0 else 2.0
    if x > 0:
        return _erfc_large(y, 0)
    return 2.0 - _erfc_large(y, 0)


cdef double _erfcx(double x) noexcept nogil:
    if x >= 0.46875:
        if x == INFINITY:
            return 0.0
        if x > 6.71e7:
            return INV_SQRT_PI / x
        return _erfc_large(x, 1)
    if x > -26.0:
        return exp(x * x) * _erfc(x)
    return INFINITY


cdef inline double _std_normal_cdf(double x) noexcept nogil:
    return 0.5 * _erfc(-x / SQRT2)


cdef inline double _std_normal_sf(double x) noexcept nogil:
    return 0.5 * _erfc(x / SQRT2)


cdef double _std_normal_logcdf(double x) noexcept nogil:
    if x > -1.0:
        return log(_std_normal_cdf(x))
    return log(0.5 * _erfcx(-x / SQRT2)) - 0.5 * x * x


# ---------------------------------------------------------------------------
# Normal quantile (same rational approximations as numerics).
# ---------------------------------------------------------------------------

cdef double[8] PPND_A = [
    3.3871328727963666080e0, 1.3314166789178437745e2, 1.9715909503065514427e3,
    1.3731693765509461125e4, 4.5921953931549871457e4, 6.7265770927008700853e4,
    3.3430575583588128105e4, 2.5090809287301226727e3]
cdef double[7] PPND_B = [
    4.2313330701600911252e1, 6.8718700749205790830e2, 5.3941960214247511077e3,
    2.1213794301586595867e4, 3.9307895800092710610e4, 2.8729085735721942674e4,
    5.2264952788528545610e3]
cdef double[8] PPND_C = [
    1.42343711074968357734e0, 4.63033784615654529590e0, 5.76949722146069140550e0,
    3.64784832476320460504e0, 1.27045825245236838258e0, 2.41780725177450611770e-1,
    2.27238449892691845833e-2, 7.74545014278341407640e-4]
cdef double[7] PPND_D = [
    2.05319162663775882187e0, 1.67638483018380384940e0, 6.89767334985100004550e-1,
    1.48103976427480074590e-1, 1.51986665636164571966e-2, 5.47593808499534494600e-4,
    1.05075007164441684324e-9]
cdef double[8] PPND_E = [
    6.65790464350110377720e0, 5.46378491116411436990e0, 1.78482653991729133580e0,
    2.96560571828504891230e-1, 2.65321895265761230930e-2, 1.24266094738807843860e-3,
    2.71155556874348757815e-5, 2.01033439929228813265e-7]
cdef double[7] PPND_F = [
    5.99832206555887937690e-1, 1.36929880922735805310e-1, 1.48753612908506148525e-2,
    7.86869131145613259100e-4, 1.84631831751005468180e-5, 1.42151175831644588870e-7,
    2.04426310338993978564e-15]


cdef double _std_normal_quantile(double u) noexcept nogil:
    cdef double q, r, num, den, val
    cdef int i
    if u == 0.0:
        return -INFINITY
    if u == 1.0:
        return INFINITY
    q = u - 0.5
    if fabs(q) <= 0.425:
        r = 0.180625 - q * q
        num = PPND_A[7]
        for i in range(6, -1, -1):
            num = num * r + PPND_A[i]
        den = PPND_B[6]
        for i in range(5, -1, -1):
            den = den * r + PPND_B[i]
        den = den * r + 1.0
        return q * num / den
    r = u if q < 0.0 else 1.0 - u
    r = sqrt(-log(r))
    if r <= 5.0:
        r = r - 1.6
        num = PPND_C[7]
        for i in range(6, -1, -1):
            num = num * r + PPND_C[i]
        den = PPND_D[6]
        for i in range(5, -1, -1):
            den = den * r + PPND_D[i]
        den = den * r + 1.0
    else:
        r = r - 5.0
        num = PPND_E[7]
        for i in range(6, -1, -1):
            num = num * r + PPND_E[i]
        den = PPND_F[6]
        for i in range(5, -1, -1):
            den = den * r + PPND_F[i]
        den = den * r + 1.0
    val = num / den
    return -val if q < 0.0 else val


cdef double _chi2_sf_even(double x, int half_dof) noexcept nogil:
    # survival function with 2*half_dof degrees of freedom
    cdef double h, term, total
    cdef int j
    if x == INFINITY:
        return 0.0
    h = 0.5 * x
    term = 1.0
    total = 1.0
    for j in range(1, half_dof):
        term = term * h / j
        total += term
    return exp(-h) * total


# ---------------------------------------------------------------------------
# Bayes factors (mirrors of evalues._bf_beta / _bf_normal).
# ---------------------------------------------------------------------------

cdef double _growth_integral(double w, double span) noexcept nogil:
    cdef double x, total, term, span_pow, c, contrib, e
    cdef int k
    if w == -INFINITY:
        return 0.0
    x = w * span
    if fabs(x) < 0.5:
        total = 0.0
        term = 1.0
        span_pow = span
        for k in range(60):
            c = span_pow / (k + 1.0) + span_pow * span / (k + 2.0)
            contrib = term * c
            total += contrib
            if fabs(contrib) <= 1e-17 * fabs(total):
                break
            term *= w / (k + 1.0)
            span_pow *= span
        return total
    e = exp(x)
    return ((1.0 + span) * e - 1.0) / w - (e - 1.0) / (w * w)


cdef double _bf_beta(double p, double alt_span, double null_span, int composite) noexcept nogil:
    cdef double num, den
    if p >= 1.0:
        return 0.0
    num = _growth_integral(log1p(-p), alt_span) / alt_span
    if not composite:
        return num
    if p <= 0.0:
        return INFINITY
    den = _growth_integral(log(p), null_span) / null_span
    if den == 0.0:
        return INFINITY
    return num / den


cdef double _interval_prob(double lo, double hi) noexcept nogil:
    cdef double v
    if lo >= 0.0:
        v = _std_normal_sf(lo) - _std_normal_sf(hi)
    else:
        v = _std_normal_cdf(hi) - _std_normal_cdf(lo)
    return v if v > 0.0 else 0.0


cdef double _log_interval_prob(double lo, double hi) noexcept nogil:
    cdef double la = _std_normal_logcdf(lo)
    cdef double lb = _std_normal_logcdf(hi)
    cdef double ed = exp(la - lb)
    if ed >= 1.0:
        return -INFINITY
    return lb + log1p(-ed)


cdef double _bf_normal_from_q(double q, double sigma, double alt_span,
                              double null_span, int composite) noexcept nogil:
    cdef double a, m, i1, i2, half_q2, log_i1, lbf
    a = alt_span / sigma
    if composite:
        m = null_span / sigma
        i1 = _interval_prob(-q, a - q)
        i2 = _interval_prob(-m - q, -q)
        if i2 == 0.0:
            return INFINITY
        return (null_span / alt_span) * (i1 / i2)
    half_q2 = 0.5 * q * q
    if half_q2 <= 700.0:
        i1 = _interval_prob(-q, a - q)
        return (sigma * SQRT_2PI / alt_span) * exp(half_q2) * i1
    log_i1 = _log_interval_prob(-q, a - q)
    lbf = log(sigma * SQRT_2PI / alt_span) + half_q2 + log_i1
    if lbf > 709.0:
        return INFINITY
    return exp(lbf)


cdef double _bf_normal(double p, double sigma, double alt_span,
                       double null_span, int composite) noexcept nogil:
    cdef double q
    if p >= 1.0:
        return 0.0
    if p <= 0.0:
        return INFINITY
    q = -_std_normal_quantile(p)
    return _bf_normal_from_q(q, sigma, alt_span, null_span, composite)


# ---------------------------------------------------------------------------
# Per-repetition combination.
# ---------------------------------------------------------------------------

cdef enum:
    STUDIES = 6


cdef inline void _insertion_sort(double* values, int n) noexcept nogil:
    cdef int i, j
    cdef double key
    for i in range(1, n):
        key = values[i]
        j = i - 1
        while j >= 0 and values[j] > key:
            values[j + 1] = values[j]
            j -= 1
        values[j + 1] = key


cdef double _fisher_tail(double* p, int gamma, int k) noexcept nogil:
    cdef int i
    cdef double acc = 0.0
    cdef double stat
    for i in range(gamma - 1, STUDIES):
        if p[i] == 0.0:
            return 0.0
    for i in range(gamma - 1, STUDIES):
        acc += log(p[i])
    stat = -2.0 * acc
    return _chi2_sf_even(stat, k)


cdef double _stouffer_tail(double* p, int gamma, int k) noexcept nogil:
    cdef int i
    cdef int has_zero = 0
    cdef int has_one = 0
    cdef double acc, z
    for i in range(gamma - 1, STUDIES):
        if p[i] == 0.0:
            has_zero = 1
        if p[i] == 1.0:
            has_one = 1
    if has_zero and has_one:
        return 1.0
    if has_zero:
        return 0.0
    acc = 0.0
    for i in range(gamma - 1, STUDIES):
        acc += _std_normal_quantile(p[i])
    z = acc / sqrt(<double>k)
    return _std_normal_cdf(z)


cdef double _minimum_tail(double* p, int gamma, int k) noexcept nogil:
    cdef double m = p[gamma - 1]
    if m >= 1.0:
        return 1.0
    return -expm1(k * log1p(-m))


cdef double _merge_first(double* e, int k, int code) noexcept nogil:
    cdef int i
    cdef double acc
    if code == 4:  # product
        for i in range(k):
            if e[i] == INFINITY:
                return INFINITY
        for i in range(k):
            if e[i] == 0.0:
                return 0.0
        acc = 1.0
        for i in range(k):
            acc *= e[i]
        return acc
    if code == 5:  # arithmetic mean
        acc = 0.0
        for i in range(k):
            acc += e[i]
        return acc / k
    for i in range(k):  # harmonic mean
        if e[i] == 0.0:
            return 0.0
    acc = 0.0
    for i in range(k):
        acc += 1.0 / e[i]
    if acc == 0.0:
        return INFINITY
    return k / acc


def run_chunk(seed, chunk_index, n_reps, model_kind, sigma, theta_bounds,
              gamma, method_codes, bf_mode, bf_alt_span, bf_null_span,
              bf_composite, bf_null_mean, out):
    """Compiled twin of the pure kernel's run_chunk; same contract."""
    cdef double[::1] bounds_view = theta_bounds
    cdef long[::1] codes_view = method_codes
    cdef double[:, ::1] out_view = out
    cdef u64 c_seed = <u64>seed
    cdef u64 c_chunk = <u64>chunk_index
    cdef int c_reps = n_reps
    cdef int c_model = model_kind
    cdef double c_sigma = sigma
    cdef int c_gamma = gamma
    cdef int c_bf_mode = bf_mode
    cdef double c_alt = bf_alt_span
    cdef double c_null = bf_null_span
    cdef int c_comp = 1 if bf_composite else 0
    cdef double c_e0 = bf_null_mean
    cdef int n_methods = codes_view.shape[0]
    cdef int k = STUDIES - c_gamma + 1
    cdef int need_e = 0
    cdef int i, m, rep, code
    cdef double u, t, val, bf
    cdef double th[STUDIES]
    cdef double p[STUDIES]
    cdef double e[STUDIES]
    cdef RngState rng

    if bounds_view.shape[0] != STUDIES:
        raise ValueError("theta_bounds must have 6 entries")
    if out_view.shape[0] != n_methods or out_view.shape[1] < c_reps:
        raise ValueError("out has the wrong shape")
    if not 1 <= c_gamma <= STUDIES:
        raise ValueError("gamma out of range")
    for m in range(n_methods):
        if codes_view[m] >= 4:
            need_e = 1

    with nogil:
        _rng_init(&rng, c_seed, c_chunk)
        for rep in range(c_reps):
            for i in range(STUDIES):
                th[i] = bounds_view[i] * (1.0 - _rng_uniform(&rng))
            for i in range(STUDIES):
                u = _rng_uniform(&rng)
                t = th[i]
                if c_model == 0:
                    if t <= 0.0:
                        p[i] = pow(u, 1.0 / (1.0 - t))
                    else:
                        p[i] = -expm1(log1p(-u) / (1.0 + t))
                else:
                    if t == 0.0:
                        p[i] = 1.0 - u
                    else:
                        p[i] = _std_normal_sf(t / c_sigma + _std_normal_quantile(u))
            _insertion_sort(p, STUDIES)
            if need_e:
                for i in range(STUDIES):
                    if c_bf_mode == 1:
                        bf = _bf_beta(p[i], c_alt, c_null, c_comp)
                    else:
                        bf = _bf_normal(p[i], c_sigma, c_alt, c_null, c_comp)
                    e[i] = bf / c_e0
                _insertion_sort(e, STUDIES)
            for m in range(n_methods):
                code = codes_view[m]
                if code == 0:
                    val = _fisher_tail(p, c_gamma, k)
                elif code == 1:
                    val = _stouffer_tail(p, c_gamma, k)
                elif code == 2:
                    val = _minimum_tail(p, c_gamma, k)
                elif code == 3:
                    val = 1.0 if k * p[c_gamma - 1] > 1.0 else k * p[c_gamma - 1]
                else:
                    val = _merge_first(e, k, code)
                out_view[m, rep] = val
