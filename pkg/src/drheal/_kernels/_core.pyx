# cython: language_level=3
"""Compiled kernels: dense-layer math and environment physics.

Semantics mirror ``pyref.py``. The scalar environment steps execute the
same IEEE operations in the same order as the reference backend and are
bit-identical to it. The dense kernels use plain loops for small batches
(action selection, single observations) where call overhead dominates,
and defer to BLAS through numpy for training-sized batches; both paths
agree with the reference to rounding error.
"""

from libc.math cimport cos, sin, tanh, exp, pi

import numpy as np

cimport numpy as cnp

cnp.import_array()

ACT_LINEAR = 0
ACT_RELU = 1
ACT_TANH = 2
ACT_SOFTMAX = 3


# -- dense-layer kernels ----------------------------------------------------

# Above this batch size BLAS (via numpy) beats the plain loops; the loops
# win below it by skipping call overhead. The constant is coarse: the
# crossover sits around a few rows for 64-wide layers.
DEF _BLAS_CUTOFF = 8


def dense_forward(double[:, ::1] x, double[:, ::1] w, double[::1] b, int act):
    cdef Py_ssize_t n = x.shape[0]
    cdef Py_ssize_t n_in = x.shape[1]
    cdef Py_ssize_t n_out = w.shape[0]
    cdef cnp.ndarray[double, ndim=2] z_arr
    cdef cnp.ndarray[double, ndim=2] a_arr = np.empty((n, n_out))
    cdef double[:, ::1] z
    cdef double[:, ::1] a = a_arr
    cdef Py_ssize_t i, j, k
    cdef double acc, m, s, v

    if n > _BLAS_CUTOFF:
        z_arr = np.asarray(x) @ np.asarray(w).T + np.asarray(b)
        z = z_arr
    else:
        z_arr = np.empty((n, n_out))
        z = z_arr
        for i in range(n):
            for j in range(n_out):
                acc = 0.0
                for k in range(n_in):
                    acc += x[i, k] * w[j, k]
                z[i, j] = acc + b[j]

    if act == 0:
        for i in range(n):
            for j in range(n_out):
                a[i, j] = z[i, j]
    elif act == 1:
        for i in range(n):
            for j in range(n_out):
                v = z[i, j]
                a[i, j] = v if v > 0.0 else 0.0
    elif act == 2:
        for i in range(n):
            for j in range(n_out):
                a[i, j] = tanh(z[i, j])
    elif act == 3:
        for i in range(n):
            m = z[i, 0]
            for j in range(1, n_out):
                if z[i, j] > m:
                    m = z[i, j]
            s = 0.0
            for j in range(n_out):
                v = exp(z[i, j] - m)
                a[i, j] = v
                s += v
            for j in range(n_out):
                a[i, j] /= s
    else:
        raise ValueError(f"unknown activation id {act}")
    return z_arr, a_arr


def act_backward(int act, double[:, ::1] z, double[:, ::1] a,
                 double[:, ::1] da):
    cdef Py_ssize_t n = z.shape[0]
    cdef Py_ssize_t d = z.shape[1]
    cdef cnp.ndarray[double, ndim=2] dz_arr = np.empty((n, d))
    cdef double[:, ::1] dz = dz_arr
    cdef Py_ssize_t i, j
    cdef double s, t

    if act == 0:
        for i in range(n):
            for j in range(d):
                dz[i, j] = da[i, j]
    elif act == 1:
        for i in range(n):
            for j in range(d):
                dz[i, j] = da[i, j] if z[i, j] > 0.0 else 0.0
    elif act == 2:
        for i in range(n):
            for j in range(d):
                t = a[i, j]
                dz[i, j] = da[i, j] * (1.0 - t * t)
    elif act == 3:
        for i in range(n):
            s = 0.0
            for j in range(d):
                s += da[i, j] * a[i, j]
            for j in range(d):
                dz[i, j] = a[i, j] * (da[i, j] - s)
    else:
        raise ValueError(f"unknown activation id {act}")
    return dz_arr


def dense_backward(double[:, ::1] dz, double[:, ::1] x, double[:, ::1] w):
    cdef Py_ssize_t n = dz.shape[0]
    cdef Py_ssize_t n_out = dz.shape[1]
    cdef Py_ssize_t n_in = x.shape[1]
    cdef cnp.ndarray[double, ndim=2] dw_arr
    cdef cnp.ndarray[double, ndim=1] db_arr
    cdef cnp.ndarray[double, ndim=2] dx_arr
    cdef double[:, ::1] dw
    cdef double[::1] db
    cdef double[:, ::1] dx
    cdef Py_ssize_t i, j, k
    cdef double g

    if n > _BLAS_CUTOFF:
        dz_np = np.asarray(dz)
        dw_arr = dz_np.T @ np.asarray(x)
        db_arr = dz_np.sum(axis=0)
        dx_arr = dz_np @ np.asarray(w)
        return dw_arr, db_arr, dx_arr

    dw_arr = np.zeros((n_out, n_in))
    db_arr = np.zeros(n_out)
    dx_arr = np.zeros((n, n_in))
    dw = dw_arr
    db = db_arr
    dx = dx_arr
    for i in range(n):
        for j in range(n_out):
            g = dz[i, j]
            db[j] += g
            for k in range(n_in):
                dw[j, k] += g * x[i, k]
                dx[i, k] += g * w[j, k]
    return dw_arr, db_arr, dx_arr


# -- environment physics ----------------------------------------------------

cdef double _CP_GRAVITY = 9.8
cdef double _CP_FORCE_MAG = 10.0
cdef double _CP_TAU = 0.02
cdef double _CP_THETA_LIMIT = 15.0 * 2.0 * pi / 360.0
cdef double _CP_X_LIMIT = 2.4
cdef double _CP_POLE_FRICTION_RATIO = 0.004


def cart_pole_step(double x, double x_dot, double theta, double theta_dot,
                   int action, double masspole, double length,
                   double masscart, double friction):
    cdef double force = _CP_FORCE_MAG if action == 1 else -_CP_FORCE_MAG
    cdef double costheta = cos(theta)
    cdef double sintheta = sin(theta)
    cdef double total_mass = masscart + masspole
    cdef double polemass_length = masspole * length
    cdef double mu_c = friction
    cdef double mu_p = friction * _CP_POLE_FRICTION_RATIO
    cdef double sgn
    if x_dot > 0.0:
        sgn = 1.0
    elif x_dot < 0.0:
        sgn = -1.0
    else:
        sgn = 0.0
    cdef double temp = (force + polemass_length * theta_dot * theta_dot * sintheta
                        - mu_c * sgn) / total_mass
    cdef double theta_acc = (_CP_GRAVITY * sintheta - costheta * temp
                             - mu_p * theta_dot / polemass_length) / (
        length * (4.0 / 3.0 - masspole * costheta * costheta / total_mass))
    cdef double x_acc = temp - polemass_length * theta_acc * costheta / total_mass
    x = x + _CP_TAU * x_dot
    x_dot = x_dot + _CP_TAU * x_acc
    theta = theta + _CP_TAU * theta_dot
    theta_dot = theta_dot + _CP_TAU * theta_acc
    cdef bint terminated = (x < -_CP_X_LIMIT or x > _CP_X_LIMIT
                            or theta < -_CP_THETA_LIMIT
                            or theta > _CP_THETA_LIMIT)
    return x, x_dot, theta, theta_dot, bool(terminated)


cdef double _MC_MIN_POS = -1.2
cdef double _MC_MAX_POS = 0.6
cdef double _MC_MAX_SPEED = 0.07
cdef double _MC_GOAL_POS = 0.5


def mountain_car_step(double position, double velocity, int action,
                      double force, double gravity, double goal_velocity):
    velocity = velocity + (action - 1) * force + cos(3.0 * position) * (-gravity)
    if velocity > _MC_MAX_SPEED:
        velocity = _MC_MAX_SPEED
    elif velocity < -_MC_MAX_SPEED:
        velocity = -_MC_MAX_SPEED
    position = position + velocity
    if position > _MC_MAX_POS:
        position = _MC_MAX_POS
    elif position < _MC_MIN_POS:
        position = _MC_MIN_POS
    if position == _MC_MIN_POS and velocity < 0.0:
        velocity = 0.0
    cdef bint terminated = position >= _MC_GOAL_POS and velocity >= goal_velocity
    return position, velocity, bool(terminated)


cdef double _AB_LINK_COM_POS_2 = 0.5
cdef double _AB_LINK_MOI = 1.0
cdef double _AB_GRAVITY = 9.8
cdef double _AB_DT = 0.2
cdef double _AB_MAX_VEL_1 = 4.0 * pi
cdef double _AB_MAX_VEL_2 = 9.0 * pi


cdef void _acrobot_dsdt(double th1, double th2, double om1, double om2,
                        double torque, double l1, double lc1, double m1,
                        double m2, double* out) noexcept:
    cdef double lc2 = _AB_LINK_COM_POS_2
    cdef double i1 = _AB_LINK_MOI
    cdef double i2 = _AB_LINK_MOI
    cdef double g = _AB_GRAVITY
    cdef double d1 = (m1 * lc1 * lc1
                      + m2 * (l1 * l1 + lc2 * lc2 + 2.0 * l1 * lc2 * cos(th2))
                      + i1 + i2)
    cdef double d2 = m2 * (lc2 * lc2 + l1 * lc2 * cos(th2)) + i2
    cdef double phi2 = m2 * lc2 * g * cos(th1 + th2 - pi / 2.0)
    cdef double phi1 = (-m2 * l1 * lc2 * om2 * om2 * sin(th2)
                        - 2.0 * m2 * l1 * lc2 * om2 * om1 * sin(th2)
                        + (m1 * lc1 + m2 * l1) * g * cos(th1 - pi / 2.0)
                        + phi2)
    cdef double dd2 = (torque + d2 / d1 * phi1
                       - m2 * l1 * lc2 * om1 * om1 * sin(th2)
                       - phi2) / (m2 * lc2 * lc2 + i2 - d2 * d2 / d1)
    cdef double dd1 = -(d2 * dd2 + phi1) / d1
    out[0] = om1
    out[1] = om2
    out[2] = dd1
    out[3] = dd2


cdef double _wrap_pi(double x) noexcept:
    while x > pi:
        x -= 2.0 * pi
    while x < -pi:
        x += 2.0 * pi
    return x


def acrobot_step(double th1, double th2, double om1, double om2, int action,
                 double link_length_1, double link_com_pos_1,
                 double link_mass_1, double link_mass_2):
    cdef double torque = <double>(action - 1)
    cdef double l1 = link_length_1
    cdef double lc1 = link_com_pos_1
    cdef double m1 = link_mass_1
    cdef double m2 = link_mass_2
    cdef double dt = _AB_DT
    cdef double dt2 = dt / 2.0
    cdef double k1[4]
    cdef double k2[4]
    cdef double k3[4]
    cdef double k4[4]

    _acrobot_dsdt(th1, th2, om1, om2, torque, l1, lc1, m1, m2, k1)
    _acrobot_dsdt(th1 + dt2 * k1[0], th2 + dt2 * k1[1],
                  om1 + dt2 * k1[2], om2 + dt2 * k1[3],
                  torque, l1, lc1, m1, m2, k2)
    _acrobot_dsdt(th1 + dt2 * k2[0], th2 + dt2 * k2[1],
                  om1 + dt2 * k2[2], om2 + dt2 * k2[3],
                  torque, l1, lc1, m1, m2, k3)
    _acrobot_dsdt(th1 + dt * k3[0], th2 + dt * k3[1],
                  om1 + dt * k3[2], om2 + dt * k3[3],
                  torque, l1, lc1, m1, m2, k4)

    th1 = th1 + dt / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0])
    th2 = th2 + dt / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1])
    om1 = om1 + dt / 6.0 * (k1[2] + 2.0 * k2[2] + 2.0 * k3[2] + k4[2])
    om2 = om2 + dt / 6.0 * (k1[3] + 2.0 * k2[3] + 2.0 * k3[3] + k4[3])

    th1 = _wrap_pi(th1)
    th2 = _wrap_pi(th2)
    if om1 > _AB_MAX_VEL_1:
        om1 = _AB_MAX_VEL_1
    elif om1 < -_AB_MAX_VEL_1:
        om1 = -_AB_MAX_VEL_1
    if om2 > _AB_MAX_VEL_2:
        om2 = _AB_MAX_VEL_2
    elif om2 < -_AB_MAX_VEL_2:
        om2 = -_AB_MAX_VEL_2

    cdef bint terminated = (-cos(th1) - cos(th2 + th1)) > 1.0
    return th1, th2, om1, om2, bool(terminated)
