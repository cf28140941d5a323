"""Pure-Python/numpy reference implementations of the hot kernels.

This backend is always available and is the semantic reference for the
compiled core in ``_core.pyx``. The environment steps are written with
scalar ``math`` calls in the exact operation order of the C code so both
backends produce bit-identical trajectories; the dense-layer kernels use
BLAS through numpy and agree with the compiled loops to rounding error.
"""

import math

import numpy as np

ACT_LINEAR = 0
ACT_RELU = 1
ACT_TANH = 2
ACT_SOFTMAX = 3

# -- dense-layer kernels ----------------------------------------------------


def dense_forward(x, w, b, act):
    """One dense layer over a batch: z = x w^T + b, a = g(z).

    x: (n, in), w: (out, in), b: (out,). Returns (z, a), both (n, out).
    """
    z = x @ w.T + b
    if act == ACT_LINEAR:
        a = z.copy()
    elif act == ACT_RELU:
        a = np.maximum(z, 0.0)
    elif act == ACT_TANH:
        a = np.tanh(z)
    elif act == ACT_SOFTMAX:
        shifted = z - z.max(axis=1, keepdims=True)
        e = np.exp(shifted)
        a = e / e.sum(axis=1, keepdims=True)
    else:
        raise ValueError(f"unknown activation id {act}")
    return z, a


def act_backward(act, z, a, da):
    """Elementwise dL/dz from dL/da for the given activation."""
    if act == ACT_LINEAR:
        return da.copy()
    if act == ACT_RELU:
        return da * (z > 0.0)
    if act == ACT_TANH:
        return da * (1.0 - a * a)
    if act == ACT_SOFTMAX:
        # Jacobian-vector product: dz_i = a_i * (da_i - sum_j da_j a_j)
        s = (da * a).sum(axis=1, keepdims=True)
        return a * (da - s)
    raise ValueError(f"unknown activation id {act}")


def dense_backward(dz, x, w):
    """Parameter and input gradients for one dense layer.

    dz: (n, out) = dL/dz, x: (n, in) layer input, w: (out, in).
    Returns (dw, db, dx) with dw/db summed over the batch.
    """
    dw = dz.T @ x
    db = dz.sum(axis=0)
    dx = dz @ w
    return dw, db, dx


# -- environment physics ----------------------------------------------------

# CartPole constants (fixed; the drifting knobs are function arguments)
_CP_GRAVITY = 9.8
_CP_FORCE_MAG = 10.0
_CP_TAU = 0.02
_CP_THETA_LIMIT = 15.0 * 2.0 * math.pi / 360.0
_CP_X_LIMIT = 2.4
# Ratio between pole-hinge and cart-track friction coefficients; one
# `friction` parameter scales both terms (0.000002/0.0005 at the classic
# defaults, so friction=0.0005 reproduces the original constants).
_CP_POLE_FRICTION_RATIO = 0.004


def cart_pole_step(x, x_dot, theta, theta_dot, action,
                   masspole, length, masscart, friction):
    """One Euler step of the friction-aware cart-pole dynamics.

    `length` is the half-length of the pole. `action` 1 pushes right,
    0 pushes left. Returns (x, x_dot, theta, theta_dot, terminated).
    """
    force = _CP_FORCE_MAG if action == 1 else -_CP_FORCE_MAG
    costheta = math.cos(theta)
    sintheta = math.sin(theta)
    total_mass = masscart + masspole
    polemass_length = masspole * length
    mu_c = friction
    mu_p = friction * _CP_POLE_FRICTION_RATIO
    if x_dot > 0.0:
        sgn = 1.0
    elif x_dot < 0.0:
        sgn = -1.0
    else:
        sgn = 0.0
    temp = (force + polemass_length * theta_dot * theta_dot * sintheta
            - mu_c * sgn) / total_mass
    theta_acc = (_CP_GRAVITY * sintheta - costheta * temp
                 - mu_p * theta_dot / polemass_length) / (
        length * (4.0 / 3.0 - masspole * costheta * costheta / total_mass))
    x_acc = temp - polemass_length * theta_acc * costheta / total_mass
    x = x + _CP_TAU * x_dot
    x_dot = x_dot + _CP_TAU * x_acc
    theta = theta + _CP_TAU * theta_dot
    theta_dot = theta_dot + _CP_TAU * theta_acc
    terminated = (x < -_CP_X_LIMIT or x > _CP_X_LIMIT
                  or theta < -_CP_THETA_LIMIT or theta > _CP_THETA_LIMIT)
    return x, x_dot, theta, theta_dot, terminated


# MountainCar constants
_MC_MIN_POS = -1.2
_MC_MAX_POS = 0.6
_MC_MAX_SPEED = 0.07
_MC_GOAL_POS = 0.5


def mountain_car_step(position, velocity, action, force, gravity,
                      goal_velocity):
    """One step of the mountain-car dynamics (actions 0/1/2 = left/coast/right)."""
    velocity = velocity + (action - 1) * force + math.cos(3.0 * position) * (-gravity)
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
    terminated = position >= _MC_GOAL_POS and velocity >= goal_velocity
    return position, velocity, terminated


# Acrobot constants (second link and inertias are fixed)
_AB_LINK_LENGTH_2 = 1.0
_AB_LINK_COM_POS_2 = 0.5
_AB_LINK_MOI = 1.0
_AB_GRAVITY = 9.8
_AB_DT = 0.2
_AB_MAX_VEL_1 = 4.0 * math.pi
_AB_MAX_VEL_2 = 9.0 * math.pi


def _acrobot_dsdt(th1, th2, om1, om2, torque, l1, lc1, m1, m2):
    lc2 = _AB_LINK_COM_POS_2
    i1 = _AB_LINK_MOI
    i2 = _AB_LINK_MOI
    g = _AB_GRAVITY
    d1 = (m1 * lc1 * lc1
          + m2 * (l1 * l1 + lc2 * lc2 + 2.0 * l1 * lc2 * math.cos(th2))
          + i1 + i2)
    d2 = m2 * (lc2 * lc2 + l1 * lc2 * math.cos(th2)) + i2
    phi2 = m2 * lc2 * g * math.cos(th1 + th2 - math.pi / 2.0)
    phi1 = (-m2 * l1 * lc2 * om2 * om2 * math.sin(th2)
            - 2.0 * m2 * l1 * lc2 * om2 * om1 * math.sin(th2)
            + (m1 * lc1 + m2 * l1) * g * math.cos(th1 - math.pi / 2.0)
            + phi2)
    dd2 = (torque + d2 / d1 * phi1
           - m2 * l1 * lc2 * om1 * om1 * math.sin(th2)
           - phi2) / (m2 * lc2 * lc2 + i2 - d2 * d2 / d1)
    dd1 = -(d2 * dd2 + phi1) / d1
    return om1, om2, dd1, dd2


def _wrap_pi(x):
    while x > math.pi:
        x -= 2.0 * math.pi
    while x < -math.pi:
        x += 2.0 * math.pi
    return x


def acrobot_step(th1, th2, om1, om2, action,
                 link_length_1, link_com_pos_1, link_mass_1, link_mass_2):
    """One RK4 step of the two-link acrobot (actions 0/1/2 = torque -1/0/+1)."""
    torque = float(action - 1)
    l1 = link_length_1
    lc1 = link_com_pos_1
    m1 = link_mass_1
    m2 = link_mass_2
    dt = _AB_DT
    dt2 = dt / 2.0

    k1 = _acrobot_dsdt(th1, th2, om1, om2, torque, l1, lc1, m1, m2)
    k2 = _acrobot_dsdt(th1 + dt2 * k1[0], th2 + dt2 * k1[1],
                       om1 + dt2 * k1[2], om2 + dt2 * k1[3],
                       torque, l1, lc1, m1, m2)
    k3 = _acrobot_dsdt(th1 + dt2 * k2[0], th2 + dt2 * k2[1],
                       om1 + dt2 * k2[2], om2 + dt2 * k2[3],
                       torque, l1, lc1, m1, m2)
    k4 = _acrobot_dsdt(th1 + dt * k3[0], th2 + dt * k3[1],
                       om1 + dt * k3[2], om2 + dt * k3[3],
                       torque, l1, lc1, m1, m2)

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

    terminated = (-math.cos(th1) - math.cos(th2 + th1)) > 1.0
    return th1, th2, om1, om2, terminated
