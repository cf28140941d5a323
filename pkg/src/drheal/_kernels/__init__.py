"""Kernel backend selection.

The compiled core (``_core``, built from Cython) is preferred when it
imports cleanly; otherwise the pure-Python reference backend (``pyref``)
is used. Set ``DRHEAL_BACKEND=python`` or ``DRHEAL_BACKEND=compiled`` to
force a choice; forcing ``compiled`` raises if the extension is missing.

Consumers call the module-level functions, which dispatch to the active
backend. ``set_backend`` exists for tests and benchmarks that need to
compare backends in one process.
"""

import os

from . import pyref

ACT_LINEAR = pyref.ACT_LINEAR
ACT_RELU = pyref.ACT_RELU
ACT_TANH = pyref.ACT_TANH
ACT_SOFTMAX = pyref.ACT_SOFTMAX

try:
    from . import _core
except ImportError:
    _core = None


def _select_initial():
    forced = os.environ.get("DRHEAL_BACKEND", "").strip().lower()
    if forced == "python":
        return pyref
    if forced == "compiled":
        if _core is None:
            raise ImportError(
                "DRHEAL_BACKEND=compiled but the compiled core is not built"
            )
        return _core
    if forced:
        raise ValueError(f"unknown DRHEAL_BACKEND value: {forced!r}")
    return _core if _core is not None else pyref


_impl = _select_initial()


def backend_name():
    return "compiled" if _impl is _core else "python"


def available_backends():
    names = ["python"]
    if _core is not None:
        names.append("compiled")
    return names


def set_backend(name):
    """Switch the active backend ('python' or 'compiled'). Test/bench hook."""
    global _impl
    if name == "python":
        _impl = pyref
    elif name == "compiled":
        if _core is None:
            raise ValueError("compiled backend is not available")
        _impl = _core
    else:
        raise ValueError(f"unknown backend {name!r}")


def dense_forward(x, w, b, act):
    return _impl.dense_forward(x, w, b, act)


def act_backward(act, z, a, da):
    return _impl.act_backward(act, z, a, da)


def dense_backward(dz, x, w):
    return _impl.dense_backward(dz, x, w)


def cart_pole_step(x, x_dot, theta, theta_dot, action,
                   masspole, length, masscart, friction):
    return _impl.cart_pole_step(x, x_dot, theta, theta_dot, action,
                                masspole, length, masscart, friction)


def mountain_car_step(position, velocity, action, force, gravity,
                      goal_velocity):
    return _impl.mountain_car_step(position, velocity, action, force,
                                   gravity, goal_velocity)


def acrobot_step(th1, th2, om1, om2, action, link_length_1, link_com_pos_1,
                 link_mass_1, link_mass_2):
    return _impl.acrobot_step(th1, th2, om1, om2, action, link_length_1,
                              link_com_pos_1, link_mass_1, link_mass_2)
