"""Classical fixed-step fourth-order Runge-Kutta."""

from __future__ import annotations


def rk4_step(f, t, y, dt):
    """One RK4 step for y' = f(t, y); ``y`` may be any array-like supporting +, *."""
    k1 = f(t, y)
    k2 = f(t + 0.5 * dt, y + (0.5 * dt) * k1)
    k3 = f(t + 0.5 * dt, y + (0.5 * dt) * k2)
    k4 = f(t + dt, y + dt * k3)
    return y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
