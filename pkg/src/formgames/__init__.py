"""Binary quadratic form values, planar lattice dynamics, and refereed games.

A desk-scale laboratory with three layers:

* ``algebra`` / ``lattice`` / ``forms`` -- the dictionary between values of
  binary indefinite quadratic forms at integer points and diagonal-flow
  orbits on the space of unimodular planar lattices;
* ``geometry`` -- exponential charts, closed horocycles, thickenings and a
  numerical transversality toolkit;
* ``game`` / ``strategy`` -- referees for the classical nested-ball game and
  the hyperplane absolute/percentage games, with the explicit avoidance and
  bounded-orbit strategies that play them.
"""

from . import algebra, lattice  # noqa: F401

__version__ = "0.1.0"
