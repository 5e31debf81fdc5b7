"""Softmax classifier collapse geometry: closed forms, solvers, counterexamples."""

try:
    from collapselab._core import *  # noqa: F401,F403
except ImportError:  # build-tree layout: extension next to the sources
    from _core import *  # noqa: F401,F403
