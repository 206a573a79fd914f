"""Locally private reporting over a diffusion-based molecular channel."""

try:
    from ._mcldp import *  # noqa: F401,F403
except ImportError:  # in-tree builds put the extension on sys.path directly
    from _mcldp import *  # noqa: F401,F403
