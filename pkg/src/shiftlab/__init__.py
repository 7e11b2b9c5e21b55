"""Exact computations for one-sided sofic shifts: covers, pasts, cocycles, relations and suspensions."""

__version__ = "0.1.0"
