"""Higher-order staircase codes: construction, DTS and net toolkit, codec and BER simulation."""

__version__ = "0.1.0"
