"""Algebra, DTS search, nets, component code, construction, codec and channel."""
