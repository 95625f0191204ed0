"""File formats for DTSs, nets, specs, rectangle streams and results."""
