"""Pydantic models for DTSs, nets, code specs and simulation results."""
