"""Refined tropical invariants of toric surfaces."""
