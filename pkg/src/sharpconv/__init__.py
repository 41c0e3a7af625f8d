"""Sharp constants for convolutions of power-curve measures."""
