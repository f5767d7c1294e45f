"""Short vectors of random unit-covolume lattices and their limit laws."""

__version__ = "0.1.0"
