"""Body-area-network PHY/link simulation toolkit."""

__version__ = "0.1.0"
