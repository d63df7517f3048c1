# MC-DCSK baseband simulator and analysis library
__version__ = "1.0.0"
