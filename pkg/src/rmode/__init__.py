"""
rmode - ground-wave signal strength simulation for MF R-Mode transmitters.

Subpackages:
    core          shared types, exceptions, logging
    conductivity  ground-conductivity rasters, land-cover mapping, ea tables
    fitting       least-squares estimation of C, e and ea from reference curves
    propagation   closed-form and raster path-integrated field strength
    coverage      coverage grid sweeps and exporters
    config        run configuration loader
"""

__version__ = "0.1.0"
