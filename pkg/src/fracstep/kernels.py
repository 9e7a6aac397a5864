"""Backend selection: compiled kernels when available, pure Python otherwise."""

try:
    from fracstep import _kernels as _impl

    COMPILED = True
except ImportError:  # extension not built on this platform
    from fracstep import _kernels_py as _impl

    COMPILED = False

from fracstep import _kernels_py as pure

power_series_pow = _impl.power_series_pow
binomial_weights = _impl.binomial_weights
series_quotient = _impl.series_quotient
causal_convolve = _impl.causal_convolve
pole_series = _impl.pole_series

__all__ = [
    "COMPILED",
    "pure",
    "power_series_pow",
    "binomial_weights",
    "series_quotient",
    "causal_convolve",
    "pole_series",
]
