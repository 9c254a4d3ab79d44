"""Transverse measures, intensities and intersection covolumes."""

from fractions import Fraction

from ._transversal import (
    ModelSpec,
    PreconditionError,
    ResourceError,
    UsageError,
    builtin_test_functions,
    cell_at_identity,
    estimate_covolume_alt,
    estimate_covolume_kac,
    estimate_intensity,
    inequality_report,
    mecke_check,
    oracle_suite,
    run_config,
    sample_ambient,
    sample_palm,
    tessellate_cyclic,
)
from ._transversal import exact_covolume as _exact_covolume
from ._transversal import exact_intensity as _exact_intensity


def _weights(weights):
    return [str(Fraction(w)) for w in weights]


def exact_covolume(n, weights, phases, r):
    """Order-r covolume of a finite cyclic system, computed two ways, as Fractions."""
    direct, kac = _exact_covolume(n, _weights(weights), phases, r)
    return Fraction(direct), Fraction(kac)


def exact_intensity(n, weights, phases):
    return Fraction(_exact_intensity(n, _weights(weights), phases))


def cyclic_model(n, weights, phases):
    return ModelSpec.cyclic(n, _weights(weights), phases)


__all__ = [
    "ModelSpec",
    "PreconditionError",
    "ResourceError",
    "UsageError",
    "builtin_test_functions",
    "cell_at_identity",
    "cyclic_model",
    "estimate_covolume_alt",
    "estimate_covolume_kac",
    "estimate_intensity",
    "exact_covolume",
    "exact_intensity",
    "inequality_report",
    "mecke_check",
    "oracle_suite",
    "run_config",
    "sample_ambient",
    "sample_palm",
    "tessellate_cyclic",
]
