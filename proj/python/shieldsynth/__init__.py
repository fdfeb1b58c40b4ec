"""Runtime-shield synthesis for black-box control policies."""

try:
    # installed wheel: the extension lives inside the package
    from ._shieldsynth import (
        ConfigError,
        ContractViolation,
        ConvergenceError,
        NumericalError,
        Shield,
        ShieldParseError,
        SynthesisFailure,
        __version__,
        environments,
        evaluate,
        infer_dynamics,
        sample_initial,
        step,
        synthesize,
    )
except ImportError:  # in-tree builds put the module on PYTHONPATH top-level
    from _shieldsynth import (
        ConfigError,
        ContractViolation,
        ConvergenceError,
        NumericalError,
        Shield,
        ShieldParseError,
        SynthesisFailure,
        __version__,
        environments,
        evaluate,
        infer_dynamics,
        sample_initial,
        step,
        synthesize,
    )

__all__ = [
    "ConfigError",
    "ContractViolation",
    "ConvergenceError",
    "NumericalError",
    "Shield",
    "ShieldParseError",
    "SynthesisFailure",
    "__version__",
    "environments",
    "evaluate",
    "infer_dynamics",
    "sample_initial",
    "step",
    "synthesize",
]
