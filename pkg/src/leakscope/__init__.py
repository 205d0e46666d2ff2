"""leakscope: offline analysis of employer-information disclosure in professional profiles.

Pipeline stages live in their own modules: ``dorkgen`` (search query builder),
``ingest``, ``wrangle``, ``leakscan``, ``persona``, ``analytics``, ``report``,
plus ``synth`` for seeded synthetic corpora and ``rulesets`` for data-file checks.
"""

from .errors import LeakscopeError, SchemaError

__version__ = "0.1.0"

__all__ = ["LeakscopeError", "SchemaError", "__version__"]
