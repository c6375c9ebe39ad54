from ._core import (
    RouteAttributes,
    TrailrankError,
    compute_grade,
    cosine,
    cumulative_mean,
    describe,
    description_grammar,
    embed,
    estimate_token_count,
    filter_route,
    format_grade,
    format_km,
    int_to_words,
    is_circular,
    is_out_and_back,
    rank,
    route_length,
    run_pipeline,
    synth_routes,
)

__all__ = [
    "RouteAttributes",
    "TrailrankError",
    "compute_grade",
    "cosine",
    "cumulative_mean",
    "describe",
    "description_grammar",
    "embed",
    "estimate_token_count",
    "filter_route",
    "format_grade",
    "format_km",
    "int_to_words",
    "is_circular",
    "is_out_and_back",
    "rank",
    "route_length",
    "run_pipeline",
    "synth_routes",
]
