"""Fibers, thickness and dimension data for a family of non-invertible skew products."""

__version__ = "0.1.0"

from .geometry import Interval, IntervalUnion, affine_image, box_count, gaps, intersect, normalize, union
from .system import Itinerary, SystemParams, default_config, load_config, validate
from .fibers import fiber_set, membership, overlap_set, preimage_components
from .cantor import gap_lemma, hd_lower_bound, hky_region, interleaved, present, thickness

__all__ = [
    "Interval", "IntervalUnion", "affine_image", "box_count", "gaps", "intersect", "normalize",
    "union", "Itinerary", "SystemParams", "default_config", "load_config", "validate",
    "fiber_set", "membership", "overlap_set", "preimage_components", "gap_lemma",
    "hd_lower_bound", "hky_region", "interleaved", "present", "thickness",
]
