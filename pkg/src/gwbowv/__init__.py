"""Hierarchical product classification with gwBoWV document vectors.

Word vectors are clustered into semantic groups, documents are composed into
per-cluster vector sums plus inverse cluster frequencies, and taxonomy paths
are ranked by a two-level ensemble of path, node and depth classifiers.
"""

from gwbowv.errors import ToolkitError

__version__ = "0.1.0"

__all__ = ["ToolkitError", "__version__"]
