"""Figure rendering for the irs-mimo experiment CSV artifacts.

The boundary with the simulator is a file-format contract: this package
reads only CSV (plus the documented column schemas) and writes image files.
"""

from irs_plots.figures import FIGURE_KINDS, SchemaError, render

__all__ = ["FIGURE_KINDS", "SchemaError", "render"]
