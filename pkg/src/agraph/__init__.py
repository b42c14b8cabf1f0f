"""Design-space exploration over weighted event graphs.

Typical use goes through the pipeline::

    from agraph.descriptions import load_design
    from agraph.pipeline import generate, simulate_manifest, build_report

or the ``agraph`` command line.
"""

__version__ = "0.1.0"
