"""Built-in performance models for the bundled example designs.

Importing this package registers every model by name.
"""

from . import mac_array, sfq_cnn, sfq_fir, systolic_array  # noqa: F401
