"""sdpforge: silver syntactic pre-training data for relation extraction.

Pipeline pieces, roughly in data-flow order:

* :mod:`sdpforge.conllu` — CoNLL-U parsing, validation, serialization.
* :mod:`sdpforge.trees` — conj propagation, span heads, shortest paths.
* :mod:`sdpforge.corpus` — gold RE corpus ingestion and statistics.
* :mod:`sdpforge.pathstats` — label/length statistics over entity paths.
* :mod:`sdpforge.silver` — silver instance generation and serialization.
* :mod:`sdpforge.trainer` — desk-scale two-phase training protocol.
* :mod:`sdpforge.synthtask` — synthetic task for protocol experiments.
* :mod:`sdpforge.cli` — the ``sdpforge`` command.
"""

from .errors import SdpforgeError

__version__ = "0.1.0"

__all__ = ["SdpforgeError", "__version__"]
