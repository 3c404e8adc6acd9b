"""voicegate: natural-language command gateway with retrieval-based mapping.

Text (or transcribed audio) goes in; a catalog command plus confidence and
per-stage timings come out. Subpackages cover the grammar catalog, variant
corpus, trigram embedding index, mapping pipeline, simulated scene, TCP
gateway server, and the evaluation harness.
"""

from .errors import VoicegateError
from .grammar import CommandCatalog, ExecutableCommand

__version__ = "0.1.0"

__all__ = ["CommandCatalog", "ExecutableCommand", "VoicegateError", "__version__"]
