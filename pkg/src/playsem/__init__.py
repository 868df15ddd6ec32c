"""Game-semantics engine for dependent type theory.

Arenas and justified sequences at the bottom, deterministic play oracles
(skeletons) above them, interaction-based composition, a dependently typed
layer with contexts and type formers, a small term language with a
bidirectional checker and syntactic normalizer, and an HTTP play service.
"""

__version__ = "0.1.0"
