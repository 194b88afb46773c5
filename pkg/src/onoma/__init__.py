"""Corpus-semantics toolkit.

Pipelines for embedding-based topic discovery (manifold reduction +
density clustering + class-based TF-IDF + NPMI-driven Bayesian
hyperparameter search), word-sense induction over instance embeddings,
and behavioral-profile correspondence analysis with moon-plot output.
"""

__version__ = "0.1.0"
