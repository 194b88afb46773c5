"""Batch sentence encoding into onoma vector files.

The adapter turns "id<TAB>sentence" text files into the toolkit's JSONL or
binary vector formats using a pluggable encoder backend: any
sentence-transformers model identifier, or the offline deterministic
``hash:<dim>`` featurizer for environments without model downloads.
"""

__version__ = "0.1.0"
