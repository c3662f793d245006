"""Latent representations of words and graph nodes."""

from .matrix import EmbeddingMatrix
from .node2vec import WalkConfig, node2vec, node2vec_walks, transition_probabilities
from .skipgram import SkipgramError, build_vocab, skipgram_train
from .spectral import laplacian_eigenmap, normalized_laplacian, project_2d
from .words import canonical_token, character_vectors, training_sentences, word_embeddings

__all__ = [
    "EmbeddingMatrix",
    "WalkConfig",
    "SkipgramError",
    "build_vocab",
    "skipgram_train",
    "node2vec",
    "node2vec_walks",
    "transition_probabilities",
    "laplacian_eigenmap",
    "normalized_laplacian",
    "project_2d",
    "canonical_token",
    "character_vectors",
    "training_sentences",
    "word_embeddings",
]
