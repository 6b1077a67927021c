"""srlproj: cross-lingual projection of head-based semantic-role annotations
using contextual-embedding word similarity, plus the curation tooling for
building and scoring human-validated gold test sets."""

__version__ = "0.1.0"
