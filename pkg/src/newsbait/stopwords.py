"""Shared 50-word English stopword list and token helpers.

The same list backs the language heuristic used during ingestion and the
stopword-fraction feature of the detector, so the two stay in sync.
"""

import string

# The 50 most common English words. Deliberately short: membership of a
# single word is enough for the permissive language gate.
ENGLISH_STOPWORDS = frozenset({
    "the", "be", "to", "of", "and", "a", "in", "that", "have", "i",
    "it", "for", "not", "on", "with", "he", "as", "you", "do", "at",
    "this", "but", "his", "by", "from", "they", "we", "say", "her", "she",
    "or", "an", "will", "my", "one", "all", "would", "there", "their", "what",
    "so", "up", "out", "if", "about", "who", "get", "which", "go", "me",
})

_STRIP_CHARS = string.punctuation + "‘’“”–—…"


def normalize_token(word: str) -> str:
    """Case-fold a word and strip surrounding punctuation for lexicon lookups."""
    return word.strip(_STRIP_CHARS).casefold()
