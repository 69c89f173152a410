"""Feature-based clickbait scoring of headline texts.

A headline maps to a fixed 12-feature vector (lexical surface cues plus
hits against an editable phrase lexicon); a logistic linear model turns the
vector into a probability pair ``(score_1, score_2)`` with
``score_2 = 1 - score_1``. A full-batch gradient-descent trainer lets the
weights be refit on any labeled headline corpus. The hot path
(``extract_features`` + ``score``) is tuned to stay well above 20k
headlines/second on one core.
"""

from __future__ import annotations

import csv
import json
import math
import re
from dataclasses import dataclass
from importlib import resources

import numpy as np

from .errors import ConfigError, CsvFormatError, NumericalError, TrainingError
from .stopwords import ENGLISH_STOPWORDS, _STRIP_CHARS

FEATURE_NAMES = (
    "word_count",
    "mean_word_length",
    "starts_with_digit",
    "contains_digit",
    "question_word_start",
    "second_person_count",
    "demonstrative_start",
    "exclamation_count",
    "question_mark_count",
    "uppercase_word_fraction",
    "stopword_fraction",
    "lexicon_hit_count",
)

CLICKBAIT = "clickbait"
NOT_CLICKBAIT = "not_clickbait"

DEFAULT_REGISTRY_VERSION = "lex12-v1"

_QUESTION_WORDS = frozenset({"who", "what", "when", "where", "why", "how"})
_SECOND_PERSON = frozenset({"you", "your", "yours"})
_DEMONSTRATIVES = frozenset({"this", "these", "that", "those"})
_DIGIT_RE = re.compile(r"\d")
_NUMBER_TOKEN = "<n>"


class FeatureRegistry:
    """Versioned feature set: the 12 fixed features plus a phrase lexicon.

    Lexicon phrases are whitespace-separated lowercase tokens; the special
    token ``<n>`` matches any all-digit token ("top <n>" matches "top 10").
    """

    def __init__(self, version: str, lexicon: list[str] | tuple[str, ...]):
        self.version = version
        self.lexicon = tuple(lexicon)
        self._by_first: dict[str, list[tuple[str, ...]]] = {}
        self._wild_first: list[tuple[str, ...]] = []
        for phrase in self.lexicon:
            tokens = tuple(phrase.casefold().split())
            if not tokens:
                continue
            if tokens[0] == _NUMBER_TOKEN:
                self._wild_first.append(tokens)
            else:
                self._by_first.setdefault(tokens[0], []).append(tokens)

    @property
    def size(self) -> int:
        return len(FEATURE_NAMES)

    def lexicon_hits(self, tokens: list[str]) -> int:
        hits = 0
        n = len(tokens)
        by_first = self._by_first
        for i, tok in enumerate(tokens):
            candidates = by_first.get(tok)
            if candidates is not None:
                for phrase in candidates:
                    if i + len(phrase) <= n and _phrase_match(tokens, i, phrase):
                        hits += 1
            if self._wild_first and tok.isdigit():
                for phrase in self._wild_first:
                    if i + len(phrase) <= n and _phrase_match(tokens, i, phrase):
                        hits += 1
        return hits


def _phrase_match(tokens: list[str], start: int, phrase: tuple[str, ...]) -> bool:
    for j, p in enumerate(phrase):
        t = tokens[start + j]
        if p == _NUMBER_TOKEN:
            if not t.isdigit():
                return False
        elif t != p:
            return False
    return True


@dataclass(slots=True)
class FeatureVector:
    values: list[float]
    registry_version: str


@dataclass(slots=True)
class ClickbaitScore:
    score_1: float  # clickbait probability
    score_2: float  # 1 - score_1


@dataclass(frozen=True)
class ModelWeights:
    bias: float
    weights: tuple[float, ...]
    registry_version: str

    def __post_init__(self):
        if len(self.weights) != len(FEATURE_NAMES):
            raise ConfigError(
                f"expected {len(FEATURE_NAMES)} weights, got {len(self.weights)}"
            )
        if not math.isfinite(self.bias) or not all(map(math.isfinite, self.weights)):
            raise ConfigError("model weights must be finite")


def extract_features(text: str, registry: FeatureRegistry) -> FeatureVector:
    """Compute the 12-feature vector for a whitespace-normalized headline.

    Counts are raw; fractions are in [0, 1]. Deterministic and pure.
    """
    words = text.split()
    n = len(words)
    if n == 0:
        raise ValueError("cannot extract features from empty text")
    total_len = 0
    upper = 0
    stop = 0
    second_person = 0
    tokens = []
    append = tokens.append
    for w in words:
        total_len += len(w)
        if w.isupper():
            upper += 1
        t = w.strip(_STRIP_CHARS).casefold()
        append(t)
        if t in ENGLISH_STOPWORDS:
            stop += 1
        if t in _SECOND_PERSON:
            second_person += 1
    first = tokens[0]
    values = [
        float(n),
        total_len / n,
        1.0 if words[0][0].isdigit() else 0.0,
        1.0 if _DIGIT_RE.search(text) else 0.0,
        1.0 if first in _QUESTION_WORDS else 0.0,
        float(second_person),
        1.0 if first in _DEMONSTRATIVES else 0.0,
        float(text.count("!")),
        float(text.count("?")),
        upper / n,
        stop / n,
        float(registry.lexicon_hits(tokens)),
    ]
    return FeatureVector(values, registry.version)


def _logistic(z: float) -> float:
    if z >= 0.0:
        return 1.0 / (1.0 + math.exp(-z))
    ez = math.exp(z)
    return ez / (1.0 + ez)


def score(features: FeatureVector, model: ModelWeights) -> ClickbaitScore:
    """Clickbait probability pair from the logistic linear model."""
    if features.registry_version != model.registry_version:
        raise ConfigError(
            f"feature registry {features.registry_version!r} does not match "
            f"model registry {model.registry_version!r}"
        )
    z = model.bias
    for w, v in zip(model.weights, features.values):
        z += w * v
    s1 = _logistic(z)
    return ClickbaitScore(s1, 1.0 - s1)


def classify(scoreval: ClickbaitScore, threshold: float = 0.5) -> str:
    """Label a score pair; the threshold boundary is inclusive."""
    return CLICKBAIT if scoreval.score_1 >= threshold else NOT_CLICKBAIT


# -- training

def _design_matrix(corpus, registry: FeatureRegistry):
    X = np.empty((len(corpus), registry.size))
    y = np.empty(len(corpus))
    for i, (text, label) in enumerate(corpus):
        X[i] = extract_features(text, registry).values
        y[i] = float(label)
    return X, y


def _loss_and_gradient(bias, weights, X, y, l2):
    """L2-regularized mean cross-entropy and its exact gradient.

    The bias is not regularized. Uses the overflow-safe formulation
    ``max(z,0) - y*z + log1p(exp(-|z|))``.
    """
    z = X @ weights + bias
    loss = float(np.mean(np.maximum(z, 0.0) - y * z + np.log1p(np.exp(-np.abs(z)))))
    loss += 0.5 * l2 * float(weights @ weights)
    p = np.where(z >= 0, 1.0 / (1.0 + np.exp(-np.abs(z))),
                 np.exp(-np.abs(z)) / (1.0 + np.exp(-np.abs(z))))
    resid = p - y
    grad_w = X.T @ resid / len(y) + l2 * weights
    grad_b = float(np.mean(resid))
    return loss, grad_w, grad_b


def train_logistic(
    corpus,
    learning_rate: float = 0.05,
    iterations: int = 2000,
    l2: float = 1e-4,
    registry: FeatureRegistry | None = None,
) -> ModelWeights:
    """Fit logistic weights by full-batch gradient descent from a zero start.

    ``corpus`` is a sequence of ``(headline, label)`` with labels in {0, 1};
    both classes must be present. Stops at the iteration budget or when the
    gradient max-norm drops below 1e-8.
    """
    registry = registry if registry is not None else default_registry()
    if len(corpus) < 2:
        raise TrainingError("corpus must contain at least 2 examples")
    labels = {label for _, label in corpus}
    if not labels <= {0, 1}:
        raise TrainingError(f"labels must be 0 or 1, got {sorted(labels)}")
    if len(labels) < 2:
        raise TrainingError("corpus contains a single class; cannot train")

    X, y = _design_matrix(corpus, registry)
    weights = np.zeros(registry.size)
    bias = 0.0
    for iteration in range(iterations):
        loss, grad_w, grad_b = _loss_and_gradient(bias, weights, X, y, l2)
        if not math.isfinite(loss):
            raise NumericalError(
                f"non-finite loss at iteration {iteration} "
                f"(lr={learning_rate}, l2={l2}); reduce the learning rate"
            )
        if max(float(np.max(np.abs(grad_w))), abs(grad_b)) < 1e-8:
            break
        weights -= learning_rate * grad_w
        bias -= learning_rate * grad_b
    return ModelWeights(bias=bias, weights=tuple(weights), registry_version=registry.version)


def evaluate(
    model: ModelWeights,
    corpus,
    threshold: float = 0.5,
    registry: FeatureRegistry | None = None,
) -> float:
    """Fraction of correct classifications over a labeled corpus."""
    registry = registry if registry is not None else default_registry()
    if not corpus:
        raise TrainingError("cannot evaluate on an empty corpus")
    correct = 0
    for text, label in corpus:
        predicted = classify(score(extract_features(text, registry), model), threshold)
        if predicted == (CLICKBAIT if label == 1 else NOT_CLICKBAIT):
            correct += 1
    return correct / len(corpus)


# -- persistence

def save_model(model: ModelWeights, registry: FeatureRegistry, path: str) -> None:
    payload = {
        "registry_version": model.registry_version,
        "bias": model.bias,
        "weights": list(model.weights),
        "lexicon": list(registry.lexicon),
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")


def _model_from_dict(payload: dict) -> tuple[ModelWeights, FeatureRegistry]:
    try:
        registry = FeatureRegistry(payload["registry_version"], payload["lexicon"])
        model = ModelWeights(
            bias=float(payload["bias"]),
            weights=tuple(float(w) for w in payload["weights"]),
            registry_version=registry.version,
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"invalid model file: {exc}") from exc
    return model, registry


def load_model(path: str) -> tuple[ModelWeights, FeatureRegistry]:
    """Load a model JSON (weights plus the lexicon its registry needs)."""
    with open(path, encoding="utf-8") as fh:
        return _model_from_dict(json.load(fh))


def default_lexicon() -> tuple[str, ...]:
    text = resources.files("newsbait.data").joinpath("clickbait_lexicon.txt").read_text("utf-8")
    phrases = []
    for line in text.splitlines():
        line = line.strip()
        if line and not line.startswith("#"):
            phrases.append(line)
    return tuple(phrases)


def default_registry() -> FeatureRegistry:
    return FeatureRegistry(DEFAULT_REGISTRY_VERSION, default_lexicon())


def default_model() -> tuple[ModelWeights, FeatureRegistry]:
    """The shipped model, trained on the bundled labeled headline corpus."""
    text = resources.files("newsbait.data").joinpath("default_model.json").read_text("utf-8")
    return _model_from_dict(json.loads(text))


def read_labeled_corpus(path: str) -> list[tuple[str, int]]:
    """Read a ``text,label`` CSV (header required, labels 0/1)."""
    out = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip().lower() for h in header[:2]] != ["text", "label"]:
            raise CsvFormatError("expected header 'text,label'", line=1)
        for lineno, row in enumerate(reader, start=2):
            if len(row) != 2:
                raise CsvFormatError(f"expected 2 fields, got {len(row)}", line=lineno)
            text, label = row
            if label.strip() not in ("0", "1"):
                raise CsvFormatError(f"label must be 0 or 1, got {label!r}", line=lineno)
            out.append((text, int(label)))
    return out
